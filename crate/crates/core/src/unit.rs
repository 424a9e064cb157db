//! Units: two degree-4 vertices joined by one crease and sharing the two
//! panels on either side of it, whose side creases fold with equal magnitude.
//!
//! Both vertices use grid orientation. Crease 0 points north, 1 west, 2 south
//! and 3 east, so `alpha` lists the sectors (EN, NW, WS, SE). The top vertex
//! reaches the bottom one through its south crease; the bottom vertex sees
//! the same crease as its north crease.
//!
//! Fold-angle slots follow the usual seven-crease picture of a unit:
//!
//! | slot | crease |
//! |------|--------|
//! | rho1 | shared crease |
//! | rho2 | top west |
//! | rho3 | top north |
//! | rho4 | top east |
//! | rho5 | bottom west |
//! | rho6 | bottom south |
//! | rho7 | bottom east |
//!
//! A unit is valid when `rho2 = s2 * rho5` and `rho4 = s4 * rho7` along a
//! whole interval of motion.

use crate::angle::{wrapped_diff, Tolerances};
use crate::error::{Error, Result};
use crate::vertex::{flat_creases, realized_branch, solve_at_with, sup_valid, BranchId, ClassTag, Vertex4};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

pub const NORTH: usize = 0;
pub const WEST: usize = 1;
pub const SOUTH: usize = 2;
pub const EAST: usize = 3;

/// Solutions of the flat-foldable unit equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FfMode {
    /// Both vertices on branch 1, `tan(a1/2) / tan(a2/2) = tan(a3/2) / tan(a4/2)`.
    APlus,
    /// Both vertices on branch 1, `tan(a1/2) / tan(a2/2) = tan(a4/2) / tan(a3/2)`.
    AMinus,
    /// Both vertices on branch 2, `tan(a1/2) tan(a2/2) = tan(a3/2) tan(a4/2)`.
    CPlus,
    /// Both vertices on branch 2, `tan(a1/2) tan(a2/2) tan(a3/2) tan(a4/2) = 1`.
    CMinus,
}

impl FfMode {
    pub const ALL: [FfMode; 4] = [FfMode::APlus, FfMode::AMinus, FfMode::CPlus, FfMode::CMinus];

    pub fn branch(self) -> BranchId {
        match self {
            FfMode::APlus | FfMode::AMinus => BranchId::Branch1,
            FfMode::CPlus | FfMode::CMinus => BranchId::Branch2,
        }
    }

    pub fn signs(self) -> [i8; 2] {
        match self {
            FfMode::APlus | FfMode::CMinus => [1, 1],
            FfMode::AMinus | FfMode::CPlus => [-1, -1],
        }
    }

    /// `tan(a4/2)` from the half-angle tangents of the other three angles.
    fn t4(self, t1: f64, t2: f64, t3: f64) -> f64 {
        match self {
            FfMode::APlus => t2 * t3 / t1,
            FfMode::AMinus => t1 * t3 / t2,
            FfMode::CPlus => t1 * t2 / t3,
            FfMode::CMinus => 1.0 / (t1 * t2 * t3),
        }
    }

    /// Residual of the defining identity, written without division.
    pub fn residual(self, a: [f64; 4]) -> f64 {
        let [t1, t2, t3, t4] = a.map(|x| (0.5 * x).tan());
        match self {
            FfMode::APlus => t1 * t4 - t2 * t3,
            FfMode::AMinus => t2 * t4 - t1 * t3,
            FfMode::CPlus => t1 * t2 - t3 * t4,
            FfMode::CMinus => t1 * t2 * t3 * t4 - 1.0,
        }
    }
}

impl fmt::Display for FfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FfMode::APlus => "a-plus",
            FfMode::AMinus => "a-minus",
            FfMode::CPlus => "c-plus",
            FfMode::CMinus => "c-minus",
        })
    }
}

impl FromStr for FfMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "a-plus" | "aplus" => Ok(FfMode::APlus),
            "a-minus" | "aminus" => Ok(FfMode::AMinus),
            "c-plus" | "cplus" => Ok(FfMode::CPlus),
            "c-minus" | "cminus" => Ok(FfMode::CMinus),
            other => Err(Error::InvalidUnit(format!("unknown mode '{other}'"))),
        }
    }
}

/// Where a unit came from; used when counting independent sector angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum UnitKind {
    StraightLineBasic,
    FlatFoldableBasic,
    GeneralBasic,
    FlatFoldable { mode: FfMode },
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub top: Vertex4,
    pub bottom: Vertex4,
    /// `[s2, s4]` in `rho2 = s2 * rho5`, `rho4 = s4 * rho7`.
    pub signs: [i8; 2],
    pub branch_top: BranchId,
    pub branch_bottom: BranchId,
    pub kind: UnitKind,
    /// Length of the shared crease.
    pub shared_length: f64,
}

impl Unit {
    pub fn new(
        top: Vertex4,
        bottom: Vertex4,
        signs: [i8; 2],
        branches: [BranchId; 2],
        kind: UnitKind,
    ) -> Result<Unit> {
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidUnit(format!("signs must be +-1, got {signs:?}")));
        }
        Ok(Unit {
            top,
            bottom,
            signs,
            branch_top: branches[0],
            branch_bottom: branches[1],
            kind,
            shared_length: 1.0,
        })
    }

    /// The eight sector angles, four per vertex. Each group starts with the
    /// two sectors away from the shared crease and ends with the two beside it,
    /// counter-clockwise.
    pub fn sector(&self) -> [f64; 8] {
        let t = self.top.alpha();
        let b = self.bottom.rotated(2).alpha();
        [t[0], t[1], t[2], t[3], b[0], b[1], b[2], b[3]]
    }

    pub fn from_sector(
        sector: [f64; 8],
        signs: [i8; 2],
        branches: [BranchId; 2],
        kind: UnitKind,
    ) -> Result<Unit> {
        let top = Vertex4::new([sector[0], sector[1], sector[2], sector[3]])?;
        let bottom = Vertex4::new([sector[4], sector[5], sector[6], sector[7]])?.rotated(2);
        Unit::new(top, bottom, signs, branches, kind)
    }

    /// The seven fold-angle slots from the two vertex configurations.
    pub fn rho_slots(top: [f64; 4], bottom: [f64; 4]) -> [f64; 7] {
        [top[SOUTH], top[WEST], top[NORTH], top[EAST], bottom[WEST], bottom[SOUTH], bottom[EAST]]
    }

    /// The same unit seen after a half turn: the bottom vertex becomes the top.
    pub fn swapped(&self) -> Unit {
        Unit {
            top: self.bottom.rotated(2),
            bottom: self.top.rotated(2),
            signs: [self.signs[1], self.signs[0]],
            branch_top: self.branch_bottom.shifted(2),
            branch_bottom: self.branch_top.shifted(2),
            kind: self.kind,
            shared_length: self.shared_length,
        }
    }

    /// Solves both vertices with crease `driver` of the top vertex at `t`.
    pub fn evaluate(&self, driver: usize, t: f64, tol: &Tolerances) -> Result<([f64; 4], [f64; 4])> {
        let top = solve_at_with(&self.top, driver, t, self.branch_top, tol)?;
        // Past |rho| = pi the panels pass through each other.
        if let Some(&x) = top.rho_lifted.iter().find(|x| x.abs() > PI - tol.full_fold) {
            return Err(Error::OutOfDomain { value: x, lo: -PI, hi: PI });
        }
        let bottom = self.transmit(&top.rho, tol)?;
        Ok((top.rho, bottom))
    }

    /// Bottom configuration matching the top one, passed over the shared
    /// crease, or over a side crease when the shared crease stays flat on the
    /// bottom branch.
    pub fn transmit(&self, top: &[f64; 4], tol: &Tolerances) -> Result<[f64; 4]> {
        let flat = flat_creases(&self.bottom, self.branch_bottom);
        let (crease, value) = if !flat[NORTH] {
            (NORTH, top[SOUTH])
        } else if !flat[WEST] {
            (WEST, f64::from(self.signs[0]) * top[WEST])
        } else if !flat[EAST] {
            (EAST, f64::from(self.signs[1]) * top[EAST])
        } else {
            return Ok([0.0; 4]);
        };
        match solve_at_with(&self.bottom, crease, value, self.branch_bottom, tol) {
            Ok(s) => Ok(s.rho),
            // The passed value sits outside the bottom branch: the unit cannot
            // follow the top vertex here.
            Err(Error::OutOfDomain { .. }) | Err(Error::Underdetermined(_)) | Err(Error::WrongClass(_)) => {
                Err(Error::OutOfDomain { value, lo: 0.0, hi: 0.0 })
            }
            Err(e) => Err(e),
        }
    }

    /// Crease of the top vertex used to drive the unit.
    pub fn driver(&self) -> Option<usize> {
        let flat = flat_creases(&self.top, self.branch_top);
        [NORTH, WEST, EAST, SOUTH].into_iter().find(|&c| !flat[c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitReport {
    /// Crease of the top vertex swept during validation.
    pub driver: usize,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    /// max |rho2 - s2 rho5|
    pub residual_west: f64,
    /// max |rho4 - s4 rho7|
    pub residual_east: f64,
    /// max |top south - bottom north|
    pub residual_shared: f64,
    pub max_residual: f64,
    pub valid: bool,
}

/// Sweeps the unit over its common interval and measures how well the side
/// creases match.
pub fn validate_unit(u: &Unit, n_samples: usize) -> Result<UnitReport> {
    validate_unit_with(u, n_samples, &Tolerances::default())
}

pub fn validate_unit_with(u: &Unit, n_samples: usize, tol: &Tolerances) -> Result<UnitReport> {
    let Some(driver) = u.driver() else {
        return Err(Error::EmptyInterval("top vertex admits only the flat state".into()));
    };
    let ok = |t: f64| u.evaluate(driver, t, tol).is_ok();
    let hi = sup_valid(ok);
    let lo = -sup_valid(|t| ok(-t));
    if hi - lo < tol.root {
        return Err(Error::EmptyInterval(format!(
            "the unit only moves on [{lo:.3e}, {hi:.3e}]"
        )));
    }
    let n = n_samples.max(2);
    let (mut rw, mut re, mut rs) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..n {
        let t = if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        let (top, bottom) = u.evaluate(driver, t, tol)?;
        rw = rw.max(wrapped_diff(top[WEST], f64::from(u.signs[0]) * bottom[WEST]).abs());
        re = re.max(wrapped_diff(top[EAST], f64::from(u.signs[1]) * bottom[EAST]).abs());
        rs = rs.max(wrapped_diff(top[SOUTH], bottom[NORTH]).abs());
    }
    let max_residual = rw.max(re).max(rs);
    Ok(UnitReport {
        driver,
        lo,
        hi,
        samples: n,
        residual_west: rw,
        residual_east: re,
        residual_shared: rs,
        max_residual,
        valid: max_residual < tol.unit,
    })
}

/// First sign pair under which the unit validates.
pub fn infer_signs(u: &Unit, n_samples: usize) -> Option<[i8; 2]> {
    [[1, 1], [1, -1], [-1, 1], [-1, -1]].into_iter().find(|&signs| {
        let c = Unit { signs, ..*u };
        validate_unit(&c, n_samples).is_ok_and(|r| r.valid)
    })
}

fn check_open_angle(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0 && x < PI) {
        return Err(Error::InvalidAngle(format!("{name} = {x} rad is outside (0, pi)")));
    }
    Ok(())
}

fn ff_vertex(a1: f64, a2: f64, tol: &Tolerances) -> Result<Vertex4> {
    if (a1 - FRAC_PI_2).abs() <= tol.angle && (a2 - FRAC_PI_2).abs() <= tol.angle {
        return Err(Error::DegenerateVertex(
            "both free angles of a flat-foldable vertex equal pi/2".into(),
        ));
    }
    Vertex4::new([a1, a2, PI - a1, PI - a2])
}

/// The flat-foldable unit for `mode`: solves the fourth free angle, builds
/// both vertices and assigns branches and signs.
pub fn solve_ff_unit(a1: f64, a2: f64, a3: f64, mode: FfMode) -> Result<Unit> {
    let tol = Tolerances::default();
    for (name, x) in [("alpha1", a1), ("alpha2", a2), ("alpha3", a3)] {
        check_open_angle(name, x)?;
    }
    let t = [a1, a2, a3].map(|x| (0.5 * x).tan());
    let a4 = 2.0 * mode.t4(t[0], t[1], t[2]).atan();
    check_open_angle("alpha4", a4)?;
    let top = ff_vertex(a1, a2, &tol)?;
    let bottom = ff_vertex(a3, a4, &tol)?;
    let b = mode.branch();
    Unit::new(top, bottom, mode.signs(), [b, b], UnitKind::FlatFoldable { mode })
}

/// The fourth angle of a flat-foldable unit.
pub fn ff_alpha4(a1: f64, a2: f64, a3: f64, mode: FfMode) -> f64 {
    let t = [a1, a2, a3].map(|x| (0.5 * x).tan());
    2.0 * mode.t4(t[0], t[1], t[2]).atan()
}

/// One side of the pair of infeasible unit equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideCheck {
    /// `(tb - ta) / (tb + ta)`, always in (-1, 1).
    pub ratio_side: f64,
    /// `(1 + ta tb) / (1 - ta tb)`, infinite at the pole.
    pub product_side: f64,
    pub pole: bool,
    /// Distance separating the two ranges: `min(1 - |ratio|, |product| - 1)`.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfeasibilityReport {
    /// Top vertex on branch 1, bottom on branch 2.
    pub mixed_12: SideCheck,
    /// Top vertex on branch 2, bottom on branch 1.
    pub mixed_21: SideCheck,
    pub margin: f64,
}

fn side(ratio: (f64, f64), product: (f64, f64)) -> SideCheck {
    let (ta, tb) = ratio;
    let ratio_side = (tb - ta) / (tb + ta);
    let x = product.0 * product.1;
    let den = 1.0 - x;
    let pole = den.abs() <= f64::EPSILON * (1.0 + x);
    let product_side = if pole { f64::INFINITY } else { (1.0 + x) / den };
    let ratio_gap = 2.0 * ta.min(tb) / (ta + tb);
    let product_gap = if pole { f64::INFINITY } else { 2.0 * x.min(1.0) / den.abs() };
    SideCheck {
        ratio_side,
        product_side,
        pole,
        margin: ratio_gap.min(product_gap),
    }
}

/// Shows that mixing branches across a flat-foldable unit never keeps the
/// side creases matched: one side of each equation is confined to (-1, 1),
/// the other lies outside [-1, 1].
pub fn infeasibility_witness(a1: f64, a2: f64, a3: f64, a4: f64) -> InfeasibilityReport {
    let [t1, t2, t3, t4] = [a1, a2, a3, a4].map(|x| (0.5 * x).tan());
    let mixed_12 = side((t1, t2), (t3, t4));
    let mixed_21 = side((t3, t4), (t1, t2));
    InfeasibilityReport {
        mixed_12,
        mixed_21,
        margin: mixed_12.margin.min(mixed_21.margin),
    }
}

/// Curved branch of a straight-line or double-collinear vertex.
fn curve_branch(v: &Vertex4) -> BranchId {
    let c = v.classify();
    if c.tag == ClassTag::StraightLine && c.collinear[0] == [1, 3] {
        BranchId::Branch1
    } else {
        BranchId::Branch2
    }
}

/// Identical-vertex unit from a straight-line vertex: the bottom vertex is
/// the top one mirrored across the east-west axis.
pub fn make_straightline_unit(v: Vertex4) -> Result<Unit> {
    make_straightline_unit_on(v, curve_branch(&v))
}

pub fn make_straightline_unit_on(v: Vertex4, branch: BranchId) -> Result<Unit> {
    let tag = v.classify().tag;
    if !matches!(tag, ClassTag::StraightLine | ClassTag::DoubleCollinear) {
        return Err(Error::WrongClass(format!("expected a straight-line vertex, got {tag:?}")));
    }
    let a = v.alpha();
    let bottom = Vertex4::new([a[3], a[2], a[1], a[0]])?;
    let u = Unit::new(v, bottom, [1, 1], [branch, branch], UnitKind::StraightLineBasic)?;
    require_valid(u)
}

/// Identical-vertex flat-foldable unit on branch 1.
pub fn make_flatfoldable_basic_unit(a1: f64, a2: f64) -> Result<Unit> {
    check_open_angle("alpha1", a1)?;
    check_open_angle("alpha2", a2)?;
    let v = ff_vertex(a1, a2, &Tolerances::default())?;
    let b = BranchId::Branch1;
    let u = Unit::new(v, v, [1, 1], [b, b], UnitKind::FlatFoldableBasic)?;
    require_valid(u)
}

fn require_valid(u: Unit) -> Result<Unit> {
    let r = validate_unit(&u, 200)?;
    if !r.valid {
        return Err(Error::ValidationFailed(format!(
            "max side residual {:.3e}",
            r.max_residual
        )));
    }
    Ok(u)
}

/// Branch pair actually realized by the unit's vertices.
pub fn realized_branches(u: &Unit) -> [BranchId; 2] {
    [realized_branch(&u.top, u.branch_top), realized_branch(&u.bottom, u.branch_bottom)]
}

/// Serialized form of a unit, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub sector_deg: [f64; 8],
    pub signs: [i8; 2],
    pub branches: [String; 2],
    #[serde(default)]
    pub crease_lengths: CreaseLengths,
    #[serde(default = "custom_kind")]
    pub kind: UnitKind,
}

fn custom_kind() -> UnitKind {
    UnitKind::Custom
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreaseLengths {
    pub shared: f64,
}

impl Default for CreaseLengths {
    fn default() -> Self {
        CreaseLengths { shared: 1.0 }
    }
}

impl UnitSpec {
    pub fn from_unit(u: &Unit) -> UnitSpec {
        UnitSpec {
            sector_deg: u.sector().map(f64::to_degrees),
            signs: u.signs,
            branches: [u.branch_top.to_string(), u.branch_bottom.to_string()],
            crease_lengths: CreaseLengths { shared: u.shared_length },
            kind: u.kind,
        }
    }

    pub fn to_unit(&self) -> Result<Unit> {
        let branches = [self.branches[0].parse()?, self.branches[1].parse()?];
        let mut u = Unit::from_sector(self.sector_deg.map(f64::to_radians), self.signs, branches, self.kind)?;
        if !(self.crease_lengths.shared > 0.0) {
            return Err(Error::InvalidUnit("shared crease length must be positive".into()));
        }
        u.shared_length = self.crease_lengths.shared;
        Ok(u)
    }
}
