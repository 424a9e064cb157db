//! Kinematics of a single developable degree-4 vertex.
//!
//! Creases are indexed `0..4` counter-clockwise. Sector `alpha[i]` spans from
//! crease `i - 1` to crease `i`, so creases 0 and 2 are collinear when
//! `alpha[1] + alpha[2] = pi`, and creases 1 and 3 when `alpha[0] + alpha[1] = pi`.
//! A positive fold angle is a valley fold seen from the side on which the
//! sectors run counter-clockwise.
//!
//! Every closed-form branch is evaluated as a continuous ("lifted") curve
//! through the flat state, then wrapped into (-pi, pi] for reporting.

use crate::angle::{normalize, Tolerances};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex4 {
    alpha: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    /// One sector angle equals pi: two adjacent creases form a line.
    AdjacentCollinear,
    /// Exactly one pair of opposite creases is collinear.
    StraightLine,
    /// Both pairs of opposite creases are collinear.
    DoubleCollinear,
    /// No collinear creases, every sector below pi.
    Generic,
    /// A sector exceeds pi; only the flat state exists.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexClass {
    pub tag: ClassTag,
    /// Pairs of collinear creases.
    pub collinear: Vec<[usize; 2]>,
    /// `alpha[0] + alpha[2] = pi` (Kawasaki condition).
    pub flat_foldable: bool,
    /// Near-misses of a class boundary that were not snapped.
    pub warnings: Vec<String>,
}

/// Branch of the configuration space through the flat state.
///
/// `Branch1` keeps creases 0 and 2 folded with the same sign, `Branch2` keeps
/// creases 1 and 3 with the same sign. Where a branch degenerates to a fold
/// along a straight line it is reported as the matching line segment:
/// `LineSegment1` folds along creases 0 and 2, `LineSegment2` along 1 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchId {
    Branch1,
    Branch2,
    LineSegment1,
    LineSegment2,
}

impl BranchId {
    /// 1 for `Branch1`/`LineSegment1`, 2 otherwise.
    pub fn family(self) -> u8 {
        match self {
            BranchId::Branch1 | BranchId::LineSegment1 => 1,
            BranchId::Branch2 | BranchId::LineSegment2 => 2,
        }
    }

    pub fn from_family(f: u8) -> Self {
        if f == 1 {
            BranchId::Branch1
        } else {
            BranchId::Branch2
        }
    }

    pub fn is_line(self) -> bool {
        matches!(self, BranchId::LineSegment1 | BranchId::LineSegment2)
    }

    /// Branch identity after relabeling creases by `shift` positions.
    pub fn shifted(self, shift: usize) -> Self {
        if shift % 2 == 0 {
            return self;
        }
        match self {
            BranchId::Branch1 => BranchId::Branch2,
            BranchId::Branch2 => BranchId::Branch1,
            BranchId::LineSegment1 => BranchId::LineSegment2,
            BranchId::LineSegment2 => BranchId::LineSegment1,
        }
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BranchId::Branch1 => "1",
            BranchId::Branch2 => "2",
            BranchId::LineSegment1 => "line1",
            BranchId::LineSegment2 => "line2",
        };
        f.write_str(s)
    }
}

impl FromStr for BranchId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "branch1" => Ok(BranchId::Branch1),
            "2" | "branch2" => Ok(BranchId::Branch2),
            "line" | "line1" | "linesegment1" => Ok(BranchId::LineSegment1),
            "line2" | "linesegment2" => Ok(BranchId::LineSegment2),
            other => Err(Error::InvalidSectorAngles(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldInterval {
    pub lo: f64,
    pub hi: f64,
    pub branch: BranchId,
}

impl FoldInterval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexSolution {
    /// Fold angles wrapped into (-pi, pi].
    pub rho: [f64; 4],
    /// The same angles continued from the flat state without wrapping.
    pub rho_lifted: [f64; 4],
    /// Spherical distance between creases 1 and 3.
    pub xi: f64,
    pub branch: BranchId,
}

impl Vertex4 {
    pub fn new(alpha: [f64; 4]) -> Result<Self> {
        Self::with_tolerance(alpha, Tolerances::default().angle)
    }

    pub fn with_tolerance(alpha: [f64; 4], tol: f64) -> Result<Self> {
        for a in alpha {
            if !a.is_finite() || a <= 0.0 || a >= TAU {
                return Err(Error::InvalidSectorAngles(format!(
                    "sector angle {a} outside (0, 2pi)"
                )));
            }
        }
        let s: f64 = alpha.iter().sum();
        if (s - TAU).abs() > tol {
            return Err(Error::InvalidSectorAngles(format!(
                "sector angles sum to {} deg, expected 360",
                s.to_degrees()
            )));
        }
        Ok(Vertex4 { alpha })
    }

    pub fn from_degrees(d: [f64; 4]) -> Result<Self> {
        Self::new(d.map(f64::to_radians))
    }

    pub fn alpha(&self) -> [f64; 4] {
        self.alpha
    }

    pub fn alpha_degrees(&self) -> [f64; 4] {
        self.alpha.map(f64::to_degrees)
    }

    /// Relabels so that crease `shift` becomes crease 0.
    pub fn rotated(&self, shift: usize) -> Vertex4 {
        Vertex4 {
            alpha: rotate(self.alpha, shift),
        }
    }

    /// Planar direction of each crease measured from crease 0.
    pub fn crease_directions(&self) -> [f64; 4] {
        let a = self.alpha;
        [0.0, a[1], a[1] + a[2], a[1] + a[2] + a[3]]
    }

    pub fn classify(&self) -> VertexClass {
        self.classify_with(&Tolerances::default())
    }

    pub fn classify_with(&self, tol: &Tolerances) -> VertexClass {
        let a = self.alpha;
        let mut warnings = Vec::new();
        let mut near = |what: &str, x: f64| {
            let d = (x - PI).abs();
            if d > tol.angle && d <= tol.class_band {
                warnings.push(format!("{what} misses pi by {d:.3e} rad"));
            }
        };
        for (i, x) in a.iter().enumerate() {
            near(&format!("alpha[{i}]"), *x);
        }
        near("alpha[0] + alpha[1]", a[0] + a[1]);
        near("alpha[1] + alpha[2]", a[1] + a[2]);
        near("alpha[0] + alpha[2]", a[0] + a[2]);

        let flat_foldable = (a[0] + a[2] - PI).abs() <= tol.angle;
        let is_pi = |x: f64| (x - PI).abs() <= tol.angle;

        let (tag, collinear) = if a.iter().any(|&x| x > PI + tol.angle) {
            (ClassTag::Trivial, vec![])
        } else if let Some(k) = (0..4).find(|&k| is_pi(a[k])) {
            (ClassTag::AdjacentCollinear, vec![sorted_pair((k + 3) % 4, k)])
        } else {
            match (is_pi(a[1] + a[2]), is_pi(a[0] + a[1])) {
                (true, true) => (ClassTag::DoubleCollinear, vec![[0, 2], [1, 3]]),
                (true, false) => (ClassTag::StraightLine, vec![[0, 2]]),
                (false, true) => (ClassTag::StraightLine, vec![[1, 3]]),
                (false, false) => (ClassTag::Generic, vec![]),
            }
        };
        VertexClass {
            tag,
            collinear,
            flat_foldable,
            warnings,
        }
    }

    /// Moves near-miss sums (within `tol.class_band` of pi) onto pi exactly,
    /// keeping the angle sum at 2pi.
    pub fn snapped(&self, tol: &Tolerances) -> Vertex4 {
        let mut a = self.alpha;
        let inside = |x: f64| (x - PI).abs() <= tol.class_band;
        if let Some(k) = (0..4).find(|&k| inside(a[k])) {
            let d = PI - a[k];
            a[k] += d;
            a[(k + 2) % 4] -= d;
            return Vertex4 { alpha: a };
        }
        fn adjust(a: &mut [f64; 4], i: usize, j: usize) {
            let d = 0.5 * (PI - (a[i] + a[j]));
            for (k, x) in a.iter_mut().enumerate() {
                *x += if k == i || k == j { d } else { -d };
            }
        }
        if inside(a[0] + a[1]) {
            adjust(&mut a, 0, 1);
        }
        if inside(a[1] + a[2]) {
            adjust(&mut a, 1, 2);
        }
        if inside(a[0] + a[2]) {
            adjust(&mut a, 0, 2);
        }
        Vertex4 { alpha: a }
    }
}

fn sorted_pair(i: usize, j: usize) -> [usize; 2] {
    [i.min(j), i.max(j)]
}

fn rotate<T: Copy>(a: [T; 4], shift: usize) -> [T; 4] {
    [0, 1, 2, 3].map(|i| a[(i + shift) % 4])
}

fn unrotate<T: Copy>(a: [T; 4], shift: usize) -> [T; 4] {
    [0, 1, 2, 3].map(|i| a[(i + 4 - shift % 4) % 4])
}

fn neg4(r: [f64; 4]) -> [f64; 4] {
    r.map(|x| -x)
}

fn within_pi(r: &[f64; 4], eps: f64) -> bool {
    r.iter().all(|x| x.abs() <= PI + eps)
}

/// Spherical distance between creases 1 and 3 at fold angle `rho1` on crease 0.
pub fn xi_of(v: &Vertex4, rho1: f64) -> Result<f64> {
    let tol = Tolerances::default();
    if !rho1.is_finite() || rho1.abs() > PI + tol.eval {
        return Err(Error::OutOfDomain { value: rho1, lo: -PI, hi: PI });
    }
    Ok(fan(&v.alpha, rho1.abs()).xi)
}

/// The spherical triangle spanned by creases 1, 0 and 3 when crease 0 is
/// folded by `r1 >= 0`: sides alpha[0], alpha[1] with included angle pi - r1.
///
/// Everything is computed with half-angle forms that stay accurate near the
/// flat state, where the triangles degenerate and plain arccos loses half
/// the significant digits.
struct Fan {
    /// Angle of the triangle opposite alpha[0].
    opp0: f64,
    /// Angle of the triangle opposite alpha[1].
    opp1: f64,
    /// Side between creases 1 and 3.
    xi: f64,
    /// sin((alpha[0] + alpha[1] - xi) / 2) and sin((alpha[0] + alpha[1] + xi) / 2).
    f_minus: f64,
    f_plus: f64,
    /// sin and cos of xi / 2 - |alpha[0] - alpha[1]| / 2, without cancellation.
    /// `None` when a sector is not convex.
    gap: Option<(f64, f64)>,
}

fn fan(a: &[f64; 4], r1: f64) -> Fan {
    let (h0, h1) = (0.5 * (a[0] - a[1]), 0.5 * (a[0] + a[1]));
    // abs() also clears a negative zero, which would flip the atan2 below.
    let (sh, ch) = (0.5 * r1.abs()).sin_cos();
    let half_sum = (h0.cos() * sh).atan2(h1.cos() * ch);
    let half_dif = (h0.sin() * sh).atan2(h1.sin() * ch);
    let sab = a[0].sin() * a[1].sin();
    let s2 = h0.sin().powi(2) + sab * ch * ch;
    let c2 = h1.cos().powi(2) + sab * sh * sh;
    let xi = 2.0 * s2.sqrt().atan2(c2.sqrt());
    let prod = sab * sh * sh;
    let mut f_minus = (h1 - 0.5 * xi).sin();
    let mut f_plus = (h1 + 0.5 * xi).sin();
    if f_minus.abs() < f_plus.abs() {
        f_minus = prod / f_plus;
    } else if f_minus != 0.0 {
        f_plus = prod / f_minus;
    }
    // xi / 2 approaches |h0| as the fan folds flat.
    let gap = (a[0] < PI && a[1] < PI).then(|| {
        let (sx, cx) = (s2.sqrt(), c2.sqrt());
        let (s0, c0) = (h0.sin().abs(), h0.cos());
        (sab * ch * ch / (sx * c0 + cx * s0), cx * c0 + sx * s0)
    });
    Fan {
        opp0: half_sum + half_dif,
        opp1: half_sum - half_dif,
        xi,
        f_minus,
        f_plus,
        gap,
    }
}

/// Angles of the triangle with sides alpha[2], alpha[3], xi closing the fan:
/// (opposite alpha[2], opposite alpha[3], opposite xi).
fn closing_triangle(a: &[f64; 4], f: &Fan, clamp: f64) -> Option<(f64, f64, f64)> {
    let (p, q) = (a[2], a[3]);
    let (gp, gq) = match f.gap {
        Some((sg, cg)) => {
            let h0 = (0.5 * (a[0] - a[1])).abs();
            let g = |b: f64| sg * b.cos() + cg * b.sin();
            (g(h0 - 0.5 * (p - q)), g(h0 - 0.5 * (q - p)))
        }
        None => ((0.5 * (q - p + f.xi)).sin(), (0.5 * (p - q + f.xi)).sin()),
    };
    if gp < -clamp || gq < -clamp || f.f_minus < -clamp || f.f_plus < -clamp {
        return None;
    }
    let (gp, gq) = (gp.max(0.0), gq.max(0.0));
    let (fm, fp) = (f.f_minus.max(0.0), f.f_plus.max(0.0));
    let ang = |n: f64, d: f64| 2.0 * n.sqrt().atan2(d.sqrt());
    Some((ang(gq * fp, fm * gp), ang(gp * fp, fm * gq), ang(gp * gq, fm * fp)))
}

fn lift_offset(a: &[f64; 4]) -> f64 {
    if a[0] + a[1] < PI {
        TAU
    } else {
        0.0
    }
}

/// Branch of a vertex with no collinear creases, driven by crease 0.
fn generic_lifted(a: &[f64; 4], r1: f64, fam: u8, clamp: f64) -> Option<[f64; 4]> {
    if r1 < 0.0 {
        return generic_lifted(a, -r1, fam, clamp).map(neg4);
    }
    let f = fan(a, r1);
    let (d2, d3, dxi) = closing_triangle(a, &f, clamp)?;
    let (ta, te) = (PI - f.opp0, PI - f.opp1);
    let tc = PI - dxi;
    if fam == 1 {
        Some([r1, ta - d3, tc, te - d2])
    } else {
        let off = lift_offset(a);
        Some([r1, ta + d3 - off, -tc, te + d2 - off])
    }
}

/// Curved branch of a vertex whose creases 0 and 2 are collinear, driven by crease 0.
fn line_curve_lifted(a: &[f64; 4], r1: f64) -> Option<[f64; 4]> {
    if r1 < 0.0 {
        return line_curve_lifted(a, -r1).map(neg4);
    }
    let f = fan(a, r1);
    let off = lift_offset(a);
    Some([r1, 2.0 * (PI - f.opp0) - off, -r1, 2.0 * (PI - f.opp1) - off])
}

/// Branches of a flat-foldable vertex (`alpha[0] + alpha[2] = pi`), driven by crease 0.
fn ff_lifted(a: &[f64; 4], r1: f64, fam: u8) -> Option<[f64; 4]> {
    let t = (0.5 * r1).tan();
    let d = 0.5 * (a[1] - a[0]);
    let s = 0.5 * (a[1] + a[0]);
    if fam == 1 {
        let k = d.sin() / s.sin();
        let r2 = 2.0 * (k * t).atan();
        Some([r1, r2, r1, -r2])
    } else {
        let den = s.cos();
        if den.abs() < 1e-15 {
            return (r1 == 0.0).then_some([0.0; 4]);
        }
        let k = -d.cos() / den;
        let r2 = 2.0 * (k * t).atan();
        Some([r1, r2, -r1, r2])
    }
}

/// Largest `t` in [0, pi] such that `ok` holds on [0, t]; `ok(0)` is assumed.
pub(crate) fn sup_valid(ok: impl Fn(f64) -> bool) -> f64 {
    if ok(PI) {
        return PI;
    }
    let (mut good, mut bad) = (0.0_f64, PI);
    for _ in 0..64 {
        let m = 0.5 * (good + bad);
        if m <= good || m >= bad {
            break;
        }
        if ok(m) {
            good = m;
        } else {
            bad = m;
        }
    }
    good
}

/// Solves the curved branch of a canonical straight-line vertex for the
/// configuration in which crease 1 takes `value`.
fn invert_line_curve(a: &[f64; 4], value: f64, tol: &Tolerances) -> Option<[f64; 4]> {
    let eval = |t: f64| line_curve_lifted(a, t).filter(|r| within_pi(r, tol.eval));
    let hi = sup_valid(|t| eval(t).is_some());
    let g = |t: f64| eval(t).map(|r| r[1]);
    let (gl, gh) = (g(-hi)?, g(hi)?);
    let (min, max) = (gl.min(gh), gl.max(gh));
    if value < min - tol.eval || value > max + tol.eval {
        return None;
    }
    let increasing = gh >= gl;
    let (mut l, mut h) = (-hi, hi);
    for _ in 0..200 {
        let m = 0.5 * (l + h);
        if m <= l || m >= h {
            break;
        }
        if (g(m)? < value) == increasing {
            l = m;
        } else {
            h = m;
        }
    }
    eval(0.5 * (l + h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Rigid,
    Line([usize; 2]),
    Curve,
}

fn mode(class: &VertexClass, branch: BranchId) -> Mode {
    let fam = branch.family();
    match class.tag {
        ClassTag::Trivial => Mode::Rigid,
        ClassTag::AdjacentCollinear => Mode::Line(class.collinear[0]),
        ClassTag::DoubleCollinear => Mode::Line(if fam == 1 { [0, 2] } else { [1, 3] }),
        ClassTag::StraightLine => {
            let line = class.collinear[0];
            let line_family = if line == [0, 2] { 1 } else { 2 };
            if fam == line_family {
                Mode::Line(line)
            } else {
                Mode::Curve
            }
        }
        ClassTag::Generic => Mode::Curve,
    }
}

/// Creases that stay flat along the whole branch.
pub fn flat_creases(v: &Vertex4, branch: BranchId) -> [bool; 4] {
    match mode(&v.classify(), branch) {
        Mode::Rigid => [true; 4],
        Mode::Line([p, q]) => [0, 1, 2, 3].map(|i| i != p && i != q),
        Mode::Curve => [false; 4],
    }
}

/// The branch identity actually realized by `branch` on `v` (line-segment
/// branches are reported as such).
pub fn realized_branch(v: &Vertex4, branch: BranchId) -> BranchId {
    match mode(&v.classify(), branch) {
        Mode::Line([0, 2]) => BranchId::LineSegment1,
        Mode::Line([1, 3]) => BranchId::LineSegment2,
        Mode::Line(_) | Mode::Rigid => {
            if branch.family() == 1 {
                BranchId::LineSegment1
            } else {
                BranchId::LineSegment2
            }
        }
        Mode::Curve => BranchId::from_family(branch.family()),
    }
}

enum Attempt {
    Ok([f64; 4]),
    Fail(Error),
    Outside,
}

fn try_solve(
    v: &Vertex4,
    crease: usize,
    value: f64,
    branch: BranchId,
    tol: &Tolerances,
    physical: bool,
) -> Attempt {
    if !value.is_finite() || value.abs() > PI + tol.eval {
        return Attempt::Outside;
    }
    let class = v.classify_with(tol);
    let a = v.alpha;
    match mode(&class, branch) {
        Mode::Rigid => {
            if value.abs() <= tol.flat {
                Attempt::Ok([0.0; 4])
            } else {
                Attempt::Fail(Error::WrongClass(
                    "a vertex with a sector above pi only admits the flat state".into(),
                ))
            }
        }
        Mode::Line([p, q]) => {
            if crease == p || crease == q {
                let mut r = [0.0; 4];
                r[p] = value;
                r[q] = value;
                Attempt::Ok(r)
            } else if value.abs() <= tol.flat {
                Attempt::Fail(Error::Underdetermined(format!(
                    "crease {crease} stays flat on this branch; the fold along creases {p},{q} is free"
                )))
            } else {
                Attempt::Outside
            }
        }
        // Both curved branches pass through the flat state.
        Mode::Curve if value == 0.0 => Attempt::Ok([0.0; 4]),
        Mode::Curve => {
            let fam = branch.family();
            let (lifted, shift) = if class.tag == ClassTag::Generic {
                let ap = rotate(a, crease);
                let f = if crease % 2 == 1 { 3 - fam } else { fam };
                let r = if class.flat_foldable {
                    ff_lifted(&ap, value, f)
                } else {
                    generic_lifted(&ap, value, f, tol.clamp)
                };
                (r, crease)
            } else {
                let line = class.collinear[0];
                if line.contains(&crease) {
                    (line_curve_lifted(&rotate(a, crease), value), crease)
                } else if class.flat_foldable {
                    (ff_lifted(&rotate(a, crease), value, 1), crease)
                } else {
                    let s = (crease + 3) % 4;
                    (invert_line_curve(&rotate(a, s), value, tol), s)
                }
            };
            match lifted.filter(|r| !physical || within_pi(r, tol.eval)) {
                Some(r) => Attempt::Ok(unrotate(r, shift)),
                None => Attempt::Outside,
            }
        }
    }
}

fn solution(v: &Vertex4, lifted: [f64; 4], branch: BranchId) -> VertexSolution {
    VertexSolution {
        rho: lifted.map(normalize),
        rho_lifted: lifted,
        xi: fan(&v.alpha, lifted[0].abs()).xi,
        branch: realized_branch(v, branch),
    }
}

/// Solves the configuration on `branch` in which crease `crease` has fold angle `value`.
pub fn solve_at(v: &Vertex4, crease: usize, value: f64, branch: BranchId) -> Result<VertexSolution> {
    solve_at_with(v, crease, value, branch, &Tolerances::default())
}

pub fn solve_at_with(
    v: &Vertex4,
    crease: usize,
    value: f64,
    branch: BranchId,
    tol: &Tolerances,
) -> Result<VertexSolution> {
    if crease > 3 {
        return Err(Error::InvalidSectorAngles(format!("crease index {crease} out of range")));
    }
    match try_solve(v, crease, value, branch, tol, false) {
        Attempt::Ok(r) => Ok(solution(v, r, branch)),
        Attempt::Fail(e) => Err(e),
        Attempt::Outside => {
            let iv = fold_interval_at(v, crease, branch, tol)?;
            Err(Error::OutOfDomain {
                value,
                lo: iv.lo,
                hi: iv.hi,
            })
        }
    }
}

/// Interval of values crease `crease` can take on `branch` while every
/// closed-form expression stays defined.
pub fn fold_interval_at(v: &Vertex4, crease: usize, branch: BranchId, tol: &Tolerances) -> Result<FoldInterval> {
    interval(v, crease, branch, tol, false)
}

/// Sub-interval of [`fold_interval_at`] on which no fold angle passes +-pi,
/// i.e. no two adjacent panels pass through each other. Every fold angle is
/// monotone in the driving angle on this interval.
pub fn physical_interval_at(v: &Vertex4, crease: usize, branch: BranchId, tol: &Tolerances) -> Result<FoldInterval> {
    interval(v, crease, branch, tol, true)
}

fn interval(v: &Vertex4, crease: usize, branch: BranchId, tol: &Tolerances, physical: bool) -> Result<FoldInterval> {
    let class = v.classify_with(tol);
    match mode(&class, branch) {
        Mode::Rigid => Err(Error::WrongClass(
            "a vertex with a sector above pi has no folding branch".into(),
        )),
        Mode::Line(line) => Ok(if line.contains(&crease) {
            FoldInterval { lo: -PI, hi: PI, branch }
        } else {
            FoldInterval { lo: 0.0, hi: 0.0, branch }
        }),
        Mode::Curve => {
            let ok = |t: f64| matches!(try_solve(v, crease, t, branch, tol, physical), Attempt::Ok(_));
            let hi = sup_valid(ok);
            let lo = -sup_valid(|t| ok(-t));
            Ok(FoldInterval { lo, hi, branch })
        }
    }
}

/// Interval for crease 0.
pub fn fold_interval(v: &Vertex4, branch: BranchId) -> Result<FoldInterval> {
    fold_interval_at(v, 0, branch, &Tolerances::default())
}

/// Physical interval for crease 0.
pub fn physical_interval(v: &Vertex4, branch: BranchId) -> Result<FoldInterval> {
    physical_interval_at(v, 0, branch, &Tolerances::default())
}

/// Closed-form branches of a vertex without collinear creases, driven by crease 0.
pub fn solve_generic(v: &Vertex4, rho1: f64, branch: BranchId) -> Result<VertexSolution> {
    let tol = Tolerances::default();
    let class = v.classify_with(&tol);
    if class.tag != ClassTag::Generic {
        return Err(Error::WrongClass(format!("expected a generic vertex, got {:?}", class.tag)));
    }
    if branch.is_line() {
        return Err(Error::WrongClass("a generic vertex has no line-segment branch".into()));
    }
    match generic_lifted(&v.alpha, rho1, branch.family(), tol.clamp) {
        Some(r) if rho1.abs() <= PI => Ok(solution(v, r, branch)),
        _ => {
            let iv = fold_interval(v, branch)?;
            Err(Error::OutOfDomain { value: rho1, lo: iv.lo, hi: iv.hi })
        }
    }
}

/// Branches of a vertex with exactly one collinear pair, named as if the
/// collinear pair were creases 0 and 2: `LineSegment1` (or `Branch1`) is the fold
/// along the line and `Branch2` the curved branch. `rho1` drives crease 0.
pub fn solve_straightline(v: &Vertex4, rho1: f64, branch: BranchId) -> Result<VertexSolution> {
    let class = v.classify();
    if class.tag != ClassTag::StraightLine {
        return Err(Error::WrongClass(format!("expected a straight-line vertex, got {:?}", class.tag)));
    }
    let line_family = if class.collinear[0] == [0, 2] { 1 } else { 2 };
    let fam = match branch {
        BranchId::LineSegment1 | BranchId::Branch1 => line_family,
        BranchId::Branch2 => 3 - line_family,
        BranchId::LineSegment2 => {
            return Err(Error::WrongClass("a straight-line vertex has one line-segment branch".into()))
        }
    };
    solve_at(v, 0, rho1, BranchId::from_family(fam))
}

/// Tangent-half-angle branches of a flat-foldable vertex, driven by crease 0.
pub fn solve_flatfoldable(v: &Vertex4, rho1: f64, branch: BranchId) -> Result<VertexSolution> {
    let tol = Tolerances::default();
    let a = v.alpha;
    if (a[0] + a[2] - PI).abs() > tol.angle || a.iter().any(|&x| x >= PI) {
        return Err(Error::WrongClass("vertex is not flat-foldable".into()));
    }
    if (a[0] - PI / 2.0).abs() <= tol.angle && (a[1] - PI / 2.0).abs() <= tol.angle {
        return Err(Error::DegenerateVertex(
            "all sectors are right angles; both branches are line folds".into(),
        ));
    }
    match ff_lifted(&a, rho1, branch.family()) {
        Some(r) if rho1.abs() <= PI => Ok(solution(v, r, BranchId::from_family(branch.family()))),
        _ => Err(Error::OutOfDomain { value: rho1, lo: -PI, hi: PI }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub interval: FoldInterval,
    pub samples: usize,
    /// Smallest absolute finite-difference slope over the non-flat creases.
    pub min_slope: f64,
    /// Creases that stay flat along the branch (exempt from the check).
    pub flat_creases: Vec<usize>,
    /// Largest |rho(-t) + rho(t)| over the samples.
    pub symmetry_residual: f64,
}

/// Samples `branch` over its physical interval and checks that every fold
/// angle is strictly monotone in the driving angle and point-symmetric.
pub fn monotonicity_check(v: &Vertex4, branch: BranchId, n_samples: usize) -> Result<MonotonicityReport> {
    let tol = Tolerances::default();
    let class = v.classify_with(&tol);
    if !matches!(class.tag, ClassTag::Generic | ClassTag::StraightLine) {
        return Err(Error::WrongClass(format!("no monotone branch for {:?}", class.tag)));
    }
    let interval = physical_interval_at(v, 0, branch, &tol)?;
    if interval.width() <= tol.root || n_samples < 2 {
        return Err(Error::EmptyInterval("driving crease stays flat on this branch".into()));
    }
    let ts: Vec<f64> = (0..n_samples)
        .map(|i| interval.lo + interval.width() * i as f64 / (n_samples - 1) as f64)
        .collect();
    let sols = ts
        .iter()
        .map(|&t| solve_at_with(v, 0, t, branch, &tol).map(|s| s.rho_lifted))
        .collect::<Result<Vec<_>>>()?;
    let mut flat = Vec::new();
    let mut min_slope = f64::INFINITY;
    for k in 1..4 {
        if sols.iter().all(|r| r[k].abs() <= tol.flat) {
            flat.push(k);
            continue;
        }
        let dir = (sols[n_samples - 1][k] - sols[0][k]).signum();
        for i in 0..n_samples - 1 {
            let d = sols[i + 1][k] - sols[i][k];
            if d * dir <= 0.0 {
                return Err(Error::MonotonicityViolation { crease: k, i, j: i + 1 });
            }
            min_slope = min_slope.min(d.abs() / (ts[i + 1] - ts[i]));
        }
    }
    let mut symmetry_residual = 0.0_f64;
    for (i, r) in sols.iter().enumerate() {
        let m = &sols[n_samples - 1 - i];
        for k in 0..4 {
            symmetry_residual = symmetry_residual.max((r[k] + m[k]).abs());
        }
    }
    Ok(MonotonicityReport {
        interval,
        samples: n_samples,
        min_slope,
        flat_creases: flat,
        symmetry_residual,
    })
}
