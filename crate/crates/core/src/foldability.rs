//! Sampled rigid-foldability certification of grid patterns.
//!
//! The inner crease graph is cut into a tree: the top row stays whole and
//! every row crease below it is severed. Fold angles are pushed along the top
//! row (west crease from the east crease of the left neighbour) and then down
//! each column (north crease from the south crease above). At a cut crease the
//! left vertex gives `theta` and the right vertex gives `phi`; the pattern
//! folds rigidly where the two agree.

use crate::angle::{wrapped_diff, Tolerances};
use crate::error::{Error, Result};
use crate::pattern::{CreaseRole, QuadPattern, StitchPlan};
use crate::pattern::{column_branch_sets, stitch};
use crate::unit::{EAST, NORTH, SOUTH, WEST};
use crate::vertex::{flat_creases, solve_at_with, sup_valid, BranchId, FoldInterval};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;

/// A row crease removed from the tree, seen from both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CutCrease {
    pub crease: usize,
    pub row: usize,
    /// Column of the left vertex; the right vertex is in column `col + 1`.
    pub col: usize,
}

/// One step of the traversal: vertex `vertex` receives crease `slot` from
/// slot `from.1` of the already solved vertex `from.0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeStep {
    pub vertex: usize,
    pub slot: usize,
    pub from: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeStructure {
    pub rows: usize,
    pub cols: usize,
    /// Crease of the top-left vertex that carries the driving angle.
    pub driver: usize,
    /// Vertices after the top-left one, in solving order.
    pub steps: Vec<TreeStep>,
    pub cut_creases: Vec<CutCrease>,
}

/// Fold angles of one sampled state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Propagation {
    pub driving_angle: f64,
    /// Per vertex, slots north, west, south, east.
    pub vertex_rho: Vec<[f64; 4]>,
    /// Per crease; cut creases carry `theta`, boundary edges 0.
    pub crease_rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Propagation {
    pub fn max_residual(&self) -> f64 {
        self.theta
            .iter()
            .zip(&self.phi)
            .map(|(t, f)| wrapped_diff(*t, *f).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RigidFoldable,
    NotRigidFoldable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::RigidFoldable => "rigid-foldable",
            Verdict::NotRigidFoldable => "not rigid-foldable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub branches: Vec<BranchId>,
    pub driver: usize,
    pub cut_creases: Vec<CutCrease>,
    pub samples: Vec<f64>,
    /// `theta[k][c]`: left-side angle of cut crease `c` at sample `k`.
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    /// Per cut crease, max |theta - phi| over the samples.
    pub residual_per_crease: Vec<f64>,
    pub max_residual: f64,
    /// Driving angles over which the tree folds.
    pub interval: FoldInterval,
    pub verdict: Verdict,
    /// The tree condition is checked on samples only.
    pub method: &'static str,
}

impl CompatibilityReport {
    pub fn is_rigid_foldable(&self) -> bool {
        self.verdict == Verdict::RigidFoldable
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} samples on [{:.6}, {:.6}] deg, {} cut creases, max |theta - phi| = {:.3e} rad ({})",
            self.verdict,
            self.samples.len(),
            self.interval.lo.to_degrees(),
            self.interval.hi.to_degrees(),
            self.cut_creases.len(),
            self.max_residual,
            self.method
        )
    }
}

/// Cuts every row crease below the top row and checks that the remaining
/// inner crease graph is a tree.
pub fn build_tree(p: &QuadPattern) -> Result<TreeStructure> {
    build_tree_with(p, p.branches())
}

fn build_tree_with(p: &QuadPattern, branches: &[BranchId]) -> Result<TreeStructure> {
    let (rows, cols) = (p.rows(), p.cols());
    if rows == 0 || cols == 0 || p.vertices().len() != rows * cols {
        return Err(Error::NotABlanket(format!(
            "{} vertices do not fill a {rows} x {cols} grid",
            p.vertices().len()
        )));
    }
    let flat = flat_creases(&p.vertices()[0], branches[0]);
    let driver = [NORTH, WEST, EAST, SOUTH]
        .into_iter()
        .find(|&s| !flat[s])
        .unwrap_or(NORTH);
    let mut steps = vec![];
    for j in 1..cols {
        steps.push(TreeStep {
            vertex: p.index(0, j),
            slot: WEST,
            from: (p.index(0, j - 1), EAST),
        });
    }
    for j in 0..cols {
        for i in 1..rows {
            steps.push(TreeStep {
                vertex: p.index(i, j),
                slot: NORTH,
                from: (p.index(i - 1, j), SOUTH),
            });
        }
    }
    let cut_creases: Vec<CutCrease> = (1..rows)
        .flat_map(|i| (0..cols - 1).map(move |j| (i, j)))
        .map(|(i, j)| CutCrease {
            crease: p.row_crease(i, j),
            row: i,
            col: j,
        })
        .collect();
    check_acyclic(p, &cut_creases)?;
    Ok(TreeStructure {
        rows,
        cols,
        driver,
        steps,
        cut_creases,
    })
}

fn check_acyclic(p: &QuadPattern, cuts: &[CutCrease]) -> Result<()> {
    let nv = p.vertices().len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut edges = 0;
    for (ci, c) in p.creases().iter().enumerate() {
        if !matches!(c.role, CreaseRole::Row | CreaseRole::Column) || cuts.iter().any(|k| k.crease == ci) {
            continue;
        }
        let (a, b) = (find(&mut parent, c.ends[0]), find(&mut parent, c.ends[1]));
        if a == b {
            return Err(Error::NotABlanket(format!("crease {ci} closes a cycle after cutting")));
        }
        parent[a] = b;
        edges += 1;
    }
    if edges + 1 != nv {
        return Err(Error::NotABlanket("the cut crease graph is disconnected".into()));
    }
    Ok(())
}

/// Solves vertex `v` of the tree given fold angle `value` on `slot`.
fn solve_vertex(p: &QuadPattern, v: usize, slot: usize, value: f64, branch: BranchId, tol: &Tolerances) -> Result<[f64; 4]> {
    let vertex = &p.vertices()[v];
    let (row, col) = (v / p.cols(), v % p.cols());
    let flat = flat_creases(vertex, branch);
    if flat[slot] {
        if value.abs() > tol.flat {
            return Err(Error::PropagationConflict(format!(
                "vertex ({row}, {col}) keeps crease {slot} flat on branch {branch} but receives {value} rad"
            )));
        }
        if flat.iter().all(|&f| f) {
            return Ok([0.0; 4]);
        }
        return Err(Error::Underdetermined(format!(
            "vertex ({row}, {col}) can fold while its crease {slot} stays flat"
        )));
    }
    match solve_at_with(vertex, slot, value, branch, tol) {
        Ok(s) if s.rho_lifted.iter().all(|x| x.abs() <= PI - tol.full_fold) => Ok(s.rho),
        Ok(_) | Err(Error::OutOfDomain { .. }) => Err(Error::VertexOutOfDomain { row, col, slot, value }),
        Err(e) => Err(e),
    }
}

/// Fold angles of every crease with the top-left vertex's driver crease at
/// `rho`. `theta` and `phi` are filled per cut crease and never compared here.
pub fn propagate(
    t: &TreeStructure,
    p: &QuadPattern,
    rho: f64,
    branches: &[BranchId],
    tol: &Tolerances,
) -> Result<Propagation> {
    if branches.len() != p.vertices().len() {
        return Err(Error::InvalidUnit(format!(
            "{} branch choices for {} vertices",
            branches.len(),
            p.vertices().len()
        )));
    }
    let mut vr: Vec<Option<[f64; 4]>> = vec![None; p.vertices().len()];
    vr[0] = Some(solve_vertex(p, 0, t.driver, rho, branches[0], tol)?);
    for s in &t.steps {
        let src = vr[s.from.0].ok_or_else(|| Error::PropagationConflict("traversal order broken".into()))?;
        if vr[s.vertex].is_some() {
            return Err(Error::PropagationConflict(format!("vertex {} reached twice", s.vertex)));
        }
        vr[s.vertex] = Some(solve_vertex(p, s.vertex, s.slot, src[s.from.1], branches[s.vertex], tol)?);
    }
    let vertex_rho: Vec<[f64; 4]> = vr.into_iter().map(|x| x.unwrap_or([0.0; 4])).collect();
    let mut crease_rho = vec![0.0; p.creases().len()];
    for (ci, c) in p.creases().iter().enumerate() {
        if let Some(&(v, s)) = c.owners.first() {
            crease_rho[ci] = vertex_rho[v][s];
        }
    }
    let theta = t
        .cut_creases
        .iter()
        .map(|c| vertex_rho[p.index(c.row, c.col)][EAST])
        .collect();
    let phi = t
        .cut_creases
        .iter()
        .map(|c| vertex_rho[p.index(c.row, c.col + 1)][WEST])
        .collect();
    Ok(Propagation {
        driving_angle: rho,
        vertex_rho,
        crease_rho,
        theta,
        phi,
    })
}

/// Driving angles over which the tree propagates, found by bisection on each side of 0.
pub fn tree_interval(t: &TreeStructure, p: &QuadPattern, branches: &[BranchId], tol: &Tolerances) -> FoldInterval {
    let ok = |x: f64| propagate(t, p, x, branches, tol).is_ok();
    FoldInterval {
        lo: -sup_valid(|x| ok(-x)),
        hi: sup_valid(ok),
        branch: branches[0],
    }
}

/// Samples the driving interval and compares both sides of every cut crease.
pub fn certify(p: &QuadPattern, branches: &[BranchId], n_samples: usize) -> Result<CompatibilityReport> {
    certify_with(p, branches, n_samples, &Tolerances::default())
}

pub fn certify_with(
    p: &QuadPattern,
    branches: &[BranchId],
    n_samples: usize,
    tol: &Tolerances,
) -> Result<CompatibilityReport> {
    let t = build_tree_with(p, branches)?;
    propagate(&t, p, 0.0, branches, tol)?;
    let interval = tree_interval(&t, p, branches, tol);
    if interval.width() <= tol.root {
        return Err(Error::EmptyInterval(format!(
            "the tree only folds on [{:.3e}, {:.3e}]",
            interval.lo, interval.hi
        )));
    }
    let n = n_samples.max(2);
    let samples: Vec<f64> = (0..n)
        .map(|k| {
            if k == n - 1 {
                interval.hi
            } else {
                interval.lo + interval.width() * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    let states: Vec<Propagation> = samples
        .par_iter()
        .map(|&x| propagate(&t, p, x, branches, tol))
        .collect::<Result<_>>()?;
    let nc = t.cut_creases.len();
    let mut residual_per_crease = vec![0.0_f64; nc];
    for s in &states {
        for c in 0..nc {
            residual_per_crease[c] = residual_per_crease[c].max(wrapped_diff(s.theta[c], s.phi[c]).abs());
        }
    }
    let max_residual = residual_per_crease.iter().copied().fold(0.0, f64::max);
    let verdict = if max_residual < tol.compat {
        Verdict::RigidFoldable
    } else {
        Verdict::NotRigidFoldable
    };
    log::debug!("certified {} samples, max residual {max_residual:.3e}", n);
    Ok(CompatibilityReport {
        branches: branches.to_vec(),
        driver: t.driver,
        cut_creases: t.cut_creases,
        samples,
        theta: states.iter().map(|s| s.theta.clone()).collect(),
        phi: states.iter().map(|s| s.phi.clone()).collect(),
        residual_per_crease,
        max_residual,
        interval,
        verdict,
        method: "sampled certification",
    })
}

/// Certifies a plan on every combination of per-column branch assignments
/// under which its units validate.
pub fn certify_all(plan: &StitchPlan, n_samples: usize) -> Result<Vec<CompatibilityReport>> {
    let p = stitch(plan)?;
    let sets: Vec<Vec<Vec<BranchId>>> = plan.columns.iter().map(|c| column_branch_sets(c)).collect();
    let mut out = vec![];
    let total: usize = sets.iter().map(Vec::len).product();
    for code in 0..total {
        let mut rest = code;
        let mut branches = vec![BranchId::Branch1; p.vertices().len()];
        for (j, s) in sets.iter().enumerate() {
            let pick = &s[rest % s.len()];
            rest /= s.len();
            for (i, b) in pick.iter().enumerate() {
                branches[p.index(i, j)] = *b;
            }
        }
        out.push(certify(&p, &branches, n_samples)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MvLabel {
    Mountain,
    Valley,
    Flat,
    Boundary,
}

impl MvLabel {
    /// FOLD assignment letter.
    pub fn letter(self) -> &'static str {
        match self {
            MvLabel::Mountain => "M",
            MvLabel::Valley => "V",
            MvLabel::Flat => "F",
            MvLabel::Boundary => "B",
        }
    }

    pub fn from_angle(rho: f64, tol: &Tolerances) -> MvLabel {
        if rho.abs() < tol.flat {
            MvLabel::Flat
        } else if rho > 0.0 {
            MvLabel::Valley
        } else {
            MvLabel::Mountain
        }
    }
}

/// Labels from a set of crease fold angles.
pub fn labels_from_angles(p: &QuadPattern, crease_rho: &[f64], tol: &Tolerances) -> Vec<MvLabel> {
    p.creases()
        .iter()
        .zip(crease_rho)
        .map(|(c, &r)| {
            if c.role == CreaseRole::Boundary {
                MvLabel::Boundary
            } else {
                MvLabel::from_angle(r, tol)
            }
        })
        .collect()
}

/// Mountain, valley and flat labels of every crease at driving angle `rho`.
pub fn mv_assignment(p: &QuadPattern, branches: &[BranchId], rho: f64) -> Result<Vec<MvLabel>> {
    let tol = Tolerances::default();
    let t = build_tree_with(p, branches)?;
    let s = propagate(&t, p, rho, branches, &tol)?;
    Ok(labels_from_angles(p, &s.crease_rho, &tol))
}
