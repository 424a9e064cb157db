//! Folded states in 3D: panel frames composed across creases, loop-closure
//! and rigidity checks, and sweeps along the motion.
//!
//! Crossing a crease from the panel on its right into the panel on its left
//! (looking along the crease from either end, paper seen from +z) rotates by
//! the fold angle about the crease line. Positive angles lift the left panel
//! towards +z, a valley fold.

use crate::angle::Tolerances;
use crate::error::{Error, Result};
use crate::foldability::{build_tree, certify_with, propagate};
use crate::pattern::{CreaseRole, QuadPattern};
use crate::unit::NORTH;
use crate::vertex::{BranchId, Vertex4, VertexSolution};
use nalgebra::{Matrix3, Rotation3, Unit as Axis, Vector3};
use rayon::prelude::*;
use std::collections::VecDeque;

/// Rigid motion `x -> rot * x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub rot: Matrix3<f64>,
    pub shift: Vector3<f64>,
}

impl Frame {
    pub fn identity() -> Frame {
        Frame {
            rot: Matrix3::identity(),
            shift: Vector3::zeros(),
        }
    }

    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rot * x + self.shift
    }

    /// `self` after `other`: x -> self(other(x)).
    pub fn compose(&self, other: &Frame) -> Frame {
        let mut rot = self.rot * other.rot;
        if (rot.transpose() * rot - Matrix3::identity()).norm() > 1e-12 {
            rot = Rotation3::from_matrix(&rot).into_inner();
        }
        Frame {
            rot,
            shift: self.rot * other.shift + self.shift,
        }
    }

    pub fn inverse(&self) -> Frame {
        let rt = self.rot.transpose();
        Frame {
            rot: rt,
            shift: -(rt * self.shift),
        }
    }

    /// Rotation by `angle` about the line through `a` with direction `d`.
    pub fn about_line(a: Vector3<f64>, d: Vector3<f64>, angle: f64) -> Frame {
        let rot = Rotation3::from_axis_angle(&Axis::new_normalize(d), angle).into_inner();
        Frame {
            rot,
            shift: a - rot * a,
        }
    }

    fn distance(&self, other: &Frame, scale: f64) -> f64 {
        (self.rot - other.rot).norm() + (self.shift - other.shift).norm() / scale
    }
}

fn plane_rotation(dir: f64, angle: f64) -> Matrix3<f64> {
    let axis = Axis::new_normalize(Vector3::new(dir.cos(), dir.sin(), 0.0));
    Rotation3::from_axis_angle(&axis, angle).into_inner()
}

/// Frobenius distance from the identity of the rotations about the four
/// crease directions, composed in counter-clockwise order.
pub fn closure_residual(alpha: [f64; 4], rho: [f64; 4]) -> f64 {
    let mut dir = 0.0;
    let mut m = Matrix3::<f64>::identity();
    for k in 0..4 {
        if k > 0 {
            dir += alpha[k];
        }
        m *= plane_rotation(dir, rho[k]);
    }
    (m - Matrix3::identity()).norm()
}

pub fn loop_closure_residual(v: &Vertex4, s: &VertexSolution) -> f64 {
    closure_residual(v.alpha(), s.rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldedState {
    /// One 3D point per pattern point.
    pub coords: Vec<[f64; 3]>,
    /// Per face, the motion taking its flat layout to its folded place.
    pub panel_frames: Vec<Frame>,
    pub crease_rho: Vec<f64>,
    pub driving_angle: f64,
    /// Largest relative deviation of a panel edge, diagonal or out-of-plane distance.
    pub rigidity_residual: f64,
    /// Largest disagreement across non-tree creases and around vertices.
    pub closure_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub frames: Vec<FoldedState>,
    pub branches: Vec<BranchId>,
    pub max_rigidity_residual: f64,
    pub max_closure_residual: f64,
}

fn lift(p: [f64; 2]) -> Vector3<f64> {
    Vector3::new(p[0], p[1], 0.0)
}

/// Face on the left of `a -> b`, and the one on the right.
fn crease_faces(p: &QuadPattern) -> Vec<[Option<usize>; 2]> {
    let mut out = vec![[None, None]; p.creases().len()];
    for (ci, c) in p.creases().iter().enumerate() {
        let [a, b] = c.ends;
        for (fi, f) in p.faces().iter().enumerate() {
            for k in 0..4 {
                let (u, w) = (f.corners[k], f.corners[(k + 1) % 4]);
                if (u, w) == (a, b) {
                    out[ci][0] = Some(fi);
                } else if (u, w) == (b, a) {
                    out[ci][1] = Some(fi);
                }
            }
        }
    }
    out
}

/// Top-left panel: the corner panel between the north and west creases of vertex (0, 0).
fn base_face(p: &QuadPattern) -> usize {
    let c = &p.creases()[p.vertex_creases(0)[NORTH]];
    let north_end = if c.ends[0] == 0 { c.ends[1] } else { c.ends[0] };
    p.faces()
        .iter()
        .position(|f| f.corners[0] == 0 && f.corners[1] == north_end)
        .unwrap_or(0)
}

/// Places every panel for the given per-crease fold angles.
pub fn realize(p: &QuadPattern, crease_rho: &[f64], driving_angle: f64) -> Result<FoldedState> {
    realize_with(p, crease_rho, driving_angle, &Tolerances::default())
}

pub fn realize_with(p: &QuadPattern, crease_rho: &[f64], driving_angle: f64, tol: &Tolerances) -> Result<FoldedState> {
    let nf = p.faces().len();
    if nf == 0 {
        return Err(Error::NotABlanket("pattern has no panels".into()));
    }
    if crease_rho.len() != p.creases().len() {
        return Err(Error::ClosureViolation(format!(
            "{} fold angles for {} creases",
            crease_rho.len(),
            p.creases().len()
        )));
    }
    let pts = p.points();
    let scale = pts
        .iter()
        .map(|q| q[0].abs().max(q[1].abs()))
        .fold(1.0_f64, f64::max);
    let sides = crease_faces(p);
    let mut incident: Vec<Vec<usize>> = vec![vec![]; nf];
    for (ci, s) in sides.iter().enumerate() {
        if p.creases()[ci].role == CreaseRole::Boundary {
            continue;
        }
        if let [Some(l), Some(r)] = *s {
            incident[l].push(ci);
            incident[r].push(ci);
        }
    }
    // Motion of the left face relative to the right one.
    let hinge = |ci: usize| {
        let [a, b] = p.creases()[ci].ends;
        let (pa, pb) = (lift(pts[a]), lift(pts[b]));
        Frame::about_line(pa, pb - pa, crease_rho[ci])
    };
    let mut frames: Vec<Option<Frame>> = vec![None; nf];
    let mut tree = vec![false; p.creases().len()];
    let base = base_face(p);
    frames[base] = Some(Frame::identity());
    let mut queue = VecDeque::from([base]);
    while let Some(f) = queue.pop_front() {
        let tf = frames[f].unwrap();
        for &ci in &incident[f] {
            let [Some(l), Some(r)] = sides[ci] else { continue };
            let (g, step) = if f == r { (l, hinge(ci)) } else { (r, hinge(ci).inverse()) };
            if frames[g].is_none() {
                frames[g] = Some(tf.compose(&step));
                tree[ci] = true;
                queue.push_back(g);
            }
        }
    }
    let frames: Vec<Frame> = frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.ok_or_else(|| Error::NotABlanket(format!("panel {i} is not connected to the base panel"))))
        .collect::<Result<_>>()?;

    let mut closure = 0.0_f64;
    for (ci, s) in sides.iter().enumerate() {
        if tree[ci] || p.creases()[ci].role == CreaseRole::Boundary {
            continue;
        }
        if let [Some(l), Some(r)] = *s {
            let want = frames[r].compose(&hinge(ci));
            closure = closure.max(frames[l].distance(&want, scale));
        }
    }
    for v in 0..p.vertices().len() {
        let rho = p.vertex_creases(v).map(|c| crease_rho[c]);
        closure = closure.max(closure_residual(p.vertices()[v].alpha(), rho));
    }
    if closure > tol.closure {
        return Err(Error::ClosureViolation(format!(
            "panels disagree by {closure:.3e} across creases that close a loop"
        )));
    }

    let mut coords: Vec<Option<Vector3<f64>>> = vec![None; pts.len()];
    for (f, face) in p.faces().iter().enumerate() {
        for &k in &face.corners {
            coords[k].get_or_insert_with(|| frames[f].apply(&lift(pts[k])));
        }
    }
    let coords: Vec<Vector3<f64>> = coords.into_iter().map(|c| c.unwrap_or_else(Vector3::zeros)).collect();
    let rigidity = rigidity_residual(p, &coords);
    if rigidity > tol.rigid {
        return Err(Error::RigidityViolation(format!(
            "a panel is distorted by {rigidity:.3e} relative to its layout"
        )));
    }
    Ok(FoldedState {
        coords: coords.iter().map(|c| [c.x, c.y, c.z]).collect(),
        panel_frames: frames,
        crease_rho: crease_rho.to_vec(),
        driving_angle,
        rigidity_residual: rigidity,
        closure_residual: closure,
    })
}

/// Largest relative change of a panel edge or diagonal, and largest
/// out-of-plane offset of a panel corner relative to the panel size.
pub fn rigidity_residual(p: &QuadPattern, coords: &[Vector3<f64>]) -> f64 {
    let pts = p.points();
    let mut worst = 0.0_f64;
    for f in p.faces() {
        let c = f.corners;
        let mut size = 0.0_f64;
        for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)] {
            let flat = (lift(pts[c[i]]) - lift(pts[c[j]])).norm();
            let folded = (coords[c[i]] - coords[c[j]]).norm();
            size = size.max(flat);
            worst = worst.max((folded - flat).abs() / flat);
        }
        let n = (coords[c[1]] - coords[c[0]]).cross(&(coords[c[3]] - coords[c[0]]));
        if n.norm() > 0.0 {
            let off = n.normalize().dot(&(coords[c[2]] - coords[c[0]]));
            worst = worst.max(off.abs() / size);
        }
    }
    worst
}

/// Folds the pattern from the flat state to `fraction` of the certified
/// interval end in `n_frames` evenly spaced steps.
pub fn sweep(p: &QuadPattern, branches: &[BranchId], n_frames: usize, fraction: f64) -> Result<SweepResult> {
    sweep_with(p, branches, n_frames, fraction, 200, &Tolerances::default())
}

/// [`sweep`] with the number of certification samples and tolerances given.
pub fn sweep_with(
    p: &QuadPattern,
    branches: &[BranchId],
    n_frames: usize,
    fraction: f64,
    n_samples: usize,
    tol: &Tolerances,
) -> Result<SweepResult> {
    if n_frames == 0 {
        return Err(Error::InvalidUnit("a sweep needs at least one frame".into()));
    }
    let report = certify_with(p, branches, n_samples, tol)?;
    if !report.is_rigid_foldable() {
        return Err(Error::ValidationFailed(report.summary()));
    }
    let tree = build_tree(&p.with_branches(branches.to_vec())?)?;
    let end = report.interval.hi * fraction.clamp(0.0, 1.0);
    let frames: Vec<FoldedState> = (0..n_frames)
        .into_par_iter()
        .map(|k| {
            let x = if n_frames == 1 { 0.0 } else { end * k as f64 / (n_frames - 1) as f64 };
            let s = propagate(&tree, p, x, branches, tol)?;
            realize_with(p, &s.crease_rho, x, tol)
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        max_rigidity_residual: frames.iter().map(|f| f.rigidity_residual).fold(0.0, f64::max),
        max_closure_residual: frames.iter().map(|f| f.closure_residual).fold(0.0, f64::max),
        frames,
        branches: branches.to_vec(),
    })
}
