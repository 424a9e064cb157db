//! Grid patterns: units stacked into columns, columns placed side by side.
//!
//! Inner vertices form an `rows x cols` grid. Vertex `(i, j)` sits in row `i`
//! (counted downwards) and column `j` (counted rightwards) and uses the grid
//! orientation of [`crate::unit`]: creases north, west, south, east.
//! Creases joining vertices of one column are column creases, creases joining
//! neighbouring columns are row creases, and creases running from a vertex to
//! the paper boundary are outer creases.

use crate::angle::Tolerances;
use crate::error::{Error, Result};
use crate::unit::{realized_branches, validate_unit, Unit, UnitKind, UnitSpec, EAST, NORTH, SOUTH, WEST};
use crate::vertex::{realized_branch, BranchId, Vertex4};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn add_scaled(a: P2, d: P2, s: f64) -> P2 {
    [a[0] + s * d[0], a[1] + s * d[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn dir(theta: f64) -> P2 {
    [theta.cos(), theta.sin()]
}

/// Crease lengths used to lay out a pattern. Missing entries default to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Lengths {
    /// Row creases of the top row, left to right (`cols - 1` entries).
    pub top_row: Vec<f64>,
    /// Column creases of the left column, top to bottom (`rows - 1` entries).
    pub left_column: Vec<f64>,
    /// Length of every outer crease; 1 when unset.
    pub boundary: Option<f64>,
}

impl Lengths {
    fn top(&self, j: usize) -> f64 {
        self.top_row.get(j).copied().unwrap_or(1.0)
    }

    fn left(&self, i: usize) -> f64 {
        self.left_column.get(i).copied().unwrap_or(1.0)
    }

    fn outer(&self) -> f64 {
        self.boundary.unwrap_or(1.0)
    }

    fn check(&self) -> Result<()> {
        let all = self.top_row.iter().chain(&self.left_column).chain(self.boundary.iter());
        for &l in all {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::LayoutFailure(format!("crease length {l} is not positive")));
            }
        }
        Ok(())
    }
}

/// Columns of stacked units: unit `k + 1` of a column starts at the bottom
/// vertex of unit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchPlan {
    pub columns: Vec<Vec<Unit>>,
    pub lengths: Lengths,
}

/// File form of a [`StitchPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub lengths: Lengths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub units: Vec<UnitSpec>,
}

impl PlanSpec {
    pub fn from_plan(p: &StitchPlan) -> PlanSpec {
        PlanSpec {
            columns: p
                .columns
                .iter()
                .map(|c| ColumnSpec {
                    units: c.iter().map(UnitSpec::from_unit).collect(),
                })
                .collect(),
            lengths: p.lengths.clone(),
        }
    }

    pub fn to_plan(&self) -> Result<StitchPlan> {
        let columns = self
            .columns
            .iter()
            .map(|c| c.units.iter().map(UnitSpec::to_unit).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(StitchPlan {
            columns,
            lengths: self.lengths.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreaseRole {
    /// Joins vertices of neighbouring columns.
    Row,
    /// Joins vertices of one column.
    Column,
    /// Runs from a vertex to the paper boundary.
    Outer,
    /// Paper edge; never folds.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crease {
    pub ends: [usize; 2],
    pub role: CreaseRole,
    /// `(vertex, slot)` pairs that see this crease; empty for boundary edges.
    pub owners: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    /// Bounded by four inner vertices.
    Inner,
    /// Between two neighbouring vertices on the grid border.
    Edge,
    /// Between two outer creases of one vertex.
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Point indices, counter-clockwise.
    pub corners: [usize; 4],
    pub kind: FaceKind,
}

/// A planar quadrilateral crease pattern with its folding data.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadPattern {
    rows: usize,
    cols: usize,
    vertices: Vec<Vertex4>,
    branches: Vec<BranchId>,
    points: Vec<P2>,
    creases: Vec<Crease>,
    faces: Vec<Face>,
    vertex_creases: Vec<[usize; 4]>,
    column_kinds: Option<Vec<Vec<UnitKind>>>,
}

/// Outer crease end points, one optional point per vertex slot.
pub type OuterEnds = Vec<[Option<P2>; 4]>;

impl QuadPattern {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    pub fn vertex(&self, i: usize, j: usize) -> &Vertex4 {
        &self.vertices[self.index(i, j)]
    }

    pub fn vertices(&self) -> &[Vertex4] {
        &self.vertices
    }

    pub fn branches(&self) -> &[BranchId] {
        &self.branches
    }

    pub fn with_branches(&self, branches: Vec<BranchId>) -> Result<QuadPattern> {
        if branches.len() != self.vertices.len() {
            return Err(Error::InvalidUnit(format!(
                "{} branch choices for {} vertices",
                branches.len(),
                self.vertices.len()
            )));
        }
        Ok(QuadPattern {
            branches,
            ..self.clone()
        })
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn creases(&self) -> &[Crease] {
        &self.creases
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Crease index of each slot of vertex `v`.
    pub fn vertex_creases(&self, v: usize) -> [usize; 4] {
        self.vertex_creases[v]
    }

    pub fn column_kinds(&self) -> Option<&[Vec<UnitKind>]> {
        self.column_kinds.as_deref()
    }

    pub fn inner_panels(&self) -> usize {
        (self.rows - 1) * (self.cols - 1)
    }

    /// Row crease between vertices `(i, j)` and `(i, j + 1)`.
    pub fn row_crease(&self, i: usize, j: usize) -> usize {
        self.vertex_creases[self.index(i, j)][EAST]
    }

    /// Position of inner vertex `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> P2 {
        self.points[self.index(i, j)]
    }

    /// Lays out a grid of vertices and builds the pattern. Sector sums around
    /// every inner panel must close to 2pi.
    pub fn from_grid(
        rows: usize,
        cols: usize,
        vertices: Vec<Vertex4>,
        branches: Vec<BranchId>,
        lengths: &Lengths,
    ) -> Result<QuadPattern> {
        let tol = Tolerances::default();
        check_shape(rows, cols, vertices.len(), branches.len())?;
        check_panel_sums(rows, cols, &vertices, &tol)?;
        let (pts, ends) = layout(rows, cols, &vertices, lengths, &tol)?;
        Self::assemble(rows, cols, pts, ends, branches, Some(vertices), &tol)
    }

    /// Builds a pattern from planar coordinates alone; sector angles are
    /// measured from the points.
    pub fn from_points(
        rows: usize,
        cols: usize,
        vertex_points: Vec<P2>,
        outer_ends: OuterEnds,
        branches: Vec<BranchId>,
    ) -> Result<QuadPattern> {
        Self::assemble(rows, cols, vertex_points, outer_ends, branches, None, &Tolerances::default())
    }

    /// Builds a pattern from coordinates and stored sector angles, which must
    /// agree with the coordinates within the layout tolerance.
    pub fn from_points_and_sectors(
        rows: usize,
        cols: usize,
        vertex_points: Vec<P2>,
        outer_ends: OuterEnds,
        branches: Vec<BranchId>,
        vertices: Vec<Vertex4>,
    ) -> Result<QuadPattern> {
        let tol = Tolerances::default();
        Self::assemble(rows, cols, vertex_points, outer_ends, branches, Some(vertices), &tol)
    }

    fn assemble(
        rows: usize,
        cols: usize,
        vpts: Vec<P2>,
        ends: OuterEnds,
        branches: Vec<BranchId>,
        stored: Option<Vec<Vertex4>>,
        tol: &Tolerances,
    ) -> Result<QuadPattern> {
        check_shape(rows, cols, vpts.len(), branches.len())?;
        if ends.len() != vpts.len() {
            return Err(Error::NotABlanket("one outer-end record per vertex expected".into()));
        }
        let nv = rows * cols;
        let idx = |i: usize, j: usize| i * cols + j;
        let neighbour = |v: usize, slot: usize| -> Option<usize> {
            let (i, j) = (v / cols, v % cols);
            match slot {
                NORTH if i > 0 => Some(idx(i - 1, j)),
                SOUTH if i + 1 < rows => Some(idx(i + 1, j)),
                WEST if j > 0 => Some(idx(i, j - 1)),
                EAST if j + 1 < cols => Some(idx(i, j + 1)),
                _ => None,
            }
        };

        let mut points = vpts.clone();
        let mut end_index = vec![[usize::MAX; 4]; nv];
        for v in 0..nv {
            for slot in 0..4 {
                match (neighbour(v, slot), ends[v][slot]) {
                    (Some(n), None) => end_index[v][slot] = n,
                    (None, Some(p)) => {
                        end_index[v][slot] = points.len();
                        points.push(p);
                    }
                    (Some(_), Some(_)) => {
                        return Err(Error::NotABlanket(format!(
                            "vertex {v} slot {slot} has both a neighbour and an outer end"
                        )))
                    }
                    (None, None) => {
                        return Err(Error::NotABlanket(format!("vertex {v} slot {slot} has no outer end")))
                    }
                }
            }
        }

        // Sector angles from the coordinates.
        let mut vertices = Vec::with_capacity(nv);
        for v in 0..nv {
            let th: [f64; 4] = std::array::from_fn(|s| {
                let d = sub(points[end_index[v][s]], points[v]);
                d[1].atan2(d[0])
            });
            let a: [f64; 4] = std::array::from_fn(|k| (th[k] - th[(k + 3) % 4]).rem_euclid(TAU));
            let sum: f64 = a.iter().sum();
            if (sum - TAU).abs() > 1e-6 {
                return Err(Error::LayoutFailure(format!(
                    "creases at vertex {v} are not in north, west, south, east order"
                )));
            }
            let measured = a.map(|x| x * TAU / sum);
            let vx = match &stored {
                Some(s) => {
                    let want = s[v].alpha();
                    let err = (0..4).map(|k| (want[k] - measured[k]).abs()).fold(0.0, f64::max);
                    if err > tol.layout {
                        return Err(Error::LayoutFailure(format!(
                            "vertex {v}: layout misses a sector angle by {err:.3e} rad"
                        )));
                    }
                    s[v]
                }
                None => Vertex4::new(measured)?,
            };
            vertices.push(vx);
        }

        let mut creases = Vec::new();
        let mut vertex_creases = vec![[usize::MAX; 4]; nv];
        for v in 0..nv {
            for slot in 0..4 {
                if vertex_creases[v][slot] != usize::MAX {
                    continue;
                }
                let id = creases.len();
                vertex_creases[v][slot] = id;
                let mut owners = vec![(v, slot)];
                let role = match neighbour(v, slot) {
                    Some(n) => {
                        let back = (slot + 2) % 4;
                        vertex_creases[n][back] = id;
                        owners.push((n, back));
                        if slot == EAST || slot == WEST {
                            CreaseRole::Row
                        } else {
                            CreaseRole::Column
                        }
                    }
                    None => CreaseRole::Outer,
                };
                creases.push(Crease {
                    ends: [v, end_index[v][slot]],
                    role,
                    owners,
                });
            }
        }

        let mut faces = Vec::new();
        let boundary = |a: usize, b: usize, creases: &mut Vec<Crease>| {
            creases.push(Crease {
                ends: [a, b],
                role: CreaseRole::Boundary,
                owners: vec![],
            })
        };
        for i in 0..rows.saturating_sub(1) {
            for j in 0..cols.saturating_sub(1) {
                faces.push(Face {
                    corners: [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)],
                    kind: FaceKind::Inner,
                });
            }
        }
        for j in 0..cols.saturating_sub(1) {
            let (a, b) = (idx(0, j), idx(0, j + 1));
            let (ea, eb) = (end_index[a][NORTH], end_index[b][NORTH]);
            faces.push(Face {
                corners: [a, b, eb, ea],
                kind: FaceKind::Edge,
            });
            boundary(eb, ea, &mut creases);
            let (a, b) = (idx(rows - 1, j), idx(rows - 1, j + 1));
            let (ea, eb) = (end_index[a][SOUTH], end_index[b][SOUTH]);
            faces.push(Face {
                corners: [a, ea, eb, b],
                kind: FaceKind::Edge,
            });
            boundary(ea, eb, &mut creases);
        }
        for i in 0..rows.saturating_sub(1) {
            let (a, b) = (idx(i, 0), idx(i + 1, 0));
            let (ea, eb) = (end_index[a][WEST], end_index[b][WEST]);
            faces.push(Face {
                corners: [a, ea, eb, b],
                kind: FaceKind::Edge,
            });
            boundary(ea, eb, &mut creases);
            let (a, b) = (idx(i, cols - 1), idx(i + 1, cols - 1));
            let (ea, eb) = (end_index[a][EAST], end_index[b][EAST]);
            faces.push(Face {
                corners: [a, b, eb, ea],
                kind: FaceKind::Edge,
            });
            boundary(eb, ea, &mut creases);
        }
        for v in 0..nv {
            for k in 0..4 {
                let (s0, s1) = ((k + 3) % 4, k);
                if neighbour(v, s0).is_some() || neighbour(v, s1).is_some() {
                    continue;
                }
                let (e0, e1) = (end_index[v][s0], end_index[v][s1]);
                let theta = vertices[v].alpha()[k];
                let d0 = sub(points[e0], points[v]);
                let l = norm(d0).min(norm(sub(points[e1], points[v])));
                let mid = d0[1].atan2(d0[0]) + 0.5 * theta;
                let c = add_scaled(points[v], dir(mid), l * (1.0 + (0.5 * theta).cos()));
                let ci = points.len();
                points.push(c);
                faces.push(Face {
                    corners: [v, e0, ci, e1],
                    kind: FaceKind::Corner,
                });
                boundary(e0, ci, &mut creases);
                boundary(ci, e1, &mut creases);
            }
        }

        for (fi, f) in faces.iter().enumerate() {
            let poly = f.corners.map(|k| points[k]);
            if !simple_ccw(&poly) {
                return Err(Error::LayoutFailure(format!(
                    "panel {fi} ({:?}) is folded over or self-intersecting",
                    f.kind
                )));
            }
        }

        Ok(QuadPattern {
            rows,
            cols,
            vertices,
            branches,
            points,
            creases,
            faces,
            vertex_creases,
            column_kinds: None,
        })
    }

    /// Planar direction of slot `slot` at vertex `v`.
    pub fn crease_direction(&self, v: usize, slot: usize) -> P2 {
        let c = &self.creases[self.vertex_creases[v][slot]];
        let other = if c.ends[0] == v { c.ends[1] } else { c.ends[0] };
        let d = sub(self.points[other], self.points[v]);
        let n = norm(d);
        [d[0] / n, d[1] / n]
    }

    /// Outer crease end points, as accepted by [`QuadPattern::from_points`].
    pub fn outer_ends(&self) -> OuterEnds {
        let mut ends = vec![[None; 4]; self.vertices.len()];
        for c in &self.creases {
            if c.role == CreaseRole::Outer {
                let (v, s) = c.owners[0];
                ends[v][s] = Some(self.points[c.ends[1]]);
            }
        }
        ends
    }

    /// The same pattern with the far end of one crease of vertex `(i, j)`
    /// turned by `delta` about the vertex. Sector angles are re-measured.
    pub fn with_rotated_crease(&self, i: usize, j: usize, slot: usize, delta: f64) -> Result<QuadPattern> {
        let v = self.index(i, j);
        let c = &self.creases[self.vertex_creases[v][slot]];
        let other = if c.ends[0] == v { c.ends[1] } else { c.ends[0] };
        let d = sub(self.points[other], self.points[v]);
        let (s, co) = delta.sin_cos();
        let moved = add_scaled(self.points[v], [co * d[0] - s * d[1], s * d[0] + co * d[1]], 1.0);
        let mut vpts: Vec<P2> = self.points[..self.vertices.len()].to_vec();
        let mut ends = self.outer_ends();
        if c.role == CreaseRole::Outer {
            ends[v][slot] = Some(moved);
        } else {
            vpts[other] = moved;
        }
        let mut p = QuadPattern::from_points(self.rows, self.cols, vpts, ends, self.branches.clone())?;
        p.column_kinds = self.column_kinds.clone();
        Ok(p)
    }

    /// Replaces point coordinates by nearby values, e.g. read back from a file.
    pub(crate) fn with_points(mut self, points: Vec<P2>) -> Result<QuadPattern> {
        if points.len() != self.points.len() {
            return Err(Error::NotABlanket(format!(
                "{} points for a pattern with {}",
                points.len(),
                self.points.len()
            )));
        }
        self.points = points;
        Ok(self)
    }

    /// Largest deviation between stored sector angles and the layout.
    pub fn layout_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for v in 0..self.vertices.len() {
            let th: [f64; 4] = std::array::from_fn(|s| {
                let d = self.crease_direction(v, s);
                d[1].atan2(d[0])
            });
            let a = self.vertices[v].alpha();
            for k in 0..4 {
                let m = (th[k] - th[(k + 3) % 4]).rem_euclid(TAU);
                worst = worst.max((m - a[k]).abs());
            }
        }
        worst
    }
}

fn check_shape(rows: usize, cols: usize, nv: usize, nb: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::NotABlanket("a pattern needs at least one vertex".into()));
    }
    if nv != rows * cols || nb != nv {
        return Err(Error::NotABlanket(format!(
            "{rows}x{cols} grid needs {} vertices and branches, got {nv} and {nb}",
            rows * cols
        )));
    }
    Ok(())
}

fn check_panel_sums(rows: usize, cols: usize, v: &[Vertex4], tol: &Tolerances) -> Result<()> {
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols.saturating_sub(1) {
            let a = |r: usize, c: usize, k: usize| v[r * cols + c].alpha()[k];
            // Sector SE of the top-left vertex, WS of top-right, NW of
            // bottom-right and EN of bottom-left.
            let s = a(i, j, 3) + a(i, j + 1, 2) + a(i + 1, j + 1, 1) + a(i + 1, j, 0);
            if (s - TAU).abs() > tol.angle {
                return Err(Error::IncompatibleUnits(format!(
                    "panel ({i}, {j}) angles sum to {:.9} deg",
                    s.to_degrees()
                )));
            }
        }
    }
    Ok(())
}

fn simple_ccw(p: &[P2; 4]) -> bool {
    let area: f64 = (0..4).map(|k| cross(p[k], p[(k + 1) % 4])).sum::<f64>() * 0.5;
    let scale = (0..4).map(|k| norm(sub(p[(k + 1) % 4], p[k]))).fold(0.0, f64::max);
    if !(area > 1e-12 * scale * scale) {
        return false;
    }
    // Opposite edges must not cross.
    let hits = |a: P2, b: P2, c: P2, d: P2| {
        let d1 = cross(sub(b, a), sub(c, a));
        let d2 = cross(sub(b, a), sub(d, a));
        let d3 = cross(sub(d, c), sub(a, c));
        let d4 = cross(sub(d, c), sub(b, c));
        d1 * d2 < 0.0 && d3 * d4 < 0.0
    };
    !(hits(p[0], p[1], p[2], p[3]) || hits(p[1], p[2], p[3], p[0]))
}

/// Places the vertices row by row. Returns vertex points and outer crease ends.
pub fn layout(
    rows: usize,
    cols: usize,
    vertices: &[Vertex4],
    lengths: &Lengths,
    tol: &Tolerances,
) -> Result<(Vec<P2>, OuterEnds)> {
    lengths.check()?;
    let n = rows * cols;
    let mut pts = vec![[0.0; 2]; n];
    let mut base = vec![0.0; n];
    let abs_dir = |base: f64, v: &Vertex4, slot: usize| base + v.crease_directions()[slot];
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let v = &vertices[k];
            if i == 0 && j == 0 {
                base[k] = FRAC_PI_2;
                continue;
            }
            if i == 0 {
                let l = k - 1;
                let e = abs_dir(base[l], &vertices[l], EAST);
                pts[k] = add_scaled(pts[l], dir(e), lengths.top(j - 1));
                base[k] = e + PI - v.crease_directions()[WEST];
                continue;
            }
            let up = k - cols;
            let s = abs_dir(base[up], &vertices[up], SOUTH);
            if j == 0 {
                pts[k] = add_scaled(pts[up], dir(s), lengths.left(i - 1));
                base[k] = s + PI;
                continue;
            }
            let l = k - 1;
            let e = abs_dir(base[l], &vertices[l], EAST);
            let (da, db) = (dir(e), dir(s));
            let c = cross(da, db);
            let panel = (i - 1) * (cols - 1) + (j - 1);
            if c.abs() < 1e-12 {
                return Err(Error::LayoutFailure(format!(
                    "panel {panel}: bounding creases are parallel"
                )));
            }
            let w = sub(pts[up], pts[l]);
            let sa = cross(w, db) / c;
            let sb = cross(w, da) / c;
            if sa <= 0.0 || sb <= 0.0 {
                return Err(Error::LayoutFailure(format!(
                    "panel {panel}: creases meet behind their vertices"
                )));
            }
            pts[k] = add_scaled(pts[l], da, sa);
            base[k] = e + PI - v.crease_directions()[WEST];
            let north = base[k];
            let gap = crate::angle::wrapped_diff(north, s + PI).abs();
            if gap > tol.layout {
                return Err(Error::LayoutFailure(format!(
                    "panel {panel}: angles do not close (off by {gap:.3e} rad)"
                )));
            }
        }
    }
    let lb = lengths.outer();
    let mut ends = vec![[None; 4]; n];
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let outer = [i == 0, j == 0, i + 1 == rows, j + 1 == cols];
            for slot in 0..4 {
                if outer[slot] {
                    let d = dir(abs_dir(base[k], &vertices[k], slot));
                    ends[k][slot] = Some(add_scaled(pts[k], d, lb));
                }
            }
        }
    }
    Ok((pts, ends))
}

/// Joins the units of a plan into a pattern.
pub fn stitch(plan: &StitchPlan) -> Result<QuadPattern> {
    let tol = Tolerances::default();
    let cols = plan.columns.len();
    if cols == 0 {
        return Err(Error::NotABlanket("plan has no columns".into()));
    }
    let per = plan.columns[0].len();
    if per == 0 || plan.columns.iter().any(|c| c.len() != per) {
        return Err(Error::UnsupportedTopology(
            "every column must stack the same, non-zero number of units".into(),
        ));
    }
    let rows = per + 1;
    for (j, col) in plan.columns.iter().enumerate() {
        for (k, u) in col.iter().enumerate() {
            let r = validate_unit(u, 200)?;
            if !r.valid {
                return Err(Error::ValidationFailed(format!(
                    "unit {k} of column {j}: side residual {:.3e}",
                    r.max_residual
                )));
            }
        }
        for k in 0..per - 1 {
            let (a, b) = (&col[k], &col[k + 1]);
            let gap = (0..4)
                .map(|s| (a.bottom.alpha()[s] - b.top.alpha()[s]).abs())
                .fold(0.0, f64::max);
            if gap > tol.angle {
                return Err(Error::IncompatibleUnits(format!(
                    "column {j}: units {k} and {} disagree on their shared vertex by {gap:.3e} rad",
                    k + 1
                )));
            }
            if a.branch_bottom.family() != b.branch_top.family() {
                return Err(Error::IncompatibleUnits(format!(
                    "column {j}: units {k} and {} put their shared vertex on different branches",
                    k + 1
                )));
            }
        }
    }
    let mut vertices = Vec::with_capacity(rows * cols);
    let mut branches = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for col in &plan.columns {
            let (v, b) = if i == 0 {
                (col[0].top, col[0].branch_top)
            } else {
                (col[i - 1].bottom, col[i - 1].branch_bottom)
            };
            vertices.push(v);
            branches.push(b);
        }
    }
    let mut p = QuadPattern::from_grid(rows, cols, vertices, branches, &plan.lengths)?;
    p.column_kinds = Some(
        plan.columns
            .iter()
            .map(|c| c.iter().map(|u| u.kind).collect())
            .collect(),
    );
    Ok(p)
}

/// Independent sector angles contributed by one unit kind: `base` when it
/// starts a column, `stack` when stacked under another unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindDof {
    pub base: i64,
    pub stack: i64,
}

/// Per-kind counting table. The basic-unit entries are conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DofTable {
    pub straight_line_basic: KindDof,
    pub flat_foldable_basic: KindDof,
    pub general_basic: KindDof,
    pub flat_foldable: KindDof,
    pub custom: KindDof,
}

impl Default for DofTable {
    fn default() -> Self {
        DofTable {
            straight_line_basic: KindDof { base: 2, stack: 0 },
            flat_foldable_basic: KindDof { base: 2, stack: 0 },
            general_basic: KindDof { base: 3, stack: 0 },
            flat_foldable: KindDof { base: 3, stack: 1 },
            custom: KindDof { base: 3, stack: 0 },
        }
    }
}

impl DofTable {
    pub fn get(&self, kind: UnitKind) -> KindDof {
        match kind {
            UnitKind::StraightLineBasic => self.straight_line_basic,
            UnitKind::FlatFoldableBasic => self.flat_foldable_basic,
            UnitKind::GeneralBasic => self.general_basic,
            UnitKind::FlatFoldable { .. } => self.flat_foldable,
            UnitKind::Custom => self.custom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDof {
    pub base: i64,
    /// Contributions of the stacked units below the first one.
    pub stacked: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowDeduction {
    /// Panel row, counted downwards.
    pub row: usize,
    pub inner_panels: usize,
    /// Row creases above and below every panel of the row are parallel.
    pub parallel: bool,
    pub deducted: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofReport {
    pub columns: Vec<ColumnDof>,
    pub rows: Vec<RowDeduction>,
    pub total: i64,
    pub branch_counts: Vec<usize>,
    pub branch_count: usize,
    /// The sum written out term by term, e.g. `3 + 3 + 1 + 3 - 4 = 6`.
    pub terms: String,
    pub branch_terms: String,
}

/// Whether panel row `r` lies between parallel row creases.
pub fn parallel_row(p: &QuadPattern, r: usize, tol: &Tolerances) -> bool {
    (0..p.cols() - 1).all(|j| {
        let h = |i: usize| {
            let d = sub(p.point(i, j + 1), p.point(i, j));
            let n = norm(d);
            [d[0] / n, d[1] / n]
        };
        let (a, b) = (h(r), h(r + 1));
        cross(a, b).abs() <= tol.dir && a[0] * b[0] + a[1] * b[1] > 0.0
    })
}

/// Counts independent sector angles and motion branches of a plan.
pub fn count_dof(plan: &StitchPlan) -> Result<DofReport> {
    count_dof_with(plan, &DofTable::default())
}

pub fn count_dof_with(plan: &StitchPlan, table: &DofTable) -> Result<DofReport> {
    let p = stitch(plan)?;
    let tol = Tolerances::default();
    let columns: Vec<ColumnDof> = plan
        .columns
        .iter()
        .map(|c| ColumnDof {
            base: table.get(c[0].kind).base,
            stacked: c[1..].iter().map(|u| table.get(u.kind).stack).collect(),
        })
        .collect();
    let rows: Vec<RowDeduction> = (0..p.rows() - 1)
        .map(|r| {
            let parallel = parallel_row(&p, r, &tol);
            let inner = p.cols() - 1;
            RowDeduction {
                row: r,
                inner_panels: inner,
                parallel,
                deducted: if parallel { 0 } else { inner as i64 },
            }
        })
        .collect();
    let mut parts: Vec<i64> = vec![];
    for c in &columns {
        parts.push(c.base);
        parts.extend(c.stacked.iter().copied().filter(|&x| x != 0));
    }
    let deduction: i64 = rows.iter().map(|r| r.deducted).sum();
    let total = parts.iter().sum::<i64>() - deduction;
    let mut terms = parts.iter().map(i64::to_string).collect::<Vec<_>>().join(" + ");
    if deduction != 0 {
        terms.push_str(&format!(" - {deduction}"));
    }
    terms.push_str(&format!(" = {total}"));
    if total < 0 {
        return Err(Error::NegativeDof(total));
    }
    let branch_counts = column_branch_counts(plan);
    let branch_count = branch_counts.iter().product();
    let branch_terms = format!(
        "{} = {branch_count}",
        branch_counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" x ")
    );
    Ok(DofReport {
        columns,
        rows,
        total,
        branch_counts,
        branch_count,
        terms,
        branch_terms,
    })
}

/// Branch assignments of one column's vertices (top to bottom) under which
/// every unit of the column validates with some sign pair and no vertex
/// degenerates to a fold along a single line.
pub fn column_branch_sets(units: &[Unit]) -> Vec<Vec<BranchId>> {
    let m = units.len() + 1;
    let fams = [BranchId::Branch1, BranchId::Branch2];
    let mut out = vec![];
    for code in 0..(1usize << m) {
        let b: Vec<BranchId> = (0..m).map(|k| fams[(code >> k) & 1]).collect();
        let ok = units.iter().enumerate().all(|(k, u)| {
            let c = Unit {
                branch_top: b[k],
                branch_bottom: b[k + 1],
                ..*u
            };
            if realized_branches(&c).iter().any(|r| r.is_line()) {
                return false;
            }
            [[1, 1], [1, -1], [-1, 1], [-1, -1]].into_iter().any(|signs| {
                validate_unit(&Unit { signs, ..c }, 200).is_ok_and(|r| r.valid)
            })
        });
        if ok {
            out.push(b);
        }
    }
    out
}

pub fn column_branch_counts(plan: &StitchPlan) -> Vec<usize> {
    plan.columns.iter().map(|c| column_branch_sets(c).len()).collect()
}

/// Product of per-column branch counts.
pub fn count_branches(plan: &StitchPlan) -> usize {
    column_branch_counts(plan).iter().product()
}

/// Whether vertex `v` of `p` is on a branch that only folds along a line.
pub fn on_line_branch(p: &QuadPattern, v: usize) -> bool {
    realized_branch(&p.vertices[v], p.branches[v]).is_line()
}

/// Ready-made plans and patterns used in tests and examples.
pub mod fixtures {
    use super::*;
    use crate::unit::{make_straightline_unit_on, FfMode};

    fn ff(a: f64, b: f64) -> Result<Vertex4> {
        Vertex4::new([a, b, PI - a, PI - b])
    }

    fn mirror(v: &Vertex4) -> Result<Vertex4> {
        let a = v.alpha();
        Vertex4::new([a[3], a[2], a[1], a[0]])
    }

    fn half_tan(x: f64) -> f64 {
        (0.5 * x).tan()
    }

    /// Free angles of a 3x3 pattern: a straight-line column, a flat-foldable
    /// column (new unit over a flat-foldable basic unit) and another
    /// straight-line column.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct LineFfParams {
        pub s2: f64,
        pub u1: f64,
        pub u2: f64,
        pub f1: f64,
        pub f2: f64,
    }

    impl Default for LineFfParams {
        fn default() -> Self {
            LineFfParams {
                s2: 70f64.to_radians(),
                u1: 95f64.to_radians(),
                u2: 60f64.to_radians(),
                f1: 80f64.to_radians(),
                f2: 95f64.to_radians(),
            }
        }
    }

    pub fn line_ff_plan(p: LineFfParams) -> Result<StitchPlan> {
        let f3 = p.f2 + 2.0 * p.u2 - PI;
        let f4 = 2.0 * (half_tan(p.f2) * half_tan(f3) / half_tan(p.f1)).atan();
        let s1 = 0.5 * (f4 - p.f1 + PI);

        let line = |a: f64, b: f64| -> Result<Vec<Unit>> {
            let v = Vertex4::new([a, b, PI - b, PI - a])?;
            let top = make_straightline_unit_on(v, BranchId::Branch2)?;
            let w = top.bottom;
            let b2 = BranchId::Branch2;
            let next = Unit::new(w, w, [-1, -1], [b2, b2], UnitKind::StraightLineBasic)?;
            Ok(vec![top, next])
        };

        let v01 = ff(p.f1, p.f2)?;
        let v11 = ff(f3, f4)?;
        let v21 = ff(f4, f3)?;
        let b1 = BranchId::Branch1;
        let new_unit = Unit::new(v01, v11, FfMode::APlus.signs(), [b1, b1], UnitKind::FlatFoldable { mode: FfMode::APlus })?;
        let basic = Unit::new(v11, v21, [-1, -1], [b1, b1], UnitKind::FlatFoldableBasic)?;

        Ok(StitchPlan {
            columns: vec![line(s1, p.s2)?, vec![new_unit, basic], line(p.u1, p.u2)?],
            lengths: Lengths::default(),
        })
    }

    /// Free angles of a 3x3 pattern: general-vertex columns on both sides of
    /// a column of two new flat-foldable units.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct GeneralFfParams {
        pub g1: f64,
        pub g2: f64,
        pub h1: f64,
        pub h3: f64,
        pub f1: f64,
        pub f2: f64,
    }

    impl Default for GeneralFfParams {
        fn default() -> Self {
            GeneralFfParams {
                g1: 95f64.to_radians(),
                g2: 80f64.to_radians(),
                h1: 90f64.to_radians(),
                h3: 88f64.to_radians(),
                f1: 85f64.to_radians(),
                f2: 95f64.to_radians(),
            }
        }
    }

    /// `branches` gives the branch of the left and right columns.
    pub fn general_ff_plan(p: GeneralFfParams, branches: [BranchId; 2]) -> Result<StitchPlan> {
        let f3 = p.f2 + PI - 2.0 * p.h3;
        let ratio = half_tan(p.f1) / half_tan(p.f2);
        let f4 = 2.0 * (half_tan(f3) / ratio).atan();
        let g4 = 0.5 * (p.f1 + PI - f4);
        let f6 = f3 + PI - 2.0 * p.g1;
        let f5 = 2.0 * (ratio * half_tan(f6)).atan();
        let h2 = 0.5 * (f4 + PI - f5);
        let g = Vertex4::new([p.g1, p.g2, TAU - p.g1 - p.g2 - g4, g4])?;
        let h = Vertex4::new([p.h1, h2, p.h3, TAU - p.h1 - h2 - p.h3])?;

        let column = |v: Vertex4, b: BranchId| -> Result<Vec<Unit>> {
            let m = mirror(&v)?;
            Ok(vec![
                Unit::new(v, m, [1, 1], [b, b], UnitKind::GeneralBasic)?,
                Unit::new(m, v, [1, 1], [b, b], UnitKind::GeneralBasic)?,
            ])
        };
        let (v01, v11, v21) = (ff(p.f1, p.f2)?, ff(f3, f4)?, ff(f5, f6)?);
        let b1 = BranchId::Branch1;
        let kind = UnitKind::FlatFoldable { mode: FfMode::APlus };
        let signs = FfMode::APlus.signs();
        Ok(StitchPlan {
            columns: vec![
                column(g, branches[0])?,
                vec![
                    Unit::new(v01, v11, signs, [b1, b1], kind)?,
                    Unit::new(v11, v21, signs, [b1, b1], kind)?,
                ],
                column(h, branches[1])?,
            ],
            lengths: Lengths::default(),
        })
    }

    /// Two vertices in one column: a straight-line vertex folding only along
    /// its east-west line above a vertex with a sector wider than pi, which
    /// cannot fold at all. The crease between them never folds.
    pub fn idle_vertex_pattern() -> Result<QuadPattern> {
        let top = Vertex4::from_degrees([80.0, 100.0, 95.0, 85.0])?;
        let bottom = Vertex4::from_degrees([60.0, 50.0, 200.0, 50.0])?;
        QuadPattern::from_grid(
            2,
            1,
            vec![top, bottom],
            vec![BranchId::Branch2, BranchId::Branch1],
            &Lengths::default(),
        )
    }
}
