//! FOLD, OBJ and SVG output, and FOLD input.
//!
//! Numbers are written with at most 12 significant digits and JSON keys are
//! sorted, so identical inputs give byte-identical files.

use crate::angle::Tolerances;
use crate::error::{Error, Result};
use crate::foldability::{labels_from_angles, MvLabel};
use crate::pattern::{CreaseRole, QuadPattern, P2};
use crate::realization::FoldedState;
use crate::vertex::{BranchId, Vertex4};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Rounds to 12 significant digits; negative zero becomes zero.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    r + 0.0
}

pub fn fmt12(x: f64) -> String {
    format!("{}", round12(x))
}

/// A FOLD document holding a crease pattern or one folded frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFileDoc {
    pub file_spec: f64,
    pub file_creator: String,
    pub frame_classes: Vec<String>,
    pub vertices_coords: Vec<Vec<f64>>,
    pub edges_vertices: Vec<[usize; 2]>,
    pub edges_assignment: Vec<String>,
    #[serde(rename = "edges_foldAngle")]
    pub edges_fold_angle: Vec<f64>,
    pub faces_vertices: Vec<[usize; 4]>,
    #[serde(rename = "quadfold:rows")]
    pub rows: usize,
    #[serde(rename = "quadfold:cols")]
    pub cols: usize,
    #[serde(rename = "quadfold:branches")]
    pub branches: Vec<String>,
    /// Sector angles of each inner vertex in degrees.
    #[serde(rename = "quadfold:sectors")]
    pub sectors: Vec<[f64; 4]>,
    /// Edge index of each crease slot (north, west, south, east) per inner vertex.
    #[serde(rename = "quadfold:vertex_edges")]
    pub vertex_edges: Vec<[usize; 4]>,
    /// Planar coordinates, present when `vertices_coords` holds a folded frame.
    #[serde(rename = "quadfold:flat_coords", default, skip_serializing_if = "Option::is_none")]
    pub flat_coords: Option<Vec<[f64; 2]>>,
    #[serde(rename = "quadfold:driving_angle", default, skip_serializing_if = "Option::is_none")]
    pub driving_angle: Option<f64>,
}

impl FoldFileDoc {
    /// Sorted keys, two-space indentation.
    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self).map_err(|e| Error::Serialization(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<FoldFileDoc> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// A pattern read back from FOLD, with the fold angle of every crease in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedFold {
    pub pattern: QuadPattern,
    pub crease_rho: Vec<f64>,
    pub labels: Vec<MvLabel>,
}

fn check_angles(p: &QuadPattern, crease_rho: &[f64]) -> Result<()> {
    if crease_rho.len() != p.creases().len() {
        return Err(Error::Serialization(format!(
            "{} fold angles for {} creases",
            crease_rho.len(),
            p.creases().len()
        )));
    }
    Ok(())
}

fn base_doc(p: &QuadPattern, crease_rho: &[f64]) -> Result<FoldFileDoc> {
    check_angles(p, crease_rho)?;
    let labels = labels_from_angles(p, crease_rho, &Tolerances::default());
    let angles = p
        .creases()
        .iter()
        .zip(crease_rho)
        .map(|(c, &r)| if c.role == CreaseRole::Boundary { 0.0 } else { round12(r.to_degrees()) })
        .collect();
    Ok(FoldFileDoc {
        file_spec: 1.1,
        file_creator: "quadfold".into(),
        frame_classes: vec!["creasePattern".into()],
        vertices_coords: p.points().iter().map(|q| vec![round12(q[0]), round12(q[1])]).collect(),
        edges_vertices: p.creases().iter().map(|c| c.ends).collect(),
        edges_assignment: labels.iter().map(|l| l.letter().to_string()).collect(),
        edges_fold_angle: angles,
        faces_vertices: p.faces().iter().map(|f| f.corners).collect(),
        rows: p.rows(),
        cols: p.cols(),
        branches: p.branches().iter().map(|b| b.to_string()).collect(),
        sectors: p.vertices().iter().map(|v| v.alpha_degrees().map(round12)).collect(),
        vertex_edges: (0..p.vertices().len()).map(|v| p.vertex_creases(v)).collect(),
        flat_coords: None,
        driving_angle: None,
    })
}

/// The crease pattern with the given fold angles. Assignments follow the
/// angle signs: valley positive, mountain negative.
pub fn export_fold(p: &QuadPattern, crease_rho: &[f64]) -> Result<FoldFileDoc> {
    base_doc(p, crease_rho)
}

/// One folded frame: 3D coordinates, the planar layout kept alongside.
pub fn export_fold_state(p: &QuadPattern, s: &FoldedState) -> Result<FoldFileDoc> {
    if s.coords.len() != p.points().len() {
        return Err(Error::Serialization("state does not belong to this pattern".into()));
    }
    let mut doc = base_doc(p, &s.crease_rho)?;
    doc.frame_classes = vec!["foldedForm".into()];
    doc.flat_coords = Some(p.points().iter().map(|q| [round12(q[0]), round12(q[1])]).collect());
    doc.vertices_coords = s.coords.iter().map(|c| c.iter().map(|&x| round12(x)).collect()).collect();
    doc.driving_angle = Some(round12(s.driving_angle.to_degrees()));
    Ok(doc)
}

pub fn import_fold(doc: &FoldFileDoc) -> Result<ImportedFold> {
    let bad = |m: &str| Error::Serialization(m.to_string());
    let nv = doc.rows * doc.cols;
    if doc.sectors.len() != nv || doc.branches.len() != nv || doc.vertex_edges.len() != nv {
        return Err(bad("per-vertex records do not match the grid size"));
    }
    let flat: Vec<P2> = match &doc.flat_coords {
        Some(c) => c.clone(),
        None => doc
            .vertices_coords
            .iter()
            .map(|c| match c.as_slice() {
                [x, y] => Ok([*x, *y]),
                [x, y, z] if *z == 0.0 => Ok([*x, *y]),
                _ => Err(bad("crease pattern coordinates must be planar")),
            })
            .collect::<Result<_>>()?,
    };
    let edge = |e: usize| doc.edges_vertices.get(e).copied().ok_or_else(|| bad("edge index out of range"));
    let mut ends = vec![[None; 4]; nv];
    for v in 0..nv {
        for s in 0..4 {
            let [a, b] = edge(doc.vertex_edges[v][s])?;
            let other = if a == v { b } else { a };
            if other >= nv {
                ends[v][s] = Some(*flat.get(other).ok_or_else(|| bad("vertex index out of range"))?);
            }
        }
    }
    let vertices = doc
        .sectors
        .iter()
        .map(|d| Vertex4::from_degrees(*d))
        .collect::<Result<Vec<_>>>()?;
    let branches = doc
        .branches
        .iter()
        .map(|b| b.parse::<BranchId>())
        .collect::<Result<Vec<_>>>()?;
    if flat.len() < nv {
        return Err(bad("fewer points than inner vertices"));
    }
    let pattern = QuadPattern::from_points_and_sectors(doc.rows, doc.cols, flat[..nv].to_vec(), ends, branches, vertices)?;
    let drift = pattern
        .points()
        .iter()
        .zip(&flat)
        .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
        .fold(0.0, f64::max);
    if pattern.points().len() != flat.len() || drift > 1e-9 {
        return Err(bad("stored coordinates do not match the rebuilt pattern"));
    }
    let pattern = pattern.with_points(flat)?;
    if pattern.creases().len() != doc.edges_vertices.len()
        || pattern.creases().iter().zip(&doc.edges_vertices).any(|(c, e)| c.ends != *e)
    {
        return Err(bad("edges do not match the rebuilt pattern"));
    }
    if doc.edges_fold_angle.len() != doc.edges_vertices.len() {
        return Err(bad("one fold angle per edge expected"));
    }
    let crease_rho: Vec<f64> = doc.edges_fold_angle.iter().map(|d| d.to_radians()).collect();
    let labels = doc
        .edges_assignment
        .iter()
        .map(|a| match a.as_str() {
            "M" => Ok(MvLabel::Mountain),
            "V" => Ok(MvLabel::Valley),
            "F" => Ok(MvLabel::Flat),
            "B" => Ok(MvLabel::Boundary),
            other => Err(bad(&format!("unknown assignment '{other}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImportedFold {
        pattern,
        crease_rho,
        labels,
    })
}

/// Whether every assignment letter matches the sign of its fold angle.
pub fn assignments_consistent(doc: &FoldFileDoc) -> bool {
    doc.edges_assignment.len() == doc.edges_fold_angle.len()
        && doc.edges_assignment.iter().zip(&doc.edges_fold_angle).all(|(a, &d)| match a.as_str() {
            "M" => d < 0.0,
            "V" => d > 0.0,
            "F" | "B" => d.abs() < Tolerances::default().flat.to_degrees() || d == 0.0,
            _ => false,
        })
}

/// Wavefront OBJ with one quad per panel, 1-based indices in point order.
pub fn export_obj(p: &QuadPattern, s: &FoldedState) -> Result<String> {
    if s.coords.len() != p.points().len() {
        return Err(Error::Serialization("state does not belong to this pattern".into()));
    }
    let mut out = String::from("# quadfold\n");
    for c in &s.coords {
        let _ = writeln!(out, "v {} {} {}", fmt12(c[0]), fmt12(c[1]), fmt12(c[2]));
    }
    for (i, f) in p.faces().iter().enumerate() {
        let q = f.corners.map(|k| s.coords[k]);
        let d1 = [0, 1, 2].map(|a| q[2][a] - q[0][a]);
        let d2 = [0, 1, 2].map(|a| q[3][a] - q[1][a]);
        let n = [
            d1[1] * d2[2] - d1[2] * d2[1],
            d1[2] * d2[0] - d1[0] * d2[2],
            d1[0] * d2[1] - d1[1] * d2[0],
        ];
        let area = 0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(area > 1e-12) {
            return Err(Error::Serialization(format!("panel {i} has zero area")));
        }
        let [a, b, c, d] = f.corners.map(|k| k + 1);
        let _ = writeln!(out, "f {a} {b} {c} {d}");
    }
    Ok(out)
}

fn stroke(l: MvLabel) -> &'static str {
    match l {
        MvLabel::Mountain => "red",
        MvLabel::Valley => "blue",
        MvLabel::Flat => "grey",
        MvLabel::Boundary => "black",
    }
}

/// The crease pattern as SVG, y pointing up, creases coloured by label.
pub fn export_svg(p: &QuadPattern, labels: &[MvLabel]) -> Result<String> {
    if p.creases().is_empty() || p.points().is_empty() {
        return Err(Error::Serialization("nothing to draw".into()));
    }
    if labels.len() != p.creases().len() {
        return Err(Error::Serialization(format!(
            "{} labels for {} creases",
            labels.len(),
            p.creases().len()
        )));
    }
    let pts = p.points();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for q in pts {
        x0 = x0.min(q[0]);
        x1 = x1.max(q[0]);
        y0 = y0.min(-q[1]);
        y1 = y1.max(-q[1]);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let sw = 0.004 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        fmt12(x0 - pad),
        fmt12(y0 - pad),
        fmt12(w),
        fmt12(h)
    );
    for (c, l) in p.creases().iter().zip(labels) {
        let [a, b] = c.ends.map(|k| pts[k]);
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
            fmt12(a[0]),
            fmt12(-a[1] + 0.0),
            fmt12(b[0]),
            fmt12(-b[1] + 0.0),
            stroke(*l),
            fmt12(sw)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
