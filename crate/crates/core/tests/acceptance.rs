//! End-to-end acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

mod common;

use common::{closure, random_flatfoldable, random_generic, random_straightline, wrapped};
use quadfold::foldability::{build_tree, certify, certify_all, propagate};
use quadfold::io::{export_fold, export_fold_state, import_fold, FoldFileDoc};
use quadfold::pattern::fixtures::{general_ff_plan, line_ff_plan, GeneralFfParams, LineFfParams};
use quadfold::pattern::{count_dof, stitch, CreaseRole, StitchPlan};
use quadfold::realization::{loop_closure_residual, sweep};
use quadfold::unit::{ff_alpha4, infeasibility_witness, solve_ff_unit, validate_unit, FfMode, NORTH, WEST, SOUTH, EAST};
use quadfold::vertex::{fold_interval, physical_interval, solve_flatfoldable, solve_generic, solve_straightline};
use quadfold::{BranchId, ClassTag, Error, QuadPattern, Tolerances, Vertex4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

const DEG: f64 = PI / 180.0;
const BRANCHES: [BranchId; 2] = [BranchId::Branch1, BranchId::Branch2];

const CLOSURE_TOL: f64 = 1e-9;
const GENERIC_RUNTIME_S: f64 = 5.0;
const DEGENERATION_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-9;
const FF_LINE_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-8;
const FIXTURE_120_TOL: f64 = 1e-12;
const CERTIFY_TOL: f64 = 1e-8;
const PERTURBATION_DEG: f64 = 0.5;
const RIGIDITY_TOL: f64 = 1e-9;
const SWEEP_RUNTIME_S: f64 = 2.0;
const ROUND_TRIP_REL: f64 = 5e-12;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn line_plan() -> StitchPlan {
    line_ff_plan(LineFfParams::default()).unwrap()
}

fn general_plan() -> StitchPlan {
    general_ff_plan(GeneralFfParams::default(), [BranchId::Branch1; 2]).unwrap()
}

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

fn max_wrapped(a: [f64; 4], b: [f64; 4]) -> f64 {
    (0..4).map(|k| wrapped(a[k] - b[k]).abs()).fold(0.0, f64::max)
}

fn generic_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut solves = 0;
    for _ in 0..1000 {
        let a = random_generic(&mut rng, 0.02);
        let v = Vertex4::new(a).unwrap();
        assert_eq!(v.classify().tag, ClassTag::Generic);
        for b in BRANCHES {
            let iv = fold_interval(&v, b).unwrap();
            for t in grid(20, iv.lo, iv.hi) {
                let s = solve_generic(&v, t, b).unwrap();
                worst = worst.max(closure(a, s.rho)).max(loop_closure_residual(&v, &s));
                solves += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < CLOSURE_TOL && secs < GENERIC_RUNTIME_S,
        format!("{solves} solves, max closure {worst:.2e} (< {CLOSURE_TOL:e}), {secs:.2} s (< {GENERIC_RUNTIME_S} s)"),
    )
}

fn degeneration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0_f64;
    let mut compared = 0;
    for _ in 0..200 {
        let a = random_flatfoldable(&mut rng, 0.02);
        let v = Vertex4::new(a).unwrap();
        for b in BRANCHES {
            let iv = fold_interval(&v, b).unwrap();
            for t in grid(50, iv.lo, iv.hi) {
                let Ok(g) = solve_generic(&v, t, b) else { continue };
                let f = solve_flatfoldable(&v, t, b).unwrap();
                worst = worst.max(max_wrapped(g.rho, f.rho));
                compared += 1;
            }
        }
    }
    check(
        worst < DEGENERATION_TOL && compared >= 200 * 2 * 40,
        format!("{compared} shared samples, max difference {worst:.2e} (< {DEGENERATION_TOL:e})"),
    )
}

fn straight_line() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0_f64;
    let mut outside = 0;
    for _ in 0..200 {
        let a = random_straightline(&mut rng, 0.02);
        let v = Vertex4::new(a).unwrap();
        assert_eq!(v.classify().tag, ClassTag::StraightLine);
        let branches = [BranchId::Branch2, BranchId::LineSegment1];
        for b in branches {
            let iv = fold_interval(&v, b).unwrap();
            for t in grid(20, iv.lo, iv.hi) {
                let s = solve_straightline(&v, t, b).unwrap();
                outside += s.rho.iter().filter(|r| !(**r > -PI && **r <= PI)).count();
                worst = worst.max(closure(a, s.rho));
            }
        }
    }
    check(
        worst < CLOSURE_TOL && outside == 0,
        format!("max closure {worst:.2e} (< {CLOSURE_TOL:e}), {outside} angles outside (-pi, pi]"),
    )
}

fn monotone_and_symmetric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst_sym = 0.0_f64;
    let mut violations = 0;
    let mut branches = 0;
    for i in 0..40 {
        let (a, bs) = if i % 2 == 0 {
            (random_generic(&mut rng, 0.05), vec![BranchId::Branch1, BranchId::Branch2])
        } else {
            (random_straightline(&mut rng, 0.05), vec![BranchId::Branch2])
        };
        let v = Vertex4::new(a).unwrap();
        for b in bs {
            let iv = physical_interval(&v, b).unwrap();
            let ts: Vec<f64> = grid(1000, iv.lo, iv.hi).collect();
            let sols: Vec<[f64; 4]> = ts.iter().map(|&t| solve_generic_or_line(&v, t, b)).collect();
            branches += 1;
            for k in 0..4 {
                if sols.iter().all(|r| r[k] == 0.0) {
                    continue;
                }
                let dir = (sols[999][k] - sols[0][k]).signum();
                violations += sols.windows(2).filter(|w| (w[1][k] - w[0][k]) * dir <= 0.0).count();
            }
            for (j, r) in sols.iter().enumerate() {
                let m = sols[999 - j];
                for k in 0..4 {
                    worst_sym = worst_sym.max((r[k] + m[k]).abs());
                }
            }
        }
    }
    check(
        violations == 0 && worst_sym < SYMMETRY_TOL,
        format!("{branches} branches x 1000 points, {violations} monotonicity violations, symmetry {worst_sym:.2e} (< {SYMMETRY_TOL:e})"),
    )
}

fn solve_generic_or_line(v: &Vertex4, t: f64, b: BranchId) -> [f64; 4] {
    match v.classify().tag {
        ClassTag::StraightLine => solve_straightline(v, t, b).unwrap().rho_lifted,
        _ => solve_generic(v, t, b).unwrap().rho_lifted,
    }
}

fn infeasible_mixed_equations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut bad = 0;
    for _ in 0..100_000 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(1e-6..PI - 1e-6));
        let [t1, t2, t3, t4] = a.map(|x| (x / 2.0).tan());
        for (ta, tb, tc, td) in [(t1, t2, t3, t4), (t3, t4, t1, t2)] {
            let ratio = (ta - tb) / (ta + tb);
            let den = 1.0 - tc * td;
            let inside = ratio > -1.0 && ratio < 1.0;
            let outside = den == 0.0 || ((1.0 + tc * td) / den).abs() > 1.0;
            if !(inside && outside) {
                bad += 1;
            }
        }
        if infeasibility_witness(a[0], a[1], a[2], a[3]).margin <= 0.0 {
            bad += 1;
        }
    }
    check(bad == 0, format!("100000 quadruples, {bad} counterexamples"))
}

fn ff_line_residual(m: FfMode, a: [f64; 4]) -> f64 {
    let [t1, t2, t3, t4] = a.map(|x| (x / 2.0).tan());
    let (res, scale) = match m {
        FfMode::APlus => (t1 / t2 - t3 / t4, (t1 / t2).abs()),
        FfMode::AMinus => (t1 / t2 - t4 / t3, (t1 / t2).abs()),
        FfMode::CPlus => (t1 * t2 - t3 * t4, (t1 * t2).abs()),
        FfMode::CMinus => (t1 * t2 * t3 * t4 - 1.0, 1.0),
    };
    res.abs() / scale.max(1.0)
}

fn unit_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let (mut worst_line, mut worst_unit, mut worst_closure) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut units = 0;
    let tol = Tolerances::default();
    while units < 400 {
        let [a1, a2, a3] = std::array::from_fn(|_| rng.gen_range(5.0..175.0) * DEG);
        let m = FfMode::ALL[units % 4];
        let u = match solve_ff_unit(a1, a2, a3, m) {
            Ok(u) => u,
            Err(Error::DegenerateVertex(_)) => continue,
            Err(e) => return Err(format!("solve_ff_unit({a1}, {a2}, {a3}, {m}): {e}")),
        };
        units += 1;
        let a4 = u.bottom.alpha()[1];
        worst_line = worst_line.max(ff_line_residual(m, [a1, a2, a3, a4]));
        let r = validate_unit(&u, 200).map_err(|e| e.to_string())?;
        worst_unit = worst_unit.max(r.max_residual);
        for t in grid(5, r.lo, r.hi) {
            let (top, bottom) = u.evaluate(r.driver, t, &tol).map_err(|e| e.to_string())?;
            worst_closure = worst_closure.max(closure(u.top.alpha(), top)).max(closure(u.bottom.alpha(), bottom));
            let s = m.signs().map(f64::from);
            let side = wrapped(top[WEST] - s[0] * bottom[WEST]).abs().max(wrapped(top[EAST] - s[1] * bottom[EAST]).abs());
            worst_unit = worst_unit.max(side).max(wrapped(top[SOUTH] - bottom[NORTH]).abs());
        }
    }
    let a4 = ff_alpha4(80.0 * DEG, 100.0 * DEG, 60.0 * DEG, FfMode::CPlus);
    let fixture = (a4 / DEG - 120.0).abs();
    let fixture_valid = solve_ff_unit(80.0 * DEG, 100.0 * DEG, 60.0 * DEG, FfMode::CPlus)
        .and_then(|u| validate_unit(&u, 200))
        .is_ok_and(|r| r.valid);
    check(
        worst_line < FF_LINE_TOL
            && worst_unit < UNIT_TOL
            && worst_closure < CLOSURE_TOL
            && fixture < FIXTURE_120_TOL
            && fixture_valid,
        format!(
            "{units} units, line residual {worst_line:.2e} (< {FF_LINE_TOL:e}), side residual {worst_unit:.2e} (< {UNIT_TOL:e}), \
             (80, 100, 60) gives alpha4 = {:.12} deg",
            a4 / DEG
        ),
    )
}

fn certification() -> Outcome {
    let p = stitch(&line_plan()).unwrap();
    let r = certify(&p, p.branches(), 200).map_err(|e| e.to_string())?;
    let line_ok = r.is_rigid_foldable() && r.max_residual < CERTIFY_TOL && r.samples.len() == 200;
    let line_branches = quadfold::pattern::count_branches(&line_plan());

    let all = certify_all(&general_plan(), 200).map_err(|e| e.to_string())?;
    let general_ok = all.iter().all(|r| r.is_rigid_foldable() && r.max_residual < CERTIFY_TOL);
    let mut choices: Vec<_> = all.iter().map(|r| r.branches.clone()).collect();
    choices.sort_by_key(|b| format!("{b:?}"));
    choices.dedup();

    let mut flips = 0;
    let mut trials = 0;
    for plan in [line_plan(), general_plan()] {
        let p = stitch(&plan).unwrap();
        for i in 0..p.rows() {
            for j in 0..p.cols() {
                for slot in [NORTH, WEST, SOUTH, EAST] {
                    for sign in [1.0, -1.0] {
                        trials += 1;
                        let q = p.with_rotated_crease(i, j, slot, sign * PERTURBATION_DEG * DEG).unwrap();
                        if !certify(&q, q.branches(), 200).is_ok_and(|r| r.is_rigid_foldable()) {
                            flips += 1;
                        }
                    }
                }
            }
        }
    }
    check(
        line_ok && line_branches == 1 && general_ok && all.len() == 4 && choices.len() == 4 && flips == trials,
        format!(
            "first fixture max |theta - phi| {:.2e} (< {CERTIFY_TOL:e}) on {line_branches} branch; second fixture rigid-foldable on {} of {} branch choices; {flips}/{trials} perturbations flip the verdict",
            r.max_residual,
            all.iter().filter(|r| r.is_rigid_foldable()).count(),
            choices.len()
        ),
    )
}

fn counting() -> Outcome {
    let a = count_dof(&line_plan()).map_err(|e| e.to_string())?;
    let b = count_dof(&general_plan()).map_err(|e| e.to_string())?;
    check(
        a.terms == "2 + 3 + 2 - 2 = 5" && a.total == 5 && a.branch_count == 1
            && b.terms == "3 + 3 + 1 + 3 - 4 = 6" && b.total == 6 && b.branch_count == 4,
        format!("\"{}\" with {} branch; \"{}\" with {} branches", a.terms, a.branch_count, b.terms, b.branch_count),
    )
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Relative change of every panel edge and diagonal, and the out-of-plane
/// distance of each fourth corner, measured from scratch on the coordinates.
fn panel_deformation(p: &QuadPattern, coords: &[[f64; 3]]) -> (f64, f64) {
    let flat: Vec<[f64; 3]> = p.points().iter().map(|q| [q[0], q[1], 0.0]).collect();
    let (mut len, mut planar) = (0.0_f64, 0.0_f64);
    for f in p.faces() {
        let c = f.corners;
        let pairs = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)];
        let mut scale = 0.0_f64;
        for (i, j) in pairs {
            let d0 = dist(flat[c[i]], flat[c[j]]);
            scale = scale.max(d0);
            len = len.max((dist(coords[c[i]], coords[c[j]]) - d0).abs() / d0);
        }
        let [a, b, cc, d] = c.map(|k| coords[k]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [cc[0] - a[0], cc[1] - a[1], cc[2] - a[2]];
        let n = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let off = ((d[0] - a[0]) * n[0] + (d[1] - a[1]) * n[1] + (d[2] - a[2]) * n[2]).abs() / nn;
        planar = planar.max(off / scale);
    }
    (len, planar)
}

fn rigid_motion() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64);
    let mut frames = 0;
    let mut secs = 0.0;
    for (k, plan) in [line_plan(), general_plan()].iter().enumerate() {
        let p = stitch(plan).unwrap();
        let start = Instant::now();
        let s = sweep(&p, p.branches(), 30, 1.0).map_err(|e| e.to_string())?;
        if k == 0 {
            secs = start.elapsed().as_secs_f64();
        }
        for f in &s.frames {
            let (l, q) = panel_deformation(&p, &f.coords);
            worst = (worst.0.max(l), worst.1.max(q));
            frames += 1;
        }
    }
    check(
        worst.0 < RIGIDITY_TOL && worst.1 < RIGIDITY_TOL && frames == 60 && secs < SWEEP_RUNTIME_S,
        format!(
            "{frames} frames, edge/diagonal {:.2e}, planarity {:.2e} (< {RIGIDITY_TOL:e}), 30-frame sweep {secs:.2} s (< {SWEEP_RUNTIME_S} s)",
            worst.0, worst.1
        ),
    )
}

/// Within half a unit of the twelfth significant digit, plus a few ulps for
/// the degree/radian conversion on the way back.
fn same_12(a: f64, b: f64) -> bool {
    (a - b).abs() <= (ROUND_TRIP_REL + 4.0 * f64::EPSILON) * a.abs().max(b.abs())
}

fn labels_match_signs(p: &QuadPattern, doc: &FoldFileDoc, rho: &[f64]) -> bool {
    let flat = Tolerances::default().flat;
    p.creases().iter().zip(&doc.edges_assignment).zip(rho).all(|((c, a), &r)| match a.as_str() {
        "B" => c.role == CreaseRole::Boundary,
        "M" => c.role != CreaseRole::Boundary && r < -flat,
        "V" => c.role != CreaseRole::Boundary && r > flat,
        "F" => c.role != CreaseRole::Boundary && r.abs() <= flat,
        _ => false,
    })
}

fn interchange() -> Outcome {
    let mut lossy = 0;
    let mut mismatched = 0;
    let mut docs = 0;
    for plan in [line_plan(), general_plan()] {
        let p = stitch(&plan).unwrap();
        let t = build_tree(&p).unwrap();
        let r = certify(&p, p.branches(), 20).map_err(|e| e.to_string())?;
        let x = 0.4 * r.interval.hi;
        let s = propagate(&t, &p, x, p.branches(), &Tolerances::default()).map_err(|e| e.to_string())?;
        let json = export_fold(&p, &s.crease_rho).and_then(|d| d.to_json()).map_err(|e| e.to_string())?;
        let back = import_fold(&FoldFileDoc::from_json(&json).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let again = export_fold(&back.pattern, &back.crease_rho).and_then(|d| d.to_json()).map_err(|e| e.to_string())?;
        docs += 1;
        if again != json {
            lossy += 1;
        }
        let q = &back.pattern;
        let pts = p.points().iter().zip(q.points()).all(|(a, b)| same_12(a[0], b[0]) && same_12(a[1], b[1]));
        let sec = p.vertices().iter().zip(q.vertices()).all(|(a, b)| (0..4).all(|k| same_12(a.alpha()[k], b.alpha()[k])));
        let rho = s.crease_rho.iter().zip(&back.crease_rho).all(|(a, b)| same_12(*a, *b));
        if !(pts && sec && rho && q.branches() == p.branches()) {
            lossy += 1;
        }

        let sw = sweep(&p, p.branches(), 30, 1.0).map_err(|e| e.to_string())?;
        for f in &sw.frames {
            let doc = export_fold_state(&p, f).map_err(|e| e.to_string())?;
            docs += 1;
            if !labels_match_signs(&p, &doc, &f.crease_rho) {
                mismatched += 1;
            }
        }
    }
    check(
        lossy == 0 && mismatched == 0,
        format!("{docs} documents, {lossy} lossy round trips, {mismatched} frames with M/V letters disagreeing with angle signs"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("generic kinematics against the rotation oracle", generic_closure),
        ("flat-foldable formulas match the generic ones", degeneration),
        ("straight-line formulas pass the rotation oracle", straight_line),
        ("monotone and point-symmetric branches", monotone_and_symmetric),
        ("mixed-branch unit equations are infeasible", infeasible_mixed_equations),
        ("flat-foldable unit solver", unit_solver),
        ("rigid-foldability certification", certification),
        ("degree-of-freedom and branch counts", counting),
        ("rigidity through the motion", rigid_motion),
        ("FOLD interchange", interchange),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(msg) => println!("criterion {:2} PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2} FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
