//! Vertex solutions checked against an independent rotation-product oracle.

mod common;

use common::{closure, max_wrapped_diff};
use proptest::prelude::*;
use quadfold::vertex::{
    fold_interval, physical_interval, solve_at, solve_flatfoldable, solve_generic, solve_straightline,
};
use quadfold::{BranchId, Vertex4};
use std::f64::consts::{PI, TAU};

fn generic_alpha() -> impl Strategy<Value = [f64; 4]> {
    (0.05f64..1.0, 0.05f64..1.0, 0.05f64..1.0, 0.05f64..1.0)
        .prop_map(|(a, b, c, d)| {
            let s = a + b + c + d;
            [a, b, c, d].map(|x| x / s * TAU)
        })
        .prop_filter("generic", |a| {
            a.iter().all(|&x| x > 0.05 && x < PI - 0.05)
                && (a[0] + a[1] - PI).abs() > 0.02
                && (a[1] + a[2] - PI).abs() > 0.02
        })
}

fn ff_alpha() -> impl Strategy<Value = [f64; 4]> {
    (0.1f64..PI - 0.1, 0.1f64..PI - 0.1)
        .prop_filter("not collinear", |(a, b)| (a + b - PI).abs() > 0.02 && (a - b).abs() > 1e-3)
        .prop_map(|(a, b)| [a, b, PI - a, PI - b])
}

fn branch() -> impl Strategy<Value = BranchId> {
    prop_oneof![Just(BranchId::Branch1), Just(BranchId::Branch2)]
}

#[test]
fn frozen_oracle_values() {
    // Values produced by a separate evaluation of the closed forms and checked
    // against the rotation product before being frozen here.
    let v = Vertex4::from_degrees([80.0, 95.0, 75.0, 110.0]).unwrap();
    let s = solve_generic(&v, 60f64.to_radians(), BranchId::Branch1).unwrap();
    let want = [60.0, -6.00580, 62.64045, 6.12433];
    for k in 0..4 {
        assert!((s.rho[k].to_degrees() - want[k]).abs() < 1e-4, "{k}");
    }
    assert!(closure(v.alpha(), s.rho) < 1e-12);
    let s = solve_generic(&v, 60f64.to_radians(), BranchId::Branch2).unwrap();
    assert!(closure(v.alpha(), s.rho) < 1e-12);
}

#[test]
fn interval_endpoint_regression() {
    let v = Vertex4::from_degrees([80.0, 95.0, 75.0, 110.0]).unwrap();
    let iv = fold_interval(&v, BranchId::Branch1).unwrap();
    // xi shrinks from 175 deg as crease 0 folds; the branch ends when it reaches |alpha3 - alpha4|.
    let cos_lim = (35f64.to_radians()).cos();
    let a = v.alpha();
    let cos_xi = a[0].cos() * a[1].cos() - a[0].sin() * a[1].sin() * iv.hi.cos();
    assert!((cos_xi - cos_lim).abs() < 1e-9, "{}", iv.hi.to_degrees());
    assert!(solve_generic(&v, iv.hi, BranchId::Branch1).is_ok());
    assert!(solve_generic(&v, iv.hi + 1e-6, BranchId::Branch1).is_err());
    assert!((iv.hi.to_degrees() - 148.2544067570).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generic_closure(a in generic_alpha(), b in branch(), u in -1.0f64..1.0) {
        let v = Vertex4::new(a).unwrap();
        let iv = fold_interval(&v, b).unwrap();
        let r1 = if u >= 0.0 { u * iv.hi } else { -u * iv.lo };
        let s = solve_generic(&v, r1, b).unwrap();
        prop_assert!(closure(a, s.rho) < 1e-9);
        let xi_arg = a[0].cos() * a[1].cos() - a[0].sin() * a[1].sin() * r1.cos();
        prop_assert!((s.xi.cos() - xi_arg).abs() < 1e-9);
    }

    #[test]
    fn point_symmetry(a in generic_alpha(), b in branch(), u in 0.0f64..1.0) {
        let v = Vertex4::new(a).unwrap();
        let iv = fold_interval(&v, b).unwrap();
        let p = solve_generic(&v, u * iv.hi, b).unwrap();
        let m = solve_generic(&v, -u * iv.hi, b).unwrap();
        prop_assert!(max_wrapped_diff(p.rho, m.rho.map(|x| -x)) < 1e-12);
    }

    #[test]
    fn origin_is_flat(a in generic_alpha(), b in branch()) {
        let v = Vertex4::new(a).unwrap();
        let s = solve_generic(&v, 0.0, b).unwrap();
        prop_assert!(s.rho.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn drive_from_any_crease(a in generic_alpha(), b in branch(), u in -1.0f64..1.0, k in 0usize..4) {
        let v = Vertex4::new(a).unwrap();
        let iv = physical_interval(&v, b).unwrap();
        let s = solve_generic(&v, u * iv.hi, b).unwrap();
        let t = solve_at(&v, k, s.rho[k], b).unwrap();
        prop_assert!(max_wrapped_diff(s.rho, t.rho) < 1e-8);
    }

    #[test]
    fn relabeling_swaps_branch_on_odd_shift(a in generic_alpha(), b in branch(), u in -1.0f64..1.0, k in 0usize..4) {
        let v = Vertex4::new(a).unwrap();
        let iv = physical_interval(&v, b).unwrap();
        let s = solve_generic(&v, u * iv.hi, b).unwrap();
        let w = v.rotated(k);
        let t = solve_at(&w, 0, s.rho[k], b.shifted(k)).unwrap();
        let back = [0, 1, 2, 3].map(|i| t.rho[(i + 4 - k) % 4]);
        prop_assert!(max_wrapped_diff(s.rho, back) < 1e-8);
    }

    #[test]
    fn flatfoldable_matches_generic(a in ff_alpha(), b in branch(), u in -0.999f64..0.999) {
        let v = Vertex4::new(a).unwrap();
        let g = solve_generic(&v, u * PI, b);
        let f = solve_flatfoldable(&v, u * PI, b).unwrap();
        prop_assert!(closure(a, f.rho) < 1e-9);
        if let Ok(g) = g {
            prop_assert!(max_wrapped_diff(g.rho, f.rho) < 1e-9);
        }
    }

    #[test]
    fn straightline_closure(a0 in 0.1f64..PI - 0.1, a1 in 0.1f64..PI - 0.1, u in -1.0f64..1.0) {
        prop_assume!((a0 + a1 - PI).abs() > 0.02);
        let a = [a0, a1, PI - a1, PI - a0];
        let v = Vertex4::new(a).unwrap();
        let iv = fold_interval(&v, BranchId::Branch2).unwrap();
        let s = solve_straightline(&v, u * iv.hi, BranchId::Branch2).unwrap();
        prop_assert!(closure(a, s.rho) < 1e-9);
        prop_assert!((s.rho[2] + s.rho[0]).abs() < 1e-12);
        let l = solve_straightline(&v, u * PI, BranchId::LineSegment1).unwrap();
        prop_assert!(closure(a, l.rho) < 1e-12);
    }

    #[test]
    fn relabeled_straightline(a0 in 0.1f64..PI - 0.1, a1 in 0.1f64..PI - 0.1, u in -1.0f64..1.0, k in 0usize..4) {
        prop_assume!((a0 + a1 - PI).abs() > 0.02);
        let a = [a0, a1, PI - a1, PI - a0];
        let v = Vertex4::new(a).unwrap().rotated(k);
        let b = if k % 2 == 0 { BranchId::Branch2 } else { BranchId::Branch1 };
        let iv = physical_interval(&v, b).unwrap();
        let s = solve_at(&v, 0, u * iv.hi, b).unwrap();
        prop_assert!(closure(v.alpha(), s.rho) < 1e-9);
        for c in 0..4 {
            let t = solve_at(&v, c, s.rho[c], b).unwrap();
            prop_assert!(max_wrapped_diff(s.rho, t.rho) < 1e-7, "crease {} {:?} {:?}", c, s.rho, t.rho);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accurate_near_flat(a in generic_alpha(), b in branch(), e in -14.0f64..-3.0) {
        let v = Vertex4::new(a).unwrap();
        let r1 = 10f64.powf(e);
        let s = solve_generic(&v, r1, b).unwrap();
        prop_assert!(closure(a, s.rho) < 1e-12);
        prop_assert!(s.rho.iter().all(|x| x.abs() < 1e4 * r1));
    }
}

#[test]
fn negative_zero_is_flat() {
    let v = Vertex4::from_degrees([80.0, 95.0, 75.0, 110.0]).unwrap();
    for b in [BranchId::Branch1, BranchId::Branch2] {
        for k in 0..4 {
            let s = solve_at(&v, k, -0.0, b).unwrap();
            assert!(s.rho_lifted.iter().all(|x| *x == 0.0), "{k} {:?}", s.rho_lifted);
        }
    }
}
