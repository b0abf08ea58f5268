mod common;

use common::{random_source_set, trilinear, Lcg};
use proptest::prelude::*;
use stencil_tb::grid::{allocate_field, GridSpec};
use stencil_tb::precompute::{
    check_support_invariants, decompose_wavefields, precompute_receivers, support_for_sources, SupportMethod,
};
use stencil_tb::sparse::{inject_direct, interp_stencil, record_receivers, ReceiverSet};

fn grid() -> GridSpec {
    GridSpec::new([9, 7, 11], [2.0, 3.0, 1.5]).unwrap()
}

#[test]
fn weights_match_direct_formula() {
    let g = grid();
    let mut rng = Lcg(11);
    for _ in 0..500 {
        let c = [rng.unit() * 16.0, rng.unit() * 18.0, rng.unit() * 15.0];
        let mut ours: Vec<_> = interp_stencil(c, &g).unwrap().nonzero().collect();
        let mut want = trilinear(c, g.spacing, g.shape);
        ours.sort_by(|a, b| a.0.cmp(&b.0));
        want.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(ours.len(), want.len());
        for (a, b) in ours.iter().zip(&want) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-14);
        }
    }
}

#[test]
fn points_outside_are_rejected() {
    let g = grid();
    assert!(interp_stencil([-0.1, 1.0, 1.0], &g).is_err());
    assert!(interp_stencil([1.0, 1.0, 15.1], &g).is_err());
    assert!(interp_stencil([16.0, 18.0, 15.0], &g).is_ok());
}

#[test]
fn receivers_in_damping_layers_are_rejected() {
    let g = GridSpec::cube(20, 1.0).unwrap().with_boundary_layers(4);
    assert!(ReceiverSet::new(&g, vec![[2.0, 10.0, 10.0]], 5).is_err());
    assert!(ReceiverSet::new(&g, vec![[4.0, 10.0, 15.0]], 5).is_ok());
}

#[test]
fn fused_gather_equals_direct_record() {
    let g = grid();
    let mut rng = Lcg(5);
    let coords: Vec<[f64; 3]> = (0..40)
        .map(|_| [rng.unit() * 16.0, rng.unit() * 18.0, (rng.unit() * 10.0).round() * 1.5])
        .collect();
    let mut direct = ReceiverSet::new(&g, coords, 1).unwrap();
    let mut f = allocate_field::<f32>(&g, 4, 2).unwrap();
    for p in g.full_region().points() {
        f.set(0, p, ((p[0] * 31 + p[1] * 7 + p[2]) as f32).sin());
    }
    record_receivers(&f, &mut direct, 0);
    let gather = precompute_receivers(&direct, &g).unwrap();
    let mut partial = vec![0.0f32; gather.n_entries()];
    for x in 0..g.shape[0] {
        for y in 0..g.shape[1] {
            gather.gather_row(x, y, &mut partial, |z| f.get(0, [x, y, z]));
        }
    }
    let mut out = vec![0.0; direct.len()];
    gather.reduce(&partial, &mut out);
    assert_eq!(out, direct.data);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_form_a_partition_of_unity(x in 0.0f64..16.0, y in 0.0f64..18.0, z in 0.0f64..15.0) {
        let s = interp_stencil([x, y, z], &grid()).unwrap();
        let sum: f64 = s.points.iter().map(|p| p.1).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(s.points.iter().all(|p| p.1 >= 0.0));
        // linear functions are reproduced exactly
        let lin = |p: [usize; 3]| 0.5 + 2.0 * p[0] as f64 * 2.0 - p[1] as f64 * 3.0 + 0.25 * p[2] as f64 * 1.5;
        let interp: f64 = s.points.iter().map(|(p, w)| w * lin(*p)).sum();
        prop_assert!((interp - (0.5 + 2.0 * x - y + 0.25 * z)).abs() < 1e-10);
    }

    #[test]
    fn support_invariants_hold(seed in any::<u64>(), n in 1usize..60) {
        let g = grid();
        let mut rng = Lcg(seed);
        let s = random_source_set(&g, &mut rng, n, 3);
        for method in [SupportMethod::Geometric, SupportMethod::Numeric] {
            let sup = support_for_sources(&s, &g, method).unwrap();
            prop_assert!(check_support_invariants(&sup).is_ok(), "{:?}", check_support_invariants(&sup));
        }
    }

    #[test]
    fn decomposition_reproduces_direct_injection(seed in any::<u64>(), n in 1usize..40) {
        let g = grid();
        let nt = 4;
        let mut rng = Lcg(seed);
        let s = random_source_set(&g, &mut rng, n, nt);
        let sup = support_for_sources(&s, &g, SupportMethod::Geometric).unwrap();
        let d = decompose_wavefields::<f64>(&s, &sup, nt).unwrap();
        for t in 0..nt {
            let mut a = allocate_field::<f64>(&g, 2, 2).unwrap();
            let mut b = allocate_field::<f64>(&g, 2, 2).unwrap();
            inject_direct(&mut a, &s, t);
            d.scatter(&sup, &mut b, t);
            for p in g.full_region().points() {
                prop_assert!((a.get(t, p) - b.get(t, p)).abs() <= 1e-12 * (1.0 + a.get(t, p).abs()));
            }
        }
    }
}
