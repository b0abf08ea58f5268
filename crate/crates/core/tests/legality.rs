use proptest::prelude::*;
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;
use stencil_tb::schedule::{
    enumerate_updates, field_groups, make_space_plan, make_wavefront_plan, validate_schedule, DependenceSpec, Plan,
    SparseFootprint, SparseHooks, ViolationKind,
};

fn footprint(g: &GridSpec, group: usize) -> SparseFootprint {
    let pts = vec![
        [0, 0, 0],
        [g.shape[0] / 2, g.shape[1] / 2, g.shape[2] - 1],
        [g.shape[0] - 1, g.shape[1] - 1, 0],
    ];
    SparseFootprint {
        inject_group: Some(group),
        inject_points: pts.clone(),
        gather_group: Some(group),
        gather_points: pts,
    }
}

fn hooks(group: usize) -> SparseHooks {
    SparseHooks {
        inject: Some(group),
        gather: Some(group),
    }
}

#[test]
fn every_plan_kind_is_legal_for_both_physics() {
    let g = GridSpec::new([20, 14, 5], [1.0; 3]).unwrap();
    for physics in [Physics::Acoustic, Physics::Elastic] {
        let groups = field_groups(physics, 4);
        let sparse_group = groups.len() - 1;
        let deps = DependenceSpec::for_physics(physics, 4, &g);
        let skew: usize = groups.iter().map(|gr| gr.radius).sum();
        let plans = [
            Plan::Naive,
            Plan::Fused,
            Plan::Space(make_space_plan([3, 5]).unwrap()),
            Plan::Wavefront(make_wavefront_plan(&g, &groups, 3, [3 * skew + 1, 3 * skew + 2], [2, 4]).unwrap()),
        ];
        for p in plans {
            let s = enumerate_updates(&p, &g, &groups, 7, hooks(sparse_group));
            let r = validate_schedule(&s, &deps, &g, &footprint(&g, sparse_group));
            assert!(r.is_legal(), "{physics:?} {p}: {:?}", r.violations.first());
        }
    }
}

#[test]
fn fusing_injection_into_the_wrong_group_is_caught() {
    let g = GridSpec::new([10, 10, 3], [1.0; 3]).unwrap();
    let groups = field_groups(Physics::Elastic, 2);
    let deps = DependenceSpec::for_physics(Physics::Elastic, 2, &g);
    let s = enumerate_updates(&Plan::Fused, &g, &groups, 3, hooks(0));
    let r = validate_schedule(&s, &deps, &g, &footprint(&g, 1));
    assert!(r.count(ViolationKind::InjectBeforeStencil) > 0);
}

#[test]
fn two_d_grids_tile_only_active_axes() {
    let g = GridSpec::new([30, 1, 9], [1.0; 3]).unwrap();
    let groups = field_groups(Physics::Acoustic, 8);
    let p = make_wavefront_plan(&g, &groups, 4, [17, 1], [4, 1]).unwrap();
    assert_eq!(p.skew, [4, 0]);
    let s = enumerate_updates(&Plan::Wavefront(p), &g, &groups, 9, hooks(0));
    let r = validate_schedule(
        &s,
        &DependenceSpec::for_physics(Physics::Acoustic, 8, &g),
        &g,
        &footprint(&g, 0),
    );
    assert!(r.is_legal(), "{:?}", r.violations.first());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_wavefront_plans_are_legal(
        elastic in any::<bool>(),
        half_order in 1usize..4,
        time_height in 1usize..5,
        extra in prop::array::uniform2(1usize..10),
        nz in 1usize..4,
        block in prop::array::uniform2(1usize..9),
        nt in 1usize..9,
    ) {
        let physics = if elastic { Physics::Elastic } else { Physics::Acoustic };
        let so = 2 * half_order;
        let groups = field_groups(physics, so);
        let skew: usize = groups.iter().map(|gr| gr.radius).sum();
        let tile = [skew * time_height + extra[0], skew * time_height + extra[1]];
        let g = GridSpec::new([tile[0] + 5, tile[1] + 3, nz], [1.0; 3]).unwrap();
        let p = make_wavefront_plan(&g, &groups, time_height, tile, block).unwrap();
        let last = groups.len() - 1;
        let s = enumerate_updates(&Plan::Wavefront(p), &g, &groups, nt, hooks(last));
        let r = validate_schedule(&s, &DependenceSpec::for_physics(physics, so, &g), &g, &footprint(&g, last));
        prop_assert!(r.is_legal(), "{:?}", r.violations.first());
    }
}
