//! Replays wavefront command streams through the dependence validator, once
//! with the correct skew and once under-skewed.

use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;
use stencil_tb::schedule::{
    enumerate_updates, field_groups, make_wavefront_plan, validate_schedule, DependenceSpec, Plan, SparseFootprint,
    SparseHooks,
};

fn main() -> stencil_tb::Result<()> {
    let g = GridSpec::cube(32, 10.0)?;
    for physics in [Physics::Acoustic, Physics::Elastic] {
        let so = 4;
        let groups = field_groups(physics, so);
        let deps = DependenceSpec::for_physics(physics, so, &g);
        let plan = make_wavefront_plan(&g, &groups, 3, [16, 16], [4, 4])?;
        for (label, p) in [("skewed", plan.clone()), ("under-skewed", plan.under_skewed())] {
            let stream = enumerate_updates(&Plan::Wavefront(p), &g, &groups, 6, SparseHooks::default());
            let report = validate_schedule(&stream, &deps, &g, &SparseFootprint::default());
            print!("{} {label}: {} violations", physics.name(), report.total);
            match report.violations.first() {
                Some(v) => println!(", first {v}"),
                None => println!(),
            }
        }
    }
    Ok(())
}
