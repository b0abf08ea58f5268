//! Throughput and precompute time as the number of randomly placed sources
//! grows, for uniform and planar layouts.

use stencil_tb::engine::{run, RandomSources, RunConfig, ScheduleConfig, SourceLayout};
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;

fn main() -> stencil_tb::Result<()> {
    println!("layout,sources,precompute_ms,stepping_ms,gpoints_per_s");
    for layout in [SourceLayout::Uniform, SourceLayout::Plane] {
        for count in [1, 10, 100, 1000] {
            let mut c = RunConfig::new(
                Physics::Acoustic,
                GridSpec::cube(64, 10.0)?.with_boundary_layers(6),
                4,
                100,
            );
            c.schedule = ScheduleConfig::wavefront([24, 24], 4, [8, 8]);
            c.random_sources = Some(RandomSources {
                count,
                seed: 7,
                layout,
                plane_z_m: None,
                f0_hz: 15.0,
                amplitude: 1.0,
            });
            let r = run(&c)?.report;
            println!(
                "{layout:?},{count},{:.3},{:.1},{:.4}",
                1e3 * r.precompute_s,
                1e3 * r.elapsed_s,
                r.gpoints_per_s
            );
        }
    }
    Ok(())
}
