//! Explosive source in a two-layer elastic medium on the staggered grid.

use stencil_tb::engine::{run, Layer, RunConfig, ScheduleConfig, SourceConfig};
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;

fn main() -> stencil_tb::Result<()> {
    let (n, h) = (64, 10.0);
    let mid = 0.5 * (n - 1) as f64 * h;
    let mut c = RunConfig::new(Physics::Elastic, GridSpec::cube(n, h)?.with_boundary_layers(12), 4, 250);
    c.medium.velocity_mps = 2000.0;
    c.medium.density_kgm3 = 2000.0;
    c.medium.layers = vec![Layer {
        z_top_m: 400.0,
        velocity_mps: 3000.0,
        vs_mps: None,
        density_kgm3: Some(2400.0),
    }];
    c.sources = vec![SourceConfig {
        coords_m: [mid, mid, 200.0],
        f0_hz: 12.0,
        t0_s: None,
        amplitude: 1.0,
    }];
    c.receivers = vec![[mid + 150.0, mid, 150.0], [mid, mid, 480.0]];
    c.schedule = ScheduleConfig::wavefront([40, 40], 2, [8, 8]);
    let out = run(&c)?;
    println!("{}", out.report);
    for f in &out.fields {
        let peak = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{:>4}: max |value| {peak:.3e}", f.name);
    }
    Ok(())
}
