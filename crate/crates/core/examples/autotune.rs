//! Sweeps wavefront tile, time height, and block shapes for one problem and
//! prints the tuning table.

use stencil_tb::bench::{cmd_tune, SweepSpec};
use stencil_tb::engine::{RunConfig, ScheduleConfig};
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;

fn main() -> stencil_tb::Result<()> {
    let mut c = RunConfig::new(Physics::Acoustic, GridSpec::cube(96, 10.0)?, 4, 40);
    c.schedule = ScheduleConfig::wavefront([32, 32], 4, [8, 8]);
    let sweep = SweepSpec {
        tiles: vec![[24, 24], [48, 48], [96, 96]],
        blocks: vec![[8, 8], [16, 16]],
        time_heights: vec![2, 4, 8],
        repetitions: 2,
        warmup: 1,
    };
    let result = cmd_tune(&c, &sweep)?;
    print!("{}", result.to_csv()?);
    if let Some(best) = result.best() {
        println!("best: {best:?}");
    }
    Ok(())
}
