//! Runs the same acoustic problem with the naive, spatially blocked, and
//! wavefront schedules and compares fields, traces, and throughput.

use stencil_tb::engine::{compare_runs, run, RunConfig, ScheduleConfig, SourceConfig};
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;

fn main() -> stencil_tb::Result<()> {
    let (n, h) = (80, 10.0);
    let mid = 0.5 * (n - 1) as f64 * h;
    let mut c = RunConfig::new(
        Physics::Acoustic,
        GridSpec::cube(n, h)?.with_boundary_layers(10),
        4,
        120,
    );
    c.precision = 64;
    c.sources = vec![SourceConfig {
        coords_m: [mid + 3.0, mid - 4.0, mid + 1.5],
        f0_hz: 15.0,
        t0_s: None,
        amplitude: 1.0,
    }];
    c.receivers = vec![[mid, mid, 150.0], [200.0, mid + 7.0, mid]];

    c.schedule = ScheduleConfig::naive();
    let reference = run(&c)?;
    println!(
        "{:<64} {:.4} Gpts/s",
        reference.report.schedule, reference.report.gpoints_per_s
    );
    for s in [
        ScheduleConfig::space([16, 16]),
        ScheduleConfig::wavefront([40, 40], 4, [8, 8]),
    ] {
        c.schedule = s;
        let out = run(&c)?;
        let diff = compare_runs(&reference, &out, 1e-12)?;
        println!(
            "{:<64} {:.4} Gpts/s, max relative difference {:.2e}",
            out.report.schedule,
            out.report.gpoints_per_s,
            diff.max_linf()
        );
    }
    Ok(())
}
