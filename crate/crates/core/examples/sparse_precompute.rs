//! Support discovery, masks, z-compression, and wavefield decomposition for a
//! handful of sources, checked against the direct source loop.

use stencil_tb::grid::{GridSpec, TimeBufferedField};
use stencil_tb::precompute::{check_support_invariants, decompose_wavefields, support_for_sources, SupportMethod};
use stencil_tb::sparse::{inject_direct, SourceSet};

fn main() -> stencil_tb::Result<()> {
    let g = GridSpec::cube(12, 1.0)?;
    let coords = vec![[2.5, 3.0, 4.25], [2.9, 3.1, 4.0], [8.0, 8.0, 8.0]];
    let nt = 4;
    let wavelets: Vec<Vec<f64>> = (0..coords.len())
        .map(|s| (0..nt).map(|t| (t + s + 1) as f64).collect())
        .collect();
    let sources = SourceSet::new(&g, coords, &wavelets, vec![1.0; 3])?;

    for method in [SupportMethod::Geometric, SupportMethod::Numeric] {
        let support = support_for_sources(&sources, &g, method)?;
        if let Err(e) = check_support_invariants(&support) {
            panic!("{method:?} support is inconsistent: {e}");
        }
        println!("{method:?}: {} affected points", support.n_affected);
    }

    let support = support_for_sources(&sources, &g, SupportMethod::Geometric)?;
    print!("{}", support.to_text());
    let dcmp = decompose_wavefields::<f64>(&sources, &support, nt)?;
    let mut fused = TimeBufferedField::<f64>::new(&g, 0, 2)?;
    let mut direct = TimeBufferedField::<f64>::new(&g, 0, 2)?;
    for t in 0..nt {
        fused.level_mut(t).fill(0.0);
        direct.level_mut(t).fill(0.0);
        dcmp.scatter(&support, &mut fused, t);
        inject_direct(&mut direct, &sources, t);
        let diff = fused
            .level(t)
            .iter()
            .zip(direct.level(t))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        println!("t={t}: max |fused - direct| = {diff:e}");
    }
    Ok(())
}
