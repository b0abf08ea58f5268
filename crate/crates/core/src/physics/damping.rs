use crate::grid::GridSpec;
use std::f64::consts::FRAC_PI_2;

/// Decay constant (1/s) reached at the outermost layer point: enough to
/// attenuate a wave crossing the layer at `v_max` by a factor of 1000.
pub fn default_max_decay(grid: &GridSpec, v_max: f64) -> f64 {
    if grid.boundary_layers == 0 {
        return 0.0;
    }
    let width = grid.boundary_layers as f64 * grid.min_spacing();
    1.5 * 1000f64.ln() * v_max / width
}

/// Sponge damping profile over the grid (x-major, z fastest). Zero inside the
/// physical region, rising as `max_decay * sin^2` towards the outer faces.
pub fn build_damping(grid: &GridSpec, max_decay: f64) -> Vec<f64> {
    let nbl = grid.boundary_layers;
    let mut damp = vec![0.0; grid.num_points()];
    if nbl == 0 || max_decay == 0.0 {
        return damp;
    }
    let profile = |a: usize, i: usize| -> f64 {
        if !grid.is_active(a) {
            return 0.0;
        }
        let n = grid.shape[a];
        let depth = if i < nbl {
            nbl - i
        } else if i + nbl >= n {
            i + nbl + 1 - n
        } else {
            0
        };
        if depth == 0 {
            0.0
        } else {
            let s = (FRAC_PI_2 * depth as f64 / nbl as f64).sin();
            max_decay * s * s
        }
    };
    let [nx, ny, nz] = grid.shape;
    for x in 0..nx {
        let px = profile(0, x);
        for y in 0..ny {
            let py = profile(1, y);
            for z in 0..nz {
                damp[(x * ny + y) * nz + z] = px.max(py).max(profile(2, z));
            }
        }
    }
    damp
}
