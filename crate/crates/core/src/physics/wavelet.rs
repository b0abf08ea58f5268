use crate::error::{invalid, Result};
use std::f64::consts::PI;

/// Source time signature sampled once per time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavelet {
    pub f0: f64,
    pub t0: f64,
    pub samples: Vec<f64>,
}

/// Ricker wavelet `amplitude * (1 - 2a) * exp(-a)`, `a = (pi f0 (i dt - t0))^2`.
pub fn ricker(f0: f64, t0: f64, dt: f64, nt: usize, amplitude: f64) -> Result<Wavelet> {
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(invalid("f0", format!("peak frequency must be > 0, got {f0}")));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if nt == 0 {
        return Err(invalid("nt", "need at least one sample"));
    }
    let samples = (0..nt)
        .map(|i| {
            let a = (PI * f0 * (i as f64 * dt - t0)).powi(2);
            amplitude * (1.0 - 2.0 * a) * (-a).exp()
        })
        .collect();
    Ok(Wavelet { f0, t0, samples })
}
