//! Per-point update rules, damping layers, and source wavelets.

pub mod acoustic;
pub mod damping;
pub mod elastic;
pub mod wavelet;

pub use acoustic::{acoustic_update, AcousticKernel, AcousticModel, ACOUSTIC_TIME_LEVELS};
pub use damping::{build_damping, default_max_decay};
pub use elastic::{elastic_update_tau, elastic_update_v, tau_index, ElasticKernel, ElasticModel, ELASTIC_TIME_LEVELS};
pub use wavelet::{ricker, Wavelet};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Physics {
    Acoustic,
    Elastic,
}

impl Physics {
    pub fn name(self) -> &'static str {
        match self {
            Physics::Acoustic => "acoustic",
            Physics::Elastic => "elastic",
        }
    }

    /// Scalar fields advanced every step.
    pub fn fields_updated(self) -> usize {
        match self {
            Physics::Acoustic => 1,
            Physics::Elastic => 9,
        }
    }
}

/// Factor by which `cfl_dt` must be scaled for the leapfrog scheme of the
/// given order to stay stable on the Nyquist mode (1 for second order).
pub fn stencil_stability_factor(physics: Physics, space_order: usize) -> crate::Result<f64> {
    Ok(match physics {
        Physics::Acoustic => {
            let c = crate::fd::fd_weights(space_order)?;
            let abs_sum: f64 = c.full_stencil().iter().map(|w| w.abs()).sum();
            (2.0 / abs_sum.sqrt()).min(1.0)
        }
        Physics::Elastic => {
            let c = crate::fd::staggered_weights(space_order)?;
            let abs_sum: f64 = c.weights.iter().map(|w| w.abs()).sum();
            (1.0 / abs_sum).min(1.0)
        }
    })
}
