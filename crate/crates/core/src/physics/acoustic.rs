//! Isotropic acoustic propagator, second order in time:
//! `u[t] = (2u[t-1] - u[t-2] + dt^2/m * lap(u[t-1])) / (1 + dt * damp)`.

use crate::error::{invalid, Error, Result};
use crate::fd::{fd_weights, FdCoefficients};
use crate::grid::{FieldPtr, GridSpec, Region, TimeBufferedField};
use crate::real::Real;

pub const ACOUSTIC_TIME_LEVELS: usize = 3;

/// Per-run constants of the acoustic stencil with `dt` and the grid spacing
/// folded in.
#[derive(Clone, Debug)]
pub struct AcousticKernel<T> {
    pub radius: usize,
    shape: [usize; 3],
    center: T,
    /// `axis_coef[a][r - 1] = w_r / h_a^2`, empty for inactive axes.
    axis_coef: [Vec<T>; 3],
    /// `dt^2 / m` per interior point.
    dt2_over_m: Vec<T>,
    /// `1 / (1 + dt * damp)` per interior point.
    damp_factor: Vec<T>,
}

impl<T: Real> AcousticKernel<T> {
    pub fn new(grid: &GridSpec, coeffs: &FdCoefficients, dt: f64, m: &[f64], damp: &[f64]) -> Result<Self> {
        let n = grid.num_points();
        if m.len() != n || damp.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "material fields need {n} values, got m={} damp={}",
                m.len(),
                damp.len()
            )));
        }
        if let Some(bad) = m.iter().find(|&&v| !(v > 0.0)) {
            return Err(invalid("m", format!("squared slowness must be > 0, found {bad}")));
        }
        if let Some(bad) = damp.iter().find(|&&v| !(v >= 0.0)) {
            return Err(invalid("damp", format!("damping must be >= 0, found {bad}")));
        }
        let mut center = 0.0;
        let axis_coef = std::array::from_fn(|a| {
            if !grid.is_active(a) {
                return Vec::new();
            }
            let inv_h2 = 1.0 / (grid.spacing[a] * grid.spacing[a]);
            center += coeffs.weights[0] * inv_h2;
            (1..=coeffs.radius)
                .map(|r| T::from_f64_lossy(coeffs.weights[r] * inv_h2))
                .collect()
        });
        Ok(AcousticKernel {
            radius: coeffs.radius,
            shape: grid.shape,
            center: T::from_f64_lossy(center),
            axis_coef,
            dt2_over_m: m.iter().map(|&v| T::from_f64_lossy(dt * dt / v)).collect(),
            damp_factor: damp.iter().map(|&d| T::from_f64_lossy(1.0 / (1.0 + dt * d))).collect(),
        })
    }

    /// Floating point operations per point update, for intensity estimates.
    pub fn flops_per_point(&self) -> usize {
        let active = self.axis_coef.iter().filter(|c| !c.is_empty()).count();
        // center mul, 3 ops per (axis, r), then 2u1 - u2 + b * acc and damping
        1 + 3 * active * self.radius + 5
    }

    /// Updates row `(x, y)` for `z0..z1` at time `t`.
    ///
    /// # Safety
    /// `u` must point to a live field of this kernel's shape with halo of at
    /// least `radius`, and no other thread may access the written row of
    /// level `t` or write levels `t-1`, `t-2` concurrently.
    pub(crate) unsafe fn row(
        &self,
        u: FieldPtr<T>,
        t: usize,
        x: usize,
        y: usize,
        z0: usize,
        z1: usize,
        acc: &mut Vec<T>,
    ) {
        let len = z1 - z0;
        acc.clear();
        acc.resize(len, T::zero());
        let s0 = u.slot_back(t, 0);
        let s1 = u.slot_back(t, 1);
        let s2 = u.slot_back(t, 2);
        let off = (u.row_offset(x, y) + z0) as isize;
        let u1 = std::slice::from_raw_parts(u.at(s1, off), len);
        for (a, u1v) in acc.iter_mut().zip(u1) {
            *a = self.center * *u1v;
        }
        for r in 1..=self.radius {
            for axis in 0..3 {
                let coef = match self.axis_coef[axis].get(r - 1) {
                    Some(&c) => c,
                    None => continue,
                };
                let d = (r * u.strides[axis]) as isize;
                let lo = std::slice::from_raw_parts(u.at(s1, off - d), len);
                let hi = std::slice::from_raw_parts(u.at(s1, off + d), len);
                for ((a, l), h) in acc.iter_mut().zip(lo).zip(hi) {
                    *a += coef * (*l + *h);
                }
            }
        }
        let u2 = std::slice::from_raw_parts(u.at(s2, off), len);
        let out = std::slice::from_raw_parts_mut(u.at(s0, off), len);
        let p = (x * self.shape[1] + y) * self.shape[2] + z0;
        let b = &self.dt2_over_m[p..p + len];
        let df = &self.damp_factor[p..p + len];
        for i in 0..len {
            out[i] = (u1[i] + u1[i] - u2[i] + b[i] * acc[i]) * df[i];
        }
    }
}

/// Pressure wavefield plus the material and damping it propagates through.
#[derive(Clone, Debug)]
pub struct AcousticModel<T> {
    pub grid: GridSpec,
    pub dt: f64,
    pub u: TimeBufferedField<T>,
    pub m: Vec<f64>,
    pub damp: Vec<f64>,
    pub kernel: AcousticKernel<T>,
}

impl<T: Real> AcousticModel<T> {
    pub fn new(grid: &GridSpec, space_order: usize, dt: f64, m: Vec<f64>, damp: Vec<f64>) -> Result<Self> {
        let coeffs = fd_weights(space_order)?;
        let kernel = AcousticKernel::new(grid, &coeffs, dt, &m, &damp)?;
        Ok(AcousticModel {
            grid: grid.clone(),
            dt,
            u: TimeBufferedField::new(grid, space_order, ACOUSTIC_TIME_LEVELS)?,
            m,
            damp,
            kernel,
        })
    }

    /// Homogeneous medium of velocity `vp` (m/s).
    pub fn homogeneous(grid: &GridSpec, space_order: usize, dt: f64, vp: f64, damp: Vec<f64>) -> Result<Self> {
        if !(vp > 0.0) {
            return Err(invalid("vp", format!("velocity must be > 0, got {vp}")));
        }
        Self::new(grid, space_order, dt, vec![1.0 / (vp * vp); grid.num_points()], damp)
    }

    pub fn radius(&self) -> usize {
        self.kernel.radius
    }
}

pub(crate) fn check_region(grid: &GridSpec, region: &Region) -> Result<()> {
    if !grid.full_region().contains_region(region) {
        return Err(Error::ContractViolation {
            region: region.to_string(),
            reason: format!("extends past the interior {}", grid.full_region()),
        });
    }
    Ok(())
}

/// Advances every point of `region` to time `t`.
pub fn acoustic_update<T: Real>(model: &mut AcousticModel<T>, t: usize, region: &Region) -> Result<()> {
    check_region(&model.grid, region)?;
    if region.is_empty() {
        return Ok(());
    }
    let ptr = model.u.raw();
    let mut acc = Vec::new();
    for x in region.lo[0]..region.hi[0] {
        for y in region.lo[1]..region.hi[1] {
            // SAFETY: exclusive borrow of the model; the region is inside the interior.
            unsafe { model.kernel.row(ptr, t, x, y, region.lo[2], region.hi[2], &mut acc) };
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, so: usize, dt: f64) -> AcousticModel<f64> {
        let g = GridSpec::new([n, 1, 1], [1.0; 3]).unwrap();
        AcousticModel::homogeneous(&g, so, dt, 1.0, vec![0.0; n]).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = GridSpec::cube(6, 1.0).unwrap();
        let mut m = AcousticModel::<f32>::homogeneous(&g, 4, 0.1, 1.0, vec![0.0; 216]).unwrap();
        acoustic_update(&mut m, 1, &g.full_region()).unwrap();
        assert!(m.u.interior(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_evaluated_delta_update() {
        let mut m = line(9, 2, 0.1);
        m.u.set(0, [4, 0, 0], 1.0);
        let full = m.grid.full_region();
        acoustic_update(&mut m, 1, &full).unwrap();
        assert!((m.u.get(1, [4, 0, 0]) - 1.98).abs() < 1e-14);
        assert!((m.u.get(1, [3, 0, 0]) - 0.01).abs() < 1e-14);
        assert!((m.u.get(1, [5, 0, 0]) - 0.01).abs() < 1e-14);
        assert_eq!(m.u.get(1, [2, 0, 0]), 0.0);
    }

    #[test]
    fn constant_field_is_stationary_away_from_halo() {
        let g = GridSpec::cube(10, 5.0).unwrap();
        let mut m = AcousticModel::<f64>::homogeneous(&g, 4, 0.001, 2000.0, vec![0.0; 1000]).unwrap();
        m.u.fill_level(0, 3.5);
        m.u.fill_level(2, 3.5); // level -1
        let inner = Region::new([2; 3], [8; 3]);
        acoustic_update(&mut m, 1, &inner).unwrap();
        for p in inner.points() {
            assert!((m.u.get(1, p) - 3.5).abs() < 1e-12);
        }
        assert!(m.u.halo_is_zero());
    }

    #[test]
    fn region_outside_interior_is_rejected() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        let mut m = AcousticModel::<f32>::homogeneous(&g, 2, 0.1, 1.0, vec![0.0; 64]).unwrap();
        let err = acoustic_update(&mut m, 1, &Region::new([0; 3], [5, 4, 4])).unwrap_err();
        assert!(matches!(err, Error::ContractViolation { .. }));
    }
}
