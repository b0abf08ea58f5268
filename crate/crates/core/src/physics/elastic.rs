//! Isotropic elastic velocity-stress propagator on a staggered grid.
//!
//! Layout: normal stresses at integer points; `v_i` at `+1/2` along axis `i`;
//! shear stress `tau_ij` at `+1/2` along both `i` and `j`. Each field keeps
//! two time levels; velocities lead stresses within a step.

use super::acoustic::check_region;
use crate::error::{invalid, Error, Result};
use crate::fd::{staggered_weights, StaggeredCoefficients};
use crate::grid::{FieldPtr, GridSpec, Region, TimeBufferedField};
use crate::real::Real;

pub const ELASTIC_TIME_LEVELS: usize = 2;

/// Index into the six stored stress components.
pub const fn tau_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    match (lo, hi) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

pub const TAU_NAMES: [&str; 6] = ["txx", "tyy", "tzz", "txy", "txz", "tyz"];
pub const V_NAMES: [&str; 3] = ["vx", "vy", "vz"];

#[derive(Clone, Debug)]
pub struct ElasticKernel<T> {
    pub radius: usize,
    shape: [usize; 3],
    /// `axis_coef[a][r - 1] = c_r / h_a`, empty for inactive axes.
    axis_coef: [Vec<T>; 3],
    dt_buoyancy: Vec<T>,
    dt_lam: Vec<T>,
    dt_mu: Vec<T>,
    damp_factor: Vec<T>,
}

/// Row scratch buffers reused between calls.
#[derive(Debug)]
pub struct ElasticScratch<T> {
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
}

impl<T> Default for ElasticScratch<T> {
    fn default() -> Self {
        ElasticScratch {
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
        }
    }
}

#[inline(always)]
unsafe fn add_derivative<T: Real>(
    dst: &mut [T],
    f: FieldPtr<T>,
    slot: usize,
    off: isize,
    stride: usize,
    coef: &[T],
    forward: bool,
) {
    let len = dst.len();
    for (k, &c) in coef.iter().enumerate() {
        let r = k as isize + 1;
        let (hi, lo) = if forward { (r, 1 - r) } else { (r - 1, -r) };
        let s = stride as isize;
        let fh = std::slice::from_raw_parts(f.at(slot, off + hi * s), len);
        let fl = std::slice::from_raw_parts(f.at(slot, off + lo * s), len);
        for ((d, h), l) in dst.iter_mut().zip(fh).zip(fl) {
            *d += c * (*h - *l);
        }
    }
}

impl<T: Real> ElasticKernel<T> {
    pub fn new(
        grid: &GridSpec,
        coeffs: &StaggeredCoefficients,
        dt: f64,
        lam: &[f64],
        mu: &[f64],
        rho: &[f64],
        damp: &[f64],
    ) -> Result<Self> {
        let n = grid.num_points();
        for (name, f) in [("lam", lam), ("mu", mu), ("rho", rho), ("damp", damp)] {
            if f.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "{name} needs {n} values, got {}",
                    f.len()
                )));
            }
        }
        for i in 0..n {
            if !(rho[i] > 0.0) || !(mu[i] >= 0.0) || !(lam[i] + 2.0 * mu[i] > 0.0) {
                return Err(invalid(
                    "lame",
                    format!(
                        "need rho > 0, mu >= 0, lam + 2mu > 0; got rho={} mu={} lam={}",
                        rho[i], mu[i], lam[i]
                    ),
                ));
            }
            if !(damp[i] >= 0.0) {
                return Err(invalid("damp", format!("damping must be >= 0, found {}", damp[i])));
            }
        }
        let axis_coef = std::array::from_fn(|a| {
            if !grid.is_active(a) {
                return Vec::new();
            }
            coeffs
                .weights
                .iter()
                .map(|c| T::from_f64_lossy(c / grid.spacing[a]))
                .collect()
        });
        let cvt = |f: &[f64], s: f64| f.iter().map(|&v| T::from_f64_lossy(s * v)).collect::<Vec<T>>();
        Ok(ElasticKernel {
            radius: coeffs.radius,
            shape: grid.shape,
            axis_coef,
            dt_buoyancy: rho.iter().map(|&r| T::from_f64_lossy(dt / r)).collect(),
            dt_lam: cvt(lam, dt),
            dt_mu: cvt(mu, dt),
            damp_factor: damp.iter().map(|&d| T::from_f64_lossy(1.0 / (1.0 + dt * d))).collect(),
        })
    }

    pub fn flops_per_point(&self) -> usize {
        let active = self.axis_coef.iter().filter(|c| !c.is_empty()).count();
        let d = 3 * self.radius;
        // 9 derivatives for v, 3 + 6 for tau, plus updates
        (9 + 9) * active / 3 * d + 3 * 4 + 3 * 7 + 3 * 5
    }

    /// Advances the three velocities of row `(x, y)` over `z0..z1` to time `t`.
    ///
    /// # Safety
    /// Pointers must reference live fields of this kernel's shape with halo of
    /// at least `radius`; the written row of `v[t]` must not be accessed by
    /// other threads, and `v[t-1]`, `tau[t-1]` must not be written concurrently.
    pub(crate) unsafe fn velocity_row(
        &self,
        v: &[FieldPtr<T>; 3],
        tau: &[FieldPtr<T>; 6],
        t: usize,
        x: usize,
        y: usize,
        z0: usize,
        z1: usize,
        scratch: &mut ElasticScratch<T>,
    ) {
        let len = z1 - z0;
        let off = (v[0].row_offset(x, y) + z0) as isize;
        let p = (x * self.shape[1] + y) * self.shape[2] + z0;
        let bdt = &self.dt_buoyancy[p..p + len];
        let df = &self.damp_factor[p..p + len];
        let acc = &mut scratch.a;
        for i in 0..3 {
            acc.clear();
            acc.resize(len, T::zero());
            for axis in 0..3 {
                if self.axis_coef[axis].is_empty() {
                    continue;
                }
                let f = tau[tau_index(i, axis)];
                let slot = f.slot_back(t, 1);
                add_derivative(acc, f, slot, off, f.strides[axis], &self.axis_coef[axis], axis == i);
            }
            let s_new = v[i].slot_back(t, 0);
            let s_old = v[i].slot_back(t, 1);
            let old = std::slice::from_raw_parts(v[i].at(s_old, off), len);
            let out = std::slice::from_raw_parts_mut(v[i].at(s_new, off), len);
            for k in 0..len {
                out[k] = (old[k] + bdt[k] * acc[k]) * df[k];
            }
        }
    }

    /// Advances the six stresses of row `(x, y)` over `z0..z1` to time `t`,
    /// reading velocities at `t`.
    ///
    /// # Safety
    /// As [`Self::velocity_row`], with `tau[t]` written and `v[t]`, `tau[t-1]` read.
    pub(crate) unsafe fn stress_row(
        &self,
        v: &[FieldPtr<T>; 3],
        tau: &[FieldPtr<T>; 6],
        t: usize,
        x: usize,
        y: usize,
        z0: usize,
        z1: usize,
        scratch: &mut ElasticScratch<T>,
    ) {
        let len = z1 - z0;
        let off = (v[0].row_offset(x, y) + z0) as isize;
        let p = (x * self.shape[1] + y) * self.shape[2] + z0;
        let lam = &self.dt_lam[p..p + len];
        let mu = &self.dt_mu[p..p + len];
        let df = &self.damp_factor[p..p + len];
        let vslot = v[0].slot_back(t, 0);
        let new = tau[0].slot_back(t, 0);
        let old = tau[0].slot_back(t, 1);

        // diagonal strains d_i v_i, kept in a, b, c
        let ElasticScratch { a, b, c } = scratch;
        let strains: [&mut Vec<T>; 3] = [a, b, c];
        for (i, s) in strains.into_iter().enumerate() {
            s.clear();
            s.resize(len, T::zero());
            if !self.axis_coef[i].is_empty() {
                add_derivative(s, v[i], vslot, off, v[i].strides[i], &self.axis_coef[i], false);
            }
        }
        {
            let (dx, dy, dz) = (&scratch.a, &scratch.b, &scratch.c);
            let strain = [dx, dy, dz];
            for i in 0..3 {
                let f = tau[i];
                let prev = std::slice::from_raw_parts(f.at(old, off), len);
                let out = std::slice::from_raw_parts_mut(f.at(new, off), len);
                let di = strain[i];
                for k in 0..len {
                    let div = dx[k] + dy[k] + dz[k];
                    let two_mu = mu[k] + mu[k];
                    out[k] = (prev[k] + lam[k] * div + two_mu * di[k]) * df[k];
                }
            }
        }
        let acc = &mut scratch.a;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            acc.clear();
            acc.resize(len, T::zero());
            if !self.axis_coef[j].is_empty() {
                add_derivative(acc, v[i], vslot, off, v[i].strides[j], &self.axis_coef[j], true);
            }
            if !self.axis_coef[i].is_empty() {
                add_derivative(acc, v[j], vslot, off, v[j].strides[i], &self.axis_coef[i], true);
            }
            let f = tau[tau_index(i, j)];
            let prev = std::slice::from_raw_parts(f.at(old, off), len);
            let out = std::slice::from_raw_parts_mut(f.at(new, off), len);
            for k in 0..len {
                out[k] = (prev[k] + mu[k] * acc[k]) * df[k];
            }
        }
    }
}

/// Particle velocities, stresses, and the medium they live in.
#[derive(Clone, Debug)]
pub struct ElasticModel<T> {
    pub grid: GridSpec,
    pub dt: f64,
    pub v: [TimeBufferedField<T>; 3],
    pub tau: [TimeBufferedField<T>; 6],
    pub lam: Vec<f64>,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub damp: Vec<f64>,
    pub kernel: ElasticKernel<T>,
}

impl<T: Real> ElasticModel<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &GridSpec,
        space_order: usize,
        dt: f64,
        lam: Vec<f64>,
        mu: Vec<f64>,
        rho: Vec<f64>,
        damp: Vec<f64>,
    ) -> Result<Self> {
        let coeffs = staggered_weights(space_order)?;
        let kernel = ElasticKernel::new(grid, &coeffs, dt, &lam, &mu, &rho, &damp)?;
        let field = || TimeBufferedField::new(grid, space_order, ELASTIC_TIME_LEVELS);
        Ok(ElasticModel {
            grid: grid.clone(),
            dt,
            v: [field()?, field()?, field()?],
            tau: [field()?, field()?, field()?, field()?, field()?, field()?],
            lam,
            mu,
            rho,
            damp,
            kernel,
        })
    }

    /// Homogeneous medium from P and S velocities (m/s) and density (kg/m^3).
    pub fn homogeneous(
        grid: &GridSpec,
        space_order: usize,
        dt: f64,
        vp: f64,
        vs: f64,
        rho: f64,
        damp: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.num_points();
        let mu = rho * vs * vs;
        let lam = rho * (vp * vp - 2.0 * vs * vs);
        Self::new(grid, space_order, dt, vec![lam; n], vec![mu; n], vec![rho; n], damp)
    }

    pub fn radius(&self) -> usize {
        self.kernel.radius
    }

    pub(crate) fn raw(&mut self) -> ([FieldPtr<T>; 3], [FieldPtr<T>; 6]) {
        let [v0, v1, v2] = &mut self.v;
        let v = [v0.raw(), v1.raw(), v2.raw()];
        let [t0, t1, t2, t3, t4, t5] = &mut self.tau;
        let tau = [t0.raw(), t1.raw(), t2.raw(), t3.raw(), t4.raw(), t5.raw()];
        (v, tau)
    }
}

pub fn elastic_update_v<T: Real>(model: &mut ElasticModel<T>, t: usize, region: &Region) -> Result<()> {
    check_region(&model.grid, region)?;
    if region.is_empty() {
        return Ok(());
    }
    let (v, tau) = model.raw();
    let mut scratch = ElasticScratch::default();
    for x in region.lo[0]..region.hi[0] {
        for y in region.lo[1]..region.hi[1] {
            // SAFETY: exclusive borrow of the model; region inside the interior.
            unsafe {
                model
                    .kernel
                    .velocity_row(&v, &tau, t, x, y, region.lo[2], region.hi[2], &mut scratch)
            };
        }
    }
    Ok(())
}

pub fn elastic_update_tau<T: Real>(model: &mut ElasticModel<T>, t: usize, region: &Region) -> Result<()> {
    check_region(&model.grid, region)?;
    if region.is_empty() {
        return Ok(());
    }
    let (v, tau) = model.raw();
    let mut scratch = ElasticScratch::default();
    for x in region.lo[0]..region.hi[0] {
        for y in region.lo[1]..region.hi[1] {
            // SAFETY: as above.
            unsafe {
                model
                    .kernel
                    .stress_row(&v, &tau, t, x, y, region.lo[2], region.hi[2], &mut scratch)
            };
        }
    }
    Ok(())
}
