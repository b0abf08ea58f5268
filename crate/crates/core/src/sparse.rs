//! Off-the-grid sources and receivers coupled to the grid by trilinear
//! interpolation, and the direct (unfused) injection and measurement loops.

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, Region, TimeBufferedField};
use crate::real::Real;

const SNAP_TOL: f64 = 1e-9;

/// Trilinear weights of the 2x2x2 corner set of the enclosing cell. Corners
/// are ordered with the z offset fastest. On inactive axes both corners
/// collapse onto index 0 with the second weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpStencil {
    pub points: Vec<([usize; 3], f64)>,
}

impl InterpStencil {
    pub fn np(&self) -> usize {
        self.points.len()
    }

    /// Corners with nonzero weight, in corner order.
    pub fn nonzero(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        self.points.iter().copied().filter(|&(_, w)| w != 0.0)
    }
}

fn fractional_index(coord: [f64; 3], grid: &GridSpec) -> Result<[(usize, f64); 3]> {
    let mut out = [(0usize, 0.0f64); 3];
    for a in 0..3 {
        let n = grid.shape[a];
        let mut f = (coord[a] - grid.origin[a]) / grid.spacing[a];
        if !f.is_finite() || f < -SNAP_TOL || f > (n - 1) as f64 + SNAP_TOL {
            return Err(Error::OutOfDomain {
                coord,
                extent: format!("grid [{:?}, {:?}]", grid.origin, grid.upper_corner()),
            });
        }
        let nearest = f.round();
        if (f - nearest).abs() <= SNAP_TOL * nearest.abs().max(1.0) {
            f = nearest;
        }
        f = f.clamp(0.0, (n - 1) as f64);
        if n == 1 {
            out[a] = (0, 0.0);
            continue;
        }
        // points on the upper face land in the last cell with fraction 1
        let i = (f.floor() as usize).min(n - 2);
        out[a] = (i, f - i as f64);
    }
    Ok(out)
}

pub fn interp_stencil(coord: [f64; 3], grid: &GridSpec) -> Result<InterpStencil> {
    let cell = fractional_index(coord, grid)?;
    let mut points = Vec::with_capacity(8);
    for dx in 0..2 {
        for dy in 0..2 {
            for dz in 0..2 {
                let d = [dx, dy, dz];
                let mut w = 1.0;
                let mut idx = [0; 3];
                for a in 0..3 {
                    let (i, f) = cell[a];
                    if grid.shape[a] == 1 {
                        idx[a] = 0;
                        w *= if d[a] == 0 { 1.0 } else { 0.0 };
                    } else {
                        idx[a] = i + d[a];
                        w *= if d[a] == 0 { 1.0 - f } else { f };
                    }
                }
                points.push((idx, w));
            }
        }
    }
    Ok(InterpStencil { points })
}

/// Grid point closest to `coord`.
pub fn nearest_index(coord: [f64; 3], grid: &GridSpec) -> Result<[usize; 3]> {
    let cell = fractional_index(coord, grid)?;
    Ok(std::array::from_fn(|a| {
        let (i, f) = cell[a];
        if f >= 0.5 {
            i + 1
        } else {
            i
        }
    }))
}

/// Amount a source adds to one of its corners at one step. Every injection
/// path goes through here so that all of them round identically.
#[inline]
pub fn contribution(weight: f64, scale: f64, amplitude: f64) -> f64 {
    weight * (scale * amplitude)
}

/// Off-the-grid sources with one wavelet each.
#[derive(Clone, Debug)]
pub struct SourceSet {
    pub coords: Vec<[f64; 3]>,
    /// `nt x nsrc`, time-major.
    pub wavelets: Vec<f64>,
    pub nt: usize,
    /// Per-source injection scale.
    pub scale: Vec<f64>,
    stencils: Vec<InterpStencil>,
}

impl SourceSet {
    /// `wavelets[s]` is the series of source `s`; all must share one length.
    pub fn new(grid: &GridSpec, coords: Vec<[f64; 3]>, wavelets: &[Vec<f64>], scale: Vec<f64>) -> Result<Self> {
        if wavelets.len() != coords.len() || scale.len() != coords.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} sources but {} wavelets and {} scales",
                coords.len(),
                wavelets.len(),
                scale.len()
            )));
        }
        let nt = wavelets.first().map_or(0, Vec::len);
        if wavelets.iter().any(|w| w.len() != nt) {
            return Err(invalid("wavelets", "all wavelets must have the same length"));
        }
        let stencils = coords
            .iter()
            .map(|&c| interp_stencil(c, grid))
            .collect::<Result<Vec<_>>>()?;
        let nsrc = coords.len();
        let mut series = vec![0.0; nt * nsrc];
        for (s, w) in wavelets.iter().enumerate() {
            for (t, &v) in w.iter().enumerate() {
                series[t * nsrc + s] = v;
            }
        }
        Ok(SourceSet {
            coords,
            wavelets: series,
            nt,
            scale,
            stencils,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn amplitude(&self, t: usize, s: usize) -> f64 {
        if t < self.nt {
            self.wavelets[t * self.len() + s]
        } else {
            0.0
        }
    }

    pub fn stencil(&self, s: usize) -> &InterpStencil {
        &self.stencils[s]
    }

    pub fn stencils(&self) -> &[InterpStencil] {
        &self.stencils
    }
}

/// Off-the-grid receivers and the samples they record.
#[derive(Clone, Debug)]
pub struct ReceiverSet {
    pub coords: Vec<[f64; 3]>,
    /// `nt x nrec`, time-major.
    pub data: Vec<f64>,
    pub nt: usize,
    stencils: Vec<InterpStencil>,
}

impl ReceiverSet {
    /// Receivers must sit inside the physical region; the damping layers are
    /// rejected rather than clipped.
    pub fn new(grid: &GridSpec, coords: Vec<[f64; 3]>, nt: usize) -> Result<Self> {
        let phys = grid.physical_region();
        let lo = grid.coord_of(phys.lo);
        let hi = grid.coord_of(std::array::from_fn(|a| phys.hi[a].saturating_sub(1)));
        let mut stencils = Vec::with_capacity(coords.len());
        for &c in &coords {
            let eps = |a: usize| SNAP_TOL * grid.spacing[a];
            if (0..3).any(|a| c[a] < lo[a] - eps(a) || c[a] > hi[a] + eps(a)) {
                return Err(Error::OutOfDomain {
                    coord: c,
                    extent: format!("physical region [{lo:?}, {hi:?}] (receivers may not sit in damping layers)"),
                });
            }
            stencils.push(interp_stencil(c, grid)?);
        }
        Ok(ReceiverSet {
            data: vec![0.0; nt * coords.len()],
            coords,
            nt,
            stencils,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn stencil(&self, r: usize) -> &InterpStencil {
        &self.stencils[r]
    }

    pub fn sample(&self, t: usize, r: usize) -> f64 {
        self.data[t * self.len() + r]
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|d| *d = 0.0);
    }

    /// Records step `t` from an arbitrary point sampler.
    pub fn record_with<T: Real>(&mut self, t: usize, mut value: impl FnMut([usize; 3]) -> T) {
        let n = self.len();
        for r in 0..n {
            let mut acc = T::zero();
            for (p, w) in self.stencils[r].nonzero() {
                acc += T::from_f64_lossy(w) * value(p);
            }
            self.data[t * n + r] = acc.as_f64();
        }
    }
}

/// Adds every source's step-`t` amplitude to level `t` of `field`.
pub fn inject_direct<T: Real>(field: &mut TimeBufferedField<T>, sources: &SourceSet, t: usize) {
    for s in 0..sources.len() {
        let amp = sources.amplitude(t, s);
        for (p, w) in sources.stencil(s).nonzero() {
            field.add(t, p, T::from_f64_lossy(contribution(w, sources.scale[s], amp)));
        }
    }
}

pub fn record_receivers<T: Real>(field: &TimeBufferedField<T>, receivers: &mut ReceiverSet, t: usize) {
    receivers.record_with(t, |p| field.get(t, p));
}

/// Grid points touched by any corner of `stencils`, with their bounding box.
pub fn stencil_bounds(stencils: &[InterpStencil]) -> Option<Region> {
    let mut it = stencils.iter().flat_map(|s| s.nonzero().map(|(p, _)| p));
    let first = it.next()?;
    let mut r = Region::new(first, first.map(|v| v + 1));
    for p in it {
        for a in 0..3 {
            r.lo[a] = r.lo[a].min(p[a]);
            r.hi[a] = r.hi[a].max(p[a] + 1);
        }
    }
    Some(r)
}
