//! Grid geometry, halo-padded field storage with cyclic time levels, and the
//! CFL time-step bound.

use crate::error::{invalid, Error, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Regular 3-D grid. Axes with extent 1 are inactive: no derivatives are
/// taken along them, which is how 1-D and 2-D problems are expressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub shape: [usize; 3],
    #[serde(rename = "spacing_m")]
    pub spacing: [f64; 3],
    #[serde(rename = "origin_m", default)]
    pub origin: [f64; 3],
    #[serde(default)]
    pub boundary_layers: usize,
}

impl GridSpec {
    pub fn new(shape: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let grid = GridSpec {
            shape,
            spacing,
            origin: [0.0; 3],
            boundary_layers: 0,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Cubic grid with uniform spacing.
    pub fn cube(n: usize, spacing: f64) -> Result<Self> {
        Self::new([n; 3], [spacing; 3])
    }

    pub fn with_boundary_layers(mut self, nbl: usize) -> Self {
        self.boundary_layers = nbl;
        self
    }

    pub fn with_origin(mut self, origin: [f64; 3]) -> Self {
        self.origin = origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.iter().any(|&n| n == 0) {
            return Err(invalid(
                "shape",
                format!("every extent must be >= 1, got {:?}", self.shape),
            ));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(invalid(
                "spacing",
                format!("every spacing must be > 0, got {:?}", self.spacing),
            ));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(invalid("origin", "origin must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn is_active(&self, axis: usize) -> bool {
        self.shape[axis] > 1
    }

    /// Number of axes carrying derivatives (at least 1).
    pub fn ndim(&self) -> usize {
        (0..3).filter(|&a| self.is_active(a)).count().max(1)
    }

    pub fn num_points(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn coord_of(&self, idx: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|a| self.origin[a] + idx[a] as f64 * self.spacing[a])
    }

    /// Physical coordinate of the last grid point along every axis.
    pub fn upper_corner(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.origin[a] + (self.shape[a] - 1) as f64 * self.spacing[a])
    }

    /// Smallest spacing over active axes.
    pub fn min_spacing(&self) -> f64 {
        let h = (0..3)
            .filter(|&a| self.is_active(a))
            .map(|a| self.spacing[a])
            .fold(f64::INFINITY, f64::min);
        if h.is_finite() {
            h
        } else {
            self.spacing[0]
        }
    }

    /// Every grid point.
    pub fn full_region(&self) -> Region {
        Region::new([0; 3], self.shape)
    }

    /// Points outside the damping layers. Inactive axes are never padded
    /// with layers.
    pub fn physical_region(&self) -> Region {
        let nbl = self.boundary_layers;
        let mut lo = [0; 3];
        let mut hi = self.shape;
        for a in 0..3 {
            if self.is_active(a) {
                lo[a] = nbl.min(self.shape[a]);
                hi[a] = self.shape[a].saturating_sub(nbl).max(lo[a]);
            }
        }
        Region::new(lo, hi)
    }
}

/// Half-open box of grid indices `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Region {
    pub fn new(lo: [usize; 3], hi: [usize; 3]) -> Self {
        Region { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.hi[a] <= self.lo[a])
    }

    pub fn volume(&self) -> usize {
        (0..3).map(|a| self.hi[a].saturating_sub(self.lo[a])).product()
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| self.lo[a] <= p[a] && p[a] < self.hi[a])
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        other.is_empty() || (0..3).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    pub fn intersect(&self, other: &Region) -> Region {
        Region {
            lo: std::array::from_fn(|a| self.lo[a].max(other.lo[a])),
            hi: std::array::from_fn(|a| self.hi[a].min(other.hi[a])),
        }
    }

    /// Points in x, y, z order with z fastest.
    pub fn points(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let r = *self;
        let empty = r.is_empty();
        (r.lo[0]..if empty { r.lo[0] } else { r.hi[0] })
            .flat_map(move |x| (r.lo[1]..r.hi[1]).flat_map(move |y| (r.lo[2]..r.hi[2]).map(move |z| [x, y, z])))
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}..{}, {}..{}, {}..{}]",
            self.lo[0], self.hi[0], self.lo[1], self.hi[1], self.lo[2], self.hi[2]
        )
    }
}

/// Largest stable-by-construction step `safety * h_min / (v_max * sqrt(ndim))`.
pub fn cfl_dt(grid: &GridSpec, v_max: f64, safety: f64) -> Result<f64> {
    grid.validate()?;
    if !(v_max > 0.0) || !v_max.is_finite() {
        return Err(invalid("v_max", format!("must be > 0, got {v_max}")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(invalid("safety", format!("must lie in (0, 1], got {safety}")));
    }
    Ok(safety * grid.min_spacing() / (v_max * (grid.ndim() as f64).sqrt()))
}

/// An n-D scalar field padded by a zero halo, holding `time_levels` time
/// levels in a cyclic buffer. Storage is x-major with z contiguous.
#[derive(Clone, Debug)]
pub struct TimeBufferedField<T> {
    shape: [usize; 3],
    halo: usize,
    padded: [usize; 3],
    time_levels: usize,
    slot_len: usize,
    data: Vec<T>,
}

/// Zero-initialised field with a halo of `space_order / 2` on every side.
pub fn allocate_field<T: Real>(
    grid: &GridSpec,
    space_order: usize,
    time_levels: usize,
) -> Result<TimeBufferedField<T>> {
    TimeBufferedField::new(grid, space_order, time_levels)
}

impl<T: Real> TimeBufferedField<T> {
    pub fn new(grid: &GridSpec, space_order: usize, time_levels: usize) -> Result<Self> {
        grid.validate()?;
        if time_levels < 2 {
            return Err(invalid("time_levels", format!("need at least 2, got {time_levels}")));
        }
        let halo = space_order / 2;
        let padded: [usize; 3] = std::array::from_fn(|a| grid.shape[a] + 2 * halo);
        let slot_len = padded.iter().product::<usize>();
        let total = slot_len
            .checked_mul(time_levels)
            .ok_or(Error::Resource { bytes: usize::MAX })?;
        let mut data = Vec::new();
        data.try_reserve_exact(total).map_err(|_| Error::Resource {
            bytes: total.saturating_mul(std::mem::size_of::<T>()),
        })?;
        data.resize(total, T::zero());
        Ok(TimeBufferedField {
            shape: grid.shape,
            halo,
            padded,
            time_levels,
            slot_len,
            data,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn halo(&self) -> usize {
        self.halo
    }

    pub fn padded_shape(&self) -> [usize; 3] {
        self.padded
    }

    pub fn time_levels(&self) -> usize {
        self.time_levels
    }

    /// Buffer slot holding logical time `t`.
    #[inline]
    pub fn slot(&self, t: usize) -> usize {
        t % self.time_levels
    }

    /// Slot of `t - back`, valid for `back < time_levels` even when `t < back`.
    #[inline]
    pub fn slot_back(&self, t: usize, back: usize) -> usize {
        debug_assert!(back < self.time_levels);
        (t % self.time_levels + self.time_levels - back) % self.time_levels
    }

    pub fn slot_len(&self) -> usize {
        self.slot_len
    }

    /// Strides of the padded layout in elements, per axis.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [self.padded[1] * self.padded[2], self.padded[2], 1]
    }

    /// Offset within a slot of interior point `idx`.
    #[inline]
    pub fn offset(&self, idx: [usize; 3]) -> usize {
        let s = self.strides();
        (idx[0] + self.halo) * s[0] + (idx[1] + self.halo) * s[1] + idx[2] + self.halo
    }

    #[inline]
    pub fn get(&self, t: usize, idx: [usize; 3]) -> T {
        self.data[self.slot(t) * self.slot_len + self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, idx: [usize; 3], v: T) {
        let o = self.slot(t) * self.slot_len + self.offset(idx);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, t: usize, idx: [usize; 3], v: T) {
        let o = self.slot(t) * self.slot_len + self.offset(idx);
        self.data[o] += v;
    }

    pub fn level(&self, t: usize) -> &[T] {
        let s = self.slot(t) * self.slot_len;
        &self.data[s..s + self.slot_len]
    }

    pub fn level_mut(&mut self, t: usize) -> &mut [T] {
        let s = self.slot(t) * self.slot_len;
        &mut self.data[s..s + self.slot_len]
    }

    /// Sets every interior point of level `t`.
    pub fn fill_level(&mut self, t: usize, v: T) {
        let region = Region::new([0; 3], self.shape);
        for p in region.points() {
            self.set(t, p, v);
        }
    }

    /// Interior values of level `t` in x, y, z order (z fastest).
    pub fn interior(&self, t: usize) -> Vec<T> {
        let level = self.level(t);
        let mut out = Vec::with_capacity(self.shape.iter().product());
        for x in 0..self.shape[0] {
            for y in 0..self.shape[1] {
                let o = self.offset([x, y, 0]);
                out.extend_from_slice(&level[o..o + self.shape[2]]);
            }
        }
        out
    }

    /// True when every halo value of every slot is exactly zero.
    pub fn halo_is_zero(&self) -> bool {
        let h = self.halo;
        for slot in 0..self.time_levels {
            let base = slot * self.slot_len;
            for px in 0..self.padded[0] {
                for py in 0..self.padded[1] {
                    for pz in 0..self.padded[2] {
                        let inside = px >= h
                            && px < h + self.shape[0]
                            && py >= h
                            && py < h + self.shape[1]
                            && pz >= h
                            && pz < h + self.shape[2];
                        if !inside {
                            let o = base + (px * self.padded[1] + py) * self.padded[2] + pz;
                            if self.data[o] != T::zero() {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    pub(crate) fn raw(&mut self) -> FieldPtr<T> {
        FieldPtr {
            base: self.data.as_mut_ptr(),
            slot_len: self.slot_len,
            strides: self.strides(),
            halo: self.halo,
            time_levels: self.time_levels,
        }
    }
}

/// Unsynchronised handle used by the engine to update disjoint regions of a
/// field from several threads at once.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FieldPtr<T> {
    base: *mut T,
    pub slot_len: usize,
    pub strides: [usize; 3],
    pub halo: usize,
    pub time_levels: usize,
}

// SAFETY: the engine only hands copies of a `FieldPtr` to workers that write
// disjoint rows of one time level while reading other levels.
unsafe impl<T: Send> Send for FieldPtr<T> {}
unsafe impl<T: Sync> Sync for FieldPtr<T> {}

impl<T> FieldPtr<T> {
    #[inline(always)]
    pub fn slot_back(&self, t: usize, back: usize) -> usize {
        (t % self.time_levels + self.time_levels - back) % self.time_levels
    }

    /// Offset within a slot of the first z point of row `(x, y)`.
    #[inline(always)]
    pub fn row_offset(&self, x: usize, y: usize) -> usize {
        (x + self.halo) * self.strides[0] + (y + self.halo) * self.strides[1] + self.halo
    }

    /// Pointer to element `offset` of `slot`. Offsets may reach into the halo.
    #[inline(always)]
    pub fn at(&self, slot: usize, offset: isize) -> *mut T {
        // SAFETY: callers keep offsets within the padded slot.
        unsafe { self.base.add(slot * self.slot_len).offset(offset) }
    }
}
