//! Aligns sparse sources and receivers with the grid before time stepping.
//!
//! The pipeline discovers every grid point an off-the-grid operator touches,
//! marks them in a mask (`sm`) and numbers them (`sid`), decomposes the source
//! wavelets into one series per affected point (`src_dcmp`), and compresses
//! the mask along z into per-(x, y) lists so that the injection loop of a row
//! visits only affected points. Once aligned, injection is a per-point
//! operation and can be fused into any schedule that updates whole z-rows.

use crate::error::{invalid, Result};
use crate::grid::{FieldPtr, GridSpec, TimeBufferedField};
use crate::real::Real;
use crate::sparse::{contribution, ReceiverSet, SourceSet};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportMethod {
    /// Union of interpolation corners with nonzero weight.
    #[default]
    Geometric,
    /// Inject into an empty grid and keep the nonzero points.
    Numeric,
}

/// Steps injected by the numeric method before thresholding.
pub const NUMERIC_PROBE_STEPS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SupportDiscovery {
    /// Unique affected points in lexicographic order.
    pub points: Vec<[usize; 3]>,
    /// Sources that left no trace with the numeric method.
    pub degenerate_sources: Vec<usize>,
}

pub fn find_support(sources: &SourceSet, grid: &GridSpec, method: SupportMethod) -> Result<SupportDiscovery> {
    let mut points = Vec::new();
    let mut degenerate_sources = Vec::new();
    match method {
        SupportMethod::Geometric => {
            for s in sources.stencils() {
                points.extend(s.nonzero().map(|(p, _)| p));
            }
        }
        SupportMethod::Numeric => {
            let steps = sources.nt.min(NUMERIC_PROBE_STEPS);
            // a single interior-sized level in x-major order, cleared while scanned
            let mut level = vec![0.0f64; grid.num_points()];
            let [_, ny, nz] = grid.shape;
            for t in 0..steps {
                for s in 0..sources.len() {
                    let amp = sources.amplitude(t, s);
                    for (p, w) in sources.stencil(s).nonzero() {
                        level[(p[0] * ny + p[1]) * nz + p[2]] += contribution(w, sources.scale[s], amp);
                    }
                }
                for (i, v) in level.iter_mut().enumerate() {
                    if *v != 0.0 {
                        points.push([i / (ny * nz), (i / nz) % ny, i % nz]);
                        *v = 0.0;
                    }
                }
            }
            for s in 0..sources.len() {
                let silent = (0..steps).all(|t| sources.amplitude(t, s) * sources.scale[s] == 0.0);
                if silent {
                    degenerate_sources.push(s);
                }
            }
            if !degenerate_sources.is_empty() {
                log::warn!(
                    "numeric support discovery: {} source(s) inject zero over the first {steps} step(s); \
                     their support is missing",
                    degenerate_sources.len()
                );
            }
        }
    }
    points.sort_unstable();
    points.dedup();
    Ok(SupportDiscovery {
        points,
        degenerate_sources,
    })
}

/// Mask, ids, and the z-compressed structures of the points touched by a set
/// of sparse operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSupport {
    pub shape: [usize; 3],
    /// 0/1 per grid point.
    pub sm: Vec<u8>,
    /// Unique id per affected point, -1 elsewhere.
    pub sid: Vec<i32>,
    pub n_affected: usize,
    /// Affected z-entries per (x, y).
    pub nnz_mask: Vec<u32>,
    /// Row start of (x, y) in `sp_z`/`sp_id`; length `nx * ny + 1`.
    pub row_ptr: Vec<usize>,
    pub sp_z: Vec<u32>,
    pub sp_id: Vec<u32>,
}

impl SparseSupport {
    #[inline]
    fn point_index(&self, p: [usize; 3]) -> usize {
        (p[0] * self.shape[1] + p[1]) * self.shape[2] + p[2]
    }

    pub fn mask(&self, p: [usize; 3]) -> u8 {
        self.sm[self.point_index(p)]
    }

    pub fn id(&self, p: [usize; 3]) -> Option<usize> {
        let v = self.sid[self.point_index(p)];
        (v >= 0).then_some(v as usize)
    }

    pub fn nnz(&self, x: usize, y: usize) -> usize {
        self.nnz_mask[x * self.shape[1] + y] as usize
    }

    /// Compressed z-indices and ids of row `(x, y)`.
    #[inline]
    pub fn row(&self, x: usize, y: usize) -> (&[u32], &[u32]) {
        let r = x * self.shape[1] + y;
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.sp_z[a..b], &self.sp_id[a..b])
    }

    pub fn is_compressed(&self) -> bool {
        self.row_ptr.len() == self.shape[0] * self.shape[1] + 1
    }

    /// Affected points in id order.
    pub fn points(&self) -> Vec<[usize; 3]> {
        let mut out = vec![[0; 3]; self.n_affected];
        let [_, ny, nz] = self.shape;
        for (i, &id) in self.sid.iter().enumerate() {
            if id >= 0 {
                out[id as usize] = [i / (ny * nz), (i / nz) % ny, i % nz];
            }
        }
        out
    }

    /// Deterministic text rendering for golden comparisons.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sparse-support {} {} {} affected {}",
            self.shape[0], self.shape[1], self.shape[2], self.n_affected
        );
        for (id, p) in self.points().iter().enumerate() {
            let _ = writeln!(s, "point {} {} {} id {id}", p[0], p[1], p[2]);
        }
        if self.is_compressed() {
            for x in 0..self.shape[0] {
                for y in 0..self.shape[1] {
                    let (zs, ids) = self.row(x, y);
                    if zs.is_empty() {
                        continue;
                    }
                    let _ = write!(s, "row {x} {y} nnz {}:", zs.len());
                    for (z, id) in zs.iter().zip(ids) {
                        let _ = write!(s, " {z}/{id}");
                    }
                    s.push('\n');
                }
            }
        }
        s
    }
}

/// Builds `sm` and `sid`, numbering points in lexicographic (x, y, z) order.
pub fn build_masks(support: &[[usize; 3]], grid: &GridSpec) -> Result<SparseSupport> {
    let shape = grid.shape;
    let n = grid.num_points();
    let mut pts = support.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if let Some(p) = pts.iter().find(|p| (0..3).any(|a| p[a] >= shape[a])) {
        return Err(invalid("support", format!("point {p:?} outside grid {shape:?}")));
    }
    if pts.len() > i32::MAX as usize {
        return Err(invalid("support", "too many affected points"));
    }
    let mut sm = vec![0u8; n];
    let mut sid = vec![-1i32; n];
    for (id, p) in pts.iter().enumerate() {
        let i = (p[0] * shape[1] + p[1]) * shape[2] + p[2];
        sm[i] = 1;
        sid[i] = id as i32;
    }
    Ok(SparseSupport {
        shape,
        sm,
        sid,
        n_affected: pts.len(),
        nnz_mask: Vec::new(),
        row_ptr: Vec::new(),
        sp_z: Vec::new(),
        sp_id: Vec::new(),
    })
}

/// Aggregates the mask along z into `nnz_mask` and the jagged `sp_z`/`sp_id`.
pub fn compress(mut support: SparseSupport) -> SparseSupport {
    let [nx, ny, nz] = support.shape;
    let mut nnz_mask = vec![0u32; nx * ny];
    let mut row_ptr = Vec::with_capacity(nx * ny + 1);
    let mut sp_z = Vec::with_capacity(support.n_affected);
    let mut sp_id = Vec::with_capacity(support.n_affected);
    row_ptr.push(0);
    for (r, nnz) in nnz_mask.iter_mut().enumerate() {
        let base = r * nz;
        for z in 0..nz {
            if support.sm[base + z] == 1 {
                sp_z.push(z as u32);
                sp_id.push(support.sid[base + z] as u32);
                *nnz += 1;
            }
        }
        row_ptr.push(sp_z.len());
    }
    support.nnz_mask = nnz_mask;
    support.row_ptr = row_ptr;
    support.sp_z = sp_z;
    support.sp_id = sp_id;
    support
}

/// Geometric discovery, masks, and compression in one go.
pub fn support_for_sources(sources: &SourceSet, grid: &GridSpec, method: SupportMethod) -> Result<SparseSupport> {
    let found = find_support(sources, grid, method)?;
    Ok(compress(build_masks(&found.points, grid)?))
}

/// Per-step, per-affected-point injected amplitudes, time-major `nt x K`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedSource<T> {
    pub nt: usize,
    pub n_affected: usize,
    pub src_dcmp: Vec<T>,
}

impl<T: Real> DecomposedSource<T> {
    #[inline]
    pub fn row(&self, t: usize) -> &[T] {
        &self.src_dcmp[t * self.n_affected..(t + 1) * self.n_affected]
    }

    /// Writes the step-`t` amplitudes onto level `t` of a field via `sid`.
    pub fn scatter(&self, support: &SparseSupport, field: &mut TimeBufferedField<T>, t: usize) {
        for (k, p) in support.points().into_iter().enumerate() {
            field.add(t, p, self.src_dcmp[t * self.n_affected + k]);
        }
    }
}

pub fn decompose_wavefields<T: Real>(
    sources: &SourceSet,
    support: &SparseSupport,
    nt: usize,
) -> Result<DecomposedSource<T>> {
    if nt < sources.nt {
        return Err(invalid(
            "nt",
            format!("{nt} steps cannot hold wavelets of length {}", sources.nt),
        ));
    }
    let k = support.n_affected;
    // (source, id, weight) of every source corner, resolved once
    let mut corners: Vec<(usize, usize, f64)> = Vec::with_capacity(8 * sources.len());
    for s in 0..sources.len() {
        for (p, w) in sources.stencil(s).nonzero() {
            let id = support
                .id(p)
                .ok_or_else(|| invalid("support", format!("point {p:?} of source {s} is not in the support")))?;
            corners.push((s, id, w));
        }
    }
    let mut amp = vec![0.0; sources.len()];
    let mut src_dcmp = vec![T::zero(); nt * k];
    for t in 0..sources.nt {
        for (s, a) in amp.iter_mut().enumerate() {
            *a = sources.amplitude(t, s);
        }
        let row = &mut src_dcmp[t * k..(t + 1) * k];
        for &(s, id, w) in &corners {
            row[id] += T::from_f64_lossy(contribution(w, sources.scale[s], amp[s]));
        }
    }
    Ok(DecomposedSource {
        nt,
        n_affected: k,
        src_dcmp,
    })
}

/// Adds the step-`t` amplitudes of the affected points of row `(x, y)`.
pub fn fused_inject_row<T: Real>(
    field: &mut TimeBufferedField<T>,
    t: usize,
    x: usize,
    y: usize,
    support: &SparseSupport,
    dcmp: &DecomposedSource<T>,
) {
    let (zs, ids) = support.row(x, y);
    let amps = dcmp.row(t);
    for (&z, &id) in zs.iter().zip(ids) {
        field.add(t, [x, y, z as usize], amps[id as usize]);
    }
}

/// # Safety
/// Row `(x, y)` of level `t` must not be accessed by any other thread.
#[inline]
pub(crate) unsafe fn fused_inject_row_raw<T: Real>(
    field: FieldPtr<T>,
    t: usize,
    x: usize,
    y: usize,
    support: &SparseSupport,
    amps: &[T],
) {
    let (zs, ids) = support.row(x, y);
    if zs.is_empty() {
        return;
    }
    let slot = field.slot_back(t, 0);
    let base = field.row_offset(x, y) as isize;
    for (&z, &id) in zs.iter().zip(ids) {
        *field.at(slot, base + z as isize) += amps[id as usize];
    }
}

/// Receiver counterpart of the source structures: a compressed support over
/// all receiver corners plus the weight of each (point, receiver) pair.
///
/// A fused gather over row `(x, y)` writes `weight * value` of each of the
/// row's entries into a per-entry slot; [`ReceiverGather::reduce`] then sums
/// each receiver's entries in corner order, which reproduces the direct
/// measurement bit for bit regardless of the order rows were visited in.
#[derive(Clone, Debug)]
pub struct ReceiverGather {
    pub support: SparseSupport,
    /// Receiver and weight of each entry.
    pub entries: Vec<(u32, f64)>,
    /// Entries grouped per row, CSR over `nx * ny`: `(z, entry)`.
    pub row_ptr: Vec<usize>,
    pub row_entries: Vec<(u32, u32)>,
    /// Entries of each receiver in corner order, CSR over receivers.
    pub rec_ptr: Vec<usize>,
    pub rec_entries: Vec<u32>,
}

pub fn precompute_receivers(receivers: &ReceiverSet, grid: &GridSpec) -> Result<ReceiverGather> {
    let mut entries = Vec::new();
    let mut located = Vec::new();
    let mut rec_ptr = vec![0];
    let mut rec_entries = Vec::new();
    for r in 0..receivers.len() {
        for (p, w) in receivers.stencil(r).nonzero() {
            let e = entries.len() as u32;
            entries.push((r as u32, w));
            located.push((p, e));
            rec_entries.push(e);
        }
        rec_ptr.push(rec_entries.len());
    }
    let pts: Vec<[usize; 3]> = located.iter().map(|(p, _)| *p).collect();
    let support = compress(build_masks(&pts, grid)?);
    located.sort_unstable();
    let [nx, ny, _] = grid.shape;
    let mut row_ptr = vec![0usize; nx * ny + 1];
    for (p, _) in &located {
        row_ptr[p[0] * ny + p[1] + 1] += 1;
    }
    for i in 0..nx * ny {
        row_ptr[i + 1] += row_ptr[i];
    }
    let row_entries = located.iter().map(|(p, e)| (p[2] as u32, *e)).collect();
    Ok(ReceiverGather {
        support,
        entries,
        row_ptr,
        row_entries,
        rec_ptr,
        rec_entries,
    })
}

impl ReceiverGather {
    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn n_receivers(&self) -> usize {
        self.rec_ptr.len() - 1
    }

    #[inline]
    pub fn row(&self, x: usize, y: usize) -> &[(u32, u32)] {
        let r = x * self.support.shape[1] + y;
        &self.row_entries[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Weighted samples of row `(x, y)` written into `partial` (one slot per entry).
    pub fn gather_row<T: Real>(&self, x: usize, y: usize, partial: &mut [T], value: impl Fn(usize) -> T) {
        for &(z, e) in self.row(x, y) {
            partial[e as usize] = T::from_f64_lossy(self.entries[e as usize].1) * value(z as usize);
        }
    }

    /// Per-receiver sums of one step's entry slots, in corner order.
    pub fn reduce<T: Real>(&self, partial: &[T], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for &e in &self.rec_entries[self.rec_ptr[r]..self.rec_ptr[r + 1]] {
                acc += partial[e as usize];
            }
            *o = acc.as_f64();
        }
    }
}

/// Checks every structural invariant of a compressed support; returns a
/// description of the first failure.
pub fn check_support_invariants(s: &SparseSupport) -> std::result::Result<(), String> {
    let k = s.n_affected;
    let mut seen = vec![false; k];
    let mut last: Option<usize> = None;
    for (i, (&m, &id)) in s.sm.iter().zip(&s.sid).enumerate() {
        match (m, id) {
            (0, -1) => {}
            (1, id) if id >= 0 && (id as usize) < k => {
                let id = id as usize;
                if seen[id] {
                    return Err(format!("id {id} assigned twice"));
                }
                seen[id] = true;
                // linear index order is lexicographic (x, y, z) order
                if let Some(prev) = last {
                    if id != prev + 1 {
                        return Err(format!("id {id} at linear index {i} follows id {prev}"));
                    }
                } else if id != 0 {
                    return Err(format!("first id is {id}"));
                }
                last = Some(id);
            }
            _ => return Err(format!("inconsistent sm={m} sid={id} at linear index {i}")),
        }
    }
    if seen.iter().any(|&b| !b) {
        return Err("ids do not cover 0..K".into());
    }
    if !s.is_compressed() {
        return Err("support not compressed".into());
    }
    let [nx, ny, nz] = s.shape;
    let total: u64 = s.nnz_mask.iter().map(|&n| n as u64).sum();
    if total != k as u64 {
        return Err(format!("nnz_mask sums to {total}, K = {k}"));
    }
    let mut rebuilt = vec![0u8; s.sm.len()];
    for x in 0..nx {
        for y in 0..ny {
            let (zs, ids) = s.row(x, y);
            let count = s.nnz(x, y);
            if zs.len() != count {
                return Err(format!("row ({x},{y}) has {} entries, nnz {count}", zs.len()));
            }
            let direct: usize = (0..nz).map(|z| s.mask([x, y, z]) as usize).sum();
            if direct != count {
                return Err(format!("nnz_mask[{x}][{y}] = {count}, mask has {direct}"));
            }
            if zs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("row ({x},{y}) z-indices not strictly increasing"));
            }
            for (&z, &id) in zs.iter().zip(ids) {
                if s.id([x, y, z as usize]) != Some(id as usize) {
                    return Err(format!("sp_id mismatch at ({x},{y},{z})"));
                }
                rebuilt[(x * ny + y) * nz + z as usize] = 1;
            }
        }
    }
    if rebuilt != s.sm {
        return Err("mask rebuilt from sp_z differs".into());
    }
    Ok(())
}
