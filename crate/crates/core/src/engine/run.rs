use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{FieldPtr, GridSpec, Region};
use crate::physics::elastic::ElasticScratch;
use crate::physics::{
    build_damping, default_max_decay,
    elastic::{TAU_NAMES, V_NAMES},
    ricker, AcousticKernel, AcousticModel, ElasticKernel, ElasticModel, Physics,
};
use crate::precompute::{
    decompose_wavefields, fused_inject_row_raw, precompute_receivers, support_for_sources, DecomposedSource,
    ReceiverGather, SparseSupport,
};
use crate::real::Real;
use crate::schedule::{
    enumerate_updates, field_groups, validate_schedule, Command, DependenceSpec, Plan, SparseFootprint, SparseHooks,
    UpdateStream, ValidationReport,
};
use crate::sparse::{contribution, nearest_index, ReceiverSet, SourceSet};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::time::Instant;

/// Steps between two scans of the wavefield for non-finite values.
pub const NAN_CHECK_INTERVAL: usize = 32;

/// Final state of one field, widened to f64 (lossless for 32-bit runs).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldData {
    pub name: String,
    pub shape: [usize; 3],
    /// Time level held, `nt - 1`; zero for runs without steps.
    pub time_index: u64,
    pub precision: u32,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub physics: Physics,
    pub space_order: usize,
    pub shape: [usize; 3],
    pub nt: usize,
    pub dt: f64,
    pub precision: u32,
    pub threads: usize,
    pub schedule: String,
    pub n_sources: usize,
    pub n_receivers: usize,
    /// Stepping wall time, precompute excluded.
    pub elapsed_s: f64,
    pub precompute_s: f64,
    pub gpoints_per_s: f64,
    /// Analytic estimate from operation and compulsory-traffic counts.
    pub arithmetic_intensity: f64,
    pub gflops_per_s_estimate: f64,
    pub checksum: String,
    pub max_abs: f64,
}

impl std::fmt::Display for RunReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} so={} grid={}x{}x{} nt={} dt={:.6e}s fp{} threads={}",
            self.physics.name(),
            self.space_order,
            self.shape[0],
            self.shape[1],
            self.shape[2],
            self.nt,
            self.dt,
            self.precision,
            self.threads
        )?;
        writeln!(f, "schedule: {}", self.schedule)?;
        writeln!(f, "sources: {}  receivers: {}", self.n_sources, self.n_receivers)?;
        writeln!(
            f,
            "elapsed_s: {:.4}  precompute_s: {:.4}",
            self.elapsed_s, self.precompute_s
        )?;
        writeln!(
            f,
            "gpoints_per_s: {:.4}  gflops_per_s (est.): {:.3}  intensity (est., flop/byte): {:.3}",
            self.gpoints_per_s, self.gflops_per_s_estimate, self.arithmetic_intensity
        )?;
        write!(f, "max_abs: {:.6e}  checksum: {}", self.max_abs, self.checksum)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub fields: Vec<FieldData>,
    /// `nt x n_receivers`, time-major.
    pub receivers: Vec<f64>,
    pub n_receivers: usize,
    pub report: RunReport,
}

impl RunOutput {
    pub fn field(&self, name: &str) -> Option<&FieldData> {
        self.fields.iter().find(|f| f.name == name)
    }
}

/// Treats subnormal operands and results as zero on the calling thread.
/// Decaying wave tails otherwise fall into the subnormal range and slow
/// single-precision stepping several-fold.
fn flush_denormals() {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: only sets the FTZ and DAZ bits of this thread's MXCSR.
    unsafe {
        let mut csr: u32 = 0;
        std::arch::asm!("stmxcsr [{}]", in(reg) &mut csr, options(nostack));
        csr |= 0x8040;
        std::arch::asm!("ldmxcsr [{}]", in(reg) &csr, options(nostack));
    }
    #[cfg(target_arch = "aarch64")]
    // SAFETY: only sets the FZ bit of this thread's FPCR.
    unsafe {
        let mut fpcr: u64;
        std::arch::asm!("mrs {}, fpcr", out(reg) fpcr, options(nomem, nostack));
        fpcr |= 1 << 24;
        std::arch::asm!("msr fpcr, {}", in(reg) fpcr, options(nomem, nostack));
    }
}

/// Runs a configuration at its configured precision.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    match config.precision {
        32 => run_typed::<f32>(config, None),
        64 => run_typed::<f64>(config, None),
        p => Err(Error::Config {
            field: "precision".into(),
            reason: format!("must be 32 or 64, got {p}"),
        }),
    }
}

/// Runs with an explicit plan in place of the configured schedule.
pub fn run_with_plan(config: &RunConfig, plan: &Plan) -> Result<RunOutput> {
    match config.precision {
        32 => run_typed::<f32>(config, Some(plan)),
        _ => run_typed::<f64>(config, Some(plan)),
    }
}

enum Model<T> {
    Acoustic(AcousticModel<T>),
    Elastic(ElasticModel<T>),
}

/// Sources, receivers, and the grid points they touch, independent of the
/// field precision.
pub struct SparseSetup {
    pub sources: SourceSet,
    pub receivers: ReceiverSet,
    pub inject_group: usize,
}

impl SparseSetup {
    pub fn new(config: &RunConfig, dt: f64, nt: usize, m: &[f64]) -> Result<Self> {
        let grid = &config.grid;
        let srcs = config.all_sources();
        let mut coords = Vec::with_capacity(srcs.len());
        let mut wavelets = Vec::with_capacity(srcs.len());
        let mut scale = Vec::with_capacity(srcs.len());
        for s in &srcs {
            coords.push(s.coords_m);
            if nt == 0 {
                wavelets.push(Vec::new());
            } else {
                let t0 = s.t0_s.unwrap_or(1.0 / s.f0_hz);
                wavelets.push(ricker(s.f0_hz, t0, dt, nt, s.amplitude)?.samples);
            }
            scale.push(match config.physics {
                Physics::Acoustic => {
                    let p = nearest_index(s.coords_m, grid)?;
                    dt * dt / m[(p[0] * grid.shape[1] + p[1]) * grid.shape[2] + p[2]]
                }
                Physics::Elastic => dt,
            });
        }
        Ok(SparseSetup {
            sources: SourceSet::new(grid, coords, &wavelets, scale)?,
            receivers: ReceiverSet::new(grid, config.receivers.clone(), nt)?,
            inject_group: match config.physics {
                Physics::Acoustic => 0,
                Physics::Elastic => 1,
            },
        })
    }

    pub fn hooks(&self) -> SparseHooks {
        SparseHooks {
            inject: (!self.sources.is_empty()).then_some(self.inject_group),
            gather: (!self.receivers.is_empty()).then_some(self.inject_group),
        }
    }

    pub fn footprint(&self) -> SparseFootprint {
        let mut inject_points: Vec<[usize; 3]> = self
            .sources
            .stencils()
            .iter()
            .flat_map(|s| s.nonzero().map(|(p, _)| p))
            .collect();
        inject_points.sort_unstable();
        inject_points.dedup();
        let mut gather_points: Vec<[usize; 3]> = (0..self.receivers.len())
            .flat_map(|r| self.receivers.stencil(r).nonzero().map(|(p, _)| p).collect::<Vec<_>>())
            .collect();
        gather_points.sort_unstable();
        gather_points.dedup();
        let hooks = self.hooks();
        SparseFootprint {
            inject_group: hooks.inject,
            inject_points,
            gather_group: hooks.gather,
            gather_points,
        }
    }
}

fn slowness_squared(config: &RunConfig) -> Vec<f64> {
    config
        .medium
        .build(&config.grid)
        .vp
        .iter()
        .map(|v| 1.0 / (v * v))
        .collect()
}

/// Command stream of `plan` for `config`, replayed through the validator.
pub fn validate_config(config: &RunConfig, plan: &Plan) -> Result<(UpdateStream, ValidationReport)> {
    let dt = config.dt()?;
    let nt = config.num_steps()?;
    let sparse = SparseSetup::new(config, dt, nt, &slowness_squared(config))?;
    let groups = field_groups(config.physics, config.space_order);
    let stream = enumerate_updates(plan, &config.grid, &groups, nt, sparse.hooks());
    let deps = DependenceSpec::for_physics(config.physics, config.space_order, &config.grid);
    let report = validate_schedule(&stream, &deps, &config.grid, &sparse.footprint());
    Ok((stream, report))
}

fn build_model<T: Real>(config: &RunConfig, dt: f64) -> Result<Model<T>> {
    let grid = &config.grid;
    let medium = config.medium.build(grid);
    let max_decay = config
        .damp_max
        .unwrap_or_else(|| default_max_decay(grid, config.medium.max_velocity()));
    let damp = build_damping(grid, max_decay);
    Ok(match config.physics {
        Physics::Acoustic => {
            let m = medium.vp.iter().map(|v| 1.0 / (v * v)).collect();
            Model::Acoustic(AcousticModel::new(grid, config.space_order, dt, m, damp)?)
        }
        Physics::Elastic => {
            let mu: Vec<f64> = medium.rho.iter().zip(&medium.vs).map(|(r, s)| r * s * s).collect();
            let lam = medium
                .rho
                .iter()
                .zip(&medium.vp)
                .zip(&mu)
                .map(|((r, p), m)| r * p * p - 2.0 * m)
                .collect();
            Model::Elastic(ElasticModel::new(
                grid,
                config.space_order,
                dt,
                lam,
                mu,
                medium.rho,
                damp,
            )?)
        }
    })
}

/// Shared, read-only precomputed structures of the fused sparse operators.
struct Fused<T> {
    inject: Option<(SparseSupport, DecomposedSource<T>)>,
    gather: Option<ReceiverGather>,
}

#[derive(Clone, Copy)]
struct PartialPtr<T>(*mut T);

// SAFETY: every gather entry belongs to one grid point, and each point is
// gathered by exactly one task per step, so concurrent writes are disjoint.
unsafe impl<T: Send> Send for PartialPtr<T> {}
unsafe impl<T: Sync> Sync for PartialPtr<T> {}

enum Kernels<'a, T> {
    Acoustic {
        k: &'a AcousticKernel<T>,
        u: FieldPtr<T>,
    },
    Elastic {
        k: &'a ElasticKernel<T>,
        v: [FieldPtr<T>; 3],
        tau: [FieldPtr<T>; 6],
    },
}

/// Fields into which sources inject and whose sum receivers record.
impl<T: Copy> Kernels<'_, T> {
    fn sparse_fields(&self) -> Vec<FieldPtr<T>> {
        match self {
            Kernels::Acoustic { u, .. } => vec![*u],
            Kernels::Elastic { tau, .. } => vec![tau[0], tau[1], tau[2]],
        }
    }

    fn group_fields(&self, group: usize) -> Vec<FieldPtr<T>> {
        match self {
            Kernels::Acoustic { u, .. } => vec![*u],
            Kernels::Elastic { v, .. } if group == 0 => v.to_vec(),
            Kernels::Elastic { tau, .. } => tau.to_vec(),
        }
    }
}

struct Exec<'a, T> {
    kernels: Kernels<'a, T>,
    sparse_fields: Vec<FieldPtr<T>>,
    fused: &'a Fused<T>,
    partial: PartialPtr<T>,
    ring: usize,
    shape: [usize; 3],
}

#[derive(Clone, Copy, Debug)]
struct Task {
    group: usize,
    t: usize,
    region: Region,
    inject: bool,
    gather: bool,
}

struct Scratch<T> {
    acc: Vec<T>,
    elastic: ElasticScratch<T>,
}

impl<T> Default for Scratch<T> {
    fn default() -> Self {
        Scratch {
            acc: Vec::new(),
            elastic: ElasticScratch::default(),
        }
    }
}

/// Sum of the sparse fields at one point of level `t`, left to right.
#[inline]
unsafe fn sparse_value<T: Real>(fields: &[FieldPtr<T>], t: usize, offset: isize) -> T {
    let slot = fields[0].slot_back(t, 0);
    let mut v = *fields[0].at(slot, offset);
    for f in &fields[1..] {
        v = v + *f.at(slot, offset);
    }
    v
}

impl<T: Real> Exec<'_, T> {
    /// # Safety
    /// No other concurrently running task may touch `task.region`.
    unsafe fn run_task(&self, task: &Task, scratch: &mut Scratch<T>) {
        let Region { lo, hi } = task.region;
        debug_assert!(lo[2] == 0 && hi[2] == self.shape[2], "rows are swept whole");
        let amps = if task.inject {
            self.fused.inject.as_ref().map(|(s, d)| (s, d.row(task.t)))
        } else {
            None
        };
        let gather = if task.gather { self.fused.gather.as_ref() } else { None };
        for x in lo[0]..hi[0] {
            for y in lo[1]..hi[1] {
                match &self.kernels {
                    Kernels::Acoustic { k, u } => k.row(*u, task.t, x, y, lo[2], hi[2], &mut scratch.acc),
                    Kernels::Elastic { k, v, tau } if task.group == 0 => {
                        k.velocity_row(v, tau, task.t, x, y, lo[2], hi[2], &mut scratch.elastic)
                    }
                    Kernels::Elastic { k, v, tau } => {
                        k.stress_row(v, tau, task.t, x, y, lo[2], hi[2], &mut scratch.elastic)
                    }
                }
                if let Some((support, amps)) = amps {
                    for f in &self.sparse_fields {
                        fused_inject_row_raw(*f, task.t, x, y, support, amps);
                    }
                }
                if let Some(g) = gather {
                    let row = g.row(x, y);
                    if !row.is_empty() {
                        let base = self.sparse_fields[0].row_offset(x, y) as isize;
                        let slot = (task.t % self.ring) * g.n_entries();
                        for &(z, e) in row {
                            let w = T::from_f64_lossy(g.entries[e as usize].1);
                            let value = sparse_value(&self.sparse_fields, task.t, base + z as isize);
                            *self.partial.0.add(slot + e as usize) = w * value;
                        }
                    }
                }
            }
        }
    }
}

/// Splits tasks along x when there are too few to keep every thread busy.
fn split_tasks(tasks: Vec<Task>, threads: usize) -> Vec<Task> {
    if threads <= 1 || tasks.len() >= 2 * threads {
        return tasks;
    }
    let mut out = Vec::new();
    for task in tasks {
        let Region { lo, hi } = task.region;
        let pieces = (2 * threads).min(hi[0] - lo[0]).max(1);
        let step = (hi[0] - lo[0]).div_ceil(pieces);
        let mut x = lo[0];
        while x < hi[0] {
            let x1 = (x + step).min(hi[0]);
            out.push(Task {
                region: Region::new([x, lo[1], lo[2]], [x1, hi[1], hi[2]]),
                ..task
            });
            x = x1;
        }
    }
    out
}

struct Stepper<'a, T> {
    exec: Exec<'a, T>,
    sources: &'a SourceSet,
    receivers: &'a mut ReceiverSet,
    partials: Vec<T>,
    reduced_upto: usize,
    checked_upto: usize,
    threads: usize,
}

impl<T: Real> Stepper<'_, T> {
    fn flush(&self, tasks: &mut Vec<Task>) {
        if tasks.is_empty() {
            return;
        }
        let work = split_tasks(std::mem::take(tasks), self.threads);
        let exec = &self.exec;
        if self.threads <= 1 || work.len() == 1 {
            let mut scratch = Scratch::default();
            for task in &work {
                // SAFETY: tasks of one block set run one after another here.
                unsafe { exec.run_task(task, &mut scratch) };
            }
        } else {
            work.par_iter().for_each_init(Scratch::default, |scratch, task| {
                // SAFETY: tasks of a block set cover disjoint regions.
                unsafe { exec.run_task(task, scratch) }
            });
        }
    }

    fn direct_inject(&self, t: usize) {
        let fields = &self.exec.sparse_fields;
        for s in 0..self.sources.len() {
            let amp = self.sources.amplitude(t, s);
            for (p, w) in self.sources.stencil(s).nonzero() {
                let add = T::from_f64_lossy(contribution(w, self.sources.scale[s], amp));
                for f in fields {
                    let off = (f.row_offset(p[0], p[1]) + p[2]) as isize;
                    // SAFETY: sequential; offset inside the interior.
                    unsafe { *f.at(f.slot_back(t, 0), off) += add };
                }
            }
        }
    }

    fn direct_record(&mut self, t: usize) {
        let fields = &self.exec.sparse_fields;
        self.receivers.record_with(t, |p| {
            let off = (fields[0].row_offset(p[0], p[1]) + p[2]) as isize;
            // SAFETY: sequential read of an interior point.
            unsafe { sparse_value(fields, t, off) }
        });
    }

    fn checkpoint(&mut self, t: usize) -> Result<()> {
        if let Some(g) = &self.exec.fused.gather {
            let n = g.n_entries();
            let nrec = self.receivers.len();
            for tt in self.reduced_upto..=t {
                let slot = (tt % self.exec.ring) * n;
                g.reduce(
                    &self.partials[slot..slot + n],
                    &mut self.receivers.data[tt * nrec..(tt + 1) * nrec],
                );
            }
        }
        self.reduced_upto = t + 1;
        if (t + 1) / NAN_CHECK_INTERVAL > self.checked_upto / NAN_CHECK_INTERVAL || t + 1 == self.exec_nt() {
            self.checked_upto = t + 1;
            if !self.finite_at(t) {
                return Err(Error::Unstable { step: t });
            }
        }
        Ok(())
    }

    fn exec_nt(&self) -> usize {
        self.receivers.nt
    }

    fn finite_at(&self, t: usize) -> bool {
        let [nx, ny, nz] = self.exec.shape;
        let groups = match self.exec.kernels {
            Kernels::Acoustic { .. } => 1,
            Kernels::Elastic { .. } => 2,
        };
        (0..groups).all(|g| {
            self.exec.kernels.group_fields(g).iter().all(|f| {
                let slot = f.slot_back(t, 0);
                (0..nx).all(|x| {
                    (0..ny).all(|y| {
                        // SAFETY: no task is running between block sets.
                        let row = unsafe { std::slice::from_raw_parts(f.at(slot, f.row_offset(x, y) as isize), nz) };
                        row.iter().all(|v| v.is_finite())
                    })
                })
            })
        })
    }

    fn execute(&mut self, stream: &UpdateStream) -> Result<()> {
        let mut tasks: Vec<Task> = Vec::new();
        for cmd in &stream.commands {
            match *cmd {
                Command::Stencil { group, t, region } => tasks.push(Task {
                    group,
                    t,
                    region,
                    inject: false,
                    gather: false,
                }),
                Command::FusedInject { region, .. } => {
                    let last = tasks.last_mut().filter(|k| k.region == region);
                    last.expect("fused injection follows its stencil").inject = true;
                }
                Command::FusedGather { region, .. } => {
                    let last = tasks.last_mut().filter(|k| k.region == region);
                    last.expect("fused gather follows its stencil").gather = true;
                }
                Command::DirectInject { t, .. } => {
                    self.flush(&mut tasks);
                    self.direct_inject(t);
                }
                Command::DirectRecord { t, .. } => {
                    self.flush(&mut tasks);
                    self.direct_record(t);
                }
                Command::Barrier => self.flush(&mut tasks),
                Command::Checkpoint { t } => {
                    self.flush(&mut tasks);
                    self.checkpoint(t)?;
                }
            }
        }
        self.flush(&mut tasks);
        Ok(())
    }
}

fn final_fields<T: Real>(model: &Model<T>, nt: usize, grid: &GridSpec) -> Vec<FieldData> {
    let level = nt.saturating_sub(1);
    let wrap = |name: &str, f: &crate::grid::TimeBufferedField<T>| {
        let values = if nt == 0 {
            vec![0.0; grid.num_points()]
        } else {
            f.interior(level).into_iter().map(Real::as_f64).collect()
        };
        FieldData {
            name: name.to_string(),
            shape: grid.shape,
            time_index: level as u64,
            precision: T::BITS,
            values,
        }
    };
    match model {
        Model::Acoustic(m) => vec![wrap("u", &m.u)],
        Model::Elastic(m) => V_NAMES
            .iter()
            .zip(&m.v)
            .chain(TAU_NAMES.iter().zip(&m.tau))
            .map(|(n, f)| wrap(n, f))
            .collect(),
    }
}

/// SHA-256 over the native-precision bytes of every final field followed by
/// the receiver samples, first 16 hex digits.
fn checksum<T: Real>(fields: &[FieldData], receivers: &[f64]) -> String {
    let mut h = Sha256::new();
    let mut buf = Vec::new();
    for f in fields {
        h.update(f.name.as_bytes());
        buf.clear();
        for &v in &f.values {
            T::from_f64_lossy(v).write_le(&mut buf);
        }
        h.update(&buf);
    }
    for &v in receivers {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn run_typed<T: Real>(config: &RunConfig, plan_override: Option<&Plan>) -> Result<RunOutput> {
    config.validate()?;
    let grid = &config.grid;
    let dt = config.dt()?;
    let nt = config.num_steps()?;
    let threads = config.thread_count();
    let plan = match plan_override {
        Some(p) => p.clone(),
        None => config.plan()?,
    };
    let mut model = build_model::<T>(config, dt)?;
    let m = match &model {
        Model::Acoustic(a) => a.m.clone(),
        Model::Elastic(_) => Vec::new(),
    };
    let mut sparse = SparseSetup::new(config, dt, nt, &m)?;
    let hooks = sparse.hooks();
    let groups = field_groups(config.physics, config.space_order);
    let stream = enumerate_updates(&plan, grid, &groups, nt, hooks);
    if config.validate {
        let deps = DependenceSpec::for_physics(config.physics, config.space_order, grid);
        let report = validate_schedule(&stream, &deps, grid, &sparse.footprint());
        if !report.is_legal() {
            return Err(Error::IllegalSchedule {
                count: report.total,
                first: report.violations[0].to_string(),
            });
        }
    }

    let pre = Instant::now();
    let fused = if plan.uses_fused_sparse_ops() {
        let inject = match hooks.inject {
            Some(_) => {
                let support = support_for_sources(&sparse.sources, grid, config.support_method)?;
                let dcmp = decompose_wavefields::<T>(&sparse.sources, &support, nt)?;
                Some((support, dcmp))
            }
            None => None,
        };
        let gather = match hooks.gather {
            Some(_) => Some(precompute_receivers(&sparse.receivers, grid)?),
            None => None,
        };
        Fused { inject, gather }
    } else {
        Fused {
            inject: None,
            gather: None,
        }
    };
    let precompute_s = pre.elapsed().as_secs_f64();

    let ring = match &plan {
        Plan::Wavefront(p) => p.time_height,
        _ => 1,
    };
    let n_entries = fused.gather.as_ref().map_or(0, ReceiverGather::n_entries);
    let (kernels, flops) = match &mut model {
        Model::Acoustic(a) => {
            let u = a.u.raw();
            (Kernels::Acoustic { k: &a.kernel, u }, a.kernel.flops_per_point())
        }
        Model::Elastic(e) => {
            let (v, tau) = e.raw();
            (Kernels::Elastic { k: &e.kernel, v, tau }, e.kernel.flops_per_point())
        }
    };
    let sparse_fields = kernels.sparse_fields();
    let mut partials = vec![T::zero(); ring * n_entries];
    let exec = Exec {
        kernels,
        sparse_fields,
        fused: &fused,
        partial: PartialPtr(partials.as_mut_ptr()),
        ring,
        shape: grid.shape,
    };
    let mut stepper = Stepper {
        exec,
        sources: &sparse.sources,
        receivers: &mut sparse.receivers,
        partials,
        reduced_upto: 0,
        checked_upto: 0,
        threads,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .start_handler(|_| flush_denormals())
        .build()
        .map_err(|e| crate::error::invalid("threads", e.to_string()))?;
    let start = Instant::now();
    pool.install(|| stepper.execute(&stream))?;
    let elapsed_s = start.elapsed().as_secs_f64();
    drop(stepper);

    let fields = final_fields(&model, nt, grid);
    let receivers = std::mem::take(&mut sparse.receivers.data);
    let checksum = checksum::<T>(&fields, &receivers);
    let max_abs = fields
        .iter()
        .flat_map(|f| f.values.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let updates = (grid.num_points() * nt * config.physics.fields_updated()) as f64;
    let gpoints_per_s = if elapsed_s > 0.0 {
        updates / elapsed_s / 1e9
    } else {
        0.0
    };
    let arithmetic_intensity = intensity(config.physics, flops, T::BITS);
    let gflops_per_s_estimate = gpoints_per_s / config.physics.fields_updated() as f64 * flops as f64;
    log::info!("ran {} steps of {} in {:.3}s", nt, plan, elapsed_s);
    Ok(RunOutput {
        report: RunReport {
            physics: config.physics,
            space_order: config.space_order,
            shape: grid.shape,
            nt,
            dt,
            precision: T::BITS,
            threads,
            schedule: plan.to_string(),
            n_sources: sparse.sources.len(),
            n_receivers: sparse.receivers.len(),
            elapsed_s,
            precompute_s,
            gpoints_per_s,
            arithmetic_intensity,
            gflops_per_s_estimate,
            checksum,
            max_abs,
        },
        fields,
        receivers,
        n_receivers: config.receivers.len(),
    })
}

/// Flops per grid point per step over compulsory bytes moved per point:
/// every time level read or written once plus the coefficient arrays.
fn intensity(physics: Physics, flops_per_point: usize, bits: u32) -> f64 {
    let words = match physics {
        // u at t, t-1, t-2 plus dt^2/m and damping
        Physics::Acoustic => 5.0,
        // nine fields read and written plus four coefficient arrays
        Physics::Elastic => 22.0,
    };
    flops_per_point as f64 / (words * bits as f64 / 8.0)
}
