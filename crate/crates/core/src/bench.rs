//! Parameter sweeps, speedup suites, and the source-density suite.

use crate::engine::{run, RandomSources, RunConfig, ScheduleConfig, ScheduleKind, SourceLayout};
use crate::error::{Error, Result};
use crate::physics::Physics;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Candidate shapes of a sweep. Space-blocked configs only sweep `blocks`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub tiles: Vec<[usize; 2]>,
    pub blocks: Vec<[usize; 2]>,
    #[serde(default)]
    pub time_heights: Vec<usize>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub warmup: usize,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let s: SweepSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(s)
    }

    pub fn validate(&self, kind: ScheduleKind) -> Result<()> {
        let field = |f: &str, r: &str| Error::Config {
            field: f.to_string(),
            reason: r.to_string(),
        };
        if self.blocks.is_empty() {
            return Err(field("blocks", "need at least one candidate"));
        }
        if kind == ScheduleKind::Wavefront {
            if self.tiles.is_empty() {
                return Err(field("tiles", "need at least one candidate"));
            }
            if self.time_heights.is_empty() {
                return Err(field("time_heights", "need at least one candidate"));
            }
        }
        if self.repetitions == 0 {
            return Err(field("repetitions", "must be >= 1"));
        }
        Ok(())
    }

    /// Candidate schedules in traversal order: time height, then tile, then block.
    pub fn candidates(&self, kind: ScheduleKind) -> Vec<ScheduleConfig> {
        match kind {
            ScheduleKind::Wavefront => {
                let mut out = Vec::new();
                for &t in &self.time_heights {
                    for &tile in &self.tiles {
                        for &block in &self.blocks {
                            out.push(ScheduleConfig::wavefront(tile, t, block));
                        }
                    }
                }
                out
            }
            _ => self.blocks.iter().map(|&b| ScheduleConfig::space(b)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuneRow {
    pub schedule: ScheduleConfig,
    /// Median over repetitions; `None` when skipped.
    pub gpoints_per_s: Option<f64>,
    pub skipped: Option<String>,
    pub best: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneResult {
    pub physics: Physics,
    pub space_order: usize,
    pub shape: [usize; 3],
    pub rows: Vec<TuneRow>,
}

impl TuneResult {
    pub fn best(&self) -> Option<&TuneRow> {
        self.rows.iter().find(|r| r.best)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "physics",
            "space_order",
            "grid",
            "schedule",
            "T",
            "tile",
            "block",
            "status",
            "gpoints_per_s",
            "best",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            let s = &r.schedule;
            let wavefront = s.kind == ScheduleKind::Wavefront;
            w.write_record([
                self.physics.name().to_string(),
                self.space_order.to_string(),
                shape3(self.shape),
                kind_name(s.kind).to_string(),
                if wavefront {
                    s.time_height.to_string()
                } else {
                    String::new()
                },
                if wavefront { shape2(s.tile) } else { String::new() },
                shape2(s.block),
                r.skipped
                    .as_ref()
                    .map_or("ok".to_string(), |why| format!("skipped: {why}")),
                r.gpoints_per_s.map_or(String::new(), |g| format!("{g:.6}")),
                if r.best { "*".to_string() } else { String::new() },
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

fn kind_name(k: ScheduleKind) -> &'static str {
    match k {
        ScheduleKind::Naive => "naive",
        ScheduleKind::Fused => "fused",
        ScheduleKind::Space => "space",
        ScheduleKind::Wavefront => "wavefront",
    }
}

pub fn shape2(s: [usize; 2]) -> String {
    format!("{}x{}", s[0], s[1])
}

pub fn shape3(s: [usize; 3]) -> String {
    format!("{}x{}x{}", s[0], s[1], s[2])
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median throughput of `config` over `repetitions` timed runs.
pub fn measure(config: &RunConfig, repetitions: usize, warmup: usize) -> Result<f64> {
    for _ in 0..warmup {
        run(config)?;
    }
    let mut g = Vec::with_capacity(repetitions);
    for _ in 0..repetitions.max(1) {
        g.push(run(config)?.report.gpoints_per_s);
    }
    Ok(median(g))
}

/// Sweeps the candidates of the configured schedule kind. Candidates that do
/// not form a valid plan are recorded as skipped.
pub fn cmd_tune(config: &RunConfig, sweep: &SweepSpec) -> Result<TuneResult> {
    let kind = match config.schedule.kind {
        ScheduleKind::Wavefront => ScheduleKind::Wavefront,
        _ => ScheduleKind::Space,
    };
    sweep.validate(kind)?;
    let mut rows = Vec::new();
    for schedule in sweep.candidates(kind) {
        let mut c = config.clone();
        c.schedule = schedule.clone();
        let row = match c.plan() {
            Err(e) => TuneRow {
                schedule,
                gpoints_per_s: None,
                skipped: Some(e.to_string()),
                best: false,
            },
            Ok(_) => TuneRow {
                gpoints_per_s: Some(measure(&c, sweep.repetitions, sweep.warmup)?),
                schedule,
                skipped: None,
                best: false,
            },
        };
        log::info!("tune {:?}: {:?}", row.schedule, row.gpoints_per_s);
        rows.push(row);
    }
    // first of equal maxima wins, keeping the choice deterministic
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in rows.iter().enumerate() {
        if let Some(g) = r.gpoints_per_s {
            if best.map_or(true, |(_, b)| g > b) {
                best = Some((i, g));
            }
        }
    }
    if let Some((i, _)) = best {
        rows[i].best = true;
    }
    Ok(TuneResult {
        physics: config.physics,
        space_order: config.space_order,
        shape: config.grid.shape,
        rows,
    })
}

/// One line of a speedup suite: a config plus the sweeps of both schedules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchEntry {
    /// Path relative to the suite file, or an inline config.
    #[serde(default)]
    pub config_path: Option<PathBuf>,
    #[serde(default)]
    pub config: Option<RunConfig>,
    /// Candidates of the space-blocked baseline (only `blocks` is used).
    pub baseline: SweepSpec,
    pub wavefront: SweepSpec,
}

/// Source-density suite: the same run with N sources on a plane and N
/// sources spread through the volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub config: RunConfig,
    #[serde(default = "default_counts")]
    pub counts: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
}

fn default_counts() -> Vec<usize> {
    vec![1, 10, 100, 1000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    #[serde(default)]
    pub entries: Vec<BenchEntry>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
}

impl BenchSuite {
    pub fn load(path: &Path) -> Result<Self> {
        let mut s: BenchSuite = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for e in &mut s.entries {
            if let Some(p) = &e.config_path {
                if p.is_relative() {
                    e.config_path = Some(dir.join(p));
                }
            }
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub physics: Option<Physics>,
    pub space_order: usize,
    pub shape: [usize; 3],
    pub best_wavefront: Option<ScheduleConfig>,
    pub baseline_gpts: Option<f64>,
    pub wtb_gpts: Option<f64>,
    pub error: Option<String>,
}

impl BenchRow {
    /// Wavefront throughput over the space-blocked baseline.
    pub fn speedup(&self) -> Option<f64> {
        match (self.baseline_gpts, self.wtb_gpts) {
            (Some(b), Some(w)) if b > 0.0 => Some(w / b),
            _ => None,
        }
    }
}

fn bench_entry(entry: &BenchEntry) -> Result<BenchRow> {
    let config = match (&entry.config, &entry.config_path) {
        (Some(c), _) => {
            c.validate()?;
            c.clone()
        }
        (None, Some(p)) => RunConfig::load(p)?,
        (None, None) => {
            return Err(Error::Config {
                field: "config".into(),
                reason: "entry needs config or config_path".into(),
            })
        }
    };
    let mut base = config.clone();
    base.schedule.kind = ScheduleKind::Space;
    let b = cmd_tune(&base, &entry.baseline)?;
    let mut wave = config.clone();
    wave.schedule.kind = ScheduleKind::Wavefront;
    let w = cmd_tune(&wave, &entry.wavefront)?;
    Ok(BenchRow {
        physics: Some(config.physics),
        space_order: config.space_order,
        shape: config.grid.shape,
        best_wavefront: w.best().map(|r| r.schedule.clone()),
        baseline_gpts: b.best().and_then(|r| r.gpoints_per_s),
        wtb_gpts: w.best().and_then(|r| r.gpoints_per_s),
        error: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub layout: SourceLayout,
    pub n_sources: usize,
    pub gpoints_per_s: f64,
    pub precompute_s: f64,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub density: Vec<DensityRow>,
}

impl BenchOutput {
    pub fn speedup_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "physics",
            "space_order",
            "grid",
            "T",
            "tile",
            "block",
            "baseline_gpts",
            "wtb_gpts",
            "speedup",
            "status",
        ])
        .map_err(csv_err)?;
        let num = |v: Option<f64>| v.map_or(String::new(), |g| format!("{g:.6}"));
        for r in &self.rows {
            let s = r.best_wavefront.as_ref();
            w.write_record([
                r.physics.map_or(String::new(), |p| p.name().to_string()),
                r.space_order.to_string(),
                shape3(r.shape),
                s.map_or(String::new(), |s| s.time_height.to_string()),
                s.map_or(String::new(), |s| shape2(s.tile)),
                s.map_or(String::new(), |s| shape2(s.block)),
                num(r.baseline_gpts),
                num(r.wtb_gpts),
                r.speedup().map_or(String::new(), |v| format!("{v:.4}")),
                r.error.as_ref().map_or("ok".to_string(), |e| format!("error: {e}")),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }

    pub fn density_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["layout", "n_sources", "gpoints_per_s", "precompute_s", "elapsed_s"])
            .map_err(csv_err)?;
        for r in &self.density {
            w.write_record([
                match r.layout {
                    SourceLayout::Plane => "plane",
                    SourceLayout::Uniform => "uniform",
                }
                .to_string(),
                r.n_sources.to_string(),
                format!("{:.6}", r.gpoints_per_s),
                format!("{:.6}", r.precompute_s),
                format!("{:.6}", r.elapsed_s),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

/// Configs of the source-density suite, plane layouts first.
pub fn density_suite(spec: &DensitySpec) -> Vec<(SourceLayout, usize, RunConfig)> {
    let mut out = Vec::new();
    for layout in [SourceLayout::Plane, SourceLayout::Uniform] {
        for &n in &spec.counts {
            let mut c = spec.config.clone();
            let f0 = c.sources.first().map_or(10.0, |s| s.f0_hz);
            c.sources.clear();
            c.random_sources = Some(RandomSources {
                count: n,
                seed: spec.seed,
                layout,
                plane_z_m: None,
                f0_hz: f0,
                amplitude: 1.0,
            });
            out.push((layout, n, c));
        }
    }
    out
}

/// Runs every entry and the density suite; failing entries are recorded and
/// the suite continues.
pub fn cmd_bench(suite: &BenchSuite) -> Result<BenchOutput> {
    let mut rows = Vec::new();
    for entry in &suite.entries {
        let row = bench_entry(entry).unwrap_or_else(|e| {
            log::warn!("bench entry failed: {e}");
            let c = entry.config.as_ref();
            BenchRow {
                physics: c.map(|c| c.physics),
                space_order: c.map_or(0, |c| c.space_order),
                shape: c.map_or([0; 3], |c| c.grid.shape),
                best_wavefront: None,
                baseline_gpts: None,
                wtb_gpts: None,
                error: Some(e.to_string()),
            }
        });
        rows.push(row);
    }
    let mut density = Vec::new();
    if let Some(spec) = &suite.density {
        for (layout, n, c) in density_suite(spec) {
            let mut g = Vec::new();
            let mut last = None;
            for _ in 0..spec.repetitions.max(1) {
                let out = run(&c)?;
                g.push(out.report.gpoints_per_s);
                last = Some(out.report);
            }
            let r = last.expect("at least one repetition");
            density.push(DensityRow {
                layout,
                n_sources: n,
                gpoints_per_s: median(g),
                precompute_s: r.precompute_s,
                elapsed_s: r.elapsed_s,
            });
        }
    }
    Ok(BenchOutput { rows, density })
}
