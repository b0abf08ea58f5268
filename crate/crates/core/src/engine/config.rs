use crate::error::{Error, Result};
use crate::grid::{cfl_dt, GridSpec};
use crate::physics::{stencil_stability_factor, Physics};
use crate::precompute::SupportMethod;
use crate::schedule::{field_groups, make_space_plan, make_wavefront_plan, Plan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Environment variable consulted when no thread count is configured.
pub const THREADS_ENV: &str = "STENCIL_TB_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Naive,
    Fused,
    #[default]
    Space,
    Wavefront,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub kind: ScheduleKind,
    #[serde(default = "default_block")]
    pub block: [usize; 2],
    #[serde(default = "default_tile")]
    pub tile: [usize; 2],
    #[serde(default = "default_time_height")]
    pub time_height: usize,
}

fn default_block() -> [usize; 2] {
    [8, 8]
}

fn default_tile() -> [usize; 2] {
    [32, 32]
}

fn default_time_height() -> usize {
    4
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            kind: ScheduleKind::default(),
            block: default_block(),
            tile: default_tile(),
            time_height: default_time_height(),
        }
    }
}

impl ScheduleConfig {
    pub fn naive() -> Self {
        ScheduleConfig {
            kind: ScheduleKind::Naive,
            ..Default::default()
        }
    }

    pub fn fused() -> Self {
        ScheduleConfig {
            kind: ScheduleKind::Fused,
            ..Default::default()
        }
    }

    pub fn space(block: [usize; 2]) -> Self {
        ScheduleConfig {
            kind: ScheduleKind::Space,
            block,
            ..Default::default()
        }
    }

    pub fn wavefront(tile: [usize; 2], time_height: usize, block: [usize; 2]) -> Self {
        ScheduleConfig {
            kind: ScheduleKind::Wavefront,
            block,
            tile,
            time_height,
        }
    }
}

/// One point source with a Ricker wavelet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub coords_m: [f64; 3],
    #[serde(default = "default_f0")]
    pub f0_hz: f64,
    /// Wavelet delay; one period when absent.
    #[serde(default)]
    pub t0_s: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn default_f0() -> f64 {
    10.0
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceLayout {
    /// Uniformly distributed over the physical region.
    #[default]
    Uniform,
    /// Uniformly distributed over the x-y plane at `plane_z_m`.
    Plane,
}

/// Randomly placed sources drawn from a seeded generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSources {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub layout: SourceLayout,
    /// Depth of the plane layout; the middle of the grid when absent.
    #[serde(default)]
    pub plane_z_m: Option<f64>,
    #[serde(default = "default_f0")]
    pub f0_hz: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

/// Horizontal layer starting at depth `z_top_m` (along the last axis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub z_top_m: f64,
    pub velocity_mps: f64,
    #[serde(default)]
    pub vs_mps: Option<f64>,
    #[serde(default)]
    pub density_kgm3: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    #[serde(default = "default_vp")]
    pub velocity_mps: f64,
    /// Shear velocity for elastic runs; `velocity / sqrt(3)` when absent.
    #[serde(default)]
    pub vs_mps: Option<f64>,
    #[serde(default = "default_rho")]
    pub density_kgm3: f64,
    /// Layers overriding the background below their top, sorted by depth.
    #[serde(default)]
    pub layers: Vec<Layer>,
}

fn default_vp() -> f64 {
    1500.0
}

fn default_rho() -> f64 {
    1000.0
}

impl Default for MediumConfig {
    fn default() -> Self {
        MediumConfig {
            velocity_mps: default_vp(),
            vs_mps: None,
            density_kgm3: default_rho(),
            layers: Vec::new(),
        }
    }
}

/// Per-point P velocity, S velocity, and density.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium {
    pub vp: Vec<f64>,
    pub vs: Vec<f64>,
    pub rho: Vec<f64>,
}

impl MediumConfig {
    fn background_vs(&self, vp: f64, vs: Option<f64>) -> f64 {
        vs.unwrap_or(vp / 3f64.sqrt())
    }

    pub fn max_velocity(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.velocity_mps)
            .fold(self.velocity_mps, f64::max)
    }

    pub fn build(&self, grid: &GridSpec) -> Medium {
        let n = grid.num_points();
        let mut vp = vec![self.velocity_mps; n];
        let mut vs = vec![self.background_vs(self.velocity_mps, self.vs_mps); n];
        let mut rho = vec![self.density_kgm3; n];
        for (i, p) in grid.full_region().points().enumerate() {
            let z = grid.coord_of(p)[2];
            for l in self.layers.iter().filter(|l| z >= l.z_top_m) {
                vp[i] = l.velocity_mps;
                vs[i] = self.background_vs(l.velocity_mps, l.vs_mps);
                rho[i] = l.density_kgm3.unwrap_or(self.density_kgm3);
            }
        }
        Medium { vp, vs, rho }
    }
}

/// Everything needed to run one propagation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physics: Physics,
    pub grid: GridSpec,
    pub space_order: usize,
    /// Number of steps; derived from `time_ms` when absent.
    #[serde(default)]
    pub nt: Option<usize>,
    #[serde(default)]
    pub time_ms: Option<f64>,
    /// Explicit time step, bypassing the stability bound.
    #[serde(default)]
    pub dt_s: Option<f64>,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub medium: MediumConfig,
    /// Peak damping coefficient (1/s) of the absorbing layers.
    #[serde(default)]
    pub damp_max: Option<f64>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub random_sources: Option<RandomSources>,
    #[serde(default)]
    pub receivers: Vec<[f64; 3]>,
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub support_method: SupportMethod,
    /// Replay the command stream through the validator before stepping.
    #[serde(default)]
    pub validate: bool,
}

fn default_safety() -> f64 {
    0.9
}

fn default_precision() -> u32 {
    32
}

fn cfg_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Homogeneous run of `nt` steps with no sources, receivers, or damping.
    pub fn new(physics: Physics, grid: GridSpec, space_order: usize, nt: usize) -> Self {
        RunConfig {
            physics,
            grid,
            space_order,
            nt: Some(nt),
            time_ms: None,
            dt_s: None,
            cfl_safety: default_safety(),
            medium: MediumConfig::default(),
            damp_max: None,
            schedule: ScheduleConfig::default(),
            sources: Vec::new(),
            random_sources: None,
            receivers: Vec::new(),
            precision: default_precision(),
            threads: None,
            support_method: SupportMethod::default(),
            validate: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            // serde reports unknown and missing fields by name
            cfg_err(&json_field_hint(&e.to_string()), e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate().map_err(|e| cfg_err("grid", e.to_string()))?;
        let so = self.space_order;
        if so < 2 || so > crate::fd::MAX_SPACE_ORDER || so % 2 != 0 {
            return Err(cfg_err(
                "space_order",
                format!("must be even and in 2..={}, got {so}", crate::fd::MAX_SPACE_ORDER),
            ));
        }
        if self.nt.is_none() && self.time_ms.is_none() {
            return Err(cfg_err("nt", "either nt or time_ms is required"));
        }
        if let Some(ms) = self.time_ms {
            if !(ms >= 0.0 && ms.is_finite()) {
                return Err(cfg_err("time_ms", format!("must be >= 0, got {ms}")));
            }
        }
        if let Some(dt) = self.dt_s {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cfg_err("dt_s", format!("must be > 0, got {dt}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(cfg_err(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        let m = &self.medium;
        if !(m.velocity_mps > 0.0) || m.layers.iter().any(|l| !(l.velocity_mps > 0.0)) {
            return Err(cfg_err("medium.velocity_mps", "velocities must be > 0"));
        }
        if !(m.density_kgm3 > 0.0) || m.layers.iter().any(|l| l.density_kgm3.is_some_and(|d| !(d > 0.0))) {
            return Err(cfg_err("medium.density_kgm3", "densities must be > 0"));
        }
        let vs_ok = |vp: f64, vs: Option<f64>| vs.map_or(true, |s| s >= 0.0 && 2.0 * s * s < vp * vp);
        if !vs_ok(m.velocity_mps, m.vs_mps) || m.layers.iter().any(|l| !vs_ok(l.velocity_mps, l.vs_mps)) {
            return Err(cfg_err("medium.vs_mps", "need 0 <= vs < vp / sqrt(2)"));
        }
        if let Some(d) = self.damp_max {
            if !(d >= 0.0) {
                return Err(cfg_err("damp_max", format!("must be >= 0, got {d}")));
            }
        }
        if self.precision != 32 && self.precision != 64 {
            return Err(cfg_err(
                "precision",
                format!("must be 32 or 64, got {}", self.precision),
            ));
        }
        if self.threads == Some(0) {
            return Err(cfg_err("threads", "must be >= 1"));
        }
        for s in &self.sources {
            if !(s.f0_hz > 0.0) {
                return Err(cfg_err("sources.f0_hz", format!("must be > 0, got {}", s.f0_hz)));
            }
        }
        if let Some(r) = &self.random_sources {
            if !(r.f0_hz > 0.0) {
                return Err(cfg_err("random_sources.f0_hz", format!("must be > 0, got {}", r.f0_hz)));
            }
        }
        self.plan().map_err(|e| cfg_err("schedule", e.to_string()))?;
        Ok(())
    }

    /// Stable time step: the configured one, or the CFL bound scaled for the
    /// stencil order.
    pub fn dt(&self) -> Result<f64> {
        if let Some(dt) = self.dt_s {
            return Ok(dt);
        }
        let base = cfl_dt(&self.grid, self.medium.max_velocity(), self.cfl_safety)?;
        Ok(base * stencil_stability_factor(self.physics, self.space_order)?)
    }

    pub fn num_steps(&self) -> Result<usize> {
        if let Some(nt) = self.nt {
            return Ok(nt);
        }
        let ms = self.time_ms.unwrap_or(0.0);
        let dt = self.dt()?;
        // tolerate rounding in time_ms / dt landing just above an integer
        Ok(((ms * 1e-3 / dt) * (1.0 - 1e-12)).ceil() as usize)
    }

    pub fn plan(&self) -> Result<Plan> {
        let s = &self.schedule;
        Ok(match s.kind {
            ScheduleKind::Naive => Plan::Naive,
            ScheduleKind::Fused => Plan::Fused,
            ScheduleKind::Space => Plan::Space(make_space_plan(s.block)?),
            ScheduleKind::Wavefront => Plan::Wavefront(make_wavefront_plan(
                &self.grid,
                &field_groups(self.physics, self.space_order),
                s.time_height,
                s.tile,
                s.block,
            )?),
        })
    }

    /// Explicit sources followed by the generated ones.
    pub fn all_sources(&self) -> Vec<SourceConfig> {
        let mut out = self.sources.clone();
        if let Some(r) = &self.random_sources {
            out.extend(random_layout(&self.grid, r));
        }
        out
    }

    pub fn thread_count(&self) -> usize {
        resolve_threads(self.threads)
    }
}

/// Configured count, else `STENCIL_TB_THREADS`, else every available core.
pub fn resolve_threads(configured: Option<usize>) -> usize {
    configured
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn json_field_hint(msg: &str) -> String {
    for key in ["unknown field `", "missing field `", "field `"] {
        if let Some(i) = msg.find(key) {
            let rest = &msg[i + key.len()..];
            if let Some(j) = rest.find('`') {
                return rest[..j].to_string();
            }
        }
    }
    "config".to_string()
}

/// Source positions drawn inside the physical region.
pub fn random_layout(grid: &GridSpec, spec: &RandomSources) -> Vec<SourceConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phys = grid.physical_region();
    let lo = grid.coord_of(phys.lo);
    let hi = grid.coord_of(std::array::from_fn(|a| phys.hi[a].saturating_sub(1).max(phys.lo[a])));
    let plane_z = spec.plane_z_m.unwrap_or(0.5 * (lo[2] + hi[2]));
    (0..spec.count)
        .map(|_| {
            let mut c = [0.0; 3];
            for a in 0..3 {
                c[a] = if hi[a] > lo[a] {
                    rng.gen_range(lo[a]..=hi[a])
                } else {
                    lo[a]
                };
            }
            if spec.layout == SourceLayout::Plane {
                c[2] = plane_z;
            }
            SourceConfig {
                coords_m: c,
                f0_hz: spec.f0_hz,
                t0_s: None,
                amplitude: spec.amplitude,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "physics": "acoustic",
            "grid": {"shape": [16, 16, 16], "spacing_m": [10, 10, 10]},
            "space_order": 4,
            "nt": 10
        }"#
    }

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_json(minimal()).unwrap();
        assert_eq!(c.precision, 32);
        assert_eq!(c.schedule.kind, ScheduleKind::Space);
        assert_eq!(c.num_steps().unwrap(), 10);
    }

    #[test]
    fn odd_space_order_names_the_field() {
        let text = minimal().replace("\"space_order\": 4", "\"space_order\": 5");
        let err = RunConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("space_order"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let text = minimal().replace("\"nt\": 10", "\"nt\": 10, \"spacing\": 3");
        let err = RunConfig::from_json(&text).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "spacing"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn steps_from_duration() {
        let mut c = RunConfig::from_json(minimal()).unwrap();
        c.nt = None;
        c.time_ms = Some(512.0);
        c.dt_s = Some(0.00225);
        assert_eq!(c.num_steps().unwrap(), 228);
        c.dt_s = Some(0.002);
        assert_eq!(c.num_steps().unwrap(), 256);
    }

    #[test]
    fn derived_dt_is_scaled_by_order() {
        let c = RunConfig::from_json(minimal()).unwrap();
        let base = cfl_dt(&c.grid, 1500.0, 0.9).unwrap();
        let dt = c.dt().unwrap();
        assert!(dt < base && dt > 0.5 * base);
    }

    #[test]
    fn random_layouts_are_seeded_and_inside() {
        let g = GridSpec::cube(20, 5.0).unwrap().with_boundary_layers(4);
        let spec = RandomSources {
            count: 50,
            seed: 7,
            layout: SourceLayout::Plane,
            plane_z_m: None,
            f0_hz: 10.0,
            amplitude: 1.0,
        };
        let a = random_layout(&g, &spec);
        assert_eq!(a, random_layout(&g, &spec));
        for s in &a {
            for c in s.coords_m {
                assert!((20.0..=75.0).contains(&c));
            }
            assert_eq!(s.coords_m[2], a[0].coords_m[2]);
        }
    }

    #[test]
    fn layers_override_below_their_top() {
        let g = GridSpec::new([1, 1, 4], [1.0, 1.0, 10.0]).unwrap();
        let m = MediumConfig {
            layers: vec![Layer {
                z_top_m: 15.0,
                velocity_mps: 3000.0,
                vs_mps: None,
                density_kgm3: Some(2000.0),
            }],
            ..Default::default()
        };
        let med = m.build(&g);
        assert_eq!(med.vp, vec![1500.0, 1500.0, 3000.0, 3000.0]);
        assert_eq!(med.rho[3], 2000.0);
        assert_eq!(m.max_velocity(), 3000.0);
    }
}
