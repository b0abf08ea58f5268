use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::physics::Physics;
use serde::{Deserialize, Serialize};

/// A field (or set of fields advanced together) updated once per step, in
/// order. `radius` is how far its update reads the groups before it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldGroup {
    pub name: String,
    pub radius: usize,
}

impl FieldGroup {
    pub fn new(name: &str, radius: usize) -> Self {
        FieldGroup {
            name: name.to_string(),
            radius,
        }
    }
}

/// Field groups of a physics, in intra-step order.
pub fn field_groups(physics: Physics, space_order: usize) -> Vec<FieldGroup> {
    let r = space_order / 2;
    match physics {
        Physics::Acoustic => vec![FieldGroup::new("u", r)],
        Physics::Elastic => vec![FieldGroup::new("v", r), FieldGroup::new("tau", r)],
    }
}

/// Spatial blocking: every point is updated once per step, block by block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacePlan {
    /// Block extent along x and y; z is always swept whole.
    pub block: [usize; 2],
}

/// Skewed wavefront temporal blocking over x and y.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WavefrontPlan {
    pub tile: [usize; 2],
    pub time_height: usize,
    /// Shift per step along x and y; zero along inactive axes.
    pub skew: [usize; 2],
    /// Extra lag of each field group behind the first within a step.
    pub offsets: Vec<usize>,
    pub block: [usize; 2],
    /// Axes carrying dependencies; inactive axes are neither skewed nor offset.
    pub tiled: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plan {
    /// Full sweeps, then the sparse loops over sources and receivers.
    Naive,
    /// Full sweeps with injection and gathering fused into each row.
    Fused,
    Space(SpacePlan),
    Wavefront(WavefrontPlan),
}

impl Plan {
    pub fn name(&self) -> &'static str {
        match self {
            Plan::Naive => "naive",
            Plan::Fused => "fused",
            Plan::Space(_) => "space",
            Plan::Wavefront(_) => "wavefront",
        }
    }

    pub fn uses_fused_sparse_ops(&self) -> bool {
        !matches!(self, Plan::Naive)
    }
}

impl std::fmt::Display for Plan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Plan::Naive | Plan::Fused => write!(f, "{}", self.name()),
            Plan::Space(p) => write!(f, "space block={}x{}", p.block[0], p.block[1]),
            Plan::Wavefront(p) => write!(
                f,
                "wavefront tile={}x{} T={} skew={}x{} offsets={:?} block={}x{}",
                p.tile[0], p.tile[1], p.time_height, p.skew[0], p.skew[1], p.offsets, p.block[0], p.block[1]
            ),
        }
    }
}

pub fn make_space_plan(block: [usize; 2]) -> Result<SpacePlan> {
    if block.iter().any(|&b| b == 0) {
        return Err(Error::InvalidPlan(format!("block shape must be >= 1, got {block:?}")));
    }
    Ok(SpacePlan { block })
}

/// Skew is the sum of the group radii: each group reads its predecessor
/// (and the last group of the previous step) up to `radius` ahead, so the
/// front of group `g` lags the first group by the radii before it.
pub fn make_wavefront_plan(
    grid: &GridSpec,
    groups: &[FieldGroup],
    time_height: usize,
    tile: [usize; 2],
    block: [usize; 2],
) -> Result<WavefrontPlan> {
    if time_height == 0 {
        return Err(Error::InvalidPlan("time_height must be >= 1".into()));
    }
    if groups.is_empty() {
        return Err(Error::InvalidPlan("no field groups".into()));
    }
    if tile.iter().chain(block.iter()).any(|&v| v == 0) {
        return Err(Error::InvalidPlan(format!(
            "tile {tile:?} and block {block:?} must be >= 1"
        )));
    }
    let total: usize = groups.iter().map(|g| g.radius).sum();
    let mut offsets = Vec::with_capacity(groups.len());
    let mut acc = 0;
    for g in groups {
        offsets.push(acc);
        acc += g.radius;
    }
    let skew: [usize; 2] = std::array::from_fn(|a| if grid.is_active(a) { total } else { 0 });
    for a in 0..2 {
        if grid.is_active(a) && time_height > 1 && tile[a] <= skew[a] * time_height {
            return Err(Error::InvalidPlan(format!(
                "tile extent {} along axis {a} must exceed skew {} x time height {time_height}",
                tile[a], skew[a]
            )));
        }
    }
    Ok(WavefrontPlan {
        tile,
        time_height,
        skew,
        offsets,
        block,
        tiled: [grid.is_active(0), grid.is_active(1)],
    })
}

impl WavefrontPlan {
    /// Total shift of a tile over its height, per tiled axis.
    pub fn tile_skew(&self) -> [usize; 2] {
        [self.skew[0] * self.time_height, self.skew[1] * self.time_height]
    }

    /// Mutated copy with the per-step skew reduced by one on every axis
    /// carrying skew. Used to check that the validator catches it.
    pub fn under_skewed(&self) -> WavefrontPlan {
        let mut p = self.clone();
        for s in p.skew.iter_mut() {
            *s = s.saturating_sub(1);
        }
        p
    }

    /// Tiles needed along axis `a` so every step covers the whole extent.
    pub fn tiles_along(&self, a: usize, extent: usize) -> usize {
        let reach = extent + self.skew[a] * (self.time_height - 1) + self.group_offset(a, usize::MAX);
        reach.div_ceil(self.tile[a])
    }

    /// Lag of group `g` along axis `a` (`usize::MAX` for the largest).
    pub fn group_offset(&self, a: usize, g: usize) -> usize {
        if !self.tiled[a] {
            return 0;
        }
        if g == usize::MAX {
            self.offsets.iter().copied().max().unwrap_or(0)
        } else {
            self.offsets[g]
        }
    }
}
