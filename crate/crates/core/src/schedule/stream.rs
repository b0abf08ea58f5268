use super::plan::{FieldGroup, Plan, WavefrontPlan};
use crate::grid::{GridSpec, Region};
use serde::{Deserialize, Serialize};

/// One step of an execution plan. Commands between two barriers form a block
/// set: they touch disjoint points and may run concurrently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    /// Advance `group` to time `t` over `region`.
    Stencil {
        group: usize,
        t: usize,
        region: Region,
    },
    /// Add the precomputed step-`t` source amplitudes to the affected points of
    /// `region`, right after their stencil update.
    FusedInject {
        group: usize,
        t: usize,
        region: Region,
    },
    /// Sample the receiver entries inside `region` at time `t`.
    FusedGather {
        group: usize,
        t: usize,
        region: Region,
    },
    /// Source loop over every off-the-grid source at time `t`.
    DirectInject {
        group: usize,
        t: usize,
    },
    /// Receiver loop over every off-the-grid receiver at time `t`.
    DirectRecord {
        group: usize,
        t: usize,
    },
    Barrier,
    /// Every point of every group has reached time `t`.
    Checkpoint {
        t: usize,
    },
}

/// Which group receives source injection and which is sampled by receivers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SparseHooks {
    pub inject: Option<usize>,
    pub gather: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct UpdateStream {
    pub commands: Vec<Command>,
    pub groups: usize,
    pub nt: usize,
}

impl UpdateStream {
    /// Command slices separated by barriers, skipping empty ones.
    pub fn block_sets(&self) -> impl Iterator<Item = &[Command]> {
        self.commands
            .split(|c| matches!(c, Command::Barrier))
            .filter(|s| !s.is_empty())
    }

    /// Point updates issued for `group`.
    pub fn point_updates(&self, group: usize) -> usize {
        self.commands
            .iter()
            .map(|c| match c {
                Command::Stencil { group: g, region, .. } if *g == group => region.volume(),
                _ => 0,
            })
            .sum()
    }

    pub fn stencil_commands(&self) -> usize {
        self.commands
            .iter()
            .filter(|c| matches!(c, Command::Stencil { .. }))
            .count()
    }

    /// One command per line, for debugging.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.commands {
            let line = match c {
                Command::Stencil { group, t, region } => format!("stencil g{group} t{t} {region}"),
                Command::FusedInject { group, t, region } => {
                    format!("inject g{group} t{t} {region}")
                }
                Command::FusedGather { group, t, region } => {
                    format!("gather g{group} t{t} {region}")
                }
                Command::DirectInject { group, t } => format!("direct-inject g{group} t{t}"),
                Command::DirectRecord { group, t } => format!("direct-record g{group} t{t}"),
                Command::Barrier => "barrier".to_string(),
                Command::Checkpoint { t } => format!("checkpoint t{t}"),
            };
            s.push_str(&line);
            s.push('\n');
        }
        s
    }
}

fn push_block(out: &mut Vec<Command>, group: usize, t: usize, region: Region, hooks: SparseHooks) {
    if region.is_empty() {
        return;
    }
    out.push(Command::Stencil { group, t, region });
    if hooks.inject == Some(group) {
        out.push(Command::FusedInject { group, t, region });
    }
    if hooks.gather == Some(group) {
        out.push(Command::FusedGather { group, t, region });
    }
}

fn push_blocked(out: &mut Vec<Command>, group: usize, t: usize, region: Region, block: [usize; 2], hooks: SparseHooks) {
    if region.is_empty() {
        return;
    }
    let mut x = region.lo[0];
    while x < region.hi[0] {
        let x1 = (x + block[0]).min(region.hi[0]);
        let mut y = region.lo[1];
        while y < region.hi[1] {
            let y1 = (y + block[1]).min(region.hi[1]);
            let r = Region::new([x, y, region.lo[2]], [x1, y1, region.hi[2]]);
            push_block(out, group, t, r, hooks);
            y = y1;
        }
        x = x1;
    }
}

/// Clamped `[tile * index - shift, tile * (index + 1) - shift)` along an axis.
fn tile_range(tile: usize, index: usize, shift: usize, extent: usize) -> (usize, usize) {
    let lo = (tile * index) as isize - shift as isize;
    let hi = lo + tile as isize;
    let clamp = |v: isize| v.clamp(0, extent as isize) as usize;
    (clamp(lo), clamp(hi))
}

fn wavefront(
    plan: &WavefrontPlan,
    grid: &GridSpec,
    ngroups: usize,
    nt: usize,
    hooks: SparseHooks,
    out: &mut Vec<Command>,
) {
    let [nx, ny, nz] = grid.shape;
    let tiles_x = plan.tiles_along(0, nx);
    let tiles_y = plan.tiles_along(1, ny);
    let mut t0 = 0;
    while t0 < nt {
        let height = plan.time_height.min(nt - t0);
        for ix in 0..tiles_x {
            for iy in 0..tiles_y {
                for tau in 0..height {
                    let t = t0 + tau;
                    for g in 0..ngroups {
                        let (x0, x1) = tile_range(plan.tile[0], ix, plan.skew[0] * tau + plan.group_offset(0, g), nx);
                        let (y0, y1) = tile_range(plan.tile[1], iy, plan.skew[1] * tau + plan.group_offset(1, g), ny);
                        let region = Region::new([x0, y0, 0], [x1, y1, nz]);
                        if region.is_empty() {
                            continue;
                        }
                        push_blocked(out, g, t, region, plan.block, hooks);
                        out.push(Command::Barrier);
                    }
                }
            }
        }
        out.push(Command::Checkpoint { t: t0 + height - 1 });
        t0 += height;
    }
}

/// Expands a plan into the ordered command stream the engine executes and the
/// validator replays.
pub fn enumerate_updates(
    plan: &Plan,
    grid: &GridSpec,
    groups: &[FieldGroup],
    nt: usize,
    hooks: SparseHooks,
) -> UpdateStream {
    let full = grid.full_region();
    let n = groups.len();
    let mut out = Vec::new();
    match plan {
        Plan::Naive => {
            for t in 0..nt {
                for g in 0..n {
                    out.push(Command::Stencil {
                        group: g,
                        t,
                        region: full,
                    });
                    out.push(Command::Barrier);
                }
                if let Some(g) = hooks.inject {
                    out.push(Command::DirectInject { group: g, t });
                    out.push(Command::Barrier);
                }
                if let Some(g) = hooks.gather {
                    out.push(Command::DirectRecord { group: g, t });
                    out.push(Command::Barrier);
                }
                out.push(Command::Checkpoint { t });
            }
        }
        Plan::Fused => {
            for t in 0..nt {
                for g in 0..n {
                    push_block(&mut out, g, t, full, hooks);
                    out.push(Command::Barrier);
                }
                out.push(Command::Checkpoint { t });
            }
        }
        Plan::Space(p) => {
            for t in 0..nt {
                for g in 0..n {
                    push_blocked(&mut out, g, t, full, p.block, hooks);
                    out.push(Command::Barrier);
                }
                out.push(Command::Checkpoint { t });
            }
        }
        Plan::Wavefront(p) => wavefront(p, grid, n, nt, hooks, &mut out),
    }
    UpdateStream {
        commands: out,
        groups: n,
        nt,
    }
}
