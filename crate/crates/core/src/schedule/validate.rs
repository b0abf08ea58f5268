//! Replays a command stream against the dependences of the update rules and
//! reports every read of a value that is not (or no longer) available.

use super::stream::{Command, UpdateStream};
use crate::grid::GridSpec;
use crate::physics::Physics;
use serde::Serialize;

/// A read of group `group` at time offset `dt` (<= 0) within `radius` points
/// along each axis (star-shaped neighbourhood, center included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Read {
    pub group: usize,
    pub dt: i64,
    pub radius: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDeps {
    pub name: String,
    pub time_levels: usize,
    pub reads: Vec<Read>,
}

/// Read dependences of every field group. Intra-step ordering is expressed as
/// reads with `dt = 0` of an earlier group; stencil-before-inject ordering is
/// implicit for the injected group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceSpec {
    pub groups: Vec<GroupDeps>,
}

impl DependenceSpec {
    pub fn for_physics(physics: Physics, space_order: usize, grid: &GridSpec) -> Self {
        let r = space_order / 2;
        let radius: [usize; 3] = std::array::from_fn(|a| if grid.is_active(a) { r } else { 0 });
        let own = |g: usize, dt: i64| Read {
            group: g,
            dt,
            radius: [0; 3],
        };
        match physics {
            Physics::Acoustic => DependenceSpec {
                groups: vec![GroupDeps {
                    name: "u".into(),
                    time_levels: 3,
                    reads: vec![
                        Read {
                            group: 0,
                            dt: -1,
                            radius,
                        },
                        own(0, -2),
                    ],
                }],
            },
            Physics::Elastic => DependenceSpec {
                groups: vec![
                    GroupDeps {
                        name: "v".into(),
                        time_levels: 2,
                        reads: vec![
                            own(0, -1),
                            Read {
                                group: 1,
                                dt: -1,
                                radius,
                            },
                        ],
                    },
                    GroupDeps {
                        name: "tau".into(),
                        time_levels: 2,
                        reads: vec![
                            own(1, -1),
                            Read {
                                group: 0,
                                dt: 0,
                                radius,
                            },
                        ],
                    },
                ],
            },
        }
    }
}

/// Grid points touched by injection and by receiver gathering.
#[derive(Clone, Debug, Default)]
pub struct SparseFootprint {
    pub inject_group: Option<usize>,
    pub inject_points: Vec<[usize; 3]>,
    pub gather_group: Option<usize>,
    pub gather_points: Vec<[usize; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationKind {
    /// A neighbour value is read before it was computed.
    ReadNotComputed,
    /// A neighbour value was already overwritten in the cyclic buffer.
    ReadOverwritten,
    /// A value is read before the injection at its time was applied.
    ReadBeforeInjection,
    /// A point is updated out of time order (skipped or repeated).
    OutOfOrder,
    /// Injection reaches a point whose stencil update for that step is missing.
    InjectBeforeStencil,
    /// A point advances past a step without receiving its injection.
    MissedInjection,
    /// A point receives the same step's injection twice.
    DoubleInjection,
    /// A receiver samples a point not yet final for that step.
    GatherNotReady,
    /// A step's receiver sample is missing or repeated.
    GatherOrder,
    /// The stream ends before every point reaches the final step.
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub command: usize,
    pub kind: ViolationKind,
    pub group: usize,
    pub t: i64,
    pub point: [usize; 3],
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} at command {} (group {}, t {}, point {:?})",
            self.kind, self.command, self.group, self.t, self.point
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    /// The first violations found, at most `MAX_RECORDED`.
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub const MAX_RECORDED: usize = 1000;

    pub fn is_legal(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation) {
        self.total += 1;
        if self.violations.len() < Self::MAX_RECORDED {
            self.violations.push(v);
        }
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

struct Replay<'a> {
    grid: &'a GridSpec,
    deps: &'a DependenceSpec,
    /// last computed time per (group, point); -1 is the zero initial state
    last: Vec<Vec<i32>>,
    inject_mask: Vec<bool>,
    injected: Vec<i32>,
    gather_mask: Vec<bool>,
    gathered: Vec<i32>,
    inject_group: Option<usize>,
    gather_group: Option<usize>,
    report: ValidationReport,
}

impl Replay<'_> {
    #[inline]
    fn lin(&self, p: [usize; 3]) -> usize {
        (p[0] * self.grid.shape[1] + p[1]) * self.grid.shape[2] + p[2]
    }

    fn violation(&mut self, command: usize, kind: ViolationKind, group: usize, t: i64, point: [usize; 3]) {
        self.report.push(Violation {
            command,
            kind,
            group,
            t,
            point,
        });
    }

    fn check_read(&mut self, ci: usize, reader: usize, t: i64, q: [usize; 3], read: &Read) {
        let need = t + read.dt;
        let qi = self.lin(q);
        let have = self.last[read.group][qi] as i64;
        let levels = self.deps.groups[read.group].time_levels as i64;
        if have < need {
            self.violation(ci, ViolationKind::ReadNotComputed, reader, t, q);
        } else if have - need >= levels {
            self.violation(ci, ViolationKind::ReadOverwritten, reader, t, q);
        } else if need >= 0
            && self.inject_group == Some(read.group)
            && self.inject_mask[qi]
            && (self.injected[qi] as i64) < need
        {
            self.violation(ci, ViolationKind::ReadBeforeInjection, reader, t, q);
        }
    }

    fn stencil(&mut self, ci: usize, group: usize, t: usize, p: [usize; 3]) {
        let t = t as i64;
        let pi = self.lin(p);
        let deps = self.deps;
        for read in &deps.groups[group].reads {
            for a in 0..3 {
                let r = read.radius[a];
                for o in -(r as isize)..=(r as isize) {
                    if o == 0 && a > 0 {
                        continue;
                    }
                    let c = p[a] as isize + o;
                    if c < 0 || c >= self.grid.shape[a] as isize {
                        continue; // halo is a constant zero
                    }
                    let mut q = p;
                    q[a] = c as usize;
                    self.check_read(ci, group, t, q, read);
                }
            }
        }
        if self.last[group][pi] as i64 != t - 1 {
            self.violation(ci, ViolationKind::OutOfOrder, group, t, p);
        }
        if t >= 1 && self.inject_group == Some(group) && self.inject_mask[pi] && (self.injected[pi] as i64) != t - 1 {
            self.violation(ci, ViolationKind::MissedInjection, group, t - 1, p);
        }
        if t >= 1 && self.gather_group == Some(group) && self.gather_mask[pi] && (self.gathered[pi] as i64) != t - 1 {
            self.violation(ci, ViolationKind::GatherOrder, group, t - 1, p);
        }
        self.last[group][pi] = t as i32;
    }

    fn inject(&mut self, ci: usize, group: usize, t: usize, p: [usize; 3]) {
        let pi = self.lin(p);
        let t = t as i64;
        // readiness is judged on the field that actually holds the sources
        let target = self.inject_group.unwrap_or(group);
        if group != target || self.last[target][pi] as i64 != t {
            self.violation(ci, ViolationKind::InjectBeforeStencil, group, t, p);
        }
        if self.injected[pi] as i64 >= t {
            self.violation(ci, ViolationKind::DoubleInjection, group, t, p);
        }
        self.injected[pi] = t as i32;
    }

    fn gather(&mut self, ci: usize, group: usize, t: usize, p: [usize; 3]) {
        let pi = self.lin(p);
        let t = t as i64;
        let group = self.gather_group.unwrap_or(group);
        let injected_ok = !(self.inject_group == Some(group) && self.inject_mask[pi]) || self.injected[pi] as i64 == t;
        if self.last[group][pi] as i64 != t || !injected_ok {
            self.violation(ci, ViolationKind::GatherNotReady, group, t, p);
        }
        if self.gathered[pi] as i64 != t - 1 {
            self.violation(ci, ViolationKind::GatherOrder, group, t, p);
        }
        self.gathered[pi] = t as i32;
    }
}

/// Replays `stream` and returns every dependence violation found. An empty
/// report means the stream computes exactly what the naive schedule computes.
pub fn validate_schedule(
    stream: &UpdateStream,
    deps: &DependenceSpec,
    grid: &GridSpec,
    sparse: &SparseFootprint,
) -> ValidationReport {
    let n = grid.num_points();
    let mut replay = Replay {
        grid,
        deps,
        last: vec![vec![-1; n]; deps.groups.len()],
        inject_mask: vec![false; n],
        injected: vec![-1; n],
        gather_mask: vec![false; n],
        gathered: vec![-1; n],
        inject_group: sparse.inject_group,
        gather_group: sparse.gather_group,
        report: ValidationReport::default(),
    };
    // a point listed twice is still updated once per step
    let unique = |pts: &[[usize; 3]]| {
        let mut v = pts.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let inject_points = unique(&sparse.inject_points);
    let gather_points = unique(&sparse.gather_points);
    for &p in &inject_points {
        let i = replay.lin(p);
        replay.inject_mask[i] = true;
    }
    for &p in &gather_points {
        let i = replay.lin(p);
        replay.gather_mask[i] = true;
    }

    for (ci, cmd) in stream.commands.iter().enumerate() {
        match *cmd {
            Command::Stencil { group, t, region } => {
                for p in region.points() {
                    replay.stencil(ci, group, t, p);
                }
            }
            Command::FusedInject { group, t, region } => {
                for p in &inject_points {
                    if region.contains(*p) {
                        replay.inject(ci, group, t, *p);
                    }
                }
            }
            Command::FusedGather { group, t, region } => {
                for p in &gather_points {
                    if region.contains(*p) {
                        replay.gather(ci, group, t, *p);
                    }
                }
            }
            Command::DirectInject { group, t } => {
                for p in &inject_points {
                    replay.inject(ci, group, t, *p);
                }
            }
            Command::DirectRecord { group, t } => {
                for p in &gather_points {
                    replay.gather(ci, group, t, *p);
                }
            }
            Command::Barrier | Command::Checkpoint { .. } => {}
        }
    }

    let end = stream.commands.len();
    let final_t = stream.nt as i64 - 1;
    for g in 0..deps.groups.len() {
        for p in grid.full_region().points() {
            let pi = replay.lin(p);
            if replay.last[g][pi] as i64 != final_t {
                replay.violation(end, ViolationKind::Incomplete, g, final_t, p);
            }
            if stream.nt > 0 {
                if sparse.inject_group == Some(g) && replay.inject_mask[pi] && replay.injected[pi] as i64 != final_t {
                    replay.violation(end, ViolationKind::MissedInjection, g, final_t, p);
                }
                if sparse.gather_group == Some(g) && replay.gather_mask[pi] && replay.gathered[pi] as i64 != final_t {
                    replay.violation(end, ViolationKind::GatherOrder, g, final_t, p);
                }
            }
        }
    }
    replay.report
}
