//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use stencil_tb::engine::{RunConfig, ScheduleConfig, SourceConfig};
use stencil_tb::grid::GridSpec;
use stencil_tb::physics::Physics;
use stencil_tb::sparse::SourceSet;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Solves `a x = b` exactly by Gaussian elimination.
pub fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular system");
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    (0..n).map(|i| &b[i] / &a[i][i]).collect()
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    let mut p = BigRational::one();
    for _ in 0..k {
        p *= x;
    }
    p
}

/// Weights `w_{-R..R}` of the second derivative on integer nodes: the
/// moment conditions `sum_j w_j j^k = 2 [k == 2]`, `k = 0..2R`.
pub fn vandermonde_second_derivative(space_order: usize) -> Vec<f64> {
    let r = (space_order / 2) as i64;
    let nodes: Vec<BigRational> = (-r..=r).map(|j| rat(j, 1)).collect();
    let n = nodes.len();
    let a = (0..n).map(|k| nodes.iter().map(|x| pow(x, k)).collect()).collect();
    let b = (0..n).map(|k| if k == 2 { rat(2, 1) } else { rat(0, 1) }).collect();
    solve_exact(a, b).iter().map(|v| v.to_f64().unwrap()).collect()
}

/// Weights of the first derivative on half-integer nodes `-R+1/2..R-1/2`,
/// returned as `c_1..c_R` for the pair `(j - 1/2, -(j - 1/2))`.
pub fn vandermonde_staggered_first_derivative(space_order: usize) -> Vec<f64> {
    let r = (space_order / 2) as i64;
    let nodes: Vec<BigRational> = (0..2 * r).map(|j| rat(2 * (j - r) + 1, 2)).collect();
    let n = nodes.len();
    let a = (0..n).map(|k| nodes.iter().map(|x| pow(x, k)).collect()).collect();
    let b = (0..n).map(|k| if k == 1 { rat(1, 1) } else { rat(0, 1) }).collect();
    let w = solve_exact(a, b);
    // node index r + j - 1 holds +(j - 1/2)
    (1..=r as usize)
        .map(|j| w[r as usize + j - 1].to_f64().unwrap())
        .collect()
}

pub fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let s = abs_max(a).max(abs_max(b));
    if d == 0.0 {
        0.0
    } else {
        d / s
    }
}

/// Trilinear weights written out directly: corner `(i + dx, j + dy, k + dz)`
/// gets `prod (d ? f : 1 - f)`. Returns nonzero corners only.
pub fn trilinear(coord: [f64; 3], spacing: [f64; 3], shape: [usize; 3]) -> Vec<([usize; 3], f64)> {
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        if shape[a] == 1 {
            continue;
        }
        let f = coord[a] / spacing[a];
        let i = (f.floor() as usize).min(shape[a] - 2);
        base[a] = i;
        frac[a] = f - i as f64;
    }
    let mut out = Vec::new();
    for dx in 0..2usize {
        for dy in 0..2usize {
            for dz in 0..2usize {
                let d = [dx, dy, dz];
                let mut w = 1.0;
                for a in 0..3 {
                    w *= if d[a] == 0 { 1.0 - frac[a] } else { frac[a] };
                }
                if w != 0.0 && (0..3).all(|a| shape[a] > 1 || d[a] == 0) {
                    out.push(([base[0] + dx, base[1] + dy, base[2] + dz], w));
                }
            }
        }
    }
    out
}

pub fn ricker(f0: f64, t0: f64, dt: f64, nt: usize) -> Vec<f64> {
    (0..nt)
        .map(|i| {
            let a = (std::f64::consts::PI * f0 * (i as f64 * dt - t0)).powi(2);
            (1.0 - 2.0 * a) * (-a).exp()
        })
        .collect()
}

/// Dense 3-D array with zero outside the interior.
#[derive(Clone)]
pub struct Arr {
    pub n: [usize; 3],
    pub v: Vec<f64>,
}

impl Arr {
    pub fn zeros(n: [usize; 3]) -> Self {
        Arr {
            n,
            v: vec![0.0; n[0] * n[1] * n[2]],
        }
    }

    pub fn idx(&self, p: [usize; 3]) -> usize {
        (p[0] * self.n[1] + p[1]) * self.n[2] + p[2]
    }

    pub fn at(&self, p: [i64; 3]) -> f64 {
        if (0..3).any(|a| p[a] < 0 || p[a] >= self.n[a] as i64) {
            return 0.0;
        }
        self.v[self.idx([p[0] as usize, p[1] as usize, p[2] as usize])]
    }
}

pub struct PointSource {
    pub coords: [f64; 3],
    pub wavelet: Vec<f64>,
}

fn shifted(p: [usize; 3], axis: usize, d: i64) -> [i64; 3] {
    let mut q = [p[0] as i64, p[1] as i64, p[2] as i64];
    q[axis] += d;
    q
}

/// Textbook leapfrog for `m u_tt = lap u - damp m u_t` with point sources,
/// written loop by loop. Returns the final field and receiver traces.
pub fn reference_acoustic(
    shape: [usize; 3],
    h: [f64; 3],
    space_order: usize,
    dt: f64,
    vp: f64,
    damp: &[f64],
    sources: &[PointSource],
    receivers: &[[f64; 3]],
    nt: usize,
) -> (Vec<f64>, Vec<f64>) {
    let w = vandermonde_second_derivative(space_order);
    let r = space_order / 2;
    let m = 1.0 / (vp * vp);
    let mut prev2 = Arr::zeros(shape);
    let mut prev1 = Arr::zeros(shape);
    let mut traces = vec![0.0; nt * receivers.len()];
    for t in 0..nt {
        let mut next = Arr::zeros(shape);
        for x in 0..shape[0] {
            for y in 0..shape[1] {
                for z in 0..shape[2] {
                    let p = [x, y, z];
                    let mut lap = 0.0;
                    for a in 0..3 {
                        if shape[a] == 1 {
                            continue;
                        }
                        for j in 0..w.len() {
                            let d = j as i64 - r as i64;
                            lap += w[j] / (h[a] * h[a]) * prev1.at(shifted(p, a, d));
                        }
                    }
                    let i = prev1.idx(p);
                    let u1 = prev1.v[i];
                    let u2 = prev2.v[i];
                    next.v[i] = (2.0 * u1 - u2 + dt * dt / m * lap) / (1.0 + dt * damp[i]);
                }
            }
        }
        for s in sources {
            let amp = s.wavelet.get(t).copied().unwrap_or(0.0);
            for (p, wt) in trilinear(s.coords, h, shape) {
                let i = next.idx(p);
                next.v[i] += wt * dt * dt / m * amp;
            }
        }
        for (k, rc) in receivers.iter().enumerate() {
            traces[t * receivers.len() + k] = trilinear(*rc, h, shape)
                .into_iter()
                .map(|(p, wt)| wt * next.v[next.idx(p)])
                .sum();
        }
        prev2 = prev1;
        prev1 = next;
    }
    (prev1.v, traces)
}

/// Virieux velocity-stress scheme, loop by loop. Velocity `i` sits half a
/// cell forward along `i`; shear stress `ij` half a cell forward along both.
#[allow(clippy::too_many_arguments)]
pub fn reference_elastic(
    shape: [usize; 3],
    h: [f64; 3],
    space_order: usize,
    dt: f64,
    vp: f64,
    vs: f64,
    rho: f64,
    sources: &[PointSource],
    receivers: &[[f64; 3]],
    nt: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let c = vandermonde_staggered_first_derivative(space_order);
    let mu = rho * vs * vs;
    let lam = rho * vp * vp - 2.0 * mu;
    // forward: sum c_r (f[i + r] - f[i - r + 1]); backward: sum c_r (f[i + r - 1] - f[i - r])
    let deriv = |f: &Arr, p: [usize; 3], a: usize, forward: bool| -> f64 {
        if shape[a] == 1 {
            return 0.0;
        }
        let mut s = 0.0;
        for (k, cr) in c.iter().enumerate() {
            let r = k as i64 + 1;
            let (hi, lo) = if forward { (r, 1 - r) } else { (r - 1, -r) };
            s += cr * (f.at(shifted(p, a, hi)) - f.at(shifted(p, a, lo)));
        }
        s / h[a]
    };
    let pair = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        _ => 5,
    };
    let mut v: Vec<Arr> = (0..3).map(|_| Arr::zeros(shape)).collect();
    let mut tau: Vec<Arr> = (0..6).map(|_| Arr::zeros(shape)).collect();
    let mut traces = vec![0.0; nt * receivers.len()];
    let points: Vec<[usize; 3]> = (0..shape[0])
        .flat_map(|x| (0..shape[1]).flat_map(move |y| (0..shape[2]).map(move |z| [x, y, z])))
        .collect();
    for t in 0..nt {
        let mut nv = v.clone();
        for i in 0..3 {
            for &p in &points {
                let mut div = 0.0;
                for j in 0..3 {
                    div += deriv(&tau[pair(i, j)], p, j, i == j);
                }
                let k = nv[i].idx(p);
                nv[i].v[k] = v[i].v[k] + dt / rho * div;
            }
        }
        let mut nt_ = tau.clone();
        for &p in &points {
            let k = tau[0].idx(p);
            let d: Vec<f64> = (0..3).map(|a| deriv(&nv[a], p, a, false)).collect();
            let div = d[0] + d[1] + d[2];
            for a in 0..3 {
                nt_[a].v[k] = tau[a].v[k] + dt * lam * div + 2.0 * dt * mu * d[a];
            }
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let s = deriv(&nv[i], p, j, true) + deriv(&nv[j], p, i, true);
                nt_[pair(i, j)].v[k] = tau[pair(i, j)].v[k] + dt * mu * s;
            }
        }
        for s in sources {
            let amp = s.wavelet.get(t).copied().unwrap_or(0.0);
            for (p, wt) in trilinear(s.coords, h, shape) {
                for a in 0..3 {
                    let k = nt_[a].idx(p);
                    nt_[a].v[k] += wt * dt * amp;
                }
            }
        }
        for (kr, rc) in receivers.iter().enumerate() {
            traces[t * receivers.len() + kr] = trilinear(*rc, h, shape)
                .into_iter()
                .map(|(p, wt)| {
                    let k = nt_[0].idx(p);
                    wt * (nt_[0].v[k] + nt_[1].v[k] + nt_[2].v[k])
                })
                .sum();
        }
        v = nv;
        tau = nt_;
    }
    (v.into_iter().chain(tau).map(|a| a.v).collect(), traces)
}

/// Deterministic pseudo-random coordinates inside the grid (splitmix64).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Acoustic or elastic run on an `n`-cube with `nsrc` random off-grid
/// sources and four receivers.
pub fn test_config(physics: Physics, n: usize, space_order: usize, nt: usize, nsrc: usize, seed: u64) -> RunConfig {
    let h = 10.0;
    let grid = GridSpec::cube(n, h).unwrap().with_boundary_layers(6);
    let mut c = RunConfig::new(physics, grid, space_order, nt);
    if physics == Physics::Elastic {
        c.medium.velocity_mps = 2500.0;
        c.medium.vs_mps = Some(1400.0);
        c.medium.density_kgm3 = 2000.0;
    }
    let mut rng = Lcg(seed);
    let lo = 8.0 * h;
    let span = (n as f64 - 17.0) * h;
    c.sources = (0..nsrc)
        .map(|_| SourceConfig {
            coords_m: [0, 1, 2].map(|_| lo + rng.unit() * span),
            f0_hz: 18.0,
            t0_s: None,
            amplitude: 1.0,
        })
        .collect();
    let mid = 0.5 * (n as f64 - 1.0) * h;
    c.receivers = vec![
        [lo + 3.3, mid, lo],
        [lo + span, mid + 1.7, lo + 0.5],
        [mid, lo + 2.25, lo + span],
        [mid + 4.0, lo + span, mid],
    ];
    c.schedule = ScheduleConfig::naive();
    c.threads = Some(1);
    c
}

/// Smallest legal wavefront tile for `time_height`, plus some slack.
pub fn wavefront_for(physics: Physics, space_order: usize, time_height: usize, slack: usize) -> ScheduleConfig {
    let per_step = match physics {
        Physics::Acoustic => space_order / 2,
        Physics::Elastic => space_order,
    };
    let tile = per_step * time_height + slack;
    ScheduleConfig::wavefront([tile, tile], time_height, [8, 8])
}

/// Random sources mixing on-grid coordinates, arbitrary ones, and exact
/// duplicates of earlier sources, with random wavelets and scales.
pub fn random_source_set(g: &GridSpec, rng: &mut Lcg, n: usize, nt: usize) -> SourceSet {
    let mut coords = Vec::new();
    for _ in 0..n {
        let mut c = [0.0; 3];
        for a in 0..3 {
            let ext = (g.shape[a] - 1) as f64 * g.spacing[a];
            c[a] = match rng.below(3) {
                0 => rng.below(g.shape[a]) as f64 * g.spacing[a],
                _ => rng.unit() * ext,
            };
        }
        if rng.below(5) == 0 && !coords.is_empty() {
            c = coords[rng.below(coords.len())];
        }
        coords.push(c);
    }
    let wavelets: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..nt).map(|_| rng.unit() * 2.0 - 1.0).collect())
        .collect();
    let scale = (0..n).map(|_| 0.1 + rng.unit()).collect();
    SourceSet::new(g, coords, &wavelets, scale).unwrap()
}
