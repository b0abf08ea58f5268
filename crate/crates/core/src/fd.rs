//! Finite-difference weights computed at runtime from the polynomial
//! exactness conditions (Fornberg's recurrence), for any even order.

use crate::error::{invalid, Result};

pub const MAX_SPACE_ORDER: usize = 16;

/// Central second-derivative weights at unit spacing. `weights[r]` applies to
/// both offsets `+r` and `-r`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdCoefficients {
    pub space_order: usize,
    pub radius: usize,
    pub weights: Vec<f64>,
}

impl FdCoefficients {
    /// Weight at signed offset `r`.
    pub fn at(&self, r: isize) -> f64 {
        self.weights[r.unsigned_abs()]
    }

    /// Weights for offsets `-radius..=radius`.
    pub fn full_stencil(&self) -> Vec<f64> {
        let r = self.radius as isize;
        (-r..=r).map(|o| self.at(o)).collect()
    }
}

/// Staggered first-derivative weights at unit spacing:
/// `f'(0) ~ sum_r weights[r-1] * (f(r - 1/2) - f(-(r - 1/2)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredCoefficients {
    pub space_order: usize,
    pub radius: usize,
    pub weights: Vec<f64>,
}

fn check_order(space_order: usize) -> Result<()> {
    if space_order < 2 || space_order > MAX_SPACE_ORDER || space_order % 2 != 0 {
        return Err(invalid(
            "space_order",
            format!("must be even and within 2..={MAX_SPACE_ORDER}, got {space_order}"),
        ));
    }
    Ok(())
}

pub fn fd_weights(space_order: usize) -> Result<FdCoefficients> {
    check_order(space_order)?;
    let radius = space_order / 2;
    // nodes ordered 0, 1, -1, 2, -2, ...
    let mut nodes = vec![0.0];
    for r in 1..=radius {
        nodes.push(r as f64);
        nodes.push(-(r as f64));
    }
    let table = fornberg(0.0, &nodes, 2);
    let mut weights = vec![table[0][2]];
    for r in 1..=radius {
        weights.push(table[2 * r - 1][2]);
    }
    Ok(FdCoefficients {
        space_order,
        radius,
        weights,
    })
}

pub fn staggered_weights(space_order: usize) -> Result<StaggeredCoefficients> {
    check_order(space_order)?;
    let radius = space_order / 2;
    let mut nodes = Vec::with_capacity(space_order);
    for r in 1..=radius {
        let h = r as f64 - 0.5;
        nodes.push(h);
        nodes.push(-h);
    }
    let table = fornberg(0.0, &nodes, 1);
    let weights = (0..radius).map(|i| table[2 * i][1]).collect();
    Ok(StaggeredCoefficients {
        space_order,
        radius,
        weights,
    })
}

/// Fornberg's recurrence: `c[j][k]` is the weight of node `j` for the
/// `k`-th derivative at `z`, for `k <= max_deriv`.
pub fn fornberg(z: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; max_deriv + 1]; n];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}
