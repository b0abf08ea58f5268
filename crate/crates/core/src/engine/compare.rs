use super::run::RunOutput;
use crate::error::{Error, Result};
use serde::Serialize;

/// Relative differences of one output array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Difference {
    pub name: String,
    /// `max|a - b| / max(max|a|, max|b|)`.
    pub linf_rel: f64,
    /// `||a - b||_2 / max(||a||_2, ||b||_2)`.
    pub l2_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub differences: Vec<Difference>,
    pub tolerance: f64,
}

impl Comparison {
    pub fn max_linf(&self) -> f64 {
        self.differences.iter().map(|d| d.linf_rel).fold(0.0, f64::max)
    }

    pub fn max_l2(&self) -> f64 {
        self.differences.iter().map(|d| d.l2_rel).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_linf() <= self.tolerance
    }
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for d in &self.differences {
            writeln!(f, "{:<10} linf_rel={:.3e} l2_rel={:.3e}", d.name, d.linf_rel, d.l2_rel)?;
        }
        write!(
            f,
            "max linf_rel={:.3e} tolerance={:.1e} -> {}",
            self.max_linf(),
            self.tolerance,
            if self.within_tolerance() { "PASS" } else { "FAIL" }
        )
    }
}

/// Relative L-infinity and L2 differences of two equally shaped arrays.
pub fn relative_difference(name: &str, a: &[f64], b: &[f64]) -> Result<Difference> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "{name}: {} vs {} values",
            a.len(),
            b.len()
        )));
    }
    let (mut max_d, mut max_a, mut max_b) = (0.0f64, 0.0f64, 0.0f64);
    let (mut sd, mut sa, mut sb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        max_d = max_d.max(d.abs());
        max_a = max_a.max(x.abs());
        max_b = max_b.max(y.abs());
        sd += d * d;
        sa += x * x;
        sb += y * y;
    }
    let ratio = |num: f64, den: f64| {
        if num == 0.0 {
            0.0
        } else if den == 0.0 || !num.is_finite() {
            f64::INFINITY
        } else {
            num / den
        }
    };
    Ok(Difference {
        name: name.to_string(),
        linf_rel: ratio(max_d, max_a.max(max_b)),
        l2_rel: ratio(sd.sqrt(), sa.sqrt().max(sb.sqrt())),
    })
}

/// Compares every final field and the receiver data of two runs.
pub fn compare_runs(a: &RunOutput, b: &RunOutput, tolerance: f64) -> Result<Comparison> {
    if a.fields.len() != b.fields.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} fields vs {} fields",
            a.fields.len(),
            b.fields.len()
        )));
    }
    let mut differences = Vec::with_capacity(a.fields.len() + 1);
    for (fa, fb) in a.fields.iter().zip(&b.fields) {
        if fa.name != fb.name || fa.shape != fb.shape {
            return Err(Error::ShapeMismatch(format!(
                "field {} {:?} vs {} {:?}",
                fa.name, fa.shape, fb.name, fb.shape
            )));
        }
        differences.push(relative_difference(&fa.name, &fa.values, &fb.values)?);
    }
    if a.n_receivers != b.n_receivers {
        return Err(Error::ShapeMismatch(format!(
            "{} receivers vs {}",
            a.n_receivers, b.n_receivers
        )));
    }
    differences.push(relative_difference("receivers", &a.receivers, &b.receivers)?);
    Ok(Comparison { differences, tolerance })
}
