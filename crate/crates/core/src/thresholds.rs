//! Analytic rumor thresholds and empirical onset estimation.

use std::fmt;

use crate::error::{Error, Result};
use crate::inoculation::InoculationPlan;
use crate::netgen::{hard_cutoff, DegreeDistribution};

const EXPONENT_EPS: f64 = 1e-12;
const ONSET_WIDTH: f64 = 1e-3;

/// Critical transmission rate, or the sentinel for "no outbreak possible".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    NoOutbreak,
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::NoOutbreak => None,
        }
    }

    /// Strict ordering with `NoOutbreak` above every finite value.
    pub fn exceeds(&self, other: &Threshold) -> bool {
        match (self, other) {
            (Self::NoOutbreak, Self::Finite(_)) => true,
            (Self::Finite(a), Self::Finite(b)) => a > b,
            _ => false,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::NoOutbreak => f.write_str("none"),
        }
    }
}

/// Large-`N` behaviour of the bounded threshold, decided by the sign of
/// `alpha + beta + 2 - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Negative: the threshold tends to a finite, size-independent value.
    FiniteIndependent,
    /// Positive: the threshold vanishes as a power of `N`.
    Vanishing,
    /// Zero: the threshold vanishes like `1 / ln N`.
    Logarithmic,
}

impl Regime {
    pub fn classify(gamma: f64, alpha: f64, beta: f64) -> Self {
        let a = alpha + beta + 2.0 - gamma;
        if a.abs() <= EXPONENT_EPS {
            Self::Logarithmic
        } else if a < 0.0 {
            Self::FiniteIndependent
        } else {
            Self::Vanishing
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::FiniteIndependent => "finite-independent",
            Self::Vanishing => "vanishing",
            Self::Logarithmic => "logarithmic",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// `<k^(beta+1)> / <k^(alpha+beta+1)>` on a discrete support.
    MomentRatio,
    /// Classical bounded threshold in `N`.
    ClassicBounded,
    /// Modified bounded threshold in `N`, leading order per regime.
    ModifiedBounded,
    RandomInoculation,
    TargetedInoculation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// Leading-order bounded threshold in `N`.
    pub value: f64,
    /// Exact ratio of the continuum integrals over `[k_min, k_max]`.
    pub continuum: f64,
    pub regime: Regime,
    pub formula: Formula,
    pub k_max: f64,
}

/// `lambda_c = <k^(beta+1)> / <k^(alpha+beta+1)>`.
pub fn threshold_modified(dist: &DegreeDistribution, alpha: f64, beta: f64) -> f64 {
    dist.moment(beta + 1.0) / dist.moment(alpha + beta + 1.0)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 2.0 && gamma <= 3.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "gamma must lie in (2, 3], got {gamma}"
        )))
    }
}

/// Classical (`alpha = 1`, `beta = 0`) bounded threshold:
/// `(3-gamma)/((gamma-2) k_min) N^((gamma-3)/(gamma-1))`, or `2/(k_min ln N)`
/// at `gamma = 3`.
pub fn threshold_classic_bounded(gamma: f64, k_min: u32, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    let (k, n) = (f64::from(k_min), n as f64);
    if (gamma - 3.0).abs() <= EXPONENT_EPS {
        Ok(2.0 / (k * n.ln()))
    } else {
        Ok((3.0 - gamma) / ((gamma - 2.0) * k) * n.powf((gamma - 3.0) / (gamma - 1.0)))
    }
}

/// `int_1^r x^(e-1) dx`, with the `e -> 0` limit `ln r`.
fn scaled_integral(e: f64, ln_r: f64) -> f64 {
    if e.abs() <= EXPONENT_EPS {
        ln_r
    } else {
        (e * ln_r).exp_m1() / e
    }
}

/// Exact continuum ratio
/// `int k^(beta+1-gamma) dk / int k^(alpha+beta+1-gamma) dk` over
/// `[k_min, k_min N^(1/(gamma-1))]`.
pub fn threshold_modified_continuum(
    gamma: f64,
    k_min: u32,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let k = f64::from(k_min);
    let ln_r = (n as f64).ln() / (gamma - 1.0);
    let num = scaled_integral(beta + 2.0 - gamma, ln_r);
    let den = scaled_integral(alpha + beta + 2.0 - gamma, ln_r);
    Ok(k.powf(-alpha) * num / den)
}

/// Bounded threshold of the modified model on a network of `N` nodes.
///
/// `value` is the leading large-`N` behaviour of the continuum ratio in each
/// regime (finite constant, power law in `N`, or `1/ln N`); `continuum` keeps
/// the exact ratio for finite `N`.
pub fn threshold_modified_bounded(
    gamma: f64,
    k_min: u32,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<ThresholdReport> {
    check_gamma(gamma)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid("network size must be at least 2"));
    }
    let k = f64::from(k_min);
    let ln_r = (n as f64).ln() / (gamma - 1.0);
    let a = alpha + beta + 2.0 - gamma;
    let b = beta + 2.0 - gamma;
    let prefactor = k.powf(-alpha);
    let regime = Regime::classify(gamma, alpha, beta);
    let value = match regime {
        Regime::FiniteIndependent => prefactor * a / b,
        Regime::Logarithmic => prefactor / (alpha * ln_r),
        Regime::Vanishing => {
            if b.abs() <= EXPONENT_EPS {
                prefactor * a * ln_r * (-a * ln_r).exp()
            } else if b < 0.0 {
                prefactor * a / -b * (-a * ln_r).exp()
            } else {
                prefactor * a / b * (-alpha * ln_r).exp()
            }
        }
    };
    Ok(ThresholdReport {
        value,
        continuum: threshold_modified_continuum(gamma, k_min, n, alpha, beta)?,
        regime,
        formula: Formula::ModifiedBounded,
        k_max: hard_cutoff(gamma, k_min, n),
    })
}

/// Continuum thresholds of the classical and the modified model on the same
/// bounded network, as `(classic, modified)`.
pub fn compare_classic_modified(
    gamma: f64,
    k_min: u32,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    Ok((
        threshold_modified_continuum(gamma, k_min, n, 1.0, 0.0)?,
        threshold_modified_continuum(gamma, k_min, n, alpha, beta)?,
    ))
}

/// Random inoculation of a fraction `g`: `lambda_c / (1 - g)`.
pub fn threshold_random_inoc(lambda_c: f64, g: f64) -> Result<Threshold> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::invalid(format!(
            "inoculation fraction must lie in [0, 1], got {g}"
        )));
    }
    if g >= 1.0 {
        return Ok(Threshold::NoOutbreak);
    }
    Ok(Threshold::Finite(lambda_c / (1.0 - g)))
}

/// `<k^(beta+1)> / (<k^(alpha+beta+1)> - <g_k k^(alpha+beta+1)>)`.
pub fn threshold_targeted_inoc(
    dist: &DegreeDistribution,
    alpha: f64,
    beta: f64,
    plan: &InoculationPlan,
) -> Result<Threshold> {
    let g = plan.profile(dist)?;
    let q = alpha + beta + 1.0;
    let denominator: f64 = dist
        .iter()
        .zip(&g)
        .map(|((k, p), gk)| (1.0 - gk) * f64::from(k).powf(q) * p)
        .sum();
    if denominator <= 0.0 {
        return Ok(Threshold::NoOutbreak);
    }
    Ok(Threshold::Finite(dist.moment(beta + 1.0) / denominator))
}

/// Covariance of `g_k` and `k^(alpha+beta+1)` under `P(k)`.
pub fn targeted_covariance(
    dist: &DegreeDistribution,
    alpha: f64,
    beta: f64,
    plan: &InoculationPlan,
) -> Result<f64> {
    let g = plan.profile(dist)?;
    let q = alpha + beta + 1.0;
    let g_bar: f64 = g.iter().zip(dist.probabilities()).map(|(g, p)| g * p).sum();
    let mean_q = dist.moment(q);
    Ok(dist
        .iter()
        .zip(&g)
        .map(|((k, p), gk)| (gk - g_bar) * (f64::from(k).powf(q) - mean_q) * p)
        .sum())
}

/// Bisection for the onset `R(lambda) = epsilon` of a nondecreasing final-size
/// curve, to a bracket narrower than `1e-3`; returns the bracket midpoint.
pub fn empirical_threshold(
    mut final_size: impl FnMut(f64) -> f64,
    epsilon: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let violation = || Error::BracketViolation { lo, hi, epsilon };
    if !(lo < hi) || final_size(lo) > epsilon || final_size(hi) <= epsilon {
        return Err(violation());
    }
    let (mut a, mut b) = (lo, hi);
    while b - a >= ONSET_WIDTH {
        let mid = 0.5 * (a + b);
        if final_size(mid) > epsilon {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}
