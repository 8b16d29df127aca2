//! Degree-block mean-field dynamics.
//!
//! States are per-degree-class densities of ignorants, spreaders and
//! stiflers among the class members that are not inoculated. Inoculation
//! enters the modified dynamics as a factor `(1 - g_k)` on the rate at which
//! class `k` ignorants hear the rumor; aggregate densities weight each class
//! by `P(k)(1 - g_k)` so inoculated nodes count as neither ignorant nor
//! informed.
//!
//! The analytic routines (closed-form ignorant density, `Psi` fixed point,
//! final size) are written in units where the spontaneous stifling rate is 1.
//! A general `sigma` is absorbed by using the effective rate `lambda / sigma`
//! and by reporting `Psi(t) = sigma * int_0^t Phi`, which equals
//! `sum_k k^alpha P(k) rho_r(k, t)` for stifler-free initial states.

use std::io::Write;

use crate::error::{Error, Result};
use crate::inoculation::InoculationPlan;
use crate::netgen::{DegreeDistribution, TieStrengthParams};

const STATE_TOL: f64 = 1e-9;
const BLOWUP_TOL: f64 = 1e-6;
/// Cap on stiffness substeps within one output step.
const MAX_SUBSTEPS: usize = 100_000;
const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 100_000;
const DAMPED_ITER_BUDGET: usize = 10_000;
const DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Transmission rate.
    pub lambda: f64,
    /// Spreadness exponent: a degree-`k` spreader contacts `k^alpha` neighbours.
    pub alpha: f64,
    /// Spontaneous stifling rate.
    pub sigma: f64,
    /// Contact stifling rate; only the classical dynamics use it.
    pub delta: f64,
    pub tie: TieStrengthParams,
}

impl ModelParams {
    /// `sigma = 1`, `delta = 0`, `b = 1`.
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            lambda,
            alpha,
            sigma: 1.0,
            delta: 0.0,
            tie: TieStrengthParams::with_beta(beta),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn beta(&self) -> f64 {
        self.tie.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!(
                "delta must be nonnegative, got {}",
                self.delta
            )));
        }
        if !self.tie.beta.is_finite() || !(self.tie.b > 0.0) {
            return Err(Error::invalid("tie strength needs finite beta and b > 0"));
        }
        Ok(())
    }

    /// `lambda / sigma`, the rate in the units of the analytic formulas.
    pub fn effective_lambda(&self) -> f64 {
        self.lambda / self.sigma
    }
}

/// Per-class densities, aligned with the distribution's support.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeClassState {
    pub t: f64,
    pub rho_i: Vec<f64>,
    pub rho_s: Vec<f64>,
    pub rho_r: Vec<f64>,
}

impl DegreeClassState {
    /// Every class starts with spreader density `s0` and no stiflers.
    pub fn seeded(dist: &DegreeDistribution, s0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s0) {
            return Err(Error::invalid(format!(
                "initial spreader density must lie in [0, 1], got {s0}"
            )));
        }
        let n = dist.len();
        Ok(Self {
            t: 0.0,
            rho_i: vec![1.0 - s0; n],
            rho_s: vec![s0; n],
            rho_r: vec![0.0; n],
        })
    }

    pub fn validate(&self, dist: &DegreeDistribution) -> Result<()> {
        let n = dist.len();
        if self.rho_i.len() != n || self.rho_s.len() != n || self.rho_r.len() != n {
            return Err(Error::InvalidState(format!(
                "state has {} classes, distribution has {n}",
                self.rho_i.len()
            )));
        }
        for j in 0..n {
            let (i, s, r) = (self.rho_i[j], self.rho_s[j], self.rho_r[j]);
            if [i, s, r]
                .iter()
                .any(|x| !(-STATE_TOL..=1.0 + STATE_TOL).contains(x))
            {
                return Err(Error::InvalidState(format!(
                    "class {j} has a density outside [0, 1]"
                )));
            }
            if (i + s + r - 1.0).abs() > STATE_TOL {
                return Err(Error::InvalidState(format!(
                    "class {j} densities sum to {} instead of 1",
                    i + s + r
                )));
            }
        }
        Ok(())
    }
}

/// Per-class time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub d_i: Vec<f64>,
    pub d_s: Vec<f64>,
    pub d_r: Vec<f64>,
}

/// Precomputed per-class coefficients of the modified dynamics.
struct Coefficients {
    /// `k^alpha P(k)`.
    spread_weight: Vec<f64>,
    /// `lambda (1 - g_k) k^(1+beta) / <k^(1+beta)>`.
    infection_rate: Vec<f64>,
    /// `P(k) (1 - g_k)`.
    population: Vec<f64>,
    sigma: f64,
}

impl Coefficients {
    fn new(
        dist: &DegreeDistribution,
        p: &ModelParams,
        plan: &InoculationPlan,
        lambda: f64,
    ) -> Result<Self> {
        let g = plan.profile(dist)?;
        let exponent = 1.0 + p.beta();
        let norm = dist.moment(exponent);
        let mut spread_weight = Vec::with_capacity(dist.len());
        let mut infection_rate = Vec::with_capacity(dist.len());
        let mut population = Vec::with_capacity(dist.len());
        for ((k, pk), gk) in dist.iter().zip(&g) {
            let kf = f64::from(k);
            spread_weight.push(kf.powf(p.alpha) * pk);
            infection_rate.push(lambda * (1.0 - gk) * kf.powf(exponent) / norm);
            population.push(pk * (1.0 - gk));
        }
        Ok(Self {
            spread_weight,
            infection_rate,
            population,
            sigma: p.sigma,
        })
    }

    fn phi(&self, rho_s: &[f64]) -> f64 {
        self.spread_weight
            .iter()
            .zip(rho_s)
            .map(|(w, s)| w * s)
            .sum()
    }
}

fn modified_rhs(
    c: &Coefficients,
    rho_i: &[f64],
    rho_s: &[f64],
    d_i: &mut [f64],
    d_s: &mut [f64],
    d_r: &mut [f64],
) -> f64 {
    let phi = c.phi(rho_s);
    for j in 0..rho_i.len() {
        let infection = c.infection_rate[j] * rho_i[j] * phi;
        d_i[j] = -infection;
        d_s[j] = infection - c.sigma * rho_s[j];
        d_r[j] = c.sigma * rho_s[j];
    }
    phi
}

/// Modified dynamics with spreadness `k^alpha`, tie exponent `beta`, no
/// contact stifling, and optional inoculation.
pub fn derivatives_modified(
    state: &DegreeClassState,
    dist: &DegreeDistribution,
    p: &ModelParams,
    plan: &InoculationPlan,
) -> Result<Derivatives> {
    state.validate(dist)?;
    p.validate()?;
    let c = Coefficients::new(dist, p, plan, p.lambda)?;
    let n = dist.len();
    let mut d = Derivatives {
        d_i: vec![0.0; n],
        d_s: vec![0.0; n],
        d_r: vec![0.0; n],
    };
    modified_rhs(
        &c,
        &state.rho_i,
        &state.rho_s,
        &mut d.d_i,
        &mut d.d_s,
        &mut d.d_r,
    );
    Ok(d)
}

/// Classical dynamics with linear contacts, rates `lambda`, `delta`, `sigma`
/// and the uncorrelated closure `P(l|k) = l P(l) / <k>`.
pub fn derivatives_classical(
    state: &DegreeClassState,
    dist: &DegreeDistribution,
    p: &ModelParams,
) -> Result<Derivatives> {
    state.validate(dist)?;
    p.validate()?;
    let mean = dist.mean_degree();
    let mut spreading = 0.0;
    let mut aware = 0.0;
    for ((k, pk), (s, r)) in dist.iter().zip(state.rho_s.iter().zip(&state.rho_r)) {
        let kf = f64::from(k);
        spreading += kf * pk * s;
        aware += kf * pk * (s + r);
    }
    let aware = aware / mean;
    let n = dist.len();
    let mut d = Derivatives {
        d_i: vec![0.0; n],
        d_s: vec![0.0; n],
        d_r: vec![0.0; n],
    };
    for (j, k) in dist.support().iter().enumerate() {
        let kf = f64::from(*k);
        let infection = p.lambda * kf / mean * state.rho_i[j] * spreading;
        let contact_stifling = kf * p.delta * state.rho_s[j] * aware;
        d.d_i[j] = -infection;
        d.d_s[j] = infection - contact_stifling - p.sigma * state.rho_s[j];
        d.d_r[j] = contact_stifling + p.sigma * state.rho_s[j];
    }
    Ok(d)
}

/// One sample of the aggregate densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub t: f64,
    /// Informed density `sum_k P(k)(1-g_k) rho_r(k,t)`.
    pub r: f64,
    pub s: f64,
    pub i: f64,
    /// `sum_k k^alpha P(k) rho_s(k,t)`.
    pub phi: f64,
    /// `sigma * int_0^t Phi`.
    pub psi: f64,
}

/// Output of [`integrate`]: aggregates every `dt`, per-class snapshots at a
/// coarser stride, and the terminal state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Aggregate>,
    pub snapshots: Vec<DegreeClassState>,
    pub final_state: DegreeClassState,
    /// Mean inoculated fraction `sum_k g_k P(k)`.
    pub inoculated: f64,
    pub support: Vec<u32>,
}

impl Trajectory {
    pub fn last(&self) -> &Aggregate {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn final_size(&self) -> f64 {
        self.last().r
    }

    pub fn peak_spreaders(&self) -> f64 {
        self.samples.iter().map(|a| a.s).fold(0.0, f64::max)
    }

    /// `t,R,S,I,Phi,Psi`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,R,S,I,Phi,Psi")?;
        for a in &self.samples {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e}",
                fmt_time(a.t),
                a.r,
                a.s,
                a.i,
                a.phi,
                a.psi
            )?;
        }
        Ok(())
    }

    /// `t,k,rho_i,rho_s,rho_r` for every snapshot.
    pub fn write_class_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,k,rho_i,rho_s,rho_r")?;
        for s in &self.snapshots {
            for (j, k) in self.support.iter().enumerate() {
                writeln!(
                    w,
                    "{},{k},{:e},{:e},{:e}",
                    fmt_time(s.t),
                    s.rho_i[j],
                    s.rho_s[j],
                    s.rho_r[j]
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn fmt_time(t: f64) -> String {
    format!("{:.6}", t)
}

/// Integration settings; defaults are `dt = 0.01`, `t_end = 100`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Keep a per-class snapshot every this many steps (the initial and final
    /// states are always kept).
    pub snapshot_every: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt: 0.01,
            snapshot_every: 100,
        }
    }
}

/// Fixed-step RK4 over the modified dynamics.
pub fn integrate(
    initial: &DegreeClassState,
    dist: &DegreeDistribution,
    p: &ModelParams,
    plan: &InoculationPlan,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let cfg = IntegrationConfig {
        t_end,
        dt,
        snapshot_every: steps.div_ceil(200).max(1),
    };
    integrate_with(initial, dist, p, plan, &cfg)
}

pub fn integrate_with(
    initial: &DegreeClassState,
    dist: &DegreeDistribution,
    p: &ModelParams,
    plan: &InoculationPlan,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    if !(cfg.dt > 0.0) {
        return Err(Error::invalid(format!(
            "dt must be positive, got {}",
            cfg.dt
        )));
    }
    if !(cfg.t_end >= 0.0) {
        return Err(Error::invalid(format!(
            "t_end must be nonnegative, got {}",
            cfg.t_end
        )));
    }
    p.validate()?;
    initial.validate(dist)?;
    let c = Coefficients::new(dist, p, plan, p.lambda)?;
    let inoculated = plan.mean_fraction(dist)?;
    let n = dist.len();

    // layout: [rho_i | rho_s | rho_r | psi]
    let mut y = Vec::with_capacity(3 * n + 1);
    y.extend_from_slice(&initial.rho_i);
    y.extend_from_slice(&initial.rho_s);
    y.extend_from_slice(&initial.rho_r);
    y.push(0.0);

    let rhs = |y: &[f64], out: &mut [f64]| {
        let (yi, rest) = y.split_at(n);
        let (ys, _) = rest.split_at(n);
        let (oi, rest) = out.split_at_mut(n);
        let (os, rest) = rest.split_at_mut(n);
        let (or, opsi) = rest.split_at_mut(n);
        let phi = modified_rhs(&c, yi, ys, oi, os, or);
        opsi[0] = c.sigma * phi;
    };
    let aggregate = |t: f64, y: &[f64]| -> Aggregate {
        let (yi, rest) = y.split_at(n);
        let (ys, rest) = rest.split_at(n);
        let (yr, psi) = rest.split_at(n);
        let dot = |v: &[f64]| c.population.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        Aggregate {
            t,
            r: dot(yr),
            s: dot(ys),
            i: dot(yi),
            phi: c.phi(ys),
            psi: psi[0],
        }
    };
    let snapshot = |t: f64, y: &[f64]| DegreeClassState {
        t,
        rho_i: y[..n].to_vec(),
        rho_s: y[n..2 * n].to_vec(),
        rho_r: y[2 * n..3 * n].to_vec(),
    };

    let full_steps = (cfg.t_end / cfg.dt + 1e-9).floor() as usize;
    let remainder = cfg.t_end - full_steps as f64 * cfg.dt;
    let partial = remainder > 1e-9 * cfg.dt.max(1.0);
    let total_steps = full_steps + usize::from(partial);

    let mut samples = Vec::with_capacity(total_steps + 1);
    let mut snapshots = vec![snapshot(initial.t, &y)];
    samples.push(aggregate(initial.t, &y));

    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
    );
    let max_rate = c.infection_rate.iter().copied().fold(0.0, f64::max);
    let mut t = initial.t;
    for step in 1..=total_steps {
        let h = if step > full_steps { remainder } else { cfg.dt };
        // High-degree classes make the infection term stiff; substep so that
        // the fastest local rate times the substep stays below one.
        let mut left = h;
        let mut substeps = 0usize;
        while left > 0.0 {
            // Fastest local rates: depletion of the top class, and the growth
            // mode of the spreaders through Phi.
            let growth: f64 = (0..n)
                .map(|j| c.infection_rate[j] * c.spread_weight[j] * y[j].max(0.0))
                .sum();
            let rate = (max_rate * c.phi(&y[n..2 * n]).max(0.0)).max(growth) + c.sigma;
            let hs = if rate * left <= 1.0 { left } else { 1.0 / rate };
            substeps += 1;
            if !hs.is_finite() || substeps > MAX_SUBSTEPS {
                return Err(Error::IntegrationBlowup {
                    t,
                    detail: format!(
                        "step needs more than {MAX_SUBSTEPS} substeps (local rate {rate:e})"
                    ),
                });
            }
            rhs(&y, &mut k1);
            for j in 0..len {
                tmp[j] = y[j] + 0.5 * hs * k1[j];
            }
            rhs(&tmp, &mut k2);
            for j in 0..len {
                tmp[j] = y[j] + 0.5 * hs * k2[j];
            }
            rhs(&tmp, &mut k3);
            for j in 0..len {
                tmp[j] = y[j] + hs * k3[j];
            }
            rhs(&tmp, &mut k4);
            for j in 0..len {
                y[j] += hs / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            left = if hs == left { 0.0 } else { left - hs };
        }
        t = initial.t
            + if step > full_steps {
                cfg.t_end
            } else {
                step as f64 * cfg.dt
            };
        if let Some(j) = y[..3 * n]
            .iter()
            .position(|v| !(-BLOWUP_TOL..=1.0 + BLOWUP_TOL).contains(v))
        {
            return Err(Error::IntegrationBlowup {
                t,
                detail: format!("component {j} reached {}", y[j]),
            });
        }
        samples.push(aggregate(t, &y));
        if step % cfg.snapshot_every.max(1) == 0 && step != total_steps {
            snapshots.push(snapshot(t, &y));
        }
    }
    let final_state = snapshot(t, &y);
    if total_steps > 0 {
        snapshots.push(final_state.clone());
    }
    Ok(Trajectory {
        samples,
        snapshots,
        final_state,
        inoculated,
        support: dist.support().to_vec(),
    })
}

/// Right-hand side of the self-consistency equation,
/// `F(Psi) = sum_k k^alpha P(k) (1 - exp(-c_k Psi))` with
/// `c_k = (lambda/sigma)(1 - g_k) k^(1+beta) / <k^(1+beta)>`.
struct SelfConsistency {
    weight: Vec<f64>,
    rate: Vec<f64>,
}

impl SelfConsistency {
    fn new(dist: &DegreeDistribution, p: &ModelParams, plan: &InoculationPlan) -> Result<Self> {
        p.validate()?;
        let c = Coefficients::new(dist, p, plan, p.effective_lambda())?;
        Ok(Self {
            weight: c.spread_weight,
            rate: c.infection_rate,
        })
    }

    fn eval(&self, psi: f64) -> f64 {
        self.weight
            .iter()
            .zip(&self.rate)
            .map(|(w, c)| -w * (-c * psi).exp_m1())
            .sum()
    }

    fn slope_at_zero(&self) -> f64 {
        self.weight.iter().zip(&self.rate).map(|(w, c)| w * c).sum()
    }
}

/// Largest fixed point of `Psi = <k^alpha> - sum_k k^alpha P(k)
/// exp(-(lambda/sigma)(1-g_k) k^(1+beta) Psi / <k^(1+beta)>)`.
///
/// Returns 0 when the slope of the right-hand side at the origin is at most
/// one. Otherwise iterates with damping 0.5 from `<k^alpha>` downward, which
/// approaches the root monotonically from above, and falls back to
/// bisection if the iteration stalls near the threshold.
pub fn psi_fixed_point(
    dist: &DegreeDistribution,
    p: &ModelParams,
    plan: &InoculationPlan,
) -> Result<f64> {
    let f = SelfConsistency::new(dist, p, plan)?;
    if f.slope_at_zero() <= 1.0 {
        return Ok(0.0);
    }
    let mut x = dist.moment(p.alpha);
    for _ in 0..DAMPED_ITER_BUDGET {
        let next = (1.0 - DAMPING) * x + DAMPING * f.eval(x);
        if (next - x).abs() < FIXED_POINT_TOL * 1e-2 {
            return Ok(next);
        }
        x = next;
    }
    // the iterate still sits above the root; f(y) > y on (0, root)
    let (mut lo, mut hi) = (0.0, x);
    for _ in DAMPED_ITER_BUDGET..FIXED_POINT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if f.eval(mid) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < FIXED_POINT_TOL * 1e-3 {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Final informed density
/// `R = 1 - sum_k P(k)(1-g_k) exp(-c_k Psi*) - sum_k P(k) g_k`.
pub fn final_rumor_size(
    dist: &DegreeDistribution,
    p: &ModelParams,
    plan: &InoculationPlan,
) -> Result<f64> {
    let psi = psi_fixed_point(dist, p, plan)?;
    let c = Coefficients::new(dist, p, plan, p.effective_lambda())?;
    let r: f64 = c
        .population
        .iter()
        .zip(&c.infection_rate)
        .map(|(pop, rate)| -pop * (-rate * psi).exp_m1())
        .sum();
    Ok(r.clamp(0.0, 1.0))
}

/// `rho_i(k, t) = exp(-(lambda/sigma) k^(1+beta) Psi(t) / <k^(1+beta)>)`.
pub fn closed_form_ignorant(k: u32, psi_t: f64, dist: &DegreeDistribution, p: &ModelParams) -> f64 {
    closed_form_ignorant_inoculated(k, psi_t, dist, p, 0.0)
}

/// Closed form with the class inoculation fraction `g_k`.
pub fn closed_form_ignorant_inoculated(
    k: u32,
    psi_t: f64,
    dist: &DegreeDistribution,
    p: &ModelParams,
    g_k: f64,
) -> f64 {
    let exponent = 1.0 + p.beta();
    let rate =
        p.effective_lambda() * (1.0 - g_k) * f64::from(k).powf(exponent) / dist.moment(exponent);
    (-rate * psi_t).exp()
}
