//! Agent-level simulation of the modified rumor dynamics.
//!
//! Each step of length `dt`, every spreader `i` of degree `k_i`:
//!
//! 1. draws a contact count `floor(k_i^alpha) + Bernoulli(frac(k_i^alpha))`,
//! 2. picks that many distinct neighbours uniformly,
//! 3. converts each contacted ignorant `j` with probability
//!    `min(1, lambda k_i (w_ij / S_i) dt)`, where `S_i` is the graph-local
//!    strength `sum_j w_ij`,
//! 4. turns stifler with probability `1 - exp(-sigma dt)`.
//!
//! Updates are synchronous: nodes informed during a step start spreading on
//! the next one. Inoculated nodes neither send nor receive.

use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inoculation::{apply_plan_excluding, inoculation_mask, InoculationPlan};
use crate::meanfield::{fmt_time, ModelParams};
use crate::netgen::{tie_strength, Network};
use crate::rng::{derived_stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ignorant,
    Spreader,
    Stifler,
    Inoculated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatusCounts {
    pub ignorant: usize,
    pub spreader: usize,
    pub stifler: usize,
    pub inoculated: usize,
}

impl StatusCounts {
    pub fn total(&self) -> usize {
        self.ignorant + self.spreader + self.stifler + self.inoculated
    }

    fn shift(&mut self, from: Status, to: Status) {
        *self.slot(from) -= 1;
        *self.slot(to) += 1;
    }

    fn slot(&mut self, s: Status) -> &mut usize {
        match s {
            Status::Ignorant => &mut self.ignorant,
            Status::Spreader => &mut self.spreader,
            Status::Stifler => &mut self.stifler,
            Status::Inoculated => &mut self.inoculated,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub status: Vec<Status>,
    pub time: f64,
    pub counts: StatusCounts,
}

impl SimState {
    pub fn new(n: usize, inoculated: &[bool], seeds: &[usize]) -> Result<Self> {
        let mut status = vec![Status::Ignorant; n];
        let mut counts = StatusCounts {
            ignorant: n,
            ..Default::default()
        };
        for v in (0..n).filter(|&v| inoculated[v]) {
            status[v] = Status::Inoculated;
            counts.shift(Status::Ignorant, Status::Inoculated);
        }
        for &s in seeds {
            match status[s] {
                Status::Ignorant => {
                    status[s] = Status::Spreader;
                    counts.shift(Status::Ignorant, Status::Spreader);
                }
                Status::Inoculated => return Err(Error::NoSeedAvailable),
                _ => {}
            }
        }
        if counts.spreader == 0 {
            return Err(Error::NoSeedAvailable);
        }
        Ok(Self {
            status,
            time: 0.0,
            counts,
        })
    }

    fn set(&mut self, v: usize, to: Status) {
        let from = self.status[v];
        debug_assert!(
            matches!(
                (from, to),
                (Status::Ignorant, Status::Spreader) | (Status::Spreader, Status::Stifler)
            ),
            "illegal transition {from:?} -> {to:?}"
        );
        self.counts.shift(from, to);
        self.status[v] = to;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub i: f64,
    pub s: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub samples: Vec<TracePoint>,
    /// Fraction of all nodes that heard the rumor by the end of the run.
    pub final_r: f64,
    pub inoculated_fraction: f64,
    pub seed: u64,
}

impl SimTrace {
    pub fn peak_s(&self) -> f64 {
        self.samples.iter().map(|p| p.s).fold(0.0, f64::max)
    }

    /// `t,I,S,R`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,I,S,R")?;
        for p in &self.samples {
            writeln!(w, "{},{:e},{:e},{:e}", fmt_time(p.t), p.i, p.s, p.r)?;
        }
        Ok(())
    }
}

/// How the initial spreaders are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seeding {
    Count(usize),
    /// Fraction of `N`, rounded, at least one.
    Fraction(f64),
}

impl Seeding {
    pub fn count(&self, n: usize) -> usize {
        match *self {
            Self::Count(c) => c,
            Self::Fraction(f) => ((f * n as f64).round() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub seeding: Seeding,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 1_000.0,
            seeding: Seeding::Count(1),
        }
    }
}

/// Per-node quantities fixed for the whole run.
struct Prepared<'a> {
    network: &'a Network,
    /// `k^alpha` per node.
    contacts: Vec<f64>,
    /// Per-adjacency-slot success probability `min(1, lambda k_i w_ij / S_i dt)`.
    success: Vec<Vec<f64>>,
    stifle: f64,
}

impl<'a> Prepared<'a> {
    fn new(network: &'a Network, p: &ModelParams, dt: f64) -> Self {
        let n = network.node_count();
        let mut contacts = Vec::with_capacity(n);
        let mut success = Vec::with_capacity(n);
        for v in 0..n {
            let k = network.degree(v);
            contacts.push((k as f64).powf(p.alpha));
            let kv = k as u32;
            let weights: Vec<f64> = network
                .neighbors(v)
                .iter()
                .map(|&u| tie_strength(kv, network.degree(u) as u32, &p.tie))
                .collect();
            let strength: f64 = weights.iter().sum();
            success.push(
                weights
                    .iter()
                    .map(|w| (p.lambda * k as f64 * w / strength * dt).min(1.0))
                    .collect(),
            );
        }
        Self {
            network,
            contacts,
            success,
            stifle: 1.0 - (-p.sigma * dt).exp(),
        }
    }
}

/// Chooses seeds uniformly, inoculates per `plan` with the seeds exempt, and
/// runs the dynamics. `seed` is recorded in the trace.
pub fn run(
    network: &Network,
    p: &ModelParams,
    plan: &InoculationPlan,
    cfg: &SimConfig,
    rng: &mut Stream,
    seed: u64,
) -> Result<SimTrace> {
    let n = network.node_count();
    let count = cfg.seeding.count(n);
    if count == 0 || count > n {
        return Err(Error::NoSeedAvailable);
    }
    let seeds = index::sample(rng, n, count).into_vec();
    let ids = apply_plan_excluding(network, plan, &seeds, rng);
    let mask = inoculation_mask(n, &ids);
    run_prepared(network, p, &mask, &seeds, cfg, rng, seed)
}

/// Runs from explicit seeds and an explicit inoculation mask.
pub fn run_prepared(
    network: &Network,
    p: &ModelParams,
    inoculated: &[bool],
    seeds: &[usize],
    cfg: &SimConfig,
    rng: &mut impl Rng,
    seed: u64,
) -> Result<SimTrace> {
    p.validate()?;
    if !(cfg.dt > 0.0) {
        return Err(Error::invalid(format!(
            "dt must be positive, got {}",
            cfg.dt
        )));
    }
    let n = network.node_count();
    let mut state = SimState::new(n, inoculated, seeds)?;
    let prep = Prepared::new(network, p, cfg.dt);
    let nf = n as f64;
    let point = |st: &SimState| TracePoint {
        t: st.time,
        i: st.counts.ignorant as f64 / nf,
        s: st.counts.spreader as f64 / nf,
        r: st.counts.stifler as f64 / nf,
    };
    let mut samples = vec![point(&state)];
    let mut spreaders: Vec<usize> = (0..n)
        .filter(|&v| state.status[v] == Status::Spreader)
        .collect();
    let mut informed = Vec::new();
    let mut step = 0usize;
    while !spreaders.is_empty() && state.time < cfg.t_max - 1e-12 {
        informed.clear();
        for &i in &spreaders {
            let nbrs = prep.network.neighbors(i);
            if nbrs.is_empty() {
                continue;
            }
            let mean = prep.contacts[i];
            let mut c = mean.floor() as usize;
            let frac = mean - mean.floor();
            if frac > 0.0 && rng.gen_bool(frac) {
                c += 1;
            }
            let c = c.min(nbrs.len());
            for slot in index::sample(rng, nbrs.len(), c) {
                let j = nbrs[slot];
                if state.status[j] == Status::Ignorant && rng.gen_bool(prep.success[i][slot]) {
                    state.set(j, Status::Spreader);
                    informed.push(j);
                }
            }
        }
        spreaders.retain(|&i| {
            if rng.gen_bool(prep.stifle) {
                state.set(i, Status::Stifler);
                false
            } else {
                true
            }
        });
        spreaders.extend_from_slice(&informed);
        step += 1;
        state.time = step as f64 * cfg.dt;
        samples.push(point(&state));
    }
    let c = state.counts;
    Ok(SimTrace {
        samples,
        final_r: (c.stifler + c.spreader) as f64 / nf,
        inoculated_fraction: c.inoculated as f64 / nf,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunFinal {
    pub run: usize,
    pub final_r: f64,
    pub peak_s: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub mean_r: f64,
    pub std_r: f64,
    pub mean_peak_s: f64,
    pub finals: Vec<RunFinal>,
    /// Sample-wise mean of the traces; finished runs hold their last value.
    pub mean_trace: Vec<TracePoint>,
}

impl EnsembleSummary {
    /// `run,final_R,peak_S,seed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "run,final_R,peak_S,seed")?;
        for f in &self.finals {
            writeln!(w, "{},{:e},{:e},{}", f.run, f.final_r, f.peak_s, f.seed)?;
        }
        Ok(())
    }
}

/// Network used by every run, or regenerated per run from the run's stream.
pub enum NetworkSource<'a> {
    Fixed(&'a Network),
    Generated(&'a (dyn Fn(&mut Stream) -> Result<Network> + Sync)),
}

/// Independent runs in parallel; run `r` uses the stream keyed by
/// `(master_seed, r)`, so the summary does not depend on scheduling.
pub fn ensemble(
    source: NetworkSource<'_>,
    p: &ModelParams,
    plan: &InoculationPlan,
    cfg: &SimConfig,
    runs: usize,
    master_seed: u64,
) -> Result<EnsembleSummary> {
    if runs == 0 {
        return Err(Error::invalid("ensemble needs at least one run"));
    }
    let traces: Vec<SimTrace> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let seed = crate::rng::derive_seed(master_seed, &[r as u64]);
            let mut rng = derived_stream(master_seed, &[r as u64]);
            match &source {
                NetworkSource::Fixed(net) => run(net, p, plan, cfg, &mut rng, seed),
                NetworkSource::Generated(make) => {
                    let net = make(&mut rng)?;
                    run(&net, p, plan, cfg, &mut rng, seed)
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&traces))
}

pub fn summarize(traces: &[SimTrace]) -> EnsembleSummary {
    let m = traces.len() as f64;
    let finals: Vec<RunFinal> = traces
        .iter()
        .enumerate()
        .map(|(run, t)| RunFinal {
            run,
            final_r: t.final_r,
            peak_s: t.peak_s(),
            seed: t.seed,
        })
        .collect();
    let mean_r = finals.iter().map(|f| f.final_r).sum::<f64>() / m;
    let var = finals
        .iter()
        .map(|f| (f.final_r - mean_r).powi(2))
        .sum::<f64>()
        / m;
    let mean_peak_s = finals.iter().map(|f| f.peak_s).sum::<f64>() / m;
    let len = traces.iter().map(|t| t.samples.len()).max().unwrap_or(0);
    let dt = traces
        .iter()
        .find(|t| t.samples.len() > 1)
        .map(|t| t.samples[1].t - t.samples[0].t)
        .unwrap_or(0.0);
    let mean_trace = (0..len)
        .map(|k| {
            let mut acc = TracePoint {
                t: k as f64 * dt,
                i: 0.0,
                s: 0.0,
                r: 0.0,
            };
            for t in traces {
                let p = t
                    .samples
                    .get(k)
                    .unwrap_or_else(|| t.samples.last().unwrap());
                acc.i += p.i / m;
                acc.s += p.s / m;
                acc.r += p.r / m;
            }
            acc
        })
        .collect();
    EnsembleSummary {
        mean_r,
        std_r: var.sqrt(),
        mean_peak_s,
        finals,
        mean_trace,
    }
}
