//! Random and targeted inoculation plans.
//!
//! Inoculated nodes stay in the graph as removed sites: they keep their edges
//! (so neighbour degrees and strengths are unchanged) but never adopt or pass
//! on the rumor.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::netgen::{DegreeDistribution, Network};

const PLAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InoculationPlan {
    None,
    /// Every node independently with probability `g`.
    Random {
        g: f64,
    },
    Targeted(TargetedProfile),
}

/// Step profile `g_k = 1` above `k_t`, `f` at `k_t`, `0` below.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetedProfile {
    pub k_t: u32,
    pub f: f64,
    /// Mean inoculated fraction, known when the plan was fitted to a distribution.
    pub g_bar: Option<f64>,
    /// Support the plan was fitted to; `None` for a free-standing cutoff.
    pub support: Option<Vec<u32>>,
}

impl TargetedProfile {
    pub fn g_k(&self, k: u32) -> f64 {
        match k.cmp(&self.k_t) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => self.f,
            std::cmp::Ordering::Less => 0.0,
        }
    }
}

impl InoculationPlan {
    /// Free-standing targeted cutoff, not tied to any distribution.
    pub fn targeted_cutoff(k_t: u32, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::invalid(format!(
                "cutoff fraction must lie in [0, 1], got {f}"
            )));
        }
        Ok(Self::Targeted(TargetedProfile {
            k_t,
            f,
            g_bar: None,
            support: None,
        }))
    }

    pub fn g_k(&self, k: u32) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Random { g } => *g,
            Self::Targeted(t) => t.g_k(k),
        }
    }

    /// Per-class fractions aligned with `dist.support()`.
    ///
    /// A targeted plan fitted to one distribution is rejected for another.
    pub fn profile(&self, dist: &DegreeDistribution) -> Result<Vec<f64>> {
        if let Self::Targeted(TargetedProfile {
            support: Some(s), ..
        }) = self
        {
            if s.as_slice() != dist.support() {
                return Err(Error::SupportMismatch);
            }
        }
        Ok(dist.support().iter().map(|&k| self.g_k(k)).collect())
    }

    /// `sum_k g_k P(k)`.
    pub fn mean_fraction(&self, dist: &DegreeDistribution) -> Result<f64> {
        let g = self.profile(dist)?;
        Ok(g.iter().zip(dist.probabilities()).map(|(g, p)| g * p).sum())
    }

    pub fn is_none(&self) -> bool {
        match self {
            Self::None => true,
            Self::Random { g } => *g == 0.0,
            Self::Targeted(_) => false,
        }
    }

    /// `k,g_k` rows for targeted plans, `g=<value>` otherwise.
    pub fn write<W: Write>(&self, dist: Option<&DegreeDistribution>, mut w: W) -> Result<()> {
        match self {
            Self::None => writeln!(w, "g=0")?,
            Self::Random { g } => writeln!(w, "g={g}")?,
            Self::Targeted(t) => {
                let support: Vec<u32> = match (dist, &t.support) {
                    (Some(d), _) => {
                        self.profile(d)?;
                        d.support().to_vec()
                    }
                    (None, Some(s)) => s.clone(),
                    (None, None) => {
                        return Err(Error::invalid(
                            "targeted cutoff needs a degree support to export",
                        ))
                    }
                };
                writeln!(w, "k,g_k")?;
                for k in support {
                    writeln!(w, "{k},{}", t.g_k(k))?;
                }
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut rows: Vec<(u32, f64)> = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "k,g_k" {
                continue;
            }
            if let Some(v) = line.strip_prefix("g=") {
                let g: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i + 1, "bad fraction"))?;
                return make_random_plan(g);
            }
            let (k, g) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected `k,g_k` or `g=<value>`"))?;
            let k = k
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, "bad degree"))?;
            let g = g
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, "bad fraction"))?;
            rows.push((k, g));
        }
        if rows.is_empty() {
            return Err(Error::parse(1, "empty plan"));
        }
        rows.sort_by_key(|r| r.0);
        let support: Vec<u32> = rows.iter().map(|r| r.0).collect();
        let (k_t, f) = match rows.iter().position(|r| r.1 > 0.0) {
            Some(i) => (rows[i].0, rows[i].1),
            None => (*support.last().unwrap(), 0.0),
        };
        let plan = TargetedProfile {
            k_t,
            f,
            g_bar: None,
            support: Some(support),
        };
        if rows
            .iter()
            .any(|&(k, g)| (plan.g_k(k) - g).abs() > PLAN_TOL)
        {
            return Err(Error::invalid(
                "targeted profile is not a step at a single cutoff",
            ));
        }
        Ok(Self::Targeted(plan))
    }
}

pub fn make_random_plan(g: f64) -> Result<InoculationPlan> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::invalid(format!(
            "inoculation fraction must lie in [0, 1], got {g}"
        )));
    }
    Ok(InoculationPlan::Random { g })
}

/// Fits the step profile to mean fraction `g_bar`: `k_t` is the smallest
/// degree whose strict upper tail `sum_{k>k_t} P(k)` does not exceed `g_bar`,
/// and `f` fills the remainder at `k_t`.
pub fn make_targeted_plan(dist: &DegreeDistribution, g_bar: f64) -> Result<InoculationPlan> {
    if !(0.0..=1.0).contains(&g_bar) {
        return Err(Error::invalid(format!(
            "mean inoculation fraction must lie in [0, 1], got {g_bar}"
        )));
    }
    let mut tail = 0.0;
    let mut cut = None;
    for (k, p) in dist.iter().collect::<Vec<_>>().into_iter().rev() {
        if tail + p > g_bar + PLAN_TOL {
            cut = Some((k, ((g_bar - tail) / p).clamp(0.0, 1.0)));
            break;
        }
        tail += p;
    }
    let (k_t, f) = cut.unwrap_or((dist.k_min(), 1.0));
    Ok(InoculationPlan::Targeted(TargetedProfile {
        k_t,
        f,
        g_bar: Some(g_bar),
        support: Some(dist.support().to_vec()),
    }))
}

/// Sorted ids of the inoculated nodes.
pub fn apply_plan<R: Rng + ?Sized>(
    network: &Network,
    plan: &InoculationPlan,
    rng: &mut R,
) -> Vec<usize> {
    apply_plan_excluding(network, plan, &[], rng)
}

/// Like [`apply_plan`], but nodes in `exempt` (the initial spreaders) are
/// never inoculated.
pub fn apply_plan_excluding<R: Rng + ?Sized>(
    network: &Network,
    plan: &InoculationPlan,
    exempt: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let n = network.node_count();
    let mut is_exempt = vec![false; n];
    for &v in exempt {
        is_exempt[v] = true;
    }
    let mut chosen = match plan {
        InoculationPlan::None => Vec::new(),
        InoculationPlan::Random { g } => (0..n)
            .filter(|&v| {
                // draw for every node so the stream does not depend on exemptions
                let hit = rng.gen_bool(*g);
                hit && !is_exempt[v]
            })
            .collect(),
        InoculationPlan::Targeted(t) => {
            let k_t = t.k_t as usize;
            let mut out: Vec<usize> = (0..n)
                .filter(|&v| network.degree(v) > k_t && !is_exempt[v])
                .collect();
            let mut at_cut: Vec<usize> = (0..n)
                .filter(|&v| network.degree(v) == k_t && !is_exempt[v])
                .collect();
            let take = (t.f * at_cut.len() as f64).round() as usize;
            let (picked, _) = at_cut.partial_shuffle(rng, take);
            out.extend_from_slice(picked);
            out
        }
    };
    chosen.sort_unstable();
    chosen
}

pub fn inoculation_mask(n: usize, ids: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in ids {
        mask[v] = true;
    }
    mask
}
