//! Degree distributions, network generators and degree-derived tie strengths.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Normalized degree distribution `P(k)` on a finite, strictly increasing
/// support of positive degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    support: Vec<u32>,
    prob: Vec<f64>,
    gamma: Option<f64>,
    mean: f64,
}

impl DegreeDistribution {
    /// Truncated power law `P(k) ∝ k^-gamma` on `k_min..=floor(k_max)` with
    /// the hard cutoff `k_max = k_min N^(1/(gamma-1))`.
    pub fn powerlaw(gamma: f64, k_min: u32, n: usize) -> Result<Self> {
        if !(gamma > 2.0 && gamma <= 3.0) {
            return Err(Error::invalid(format!(
                "gamma must lie in (2, 3], got {gamma}"
            )));
        }
        if k_min == 0 {
            return Err(Error::invalid("k_min must be at least 1"));
        }
        if n < 2 {
            return Err(Error::invalid("network size must be at least 2"));
        }
        let k_max = hard_cutoff(gamma, k_min, n).floor();
        if k_max < f64::from(k_min) {
            return Err(Error::invalid(format!(
                "cutoff {k_max} lies below k_min {k_min}"
            )));
        }
        let support: Vec<u32> = (k_min..=k_max as u32).collect();
        let weights: Vec<f64> = support.iter().map(|&k| f64::from(k).powf(-gamma)).collect();
        let mut dist = Self::from_weights(support, weights)?;
        dist.gamma = Some(gamma);
        Ok(dist)
    }

    /// Distribution from `(degree, weight)` pairs; weights are renormalized.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let mut pairs = pairs.to_vec();
        pairs.sort_by_key(|&(k, _)| k);
        let (support, weights): (Vec<u32>, Vec<f64>) = pairs.into_iter().unzip();
        Self::from_weights(support, weights)
    }

    pub fn point_mass(k: u32) -> Result<Self> {
        Self::from_weights(vec![k], vec![1.0])
    }

    /// Empirical distribution of a degree sequence. Degree-zero entries are
    /// ignored since they cannot take part in spreading.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; max + 1];
        for &d in degrees {
            counts[d] += 1;
        }
        let (support, weights): (Vec<u32>, Vec<f64>) = counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, &c)| c > 0)
            .map(|(k, &c)| (k as u32, c as f64))
            .unzip();
        Self::from_weights(support, weights)
    }

    fn from_weights(support: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("empty degree support"));
        }
        if support[0] == 0 {
            return Err(Error::invalid("degrees must be positive"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("degree support must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(
                "probabilities must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("probabilities sum to zero"));
        }
        let prob: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mean = support
            .iter()
            .zip(&prob)
            .map(|(&k, p)| f64::from(k) * p)
            .sum();
        let dist = Self {
            support,
            prob,
            gamma: None,
            mean,
        };
        debug_assert!((dist.prob.iter().sum::<f64>() - 1.0).abs() < NORMALIZATION_TOL);
        Ok(dist)
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.support.iter().copied().zip(self.prob.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob(&self, k: u32) -> f64 {
        self.support
            .binary_search(&k)
            .map(|i| self.prob[i])
            .unwrap_or(0.0)
    }

    pub fn k_min(&self) -> u32 {
        self.support[0]
    }

    pub fn k_max(&self) -> u32 {
        *self.support.last().expect("non-empty support")
    }

    /// Power-law exponent, when the distribution was built from one.
    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Exponent in the `P(k) ~ k^(-2-gamma')` convention; `gamma = gamma' + 2`.
    pub fn gamma_prime(&self) -> Option<f64> {
        self.gamma.map(|g| g - 2.0)
    }

    /// `<k>`, cached at construction.
    pub fn mean_degree(&self) -> f64 {
        self.mean
    }

    /// `<k^q> = sum_k k^q P(k)`.
    pub fn moment(&self, q: f64) -> f64 {
        self.iter().map(|(k, p)| f64::from(k).powf(q) * p).sum()
    }

    /// `sum_k f(k) k^q P(k)`.
    pub fn weighted_moment(&self, q: f64, f: impl Fn(u32) -> f64) -> f64 {
        self.iter()
            .map(|(k, p)| f(k) * f64::from(k).powf(q) * p)
            .sum()
    }

    /// Draws one degree.
    pub fn sampler(&self) -> impl Distribution<u32> + '_ {
        let index = WeightedIndex::new(&self.prob).expect("validated probabilities");
        DegreeSampler {
            index,
            support: &self.support,
        }
    }

    /// Total-variation distance to another distribution.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut keys: Vec<u32> = self.support.iter().chain(&other.support).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|&k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,p")?;
        for (k, p) in self.iter() {
            writeln!(w, "{k},{p:e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line == "k,p") {
                continue;
            }
            let (k, p) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected `k,p`"))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, "bad degree"))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, "bad probability"))?;
            pairs.push((k, p));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Self::from_pairs(&pairs)
    }
}

struct DegreeSampler<'a> {
    index: WeightedIndex<f64>,
    support: &'a [u32],
}

impl Distribution<u32> for DegreeSampler<'_> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.support[self.index.sample(rng)]
    }
}

/// `k_min N^(1/(gamma-1))`, not floored.
pub fn hard_cutoff(gamma: f64, k_min: u32, n: usize) -> f64 {
    f64::from(k_min) * (n as f64).powf(1.0 / (gamma - 1.0))
}

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a network, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut net = Self::empty(n);
        let mut seen = HashSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
            }
            net.adjacency[u].push(v);
            net.adjacency[v].push(u);
        }
        for nbrs in &mut net.adjacency {
            nbrs.sort_unstable();
        }
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn degree_distribution(&self) -> Result<DegreeDistribution> {
        DegreeDistribution::from_degrees(&self.degrees())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Graph-local strength `S_i = sum_j a_ij w_ij`.
    pub fn node_strength(&self, v: usize, tie: &TieStrengthParams) -> f64 {
        let kv = self.degree(v) as u32;
        self.adjacency[v]
            .iter()
            .map(|&u| tie_strength(kv, self.degree(u) as u32, tie))
            .sum()
    }

    /// Edge-list text: `# nodes=<N>` then `u v` per line with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "# nodes={}", self.node_count()).unwrap();
        for (u, v) in self.edges() {
            writeln!(buf, "{u} {v}").unwrap();
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let n = loop {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::parse(1, "missing `# nodes=<N>` header"))?;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let n = line
                .strip_prefix('#')
                .map(str::trim)
                .and_then(|s| s.strip_prefix("nodes="))
                .ok_or_else(|| Error::parse(i + 1, "expected `# nodes=<N>` header"))?;
            break n
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(i + 1, "bad node count"))?;
        };
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::parse(i + 1, "expected `u v`"))
            };
            let (u, v) = (next()?, next()?);
            if u >= v {
                return Err(Error::parse(i + 1, "edges must be written with u < v"));
            }
            edges.push((u, v));
        }
        Self::from_edges(n, edges)
    }
}

/// Barabási–Albert growth from a complete seed graph on `m0` nodes; every new
/// node attaches `m` distinct edges with probability proportional to degree.
pub fn build_ba_network<R: Rng + ?Sized>(
    n: usize,
    m0: usize,
    m: usize,
    rng: &mut R,
) -> Result<Network> {
    if m == 0 || m > m0 || n <= m0 {
        return Err(Error::invalid(format!(
            "BA requires N > m0 >= m >= 1, got N={n}, m0={m0}, m={m}"
        )));
    }
    let mut edges = Vec::with_capacity(m0 * (m0 - 1) / 2 + m * (n - m0));
    // each edge endpoint appears once, so uniform picks are degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..m0 {
        for v in u + 1..m0 {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in m0..n {
        targets.clear();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.gen_range(0..new)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    Network::from_edges(n, edges)
}

/// Configuration-model result together with the number of erased stub pairs.
#[derive(Debug, Clone)]
pub struct ConfigurationNetwork {
    pub network: Network,
    /// Illegal pairs (self-loops or multi-edges) still present after the
    /// re-shuffle rounds, dropped from the final graph.
    pub erased_edges: usize,
}

const RESHUFFLE_ROUNDS: usize = 100;
const PARITY_RESAMPLES: usize = 10_000;

/// Configuration model: i.i.d. degrees from `dist`, stub matching with up to
/// 100 re-shuffles of the illegal stubs, then erasure of what remains.
pub fn build_configuration_network<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    n: usize,
    rng: &mut R,
) -> Result<ConfigurationNetwork> {
    if n < 2 {
        return Err(Error::invalid("configuration model requires N >= 2"));
    }
    let sampler = dist.sampler();
    let mut degrees: Vec<usize> = (0..n).map(|_| sampler.sample(rng) as usize).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        if dist.support().iter().all(|k| k % 2 == 1) && n % 2 == 1 {
            return Err(Error::InfeasibleDegreeSequence(
                "odd stub count cannot be fixed: every support degree is odd and N is odd".into(),
            ));
        }
        let fixed = (0..PARITY_RESAMPLES).any(|_| {
            degrees[n - 1] = sampler.sample(rng) as usize;
            degrees.iter().sum::<usize>() % 2 == 0
        });
        if !fixed {
            return Err(Error::InfeasibleDegreeSequence(format!(
                "stub count still odd after {PARITY_RESAMPLES} resamples of the last node"
            )));
        }
    }
    Ok(match_stubs(n, &degrees, rng))
}

fn match_stubs<R: Rng + ?Sized>(n: usize, degrees: &[usize], rng: &mut R) -> ConfigurationNetwork {
    let mut pool: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat(v).take(d))
        .collect();
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(pool.len() / 2);
    let mut edges = Vec::with_capacity(pool.len() / 2);
    for _ in 0..=RESHUFFLE_ROUNDS {
        pool.shuffle(rng);
        let mut rejected = Vec::new();
        for pair in pool.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && present.insert((u, v)) {
                edges.push((u, v));
            } else {
                rejected.extend_from_slice(pair);
            }
        }
        pool = rejected;
        if pool.is_empty() {
            break;
        }
    }
    let network = Network::from_edges(n, edges).expect("stub matching yields a simple graph");
    ConfigurationNetwork {
        network,
        erased_edges: pool.len() / 2,
    }
}

/// Tie-strength law `w_ij = b (k_i k_j)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieStrengthParams {
    pub beta: f64,
    pub b: f64,
}

impl TieStrengthParams {
    pub fn new(beta: f64, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!(
                "tie prefactor b must be positive, got {b}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        Ok(Self { beta, b })
    }

    pub fn with_beta(beta: f64) -> Self {
        Self { beta, b: 1.0 }
    }
}

impl Default for TieStrengthParams {
    fn default() -> Self {
        Self { beta: 0.0, b: 1.0 }
    }
}

pub fn tie_strength(k_i: u32, k_j: u32, p: &TieStrengthParams) -> f64 {
    // the product is symmetric, so argument order cannot change the result
    p.b * (f64::from(k_i) * f64::from(k_j)).powf(p.beta)
}

/// Ensemble node strength of a degree-`k` node under the uncorrelated
/// closure `P(l|k) = l P(l) / <k>`: `S_k = b k^(1+beta) <k^(1+beta)> / <k>`.
pub fn node_strength(dist: &DegreeDistribution, k: u32, p: &TieStrengthParams) -> f64 {
    let kf = f64::from(k);
    p.b * kf.powf(1.0 + p.beta) * dist.moment(1.0 + p.beta) / dist.mean_degree()
}
