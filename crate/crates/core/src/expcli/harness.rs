use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::scenario::{Engine, Family, GeneratorSpec, Scenario, Strategy};
use super::svg::{LinePlot, Series};
use crate::error::{Error, Result};
use crate::inoculation::{make_random_plan, make_targeted_plan, InoculationPlan};
use crate::meanfield::{integrate, DegreeClassState, ModelParams, Trajectory};
use crate::montecarlo::{ensemble, EnsembleSummary, NetworkSource, Seeding, SimConfig};
use crate::netgen::{
    build_ba_network, build_configuration_network, DegreeDistribution, Network, TieStrengthParams,
};
use crate::rng::{derive_seed, derived_stream};
use crate::thresholds::{
    threshold_modified, threshold_modified_bounded, threshold_random_inoc, threshold_targeted_inoc,
};

/// Stream-key namespaces, so network, ensemble and threshold draws never share
/// a stream.
const KEY_NETWORK: u64 = 1;
const KEY_ENSEMBLE: u64 = 2;

/// Rows per series kept in `time_series.csv`.
const TIME_SERIES_ROWS: usize = 400;

/// One cell of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub n_index: usize,
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub g: f64,
}

/// Cartesian product `N x lambda x alpha x beta x sigma x g`, in that nesting
/// order.
pub fn grid(s: &Scenario) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for (n_index, &n) in s.nodes.iter().enumerate() {
        for &lambda in &s.lambdas {
            for &alpha in &s.alphas {
                for &beta in &s.betas {
                    for &sigma in &s.sigmas {
                        for &g in &s.fractions {
                            out.push(GridPoint {
                                index: out.len(),
                                n_index,
                                n,
                                lambda,
                                alpha,
                                beta,
                                sigma,
                                g,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MeanFieldOutcome {
    pub final_r: f64,
    pub peak_s: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: GridPoint,
    pub meanfield: Option<MeanFieldOutcome>,
    pub montecarlo: Option<EnsembleSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub family: String,
    pub point: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    /// `(file name, sha256 hex)` in write order.
    pub files: Vec<(String, String)>,
    pub failures: Vec<Failure>,
}

impl Manifest {
    pub fn hash_of(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(f, _)| f == name)
            .map(|(_, h)| h.as_str())
    }

    fn render(&self, s: &Scenario) -> String {
        let mut out = String::new();
        out.push_str(&format!("# scenario {}\n# seed {}\n", s.name, s.seed));
        for (name, hash) in &self.files {
            out.push_str(&format!("sha256 {hash}  {name}\n"));
        }
        for f in &self.failures {
            out.push_str(&format!(
                "failed {} point={} {}\n",
                f.family,
                f.point,
                f.message.replace('\n', " ")
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub manifest: Manifest,
    pub out_dir: PathBuf,
    pub points: Vec<PointOutcome>,
}

/// Per-point deviation between the engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub point: GridPoint,
    pub r_meanfield: f64,
    pub r_montecarlo: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub tolerance: f64,
    pub rows: Vec<Deviation>,
    pub manifest: Manifest,
    pub out_dir: PathBuf,
}

impl DeviationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|d| d.pass) && self.manifest.failures.is_empty()
    }
}

/// Collects files in a directory, hashing each as it is written.
struct Writer<'a> {
    dir: &'a Path,
    header: String,
    manifest: Manifest,
}

impl<'a> Writer<'a> {
    fn new(s: &'a Scenario) -> Result<Self> {
        fs::create_dir_all(&s.out_dir)?;
        let mut header = String::new();
        for (k, v) in s.describe() {
            header.push_str(&format!("# {k} = {v}\n"));
        }
        Ok(Self {
            dir: &s.out_dir,
            header,
            manifest: Manifest::default(),
        })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::File::create(&path)?.write_all(body.as_bytes())?;
        let hash = hex::encode(Sha256::digest(body.as_bytes()));
        self.manifest.files.push((name.to_string(), hash));
        Ok(())
    }

    fn csv(&mut self, name: &str, columns: &str, rows: &[String], plot: &LinePlot) -> Result<()> {
        let mut body = self.header.clone();
        body.push_str(columns);
        body.push('\n');
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        self.put(&format!("{name}.csv"), &body)?;
        self.put(&format!("{name}.svg"), &plot.render())
    }

    fn finish(mut self, s: &Scenario) -> Result<Manifest> {
        let text = self.manifest.render(s);
        fs::File::create(self.dir.join("manifest.txt"))?.write_all(text.as_bytes())?;
        self.manifest.files.push((
            "manifest.txt".into(),
            hex::encode(Sha256::digest(text.as_bytes())),
        ));
        Ok(self.manifest)
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Analytic degree distribution used by the mean-field engine.
pub fn analytic_distribution(s: &Scenario, n: usize) -> Result<DegreeDistribution> {
    DegreeDistribution::powerlaw(s.generator.gamma(), s.generator.k_min(), n)
}

/// Network for the `n_index`-th size, keyed by `(seed, n_index)`.
pub fn generate_network(s: &Scenario, n_index: usize) -> Result<Network> {
    let n = s.nodes[n_index];
    let mut rng = derived_stream(s.seed, &[KEY_NETWORK, n_index as u64]);
    match s.generator {
        GeneratorSpec::Configuration { gamma, k_min } => {
            let dist = DegreeDistribution::powerlaw(gamma, k_min, n)?;
            Ok(build_configuration_network(&dist, n, &mut rng)?.network)
        }
        GeneratorSpec::BarabasiAlbert { m0, m } => build_ba_network(n, m0, m, &mut rng),
    }
}

fn plan_for(strategy: Strategy, g: f64, dist: &DegreeDistribution) -> Result<InoculationPlan> {
    match strategy {
        Strategy::None => Ok(InoculationPlan::None),
        Strategy::Random => make_random_plan(g),
        Strategy::Targeted => make_targeted_plan(dist, g),
    }
}

fn params(s: &Scenario, pt: &GridPoint) -> Result<ModelParams> {
    let mut p = ModelParams::new(pt.lambda, pt.alpha, pt.beta)?.with_sigma(pt.sigma)?;
    p.tie = TieStrengthParams::new(pt.beta, s.b)?;
    Ok(p)
}

fn run_meanfield(s: &Scenario, pt: &GridPoint) -> Result<MeanFieldOutcome> {
    let dist = analytic_distribution(s, pt.n)?;
    let p = params(s, pt)?;
    let plan = plan_for(s.strategy, pt.g, &dist)?;
    let s0 = s.mf_s0.unwrap_or(s.mc_seeds as f64 / pt.n as f64).min(1.0);
    let init = DegreeClassState::seeded(&dist, s0)?;
    let trajectory = integrate(&init, &dist, &p, &plan, s.mf_t_end, s.mf_dt)?;
    Ok(MeanFieldOutcome {
        final_r: trajectory.final_size(),
        peak_s: trajectory.peak_spreaders(),
        trajectory,
    })
}

fn run_montecarlo(s: &Scenario, pt: &GridPoint, network: &Network) -> Result<EnsembleSummary> {
    let p = params(s, pt)?;
    let plan = match s.strategy {
        Strategy::Targeted => make_targeted_plan(&network.degree_distribution()?, pt.g)?,
        other => plan_for(other, pt.g, &DegreeDistribution::point_mass(1)?)?,
    };
    let cfg = SimConfig {
        dt: s.mc_dt,
        t_max: s.mc_t_max,
        seeding: Seeding::Count(s.mc_seeds),
    };
    let master = derive_seed(s.seed, &[KEY_ENSEMBLE, pt.index as u64]);
    ensemble(
        NetworkSource::Fixed(network),
        &p,
        &plan,
        &cfg,
        s.runs,
        master,
    )
}

fn label(pt: &GridPoint, s: &Scenario) -> String {
    let mut parts = Vec::new();
    if s.nodes.len() > 1 {
        parts.push(format!("N={}", pt.n));
    }
    if s.alphas.len() > 1 {
        parts.push(format!("a={}", pt.alpha));
    }
    if s.betas.len() > 1 {
        parts.push(format!("b={}", pt.beta));
    }
    if s.sigmas.len() > 1 {
        parts.push(format!("s={}", pt.sigma));
    }
    if s.fractions.len() > 1 {
        parts.push(format!("g={}", pt.g));
    }
    if parts.is_empty() {
        format!("N={}", pt.n)
    } else {
        parts.join(" ")
    }
}

fn evaluate(s: &Scenario, points: &[GridPoint]) -> Result<(Vec<PointOutcome>, Vec<Failure>)> {
    let mut failures = Vec::new();
    let networks: Vec<Option<Network>> = if s.engine.monte_carlo() {
        let built: Vec<Result<Network>> = with_pool(s.workers, || {
            (0..s.nodes.len())
                .into_par_iter()
                .map(|i| generate_network(s, i))
                .collect()
        })?;
        built
            .into_iter()
            .enumerate()
            .map(|(i, r)| match r {
                Ok(net) => Some(net),
                Err(e) => {
                    failures.push(Failure {
                        family: "network".into(),
                        point: i,
                        message: e.to_string(),
                    });
                    None
                }
            })
            .collect()
    } else {
        vec![None; s.nodes.len()]
    };

    type Raw = (
        Option<Result<MeanFieldOutcome>>,
        Option<Result<EnsembleSummary>>,
    );
    let raw: Vec<Raw> = with_pool(s.workers, || {
        points
            .par_iter()
            .map(|pt| {
                let mf = s.engine.mean_field().then(|| run_meanfield(s, pt));
                let mc = match (&networks[pt.n_index], s.engine.monte_carlo()) {
                    (Some(net), true) => Some(run_montecarlo(s, pt, net)),
                    (None, true) => Some(Err(Error::InvalidState(format!(
                        "no network for N={}",
                        pt.n
                    )))),
                    _ => None,
                };
                (mf, mc)
            })
            .collect()
    })?;

    let mut outcomes = Vec::with_capacity(points.len());
    for (pt, (mf, mc)) in points.iter().zip(raw) {
        fn keep<T>(
            failures: &mut Vec<Failure>,
            point: usize,
            engine: &str,
            r: Option<Result<T>>,
        ) -> Option<T> {
            match r? {
                Ok(v) => Some(v),
                Err(e) => {
                    failures.push(Failure {
                        family: engine.into(),
                        point,
                        message: e.to_string(),
                    });
                    None
                }
            }
        }
        let meanfield = keep(&mut failures, pt.index, "meanfield", mf);
        let montecarlo = keep(&mut failures, pt.index, "montecarlo", mc);
        outcomes.push(PointOutcome {
            point: *pt,
            meanfield,
            montecarlo,
        });
    }
    Ok((outcomes, failures))
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.10e}"))
}

fn status(o: &PointOutcome, engine: Engine) -> &'static str {
    let mf_ok = !engine.mean_field() || o.meanfield.is_some();
    let mc_ok = !engine.monte_carlo() || o.montecarlo.is_some();
    if mf_ok && mc_ok {
        "ok"
    } else {
        "failed"
    }
}

fn write_final_size(w: &mut Writer<'_>, s: &Scenario, outcomes: &[PointOutcome]) -> Result<()> {
    let rows: Vec<String> = outcomes
        .iter()
        .filter(|o| o.meanfield.is_some() || o.montecarlo.is_some())
        .map(|o| {
            let p = &o.point;
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                p.index,
                p.n,
                p.lambda,
                p.alpha,
                p.beta,
                p.sigma,
                p.g,
                num(o.meanfield.as_ref().map(|m| m.final_r)),
                num(o.montecarlo.as_ref().map(|m| m.mean_r)),
                num(o.montecarlo.as_ref().map(|m| m.std_r)),
                num(o.montecarlo.as_ref().map(|m| m.mean_peak_s)),
                status(o, s.engine)
            )
        })
        .collect();

    // Series: one per non-lambda parameter combination, x = lambda, unless
    // lambda is a singleton, in which case x is the first varying parameter.
    let (x_name, x_of): (&str, fn(&GridPoint) -> f64) = if s.lambdas.len() > 1 {
        ("lambda", |p| p.lambda)
    } else if s.betas.len() > 1 {
        ("beta", |p| p.beta)
    } else if s.alphas.len() > 1 {
        ("alpha", |p| p.alpha)
    } else if s.fractions.len() > 1 {
        ("g", |p| p.g)
    } else if s.sigmas.len() > 1 {
        ("sigma", |p| p.sigma)
    } else {
        ("N", |p| p.n as f64)
    };
    let mut plot = LinePlot::new(format!("{}: final rumor size", s.name), x_name, "R");
    plot.log_x = x_name == "N";
    let mut groups: Vec<(String, Vec<&PointOutcome>)> = Vec::new();
    for o in outcomes {
        let key = series_key(&o.point, x_name);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(o),
            None => groups.push((key, vec![o])),
        }
    }
    for (_, members) in &groups {
        let name = if members.is_empty() {
            String::new()
        } else {
            label_without(&members[0].point, s, x_name)
        };
        let mf: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|o| o.meanfield.as_ref().map(|m| (x_of(&o.point), m.final_r)))
            .collect();
        let mc: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|o| o.montecarlo.as_ref().map(|m| (x_of(&o.point), m.mean_r)))
            .collect();
        if !mf.is_empty() {
            plot.push(Series::new(format!("{name} MF"), mf));
        }
        if !mc.is_empty() {
            plot.push(Series::new(format!("{name} MC"), mc).dashed());
        }
    }
    w.csv(
        "final_size",
        "point,n,lambda,alpha,beta,sigma,g,R_mf,R_mc_mean,R_mc_std,peak_S_mc,status",
        &rows,
        &plot,
    )
}

fn series_key(p: &GridPoint, x: &str) -> String {
    let mut parts = vec![
        format!("{}", p.n),
        format!("{}", p.lambda),
        format!("{}", p.alpha),
        format!("{}", p.beta),
        format!("{}", p.sigma),
        format!("{}", p.g),
    ];
    let idx = match x {
        "N" => 0,
        "lambda" => 1,
        "alpha" => 2,
        "beta" => 3,
        "sigma" => 4,
        _ => 5,
    };
    parts[idx].clear();
    parts.join("|")
}

fn label_without(p: &GridPoint, s: &Scenario, x: &str) -> String {
    let mut parts = Vec::new();
    if s.nodes.len() > 1 && x != "N" {
        parts.push(format!("N={}", p.n));
    }
    if s.lambdas.len() > 1 && x != "lambda" {
        parts.push(format!("l={}", p.lambda));
    }
    if s.alphas.len() > 1 && x != "alpha" {
        parts.push(format!("a={}", p.alpha));
    }
    if s.betas.len() > 1 && x != "beta" {
        parts.push(format!("b={}", p.beta));
    }
    if s.sigmas.len() > 1 && x != "sigma" {
        parts.push(format!("s={}", p.sigma));
    }
    if s.fractions.len() > 1 && x != "g" {
        parts.push(format!("g={}", p.g));
    }
    if parts.is_empty() {
        format!("a+b={}", p.alpha + p.beta)
    } else {
        parts.join(" ")
    }
}

fn stride(len: usize) -> usize {
    len.div_ceil(TIME_SERIES_ROWS).max(1)
}

fn write_time_series(w: &mut Writer<'_>, s: &Scenario, outcomes: &[PointOutcome]) -> Result<()> {
    let mut rows = Vec::new();
    let mut plot = LinePlot::new(format!("{}: R(t) and S(t)", s.name), "t", "density");
    for o in outcomes {
        let name = label(&o.point, s);
        let multi = outcomes.len() > 1;
        let tag = |what: &str, engine: &str| {
            if multi {
                format!("{what} {engine} {name} l={}", o.point.lambda)
            } else {
                format!("{what} {engine}")
            }
        };
        if let Some(mf) = &o.meanfield {
            let samples = &mf.trajectory.samples;
            let step = stride(samples.len());
            let kept: Vec<_> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| i % step == 0 || *i == samples.len() - 1)
                .map(|(_, a)| a)
                .collect();
            for a in &kept {
                rows.push(format!(
                    "{},meanfield,{:.6},{:.10e},{:.10e},{:.10e}",
                    o.point.index, a.t, a.r, a.s, a.i
                ));
            }
            plot.push(Series::new(
                tag("R", "MF"),
                kept.iter().map(|a| (a.t, a.r)).collect(),
            ));
            plot.push(Series::new(
                tag("S", "MF"),
                kept.iter().map(|a| (a.t, a.s)).collect(),
            ));
        }
        if let Some(mc) = &o.montecarlo {
            let trace = &mc.mean_trace;
            let step = stride(trace.len());
            let kept: Vec<_> = trace
                .iter()
                .enumerate()
                .filter(|(i, _)| i % step == 0 || *i == trace.len() - 1)
                .map(|(_, a)| a)
                .collect();
            for a in &kept {
                // R counts everyone informed, matching the final-size column.
                rows.push(format!(
                    "{},montecarlo,{:.6},{:.10e},{:.10e},{:.10e}",
                    o.point.index,
                    a.t,
                    a.r + a.s,
                    a.s,
                    a.i
                ));
            }
            plot.push(
                Series::new(
                    tag("R", "MC"),
                    kept.iter().map(|a| (a.t, a.r + a.s)).collect(),
                )
                .dashed(),
            );
            plot.push(
                Series::new(tag("S", "MC"), kept.iter().map(|a| (a.t, a.s)).collect()).dashed(),
            );
        }
    }
    w.csv("time_series", "point,engine,t,R,S,I", &rows, &plot)
}

fn write_ensemble(w: &mut Writer<'_>, s: &Scenario, outcomes: &[PointOutcome]) -> Result<()> {
    let mut rows = Vec::new();
    let mut plot = LinePlot::new(
        format!("{}: ensemble final sizes", s.name),
        "run",
        "final R",
    );
    for o in outcomes {
        if let Some(mc) = &o.montecarlo {
            for f in &mc.finals {
                rows.push(format!(
                    "{},{},{:.10e},{:.10e},{}",
                    o.point.index, f.run, f.final_r, f.peak_s, f.seed
                ));
            }
            plot.push(Series::new(
                format!("point {}", o.point.index),
                mc.finals
                    .iter()
                    .map(|f| (f.run as f64, f.final_r))
                    .collect(),
            ));
        }
    }
    w.csv("ensemble", "point,run,final_R,peak_S,seed", &rows, &plot)
}

/// One row of the analytic threshold table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    /// Discrete moment ratio on the truncated power law.
    pub lambda_c: f64,
    pub bounded: f64,
    pub continuum: f64,
    pub regime: crate::thresholds::Regime,
    /// Threshold under the scenario's inoculation; infinite when no outbreak
    /// is possible.
    pub inoculated: f64,
}

/// Analytic thresholds over `N x alpha x beta x g`.
pub fn threshold_table(s: &Scenario) -> (Vec<ThresholdRow>, Vec<Failure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut index = 0;
    for &n in &s.nodes {
        for &alpha in &s.alphas {
            for &beta in &s.betas {
                for &g in &s.fractions {
                    let row = (|| -> Result<ThresholdRow> {
                        let dist = analytic_distribution(s, n)?;
                        let lambda_c = threshold_modified(&dist, alpha, beta);
                        let rep = threshold_modified_bounded(
                            s.generator.gamma(),
                            s.generator.k_min(),
                            n,
                            alpha,
                            beta,
                        )?;
                        let inoc = match s.strategy {
                            Strategy::None => crate::thresholds::Threshold::Finite(lambda_c),
                            Strategy::Random => threshold_random_inoc(lambda_c, g)?,
                            Strategy::Targeted => threshold_targeted_inoc(
                                &dist,
                                alpha,
                                beta,
                                &make_targeted_plan(&dist, g)?,
                            )?,
                        };
                        Ok(ThresholdRow {
                            n,
                            alpha,
                            beta,
                            g,
                            lambda_c,
                            bounded: rep.value,
                            continuum: rep.continuum,
                            regime: rep.regime,
                            inoculated: inoc.value().unwrap_or(f64::INFINITY),
                        })
                    })();
                    match row {
                        Ok(r) => rows.push(r),
                        Err(e) => failures.push(Failure {
                            family: "threshold".into(),
                            point: index,
                            message: e.to_string(),
                        }),
                    }
                    index += 1;
                }
            }
        }
    }
    (rows, failures)
}

fn write_threshold(w: &mut Writer<'_>, s: &Scenario, rows: &[ThresholdRow]) -> Result<()> {
    let lines: Vec<String> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            format!(
                "{i},{},{},{},{},{:.12e},{:.12e},{:.12e},{},{}",
                r.n,
                r.alpha,
                r.beta,
                r.g,
                r.lambda_c,
                r.bounded,
                r.continuum,
                r.regime,
                if r.inoculated.is_finite() {
                    format!("{:.12e}", r.inoculated)
                } else {
                    "no-outbreak".into()
                }
            )
        })
        .collect();
    let (x_name, x_of): (&str, fn(&ThresholdRow) -> f64) = if s.alphas.len() > 1 {
        ("alpha", |r| r.alpha)
    } else if s.betas.len() > 1 {
        ("beta", |r| r.beta)
    } else if s.fractions.len() > 1 {
        ("g", |r| r.g)
    } else {
        ("N", |r| r.n as f64)
    };
    let mut plot = LinePlot::new(format!("{}: rumor threshold", s.name), x_name, "lambda_c");
    plot.log_x = x_name == "N";
    let key = |r: &ThresholdRow| -> String {
        let mut k = Vec::new();
        if x_name != "N" && s.nodes.len() > 1 {
            k.push(format!("N={}", r.n));
        }
        if x_name != "alpha" && s.alphas.len() > 1 {
            k.push(format!("a={}", r.alpha));
        }
        if x_name != "beta" && s.betas.len() > 1 {
            k.push(format!("b={}", r.beta));
        }
        if x_name != "g" && s.fractions.len() > 1 {
            k.push(format!("g={}", r.g));
        }
        k.join(" ")
    };
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let y = if s.strategy == Strategy::None {
            r.lambda_c
        } else {
            r.inoculated
        };
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push((x_of(r), y)),
            None => groups.push((k, vec![(x_of(r), y)])),
        }
    }
    for (k, pts) in groups {
        plot.push(Series::new(
            if k.is_empty() {
                "lambda_c".to_string()
            } else {
                k
            },
            pts,
        ));
    }
    w.csv(
        "threshold",
        "row,n,alpha,beta,g,lambda_c,lambda_c_bounded,lambda_c_continuum,regime,lambda_c_inoculated",
        &lines,
        &plot,
    )
}

fn execute(s: &Scenario, compare: bool) -> Result<(ScenarioOutput, Option<Vec<Deviation>>)> {
    let points = grid(s);
    let mut w = Writer::new(s)?;
    let needs_engines = compare || s.families.iter().any(|f| *f != Family::Threshold);
    let (outcomes, mut failures) = if needs_engines {
        evaluate(s, &points)?
    } else {
        (Vec::new(), Vec::new())
    };

    for family in &s.families {
        match family {
            Family::FinalSize => write_final_size(&mut w, s, &outcomes)?,
            Family::TimeSeries => write_time_series(&mut w, s, &outcomes)?,
            Family::Threshold => {
                let (rows, fails) = threshold_table(s);
                failures.extend(fails);
                write_threshold(&mut w, s, &rows)?;
            }
        }
    }
    if s.engine.monte_carlo() && needs_engines {
        write_ensemble(&mut w, s, &outcomes)?;
    }

    let deviations = if compare {
        let rows: Vec<Deviation> = outcomes
            .iter()
            .filter_map(|o| {
                let mf = o.meanfield.as_ref()?.final_r;
                let mc = o.montecarlo.as_ref()?.mean_r;
                let deviation = (mc - mf).abs();
                Some(Deviation {
                    point: o.point,
                    r_meanfield: mf,
                    r_montecarlo: mc,
                    deviation,
                    pass: deviation < s.tolerance,
                })
            })
            .collect();
        let lines: Vec<String> = rows
            .iter()
            .map(|d| {
                let p = &d.point;
                format!(
                    "{},{},{},{},{},{},{},{:.10e},{:.10e},{:.10e},{}",
                    p.index,
                    p.n,
                    p.lambda,
                    p.alpha,
                    p.beta,
                    p.sigma,
                    p.g,
                    d.r_meanfield,
                    d.r_montecarlo,
                    d.deviation,
                    if d.pass { "pass" } else { "fail" }
                )
            })
            .collect();
        let mut plot = LinePlot::new(
            format!("{}: |R_MC - R_MF|", s.name),
            "grid point",
            "deviation",
        );
        plot.push(Series::new(
            "deviation",
            rows.iter()
                .map(|d| (d.point.index as f64, d.deviation))
                .collect(),
        ));
        plot.push(
            Series::new(
                "tolerance",
                rows.iter()
                    .map(|d| (d.point.index as f64, s.tolerance))
                    .collect(),
            )
            .dashed(),
        );
        w.csv(
            "comparison",
            "point,n,lambda,alpha,beta,sigma,g,R_mf,R_mc_mean,deviation,flag",
            &lines,
            &plot,
        )?;
        Some(rows)
    } else {
        None
    };

    w.manifest.failures = failures;
    let manifest = w.finish(s)?;
    Ok((
        ScenarioOutput {
            manifest,
            out_dir: s.out_dir.clone(),
            points: outcomes,
        },
        deviations,
    ))
}

/// Runs every grid point of `s` and writes one CSV and one SVG per plot
/// family, plus `ensemble.csv` for Monte Carlo runs and `manifest.txt`.
/// A failing grid point is listed in the manifest and left out of the CSVs.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutput> {
    execute(s, false).map(|(out, _)| out)
}

/// Runs both engines and reports `|R_MC - R_MF|` per grid point against the
/// scenario tolerance; also writes `comparison.csv`.
pub fn compare_engines(s: &Scenario) -> Result<DeviationReport> {
    if s.engine != Engine::Both {
        return Err(Error::Config(
            "engine comparison needs `engine = both`".into(),
        ));
    }
    let (out, rows) = execute(s, true)?;
    Ok(DeviationReport {
        tolerance: s.tolerance,
        rows: rows.unwrap_or_default(),
        manifest: out.manifest,
        out_dir: out.out_dir,
    })
}

/// Analytic threshold tables only.
pub fn run_thresholds(s: &Scenario) -> Result<Manifest> {
    let mut w = Writer::new(s)?;
    let (rows, failures) = threshold_table(s);
    write_threshold(&mut w, s, &rows)?;
    w.manifest.failures = failures;
    w.finish(s)
}

/// Writes `network_<N>.edges` and `degrees_<N>.csv` for every network size.
pub fn generate_networks(s: &Scenario) -> Result<Manifest> {
    let mut w = Writer::new(s)?;
    let built: Vec<Result<Network>> = with_pool(s.workers, || {
        (0..s.nodes.len())
            .into_par_iter()
            .map(|i| generate_network(s, i))
            .collect()
    })?;
    let mut failures = Vec::new();
    for (i, net) in built.into_iter().enumerate() {
        match net {
            Ok(net) => {
                let mut edges = Vec::new();
                net.write_edge_list(&mut edges)?;
                w.put(
                    &format!("network_{}.edges", s.nodes[i]),
                    &String::from_utf8_lossy(&edges),
                )?;
                let mut degrees = w.header.clone().into_bytes();
                net.degree_distribution()?.write_csv(&mut degrees)?;
                w.put(
                    &format!("degrees_{}.csv", s.nodes[i]),
                    &String::from_utf8_lossy(&degrees),
                )?;
            }
            Err(e) => failures.push(Failure {
                family: "network".into(),
                point: i,
                message: e.to_string(),
            }),
        }
    }
    w.manifest.failures = failures;
    w.finish(s)
}

#[cfg(test)]
mod tests {
    use super::super::scenario::parse_scenario;
    use super::*;

    fn scenario(text: &str, dir: &Path) -> Scenario {
        let mut s = parse_scenario(text).unwrap();
        s.out_dir = dir.to_path_buf();
        s
    }

    fn data_rows(path: &Path) -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(str::to_string)
            .collect()
    }

    #[test]
    fn grid_is_cartesian() {
        let s = parse_scenario(
            "[network]\nnodes = 100, 200\n[model]\nlambda = 0.1, 0.2, 0.3\nbeta = 0, 1\n",
        )
        .unwrap();
        let g = grid(&s);
        assert_eq!(g.len(), 12);
        assert!(g.iter().enumerate().all(|(i, p)| p.index == i));
        assert_eq!((g[0].n, g[0].lambda, g[0].beta), (100, 0.1, 0.0));
        assert_eq!((g[1].n, g[1].lambda, g[1].beta), (100, 0.1, 1.0));
        assert_eq!(g[11].n, 200);
    }

    #[test]
    fn meanfield_lambda_grid_gives_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let s = scenario(
            "engine = meanfield\nfamilies = final_size, time_series, threshold\n[network]\nnodes = 1000\n[model]\nlambda = 0.2, 0.6, 1.0\nalpha = 0.5\nbeta = -0.5\n[meanfield]\nt_end = 50\ndt = 0.05\n",
            dir.path(),
        );
        let out = run_scenario(&s).unwrap();
        assert!(out.manifest.failures.is_empty());
        assert_eq!(data_rows(&dir.path().join("final_size.csv")).len(), 3);
        for f in [
            "final_size.csv",
            "final_size.svg",
            "time_series.csv",
            "time_series.svg",
            "threshold.csv",
            "threshold.svg",
            "manifest.txt",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
            assert!(out.manifest.hash_of(f).is_some(), "{f}");
        }
        let text = fs::read_to_string(dir.path().join("final_size.csv")).unwrap();
        assert!(text.contains("# seed = 1"));
        assert!(text.contains("# lambda = 0.2,0.6,1"));
        let r: Vec<f64> = data_rows(&dir.path().join("final_size.csv"))
            .iter()
            .map(|l| l.split(',').nth(7).unwrap().parse().unwrap())
            .collect();
        assert!(r[0] < r[1] && r[1] < r[2]);
    }

    #[test]
    fn threshold_decreasing_in_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let s = scenario(
            "families = threshold\n[network]\nnodes = 1000, 100000\n[model]\nlambda = 0.5\nalpha = 0.1, 0.25, 0.5, 0.75, 1.0\nbeta = 0\n",
            dir.path(),
        );
        run_scenario(&s).unwrap();
        let rows = data_rows(&dir.path().join("threshold.csv"));
        assert_eq!(rows.len(), 10);
        for chunk in rows.chunks(5) {
            let lc: Vec<f64> = chunk
                .iter()
                .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
                .collect();
            assert!(lc.windows(2).all(|w| w[1] < w[0]), "{lc:?}");
        }
    }

    #[test]
    fn failed_point_is_recorded_and_skipped() {
        let dir = tempfile::tempdir().unwrap();
        // an absurd lambda exhausts the integrator's substep budget
        let s = scenario(
            "[network]\nnodes = 1000\n[model]\nlambda = 0.5, 1e300\n[meanfield]\ndt = 0.5\nt_end = 5\n",
            dir.path(),
        );
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.manifest.failures.len(), 1);
        assert_eq!(out.manifest.failures[0].point, 1);
        assert_eq!(data_rows(&dir.path().join("final_size.csv")).len(), 1);
        assert!(fs::read_to_string(dir.path().join("manifest.txt"))
            .unwrap()
            .contains("failed meanfield point=1"));
    }

    #[test]
    fn compare_requires_both() {
        let s = parse_scenario("[model]\nlambda = 1\n").unwrap();
        assert!(matches!(compare_engines(&s), Err(Error::Config(_))));
    }

    #[test]
    fn compare_zero_lambda_and_subcritical() {
        let dir = tempfile::tempdir().unwrap();
        let s = scenario(
            "engine = both\n[network]\nnodes = 2000\n[model]\nlambda = 0, 0.05\nalpha = 0.5\nbeta = -0.5\n[montecarlo]\nruns = 10\n[meanfield]\nt_end = 60\ndt = 0.05\n",
            dir.path(),
        );
        let rep = compare_engines(&s).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows[0].deviation < 1e-9, "{:?}", rep.rows[0]);
        assert!(rep.rows[1].r_meanfield < 0.02 && rep.rows[1].r_montecarlo < 0.02);
        assert!(rep.all_pass());
        assert!(dir.path().join("comparison.csv").exists());
        assert!(dir.path().join("ensemble.csv").exists());
    }

    #[test]
    fn generate_writes_edge_lists() {
        let dir = tempfile::tempdir().unwrap();
        let s = scenario("[network]\nnodes = 300\n[model]\nlambda = 1\n", dir.path());
        let m = generate_networks(&s).unwrap();
        let text = fs::read_to_string(dir.path().join("network_300.edges")).unwrap();
        let net = Network::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(net.node_count(), 300);
        assert!(m.hash_of("degrees_300.csv").is_some());
    }
}
