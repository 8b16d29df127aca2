//! Scenario files: flat `key = value` lines grouped under `[section]`
//! headers, lists comma-separated, `#` comments.
//!
//! ```text
//! name = fig1b
//! engine = meanfield
//!
//! [network]
//! generator = configuration
//! gamma = 2.4
//! k_min = 2
//! nodes = 100, 1000, 100000
//!
//! [model]
//! lambda = 0.2, 0.4, 0.6
//! alpha = 0.5
//! beta = -0.5
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    MeanField,
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn mean_field(&self) -> bool {
        matches!(self, Self::MeanField | Self::Both)
    }

    pub fn monte_carlo(&self) -> bool {
        matches!(self, Self::MonteCarlo | Self::Both)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MeanField => "meanfield",
            Self::MonteCarlo => "montecarlo",
            Self::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    Configuration { gamma: f64, k_min: u32 },
    BarabasiAlbert { m0: usize, m: usize },
}

impl GeneratorSpec {
    /// Exponent used by the analytic formulas; BA networks follow `k^-3`.
    pub fn gamma(&self) -> f64 {
        match self {
            Self::Configuration { gamma, .. } => *gamma,
            Self::BarabasiAlbert { .. } => 3.0,
        }
    }

    pub fn k_min(&self) -> u32 {
        match self {
            Self::Configuration { k_min, .. } => *k_min,
            Self::BarabasiAlbert { m, .. } => *m as u32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    None,
    Random,
    Targeted,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Random => "random",
            Self::Targeted => "targeted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    FinalSize,
    TimeSeries,
    Threshold,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FinalSize => "final_size",
            Self::TimeSeries => "time_series",
            Self::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub engine: Engine,
    pub families: Vec<Family>,
    pub generator: GeneratorSpec,
    pub nodes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub b: f64,
    pub strategy: Strategy,
    pub fractions: Vec<f64>,
    pub mf_dt: f64,
    pub mf_t_end: f64,
    /// Initial spreader density of the mean-field runs; `None` means `1/N`.
    pub mf_s0: Option<f64>,
    pub runs: usize,
    pub mc_dt: f64,
    pub mc_t_max: f64,
    pub mc_seeds: usize,
    pub seed: u64,
    pub workers: usize,
    pub tolerance: f64,
    pub out_dir: PathBuf,
}

pub const DEFAULT_MF_NODES: usize = 100_000;
pub const DEFAULT_MC_NODES: usize = 10_000;
pub const DEFAULT_RUNS: usize = 50;

impl Scenario {
    /// Resolved parameters in a fixed order, for output headers.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        fn list<T: fmt::Display>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        let generator = match self.generator {
            GeneratorSpec::Configuration { gamma, k_min } => {
                format!("configuration(gamma={gamma},k_min={k_min})")
            }
            GeneratorSpec::BarabasiAlbert { m0, m } => format!("ba(m0={m0},m={m})"),
        };
        vec![
            ("name", self.name.clone()),
            ("engine", self.engine.to_string()),
            (
                "families",
                self.families
                    .iter()
                    .map(|f| f.name())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("generator", generator),
            ("nodes", list(&self.nodes)),
            ("lambda", list(&self.lambdas)),
            ("alpha", list(&self.alphas)),
            ("beta", list(&self.betas)),
            ("sigma", list(&self.sigmas)),
            ("b", self.b.to_string()),
            ("strategy", self.strategy.to_string()),
            ("g", list(&self.fractions)),
            ("meanfield.dt", self.mf_dt.to_string()),
            ("meanfield.t_end", self.mf_t_end.to_string()),
            (
                "meanfield.s0",
                self.mf_s0.map_or("1/N".to_string(), |s| s.to_string()),
            ),
            ("montecarlo.runs", self.runs.to_string()),
            ("montecarlo.dt", self.mc_dt.to_string()),
            ("montecarlo.t_max", self.mc_t_max.to_string()),
            ("montecarlo.seeds", self.mc_seeds.to_string()),
            ("seed", self.seed.to_string()),
            ("tolerance", self.tolerance.to_string()),
        ]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_scenario(&text)
    }
}

struct Entry {
    value: String,
    line: usize,
}

const KEYS: &[(&str, &[&str])] = &[
    ("scenario", &["name", "engine", "families"]),
    (
        "network",
        &["generator", "gamma", "k_min", "nodes", "m0", "m"],
    ),
    ("model", &["lambda", "alpha", "beta", "sigma", "b"]),
    ("inoculation", &["strategy", "g"]),
    ("meanfield", &["dt", "t_end", "s0"]),
    ("montecarlo", &["runs", "dt", "t_max", "seeds"]),
    ("run", &["seed", "workers", "tolerance", "out"]),
];

struct Entries {
    map: HashMap<String, Entry>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn one<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<(T, usize)>> {
        let Some(e) = self.raw(key) else {
            return Ok(None);
        };
        e.value
            .trim()
            .parse::<T>()
            .map(|v| Some((v, e.line)))
            .map_err(|_| Error::parse(e.line, format!("`{key}` expects {what}, got `{}`", e.value)))
    }

    fn list<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<(Vec<T>, usize)>> {
        let Some(e) = self.raw(key) else {
            return Ok(None);
        };
        let items: Vec<&str> = e
            .value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() {
            return Err(Error::parse(
                e.line,
                format!("`{key}` must list at least one value"),
            ));
        }
        items
            .iter()
            .map(|s| {
                parse_number::<T>(s).ok_or_else(|| {
                    Error::parse(
                        e.line,
                        format!("`{key}` expects a list of {what}, got `{s}`"),
                    )
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(|v| Some((v, e.line)))
    }
}

/// Accepts plain numbers and `10^k` / `1e5` spellings for integers.
fn parse_number<T: FromStr>(s: &str) -> Option<T> {
    if let Ok(v) = s.parse::<T>() {
        return Some(v);
    }
    let expanded = if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.trim().parse().ok()?;
        let exp: f64 = exp.trim().parse().ok()?;
        base.powf(exp)
    } else {
        s.parse::<f64>().ok()?
    };
    if expanded.fract() == 0.0 && expanded.is_finite() {
        format!("{}", expanded as u64).parse().ok()
    } else {
        expanded.to_string().parse().ok()
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = HashMap::new();
    let mut section = "scenario";
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line_no, "unterminated section header"))?
                .trim();
            section = KEYS
                .iter()
                .find(|(s, _)| *s == name)
                .map(|(s, _)| *s)
                .ok_or_else(|| Error::parse(line_no, format!("unknown section `[{name}]`")))?;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(Error::parse(
                line_no,
                format!("unknown key `{key}` in [{section}]"),
            ));
        }
        let full = format!("{section}.{key}");
        if map.contains_key(&full) {
            return Err(Error::parse(
                line_no,
                format!("duplicate key `{key}` in [{section}]"),
            ));
        }
        map.insert(
            full,
            Entry {
                value: value.trim().to_string(),
                line: line_no,
            },
        );
    }
    Ok(Entries { map })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let e = tokenize(text)?;

    let name = e
        .raw("scenario.name")
        .map_or("scenario".to_string(), |v| v.value.clone());
    let engine = match e.raw("scenario.engine") {
        None => Engine::MeanField,
        Some(v) => {
            let mut mf = false;
            let mut mc = false;
            for part in v.value.split(',').map(str::trim) {
                match part {
                    "meanfield" => mf = true,
                    "montecarlo" => mc = true,
                    "both" => {
                        mf = true;
                        mc = true;
                    }
                    other => return Err(Error::parse(v.line, format!("unknown engine `{other}`"))),
                }
            }
            match (mf, mc) {
                (true, true) => Engine::Both,
                (false, true) => Engine::MonteCarlo,
                _ => Engine::MeanField,
            }
        }
    };
    let families = match e.raw("scenario.families") {
        None => vec![Family::FinalSize, Family::Threshold],
        Some(v) => {
            let mut out = Vec::new();
            for part in v.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let f = match part {
                    "final_size" => Family::FinalSize,
                    "time_series" => Family::TimeSeries,
                    "threshold" => Family::Threshold,
                    other => return Err(Error::parse(v.line, format!("unknown family `{other}`"))),
                };
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            if out.is_empty() {
                return Err(Error::parse(
                    v.line,
                    "`families` must list at least one family",
                ));
            }
            out.sort();
            out
        }
    };

    let generator = match e
        .raw("network.generator")
        .map(|v| (v.value.as_str(), v.line))
    {
        None | Some(("configuration", _)) => {
            let (gamma, gline) = e
                .one::<f64>("network.gamma", "a number")?
                .unwrap_or((2.4, 0));
            let (k_min, kline) = e
                .one::<u32>("network.k_min", "a positive integer")?
                .unwrap_or((2, 0));
            if !(gamma > 2.0 && gamma <= 3.0) {
                return Err(Error::parse(
                    gline,
                    format!("gamma must lie in (2, 3], got {gamma}"),
                ));
            }
            if k_min == 0 {
                return Err(Error::parse(kline, "k_min must be at least 1"));
            }
            GeneratorSpec::Configuration { gamma, k_min }
        }
        Some(("ba", line)) => {
            let m0 = e
                .one::<usize>("network.m0", "a positive integer")?
                .map_or(5, |v| v.0);
            let m = e
                .one::<usize>("network.m", "a positive integer")?
                .map_or(3, |v| v.0);
            if m == 0 || m > m0 {
                return Err(Error::parse(
                    line,
                    format!("BA requires m0 >= m >= 1, got m0={m0}, m={m}"),
                ));
            }
            GeneratorSpec::BarabasiAlbert { m0, m }
        }
        Some((other, line)) => {
            return Err(Error::parse(line, format!("unknown generator `{other}`")))
        }
    };

    let default_nodes = if engine.monte_carlo() {
        DEFAULT_MC_NODES
    } else {
        DEFAULT_MF_NODES
    };
    let nodes = match e.list::<usize>("network.nodes", "integers")? {
        None => vec![default_nodes],
        Some((v, line)) => {
            if let Some(bad) = v.iter().find(|&&n| n < 2) {
                return Err(Error::parse(
                    line,
                    format!("network size must be at least 2, got {bad}"),
                ));
            }
            if let GeneratorSpec::BarabasiAlbert { m0, .. } = generator {
                if let Some(bad) = v.iter().find(|&&n| n <= m0) {
                    return Err(Error::parse(
                        line,
                        format!("BA network size {bad} must exceed m0={m0}"),
                    ));
                }
            }
            v
        }
    };

    let real_list = |key: &str, default: f64| -> Result<(Vec<f64>, usize)> {
        Ok(e.list::<f64>(key, "numbers")?.unwrap_or((vec![default], 0)))
    };
    let (lambdas, lline) = match e.list::<f64>("model.lambda", "numbers")? {
        Some(v) => v,
        None => return Err(Error::Config("missing `lambda` in [model]".into())),
    };
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::parse(
            lline,
            format!("lambda must be nonnegative, got {bad}"),
        ));
    }
    let (alphas, aline) = real_list("model.alpha", 1.0)?;
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::parse(
            aline,
            format!("alpha must lie in (0, 1], got {bad}"),
        ));
    }
    let (betas, _) = real_list("model.beta", 0.0)?;
    let (sigmas, sline) = real_list("model.sigma", 1.0)?;
    if let Some(bad) = sigmas.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::parse(
            sline,
            format!("sigma must be positive, got {bad}"),
        ));
    }
    let b = match e.one::<f64>("model.b", "a number")? {
        None => 1.0,
        Some((b, line)) if !(b > 0.0) => {
            return Err(Error::parse(line, format!("b must be positive, got {b}")))
        }
        Some((b, _)) => b,
    };

    let strategy = match e
        .raw("inoculation.strategy")
        .map(|v| (v.value.as_str(), v.line))
    {
        None | Some(("none", _)) => Strategy::None,
        Some(("random", _)) => Strategy::Random,
        Some(("targeted", _)) => Strategy::Targeted,
        Some((other, line)) => {
            return Err(Error::parse(
                line,
                format!("unknown inoculation strategy `{other}`"),
            ))
        }
    };
    let fractions = match (strategy, e.list::<f64>("inoculation.g", "fractions")?) {
        (Strategy::None, Some((_, line))) => {
            return Err(Error::parse(
                line,
                "`g` given but inoculation strategy is none",
            ))
        }
        (Strategy::None, None) => vec![0.0],
        (_, None) => {
            return Err(Error::Config(
                "inoculation strategy needs a `g` list".into(),
            ))
        }
        (_, Some((v, line))) => {
            if let Some(bad) = v.iter().find(|g| !(0.0..=1.0).contains(*g)) {
                return Err(Error::parse(
                    line,
                    format!("inoculation fraction must lie in [0, 1], got {bad}"),
                ));
            }
            v
        }
    };

    let positive = |key: &str, default: f64| -> Result<f64> {
        match e.one::<f64>(key, "a number")? {
            None => Ok(default),
            Some((v, line)) if !(v > 0.0) => Err(Error::parse(
                line,
                format!("`{key}` must be positive, got {v}"),
            )),
            Some((v, _)) => Ok(v),
        }
    };
    let mf_dt = positive("meanfield.dt", 0.01)?;
    let mf_t_end = positive("meanfield.t_end", 100.0)?;
    let mf_s0 = match e.one::<f64>("meanfield.s0", "a number")? {
        None => None,
        Some((v, line)) if !(v > 0.0 && v <= 1.0) => {
            return Err(Error::parse(
                line,
                format!("s0 must lie in (0, 1], got {v}"),
            ))
        }
        Some((v, _)) => Some(v),
    };
    let runs = match e.one::<usize>("montecarlo.runs", "a positive integer")? {
        None => DEFAULT_RUNS,
        Some((0, line)) => return Err(Error::parse(line, "runs must be at least 1")),
        Some((r, _)) => r,
    };
    let mc_dt = positive("montecarlo.dt", 0.1)?;
    let mc_t_max = positive("montecarlo.t_max", 1_000.0)?;
    let mc_seeds = match e.one::<usize>("montecarlo.seeds", "a positive integer")? {
        None => 1,
        Some((0, line)) => return Err(Error::parse(line, "seeds must be at least 1")),
        Some((s, _)) => s,
    };
    let seed = e
        .one::<u64>("run.seed", "an unsigned integer")?
        .map_or(1, |v| v.0);
    let workers = match e.one::<usize>("run.workers", "a positive integer")? {
        None => 0,
        Some((w, _)) => w,
    };
    let tolerance = positive("run.tolerance", 0.1)?;
    let out_dir = e.raw("run.out").map_or_else(
        || PathBuf::from("out").join(&name),
        |v| PathBuf::from(&v.value),
    );

    Ok(Scenario {
        name,
        engine,
        families,
        generator,
        nodes,
        lambdas,
        alphas,
        betas,
        sigmas,
        b,
        strategy,
        fractions,
        mf_dt,
        mf_t_end,
        mf_s0,
        runs,
        mc_dt,
        mc_t_max,
        mc_seeds,
        seed,
        workers,
        tolerance,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "engine = meanfield\n[network]\ngamma = 2.4\nnodes = 10^5\n[model]\nlambda = 0.2, 0.4, 0.6\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.engine, Engine::MeanField);
        assert_eq!(s.nodes, vec![100_000]);
        assert_eq!(s.lambdas, vec![0.2, 0.4, 0.6]);
        assert_eq!(s.alphas, vec![1.0]);
        assert_eq!(s.betas, vec![0.0]);
        assert_eq!(s.sigmas, vec![1.0]);
        assert_eq!(s.b, 1.0);
        assert_eq!(s.mf_dt, 0.01);
        assert_eq!(s.mc_dt, 0.1);
        assert_eq!(
            s.generator,
            GeneratorSpec::Configuration {
                gamma: 2.4,
                k_min: 2
            }
        );
        assert_eq!(s.strategy, Strategy::None);
        assert_eq!(s.fractions, vec![0.0]);
    }

    #[test]
    fn alpha_out_of_range_rejected_with_line() {
        let text = "[model]\nlambda = 0.5\nalpha = 1.5\n";
        match parse_scenario(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("alpha"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn both_engines() {
        let s = parse_scenario("engine = meanfield, montecarlo\n[model]\nlambda = 0.5\n").unwrap();
        assert_eq!(s.engine, Engine::Both);
        assert_eq!(s.nodes, vec![DEFAULT_MC_NODES]);
        assert_eq!(s.runs, DEFAULT_RUNS);
        let s = parse_scenario("engine = both\n[model]\nlambda = 0.5\n").unwrap();
        assert_eq!(s.engine, Engine::Both);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[model]\nlambda = 0.5\nfoo = 1\n", 3),
            ("[model]\nlambda = 0.5\n[bogus]\n", 3),
            ("[model]\nlambda = \n", 2),
            ("[model]\nlambda = 0.5, x\n", 2),
            (
                "[network]\nnodes = 100\nk_min = two\n[model]\nlambda = 1\n",
                3,
            ),
            ("[model]\nlambda = 1\n[montecarlo]\nruns = 0\n", 4),
            (
                "[model]\nlambda = 1\n[inoculation]\nstrategy = random\ng = 1.5\n",
                5,
            ),
            ("engine = warp\n", 1),
            ("[model]\nlambda = 1\nlambda = 2\n", 3),
        ];
        for (text, line) in cases {
            match parse_scenario(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
        assert!(matches!(
            parse_scenario("[model]\nalpha = 1\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn full_config() {
        let text = "\
name = fig8
engine = montecarlo
families = time_series, final_size
[network]
generator = ba
m0 = 4
m = 2
nodes = 1000, 2000
[model]
lambda = 0.6
alpha = 0.5
beta = -0.5, 0.5
sigma = 1
b = 2
[inoculation]
strategy = targeted
g = 0.05, 0.1
[montecarlo]
runs = 10
seeds = 5
[run]
seed = 99
workers = 2
out = /tmp/x
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.name, "fig8");
        assert_eq!(s.families, vec![Family::FinalSize, Family::TimeSeries]);
        assert_eq!(s.generator, GeneratorSpec::BarabasiAlbert { m0: 4, m: 2 });
        assert_eq!(s.strategy, Strategy::Targeted);
        assert_eq!(s.fractions, vec![0.05, 0.1]);
        assert_eq!((s.runs, s.mc_seeds, s.seed, s.workers), (10, 5, 99, 2));
        assert_eq!(s.b, 2.0);
        assert_eq!(s.out_dir, PathBuf::from("/tmp/x"));
        assert!(s.describe().iter().any(|(k, v)| *k == "seed" && v == "99"));
    }
}
