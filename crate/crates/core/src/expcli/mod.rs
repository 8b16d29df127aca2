//! Experiment harness: scenario files, parameter sweeps over both engines,
//! CSV and SVG outputs with a hashed manifest.
//!
//! Every random draw is keyed to `(seed, grid point, run)`, so outputs do not
//! depend on the worker count or scheduling.

mod harness;
pub mod scenario;
pub mod svg;

pub use harness::{
    analytic_distribution, compare_engines, generate_network, generate_networks, grid,
    run_scenario, run_thresholds, threshold_table, Deviation, DeviationReport, Failure, GridPoint,
    Manifest, MeanFieldOutcome, PointOutcome, ScenarioOutput, ThresholdRow,
};
pub use scenario::{parse_scenario, Engine, Family, GeneratorSpec, Scenario, Strategy};
