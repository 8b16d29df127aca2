//! Rumor spreading on scale-free networks.
//!
//! The model extends the classical ignorant/spreader/stifler dynamics with two
//! degree-dependent ingredients: a spreader of degree `k` contacts `k^alpha`
//! neighbours per time step, and the tie between nodes of degree `k_i` and
//! `k_j` carries strength `b (k_i k_j)^beta`. The crate provides
//!
//! * [`netgen`]: truncated power-law degree distributions, Barabási–Albert and
//!   configuration-model networks, tie and node strengths;
//! * [`meanfield`]: degree-block ODEs (classical and modified), the
//!   self-consistent final-size equation and closed-form ignorant densities;
//! * [`thresholds`]: analytic rumor thresholds (discrete, bounded continuum,
//!   inoculated) and empirical threshold estimation;
//! * [`inoculation`]: random and targeted immunization plans;
//! * [`montecarlo`]: agent-level stochastic simulation and ensembles;
//! * [`expcli`]: scenario files, parameter sweeps and CSV/SVG output.

pub mod error;
pub mod expcli;
pub mod inoculation;
pub mod meanfield;
pub mod montecarlo;
pub mod netgen;
pub mod rng;
pub mod thresholds;

pub use error::{Error, Result};
pub use inoculation::InoculationPlan;
pub use meanfield::{DegreeClassState, ModelParams, Trajectory};
pub use montecarlo::{SimState, SimTrace};
pub use netgen::{DegreeDistribution, Network, TieStrengthParams};
pub use thresholds::{Regime, Threshold, ThresholdReport};
