//! Agent-level ensembles on one configuration-model network, next to the
//! mean-field final size for the same parameters.

use rumornet::inoculation::InoculationPlan;
use rumornet::meanfield::{final_rumor_size, ModelParams};
use rumornet::montecarlo::{ensemble, NetworkSource, Seeding, SimConfig};
use rumornet::netgen::{build_configuration_network, DegreeDistribution};
use rumornet::rng::stream;

fn main() -> rumornet::Result<()> {
    let n = 10_000;
    let d = DegreeDistribution::powerlaw(2.4, 2, n)?;
    let net = build_configuration_network(&d, n, &mut stream(7))?.network;
    let cfg = SimConfig {
        seeding: Seeding::Count(10),
        ..SimConfig::default()
    };

    println!(
        "{:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>8}",
        "lambda", "alpha", "beta", "R_MC", "std", "R_MF", "peak_S"
    );
    for (lambda, alpha, beta) in [
        (0.4, 0.5, -0.5),
        (0.8, 0.5, -0.5),
        (1.5, 0.5, -0.5),
        (1.0, 1.0, 0.0),
        (2.0, 1.0, 0.0),
    ] {
        let p = ModelParams::new(lambda, alpha, beta)?;
        let e = ensemble(
            NetworkSource::Fixed(&net),
            &p,
            &InoculationPlan::None,
            &cfg,
            50,
            2024,
        )?;
        let mf = final_rumor_size(&d, &p, &InoculationPlan::None)?;
        println!(
            "{lambda:>6} {alpha:>6} {beta:>6} {:>10.4} {:>10.4} {mf:>10.4} {:>8.4}",
            e.mean_r, e.std_r, e.mean_peak_s
        );
    }
    Ok(())
}
