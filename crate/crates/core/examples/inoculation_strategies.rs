//! Random versus targeted inoculation: analytic thresholds and Monte Carlo
//! final sizes at the same mean inoculated fraction.

use rumornet::inoculation::{make_random_plan, make_targeted_plan, InoculationPlan};
use rumornet::meanfield::ModelParams;
use rumornet::montecarlo::{ensemble, NetworkSource, Seeding, SimConfig};
use rumornet::netgen::{build_configuration_network, DegreeDistribution};
use rumornet::rng::stream;
use rumornet::thresholds::{
    threshold_modified, threshold_random_inoc, threshold_targeted_inoc, Threshold,
};

fn fmt(t: Threshold) -> String {
    t.value()
        .map_or_else(|| "none".to_string(), |v| format!("{v:.4}"))
}

fn main() -> rumornet::Result<()> {
    let n = 10_000;
    let (alpha, beta) = (0.5, -0.5);
    let d = DegreeDistribution::powerlaw(2.4, 2, n)?;
    let lc = threshold_modified(&d, alpha, beta);
    println!("no inoculation: lambda_c = {lc:.4}");

    let net = build_configuration_network(&d, n, &mut stream(3))?.network;
    let realized = net.degree_distribution()?;
    let p = ModelParams::new(0.6, alpha, beta)?;
    let cfg = SimConfig {
        seeding: Seeding::Count(10),
        ..SimConfig::default()
    };
    let base = ensemble(
        NetworkSource::Fixed(&net),
        &p,
        &InoculationPlan::None,
        &cfg,
        50,
        1,
    )?;
    println!(
        "Monte Carlo at lambda = 0.6 without inoculation: R = {:.4}\n",
        base.mean_r
    );

    println!(
        "{:>5} {:>12} {:>12} {:>10} {:>10} {:>6}",
        "g", "random l_c", "targeted l_c", "R random", "R target", "k_t"
    );
    for g in [0.05, 0.1, 0.2, 0.25] {
        let random = make_random_plan(g)?;
        let targeted = make_targeted_plan(&d, g)?;
        let k_t = match &targeted {
            InoculationPlan::Targeted(t) => t.k_t,
            _ => 0,
        };
        let r_random = ensemble(NetworkSource::Fixed(&net), &p, &random, &cfg, 50, 2)?.mean_r;
        let r_targeted = ensemble(
            NetworkSource::Fixed(&net),
            &p,
            &make_targeted_plan(&realized, g)?,
            &cfg,
            50,
            3,
        )?
        .mean_r;
        println!(
            "{g:>5} {:>12} {:>12} {r_random:>10.4} {r_targeted:>10.4} {k_t:>6}",
            fmt(threshold_random_inoc(lc, g)?),
            fmt(threshold_targeted_inoc(&d, alpha, beta, &targeted)?)
        );
    }
    Ok(())
}
