//! Integrates the degree-block equations from a small seed and compares the
//! terminal state with the self-consistent final size.
//!
//! ```text
//! cargo run --release --example meanfield_trajectory -- [lambda] [alpha] [beta] [out.csv]
//! ```

use std::fs::File;
use std::io::BufWriter;

use rumornet::inoculation::InoculationPlan;
use rumornet::meanfield::{
    final_rumor_size, integrate, psi_fixed_point, DegreeClassState, ModelParams,
};
use rumornet::netgen::DegreeDistribution;

fn main() -> rumornet::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| {
        args.get(i)
            .map_or(default, |s| s.parse().expect("expected a number"))
    };
    let p = ModelParams::new(arg(0, 0.8), arg(1, 0.5), arg(2, -0.5))?;

    let d = DegreeDistribution::powerlaw(2.4, 2, 100_000)?;
    let init = DegreeClassState::seeded(&d, 1e-5)?;
    let tr = integrate(&init, &d, &p, &InoculationPlan::None, 100.0, 0.01)?;

    println!("{:>6} {:>10} {:>10} {:>10}", "t", "R", "S", "I");
    for a in tr.samples.iter().step_by(500) {
        println!("{:>6.1} {:>10.6} {:>10.6} {:>10.6}", a.t, a.r, a.s, a.i);
    }
    println!(
        "\nintegrated: R = {:.6}, Psi = {:.6}; fixed point: R = {:.6}, Psi = {:.6}; peak S = {:.4}",
        tr.final_size(),
        tr.last().psi,
        final_rumor_size(&d, &p, &InoculationPlan::None)?,
        psi_fixed_point(&d, &p, &InoculationPlan::None)?,
        tr.peak_spreaders()
    );

    if let Some(path) = args.get(3) {
        tr.write_csv(BufWriter::new(File::create(path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
