//! Runs a scenario file through the sweep harness, the same path the
//! `rumornet simulate` command takes.
//!
//! ```text
//! cargo run --release --example scenario_sweep -- crates/core/examples/scenarios/size_independence.conf
//! ```

use rumornet::expcli::{compare_engines, run_scenario, Engine, Scenario};

fn main() -> rumornet::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/scenarios/size_independence.conf"
        )
        .to_string()
    });
    let s = Scenario::load(&path)?;
    println!(
        "scenario {} ({} engine), output in {}",
        s.name,
        s.engine,
        s.out_dir.display()
    );

    let manifest = if s.engine == Engine::Both {
        let report = compare_engines(&s)?;
        for d in &report.rows {
            println!(
                "point {:>3}: R_MF = {:.4}, R_MC = {:.4}, deviation = {:.4} {}",
                d.point.index,
                d.r_meanfield,
                d.r_montecarlo,
                d.deviation,
                if d.pass { "pass" } else { "fail" }
            );
        }
        report.manifest
    } else {
        run_scenario(&s)?.manifest
    };
    for (file, hash) in &manifest.files {
        println!("{}  {file}", &hash[..16]);
    }
    for f in &manifest.failures {
        println!("failed {} point {}: {}", f.family, f.point, f.message);
    }
    Ok(())
}
