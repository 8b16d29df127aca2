//! Analytic rumor thresholds: the moment ratio as a function of `alpha`, and
//! the bounded-network thresholds across sizes for the three regimes.

use rumornet::netgen::DegreeDistribution;
use rumornet::thresholds::{
    compare_classic_modified, threshold_modified, threshold_modified_bounded,
};

fn main() -> rumornet::Result<()> {
    let d = DegreeDistribution::powerlaw(2.4, 2, 100_000)?;
    println!("lambda_c vs alpha (beta = 0, gamma = 2.4, N = 1e5)");
    for i in 1..=10 {
        let alpha = i as f64 / 10.0;
        println!(
            "  alpha = {alpha:.1}  lambda_c = {:.5}",
            threshold_modified(&d, alpha, 0.0)
        );
    }

    println!("\nbounded threshold vs N (gamma = 2.4, k_min = 2)");
    println!(
        "  {:>8} {:>22} {:>22} {:>22}",
        "N", "a=0.5 b=-0.5", "a=1 b=0", "a=0.4 b=0"
    );
    for e in 2..=6 {
        let n = 10usize.pow(e);
        let row: Vec<String> = [(0.5, -0.5), (1.0, 0.0), (0.4, 0.0)]
            .iter()
            .map(|&(a, b)| {
                let r = threshold_modified_bounded(2.4, 2, n, a, b).unwrap();
                format!("{:.4} ({})", r.value, r.regime)
            })
            .collect();
        println!("  {:>8} {:>22} {:>22} {:>22}", n, row[0], row[1], row[2]);
    }

    println!("\nclassic vs modified bounded threshold (N = 1e4)");
    for (a, b) in [(1.0, 0.0), (0.8, -0.2), (0.5, -0.5), (0.3, -1.0)] {
        let (classic, modified) = compare_classic_modified(2.4, 2, 10_000, a, b)?;
        println!("  alpha = {a}, beta = {b}: classic {classic:.5}, modified {modified:.5}");
    }
    Ok(())
}
