//! Builds a configuration-model network with a `k^-2.4` degree law and a
//! Barabási–Albert network, prints their degree statistics and writes the
//! first one as an edge list.
//!
//! ```text
//! cargo run --release --example generate_networks -- [N] [out.edges]
//! ```

use std::fs::File;
use std::io::BufWriter;

use rumornet::netgen::{
    build_ba_network, build_configuration_network, hard_cutoff, DegreeDistribution,
};
use rumornet::rng::stream;

fn main() -> rumornet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args
        .next()
        .map_or(10_000, |s| s.parse().expect("N must be an integer"));
    let out = args.next();

    let target = DegreeDistribution::powerlaw(2.4, 2, n)?;
    println!(
        "target P(k) ~ k^-2.4 on [2, {}], k_max = {:.1}, <k> = {:.3}",
        target.k_max(),
        hard_cutoff(2.4, 2, n),
        target.mean_degree()
    );

    let cm = build_configuration_network(&target, n, &mut stream(1))?;
    let realized = cm.network.degree_distribution()?;
    println!(
        "configuration: {} edges, {} erased stub pairs, <k> = {:.3}, TV distance to target = {:.4}, connected = {}",
        cm.network.edge_count(),
        cm.erased_edges,
        realized.mean_degree(),
        realized.total_variation(&target),
        cm.network.is_connected()
    );

    let ba = build_ba_network(n, 4, 3, &mut stream(2))?;
    let ba_dist = ba.degree_distribution()?;
    println!(
        "barabasi-albert (m0 = 4, m = 3): {} edges, <k> = {:.3}, max degree = {}",
        ba.edge_count(),
        ba_dist.mean_degree(),
        ba_dist.k_max()
    );

    if let Some(path) = out {
        cm.network
            .write_edge_list(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
