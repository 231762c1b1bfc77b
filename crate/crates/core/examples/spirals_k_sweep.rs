//! How k trades prototype size against graph cost on a two-spiral cluster.
//!
//! cargo run --release --example spirals_k_sweep

use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
use crs::eval::sweep_cluster_k;
use crs::{CrsParams, LabeledDataset, SimilarityMeasure, SimilaritySpace};

fn main() -> crs::Result<()> {
    let spirals = gen_synthetic(&SyntheticSpec::TwoSpirals { n: 2000, noise: 0.05, turns: 1.5 }, 3)?;
    let ds = LabeledDataset::new("spirals", None, spirals.items().to_vec(), vec!["s".into(); spirals.len()])?;
    let m = SimilarityMeasure::InverseEuclidean;
    let space = SimilaritySpace::new(&m, &ds)?;

    let rows = sweep_cluster_k(&space, &ds.clusters()[0], &[3, 5, 10, 15, 20, 30], &CrsParams::default())?;
    println!("{:>4} {:>6} {:>9} {:>9} {:>8}", "k", "reps", "fraction", "covered", "S");
    for r in rows {
        println!(
            "{:>4} {:>6} {:>9.4} {:>9.4} {:>8.4}",
            r.k, r.representatives, r.prototype_fraction, r.covered_fraction, r.s_ratio_build
        );
    }
    Ok(())
}
