//! Approximate k-NN graph quality and cost against brute force.
//!
//! cargo run --release --example nn_descent_recall -- [n] [k]

use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
use crs::knn_graph::nn_descent_traced;
use crs::similarity::s_ratio;
use crs::{exact_knn, graph_recall, CountingSimilarity, LabeledDataset, NnDescentParams, SimilarityMeasure, SimilaritySpace};

fn main() -> crs::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5000, |s| s.parse().expect("n"));
    let k: usize = args.next().map_or(10, |s| s.parse().expect("k"));

    let blobs = gen_synthetic(
        &SyntheticSpec::GaussianBlobs {
            centers: vec![[0.0, 0.0], [6.0, 0.0], [0.0, 6.0], [6.0, 6.0]],
            per_blob: n / 4,
            sigma: 1.0,
        },
        1,
    )?;
    // one cluster holding every point
    let ds = LabeledDataset::new("blobs", None, blobs.items().to_vec(), vec!["all".into(); blobs.len()])?;
    let cluster = &ds.clusters()[0];
    let m = SimilarityMeasure::InverseEuclidean;
    let space = SimilaritySpace::new(&m, &ds)?;

    let cs = CountingSimilarity::new(&space);
    let (approx, trace) = nn_descent_traced(cluster, &cs, &NnDescentParams::new(k))?;
    let exact = exact_knn(cluster, &CountingSimilarity::new(&space), k)?;

    println!("n = {}, k = {k}", ds.len());
    for (round, u) in trace.updates.iter().enumerate() {
        println!("  round {:2}: {:7} updates, {:9} evaluations", round + 1, u, trace.evaluations[round + 1]);
    }
    println!("recall {:.4}", graph_recall(&approx, &exact)?);
    println!("S = {:.4} ({} of {} pairs)", s_ratio(cs.count(), ds.len()), cs.count(), ds.len() * (ds.len() - 1) / 2);
    Ok(())
}
