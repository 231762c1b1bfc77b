//! A hub-and-spoke toy: reverse the k-NN graph, prune it, and watch the greedy
//! cover pick the hubs.
//!
//! cargo run --example reverse_graph

use crs::select::coverage_fraction;
use crs::{
    exact_knn, greedy_cover, homogeneity, reverse_and_prune, CountingSimilarity, FeatureVector, LabeledDataset,
    ScoreRule, SimilarityMeasure, SimilaritySpace,
};

fn main() -> crs::Result<()> {
    // two hubs with their spokes, plus a straggler
    let points = [
        [0.0, 0.0],
        [0.3, 0.0],
        [-0.3, 0.0],
        [0.0, 0.3],
        [0.0, -0.3],
        [3.0, 0.0],
        [3.3, 0.0],
        [2.7, 0.0],
        [3.0, 0.3],
        [6.0, 2.0],
    ];
    let items = points.iter().map(|p| FeatureVector::Dense(p.to_vec())).collect();
    let ds = LabeledDataset::new("toy", None, items, vec!["c".into(); points.len()])?;
    let cluster = &ds.clusters()[0];
    let m = SimilarityMeasure::InverseEuclidean;
    let space = SimilaritySpace::new(&m, &ds)?;
    let cs = CountingSimilarity::new(&space);

    let g = exact_knn(cluster, &cs, 2)?;
    let tau = homogeneity(cluster, &cs)?;
    let rg = reverse_and_prune(&g, tau);

    println!("tau = {tau:.3}");
    for pos in 0..rg.len() {
        let ins: Vec<String> = rg
            .reverse_neighbors(pos)
            .iter()
            .map(|nb| format!("{}({:.2})", nb.id, nb.weight))
            .collect();
        println!("  {} <- [{}]", rg.nodes()[pos], ins.join(", "));
    }

    for eps in [0.8, 0.9, 1.0] {
        let cover = greedy_cover(&rg, cluster.len(), eps, ScoreRule::UncoveredCount)?;
        let ids: Vec<String> = cover.representatives.iter().map(|r| r.to_string()).collect();
        println!(
            "epsilon {eps:.1}: representatives [{}], covered {:.2}",
            ids.join(", "),
            coverage_fraction(&rg, &cover.representatives)
        );
    }
    Ok(())
}
