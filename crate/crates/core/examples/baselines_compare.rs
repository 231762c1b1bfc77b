//! CRS next to the δ-medoids, random-subset and full-cluster baselines.
//!
//! cargo run --release --example baselines_compare

use crs::baselines::DeltaMedoidsParams;
use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
use crs::eval::{run_eval, MethodConfig, SplitConfig};
use crs::{CrsParams, SimilarityMeasure};

fn main() -> crs::Result<()> {
    let ds = gen_synthetic(
        &SyntheticSpec::GaussianBlobs {
            centers: vec![[0.0, 0.0], [3.0, 0.0], [1.5, 2.5]],
            per_blob: 600,
            sigma: 0.9,
        },
        5,
    )?;
    let m = SimilarityMeasure::InverseEuclidean;
    let methods = [
        MethodConfig::Crs(CrsParams::with_k(10)),
        MethodConfig::DeltaMedoids(DeltaMedoidsParams::default()),
        MethodConfig::Random { fraction: 0.05, seed: 42 },
        MethodConfig::Full,
    ];

    println!(
        "{:14} {:>6} {:>9} {:>9} {:>9} {:>10} {:>10}",
        "method", "reps", "fraction", "macro P", "macro R", "build", "classify"
    );
    for method in &methods {
        let r = run_eval(&ds, &m, method, SplitConfig::default())?;
        println!(
            "{:14} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>10} {:>10}",
            method.method().name(),
            r.rep_count,
            r.prototype_fraction,
            r.macro_precision,
            r.macro_recall,
            r.build_calls + r.threshold_calls,
            r.classify_calls
        );
    }
    Ok(())
}
