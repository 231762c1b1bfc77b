//! Two Gaussian blobs: select prototypes with CRS and classify a held-out split.
//!
//! cargo run --example quickstart

use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
use crs::eval::{run_eval, MethodConfig, SplitConfig};
use crs::{CrsParams, SimilarityMeasure};

fn main() -> crs::Result<()> {
    let ds = gen_synthetic(
        &SyntheticSpec::GaussianBlobs {
            centers: vec![[0.0, 0.0], [5.0, 5.0]],
            per_blob: 1000,
            sigma: 1.0,
        },
        42,
    )?;

    let report = run_eval(
        &ds,
        &SimilarityMeasure::InverseEuclidean,
        &MethodConfig::Crs(CrsParams::with_k(10)),
        SplitConfig::default(),
    )?;

    println!("train {} / test {}", report.train_size, report.test_size);
    println!(
        "kept {} representatives ({:.1}% of train)",
        report.rep_count,
        100.0 * report.prototype_fraction
    );
    for c in &report.per_class {
        println!(
            "  {:8} precision {:.3} recall {:.3}",
            c.label,
            c.precision.unwrap_or(f64::NAN),
            c.recall.unwrap_or(f64::NAN)
        );
    }
    println!("accuracy {:.4}", report.accuracy);
    println!(
        "similarity calls: build {} (S = {:.3}), classify {}",
        report.build_calls, report.s_ratio_build, report.classify_calls
    );
    Ok(())
}
