//! CRS against the full training set on a 10,000-image Fashion-MNIST subset.
//!
//! cargo run --release --example fashion_mnist -- [path/to/fashion_mnist_10k.csv.gz]

use std::path::PathBuf;
use std::time::Instant;

use crs::dataset::{load_dense_csv, LabelColumn};
use crs::eval::{run_eval, MethodConfig, SplitConfig};
use crs::{CrsParams, SimilarityMeasure};

fn main() -> crs::Result<()> {
    let path = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fashion_mnist_10k.csv.gz")
    });
    let ds = load_dense_csv(&path, &LabelColumn::default())?;
    println!("{} images, {} classes", ds.len(), ds.label_set().len());

    for method in [MethodConfig::Crs(CrsParams::with_k(15)), MethodConfig::Full] {
        let t = Instant::now();
        let r = run_eval(&ds, &SimilarityMeasure::Cosine, &method, SplitConfig::default())?;
        println!(
            "{:5} reps {:5} ({:5.2}%)  P {:.3}  R {:.3}  classify calls {:>9}  {:.1}s",
            method.method().name(),
            r.rep_count,
            100.0 * r.prototype_fraction,
            r.macro_precision,
            r.macro_recall,
            r.classify_calls,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
