//! Clusters known only through a precomputed similarity matrix, as with
//! graph-derived similarities between network nodes.
//!
//! cargo run --release --example precomputed_matrix

use crs::dataset::synthetic::network_style_matrix;
use crs::eval::{cluster_meta, run_eval, MethodConfig, SplitConfig};
use crs::CrsParams;

fn main() -> crs::Result<()> {
    let sizes = [120, 300, 60, 200, 90];
    let targets = [0.58, 0.14, 0.84, 0.35, 1.0];
    let (ds, m) = network_style_matrix(&sizes, &targets, 0.1, 8)?;

    println!("{:6} {:>6} {:>12}", "label", "size", "homogeneity");
    for c in cluster_meta(&ds, &m, 8)? {
        println!("{:6} {:>6} {:>12.3}", c.label, c.size, c.homogeneity.unwrap_or(f64::NAN));
    }

    let r = run_eval(&ds, &m, &MethodConfig::Crs(CrsParams::with_k(8)), SplitConfig::default())?;
    println!();
    println!("{:6} {:>9} {:>9}", "label", "precision", "recall");
    for c in &r.per_class {
        println!(
            "{:6} {:>9.3} {:>9.3}",
            c.label,
            c.precision.unwrap_or(f64::NAN),
            c.recall.unwrap_or(f64::NAN)
        );
    }
    println!("{} representatives for {} training items", r.rep_count, r.train_size);
    Ok(())
}
