//! Sparse term vectors under cosine similarity, read from the
//! `id<TAB>label<TAB>index:value ...` record format.
//!
//! cargo run --release --example sparse_documents

use std::fmt::Write as _;
use std::path::Path;

use crs::dataset::load_sparse_records_from_reader;
use crs::eval::{run_eval, MethodConfig, SplitConfig};
use crs::{CrsParams, SimilarityMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOPICS: [&str; 3] = ["sport", "music", "finance"];

fn main() -> crs::Result<()> {
    // each topic draws most terms from its own block of the vocabulary
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut text = String::new();
    for doc in 0..1500 {
        let topic = doc % TOPICS.len();
        let mut terms: Vec<(u32, f64)> = Vec::new();
        for _ in 0..rng.random_range(8..20) {
            let block = if rng.random_bool(0.8) { topic } else { rng.random_range(0..TOPICS.len()) };
            let term = (block * 500 + rng.random_range(0..60)) as u32;
            let tf = rng.random_range(1..4) as f64;
            match terms.iter_mut().find(|(t, _)| *t == term) {
                Some(e) => e.1 += tf,
                None => terms.push((term, tf)),
            }
        }
        terms.sort_by_key(|e| e.0);
        let pairs: Vec<String> = terms.iter().map(|(t, v)| format!("{t}:{v}")).collect();
        writeln!(text, "doc{doc}\t{}\t{}", TOPICS[topic], pairs.join(" ")).unwrap();
    }

    let ds = load_sparse_records_from_reader(text.as_bytes(), Path::new("docs.txt"))?;
    let r = run_eval(
        &ds,
        &SimilarityMeasure::Cosine,
        &MethodConfig::Crs(CrsParams::with_k(10)),
        SplitConfig::default(),
    )?;
    println!("{} documents, {} representatives", ds.len(), r.rep_count);
    println!("macro precision {:.3}, macro recall {:.3}", r.macro_precision, r.macro_recall);
    println!("classification used {:.1}% of the full comparison cost", 100.0 * r.s_ratio_classify);
    Ok(())
}
