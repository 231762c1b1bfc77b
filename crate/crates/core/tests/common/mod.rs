//! Shared fixtures and brute-force reference implementations for the
//! integration tests. The references use only `SimilarityMeasure::compare`
//! and plain loops, never the library's graph or cover code.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::path::PathBuf;

use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
use crs::dataset::{load_dense_csv, LabelColumn};
use crs::{FeatureVector, LabeledDataset, SimilarityMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load_fashion(name: &str) -> LabeledDataset {
    load_dense_csv(data_path(name), &LabelColumn::default()).expect("bundled Fashion-MNIST subset")
}

/// The same points under a single label.
pub fn one_cluster(ds: &LabeledDataset) -> LabeledDataset {
    LabeledDataset::new(ds.name(), None, ds.items().to_vec(), vec!["c".to_string(); ds.len()]).unwrap()
}

#[derive(Clone, Copy, Debug)]
pub enum Shape {
    Blob,
    Spiral,
    Uniform,
}

/// A single-cluster 2-D point set of `n` points.
pub fn random_cluster(shape: Shape, n: usize, seed: u64) -> LabeledDataset {
    let spec = match shape {
        Shape::Blob => SyntheticSpec::GaussianBlobs {
            centers: vec![[3.0, 4.0]],
            per_blob: n,
            sigma: 1.0,
        },
        Shape::Spiral => SyntheticSpec::TwoSpirals {
            n,
            noise: 0.1,
            turns: 1.5,
        },
        Shape::Uniform => SyntheticSpec::Uniform { n, side: 10.0 },
    };
    one_cluster(&gen_synthetic(&spec, seed).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

fn sim(m: &SimilarityMeasure, items: &[FeatureVector], i: usize, j: usize) -> f64 {
    m.compare(&items[i], &items[j]).unwrap()
}

/// Best first: larger weight, then smaller id.
fn best_first(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0))
}

/// k most similar other items of every item, by brute force.
pub fn oracle_knn(m: &SimilarityMeasure, items: &[FeatureVector], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = items.len();
    (0..n)
        .map(|i| {
            let mut all: Vec<(usize, f64)> =
                (0..n).filter(|&j| j != i).map(|j| (j, sim(m, items, i, j))).collect();
            all.sort_by(best_first);
            all.truncate(k);
            all
        })
        .collect()
}

/// Mean similarity over ordered pairs.
pub fn oracle_homogeneity(m: &SimilarityMeasure, items: &[FeatureVector]) -> f64 {
    let n = items.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += sim(m, items, i, j);
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Greedy cover written straight from the loop contract: score every
/// non-representative by newly covered nodes (itself included), break ties
/// by summed weight to newly covered neighbours, then by lowest id.
pub fn oracle_greedy(knn: &[Vec<(usize, f64)>], tau: f64, epsilon: f64) -> Vec<usize> {
    let n = knn.len();
    let mut rev: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (x, list) in knn.iter().enumerate() {
        for &(r, w) in list {
            if w >= tau {
                rev[r].push((x, w));
            }
        }
    }
    for l in &mut rev {
        l.sort_by(best_first);
    }
    let mut in_z = vec![true; n];
    let mut z = n;
    let mut reps: Vec<usize> = Vec::new();
    while ((n - z) as f64 / n as f64) < epsilon {
        let mut best: Option<(usize, usize, f64)> = None;
        for u in 0..n {
            if reps.contains(&u) {
                continue;
            }
            let mut score = usize::from(in_z[u]);
            let mut weight = 0.0;
            for &(c, w) in &rev[u] {
                if in_z[c] {
                    score += 1;
                    weight += w;
                }
            }
            let better = match best {
                None => true,
                Some((_, bs, bw)) => score > bs || (score == bs && weight > bw),
            };
            if better {
                best = Some((u, score, weight));
            }
        }
        let (u, score, _) = best.unwrap();
        if score == 0 {
            // only reachable without self-coverage; keep the contract anyway
            let first = (0..n).find(|&i| in_z[i]).unwrap();
            reps.push(first);
            in_z[first] = false;
            z -= 1;
            continue;
        }
        reps.push(u);
        if in_z[u] {
            in_z[u] = false;
            z -= 1;
        }
        for &(c, _) in &rev[u] {
            if in_z[c] {
                in_z[c] = false;
                z -= 1;
            }
        }
    }
    reps
}

/// δ-medoids by the documented contract, on item positions `0..n`.
/// Returns the final representatives (ascending) and each item's owner.
pub fn oracle_delta_medoids(
    m: &SimilarityMeasure,
    items: &[FeatureVector],
    delta: f64,
    max_rounds: usize,
) -> (Vec<usize>, Vec<usize>) {
    let n = items.len();
    let assign = |seed_reps: &[usize]| -> (Vec<usize>, Vec<usize>, f64) {
        let mut reps: Vec<usize> = seed_reps.to_vec();
        let mut owner = vec![usize::MAX; n];
        let mut objective = 0.0;
        for x in 0..n {
            if reps.contains(&x) {
                owner[x] = x;
                continue;
            }
            let mut sorted = reps.clone();
            sorted.sort();
            let mut best: Option<(usize, f64)> = None;
            for &r in &sorted {
                let s = sim(m, items, x, r);
                if best.is_none() || s > best.unwrap().1 {
                    best = Some((r, s));
                }
            }
            match best {
                Some((r, s)) if s >= delta => {
                    owner[x] = r;
                    objective += s;
                }
                _ => {
                    reps.push(x);
                    owner[x] = x;
                }
            }
        }
        reps.sort();
        (reps, owner, objective)
    };
    let (mut reps, mut owner, mut objective) = assign(&[]);
    for _ in 0..max_rounds {
        let mut medoids = Vec::new();
        for &r in &reps {
            let group: Vec<usize> = (0..n).filter(|&x| owner[x] == r).collect();
            let mut best = (group[0], f64::NEG_INFINITY);
            for &y in &group {
                let t: f64 = group.iter().filter(|&&z| z != y).map(|&z| sim(m, items, y, z)).sum();
                if t > best.1 {
                    best = (y, t);
                }
            }
            medoids.push(best.0);
        }
        medoids.sort();
        if medoids == reps {
            break;
        }
        let (r2, o2, obj2) = assign(&medoids);
        if obj2 < objective {
            break;
        }
        let stable = r2 == reps;
        reps = r2;
        owner = o2;
        objective = obj2;
        if stable {
            break;
        }
    }
    (reps, owner)
}
