//! NN-Descent (Dong, Charikar & Li, 2011) over one cluster.
//!
//! Every node starts with `k` random neighbours. Each round samples up to
//! `ceil(rho * k)` "new" entries per list, adds the same number of sampled
//! reverse neighbours, and runs local joins: new x new and new x old pairs
//! are compared and offered to both endpoints' lists. The build stops once a
//! round makes fewer than `delta_nn * n * k` list updates.
//!
//! Random choices come from one seeded stream consumed in a fixed order, and
//! similarities for a round are computed before any list is touched. The
//! result therefore does not depend on the number of rayon workers.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{exact_knn, BoundedList, KnnGraph};
use crate::dataset::{Cluster, ItemId};
use crate::error::{Error, Result};
use crate::similarity::CountingSimilarity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnDescentParams {
    pub k: usize,
    /// Sample rate for local joins.
    pub rho: f64,
    /// Early-termination threshold on the fraction of updated list slots.
    pub delta_nn: f64,
    pub seed: u64,
    pub max_iters: usize,
}

impl NnDescentParams {
    pub fn new(k: usize) -> Self {
        NnDescentParams {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.delta_nn > 0.0 && self.delta_nn < 1.0) {
            return Err(Error::Config(format!(
                "delta_nn must lie in (0, 1), got {}",
                self.delta_nn
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for NnDescentParams {
    fn default() -> Self {
        NnDescentParams {
            k: 10,
            rho: 0.7,
            delta_nn: 0.001,
            seed: 42,
            max_iters: 30,
        }
    }
}

/// Per-round record of an NN-Descent build.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NnDescentTrace {
    /// Successful list updates in each round.
    pub updates: Vec<usize>,
    /// Counter value after initialisation and after each round.
    pub evaluations: Vec<u64>,
    /// Smallest weight in each node's list, after initialisation and after
    /// each round.
    pub min_weights: Vec<Vec<f64>>,
    /// Set when the cluster was too small and the exact graph was built.
    pub exact_fallback: bool,
}

pub fn nn_descent(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &NnDescentParams,
) -> Result<KnnGraph> {
    build(cluster, cs, params, None)
}

/// Like [`nn_descent`], also returning the per-round trace.
pub fn nn_descent_traced(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &NnDescentParams,
) -> Result<(KnnGraph, NnDescentTrace)> {
    let mut trace = NnDescentTrace::default();
    let g = build(cluster, cs, params, Some(&mut trace))?;
    Ok((g, trace))
}

fn build(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &NnDescentParams,
    mut trace: Option<&mut NnDescentTrace>,
) -> Result<KnnGraph> {
    params.validate()?;
    let members = cluster.members();
    let n = members.len();
    let k = params.k;
    if n <= k + 1 {
        if let Some(t) = trace.as_deref_mut() {
            t.exact_fallback = true;
        }
        return exact_knn(cluster, cs, k);
    }
    let local = |id: ItemId| cluster.position(id).expect("neighbour outside cluster");

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut lists = vec![BoundedList::new(k); n];

    // random initial neighbourhoods
    let mut init = Vec::with_capacity(n * k);
    for v in 0..n {
        for u in index::sample(&mut rng, n - 1, k) {
            let u = if u >= v { u + 1 } else { u };
            init.push((v, u));
        }
    }
    let pairs: Vec<_> = init.iter().map(|&(v, u)| (members[v], members[u])).collect();
    let sims = cs.evaluate_pairs(&pairs)?;
    for (&(v, u), &w) in init.iter().zip(&sims) {
        lists[v].insert(members[u], w, true);
    }
    record(&mut trace, &lists, cs, None);

    let sample = ((params.rho * k as f64).ceil() as usize).clamp(1, k);
    let threshold = params.delta_nn * (n * k) as f64;
    let mut old: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut new: Vec<Vec<usize>> = vec![Vec::new(); n];

    for _ in 0..params.max_iters {
        let mut rev_old: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut rev_new: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            old[v].clear();
            new[v].clear();
            let entries = lists[v].entries_mut();
            let mut fresh = Vec::new();
            for (slot, e) in entries.iter().enumerate() {
                if e.2 {
                    fresh.push(slot);
                } else {
                    old[v].push(local(e.0));
                }
            }
            if fresh.len() > sample {
                fresh.shuffle(&mut rng);
                fresh.truncate(sample);
                fresh.sort_unstable();
            }
            for slot in fresh {
                entries[slot].2 = false;
                new[v].push(local(entries[slot].0));
            }
            for &u in &old[v] {
                rev_old[u].push(v);
            }
            for &u in &new[v] {
                rev_new[u].push(v);
            }
        }

        let mut joins: Vec<(usize, usize)> = Vec::new();
        for v in 0..n {
            extend_sampled(&mut old[v], &mut rev_old[v], sample, &mut rng);
            extend_sampled(&mut new[v], &mut rev_new[v], sample, &mut rng);
            let (nv, ov) = (&new[v], &old[v]);
            for (i, &a) in nv.iter().enumerate() {
                for &b in &nv[i + 1..] {
                    joins.push(ordered(a, b));
                }
                for &b in ov {
                    if a != b {
                        joins.push(ordered(a, b));
                    }
                }
            }
        }
        joins.sort_unstable();
        joins.dedup();

        let pairs: Vec<_> = joins.iter().map(|&(a, b)| (members[a], members[b])).collect();
        let sims = cs.evaluate_pairs(&pairs)?;
        let mut updates = 0usize;
        for (&(a, b), &w) in joins.iter().zip(&sims) {
            updates += usize::from(lists[a].insert(members[b], w, true));
            updates += usize::from(lists[b].insert(members[a], w, true));
        }
        record(&mut trace, &lists, cs, Some(updates));
        if (updates as f64) < threshold {
            break;
        }
    }

    Ok(KnnGraph::from_parts(
        k,
        members.to_vec(),
        lists.iter().map(BoundedList::to_neighbors).collect(),
    ))
}

#[inline]
fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Adds up to `sample` entries of `reverse` to `base`, keeping `base` a set.
fn extend_sampled(base: &mut Vec<usize>, reverse: &mut Vec<usize>, sample: usize, rng: &mut ChaCha8Rng) {
    if reverse.len() > sample {
        reverse.shuffle(rng);
        reverse.truncate(sample);
    }
    base.extend_from_slice(reverse);
    base.sort_unstable();
    base.dedup();
}

fn record(
    trace: &mut Option<&mut NnDescentTrace>,
    lists: &[BoundedList],
    cs: &CountingSimilarity<'_>,
    updates: Option<usize>,
) {
    if let Some(t) = trace.as_deref_mut() {
        if let Some(u) = updates {
            t.updates.push(u);
        }
        t.evaluations.push(cs.count());
        t.min_weights
            .push(lists.iter().map(BoundedList::min_weight).collect());
    }
}
