//! Reverse k-NN graph with threshold pruning, and cluster homogeneity.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cluster, ItemId};
use crate::error::{Error, Result};
use crate::knn_graph::{rank, KnnGraph, Neighbor};
use crate::similarity::CountingSimilarity;

/// Clusters up to this size get the exact homogeneity as their pruning
/// threshold; larger ones use a sampled estimate.
pub const EXACT_HOMOGENEITY_MAX: usize = 2000;

/// Sample fraction used for approximate homogeneity.
pub const HOMOGENEITY_SAMPLE_FRACTION: f64 = 0.05;

/// Reverse neighbourhoods `U_r`: `x` is listed under `r` when `r` is among
/// `x`'s k nearest and `s(x, r) >= tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReverseGraph {
    tau: f64,
    nodes: Vec<ItemId>,
    lists: Vec<Vec<Neighbor>>,
}

impl ReverseGraph {
    /// Builds a reverse graph directly from lists, sorting each one.
    pub fn from_lists(tau: f64, nodes: Vec<ItemId>, mut lists: Vec<Vec<Neighbor>>) -> Result<Self> {
        if nodes.len() != lists.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} reverse lists",
                nodes.len(),
                lists.len()
            )));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("reverse graph nodes must be ascending".into()));
        }
        for l in &mut lists {
            if l.iter().any(|nb| nodes.binary_search(&nb.id).is_err()) {
                return Err(Error::Domain("reverse edge leaves the node set".into()));
            }
            l.sort_by(|a, b| rank(a.weight, a.id, b.weight, b.id));
        }
        Ok(ReverseGraph { tau, nodes, lists })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn nodes(&self) -> &[ItemId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `U_r` for the node at `pos`, by descending weight then ascending id.
    pub fn reverse_neighbors(&self, pos: usize) -> &[Neighbor] {
        &self.lists[pos]
    }

    pub fn reverse_neighbors_of(&self, id: ItemId) -> Option<&[Neighbor]> {
        self.position(id).map(|p| self.lists[p].as_slice())
    }

    pub fn position(&self, id: ItemId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    pub fn edge_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

/// Reverses every edge of `g` and drops those lighter than `tau`.
pub fn reverse_and_prune(g: &KnnGraph, tau: f64) -> ReverseGraph {
    let nodes = g.nodes().to_vec();
    let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); nodes.len()];
    for (pos, &x) in nodes.iter().enumerate() {
        for nb in g.neighbors(pos) {
            if nb.weight >= tau {
                let r = nodes
                    .binary_search(&nb.id)
                    .expect("k-NN edge leaves the cluster");
                lists[r].push(Neighbor {
                    id: x,
                    weight: nb.weight,
                });
            }
        }
    }
    for l in &mut lists {
        l.sort_by(|a, b| rank(a.weight, a.id, b.weight, b.id));
    }
    ReverseGraph { tau, nodes, lists }
}

/// Mean similarity over ordered pairs of distinct members.
pub fn homogeneity(cluster: &Cluster, cs: &CountingSimilarity<'_>) -> Result<f64> {
    homogeneity_of(cluster.members(), cs)
}

fn homogeneity_of(members: &[ItemId], cs: &CountingSimilarity<'_>) -> Result<f64> {
    let n = members.len();
    if n < 2 {
        return Err(Error::Domain(
            "homogeneity needs at least 2 members".into(),
        ));
    }
    // per-row sums in parallel, combined in row order
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            for j in (i + 1)..n {
                sum += cs.evaluate(members[i], members[j])?;
                sum += cs.evaluate(members[j], members[i])?;
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;
    let total: f64 = rows.iter().sum();
    Ok(total / (n * (n - 1)) as f64)
}

/// Exact homogeneity of a seeded uniform sample of `max(2, ceil(fraction * n))`
/// members.
pub fn approx_homogeneity(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    fraction: f64,
    seed: u64,
) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "sample fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let n = cluster.len();
    if n < 2 {
        return Err(Error::Domain(
            "homogeneity needs at least 2 members".into(),
        ));
    }
    let m = ((fraction * n as f64).ceil() as usize).clamp(2, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<ItemId> = index::sample(&mut rng, n, m)
        .into_iter()
        .map(|p| cluster.members()[p])
        .collect();
    picked.sort_unstable();
    homogeneity_of(&picked, cs)
}

/// How the pruning threshold of a cluster is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    /// Exact homogeneity up to [`EXACT_HOMOGENEITY_MAX`] members, a 5% sample
    /// above that.
    Auto,
    Exact,
    Sampled { fraction: f64 },
    Fixed(f64),
}

impl TauMode {
    pub fn resolve(&self, cluster: &Cluster, cs: &CountingSimilarity<'_>, seed: u64) -> Result<f64> {
        match self {
            TauMode::Auto if cluster.len() <= EXACT_HOMOGENEITY_MAX => homogeneity(cluster, cs),
            TauMode::Auto => approx_homogeneity(cluster, cs, HOMOGENEITY_SAMPLE_FRACTION, seed),
            TauMode::Exact => homogeneity(cluster, cs),
            TauMode::Sampled { fraction } => approx_homogeneity(cluster, cs, *fraction, seed),
            TauMode::Fixed(t) if t.is_finite() => Ok(*t),
            TauMode::Fixed(t) => Err(Error::Config(format!("tau must be finite, got {t}"))),
        }
    }
}

impl std::str::FromStr for TauMode {
    type Err = Error;

    /// `auto`, `exact`, `sampled:<fraction>`, or a number.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(TauMode::Auto),
            "exact" => Ok(TauMode::Exact),
            _ => {
                if let Some(f) = s.strip_prefix("sampled:") {
                    let fraction = f
                        .parse()
                        .map_err(|_| Error::Config(format!("bad sample fraction {f:?}")))?;
                    return Ok(TauMode::Sampled { fraction });
                }
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(TauMode::Fixed)
                    .ok_or_else(|| Error::Config(format!("bad tau {s:?}")))
            }
        }
    }
}

impl std::fmt::Display for TauMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TauMode::Auto => write!(f, "auto"),
            TauMode::Exact => write!(f, "exact"),
            TauMode::Sampled { fraction } => write!(f, "sampled:{fraction}"),
            TauMode::Fixed(v) => write!(f, "{v}"),
        }
    }
}
