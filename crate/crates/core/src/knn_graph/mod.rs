//! Per-cluster k-NN graphs: exact brute force and NN-Descent.

mod nn_descent;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;

use crate::dataset::{Cluster, ItemId};
use crate::error::{Error, Result};
use crate::similarity::CountingSimilarity;

pub use nn_descent::{nn_descent, nn_descent_traced, NnDescentParams, NnDescentTrace};

/// A weighted edge endpoint: `weight` is the similarity to the owning node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: ItemId,
    pub weight: f64,
}

/// Best-first order: higher similarity, then lower id.
#[inline]
pub(crate) fn rank(a_w: f64, a_id: ItemId, b_w: f64, b_id: ItemId) -> Ordering {
    b_w.total_cmp(&a_w).then(a_id.cmp(&b_id))
}

/// Directed k-NN graph over the members of one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnGraph {
    k: usize,
    nodes: Vec<ItemId>,
    lists: Vec<Vec<Neighbor>>,
}

impl KnnGraph {
    pub(crate) fn from_parts(k: usize, nodes: Vec<ItemId>, lists: Vec<Vec<Neighbor>>) -> Self {
        debug_assert_eq!(nodes.len(), lists.len());
        KnnGraph { k, nodes, lists }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Node ids, ascending.
    pub fn nodes(&self) -> &[ItemId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Neighbour list of the node at `pos`, best first.
    pub fn neighbors(&self, pos: usize) -> &[Neighbor] {
        &self.lists[pos]
    }

    pub fn neighbors_of(&self, id: ItemId) -> Option<&[Neighbor]> {
        self.nodes
            .binary_search(&id)
            .ok()
            .map(|p| self.lists[p].as_slice())
    }

    pub fn lists(&self) -> &[Vec<Neighbor>] {
        &self.lists
    }

    pub fn edge_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    /// One line per node: `id: nbr:weight nbr:weight ...`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (node, list) in self.nodes.iter().zip(&self.lists) {
            write!(out, "{node}:")?;
            for nb in list {
                write!(out, " {}:{}", nb.id, nb.weight)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn dump(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }
}

/// Bounded neighbour list kept sorted best-first, with NN-Descent "new" flags.
#[derive(Clone, Debug)]
pub(crate) struct BoundedList {
    cap: usize,
    entries: Vec<(ItemId, f64, bool)>,
}

impl BoundedList {
    pub(crate) fn new(cap: usize) -> Self {
        BoundedList {
            cap,
            entries: Vec::with_capacity(cap + 1),
        }
    }

    /// Inserts unless `id` is already present or ranks below a full list.
    pub(crate) fn insert(&mut self, id: ItemId, weight: f64, is_new: bool) -> bool {
        if self.cap == 0 || self.entries.iter().any(|e| e.0 == id) {
            return false;
        }
        let pos = self
            .entries
            .partition_point(|e| rank(e.1, e.0, weight, id) == Ordering::Less);
        if pos >= self.cap {
            return false;
        }
        self.entries.insert(pos, (id, weight, is_new));
        self.entries.truncate(self.cap);
        true
    }

    #[cfg(test)]
    pub(crate) fn entries(&self) -> &[(ItemId, f64, bool)] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [(ItemId, f64, bool)] {
        &mut self.entries
    }

    pub(crate) fn min_weight(&self) -> f64 {
        self.entries.last().map_or(f64::NEG_INFINITY, |e| e.1)
    }

    pub(crate) fn to_neighbors(&self) -> Vec<Neighbor> {
        self.entries
            .iter()
            .map(|&(id, weight, _)| Neighbor { id, weight })
            .collect()
    }
}

/// Brute-force k-NN graph: evaluates every unordered pair exactly once.
pub fn exact_knn(cluster: &Cluster, cs: &CountingSimilarity<'_>, k: usize) -> Result<KnnGraph> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let members = cluster.members();
    let n = members.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "k-NN graph of cluster {:?} needs at least 2 members",
            cluster.label()
        )));
    }
    let cap = k.min(n - 1);
    let mut lists = vec![BoundedList::new(cap); n];
    // Rows are evaluated in blocks so the pair buffer stays bounded.
    let block = (1 << 18) / n + 1;
    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        let mut pairs = Vec::new();
        let mut pos = Vec::new();
        for p in start..end {
            for q in (p + 1)..n {
                pairs.push((members[p], members[q]));
                pos.push((p, q));
            }
        }
        let sims = cs.evaluate_pairs(&pairs)?;
        for (&(p, q), &w) in pos.iter().zip(&sims) {
            lists[p].insert(members[q], w, false);
            lists[q].insert(members[p], w, false);
        }
        start = end;
    }
    Ok(KnnGraph::from_parts(
        k,
        members.to_vec(),
        lists.iter().map(BoundedList::to_neighbors).collect(),
    ))
}

/// Mean over nodes of the fraction of exact neighbours the approximation found.
pub fn graph_recall(approx: &KnnGraph, exact: &KnnGraph) -> Result<f64> {
    if approx.nodes != exact.nodes {
        return Err(Error::Domain("graphs cover different node sets".into()));
    }
    if approx.k != exact.k {
        return Err(Error::Domain(format!(
            "graphs built with different k ({} vs {})",
            approx.k, exact.k
        )));
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for (a, e) in approx.lists.iter().zip(&exact.lists) {
        if e.is_empty() {
            continue;
        }
        let truth: HashSet<ItemId> = e.iter().map(|nb| nb.id).collect();
        let hits = a.iter().filter(|nb| truth.contains(&nb.id)).count();
        total += hits as f64 / e.len() as f64;
        counted += 1;
    }
    Ok(if counted == 0 {
        1.0
    } else {
        total / counted as f64
    })
}
