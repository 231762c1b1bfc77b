//! Cluster representatives selection.
//!
//! A cluster's k-NN graph is reversed and pruned at `tau`, then a greedy
//! cover picks representatives with the largest uncovered reverse
//! neighbourhoods until an `epsilon` fraction of the cluster is covered.
//! A representative covers itself and its reverse neighbourhood `U_r`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Cluster, ItemId};
use crate::error::{Error, Result};
use crate::knn_graph::{exact_knn, nn_descent, KnnGraph, NnDescentParams};
use crate::prototype::{Prototype, PrototypeParams};
use crate::reverse_graph::{reverse_and_prune, ReverseGraph, TauMode};
use crate::similarity::CountingSimilarity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    NnDescent,
    Exact,
}

impl FromStr for GraphMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn-descent" => Ok(GraphMode::NnDescent),
            "exact" => Ok(GraphMode::Exact),
            other => Err(Error::Config(format!("unknown graph mode {other:?}"))),
        }
    }
}

/// Primary key of the greedy choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreRule {
    /// Most newly covered members; ties by larger summed edge weight to
    /// them, then lowest id.
    #[default]
    UncoveredCount,
    /// Largest summed edge weight to uncovered members; ties by newly
    /// covered count, then lowest id.
    WeightedSum,
}

impl FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" | "uncovered-count" => Ok(ScoreRule::UncoveredCount),
            "weighted" | "weighted-sum" => Ok(ScoreRule::WeightedSum),
            other => Err(Error::Config(format!("unknown score rule {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrsParams {
    pub k: usize,
    pub epsilon: f64,
    pub tau: TauMode,
    pub graph: GraphMode,
    pub score: ScoreRule,
    pub rho: f64,
    pub delta_nn: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for CrsParams {
    fn default() -> Self {
        let nn = NnDescentParams::default();
        CrsParams {
            k: nn.k,
            epsilon: 0.95,
            tau: TauMode::Auto,
            graph: GraphMode::NnDescent,
            score: ScoreRule::UncoveredCount,
            rho: nn.rho,
            delta_nn: nn.delta_nn,
            max_iters: nn.max_iters,
            seed: nn.seed,
        }
    }
}

impl CrsParams {
    pub fn with_k(k: usize) -> Self {
        CrsParams {
            k,
            ..Default::default()
        }
    }

    pub fn nn_params(&self) -> NnDescentParams {
        NnDescentParams {
            k: self.k,
            rho: self.rho,
            delta_nn: self.delta_nn,
            seed: self.seed,
            max_iters: self.max_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        validate_epsilon(self.epsilon)?;
        if let TauMode::Fixed(t) = self.tau {
            if !t.is_finite() {
                return Err(Error::Config(format!("tau must be finite, got {t}")));
            }
        }
        self.nn_params().validate()
    }
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon must lie in (0, 1], got {epsilon}")))
    }
}

/// The relaxed coverage test `covered / size >= epsilon`.
#[inline]
pub fn meets_coverage(covered: usize, size: usize, epsilon: f64) -> bool {
    covered as f64 / size as f64 >= epsilon
}

/// Fraction of the graph's nodes lying in `U_r ∪ {r}` for some representative.
pub fn coverage_fraction(rg: &ReverseGraph, representatives: &[ItemId]) -> f64 {
    let mut covered = vec![false; rg.len()];
    for &r in representatives {
        if let Some(p) = rg.position(r) {
            covered[p] = true;
            for nb in rg.reverse_neighbors(p) {
                covered[rg.position(nb.id).expect("edge inside graph")] = true;
            }
        }
    }
    covered.iter().filter(|c| **c).count() as f64 / rg.len() as f64
}

/// Result of a greedy cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub representatives: Vec<ItemId>,
    pub covered_fraction: f64,
}

/// Greedy cover of the reverse graph until `epsilon` of the nodes are covered.
pub fn greedy_cover(
    rg: &ReverseGraph,
    cluster_size: usize,
    epsilon: f64,
    rule: ScoreRule,
) -> Result<Cover> {
    validate_epsilon(epsilon)?;
    if rg.is_empty() || rg.len() != cluster_size {
        return Err(Error::Domain(format!(
            "reverse graph has {} nodes, cluster has {cluster_size}",
            rg.len()
        )));
    }
    let mut state = CoverState::new(rg);
    match rule {
        ScoreRule::UncoveredCount => state.run_lazy(epsilon),
        ScoreRule::WeightedSum => state.run_scan(epsilon),
    }
    Ok(state.finish())
}

struct CoverState<'g> {
    rg: &'g ReverseGraph,
    /// reverse lists as node positions
    rev: Vec<Vec<(usize, f64)>>,
    uncovered: Vec<bool>,
    is_rep: Vec<bool>,
    n_covered: usize,
    reps: Vec<ItemId>,
}

#[derive(Clone, Copy, Debug)]
struct Gain {
    count: usize,
    weight: f64,
}

impl<'g> CoverState<'g> {
    fn new(rg: &'g ReverseGraph) -> Self {
        let n = rg.len();
        let rev = (0..n)
            .map(|p| {
                rg.reverse_neighbors(p)
                    .iter()
                    .map(|nb| (rg.position(nb.id).expect("edge inside graph"), nb.weight))
                    .collect()
            })
            .collect();
        CoverState {
            rg,
            rev,
            uncovered: vec![true; n],
            is_rep: vec![false; n],
            n_covered: 0,
            reps: Vec::new(),
        }
    }

    fn done(&self, epsilon: f64) -> bool {
        meets_coverage(self.n_covered, self.rg.len(), epsilon)
    }

    /// What selecting `u` would newly cover.
    fn gain(&self, u: usize) -> Gain {
        let mut count = usize::from(self.uncovered[u]);
        let mut weight = 0.0;
        for &(c, w) in &self.rev[u] {
            if self.uncovered[c] {
                count += 1;
                weight += w;
            }
        }
        Gain { count, weight }
    }

    fn select(&mut self, u: usize) {
        self.is_rep[u] = true;
        self.reps.push(self.rg.nodes()[u]);
        self.cover(u);
        for i in 0..self.rev[u].len() {
            self.cover(self.rev[u][i].0);
        }
    }

    fn cover(&mut self, p: usize) {
        if self.uncovered[p] {
            self.uncovered[p] = false;
            self.n_covered += 1;
        }
    }

    /// Self-representative fallback: lowest uncovered ids until done.
    fn fill_orphans(&mut self, epsilon: f64) {
        let mut p = 0;
        while !self.done(epsilon) {
            while !self.uncovered[p] {
                p += 1;
            }
            self.select(p);
        }
    }

    /// Lazy greedy on a max-heap. Gains only shrink as coverage grows, so a
    /// popped entry whose recomputed gain is unchanged is the true maximum.
    fn run_lazy(&mut self, epsilon: f64) {
        let mut heap: BinaryHeap<HeapEntry> = (0..self.rg.len())
            .map(|u| HeapEntry::new(u, self.rg.nodes()[u], self.gain(u)))
            .collect();
        while !self.done(epsilon) {
            let Some(top) = heap.pop() else {
                self.fill_orphans(epsilon);
                return;
            };
            let fresh = self.gain(top.pos);
            if fresh.count != top.count || fresh.weight.to_bits() != top.weight.to_bits() {
                heap.push(HeapEntry::new(top.pos, top.id, fresh));
                continue;
            }
            if fresh.count == 0 {
                self.fill_orphans(epsilon);
                return;
            }
            self.select(top.pos);
        }
    }

    /// Full scan per step; used for the weighted rule, whose gain is not
    /// monotone once weights can be negative.
    fn run_scan(&mut self, epsilon: f64) {
        while !self.done(epsilon) {
            let mut best: Option<(usize, Gain)> = None;
            for u in 0..self.rg.len() {
                if self.is_rep[u] {
                    continue;
                }
                let g = self.gain(u);
                if g.count == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, b)) => match g.weight.total_cmp(&b.weight) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        // positions ascend with ids, so the earlier u wins ties
                        Ordering::Equal => g.count > b.count,
                    },
                };
                if better {
                    best = Some((u, g));
                }
            }
            match best {
                Some((u, _)) => self.select(u),
                None => {
                    self.fill_orphans(epsilon);
                    return;
                }
            }
        }
    }

    fn finish(self) -> Cover {
        Cover {
            covered_fraction: self.n_covered as f64 / self.rg.len() as f64,
            representatives: self.reps,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    pos: usize,
    id: ItemId,
    count: usize,
    weight: f64,
}

impl HeapEntry {
    fn new(pos: usize, id: ItemId, g: Gain) -> Self {
        HeapEntry {
            pos,
            id,
            count: g.count,
            weight: g.weight,
        }
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then(self.weight.total_cmp(&other.weight))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

/// Intermediate products of one CRS run, kept for inspection and testing.
#[derive(Clone, Debug)]
pub struct CrsRun {
    pub prototype: Prototype,
    pub graph: KnnGraph,
    pub reverse: ReverseGraph,
}

/// Builds a cluster prototype; every similarity evaluation goes through `cs`.
pub fn select_representatives(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &CrsParams,
) -> Result<Prototype> {
    select_representatives_with(cluster, cs, cs, params).map(|run| match run {
        Some(run) => run.prototype,
        None => singleton(cluster, params),
    })
}

/// Like [`select_representatives`], but charges graph construction to
/// `graph_cs` and the pruning threshold to `tau_cs`. Returns `None` for a
/// single-member cluster, whose prototype needs no graph.
pub fn select_representatives_with(
    cluster: &Cluster,
    graph_cs: &CountingSimilarity<'_>,
    tau_cs: &CountingSimilarity<'_>,
    params: &CrsParams,
) -> Result<Option<CrsRun>> {
    params.validate()?;
    if cluster.len() == 1 {
        return Ok(None);
    }
    let graph = match params.graph {
        GraphMode::NnDescent => nn_descent(cluster, graph_cs, &params.nn_params())?,
        GraphMode::Exact => exact_knn(cluster, graph_cs, params.k)?,
    };
    let tau = params.tau.resolve(cluster, tau_cs, params.seed)?;
    let reverse = reverse_and_prune(&graph, tau);
    let cover = greedy_cover(&reverse, cluster.len(), params.epsilon, params.score)?;
    let prototype = Prototype::new(
        cluster.label(),
        cover.representatives,
        cover.covered_fraction,
        PrototypeParams::crs(params, tau),
    );
    Ok(Some(CrsRun {
        prototype,
        graph,
        reverse,
    }))
}

/// Prototype of a single-member cluster.
pub fn singleton(cluster: &Cluster, params: &CrsParams) -> Prototype {
    Prototype::new(
        cluster.label(),
        cluster.members().to_vec(),
        1.0,
        PrototypeParams::crs(params, f64::NAN),
    )
}
