//! Reference prototype selectors: δ-medoids, a random fraction, and the
//! whole cluster.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cluster, ItemId};
use crate::error::{Error, Result};
use crate::prototype::{Method, Prototype, PrototypeParams};
use crate::reverse_graph::{approx_homogeneity, HOMOGENEITY_SAMPLE_FRACTION};
use crate::similarity::CountingSimilarity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaMedoidsParams {
    /// Coverage threshold; `None` uses the cluster's sampled homogeneity.
    pub delta: Option<f64>,
    pub max_refine_iters: usize,
    /// Seed of the homogeneity sample.
    pub seed: u64,
}

impl Default for DeltaMedoidsParams {
    fn default() -> Self {
        DeltaMedoidsParams {
            delta: None,
            max_refine_iters: 20,
            seed: 42,
        }
    }
}

impl DeltaMedoidsParams {
    pub fn with_delta(delta: f64) -> Self {
        DeltaMedoidsParams {
            delta: Some(delta),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return Err(Error::Config(format!("delta must be finite, got {d}")));
            }
        }
        if self.max_refine_iters == 0 {
            return Err(Error::Config("max_refine_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Full record of a δ-medoids run.
#[derive(Clone, Debug)]
pub struct DeltaMedoidsRun {
    pub prototype: Prototype,
    pub delta: f64,
    /// Representative of each member, in member order; representatives map
    /// to themselves.
    pub assignment: Vec<ItemId>,
    /// Objective after the initial pass and after each accepted refinement.
    pub objectives: Vec<f64>,
    /// Refinement rounds attempted.
    pub rounds: usize,
}

pub fn delta_medoids(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &DeltaMedoidsParams,
) -> Result<Prototype> {
    delta_medoids_traced(cluster, cs, params).map(|run| run.prototype)
}

/// δ-medoids with its assignment and objective history.
///
/// Members are scanned in id order and joined to their most similar
/// representative if that similarity reaches δ, otherwise promoted. Each
/// refinement round replaces every representative by the medoid of its
/// group and reassigns; a round is kept only if the objective (total
/// similarity of members to their representative) does not drop.
pub fn delta_medoids_traced(
    cluster: &Cluster,
    cs: &CountingSimilarity<'_>,
    params: &DeltaMedoidsParams,
) -> Result<DeltaMedoidsRun> {
    params.validate()?;
    let members = cluster.members();
    let delta = match (params.delta, members.len()) {
        (Some(d), _) => d,
        (None, 1) => f64::NAN,
        (None, _) => approx_homogeneity(cluster, cs, HOMOGENEITY_SAMPLE_FRACTION, params.seed)?,
    };

    let mut cur = assign(members, Vec::new(), delta, cs)?;
    let mut objectives = vec![cur.objective];
    let mut rounds = 0;
    while rounds < params.max_refine_iters {
        rounds += 1;
        let medoids = cur.medoids(members, cs)?;
        if medoids == cur.reps {
            break;
        }
        let next = assign(members, medoids, delta, cs)?;
        if next.objective < cur.objective {
            break;
        }
        objectives.push(next.objective);
        let stable = next.reps == cur.reps;
        cur = next;
        if stable {
            break;
        }
    }

    let prototype = Prototype::new(
        cluster.label(),
        cur.reps.clone(),
        1.0,
        PrototypeParams {
            tau: (!delta.is_nan()).then_some(delta),
            seed: Some(params.seed),
            ..PrototypeParams::bare(Method::DeltaMedoids)
        },
    );
    Ok(DeltaMedoidsRun {
        prototype,
        delta,
        assignment: cur.owner,
        objectives,
        rounds,
    })
}

struct Assignment {
    /// ascending
    reps: Vec<ItemId>,
    /// per member position
    owner: Vec<ItemId>,
    objective: f64,
}

/// Assigns members in id order, promoting those with no representative
/// within δ. `reps` seeds the representative set.
fn assign(
    members: &[ItemId],
    mut reps: Vec<ItemId>,
    delta: f64,
    cs: &CountingSimilarity<'_>,
) -> Result<Assignment> {
    reps.sort_unstable();
    let mut owner = vec![ItemId(u32::MAX); members.len()];
    let mut sims = vec![0.0; members.len()];
    for (p, &x) in members.iter().enumerate() {
        if reps.binary_search(&x).is_ok() {
            owner[p] = x;
            continue;
        }
        let mut best: Option<(ItemId, f64)> = None;
        for &r in &reps {
            let s = cs.evaluate(x, r)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((r, s));
            }
        }
        match best {
            Some((r, s)) if s >= delta => {
                owner[p] = r;
                sims[p] = s;
            }
            _ => {
                let at = reps.binary_search(&x).unwrap_err();
                reps.insert(at, x);
                owner[p] = x;
            }
        }
    }
    let objective = sims.iter().sum();
    Ok(Assignment {
        reps,
        owner,
        objective,
    })
}

impl Assignment {
    /// Medoid of every group, ascending.
    fn medoids(&self, members: &[ItemId], cs: &CountingSimilarity<'_>) -> Result<Vec<ItemId>> {
        let mut out = Vec::with_capacity(self.reps.len());
        for &r in &self.reps {
            let group: Vec<ItemId> = members
                .iter()
                .zip(&self.owner)
                .filter(|(_, &o)| o == r)
                .map(|(&m, _)| m)
                .collect();
            out.push(medoid(&group, cs)?);
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Member with the largest total similarity to the rest of `group` (ascending);
/// the lowest id wins ties.
fn medoid(group: &[ItemId], cs: &CountingSimilarity<'_>) -> Result<ItemId> {
    let mut best = (group[0], f64::NEG_INFINITY);
    for &y in group {
        let mut total = 0.0;
        for &z in group {
            if z != y {
                total += cs.evaluate(y, z)?;
            }
        }
        if total > best.1 {
            best = (y, total);
        }
    }
    Ok(best.0)
}

/// A seeded uniform sample of `max(1, round(fraction * n))` members, ascending.
pub fn random_fraction(cluster: &Cluster, fraction: f64, seed: u64) -> Result<Prototype> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let n = cluster.len();
    let m = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps: Vec<ItemId> = index::sample(&mut rng, n, m)
        .into_iter()
        .map(|p| cluster.members()[p])
        .collect();
    reps.sort_unstable();
    Ok(Prototype::new(
        cluster.label(),
        reps,
        m as f64 / n as f64,
        PrototypeParams {
            fraction: Some(fraction),
            seed: Some(seed),
            ..PrototypeParams::bare(Method::Random)
        },
    ))
}

/// Every member of the cluster.
pub fn full_cluster(cluster: &Cluster) -> Prototype {
    Prototype::new(
        cluster.label(),
        cluster.members().to_vec(),
        1.0,
        PrototypeParams::bare(Method::Full),
    )
}
