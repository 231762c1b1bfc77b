//! Nearest-prototype classification.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{FeatureVector, ItemId};
use crate::error::{Error, Result};
use crate::prototype::Prototype;
use crate::similarity::CountingSimilarity;

/// The union of all cluster prototypes, ready for queries.
#[derive(Clone, Debug)]
pub struct PrototypeSet {
    prototypes: Vec<Prototype>,
    /// every representative with the index of its prototype, ascending by id
    reps: Vec<(ItemId, usize)>,
}

impl PrototypeSet {
    /// Checks that labels are distinct, prototypes nonempty and
    /// representatives disjoint.
    pub fn new(prototypes: Vec<Prototype>) -> Result<Self> {
        let mut labels = HashSet::new();
        let mut reps = Vec::new();
        for (i, p) in prototypes.iter().enumerate() {
            if !labels.insert(p.label.as_str()) {
                return Err(Error::Domain(format!("duplicate prototype label {:?}", p.label)));
            }
            if p.is_empty() {
                return Err(Error::Domain(format!("prototype {:?} is empty", p.label)));
            }
            reps.extend(p.representatives.iter().map(|&r| (r, i)));
        }
        reps.sort_unstable();
        if let Some(w) = reps.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain(format!(
                "item {} represents more than one prototype",
                w[0].0
            )));
        }
        Ok(PrototypeSet { prototypes, reps })
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    /// Total number of representatives.
    pub fn rep_count(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Label of the prototype holding `rep`.
    pub fn label_of(&self, rep: ItemId) -> Option<&str> {
        self.reps
            .binary_search_by_key(&rep, |&(r, _)| r)
            .ok()
            .map(|i| self.prototypes[self.reps[i].1].label.as_str())
    }

    fn argmax(&self, mut sim: impl FnMut(ItemId) -> Result<f64>) -> Result<Classification> {
        let mut best: Option<(usize, f64)> = None;
        // ascending ids with a strict comparison: the lowest id wins ties
        for (i, &(r, _)) in self.reps.iter().enumerate() {
            let s = sim(r)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (i, best_sim) = best.ok_or_else(|| Error::Domain("empty prototype set".into()))?;
        let (best_rep, p) = self.reps[i];
        Ok(Classification {
            label: self.prototypes[p].label.clone(),
            best_rep,
            best_sim,
        })
    }
}

/// Outcome of one query: the winning label and the representative behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub label: String,
    pub best_rep: ItemId,
    pub best_sim: f64,
}

impl Classification {
    /// `query_id<TAB>label<TAB>best_rep<TAB>best_sim`
    pub fn to_line(&self, query_id: &str) -> String {
        format!("{query_id}\t{}\t{}\t{}", self.label, self.best_rep, self.best_sim)
    }
}

/// Classifies a query against every representative; representatives are
/// items of `cs`'s space.
pub fn classify(
    x: &FeatureVector,
    ps: &PrototypeSet,
    cs: &CountingSimilarity<'_>,
) -> Result<Classification> {
    ps.argmax(|r| cs.evaluate_query(x, r))
}

/// Classifies each query in order; queries run in parallel.
pub fn batch_classify(
    xs: &[FeatureVector],
    ps: &PrototypeSet,
    cs: &CountingSimilarity<'_>,
) -> Result<Vec<Classification>> {
    if ps.is_empty() {
        return Err(Error::Domain("empty prototype set".into()));
    }
    xs.par_iter().map(|x| classify(x, ps, cs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use crate::prototype::{Method, PrototypeParams};
    use crate::similarity::{SimilarityMatrix, SimilarityMeasure, SimilaritySpace};
    use std::sync::Arc;

    fn proto(label: &str, ids: &[u32]) -> Prototype {
        Prototype::new(
            label,
            ids.iter().copied().map(ItemId).collect(),
            1.0,
            PrototypeParams::bare(Method::Full),
        )
    }

    fn points(rows: &[[f64; 2]]) -> LabeledDataset {
        LabeledDataset::new(
            "p",
            None,
            rows.iter().map(|r| FeatureVector::Dense(r.to_vec())).collect(),
            vec!["x".into(); rows.len()],
        )
        .unwrap()
    }

    #[test]
    fn single_candidate_always_wins() {
        let ds = points(&[[1.0, 0.0]]);
        let m = SimilarityMeasure::Cosine;
        let space = SimilaritySpace::new(&m, &ds).unwrap();
        let cs = CountingSimilarity::new(&space);
        let ps = PrototypeSet::new(vec![proto("only", &[0])]).unwrap();
        let c = classify(&FeatureVector::Dense(vec![-1.0, 0.0]), &ps, &cs).unwrap();
        assert_eq!(c.label, "only");
        assert_eq!(c.best_sim, -1.0);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let mut rows = vec![[0.0, 1.0]; 13];
        rows[7] = [1.0, 1.0];
        rows[12] = [1.0, 1.0];
        let ds = points(&rows);
        let m = SimilarityMeasure::Cosine;
        let space = SimilaritySpace::new(&m, &ds).unwrap();
        let cs = CountingSimilarity::new(&space);
        let q = FeatureVector::Dense(vec![1.0, 1.0]);
        for order in [[("b", 12), ("a", 7)], [("a", 7), ("b", 12)]] {
            let ps = PrototypeSet::new(order.iter().map(|(l, i)| proto(l, &[*i])).collect()).unwrap();
            let c = classify(&q, &ps, &cs).unwrap();
            assert_eq!((c.label.as_str(), c.best_rep), ("a", ItemId(7)));
        }
    }

    #[test]
    fn batch_counts_queries_times_reps() {
        let rows: Vec<[f64; 2]> = (0..20).map(|i| [1.0, i as f64]).collect();
        let ds = points(&rows);
        let m = SimilarityMeasure::Cosine;
        let space = SimilaritySpace::new(&m, &ds).unwrap();
        let cs = CountingSimilarity::new(&space);
        let ps = PrototypeSet::new(vec![proto("a", &[0, 3, 5]), proto("b", &[10, 11, 12, 19])]).unwrap();
        let xs: Vec<FeatureVector> = (0..10).map(|i| FeatureVector::Dense(vec![2.0, i as f64])).collect();
        let out = batch_classify(&xs, &ps, &cs).unwrap();
        assert_eq!(out.len(), 10);
        assert_eq!(cs.count(), 70);
        assert!(batch_classify(&[], &ps, &cs).unwrap().is_empty());
    }

    #[test]
    fn rejects_invalid_sets() {
        assert!(PrototypeSet::new(vec![proto("a", &[1]), proto("a", &[2])]).is_err());
        assert!(PrototypeSet::new(vec![proto("a", &[1]), proto("b", &[1])]).is_err());
        assert!(PrototypeSet::new(vec![proto("a", &[])]).is_err());
        let empty = PrototypeSet::new(vec![]).unwrap();
        let ds = points(&[[1.0, 0.0]]);
        let m = SimilarityMeasure::Cosine;
        let space = SimilaritySpace::new(&m, &ds).unwrap();
        let cs = CountingSimilarity::new(&space);
        let q = FeatureVector::Dense(vec![1.0, 0.0]);
        assert!(matches!(classify(&q, &empty, &cs), Err(Error::Domain(_))));
        assert!(matches!(batch_classify(&[], &empty, &cs), Err(Error::Domain(_))));
    }

    #[test]
    fn monotone_transform_keeps_decisions() {
        // a matrix and its cube (strictly increasing) must agree
        let n = 8;
        let vals: Vec<f64> = (0..n * n)
            .map(|i| {
                let (a, b) = (i / n, i % n);
                if a == b { 1.0 } else { ((a * 7 + b * 7) % 11) as f64 / 11.0 - 0.3 }
            })
            .collect();
        let cubed: Vec<f64> = vals.iter().map(|v| v * v * v).collect();
        let labels: Vec<String> = (0..n).map(|i| format!("c{}", i % 3)).collect();
        let items: Vec<FeatureVector> = (0..n).map(FeatureVector::Opaque).collect();
        let ds = LabeledDataset::new("m", None, items.clone(), labels).unwrap();
        let ps = PrototypeSet::new(vec![proto("c0", &[0, 3]), proto("c1", &[1]), proto("c2", &[5])]).unwrap();
        let run = |v: Vec<f64>| {
            let m = SimilarityMeasure::Matrix(Arc::new(SimilarityMatrix::new(n, v).unwrap()));
            let space = SimilaritySpace::new(&m, &ds).unwrap();
            let cs = CountingSimilarity::new(&space);
            batch_classify(&items, &ps, &cs)
                .unwrap()
                .into_iter()
                .map(|c| (c.label, c.best_rep))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(vals), run(cubed));
    }

    #[test]
    fn representative_classifies_to_itself() {
        let ds = points(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.2], [0.1, 1.0]]);
        let m = SimilarityMeasure::Cosine;
        let space = SimilaritySpace::new(&m, &ds).unwrap();
        let cs = CountingSimilarity::new(&space);
        let ps = PrototypeSet::new(vec![proto("a", &[0, 2]), proto("b", &[1, 3])]).unwrap();
        for (id, label) in [(0, "a"), (1, "b"), (2, "a"), (3, "b")] {
            let c = classify(ds.item(ItemId(id)), &ps, &cs).unwrap();
            assert_eq!(c.label, label);
            assert_eq!(c.best_rep, ItemId(id));
        }
        assert_eq!(ps.label_of(ItemId(3)), Some("b"));
        assert_eq!(ps.label_of(ItemId(9)), None);
    }
}
