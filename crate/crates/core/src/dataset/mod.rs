//! Samples, labels, and the clusters induced by labels.
//!
//! Every dataset fixes a canonical item order at ingestion time. [`ItemId`]s
//! are positions in that order, and every "lowest index wins" tie rule in the
//! crate resolves against it.

mod io;
mod split;
pub mod synthetic;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_dense_csv, load_dense_csv_from_reader, load_similarity_matrix,
    load_similarity_matrix_from_reader, load_sparse_records, load_sparse_records_from_reader,
    write_dense_csv, write_similarity_matrix, write_sparse_records, LabelColumn,
};
pub use split::{split_positions, split_train_test};

/// Position of a sample in its dataset's canonical order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn new(index: usize) -> Self {
        ItemId(u32::try_from(index).expect("item index exceeds u32 range"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sparse real vector with strictly increasing dimension indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Domain(format!(
                "sparse vector has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("indices not sorted".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(Error::Domain(format!(
                "sparse values must be finite and nonzero, got {v}"
            )));
        }
        Ok(SparseVector { indices, values })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Feature payload of one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse(SparseVector),
    /// Row/column of a precomputed similarity matrix. Carries no coordinates.
    Opaque(usize),
}

impl FeatureVector {
    pub fn kind(&self) -> &'static str {
        match self {
            FeatureVector::Dense(_) => "dense",
            FeatureVector::Sparse(_) => "sparse",
            FeatureVector::Opaque(_) => "opaque",
        }
    }

    pub fn as_dense(&self) -> Result<&[f64]> {
        match self {
            FeatureVector::Dense(v) => Ok(v),
            other => Err(Error::Type(format!(
                "expected dense coordinates, got {} payload",
                other.kind()
            ))),
        }
    }
}

/// A set of samples with one cluster label each, in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    name: String,
    ids: Vec<String>,
    items: Vec<FeatureVector>,
    labels: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset, checking lengths and payload consistency.
    ///
    /// `ids` are external identifiers (used in output files); pass `None` to
    /// number items by position.
    pub fn new(
        name: impl Into<String>,
        ids: Option<Vec<String>>,
        items: Vec<FeatureVector>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if items.len() != labels.len() {
            return Err(Error::Domain(format!(
                "{} items but {} labels",
                items.len(),
                labels.len()
            )));
        }
        let ids = match ids {
            Some(ids) if ids.len() != items.len() => {
                return Err(Error::Domain(format!(
                    "{} items but {} ids",
                    items.len(),
                    ids.len()
                )))
            }
            Some(ids) => ids,
            None => (0..items.len()).map(|i| i.to_string()).collect(),
        };
        if let Some(first) = items.first() {
            let dim = match first {
                FeatureVector::Dense(v) => Some(v.len()),
                _ => None,
            };
            for (i, item) in items.iter().enumerate() {
                if std::mem::discriminant(item) != std::mem::discriminant(first) {
                    return Err(Error::Type(format!(
                        "item {i} is {} but item 0 is {}",
                        item.kind(),
                        first.kind()
                    )));
                }
                if let (FeatureVector::Dense(v), Some(d)) = (item, dim) {
                    if v.len() != d {
                        return Err(Error::Domain(format!(
                            "item {i} has dimension {} but item 0 has {d}",
                            v.len()
                        )));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Domain(format!("item {i} has a non-finite value")));
                    }
                }
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            ids,
            items,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[FeatureVector] {
        &self.items
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn item(&self, id: ItemId) -> &FeatureVector {
        &self.items[id.index()]
    }

    pub fn label(&self, id: ItemId) -> &str {
        &self.labels[id.index()]
    }

    pub fn external_id(&self, id: ItemId) -> &str {
        &self.ids[id.index()]
    }

    /// Dimension shared by dense items, if the dataset is dense.
    pub fn dim(&self) -> Option<usize> {
        match self.items.first() {
            Some(FeatureVector::Dense(v)) => Some(v.len()),
            _ => None,
        }
    }

    /// Distinct labels in order of first appearance.
    pub fn label_set(&self) -> Vec<String> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for l in &self.labels {
            if !seen.contains_key(l.as_str()) {
                seen.insert(l.as_str(), ());
                out.push(l.clone());
            }
        }
        out
    }

    /// Clusters induced by the labels, ordered by first appearance of each label.
    pub fn clusters(&self) -> Vec<Cluster> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut clusters: Vec<Cluster> = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            let slot = *index.entry(l.as_str()).or_insert_with(|| {
                clusters.push(Cluster {
                    label: l.clone(),
                    members: Vec::new(),
                });
                clusters.len() - 1
            });
            clusters[slot].members.push(ItemId::new(i));
        }
        clusters
    }

    /// New dataset holding the given items in the given order.
    pub fn subset(&self, name: impl Into<String>, ids: &[ItemId]) -> LabeledDataset {
        LabeledDataset {
            name: name.into(),
            ids: ids.iter().map(|i| self.ids[i.index()].clone()).collect(),
            items: ids.iter().map(|i| self.items[i.index()].clone()).collect(),
            labels: ids.iter().map(|i| self.labels[i.index()].clone()).collect(),
        }
    }
}

/// Members of one label, ascending by [`ItemId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    label: String,
    members: Vec<ItemId>,
}

impl Cluster {
    pub fn new(label: impl Into<String>, members: Vec<ItemId>) -> Result<Self> {
        let label = label.into();
        if members.is_empty() {
            return Err(Error::Domain(format!("cluster {label:?} is empty")));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "cluster {label:?} members must be strictly ascending"
            )));
        }
        Ok(Cluster { label, members })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn members(&self) -> &[ItemId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position of `id` within the member list.
    pub fn position(&self, id: ItemId) -> Option<usize> {
        self.members.binary_search(&id).ok()
    }
}
