//! Experiment harness: build prototypes per training cluster, classify the
//! held-out items, and report precision, recall and similarity cost.
//!
//! Similarity calls are counted in three separate phases:
//! graph construction (`build`), threshold estimation (`threshold`: CRS `tau`
//! or the δ of δ-medoids) and classification (`classify`).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{delta_medoids, full_cluster, random_fraction, DeltaMedoidsParams};
use crate::select::{select_representatives_with, singleton, CrsParams};
use crate::dataset::{split_positions, Cluster, ItemId, LabeledDataset};
use crate::error::{Error, Result};
use crate::npc::{classify, PrototypeSet};
use crate::prototype::{Method, Prototype};
use crate::reverse_graph::{approx_homogeneity, TauMode, HOMOGENEITY_SAMPLE_FRACTION};
use crate::similarity::{full_pairs, CountingSimilarity, SimilarityMeasure, SimilaritySpace};

/// A prototype selection method with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodConfig {
    Crs(CrsParams),
    DeltaMedoids(DeltaMedoidsParams),
    Random { fraction: f64, seed: u64 },
    Full,
}

impl MethodConfig {
    pub fn method(&self) -> Method {
        match self {
            MethodConfig::Crs(_) => Method::Crs,
            MethodConfig::DeltaMedoids(_) => Method::DeltaMedoids,
            MethodConfig::Random { .. } => Method::Random,
            MethodConfig::Full => Method::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodConfig::Crs(p) => p.validate(),
            MethodConfig::DeltaMedoids(p) => p.validate(),
            MethodConfig::Random { fraction, .. } if !(*fraction > 0.0 && *fraction <= 1.0) => Err(
                Error::Config(format!("fraction must lie in (0, 1], got {fraction}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Hold-out split settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

/// Prototype of one cluster plus the similarity calls spent on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterBuild {
    pub label: String,
    pub size: usize,
    pub representatives: usize,
    pub covered_fraction: f64,
    /// Resolved `tau` (CRS) or δ (δ-medoids).
    pub threshold: Option<f64>,
    pub build_calls: u64,
    pub threshold_calls: u64,
}

/// Prototypes for every cluster of a training set.
#[derive(Clone, Debug)]
pub struct BuildOutcome {
    pub prototypes: Vec<Prototype>,
    pub clusters: Vec<ClusterBuild>,
}

impl BuildOutcome {
    pub fn build_calls(&self) -> u64 {
        self.clusters.iter().map(|c| c.build_calls).sum()
    }

    pub fn threshold_calls(&self) -> u64 {
        self.clusters.iter().map(|c| c.threshold_calls).sum()
    }

    pub fn rep_count(&self) -> usize {
        self.prototypes.iter().map(Prototype::len).sum()
    }
}

/// Builds one prototype per cluster; clusters run in parallel, each with its
/// own counters.
pub fn build_prototypes(space: &SimilaritySpace<'_>, clusters: &[Cluster], method: &MethodConfig) -> Result<BuildOutcome> {
    method.validate()?;
    let built: Vec<(Prototype, ClusterBuild)> = clusters
        .par_iter()
        .map(|c| build_one(space, c, method))
        .collect::<Result<_>>()?;
    let (prototypes, clusters) = built.into_iter().unzip();
    Ok(BuildOutcome {
        prototypes,
        clusters,
    })
}

fn build_one(
    space: &SimilaritySpace<'_>,
    cluster: &Cluster,
    method: &MethodConfig,
) -> Result<(Prototype, ClusterBuild)> {
    let build_cs = CountingSimilarity::new(space);
    let tau_cs = CountingSimilarity::new(space);
    let (proto, threshold) = match method {
        MethodConfig::Crs(p) => match select_representatives_with(cluster, &build_cs, &tau_cs, p)? {
            Some(run) => {
                let tau = run.reverse.tau();
                (run.prototype, Some(tau))
            }
            None => (singleton(cluster, p), None),
        },
        MethodConfig::DeltaMedoids(p) => {
            let delta = match p.delta {
                Some(d) => Some(d),
                None if cluster.len() > 1 => Some(approx_homogeneity(
                    cluster,
                    &tau_cs,
                    HOMOGENEITY_SAMPLE_FRACTION,
                    p.seed,
                )?),
                None => None,
            };
            // a lone member needs no threshold; delta stays None
            let params = DeltaMedoidsParams {
                delta,
                ..p.clone()
            };
            let proto = delta_medoids(cluster, &build_cs, &params)?;
            (proto, delta)
        }
        MethodConfig::Random { fraction, seed } => (random_fraction(cluster, *fraction, *seed)?, None),
        MethodConfig::Full => (full_cluster(cluster), None),
    };
    let info = ClusterBuild {
        label: cluster.label().to_string(),
        size: cluster.len(),
        representatives: proto.len(),
        covered_fraction: proto.covered_fraction,
        threshold,
        build_calls: build_cs.count(),
        threshold_calls: tau_cs.count(),
    };
    Ok((proto, info))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    /// `None` when nothing was predicted as this class.
    pub precision: Option<f64>,
    /// `None` when the class has no test items.
    pub recall: Option<f64>,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub method: MethodConfig,
    pub split: SplitConfig,
    pub similarity: String,
    pub train_size: usize,
    pub test_size: usize,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub accuracy: f64,
    pub rep_count: usize,
    pub prototype_fraction: f64,
    pub build_calls: u64,
    pub threshold_calls: u64,
    pub classify_calls: u64,
    /// Graph construction calls over `sum_c n_c (n_c - 1) / 2`.
    pub s_ratio_build: f64,
    /// Threshold estimation calls over the same denominator.
    pub s_ratio_threshold: f64,
    /// Classification calls over `|test| * |train|`.
    pub s_ratio_classify: f64,
    /// Class labels indexing the confusion matrix.
    pub labels: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub clusters: Vec<ClusterBuild>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_secs: Option<f64>,
}

impl MetricsReport {
    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }

    /// Structured JSON document of the whole report.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Domain(format!("report encoding: {e}")))
    }
}

/// Everything produced by one evaluation run.
#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub prototypes: Vec<Prototype>,
    /// Predicted label per test item, in test order.
    pub predictions: Vec<String>,
    /// Positions in the input dataset of the training items; prototype ids
    /// index this list.
    pub train_ids: Vec<ItemId>,
    pub test_ids: Vec<ItemId>,
}

impl EvalOutcome {
    /// Prototypes with representative ids translated to input positions.
    pub fn source_prototypes(&self) -> Vec<Prototype> {
        self.prototypes
            .iter()
            .map(|p| Prototype {
                representatives: p.representatives.iter().map(|r| self.train_ids[r.index()]).collect(),
                ..p.clone()
            })
            .collect()
    }
}

/// Stratified split, prototype build, and classification of the test half.
pub fn run_eval(
    ds: &LabeledDataset,
    measure: &SimilarityMeasure,
    method: &MethodConfig,
    split: SplitConfig,
) -> Result<MetricsReport> {
    run_eval_detailed(ds, measure, method, split).map(|o| o.report)
}

pub fn run_eval_detailed(
    ds: &LabeledDataset,
    measure: &SimilarityMeasure,
    method: &MethodConfig,
    split: SplitConfig,
) -> Result<EvalOutcome> {
    method.validate()?;
    check_clusters(ds)?;
    let halves = split_positions(ds, split.test_fraction, split.seed)?;
    evaluate_split(ds, &halves, measure, method, split)
}

fn check_clusters(ds: &LabeledDataset) -> Result<()> {
    if ds.label_set().len() < 2 {
        return Err(Error::Domain(format!(
            "dataset {:?} needs at least 2 clusters",
            ds.name()
        )));
    }
    Ok(())
}

fn evaluate_split(
    ds: &LabeledDataset,
    (train_ids, test_ids): &(Vec<ItemId>, Vec<ItemId>),
    measure: &SimilarityMeasure,
    method: &MethodConfig,
    split: SplitConfig,
) -> Result<EvalOutcome> {
    let train = ds.subset(format!("{}-train", ds.name()), train_ids);
    let test = ds.subset(format!("{}-test", ds.name()), test_ids);
    let space = SimilaritySpace::new(measure, &train)?;
    let clusters = train.clusters();
    let built = build_prototypes(&space, &clusters, method)?;
    let ps = PrototypeSet::new(built.prototypes.clone())?;

    let classify_cs = CountingSimilarity::new(&space);
    let predictions: Vec<String> = test
        .items()
        .par_iter()
        .map(|x| classify(x, &ps, &classify_cs).map(|c| c.label))
        .collect::<Result<_>>()?;

    let labels = ds.label_set();
    let truth: Vec<&str> = test.labels().iter().map(String::as_str).collect();
    let pred: Vec<&str> = predictions.iter().map(String::as_str).collect();
    let (per_class, confusion) = class_metrics(&labels, &truth, &pred);
    let macro_of = |f: fn(&ClassMetrics) -> Option<f64>| {
        let vals: Vec<f64> = per_class.iter().filter_map(f).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let correct = truth.iter().zip(&pred).filter(|(t, p)| t == p).count();
    let pairs: u64 = clusters.iter().map(|c| full_pairs(c.len())).sum();
    let ratio = |calls: u64| if pairs == 0 { 0.0 } else { calls as f64 / pairs as f64 };
    let rep_count = built.rep_count();
    let report = MetricsReport {
        dataset: ds.name().to_string(),
        method: method.clone(),
        split,
        similarity: measure.name().to_string(),
        train_size: train.len(),
        test_size: test.len(),
        macro_precision: macro_of(|c| c.precision),
        macro_recall: macro_of(|c| c.recall),
        accuracy: correct as f64 / test.len() as f64,
        per_class,
        rep_count,
        prototype_fraction: rep_count as f64 / train.len() as f64,
        build_calls: built.build_calls(),
        threshold_calls: built.threshold_calls(),
        classify_calls: classify_cs.count(),
        s_ratio_build: ratio(built.build_calls()),
        s_ratio_threshold: ratio(built.threshold_calls()),
        s_ratio_classify: classify_cs.count() as f64 / (test.len() * train.len()) as f64,
        labels,
        confusion,
        clusters: built.clusters,
        wall_clock_secs: None,
    };
    Ok(EvalOutcome {
        report,
        prototypes: built.prototypes,
        predictions,
        train_ids: train_ids.clone(),
        test_ids: test_ids.clone(),
    })
}

/// Per-class precision/recall and the confusion matrix over `labels`.
pub fn class_metrics(labels: &[String], truth: &[&str], pred: &[&str]) -> (Vec<ClassMetrics>, Vec<Vec<u64>>) {
    let index = |l: &str| labels.iter().position(|x| x == l).expect("label outside label set");
    let m = labels.len();
    let mut confusion = vec![vec![0u64; m]; m];
    for (t, p) in truth.iter().zip(pred) {
        confusion[index(t)][index(p)] += 1;
    }
    let per_class = (0..m)
        .map(|c| {
            let tp = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            ClassMetrics {
                label: labels[c].clone(),
                precision: (predicted > 0).then(|| tp as f64 / predicted as f64),
                recall: (support > 0).then(|| tp as f64 / support as f64),
                support,
            }
        })
        .collect();
    (per_class, confusion)
}

/// Runs CRS for each k on one shared split; reports come back by ascending k.
pub fn sweep_k(
    ds: &LabeledDataset,
    measure: &SimilarityMeasure,
    ks: &[usize],
    params: &CrsParams,
    split: SplitConfig,
) -> Result<Vec<(usize, MetricsReport)>> {
    let ks = sorted_ks(ks)?;
    check_clusters(ds)?;
    let halves = split_positions(ds, split.test_fraction, split.seed)?;
    ks.into_iter()
        .map(|k| {
            let method = MethodConfig::Crs(CrsParams { k, ..params.clone() });
            method.validate()?;
            let out = evaluate_split(ds, &halves, measure, &method, split)?;
            Ok((k, out.report))
        })
        .collect()
}

fn sorted_ks(ks: &[usize]) -> Result<Vec<usize>> {
    if ks.is_empty() {
        return Err(Error::Config("no k values given".into()));
    }
    if ks.contains(&0) {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

/// One row of a single-cluster k sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSweepRow {
    pub k: usize,
    pub representatives: usize,
    pub prototype_fraction: f64,
    pub covered_fraction: f64,
    pub tau: Option<f64>,
    pub build_calls: u64,
    pub threshold_calls: u64,
    pub s_ratio_build: f64,
}

/// CRS on a single cluster for each k, with fresh counters per k.
pub fn sweep_cluster_k(
    space: &SimilaritySpace<'_>,
    cluster: &Cluster,
    ks: &[usize],
    params: &CrsParams,
) -> Result<Vec<ClusterSweepRow>> {
    sorted_ks(ks)?
        .into_iter()
        .map(|k| {
            let method = MethodConfig::Crs(CrsParams { k, ..params.clone() });
            let (proto, info) = build_one(space, cluster, &method)?;
            Ok(ClusterSweepRow {
                k,
                representatives: proto.len(),
                prototype_fraction: proto.len() as f64 / cluster.len() as f64,
                covered_fraction: proto.covered_fraction,
                tau: info.threshold,
                build_calls: info.build_calls,
                threshold_calls: info.threshold_calls,
                s_ratio_build: crate::similarity::s_ratio(info.build_calls, cluster.len()),
            })
        })
        .collect()
}

/// Size and homogeneity of one cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterMeta {
    pub label: String,
    pub size: usize,
    pub homogeneity: Option<f64>,
}

/// Size and homogeneity (exact for small clusters, sampled above) of every
/// cluster of `ds`.
pub fn cluster_meta(ds: &LabeledDataset, measure: &SimilarityMeasure, seed: u64) -> Result<Vec<ClusterMeta>> {
    let space = SimilaritySpace::new(measure, ds)?;
    ds.clusters()
        .par_iter()
        .map(|c| {
            let cs = CountingSimilarity::new(&space);
            let homogeneity = if c.len() > 1 {
                Some(TauMode::Auto.resolve(c, &cs, seed)?)
            } else {
                None
            };
            Ok(ClusterMeta {
                label: c.label().to_string(),
                size: c.len(),
                homogeneity,
            })
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Domain(format!("csv output: {e}"))
}

/// Per-cluster rows for each report: size, homogeneity, method, prototype
/// fraction, precision and recall.
pub fn per_cluster_table<W: Write>(reports: &[MetricsReport], meta: &[ClusterMeta], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "cluster",
        "size",
        "homogeneity",
        "method",
        "k",
        "prototype_fraction",
        "precision",
        "recall",
    ])
    .map_err(csv_err)?;
    for m in meta {
        for r in reports {
            let build = r.clusters.iter().find(|c| c.label == m.label);
            let class = r.class(&m.label);
            let k = match &r.method {
                MethodConfig::Crs(p) => p.k.to_string(),
                _ => String::new(),
            };
            w.write_record([
                m.label.clone(),
                m.size.to_string(),
                fmt_opt(m.homogeneity),
                r.method.method().to_string(),
                k,
                fmt_opt(build.map(|b| b.representatives as f64 / b.size as f64)),
                fmt_opt(class.and_then(|c| c.precision)),
                fmt_opt(class.and_then(|c| c.recall)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// `label,precision,recall,support`; undefined values are left empty.
pub fn per_class_csv<W: Write>(report: &MetricsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "precision", "recall", "support"]).map_err(csv_err)?;
    for c in &report.per_class {
        w.write_record([
            c.label.clone(),
            fmt_opt(c.precision),
            fmt_opt(c.recall),
            c.support.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Header holds predicted labels; each row starts with the true label.
pub fn confusion_csv<W: Write>(report: &MetricsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(report.labels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (label, row) in report.labels.iter().zip(&report.confusion) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
