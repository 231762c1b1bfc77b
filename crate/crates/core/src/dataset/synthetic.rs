//! Seeded toy datasets: gaussian blobs, two spirals, a uniform square, and
//! block-structured similarity matrices.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FeatureVector, LabeledDataset};
use crate::error::{Error, Result};
use crate::similarity::{SimilarityMatrix, SimilarityMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    GaussianBlobs,
    TwoSpirals,
    Uniform,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-blobs" | "blobs" => Ok(SyntheticKind::GaussianBlobs),
            "two-spirals" | "spirals" => Ok(SyntheticKind::TwoSpirals),
            "uniform" => Ok(SyntheticKind::Uniform),
            other => Err(Error::Config(format!("unknown synthetic kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticSpec {
    /// `per_blob` points around each center with isotropic std-dev `sigma`.
    GaussianBlobs {
        centers: Vec<[f64; 2]>,
        per_blob: usize,
        sigma: f64,
    },
    /// Two interleaved arms, `n` points in total, denser towards the middle.
    TwoSpirals { n: usize, noise: f64, turns: f64 },
    /// One cluster of `n` points uniform on `[0, side]^2`.
    Uniform { n: usize, side: f64 },
}

impl SyntheticSpec {
    pub fn kind(&self) -> SyntheticKind {
        match self {
            SyntheticSpec::GaussianBlobs { .. } => SyntheticKind::GaussianBlobs,
            SyntheticSpec::TwoSpirals { .. } => SyntheticKind::TwoSpirals,
            SyntheticSpec::Uniform { .. } => SyntheticKind::Uniform,
        }
    }
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("invalid noise {sigma}: {e}")))
}

pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    let mut labels = Vec::new();
    match spec {
        SyntheticSpec::GaussianBlobs {
            centers,
            per_blob,
            sigma,
        } => {
            if centers.is_empty() || *per_blob == 0 {
                return Err(Error::Config("blobs need at least one center and point".into()));
            }
            if !(*sigma >= 0.0) {
                return Err(Error::Config(format!("sigma must be >= 0, got {sigma}")));
            }
            let noise = normal(*sigma)?;
            for (b, c) in centers.iter().enumerate() {
                for _ in 0..*per_blob {
                    let x = c[0] + noise.sample(&mut rng);
                    let y = c[1] + noise.sample(&mut rng);
                    items.push(FeatureVector::Dense(vec![x, y]));
                    labels.push(format!("blob-{b}"));
                }
            }
        }
        SyntheticSpec::TwoSpirals { n, noise, turns } => {
            if *n < 2 {
                return Err(Error::Config("two spirals need at least 2 points".into()));
            }
            if !(*noise >= 0.0) || !(*turns > 0.0) {
                return Err(Error::Config("spiral noise must be >= 0 and turns > 0".into()));
            }
            let jitter = normal(*noise)?;
            let t_max = turns * 2.0 * PI;
            let arm_sizes = [n.div_ceil(2), n / 2];
            for (arm, &m) in arm_sizes.iter().enumerate() {
                let phase = arm as f64 * PI;
                for _ in 0..m {
                    // uniform in angle: points crowd near the centre
                    let t = 0.5 + rng.random::<f64>() * t_max;
                    let x = t * (t + phase).cos() + jitter.sample(&mut rng);
                    let y = t * (t + phase).sin() + jitter.sample(&mut rng);
                    items.push(FeatureVector::Dense(vec![x, y]));
                    labels.push(format!("spiral-{arm}"));
                }
            }
        }
        SyntheticSpec::Uniform { n, side } => {
            if *n == 0 || !(*side > 0.0) {
                return Err(Error::Config("uniform needs n >= 1 and side > 0".into()));
            }
            for _ in 0..*n {
                let x = rng.random::<f64>() * side;
                let y = rng.random::<f64>() * side;
                items.push(FeatureVector::Dense(vec![x, y]));
                labels.push("uniform".into());
            }
        }
    }
    let name = match spec.kind() {
        SyntheticKind::GaussianBlobs => "gaussian-blobs",
        SyntheticKind::TwoSpirals => "two-spirals",
        SyntheticKind::Uniform => "uniform",
    };
    LabeledDataset::new(name, None, items, labels)
}

/// Block-structured similarity matrix: cluster `c` has `sizes[c]` members
/// whose within-cluster pairwise mean is exactly `homogeneity[c]`.
///
/// Within-cluster entries scatter uniformly around the target by at most
/// `spread` (shrunk so entries stay in `[0, 1]`); cross-cluster entries are
/// drawn from `[0, 0.05)`. The diagonal is 1. Cluster labels are `A`, `B`, ...
pub fn network_style_matrix(
    sizes: &[usize],
    homogeneity: &[f64],
    spread: f64,
    seed: u64,
) -> Result<(LabeledDataset, SimilarityMeasure)> {
    if sizes.len() != homogeneity.len() || sizes.is_empty() {
        return Err(Error::Config(
            "need one homogeneity target per cluster size".into(),
        ));
    }
    if let Some(h) = homogeneity.iter().find(|h| !(0.0..=1.0).contains(*h)) {
        return Err(Error::Config(format!("homogeneity {h} outside [0, 1]")));
    }
    if sizes.iter().any(|&s| s < 2) {
        return Err(Error::Config("every cluster needs at least 2 members".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cluster_of = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        cluster_of.extend(std::iter::repeat_n(c, s));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = if cluster_of[i] == cluster_of[j] {
                let h = homogeneity[cluster_of[i]];
                let a = spread.min(h).min(1.0 - h).max(0.0);
                h + a * (2.0 * rng.random::<f64>() - 1.0)
            } else {
                0.05 * rng.random::<f64>()
            };
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    // shift each block so its off-diagonal mean hits the target exactly
    let mut start = 0;
    for (c, &s) in sizes.iter().enumerate() {
        let block = start..start + s;
        let mut sum = 0.0;
        for i in block.clone() {
            for j in block.clone() {
                if i != j {
                    sum += values[i * n + j];
                }
            }
        }
        let shift = homogeneity[c] - sum / (s * (s - 1)) as f64;
        for i in block.clone() {
            for j in block.clone() {
                if i != j {
                    values[i * n + j] += shift;
                }
            }
        }
        start += s;
    }
    let labels = cluster_of.iter().map(|&c| cluster_name(c)).collect();
    let ids = (0..n).map(|i| format!("host{i}")).collect();
    let items = (0..n).map(FeatureVector::Opaque).collect();
    let ds = LabeledDataset::new("network-style", Some(ids), items, labels)?;
    let matrix = SimilarityMatrix::new(n, values)?;
    Ok((ds, SimilarityMeasure::Matrix(Arc::new(matrix))))
}

fn cluster_name(c: usize) -> String {
    let mut name = String::new();
    let mut c = c;
    loop {
        name.insert(0, (b'A' + (c % 26) as u8) as char);
        if c < 26 {
            break;
        }
        c = c / 26 - 1;
    }
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ItemId;

    #[test]
    fn two_blobs_of_one_hundred() {
        let spec = SyntheticSpec::GaussianBlobs {
            centers: vec![[0.0, 0.0], [5.0, 5.0]],
            per_blob: 100,
            sigma: 0.1,
        };
        let ds = gen_synthetic(&spec, 3).unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.label_set(), ["blob-0", "blob-1"]);
        let far = ds.item(ItemId(150)).as_dense().unwrap();
        assert!((far[0] - 5.0).abs() < 1.0 && (far[1] - 5.0).abs() < 1.0);
    }

    #[test]
    fn spirals_have_requested_size() {
        let spec = SyntheticSpec::TwoSpirals {
            n: 255,
            noise: 0.1,
            turns: 1.5,
        };
        let ds = gen_synthetic(&spec, 0).unwrap();
        assert_eq!(ds.len(), 255);
        assert_eq!(ds.dim(), Some(2));
        assert_eq!(ds.clusters().len(), 2);
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SyntheticSpec::TwoSpirals {
            n: 40,
            noise: 0.2,
            turns: 2.0,
        };
        assert_eq!(gen_synthetic(&spec, 5).unwrap(), gen_synthetic(&spec, 5).unwrap());
        assert_ne!(gen_synthetic(&spec, 5).unwrap(), gen_synthetic(&spec, 6).unwrap());
    }

    #[test]
    fn unknown_kind_is_config_error() {
        assert!("moons".parse::<SyntheticKind>().unwrap_err().is_config());
        assert_eq!(
            "two-spirals".parse::<SyntheticKind>().unwrap(),
            SyntheticKind::TwoSpirals
        );
    }

    #[test]
    fn negative_noise_rejected() {
        let spec = SyntheticSpec::GaussianBlobs {
            centers: vec![[0.0, 0.0]],
            per_blob: 3,
            sigma: -1.0,
        };
        assert!(gen_synthetic(&spec, 0).unwrap_err().is_config());
    }

    #[test]
    fn cluster_names() {
        assert_eq!(cluster_name(0), "A");
        assert_eq!(cluster_name(13), "N");
        assert_eq!(cluster_name(26), "AA");
    }
}
