use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ItemId, LabeledDataset};
use crate::error::{Error, Result};

/// Stratified hold-out split.
///
/// Each cluster contributes `round(n_c * test_fraction)` test items, clamped
/// so both sides keep at least one member. Both halves keep canonical order.
pub fn split_train_test(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_positions(ds, test_fraction, seed)?;
    Ok((
        ds.subset(format!("{}-train", ds.name()), &train),
        ds.subset(format!("{}-test", ds.name()), &test),
    ))
}

/// The positions in `ds` of the train and test halves of
/// [`split_train_test`], each ascending.
pub fn split_positions(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<ItemId>, Vec<ItemId>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; ds.len()];
    for cluster in ds.clusters() {
        let n = cluster.len();
        if n < 2 {
            return Err(Error::Domain(format!(
                "cluster {:?} has a single member and cannot be split",
                cluster.label()
            )));
        }
        let t = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        let mut members = cluster.members().to_vec();
        members.shuffle(&mut rng);
        for id in &members[..t] {
            is_test[id.index()] = true;
        }
    }
    let (test, train): (Vec<ItemId>, Vec<ItemId>) =
        (0..ds.len()).map(ItemId::new).partition(|id| is_test[id.index()]);
    Ok((train, test))
}
