use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{EmbeddingDataset, Role};
use crate::error::{RailError, Result};

/// Keeps at most `shots` rows per class, drawn uniformly without replacement.
///
/// Classes with fewer rows than `shots` are kept whole. Selected rows keep
/// their original relative order, so the output is a deterministic function
/// of `(dataset, shots, seed)`.
pub fn sample_few_shot(dataset: &EmbeddingDataset, shots: usize, seed: u64) -> Result<EmbeddingDataset> {
    if shots == 0 {
        return Err(RailError::InvalidParameter("shots must be positive".into()));
    }
    if dataset.role != Role::Train {
        return Err(RailError::InvalidParameter(
            "few-shot sampling applies to training splits only".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for rows in dataset.rows_by_class() {
        if rows.len() <= shots {
            keep.extend_from_slice(&rows);
        } else {
            let picked = rand::seq::index::sample(&mut rng, rows.len(), shots);
            keep.extend(picked.iter().map(|i| rows[i]));
        }
    }
    keep.sort_unstable();
    Ok(dataset.subset(&keep))
}
