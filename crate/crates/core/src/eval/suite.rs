use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{RailError, Result};
use crate::store::{
    load_embeddings, load_text_table, save_embeddings, save_text_table, DomainTexts, EmbeddingDataset, LabelRegistry, Role, SyntheticSuite,
    TextEmbeddingTable,
};

pub const TRAIN_FILE: &str = "train.emb";
pub const TEST_FILE: &str = "test.emb";
pub const TEXTS_FILE: &str = "texts.emb";
pub const ORDER_FILE: &str = "order.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct DomainData {
    pub name: String,
    /// Global class indices owned by the domain, in registry order.
    pub classes: Vec<usize>,
    pub train: EmbeddingDataset,
    pub test: EmbeddingDataset,
    /// Global labels of the test rows.
    pub test_labels: Vec<usize>,
}

/// A domain sequence with its shared label space. Every class is registered
/// up front and left unseen; protocols mark domains seen as they learn them.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSuite {
    pub registry: LabelRegistry,
    pub domains: Vec<DomainData>,
    pub texts: TextEmbeddingTable,
}

impl DomainSuite {
    pub fn new(parts: Vec<(EmbeddingDataset, EmbeddingDataset, DomainTexts)>, normalize: bool) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| RailError::InvalidParameter("domain sequence is empty".into()))?;
        let mut registry = LabelRegistry::new(first.0.dim())?;
        let mut texts = Vec::with_capacity(parts.len());
        let mut staged = Vec::with_capacity(parts.len());
        for (mut train, mut test, text) in parts {
            check_split(&train, Role::Train)?;
            check_split(&test, Role::Test)?;
            for (what, name, classes) in [
                ("test split", &test.domain_name, &test.class_names),
                ("text table", &text.domain_name, &text.class_names),
            ] {
                if name != &train.domain_name || classes != &train.class_names {
                    return Err(RailError::ManifestMismatch(format!(
                        "{what} of {} does not match its training split",
                        train.domain_name
                    )));
                }
            }
            let range = registry.register_domain(&train.domain_name, &train.class_names)?;
            if normalize {
                train.l2_normalize();
                test.l2_normalize();
            }
            staged.push((range.collect::<Vec<usize>>(), train, test));
            texts.push(text);
        }
        let texts = TextEmbeddingTable::assemble(&registry, &texts)?;
        let domains = staged
            .into_iter()
            .map(|(classes, train, test)| {
                train.global_labels(&registry)?;
                let test_labels = test.global_labels(&registry)?;
                Ok(DomainData {
                    name: train.domain_name.clone(),
                    classes,
                    train,
                    test,
                    test_labels,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DomainSuite {
            registry,
            domains,
            texts,
        })
    }

    pub fn from_synthetic(suite: &SyntheticSuite) -> Result<Self> {
        let parts = suite
            .domains
            .iter()
            .map(|d| (d.train.clone(), d.test.clone(), d.texts.clone()))
            .collect();
        Self::new(parts, false)
    }

    /// Loads `train.emb`, `test.emb` and `texts.emb` (each with its JSON
    /// manifest) from every directory, in order.
    pub fn load(dirs: &[PathBuf], normalize: bool) -> Result<Self> {
        let parts = dirs
            .iter()
            .map(|dir| load_domain_dir(dir))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts, normalize)
    }

    pub fn domain_names(&self) -> Vec<String> {
        self.domains.iter().map(|d| d.name.clone()).collect()
    }

    pub fn dim(&self) -> usize {
        self.registry.feature_dim()
    }
}

pub fn load_domain_dir(dir: &Path) -> Result<(EmbeddingDataset, EmbeddingDataset, DomainTexts)> {
    let train = load_embeddings(&dir.join(TRAIN_FILE))?;
    let test = load_embeddings(&dir.join(TEST_FILE))?;
    let texts = load_text_table(&dir.join(TEXTS_FILE))?;
    Ok((train, test, texts))
}

pub fn save_domain_dir(
    dir: &Path,
    train: &EmbeddingDataset,
    test: &EmbeddingDataset,
    texts: &DomainTexts,
    source: &str,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    save_embeddings(&dir.join(TRAIN_FILE), train, source)?;
    save_embeddings(&dir.join(TEST_FILE), test, source)?;
    save_text_table(&dir.join(TEXTS_FILE), texts, source)
}

/// Writes one directory per synthetic domain under `root` plus an order
/// file listing them; returns the order file's path.
pub fn write_synthetic(synth: &SyntheticSuite, root: &Path) -> Result<PathBuf> {
    let mut order = String::new();
    for d in &synth.domains {
        let name = &d.train.domain_name;
        save_domain_dir(&root.join(name), &d.train, &d.test, &d.texts, "synthetic")?;
        order.push_str(name);
        order.push('\n');
    }
    let path = root.join(ORDER_FILE);
    fs::write(&path, order)?;
    Ok(path)
}

fn check_split(ds: &EmbeddingDataset, role: Role) -> Result<()> {
    if ds.role != role {
        return Err(RailError::ManifestMismatch(format!(
            "{} split of {} is marked {:?}",
            if role == Role::Train { "train" } else { "test" },
            ds.domain_name,
            ds.role
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{synthesize_domains, SynthConfig};

    #[test]
    fn synthetic_suite_registers_in_order() {
        let synth = synthesize_domains(&SynthConfig::new(3, 4, 5, 16, 0.6, 1)).unwrap();
        let suite = DomainSuite::from_synthetic(&synth).unwrap();
        assert_eq!(suite.registry.len(), 12);
        assert_eq!(suite.domains[2].classes, vec![8, 9, 10, 11]);
        assert!(suite.registry.seen_classes().is_empty());
        assert_eq!(suite.texts.len(), 12);
        assert!(suite.domains[1].test_labels.iter().all(|l| (4..8).contains(l)));
    }

    #[test]
    fn disk_round_trip() {
        let synth = synthesize_domains(&SynthConfig::new(2, 3, 4, 8, 0.6, 4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let order = write_synthetic(&synth, dir.path()).unwrap();
        let dirs = crate::eval::read_order_file(&order).unwrap();
        let loaded = DomainSuite::load(&dirs, false).unwrap();
        let direct = DomainSuite::from_synthetic(&synth).unwrap();
        assert_eq!(loaded.registry, direct.registry);
        assert_eq!(loaded.domains[1].test_labels, direct.domains[1].test_labels);
        let err = (&loaded.domains[0].train.features - &direct.domains[0].train.features).amax();
        assert!(err < 1e-6);
    }

    #[test]
    fn rejects_mismatched_text_table() {
        let synth = synthesize_domains(&SynthConfig::new(2, 3, 2, 8, 0.6, 2)).unwrap();
        let mut parts: Vec<_> = synth
            .domains
            .iter()
            .map(|d| (d.train.clone(), d.test.clone(), d.texts.clone()))
            .collect();
        parts[1].2.class_names.swap(0, 1);
        assert!(matches!(DomainSuite::new(parts, false), Err(RailError::ManifestMismatch(_))));
    }

    #[test]
    fn rejects_swapped_roles() {
        let synth = synthesize_domains(&SynthConfig::new(1, 3, 2, 8, 0.6, 3)).unwrap();
        let d = &synth.domains[0];
        let parts = vec![(d.test.clone(), d.train.clone(), d.texts.clone())];
        assert!(DomainSuite::new(parts, false).is_err());
    }
}
