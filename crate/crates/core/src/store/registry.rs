use std::collections::HashMap;
use std::ops::Range;

use crate::error::{RailError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub name: String,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainEntry {
    pub name: String,
    pub classes: Range<usize>,
}

/// Global class index space shared by every domain.
///
/// Classes get consecutive indices in registration order. The seen mask
/// tracks which classes belong to domains that have been learned; it only
/// ever flips from unseen to seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRegistry {
    feature_dim: usize,
    classes: Vec<ClassEntry>,
    domains: Vec<DomainEntry>,
    seen: Vec<bool>,
    by_name: HashMap<String, usize>,
}

impl LabelRegistry {
    pub fn new(feature_dim: usize) -> Result<Self> {
        if feature_dim == 0 {
            return Err(RailError::InvalidParameter(
                "feature dimension must be positive".into(),
            ));
        }
        Ok(LabelRegistry {
            feature_dim,
            classes: Vec::new(),
            domains: Vec::new(),
            seen: Vec::new(),
            by_name: HashMap::new(),
        })
    }

    /// Appends a domain's classes and returns their global index range.
    ///
    /// Fails without modifying the registry if any class name is already
    /// registered (or repeated within `class_names`).
    pub fn register_domain<S: AsRef<str>>(
        &mut self,
        domain_name: &str,
        class_names: &[S],
    ) -> Result<Range<usize>> {
        if self.domains.iter().any(|d| d.name == domain_name) {
            return Err(RailError::DuplicateDomain(domain_name.to_string()));
        }
        if class_names.is_empty() {
            return Err(RailError::EmptyLabelSet);
        }
        let mut incoming = HashMap::new();
        for name in class_names {
            let name = name.as_ref();
            if self.by_name.contains_key(name) || incoming.insert(name, ()).is_some() {
                return Err(RailError::DuplicateClassName(name.to_string()));
            }
        }
        let start = self.classes.len();
        for name in class_names {
            let name = name.as_ref().to_string();
            self.by_name.insert(name.clone(), self.classes.len());
            self.classes.push(ClassEntry {
                name,
                domain: domain_name.to_string(),
            });
            self.seen.push(false);
        }
        let range = start..self.classes.len();
        self.domains.push(DomainEntry {
            name: domain_name.to_string(),
            classes: range.clone(),
        });
        Ok(range)
    }

    /// Marks every class of `domain_name` as seen.
    pub fn mark_seen(&mut self, domain_name: &str) -> Result<()> {
        let range = self.domain_classes(domain_name)?;
        for flag in &mut self.seen[range] {
            *flag = true;
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// |C_N|
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn is_seen(&self, class: usize) -> bool {
        self.seen.get(class).copied().unwrap_or(false)
    }

    pub fn seen_mask(&self) -> &[bool] {
        &self.seen
    }

    /// Global indices of seen classes (C_L), ascending.
    pub fn seen_classes(&self) -> Vec<usize> {
        (0..self.seen.len()).filter(|&i| self.seen[i]).collect()
    }

    pub fn classes(&self) -> &[ClassEntry] {
        &self.classes
    }

    pub fn domains(&self) -> &[DomainEntry] {
        &self.domains
    }

    pub fn class_name(&self, class: usize) -> Option<&str> {
        self.classes.get(class).map(|c| c.name.as_str())
    }

    pub fn index_of(&self, class_name: &str) -> Option<usize> {
        self.by_name.get(class_name).copied()
    }

    pub fn domain_classes(&self, domain_name: &str) -> Result<Range<usize>> {
        self.domains
            .iter()
            .find(|d| d.name == domain_name)
            .map(|d| d.classes.clone())
            .ok_or_else(|| RailError::UnknownDomain(domain_name.to_string()))
    }

    /// Position of the domain owning `class` in registration order.
    pub fn domain_of(&self, class: usize) -> Option<usize> {
        self.domains.iter().position(|d| d.classes.contains(&class))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_registration_starts_at_zero() {
        let mut reg = LabelRegistry::new(4).unwrap();
        let r = reg.register_domain("pets", &["cat", "dog"]).unwrap();
        assert_eq!(r, 0..2);
        assert_eq!(reg.index_of("cat"), Some(0));
        assert_eq!(reg.index_of("dog"), Some(1));
        assert_eq!(reg.seen_mask(), &[false, false]);
    }

    #[test]
    fn duplicate_class_is_rejected_without_side_effects() {
        let mut reg = LabelRegistry::new(4).unwrap();
        reg.register_domain("pets", &["cat", "dog"]).unwrap();
        let before = reg.clone();
        match reg.register_domain("more", &["cat"]) {
            Err(RailError::DuplicateClassName(n)) => assert_eq!(n, "cat"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(reg, before);
        assert!(matches!(
            reg.register_domain("x", &["a", "a"]),
            Err(RailError::DuplicateClassName(_))
        ));
    }

    #[test]
    fn indices_are_consecutive_across_domains() {
        let mut reg = LabelRegistry::new(4).unwrap();
        reg.register_domain("pets", &["cat", "dog"]).unwrap();
        let r = reg.register_domain("aircraft", &["707-320"]).unwrap();
        assert_eq!(r, 2..3);
        assert_eq!(reg.domain_of(2), Some(1));
        assert_eq!(reg.class_name(2), Some("707-320"));
    }

    #[test]
    fn seen_mask_is_monotone() {
        let mut reg = LabelRegistry::new(4).unwrap();
        reg.register_domain("a", &["a0", "a1"]).unwrap();
        reg.register_domain("b", &["b0"]).unwrap();
        reg.mark_seen("b").unwrap();
        assert_eq!(reg.seen_classes(), vec![2]);
        reg.mark_seen("a").unwrap();
        reg.mark_seen("b").unwrap();
        assert_eq!(reg.seen_classes(), vec![0, 1, 2]);
        assert!(reg.mark_seen("nope").is_err());
    }

    #[test]
    fn same_sequence_gives_same_indices() {
        let build = || {
            let mut reg = LabelRegistry::new(3).unwrap();
            reg.register_domain("a", &["x", "y"]).unwrap();
            reg.register_domain("b", &["z"]).unwrap();
            reg
        };
        assert_eq!(build(), build());
    }
}
