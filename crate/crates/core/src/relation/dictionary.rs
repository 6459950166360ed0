use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::labels::normalize_label;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymGroup {
    pub name: String,
    pub labels: BTreeSet<String>,
}

/// Groups of relation labels treated as interchangeable when scoring.
/// A label belongs to at most one group.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SynonymDictionary {
    pub version: String,
    groups: Vec<SynonymGroup>,
    index: BTreeMap<String, usize>,
}

impl SynonymDictionary {
    pub fn new(version: impl Into<String>, groups: Vec<SynonymGroup>) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut normalized = Vec::with_capacity(groups.len());
        for (gi, g) in groups.into_iter().enumerate() {
            let labels: BTreeSet<String> = g.labels.iter().map(|l| normalize_label(l)).collect();
            for l in &labels {
                if index.insert(l.clone(), gi).is_some() {
                    return Err(Error::InvalidDictionary(alloc::format!(
                        "label `{l}` appears in more than one group"
                    )));
                }
            }
            normalized.push(SynonymGroup { name: g.name, labels });
        }
        Ok(Self {
            version: version.into(),
            groups: normalized,
            index,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The two groups that ship with the crate: geographic and family.
    pub fn seed() -> Self {
        let group = |name: &str, labels: &[&str]| SynonymGroup {
            name: String::from(name),
            labels: labels.iter().map(|l| String::from(*l)).collect(),
        };
        Self::new(
            "seed-1",
            alloc::vec![
                group("geographic", &["country", "located_in_admin", "contains_admin"]),
                group("family", &["spouse", "mother", "father", "child", "sibling"]),
            ],
        )
        .expect("seed groups are disjoint")
    }

    pub fn groups(&self) -> &[SynonymGroup] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group_of(&self, label: &str) -> Option<&SynonymGroup> {
        self.index.get(label).map(|&i| &self.groups[i])
    }

    pub fn same_group(&self, a: &str, b: &str) -> bool {
        matches!((self.index.get(a), self.index.get(b)), (Some(x), Some(y)) if x == y)
    }

    /// Copy without the named group.
    pub fn without_group(&self, name: &str) -> Self {
        let groups = self.groups.iter().filter(|g| g.name != name).cloned().collect();
        Self::new(self.version.clone(), groups).expect("subset of a valid dictionary")
    }
}
