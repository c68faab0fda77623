//! Canonicalization of raw event-type text into event categories.
//!
//! A rule set is an ordered list of case-insensitive substring or prefix
//! patterns. The first matching rule decides the category; text that matches
//! nothing lands in the single catch-all category.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::analytics::{measure_filter, Measure};
use crate::ingest::EventDataset;
use crate::text::fold;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("rule {index} targets undeclared category {target:?}")]
    UnknownTargetCategory { index: usize, target: String },
    #[error("category {0:?} declared more than once")]
    DuplicateCategoryName(String),
    #[error("rule set has no rules")]
    EmptyRuleSet,
    #[error("expected exactly one catch-all category, found {0}")]
    CatchAllCount(usize),
    #[error("rule {0} has an empty pattern")]
    EmptyPattern(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventCategory {
    pub name: String,
    pub is_catch_all: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Substring,
    /// Anchored at the start of the (trimmed) event-type text.
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyRule {
    kind: MatchKind,
    pattern: String,
    folded: String,
    target: usize,
}

impl TaxonomyRule {
    pub fn kind(&self) -> MatchKind {
        self.kind
    }

    /// The pattern as written in the configuration.
    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    fn matches(&self, folded_text: &str) -> bool {
        match self.kind {
            MatchKind::Substring => folded_text.contains(self.folded.as_str()),
            MatchKind::Prefix => folded_text.starts_with(self.folded.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyRuleSet {
    categories: Vec<EventCategory>,
    rules: Vec<TaxonomyRule>,
    catch_all: usize,
}

impl TaxonomyRuleSet {
    /// Validates and builds a rule set. `rules` are `(kind, pattern, target
    /// category name)` in precedence order.
    pub fn new<I, S>(categories: Vec<EventCategory>, rules: I) -> Result<Self, TaxonomyError>
    where
        I: IntoIterator<Item = (MatchKind, S, S)>,
        S: Into<String>,
    {
        let mut index = BTreeMap::new();
        for (i, category) in categories.iter().enumerate() {
            if index.insert(category.name.as_str(), i).is_some() {
                return Err(TaxonomyError::DuplicateCategoryName(category.name.clone()));
            }
        }
        let catch_alls: Vec<usize> = categories
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_catch_all)
            .map(|(i, _)| i)
            .collect();
        if catch_alls.len() != 1 {
            return Err(TaxonomyError::CatchAllCount(catch_alls.len()));
        }

        let mut built = Vec::new();
        for (i, (kind, pattern, target)) in rules.into_iter().enumerate() {
            let (pattern, target) = (pattern.into(), target.into());
            let folded = fold(&pattern);
            if folded.is_empty() {
                return Err(TaxonomyError::EmptyPattern(i));
            }
            let Some(&target) = index.get(target.as_str()) else {
                return Err(TaxonomyError::UnknownTargetCategory { index: i, target });
            };
            built.push(TaxonomyRule {
                kind,
                pattern,
                folded,
                target,
            });
        }
        if built.is_empty() {
            return Err(TaxonomyError::EmptyRuleSet);
        }
        Ok(TaxonomyRuleSet {
            catch_all: catch_alls[0],
            categories,
            rules: built,
        })
    }

    pub fn categories(&self) -> &[EventCategory] {
        &self.categories
    }

    pub fn rules(&self) -> &[TaxonomyRule] {
        &self.rules
    }

    pub fn rule_target(&self, rule: &TaxonomyRule) -> &EventCategory {
        &self.categories[rule.target]
    }

    pub fn catch_all(&self) -> &EventCategory {
        &self.categories[self.catch_all]
    }

    pub fn category(&self, name: &str) -> Option<&EventCategory> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn canonicalize(&self, raw: &str) -> &EventCategory {
        let folded = fold(raw);
        self.rules
            .iter()
            .find(|rule| rule.matches(&folded))
            .map_or(self.catch_all(), |rule| &self.categories[rule.target])
    }
}

/// First matching rule wins; unmatched text maps to the catch-all.
pub fn canonicalize_event_type<'a>(raw: &str, rules: &'a TaxonomyRuleSet) -> &'a EventCategory {
    rules.canonicalize(raw)
}

/// Measure-filtered event counts per category, descending by count and then
/// ascending by name. Categories without events are omitted.
pub fn category_counts(
    dataset: &EventDataset,
    rules: &TaxonomyRuleSet,
    measure: Measure,
) -> Vec<(EventCategory, u64)> {
    let mut counts: BTreeMap<&EventCategory, u64> = BTreeMap::new();
    for event in dataset.events() {
        if measure_filter(event, measure) {
            *counts.entry(rules.canonicalize(&event.raw_event_type)).or_default() += 1;
        }
    }
    let mut out: Vec<(EventCategory, u64)> =
        counts.into_iter().map(|(c, n)| (c.clone(), n)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.name.cmp(&b.0.name)));
    out
}
