//! Disruption axes and per-category probability profiles.
//!
//! Cause is carried jointly with scope and with direction, giving two
//! six-cell axes; the propagation domain is a three-cell axis. Each event
//! category holds one validated distribution per axis.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::Event;
use crate::taxonomy::TaxonomyRuleSet;
use crate::text::fold;

/// Allowed deviation of an axis distribution's sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    Human,
    Nature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Local,
    Regional,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Supply side: generation through distribution.
    Upstream,
    /// Demand side: electricity use.
    Downstream,
    /// Force majeure, impacting from all directions.
    Catastrophic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Physical,
    Cyber,
    Human,
}

impl Cause {
    pub const ALL: [Cause; 2] = [Cause::Human, Cause::Nature];

    pub fn name(self) -> &'static str {
        match self {
            Cause::Human => "human",
            Cause::Nature => "nature",
        }
    }
}

impl Scope {
    pub fn name(self) -> &'static str {
        match self {
            Scope::Local => "local",
            Scope::Regional => "regional",
            Scope::Global => "global",
        }
    }
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Upstream => "upstream",
            Direction::Downstream => "downstream",
            Direction::Catastrophic => "catastrophic",
        }
    }
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Physical => "physical",
            Domain::Cyber => "cyber",
            Domain::Human => "human",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Cause x scope.
    Scope,
    /// Cause x direction.
    Direction,
    /// Propagation domain.
    Domain,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Scope, Axis::Direction, Axis::Domain];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Scope => "scope",
            Axis::Direction => "direction",
            Axis::Domain => "domain",
        }
    }

    pub fn cells(self) -> &'static [Cell] {
        use Cause::*;
        const SCOPE: [Cell; 6] = [
            Cell::Scope(Human, Scope::Local),
            Cell::Scope(Human, Scope::Regional),
            Cell::Scope(Human, Scope::Global),
            Cell::Scope(Nature, Scope::Local),
            Cell::Scope(Nature, Scope::Regional),
            Cell::Scope(Nature, Scope::Global),
        ];
        const DIRECTION: [Cell; 6] = [
            Cell::Direction(Human, Direction::Upstream),
            Cell::Direction(Human, Direction::Downstream),
            Cell::Direction(Human, Direction::Catastrophic),
            Cell::Direction(Nature, Direction::Upstream),
            Cell::Direction(Nature, Direction::Downstream),
            Cell::Direction(Nature, Direction::Catastrophic),
        ];
        const DOMAIN: [Cell; 3] = [
            Cell::Domain(Domain::Physical),
            Cell::Domain(Domain::Cyber),
            Cell::Domain(Domain::Human),
        ];
        match self {
            Axis::Scope => &SCOPE,
            Axis::Direction => &DIRECTION,
            Axis::Domain => &DOMAIN,
        }
    }

    pub fn cell_count(self) -> usize {
        self.cells().len()
    }

    /// Looks up a cell by its key (`"human.local"`, `"nature.upstream"`,
    /// `"physical"`, ...).
    pub fn cell(self, key: &str) -> Option<Cell> {
        self.cells().iter().copied().find(|c| c.key() == key)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One cell of an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Scope(Cause, Scope),
    Direction(Cause, Direction),
    Domain(Domain),
}

impl Cell {
    pub fn axis(self) -> Axis {
        match self {
            Cell::Scope(..) => Axis::Scope,
            Cell::Direction(..) => Axis::Direction,
            Cell::Domain(_) => Axis::Domain,
        }
    }

    pub fn cause(self) -> Option<Cause> {
        match self {
            Cell::Scope(c, _) | Cell::Direction(c, _) => Some(c),
            Cell::Domain(_) => None,
        }
    }

    /// Position within `self.axis().cells()`.
    pub fn index(self) -> usize {
        match self {
            Cell::Scope(c, s) => c as usize * 3 + s as usize,
            Cell::Direction(c, d) => c as usize * 3 + d as usize,
            Cell::Domain(d) => d as usize,
        }
    }

    /// The value name without the cause (`"local"`, `"downstream"`,
    /// `"cyber"`).
    pub fn value_name(self) -> &'static str {
        match self {
            Cell::Scope(_, s) => s.name(),
            Cell::Direction(_, d) => d.name(),
            Cell::Domain(d) => d.name(),
        }
    }

    pub fn key(self) -> &'static str {
        use Cause::*;
        match self {
            Cell::Scope(Human, Scope::Local) => "human.local",
            Cell::Scope(Human, Scope::Regional) => "human.regional",
            Cell::Scope(Human, Scope::Global) => "human.global",
            Cell::Scope(Nature, Scope::Local) => "nature.local",
            Cell::Scope(Nature, Scope::Regional) => "nature.regional",
            Cell::Scope(Nature, Scope::Global) => "nature.global",
            Cell::Direction(Human, Direction::Upstream) => "human.upstream",
            Cell::Direction(Human, Direction::Downstream) => "human.downstream",
            Cell::Direction(Human, Direction::Catastrophic) => "human.catastrophic",
            Cell::Direction(Nature, Direction::Upstream) => "nature.upstream",
            Cell::Direction(Nature, Direction::Downstream) => "nature.downstream",
            Cell::Direction(Nature, Direction::Catastrophic) => "nature.catastrophic",
            Cell::Domain(d) => d.name(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.key())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MappingError {
    #[error("{category}: {axis} weights sum to {sum}, expected 1")]
    DistributionSumError {
        category: String,
        axis: Axis,
        sum: f64,
    },
    #[error("{category}: {axis} weight for {cell} is {weight}, expected a value in [0, 1]")]
    InvalidWeight {
        category: String,
        axis: Axis,
        cell: String,
        weight: f64,
    },
    #[error("{category}: {axis} has no cell {key:?}")]
    UnknownCell {
        category: String,
        axis: Axis,
        key: String,
    },
    #[error("{category}: expected a {expected} distribution, got {found}")]
    AxisMismatch {
        category: String,
        expected: Axis,
        found: Axis,
    },
    #[error("no mapping entry for category {0:?}")]
    MissingCategoryEntry(String),
    #[error("category {0:?} is not part of the taxonomy")]
    UnknownCategory(String),
    #[error("override {index} for {category:?} replaces no axis")]
    EmptyOverride { index: usize, category: String },
    #[error("override {index} for {category:?} has an empty criteria pattern")]
    EmptyCriteriaPattern { index: usize, category: String },
}

/// Probability weights over every cell of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisDistribution {
    axis: Axis,
    weights: Vec<f64>,
}

impl AxisDistribution {
    /// Builds a distribution from `(cell key, weight)` pairs. Cells that are
    /// not listed get weight 0. `label` names the owner in error messages.
    pub fn from_keyed<'a, I>(axis: Axis, pairs: I, label: &str) -> Result<Self, MappingError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut weights = alloc::vec![0.0; axis.cell_count()];
        for (key, weight) in pairs {
            let cell = axis.cell(key).ok_or_else(|| MappingError::UnknownCell {
                category: label.to_string(),
                axis,
                key: key.to_string(),
            })?;
            weights[cell.index()] = weight;
        }
        Self::from_weights(axis, weights, label)
    }

    /// Builds a distribution from weights in `axis.cells()` order.
    pub fn from_weights(axis: Axis, weights: Vec<f64>, label: &str) -> Result<Self, MappingError> {
        assert_eq!(weights.len(), axis.cell_count(), "weight count for {axis}");
        for (cell, &weight) in axis.cells().iter().zip(&weights) {
            if !(0.0..=1.0).contains(&weight) {
                return Err(MappingError::InvalidWeight {
                    category: label.to_string(),
                    axis,
                    cell: cell.key().to_string(),
                    weight,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(MappingError::DistributionSumError {
                category: label.to_string(),
                axis,
                sum,
            });
        }
        Ok(AxisDistribution { axis, weights })
    }

    pub fn point_mass(cell: Cell) -> Self {
        let axis = cell.axis();
        let mut weights = alloc::vec![0.0; axis.cell_count()];
        weights[cell.index()] = 1.0;
        AxisDistribution { axis, weights }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn weight(&self, cell: Cell) -> f64 {
        assert_eq!(cell.axis(), self.axis, "cell {cell} is not on the {} axis", self.axis);
        self.weights[cell.index()]
    }

    /// `(cell, weight)` in axis order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.axis.cells().iter().copied().zip(self.weights.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl Serialize for AxisDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.weights.len()))?;
        for (cell, w) in self.iter() {
            map.serialize_entry(cell.key(), &w)?;
        }
        map.end()
    }
}

/// The three distributions held for one category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryMapping {
    scope: AxisDistribution,
    direction: AxisDistribution,
    domain: AxisDistribution,
}

impl CategoryMapping {
    pub fn new(
        category: &str,
        scope: AxisDistribution,
        direction: AxisDistribution,
        domain: AxisDistribution,
    ) -> Result<Self, MappingError> {
        for (expected, dist) in [(Axis::Scope, &scope), (Axis::Direction, &direction), (Axis::Domain, &domain)] {
            if dist.axis != expected {
                return Err(MappingError::AxisMismatch {
                    category: category.to_string(),
                    expected,
                    found: dist.axis,
                });
            }
        }
        Ok(CategoryMapping {
            scope,
            direction,
            domain,
        })
    }

    pub fn get(&self, axis: Axis) -> &AxisDistribution {
        match axis {
            Axis::Scope => &self.scope,
            Axis::Direction => &self.direction,
            Axis::Domain => &self.domain,
        }
    }
}

/// Per-category distributions covering exactly the categories of a taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingProfile {
    entries: BTreeMap<String, CategoryMapping>,
}

impl MappingProfile {
    pub fn new(
        entries: BTreeMap<String, CategoryMapping>,
        taxonomy: &TaxonomyRuleSet,
    ) -> Result<Self, MappingError> {
        if let Some(name) = entries.keys().find(|name| taxonomy.category(name).is_none()) {
            return Err(MappingError::UnknownCategory(name.clone()));
        }
        if let Some(missing) = taxonomy
            .categories()
            .iter()
            .find(|c| !entries.contains_key(&c.name))
        {
            return Err(MappingError::MissingCategoryEntry(missing.name.clone()));
        }
        Ok(MappingProfile { entries })
    }

    pub fn entry(&self, category: &str) -> Option<&CategoryMapping> {
        self.entries.get(category)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &CategoryMapping)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Replaces axis distributions of a category's events whose alert criteria
/// contain a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct OverrideRule {
    category: String,
    criteria_pattern: String,
    folded: String,
    scope: Option<AxisDistribution>,
    direction: Option<AxisDistribution>,
    domain: Option<AxisDistribution>,
}

impl OverrideRule {
    /// `index` is the rule's position in its list, used in errors.
    pub fn new(
        index: usize,
        category: &str,
        criteria_pattern: &str,
        replacements: Vec<AxisDistribution>,
    ) -> Result<Self, MappingError> {
        let folded = fold(criteria_pattern);
        if folded.is_empty() {
            return Err(MappingError::EmptyCriteriaPattern {
                index,
                category: category.to_string(),
            });
        }
        if replacements.is_empty() {
            return Err(MappingError::EmptyOverride {
                index,
                category: category.to_string(),
            });
        }
        let mut rule = OverrideRule {
            category: category.to_string(),
            criteria_pattern: criteria_pattern.to_string(),
            folded,
            scope: None,
            direction: None,
            domain: None,
        };
        for dist in replacements {
            let slot = match dist.axis {
                Axis::Scope => &mut rule.scope,
                Axis::Direction => &mut rule.direction,
                Axis::Domain => &mut rule.domain,
            };
            *slot = Some(dist);
        }
        Ok(rule)
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn criteria_pattern(&self) -> &str {
        &self.criteria_pattern
    }

    pub fn replacement(&self, axis: Axis) -> Option<&AxisDistribution> {
        match axis {
            Axis::Scope => self.scope.as_ref(),
            Axis::Direction => self.direction.as_ref(),
            Axis::Domain => self.domain.as_ref(),
        }
    }

    /// Whether the alert criteria text contains the pattern, ignoring case
    /// and whitespace runs.
    pub fn matches_criteria(&self, criteria: &str) -> bool {
        fold(criteria).contains(self.folded.as_str())
    }
}

/// Rejects overrides that name categories outside the taxonomy.
pub fn validate_overrides(
    overrides: &[OverrideRule],
    taxonomy: &TaxonomyRuleSet,
) -> Result<(), MappingError> {
    match overrides.iter().find(|o| taxonomy.category(&o.category).is_none()) {
        Some(o) => Err(MappingError::UnknownCategory(o.category.clone())),
        None => Ok(()),
    }
}

/// The resolved distributions for one event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventMapping {
    pub event_id: String,
    pub category: String,
    pub scope: AxisDistribution,
    pub direction: AxisDistribution,
    pub domain: AxisDistribution,
}

impl EventMapping {
    pub fn get(&self, axis: Axis) -> &AxisDistribution {
        match axis {
            Axis::Scope => &self.scope,
            Axis::Direction => &self.direction,
            Axis::Domain => &self.domain,
        }
    }

    fn slot(&mut self, axis: Axis) -> &mut AxisDistribution {
        match axis {
            Axis::Scope => &mut self.scope,
            Axis::Direction => &mut self.direction,
            Axis::Domain => &mut self.domain,
        }
    }
}

/// Looks up the category's distributions. Event fields other than the id do
/// not influence the weights.
pub fn map_event(
    event: &Event,
    category: &str,
    profile: &MappingProfile,
) -> Result<EventMapping, MappingError> {
    let entry = profile
        .entry(category)
        .ok_or_else(|| MappingError::MissingCategoryEntry(category.to_string()))?;
    Ok(EventMapping {
        event_id: event.event_id.clone(),
        category: category.to_string(),
        scope: entry.scope.clone(),
        direction: entry.direction.clone(),
        domain: entry.domain.clone(),
    })
}

/// For each axis, the first override (in list order) whose category equals
/// the mapping's category, whose pattern occurs in the event's alert
/// criteria, and which replaces that axis, substitutes its distribution.
/// Events without alert criteria are returned unchanged.
pub fn apply_alert_criteria_overrides(
    event: &Event,
    base: EventMapping,
    overrides: &[OverrideRule],
) -> EventMapping {
    let Some(criteria) = event.alert_criteria.as_deref() else {
        return base;
    };
    let folded = fold(criteria);
    let mut out = base;
    for axis in Axis::ALL {
        let hit = overrides
            .iter()
            .filter(|o| o.category == out.category && folded.contains(o.folded.as_str()))
            .find_map(|o| o.replacement(axis));
        if let Some(dist) = hit {
            *out.slot(axis) = dist.clone();
        }
    }
    out
}
