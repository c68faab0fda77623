//! Measure filters, stage aggregation and derived shares.
//!
//! Masses are accumulated in fixed point (96 fractional bits) so that
//! aggregation is exact, commutative and associative: a dataset aggregated in
//! one pass equals the cellwise sum of its partitions bit for bit. Weights of
//! at least 2^-43 convert without loss.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{Event, EventDataset};
use crate::mapping::{
    apply_alert_criteria_overrides, map_event, Axis, AxisDistribution, Cause, Cell, EventMapping,
    MappingError, MappingProfile, OverrideRule,
};
use crate::taxonomy::{category_counts, EventCategory, TaxonomyRuleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no events pass the filter")]
    EmptyDistribution,
    #[error("cannot combine a {found} distribution with a {expected} distribution")]
    AxisMismatch { expected: Axis, found: Axis },
    #[error("cannot combine distributions over different measures ({expected} vs {found})")]
    MeasureMismatch { expected: Measure, found: Measure },
    #[error("the {0} axis carries no cause")]
    NoCauseOnAxis(Axis),
    #[error("top-{k} requested but only {available} categories have events")]
    InvalidTopK { k: usize, available: usize },
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("no categories requested")]
    NoCategories,
    #[error("axis {0} requested twice")]
    DuplicateAxis(Axis),
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

/// Which events an analysis counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "all")]
    AllEvents,
    /// Events that do not report zero demand loss.
    #[serde(rename = "demand")]
    NonzeroDemandLoss,
    /// Events that do not report zero customers affected.
    #[serde(rename = "customers")]
    NonzeroCustomersAffected,
}

impl Measure {
    pub const ALL: [Measure; 3] = [
        Measure::AllEvents,
        Measure::NonzeroDemandLoss,
        Measure::NonzeroCustomersAffected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::AllEvents => "all",
            Measure::NonzeroDemandLoss => "demand",
            Measure::NonzeroCustomersAffected => "customers",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// "Unknown" does not rule out an impact and passes the nonzero measures;
/// zero, "N/A", "None" and blank cells do not.
pub fn measure_filter(event: &Event, measure: Measure) -> bool {
    match measure {
        Measure::AllEvents => true,
        Measure::NonzeroDemandLoss => event.demand_loss.is_possibly_nonzero(),
        Measure::NonzeroCustomersAffected => event.customers_affected.is_possibly_nonzero(),
    }
}

const MASS_SCALE: f64 = 79_228_162_514_264_337_593_543_950_336.0; // 2^96

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Mass(i128);

impl Mass {
    fn from_weight(weight: f64) -> Mass {
        Mass((weight * MASS_SCALE) as i128)
    }

    fn to_f64(self) -> f64 {
        self.0 as f64 / MASS_SCALE
    }

    fn add(&mut self, other: Mass) {
        self.0 = self
            .0
            .checked_add(other.0)
            .expect("stage mass overflow (more than 2^31 events)");
    }
}

/// Taxonomy, profile and optional overrides used to resolve events.
#[derive(Debug, Clone, Copy)]
pub struct MappingContext<'a> {
    pub taxonomy: &'a TaxonomyRuleSet,
    pub profile: &'a MappingProfile,
    pub overrides: Option<&'a [OverrideRule]>,
}

impl<'a> MappingContext<'a> {
    pub fn new(taxonomy: &'a TaxonomyRuleSet, profile: &'a MappingProfile) -> Self {
        MappingContext {
            taxonomy,
            profile,
            overrides: None,
        }
    }

    pub fn with_overrides(self, overrides: &'a [OverrideRule]) -> Self {
        MappingContext {
            overrides: Some(overrides),
            ..self
        }
    }

    pub fn category(&self, event: &Event) -> &'a EventCategory {
        self.taxonomy.canonicalize(&event.raw_event_type)
    }

    pub fn resolve(&self, event: &Event) -> Result<EventMapping, MappingError> {
        let category = self.category(event);
        let base = map_event(event, &category.name, self.profile)?;
        Ok(match self.overrides {
            Some(overrides) => apply_alert_criteria_overrides(event, base, overrides),
            None => base,
        })
    }
}

/// Accumulated probability mass per cell of one axis; units are expected
/// event counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageDistribution {
    axis: Axis,
    measure: Measure,
    masses: Vec<Mass>,
    event_count: u64,
}

impl StageDistribution {
    pub fn empty(axis: Axis, measure: Measure) -> Self {
        StageDistribution {
            axis,
            measure,
            masses: alloc::vec![Mass::default(); axis.cell_count()],
            event_count: 0,
        }
    }

    /// Adds one event's distribution.
    pub fn add(&mut self, dist: &AxisDistribution) -> Result<(), AnalyticsError> {
        if dist.axis() != self.axis {
            return Err(AnalyticsError::AxisMismatch {
                expected: self.axis,
                found: dist.axis(),
            });
        }
        for (slot, (_, w)) in self.masses.iter_mut().zip(dist.iter()) {
            slot.add(Mass::from_weight(w));
        }
        self.event_count += 1;
        Ok(())
    }

    /// Cellwise sum with another distribution over the same axis and measure.
    pub fn merge(&mut self, other: &StageDistribution) -> Result<(), AnalyticsError> {
        if other.axis != self.axis {
            return Err(AnalyticsError::AxisMismatch {
                expected: self.axis,
                found: other.axis,
            });
        }
        if other.measure != self.measure {
            return Err(AnalyticsError::MeasureMismatch {
                expected: self.measure,
                found: other.measure,
            });
        }
        for (a, b) in self.masses.iter_mut().zip(&other.masses) {
            a.add(*b);
        }
        self.event_count += other.event_count;
        Ok(())
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn mass(&self, cell: Cell) -> f64 {
        assert_eq!(cell.axis(), self.axis, "cell {cell} is not on the {} axis", self.axis);
        self.masses[cell.index()].to_f64()
    }

    /// `(cell, mass)` in axis order.
    pub fn cells(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.axis
            .cells()
            .iter()
            .copied()
            .zip(self.masses.iter().map(|m| m.to_f64()))
    }

    pub fn total_mass(&self) -> f64 {
        self.fixed_total().to_f64()
    }

    fn fixed_total(&self) -> Mass {
        let mut total = Mass::default();
        for m in &self.masses {
            total.add(*m);
        }
        total
    }

    fn ratio(&self, mut select: impl FnMut(Cell) -> bool) -> Result<f64, AnalyticsError> {
        if self.event_count == 0 {
            return Err(AnalyticsError::EmptyDistribution);
        }
        let mut selected = Mass::default();
        for (cell, m) in self.axis.cells().iter().zip(&self.masses) {
            if select(*cell) {
                selected.add(*m);
            }
        }
        let total = self.fixed_total();
        if total.0 == 0 {
            return Err(AnalyticsError::EmptyDistribution);
        }
        Ok(selected.0 as f64 / total.0 as f64)
    }
}

impl Serialize for StageDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;

        struct Cells<'a>(&'a StageDistribution);
        impl Serialize for Cells<'_> {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                use serde::ser::SerializeMap;
                let mut map = serializer.serialize_map(Some(self.0.masses.len()))?;
                for (cell, mass) in self.0.cells() {
                    map.serialize_entry(cell.key(), &mass)?;
                }
                map.end()
            }
        }

        let mut s = serializer.serialize_struct("StageDistribution", 4)?;
        s.serialize_field("axis", &self.axis)?;
        s.serialize_field("measure", &self.measure)?;
        s.serialize_field("event_count", &self.event_count)?;
        s.serialize_field("cells", &Cells(self))?;
        s.end()
    }
}

/// Sums the mapped weights of every event passing `measure` into the cells
/// of `axis`. Events are visited in `event_id` order.
pub fn aggregate_stage(
    dataset: &EventDataset,
    taxonomy: &TaxonomyRuleSet,
    profile: &MappingProfile,
    overrides: Option<&[OverrideRule]>,
    measure: Measure,
    axis: Axis,
) -> Result<StageDistribution, AnalyticsError> {
    let mut ctx = MappingContext::new(taxonomy, profile);
    ctx.overrides = overrides;
    aggregate_with(dataset.events(), &ctx, measure, axis)
}

/// [`aggregate_stage`] over any event slice with a prepared context.
pub fn aggregate_with(
    events: &[Event],
    ctx: &MappingContext<'_>,
    measure: Measure,
    axis: Axis,
) -> Result<StageDistribution, AnalyticsError> {
    let mut dist = StageDistribution::empty(axis, measure);
    for event in events.iter().filter(|e| measure_filter(e, measure)) {
        let mapping = ctx.resolve(event)?;
        dist.add(mapping.get(axis))?;
    }
    Ok(dist)
}

/// Share of mass attributed to `cause`.
pub fn cause_share(dist: &StageDistribution, cause: Cause) -> Result<f64, AnalyticsError> {
    if dist.axis == Axis::Domain {
        return Err(AnalyticsError::NoCauseOnAxis(dist.axis));
    }
    dist.ratio(|cell| cell.cause() == Some(cause))
}

/// Share of mass in the cells selected by `predicate`.
pub fn cell_share(
    dist: &StageDistribution,
    predicate: impl FnMut(Cell) -> bool,
) -> Result<f64, AnalyticsError> {
    dist.ratio(predicate)
}

/// The `k` largest categories under `measure` and their combined share of the
/// filtered events.
pub fn top_categories_share(
    dataset: &EventDataset,
    taxonomy: &TaxonomyRuleSet,
    measure: Measure,
    k: usize,
) -> Result<(Vec<EventCategory>, f64), AnalyticsError> {
    let counts = category_counts(dataset, taxonomy, measure);
    let total: u64 = counts.iter().map(|(_, n)| n).sum();
    if total == 0 {
        return Err(AnalyticsError::EmptyDistribution);
    }
    if k == 0 || k > counts.len() {
        return Err(AnalyticsError::InvalidTopK {
            k,
            available: counts.len(),
        });
    }
    let top: u64 = counts[..k].iter().map(|(_, n)| n).sum();
    let categories = counts.into_iter().take(k).map(|(c, _)| c).collect();
    Ok((categories, top as f64 / total as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimelinePoint {
    pub year: i32,
    pub total: u64,
    /// Events not reporting zero customers affected.
    pub nonzero_customers: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimelineSeries {
    pub category: String,
    pub points: Vec<TimelinePoint>,
}

/// Per-year totals for each requested category. Years run over `years` when
/// given, else over the dataset's span; years without events are zero-filled.
pub fn timeline(
    dataset: &EventDataset,
    taxonomy: &TaxonomyRuleSet,
    categories: &[&str],
    years: Option<(i32, i32)>,
) -> Result<Vec<TimelineSeries>, AnalyticsError> {
    if categories.is_empty() {
        return Err(AnalyticsError::NoCategories);
    }
    if let Some(name) = categories.iter().find(|n| taxonomy.category(n).is_none()) {
        return Err(AnalyticsError::UnknownCategory(name.to_string()));
    }
    let span = years.or_else(|| dataset.year_span());
    let mut counts: BTreeMap<(&str, i32), (u64, u64)> = BTreeMap::new();
    for event in dataset.events() {
        let category = taxonomy.canonicalize(&event.raw_event_type).name.as_str();
        let slot = counts.entry((category, event.year)).or_default();
        slot.0 += 1;
        if measure_filter(event, Measure::NonzeroCustomersAffected) {
            slot.1 += 1;
        }
    }
    Ok(categories
        .iter()
        .map(|&name| TimelineSeries {
            category: name.to_string(),
            points: match span {
                Some((lo, hi)) => (lo..=hi)
                    .map(|year| {
                        let (total, nonzero) = counts.get(&(name, year)).copied().unwrap_or_default();
                        TimelinePoint {
                            year,
                            total,
                            nonzero_customers: nonzero,
                        }
                    })
                    .collect(),
                None => Vec::new(),
            },
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSensitivity {
    pub cell: Cell,
    /// Mass from the event-type mapping alone.
    pub event_type_mass: f64,
    /// Mass after alert-criteria overrides.
    pub alert_criteria_mass: f64,
    /// `|alert_criteria_mass - event_type_mass|`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisSensitivity {
    pub axis: Axis,
    pub cells: Vec<CellSensitivity>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySensitivity {
    pub category: String,
    pub event_count: u64,
    pub axes: Vec<AxisSensitivity>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub category: String,
    pub axis: Axis,
    pub cell: Cell,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub measure: Measure,
    pub event_count: u64,
    /// Sorted by category name; axes and cells in axis order.
    pub categories: Vec<CategorySensitivity>,
    /// Cell with the largest difference, ties broken by (category, axis name,
    /// cell key) ascending. `None` when both mappings agree everywhere.
    pub largest_discrepancy: Option<Discrepancy>,
}

/// Aggregates every axis per category with and without the overrides and
/// records the per-cell masses and their absolute differences.
pub fn sensitivity_compare(
    dataset: &EventDataset,
    taxonomy: &TaxonomyRuleSet,
    profile: &MappingProfile,
    overrides: &[OverrideRule],
    measure: Measure,
) -> Result<SensitivityReport, AnalyticsError> {
    let plain = MappingContext::new(taxonomy, profile);
    let refined = plain.with_overrides(overrides);

    let mut by_category: BTreeMap<&str, Vec<&Event>> = BTreeMap::new();
    for event in dataset.events().iter().filter(|e| measure_filter(e, measure)) {
        by_category
            .entry(plain.category(event).name.as_str())
            .or_default()
            .push(event);
    }
    if by_category.is_empty() {
        return Err(AnalyticsError::EmptyDistribution);
    }

    let mut categories = Vec::new();
    let mut event_count = 0;
    for (name, events) in by_category {
        let mut without: Vec<StageDistribution> =
            Axis::ALL.iter().map(|&a| StageDistribution::empty(a, measure)).collect();
        let mut with = without.clone();
        for event in &events {
            let base = plain.resolve(event)?;
            let refined_mapping = refined.resolve(event)?;
            for (i, axis) in Axis::ALL.into_iter().enumerate() {
                without[i].add(base.get(axis))?;
                with[i].add(refined_mapping.get(axis))?;
            }
        }
        event_count += events.len() as u64;
        let axes = without
            .iter()
            .zip(&with)
            .map(|(a, b)| AxisSensitivity {
                axis: a.axis,
                cells: a
                    .cells()
                    .zip(b.cells())
                    .map(|((cell, ma), (_, mb))| CellSensitivity {
                        cell,
                        event_type_mass: ma,
                        alert_criteria_mass: mb,
                        difference: (mb - ma).abs(),
                    })
                    .collect(),
            })
            .collect();
        categories.push(CategorySensitivity {
            category: name.to_string(),
            event_count: events.len() as u64,
            axes,
        });
    }

    let mut largest: Option<(&str, &str, &str, &CategorySensitivity, &AxisSensitivity, &CellSensitivity)> = None;
    for cat in &categories {
        for ax in &cat.axes {
            for c in &ax.cells {
                if c.difference <= 0.0 {
                    continue;
                }
                let key = (cat.category.as_str(), ax.axis.name(), c.cell.key());
                let better = match &largest {
                    None => true,
                    Some((bc, ba, bk, _, _, best)) => {
                        c.difference > best.difference
                            || (c.difference == best.difference && key < (*bc, *ba, *bk))
                    }
                };
                if better {
                    largest = Some((key.0, key.1, key.2, cat, ax, c));
                }
            }
        }
    }
    let largest_discrepancy = largest.map(|(_, _, _, cat, ax, c)| Discrepancy {
        category: cat.category.clone(),
        axis: ax.axis,
        cell: c.cell,
        difference: c.difference,
    });

    Ok(SensitivityReport {
        measure,
        event_count,
        categories,
        largest_discrepancy,
    })
}

/// Events of `category` whose alert criteria contain `pattern` (folded
/// comparison, as for overrides).
pub fn count_alert_criteria(
    dataset: &EventDataset,
    taxonomy: &TaxonomyRuleSet,
    category: &str,
    pattern: &str,
) -> u64 {
    let needle = crate::text::fold(pattern);
    dataset
        .events()
        .iter()
        .filter(|e| taxonomy.canonicalize(&e.raw_event_type).name == category)
        .filter_map(|e| e.alert_criteria.as_deref())
        .filter(|c| crate::text::fold(c).contains(needle.as_str()))
        .count() as u64
}
