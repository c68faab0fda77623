//! Core model for mapping electric disturbance reports onto disruption axes.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO. It covers:
//!
//! * [`ingest`]: normalized event records, sentinel-aware measure values and
//!   the immutable [`EventDataset`](ingest::EventDataset).
//! * [`taxonomy`]: ordered pattern rules that canonicalize raw event-type text
//!   into event categories.
//! * [`mapping`]: per-category probability distributions over the scope,
//!   direction and domain axes, plus alert-criteria overrides.
//! * [`analytics`]: measure filters, stage aggregation, shares, timelines and
//!   the event-type vs. alert-criteria sensitivity comparison.
//! * [`flow`]: node/link documents for flow-diagram rendering.
//!
//! File formats, configuration loading and the command line live in the
//! `gridmap` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod flow;
pub mod ingest;
pub mod mapping;
pub mod taxonomy;
mod text;

pub use analytics::{
    aggregate_stage, cause_share, cell_share, measure_filter, sensitivity_compare, timeline,
    top_categories_share, AnalyticsError, MappingContext, Measure, SensitivityReport,
    StageDistribution, TimelineSeries,
};
pub use flow::{emit_flow_data, FlowGraph};
pub use ingest::{
    normalize_record, parse_sentinel, Event, EventDataset, IngestError, NormalizeOptions,
    RawRecord, SentinelField, SentinelValue, Timestamp,
};
pub use mapping::{
    apply_alert_criteria_overrides, map_event, Axis, AxisDistribution, Cause, Cell, Direction,
    Domain, EventMapping, MappingError, MappingProfile, OverrideRule, Scope,
};
pub use taxonomy::{
    canonicalize_event_type, category_counts, EventCategory, MatchKind, TaxonomyError,
    TaxonomyRule, TaxonomyRuleSet,
};
