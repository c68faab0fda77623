//! Node/link documents for flow (Sankey-style) diagrams.
//!
//! Cause nodes (`cause:human`, `cause:nature`) feed the scope and direction
//! cells; a single `onset` node feeds the domain cells. Each link carries the
//! mass of exactly one stage-distribution cell.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::analytics::{AnalyticsError, StageDistribution};
use crate::mapping::{Axis, Cell};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowNode {
    pub id: String,
    pub label: String,
    /// `"source"` for cause/onset nodes, otherwise the axis name.
    pub stage: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowLink {
    pub source: String,
    pub target: String,
    pub axis: Axis,
    pub cell: Cell,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowGraph {
    pub measure: crate::analytics::Measure,
    pub nodes: Vec<FlowNode>,
    pub links: Vec<FlowLink>,
}

fn source_node(cell: Cell) -> FlowNode {
    match cell.cause() {
        Some(cause) => FlowNode {
            id: format!("cause:{}", cause.name()),
            label: String::from(cause.name()),
            stage: String::from("source"),
        },
        None => FlowNode {
            id: String::from("onset"),
            label: String::from("onset"),
            stage: String::from("source"),
        },
    }
}

fn target_node(cell: Cell) -> FlowNode {
    let axis = cell.axis().name();
    FlowNode {
        id: format!("{axis}:{}", cell.value_name()),
        label: String::from(cell.value_name()),
        stage: String::from(axis),
    }
}

/// Builds one link per nonzero cell. Nodes appear in order of first use and
/// are never duplicated.
pub fn emit_flow_data(distributions: &[StageDistribution]) -> Result<FlowGraph, AnalyticsError> {
    let first = distributions.first().ok_or(AnalyticsError::EmptyDistribution)?;
    let measure = first.measure();
    let mut seen_axes = Vec::new();
    for dist in distributions {
        if dist.event_count() == 0 {
            return Err(AnalyticsError::EmptyDistribution);
        }
        if dist.measure() != measure {
            return Err(AnalyticsError::MeasureMismatch {
                expected: measure,
                found: dist.measure(),
            });
        }
        if seen_axes.contains(&dist.axis()) {
            return Err(AnalyticsError::DuplicateAxis(dist.axis()));
        }
        seen_axes.push(dist.axis());
    }

    let mut nodes: Vec<FlowNode> = Vec::new();
    let mut links = Vec::new();
    let push_node = |node: FlowNode, nodes: &mut Vec<FlowNode>| {
        if !nodes.iter().any(|n| n.id == node.id) {
            nodes.push(node);
        }
    };
    for dist in distributions {
        for (cell, mass) in dist.cells() {
            if mass == 0.0 {
                continue;
            }
            let (source, target) = (source_node(cell), target_node(cell));
            links.push(FlowLink {
                source: source.id.clone(),
                target: target.id.clone(),
                axis: dist.axis(),
                cell,
                value: mass,
            });
            push_node(source, &mut nodes);
            push_node(target, &mut nodes);
        }
    }
    Ok(FlowGraph {
        measure,
        nodes,
        links,
    })
}
