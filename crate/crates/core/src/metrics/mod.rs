//! Scoring predicted scripts against gold scripts.

mod ged;
mod prf;
mod report;

pub use ged::{
    apply, edit_script, ged, ged_approx, ged_breakdown, ged_labeled, ged_labeled_approx, CostTable,
    EdgeRepMode, EditOp, EditScript, GedConfig, GedResult, LabeledGraph, NodeMatch, OpCounts,
    OpKind, OpPayload, ROOT_LABEL,
};
pub use prf::{edge_prf, match_events, prf_from_edge_sets, Convention, EventMatching, PrfScore};
pub use report::{
    corpus_report, EvalItem, EvalReport, MacroAverages, MetricSelection, OpMeans, ReportConfig,
    ScriptMetrics, COLUMNS, MACRO_ROW,
};
