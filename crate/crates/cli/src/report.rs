//! JSON report schema (versioned; `schema: 1`). Field order is fixed by
//! struct declaration so identical inputs produce byte-identical output.

use filtkit::solution::FilterSolution;
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bad: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub good: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub f_max: Option<usize>,
    pub width: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_ratio: Option<f64>,
    pub threads: usize,
}

#[derive(Serialize)]
pub struct Metrics {
    pub collateral_damage: u64,
    pub unblocked_bad_count: u64,
    pub blocked_bad: u64,
    pub objective: i64,
    pub filters_used: usize,
}

impl From<&FilterSolution> for Metrics {
    fn from(sol: &FilterSolution) -> Self {
        Metrics {
            collateral_damage: sol.collateral_damage,
            unblocked_bad_count: sol.unblocked_bad_count,
            blocked_bad: sol.blocked_bad,
            objective: sol.objective,
            filters_used: sol.filters_used,
        }
    }
}

#[derive(Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub problem: String,
    pub config: ConfigEcho,
    pub filters: Vec<String>,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct RouterReport {
    pub id: String,
    pub filters: Vec<String>,
    pub metrics: Metrics,
}

#[derive(Serialize)]
pub struct DistReport {
    pub schema: u32,
    pub problem: String,
    pub config: ConfigEcho,
    pub routers: Option<Vec<RouterReport>>,
    pub total_collateral_damage: Option<u64>,
    pub dual_bound: f64,
    pub gap: Option<f64>,
    pub rounds_run: usize,
    pub recovery_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct InfeasibleReport {
    pub schema: u32,
    pub error: &'static str,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_blockable: Option<u64>,
}

pub fn filters_to_text(filters: &[filtkit::prefix::Prefix]) -> Vec<String> {
    filters.iter().map(|p| p.to_string()).collect()
}
