//! Selection report JSON: the per-candidate diagnostics plus the
//! configuration echo, serialized against the schema shipped in
//! `schemas/selection_report.schema.json`.

use copfit_core::{CombineRule, CopulaFamily, EstimatorChoice, PipelineOptions, SelectionReport};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub kernel: String,
    pub bandwidth: f64,
    pub bandwidth_rule_c: f64,
    pub w: f64,
    pub nu0: f64,
    pub b_replicates: usize,
    pub m_imputations: usize,
    pub seed: u64,
    pub estimator: String,
    pub combine: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateJson {
    pub family: String,
    pub alpha_hat: f64,
    pub alpha_hat_clamped: bool,
    pub alpha_star: f64,
    pub omnibus_gap: f64,
    pub l2_distance: f64,
    pub pseudo_p: Option<f64>,
    pub gof_p: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WinnersJson {
    pub omnibus: Option<String>,
    pub l2: Option<String>,
    pub pseudo_p: Option<String>,
    pub gof: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsJson {
    pub dropped_bootstrap_replicates: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub config: ReportConfig,
    pub n: usize,
    pub scenario: String,
    pub tau_hat: f64,
    pub winners: WinnersJson,
    pub candidates: Vec<CandidateJson>,
    pub diagnostics: DiagnosticsJson,
}

fn estimator_name(e: EstimatorChoice) -> &'static str {
    match e {
        EstimatorChoice::Flexible => "flexible",
        EstimatorChoice::ScenarioMatched => "scenario-matched",
    }
}

fn combine_name(c: CombineRule) -> &'static str {
    match c {
        CombineRule::MeanZ => "mean-z",
        CombineRule::Rubin => "rubin",
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_report(
    report: &SelectionReport,
    candidates: &[CopulaFamily],
    options: &PipelineOptions,
    bandwidth_used: f64,
    nu0: f64,
    b_replicates: usize,
    m_imputations: usize,
    seed: u64,
    combine: CombineRule,
) -> ReportJson {
    ReportJson {
        config: ReportConfig {
            kernel: options.kernel_shape.name().to_string(),
            bandwidth: bandwidth_used,
            bandwidth_rule_c: options.bandwidth_c,
            w: options.w,
            nu0,
            b_replicates,
            m_imputations,
            seed,
            estimator: estimator_name(options.estimator).to_string(),
            combine: combine_name(combine).to_string(),
            candidates: candidates.iter().map(|f| f.name().to_string()).collect(),
        },
        n: report.n,
        scenario: report.scenario.to_string(),
        tau_hat: report.tau_hat,
        winners: WinnersJson {
            omnibus: report.winner_omnibus.map(|f| f.name().to_string()),
            l2: report.winner_l2.map(|f| f.name().to_string()),
            pseudo_p: report.winner_pseudo_p.map(|f| f.name().to_string()),
            gof: report.winner_gof.map(|f| f.name().to_string()),
        },
        candidates: report
            .results
            .iter()
            .map(|r| CandidateJson {
                family: r.family.name().to_string(),
                alpha_hat: r.alpha_hat,
                alpha_hat_clamped: r.alpha_hat_clamped,
                alpha_star: r.alpha_star,
                omnibus_gap: r.omnibus_gap,
                l2_distance: r.l2_distance,
                pseudo_p: r.pseudo_p,
                gof_p: r.gof_p,
            })
            .collect(),
        diagnostics: DiagnosticsJson {
            dropped_bootstrap_replicates: report.dropped_bootstrap,
            notes: report.notes.clone(),
        },
    }
}

pub fn to_json_string(report: &ReportJson) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
