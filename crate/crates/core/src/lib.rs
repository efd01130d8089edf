//! Structural verification gate for chains of `X is Y` reasoning steps.
//!
//! Each junction of a candidate chain is scored by three proxies: graph
//! distance in the context, deviation from the local embedding subspace, and
//! NLI non-entailment. The proxies are variance-normalized, a rejection
//! threshold is calibrated from the costs observed under the context, and
//! the cheapest candidate with no junction above it is selected. If none
//! survives the gate refuses.
//!
//! ```
//! use eidoku_core::{build_chain, parse_statement, run_gate, BuiltinProviders, GateConfig};
//!
//! let providers = BuiltinProviders::standard();
//! let context = vec![
//!     parse_statement("Paris is France.").unwrap(),
//!     parse_statement("France is Europe.").unwrap(),
//! ];
//! let good = build_chain(2, vec![parse_statement("Therefore, Paris is Europe.").unwrap()]).unwrap();
//! let bad = build_chain(2, vec![parse_statement("Therefore, Paris is Asia.").unwrap()]).unwrap();
//! let verdict = run_gate(&context, &[good, bad], &GateConfig::default(), providers.providers()).unwrap();
//! assert_eq!(verdict.selected_index(), Some(0));
//! assert!(!verdict.per_candidate[1].accepted);
//! ```

pub mod benchmark;
pub mod calibration;
pub mod config;
pub mod error;
pub mod gate;
pub mod geometry;
pub mod logic;
pub mod providers;
pub mod rgd;
pub mod serde_inf;
pub mod statement;
pub mod structural;

pub use benchmark::{
    compute_metrics, eval_method, export_trace, parse_methods, parse_range, pearson,
    proxy_correlation, run_bench, sensitivity_sweep, BaselineConfig, BenchReport,
    CorrelationReport, Decision, JunctionRecord, Method, MethodMetrics, SweepCell, SweepGrid,
};
pub use calibration::{
    calibrate_threshold, normalization_weights, percentile, population_std, CalibrationSample,
    NormalizationWeights, Threshold,
};
pub use config::{
    parse_kv, CalibrationConfig, CostCoefficients, GateConfig, GeometryConfig, ResidualMode,
    GATE_KEYS,
};
pub use error::{Error, Result};
pub use gate::{
    context_window, cost_trace, decide, run_gate, score_candidates, score_junction,
    CandidateVerdict, JunctionCost, RawProxies, RejectReason, ScoringFailure, Selection, Verdict,
};
pub use geometry::{fit_subspace, tau_curv, GeomCost, SubspaceModel};
pub use logic::{junction_premise, tau_logic, LogicCost, NliScores};
pub use providers::{
    BuiltinProviders, ClosureNli, EmbeddingProvider, ExternalProvider, Lexicon, LexiconSpec,
    Memoized, NliProvider, ProviderError, ProviderSpec, Providers,
};
pub use rgd::{generate_dataset, GenerationReport, RgdConfig, RgdPools, RgdSample};
pub use statement::{
    build_chain, canonicalize, parse_all, parse_statement, parse_statement_with_id, CandidateChain,
    Junction, Statement,
};
pub use structural::{tau_struct, ContextGraph, StructCost};
