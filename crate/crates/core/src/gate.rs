//! The verification gate: score every junction, calibrate a threshold for the
//! context, reject, then select the cheapest surviving candidate or refuse.
//!
//! Scoring and decision are separate passes. Normalization weights and the
//! threshold depend on the costs of every junction of every candidate, so
//! nothing can be decided until all raw proxies are in.

use serde::{Deserialize, Serialize};

use crate::calibration::{
    calibrate_threshold, normalization_weights, CalibrationSample, NormalizationWeights, Threshold,
};
use crate::config::GateConfig;
use crate::error::{Error, Result};
use crate::geometry::{fit_subspace, tau_curv, SubspaceModel};
use crate::logic::{junction_premise, tau_logic, NliScores};
use crate::providers::Providers;
use crate::statement::{CandidateChain, Junction, Statement};
use crate::structural::{tau_struct, ContextGraph};

/// The three unnormalized proxies of one junction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawProxies {
    pub junction: Junction,
    pub distance: Option<usize>,
    #[serde(with = "crate::serde_inf")]
    pub tau_struct: f64,
    pub residual: f64,
    pub tau_curv: f64,
    pub nli: NliScores,
    pub tau_logic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionCost {
    pub junction: Junction,
    #[serde(with = "crate::serde_inf")]
    pub tau_struct: f64,
    pub tau_curv: f64,
    pub tau_logic: f64,
    #[serde(with = "crate::serde_inf")]
    pub normalized_total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectReason {
    Barrier,
    Threshold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub accepted: bool,
    /// Sum of normalized junction totals; infinite if any junction is a barrier.
    #[serde(with = "crate::serde_inf")]
    pub total_j: f64,
    pub junction_costs: Vec<JunctionCost>,
    pub reject_reason: Option<RejectReason>,
    /// Failure that forced a fail-safe rejection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ScoringFailure>,
}

/// Why a candidate could not be scored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringFailure {
    /// The embedding or NLI provider failed, as opposed to the input being unusable.
    pub provider: bool,
    pub message: String,
}

impl ScoringFailure {
    fn from_error(e: &Error, prefix: Option<String>) -> Self {
        let message = match prefix {
            Some(p) => format!("{p}: {e}"),
            None => e.to_string(),
        };
        Self {
            provider: matches!(e, Error::Provider(_)),
            message,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Candidate(usize),
    NullRefusal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub per_candidate: Vec<CandidateVerdict>,
    pub tau_c: Threshold,
    pub weights: NormalizationWeights,
    pub selected: Selection,
}

impl Verdict {
    pub fn selected_index(&self) -> Option<usize> {
        match self.selected {
            Selection::Candidate(i) => Some(i),
            Selection::NullRefusal => None,
        }
    }

    pub fn is_refusal(&self) -> bool {
        self.selected == Selection::NullRefusal
    }
}

/// The last `min(w, m)` context statements, in order.
pub fn context_window(context: &[Statement], w: usize) -> &[Statement] {
    &context[context.len().saturating_sub(w)..]
}

/// Raw proxies for one junction. `step_embedding` is the embedding of the
/// junction's hypothesis step.
#[allow(clippy::too_many_arguments)]
pub fn score_junction(
    graph: &ContextGraph,
    subspace: &SubspaceModel,
    window: &[Statement],
    chain: &CandidateChain,
    junction: Junction,
    step_embedding: &[f64],
    cfg: &GateConfig,
    providers: Providers<'_>,
) -> Result<RawProxies> {
    let step = &chain.steps[junction.to];
    let s = tau_struct(graph, step, &cfg.coefficients);
    let g = tau_curv(
        subspace,
        step_embedding,
        &cfg.coefficients,
        cfg.geometry.residual_mode,
    )?;
    let (premise, hypothesis) = junction_premise(window, chain, junction);
    let nli = providers.nli.nli(&premise, &hypothesis)?;
    let l = tau_logic(&nli, &cfg.coefficients)?;
    Ok(RawProxies {
        junction,
        distance: s.distance,
        tau_struct: s.cost,
        residual: g.selected_residual(),
        tau_curv: g.cost,
        nli,
        tau_logic: l.cost,
    })
}

/// Outcome of scoring one candidate.
pub type CandidateScores = std::result::Result<Vec<RawProxies>, ScoringFailure>;

/// First pass: raw proxies for every junction of every candidate.
pub fn score_candidates(
    context: &[Statement],
    candidates: &[CandidateChain],
    cfg: &GateConfig,
    providers: Providers<'_>,
) -> Vec<CandidateScores> {
    let graph = ContextGraph::from_statements(context);
    let window = context_window(context, cfg.window_w);
    let rendered: Vec<String> = window.iter().map(Statement::render).collect();
    let refs: Vec<&str> = rendered.iter().map(String::as_str).collect();
    let subspace = providers
        .embedder
        .embed(&refs)
        .map_err(Error::from)
        .and_then(|rows| fit_subspace(&rows, &cfg.geometry));
    let subspace = match subspace {
        Ok(s) => s,
        Err(e) => {
            return vec![
                Err(ScoringFailure::from_error(
                    &e,
                    Some("context window".into())
                ));
                candidates.len()
            ]
        }
    };

    candidates
        .iter()
        .map(|chain| {
            let steps: Vec<String> = chain.steps.iter().map(Statement::render).collect();
            let refs: Vec<&str> = steps.iter().map(String::as_str).collect();
            let embeddings = providers.embedder.embed(&refs).map_err(|e| {
                ScoringFailure::from_error(&Error::from(e), Some("step embedding".into()))
            })?;
            if embeddings.len() != chain.steps.len() {
                return Err(ScoringFailure {
                    provider: true,
                    message: format!(
                        "embedder returned {} vectors for {} steps",
                        embeddings.len(),
                        chain.steps.len()
                    ),
                });
            }
            chain
                .junctions
                .iter()
                .map(|&j| {
                    score_junction(
                        &graph,
                        &subspace,
                        window,
                        chain,
                        j,
                        &embeddings[j.to],
                        cfg,
                        providers,
                    )
                    .map_err(|e| ScoringFailure::from_error(&e, Some(format!("junction {j}"))))
                })
                .collect()
        })
        .collect()
}

/// Sum in junction order. Shared by `total_j` and [`cost_trace`] so the two agree exactly.
fn prefix_sums(costs: &[JunctionCost]) -> Vec<f64> {
    costs
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c.normalized_total;
            Some(*acc)
        })
        .collect()
}

/// Second pass: weights, threshold, rejection and selection.
pub fn decide(scores: &[CandidateScores], cfg: &GateConfig) -> Result<Verdict> {
    if scores.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut per_proxy: [Vec<f64>; 3] = Default::default();
    for raw in scores.iter().flatten().flatten() {
        if raw.tau_struct.is_finite() {
            per_proxy[0].push(raw.tau_struct);
        }
        per_proxy[1].push(raw.tau_curv);
        per_proxy[2].push(raw.tau_logic);
    }
    let weights = normalization_weights(&per_proxy, cfg.sigma_floor);

    let normalized: Vec<std::result::Result<Vec<JunctionCost>, &ScoringFailure>> = scores
        .iter()
        .map(|s| {
            s.as_ref().map(|raws| {
                raws.iter()
                    .map(|r| JunctionCost {
                        junction: r.junction,
                        tau_struct: r.tau_struct,
                        tau_curv: r.tau_curv,
                        tau_logic: r.tau_logic,
                        normalized_total: weights.combine(r.tau_struct, r.tau_curv, r.tau_logic),
                    })
                    .collect()
            })
        })
        .collect();

    let mut sample = CalibrationSample {
        per_proxy_values: per_proxy,
        ..Default::default()
    };
    for costs in normalized.iter().flatten() {
        for c in costs {
            sample.push_total(c.normalized_total);
        }
    }
    let tau_c = calibrate_threshold(&sample, &cfg.calibration);

    let per_candidate: Vec<CandidateVerdict> = normalized
        .into_iter()
        .map(|n| match n {
            Err(failure) => CandidateVerdict {
                accepted: false,
                total_j: f64::INFINITY,
                junction_costs: Vec::new(),
                reject_reason: Some(RejectReason::Barrier),
                error: Some(failure.clone()),
            },
            Ok(costs) => {
                let total_j = prefix_sums(&costs).last().copied().unwrap_or(f64::INFINITY);
                let reject_reason =
                    if costs.is_empty() || costs.iter().any(|c| c.normalized_total.is_infinite()) {
                        Some(RejectReason::Barrier)
                    } else if costs.iter().any(|c| c.normalized_total > tau_c.clamped) {
                        Some(RejectReason::Threshold)
                    } else {
                        None
                    };
                CandidateVerdict {
                    accepted: reject_reason.is_none(),
                    total_j,
                    junction_costs: costs,
                    reject_reason,
                    error: None,
                }
            }
        })
        .collect();

    let selected = per_candidate
        .iter()
        .enumerate()
        .filter(|(_, c)| c.accepted)
        .fold(None::<(usize, f64)>, |best, (i, c)| match best {
            Some((_, b)) if b <= c.total_j => best,
            _ => Some((i, c.total_j)),
        })
        .map_or(Selection::NullRefusal, |(i, _)| Selection::Candidate(i));

    Ok(Verdict {
        per_candidate,
        tau_c,
        weights,
        selected,
    })
}

pub fn run_gate(
    context: &[Statement],
    candidates: &[CandidateChain],
    cfg: &GateConfig,
    providers: Providers<'_>,
) -> Result<Verdict> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let scores = score_candidates(context, candidates, cfg, providers);
    decide(&scores, cfg)
}

/// Cumulative normalized cost `T_k` after each junction of one candidate.
pub fn cost_trace(verdict: &Verdict, candidate: usize) -> Result<Vec<f64>> {
    let c = verdict
        .per_candidate
        .get(candidate)
        .ok_or(Error::IndexOutOfRange {
            index: candidate,
            len: verdict.per_candidate.len(),
        })?;
    Ok(prefix_sums(&c.junction_costs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::NliScores;
    use crate::providers::BuiltinProviders;
    use crate::statement::{build_chain, parse_statement};
    use proptest::prelude::*;
    use std::sync::LazyLock;

    static BUILTIN: LazyLock<BuiltinProviders> = LazyLock::new(BuiltinProviders::standard);

    fn stmts(lines: &[&str]) -> Vec<Statement> {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_statement(l).unwrap().with_id(i))
            .collect()
    }

    fn chain(lines: &[&str]) -> CandidateChain {
        build_chain(0, stmts(lines)).unwrap()
    }

    #[test]
    fn window_keeps_most_recent() {
        let ctx = stmts(&["a is b", "b is c", "c is d"]);
        assert_eq!(context_window(&ctx, 10).len(), 3);
        let long: Vec<Statement> = (0..15)
            .map(|i| parse_statement(&format!("n{i} is n{}", i + 1)).unwrap())
            .collect();
        let w = context_window(&long, 10);
        assert_eq!(w.len(), 10);
        assert_eq!(w[0].subject, "n5");
        assert_eq!(w[9].subject, "n14");
    }

    #[test]
    fn true_target_selected_false_rejected() {
        let ctx = stmts(&["Paris is France.", "France is Europe."]);
        let cands = vec![
            chain(&["Therefore, Paris is Europe."]),
            chain(&["Therefore, Paris is Asia."]),
        ];
        let v = run_gate(&ctx, &cands, &GateConfig::default(), BUILTIN.providers()).unwrap();
        assert!(v.per_candidate[0].accepted);
        assert_eq!(
            v.per_candidate[1].reject_reason,
            Some(RejectReason::Barrier)
        );
        assert!(v.per_candidate[1].total_j.is_infinite());
        assert_eq!(v.selected, Selection::Candidate(0));
        assert!((v.per_candidate[0].junction_costs[0].tau_struct - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn all_barriers_refuse() {
        let ctx = stmts(&["Paris is France.", "France is Europe."]);
        let cands = vec![chain(&["Paris is Asia."]), chain(&["Europe is Paris."])];
        let v = run_gate(&ctx, &cands, &GateConfig::default(), BUILTIN.providers()).unwrap();
        assert!(v.is_refusal());
        assert!(v.per_candidate.iter().all(|c| !c.accepted));
        assert_eq!(v.tau_c.clamped, GateConfig::default().calibration.tau_min);
    }

    #[test]
    fn repeated_context_statement_is_self_entailed() {
        let ctx = stmts(&["Dog is mammal.", "Mammal is vertebrate."]);
        let v = run_gate(
            &ctx,
            &[chain(&["Dog is mammal."])],
            &GateConfig::default(),
            BUILTIN.providers(),
        )
        .unwrap();
        let raw = v.per_candidate[0].junction_costs[0];
        assert!((raw.tau_logic - 0.5 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn no_candidates_is_an_error() {
        let ctx = stmts(&["a is b", "b is c"]);
        assert!(matches!(
            run_gate(&ctx, &[], &GateConfig::default(), BUILTIN.providers()),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn degenerate_window_rejects_fail_safe() {
        let ctx = stmts(&["a is b"]);
        let v = run_gate(
            &ctx,
            &[chain(&["a is b"])],
            &GateConfig::default(),
            BUILTIN.providers(),
        )
        .unwrap();
        assert!(v.is_refusal());
        let err = v.per_candidate[0].error.as_ref().unwrap();
        assert!(err.message.contains("at least 2"));
        assert!(!err.provider);
    }

    fn jc(total: f64) -> JunctionCost {
        JunctionCost {
            junction: Junction { from: -1, to: 0 },
            tau_struct: 0.0,
            tau_curv: 0.0,
            tau_logic: 0.0,
            normalized_total: total,
        }
    }

    fn verdict_with(costs: Vec<JunctionCost>) -> Verdict {
        Verdict {
            per_candidate: vec![CandidateVerdict {
                accepted: false,
                total_j: 0.0,
                junction_costs: costs,
                reject_reason: None,
                error: None,
            }],
            tau_c: Threshold {
                raw: 0.0,
                clamped: 0.05,
            },
            weights: NormalizationWeights::unit(),
            selected: Selection::NullRefusal,
        }
    }

    #[test]
    fn trace_prefix_sums() {
        let v = verdict_with(vec![jc(1.2), jc(1.2), jc(0.6)]);
        let t = cost_trace(&v, 0).unwrap();
        assert_eq!(t.len(), 3);
        for (a, b) in t.iter().zip([1.2, 2.4, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = verdict_with(vec![jc(0.1), jc(f64::INFINITY), jc(0.2)]);
        let t = cost_trace(&v, 0).unwrap();
        assert_eq!(t[0], 0.1);
        assert!(t[1].is_infinite() && t[2].is_infinite());
        assert!(matches!(
            cost_trace(&v, 1),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn verdict_json_writes_inf() {
        let ctx = stmts(&["Paris is France.", "France is Europe."]);
        let v = run_gate(
            &ctx,
            &[chain(&["Paris is Asia."])],
            &GateConfig::default(),
            BUILTIN.providers(),
        )
        .unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains(r#""total_j":"inf""#));
        assert!(s.contains(r#""selected":"null_refusal""#));
        let back: Verdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    fn raw(j: usize, s: f64, c: f64, l: f64) -> RawProxies {
        RawProxies {
            junction: Junction {
                from: j as isize - 1,
                to: j,
            },
            distance: s.is_finite().then_some(0),
            tau_struct: s,
            residual: 0.0,
            tau_curv: c,
            nli: NliScores {
                entailment: 1.0,
                neutral: 0.0,
                contradiction: 0.0,
            },
            tau_logic: l,
        }
    }

    fn batch() -> impl Strategy<Value = Vec<Vec<(f64, f64, f64, bool)>>> {
        let junction = (
            0.01f64..4.0,
            0.01f64..4.0,
            0.01f64..2.0,
            prop::bool::weighted(0.15),
        );
        prop::collection::vec(prop::collection::vec(junction, 1..4), 2..6)
    }

    fn to_scores(b: &[Vec<(f64, f64, f64, bool)>], scale: f64) -> Vec<CandidateScores> {
        b.iter()
            .map(|js| {
                Ok(js
                    .iter()
                    .enumerate()
                    .map(|(j, &(s, c, l, barrier))| {
                        raw(
                            j,
                            if barrier { f64::INFINITY } else { s * scale },
                            c * scale,
                            l * scale,
                        )
                    })
                    .collect())
            })
            .collect()
    }

    fn has_spread(scores: &[CandidateScores]) -> bool {
        let mut v: [Vec<f64>; 3] = Default::default();
        for r in scores.iter().flatten().flatten() {
            if r.tau_struct.is_finite() {
                v[0].push(r.tau_struct);
            }
            v[1].push(r.tau_curv);
            v[2].push(r.tau_logic);
        }
        v.iter()
            .all(|x| crate::calibration::population_std(x).is_some_and(|s| s > 1e-6))
    }

    proptest! {
        #[test]
        fn decisions_invariant_to_uniform_rescaling(b in batch(), scale in 0.01f64..100.0) {
            let cfg = GateConfig { sigma_floor: 1e-12, ..Default::default() };
            let base = to_scores(&b, 1.0);
            prop_assume!(has_spread(&base));
            let v0 = decide(&base, &cfg).unwrap();
            let v1 = decide(&to_scores(&b, scale), &cfg).unwrap();
            // compare decisions away from knife-edge ties
            let margin_ok = v0.per_candidate.iter().flat_map(|c| &c.junction_costs)
                .all(|j| (j.normalized_total - v0.tau_c.clamped).abs() > 1e-6);
            prop_assume!(margin_ok);
            let acc0: Vec<bool> = v0.per_candidate.iter().map(|c| c.accepted).collect();
            let acc1: Vec<bool> = v1.per_candidate.iter().map(|c| c.accepted).collect();
            prop_assert_eq!(acc0, acc1);
            prop_assert_eq!(v0.selected, v1.selected);
        }

        #[test]
        fn barriers_never_selected_and_j_additive(b in batch(), p in 50.0f64..99.0, delta in 0.0f64..0.5) {
            let mut cfg = GateConfig::default();
            cfg.calibration.percentile_p = p;
            cfg.calibration.delta_margin = delta;
            let v = decide(&to_scores(&b, 1.0), &cfg).unwrap();
            for (i, c) in v.per_candidate.iter().enumerate() {
                let barrier = c.junction_costs.iter().any(|j| j.normalized_total.is_infinite());
                if barrier {
                    prop_assert!(!c.accepted);
                    prop_assert_ne!(v.selected, Selection::Candidate(i));
                }
                prop_assert_eq!(
                    c.accepted,
                    c.junction_costs.iter().all(|j| j.normalized_total.is_finite() && j.normalized_total <= v.tau_c.clamped)
                );
                let trace = cost_trace(&v, i).unwrap();
                prop_assert_eq!(trace.last().copied().unwrap().to_bits(), c.total_j.to_bits());
            }
            if let Selection::Candidate(s) = v.selected {
                for c in v.per_candidate.iter().filter(|c| c.accepted) {
                    prop_assert!(v.per_candidate[s].total_j <= c.total_j);
                }
            } else {
                prop_assert!(v.per_candidate.iter().all(|c| !c.accepted));
            }
        }

        #[test]
        fn candidate_order_does_not_change_outcomes(b in batch(), rot in 0usize..6) {
            let cfg = GateConfig::default();
            let scores = to_scores(&b, 1.0);
            let n = scores.len();
            let mut rotated = scores.clone();
            rotated.rotate_left(rot % n);
            let v0 = decide(&scores, &cfg).unwrap();
            let v1 = decide(&rotated, &cfg).unwrap();
            prop_assert!((v0.tau_c.clamped - v1.tau_c.clamped).abs() < 1e-12);
            for i in 0..n {
                let j = (i + n - rot % n) % n;
                prop_assert_eq!(v0.per_candidate[i].accepted, v1.per_candidate[j].accepted);
            }
        }
    }
}
