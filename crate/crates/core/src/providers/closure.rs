//! Transitive-closure entailment oracle.
//!
//! A hypothesis `X is Y` is entailed when `y` is reachable from `x` in the
//! graph built from the premise sentences. The oracle never reports
//! contradiction; the residual mass is neutral.

use super::{NliProvider, ProviderError};
use crate::logic::NliScores;
use crate::statement::parse_statement;
use crate::structural::ContextGraph;

pub const ENTAILED: f64 = 0.95;
pub const NOT_ENTAILED: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default)]
pub struct ClosureNli;

/// Premise sentences that do not parse are ignored.
pub fn closure_nli(premise: &str, hypothesis: &str) -> Result<NliScores, ProviderError> {
    let h = parse_statement(hypothesis).map_err(|_| {
        ProviderError::InvalidInput(format!("hypothesis is not a statement: {hypothesis:?}"))
    })?;
    let facts: Vec<_> = premise
        .split('.')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .filter_map(|s| parse_statement(s).ok())
        .collect();
    let graph = ContextGraph::from_statements(&facts);
    let e = if graph.reachable(&h.subject, &h.object) {
        ENTAILED
    } else {
        NOT_ENTAILED
    };
    Ok(NliScores {
        entailment: e,
        neutral: 1.0 - e,
        contradiction: 0.0,
    })
}

impl NliProvider for ClosureNli {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliScores, ProviderError> {
        closure_nli(premise, hypothesis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reachability_decides_entailment() {
        let p = "Paris is France. France is Europe.";
        assert_eq!(
            closure_nli(p, "Therefore, Paris is Europe.")
                .unwrap()
                .entailment,
            ENTAILED
        );
        assert_eq!(
            closure_nli(p, "Therefore, Paris is Asia.")
                .unwrap()
                .entailment,
            NOT_ENTAILED
        );
        assert_eq!(
            closure_nli(p, "Europe is Paris.").unwrap().entailment,
            NOT_ENTAILED
        );
        assert_eq!(
            closure_nli(p, "France is France.").unwrap().entailment,
            ENTAILED
        );
        let s = closure_nli(p, "Paris is Asia").unwrap();
        assert!(s.validate().is_ok());
        assert_eq!(s.contradiction, 0.0);
    }

    #[test]
    fn multiword_entities_and_noise() {
        let p = "Violin is string instrument. not a statement. String instrument is musical instrument.";
        let s = closure_nli(p, "Therefore, violin is musical instrument.").unwrap();
        assert_eq!(s.entailment, ENTAILED);
        assert!(closure_nli(p, "gibberish").is_err());
    }
}
