//! Logical cost from entailment/contradiction probabilities.

use serde::{Deserialize, Serialize};

use crate::config::CostCoefficients;
use crate::error::{Error, Result};
use crate::statement::{CandidateChain, Junction, Statement};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NliScores {
    pub entailment: f64,
    pub neutral: f64,
    pub contradiction: f64,
}

impl NliScores {
    pub fn new(entailment: f64, neutral: f64, contradiction: f64) -> Result<Self> {
        let s = Self {
            entailment,
            neutral,
            contradiction,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.entailment, self.neutral, self.contradiction];
        let in_range = parts
            .iter()
            .all(|p| p.is_finite() && (0.0..=1.0).contains(p));
        let sum: f64 = parts.iter().sum();
        if in_range && (sum - 1.0).abs() <= SUM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::InvalidDistribution {
                entailment: self.entailment,
                neutral: self.neutral,
                contradiction: self.contradiction,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicCost {
    pub cost: f64,
}

/// `alpha_logic * (1 - e) + beta_logic * c`.
pub fn tau_logic(scores: &NliScores, coeff: &CostCoefficients) -> Result<LogicCost> {
    scores.validate()?;
    Ok(LogicCost {
        cost: coeff.alpha_logic * (1.0 - scores.entailment)
            + coeff.beta_logic * scores.contradiction,
    })
}

/// Trim and make sure the sentence ends with a period.
pub fn as_sentence(text: &str) -> String {
    let t = text.trim();
    if t.ends_with('.') {
        t.to_string()
    } else {
        format!("{t}.")
    }
}

pub fn join_sentences<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> String {
    texts
        .into_iter()
        .map(as_sentence)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Premise and hypothesis texts for one junction.
///
/// The anchor junction is premised on the windowed context alone; an internal
/// junction `(i, i+1)` on the window followed by step `i`.
pub fn junction_premise(
    window: &[Statement],
    chain: &CandidateChain,
    junction: Junction,
) -> (String, String) {
    let mut parts: Vec<&str> = window.iter().map(|s| s.text.as_str()).collect();
    if !junction.is_anchor() {
        parts.push(chain.steps[junction.from as usize].text.as_str());
    }
    (
        join_sentences(parts),
        as_sentence(&chain.steps[junction.to].text),
    )
}
