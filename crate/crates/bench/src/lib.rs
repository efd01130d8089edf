//! Synthetic inputs shared by the criterion benches and the scaling check.

use eidoku_core::{build_chain, parse_statement_with_id, CandidateChain, Statement};

/// A linear context `node0 is node1`, ..., `node{len-1} is node{len}`.
pub fn linear_context(len: usize) -> Vec<Statement> {
    (0..len)
        .map(|i| {
            parse_statement_with_id(i, &format!("node{i} is node{}", i + 1))
                .expect("fixture parses")
        })
        .collect()
}

/// An `n`-step candidate walking the context one edge per step. Every
/// junction is reachable, so the gate scores all of them.
pub fn walking_candidate(context_len: usize, n: usize) -> CandidateChain {
    let steps = (0..n)
        .map(|k| {
            parse_statement_with_id(context_len + k, &format!("node{k} is node{}", k + 1))
                .expect("fixture parses")
        })
        .collect();
    build_chain(context_len, steps).expect("non-empty")
}

/// Context sized so an `n`-step walking candidate stays inside it.
pub fn scaling_fixture(n: usize) -> (Vec<Statement>, Vec<CandidateChain>) {
    let context = linear_context(n.max(64));
    let chain = walking_candidate(context.len(), n);
    (context, vec![chain])
}
