//! Embedding and NLI providers.
//!
//! The gate only sees the two traits below. Builtin providers are the
//! deterministic [`Lexicon`] embedder and the [`ClosureNli`] oracle; external
//! model services attach through the line-delimited protocol in [`wire`].

mod closure;
mod lexicon;
pub mod wire;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

use crate::logic::NliScores;

pub use closure::{closure_nli, ClosureNli, ENTAILED, NOT_ENTAILED};
pub use lexicon::{
    cosine, lexicon_embed, Category, Lexicon, LexiconSpec, BUILTIN_POOLS, DEFAULT_DIM,
    DEFAULT_LEXICON_SEED, DEFAULT_PERTURB_SCALE,
};
pub use wire::ExternalProvider;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProviderError {
    #[error("provider timed out after {0} ms")]
    Timeout(u128),

    #[error("provider protocol error: {0}")]
    Protocol(String),

    #[error("provider dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("provider rejected input: {0}")]
    InvalidInput(String),

    #[error("provider unavailable: {0}")]
    Unavailable(String),
}

pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    /// One vector of length [`dim`](Self::dim) per input text.
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError>;

    fn embed_one(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut v = self.embed(&[text])?;
        v.pop()
            .ok_or_else(|| ProviderError::Protocol("empty embedding batch".into()))
    }
}

pub trait NliProvider: Send + Sync {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliScores, ProviderError>;
}

/// Borrowed pair of providers handed to the gate and the harness.
#[derive(Clone, Copy)]
pub struct Providers<'a> {
    pub embedder: &'a dyn EmbeddingProvider,
    pub nli: &'a dyn NliProvider,
}

impl<'a> Providers<'a> {
    pub fn new(embedder: &'a dyn EmbeddingProvider, nli: &'a dyn NliProvider) -> Self {
        Self { embedder, nli }
    }
}

/// Lexicon embedder plus closure oracle.
pub struct BuiltinProviders {
    pub lexicon: Lexicon,
    pub nli: ClosureNli,
}

impl BuiltinProviders {
    pub fn new(lexicon: Lexicon) -> Self {
        Self {
            lexicon,
            nli: ClosureNli,
        }
    }

    pub fn standard() -> Self {
        Self::new(Lexicon::builtin())
    }

    pub fn providers(&self) -> Providers<'_> {
        Providers::new(&self.lexicon, &self.nli)
    }
}

/// Per-run cache keyed by exact text.
pub struct Memoized<P> {
    inner: P,
    cache: Mutex<HashMap<String, Vec<f64>>>,
}

impl<P: EmbeddingProvider> Memoized<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for Memoized<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let missing: Vec<&str> = {
            let cache = self.cache.lock().expect("cache poisoned");
            let mut m: Vec<&str> = texts
                .iter()
                .copied()
                .filter(|t| !cache.contains_key(*t))
                .collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let fresh = self.inner.embed(&missing)?;
            let mut cache = self.cache.lock().expect("cache poisoned");
            for (t, v) in missing.iter().zip(fresh) {
                cache.insert((*t).to_string(), v);
            }
        }
        let cache = self.cache.lock().expect("cache poisoned");
        Ok(texts.iter().map(|t| cache[*t].clone()).collect())
    }
}

impl<P: NliProvider> NliProvider for Memoized<P> {
    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliScores, ProviderError> {
        self.inner.nli(premise, hypothesis)
    }
}

/// Provider selection as written in `EIDOKU_PROVIDER`:
/// `builtin`, `command:<program and args>` or `tcp:<host:port>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProviderSpec {
    Builtin,
    Command(String),
    Tcp(String),
}

impl FromStr for ProviderSpec {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("builtin") {
            return Ok(Self::Builtin);
        }
        let bad = || ProviderError::InvalidInput(format!("unrecognized provider spec {s:?}"));
        match s.split_once(':') {
            Some(("command", rest)) if !rest.trim().is_empty() => {
                Ok(Self::Command(rest.trim().to_string()))
            }
            Some(("tcp", rest)) if !rest.trim().is_empty() => {
                Ok(Self::Tcp(rest.trim().to_string()))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin => f.write_str("builtin"),
            Self::Command(c) => write!(f, "command:{c}"),
            Self::Tcp(a) => write!(f, "tcp:{a}"),
        }
    }
}
