//! Deterministic category-lexicon embedder.
//!
//! Every category gets an orthonormal base direction. A term's vector is its
//! category base plus a small seeded perturbation kept orthogonal to all base
//! directions, so terms in one category are nearly parallel and terms in
//! different categories are nearly orthogonal. A sentence embeds as the
//! normalized mean of the term vectors it mentions.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{EmbeddingProvider, ProviderError};
use crate::error::{Error, Result};

pub const BUILTIN_POOLS: &str = include_str!("../../data/pools.tsv");
pub const DEFAULT_DIM: usize = 32;
pub const DEFAULT_PERTURB_SCALE: f64 = 0.1;
pub const DEFAULT_LEXICON_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexiconSpec {
    pub categories: Vec<Category>,
    pub dim: usize,
    pub perturb_scale: f64,
    pub seed: u64,
}

impl LexiconSpec {
    /// Parses `term<TAB>category` lines. Blank lines and `#` comments are skipped;
    /// categories keep their order of first appearance.
    pub fn from_pool_tsv(text: &str) -> Result<Self> {
        let mut categories: Vec<Category> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut terms_seen: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::PoolFormat {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (term, cat) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected term<TAB>category"))?;
            let term = normalize_text(term);
            let cat = cat.trim();
            if term.is_empty() || cat.is_empty() {
                return Err(bad("empty field"));
            }
            if terms_seen.insert(term.clone(), i + 1).is_some() {
                return Err(bad(&format!("duplicate term {term:?}")));
            }
            let idx = *seen.entry(cat.to_string()).or_insert_with(|| {
                categories.push(Category {
                    name: cat.to_string(),
                    terms: Vec::new(),
                });
                categories.len() - 1
            });
            categories[idx].terms.push(term);
        }
        Ok(Self {
            categories,
            dim: DEFAULT_DIM,
            perturb_scale: DEFAULT_PERTURB_SCALE,
            seed: DEFAULT_LEXICON_SEED,
        })
    }

    pub fn builtin() -> Self {
        Self::from_pool_tsv(BUILTIN_POOLS).expect("builtin pools are well formed")
    }
}

#[derive(Clone, Debug)]
pub struct Lexicon {
    spec: LexiconSpec,
    vectors: HashMap<String, Vec<f64>>,
    category_of: HashMap<String, usize>,
    max_words: usize,
}

impl Lexicon {
    pub fn new(spec: LexiconSpec) -> Result<Self> {
        let n = spec.categories.len();
        if spec.dim <= n {
            return Err(Error::Config(format!(
                "lexicon dimension {} must exceed the number of categories {n}",
                spec.dim
            )));
        }
        if !(spec.perturb_scale.is_finite() && spec.perturb_scale >= 0.0) {
            return Err(Error::Config(
                "perturb_scale must be finite and non-negative".into(),
            ));
        }
        let bases = orthonormal_bases(n, spec.dim, spec.seed);
        let mut vectors = HashMap::new();
        let mut category_of = HashMap::new();
        let mut max_words = 1;
        for (ci, cat) in spec.categories.iter().enumerate() {
            for term in &cat.terms {
                let mut p = seeded_gaussian(spec.seed, "term:", term, spec.dim);
                for b in &bases {
                    let d = dot(&p, b);
                    p.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                }
                let norm = dot(&p, &p).sqrt();
                let scale = if norm > 0.0 {
                    spec.perturb_scale / norm
                } else {
                    0.0
                };
                let mut v: Vec<f64> = bases[ci]
                    .iter()
                    .zip(&p)
                    .map(|(b, x)| b + scale * x)
                    .collect();
                normalize(&mut v);
                max_words = max_words.max(term.split(' ').count());
                vectors.insert(term.clone(), v);
                category_of.insert(term.clone(), ci);
            }
        }
        Ok(Self {
            spec,
            vectors,
            category_of,
            max_words,
        })
    }

    pub fn builtin() -> Self {
        Self::new(LexiconSpec::builtin()).expect("builtin lexicon is valid")
    }

    pub fn spec(&self) -> &LexiconSpec {
        &self.spec
    }

    pub fn categories(&self) -> &[Category] {
        &self.spec.categories
    }

    pub fn term_vector(&self, term: &str) -> Option<&[f64]> {
        self.vectors.get(&normalize_text(term)).map(Vec::as_slice)
    }

    pub fn category_of(&self, term: &str) -> Option<&Category> {
        self.category_of
            .get(&normalize_text(term))
            .map(|&i| &self.spec.categories[i])
    }

    pub fn contains(&self, term: &str) -> bool {
        self.vectors.contains_key(&normalize_text(term))
    }

    /// Known terms in reading order, preferring the longest multiword match.
    pub fn find_terms(&self, text: &str) -> Vec<String> {
        let norm = normalize_text(text);
        let words: Vec<&str> = norm.split(' ').filter(|w| !w.is_empty()).collect();
        let mut found = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_words.min(words.len() - i))
                .rev()
                .find_map(|len| {
                    let cand = words[i..i + len].join(" ");
                    self.vectors.contains_key(&cand).then_some((cand, len))
                });
            match longest {
                Some((term, len)) => {
                    found.push(term);
                    i += len;
                }
                None => i += 1,
            }
        }
        found
    }

    pub fn embed_text(&self, text: &str) -> Vec<f64> {
        let terms = self.find_terms(text);
        if terms.is_empty() {
            let mut v = seeded_gaussian(
                self.spec.seed,
                "text:",
                &normalize_text(text),
                self.spec.dim,
            );
            normalize(&mut v);
            return v;
        }
        let mut acc = vec![0.0; self.spec.dim];
        for t in &terms {
            acc.iter_mut()
                .zip(&self.vectors[t])
                .for_each(|(a, x)| *a += x);
        }
        normalize(&mut acc);
        acc
    }
}

impl EmbeddingProvider for Lexicon {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn embed(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }
}

pub fn lexicon_embed(lexicon: &Lexicon, text: &str) -> Vec<f64> {
    lexicon.embed_text(text)
}

/// Cosine similarity; zero when either vector vanishes.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Lowercase; every run of non-alphanumeric characters becomes one space.
fn normalize_text(text: &str) -> String {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn seeded_gaussian(seed: u64, domain: &str, key: &str, dim: usize) -> Vec<f64> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(domain.as_bytes());
    h.update(key.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn orthonormal_bases(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bases: Vec<Vec<f64>> = Vec::with_capacity(n);
    while bases.len() < n {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &bases {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = dot(&v, &v).sqrt();
        // a near-dependent draw is discarded and redrawn
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            bases.push(v);
        }
    }
    bases
}
