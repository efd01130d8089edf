//! Reasoning Gap Dataset generator.
//!
//! Each sample is a two-hop context `A is B. B is C.` with the entailed
//! target `A is C` and a "smooth falsehood" `A is D`, where `D` is the
//! category-mate of `C` most similar to it that the context does not entail.
//! When no distractor passes the similarity and entailment filters, the
//! filters relax one backoff level at a time.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::providers::{cosine, Lexicon, Providers};
use crate::statement::parse_statement;
use crate::structural::ContextGraph;

pub const BUILTIN_CHAINS: &str = include_str!("../data/chains.tsv");

/// Draw budget per requested sample before generation is declared stalled.
pub const DRAWS_PER_SAMPLE: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackoffSchedule {
    pub theta_step: f64,
    pub theta_floor: f64,
    pub epsilon_step: f64,
    pub epsilon_cap: f64,
}

impl Default for BackoffSchedule {
    fn default() -> Self {
        Self {
            theta_step: 0.05,
            theta_floor: 0.4,
            epsilon_step: 0.1,
            epsilon_cap: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgdConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub theta: f64,
    pub epsilon_nli: f64,
    pub backoff: BackoffSchedule,
    pub reuse_limit: usize,
}

impl Default for RgdConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            seed: 42,
            theta: 0.7,
            epsilon_nli: 0.2,
            backoff: BackoffSchedule::default(),
            reuse_limit: 5,
        }
    }
}

fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

impl RgdConfig {
    pub fn validate(&self) -> Result<()> {
        let b = &self.backoff;
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if !(0.0 < b.theta_floor && b.theta_floor <= self.theta && self.theta < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < theta_floor <= theta < 1, got floor {} and theta {}",
                b.theta_floor, self.theta
            )));
        }
        if !(0.0 < self.epsilon_nli && self.epsilon_nli <= b.epsilon_cap && b.epsilon_cap < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < epsilon <= epsilon_cap < 1, got epsilon {} and cap {}",
                self.epsilon_nli, b.epsilon_cap
            )));
        }
        if !(b.theta_step > 0.0 && b.epsilon_step > 0.0) {
            return Err(Error::Config("backoff steps must be positive".into()));
        }
        if self.reuse_limit == 0 {
            return Err(Error::Config("reuse_limit must be positive".into()));
        }
        Ok(())
    }

    /// Last level at which either filter still relaxes further.
    pub fn max_backoff_level(&self) -> usize {
        let b = &self.backoff;
        let t = snap((self.theta - b.theta_floor) / b.theta_step).ceil();
        let e = snap((b.epsilon_cap - self.epsilon_nli) / b.epsilon_step).ceil();
        t.max(e).max(0.0) as usize
    }

    /// Effective `(theta, epsilon)` at a backoff level.
    pub fn level(&self, level: usize) -> (f64, f64) {
        let b = &self.backoff;
        let theta = snap(self.theta - level as f64 * b.theta_step).max(b.theta_floor);
        let eps = snap(self.epsilon_nli + level as f64 * b.epsilon_step).min(b.epsilon_cap);
        (theta, eps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedChain {
    pub a: String,
    pub b: String,
    pub c: String,
}

/// Parses `a<TAB>b<TAB>c` lines; blank lines and `#` comments are skipped.
pub fn parse_chains(text: &str) -> Result<Vec<SeedChain>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [a, b, c] = parts[..] else {
            return Err(Error::PoolFormat {
                line: i + 1,
                reason: "expected a<TAB>b<TAB>c".into(),
            });
        };
        out.push(SeedChain {
            a: a.to_lowercase(),
            b: b.to_lowercase(),
            c: c.to_lowercase(),
        });
    }
    Ok(out)
}

/// Term pools with categories, plus the seed chains drawn from.
#[derive(Clone, Debug)]
pub struct RgdPools {
    pub lexicon: Lexicon,
    pub chains: Vec<SeedChain>,
}

impl RgdPools {
    pub fn new(lexicon: Lexicon, chains: Vec<SeedChain>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::Config("no seed chains".into()));
        }
        for (i, ch) in chains.iter().enumerate() {
            for t in [&ch.a, &ch.b, &ch.c] {
                if !lexicon.contains(t) {
                    return Err(Error::PoolFormat {
                        line: i + 1,
                        reason: format!("chain term {t:?} is not in any pool"),
                    });
                }
            }
            if ch.a == ch.b || ch.b == ch.c || ch.a == ch.c {
                return Err(Error::PoolFormat {
                    line: i + 1,
                    reason: "chain terms must be distinct".into(),
                });
            }
        }
        Ok(Self { lexicon, chains })
    }

    pub fn builtin() -> Self {
        Self::new(
            Lexicon::builtin(),
            parse_chains(BUILTIN_CHAINS).expect("builtin chains are well formed"),
        )
        .expect("builtin chains use pooled terms")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgdMetadata {
    pub similarity: f64,
    pub category: String,
    pub backoff_level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgdSample {
    pub context: Vec<String>,
    pub true_target: String,
    pub false_target: String,
    pub metadata: RgdMetadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairUsage {
    pub c: String,
    pub d: String,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub requested: usize,
    pub emitted: usize,
    pub draws: usize,
    pub skipped: usize,
    /// Samples emitted at each backoff level, indexed by level.
    pub backoff_histogram: Vec<usize>,
    pub pair_usage: Vec<PairUsage>,
}

fn sentence(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Stateful generator: one seeded RNG stream plus the pair-usage ledger.
pub struct Generator<'a> {
    pools: &'a RgdPools,
    cfg: RgdConfig,
    providers: Providers<'a>,
    rng: ChaCha8Rng,
    usage: BTreeMap<(String, String), usize>,
    embeddings: HashMap<String, Vec<f64>>,
}

impl<'a> Generator<'a> {
    pub fn new(pools: &'a RgdPools, cfg: RgdConfig, providers: Providers<'a>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            pools,
            cfg,
            providers,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            usage: BTreeMap::new(),
            embeddings: HashMap::new(),
        })
    }

    fn embedding(&mut self, term: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.embeddings.get(term) {
            return Ok(v.clone());
        }
        let v = self.providers.embedder.embed_one(term)?;
        self.embeddings.insert(term.to_string(), v.clone());
        Ok(v)
    }

    /// Category-mates of `c` ranked by similarity to `c`, highest first, ties by name.
    fn ranked_mates(
        &mut self,
        chain: &SeedChain,
        graph: &ContextGraph,
    ) -> Result<(String, Vec<(String, f64)>)> {
        let category = self
            .pools
            .lexicon
            .category_of(&chain.c)
            .ok_or_else(|| Error::PoolExhausted {
                category: chain.c.clone(),
            })?
            .clone();
        let vc = self.embedding(&chain.c)?;
        let mut ranked = Vec::new();
        for d in &category.terms {
            if d == &chain.a || d == &chain.b || d == &chain.c || graph.reachable(&chain.a, d) {
                continue;
            }
            let vd = self.embedding(d)?;
            ranked.push((d.clone(), cosine(&vc, &vd)));
        }
        ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        Ok((category.name, ranked))
    }

    /// Builds one sample from a specific chain without touching the RNG.
    pub fn sample_for_chain(&mut self, chain: &SeedChain) -> Result<RgdSample> {
        let context = vec![
            sentence(&format!("{} is {}.", chain.a, chain.b)),
            sentence(&format!("{} is {}.", chain.b, chain.c)),
        ];
        let stmts: Vec<_> = context
            .iter()
            .map(|s| parse_statement(s))
            .collect::<Result<_>>()?;
        let graph = ContextGraph::from_statements(&stmts);
        let premise = context.join(" ");
        let (category, ranked) = self.ranked_mates(chain, &graph)?;

        for level in 0..=self.cfg.max_backoff_level() {
            let (theta, eps) = self.cfg.level(level);
            for (d, sim) in &ranked {
                if *sim < theta {
                    break;
                }
                let key = (chain.c.clone(), d.clone());
                if self.usage.get(&key).copied().unwrap_or(0) >= self.cfg.reuse_limit {
                    continue;
                }
                let false_target = format!("Therefore, {} is {}.", chain.a, d);
                let scores = self.providers.nli.nli(&premise, &false_target)?;
                if scores.entailment > eps {
                    continue;
                }
                *self.usage.entry(key).or_insert(0) += 1;
                return Ok(RgdSample {
                    context,
                    true_target: format!("Therefore, {} is {}.", chain.a, chain.c),
                    false_target,
                    metadata: RgdMetadata {
                        similarity: *sim,
                        category,
                        backoff_level: level,
                    },
                });
            }
        }
        Err(Error::PoolExhausted { category })
    }

    /// Draws a seed chain uniformly and builds its sample.
    pub fn generate_sample(&mut self) -> Result<RgdSample> {
        let i = self.rng.random_range(0..self.pools.chains.len());
        let chain = self.pools.chains[i].clone();
        self.sample_for_chain(&chain)
    }

    pub fn usage(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.usage
            .iter()
            .map(|((c, d), n)| (c.as_str(), d.as_str(), *n))
    }
}

/// Exactly `cfg.n_samples` samples; exhausted draws are skipped and retried.
pub fn generate_dataset(
    cfg: &RgdConfig,
    pools: &RgdPools,
    providers: Providers<'_>,
) -> Result<(Vec<RgdSample>, GenerationReport)> {
    let mut gen = Generator::new(pools, *cfg, providers)?;
    let budget = cfg.n_samples.saturating_mul(DRAWS_PER_SAMPLE);
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut report = GenerationReport {
        requested: cfg.n_samples,
        backoff_histogram: vec![0; cfg.max_backoff_level() + 1],
        ..Default::default()
    };
    while samples.len() < cfg.n_samples {
        if report.draws >= budget {
            return Err(Error::GenerationStalled {
                requested: cfg.n_samples,
                emitted: samples.len(),
                draws: report.draws,
                skipped: report.skipped,
            });
        }
        report.draws += 1;
        match gen.generate_sample() {
            Ok(s) => {
                report.backoff_histogram[s.metadata.backoff_level] += 1;
                samples.push(s);
            }
            Err(Error::PoolExhausted { .. }) => report.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    report.emitted = samples.len();
    report.pair_usage = gen
        .usage()
        .map(|(c, d, count)| PairUsage {
            c: c.to_string(),
            d: d.to_string(),
            count,
        })
        .collect();
    Ok((samples, report))
}

/// One compact JSON object per line.
pub fn to_jsonl(samples: &[RgdSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("samples serialize"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Vec<RgdSample>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
