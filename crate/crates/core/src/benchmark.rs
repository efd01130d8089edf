//! Benchmark harness: accept/reject decisions per method, FTAR/TTAR with
//! bootstrap intervals, the p/δ sweep, proxy correlations and trace export.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::percentile;
use crate::config::GateConfig;
use crate::error::{Error, Result};
use crate::gate::{cost_trace, decide, score_candidates, CandidateScores, Verdict};
use crate::providers::{cosine, Providers};
use crate::rgd::RgdSample;
use crate::serde_inf::fmt_cost;
use crate::statement::{build_chain, parse_statement_with_id, CandidateChain, Statement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eidoku,
    Prob,
    ProbStrict,
    NliOnly,
    SelfConsistency,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Eidoku,
        Method::Prob,
        Method::ProbStrict,
        Method::NliOnly,
        Method::SelfConsistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Eidoku => "eidoku",
            Method::Prob => "prob",
            Method::ProbStrict => "prob_strict",
            Method::NliOnly => "nli_only",
            Method::SelfConsistency => "self_consistency",
        }
    }

    /// Methods that correspond to rows of the published comparison table.
    pub fn is_table_row(self) -> bool {
        matches!(self, Method::Eidoku | Method::Prob | Method::ProbStrict)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Comma-separated method list, e.g. `eidoku,prob,prob_strict`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::UnknownMethod(list.to_string()));
    }
    Ok(methods)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub theta_loose: f64,
    pub theta_strict: f64,
    pub nli_threshold: f64,
    pub sc_replicas: usize,
    pub sc_noise_sigma: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            theta_loose: 0.5,
            theta_strict: 0.75,
            nli_threshold: 0.5,
            sc_replicas: 5,
            sc_noise_sigma: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub accept_true: bool,
    pub accept_false: bool,
}

/// Parsed context statements and the two single-step candidates `[true, false]`.
pub fn sample_inputs(sample: &RgdSample) -> Result<(Vec<Statement>, Vec<CandidateChain>)> {
    let context: Vec<Statement> = sample
        .context
        .iter()
        .enumerate()
        .map(|(i, t)| parse_statement_with_id(i, t))
        .collect::<Result<_>>()?;
    let n = context.len();
    let candidates = [&sample.true_target, &sample.false_target]
        .into_iter()
        .enumerate()
        .map(|(k, t)| build_chain(n, vec![parse_statement_with_id(n + k, t)?]))
        .collect::<Result<_>>()?;
    Ok((context, candidates))
}

fn similarity(providers: Providers<'_>, target: &str, context: &str) -> Result<f64> {
    let v = providers.embedder.embed(&[target, context])?;
    Ok(cosine(&v[0], &v[1]))
}

/// Majority vote of noisy replicas of the loose similarity test.
fn self_consistent(sim: f64, cfg: &BaselineConfig, seed: u64, stream: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let noise = Normal::new(0.0, cfg.sc_noise_sigma).expect("finite sigma");
    let votes = (0..cfg.sc_replicas)
        .filter(|_| sim + rng.sample(noise) >= cfg.theta_loose)
        .count();
    2 * votes > cfg.sc_replicas
}

fn eval_sample(
    method: Method,
    index: usize,
    sample: &RgdSample,
    gate: &GateConfig,
    baseline: &BaselineConfig,
    providers: Providers<'_>,
    seed: u64,
) -> Result<Decision> {
    let targets = [&sample.true_target, &sample.false_target];
    let joined = sample.context.join(" ");
    let mut accepted = [false; 2];
    match method {
        Method::Eidoku => {
            let (context, candidates) = sample_inputs(sample)?;
            let scores = score_candidates(&context, &candidates, gate, providers);
            let v = decide(&scores, gate)?;
            accepted = [v.per_candidate[0].accepted, v.per_candidate[1].accepted];
        }
        Method::Prob | Method::ProbStrict => {
            let theta = if method == Method::Prob {
                baseline.theta_loose
            } else {
                baseline.theta_strict
            };
            for (k, t) in targets.iter().enumerate() {
                accepted[k] = similarity(providers, t, &joined)? >= theta;
            }
        }
        Method::NliOnly => {
            for (k, t) in targets.iter().enumerate() {
                accepted[k] = providers.nli.nli(&joined, t)?.entailment >= baseline.nli_threshold;
            }
        }
        Method::SelfConsistency => {
            for (k, t) in targets.iter().enumerate() {
                let sim = similarity(providers, t, &joined)?;
                accepted[k] = self_consistent(sim, baseline, seed, (index * 2 + k) as u64);
            }
        }
    }
    Ok(Decision {
        accept_true: accepted[0],
        accept_false: accepted[1],
    })
}

/// Decisions for every sample, in dataset order. Samples are evaluated in parallel.
pub fn eval_method(
    method: Method,
    dataset: &[RgdSample],
    gate: &GateConfig,
    baseline: &BaselineConfig,
    providers: Providers<'_>,
    seed: u64,
) -> Result<Vec<Decision>> {
    if dataset.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    gate.validate()?;
    dataset
        .par_iter()
        .enumerate()
        .map(|(i, s)| eval_sample(method, i, s, gate, baseline, providers, seed))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    pub ftar: f64,
    pub ttar: f64,
    pub ftar_ci: (f64, f64),
    pub ttar_ci: (f64, f64),
    pub false_accepted: usize,
    pub true_accepted: usize,
    pub n: usize,
    pub table_row: bool,
}

/// FTAR and TTAR as exact count ratios with percentile bootstrap intervals.
///
/// Each resample draws `n` samples with replacement; a sample contributes
/// both its true and false target, so the two rates are resampled jointly.
pub fn compute_metrics(
    method: Method,
    decisions: &[Decision],
    b_resamples: usize,
    seed: u64,
) -> MethodMetrics {
    let n = decisions.len();
    let false_accepted = decisions.iter().filter(|d| d.accept_false).count();
    let true_accepted = decisions.iter().filter(|d| d.accept_true).count();
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let ftar = rate(false_accepted);
    let ttar = rate(true_accepted);

    let mut ftar_ci = (ftar, ftar);
    let mut ttar_ci = (ttar, ttar);
    if n > 0 && b_resamples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fs = Vec::with_capacity(b_resamples);
        let mut ts = Vec::with_capacity(b_resamples);
        for _ in 0..b_resamples {
            let (mut f, mut t) = (0usize, 0usize);
            for _ in 0..n {
                let d = &decisions[rng.random_range(0..n)];
                f += d.accept_false as usize;
                t += d.accept_true as usize;
            }
            fs.push(rate(f));
            ts.push(rate(t));
        }
        let ci = |v: &mut Vec<f64>, point: f64| {
            v.sort_by(f64::total_cmp);
            let lo = percentile(v, 2.5).expect("nonempty");
            let hi = percentile(v, 97.5).expect("nonempty");
            (lo.min(point), hi.max(point))
        };
        ftar_ci = ci(&mut fs, ftar);
        ttar_ci = ci(&mut ts, ttar);
    }
    MethodMetrics {
        method,
        ftar,
        ttar,
        ftar_ci,
        ttar_ci,
        false_accepted,
        true_accepted,
        n,
        table_row: method.is_table_row(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub methods: Vec<MethodMetrics>,
    pub n_samples: usize,
    pub seed: u64,
    pub b_resamples: usize,
    pub gate: GateConfig,
    pub baselines: BaselineConfig,
}

pub fn run_bench(
    dataset: &[RgdSample],
    methods: &[Method],
    gate: &GateConfig,
    baseline: &BaselineConfig,
    providers: Providers<'_>,
    seed: u64,
    b_resamples: usize,
) -> Result<BenchReport> {
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let decisions = eval_method(m, dataset, gate, baseline, providers, seed)?;
        out.push(compute_metrics(m, &decisions, b_resamples, seed));
    }
    Ok(BenchReport {
        methods: out,
        n_samples: dataset.len(),
        seed,
        b_resamples,
        gate: *gate,
        baselines: *baseline,
    })
}

/// Inclusive `start:stop:step` range. Values are rounded to 1e-9 so decimal
/// steps land exactly on their endpoints.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("range must be start:stop:step, got {spec:?}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = match parts[..] {
        [x] => (x, x, 1.0),
        [a, b, s] => (a, b, s),
        _ => return Err(bad()),
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p: f64,
    pub delta: f64,
    pub ftar: f64,
    pub ttar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub p_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("p\tdelta\tftar\tttar\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\n",
                c.p, c.delta, c.ftar, c.ttar
            ));
        }
        s
    }
}

/// FTAR/TTAR for every `(p, δ)` pair. Raw proxies do not depend on either
/// parameter, so each sample is scored once and only the decision pass reruns.
pub fn sensitivity_sweep(
    dataset: &[RgdSample],
    p_values: &[f64],
    delta_values: &[f64],
    gate: &GateConfig,
    providers: Providers<'_>,
) -> Result<SweepGrid> {
    if dataset.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    if p_values.is_empty() || delta_values.is_empty() {
        return Err(Error::Config("sweep ranges must be nonempty".into()));
    }
    gate.validate()?;
    let scored: Vec<Vec<CandidateScores>> = dataset
        .par_iter()
        .map(|s| {
            let (context, candidates) = sample_inputs(s)?;
            Ok(score_candidates(&context, &candidates, gate, providers))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(p_values.len() * delta_values.len());
    for &p in p_values {
        for &delta in delta_values {
            let mut cfg = *gate;
            cfg.calibration.percentile_p = p;
            cfg.calibration.delta_margin = delta;
            cfg.validate()?;
            let (mut f, mut t) = (0usize, 0usize);
            for scores in &scored {
                let v = decide(scores, &cfg)?;
                t += v.per_candidate[0].accepted as usize;
                f += v.per_candidate[1].accepted as usize;
            }
            let n = scored.len() as f64;
            cells.push(SweepCell {
                p,
                delta,
                ftar: f as f64 / n,
                ttar: t as f64 / n,
            });
        }
    }
    Ok(SweepGrid {
        p_values: p_values.to_vec(),
        delta_values: delta_values.to_vec(),
        cells,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionRecord {
    /// Whether the junction belongs to the false target.
    pub false_target: bool,
    #[serde(with = "crate::serde_inf")]
    pub tau_struct: f64,
    pub tau_curv: f64,
    pub tau_logic: f64,
}

/// Raw proxy values of every junction of both targets of every sample.
pub fn collect_junction_records(
    dataset: &[RgdSample],
    gate: &GateConfig,
    providers: Providers<'_>,
) -> Result<Vec<JunctionRecord>> {
    let per_sample: Vec<Vec<JunctionRecord>> = dataset
        .par_iter()
        .map(|s| {
            let (context, candidates) = sample_inputs(s)?;
            let scores = score_candidates(&context, &candidates, gate, providers);
            let mut out = Vec::new();
            for (k, cand) in scores.iter().enumerate() {
                for r in cand.iter().flatten() {
                    out.push(JunctionRecord {
                        false_target: k == 1,
                        tau_struct: r.tau_struct,
                        tau_curv: r.tau_curv,
                        tau_logic: r.tau_logic,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_sample.into_iter().flatten().collect())
}

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    // exact check; the mean of a constant series need not equal its value
    if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub const PROXY_NAMES: [&str; 3] = ["struct", "curv", "logic"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Pearson r in `struct, curv, logic` order over the records where both
    /// proxies are finite; `null` where either is constant.
    pub matrix: [[Option<f64>; 3]; 3],
    /// Records behind each entry of `matrix`.
    pub pair_counts: [[usize; 3]; 3],
    pub records: usize,
    /// Records with all three proxies finite.
    pub used: usize,
    /// Records whose structural proxy was a barrier.
    pub excluded_infinite: usize,
    /// 95th percentile of true-target `tau_curv`: the "low curvature" cutoff.
    pub curv_low_cutoff: f64,
    /// False-target junctions with a structural barrier yet a low `tau_curv`.
    pub split_count: usize,
    pub false_target_records: usize,
}

pub fn proxy_correlation(records: &[JunctionRecord]) -> Result<CorrelationReport> {
    let value = |r: &JunctionRecord, k: usize| [r.tau_struct, r.tau_curv, r.tau_logic][k];
    // pairwise-complete: a barrier only removes a record from the pairs involving struct
    let mut matrix = [[None; 3]; 3];
    let mut pair_counts = [[0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let (x, y): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| value(r, i).is_finite() && value(r, j).is_finite())
                .map(|r| (value(r, i), value(r, j)))
                .unzip();
            pair_counts[i][j] = x.len();
            pair_counts[j][i] = x.len();
            let r = if i == j {
                (x.len() >= 2 && x.iter().any(|v| *v != x[0])).then_some(1.0)
            } else {
                pearson(&x, &y)
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    let most = pair_counts.iter().flatten().copied().max().unwrap_or(0);
    if most < 3 {
        return Err(Error::InsufficientData(format!(
            "{most} finite junction records; at least 3 are required"
        )));
    }
    let used = records
        .iter()
        .filter(|r| r.tau_struct.is_finite() && r.tau_curv.is_finite() && r.tau_logic.is_finite())
        .count();

    let mut true_curv: Vec<f64> = records
        .iter()
        .filter(|r| !r.false_target && r.tau_curv.is_finite())
        .map(|r| r.tau_curv)
        .collect();
    true_curv.sort_by(f64::total_cmp);
    let curv_low_cutoff = if true_curv.is_empty() {
        0.0
    } else {
        percentile(&true_curv, 95.0)?
    };
    let split_count = records
        .iter()
        .filter(|r| r.false_target && r.tau_struct.is_infinite() && r.tau_curv <= curv_low_cutoff)
        .count();

    Ok(CorrelationReport {
        matrix,
        records: records.len(),
        used,
        pair_counts,
        excluded_infinite: records
            .iter()
            .filter(|r| r.tau_struct.is_infinite())
            .count(),
        curv_low_cutoff,
        split_count,
        false_target_records: records.iter().filter(|r| r.false_target).count(),
    })
}

/// Writes `candidate, step, T_k, tau_c` rows, one per junction of every
/// candidate. Infinite values are written as `inf`.
pub fn export_trace<W: Write>(verdict: &Verdict, mut out: W) -> io::Result<()> {
    writeln!(out, "candidate\tstep\tT_k\ttau_c")?;
    let tau_c = fmt_cost(verdict.tau_c.clamped);
    for i in 0..verdict.per_candidate.len() {
        let trace = cost_trace(verdict, i).expect("index in range");
        for (k, t) in trace.iter().enumerate() {
            writeln!(out, "{i}\t{}\t{}\t{tau_c}", k + 1, fmt_cost(*t))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::BuiltinProviders;
    use crate::rgd::{generate_dataset, RgdConfig, RgdPools};
    use std::sync::LazyLock;

    static BUILTIN: LazyLock<BuiltinProviders> = LazyLock::new(BuiltinProviders::standard);

    static DATA: LazyLock<Vec<RgdSample>> = LazyLock::new(|| {
        let cfg = RgdConfig {
            n_samples: 120,
            seed: 11,
            ..Default::default()
        };
        generate_dataset(&cfg, &RgdPools::builtin(), BUILTIN.providers())
            .unwrap()
            .0
    });

    fn d(t: bool, f: bool) -> Decision {
        Decision {
            accept_true: t,
            accept_false: f,
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!(
            "bogus".parse::<Method>(),
            Err(Error::UnknownMethod(_))
        ));
        assert_eq!(
            parse_methods("eidoku, prob").unwrap(),
            vec![Method::Eidoku, Method::Prob]
        );
        assert!(parse_methods("eidoku,nope").is_err());
    }

    #[test]
    fn metric_counts() {
        let m = compute_metrics(Method::Prob, &[d(true, false), d(false, false)], 200, 1);
        assert_eq!((m.ftar, m.ttar), (0.0, 0.5));
        assert_eq!(m.ftar_ci, (0.0, 0.0));
        assert!(m.ttar_ci.0 <= 0.5 && 0.5 <= m.ttar_ci.1);
        let again = compute_metrics(Method::Prob, &[d(true, false), d(false, false)], 200, 1);
        assert_eq!(m, again);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("85:99:1").unwrap().len(), 15);
        assert_eq!(
            parse_range("0:0.3:0.05").unwrap(),
            vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
        );
        assert_eq!(parse_range("0.1").unwrap(), vec![0.1]);
        assert!(parse_range("3:1:1").is_err());
        assert!(parse_range("1:2:0").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn pearson_edges() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0, 1.0, 1.0, 1.0]), None);
    }

    #[test]
    fn baselines_on_rgd() {
        let providers = BUILTIN.providers();
        let gate = GateConfig::default();
        let base = BaselineConfig::default();
        let eval = |m| {
            compute_metrics(
                m,
                &eval_method(m, &DATA, &gate, &base, providers, 5).unwrap(),
                0,
                5,
            )
        };

        let e = eval(Method::Eidoku);
        assert_eq!((e.ftar, e.ttar), (0.0, 1.0));
        let nli = eval(Method::NliOnly);
        assert_eq!((nli.ftar, nli.ttar), (0.0, 1.0));
        let prob = eval(Method::Prob);
        let strict = eval(Method::ProbStrict);
        assert_eq!(prob.ttar, 1.0);
        assert!(prob.ftar > 0.2);
        assert!(strict.ftar < prob.ftar);
        assert!(strict.ttar < prob.ttar);
        let sc = eval(Method::SelfConsistency);
        assert!(sc.ftar > 0.2);
    }

    #[test]
    fn eidoku_decisions_ignore_sample_order() {
        let providers = BUILTIN.providers();
        let gate = GateConfig::default();
        let base = BaselineConfig::default();
        let fwd = eval_method(Method::Eidoku, &DATA, &gate, &base, providers, 0).unwrap();
        let rev_data: Vec<RgdSample> = DATA.iter().rev().cloned().collect();
        let mut rev = eval_method(Method::Eidoku, &rev_data, &gate, &base, providers, 0).unwrap();
        rev.reverse();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn sweep_is_complete() {
        let ps = [85.0, 99.0];
        let ds = [0.0, 0.3];
        let g = sensitivity_sweep(
            &DATA[..20],
            &ps,
            &ds,
            &GateConfig::default(),
            BUILTIN.providers(),
        )
        .unwrap();
        assert_eq!(g.cells.len(), 4);
        let pairs: Vec<(f64, f64)> = g.cells.iter().map(|c| (c.p, c.delta)).collect();
        assert_eq!(
            pairs,
            vec![(85.0, 0.0), (85.0, 0.3), (99.0, 0.0), (99.0, 0.3)]
        );
        assert!(g.to_tsv().starts_with("p\tdelta\tftar\tttar\n85\t0\t"));
    }

    #[test]
    fn correlation_on_rgd() {
        let recs =
            collect_junction_records(&DATA, &GateConfig::default(), BUILTIN.providers()).unwrap();
        assert_eq!(recs.len(), 2 * DATA.len());
        let rep = proxy_correlation(&recs).unwrap();
        assert_eq!(rep.excluded_infinite, DATA.len());
        assert_eq!(rep.used, DATA.len());
        // struct is ln 3 on every true target, so its correlations are undefined
        assert_eq!(rep.matrix[0][1], None);
        assert_eq!(rep.matrix[0][0], None);
        assert_eq!(rep.pair_counts[0][1], DATA.len());
        assert_eq!(rep.pair_counts[1][2], 2 * DATA.len());
        // curv and logic stay finite on barrier junctions
        assert!(rep.matrix[1][2].is_some());
        assert!(rep.split_count > 0);
        assert!(matches!(
            proxy_correlation(&recs[..2]),
            Err(Error::InsufficientData(_))
        ));
    }
}
