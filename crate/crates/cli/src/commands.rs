use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use eidoku_core::benchmark::{
    collect_junction_records, parse_methods, parse_range, proxy_correlation, PROXY_NAMES,
};
use eidoku_core::providers::wire::serve;
use eidoku_core::rgd::{from_jsonl, to_jsonl};
use eidoku_core::{
    build_chain, export_trace, generate_dataset, parse_kv, parse_statement_with_id, run_bench,
    run_gate, sensitivity_sweep, BaselineConfig, BuiltinProviders, CandidateChain,
    CandidateVerdict, GateConfig, RgdConfig, RgdPools, RgdSample, Statement, Threshold, Verdict,
};

use crate::args::{BenchArgs, CorrelateArgs, GateArgs, GenRgdArgs, SweepArgs, VerifyArgs};
use crate::output::{display, write_atomic, write_json, Manifest};
use crate::provider::ProviderHandle;

/// Scoring failed because the provider did; the verdict was still written.
#[derive(Debug)]
pub struct ProviderFailure(pub String);

impl fmt::Display for ProviderFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "provider failure: {}", self.0)
    }
}

impl std::error::Error for ProviderFailure {}

pub const EXIT_OK: u8 = 0;
pub const EXIT_REFUSED: u8 = 2;

pub fn resolve_gate(args: &GateArgs) -> Result<GateConfig> {
    let mut cfg = GateConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (line, key, value) in
            parse_kv(&text).with_context(|| format!("in {}", path.display()))?
        {
            cfg.set(&key, &value)
                .with_context(|| format!("{}:{line}", path.display()))?;
        }
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(p) = args.p {
        cfg.calibration.percentile_p = p;
    }
    if let Some(d) = args.delta {
        cfg.calibration.delta_margin = d;
    }
    if let Some(t) = args.tau_min {
        cfg.calibration.tau_min = t;
    }
    if let Some(t) = args.tau_max {
        cfg.calibration.tau_max = t;
    }
    if let Some(w) = args.window {
        cfg.window_w = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_json(cfg: &GateConfig) -> serde_json::Value {
    cfg.entries()
        .into_iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn read_dataset(path: &Path) -> Result<Vec<RgdSample>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading dataset {}", path.display()))?;
    let samples =
        from_jsonl(&text).with_context(|| format!("parsing dataset {}", path.display()))?;
    if samples.is_empty() {
        bail!("dataset {} is empty", path.display());
    }
    Ok(samples)
}

pub fn gen_rgd(args: &GenRgdArgs, providers: &ProviderHandle, provider_name: &str) -> Result<u8> {
    let start = Instant::now();
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let cfg = RgdConfig {
        n_samples: args.n,
        seed: args.seed,
        theta: args.theta,
        epsilon_nli: args.epsilon,
        reuse_limit: args.reuse_limit,
        ..Default::default()
    };
    let pools = RgdPools::builtin();
    let (samples, report) = generate_dataset(&cfg, &pools, providers.providers())?;
    let report_path = crate::output::sibling(&args.out, ".report.json");
    write_atomic(&args.out, to_jsonl(&samples).as_bytes())?;
    write_json(&report_path, &report)?;

    let mut m = Manifest::new("gen-rgd", provider_name);
    m.config = serde_json::to_value(cfg)?;
    m.seeds = json!({ "rgd": args.seed });
    m.outputs = display(&[&args.out, &report_path]);
    m.write_beside(&args.out, start.elapsed())?;

    eprintln!(
        "wrote {} samples to {} ({} draws, {} skipped, backoff levels {:?})",
        samples.len(),
        args.out.display(),
        report.draws,
        report.skipped,
        report.backoff_histogram
    );
    Ok(EXIT_OK)
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read_context(path: &Path) -> Result<Vec<Statement>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading context {}", path.display()))?;
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (line, l) in numbered_lines(&text) {
        match parse_statement_with_id(out.len(), l) {
            Ok(s) => out.push(s),
            Err(_) => bad.push(line),
        }
    }
    if !bad.is_empty() {
        bail!(
            "{}: cannot parse statement on line(s) {}",
            path.display(),
            join(&bad)
        );
    }
    Ok(out)
}

fn read_candidates(path: &Path, context_len: usize) -> Result<(Vec<String>, Vec<CandidateChain>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading candidates {}", path.display()))?;
    let mut texts = Vec::new();
    let mut chains = Vec::new();
    let mut bad = Vec::new();
    let mut next_id = context_len;
    for (line, l) in numbered_lines(&text) {
        let mut steps = Vec::new();
        for part in l.split("||").map(str::trim) {
            match parse_statement_with_id(next_id, part) {
                Ok(s) => {
                    steps.push(s);
                    next_id += 1;
                }
                Err(_) => {
                    bad.push(line);
                    break;
                }
            }
        }
        if bad.last() == Some(&line) {
            continue;
        }
        texts.push(l.to_string());
        chains.push(build_chain(context_len, steps)?);
    }
    if !bad.is_empty() {
        bail!(
            "{}: cannot parse candidate on line(s) {}",
            path.display(),
            join(&bad)
        );
    }
    if chains.is_empty() {
        bail!("{}: no candidates", path.display());
    }
    Ok((texts, chains))
}

fn join(lines: &[usize]) -> String {
    lines
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Serialize)]
#[serde(untagged)]
enum SelectedOut {
    Index(usize),
    Refused(&'static str),
}

#[derive(Serialize)]
struct CandidateOut<'a> {
    index: usize,
    text: &'a str,
    steps: Vec<&'a str>,
    #[serde(flatten)]
    verdict: &'a CandidateVerdict,
}

#[derive(Serialize)]
struct VerdictOut<'a> {
    selected: SelectedOut,
    tau_c: Threshold,
    weights: eidoku_core::NormalizationWeights,
    candidates: Vec<CandidateOut<'a>>,
}

fn verdict_json(verdict: &Verdict, texts: &[String], chains: &[CandidateChain]) -> Result<String> {
    let out = VerdictOut {
        selected: match verdict.selected_index() {
            Some(i) => SelectedOut::Index(i),
            None => SelectedOut::Refused("refused"),
        },
        tau_c: verdict.tau_c,
        weights: verdict.weights,
        candidates: verdict
            .per_candidate
            .iter()
            .enumerate()
            .map(|(i, v)| CandidateOut {
                index: i,
                text: &texts[i],
                steps: chains[i].steps.iter().map(|s| s.text.as_str()).collect(),
                verdict: v,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out)?;
    s.push('\n');
    Ok(s)
}

pub fn verify(args: &VerifyArgs, providers: &ProviderHandle, provider_name: &str) -> Result<u8> {
    let start = Instant::now();
    let cfg = resolve_gate(&args.gate)?;
    let context = read_context(&args.context)?;
    let (texts, chains) = read_candidates(&args.candidates, context.len())?;
    let verdict = run_gate(&context, &chains, &cfg, providers.providers())?;
    let body = verdict_json(&verdict, &texts, &chains)?;

    let mut outputs: Vec<&Path> = Vec::new();
    match &args.out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            outputs.push(path);
        }
        None => io::stdout().write_all(body.as_bytes())?,
    }
    if let Some(path) = &args.trace_out {
        let mut buf = Vec::new();
        export_trace(&verdict, &mut buf)?;
        write_atomic(path, &buf)?;
        outputs.push(path);
    }
    if let Some(primary) = outputs.first().copied() {
        let mut m = Manifest::new("verify", provider_name);
        m.config = config_json(&cfg);
        m.inputs = display(&[&args.context, &args.candidates]);
        m.outputs = display(&outputs);
        m.write_beside(primary, start.elapsed())?;
    }

    if let Some(f) = verdict
        .per_candidate
        .iter()
        .filter_map(|c| c.error.as_ref())
        .find(|f| f.provider)
    {
        return Err(ProviderFailure(f.message.clone()).into());
    }
    match verdict.selected_index() {
        Some(i) => eprintln!("selected candidate {i}: {}", texts[i]),
        None => eprintln!(
            "refused: no candidate passed the gate (tau_c = {})",
            verdict.tau_c.clamped
        ),
    }
    if verdict.is_refusal() && args.strict_exit {
        return Ok(EXIT_REFUSED);
    }
    Ok(EXIT_OK)
}

pub fn bench(args: &BenchArgs, providers: &ProviderHandle, provider_name: &str) -> Result<u8> {
    let start = Instant::now();
    let cfg = resolve_gate(&args.gate)?;
    let methods = parse_methods(&args.methods)?;
    let dataset = read_dataset(&args.dataset)?;
    let baseline = BaselineConfig {
        theta_loose: args.theta_loose,
        theta_strict: args.theta_strict,
        ..Default::default()
    };
    let report = run_bench(
        &dataset,
        &methods,
        &cfg,
        &baseline,
        providers.providers(),
        args.seed,
        args.b_resamples,
    )?;
    write_json(&args.out, &report)?;

    let mut m = Manifest::new("bench", provider_name);
    m.config = json!({ "gate": config_json(&cfg), "baselines": baseline, "methods": args.methods });
    m.seeds = json!({ "bootstrap": args.seed, "self_consistency": args.seed });
    m.inputs = display(&[&args.dataset]);
    m.outputs = display(&[&args.out]);
    m.write_beside(&args.out, start.elapsed())?;

    println!(
        "{:<18} {:>8} {:>19} {:>8} {:>19}",
        "method", "FTAR", "95% CI", "TTAR", "95% CI"
    );
    for r in &report.methods {
        println!(
            "{:<18} {:>8.6} [{:.4}, {:.4}] {:>8.6} [{:.4}, {:.4}]",
            r.method.name(),
            r.ftar,
            r.ftar_ci.0,
            r.ftar_ci.1,
            r.ttar,
            r.ttar_ci.0,
            r.ttar_ci.1
        );
    }
    Ok(EXIT_OK)
}

pub fn sweep(args: &SweepArgs, providers: &ProviderHandle, provider_name: &str) -> Result<u8> {
    let start = Instant::now();
    let cfg = resolve_gate(&args.gate)?;
    let ps = parse_range(&args.p_range).context("--p-range")?;
    let ds = parse_range(&args.delta_range).context("--delta-range")?;
    let dataset = read_dataset(&args.dataset)?;
    let grid = sensitivity_sweep(&dataset, &ps, &ds, &cfg, providers.providers())?;
    write_atomic(&args.out, grid.to_tsv().as_bytes())?;

    let mut m = Manifest::new("sweep", provider_name);
    m.config = json!({ "gate": config_json(&cfg), "p_range": args.p_range, "delta_range": args.delta_range });
    m.inputs = display(&[&args.dataset]);
    m.outputs = display(&[&args.out]);
    m.write_beside(&args.out, start.elapsed())?;

    let perfect = grid
        .cells
        .iter()
        .filter(|c| c.ftar == 0.0 && c.ttar == 1.0)
        .count();
    eprintln!(
        "{} cells ({} p x {} delta); {perfect} with FTAR 0 and TTAR 1",
        grid.cells.len(),
        ps.len(),
        ds.len()
    );
    Ok(EXIT_OK)
}

pub fn correlate(
    args: &CorrelateArgs,
    providers: &ProviderHandle,
    provider_name: &str,
) -> Result<u8> {
    let start = Instant::now();
    let cfg = resolve_gate(&args.gate)?;
    let dataset = read_dataset(&args.dataset)?;
    let records = collect_junction_records(&dataset, &cfg, providers.providers())?;
    let report = proxy_correlation(&records)?;
    write_json(&args.out, &report)?;

    let mut m = Manifest::new("correlate", provider_name);
    m.config = config_json(&cfg);
    m.inputs = display(&[&args.dataset]);
    m.outputs = display(&[&args.out]);
    m.write_beside(&args.out, start.elapsed())?;

    println!(
        "{:>8} {:>8} {:>8} {:>8}",
        "", PROXY_NAMES[0], PROXY_NAMES[1], PROXY_NAMES[2]
    );
    for (i, row) in report.matrix.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|r| r.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")))
            .map(|s| format!("{s:>8}"))
            .collect();
        println!("{:>8} {}", PROXY_NAMES[i], cells.join(" "));
    }
    println!(
        "records {}  used {}  barrier-excluded {}  split {} of {} false-target junctions (tau_curv <= {:.4})",
        report.records,
        report.used,
        report.excluded_infinite,
        report.split_count,
        report.false_target_records,
        report.curv_low_cutoff
    );
    Ok(EXIT_OK)
}

pub fn defaults() -> Result<u8> {
    let mut out = io::stdout().lock();
    for (k, v) in GateConfig::default().entries() {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(EXIT_OK)
}

pub fn provider_stdio() -> Result<u8> {
    let b = BuiltinProviders::standard();
    serve(
        io::stdin().lock(),
        io::stdout().lock(),
        &b.lexicon,
        &b.nli,
        "builtin",
    )?;
    Ok(EXIT_OK)
}
