use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use eidoku_bench::scaling_fixture;
use eidoku_core::{
    fit_subspace, run_gate, BuiltinProviders, EmbeddingProvider, GateConfig, GeometryConfig,
    Lexicon,
};

fn gate_steps(c: &mut Criterion) {
    let providers = BuiltinProviders::standard();
    let cfg = GateConfig::default();
    let mut group = c.benchmark_group("run_gate");
    for n in [10, 20, 40, 80] {
        let (ctx, chains) = scaling_fixture(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                run_gate(
                    black_box(&ctx),
                    black_box(&chains),
                    &cfg,
                    providers.providers(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn lexicon_embed(c: &mut Criterion) {
    let lex = Lexicon::builtin();
    let texts = [
        "Dog is canine.",
        "Therefore, python is a programming language.",
        "Paris is france.",
    ];
    c.bench_function("lexicon_embed_3", |b| {
        b.iter(|| lex.embed(black_box(&texts)).unwrap())
    });
}

fn subspace_fit(c: &mut Criterion) {
    let lex = Lexicon::builtin();
    let (ctx, _) = scaling_fixture(10);
    let rendered: Vec<String> = ctx[ctx.len() - 10..].iter().map(|s| s.render()).collect();
    let refs: Vec<&str> = rendered.iter().map(String::as_str).collect();
    let rows = lex.embed(&refs).unwrap();
    let geo = GeometryConfig::default();
    c.bench_function("fit_subspace_w10_d32", |b| {
        b.iter(|| fit_subspace(black_box(&rows), &geo).unwrap())
    });
}

criterion_group!(benches, gate_steps, lexicon_embed, subspace_fit);
criterion_main!(benches);
