use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use psc_bench::{full_log, quantized_psc, token_corpus};
use psc_core::psc::OffsetPrecision;
use psc_core::tokenizer::{bpe_apply, bpe_train, constrained_generate, detokenize, tokenize, UniformScorer};
use psc_core::{reverse_log, shapes, simplify, PenaltyConfig, Stop, VirtualEdges};

fn simplification(c: &mut Criterion) {
    let mut g = c.benchmark_group("simplify");
    g.sample_size(10);
    for (name, mesh) in [("icosphere-642", shapes::icosphere(3)), ("assembly", shapes::assembly(5, 12))] {
        g.bench_function(name, |b| {
            b.iter(|| simplify(black_box(&mesh), &PenaltyConfig::default(), VirtualEdges::Delaunay, Stop::Full).unwrap())
        });
    }
    g.finish();
}

fn codec(c: &mut Criterion) {
    let mesh = shapes::icosphere(3);
    let log = full_log(&mesh);
    let psc = quantized_psc(&mesh);
    let tokens = tokenize(&psc).unwrap();
    let mut g = c.benchmark_group("codec");
    g.bench_function("reverse_log", |b| b.iter(|| reverse_log(black_box(&log), OffsetPrecision::F64).unwrap()));
    g.bench_function("reconstruct", |b| b.iter(|| black_box(&psc).reconstruct_all().unwrap()));
    g.bench_function("tokenize", |b| b.iter(|| tokenize(black_box(&psc)).unwrap()));
    g.bench_function("detokenize", |b| b.iter(|| detokenize(black_box(&tokens), psc.root).unwrap()));
    g.finish();
}

fn tokens(c: &mut Criterion) {
    let corpus = token_corpus(40);
    let vocab = bpe_train(&corpus, 4096).unwrap();
    let mut g = c.benchmark_group("tokens");
    g.sample_size(10);
    g.bench_function("bpe_train", |b| b.iter_batched(|| corpus.clone(), |c| bpe_train(&c, 4096).unwrap(), BatchSize::LargeInput));
    g.bench_function("bpe_apply", |b| b.iter(|| corpus.iter().map(|s| bpe_apply(s, &vocab).unwrap().len()).sum::<usize>()));
    g.bench_function("generate-50", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            constrained_generate(&mut UniformScorer, seed, 50).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, simplification, codec, tokens);
criterion_main!(benches);
