use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyres::rewriting::Side;
use polyres::{build_resolution, critical_nfold, normal_form, syzygy_generators, verify_complex};
use polyres_bench::{as_polygraph, epi, power, right_zero};
use std::hint::black_box;

fn rewriting(c: &mut Criterion) {
    let p = as_polygraph();
    let mut group = c.benchmark_group("normal_form");
    for n in [8, 64, 512] {
        let w = power(&p, n);
        group.bench_with_input(BenchmarkId::new("as_rightmost", n), &w, |b, w| {
            b.iter(|| normal_form(&p, black_box(w), Side::Rightmost).expect("nf"))
        });
    }
    let e = epi(6);
    let w = e.parse_word("s0^5.s0^4.s0^3.s0^2.s0^1.s0^0").expect("word");
    group.bench_function("epi6_leftmost", |b| b.iter(|| normal_form(&e, black_box(&w), Side::Leftmost).expect("nf")));
    group.finish();
}

fn branchings(c: &mut Criterion) {
    let mut group = c.benchmark_group("critical_nfold");
    let e = epi(6);
    for n in [2, 3, 4] {
        group.bench_with_input(BenchmarkId::new("epi6", n), &n, |b, &n| b.iter(|| critical_nfold(&e, n).expect("tower")));
    }
    group.finish();
}

fn resolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolution");
    group.sample_size(10);
    let p = as_polygraph();
    group.bench_function("as_dim6", |b| b.iter(|| build_resolution(&p, 6).expect("resolution")));
    let e = epi(5);
    group.bench_function("epi5_dim4", |b| b.iter(|| build_resolution(&e, 4).expect("resolution")));
    group.bench_function("epi5_syzygies_3", |b| {
        b.iter(|| {
            let r = build_resolution(&e, 4).expect("resolution");
            syzygy_generators(&r, 3).expect("syzygies")
        })
    });
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_complex");
    group.sample_size(10);
    let p = as_polygraph();
    group.bench_function("as_n5_l2", |b| {
        b.iter(|| {
            let r = build_resolution(&p, 5).expect("resolution");
            verify_complex(&r, 5, 2, Some(1)).expect("report")
        })
    });
    let m = right_zero();
    group.bench_function("right_zero_n4_l2", |b| {
        b.iter(|| {
            let r = build_resolution(&m, 4).expect("resolution");
            verify_complex(&r, 4, 2, Some(1)).expect("report")
        })
    });
    group.finish();
}

criterion_group!(benches, rewriting, branchings, resolution, verification);
criterion_main!(benches);
