//! Hot paths: field arithmetic, Gaussian elimination, homology, pages, Day convolution.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fzip_core::filt::{day_convolution, spectral_page};
use fzip_core::gen::{rand_complex, rand_filtration, rand_mat, rng};
use fzip_core::{make_field, Field};

fn fields() -> Vec<(&'static str, Field)> {
    vec![
        ("gf2", make_field(2, 1).unwrap()),
        ("gf16", make_field(2, 4).unwrap()),
        ("gf9", make_field(3, 2).unwrap()),
    ]
}

fn bench_field_ops(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_mul_inv");
    for (name, f) in fields() {
        let q = f.q() as u16;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut acc = 1u16;
                for a in 1..q {
                    acc = f.mul(acc, a);
                    acc = f.inv(black_box(acc.max(1))).unwrap();
                }
                acc
            })
        });
    }
    group.finish();
}

fn bench_rref(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_64x64");
    for (name, f) in fields() {
        let mut r = rng(17);
        let m = rand_mat(&mut r, &f, 64, 64);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(&m).rank())
        });
    }
    group.finish();
}

fn bench_homology(c: &mut Criterion) {
    let f = make_field(2, 2).unwrap();
    let mut r = rng(23);
    let cx = rand_complex(&mut r, &f, -3, &[12, 16, 16, 16, 12]);
    c.bench_function("homology_len5_dim16", |b| {
        b.iter(|| black_box(&cx).homology_complex())
    });
}

fn bench_spectral_page(c: &mut Criterion) {
    let f = make_field(2, 1).unwrap();
    let mut r = rng(31);
    let filts: Vec<_> = (0..8)
        .map(|_| rand_filtration(&mut r, &f, fzip_core::Direction::Descending, 4, 8))
        .collect();
    c.bench_function("page_two_of_eight_filtrations", |b| {
        b.iter(|| {
            for filt in &filts {
                black_box(spectral_page(filt, 2).unwrap());
            }
        })
    });
}

fn bench_day(c: &mut Criterion) {
    let f = make_field(3, 1).unwrap();
    let mut r = rng(41);
    let x = rand_filtration(&mut r, &f, fzip_core::Direction::Ascending, 3, 4);
    let y = rand_filtration(&mut r, &f, fzip_core::Direction::Ascending, 3, 4);
    c.bench_function("day_convolution_3x3", |b| {
        b.iter(|| day_convolution(black_box(&x), black_box(&y)).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_field_ops,
    bench_rref,
    bench_homology,
    bench_spectral_page,
    bench_day
);
criterion_main!(kernels);
