//! Benchmarks for the main pipeline stages: basis enumeration, SOS
//! certification, dual construction and solution, and the primal oracle.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sosdual_bench::{generated_fractional, generated_minimax, generated_sos, quartic_pair};
use sosdual_core::{
    build_dual, build_fractional_dual, is_sos, is_sos_convex, solve_primal, MonomialBasis,
    OracleOptions, SolverConfig, SosOptions,
};

fn bench_basis(c: &mut Criterion) {
    c.bench_function("monomial basis n=4 d=6", |b| {
        b.iter(|| MonomialBasis::new(black_box(4), black_box(6)).expect("valid"))
    });
}

fn bench_sos(c: &mut Criterion) {
    let opts = SosOptions::default();
    let f2 = generated_sos(2, 3);
    c.bench_function("certify sos n=2 deg=6", |b| {
        b.iter(|| is_sos(black_box(&f2), &opts).expect("solver runs"))
    });
    let f3 = generated_sos(3, 2);
    c.bench_function("certify sos n=3 deg=4", |b| {
        b.iter(|| is_sos(black_box(&f3), &opts).expect("solver runs"))
    });
    let convex = {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(31);
        sosdual_core::gen::sos_convex_poly(&mut rng, 3)
    };
    c.bench_function("certify sos-convex n=3 quartic", |b| {
        b.iter(|| is_sos_convex(black_box(&convex), &opts).expect("solver runs"))
    });
}

fn bench_dual(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let hand = quartic_pair();
    c.bench_function("build+solve dual hand minimax", |b| {
        b.iter(|| {
            build_dual(black_box(&hand))
                .expect("valid")
                .solve(&cfg)
                .expect("solver runs")
        })
    });
    let gen3 = generated_minimax(3);
    c.bench_function("build+solve dual generated n=3", |b| {
        b.iter(|| {
            build_dual(black_box(&gen3))
                .expect("valid")
                .solve(&cfg)
                .expect("solver runs")
        })
    });
    let frac2 = generated_fractional(2);
    let sos_opts = SosOptions::default();
    c.bench_function("build+solve ratio dual generated n=2", |b| {
        b.iter(|| {
            build_fractional_dual(black_box(&frac2), &sos_opts)
                .expect("valid")
                .solve(&cfg)
                .expect("solver runs")
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let opts = OracleOptions::default();
    let hand = quartic_pair();
    c.bench_function("oracle hand minimax", |b| {
        b.iter(|| solve_primal(black_box(&hand), &opts).expect("oracle runs"))
    });
    let gen2 = generated_minimax(2);
    c.bench_function("oracle generated n=2", |b| {
        b.iter(|| solve_primal(black_box(&gen2), &opts).expect("oracle runs"))
    });
}

criterion_group!(benches, bench_basis, bench_sos, bench_dual, bench_oracle);
criterion_main!(benches);
