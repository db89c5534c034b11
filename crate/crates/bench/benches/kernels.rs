//! Micro-benchmarks for the numeric kernels on the hot path of a fit:
//! feature evaluation, the closed-form operator solve, the quality score,
//! and the spectral decomposition.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dyndict::dictionary::Dictionary;
use dyndict::koopman::{edmd_solve, spectral_decompose, vamp2_score};
use dyndict::linalg::{Matrix, Vector};
use dyndict::presets::OuPreset;
use dyndict::simulate::TrajectoryData;

struct Fixture {
    dict: Dictionary,
    w0: Vector,
    data: TrajectoryData,
    psi_x: Matrix,
    psi_y: Matrix,
    k: Matrix,
}

fn make_fixture() -> Fixture {
    let preset = OuPreset {
        m: 2000,
        ..OuPreset::default()
    };
    let data = preset.generate().expect("preset data");
    let (dict, w0) = preset.dictionary();
    let psi_x = dict.evaluate(&data.x, &w0).expect("features");
    let psi_y = dict.evaluate(&data.y, &w0).expect("features");
    let k = edmd_solve(&psi_x, &psi_y, None).expect("solve");
    Fixture {
        dict,
        w0,
        data,
        psi_x,
        psi_y,
        k,
    }
}

fn bench_kernels(c: &mut Criterion) {
    let fx = make_fixture();

    c.bench_function("evaluate_14_gaussians_on_2000_points", |b| {
        b.iter(|| fx.dict.evaluate(black_box(&fx.data.x), black_box(&fx.w0)).unwrap())
    });

    c.bench_function("closed_form_operator_solve_14x2000", |b| {
        b.iter(|| edmd_solve(black_box(&fx.psi_x), black_box(&fx.psi_y), None).unwrap())
    });

    c.bench_function("quality_score_14x2000", |b| {
        b.iter(|| vamp2_score(black_box(&fx.psi_x), black_box(&fx.psi_y), 1e-8, None).unwrap())
    });

    c.bench_function("spectral_decomposition_14x14", |b| {
        b.iter(|| spectral_decompose(black_box(&fx.k)).unwrap())
    });
}

criterion_group!(kernels, bench_kernels);
criterion_main!(kernels);
