use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use bibc_bench::{reference_channels, symmetric};
use bibc_core::beamforming::{build_sdr_problem, null_dli_beamformer, DEFAULT_NULL_EPS};
use bibc_core::detection::{GammaScheme, MonteCarlo};
use bibc_core::numerics::{from_db, sym_eig_desc};
use bibc_core::sdp::{solve_sdp, SdpSettings};
use bibc_core::{design, synth_channels, AlphaDb, Design, SceneConfig};

fn eigen(c: &mut Criterion) {
    let m = symmetric(32);
    c.bench_function("jacobi_32x32", |b| {
        b.iter(|| sym_eig_desc(black_box(&m)).unwrap())
    });
}

fn channels(c: &mut Criterion) {
    let scene = SceneConfig::reference();
    c.bench_function("synth_channels_reference", |b| {
        b.iter(|| synth_channels(black_box(&scene)).unwrap())
    });
}

fn beamformers(c: &mut Criterion) {
    let ch = reference_channels();
    let problem = build_sdr_problem(&ch, from_db(33.0), 1.0).unwrap();
    c.bench_function("solve_sdp_alpha33", |b| {
        b.iter(|| solve_sdp(black_box(&problem), &SdpSettings::default()).unwrap())
    });
    c.bench_function("null_dli_beamformer", |b| {
        b.iter(|| null_dli_beamformer(black_box(&ch), 1.0, DEFAULT_NULL_EPS).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let ch = reference_channels();
    let x = design(&ch, Design::Alpha(AlphaDb(33.0)), 1.0).unwrap().x;
    let scheme = GammaScheme::antipodal(1);
    let mc = MonteCarlo::new(65_536, 1);
    c.bench_function("monte_carlo_64k", |b| {
        b.iter(|| mc.run(black_box(&ch), &x, &scheme).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = eigen, channels, beamformers, monte_carlo
}
criterion_main!(benches);
