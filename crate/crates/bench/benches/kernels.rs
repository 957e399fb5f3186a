use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ris_est_bench::{desk_with_paths, trial};
use ris_est_core::estimators::{acquire_row_support, UampSbl};
use ris_est_core::numerics::economy_svd;
use ris_est_core::{ComplexMatrix, SblHyperparams};

fn kernels(c: &mut Criterion) {
    let cfg = desk_with_paths(10);
    let data = trial(&cfg);
    let meas = &data.measurement;

    c.bench_function("economy_svd_96x64", |b| b.iter(|| economy_svd(black_box(&meas.sensing)).unwrap()));

    c.bench_function("row_support", |b| {
        b.iter(|| acquire_row_support(black_box(&meas.observations), cfg.paths_bs_ris))
    });

    let solver = UampSbl::new(&meas.sensing).unwrap();
    let row = data.realization.row_support[0];
    let z = ComplexMatrix::from_fn(cfg.pilots, cfg.users, |r, j| meas.observations[j][(r, row)]);
    let hp = SblHyperparams::pci_default();
    c.bench_function("uamp_sbl_row_uncoupled", |b| {
        b.iter(|| solver.solve(black_box(&z), &hp, ris_est_core::estimators::Coupling::None).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
