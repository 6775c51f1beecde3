//! End-to-end stage benchmarks: MoM assembly, the characteristic-mode solve,
//! far-field radiation, and one beamforming campaign cell.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use mma_bench::rectangle_fixture;
use mma_core::beamforming::{
    build_analog_precoder, draw_channel, greedy_user_schedule, rate_of_set, Csi, Scheme, UserSpec,
};
use mma_core::*;
use num_complex::Complex64;

fn bench_assembly(c: &mut Criterion) {
    let mesh = make_plate_mesh(
        PlateSpec::Rectangle {
            width: 1.0,
            height: 0.5,
        },
        1.0 / 12.0,
    )
    .unwrap();
    let basis = build_rwg_basis(&mesh).unwrap();
    let mut group = c.benchmark_group("mom");
    group.sample_size(10);
    group.bench_function("assemble_impedance_n198", |b| {
        b.iter(|| assemble_impedance(black_box(&basis)).unwrap())
    });
    group.finish();
}

fn bench_eigensolve(c: &mut Criterion) {
    let (_, zop) = rectangle_fixture(1.0 / 12.0);
    let mut group = c.benchmark_group("cma");
    group.sample_size(10);
    group.bench_function("solve_characteristic_modes_n198_m8", |b| {
        b.iter(|| solve_characteristic_modes(black_box(&zop), 8).unwrap())
    });
    group.finish();
}

fn bench_far_field(c: &mut Criterion) {
    let (basis, zop) = rectangle_fixture(1.0 / 12.0);
    let cma = solve_characteristic_modes(&zop, 1).unwrap();
    let coeffs: Vec<Complex64> = cma.currents[0]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let grid = SphereGrid::new(36, 72).unwrap();
    let mut group = c.benchmark_group("farfield");
    group.sample_size(20);
    group.bench_function("radiate_mode_36x72", |b| {
        b.iter(|| radiated_far_field(black_box(&basis), black_box(&coeffs), &grid).unwrap())
    });
    group.finish();
}

fn bench_beamforming_cell(c: &mut Criterion) {
    let layout = layout_grid(2, 2, 0.72f64.sqrt(), 0.58, 4).unwrap();
    let grid = SphereGrid::new(18, 36).unwrap();
    let patterns = PortPatternTable::synthetic(4, &grid);
    let users: Vec<UserSpec> = [(20.0, 60.0), (-40.0, 50.0), (75.0, 70.0), (-70.0, 45.0)]
        .iter()
        .map(|&(az, el)| UserSpec::los(az, el))
        .collect();
    c.bench_function("campaign_cell_digital_4users", |b| {
        b.iter_batched(
            || draw_channel(&layout, &patterns, &users, 4, 7).unwrap(),
            |ch| {
                let analog = build_analog_precoder(
                    Scheme::Digital,
                    &layout,
                    &patterns,
                    &Csi::Channel(&ch),
                    None,
                )
                .unwrap();
                let sched = greedy_user_schedule(&ch.h, &analog.a, 1.0, 0.1, None).unwrap();
                black_box(rate_of_set(&ch.h, &analog.a, &sched, 1.0, 0.1).unwrap())
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_assembly,
    bench_eigensolve,
    bench_far_field,
    bench_beamforming_cell
);
criterion_main!(benches);
