use std::f64::consts::TAU;
use std::hint::black_box;

use cellscan_core::analytic::{normal_mass, residual_regions, SectorApprox};
use cellscan_core::codebook::{seq_dsls, seq_edp};
use cellscan_core::{run_rendezvous, Codebook, Environment, LevelRanges, LinkBudget, MtModel, Obstacle, Point2D};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BS: Point2D = Point2D { x: 225.0, y: 175.0 };

fn positions(n: usize) -> Vec<Point2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|_| Point2D::new(rng.random_range(0.0..450.0), rng.random_range(0.0..350.0)))
        .collect()
}

fn sequences(c: &mut Criterion) {
    let cb = Codebook::default();
    let ranges = LevelRanges::new(&cb, &LinkBudget::default(), TAU / 12.0);
    let pts = positions(64);
    c.bench_function("seq_dsls x64", |b| {
        b.iter(|| pts.iter().map(|&p| seq_dsls(&cb, &ranges, p, BS).len()).sum::<usize>())
    });
    c.bench_function("seq_edp n=8 x64", |b| {
        b.iter(|| pts.iter().map(|&p| seq_edp(&cb, &ranges, p, BS, 8).unwrap().len()).sum::<usize>())
    });
}

fn rendezvous(c: &mut Criterion) {
    let cb = Codebook::default();
    let link = LinkBudget::default();
    let ranges = LevelRanges::new(&cb, &link, TAU / 12.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let obstacles: Vec<Obstacle> = (0..30)
        .map(|_| Obstacle::new(rng.random_range(10.0..440.0), rng.random_range(10.0..340.0), 20.0))
        .filter(|o| !o.contains_closed(BS))
        .collect();
    let env = Environment::new(450.0, 350.0, BS, obstacles).unwrap();
    let users: Vec<Point2D> = positions(200).into_iter().filter(|&p| env.is_free(p)).take(64).collect();
    c.bench_function("rendezvous edp1 30 obstacles x64", |b| {
        b.iter(|| {
            users
                .iter()
                .map(|&p| {
                    let seq = seq_edp(&cb, &ranges, p, BS, 1).unwrap();
                    run_rendezvous(&env, &link, &cb, &seq, BS, black_box(p), MtModel::new(12, 0.3, 0)).mt_switches
                })
                .sum::<usize>()
        })
    });
}

fn quadrature(c: &mut Criterion) {
    let cb = Codebook::default();
    let approx = SectorApprox::new(&cb, &LinkBudget::default(), TAU / 12.0, BS);
    let nominal = Point2D::new(300.0, 240.0);
    let seq = seq_dsls(&cb, approx.ranges(), nominal, BS);
    let regions = residual_regions(&approx.footprints(&seq));
    c.bench_function("normal_mass over all residuals", |b| {
        b.iter(|| regions.iter().map(|r| normal_mass(r, black_box(nominal), 20.0, BS)).sum::<f64>())
    });
}

criterion_group!(benches, sequences, rendezvous, quadrature);
criterion_main!(benches);
