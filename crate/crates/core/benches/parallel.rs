use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypsegal::exec::{self, Exec};
use hypsegal::limits::{self, LimitConfig};
use hypsegal::spectral::TestProfile;
use hypsegal::spherical;
use num_complex::Complex64;

const BACKENDS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn isometry(c: &mut Criterion) {
    let cfg = LimitConfig::default();
    let mut g = c.benchmark_group("isometry_limit");
    g.sample_size(10);
    for n in [1u32, 3] {
        let p = TestProfile::Gaussian.profile(n).unwrap();
        for (name, backend) in BACKENDS {
            exec::set(backend);
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| limits::isometry_limit(black_box(&p), 1.0, &cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn phi_sweep(c: &mut Criterion) {
    let lambdas: Vec<f64> = (0..4096).map(|i| i as f64 * 14.0 / 4096.0).collect();
    let r = Complex64::new(2.3, 0.3);
    let mut g = c.benchmark_group("phi_sweep");
    for (name, backend) in BACKENDS {
        g.bench_function(name, |b| {
            b.iter(|| {
                exec::map_with(backend, &lambdas, |&l| spherical::phi_i(l, 2, black_box(r)).unwrap())
            })
        });
    }
    g.finish();
}

criterion_group!(benches, isometry, phi_sweep);
criterion_main!(benches);
