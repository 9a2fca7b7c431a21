use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fraclab_bench::{exterior_point, interior_point, orders};
use fraclab_core::harmonics::{annulus_frac_lap_poly, harmonic_basis};
use fraclab_core::kernels::{green_ball, green_halfspace, poisson_halfspace, NormMode};
use fraclab_core::special::inc_beta_regularized_inv;
use fraclab_core::FracOrder;

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    for o in orders() {
        let n = o.dim();
        let x = interior_point(n, 0.4);
        let y = interior_point(n, 0.9);
        let z = exterior_point(n, 1.5);
        let label = format!("N{n}_s{}", o.s());
        if n as f64 > 2.0 * o.s() {
            g.bench_with_input(BenchmarkId::new("green_halfspace", &label), &o, |b, o| {
                b.iter(|| green_halfspace(o, black_box(&x), black_box(&y)))
            });
        }
        let xb: Vec<f64> = x.iter().map(|c| 0.5 * c).collect();
        let yb: Vec<f64> = y.iter().map(|c| 0.5 * c).collect();
        g.bench_with_input(BenchmarkId::new("green_ball", &label), &o, |b, o| {
            b.iter(|| green_ball(o, black_box(&xb), black_box(&yb), 1.0))
        });
        g.bench_with_input(BenchmarkId::new("poisson_halfspace", &label), &o, |b, o| {
            b.iter(|| poisson_halfspace(o, black_box(&x), black_box(&z), NormMode::ProbabilisticKappa))
        });
    }
    g.finish();
}

fn special(c: &mut Criterion) {
    c.bench_function("inc_beta_inverse", |b| b.iter(|| inc_beta_regularized_inv(black_box(0.73), 0.5, 0.5, 1e-13)));
    c.bench_function("constants_N3", |b| b.iter(|| FracOrder::new(3, black_box(0.4)).unwrap().constants()));
}

fn harmonic(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonics");
    g.sample_size(20);
    for (n, m) in [(2, 6), (3, 4), (4, 4)] {
        g.bench_function(BenchmarkId::new("basis", format!("N{n}_m{m}")), |b| b.iter(|| harmonic_basis(n, m).unwrap()));
    }
    let o = FracOrder::new(3, 0.4).unwrap();
    let basis = harmonic_basis(3, 4).unwrap();
    g.bench_function("annulus_poly_N3_m4", |b| {
        b.iter(|| annulus_frac_lap_poly(&o, black_box(&basis[0]), &[0.7, -0.4, 0.25], 1e-3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels, special, harmonic);
criterion_main!(benches);
