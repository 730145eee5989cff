use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kmsrp_core::gns::{gns_build, FiniteGroup, FormPDFunction};
use kmsrp_core::kms::{fx1, psi_eval, KmsFunction};
use kmsrp_core::matfun::{c, CVec, RMat};
use kmsrp_core::resolvent::{matrix_coefficient_check, ResolventSpace};
use kmsrp_core::rpext::{
    build_extension, fourier_partial_sum, os_quantize, Parity, RTauElement, ReflectionPositiveSpace,
};
use kmsrp_core::sampling::{random_contraction, rng};
use kmsrp_core::subspace::{modular_from_contraction, ContractionOnV, StandardSubspaceE};

fn modular(c: &mut Criterion) {
    let mut g = c.benchmark_group("modular_from_contraction");
    for n in [4, 16, 64] {
        let s =
            StandardSubspaceE::new(random_contraction(&mut rng(n as u64), n, 0.5, 0.95)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| modular_from_contraction(black_box(s)).unwrap())
        });
    }
    g.finish();
}

fn kms(cr: &mut Criterion) {
    let cv = ContractionOnV::new(random_contraction(&mut rng(3), 16, 0.5, 0.95)).unwrap();
    let k = KmsFunction::new(1.0, cv, None).unwrap();
    cr.bench_function("psi_eval_dim16", |b| {
        b.iter(|| psi_eval(&k, black_box(c(0.3, 0.4))).unwrap())
    });
    cr.bench_function("build_extension_dim16", |b| {
        b.iter(|| build_extension(black_box(&k)).unwrap())
    });
}

fn matsubara(c: &mut Criterion) {
    let one = RMat::identity(1, 1);
    c.bench_function("fourier_partial_sum_n2000", |b| {
        b.iter(|| fourier_partial_sum(&one, 1.0, 2000, black_box(0.37), Parity::Even))
    });
}

fn os(c: &mut Criterion) {
    let f = build_extension(&fx1()).unwrap();
    let times: Vec<f64> = (0..5).map(|i| i as f64 / 8.0).collect();
    c.bench_function("os_quantize_fx1", |b| {
        b.iter(|| {
            let space = ReflectionPositiveSpace::from_rtau(&f, black_box(&times)).unwrap();
            os_quantize(&space).unwrap()
        })
    });
}

fn resolvent(cr: &mut Criterion) {
    let space = ResolventSpace::standard(1.0, 1.0, 1).unwrap();
    let e = CVec::from_fn(4, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    cr.bench_function("resolvent_coefficient_n2000", |b| {
        b.iter(|| {
            matrix_coefficient_check(&space, &e, &e, black_box(RTauElement::new(0.3, true)), 2000)
                .unwrap()
        })
    });
}

fn gns(c: &mut Criterion) {
    let n = 8;
    let values: Vec<RMat> = (0..n)
        .map(|k| {
            RMat::from_element(
                1,
                1,
                1.0 + 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos(),
            )
        })
        .collect();
    let phi = FormPDFunction::from_real(FiniteGroup::cyclic(n), &values).unwrap();
    c.bench_function("gns_build_z8", |b| {
        b.iter(|| gns_build(black_box(&phi)).unwrap())
    });
}

criterion_group!(benches, modular, kms, matsubara, os, resolvent, gns);
criterion_main!(benches);
