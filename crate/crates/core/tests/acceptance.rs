use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use kmsrp_core::gns::{
    complex_extension, real_gns, skew_commutant, split_complex_kernel, split_roundtrip_defect,
    FiniteGroup, FormPDFunction,
};
use kmsrp_core::kms::{
    boundary_defect, fx1, kms_infinity, phi_operator_form, phi_polar_form, psi_eval, psi_model,
    spectral_measure, Atom, DiscreteFormMeasure, KmsFunction,
};
use kmsrp_core::matfun::{
    c, max_abs_c, op_norm_c, op_norm_r, psd_check, CMat, CVec, HermitianMatrix, RMat,
    SkewSymmetricReal,
};
use kmsrp_core::resolvent::{
    convergence_slope, greens_identity_check, matrix_coefficient_check, ResolventSpace,
};
use kmsrp_core::rpext::{
    build_extension, check_reflection_positive, f_sharp_report, fourier_partial_sum,
    graph_operator, klein4_analysis, matsubara_coeff, matsubara_scalar, os_quantize, rtau_gram,
    u_minus_scalar, u_plus_scalar, Parity, RTauElement, RTauFunction, ReflectionPositiveSpace,
};
use kmsrp_core::sampling::{random_contraction, random_injective_contraction, rng, rtau_sample};
use kmsrp_core::subspace::{
    fixed_space_distance, form_to_contraction, modular_from_contraction, ContractionOnV,
    StandardSubspaceE,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|k| a + step * k as f64).collect()
}

fn modular_identities() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    let (mut jdj, mut fix): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let n = [2, 4, 6, 8][i % 4];
        let s = StandardSubspaceE::new(random_contraction(&mut r, n, 0.5, 0.95)).unwrap();
        let mp = modular_from_contraction(&s).unwrap();
        jdj = jdj.max(mp.jdj_defect());
        fix = fix.max(fixed_space_distance(&mp, &s));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: jdj <= 1e-10 && fix <= 1e-9 && secs < 5.0,
        detail: format!(
            "max ‖JΔJ−Δ⁻¹‖/‖Δ‖ = {jdj:.2e}, max subspace distance = {fix:.2e}, {secs:.2}s"
        ),
    }
}

fn kms_roundtrip() -> Outcome {
    let mut r = rng(2002);
    let ts = grid(-5.0, 5.0, 0.1);
    let mut fns = vec![fx1()];
    for i in 0..6 {
        let n = 2 + i % 3;
        let beta = r.gen_range(0.5..2.0);
        let cv = ContractionOnV::new(random_contraction(&mut r, n, 0.2, 0.9)).unwrap();
        fns.push(KmsFunction::new(beta, cv, None).unwrap());
    }
    let (mut refl, mut resum, mut bdry): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in &fns {
        let mu = spectral_measure(k);
        let scale = max_abs_c(&mu.eval(c(0.0, 0.0))).max(1.0);
        refl = refl.max(mu.reflection_defect(k.beta()) / scale);
        for &t in &ts {
            let d = max_abs_c(&(mu.eval(c(t, 0.0)) - psi_model(k, t)));
            resum = resum.max(d / scale);
        }
        bdry = bdry.max(boundary_defect(mu, k.beta(), &ts) / scale);
    }
    let k = fx1();
    let corrupted = spectral_measure(&k).scaled_atom(0, 1.1);
    let control = boundary_defect(&corrupted, k.beta(), &ts);
    Outcome {
        pass: refl <= 1e-9 && resum <= 1e-10 && bdry <= 1e-9 && control > 1e-3,
        detail: format!(
            "reflection {refl:.2e}, resummation {resum:.2e}, boundary {bdry:.2e}, perturbed atom {control:.2e}"
        ),
    }
}

fn operator_form_consistency() -> Outcome {
    let mut r = rng(3003);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let beta = r.gen_range(0.5..2.0);
        let cv = random_injective_contraction(&mut r, 1 + i % 3, 0.1, 0.95);
        let k = KmsFunction::new(beta, ContractionOnV::new(cv).unwrap(), None).unwrap();
        for t in grid(0.0, beta, beta / 40.0) {
            let a = phi_operator_form(&k, t).unwrap();
            let b = phi_polar_form(&k, t).unwrap();
            worst = worst.max(max_abs_c(&(a - b)));
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max Cayley power vs u± form = {worst:.2e} over 20 contractions"),
    }
}

fn matsubara_convergence() -> Outcome {
    let start = Instant::now();
    let n_max = 2000;
    let one = RMat::identity(1, 1);
    let (mut sup_plus, mut sup_minus): (f64, f64) = (0.0, 0.0);
    for t in grid(0.0, 2.0, 0.01) {
        let sp = fourier_partial_sum(&one, 1.0, n_max, t, Parity::Even)[(0, 0)];
        let sm = fourier_partial_sum(&one, 1.0, n_max, t, Parity::Odd)[(0, 0)];
        sup_plus = sup_plus.max((u_plus_scalar(1.0, 1.0, t) - sp).abs());
        sup_minus = sup_minus.max((u_minus_scalar(1.0, 1.0, t) - sm).abs());
    }
    let n = n_max as i64;
    let scalar_min = (-n..=n)
        .map(|k| matsubara_scalar(1.0, 1.0, k))
        .fold(f64::INFINITY, f64::min);
    let mut r = rng(4004);
    let a = RMat::from_fn(4, 4, |_, _| r.gen_range(-1.0..1.0));
    let b = &a * a.transpose();
    let matrix_min = (-200..=200)
        .map(|k| psd_check(&matsubara_coeff(&b, 1.0, k).unwrap(), 0.0).min_eig)
        .fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: sup_plus <= 1e-3
            && sup_minus <= 1e-3
            && scalar_min >= 0.0
            && matrix_min >= -1e-12
            && secs < 10.0,
        detail: format!(
            "sup|u⁺−S_N| = {sup_plus:.2e}, sup|u⁻−S_N| = {sup_minus:.2e}, min c_n = {scalar_min:.2e}, min eig c_n(B) = {matrix_min:.2e}, {secs:.2}s"
        ),
    }
}

fn extension_functions() -> Vec<kmsrp_core::rpext::RPFunction> {
    let mut r = rng(5005);
    let mut out = vec![build_extension(&fx1()).unwrap()];
    for i in 0..4 {
        let beta = r.gen_range(0.5..2.0);
        let cv = random_injective_contraction(&mut r, 1 + i % 2, 0.2, 0.9);
        let k = KmsFunction::new(beta, ContractionOnV::new(cv).unwrap(), None).unwrap();
        out.push(build_extension(&k).unwrap());
    }
    out
}

fn reflection_positive_extension() -> Outcome {
    let mut r = rng(5055);
    let (mut pd_margin, mut rp_margin): (f64, f64) = (f64::INFINITY, f64::INFINITY);
    let mut odd_fails = true;
    for f in extension_functions() {
        let beta = f.beta();
        let sample = rtau_sample(&mut r, beta, 12);
        let gram = rtau_gram(&f, &sample).unwrap();
        let trace: f64 = gram.matrix().diagonal().iter().map(|z| z.re).sum();
        let min = psd_check(&gram, 0.0).min_eig;
        pd_margin = pd_margin.min(min + 1e-8 * trace);
        let pts = grid(0.0, beta / 2.0, beta / 8.0);
        let rp = check_reflection_positive(&f, &pts, 1e-8).unwrap();
        rp_margin = rp_margin.min(rp.min_eig - rp.threshold);
        let odd = check_reflection_positive(&f.odd_part(), &pts, 1e-8).unwrap();
        odd_fails &= !odd.is_psd;
    }
    Outcome {
        pass: pd_margin >= 0.0 && rp_margin >= 0.0 && odd_fails,
        detail: format!(
            "Gram margin {pd_margin:.2e}, τ-kernel margin {rp_margin:.2e}, odd part rejected: {odd_fails}"
        ),
    }
}

fn f_sharp_covariance() -> Outcome {
    let mut r = rng(6006);
    let (mut cov, mut block): (f64, f64) = (0.0, 0.0);
    let mut all = true;
    for f in extension_functions() {
        let sample = rtau_sample(&mut r, f.beta(), 20);
        let rep = f_sharp_report(&f, &sample).unwrap();
        cov = cov.max(rep.get("fsharp_covariance").unwrap().defect);
        block = block.max(rep.get("fsharp_block_diagonal").unwrap().defect);
        all &= rep.all_pass();
    }
    Outcome {
        pass: cov <= 1e-10 && block == 0.0 && all,
        detail: format!("covariance {cov:.2e}, off-diagonal blocks {block:.1e}"),
    }
}

fn os_quantization() -> Outcome {
    let k = fx1();
    let f = build_extension(&k).unwrap();
    let ts: Vec<f64> = (0..5).map(|i| k.beta() * i as f64 / 8.0).collect();
    let space = ReflectionPositiveSpace::from_rtau(&f, &ts).unwrap();
    let q = os_quantize(&space).unwrap();
    let m = f.dim();
    let mut worst: f64 = 0.0;
    for (a, &ta) in ts.iter().enumerate() {
        for (b, &tb) in ts.iter().enumerate() {
            let psi = psi_eval(&k, c(0.0, ta + tb)).unwrap();
            let block = q
                .twisted_gram
                .matrix()
                .view((a * m, b * m), (m, m))
                .into_owned();
            worst = worst.max(max_abs_c(&(block - psi)));
        }
    }
    let hat = psd_check(&q.gram_hat, 1e-10);
    Outcome {
        pass: worst <= 1e-9 && hat.is_psd,
        detail: format!(
            "max |θ-Gram − ψ(i(s+t))| = {worst:.2e}, quotient rank {}, min eig {:.2e}",
            q.rank(),
            hat.min_eig
        ),
    }
}

fn resolvent_realization() -> Outcome {
    let space = ResolventSpace::standard(1.0, 1.0, 1).unwrap();
    let n = 2 * space.dim();
    let unit = |k: usize| CVec::from_fn(n, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let sample = rtau_sample(&mut rng(8008), 1.0, 10);
    let mut worst: f64 = 0.0;
    for g in &sample {
        for a in 0..n {
            for b in 0..n {
                let ch = matrix_coefficient_check(&space, &unit(a), &unit(b), *g, 2000).unwrap();
                worst = worst.max(ch.defect);
            }
        }
    }
    let greens = greens_identity_check(&space, 2000);
    let fit = convergence_slope(&space, &[250, 500, 1000, 2000]).unwrap();
    Outcome {
        pass: worst <= 1e-3
            && greens.coefficient_defect <= 1e-12
            && fit.slope >= -2.0
            && fit.slope <= -0.5,
        detail: format!(
            "max coefficient defect {worst:.2e}, Green's identity {:.2e}, slope {:.3}",
            greens.coefficient_defect, fit.slope
        ),
    }
}

/// `γ` positive definite and `ω = γ^{1/2} C γ^{1/2}` for a skew `C` of the
/// given norm, with a witness pair for `ω(v,w)² > γ(v,v)γ(w,w)` when the
/// norm exceeds one.
fn gamma_omega<R: Rng>(r: &mut R, n: usize, norm: f64) -> (RMat, RMat, f64) {
    let a = RMat::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let gamma = &a * a.transpose() + RMat::identity(n, n) * 0.5;
    let eig = gamma.clone().symmetric_eigen();
    let half = &eig.eigenvectors
        * RMat::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let cm = kmsrp_core::sampling::random_skew(r, n, norm);
    let omega = &half * cm.matrix() * &half;
    let svd = cm.matrix().clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let k = svd.singular_values.imax();
    let inv_half = half.clone().try_inverse().unwrap();
    let v = &inv_half * u.column(k);
    let w = &inv_half * vt.row(k).transpose();
    let om = (v.transpose() * &omega * &w)[(0, 0)];
    let gv = (v.transpose() * &gamma * &v)[(0, 0)];
    let gw = (w.transpose() * &gamma * &w)[(0, 0)];
    (gamma, omega, om * om - gv * gw)
}

fn appendix_suite() -> Outcome {
    let mut r = rng(9009);
    let mut accepted = 0;
    let mut rejected = 0;
    for i in 0..50 {
        let n = 2 + 2 * (i % 3);
        let norm = r.gen_range(0.1..0.9);
        let (g, o, excess) = gamma_omega(&mut r, n, norm);
        if excess <= 0.0 && form_to_contraction(&g, &o).is_ok() {
            accepted += 1;
        }
        let norm = r.gen_range(1.1..2.0);
        let (g, o, excess) = gamma_omega(&mut r, n, norm);
        if excess > 0.0 && !form_to_contraction(&g, &o).is_ok() {
            rejected += 1;
        }
    }

    let mut split: f64 = 0.0;
    let mut extensions = 0;
    for order in 3..=8 {
        let a: Vec<f64> = (0..order).map(|_| r.gen_range(0.1..1.0)).collect();
        let values: Vec<RMat> = (0..order)
            .map(|k| {
                let v = (0..order).fold(0.0, |acc, j| {
                    let jj = j.min(order - j);
                    acc + a[jj] * (2.0 * PI * (j * k) as f64 / order as f64).cos()
                });
                RMat::from_element(1, 1, v)
            })
            .collect();
        let phi = FormPDFunction::from_real(FiniteGroup::cyclic(order), &values).unwrap();
        let g = real_gns(&phi).unwrap();
        for gen in skew_commutant(&g.rep) {
            let cm =
                SkewSymmetricReal::new(gen.scale(r.gen_range(0.2..0.9) / op_norm_r(&gen))).unwrap();
            let ext = complex_extension(&phi, &g, &cm).unwrap();
            let sk = split_complex_kernel(&ext.gram().unwrap()).unwrap();
            split = split.max(split_roundtrip_defect(&g, &cm, &sk));
            extensions += 1;
        }
    }

    let mut klein = true;
    for v in [
        [2.0, 1.0, 1.0, 0.0],
        [1.0, 2.0, 3.0, 4.0],
        [3.0, 0.0, 2.0, 1.0],
        [1.0, 1.0, 1.0, 1.0],
    ] {
        let rep = klein4_analysis(c(v[0], 0.0), c(v[1], 0.0), c(v[2], 0.0), c(v[3], 0.0));
        let s: Vec<f64> = v.iter().map(|x| x * x).collect();
        let expect = [
            s[0] + s[1] + s[2] + s[3],
            s[0] + s[1] - s[2] - s[3],
            s[0] - s[1] + s[2] - s[3],
            s[0] - s[1] - s[2] + s[3],
        ];
        klein &= rep.f == expect && rep.f_direct == expect && rep.consistent();
    }
    let k4 = klein4_analysis(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
    klein &= k4.f == [6.0, 4.0, 4.0, 2.0];

    let mut graph: f64 = 0.0;
    for i in 0..10 {
        let (p, q) = (1 + i % 3, 1 + (i / 3) % 3);
        let z = CMat::from_fn(q, p, |_, _| {
            c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        });
        let z = &z * c(r.gen_range(0.1..0.9) / op_norm_c(&z), 0.0);
        let k = CMat::from_fn(p + q, p, |i, j| {
            if i < p {
                c(if i == j { 1.0 } else { 0.0 }, 0.0)
            } else {
                z[(i - p, j)]
            }
        });
        let rep = graph_operator(p, &k).unwrap();
        let zz = z.adjoint() * &z;
        let id = CMat::identity(p, p);
        let closed = (&id - &zz) * (&id + &zz).try_inverse().unwrap();
        // `phi_tau` is expressed in its own orthonormal basis of K, so the
        // closed form is compared up to unitary conjugation.
        let spectrum = |m: &CMat| {
            let mut e: Vec<f64> = HermitianMatrix::hermitian_part(m)
                .matrix()
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            e.sort_by(f64::total_cmp);
            e
        };
        let direct = spectrum(&rep.phi_tau)
            .iter()
            .zip(spectrum(&closed))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        graph = graph.max(rep.max_defect()).max(direct);
    }

    Outcome {
        pass: accepted == 50 && rejected == 50 && split <= 1e-9 && extensions > 0 && klein && graph <= 1e-10,
        detail: format!(
            "(γ,ω): {accepted}/50 accepted, {rejected}/50 rejected; split∘extension {split:.2e} over {extensions}; Klein-4 exact: {klein}; graph formula {graph:.2e}"
        ),
    }
}

fn beta_infinity() -> Outcome {
    let mut r = rng(10010);
    let mut all = true;
    let mut worst_bound: f64 = 0.0;
    for _ in 0..5 {
        let m = 2;
        let atoms = (0..3)
            .map(|_| {
                let a = CMat::from_fn(m, m, |_, _| {
                    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
                });
                Atom {
                    lambda: r.gen_range(0.0..3.0),
                    weight: &a * a.adjoint(),
                }
            })
            .collect();
        let mu = DiscreteFormMeasure::new(atoms).unwrap();
        let upper: Vec<_> = (0..50)
            .map(|_| c(r.gen_range(-5.0..5.0), r.gen_range(0.0..5.0)))
            .collect();
        let times = grid(0.0, 2.0, 0.25);
        let sample: Vec<RTauElement> = (0..12)
            .map(|k| RTauElement::new(r.gen_range(-2.0..2.0), k % 2 == 1))
            .collect();
        let rep = kms_infinity(&mu, &times, &upper, &sample).unwrap();
        all &= rep.all_pass();
        worst_bound = worst_bound.max(rep.get("upper_half_plane_bound").unwrap().defect);
    }
    let negative = DiscreteFormMeasure::new(vec![
        Atom {
            lambda: 0.5,
            weight: CMat::identity(2, 2),
        },
        Atom {
            lambda: 1.5,
            weight: CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)])),
        },
    ])
    .unwrap();
    let rejected = kms_infinity(
        &negative,
        &[0.0, 1.0],
        &[c(0.0, 1.0)],
        &[RTauElement::unit()],
    )
    .is_err();
    Outcome {
        pass: all && rejected,
        detail: format!("bound excess {worst_bound:.2e}, Gram checks pass: {all}, negative atom rejected: {rejected}"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [Criterion; 10] = [
        ("modular identities", modular_identities),
        ("KMS characterization roundtrip", kms_roundtrip),
        ("operator form of φ", operator_form_consistency),
        ("Matsubara convergence", matsubara_convergence),
        (
            "reflection positive extension",
            reflection_positive_extension,
        ),
        ("f♯ covariance", f_sharp_covariance),
        ("OS quantization", os_quantization),
        ("resolvent realization", resolvent_realization),
        ("kernel and Klein-4 suite", appendix_suite),
        ("β = ∞", beta_infinity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of 10 passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
