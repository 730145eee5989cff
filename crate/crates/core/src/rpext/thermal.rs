use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matfun::{sym_eig, sym_fun, HermitianMatrix, RMat, RVec};

/// Fourier modes of a given parity: even modes build `u⁺`, odd modes `u⁻`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn matches(self, n: i64) -> bool {
        (n.rem_euclid(2) == 0) == (self == Parity::Even)
    }
}

/// Reduces `t` to `[0, β)` and returns the sign picked up by `u⁻`.
fn reduce(beta: f64, t: f64) -> (f64, f64) {
    let s = t.rem_euclid(2.0 * beta);
    if s >= beta {
        (s - beta, -1.0)
    } else {
        (s, 1.0)
    }
}

/// `u⁺_λ(t) = (e^{−tλ} + e^{−(β−t)λ})/(1 + e^{−βλ})` on `[0,β]`, extended
/// β-periodically.
pub fn u_plus_scalar(lambda: f64, beta: f64, t: f64) -> f64 {
    let (s, _) = reduce(beta, t);
    ((-s * lambda).exp() + (-(beta - s) * lambda).exp()) / (1.0 + (-beta * lambda).exp())
}

/// `u⁻_λ(t) = (e^{−tλ} − e^{−(β−t)λ})/(1 + e^{−βλ})` on `[0,β]`, extended
/// by `u⁻(t+β) = −u⁻(t)`.
pub fn u_minus_scalar(lambda: f64, beta: f64, t: f64) -> f64 {
    let (s, sign) = reduce(beta, t);
    sign * ((-s * lambda).exp() - (-(beta - s) * lambda).exp()) / (1.0 + (-beta * lambda).exp())
}

pub fn u_plus_matrix(abs_d: &RMat, beta: f64, t: f64) -> RMat {
    sym_fun(abs_d, |x| u_plus_scalar(x.max(0.0), beta, t)).expect("finite on [0, ∞)")
}

pub fn u_minus_matrix(abs_d: &RMat, beta: f64, t: f64) -> RMat {
    sym_fun(abs_d, |x| u_minus_scalar(x.max(0.0), beta, t)).expect("finite on [0, ∞)")
}

/// Fourier coefficient of `u±_λ` at `χ_n(t) = e^{iπnt/β}`:
/// `(1 − (−1)ⁿe^{−βλ})/(1 + e^{−βλ}) · 2βλ/((βλ)² + (nπ)²)`.
/// At `λ = 0` this takes its limit `δ_{n0}`.
pub fn matsubara_scalar(lambda: f64, beta: f64, n: i64) -> f64 {
    let x = beta * lambda;
    let np = n as f64 * PI;
    if n.rem_euclid(2) == 0 {
        if n == 0 {
            if x.abs() < 1e-8 {
                return 1.0 - x * x / 12.0;
            }
            return (x / 2.0).tanh() * 2.0 / x;
        }
        (x / 2.0).tanh() * 2.0 * x / (x * x + np * np)
    } else {
        2.0 * x / (x * x + np * np)
    }
}

fn check_psd(abs_d: &RMat) -> Result<()> {
    let (vals, _) = sym_eig(abs_d);
    let scale = vals.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    if vals.iter().any(|&x| x < -1e-12 * scale) {
        return Err(Error::BadParams("|D| must be positive semidefinite".into()));
    }
    Ok(())
}

pub fn matsubara_coeff(abs_d: &RMat, beta: f64, n: i64) -> Result<HermitianMatrix> {
    check_psd(abs_d)?;
    let m = sym_fun(abs_d, |x| matsubara_scalar(x.max(0.0), beta, n))?;
    HermitianMatrix::from_real(&m)
}

fn partial_sum_scalar(lambda: f64, beta: f64, n_max: usize, t: f64, parity: Parity) -> f64 {
    let mut sum = 0.0;
    for n in 0..=n_max as i64 {
        if !parity.matches(n) {
            continue;
        }
        let cn = matsubara_scalar(lambda, beta, n);
        sum += if n == 0 {
            cn
        } else {
            2.0 * cn * (n as f64 * PI * t / beta).cos()
        };
    }
    sum
}

/// `Σ_{|n| ≤ N, n of the given parity} c_n χ_n(t)` as a real symmetric
/// matrix.
pub fn fourier_partial_sum(abs_d: &RMat, beta: f64, n_max: usize, t: f64, parity: Parity) -> RMat {
    let (vals, vecs) = sym_eig(abs_d);
    let sums = RVec::from_iterator(
        vals.len(),
        vals.iter()
            .map(|&x| partial_sum_scalar(x.max(0.0), beta, n_max, t, parity)),
    );
    &vecs * RMat::from_diagonal(&sums) * vecs.transpose()
}

/// Exact tail `Σ_{|n| > N} ‖c_n‖` of the given parity. All coefficients are
/// nonnegative, so this equals `u±(0) − S_N(0)` and bounds the uniform error.
pub fn fourier_tail(abs_d: &RMat, beta: f64, n_max: usize, parity: Parity) -> f64 {
    let (vals, _) = sym_eig(abs_d);
    vals.iter()
        .map(|&x| {
            let x = x.max(0.0);
            let total = match parity {
                Parity::Even => u_plus_scalar(x, beta, 0.0),
                Parity::Odd => u_minus_scalar(x, beta, 0.0),
            };
            total - partial_sum_scalar(x, beta, n_max, 0.0, parity)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        assert!((matsubara_scalar(1.0, 1.0, 0) - 2.0 * 0.5f64.tanh()).abs() < 1e-15);
        assert!((matsubara_scalar(1.0, 1.0, 0) - 0.924234).abs() < 1e-6);
        assert!((matsubara_scalar(1.0, 1.0, 1) - 2.0 / (1.0 + PI * PI)).abs() < 1e-15);
        assert!((matsubara_scalar(1.0, 1.0, 1) - 0.184).abs() < 1e-6);
        assert_eq!(
            matsubara_scalar(1.0, 1.0, 3),
            matsubara_scalar(1.0, 1.0, -3)
        );
        assert!((matsubara_scalar(0.0, 1.0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(matsubara_scalar(0.0, 1.0, 2), 0.0);
        assert_eq!(matsubara_scalar(0.0, 1.0, 1), 0.0);
    }

    #[test]
    fn coefficients_match_quadrature() {
        let (lambda, beta) = (1.7, 0.8);
        for n in -4i64..=4 {
            let m = 20000;
            let h = 2.0 * beta / m as f64;
            let mut acc = 0.0;
            for k in 0..m {
                let t = (k as f64 + 0.5) * h;
                let u = if n.rem_euclid(2) == 0 {
                    u_plus_scalar(lambda, beta, t)
                } else {
                    u_minus_scalar(lambda, beta, t)
                };
                acc += u * (n as f64 * PI * t / beta).cos() * h;
            }
            let cn = acc / (2.0 * beta);
            assert!(
                (cn - matsubara_scalar(lambda, beta, n)).abs() < 1e-7,
                "n={n}"
            );
        }
    }

    #[test]
    fn u_plus_closed_form_grid() {
        let expected = [1.0, 0.914_70, 0.886_82, 0.914_70, 1.0];
        for (k, e) in expected.iter().enumerate() {
            let t = 0.25 * k as f64;
            assert!((u_plus_scalar(1.0, 1.0, t) - e).abs() < 1e-4);
        }
    }

    #[test]
    fn periodicity() {
        for k in 0..20 {
            let t = 0.13 * k as f64;
            assert!((u_plus_scalar(0.9, 1.2, t + 1.2) - u_plus_scalar(0.9, 1.2, t)).abs() < 1e-14);
            assert!(
                (u_minus_scalar(0.9, 1.2, t + 1.2) + u_minus_scalar(0.9, 1.2, t)).abs() < 1e-14
            );
            assert!((u_minus_scalar(0.9, 1.2, -t) - u_minus_scalar(0.9, 1.2, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn coeff_matrix_psd() {
        let d = RMat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        for n in -5..=5 {
            let c = matsubara_coeff(&d, 1.0, n).unwrap();
            assert!(crate::matfun::psd_check(&c, 1e-12).is_psd);
        }
        let bad = RMat::from_row_slice(1, 1, &[-1.0]);
        assert!(matsubara_coeff(&bad, 1.0, 0).is_err());
    }

    #[test]
    fn tail_bounds_error() {
        let d = RMat::from_element(1, 1, 1.0);
        let tail = fourier_tail(&d, 1.0, 200, Parity::Even);
        assert!(tail > 0.0 && tail <= 4.0 / (PI * PI * 200.0));
        for k in 0..=20 {
            let t = 0.1 * k as f64;
            let s = fourier_partial_sum(&d, 1.0, 200, t, Parity::Even)[(0, 0)];
            assert!((s - u_plus_scalar(1.0, 1.0, t)).abs() <= tail + 1e-14);
        }
    }
}
