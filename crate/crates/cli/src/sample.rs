//! CSV export of the evaluators on a grid.

use std::io::Write;

use kmsrp_core::kms::{phi_periodic_extend, psi_eval, KmsFunction};
use kmsrp_core::matfun::{c, to_complex, CMat, RMat};
use kmsrp_core::rpext::{
    build_extension, recover_psi, u_minus_matrix, u_minus_scalar, u_plus_matrix, u_plus_scalar,
    RPFunction, RTauElement, RTauFunction,
};
use kmsrp_core::Error;

use crate::error::{CliError, CliResult};
use crate::instance::Instance;

pub const MAX_POINTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Psi,
    Phi,
    #[value(name = "u+")]
    UPlus,
    #[value(name = "u-")]
    UMinus,
    F,
    #[value(name = "fsharp", alias = "f#")]
    FSharp,
}

/// Parses `start:stop:step` into the points `start + k·step ≤ stop`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts[..] else {
        return Err(Error::BadGrid(format!(
            "expected start:stop:step, got {s:?}"
        )));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::BadGrid(format!("{x:?} is not a finite number")))
    };
    let (start, stop, step) = (num(a)?, num(b)?, num(h)?);
    if step <= 0.0 {
        return Err(Error::BadGrid("step must be positive".into()));
    }
    if stop < start {
        return Err(Error::BadGrid(format!("empty grid {s:?}")));
    }
    let count = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
    if count > MAX_POINTS {
        return Err(Error::BadGrid(format!(
            "{count} points exceed the limit {MAX_POINTS}"
        )));
    }
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// What a sample is drawn from.
pub enum Source {
    Instance(Box<Instance>),
    Scalar { lambda: f64, beta: f64 },
}

fn kms_of(instance: &Instance) -> CliResult<KmsFunction> {
    match instance {
        Instance::Kms(p) => p.function(),
        Instance::Rpfunction(p) => Ok(recover_psi(&p.function()?)?.kms),
        other => Err(CliError::Usage(format!(
            "ψ and φ need a kms or rpfunction instance, got {}",
            other.kind()
        ))),
    }
}

fn rp_of(instance: &Instance) -> CliResult<RPFunction> {
    match instance {
        Instance::Kms(p) => Ok(build_extension(&p.function()?)?),
        Instance::Rpfunction(p) => p.function(),
        other => Err(CliError::Usage(format!(
            "this sample needs a kms or rpfunction instance, got {}",
            other.kind()
        ))),
    }
}

fn header(with_eps: bool, rows: usize, cols: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    if with_eps {
        h.push("eps".into());
    }
    for i in 0..rows {
        for j in 0..cols {
            h.push(format!("re_{i}_{j}"));
            h.push(format!("im_{i}_{j}"));
        }
    }
    h
}

fn row(t: f64, eps: Option<bool>, m: &CMat) -> Vec<String> {
    let mut r = vec![t.to_string()];
    if let Some(e) = eps {
        r.push(u8::from(e).to_string());
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            r.push(m[(i, j)].re.to_string());
            r.push(m[(i, j)].im.to_string());
        }
    }
    r
}

fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, c(x, 0.0))
}

/// Rows `(t, ε?, value)` for the requested function.
fn evaluate(
    what: What,
    source: &Source,
    grid: &[f64],
    eps: Option<bool>,
) -> CliResult<Vec<(f64, Option<bool>, CMat)>> {
    let mut out = Vec::with_capacity(grid.len());
    match (what, source) {
        (What::UPlus | What::UMinus, Source::Scalar { lambda, beta }) => {
            if !(beta.is_finite() && *beta > 0.0 && lambda.is_finite() && *lambda >= 0.0) {
                return Err(Error::BadParams("need β > 0 and λ ≥ 0".into()).into());
            }
            for &t in grid {
                let v = if what == What::UPlus {
                    u_plus_scalar(*lambda, *beta, t)
                } else {
                    u_minus_scalar(*lambda, *beta, t)
                };
                out.push((t, None, scalar(v)));
            }
        }
        (What::UPlus | What::UMinus, Source::Instance(inst)) => {
            let f = rp_of(inst)?;
            let fun: fn(&RMat, f64, f64) -> RMat = if what == What::UPlus {
                u_plus_matrix
            } else {
                u_minus_matrix
            };
            for &t in grid {
                out.push((t, None, to_complex(&fun(f.abs_d(), f.beta(), t))));
            }
        }
        (What::Psi | What::Phi, Source::Instance(inst)) => {
            let k = kms_of(inst)?;
            for &t in grid {
                let v = if what == What::Psi {
                    psi_eval(&k, c(t, 0.0))?
                } else {
                    phi_periodic_extend(&k, t)
                };
                out.push((t, None, v));
            }
        }
        (What::F | What::FSharp, Source::Instance(inst)) => {
            let f = rp_of(inst)?;
            let flags: Vec<bool> = eps.map_or(vec![false, true], |e| vec![e]);
            for &t in grid {
                for &e in &flags {
                    let g = RTauElement::new(t, e);
                    let v = if what == What::F {
                        f.eval(g)
                    } else {
                        f.f_sharp(g)
                    };
                    out.push((t, Some(e), v));
                }
            }
        }
        (_, Source::Scalar { .. }) => {
            return Err(CliError::Usage(
                "only u+ and u- can be sampled without an instance".into(),
            ))
        }
    }
    Ok(out)
}

pub fn sample<W: Write>(
    what: What,
    source: &Source,
    grid: &[f64],
    eps: Option<bool>,
    out: W,
) -> CliResult<()> {
    let rows = evaluate(what, source, grid, eps)?;
    let io = |e: csv::Error| CliError::Io {
        path: "output".into(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_writer(out);
    let (r, k) = rows.first().map_or((0, 0), |(_, _, m)| m.shape());
    let with_eps = rows.first().is_some_and(|(_, e, _)| e.is_some());
    w.write_record(header(with_eps, r, k)).map_err(io)?;
    for (t, e, m) in &rows {
        w.write_record(row(*t, *e, m)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "output".into(),
        source: e,
    })?;
    Ok(())
}
