//! JSON encoding of matrices: `{"dim": n, "re": [[...]], "im": [[...]]}`,
//! with `im` omitted for real matrices. Rectangular matrices carry
//! `rows`/`cols` instead of `dim`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{c, CMat, RMat};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

fn shape_fields(rows: usize, cols: usize) -> (Option<usize>, Option<usize>, Option<usize>) {
    if rows == cols {
        (Some(rows), None, None)
    } else {
        (None, Some(rows), Some(cols))
    }
}

fn rows_of<F: Fn(usize, usize) -> f64>(r: usize, k: usize, f: F) -> Vec<Vec<f64>> {
    (0..r).map(|i| (0..k).map(|j| f(i, j)).collect()).collect()
}

impl MatrixJson {
    pub fn from_real(m: &RMat) -> Self {
        let (r, k) = m.shape();
        let (dim, rows, cols) = shape_fields(r, k);
        MatrixJson {
            dim,
            rows,
            cols,
            re: rows_of(r, k, |i, j| m[(i, j)]),
            im: None,
        }
    }

    pub fn from_complex(m: &CMat) -> Self {
        let (r, k) = m.shape();
        let (dim, rows, cols) = shape_fields(r, k);
        let is_real = m.iter().all(|z| z.im == 0.0);
        MatrixJson {
            dim,
            rows,
            cols,
            re: rows_of(r, k, |i, j| m[(i, j)].re),
            im: if is_real {
                None
            } else {
                Some(rows_of(r, k, |i, j| m[(i, j)].im))
            },
        }
    }

    fn shape(&self) -> Result<(usize, usize)> {
        let r = self.re.len();
        let k = self.re.first().map_or(0, |row| row.len());
        if self.re.iter().any(|row| row.len() != k) {
            return Err(Error::BadParams("ragged matrix rows".into()));
        }
        if let Some(d) = self.dim {
            if d != r || d != k {
                return Err(Error::BadParams(format!(
                    "declared dim {d} does not match {r}x{k} entries"
                )));
            }
        }
        if self.rows.is_some_and(|x| x != r) || self.cols.is_some_and(|x| x != k) {
            return Err(Error::BadParams(
                "declared rows/cols do not match entries".into(),
            ));
        }
        if let Some(im) = &self.im {
            if im.len() != r || im.iter().any(|row| row.len() != k) {
                return Err(Error::BadParams("im block has the wrong shape".into()));
            }
        }
        Ok((r, k))
    }

    pub fn to_complex(&self) -> Result<CMat> {
        let (r, k) = self.shape()?;
        Ok(CMat::from_fn(r, k, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            c(self.re[i][j], im)
        }))
    }

    pub fn to_real(&self) -> Result<RMat> {
        let (r, k) = self.shape()?;
        if let Some(im) = &self.im {
            if im.iter().flatten().any(|&x| x != 0.0) {
                return Err(Error::BadParams("expected a real matrix".into()));
            }
        }
        Ok(RMat::from_fn(r, k, |i, j| self.re[i][j]))
    }
}
