//! Wire encoding of dense complex matrices:
//! `{"rows":r,"cols":c,"re":[...],"im":[...]}` in row-major order.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMatrix, Subspace, C64};

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&CMatrix> for MatrixRepr {
    fn from(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { rows, cols, re, im }
    }
}

impl MatrixRepr {
    fn into_matrix(self) -> Result<CMatrix, String> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.len() != n {
            return Err(format!(
                "matrix {}x{} expects {} entries, got re={} im={}",
                self.rows,
                self.cols,
                n,
                self.re.len(),
                self.im.len()
            ));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        let cols = self.cols;
        Ok(CMatrix::from_fn(self.rows, cols, |i, j| {
            C64::new(self.re[i * cols + j], self.im[i * cols + j])
        }))
    }
}

/// `#[serde(with = "crate::json::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        MatrixRepr::deserialize(d)?.into_matrix().map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::matrices")]` for `Vec<CMatrix>`.
pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<MatrixRepr> = ms.iter().map(MatrixRepr::from).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Vec::<MatrixRepr>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_matrix().map_err(D::Error::custom))
            .collect()
    }
}

/// Standalone wrapper for a matrix at the top level of a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(#[serde(with = "matrix")] pub CMatrix);

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    #[serde(with = "matrix")]
    basis: CMatrix,
}

/// `{"ambient_dim":n,"basis":CMatrix}`; the basis is re-checked for
/// orthonormality on read.
impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SubspaceRepr { ambient_dim: self.ambient_dim(), basis: self.basis().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SubspaceRepr::deserialize(d)?;
        if repr.basis.nrows() != repr.ambient_dim {
            return Err(D::Error::custom(format!(
                "subspace basis has {} rows, ambient dimension is {}",
                repr.basis.nrows(),
                repr.ambient_dim
            )));
        }
        Subspace::new(repr.basis).map_err(D::Error::custom)
    }
}
