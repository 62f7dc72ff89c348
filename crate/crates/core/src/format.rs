//! Algebra file format: a JSON document listing only i < j bracket entries;
//! the loader mirrors them antisymmetrically. Complex algebras use the same
//! shape with [re, im] pairs as coefficients.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::realify::ComplexLieAlgebra;

#[derive(Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    /// Map from the output basis index (as a decimal string key) to the
    /// coefficient of [e_i, e_j] on that basis vector.
    pub coeffs: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComplexAlgebraFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    pub brackets: Vec<ComplexBracketEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComplexBracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, [f64; 2]>,
}

fn parse_key(key: &str, dim: usize) -> Result<usize> {
    let k: usize = key
        .parse()
        .map_err(|_| Error::Structure(format!("coefficient key '{key}' is not an index")))?;
    if k >= dim {
        return Err(Error::Structure(format!(
            "coefficient index {k} out of range for dimension {dim}"
        )));
    }
    Ok(k)
}

fn check_entry(i: usize, j: usize, dim: usize) -> Result<()> {
    if i >= j {
        return Err(Error::Structure(format!(
            "bracket entry ({i},{j}) must satisfy i < j; lower-triangular entries are implied"
        )));
    }
    if j >= dim {
        return Err(Error::Structure(format!(
            "bracket entry ({i},{j}) out of range for dimension {dim}"
        )));
    }
    Ok(())
}

impl AlgebraFile {
    pub fn into_algebra(self) -> Result<LieAlgebra> {
        if self.dim == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        let mut c = vec![DMatrix::zeros(self.dim, self.dim); self.dim];
        for entry in &self.brackets {
            check_entry(entry.i, entry.j, self.dim)?;
            for (key, &v) in &entry.coeffs {
                let k = parse_key(key, self.dim)?;
                c[k][(entry.i, entry.j)] = v;
                c[k][(entry.j, entry.i)] = -v;
            }
        }
        let labels = if self.basis.is_empty() {
            None
        } else {
            Some(self.basis)
        };
        LieAlgebra::from_structure_constants(c, labels)
    }

    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        let n = alg.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut coeffs = BTreeMap::new();
                for k in 0..n {
                    let v = alg.structure_constant(k, i, j);
                    if v != 0.0 {
                        coeffs.insert(k.to_string(), v);
                    }
                }
                if !coeffs.is_empty() {
                    brackets.push(BracketEntry { i, j, coeffs });
                }
            }
        }
        AlgebraFile {
            dim: n,
            basis: alg.labels().to_vec(),
            brackets,
        }
    }
}

impl ComplexAlgebraFile {
    pub fn into_algebra(self) -> Result<ComplexLieAlgebra> {
        if self.dim == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        let mut re = vec![DMatrix::zeros(self.dim, self.dim); self.dim];
        let mut im = vec![DMatrix::zeros(self.dim, self.dim); self.dim];
        for entry in &self.brackets {
            check_entry(entry.i, entry.j, self.dim)?;
            for (key, &[vre, vim]) in &entry.coeffs {
                let k = parse_key(key, self.dim)?;
                re[k][(entry.i, entry.j)] = vre;
                re[k][(entry.j, entry.i)] = -vre;
                im[k][(entry.i, entry.j)] = vim;
                im[k][(entry.j, entry.i)] = -vim;
            }
        }
        let labels = if self.basis.is_empty() {
            None
        } else {
            Some(self.basis)
        };
        ComplexLieAlgebra::from_structure_constants(re, im, labels)
    }

    pub fn from_algebra(calg: &ComplexLieAlgebra) -> Self {
        let n = calg.dim_c();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut coeffs = BTreeMap::new();
                for k in 0..n {
                    let re = calg.re_slices()[k][(i, j)];
                    let im = calg.im_slices()[k][(i, j)];
                    if re != 0.0 || im != 0.0 {
                        coeffs.insert(k.to_string(), [re, im]);
                    }
                }
                if !coeffs.is_empty() {
                    brackets.push(ComplexBracketEntry { i, j, coeffs });
                }
            }
        }
        ComplexAlgebraFile {
            dim: n,
            basis: calg.labels().to_vec(),
            brackets,
        }
    }
}

pub fn load_algebra(path: &Path) -> Result<LieAlgebra> {
    let text = std::fs::read_to_string(path)?;
    let file: AlgebraFile = serde_json::from_str(&text)?;
    file.into_algebra()
}

pub fn load_complex_algebra(path: &Path) -> Result<ComplexLieAlgebra> {
    let text = std::fs::read_to_string(path)?;
    let file: ComplexAlgebraFile = serde_json::from_str(&text)?;
    file.into_algebra()
}

pub fn algebra_to_json(alg: &LieAlgebra) -> serde_json::Value {
    serde_json::to_value(AlgebraFile::from_algebra(alg)).expect("algebra file serializes")
}
