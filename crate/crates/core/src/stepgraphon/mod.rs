//! Step graphons on `n` equal steps: exact rational values with a cached
//! float view, the kernel algebra (powers, counting kernels, Hadamard
//! products), regularity, local-density search and fixture generators.

mod generate;
mod local_density;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{Graph, RootedGraph};
use crate::homdensity::{contract, ContractOptions, DensityError};
use crate::rational::{format_rational, parse_rational, parse_rational_or_decimal, to_f64, RationalParseError};

pub use generate::{
    circulant, constant, generate, mixture, pointwise_dense, random_regular_graph, regular_graph, GenerateError,
    GeneratorSpec,
};
pub use local_density::{
    local_density_deficit, quadratic_form_exact, weighted_reiher_check, LocalDensityReport, ReiherCheck, SearchBudget,
    SearchMethod,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphonError {
    #[error("a step graphon needs at least one step")]
    NoSteps,
    #[error("expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("values[{0}][{1}] differs from values[{1}][{0}]")]
    Asymmetric(usize, usize),
    #[error("values[{0}][{1}] = {2} is outside [0, 1]")]
    OutOfRange(usize, usize, String),
    #[error("step counts differ: {0} vs {1}")]
    StepMismatch(usize, usize),
    #[error(transparent)]
    Parse(#[from] RationalParseError),
    #[error("malformed graphon JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Symmetric `n x n` grid of values in `[0, 1]`, row-major.
#[derive(Debug, Clone)]
pub struct StepGraphon {
    n: usize,
    values: Vec<BigRational>,
    floats: Vec<f64>,
}

impl PartialEq for StepGraphon {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.values == other.values
    }
}

impl Eq for StepGraphon {}

impl StepGraphon {
    pub fn new(n: usize, values: Vec<BigRational>) -> Result<Self, GraphonError> {
        if n == 0 {
            return Err(GraphonError::NoSteps);
        }
        if values.len() != n * n {
            return Err(GraphonError::Shape { expected: n * n, got: values.len() });
        }
        let one = BigRational::one();
        for i in 0..n {
            for j in 0..n {
                let x = &values[i * n + j];
                if x.is_negative() || x > &one {
                    return Err(GraphonError::OutOfRange(i, j, format_rational(x)));
                }
                if j > i && x != &values[j * n + i] {
                    return Err(GraphonError::Asymmetric(i, j));
                }
            }
        }
        let floats = values.iter().map(to_f64).collect();
        Ok(StepGraphon { n, values, floats })
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, GraphonError> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(GraphonError::Shape { expected: n, got: row.len() });
            }
            values.extend(row);
        }
        StepGraphon::new(n, values)
    }

    /// Exact conversion of every double (binary fractions are rationals).
    pub fn from_f64(n: usize, values: &[f64]) -> Result<Self, GraphonError> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(GraphonError::Json("non-finite value".into()));
        }
        StepGraphon::new(n, values.iter().map(|&x| crate::rational::from_f64(x)).collect())
    }

    pub fn constant(n: usize, d: BigRational) -> Result<Self, GraphonError> {
        StepGraphon::new(n, vec![d; n * n])
    }

    /// 0/1 adjacency of `g` on `v(g)` steps.
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n_vertices();
        let mut values = vec![BigRational::zero(); n * n];
        for &(u, v) in g.edges() {
            values[u * n + v] = BigRational::one();
            values[v * n + u] = BigRational::one();
        }
        StepGraphon::new(n, values).expect("adjacency matrix is a graphon")
    }

    pub fn n_steps(&self) -> usize {
        self.n
    }

    pub fn value(&self, i: usize, j: usize) -> &BigRational {
        &self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn float_values(&self) -> &[f64] {
        &self.floats
    }

    pub fn edge_density(&self) -> BigRational {
        let total: BigRational = self.values.iter().sum();
        total / BigInt::from(self.n * self.n)
    }

    /// `(1/n) * sum_j values[i][j]` for each step `i`.
    pub fn row_degrees(&self) -> Vec<BigRational> {
        let n = self.n;
        (0..n).map(|i| self.values[i * n..(i + 1) * n].iter().sum::<BigRational>() / BigInt::from(n)).collect()
    }

    /// Regularity up to `tol` on the spread of row degrees. `tol = 0` asks
    /// for exact equality.
    pub fn regularity(&self, tol: f64) -> Regularity {
        let degrees = self.row_degrees();
        let regular = if tol == 0.0 {
            degrees.iter().all(|d| d == &degrees[0])
        } else {
            let floats: Vec<f64> = degrees.iter().map(to_f64).collect();
            let max = floats.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = floats.iter().cloned().fold(f64::INFINITY, f64::min);
            max - min <= tol
        };
        let degree = regular.then(|| self.edge_density());
        Regularity { degree, row_degrees: degrees }
    }

    /// `(1/n) A B` as a kernel. Fails if the product is not symmetric.
    pub fn compose(&self, other: &StepGraphon) -> Result<StepGraphon, GraphonError> {
        if self.n != other.n {
            return Err(GraphonError::StepMismatch(self.n, other.n));
        }
        let n = self.n;
        let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s: BigRational = (0..n).map(|k| self.value(i, k) * other.value(k, j)).sum();
                values.push(s * &inv_n);
            }
        }
        StepGraphon::new(n, values)
    }

    /// `W^k`: `(1/n)^{k-1} A^k`.
    pub fn kernel_power(&self, k: usize) -> StepGraphon {
        assert!(k >= 1, "kernel power needs k >= 1");
        let mut out = self.clone();
        for _ in 1..k {
            out = out.compose(self).expect("powers of a symmetric kernel are symmetric");
        }
        out
    }

    pub fn hadamard(&self, other: &StepGraphon) -> Result<StepGraphon, GraphonError> {
        if self.n != other.n {
            return Err(GraphonError::StepMismatch(self.n, other.n));
        }
        StepGraphon::new(self.n, self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// `W^F(x, y)`: density of `F` with its roots pinned to steps `x` and
    /// `y`, normalized over the other vertices.
    pub fn counting_kernel(&self, f: &RootedGraph) -> Result<StepGraphon, GraphonError> {
        let (r1, r2) = f.roots();
        let n = self.n;
        let factor = contract(f.graph(), n, &self.values, &[], &[r1, r2], ContractOptions::default())?;
        let mut values = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                values.push(factor.get(n, &[x, y]).clone());
            }
        }
        StepGraphon::new(n, values)
    }

    /// The sub-grid on the listed steps, renormalized as a graphon on
    /// `keep.len()` equal steps.
    pub fn restrict(&self, keep: &[usize]) -> Result<StepGraphon, GraphonError> {
        let values = keep.iter().flat_map(|&i| keep.iter().map(move |&j| self.value(i, j).clone())).collect();
        StepGraphon::new(keep.len(), values)
    }

    /// Relabels steps: step `i` of the result is step `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> StepGraphon {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let values = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.value(perm[i], perm[j]).clone())
            .collect();
        StepGraphon::new(n, values).expect("a permutation keeps symmetry and range")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> =
            (0..self.n).map(|i| (0..self.n).map(|j| format_rational(self.value(i, j))).collect()).collect();
        serde_json::json!({ "n": self.n, "values": rows })
    }

    /// Same layout with decimal numbers.
    pub fn to_float_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..self.n).map(|i| self.floats[i * self.n..(i + 1) * self.n].to_vec()).collect();
        serde_json::json!({ "n": self.n, "values": rows })
    }

    /// Parses graphon JSON. Entries are `"p/q"` strings; with
    /// `allow_decimals`, decimal strings and JSON numbers are accepted too
    /// and converted exactly from their decimal text.
    pub fn from_json(value: &serde_json::Value, allow_decimals: bool) -> Result<Self, GraphonError> {
        let n = value
            .get("n")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| GraphonError::Json("missing integer field `n`".into()))? as usize;
        let rows = value
            .get("values")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| GraphonError::Json("missing array field `values`".into()))?;
        if rows.len() != n {
            return Err(GraphonError::Shape { expected: n, got: rows.len() });
        }
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_array().ok_or_else(|| GraphonError::Json("row is not an array".into()))?;
            if row.len() != n {
                return Err(GraphonError::Shape { expected: n, got: row.len() });
            }
            for entry in row {
                let parsed = match entry {
                    serde_json::Value::String(s) if allow_decimals => parse_rational_or_decimal(s)?,
                    serde_json::Value::String(s) => parse_rational(s)?,
                    serde_json::Value::Number(x) if allow_decimals || x.is_i64() => {
                        parse_rational_or_decimal(&x.to_string())?
                    }
                    serde_json::Value::Number(x) => {
                        return Err(RationalParseError::DecimalNotAllowed(x.to_string()).into())
                    }
                    other => return Err(GraphonError::Json(format!("unexpected entry {other}"))),
                };
                values.push(parsed);
            }
        }
        StepGraphon::new(n, values)
    }
}

impl Serialize for StepGraphon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepGraphon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        StepGraphon::from_json(&value, false).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regularity {
    /// The common degree, when the graphon is regular.
    pub degree: Option<BigRational>,
    pub row_degrees: Vec<BigRational>,
}
