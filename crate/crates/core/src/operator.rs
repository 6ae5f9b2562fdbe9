//! Square operator matrices: one-site operators, bond terms viewed as
//! `d²×d²`, reduced density matrices and dense lattice operators.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{self, DenseTensor};

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_complex(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} elements for a {dim}x{dim} operator",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Row-major real entries.
    pub fn from_real(dim: usize, rows: &[f64]) -> Result<Self> {
        Self::from_complex(dim, rows.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    pub fn from_tensor(t: &DenseTensor) -> Result<Self> {
        match t.shape() {
            [a, b] if a == b => Self::from_complex(*a, t.data().to_vec()),
            s => Err(Error::Dimension(format!("{s:?} is not a square matrix"))),
        }
    }

    pub fn to_tensor(&self) -> DenseTensor {
        DenseTensor::new(vec![self.dim, self.dim], self.data.clone()).expect("square buffer")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let n = self.dim;
        Self {
            dim: n,
            data: tensor::matmul(n, n, n, &self.data, &other.data),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        tensor::matmul(self.dim, self.dim, 1, &self.data, v)
    }

    pub fn scale(&self, f: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * f).collect(),
        }
    }

    pub fn scale_real(&self, f: f64) -> Self {
        self.scale(C64::new(f, 0.0))
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product; the left factor owns the slower index.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut out = Self::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * dim + j * m + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.
    pub fn eigh(&self) -> (Vec<f64>, Self) {
        let (vals, vecs) = linalg::eigh(self.dim, &self.data);
        (
            vals,
            Self {
                dim: self.dim,
                data: vecs,
            },
        )
    }

    /// `exp(t·H)` for Hermitian `H`.
    pub fn exp_hermitian(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            data: linalg::hermitian_function(self.dim, &self.data, |x| (t * x).exp()),
        }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        linalg::svd(self.dim, self.dim, &self.data)
            .map(|s| s.s.first().copied().unwrap_or(0.0))
            .unwrap_or(f64::NAN)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs)
    }
}

/// Pauli matrices in the basis `(|↑⟩, |↓⟩)`.
pub mod pauli {
    use super::OperatorMatrix;
    use num_complex::Complex64 as C64;

    pub fn x() -> OperatorMatrix {
        OperatorMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> OperatorMatrix {
        let i = C64::new(0.0, 1.0);
        OperatorMatrix::from_complex(2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)])
            .unwrap()
    }

    pub fn z() -> OperatorMatrix {
        OperatorMatrix::diagonal(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_orders_left_factor_slow() {
        let z = pauli::z();
        let id = OperatorMatrix::identity(2);
        let zi = z.kron(&id);
        assert_eq!(zi.data()[0].re, 1.0);
        assert_eq!(zi.get(2, 2).re, -1.0);
        assert_eq!(zi.get(1, 1).re, 1.0);
    }

    #[test]
    fn exp_of_zz_is_cosh_sinh() {
        let zz = pauli::z().kron(&pauli::z());
        let g = zz.exp_hermitian(0.3);
        let expect = &OperatorMatrix::identity(4).scale_real(0.3f64.cosh()) + &zz.scale_real(0.3f64.sinh());
        assert!(g.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
        let xy = &x * &y;
        assert!(xy.max_abs_diff(&z.scale(C64::new(0.0, 1.0))) < 1e-15);
        assert!(y.hermiticity_error() < 1e-15);
    }
}
