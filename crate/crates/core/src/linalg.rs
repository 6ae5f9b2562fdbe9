//! Thin adapters over `nalgebra` decompositions working on row-major buffers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Full thin SVD, `u` is `m×r`, `vt` is `r×n`, both row-major, `s` descending.
pub(crate) struct Svd {
    pub u: Vec<C64>,
    pub s: Vec<f64>,
    pub vt: Vec<C64>,
}

pub(crate) fn svd(m: usize, n: usize, data: &[C64]) -> Result<Svd> {
    let (u, s, vt, r) = if data.iter().all(|x| x.im == 0.0) {
        let re: Vec<f64> = data.iter().map(|x| x.re).collect();
        let mat = DMatrix::from_row_slice(m, n, &re);
        let dec = mat
            .try_svd(true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("svd did not converge".into()))?;
        let u = dec.u.expect("u requested").map(|x| C64::new(x, 0.0));
        let vt = dec.v_t.expect("v_t requested").map(|x| C64::new(x, 0.0));
        let r = dec.singular_values.len();
        (u, dec.singular_values.as_slice().to_vec(), vt, r)
    } else {
        let mat = DMatrix::from_row_slice(m, n, data);
        let dec = mat
            .try_svd(true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("svd did not converge".into()))?;
        let r = dec.singular_values.len();
        (
            dec.u.expect("u requested"),
            dec.singular_values.as_slice().to_vec(),
            dec.v_t.expect("v_t requested"),
            r,
        )
    };
    // stable descending order keeps ties in the order the solver produced
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out_u = Vec::with_capacity(m * r);
    for i in 0..m {
        out_u.extend(order.iter().map(|&k| u[(i, k)]));
    }
    let mut out_vt = Vec::with_capacity(r * n);
    for &k in &order {
        out_vt.extend((0..n).map(|j| vt[(k, j)]));
    }
    Ok(Svd {
        u: out_u,
        s: order.iter().map(|&k| s[k].max(0.0)).collect(),
        vt: out_vt,
    })
}

/// Thin QR, `q` is `m×k` and `r` is `k×n` with `k = min(m, n)`.
pub(crate) fn qr(m: usize, n: usize, data: &[C64]) -> (Vec<C64>, Vec<C64>, usize) {
    let mat = DMatrix::from_row_slice(m, n, data);
    let dec = mat.qr();
    let q = dec.q();
    let r = dec.r();
    let k = m.min(n);
    (to_row_major(&q), to_row_major(&r), k)
}

/// Eigendecomposition of a Hermitian `n×n` matrix: ascending eigenvalues and
/// eigenvectors as columns of a row-major matrix.
pub(crate) fn eigh(n: usize, data: &[C64]) -> (Vec<f64>, Vec<C64>) {
    let mat = DMatrix::from_row_slice(n, n, data);
    let dec = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        dec.eigenvalues[a]
            .partial_cmp(&dec.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&k| dec.eigenvalues[k]).collect();
    let mut vecs = Vec::with_capacity(n * n);
    for i in 0..n {
        vecs.extend(order.iter().map(|&k| dec.eigenvectors[(i, k)]));
    }
    (vals, vecs)
}

/// `f(H)` for Hermitian `H` via eigendecomposition.
pub(crate) fn hermitian_function(n: usize, data: &[C64], f: impl Fn(f64) -> f64) -> Vec<C64> {
    let (vals, vecs) = eigh(n, data);
    let fv: Vec<f64> = vals.iter().map(|&v| f(v)).collect();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += vecs[i * n + k] * fv[k] * vecs[j * n + k].conj();
            }
            out[i * n + j] = acc;
        }
    }
    out
}

fn to_row_major(m: &DMatrix<C64>) -> Vec<C64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        out.extend((0..c).map(|j| m[(i, j)]));
    }
    out
}
