//! Dense complex tensors with row-major storage.
//!
//! Every tensor in the crate is a [`DenseTensor`]: a shape, a flat buffer of
//! `Complex64` values in row-major (last index fastest) order, and optional
//! per-index labels. Index math elsewhere (vectorization, gate layout, site
//! tensor legs) is defined relative to this linearization.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
    labels: Option<Vec<String>>,
}

/// Row-major strides for `shape`.
pub fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Dimension(format!("zero extent in shape {shape:?}")));
        }
        let count: usize = shape.iter().product();
        if count != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {count} elements, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape,
            data,
            labels: None,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let count = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![C64::new(0.0, 0.0); count],
            labels: None,
        }
    }

    pub fn from_real(shape: &[usize], values: &[f64]) -> Result<Self> {
        Self::new(
            shape.to_vec(),
            values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        )
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut out = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for slot in out.data.iter_mut() {
            *slot = f(&idx);
            increment(&mut idx, shape);
        }
        out
    }

    /// Rank-0 tensor holding a single value.
    pub fn scalar(value: C64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
            labels: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(&[n, n], |i| {
            if i[0] == i[1] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: Vec<S>) -> Result<Self> {
        if labels.len() != self.shape.len() {
            return Err(Error::Argument(format!(
                "{} labels for a rank-{} tensor",
                labels.len(),
                self.shape.len()
            )));
        }
        self.labels = Some(labels.into_iter().map(Into::into).collect());
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (i, (&x, &e)) in idx.iter().zip(&self.shape).enumerate() {
            debug_assert!(x < e, "index {x} out of range on axis {i}");
            off = off * e + x;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    /// Scalar value of a tensor with exactly one element.
    pub fn to_scalar(&self) -> Result<C64> {
        if self.data.len() != 1 {
            return Err(Error::Dimension(format!(
                "expected a single element, shape is {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    /// Reorders axes: axis `j` of the result is axis `perm[j]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        if perm.len() != rank {
            return Err(Error::Argument(format!(
                "permutation {perm:?} for rank {rank}"
            )));
        }
        let mut seen = vec![false; rank];
        for &p in perm {
            if p >= rank || seen[p] {
                return Err(Error::Argument(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let old_strides = self.strides();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; rank];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            // odometer increment that keeps the source offset in sync
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                src += src_strides[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                src -= src_strides[ax] * new_shape[ax];
                idx[ax] = 0;
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p].clone()).collect());
        Ok(Self {
            shape: new_shape,
            data,
            labels,
        })
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        self.clone().into_reshape(shape)
    }

    /// Reinterprets the element sequence under a new shape. Labels are dropped.
    pub fn into_reshape(self, shape: &[usize]) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != self.data.len() || shape.contains(&0) {
            return Err(Error::Dimension(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data,
            labels: None,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x = x.conj());
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
            labels: self.labels.clone(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of the elementwise difference; infinite if shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Divides by the largest element magnitude and returns that magnitude.
    pub fn normalize_max(&mut self) -> f64 {
        let m = self.max_abs();
        if m > 0.0 {
            let inv = 1.0 / m;
            self.data.iter_mut().for_each(|x| *x *= inv);
        }
        m
    }

    /// Multiplies every slice along `axis` by the matching entry of `weights`.
    pub fn scale_axis(&mut self, axis: usize, weights: &[f64]) -> Result<()> {
        if axis >= self.rank() || self.shape[axis] != weights.len() {
            return Err(Error::Dimension(format!(
                "axis {axis} of {:?} cannot take {} weights",
                self.shape,
                weights.len()
            )));
        }
        let inner: usize = self.shape[axis + 1..].iter().product();
        let extent = self.shape[axis];
        for (i, x) in self.data.iter_mut().enumerate() {
            *x *= weights[(i / inner) % extent];
        }
        Ok(())
    }

    /// Views the tensor as a matrix with the given row and column axes.
    pub fn to_matrix(&self, rows: &[usize], cols: &[usize]) -> Result<(usize, usize, Vec<C64>)> {
        let perm: Vec<usize> = rows.iter().chain(cols).copied().collect();
        let t = self.permute(&perm)?;
        let m = rows.iter().map(|&r| self.shape[r]).product();
        let n = cols.iter().map(|&c| self.shape[c]).product();
        Ok((m, n, t.data))
    }

    /// Imaginary parts are all exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.im == 0.0)
    }
}

fn increment(idx: &mut [usize], shape: &[usize]) {
    for ax in (0..shape.len()).rev() {
        idx[ax] += 1;
        if idx[ax] < shape[ax] {
            return;
        }
        idx[ax] = 0;
    }
}

/// Contracts `a` and `b` over `pairs` of `(axis of a, axis of b)`.
///
/// The result carries the free axes of `a` in order followed by the free axes
/// of `b` in order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() || ib >= b.rank() {
            return Err(Error::Argument(format!(
                "pair ({ia}, {ib}) out of range for ranks {} and {}",
                a.rank(),
                b.rank()
            )));
        }
        if used_a[ia] || used_b[ib] {
            return Err(Error::Argument(format!("axis repeated in pairs {pairs:?}")));
        }
        used_a[ia] = true;
        used_b[ib] = true;
        if a.shape[ia] != b.shape[ib] {
            return Err(Error::Dimension(format!(
                "cannot pair axis {ia} (extent {}) with axis {ib} (extent {})",
                a.shape[ia], b.shape[ib]
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&i| !used_b[i]).collect();
    let pa: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let pb: Vec<usize> = pairs.iter().map(|p| p.1).collect();

    let (m, k, lhs) = a.to_matrix(&free_a, &pa)?;
    let (k2, n, rhs) = b.to_matrix(&pb, &free_b)?;
    debug_assert_eq!(k, k2);
    let data = matmul(m, k, n, &lhs, &rhs);

    let shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    let labels = match (&a.labels, &b.labels) {
        (Some(la), Some(lb)) => Some(
            free_a
                .iter()
                .map(|&i| la[i].clone())
                .chain(free_b.iter().map(|&i| lb[i].clone()))
                .collect(),
        ),
        _ => None,
    };
    Ok(DenseTensor {
        shape,
        data,
        labels,
    })
}

/// Row-major `m×k` times `k×n`.
pub(crate) fn matmul(m: usize, k: usize, n: usize, lhs: &[C64], rhs: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = lhs[i * k + p];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            let r = &rhs[p * n..(p + 1) * n];
            for (o, &y) in row.iter_mut().zip(r) {
                *o += x * y;
            }
        }
    }
    out
}

/// Truncated singular value decomposition of a tensor viewed as a matrix.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Shape `(row extents..., k)`, orthonormal columns.
    pub left_isometry: DenseTensor,
    /// Descending, non-negative, length `k`.
    pub singular_values: Vec<f64>,
    /// Shape `(k, column extents...)`, orthonormal rows.
    pub right_isometry: DenseTensor,
    /// Relative discarded weight `sqrt(sum discarded s^2 / sum s^2)`.
    pub truncation_error: f64,
}

/// SVD over the split `rows | rest`, keeping at most `max_rank` values and
/// dropping any below `cutoff * s_max`. The remaining axes form the columns
/// in ascending order.
pub fn truncated_svd(
    t: &DenseTensor,
    rows: &[usize],
    max_rank: usize,
    cutoff: f64,
) -> Result<SvdResult> {
    if max_rank == 0 {
        return Err(Error::Argument("max_rank must be at least 1".into()));
    }
    let mut is_row = vec![false; t.rank()];
    for &r in rows {
        if r >= t.rank() || is_row[r] {
            return Err(Error::Argument(format!("bad row split {rows:?}")));
        }
        is_row[r] = true;
    }
    let cols: Vec<usize> = (0..t.rank()).filter(|&i| !is_row[i]).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Argument(
            "split must leave both groups non-empty".into(),
        ));
    }
    if !t.is_finite() {
        return Err(Error::Numerical("non-finite input to svd".into()));
    }
    let (m, n, data) = t.to_matrix(rows, &cols)?;
    let full = linalg::svd(m, n, &data)?;
    let kept = kept_rank(&full.s, max_rank, cutoff);
    let row_dims: Vec<usize> = rows.iter().map(|&r| t.shape[r]).collect();
    let col_dims: Vec<usize> = cols.iter().map(|&c| t.shape[c]).collect();
    finish_svd(full, kept, m, n, &row_dims, &col_dims)
}

pub(crate) fn kept_rank(s: &[f64], max_rank: usize, cutoff: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    let above = s.iter().take_while(|&&x| x > 0.0 && x >= cutoff * smax).count();
    above.min(max_rank).max(1)
}

pub(crate) fn finish_svd(
    full: linalg::Svd,
    kept: usize,
    m: usize,
    n: usize,
    row_dims: &[usize],
    col_dims: &[usize],
) -> Result<SvdResult> {
    let r = full.s.len();
    let total: f64 = full.s.iter().map(|x| x * x).sum();
    let discarded: f64 = full.s[kept..].iter().map(|x| x * x).sum();
    let truncation_error = if total > 0.0 {
        (discarded / total).sqrt().min(1.0)
    } else {
        0.0
    };
    let mut u = Vec::with_capacity(m * kept);
    for i in 0..m {
        u.extend_from_slice(&full.u[i * r..i * r + kept]);
    }
    let vt = full.vt[..kept * n].to_vec();
    let mut ushape = row_dims.to_vec();
    ushape.push(kept);
    let mut vshape = vec![kept];
    vshape.extend_from_slice(col_dims);
    Ok(SvdResult {
        left_isometry: DenseTensor::new(ushape, u)?,
        singular_values: full.s[..kept].to_vec(),
        right_isometry: DenseTensor::new(vshape, vt)?,
        truncation_error,
    })
}

/// Serialized form: shape header plus row-major `[re, im]` element list.
#[derive(Serialize, Deserialize)]
pub(crate) struct TensorRecord {
    pub shape: Vec<usize>,
    pub elements: Vec<[f64; 2]>,
}

impl From<&DenseTensor> for TensorRecord {
    fn from(t: &DenseTensor) -> Self {
        Self {
            shape: t.shape.clone(),
            elements: t.data.iter().map(|x| [x.re, x.im]).collect(),
        }
    }
}

impl TryFrom<TensorRecord> for DenseTensor {
    type Error = Error;
    fn try_from(r: TensorRecord) -> Result<Self> {
        DenseTensor::new(
            r.shape,
            r.elements.iter().map(|e| C64::new(e[0], e[1])).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sz() -> DenseTensor {
        DenseTensor::from_real(&[2, 2], &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn identity_composition() {
        let id = DenseTensor::identity(2);
        let out = contract(&id, &id, &[(1, 0)]).unwrap();
        assert_eq!(out, id);
    }

    #[test]
    fn dot_product() {
        let v = DenseTensor::from_real(&[2], &[3.0, 4.0]).unwrap();
        let out = contract(&v, &v, &[(0, 0)]).unwrap();
        assert_eq!(out.rank(), 0);
        assert_eq!(out.to_scalar().unwrap(), c(25.0));
    }

    #[test]
    fn trace_of_sz_squared() {
        let out = contract(&sz(), &sz(), &[(0, 0), (1, 1)]).unwrap();
        assert!((out.to_scalar().unwrap() - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn contract_errors() {
        let a = DenseTensor::zeros(&[2, 3]);
        let b = DenseTensor::zeros(&[2, 2]);
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::Dimension(_))));
        assert!(matches!(
            contract(&a, &b, &[(0, 0), (0, 1)]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn free_axis_order() {
        let a = DenseTensor::from_fn(&[2, 3, 4], |i| c((i[0] * 100 + i[1] * 10 + i[2]) as f64));
        let b = DenseTensor::from_fn(&[5, 3], |i| c((i[0] + 7 * i[1]) as f64));
        let out = contract(&a, &b, &[(1, 1)]).unwrap();
        assert_eq!(out.shape(), &[2, 4, 5]);
        let mut expect = C64::new(0.0, 0.0);
        for j in 0..3 {
            expect += a.get(&[1, j, 2]) * b.get(&[4, j]);
        }
        assert_eq!(out.get(&[1, 2, 4]), expect);
    }

    #[test]
    fn rank_one_exact() {
        let u = [0.6, 0.8];
        let v = [0.0, 1.0, 0.0];
        let t = DenseTensor::from_fn(&[2, 3], |i| c(u[i[0]] * v[i[1]]));
        let svd = truncated_svd(&t, &[0], 1, 0.0).unwrap();
        assert_eq!(svd.singular_values.len(), 1);
        assert!(svd.truncation_error.abs() < 1e-15);
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_truncated_to_rank_one() {
        let svd = truncated_svd(&DenseTensor::identity(2), &[0], 1, 0.0).unwrap();
        assert!((svd.truncation_error - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn diagonal_sorted() {
        let t = DenseTensor::from_real(&[2, 2], &[3.0, 0.0, 0.0, 4.0]).unwrap();
        let svd = truncated_svd(&t, &[0], 2, 0.0).unwrap();
        assert!((svd.singular_values[0] - 4.0).abs() < 1e-14);
        assert!((svd.singular_values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cutoff_drops_small_values() {
        let t = DenseTensor::from_real(&[3, 3], &[1.0, 0.0, 0.0, 0.0, 1e-12, 0.0, 0.0, 0.0, 0.5])
            .unwrap();
        let svd = truncated_svd(&t, &[0], 3, 1e-10).unwrap();
        assert_eq!(svd.singular_values.len(), 2);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut t = DenseTensor::identity(2);
        t.set(&[0, 1], C64::new(f64::NAN, 0.0));
        assert!(matches!(
            truncated_svd(&t, &[0], 2, 0.0),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn scale_axis_weights_slices() {
        let mut t = DenseTensor::from_real(&[2, 3], &[1.0; 6]).unwrap();
        t.scale_axis(1, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.get(&[1, 2]), c(3.0));
        assert_eq!(t.get(&[0, 1]), c(2.0));
    }

    fn random_tensor(shape: &[usize], seed: u64) -> DenseTensor {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DenseTensor::from_fn(shape, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..4, 1..5)
    }

    proptest! {
        #[test]
        fn permute_inverse_is_identity(shape in shape_strategy(), seed in any::<u64>()) {
            let t = random_tensor(&shape, seed);
            let rank = shape.len();
            let perm: Vec<usize> = (0..rank).rev().collect();
            let mut inv = vec![0; rank];
            for (j, &p) in perm.iter().enumerate() { inv[p] = j; }
            let back = t.permute(&perm).unwrap().permute(&inv).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn reshape_keeps_sequence(shape in shape_strategy(), seed in any::<u64>()) {
            let t = random_tensor(&shape, seed);
            let flat = t.reshape(&[t.len()]).unwrap();
            prop_assert_eq!(flat.data(), t.data());
        }

        #[test]
        fn contract_is_bilinear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let a = random_tensor(&[2, 3, 2], seed);
            let b = random_tensor(&[3, 2, 4], seed.wrapping_add(1));
            let alpha = C64::new(re, im);
            let lhs = contract(&a.scale(alpha), &b, &[(1, 0), (2, 1)]).unwrap();
            let rhs = contract(&a, &b, &[(1, 0), (2, 1)]).unwrap().scale(alpha);
            let scale = rhs.max_abs().max(1e-300);
            prop_assert!(lhs.max_abs_diff(&rhs) / scale < 1e-12);
        }

        #[test]
        fn permuted_inputs_remap_pairs(seed in any::<u64>()) {
            let a = random_tensor(&[2, 3, 4], seed);
            let b = random_tensor(&[4, 5], seed ^ 0x55);
            let direct = contract(&a, &b, &[(2, 0)]).unwrap();
            // a' axes = (a2, a0, a1); contraction axis moves to 0
            let ap = a.permute(&[2, 0, 1]).unwrap();
            let via = contract(&ap, &b, &[(0, 0)]).unwrap();
            prop_assert!(direct.max_abs_diff(&via) < 1e-13);
            // permuting the output equals contracting permuted b
            let bp = b.permute(&[1, 0]).unwrap();
            let out = contract(&a, &bp, &[(2, 1)]).unwrap();
            prop_assert!(out.max_abs_diff(&direct) < 1e-13);
        }

        #[test]
        fn full_rank_svd_reconstructs(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let t = random_tensor(&[rows, cols], seed);
            let svd = truncated_svd(&t, &[0], rows.min(cols), 0.0).unwrap();
            let mut us = svd.left_isometry.clone();
            us.scale_axis(1, &svd.singular_values).unwrap();
            let rec = contract(&us, &svd.right_isometry, &[(1, 0)]).unwrap();
            prop_assert!(rec.max_abs_diff(&t) < 1e-10);
            for w in svd.singular_values.windows(2) { prop_assert!(w[0] >= w[1]); }
            // isometry conditions
            let k = svd.singular_values.len();
            let uu = contract(&svd.left_isometry.conj(), &svd.left_isometry, &[(0, 0)]).unwrap();
            prop_assert!(uu.max_abs_diff(&DenseTensor::identity(k)) < 1e-10);
            let vv = contract(&svd.right_isometry, &svd.right_isometry.conj(), &[(1, 1)]).unwrap();
            prop_assert!(vv.max_abs_diff(&DenseTensor::identity(k)) < 1e-10);
        }

        #[test]
        fn truncation_error_matches_reconstruction(seed in any::<u64>(), keep in 1usize..4) {
            let t = random_tensor(&[2, 2, 3], seed);
            let svd = truncated_svd(&t, &[0, 1], keep, 0.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&svd.truncation_error));
            let mut us = svd.left_isometry.clone();
            us.scale_axis(2, &svd.singular_values).unwrap();
            let rec = contract(&us, &svd.right_isometry, &[(2, 0)]).unwrap();
            let rel = rec.sub(&t).unwrap().norm() / t.norm();
            prop_assert!((rel - svd.truncation_error).abs() < 1e-10);
        }
    }
}
