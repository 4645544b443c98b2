//! Dense complex operators on tensor-product spaces.
//!
//! Index convention, fixed for the whole crate: row-major, and in a
//! product space `V_1 ⊗ V_2 ⊗ … ⊗ V_k` the leftmost factor is the
//! slowest-varying index. A basis state `|i_1 i_2 … i_k⟩` therefore sits at
//! position `((i_1·d_2 + i_2)·d_3 + …)`. Every operator carries a
//! [`SiteLayout`] describing that factorisation so that partial traces,
//! partial transposes and embeddings cannot silently disagree.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Largest operator dimension accepted by [`DenseOperator::eigen_spectrum`].
pub const DEFAULT_EIGEN_DIM_CAP: usize = 4096;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("tensor factor {factor} out of range for layout with {count} factors")]
    FactorOutOfRange { factor: usize, count: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("layout {dims:?} does not factor dimension {dim}")]
    LayoutMismatch { dims: Vec<usize>, dim: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("eigensolver did not converge for dimension {dim} within {iterations} iterations")]
    EigenNonConvergence { dim: usize, iterations: usize },
    #[error("dimension {dim} exceeds eigensolver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operator contains non-finite entries")]
    NonFinite,
    #[error("singular operator")]
    Singular,
}

/// Ordered local dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteLayout {
    dims: Vec<usize>,
}

impl SiteLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self, TensorError> {
        if dims.is_empty() {
            return Err(TensorError::InvalidLayout("no factors".into()));
        }
        if dims.contains(&0) {
            return Err(TensorError::InvalidLayout(format!(
                "zero local dimension in {dims:?}"
            )));
        }
        Ok(Self { dims })
    }

    /// `n` factors of dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Self {
        assert!(d > 0 && n > 0, "uniform layout needs d, n > 0");
        Self { dims: vec![d; n] }
    }

    /// A single unstructured factor.
    pub fn flat(dim: usize) -> Self {
        Self::uniform(dim, 1)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SiteLayout) -> SiteLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SiteLayout { dims }
    }

    /// Stride of factor `k` in the flattened index.
    pub fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    fn check_factor(&self, factor: usize) -> Result<(), TensorError> {
        if factor >= self.dims.len() {
            Err(TensorError::FactorOutOfRange {
                factor,
                count: self.dims.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Layout with factor `k` removed; a flat unit layout if nothing remains.
    fn without(&self, k: usize) -> SiteLayout {
        let mut dims = self.dims.clone();
        dims.remove(k);
        if dims.is_empty() {
            dims.push(1);
        }
        SiteLayout { dims }
    }
}

/// Square complex matrix with an attached tensor layout.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    layout: SiteLayout,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DenseOperator(dim={}, layout={:?})",
            self.dim(),
            self.layout.dims
        )
    }
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>, layout: SiteLayout) -> Result<Self, TensorError> {
        if mat.nrows() != mat.ncols() {
            return Err(TensorError::DimensionMismatch {
                left: mat.nrows(),
                right: mat.ncols(),
            });
        }
        if layout.total() != mat.nrows() {
            return Err(TensorError::LayoutMismatch {
                dims: layout.dims.clone(),
                dim: mat.nrows(),
            });
        }
        Ok(Self { mat, layout })
    }

    /// Unstructured operator (single factor).
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        let n = mat.nrows();
        assert_eq!(n, mat.ncols(), "operator must be square");
        Self {
            mat,
            layout: SiteLayout::flat(n),
        }
    }

    pub fn from_fn(layout: SiteLayout, f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = layout.total();
        Self {
            mat: DMatrix::from_fn(n, n, f),
            layout,
        }
    }

    /// Row-major construction from a nested array, e.g. literal 2×2 or 4×4 blocks.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N], layout: SiteLayout) -> Self {
        assert_eq!(layout.total(), N, "layout must match literal size");
        Self {
            mat: DMatrix::from_fn(N, N, |i, j| rows[i][j]),
            layout,
        }
    }

    pub fn identity(layout: SiteLayout) -> Self {
        let n = layout.total();
        Self {
            mat: DMatrix::identity(n, n),
            layout,
        }
    }

    pub fn zeros(layout: SiteLayout) -> Self {
        let n = layout.total();
        Self {
            mat: DMatrix::zeros(n, n),
            layout,
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            mat[(i, i)] = *v;
        }
        Self {
            mat,
            layout: SiteLayout::flat(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// Same entries viewed through a different factorisation of the same dimension.
    pub fn with_layout(self, layout: SiteLayout) -> Result<Self, TensorError> {
        Self::new(self.mat, layout)
    }

    pub fn kron(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: self.mat.kronecker(&other.mat),
            layout: self.layout.concat(&other.layout),
        }
    }

    pub fn scale(&self, s: C64) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * s,
            layout: self.layout.clone(),
        }
    }

    pub fn transpose(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.transpose(),
            layout: self.layout.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.mat
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn determinant(&self) -> C64 {
        self.mat.clone().determinant()
    }

    pub fn try_inverse(&self) -> Result<DenseOperator, TensorError> {
        self.mat
            .clone()
            .try_inverse()
            .map(|mat| DenseOperator {
                mat,
                layout: self.layout.clone(),
            })
            .ok_or(TensorError::Singular)
    }

    /// Solve `self · X = rhs`.
    pub fn solve(&self, rhs: &DenseOperator) -> Result<DenseOperator, TensorError> {
        check_dims(self, rhs)?;
        self.mat
            .clone()
            .lu()
            .solve(&rhs.mat)
            .map(|mat| DenseOperator {
                mat,
                layout: rhs.layout.clone(),
            })
            .ok_or(TensorError::Singular)
    }

    pub fn commutator(&self, other: &DenseOperator) -> DenseOperator {
        self * other - other * self
    }

    /// Transpose only the indices of tensor factor `factor`.
    pub fn partial_transpose(&self, factor: usize) -> Result<DenseOperator, TensorError> {
        self.layout.check_factor(factor)?;
        let d = self.layout.dims[factor];
        let stride = self.layout.stride(factor);
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for r in 0..n {
            let ri = (r / stride) % d;
            for col in 0..n {
                let ci = (col / stride) % d;
                // exchange the factor digit between row and column
                let r2 = r - ri * stride + ci * stride;
                let c2 = col - ci * stride + ri * stride;
                out[(r2, c2)] = self.mat[(r, col)];
            }
        }
        Ok(DenseOperator {
            mat: out,
            layout: self.layout.clone(),
        })
    }

    /// Trace out tensor factor `factor`.
    pub fn partial_trace(&self, factor: usize) -> Result<DenseOperator, TensorError> {
        self.layout.check_factor(factor)?;
        let d = self.layout.dims[factor];
        let stride = self.layout.stride(factor);
        let out_layout = self.layout.without(factor);
        let m = out_layout.total();
        let mut out = DMatrix::zeros(m, m);
        // reduced index -> full index with factor digit k
        let lift = |idx: usize, k: usize| -> usize {
            let hi = idx / stride;
            let lo = idx % stride;
            (hi * d + k) * stride + lo
        };
        for r in 0..m {
            for col in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.mat[(lift(r, k), lift(col, k))];
                }
                out[(r, col)] = acc;
            }
        }
        Ok(DenseOperator {
            mat: out,
            layout: out_layout,
        })
    }

    /// All `dim` eigenvalues (with multiplicity), via complex Schur decomposition.
    pub fn eigen_spectrum(&self) -> Result<Vec<C64>, TensorError> {
        self.eigen_spectrum_capped(DEFAULT_EIGEN_DIM_CAP)
    }

    pub fn eigen_spectrum_capped(&self, cap: usize) -> Result<Vec<C64>, TensorError> {
        let n = self.dim();
        if n > cap {
            return Err(TensorError::DimensionCap { dim: n, cap });
        }
        if !self.is_finite() {
            return Err(TensorError::NonFinite);
        }
        let schur = Schur::try_new(self.mat.clone(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or(
            TensorError::EigenNonConvergence {
                dim: n,
                iterations: SCHUR_MAX_ITER,
            },
        )?;
        let (_, t) = schur.unpack();
        Ok((0..n).map(|i| t[(i, i)]).collect())
    }

    /// Right eigenvector for an (approximate) eigenvalue, by inverse iteration.
    pub fn eigenvector(&self, lambda: C64) -> Result<DVector<C64>, TensorError> {
        let n = self.dim();
        let scale = self.frobenius_norm().max(1e-300);
        let shift = lambda + C64::new(1e-10 * scale, 1e-10 * scale);
        let a = &self.mat - DMatrix::identity(n, n) * shift;
        let lu = a.lu();
        let mut v = DVector::from_fn(n, |i, _| {
            C64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64)
        });
        for _ in 0..4 {
            let w = lu.solve(&v).ok_or(TensorError::Singular)?;
            let norm = w.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(TensorError::Singular);
            }
            v = w / C64::new(norm, 0.0);
        }
        Ok(v)
    }

    /// `self · (I ⊗ … ⊗ local ⊗ … ⊗ I)` with `local` acting on factor `factor`.
    pub fn mul_local_right(
        &self,
        local: &DMatrix<C64>,
        factor: usize,
    ) -> Result<DenseOperator, TensorError> {
        self.layout.check_factor(factor)?;
        let d = self.layout.dims[factor];
        if local.nrows() != d || local.ncols() != d {
            return Err(TensorError::DimensionMismatch {
                left: d,
                right: local.nrows(),
            });
        }
        let stride = self.layout.stride(factor);
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for col in 0..n {
            let cj = (col / stride) % d;
            let base = col - cj * stride;
            for s in 0..d {
                let w = local[(s, cj)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = base + s * stride;
                for r in 0..n {
                    out[(r, col)] += self.mat[(r, src)] * w;
                }
            }
        }
        Ok(DenseOperator {
            mat: out,
            layout: self.layout.clone(),
        })
    }

    /// Embed an operator acting on the listed factors (in the listed order)
    /// into the full space described by `layout`.
    pub fn embed(
        op: &DenseOperator,
        sites: &[usize],
        layout: &SiteLayout,
    ) -> Result<DenseOperator, TensorError> {
        for &s in sites {
            layout.check_factor(s)?;
        }
        for (i, a) in sites.iter().enumerate() {
            if sites[i + 1..].contains(a) {
                return Err(TensorError::InvalidLayout(format!(
                    "repeated factor {a} in embedding"
                )));
            }
        }
        let local_dims: Vec<usize> = sites.iter().map(|&s| layout.dims[s]).collect();
        let local_total: usize = local_dims.iter().product();
        if local_total != op.dim() {
            return Err(TensorError::DimensionMismatch {
                left: local_total,
                right: op.dim(),
            });
        }
        let strides: Vec<usize> = sites.iter().map(|&s| layout.stride(s)).collect();
        let local_strides: Vec<usize> = (0..sites.len())
            .map(|k| local_dims[k + 1..].iter().product())
            .collect();
        let n = layout.total();
        // full index -> (local index, index with the chosen factors zeroed)
        let split = |idx: usize| -> (usize, usize) {
            let mut local = 0;
            let mut rest = idx;
            for k in 0..sites.len() {
                let digit = (idx / strides[k]) % local_dims[k];
                local += digit * local_strides[k];
                rest -= digit * strides[k];
            }
            (local, rest)
        };
        let place = |local: usize, rest: usize| -> usize {
            let mut idx = rest;
            for k in 0..sites.len() {
                let digit = (local / local_strides[k]) % local_dims[k];
                idx += digit * strides[k];
            }
            idx
        };
        let mut out = DMatrix::zeros(n, n);
        for col in 0..n {
            let (lc, rest) = split(col);
            for lr in 0..local_total {
                let v = op.mat[(lr, lc)];
                if v != C64::new(0.0, 0.0) {
                    out[(place(lr, rest), col)] = v;
                }
            }
        }
        Ok(DenseOperator {
            mat: out,
            layout: layout.clone(),
        })
    }
}

fn check_dims(a: &DenseOperator, b: &DenseOperator) -> Result<(), TensorError> {
    if a.dim() != b.dim() {
        Err(TensorError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        })
    } else {
        Ok(())
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator product dimension mismatch");
        DenseOperator {
            mat: &self.mat * &rhs.mat,
            layout: self.layout.clone(),
        }
    }
}

impl Mul for DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: DenseOperator) -> DenseOperator {
        &self * &rhs
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator sum dimension mismatch");
        DenseOperator {
            mat: &self.mat + &rhs.mat,
            layout: self.layout.clone(),
        }
    }
}

impl Add for DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: DenseOperator) -> DenseOperator {
        &self + &rhs
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "operator difference dimension mismatch"
        );
        DenseOperator {
            mat: &self.mat - &rhs.mat,
            layout: self.layout.clone(),
        }
    }
}

impl Sub for DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: DenseOperator) -> DenseOperator {
        &self - &rhs
    }
}

/// Swap operator on `V ⊗ V` with `dim V = d`: `𝒫 (v ⊗ w) = w ⊗ v`.
pub fn permutation_operator(d: usize) -> DenseOperator {
    assert!(d >= 1, "local dimension must be positive");
    let layout = SiteLayout::uniform(d, 2);
    let mut op = DenseOperator::zeros(layout);
    for a in 0..d {
        for b in 0..d {
            op.mat[(a * d + b, b * d + a)] = C64::new(1.0, 0.0);
        }
    }
    op
}

/// `‖lhs − rhs‖_F / max(‖lhs‖_F, ‖rhs‖_F, 1)`.
pub fn relative_residual(lhs: &DenseOperator, rhs: &DenseOperator) -> Result<f64, TensorError> {
    check_dims(lhs, rhs)?;
    let diff = (&lhs.mat - &rhs.mat)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = lhs.frobenius_norm().max(rhs.frobenius_norm()).max(1.0);
    Ok(diff / scale)
}

/// Scale-free variant `‖lhs − rhs‖_F / max(‖lhs‖_F, ‖rhs‖_F)` for identities whose
/// operators are small in absolute terms.
pub fn scaled_residual(lhs: &DenseOperator, rhs: &DenseOperator) -> Result<f64, TensorError> {
    check_dims(lhs, rhs)?;
    let diff = (&lhs.mat - &rhs.mat)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = lhs.frobenius_norm().max(rhs.frobenius_norm());
    Ok(if scale == 0.0 { 0.0 } else { diff / scale })
}

/// Greedy multiset distance between two spectra, normalised by the largest modulus.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra must have equal length");
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    // Match largest-modulus eigenvalues first; they are the best conditioned.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().total_cmp(&a[i].norm()));
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (a[i] - z).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("spectra have equal length");
        used[k] = true;
        worst = worst.max(d);
    }
    worst / scale
}
