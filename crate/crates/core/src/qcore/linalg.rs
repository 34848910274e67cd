//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on plain `DMatrix<Complex64>`; the checked wrappers
//! in the parent module call into these helpers after validating their
//! invariants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    let n = m.nrows();
    for i in 0..n {
        out[(i, i)] = c(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

/// Largest entrywise deviation `|m - m†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Re tr(a b)`; the Hilbert–Schmidt inner product for Hermitian arguments.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        hermitize(&(scaled * self.vectors.adjoint()))
    }

    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.vectors.column(j).into_owned()
    }
}

pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    if n == 1 {
        return Eigh {
            values: DVector::from_element(1, m[(0, 0)].re),
            vectors: identity(1),
        };
    }
    let dec = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| dec.eigenvalues[k]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &dec.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    eigh(m).values.iter().copied().collect()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).min()
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).max()
}

/// Matrix exponential of a Hermitian matrix.
pub fn expm_herm(m: &CMatrix) -> CMatrix {
    eigh(m).map(f64::exp)
}

/// Principal square root of a PSD matrix; small negative eigenvalues are clipped.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    eigh(m).map(|x| x.max(0.0).sqrt())
}

/// Support-restricted logarithm: eigenvalues at or below `cutoff` map to 0.
pub fn log_support(m: &CMatrix, cutoff: f64) -> CMatrix {
    eigh(m).map(|x| if x > cutoff { x.ln() } else { 0.0 })
}

/// Pseudo-inverse square root on the support.
pub fn inv_sqrt_support(m: &CMatrix, cutoff: f64) -> CMatrix {
    eigh(m).map(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 })
}

/// Projector onto the eigenspace with eigenvalues above `cutoff`.
pub fn support_projector(m: &CMatrix, cutoff: f64) -> CMatrix {
    eigh(m).map(|x| if x > cutoff { 1.0 } else { 0.0 })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_factorization(dims: &[usize], n: usize) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != n || dims.contains(&0) {
        return Err(Error::input(format!(
            "factor dimensions {dims:?} do not multiply to {n}"
        )));
    }
    Ok(())
}

/// Partial trace keeping the subsystems listed in `keep` (in their original order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n = m.nrows();
    check_factorization(dims, n)?;
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::input(format!("subsystem index {bad} out of range")));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let tr_dim: usize = traced_dims.iter().product();

    // strides for the row-major multi-index of the full space
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offset = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut off = 0;
        let mut rem = kept_idx;
        for (pos, &k) in keep_sorted.iter().enumerate().rev() {
            let d = kept_dims[pos];
            off += (rem % d) * strides[k];
            rem /= d;
        }
        let mut rem = traced_idx;
        for (pos, &k) in traced.iter().enumerate().rev() {
            let d = traced_dims[pos];
            off += (rem % d) * strides[k];
            rem /= d;
        }
        off
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = ZERO;
            for t in 0..tr_dim {
                acc += m[(offset(i, t), offset(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `tr_B` of an operator on `A ⊗ B`.
pub fn trace_out_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut acc = ZERO;
            for b in 0..db {
                acc += m[(i * db + b, j * db + b)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `tr_A` of an operator on `A ⊗ B`.
pub fn trace_out_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(db, db);
    for a in 0..da {
        for i in 0..db {
            for j in 0..db {
                out[(i, j)] += m[(a * db + i, a * db + j)];
            }
        }
    }
    out
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_herm(m: &CMatrix) -> f64 {
    eigh(m).values.iter().map(|x| x.abs()).sum()
}

/// Von Neumann entropy in nats of a PSD matrix (not necessarily normalized).
pub fn entropy_of(m: &CMatrix, cutoff: f64) -> f64 {
    eigh(m)
        .values
        .iter()
        .filter(|&&x| x > cutoff)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Largest entrywise residual of `v v† = I`-type unitarity.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Column-stacked outer product `|v⟩⟨v|`.
pub fn projector(v: &DVector<Complex64>) -> CMatrix {
    v * v.adjoint()
}
