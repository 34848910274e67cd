use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{SdpProblem, Sense, SparseHermitian};
use crate::qcore::linalg::{c, CMatrix};

/// A linear map from one variable block into a matrix-valued expression.
#[derive(Debug, Clone)]
pub enum LinearTerm {
    /// `scale · X`
    Ident { block: usize, scale: f64 },
    /// `scale · X ⊗ I_dim`
    KronIdentityRight { block: usize, dim: usize, scale: f64 },
    /// `scale · I_dim ⊗ X`
    KronIdentityLeft { block: usize, dim: usize, scale: f64 },
    /// `x · F` for a 1×1 block `x`
    ScalarTimes { block: usize, matrix: CMatrix },
    /// `scale · tr_2 X` for `X` on `C^da ⊗ C^db`
    TraceOutSecond {
        block: usize,
        da: usize,
        db: usize,
        scale: f64,
    },
}

impl LinearTerm {
    pub fn ident(block: usize, scale: f64) -> Self {
        LinearTerm::Ident { block, scale }
    }

    pub fn kron_identity_right(block: usize, dim: usize, scale: f64) -> Self {
        LinearTerm::KronIdentityRight { block, dim, scale }
    }

    pub fn kron_identity_left(block: usize, dim: usize, scale: f64) -> Self {
        LinearTerm::KronIdentityLeft { block, dim, scale }
    }

    pub fn scalar_times(block: usize, matrix: CMatrix) -> Self {
        LinearTerm::ScalarTimes { block, matrix }
    }

    pub fn trace_out_second(block: usize, da: usize, db: usize, scale: f64) -> Self {
        LinearTerm::TraceOutSecond { block, da, db, scale }
    }

    /// Contributions `(block, row, col, coeff)` with `out[r, c] = Σ coeff · X[row, col]`.
    fn contributions(&self, blocks: &[usize], r: usize, col: usize, out: &mut Vec<(usize, usize, usize, Complex64)>) {
        match self {
            LinearTerm::Ident { block, scale } => out.push((*block, r, col, c(*scale, 0.0))),
            LinearTerm::KronIdentityRight { block, dim, scale } => {
                if r % dim == col % dim {
                    out.push((*block, r / dim, col / dim, c(*scale, 0.0)));
                }
            }
            LinearTerm::KronIdentityLeft { block, dim: _, scale } => {
                let n = blocks[*block];
                if r / n == col / n {
                    out.push((*block, r % n, col % n, c(*scale, 0.0)));
                }
            }
            LinearTerm::ScalarTimes { block, matrix } => {
                let v = matrix[(r, col)];
                if v.norm() > 0.0 {
                    out.push((*block, 0, 0, v));
                }
            }
            LinearTerm::TraceOutSecond {
                block,
                da: _,
                db,
                scale,
            } => {
                for i in 0..*db {
                    out.push((*block, r * db + i, col * db + i, c(*scale, 0.0)));
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    blocks: Vec<usize>,
    objective: Vec<CMatrix>,
    constraints: Vec<(SparseHermitian, f64)>,
    sense: Sense,
    groups: Vec<(usize, String)>,
}

impl ProblemBuilder {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        let objective = blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        ProblemBuilder {
            blocks,
            objective,
            constraints: Vec::new(),
            sense,
            groups: Vec::new(),
        }
    }

    /// Starts a named group; later constraints belong to it until the next call.
    pub fn group(&mut self, label: &str) -> &mut Self {
        self.groups.push((self.constraints.len(), label.to_string()));
        self
    }

    pub fn set_objective(&mut self, block: usize, m: CMatrix) -> &mut Self {
        self.objective[block] = m;
        self
    }

    /// `Σ_k ⟨A_k, X_{block_k}⟩ = b`.
    pub fn add_dense_constraint(&mut self, parts: &[(usize, CMatrix)], b: f64) -> &mut Self {
        let mut map = BTreeMap::new();
        for (block, m) in parts {
            for r in 0..m.nrows() {
                for col in 0..m.ncols() {
                    *map.entry((*block, r, col)).or_insert(c(0.0, 0.0)) += m[(r, col)];
                }
            }
        }
        self.constraints.push((SparseHermitian::from_map(map), b));
        self
    }

    /// `Σ terms = rhs` as a Hermitian matrix identity: one real constraint per
    /// diagonal entry and two (real and imaginary part) per upper-triangular entry.
    pub fn add_matrix_equality(&mut self, terms: &[LinearTerm], rhs: &CMatrix) -> &mut Self {
        let n = rhs.nrows();
        let mut contrib = Vec::new();
        for r in 0..n {
            for col in r..n {
                contrib.clear();
                for t in terms {
                    t.contributions(&self.blocks, r, col, &mut contrib);
                }
                let parts: &[(f64, Complex64)] = if r == col {
                    &[(rhs[(r, r)].re, c(1.0, 0.0))]
                } else {
                    &[(rhs[(r, col)].re, c(1.0, 0.0)), (rhs[(r, col)].im, c(0.0, -1.0))]
                };
                for &(b, rot) in parts {
                    let mut map = BTreeMap::new();
                    for &(blk, row, cc, coeff) in &contrib {
                        let k = coeff * rot;
                        *map.entry((blk, cc, row)).or_insert(c(0.0, 0.0)) += k * 0.5;
                        *map.entry((blk, row, cc)).or_insert(c(0.0, 0.0)) += k.conj() * 0.5;
                    }
                    let a = SparseHermitian::from_map(map);
                    if a.is_empty() {
                        debug_assert!(b.abs() < 1e-12, "inconsistent empty constraint");
                        continue;
                    }
                    self.constraints.push((a, b));
                }
            }
        }
        self
    }

    pub fn build(self) -> SdpProblem {
        SdpProblem {
            blocks: self.blocks,
            objective: self.objective,
            constraints: self.constraints,
            sense: self.sense,
            groups: self.groups,
        }
    }
}
