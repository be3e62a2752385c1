//! Dense complex linear algebra on C^n, C^n⊗C^n, C^n⊗C^n⊗C^n and on
//! M×M grids of n×n blocks.
//!
//! A [`TensorOp`] stores Σ A_{ij,kl} E_ij ⊗ E_kl as an n²×n² matrix whose
//! row index is `i*n + k` and column index is `j*n + l`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type MatN = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Max-abs entry; the norm used for every residual in the crate.
pub fn matnorm(x: &MatN) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn identity(n: usize) -> MatN {
    MatN::identity(n, n)
}

pub fn commutator(a: &MatN, b: &MatN) -> MatN {
    a * b - b * a
}

/// Linear operator on C^n ⊗ C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOp {
    n: usize,
    mat: MatN,
}

impl TensorOp {
    pub fn from_matrix(n: usize, mat: MatN) -> Result<Self> {
        if mat.nrows() != n * n || mat.ncols() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: mat.nrows(),
            });
        }
        Ok(TensorOp { n, mat })
    }

    pub fn zeros(n: usize) -> Self {
        TensorOp {
            n,
            mat: MatN::zeros(n * n, n * n),
        }
    }

    pub fn identity(n: usize) -> Self {
        TensorOp {
            n,
            mat: MatN::identity(n * n, n * n),
        }
    }

    /// P_12 = Σ E_ij ⊗ E_ji, i.e. P_{ij,kl} = δ_il δ_jk.
    pub fn permutation(n: usize) -> Self {
        let mut mat = MatN::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                mat[(i * n + j, j * n + i)] = ONE;
            }
        }
        TensorOp { n, mat }
    }

    /// X ⊗ Y.
    pub fn kron(x: &MatN, y: &MatN) -> Result<Self> {
        if x.nrows() != y.nrows() || !x.is_square() || !y.is_square() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: y.nrows(),
            });
        }
        Ok(TensorOp {
            n: x.nrows(),
            mat: x.kronecker(y),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &MatN {
        &self.mat
    }

    /// Component A_{ij,kl}.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.mat[(i * self.n + k, j * self.n + l)]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TensorOp {
            n: self.n,
            mat: &self.mat * s,
        }
    }

    pub fn add(&self, other: &TensorOp) -> Result<Self> {
        self.same_dim(other)?;
        Ok(TensorOp {
            n: self.n,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &TensorOp) -> Result<Self> {
        self.same_dim(other)?;
        Ok(TensorOp {
            n: self.n,
            mat: &self.mat - &other.mat,
        })
    }

    /// In-place `self += s * other`.
    pub fn add_scaled(&mut self, s: Complex64, other: &TensorOp) -> Result<()> {
        self.same_dim(other)?;
        self.mat.zip_apply(&other.mat, |a, b| *a += s * b);
        Ok(())
    }

    /// Operator product self ∘ other.
    pub fn compose(&self, other: &TensorOp) -> Result<Self> {
        self.same_dim(other)?;
        Ok(TensorOp {
            n: self.n,
            mat: &self.mat * &other.mat,
        })
    }

    /// U_12 ↦ U_21 = P U P.
    pub fn swap_spaces(&self) -> Self {
        let n = self.n;
        let mut mat = MatN::zeros(n * n, n * n);
        for r in 0..n * n {
            for c in 0..n * n {
                let (i, k) = (r / n, r % n);
                let (j, l) = (c / n, c % n);
                mat[(k * n + i, l * n + j)] = self.mat[(r, c)];
            }
        }
        TensorOp { n, mat }
    }

    /// tr_2(A_12 S_2): result_ij = Σ_kl A_{ij,kl} S_lk.
    pub fn tr2_contract(&self, s: &MatN) -> Result<MatN> {
        let n = self.n;
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.nrows(),
            });
        }
        let mut out = MatN::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    for l in 0..n {
                        acc += self.mat[(i * n + k, j * n + l)] * s[(l, k)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Embeds the operator into C^n⊗C^n⊗C^n on the given pair of spaces.
    pub fn embed(&self, pair: SpacePair) -> ThreeOp {
        let n = self.n;
        let dim = n * n * n;
        let mut mat = MatN::zeros(dim, dim);
        let (a, b, spectator) = pair.slots();
        for r in 0..dim {
            let ri = three_index(r, n);
            for c in 0..dim {
                let ci = three_index(c, n);
                if ri[spectator] != ci[spectator] {
                    continue;
                }
                mat[(r, c)] = self.mat[(ri[a] * n + ri[b], ci[a] * n + ci[b])];
            }
        }
        ThreeOp { n, mat }
    }

    pub fn norm(&self) -> f64 {
        matnorm(&self.mat)
    }

    fn same_dim(&self, other: &TensorOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

fn three_index(flat: usize, n: usize) -> [usize; 3] {
    [flat / (n * n), (flat / n) % n, flat % n]
}

/// Ordered pair of tensor factors, e.g. `S13` for R_13.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpacePair {
    S12,
    S13,
    S23,
    S21,
    S31,
    S32,
}

impl SpacePair {
    /// (first slot, second slot, spectator), zero-based.
    fn slots(self) -> (usize, usize, usize) {
        match self {
            SpacePair::S12 => (0, 1, 2),
            SpacePair::S13 => (0, 2, 1),
            SpacePair::S23 => (1, 2, 0),
            SpacePair::S21 => (1, 0, 2),
            SpacePair::S31 => (2, 0, 1),
            SpacePair::S32 => (2, 1, 0),
        }
    }
}

/// Linear operator on C^n ⊗ C^n ⊗ C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeOp {
    n: usize,
    mat: MatN,
}

impl ThreeOp {
    pub fn identity(n: usize) -> Self {
        ThreeOp {
            n,
            mat: MatN::identity(n * n * n, n * n * n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        ThreeOp {
            n,
            mat: MatN::zeros(n * n * n, n * n * n),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &MatN {
        &self.mat
    }

    pub fn norm(&self) -> f64 {
        matnorm(&self.mat)
    }

    /// Traces out one factor (0, 1 or 2); the remaining two keep their order.
    pub fn partial_trace(&self, space: usize) -> Result<TensorOp> {
        if space > 2 {
            return Err(Error::IndexOutOfRange {
                row: space,
                col: 0,
                dim: 3,
            });
        }
        let n = self.n;
        let keep: Vec<usize> = (0..3).filter(|&s| s != space).collect();
        let mut mat = MatN::zeros(n * n, n * n);
        let dim = n * n * n;
        for r in 0..dim {
            let ri = three_index(r, n);
            for c in 0..dim {
                let ci = three_index(c, n);
                if ri[space] != ci[space] {
                    continue;
                }
                mat[(ri[keep[0]] * n + ri[keep[1]], ci[keep[0]] * n + ci[keep[1]])] +=
                    self.mat[(r, c)];
            }
        }
        Ok(TensorOp { n, mat })
    }
}

impl std::ops::Mul for &ThreeOp {
    type Output = ThreeOp;
    fn mul(self, rhs: &ThreeOp) -> ThreeOp {
        assert_eq!(self.n, rhs.n, "three-space dimension mismatch");
        ThreeOp {
            n: self.n,
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl std::ops::Add for &ThreeOp {
    type Output = ThreeOp;
    fn add(self, rhs: &ThreeOp) -> ThreeOp {
        assert_eq!(self.n, rhs.n, "three-space dimension mismatch");
        ThreeOp {
            n: self.n,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &ThreeOp {
    type Output = ThreeOp;
    fn sub(self, rhs: &ThreeOp) -> ThreeOp {
        assert_eq!(self.n, rhs.n, "three-space dimension mismatch");
        ThreeOp {
            n: self.n,
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// NM×NM matrix seen as an M×M grid of N×N blocks: Σ E_ij ⊗ X^{ij}.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    m: usize,
    mat: MatN,
}

impl BlockMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        BlockMatrix {
            n,
            m,
            mat: MatN::zeros(n * m, n * m),
        }
    }

    pub fn from_matrix(n: usize, m: usize, mat: MatN) -> Result<Self> {
        if mat.nrows() != n * m || mat.ncols() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                found: mat.nrows(),
            });
        }
        Ok(BlockMatrix { n, m, mat })
    }

    /// Builds the grid from `blocks[i][j]`.
    pub fn assemble(blocks: &[Vec<MatN>]) -> Result<Self> {
        let m = blocks.len();
        let n = blocks
            .first()
            .and_then(|row| row.first())
            .map_or(0, |b| b.nrows());
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut out = BlockMatrix::zeros(n, m);
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            for (j, block) in row.iter().enumerate() {
                out.set_block(i, j, block)?;
            }
        }
        Ok(out)
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn grid_dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &MatN {
        &self.mat
    }

    pub fn into_matrix(self) -> MatN {
        self.mat
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.m || j >= self.m {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                dim: self.m,
            });
        }
        Ok(())
    }

    pub fn block(&self, i: usize, j: usize) -> Result<MatN> {
        self.check_index(i, j)?;
        Ok(self
            .mat
            .view((i * self.n, j * self.n), (self.n, self.n))
            .into_owned())
    }

    pub fn set_block(&mut self, i: usize, j: usize, block: &MatN) -> Result<()> {
        self.check_index(i, j)?;
        if block.nrows() != self.n || block.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: block.nrows(),
            });
        }
        self.mat
            .view_mut((i * self.n, j * self.n), (self.n, self.n))
            .copy_from(block);
        Ok(())
    }

    /// All blocks as `blocks[i][j]`; inverse of [`BlockMatrix::assemble`].
    pub fn blocks(&self) -> Vec<Vec<MatN>> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| self.block(i, j).expect("index in range"))
                    .collect()
            })
            .collect()
    }

    pub fn commutator(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.m,
                found: other.n * other.m,
            });
        }
        Ok(BlockMatrix {
            n: self.n,
            m: self.m,
            mat: commutator(&self.mat, &other.mat),
        })
    }

    pub fn norm(&self) -> f64 {
        matnorm(&self.mat)
    }
}
