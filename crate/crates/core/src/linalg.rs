//! Sparse matrix helpers and the symmetric solvers used by every subsystem.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type SparseMatrix = CsrMatrix<f64>;

/// `a * x` for a row-compressed matrix.
pub fn matvec(a: &SparseMatrix, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(a.ncols(), x.len(), "matvec dimension mismatch");
    let mut y = DVector::zeros(a.nrows());
    for (i, row) in a.row_iter().enumerate() {
        let mut acc = 0.0;
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            acc += v * x[j];
        }
        y[i] = acc;
    }
    y
}

/// `xᵀ a x`.
pub fn quad_form(a: &SparseMatrix, x: &DVector<f64>) -> f64 {
    x.dot(&matvec(a, x))
}

/// Linear combination `Σ cᵢ Aᵢ` of equally sized sparse matrices.
pub fn combine(terms: &[(f64, &SparseMatrix)]) -> SparseMatrix {
    let (nrows, ncols) = terms
        .first()
        .map(|(_, m)| (m.nrows(), m.ncols()))
        .unwrap_or((0, 0));
    let nnz = terms.iter().map(|(_, m)| m.nnz()).sum();
    let mut coo = CooMatrix::new(nrows, ncols);
    coo.reserve(nnz);
    for (c, m) in terms {
        assert_eq!((m.nrows(), m.ncols()), (nrows, ncols), "combine dimension mismatch");
        if *c == 0.0 {
            continue;
        }
        for (i, j, v) in m.triplet_iter() {
            coo.push(i, j, c * v);
        }
    }
    CsrMatrix::from(&coo)
}

pub fn diagonal(values: &[f64]) -> SparseMatrix {
    let mut coo = CooMatrix::new(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        coo.push(i, i, *v);
    }
    CsrMatrix::from(&coo)
}

/// Largest absolute diagonal entry.
pub fn diagonal_max(a: &SparseMatrix) -> f64 {
    a.triplet_iter()
        .filter(|(i, j, _)| i == j)
        .fold(0.0, |m, (_, _, v)| m.max(v.abs()))
}

/// `max |A - Aᵀ|` over all entries.
pub fn max_asymmetry(a: &SparseMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, j, v) in a.triplet_iter() {
        let vt = a.get_entry(j, i).map(|e| e.into_value()).unwrap_or(0.0);
        worst = worst.max((v - vt).abs());
    }
    worst
}

pub fn to_dense(a: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from(a)
}

/// Coordinate-format dump (`row col value`, 0-based), one entry per line.
pub fn to_coordinate_text(a: &SparseMatrix) -> String {
    let mut out = format!("# {} {} {}\n", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplet_iter() {
        out.push_str(&format!("{i} {j} {v:e}\n"));
    }
    out
}

/// Sparse Cholesky factorization of a symmetric positive-definite matrix.
pub struct SpdSolver {
    factor: CscCholesky<f64>,
    n: usize,
}

impl SpdSolver {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Solver(format!(
                "matrix is not square ({}x{})",
                a.nrows(),
                a.ncols()
            )));
        }
        // symmetric input: the transpose shares the CSC layout
        let csc: CscMatrix<f64> = a.clone().transpose_as_csc();
        let factor = CscCholesky::factor(&csc)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e}")))?;
        Ok(SpdSolver { factor, n: a.nrows() })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if self.n == 0 {
            return DVector::zeros(0);
        }
        let x = self.factor.solve(b);
        x.column(0).into_owned()
    }
}

/// Solves a symmetric system, falling back to dense LU when the matrix is not
/// positive definite.
pub fn solve_symmetric(a: &SparseMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    match SpdSolver::new(a) {
        Ok(s) => Ok(s.solve(b)),
        Err(_) => to_dense(a)
            .lu()
            .solve(b)
            .ok_or_else(|| Error::Solver("matrix is singular".into())),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PowerIterationOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions {
            max_iterations: 20_000,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub eigenvalue: f64,
    pub eigenvector: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Largest eigenvalue of `mass x = λ stiffness x` by power iteration on
/// `stiffness⁻¹ mass`, with `stiffness` SPD and `mass` symmetric positive
/// semidefinite. Converged when `‖mass x − λ stiffness x‖ ≤ tol · λ‖stiffness x‖`.
pub fn generalized_max_eigenvalue(
    stiffness: &SparseMatrix,
    mass: &SparseMatrix,
    opts: PowerIterationOptions,
) -> Result<GeneralizedEigen> {
    let n = stiffness.nrows();
    let solver = SpdSolver::new(stiffness)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let y = solver.solve(&matvec(mass, &x));
        let ky = matvec(stiffness, &y);
        let knorm = y.dot(&ky).sqrt();
        if !(knorm > 0.0) {
            return Err(Error::Solver(
                "power iteration collapsed: mass operator annihilates the iterate".into(),
            ));
        }
        x = y / knorm;
        let kx = ky / knorm;
        let mx = matvec(mass, &x);
        let lambda = x.dot(&mx);
        let denom = (lambda * kx.norm()).abs();
        residual = (&mx - lambda * &kx).norm() / denom;
        if residual <= opts.tolerance {
            return Ok(GeneralizedEigen {
                eigenvalue: lambda,
                eigenvector: x,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::PowerIteration {
        iterations: opts.max_iterations,
        residual,
    })
}
