//! Sector-wise symmetric eigendecomposition and thermal states.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::spinchain::{BlockOperator, HalfInt};
use crate::{Error, Result};

/// Largest tolerated `|A_ij - A_ji|` (relative to `max(1, max|A|)`) for an
/// input to count as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Validation(format!("matrix is not symmetric (max asymmetry {asym:e})")));
    }
    Ok(())
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors as columns.
pub fn eigh(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenpairs of one invariant block.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    /// Computational basis states spanning the block.
    pub indices: Vec<usize>,
    /// Magnetization of the block, when it is an `S_z` sector.
    pub magnetization: Option<HalfInt>,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors in the block's own basis, one per column.
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    n: usize,
    blocks: Vec<EigenBlock>,
    sz_symmetric: bool,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn blocks(&self) -> &[EigenBlock] {
        &self.blocks
    }

    /// True when every block is a magnetization sector.
    pub fn is_sz_symmetric(&self) -> bool {
        self.sz_symmetric
    }

    pub fn min_energy(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| b.values.first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// All eigenvalues, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Decomposition of `H + db·S_z`. The eigenvectors are unchanged since
    /// each block has a fixed magnetization.
    pub fn with_field_shift(&self, db: f64) -> Result<Self> {
        if !self.sz_symmetric {
            return Err(Error::Validation("field shift needs a sector decomposition".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|block| {
                let shift = db * block.magnetization.map_or(0.0, HalfInt::value);
                EigenBlock {
                    values: block.values.iter().map(|e| e + shift).collect(),
                    ..block.clone()
                }
            })
            .collect();
        Ok(SpectralDecomposition { blocks, ..*self })
    }

    /// Dense `Σ_k f(E_k) |k><k|`.
    pub fn dense_function(&self, f: impl Fn(f64) -> f64 + Sync) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for block in &self.blocks {
            let weights: Vec<f64> = block.values.iter().map(|&e| f(e)).collect();
            let local = weighted_outer(&block.vectors, &weights);
            scatter(&mut out, &block.indices, &local);
        }
        out
    }

    /// `V diag(E) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.dense_function(|e| e)
    }
}

/// `V diag(w) V^T`.
fn weighted_outer(vectors: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (c, &w) in weights.iter().enumerate() {
        scaled.column_mut(c).scale_mut(w);
    }
    scaled * vectors.transpose()
}

fn scatter(out: &mut DMatrix<f64>, indices: &[usize], local: &DMatrix<f64>) {
    for (c, &j) in indices.iter().enumerate() {
        for (r, &i) in indices.iter().enumerate() {
            out[(i, j)] = local[(r, c)];
        }
    }
}

/// Diagonalizes every magnetization block of `h` independently.
pub fn eigendecompose(h: &BlockOperator) -> Result<SpectralDecomposition> {
    let index = h.index();
    let blocks = h
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(k, block)| {
            let (values, vectors) = eigh(block)?;
            Ok(EigenBlock {
                indices: index.sector(k).to_vec(),
                magnetization: Some(index.magnetization(k)),
                values,
                vectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDecomposition { n: h.n(), blocks, sz_symmetric: true })
}

/// Decomposition of an arbitrary dense symmetric operator on `n` qubits,
/// treated as a single block.
pub fn eigendecompose_dense(n: usize, m: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let dim = 1usize << n;
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
    }
    let (values, vectors) = eigh(m)?;
    let block = EigenBlock { indices: (0..dim).collect(), magnetization: None, values, vectors };
    Ok(SpectralDecomposition { n, blocks: vec![block], sz_symmetric: false })
}

/// Density operator on `n` qubits (real, as every state of this model is).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    matrix: DMatrix<f64>,
    sz_symmetric: bool,
}

impl DensityMatrix {
    /// Wraps a matrix without checking the density-matrix invariants; call
    /// [`DensityMatrix::check`] for that.
    pub fn new(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let sz_symmetric = commutes_with_sz(&matrix);
        Ok(DensityMatrix { n, matrix, sz_symmetric })
    }

    pub(crate) fn from_parts(n: usize, matrix: DMatrix<f64>, sz_symmetric: bool) -> Self {
        DensityMatrix { n, matrix, sz_symmetric }
    }

    /// `|ψ><ψ|`.
    pub fn pure(n: usize, psi: &DVector<f64>) -> Result<Self> {
        Self::new(n, psi * psi.transpose())
    }

    /// `I / d`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            matrix: DMatrix::identity(dim, dim) / dim as f64,
            sz_symmetric: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// True when no element couples different magnetization sectors.
    pub fn is_sz_symmetric(&self) -> bool {
        self.sz_symmetric
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum()
    }

    /// Convex combination `q ρ1 + (1-q) ρ2`.
    pub fn mix(&self, other: &DensityMatrix, q: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(DensityMatrix {
            n: self.n,
            matrix: &self.matrix * q + &other.matrix * (1.0 - q),
            sz_symmetric: self.sz_symmetric && other.sz_symmetric,
        })
    }

    /// Unit trace (1e-10), symmetry (1e-12) and positivity (-1e-10).
    pub fn check(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let asym = (&self.matrix - self.matrix.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::Validation(format!("not symmetric (deviation {asym:e})")));
        }
        let min = symmetric_eigenvalues(&self.matrix)?[0];
        if min < -1e-10 {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

fn commutes_with_sz(m: &DMatrix<f64>) -> bool {
    let dim = m.nrows();
    (0..dim).all(|j| (0..dim).all(|i| i.count_ones() == j.count_ones() || m[(i, j)] == 0.0))
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("temperature must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `Z = Σ_k exp(-E_k/T)` stored as `exp(-E_min/T) · shifted_sum`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionFunction {
    pub shifted_sum: f64,
    /// `E_min`, the energy subtracted from every exponent.
    pub shift: f64,
    pub temperature: f64,
}

impl PartitionFunction {
    pub fn ln_z(&self) -> f64 {
        self.shifted_sum.ln() - self.shift / self.temperature
    }

    /// May overflow for large `|E_min| / T`; prefer [`Self::ln_z`].
    pub fn z(&self) -> f64 {
        self.ln_z().exp()
    }
}

pub fn partition_function(decomp: &SpectralDecomposition, t: f64) -> Result<PartitionFunction> {
    check_temperature(t)?;
    let shift = decomp.min_energy();
    let shifted_sum = decomp
        .blocks()
        .iter()
        .flat_map(|b| b.values.iter())
        .map(|&e| (-(e - shift) / t).exp())
        .sum();
    Ok(PartitionFunction { shifted_sum, shift, temperature: t })
}

/// Gibbs state `exp(-H/T) / Z`, block-diagonal whenever the decomposition is.
pub fn thermal_state(decomp: &SpectralDecomposition, t: f64) -> Result<DensityMatrix> {
    let pf = partition_function(decomp, t)?;
    let (shift, z) = (pf.shift, pf.shifted_sum);
    let dim = decomp.dim();
    let locals: Vec<Option<DMatrix<f64>>> = decomp
        .blocks()
        .par_iter()
        .map(|block| {
            let weights: Vec<f64> = block.values.iter().map(|&e| (-(e - shift) / t).exp() / z).collect();
            if weights.iter().all(|&w| w == 0.0) {
                None
            } else {
                Some(weighted_outer(&block.vectors, &weights))
            }
        })
        .collect();
    let mut rho = DMatrix::zeros(dim, dim);
    for (block, local) in decomp.blocks().iter().zip(&locals) {
        if let Some(local) = local {
            scatter(&mut rho, &block.indices, local);
        }
    }
    Ok(DensityMatrix::from_parts(decomp.n(), rho, decomp.is_sz_symmetric()))
}

/// Equal mixture over the ground manifold, the `T -> 0` limit of the Gibbs
/// state. Levels within `tol · max(1, |E_min|)` count as degenerate.
pub fn zero_t_limit(decomp: &SpectralDecomposition, tol: f64) -> DensityMatrix {
    let emin = decomp.min_energy();
    let window = tol * emin.abs().max(1.0);
    let degeneracy: usize = decomp
        .blocks()
        .iter()
        .map(|b| b.values.iter().filter(|&&e| e - emin <= window).count())
        .sum();
    let weight = 1.0 / degeneracy as f64;
    let rho = decomp.dense_function(|e| if e - emin <= window { weight } else { 0.0 });
    DensityMatrix::from_parts(decomp.n(), rho, decomp.is_sz_symmetric())
}
