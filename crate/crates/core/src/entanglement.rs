//! Partial trace, partial transpose and negativity.
//!
//! A state of a subsystem is obtained by tracing out the remaining sites;
//! the negativity of a bipartition is the absolute sum of the negative
//! eigenvalues of the partially transposed density matrix.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::spectral::{self, DensityMatrix};
use crate::spinchain::{magnetization, ChainSpec};
use crate::{Error, Result, MAX_SITES};

/// Default threshold below which a negativity counts as zero.
pub const EPS_NEG: f64 = 1e-10;

const SITE_LETTERS: &[u8] = b"abcdefghijkl";

/// Split of a set of kept sites into two non-empty groups `A` and `B`.
///
/// When every site is kept the split is global; otherwise the negativity is
/// that of the reduced state on the kept sites. `A` always holds the lowest
/// kept site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    keep: u32,
    part_a: u32,
}

impl Bipartition {
    /// Global split of `n` sites with `A` given as a site bitmask.
    pub fn global(n: usize, part_a: u32) -> Result<Self> {
        Self::reduced(n, full_mask(n), part_a)
    }

    /// Split of the subsystem `keep` (bitmask) into `part_a` and the rest of
    /// `keep`.
    pub fn reduced(n: usize, keep: u32, part_a: u32) -> Result<Self> {
        let label = || format!("n={n} keep={keep:#b} A={part_a:#b}");
        if !(2..=MAX_SITES).contains(&n) {
            return Err(Error::Parse { label: label(), reason: format!("unsupported site count {n}") });
        }
        if keep & !full_mask(n) != 0 {
            return Err(Error::Parse { label: label(), reason: "site out of range".into() });
        }
        if part_a & !keep != 0 {
            return Err(Error::Parse { label: label(), reason: "A is not inside the kept sites".into() });
        }
        if part_a == 0 || part_a == keep {
            return Err(Error::Parse { label: label(), reason: "both groups must be non-empty".into() });
        }
        let lowest = keep & keep.wrapping_neg();
        let part_a = if part_a & lowest != 0 { part_a } else { keep & !part_a };
        Ok(Bipartition { n, keep, part_a })
    }

    /// Parses labels such as `"ab-cd"` (global), `"a-b"` on a longer chain
    /// (reduced pair) or `"a-*"` (`A` against all remaining sites).
    pub fn parse(label: &str, n: usize) -> Result<Self> {
        let err = |reason: &str| Error::Parse { label: label.to_string(), reason: reason.to_string() };
        if !(2..=MAX_SITES).contains(&n) {
            return Err(err("unsupported site count"));
        }
        let (left, right) = label.split_once('-').ok_or_else(|| err("expected two groups separated by '-'"))?;
        if right.contains('-') {
            return Err(err("more than two groups"));
        }
        let group = |s: &str| -> Result<u32> {
            if s.is_empty() {
                return Err(err("empty group"));
            }
            let mut mask = 0u32;
            let mut last: Option<usize> = None;
            for ch in s.bytes() {
                let site = SITE_LETTERS
                    .iter()
                    .position(|&c| c == ch)
                    .ok_or_else(|| err(&format!("invalid site letter {:?}", ch as char)))?;
                if site >= n {
                    return Err(err(&format!("site {} out of range for n = {n}", ch as char)));
                }
                if last.is_some_and(|l| site <= l) {
                    return Err(err("sites within a group must be sorted and distinct"));
                }
                last = Some(site);
                mask |= 1 << site;
            }
            Ok(mask)
        };
        let a = group(left)?;
        let b = if right == "*" { full_mask(n) & !a } else { group(right)? };
        if a & b != 0 {
            return Err(err("groups overlap"));
        }
        Self::reduced(n, a | b, a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn keep(&self) -> u32 {
        self.keep
    }

    pub fn part_a(&self) -> u32 {
        self.part_a
    }

    pub fn part_b(&self) -> u32 {
        self.keep & !self.part_a
    }

    pub fn is_global(&self) -> bool {
        self.keep == full_mask(self.n)
    }

    pub fn kept_sites(&self) -> usize {
        self.keep.count_ones() as usize
    }

    /// `A` expressed in the site numbering of the kept subsystem.
    pub fn reduced_part_a(&self) -> u32 {
        compress(self.part_a, self.keep)
    }

    /// Dimension of the smaller side, `2^min(|A|, |B|)`.
    pub fn smaller_dim(&self) -> usize {
        1 << self.part_a.count_ones().min(self.part_b().count_ones())
    }

    /// Largest negativity any state can reach on this split.
    pub fn max_negativity(&self) -> f64 {
        (self.smaller_dim() as f64 - 1.0) / 2.0
    }

    pub fn label(&self) -> String {
        format!("{}-{}", letters(self.part_a), letters(self.part_b()))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn full_mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

fn letters(mask: u32) -> String {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| SITE_LETTERS[i] as char)
        .collect()
}

/// Packs the bits of `value` selected by `mask` into the low bits.
fn compress(value: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut pos = 0;
    for site in 0..32 {
        if mask >> site & 1 == 1 {
            out |= (value >> site & 1) << pos;
            pos += 1;
        }
    }
    out
}

/// Spreads the low bits of `value` onto the positions set in `mask`.
fn expand(value: usize, mask: u32) -> usize {
    let mut out = 0;
    let mut pos = 0;
    for site in 0..32 {
        if mask >> site & 1 == 1 {
            out |= (value >> pos & 1) << site;
            pos += 1;
        }
    }
    out
}

/// Reduced state on the sites in `keep`, kept in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: u32) -> Result<DensityMatrix> {
    let n = rho.n();
    if keep == 0 {
        return Err(Error::Validation("cannot trace out every site".into()));
    }
    if keep & !full_mask(n) != 0 {
        return Err(Error::DimensionMismatch { expected: n, got: 32 - keep.leading_zeros() as usize });
    }
    if keep == full_mask(n) {
        return Ok(rho.clone());
    }
    let k = keep.count_ones() as usize;
    let env = full_mask(n) & !keep;
    let dk = 1usize << k;
    let de = 1usize << (n - k);
    let kept: Vec<usize> = (0..dk).map(|r| expand(r, keep)).collect();
    let m = rho.matrix();
    let mut out = DMatrix::zeros(dk, dk);
    for e in 0..de {
        let off = expand(e, env);
        for c in 0..dk {
            let j = kept[c] | off;
            for r in 0..dk {
                out[(r, c)] += m[(kept[r] | off, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(k, out, rho.is_sz_symmetric()))
}

fn pt_element(m: &DMatrix<f64>, i: usize, j: usize, a: usize) -> f64 {
    m[((j & a) | (i & !a), (i & a) | (j & !a))]
}

/// Partial transpose on the sites of `part_a` of a dense operator on `n`
/// qubits.
fn transpose_sites(m: &DMatrix<f64>, part_a: u32) -> DMatrix<f64> {
    let a = part_a as usize;
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| pt_element(m, i, j, a))
}

/// `ρ^{t_A}` for a global split of the state's own sites.
pub fn partial_transpose(rho: &DensityMatrix, split: &Bipartition) -> Result<DMatrix<f64>> {
    if split.n() != rho.n() {
        return Err(Error::DimensionMismatch { expected: rho.n(), got: split.n() });
    }
    if !split.is_global() {
        return Err(Error::Validation(format!(
            "{split} is a reduced split; trace out the other sites first"
        )));
    }
    Ok(transpose_sites(rho.matrix(), split.part_a()))
}

/// Eigenvalues of `ρ^{t_A}` from the dense partial transpose.
pub fn pt_eigenvalues_dense(rho: &DensityMatrix, part_a: u32) -> Result<Vec<f64>> {
    spectral::symmetric_eigenvalues(&transpose_sites(rho.matrix(), part_a))
}

/// Eigenvalues of `ρ^{t_A}` for a state commuting with `S_z`.
///
/// The partial transpose then conserves `Q = M_B - M_A`, so it splits into
/// blocks labelled by `popcount(i & A) - popcount(i & B)`.
pub fn pt_eigenvalues_blocked(rho: &DensityMatrix, part_a: u32) -> Result<Vec<f64>> {
    if !rho.is_sz_symmetric() {
        return Err(Error::Validation("blocked partial transpose needs an S_z-symmetric state".into()));
    }
    let n = rho.n();
    let a = part_a as usize;
    let b = full_mask(n) as usize & !a;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    for i in 0..rho.dim() {
        let key = (i & a).count_ones() as i64 - (i & b).count_ones() as i64 + n as i64;
        groups[key as usize].push(i);
    }
    let m = rho.matrix();
    let mut values = Vec::with_capacity(rho.dim());
    for states in groups.iter().filter(|g| !g.is_empty()) {
        let block = DMatrix::from_fn(states.len(), states.len(), |r, c| pt_element(m, states[r], states[c], a));
        values.extend(spectral::symmetric_eigenvalues(&block)?);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Temperature and model parameters attached to a thermal negativity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMeta {
    pub t: f64,
    pub delta: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub value: f64,
    /// Eigenvalues of the partial transpose below `-ε_neg`.
    pub negative_eigenvalue_count: usize,
    pub bipartition: Bipartition,
    pub thermal: Option<ThermalMeta>,
}

impl NegativityReport {
    pub fn is_entangled(&self, eps_neg: f64) -> bool {
        self.value > eps_neg
    }
}

/// Negativity of `rho` across `split`. Reduced splits trace out the sites
/// outside `split.keep()` first.
pub fn negativity(rho: &DensityMatrix, split: &Bipartition, eps_neg: f64) -> Result<NegativityReport> {
    if split.n() != rho.n() {
        return Err(Error::DimensionMismatch { expected: rho.n(), got: split.n() });
    }
    let reduced;
    let (state, part_a) = if split.is_global() {
        (rho, split.part_a())
    } else {
        reduced = partial_trace(rho, split.keep())?;
        (&reduced, split.reduced_part_a())
    };
    let eigenvalues = if state.is_sz_symmetric() {
        pt_eigenvalues_blocked(state, part_a)?
    } else {
        pt_eigenvalues_dense(state, part_a)?
    };
    let value = eigenvalues.iter().filter(|&&l| l < 0.0).fold(0.0, |acc, l| acc - l);
    let negative_eigenvalue_count = eigenvalues.iter().filter(|&&l| l < -eps_neg).count();
    Ok(NegativityReport { value, negative_eigenvalue_count, bipartition: *split, thermal: None })
}

/// `½[(Σ √λ)² - 1]` for a Schmidt spectrum `λ`.
pub fn schmidt_negativity(spectrum: &[f64]) -> f64 {
    let s: f64 = spectrum.iter().map(|&l| l.max(0.0).sqrt()).sum();
    0.5 * (s * s - 1.0)
}

/// Negativity of the pure state `ψ` across a global split, from its
/// Schmidt decomposition.
pub fn pure_negativity(psi: &DVector<f64>, split: &Bipartition) -> Result<f64> {
    let n = split.n();
    if psi.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, got: psi.len() });
    }
    if !split.is_global() {
        return Err(Error::Validation("pure-state negativity needs a global split".into()));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("state is not normalized (norm {norm})")));
    }
    let (a, b) = (split.part_a(), split.part_b());
    let da = 1usize << a.count_ones();
    let db = 1usize << b.count_ones();
    let coeffs = DMatrix::from_fn(da, db, |r, c| psi[expand(r, a) | expand(c, b)]);
    // Schmidt coefficients straight from the SVD; squaring first would lose
    // the small ones to rounding.
    let s: f64 = coeffs.singular_values().iter().sum();
    Ok(0.5 * (s * s - 1.0))
}

/// `S_f(ρ) = Tr(√ρ - ρ)`.
pub fn sf_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigenvalues = spectral::symmetric_eigenvalues(rho.matrix())?;
    if let Some(&min) = eigenvalues.first() {
        if min < -1e-10 {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(eigenvalues.iter().map(|&l| l.max(0.0)).map(|l| l.sqrt() - l).sum())
}

/// True when `Tr(ρ - I/d)² ≤ 1/[d(d-1)]`, which guarantees full
/// separability.
pub fn separability_ball_test(rho: &DensityMatrix) -> bool {
    let d = rho.dim() as f64;
    let m = rho.matrix();
    let mut dist = 0.0;
    for j in 0..rho.dim() {
        for i in 0..rho.dim() {
            let x = if i == j { m[(i, j)] - 1.0 / d } else { m[(i, j)] };
            dist += x * x;
        }
    }
    dist <= 1.0 / (d * (d - 1.0))
}

/// Compares the partial transpose of `D(b) = exp(-H(b)/T)` with
/// `exp(-b S_z / 2T) D^{t_A}(0) exp(-b S_z / 2T)` and returns the largest
/// elementwise difference relative to the largest entry of `D^{t_A}(b)`.
/// `spec.b` is the field. Both sides carry the same factor `exp(c/T)`, with
/// `c` the zero-field ground energy, to keep the exponentials finite.
pub fn pt_field_factorization_check(spec: &ChainSpec, split: &Bipartition, t: f64) -> Result<f64> {
    if split.n() != spec.n || !split.is_global() {
        return Err(Error::Validation(format!("{split} is not a global split of {} sites", spec.n)));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {t}")));
    }
    let decompose = |spec: &ChainSpec| spectral::eigendecompose(&crate::spinchain::build_hamiltonian(spec)?);
    let zero_field = decompose(&spec.with_field(0.0))?;
    let c = zero_field.min_energy();
    let boltzmann = |d: &spectral::SpectralDecomposition| d.dense_function(|e| (-(e - c) / t).exp());
    let with_field = transpose_sites(&boltzmann(&decompose(spec)?), split.part_a());
    let without = transpose_sites(&boltzmann(&zero_field), split.part_a());
    let n = spec.n;
    let scale: Vec<f64> = (0..1usize << n)
        .map(|i| (-spec.b * magnetization(i, n).value() / (2.0 * t)).exp())
        .collect();
    let mut worst: f64 = 0.0;
    for j in 0..with_field.ncols() {
        for i in 0..with_field.nrows() {
            let rhs = scale[i] * without[(i, j)] * scale[j];
            worst = worst.max((with_field[(i, j)] - rhs).abs());
        }
    }
    Ok(worst / with_field.amax())
}
