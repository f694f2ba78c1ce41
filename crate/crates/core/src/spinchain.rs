//! XXZ chain model: Hamiltonian construction, magnetization sectors and
//! exact ground-state information.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = b S_z - sum_{(i,j) in edges} [ v_x (s_x^i s_x^j + s_y^i s_y^j) + v_z s_z^i s_z^j ]
//! ```
//!
//! with no constant shift. It commutes with `S_z`, so it is stored as one
//! dense real block per magnetization sector.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::spectral;
use crate::{Error, Result, MAX_SITES};

/// Coupling pattern between sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Ring with nearest-neighbour bonds, site `n` coupled back to site 1.
    CyclicNn,
    /// Every pair `i < j` coupled with the same strength.
    FullyConnected,
    /// A single bond between two sites (`n = 2` only).
    SinglePair,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::CyclicNn => "cyclic-nn",
            Topology::FullyConnected => "fully-connected",
            Topology::SinglePair => "single-pair",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic-nn" | "cyclic" => Ok(Topology::CyclicNn),
            "fully-connected" | "full" => Ok(Topology::FullyConnected),
            "single-pair" | "pair" => Ok(Topology::SinglePair),
            other => Err(Error::InvalidSpec(format!("unknown topology {other:?}"))),
        }
    }
}

/// Physical model: site count, coupling pattern, couplings and uniform field
/// (all in the same energy units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub topology: Topology,
    pub vx: f64,
    pub vz: f64,
    pub b: f64,
}

impl ChainSpec {
    pub fn new(n: usize, topology: Topology, vx: f64, vz: f64, b: f64) -> Result<Self> {
        let spec = ChainSpec { n, topology, vx, vz, b };
        spec.validate()?;
        Ok(spec)
    }

    /// Chain in reduced units: `|v_x| = 1`, `v_z = Δ`, `b = b̄`.
    pub fn reduced(n: usize, topology: Topology, v_sign: f64, delta: f64, b_bar: f64) -> Result<Self> {
        Self::new(n, topology, v_sign.signum(), delta, b_bar)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_SITES {
            return Err(Error::Capacity { n: self.n, max: MAX_SITES });
        }
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("need at least 2 sites, got {}", self.n)));
        }
        if self.topology == Topology::SinglePair && self.n != 2 {
            return Err(Error::InvalidSpec("single-pair topology requires n = 2".into()));
        }
        if !(self.vx.is_finite() && self.vz.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidSpec("couplings and field must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Anisotropy `Δ = v_z / |v_x|`.
    pub fn delta(&self) -> Result<f64> {
        if self.vx == 0.0 {
            return Err(Error::Domain("anisotropy undefined for v_x = 0".into()));
        }
        Ok(self.vz / self.vx.abs())
    }

    /// Reduced field `b̄ = |b / v_x|`.
    pub fn b_bar(&self) -> Result<f64> {
        if self.vx == 0.0 {
            return Err(Error::Domain("reduced field undefined for v_x = 0".into()));
        }
        Ok((self.b / self.vx).abs())
    }

    pub fn with_field(&self, b: f64) -> Self {
        ChainSpec { b, ..*self }
    }

    /// Coupled site pairs `(i, j)` with `i < j`, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        match self.topology {
            Topology::SinglePair => vec![(0, 1)],
            Topology::FullyConnected => (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect(),
            Topology::CyclicNn => {
                let mut edges: Vec<(usize, usize)> = (0..n)
                    .map(|i| {
                        let j = (i + 1) % n;
                        (i.min(j), i.max(j))
                    })
                    .collect();
                edges.sort_unstable();
                edges.dedup();
                edges
            }
        }
    }
}

/// A half-integer stored as twice its value (so `3/2` is `HalfInt(3)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    /// Nearest half-integer; errors when `x` is not a multiple of 1/2.
    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = (2.0 * x).round();
        if (2.0 * x - twice).abs() > 1e-9 {
            return Err(Error::InvalidSpin(format!("{x} is not a half-integer")));
        }
        Ok(HalfInt(twice as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Total `S_z` eigenvalue of a computational basis state.
pub fn magnetization(bits: usize, n: usize) -> HalfInt {
    HalfInt(n as i32 - 2 * bits.count_ones() as i32)
}

/// Spin projection `m_i = ±1/2` of one site.
#[inline]
pub fn site_projection(bits: usize, site: usize) -> f64 {
    if bits >> site & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Basis indices grouped by magnetization.
///
/// Sector `k` holds the states with `k` down spins, i.e. `M = n/2 - k`,
/// listed in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorIndex {
    n: usize,
    sectors: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl SectorIndex {
    pub fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let mut sectors = vec![Vec::new(); n + 1];
        let mut position = vec![0; dim];
        for bits in 0..dim {
            let k = bits.count_ones() as usize;
            position[bits] = sectors[k].len();
            sectors[k].push(bits);
        }
        SectorIndex { n, sectors, position }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    /// Basis states of sector `k` (`k` down spins).
    pub fn sector(&self, k: usize) -> &[usize] {
        &self.sectors[k]
    }

    /// Magnetization of sector `k`.
    pub fn magnetization(&self, k: usize) -> HalfInt {
        HalfInt(self.n as i32 - 2 * k as i32)
    }

    /// Sector number for a magnetization, if it exists on this chain.
    pub fn sector_of(&self, m: HalfInt) -> Option<usize> {
        let twice_k = self.n as i32 - m.0;
        if twice_k < 0 || twice_k % 2 != 0 || twice_k / 2 > self.n as i32 {
            return None;
        }
        Some((twice_k / 2) as usize)
    }

    /// Position of a basis state inside its own sector.
    pub fn position(&self, bits: usize) -> usize {
        self.position[bits]
    }

    pub fn iter(&self) -> impl Iterator<Item = (HalfInt, &[usize])> {
        self.sectors
            .iter()
            .enumerate()
            .map(move |(k, s)| (self.magnetization(k), s.as_slice()))
    }
}

/// Real symmetric operator commuting with `S_z`, stored block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    index: SectorIndex,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockOperator {
    pub fn new(index: SectorIndex, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.len() != index.len() {
            return Err(Error::DimensionMismatch { expected: index.len(), got: blocks.len() });
        }
        for (k, block) in blocks.iter().enumerate() {
            let size = index.sector(k).len();
            if block.nrows() != size || block.ncols() != size {
                return Err(Error::DimensionMismatch { expected: size, got: block.nrows() });
            }
        }
        Ok(BlockOperator { index, blocks })
    }

    /// Splits a dense operator into magnetization blocks. Elements coupling
    /// different sectors larger than `tol` are rejected.
    pub fn from_dense(n: usize, matrix: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if n > MAX_SITES {
            return Err(Error::Capacity { n, max: MAX_SITES });
        }
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        for i in 0..dim {
            for j in 0..dim {
                if i.count_ones() != j.count_ones() && matrix[(i, j)].abs() > tol {
                    return Err(Error::Validation(format!(
                        "element ({i}, {j}) couples different magnetization sectors"
                    )));
                }
            }
        }
        let index = SectorIndex::new(n);
        let blocks = (0..index.len())
            .map(|k| {
                let states = index.sector(k);
                DMatrix::from_fn(states.len(), states.len(), |r, c| matrix[(states[r], states[c])])
            })
            .collect();
        Ok(BlockOperator { index, blocks })
    }

    pub fn index(&self) -> &SectorIndex {
        &self.index
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for (k, block) in self.blocks.iter().enumerate() {
            let states = self.index.sector(k);
            for (r, &i) in states.iter().enumerate() {
                for (c, &j) in states.iter().enumerate() {
                    out[(i, j)] = block[(r, c)];
                }
            }
        }
        out
    }

    /// Largest absolute matrix element.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(|b| b.amax()).fold(0.0, f64::max)
    }
}

/// Builds the XXZ Hamiltonian of `spec` in magnetization-block form.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<BlockOperator> {
    spec.validate()?;
    let n = spec.n;
    let index = SectorIndex::new(n);
    let edges = spec.edges();
    let hop = -spec.vx / 2.0;

    let blocks = (0..index.len())
        .map(|k| {
            let states = index.sector(k);
            let mut block = DMatrix::zeros(states.len(), states.len());
            for (r, &bits) in states.iter().enumerate() {
                let mut diag = spec.b * magnetization(bits, n).value();
                for &(i, j) in &edges {
                    diag -= spec.vz * site_projection(bits, i) * site_projection(bits, j);
                    if (bits >> i & 1) != (bits >> j & 1) {
                        let flipped = bits ^ (1 << i) ^ (1 << j);
                        block[(r, index.position(flipped))] += hop;
                    }
                }
                block[(r, r)] = diag;
            }
            block
        })
        .collect();

    Ok(BlockOperator { index, blocks })
}

/// Dense matrix of total `S_z` (diagonal).
pub fn sz_diagonal(n: usize) -> DVector<f64> {
    DVector::from_fn(1 << n, |bits, _| magnetization(bits, n).value())
}

/// Energy `E^S_M` of a level with good total spin, valid whenever the
/// Hamiltonian is a function of the total spin: the two-site bond, the
/// three-site ring and the fully connected chain of any length.
pub fn total_spin_energy(spec: &ChainSpec, s: HalfInt, m: HalfInt) -> Result<f64> {
    spec.validate()?;
    let valid_topology = match spec.topology {
        Topology::SinglePair | Topology::FullyConnected => true,
        Topology::CyclicNn => spec.n <= 3,
    };
    if !valid_topology {
        return Err(Error::Unsupported(format!(
            "total-spin energies need a fully connected chain, got {} with n = {}",
            spec.topology, spec.n
        )));
    }
    let n = spec.n as i32;
    if s.0 < 0 || s.0 > n || (n - s.0) % 2 != 0 {
        return Err(Error::InvalidSpin(format!("S = {s} not allowed for n = {n}")));
    }
    if m.0.abs() > s.0 || (s.0 - m.0) % 2 != 0 {
        return Err(Error::InvalidSpin(format!("M = {m} not allowed for S = {s}")));
    }
    let v = spec.vx;
    let (sv, mv) = (s.value(), m.value());
    let e0 = f64::from(n) * (2.0 * v + spec.vz) / 8.0;
    Ok(spec.b * mv - 0.5 * (v * sv * (sv + 1.0) + mv * mv * (spec.vz - v)) + e0)
}

/// Number of multiplets with total spin `S` among `n` spins 1/2.
pub fn spin_multiplicity(n: usize, s: HalfInt) -> usize {
    let n = n as i64;
    let two_s = i64::from(s.0);
    if two_s < 0 || two_s > n || (n - two_s) % 2 != 0 {
        return 0;
    }
    let k = (n - two_s) / 2;
    binomial(n, k) - if k >= 1 { binomial(n, k - 1) } else { 0 }
}

pub(crate) fn binomial(n: i64, k: i64) -> usize {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc as usize
}

/// Ground-state magnetization change `|M| -> |M| + 1` (or a longer jump).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub from: HalfInt,
    pub to: HalfInt,
}

impl Transition {
    pub fn new(from: HalfInt, to: HalfInt) -> Self {
        Transition { from: from.abs(), to: to.abs() }
    }

    /// The last transition, into the aligned state `|M| = n/2`.
    pub fn to_aligned(n: usize) -> Self {
        Transition { from: HalfInt(n as i32 - 2), to: HalfInt(n as i32) }
    }
}

/// Closed-form ground-state level-crossing anisotropy for the tabulated
/// ring cases, as a function of `b̄ = |b/v|`.
///
/// Untabulated cases return [`Error::Unsupported`]; use [`crossing_delta`]
/// for those.
pub fn transition_line(
    n: usize,
    topology: Topology,
    v_sign: f64,
    transition: Transition,
    b_bar: f64,
) -> Result<f64> {
    if b_bar < 0.0 || !b_bar.is_finite() {
        return Err(Error::Domain(format!("b̄ must be finite and non-negative, got {b_bar}")));
    }
    let positive = v_sign > 0.0;
    let ring = match topology {
        Topology::CyclicNn => true,
        Topology::SinglePair => n == 2,
        Topology::FullyConnected => false,
    };
    let unsupported = || {
        Error::Unsupported(format!(
            "no closed-form line for n = {n}, {topology}, v {}, {} -> {}",
            if positive { "> 0" } else { "< 0" },
            transition.from,
            transition.to
        ))
    };
    if !ring {
        return Err(unsupported());
    }
    let sqrt5 = 5f64.sqrt();
    let last = transition == Transition::to_aligned(n);
    let (from, to) = (transition.from.0, transition.to.0);

    match (n, last) {
        // One bond: the Bell state meets the aligned state at 1 - 2b̄.
        (2, true) => Ok(1.0 - 2.0 * b_bar),
        (3, true) if !positive => Ok(0.5 - b_bar),
        (5, true) if !positive => Ok(0.25 * (1.0 + sqrt5) - b_bar),
        (_, true) if positive || n.is_multiple_of(2) => Ok(1.0 - b_bar),
        (4, false) if from == 0 && to == 2 => {
            Ok((1.0 - 2.0 * b_bar - b_bar * b_bar) / (1.0 + b_bar))
        }
        (5, false) if from == 1 && to == 3 => {
            if positive {
                Ok((1.0 - b_bar - b_bar * b_bar) / (1.0 + b_bar))
            } else {
                Ok(-(b_bar - 0.5) * (4.0 * b_bar + 3.0 + sqrt5) / (4.0 * b_bar + 1.0 + sqrt5))
            }
        }
        _ => Err(unsupported()),
    }
}

/// Lowest energy in the sector with magnetization `m`.
fn sector_ground_energy(spec: &ChainSpec, m: HalfInt) -> Result<f64> {
    let h = build_hamiltonian(spec)?;
    let k = h
        .index()
        .sector_of(m)
        .ok_or_else(|| Error::InvalidSpin(format!("M = {m} does not exist for n = {}", spec.n)))?;
    let values = spectral::symmetric_eigenvalues(h.block(k))?;
    Ok(values[0])
}

/// Numerical level crossing between the lowest states with `M = -from` and
/// `M = -to` (field `b = b̄|v| > 0`), bracketed in anisotropy by `[lo, hi]`.
pub fn crossing_delta(
    n: usize,
    topology: Topology,
    v_sign: f64,
    transition: Transition,
    b_bar: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let gap = |delta: f64| -> Result<f64> {
        let spec = ChainSpec::reduced(n, topology, v_sign, delta, b_bar)?;
        Ok(sector_ground_energy(&spec, HalfInt(-transition.to.0))?
            - sector_ground_energy(&spec, HalfInt(-transition.from.0))?)
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (gap(a)?, gap(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    while b - a > 1e-12 * (1.0 + a.abs().max(b.abs())) {
        let mid = 0.5 * (a + b);
        let fm = gap(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Degenerate ground manifold of a chain.
#[derive(Debug, Clone)]
pub struct GroundManifold {
    pub energy: f64,
    /// Orthonormal eigenvectors in the full `2^n` computational basis.
    pub states: Vec<DVector<f64>>,
    pub magnetizations: Vec<HalfInt>,
}

impl GroundManifold {
    pub fn degeneracy(&self) -> usize {
        self.states.len()
    }
}

/// All eigenvectors whose energy lies within `tol · max(1, |E_min|)` of the
/// minimum.
pub fn ground_manifold(spec: &ChainSpec, tol: f64) -> Result<GroundManifold> {
    let h = build_hamiltonian(spec)?;
    let decomp = spectral::eigendecompose(&h)?;
    let energy = decomp.min_energy();
    let window = tol * energy.abs().max(1.0);
    let dim = spec.dim();
    let mut states = Vec::new();
    let mut magnetizations = Vec::new();
    for block in decomp.blocks() {
        for (col, &e) in block.values.iter().enumerate() {
            if e - energy <= window {
                let mut v = DVector::zeros(dim);
                for (r, &bits) in block.indices.iter().enumerate() {
                    v[bits] = block.vectors[(r, col)];
                }
                states.push(v);
                magnetizations.push(block.magnetization.unwrap_or(HalfInt(0)));
            }
        }
    }
    Ok(GroundManifold { energy, states, magnetizations })
}
