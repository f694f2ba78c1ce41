//! Closed-form results for two and three qubits and for the four-site ring
//! ground-state family.
//!
//! Two- and three-qubit mixtures with good total spin are described by their
//! level populations; negativities, entanglement conditions and the thermal
//! borders `Δ_max(t)` follow in closed form. These functions never touch a
//! matrix and serve as the reference for the numerical path.

use nalgebra::DVector;

use crate::spectral::DensityMatrix;
use crate::spinchain::{total_spin_energy, ChainSpec, HalfInt, Topology};
use crate::{Error, Result};

/// Populations of the two-qubit levels `|S M>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitWeights {
    /// `p^1_1`
    pub up: f64,
    /// `p^1_0`
    pub zero: f64,
    /// `p^1_{-1}`
    pub down: f64,
    /// `p^0_0`
    pub singlet: f64,
}

impl TwoQubitWeights {
    pub fn total(&self) -> f64 {
        self.up + self.zero + self.down + self.singlet
    }

    /// `Σ_{S,M} p^S_M |SM><SM|` in the computational basis.
    pub fn to_density(&self) -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let states = vec![
            (self.up, unit(4, &[(0, 1.0)])),
            (self.zero, unit(4, &[(1, s), (2, s)])),
            (self.down, unit(4, &[(3, 1.0)])),
            (self.singlet, unit(4, &[(1, s), (2, -s)])),
        ];
        mixture(2, &states)
    }
}

/// Populations of the three-qubit levels. Quartet weights multiply the
/// projector on `|3/2 M>`; doublet weights multiply the rank-two projector
/// `P^{1/2}_M`, so normalization reads `Σ quartet + 2 Σ doublet = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeQubitWeights {
    /// `p^{3/2}_M` for `M = 3/2, 1/2, -1/2, -3/2`.
    pub quartet: [f64; 4],
    /// `p^{1/2}_M` for `M = 1/2, -1/2`.
    pub doublet: [f64; 2],
}

impl ThreeQubitWeights {
    /// `p^{3/2}_M` with `M = twice_m / 2`.
    pub fn q(&self, twice_m: i32) -> f64 {
        match twice_m {
            3 => self.quartet[0],
            1 => self.quartet[1],
            -1 => self.quartet[2],
            -3 => self.quartet[3],
            _ => panic!("no quartet level with 2M = {twice_m}"),
        }
    }

    /// `p^{1/2}_M` with `M = twice_m / 2`.
    pub fn d(&self, twice_m: i32) -> f64 {
        match twice_m {
            1 => self.doublet[0],
            -1 => self.doublet[1],
            _ => panic!("no doublet level with 2M = {twice_m}"),
        }
    }

    pub fn total(&self) -> f64 {
        self.quartet.iter().sum::<f64>() + 2.0 * self.doublet.iter().sum::<f64>()
    }

    /// `Σ p^S_M P^S_M` in the computational basis, using the explicit
    /// doublet basis `(|↓↑↑> - |↑↓↑>)/√2`, `(|↓↑↑> + |↑↓↑> - 2|↑↑↓>)/√6`
    /// and its spin-flipped partners.
    pub fn to_density(&self) -> DensityMatrix {
        let r3 = 1.0 / 3f64.sqrt();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let r6 = 1.0 / 6f64.sqrt();
        let states = vec![
            (self.quartet[0], unit(8, &[(0, 1.0)])),
            (self.quartet[1], unit(8, &[(1, r3), (2, r3), (4, r3)])),
            (self.quartet[2], unit(8, &[(6, r3), (5, r3), (3, r3)])),
            (self.quartet[3], unit(8, &[(7, 1.0)])),
            (self.doublet[0], unit(8, &[(1, r2), (2, -r2)])),
            (self.doublet[0], unit(8, &[(1, r6), (2, r6), (4, -2.0 * r6)])),
            (self.doublet[1], unit(8, &[(6, r2), (5, -r2)])),
            (self.doublet[1], unit(8, &[(6, r6), (5, r6), (3, -2.0 * r6)])),
        ];
        mixture(3, &states)
    }
}

fn unit(dim: usize, entries: &[(usize, f64)]) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    for &(i, x) in entries {
        v[i] = x;
    }
    v
}

fn mixture(n: usize, states: &[(f64, DVector<f64>)]) -> DensityMatrix {
    let dim = 1usize << n;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for (p, v) in states {
        m += v * v.transpose() * *p;
    }
    DensityMatrix::new(n, m).expect("dimension fixed by construction")
}

/// Level populations of a two- or three-qubit mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinSectorWeights {
    Two(TwoQubitWeights),
    Three(ThreeQubitWeights),
}

impl SpinSectorWeights {
    pub fn total(&self) -> f64 {
        match self {
            SpinSectorWeights::Two(p) => p.total(),
            SpinSectorWeights::Three(p) => p.total(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            SpinSectorWeights::Two(p) => p.to_density(),
            SpinSectorWeights::Three(p) => p.to_density(),
        }
    }
}

/// Two-qubit negativity of a total-spin mixture.
pub fn two_qubit_negativity(p: &TwoQubitWeights) -> f64 {
    let root = ((p.zero - p.singlet).powi(2) + (p.up - p.down).powi(2)).sqrt();
    0.5 * (root - p.up - p.down).max(0.0)
}

/// `|p^1_0 - p^0_0| > 2 √(p^1_1 p^1_{-1})`.
pub fn two_qubit_entangled(p: &TwoQubitWeights) -> bool {
    (p.zero - p.singlet).abs() > 2.0 * (p.up * p.down).sqrt()
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("reduced temperature must be positive, got {t}")));
    }
    Ok(())
}

/// Largest anisotropy with two-qubit thermal entanglement at reduced
/// temperature `t = T/|v|`; independent of the field and of the sign of `v`.
pub fn border_n2(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(1.0 - 2.0 * t * (2.0 / -(-1.0 / t).exp_m1()).ln())
}

/// Global negativity `N_{a-bc}` of a three-qubit total-spin mixture.
pub fn three_qubit_global_negativity(p: &ThreeQubitWeights) -> f64 {
    let term = |nu: i32| {
        let base = 3.0 * p.q(-3 * nu) + 2.0 * p.q(nu) + p.d(nu);
        let diff = 3.0 * p.q(-3 * nu) - 2.0 * p.q(nu) - p.d(nu);
        let cross = p.q(-nu) - p.d(-nu);
        ((diff * diff + 8.0 * cross * cross).sqrt() - base).max(0.0)
    };
    (term(1) + term(-1)) / 6.0
}

/// Non-zero global negativity condition for three qubits.
pub fn three_qubit_global_condition(p: &ThreeQubitWeights) -> bool {
    [1, -1].iter().any(|&nu| {
        (p.q(nu) - p.d(nu)).abs() > (3.0 * p.q(3 * nu) * (p.q(-nu) + p.d(-nu) / 2.0)).sqrt()
    })
}

/// Level populations of the reduced pair `Tr_c ρ` (the same for every pair).
pub fn reduce_weights_3to2(p: &ThreeQubitWeights) -> TwoQubitWeights {
    let singlet = p.d(1) + p.d(-1);
    TwoQubitWeights {
        up: (3.0 * p.q(3) + p.q(1) + 2.0 * p.d(1)) / 3.0,
        zero: (2.0 * (p.q(1) + p.q(-1)) + singlet) / 3.0,
        down: (3.0 * p.q(-3) + p.q(-1) + 2.0 * p.d(-1)) / 3.0,
        singlet,
    }
}

/// Pairwise entanglement condition written directly in the three-qubit
/// populations.
pub fn pair_condition_n3(p: &ThreeQubitWeights) -> bool {
    let lhs = (p.q(1) - p.d(1) + p.q(-1) - p.d(-1)).abs();
    let rhs = [1, -1]
        .iter()
        .map(|&nu| (3.0 * p.q(3 * nu) + p.q(nu) + 2.0 * p.d(nu)).sqrt())
        .product::<f64>();
    lhs > rhs
}

/// Border `Δ_max(t)` of global three-qubit entanglement, for either sign of
/// the hopping coupling.
pub fn border_n3_global(t: f64, v_sign: f64) -> Result<f64> {
    check_t(t)?;
    let alpha = (-1.5 / t).exp();
    let one_minus = -(-1.5 / t).exp_m1();
    if v_sign > 0.0 {
        Ok(1.0 - t * (3.0 * (2.0 + alpha) / (2.0 * one_minus * one_minus)).ln())
    } else {
        Ok(0.5 - t * (3.0 * (1.0 + 2.0 * alpha) / (2.0 * one_minus * one_minus)).ln())
    }
}

/// `γ` of the pair border: `1 + 2α` for `v > 0`, `2 + α` for `v < 0`.
pub fn pair_gamma(alpha: f64, v_sign: f64) -> f64 {
    if v_sign > 0.0 {
        1.0 + 2.0 * alpha
    } else {
        2.0 + alpha
    }
}

/// `√(γ²(η²-1) + 2(1+η)(1-α)²) - γη` with `α = e^{-3/2t}`, `η = cosh(b̄/t)`.
/// Computed in a form that stays finite when `η` is huge.
pub fn pair_border_denominator_with(t: f64, b_bar: f64, gamma: f64) -> f64 {
    let one_minus = -(-1.5 / t).exp_m1();
    let x = b_bar / t;
    if x < 20.0 {
        let eta = x.cosh();
        (gamma * gamma * (eta * eta - 1.0) + 2.0 * (1.0 + eta) * one_minus * one_minus).sqrt() - gamma * eta
    } else {
        // Factor η out of the root and rationalize; 1/η = 2e^{-x}/(1+e^{-2x}).
        let e = (-x).exp();
        let inv = 2.0 * e / (1.0 + e * e);
        let c2 = one_minus * one_minus;
        let inner = gamma * gamma * (1.0 - inv * inv) + 2.0 * (inv * inv + inv) * c2;
        (2.0 * (inv + 1.0) * c2 - gamma * gamma * inv) / (inner.sqrt() + gamma)
    }
}

pub fn pair_border_denominator(t: f64, b_bar: f64, v_sign: f64) -> f64 {
    let alpha = (-1.5 / t).exp();
    pair_border_denominator_with(t, b_bar, pair_gamma(alpha, v_sign))
}

/// Anisotropy offset of the pair border: 1 for `v > 0`, 1/2 for `v < 0`.
pub fn pair_offset(v_sign: f64) -> f64 {
    if v_sign > 0.0 {
        1.0
    } else {
        0.5
    }
}

/// Border `Δ_max(t)` of pairwise entanglement in the three-site ring at
/// field `b̄`. `None` when no anisotropy gives pairwise entanglement at this
/// temperature.
pub fn border_n3_pair(t: f64, b_bar: f64, v_sign: f64) -> Result<Option<f64>> {
    check_t(t)?;
    let denom = pair_border_denominator(t, b_bar.abs(), v_sign);
    if denom > 0.0 {
        Ok(Some(pair_offset(v_sign) - t * (3.0 / denom).ln()))
    } else {
        Ok(None)
    }
}

/// Temperature `t_c(b̄)` at which the pair border denominator vanishes: the
/// limit of the pairwise limit temperature for `Δ -> -∞`.
pub fn pair_saturation_temperature(b_bar: f64, v_sign: f64) -> Result<f64> {
    let b_bar = b_bar.abs();
    let f = |t: f64| pair_border_denominator(t, b_bar, v_sign);
    let (lo_bound, hi_bound) = (1e-3f64.max(b_bar / 600.0), 1e3);
    let steps = 2000;
    let ratio = (hi_bound / lo_bound).powf(1.0 / steps as f64);
    let mut lo = lo_bound;
    let mut f_lo = f(lo);
    for _ in 0..steps {
        let hi = lo * ratio;
        let f_hi = f(hi);
        if f_lo > 0.0 && f_hi <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-14 * b {
                let mid = 0.5 * (a + b);
                if f(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::NoBracket { lo: lo_bound, hi: hi_bound })
}

/// Amplitudes of the four-site ring `M = 0` state
/// `α(|↑↑↓↓> + translations) + β(|↑↓↑↓> + translation)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateFamily14 {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GroundStateFamily14 {
    pub fn new(delta: f64) -> Self {
        let ratio = ((8.0 + delta * delta).sqrt() - delta) / 2.0;
        let alpha = 1.0 / (4.0 + 2.0 * ratio * ratio).sqrt();
        GroundStateFamily14 { delta, alpha, beta: ratio * alpha }
    }

    /// Eigenvalue for `v = 1`: `-β/α`.
    pub fn energy(&self) -> f64 {
        -self.beta / self.alpha
    }

    pub fn vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(16);
        // bit set = spin down; ↑↑↓↓ is sites c, d down.
        for bits in [0b1100, 0b1001, 0b0011, 0b0110] {
            v[bits] = self.alpha;
        }
        for bits in [0b1010, 0b0101] {
            v[bits] = self.beta;
        }
        v
    }
}

/// Negativities of the four-site family for its five distinct splits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativities14 {
    pub a_bcd: f64,
    pub ab_cd: f64,
    pub ac_bd: f64,
    pub a_b: f64,
    pub a_c: f64,
}

impl Negativities14 {
    /// `(label, value)` pairs.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("a-bcd", self.a_bcd),
            ("ab-cd", self.ab_cd),
            ("ac-bd", self.ac_bd),
            ("a-b", self.a_b),
            ("a-c", self.a_c),
        ]
    }
}

pub fn state14(delta: f64) -> (GroundStateFamily14, Negativities14) {
    let s = GroundStateFamily14::new(delta);
    let (a, b) = (s.alpha, s.beta);
    let ac_bd = b * (4.0 * a + b);
    let negs = Negativities14 {
        a_bcd: 0.5,
        ab_cd: if delta < 1.0 { ac_bd } else { 6.0 * a * a - b * b },
        ac_bd,
        a_b: if delta < 3.5 { a * (2.0 * b - a) } else { 0.0 },
        a_c: if delta > 0.0 { 2.0 * a * a - b * b } else { 0.0 },
    };
    (s, negs)
}

/// Thermal level populations `e^{-E^S_M/T}/Z` for two- and three-qubit
/// chains.
pub fn thermal_weights(spec: &ChainSpec, t: f64) -> Result<SpinSectorWeights> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {t}")));
    }
    match (spec.n, spec.topology) {
        (2, _) => {
            let e = |s, m| total_spin_energy(spec, HalfInt(s), HalfInt(m));
            let levels = [e(2, 2)?, e(2, 0)?, e(2, -2)?, e(0, 0)?];
            let emin = levels.iter().copied().fold(f64::INFINITY, f64::min);
            let w: Vec<f64> = levels.iter().map(|&x| (-(x - emin) / t).exp()).collect();
            let z: f64 = w.iter().sum();
            Ok(SpinSectorWeights::Two(TwoQubitWeights {
                up: w[0] / z,
                zero: w[1] / z,
                down: w[2] / z,
                singlet: w[3] / z,
            }))
        }
        (3, Topology::CyclicNn | Topology::FullyConnected) => {
            let e = |s, m| total_spin_energy(spec, HalfInt(s), HalfInt(m));
            let quartet = [e(3, 3)?, e(3, 1)?, e(3, -1)?, e(3, -3)?];
            let doublet = [e(1, 1)?, e(1, -1)?];
            let emin = quartet.iter().chain(&doublet).copied().fold(f64::INFINITY, f64::min);
            let wq = quartet.map(|x| (-(x - emin) / t).exp());
            let wd = doublet.map(|x| (-(x - emin) / t).exp());
            let z = wq.iter().sum::<f64>() + 2.0 * wd.iter().sum::<f64>();
            Ok(SpinSectorWeights::Three(ThreeQubitWeights {
                quartet: wq.map(|w| w / z),
                doublet: wd.map(|w| w / z),
            }))
        }
        _ => Err(Error::Unsupported(format!(
            "closed-form weights exist for n = 2, 3 only (got n = {}, {})",
            spec.n, spec.topology
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{negativity, partial_trace, Bipartition, EPS_NEG};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn three(quartet: [f64; 4], doublet: [f64; 2]) -> ThreeQubitWeights {
        ThreeQubitWeights { quartet, doublet }
    }

    #[test]
    fn two_qubit_point_values() {
        let singlet = TwoQubitWeights { up: 0.0, zero: 0.0, down: 0.0, singlet: 1.0 };
        assert_eq!(two_qubit_negativity(&singlet), 0.5);
        assert!(two_qubit_entangled(&singlet));
        let aligned = TwoQubitWeights { up: 0.5, zero: 0.0, down: 0.5, singlet: 0.0 };
        assert_eq!(two_qubit_negativity(&aligned), 0.0);
        assert!(!two_qubit_entangled(&aligned));
        // Boundary: |p10 - p00| = 2√(p11 p1-1) is separable.
        let edge = TwoQubitWeights { up: 0.25, zero: 0.5, down: 0.25, singlet: 0.0 };
        assert!(!two_qubit_entangled(&edge));
        assert_eq!(two_qubit_negativity(&edge), 0.0);
    }

    #[test]
    fn two_qubit_matrix_form_is_normalized() {
        let p = TwoQubitWeights { up: 0.1, zero: 0.2, down: 0.3, singlet: 0.4 };
        let rho = p.to_density();
        rho.check().unwrap();
        let n = negativity(&rho, &Bipartition::parse("a-b", 2).unwrap(), EPS_NEG).unwrap();
        assert!((n.value - two_qubit_negativity(&p)).abs() < 1e-14);
    }

    #[test]
    fn three_qubit_point_values() {
        let w = three([0.0, 0.0, 1.0, 0.0], [0.0, 0.0]);
        assert!((three_qubit_global_negativity(&w) - SQRT2 / 3.0).abs() < 1e-15);
        assert!(three_qubit_global_condition(&w));

        let mix = three([0.0, 0.5, 0.5, 0.0], [0.0, 0.0]);
        assert!((three_qubit_global_negativity(&mix) - (3f64.sqrt() - 1.0) / 3.0).abs() < 1e-15);

        let doublet = three([0.0; 4], [0.0, 0.5]);
        assert!((three_qubit_global_negativity(&doublet) - SQRT2 / 6.0).abs() < 1e-15);
        let pair = reduce_weights_3to2(&doublet);
        assert!((two_qubit_negativity(&pair) - (SQRT2 - 1.0) / 6.0).abs() < 1e-15);

        let both = three([0.0; 4], [0.25, 0.25]);
        assert!((three_qubit_global_negativity(&both) - 1.0 / 6.0).abs() < 1e-15);
        assert!(two_qubit_negativity(&reduce_weights_3to2(&both)) < 1e-15);

        let aligned = three([1.0, 0.0, 0.0, 0.0], [0.0, 0.0]);
        assert!(!three_qubit_global_condition(&aligned));
        assert!(!pair_condition_n3(&aligned));
        assert_eq!(three_qubit_global_negativity(&aligned), 0.0);
    }

    #[test]
    fn w_state_pair_negativity_is_positive() {
        let w = three([0.0, 0.0, 1.0, 0.0], [0.0, 0.0]);
        assert!(pair_condition_n3(&w));
        let pair = reduce_weights_3to2(&w);
        assert!((two_qubit_negativity(&pair) - (5f64.sqrt() - 1.0) / 6.0).abs() < 1e-15);
        let rho = w.to_density();
        let dense = negativity(&rho, &Bipartition::parse("a-b", 3).unwrap(), EPS_NEG).unwrap();
        assert!((dense.value - (5f64.sqrt() - 1.0) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn reduction_of_split_quartet() {
        let p = three([0.0, 0.5, 0.5, 0.0], [0.0, 0.0]);
        let r = reduce_weights_3to2(&p);
        assert!((r.up - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.down - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.zero - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.singlet, 0.0);
        assert!((two_qubit_negativity(&r) - 1.0 / 6.0).abs() < 1e-15);
        let aligned = reduce_weights_3to2(&three([1.0, 0.0, 0.0, 0.0], [0.0, 0.0]));
        assert_eq!(aligned.up, 1.0);
    }

    #[test]
    fn doublet_projectors_complete_the_sectors() {
        // P^{1/2}_M + |3/2 M><3/2 M| is the full M-sector projector.
        for (q, d) in [([0.0, 1.0, 0.0, 0.0], [1.0, 0.0]), ([0.0, 0.0, 1.0, 0.0], [0.0, 1.0])] {
            let rho = three(q, d).to_density();
            let m = rho.matrix();
            for i in 0..8usize {
                for j in 0..8usize {
                    let sector = if q[1] == 1.0 { 1 } else { 2 };
                    let expected = if i == j && i.count_ones() == sector { 1.0 } else { 0.0 };
                    assert!((m[(i, j)] - expected).abs() < 1e-15, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn reduction_commutes_with_matrix_path() {
        let p = three([0.1, 0.15, 0.2, 0.05], [0.12, 0.13]);
        assert!((p.total() - 1.0).abs() < 1e-15);
        let traced = partial_trace(&p.to_density(), 0b011).unwrap();
        let direct = reduce_weights_3to2(&p).to_density();
        assert!((traced.matrix() - direct.matrix()).amax() < 1e-12);
    }

    #[test]
    fn border_limits() {
        assert!((border_n2(1e-3).unwrap() - 1.0).abs() < 1e-2);
        let t = 2.0;
        let exact = 1.0 - 4.0 * (2.0 / (1.0 - (-0.5f64).exp())).ln();
        assert!((border_n2(t).unwrap() - exact).abs() < 1e-14);
        // large-t form 1 - 2t ln(2t) up to O(1)
        for t in [20.0, 50.0] {
            assert!((border_n2(t).unwrap() - (1.0 - 2.0 * t * (2.0 * t).ln())).abs() < 1.5);
        }
        assert!(border_n2(0.0).is_err());

        let small = 1e-3;
        let slope = (1.0 - border_n3_global(small, 1.0).unwrap()) / small;
        assert!((slope - 3f64.ln()).abs() < 1e-6);
        assert!((border_n3_global(small, -1.0).unwrap() - 0.5).abs() < 1e-3);
        for t in [10.0, 30.0] {
            let plus = border_n3_global(t, 1.0).unwrap();
            let minus = border_n3_global(t, -1.0).unwrap();
            assert!((plus - minus).abs() / plus.abs() < 0.05);
            assert!((plus - (1.0 - 2.0 * t * (SQRT2 * t).ln())).abs() / plus.abs() < 0.1);
        }
    }

    #[test]
    fn borders_are_monotone_in_t() {
        let grid: Vec<f64> = (1..400).map(|i| 0.01 * f64::from(i)).collect();
        for w in grid.windows(2) {
            assert!(border_n2(w[1]).unwrap() < border_n2(w[0]).unwrap());
            for s in [1.0, -1.0] {
                assert!(border_n3_global(w[1], s).unwrap() < border_n3_global(w[0], s).unwrap());
            }
        }
    }

    #[test]
    fn pair_border_properties() {
        let tc = pair_saturation_temperature(0.0, 1.0).unwrap();
        assert!((tc - 3.0 / (4.0 * 2f64.ln())).abs() < 1e-9);
        assert!(border_n3_pair(tc * 1.01, 0.0, 1.0).unwrap().is_none());
        assert!(border_n3_pair(tc * 0.99, 0.0, 1.0).unwrap().is_some());
        assert!(pair_saturation_temperature(1.0, 1.0).unwrap() > tc);
        let t = 0.1;
        let d = border_n3_pair(t, 0.0, 1.0).unwrap().unwrap();
        assert!((d - (1.0 - t * 3f64.ln())).abs() < 1e-3);
        for t in [0.05, 0.3, 1.0, 3.0] {
            assert!(border_n3_pair(t, 0.0, -1.0).unwrap().is_none());
        }
        assert!(pair_saturation_temperature(0.0, -1.0).is_err());
    }

    #[test]
    fn pair_denominator_large_field_branch_is_continuous() {
        for gamma_sign in [1.0, -1.0] {
            for t in [0.05, 0.3, 2.0] {
                let b = 20.0 * t;
                let below = pair_border_denominator(t, b * (1.0 - 1e-9), gamma_sign);
                let above = pair_border_denominator(t, b * (1.0 + 1e-9), gamma_sign);
                assert!((below - above).abs() < 1e-6 * below.abs().max(1.0), "{below} {above}");
            }
        }
    }

    #[test]
    fn state14_closed_forms() {
        let (s, n) = state14(1.0);
        assert!((s.alpha - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((s.beta - s.alpha).abs() < 1e-15);
        assert!((n.ab_cd - 5.0 / 6.0).abs() < 1e-14);
        assert!((n.ac_bd - 5.0 / 6.0).abs() < 1e-14);
        let (s, n) = state14(1e6);
        assert!(s.beta < 1e-5);
        assert!((n.ab_cd - 1.5).abs() < 1e-5);
        assert!(n.ac_bd < 1e-5);
        for delta in [-3.0, 0.0, 0.5, 1.5, 3.0, 5.0] {
            let (s, _) = state14(delta);
            assert!((4.0 * s.alpha.powi(2) + 2.0 * s.beta.powi(2) - 1.0).abs() < 1e-14);
            assert_eq!(s.beta > s.alpha, delta < 1.0);
        }
        // Breakpoints: both branches meet.
        let (s, _) = state14(3.5);
        assert!((s.alpha * (2.0 * s.beta - s.alpha)).abs() < 1e-14);
        let (s, _) = state14(0.0);
        assert!((2.0 * s.alpha.powi(2) - s.beta.powi(2)).abs() < 1e-14);
    }

    #[test]
    fn thermal_weights_normalization() {
        let spec = ChainSpec::new(3, Topology::CyclicNn, 1.0, 0.3, 0.4).unwrap();
        let SpinSectorWeights::Three(p) = thermal_weights(&spec, 0.7).unwrap() else { panic!() };
        assert!((p.total() - 1.0).abs() < 1e-14);
        let SpinSectorWeights::Three(p) = thermal_weights(&spec, 1e12).unwrap() else { panic!() };
        for w in p.quartet.iter().chain(&p.doublet) {
            assert!((w - 0.125).abs() < 1e-10);
        }
        let spec4 = ChainSpec::new(4, Topology::CyclicNn, 1.0, 0.3, 0.4).unwrap();
        assert!(thermal_weights(&spec4, 1.0).is_err());
    }
}
