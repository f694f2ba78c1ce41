//! Self-check suite: closed forms against the numerical engine, plus the
//! structural invariants of the library, at configurable sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xxz_core::analytic::{
    border_n2, border_n3_global, pair_border_denominator_with, pair_condition_n3, pair_gamma, pair_offset, state14,
    thermal_weights, three_qubit_global_condition, three_qubit_global_negativity, two_qubit_entangled,
    two_qubit_negativity, SpinSectorWeights, ThreeQubitWeights, TwoQubitWeights,
};
use xxz_core::entanglement::{
    negativity, pt_eigenvalues_blocked, pt_eigenvalues_dense, pt_field_factorization_check, pure_negativity,
    Bipartition, EPS_NEG,
};
use xxz_core::limits::{all_global_bipartitions, field_independence_report, ScanOptions};
use xxz_core::spectral::{eigendecompose, thermal_state, DensityMatrix};
use xxz_core::spinchain::{build_hamiltonian, spin_multiplicity, total_spin_energy, ChainSpec, HalfInt, Topology};
use xxz_core::Result;

use crate::config::VerifyConfig;

/// Deliberate corruption of one closed form, to confirm the suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Use the `v > 0` value of `γ` in the pair border for `v < 0` as well.
    WrongPairGamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Infinite (`null` in JSON) when a case failed outright rather than by
    /// a finite margin.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub max_n: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Tally {
    cases: usize,
    worst: f64,
    detail: Option<String>,
}

impl Tally {
    fn record(&mut self, deviation: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN counts as the worst possible deviation.
        if !(deviation <= self.worst) {
            self.worst = if deviation.is_nan() { f64::INFINITY } else { deviation };
            self.detail = Some(what());
        }
    }

    fn finish(self, name: &str, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            passed: self.worst < tolerance,
            cases: self.cases,
            max_deviation: self.worst,
            tolerance,
            detail: self.detail,
        }
    }
}

fn run(name: &str, tolerance: f64, body: impl FnOnce(&mut Tally) -> Result<()>) -> Check {
    let mut tally = Tally::default();
    match body(&mut tally) {
        Ok(()) => tally.finish(name, tolerance),
        Err(e) => Check {
            name: name.into(),
            passed: false,
            cases: tally.cases,
            max_deviation: f64::INFINITY,
            tolerance,
            detail: Some(e.to_string()),
        },
    }
}

pub fn cmd_verify(cfg: &VerifyConfig, fault: Option<Fault>) -> VerifyReport {
    let max_n = cfg.max_n;
    let samples = cfg.samples.max(1);
    let rng = |salt: u64| ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));

    let checks = vec![
        total_spin_spectrum(max_n.min(8), samples, rng(1)),
        two_qubit_closed_form(samples * 10, rng(2)),
        three_qubit_closed_form(samples * 10, rng(3)),
        border_two_qubit(),
        border_three_qubit_global(),
        border_three_qubit_pair(fault),
        four_site_ground_family(),
        pure_states(max_n.min(7), samples, rng(4)),
        blocked_partial_transpose(max_n.min(7), samples, rng(5)),
        tracing_monotonicity(max_n, samples, rng(6)),
        field_factorization(max_n, samples, rng(7)),
        field_independence(max_n.min(5)),
        partition_classes(),
    ];
    VerifyReport { passed: checks.iter().all(|c| c.passed), max_n, seed: cfg.seed, fault, checks }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn total_spin_spectrum(max_n: usize, samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("total-spin-spectrum", 1e-9, |tally| {
        for n in 2..=max_n {
            for _ in 0..samples.div_ceil(4) {
                let (vx, vz, b) = (rng.gen_range(-1.5..1.5), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
                let spec = ChainSpec::new(n, Topology::FullyConnected, vx, vz, b)?;
                let mut expected = Vec::new();
                for twice_s in (n as i32 % 2..=n as i32).step_by(2) {
                    for twice_m in (-twice_s..=twice_s).step_by(2) {
                        let e = total_spin_energy(&spec, HalfInt(twice_s), HalfInt(twice_m))?;
                        expected.extend(std::iter::repeat_n(e, spin_multiplicity(n, HalfInt(twice_s))));
                    }
                }
                let found = eigendecompose(&build_hamiltonian(&spec)?)?.energies();
                let gap = max_gap(&sorted(found), &sorted(expected));
                tally.record(gap, || format!("n={n} vx={vx:.3} vz={vz:.3} b={b:.3}"));
            }
        }
        Ok(())
    })
}

fn global(n: usize, label: &str) -> Bipartition {
    Bipartition::parse(label, n).expect("fixed label")
}

/// Deviation of a closed-form negativity from the numerical one, with the
/// closed-form entanglement condition required to agree unless the value sits
/// inside the `ε_neg` band.
fn closed_form_deviation(exact: f64, numeric: f64, condition: bool) -> f64 {
    let agree = condition == (numeric > EPS_NEG) || exact <= EPS_NEG;
    if agree {
        (exact - numeric).abs()
    } else {
        f64::INFINITY
    }
}

fn two_qubit_closed_form(samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("two-qubit-negativity", 1e-12, |tally| {
        let split = global(2, "a-b");
        for _ in 0..samples {
            let raw: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>().powi(3));
            let sum: f64 = raw.iter().sum();
            let p = TwoQubitWeights { up: raw[0] / sum, zero: raw[1] / sum, down: raw[2] / sum, singlet: raw[3] / sum };
            let numeric = negativity(&p.to_density(), &split, EPS_NEG)?.value;
            let exact = two_qubit_negativity(&p);
            tally.record(closed_form_deviation(exact, numeric, two_qubit_entangled(&p)), || format!("{p:?}"));
        }
        Ok(())
    })
}

fn random_three_qubit(rng: &mut ChaCha8Rng) -> ThreeQubitWeights {
    let quartet: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>().powi(3));
    let doublet: [f64; 2] = std::array::from_fn(|_| rng.gen::<f64>().powi(3));
    let p = ThreeQubitWeights { quartet, doublet };
    let total = p.total();
    ThreeQubitWeights { quartet: quartet.map(|x| x / total), doublet: doublet.map(|x| x / total) }
}

fn three_qubit_closed_form(samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("three-qubit-global-negativity", 1e-12, |tally| {
        let split = global(3, "a-bc");
        for _ in 0..samples {
            let p = random_three_qubit(&mut rng);
            let numeric = negativity(&p.to_density(), &split, EPS_NEG)?.value;
            let exact = three_qubit_global_negativity(&p);
            tally.record(closed_form_deviation(exact, numeric, three_qubit_global_condition(&p)), || format!("{p:?}"));
        }
        Ok(())
    })
}

const BORDER_TEMPS: [f64; 6] = [0.1, 0.2, 0.35, 0.5, 0.7, 0.9];

/// Anisotropy where `entangled` switches from true (below) to false (above),
/// searched in `[guess - width, guess + width]`. `None` when the bracket does
/// not hold.
fn condition_root(entangled: impl Fn(f64) -> Result<bool>, guess: f64, width: f64) -> Result<Option<f64>> {
    let (mut lo, mut hi) = (guess - width, guess + width);
    if !entangled(lo)? || entangled(hi)? {
        return Ok(None);
    }
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn weights(n: usize, v_sign: f64, delta: f64, b_bar: f64, t: f64) -> Result<SpinSectorWeights> {
    thermal_weights(&ChainSpec::reduced(n, Topology::CyclicNn, v_sign, delta, b_bar)?, t)
}

fn two(w: SpinSectorWeights) -> TwoQubitWeights {
    match w {
        SpinSectorWeights::Two(p) => p,
        SpinSectorWeights::Three(_) => unreachable!("two-site weights requested"),
    }
}

fn three(w: SpinSectorWeights) -> ThreeQubitWeights {
    match w {
        SpinSectorWeights::Three(p) => p,
        SpinSectorWeights::Two(_) => unreachable!("three-site weights requested"),
    }
}

fn record_root(tally: &mut Tally, border: f64, root: Option<f64>, what: impl FnOnce() -> String) {
    tally.record(root.map_or(f64::INFINITY, |r| (r - border).abs()), what);
}

fn border_two_qubit() -> Check {
    run("border-two-qubit", 1e-8, |tally| {
        for v_sign in [1.0, -1.0] {
            for b_bar in [0.0, 0.7] {
                for t in BORDER_TEMPS {
                    let border = border_n2(t)?;
                    let root = condition_root(
                        |d| Ok(two_qubit_entangled(&two(weights(2, v_sign, d, b_bar, t)?))),
                        border,
                        0.5,
                    )?;
                    record_root(tally, border, root, || format!("v={v_sign} b̄={b_bar} t={t}"));
                }
            }
        }
        Ok(())
    })
}

fn border_three_qubit_global() -> Check {
    run("border-three-qubit-global", 1e-8, |tally| {
        for v_sign in [1.0, -1.0] {
            for b_bar in [0.0, 0.7] {
                for t in BORDER_TEMPS {
                    let border = border_n3_global(t, v_sign)?;
                    let root = condition_root(
                        |d| Ok(three_qubit_global_condition(&three(weights(3, v_sign, d, b_bar, t)?))),
                        border,
                        0.5,
                    )?;
                    record_root(tally, border, root, || format!("v={v_sign} b̄={b_bar} t={t}"));
                }
            }
        }
        Ok(())
    })
}

fn border_three_qubit_pair(fault: Option<Fault>) -> Check {
    run("border-three-qubit-pair", 1e-8, |tally| {
        for v_sign in [1.0, -1.0] {
            for b_bar in [0.0, 0.5, 2.0] {
                for t in BORDER_TEMPS {
                    let alpha = (-1.5 / t).exp();
                    let gamma = match fault {
                        Some(Fault::WrongPairGamma) => pair_gamma(alpha, 1.0),
                        None => pair_gamma(alpha, v_sign),
                    };
                    let denom = pair_border_denominator_with(t, b_bar, gamma);
                    let entangled = |d| Ok(pair_condition_n3(&three(weights(3, v_sign, d, b_bar, t)?)));
                    let what = || format!("v={v_sign} b̄={b_bar} t={t}");
                    if denom > 0.0 {
                        let border = pair_offset(v_sign) - t * (3.0 / denom).ln();
                        let root = condition_root(entangled, border, 0.5)?;
                        record_root(tally, border, root, what);
                    } else {
                        // No border claimed: the pair must stay separable even
                        // deep on the ferromagnetic side.
                        tally.record(if entangled(-200.0)? { f64::INFINITY } else { 0.0 }, what);
                    }
                }
            }
        }
        Ok(())
    })
}

fn four_site_ground_family() -> Check {
    run("four-site-ground-family", 1e-10, |tally| {
        for delta in [-0.9, -0.3, 0.0, 0.5, 1.5, 3.0, 5.0] {
            let (family, negs) = state14(delta);
            let rho = DensityMatrix::pure(4, &family.vector())?;
            for (label, exact) in negs.entries() {
                let numeric = negativity(&rho, &global(4, label), EPS_NEG)?.value;
                tally.record((numeric - exact).abs(), || format!("Δ={delta} {label}"));
            }
        }
        Ok(())
    })
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> nalgebra::DVector<f64> {
    let v = nalgebra::DVector::from_fn(1 << n, |_, _| rng.gen_range(-1.0..1.0));
    let norm = v.norm();
    v / norm
}

fn pure_states(max_n: usize, samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("pure-state-negativity", 1e-9, |tally| {
        for n in 2..=max_n {
            for _ in 0..samples.div_ceil(4) {
                let psi = random_state(&mut rng, n);
                let rho = DensityMatrix::pure(n, &psi)?;
                for a in 1..(1u32 << (n - 1)) {
                    let split = Bipartition::global(n, a)?;
                    let gap = (negativity(&rho, &split, EPS_NEG)?.value - pure_negativity(&psi, &split)?).abs();
                    tally.record(gap, || format!("n={n} A={a:#b}"));
                }
            }
        }
        Ok(())
    })
}

fn random_thermal(rng: &mut ChaCha8Rng, n: usize) -> Result<(DensityMatrix, String)> {
    let delta = rng.gen_range(-3.0..2.0);
    let b_bar = rng.gen_range(0.0..2.0);
    let t = 10f64.powf(rng.gen_range(-1.5..0.5));
    let spec = ChainSpec::reduced(n, Topology::CyclicNn, 1.0, delta, b_bar)?;
    let rho = thermal_state(&eigendecompose(&build_hamiltonian(&spec)?)?, t)?;
    Ok((rho, format!("n={n} Δ={delta:.3} b̄={b_bar:.3} t={t:.4}")))
}

fn blocked_partial_transpose(max_n: usize, samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("blocked-partial-transpose", 1e-10, |tally| {
        for n in 2..=max_n {
            for _ in 0..samples.div_ceil(4) {
                let (rho, what) = random_thermal(&mut rng, n)?;
                let a = rng.gen_range(1..(1u32 << (n - 1)));
                let dense = sorted(pt_eigenvalues_dense(&rho, a)?);
                let blocked = sorted(pt_eigenvalues_blocked(&rho, a)?);
                tally.record(max_gap(&dense, &blocked), || format!("{what} A={a:#b}"));
            }
        }
        Ok(())
    })
}

fn tracing_monotonicity(max_n: usize, samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("tracing-monotonicity", 1e-10, |tally| {
        for n in 4..=max_n {
            for _ in 0..samples.div_ceil(2) {
                let (rho, what) = random_thermal(&mut rng, n)?;
                let value = |label: &str| Ok::<_, xxz_core::Error>(negativity(&rho, &global(n, label), EPS_NEG)?.value);
                let chain = [value("a-b")?, value("a-bc")?, value("a-bcd")?, value("a-*")?];
                let mut violation = chain.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
                violation = violation.max(value("a-c")? - chain[1]);
                tally.record(violation, || what.clone());
            }
        }
        Ok(())
    })
}

fn field_factorization(max_n: usize, samples: usize, mut rng: ChaCha8Rng) -> Check {
    run("field-factorization", 1e-9, |tally| {
        for n in 3..=max_n {
            for _ in 0..samples.div_ceil(4) {
                let b_bar = rng.gen_range(0.0..2.0);
                let t = rng.gen_range(0.1..3.0);
                let a = rng.gen_range(1..(1u32 << (n - 1)));
                let spec = ChainSpec::reduced(n, Topology::CyclicNn, 1.0, 0.4, b_bar)?;
                let dev = pt_field_factorization_check(&spec, &Bipartition::global(n, a)?, t)?;
                tally.record(dev, || format!("n={n} b̄={b_bar:.3} t={t:.3} A={a:#b}"));
            }
        }
        Ok(())
    })
}

fn field_independence(max_n: usize) -> Check {
    run("field-independence", 1e-5, |tally| {
        let opts = ScanOptions::default().fast();
        for n in 3..=max_n {
            for split in all_global_bipartitions(n)? {
                let rows =
                    field_independence_report(n, Topology::CyclicNn, 1.0, &split, &[0.0, 0.5, 2.0], &[-1.0, 0.5], &opts)?;
                for row in rows {
                    tally.record(row.spread, || format!("n={n} {split} Δ={}: {:?}", row.delta, row.t_limits));
                }
            }
        }
        Ok(())
    })
}

fn partition_classes() -> Check {
    run("partition-classes", 0.5, |tally| {
        for (n, expected) in [(3, 1usize), (4, 3), (5, 3), (6, 7), (8, 17)] {
            let found = all_global_bipartitions(n)?.len();
            tally.record(found.abs_diff(expected) as f64, || format!("n={n}: {found} classes, expected {expected}"));
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_keeps_the_worst_case() {
        let mut t = Tally::default();
        t.record(1e-3, || "a".into());
        t.record(1e-5, || "b".into());
        t.record(f64::NAN, || "c".into());
        let check = t.finish("x", 1.0);
        assert_eq!(check.cases, 3);
        assert_eq!(check.max_deviation, f64::INFINITY);
        assert_eq!(check.detail.as_deref(), Some("c"));
        assert!(!check.passed);
    }

    #[test]
    fn condition_root_finds_a_step() {
        let root = condition_root(|d| Ok(d < 0.3), 0.0, 1.0).unwrap().unwrap();
        assert!((root - 0.3).abs() < 1e-10);
        assert_eq!(condition_root(|d| Ok(d < 5.0), 0.0, 1.0).unwrap(), None);
    }

    #[test]
    fn wrong_gamma_breaks_only_the_pair_border() {
        let good = border_three_qubit_pair(None);
        let bad = border_three_qubit_pair(Some(Fault::WrongPairGamma));
        assert!(good.passed, "{good:?}");
        assert!(!bad.passed);
    }
}
