//! Limit temperatures, border curves and reentry windows.
//!
//! All temperatures here are reduced, `t = T/|v_x|`, and a model point is
//! given by its anisotropy `Δ`, reduced field `b̄` and the sign of `v_x`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{negativity, Bipartition, EPS_NEG};
use crate::spectral::{eigendecompose, thermal_state, SpectralDecomposition};
use crate::spinchain::{build_hamiltonian, ChainSpec, Topology};
use crate::{Error, Result, MAX_SITES};

/// A point of the reduced model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub n: usize,
    pub topology: Topology,
    pub v_sign: f64,
    pub delta: f64,
    pub b_bar: f64,
}

impl ModelPoint {
    pub fn new(n: usize, topology: Topology, v_sign: f64, delta: f64, b_bar: f64) -> Self {
        ModelPoint { n, topology, v_sign, delta, b_bar }
    }

    pub fn spec(&self) -> Result<ChainSpec> {
        ChainSpec::reduced(self.n, self.topology, self.v_sign, self.delta, self.b_bar)
    }

    pub fn with_field(&self, b_bar: f64) -> Self {
        ModelPoint { b_bar, ..*self }
    }
}

/// Spectral decomposition of one model point, reused across temperatures
/// and partitions.
#[derive(Debug, Clone)]
pub struct ThermalModel {
    point: ModelPoint,
    decomp: SpectralDecomposition,
}

impl ThermalModel {
    pub fn new(point: ModelPoint) -> Result<Self> {
        let h = build_hamiltonian(&point.spec()?)?;
        Ok(ThermalModel { point, decomp: eigendecompose(&h)? })
    }

    pub fn point(&self) -> &ModelPoint {
        &self.point
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    /// Same couplings at another field, without a new eigensolve.
    pub fn with_field(&self, b_bar: f64) -> Result<Self> {
        let decomp = self.decomp.with_field_shift(b_bar - self.point.b_bar)?;
        Ok(ThermalModel { point: self.point.with_field(b_bar), decomp })
    }

    /// Negativity value and count of negative eigenvalues at `t`.
    pub fn negativity_at(&self, split: &Bipartition, t: f64, eps_neg: f64) -> Result<(f64, usize)> {
        if split.n() != self.point.n {
            return Err(Error::DimensionMismatch { expected: self.point.n, got: split.n() });
        }
        let rho = thermal_state(&self.decomp, t)?;
        let report = negativity(&rho, split, eps_neg)?;
        Ok((report.value, report.negative_eigenvalue_count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub value: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityProfile {
    pub point: ModelPoint,
    pub partition: String,
    pub samples: Vec<ProfileSample>,
}

impl NegativityProfile {
    pub fn max_value(&self) -> f64 {
        self.samples.iter().map(|s| s.value).fold(0.0, f64::max)
    }
}

/// Negativity on a strictly increasing grid of positive temperatures.
pub fn negativity_profile(model: &ThermalModel, split: &Bipartition, t_grid: &[f64]) -> Result<NegativityProfile> {
    negativity_profile_eps(model, split, t_grid, EPS_NEG)
}

pub fn negativity_profile_eps(
    model: &ThermalModel,
    split: &Bipartition,
    t_grid: &[f64],
    eps_neg: f64,
) -> Result<NegativityProfile> {
    if t_grid.is_empty() {
        return Err(Error::Validation("empty temperature grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(Error::Validation("temperature grid must be positive and strictly increasing".into()));
    }
    let samples = t_grid
        .par_iter()
        .map(|&t| {
            let (value, k) = model.negativity_at(split, t, eps_neg)?;
            Ok(ProfileSample { t, value, k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NegativityProfile { point: model.point, partition: split.label(), samples })
}

/// `points` log-spaced temperatures from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => {
            let ratio = (t_max / t_min).ln() / (points - 1) as f64;
            let mut grid: Vec<f64> = (0..points).map(|i| t_min * (ratio * i as f64).exp()).collect();
            grid[points - 1] = t_max;
            grid
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Bisection tolerance in `t`.
    pub tol: f64,
    /// Grid points with negativity above this count as entangled.
    pub eps_neg: f64,
    /// Window edges are refined to where the negativity falls to this level,
    /// i.e. to the point where it vanishes up to rounding.
    pub vanish_floor: f64,
    /// Scan the whole grid and report reentry windows. When false the scan
    /// runs downward from `t_max` and stops at the first entangled point.
    pub reentry: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            t_min: 1e-3,
            t_max: 50.0,
            points: 400,
            tol: 1e-6,
            eps_neg: EPS_NEG,
            vanish_floor: VANISH_FLOOR,
            reentry: true,
        }
    }
}

/// Negativities below this are rounding noise of the partial-transpose
/// eigensolve.
pub const VANISH_FLOOR: f64 = 1e-15;

impl ScanOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::Validation(format!("bad scan range [{}, {}]", self.t_min, self.t_max)));
        }
        if self.points < 2 {
            return Err(Error::Validation("scan needs at least two points".into()));
        }
        if !(self.tol > 0.0) || !(self.eps_neg >= 0.0) || !(self.vanish_floor >= 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if self.vanish_floor > self.eps_neg {
            return Err(Error::Validation("vanish_floor must not exceed eps_neg".into()));
        }
        Ok(())
    }

    pub fn fast(self) -> Self {
        ScanOptions { reentry: false, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTemperature {
    /// Largest temperature with non-zero negativity; `None` when the scan
    /// found none.
    pub t_limit: Option<f64>,
    /// Final bisection bracket around `t_limit`.
    pub bracket: Option<(f64, f64)>,
    pub tolerance: f64,
    /// Negative partial-transpose eigenvalues just below `t_limit`.
    pub k_at_limit: usize,
    /// Entangled windows `(t_on, t_off)` entered from a separable region.
    pub reentry_intervals: Vec<(f64, f64)>,
}

impl LimitTemperature {
    fn none(tol: f64) -> Self {
        LimitTemperature { t_limit: None, bracket: None, tolerance: tol, k_at_limit: 0, reentry_intervals: Vec::new() }
    }

    /// `t_limit` with "never entangled" encoded as 0.
    pub fn value_or_zero(&self) -> f64 {
        self.t_limit.unwrap_or(0.0)
    }
}

/// Bisects between `lo` (entangled iff `lo_on`) and `hi` (the opposite).
fn refine(entangled: &impl Fn(f64) -> Result<bool>, mut lo: f64, mut hi: f64, lo_on: bool, tol: f64) -> Result<(f64, f64)> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? == lo_on {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Limit temperature of `split` for one model.
///
/// Entangled windows are located on the grid with `eps_neg`; each window is
/// then widened to the neighbouring grid points where the negativity is at
/// the rounding floor, and its edges are bisected against that floor.
pub fn limit_temperature(model: &ThermalModel, split: &Bipartition, opts: &ScanOptions) -> Result<LimitTemperature> {
    opts.validate()?;
    let floor = opts.vanish_floor;
    let value = |t: f64| model.negativity_at(split, t, floor);
    let above = |t: f64, level: f64| value(t).map(|(v, _)| v > level);
    let nonzero = |t: f64| above(t, floor);
    let grid = log_grid(opts.t_min, opts.t_max, opts.points);

    if nonzero(opts.t_max)? {
        return Err(Error::Range { t_max: opts.t_max });
    }

    let mut windows: Vec<(usize, usize)> = Vec::new();
    if opts.reentry {
        let on = grid.par_iter().map(|&t| above(t, opts.eps_neg)).collect::<Result<Vec<bool>>>()?;
        let mut i = 0;
        while i < on.len() {
            if on[i] {
                let start = i;
                while i + 1 < on.len() && on[i + 1] {
                    i += 1;
                }
                windows.push((start, i));
            }
            i += 1;
        }
    } else {
        let chunk = rayon::current_num_threads().max(1);
        let mut top = grid.len();
        'scan: while top > 0 {
            let bottom = top.saturating_sub(chunk);
            let on = grid[bottom..top]
                .par_iter()
                .map(|&t| above(t, opts.eps_neg))
                .collect::<Result<Vec<bool>>>()?;
            for (offset, &hit) in on.iter().enumerate().rev() {
                if hit {
                    let idx = bottom + offset;
                    windows.push((idx, idx));
                    break 'scan;
                }
            }
            top = bottom;
        }
    }
    if windows.is_empty() {
        return Ok(LimitTemperature::none(opts.tol));
    }

    // (last separable grid index below, first separable grid index above)
    let mut spans: Vec<(Option<usize>, usize)> = Vec::new();
    for &(start, end) in &windows {
        if let Some(prev) = spans.last() {
            if prev.1 > start {
                continue;
            }
        }
        let mut hi = end + 1;
        while hi < grid.len() && nonzero(grid[hi])? {
            hi += 1;
        }
        if hi == grid.len() {
            return Err(Error::Range { t_max: opts.t_max });
        }
        let mut below = None;
        if opts.reentry {
            let mut lo = start;
            while lo > 0 {
                lo -= 1;
                if !nonzero(grid[lo])? {
                    below = Some(lo);
                    break;
                }
            }
        }
        spans.push((below, hi));
    }

    let &(_, top) = spans.last().expect("at least one window");
    let (lo, hi) = refine(&nonzero, grid[top - 1], grid[top], true, opts.tol)?;
    let t_limit = 0.5 * (lo + hi);
    let probe = (t_limit - 10.0 * opts.tol).max(lo);
    let (_, k_at_limit) = value(probe)?;

    let mut reentry_intervals = Vec::new();
    for (w, &(below, above_idx)) in spans.iter().enumerate() {
        let Some(b) = below else { continue };
        let (a0, a1) = refine(&nonzero, grid[b], grid[b + 1], false, opts.tol)?;
        let t_off = if w + 1 == spans.len() {
            t_limit
        } else {
            let (c0, c1) = refine(&nonzero, grid[above_idx - 1], grid[above_idx], true, opts.tol)?;
            0.5 * (c0 + c1)
        };
        reentry_intervals.push((0.5 * (a0 + a1), t_off));
    }

    Ok(LimitTemperature {
        t_limit: Some(t_limit),
        bracket: Some((lo, hi)),
        tolerance: opts.tol,
        k_at_limit,
        reentry_intervals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorderPoint {
    pub delta: f64,
    pub limit: LimitTemperature,
}

/// Limit temperature of one split for every anisotropy in `deltas`.
pub fn border_curve(
    n: usize,
    topology: Topology,
    v_sign: f64,
    split: &Bipartition,
    deltas: &[f64],
    b_bar: f64,
    opts: &ScanOptions,
) -> Result<Vec<BorderPoint>> {
    if let Some(bad) = deltas.iter().find(|d| !d.is_finite()) {
        return Err(Error::Validation(format!("non-finite anisotropy {bad}")));
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let model = ThermalModel::new(ModelPoint::new(n, topology, v_sign, delta, b_bar))?;
            Ok(BorderPoint { delta, limit: limit_temperature(&model, split, opts)? })
        })
        .collect()
}

/// Images of a site mask under rotations and reflections of the ring.
fn dihedral_images(mask: u32, n: usize) -> impl Iterator<Item = u32> {
    (0..n).flat_map(move |shift| {
        [false, true].into_iter().map(move |reflect| {
            let mut out = 0u32;
            for site in 0..n {
                if mask >> site & 1 == 1 {
                    let s = if reflect { (n - site) % n } else { site };
                    out |= 1 << ((s + shift) % n);
                }
            }
            out
        })
    })
}

fn sites(mask: u32) -> Vec<u32> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// One representative per class of global splits of the ring, under
/// rotations, reflections and exchange of the two groups. The representative
/// has the smallest `A` containing site `a`, ties broken lexicographically.
pub fn all_global_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if !(2..=MAX_SITES).contains(&n) {
        return Err(Error::Capacity { n, max: MAX_SITES });
    }
    let full = ((1u64 << n) - 1) as u32;
    let mut candidates: Vec<u32> = (1..full).filter(|m| m & 1 == 1 && m.count_ones() as usize <= n / 2).collect();
    candidates.sort_by_key(|&m| (m.count_ones(), sites(m)));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in candidates {
        if seen.contains(&a) {
            continue;
        }
        for image in dihedral_images(a, n) {
            seen.insert(image);
            seen.insert(full & !image);
        }
        out.push(Bipartition::global(n, a)?);
    }
    Ok(out)
}

/// One representative per class of reduced splits (at least one site traced
/// out), under the same symmetries applied to both groups.
pub fn all_reduced_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if !(2..=MAX_SITES).contains(&n) {
        return Err(Error::Capacity { n, max: MAX_SITES });
    }
    let full = ((1u64 << n) - 1) as u32;
    let mut candidates = Vec::new();
    for keep in 1..full {
        if keep & 1 == 0 || keep.count_ones() < 2 {
            continue;
        }
        // A holds the lowest kept site, which is site a.
        let rest = keep & !1;
        let mut sub = rest;
        loop {
            let a = 1 | sub;
            if a != keep {
                candidates.push((keep, a));
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    candidates.sort_by_key(|&(keep, a)| (keep.count_ones(), sites(keep), a.count_ones(), sites(a)));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (keep, a) in candidates {
        if seen.contains(&(keep, a)) {
            continue;
        }
        let b = keep & !a;
        for (ia, ib) in dihedral_images(a, n).zip(dihedral_images(b, n)) {
            seen.insert((ia | ib, ia));
            seen.insert((ia | ib, ib));
        }
        out.push(Bipartition::reduced(n, keep, a)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpread {
    pub delta: f64,
    pub partition: String,
    /// `t_limit` (0 when never entangled) per field, in input order.
    pub t_limits: Vec<f64>,
    /// `max |t_limit(b̄) - t_limit(b̄_0)|` over the field list.
    pub spread: f64,
}

/// Limit temperatures across a list of fields for each anisotropy. One
/// eigensolve per anisotropy serves every field.
pub fn field_independence_report(
    n: usize,
    topology: Topology,
    v_sign: f64,
    split: &Bipartition,
    b_bars: &[f64],
    deltas: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<FieldSpread>> {
    if b_bars.is_empty() {
        return Err(Error::Validation("empty field list".into()));
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let base = ThermalModel::new(ModelPoint::new(n, topology, v_sign, delta, 0.0))?;
            let t_limits = b_bars
                .par_iter()
                .map(|&b| Ok(limit_temperature(&base.with_field(b)?, split, opts)?.value_or_zero()))
                .collect::<Result<Vec<f64>>>()?;
            let spread = t_limits.iter().map(|t| (t - t_limits[0]).abs()).fold(0.0, f64::max);
            Ok(FieldSpread { delta, partition: split.label(), t_limits, spread })
        })
        .collect()
}
