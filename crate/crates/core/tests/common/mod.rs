//! Brute-force reference implementations shared by the integration tests.
//! Everything here works on full dense matrices built element by element and
//! deliberately avoids the library's sector machinery.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Single-site operator `o` (2x2, index 0 = up) acting on `site` of `n`.
pub fn site_op(n: usize, site: usize, o: [[f64; 2]; 2]) -> DMatrix<f64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        if (r ^ c) & !(1 << site) != 0 {
            0.0
        } else {
            o[(r >> site) & 1][(c >> site) & 1]
        }
    })
}

const SZ: [[f64; 2]; 2] = [[0.5, 0.0], [0.0, -0.5]];
const SPLUS: [[f64; 2]; 2] = [[0.0, 1.0], [0.0, 0.0]];
const SMINUS: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 0.0]];

pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    match n {
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `b Σ s^z - Σ_edges [vx (s^x s^x + s^y s^y) + vz s^z s^z]` built from
/// raising/lowering operators.
pub fn hamiltonian(n: usize, edges: &[(usize, usize)], vx: f64, vz: f64, b: f64) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        h += site_op(n, i, SZ) * b;
    }
    for &(i, j) in edges {
        let flip = site_op(n, i, SPLUS) * site_op(n, j, SMINUS) + site_op(n, i, SMINUS) * site_op(n, j, SPLUS);
        h -= flip * (0.5 * vx);
        h -= site_op(n, i, SZ) * site_op(n, j, SZ) * vz;
    }
    h
}

pub fn ring(n: usize, v_sign: f64, delta: f64, b_bar: f64) -> DMatrix<f64> {
    hamiltonian(n, &ring_edges(n), v_sign, delta, b_bar)
}

/// `exp(-H/T) / Z` through a full eigendecomposition.
pub fn gibbs(h: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let eig = h.clone().symmetric_eigen();
    let emin = eig.eigenvalues.min();
    let w = eig.eigenvalues.map(|e| (-(e - emin) / t).exp());
    let z = w.sum();
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&(w / z)) * v.transpose()
}

/// Partial transpose on the sites in mask `a`.
pub fn partial_transpose(rho: &DMatrix<f64>, a: usize) -> DMatrix<f64> {
    let dim = rho.nrows();
    DMatrix::from_fn(dim, dim, |r, c| {
        let r2 = (r & !a) | (c & a);
        let c2 = (c & !a) | (r & a);
        rho[(r2, c2)]
    })
}

/// Reduced state on the sites in `keep`; kept sites are renumbered in order.
pub fn partial_trace(rho: &DMatrix<f64>, n: usize, keep: usize) -> DMatrix<f64> {
    let kept: Vec<usize> = (0..n).filter(|s| keep >> s & 1 == 1).collect();
    let traced: Vec<usize> = (0..n).filter(|s| keep >> s & 1 == 0).collect();
    let spread = |x: usize, sites: &[usize]| {
        sites.iter().enumerate().fold(0, |acc, (k, &s)| acc | ((x >> k & 1) << s))
    };
    let dk = 1 << kept.len();
    DMatrix::from_fn(dk, dk, |r, c| {
        (0..1usize << traced.len())
            .map(|e| {
                let env = spread(e, &traced);
                rho[(spread(r, &kept) | env, spread(c, &kept) | env)]
            })
            .sum()
    })
}

/// Sum of `|λ|` over the negative eigenvalues of the partial transpose.
pub fn negativity(rho: &DMatrix<f64>, a: usize) -> f64 {
    let pt = partial_transpose(rho, a);
    pt.symmetric_eigen().eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
}

/// Negativity of the reduced state on `keep` across `a ⊂ keep` (both masks
/// in full-chain numbering).
pub fn reduced_negativity(rho: &DMatrix<f64>, n: usize, keep: usize, a: usize) -> f64 {
    let sub = partial_trace(rho, n, keep);
    let kept: Vec<usize> = (0..n).filter(|s| keep >> s & 1 == 1).collect();
    let local = kept.iter().enumerate().fold(0, |acc, (k, &s)| acc | ((a >> s & 1) << k));
    negativity(&sub, local)
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(1 << n, |_, _| rng.gen_range(-1.0..1.0));
    let norm = v.norm();
    v / norm
}

/// Random full-rank-ish density matrix `G G^T / Tr`.
pub fn random_density(rng: &mut impl Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let g = DMatrix::from_fn(dim, rank, |_, _| rng.gen_range(-1.0..1.0));
    let m = &g * g.transpose();
    let tr = m.trace();
    m / tr
}
