//! The `negativity`, `profile`, `border` and `partitions` commands.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxz_core::entanglement::{negativity, Bipartition, EPS_NEG};
use xxz_core::limits::{
    all_global_bipartitions, all_reduced_bipartitions, limit_temperature, negativity_profile_eps, ModelPoint,
    ThermalModel,
};
use xxz_core::spectral::{eigendecompose, thermal_state, zero_t_limit};
use xxz_core::spinchain::{build_hamiltonian, ChainSpec, Topology};

use crate::config::RunConfig;
use crate::output::{file_label, write_border, write_profile, BorderRow, Manifest, ProfileRow};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityParams {
    pub n: usize,
    pub topology: Topology,
    pub vx: f64,
    pub vz: f64,
    pub b: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub eps_neg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityRecord {
    pub value: f64,
    pub k: usize,
    pub partition: String,
    pub params: NegativityParams,
    /// `Δ = v_z/|v_x|`, `b̄ = b/|v_x|`, `t = T/|v_x|`; absent when `v_x = 0`.
    pub reduced: Option<ReducedParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub delta: f64,
    pub b_bar: f64,
    pub t: f64,
}

/// Negativity of a single thermal state given in raw couplings. `T = 0`
/// selects the equal mixture over the ground manifold.
pub fn cmd_negativity(params: NegativityParams, partition: &str) -> Result<NegativityRecord, CliError> {
    let p = params;
    let spec = ChainSpec::new(p.n, p.topology, p.vx, p.vz, p.b).map_err(CliError::config)?;
    let split = Bipartition::parse(partition, p.n).map_err(CliError::config)?;
    if !(p.temperature >= 0.0) || !(p.eps_neg >= 0.0) {
        return Err(CliError::Config("T and eps_neg must be non-negative".into()));
    }
    let decomp = eigendecompose(&build_hamiltonian(&spec)?)?;
    let rho = if p.temperature == 0.0 {
        zero_t_limit(&decomp, 1e-9)
    } else {
        thermal_state(&decomp, p.temperature)?
    };
    let report = negativity(&rho, &split, p.eps_neg)?;
    let v = p.vx.abs();
    let reduced = (v > 0.0).then(|| ReducedParams { delta: p.vz / v, b_bar: p.b / v, t: p.temperature / v });
    Ok(NegativityRecord {
        value: report.value,
        k: report.negative_eigenvalue_count,
        partition: split.label(),
        params,
        reduced,
    })
}

impl NegativityParams {
    pub fn new(n: usize, topology: Topology, vx: f64, vz: f64, b: f64, temperature: f64) -> Self {
        NegativityParams { n, topology, vx, vz, b, temperature, eps_neg: EPS_NEG }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Global,
    Reduced,
}

pub fn cmd_partitions(n: usize, kind: PartitionKind) -> Result<Vec<String>, CliError> {
    let splits = match kind {
        PartitionKind::Global => all_global_bipartitions(n),
        PartitionKind::Reduced => all_reduced_bipartitions(n),
    }
    .map_err(CliError::config)?;
    Ok(splits.iter().map(|s| s.label()).collect())
}

fn prepare(cfg: &RunConfig) -> Result<(Vec<f64>, Vec<Bipartition>), CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cfg.output.dir.display())))?;
    Ok((cfg.deltas()?, cfg.partitions()?))
}

/// Zero-field models, one eigensolve per anisotropy; fields are applied by
/// shifting eigenvalues.
fn base_models(cfg: &RunConfig, deltas: &[f64]) -> Vec<Result<ThermalModel, CliError>> {
    let m = &cfg.model;
    deltas
        .par_iter()
        .map(|&d| Ok(ThermalModel::new(ModelPoint::new(m.n, m.topology, m.v_sign, d, 0.0))?))
        .collect()
}

fn finish(manifest: Manifest, dir: &Path) -> Result<Manifest, CliError> {
    manifest.write(dir)?;
    match manifest.errors.first() {
        Some(first) => Err(CliError::Runtime(format!("{} work item(s) failed; first: {first}", manifest.errors.len()))),
        None => Ok(manifest),
    }
}

/// One file per partition with a row per `(b̄, Δ)`, plus `manifest.json`.
/// Rows that fail are left out and listed in the manifest.
pub fn cmd_border(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let (deltas, splits) = prepare(cfg)?;
    let opts = cfg.scan_options();
    let models = base_models(cfg, &deltas);
    let fields = &cfg.model.b_bar;

    let (ns, nf, nd) = (splits.len(), fields.len(), deltas.len());
    let items: Vec<(usize, usize, usize)> = (0..ns)
        .flat_map(|s| (0..nf).flat_map(move |f| (0..nd).map(move |d| (s, f, d))))
        .collect();
    let results: Vec<Result<BorderRow, CliError>> = items
        .par_iter()
        .map(|&(s, f, d)| {
            let base = models[d].as_ref().map_err(Clone::clone)?;
            let lt = limit_temperature(&base.with_field(fields[f])?, &splits[s], &opts)?;
            Ok(BorderRow {
                b_bar: fields[f],
                delta: deltas[d],
                t_limit: lt.t_limit,
                k_at_limit: lt.k_at_limit,
                reentry_intervals: lt.reentry_intervals,
            })
        })
        .collect();

    let mut manifest = Manifest::new("border", cfg);
    let per_split = nf * nd;
    for (s, split) in splits.iter().enumerate() {
        let mut rows = Vec::with_capacity(per_split);
        for (i, r) in results[s * per_split..(s + 1) * per_split].iter().enumerate() {
            match r {
                Ok(row) => rows.push(row.clone()),
                Err(e) => manifest.errors.push(format!(
                    "{split} b̄={} Δ={}: {e}",
                    fields[i / deltas.len()],
                    deltas[i % deltas.len()]
                )),
            }
        }
        for &format in &cfg.output.formats {
            let name = format!("border_{}.{}", file_label(&split.label()), format.extension());
            write_border(&cfg.output.dir.join(&name), format, &rows)?;
            manifest.files.push(name);
        }
    }
    finish(manifest, &cfg.output.dir)
}

/// One file per `(b̄, Δ, partition)` with the negativity on the configured
/// temperature grid, plus `manifest.json`.
pub fn cmd_profile(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let (deltas, splits) = prepare(cfg)?;
    let grid = cfg.t_grid();
    let eps = cfg.numeric.eps_neg;
    let models = base_models(cfg, &deltas);
    let fields = &cfg.model.b_bar;

    let (ns, nf, nd) = (splits.len(), fields.len(), deltas.len());
    let items: Vec<(usize, usize, usize)> = (0..nf)
        .flat_map(|f| (0..nd).flat_map(move |d| (0..ns).map(move |s| (f, d, s))))
        .collect();
    let results: Vec<Result<Vec<ProfileRow>, CliError>> = items
        .par_iter()
        .map(|&(f, d, s)| {
            let base = models[d].as_ref().map_err(Clone::clone)?;
            let profile = negativity_profile_eps(&base.with_field(fields[f])?, &splits[s], &grid, eps)?;
            Ok(profile
                .samples
                .iter()
                .map(|p| ProfileRow { t: p.t, negativity: p.value, k: p.k })
                .collect())
        })
        .collect();

    let mut manifest = Manifest::new("profile", cfg);
    for (&(f, d, s), result) in items.iter().zip(&results) {
        let stem = format!("profile_b{}_d{}_{}", fields[f], deltas[d], file_label(&splits[s].label()));
        match result {
            Ok(rows) => {
                for &format in &cfg.output.formats {
                    let name = format!("{stem}.{}", format.extension());
                    write_profile(&cfg.output.dir.join(&name), format, rows)?;
                    manifest.files.push(name);
                }
            }
            Err(e) => manifest.errors.push(format!("{stem}: {e}")),
        }
    }
    finish(manifest, &cfg.output.dir)
}
