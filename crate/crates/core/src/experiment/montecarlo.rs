use std::collections::BTreeMap;

use rayon::prelude::*;

use super::rng::{keyed_rng, poisson, quantize_l, Purpose};
use super::tomography::{simulate_counts, TomographyDataset, TomographySetup};
use super::ExperimentConfig;
use crate::error::{QslError, Result};
use crate::quantum::Operator;
use crate::scalar::trace_product_re;
use crate::spectral::Evolution;

/// Mean and spread of the expectation value and of the central-difference speed at `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    pub l: f64,
    pub a_mean: f64,
    pub a_std: f64,
    pub speed_mean: f64,
    pub speed_std: f64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// `a` of every dataset under every resample, indexed `[resample][dataset]`.
fn resampled_expectations(
    datasets: &[TomographyDataset],
    a_obs: &Operator<f64>,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<f64>>> {
    (0..cfg.resamples as u64)
        .into_par_iter()
        .map(|r| {
            datasets
                .iter()
                .map(|ds| {
                    let setup = TomographySetup::shared(ds.n_qubits)?;
                    let counts: Vec<f64> = ds
                        .counts
                        .iter()
                        .enumerate()
                        .map(|(s, &c)| {
                            poisson(
                                c,
                                &mut keyed_rng(cfg.master_seed, Purpose::Resample, r, ds.l, s),
                            )
                        })
                        .collect();
                    let rho = setup.reconstruct(&counts)?;
                    Ok(trace_product_re(rho.entries(), a_obs.entries()))
                })
                .collect()
        })
        .collect()
}

fn estimates_at(
    centers: &[f64],
    datasets: &[TomographyDataset],
    a_obs: &Operator<f64>,
    cfg: &ExperimentConfig,
) -> Result<Vec<SpeedEstimate>> {
    cfg.validate()?;
    let index: BTreeMap<i64, usize> = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| (quantize_l(d.l), i))
        .collect();
    let find = |l: f64| {
        index
            .get(&quantize_l(l))
            .copied()
            .ok_or_else(|| QslError::InvalidConfig(format!("no dataset recorded at l = {l}")))
    };
    let triples = centers
        .iter()
        .map(|&l| Ok((l, find(l - cfg.delta_l)?, find(l)?, find(l + cfg.delta_l)?)))
        .collect::<Result<Vec<_>>>()?;
    let samples = resampled_expectations(datasets, a_obs, cfg)?;
    let width = 2.0 * cfg.delta_l;
    Ok(triples
        .into_iter()
        .map(|(l, lo, mid, hi)| {
            let (a_mean, a_std) = mean_std(samples.iter().map(|s| s[mid]));
            let (speed_mean, speed_std) =
                mean_std(samples.iter().map(|s| (s[hi] - s[lo]).abs() / width));
            SpeedEstimate {
                l,
                a_mean,
                a_std,
                speed_mean,
                speed_std,
            }
        })
        .collect())
}

/// Estimates at every dataset that has neighbours at `l ± Δl`; resamples of a
/// dataset are shared between the estimates that use it.
pub fn mc_series(
    datasets: &[TomographyDataset],
    a_obs: &Operator<f64>,
    cfg: &ExperimentConfig,
) -> Result<Vec<SpeedEstimate>> {
    let present: std::collections::BTreeSet<i64> =
        datasets.iter().map(|d| quantize_l(d.l)).collect();
    let centers: Vec<f64> = datasets
        .iter()
        .map(|d| d.l)
        .filter(|&l| {
            present.contains(&quantize_l(l - cfg.delta_l))
                && present.contains(&quantize_l(l + cfg.delta_l))
        })
        .collect();
    if centers.is_empty() {
        return Err(QslError::Empty(
            "no dataset has both central-difference neighbours",
        ));
    }
    estimates_at(&centers, datasets, a_obs, cfg)
}

/// Estimate from datasets at `l − Δl`, `l`, `l + Δl`.
pub fn mc_speed(
    triple: &[TomographyDataset; 3],
    a_obs: &Operator<f64>,
    cfg: &ExperimentConfig,
) -> Result<SpeedEstimate> {
    Ok(estimates_at(&[triple[1].l], triple, a_obs, cfg)?[0])
}

/// Measures `ev` at every grid point and its `±Δl` neighbours, then estimates
/// speeds on the grid. The config's preparation infidelity replaces the evolution's.
pub fn run_virtual_experiment(
    ev: &Evolution<f64>,
    a_obs: &Operator<f64>,
    l_grid: &[f64],
    cfg: &ExperimentConfig,
    truth_tag: &str,
) -> Result<Vec<SpeedEstimate>> {
    cfg.validate()?;
    let ev = ev.clone().with_prep_infidelity(cfg.prep_infidelity)?;
    let mut points: BTreeMap<i64, f64> = BTreeMap::new();
    for &l in l_grid {
        for x in [l - cfg.delta_l, l, l + cfg.delta_l] {
            points.entry(quantize_l(x)).or_insert(x);
        }
    }
    let datasets = points
        .values()
        .copied()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| simulate_counts(&ev.rho_at(l)?, cfg, l, truth_tag))
        .collect::<Result<Vec<_>>>()?;
    estimates_at(l_grid, &datasets, a_obs, cfg)
}
