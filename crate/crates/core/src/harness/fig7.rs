use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trial_key, Csv, ExperimentConfig};
use crate::conditions::{kuramoto_explicit_kc, kuramoto_necessary_bound, verwoerd_mason_kc};
use crate::error::{Error, Result};
use crate::integrate::{empirical_critical_coupling, fmt17};
use crate::torus::PhaseState;

pub const FIG7_HEADER: [&str; 6] = ["n", "mean_necessary", "mean_exact", "mean_sufficient", "trials", "failures"];

/// Trial means of the three critical-coupling bounds at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig7Row {
    pub n: usize,
    pub mean_necessary: f64,
    pub mean_exact: f64,
    pub mean_sufficient: f64,
    /// Successful trials entering the means.
    pub trials: usize,
    pub failures: usize,
}

impl Fig7Row {
    pub fn csv(rows: &[Fig7Row]) -> Csv {
        let mut csv = Csv::new(&FIG7_HEADER);
        for r in rows {
            csv.row(&[
                r.n.to_string(),
                fmt17(r.mean_necessary),
                fmt17(r.mean_exact),
                fmt17(r.mean_sufficient),
                r.trials.to_string(),
                r.failures.to_string(),
            ]);
        }
        csv
    }
}

/// Relative slack for the per-trial ordering; the bounds coincide at n = 2.
const ORDER_SLACK: f64 = 1e-10;

fn trial_bounds(omega: &[f64]) -> Result<[f64; 3]> {
    let nec = kuramoto_necessary_bound(omega)?;
    let exact = verwoerd_mason_kc(omega)?.kc;
    let suff = kuramoto_explicit_kc(omega)?;
    Ok([nec, exact, suff])
}

fn check_order(n: usize, [nec, exact, suff]: [f64; 3]) -> Result<()> {
    if nec > exact * (1.0 + ORDER_SLACK) || exact > suff * (1.0 + ORDER_SLACK) {
        return Err(Error::Solver(format!(
            "bound ordering violated at n = {n}: necessary {nec}, exact {exact}, sufficient {suff}"
        )));
    }
    Ok(())
}

/// Monte-Carlo comparison of the necessary, exact (implicit) and sufficient
/// critical couplings of the all-to-all Kuramoto model.
///
/// A trial whose implicit solve fails is excluded and counted; more than 1%
/// failures at any `n` aborts the run. An ordering violation is an error.
pub fn run_fig7(cfg: &ExperimentConfig) -> Result<Vec<Fig7Row>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_grid.values().len());
    for &n in cfg.n_grid.values() {
        let outcomes: Vec<Result<[f64; 3]>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let omega = cfg.distribution.sample(n, &mut cfg.rng(trial_key(n, t)))?;
                trial_bounds(&omega)
            })
            .collect();
        let mut sums = [0.0; 3];
        let mut ok = 0;
        let mut failed = 0;
        for outcome in outcomes {
            match outcome {
                Ok(b) => {
                    check_order(n, b)?;
                    for (s, v) in sums.iter_mut().zip(b) {
                        *s += v;
                    }
                    ok += 1;
                }
                Err(Error::Solver(_) | Error::Degenerate(_)) => failed += 1,
                Err(e) => return Err(e),
            }
        }
        if failed * 100 > cfg.trials {
            return Err(Error::TooManyFailures { failed, total: cfg.trials });
        }
        let m = ok as f64;
        rows.push(Fig7Row {
            n,
            mean_necessary: sums[0] / m,
            mean_exact: sums[1] / m,
            mean_sufficient: sums[2] / m,
            trials: ok,
            failures: failed,
        });
    }
    Ok(rows)
}

/// Simulated critical coupling against the implicit formula, same samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub n: usize,
    pub mean_exact: f64,
    pub mean_empirical: f64,
    pub trials: usize,
    pub failures: usize,
}

impl EmpiricalRow {
    pub fn csv(rows: &[EmpiricalRow]) -> Csv {
        let mut csv = Csv::new(&["n", "mean_exact", "mean_empirical", "trials", "failures"]);
        for r in rows {
            csv.row(&[
                r.n.to_string(),
                fmt17(r.mean_exact),
                fmt17(r.mean_empirical),
                r.trials.to_string(),
                r.failures.to_string(),
            ]);
        }
        csv
    }
}

/// Bisection on K with simulated frequency synchronization as the oracle,
/// for grid points `n ≤ cfg.empirical_max_n`.
///
/// Each trial starts from the synchronized state θ = 0 and searches the
/// bracket `[0.98·necessary, 1.02·sufficient]`; a trial fails when the
/// bracket endpoints do not straddle the simulated threshold.
pub fn run_fig7_empirical(cfg: &ExperimentConfig) -> Result<Vec<EmpiricalRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in cfg.n_grid.values().iter().filter(|&&n| n <= cfg.empirical_max_n) {
        let outcomes: Vec<Result<(f64, f64)>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let omega = cfg.distribution.sample(n, &mut cfg.rng(trial_key(n, t)))?;
                let [nec, exact, suff] = trial_bounds(&omega)?;
                let theta0 = PhaseState::synchronized(n, 0.0)?;
                let k = empirical_critical_coupling(&omega, &theta0, (0.98 * nec, 1.02 * suff), &cfg.integrator, &cfg.sync)?;
                Ok((exact, k))
            })
            .collect();
        let (mut se, mut sk, mut ok, mut failed) = (0.0, 0.0, 0, 0);
        for outcome in outcomes {
            match outcome {
                Ok((e, k)) => {
                    se += e;
                    sk += k;
                    ok += 1;
                }
                Err(Error::Bracket(_) | Error::Solver(_) | Error::Degenerate(_)) => failed += 1,
                Err(e) => return Err(e),
            }
        }
        if ok == 0 {
            return Err(Error::TooManyFailures { failed, total: cfg.trials });
        }
        rows.push(EmpiricalRow {
            n,
            mean_exact: se / ok as f64,
            mean_empirical: sk / ok as f64,
            trials: ok,
            failures: failed,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{FrequencyDistribution, NGrid};
    use crate::integrate::IntegratorConfig;

    fn cfg(grid: &[usize], trials: usize) -> ExperimentConfig {
        ExperimentConfig { n_grid: NGrid::new(grid.to_vec()).unwrap(), trials, seed: 11, ..Default::default() }
    }

    #[test]
    fn two_oscillators_all_bounds_agree() {
        let rows = run_fig7(&cfg(&[2], 300)).unwrap();
        let r = &rows[0];
        assert_eq!((r.trials, r.failures), (300, 0));
        assert!((r.mean_necessary - r.mean_sufficient).abs() < 1e-12);
        assert!((r.mean_exact - r.mean_sufficient).abs() < 1e-9);
        // E|ω₁ − ω₂| = 2/3 for two uniform samples on [−1, 1]
        assert!((r.mean_sufficient - 2.0 / 3.0).abs() < 0.06);
    }

    #[test]
    fn means_are_ordered_and_trend() {
        let rows = run_fig7(&cfg(&[5, 20, 80], 200)).unwrap();
        for r in &rows {
            assert!(r.mean_necessary <= r.mean_exact && r.mean_exact <= r.mean_sufficient);
        }
        assert!(rows.windows(2).all(|w| w[0].mean_sufficient < w[1].mean_sufficient));
    }

    #[test]
    fn deterministic_and_grid_independent() {
        let a = run_fig7(&cfg(&[3, 7], 50)).unwrap();
        let b = run_fig7(&cfg(&[3, 7], 50)).unwrap();
        let c = run_fig7(&cfg(&[7], 50)).unwrap();
        assert_eq!(Fig7Row::csv(&a).as_str(), Fig7Row::csv(&b).as_str());
        assert_eq!(a[1], c[0]);
    }

    #[test]
    fn csv_header() {
        let rows = run_fig7(&cfg(&[4], 5)).unwrap();
        let csv = Fig7Row::csv(&rows);
        assert_eq!(csv.as_str().lines().next().unwrap(), "n,mean_necessary,mean_exact,mean_sufficient,trials,failures");
        assert_eq!(csv.as_str().lines().count(), 2);
    }

    #[test]
    fn degenerate_samples_abort() {
        let mut c = cfg(&[3], 10);
        c.distribution = FrequencyDistribution::Explicit { values: vec![1.0, 1.0, 1.0] };
        assert!(matches!(run_fig7(&c), Err(Error::TooManyFailures { failed: 10, total: 10 })));
    }

    #[test]
    fn empirical_search_brackets_the_formula() {
        let mut c = cfg(&[2, 3], 3);
        c.empirical_max_n = 3;
        c.integrator = IntegratorConfig::new(0.02, 150.0, 5).unwrap();
        let rows = run_fig7_empirical(&c).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert!(r.trials >= 1);
            assert!(r.mean_empirical >= r.mean_exact - 2e-3, "{r:?}");
            assert!(r.mean_empirical <= r.mean_exact * 1.05, "{r:?}");
        }
    }
}
