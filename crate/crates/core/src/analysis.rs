//! Error norms, convergence rates and oscillation diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};
use crate::model::FlowConfig;
use crate::sbp::Grid;
use crate::scenarios::Scenario;
use crate::solver::{run, RunParams, State};

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "SWWE_THREADS";

fn check_state(state: &State, grid: &Grid) -> Result<()> {
    if state.data.len() != 2 * grid.len() {
        return Err(SwweError::Shape {
            expected: 2 * grid.len(),
            found: state.data.len(),
        });
    }
    Ok(())
}

fn weighted_error<F>(state: &State, exact: F, grid: &Grid, t: f64, weight: impl Fn(usize) -> f64) -> (f64, f64)
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let (h, u) = (state.h(), state.u());
    let (mut eh, mut eu) = (0.0, 0.0);
    for (i, x) in grid.nodes().iter().enumerate() {
        let (he, ue) = exact(*x, t);
        let w = weight(i);
        eh += w * (h[i] - he).powi(2);
        eu += w * (u[i] - ue).powi(2);
    }
    (eh.sqrt(), eu.sqrt())
}

/// `e_h = sqrt(sum_i |I_i| (h_i - h(x_i, t))^2)` and likewise for `u`.
pub fn l2_error<F>(state: &State, exact: F, grid: &Grid, t: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    check_state(state, grid)?;
    let p = grid.volumes();
    Ok(weighted_error(state, exact, grid, t, |i| p[i]))
}

/// `sqrt(L/N * sum_i e_i^2)`, every node weighted equally.
pub fn l2_error_nodal<F>(state: &State, exact: F, grid: &Grid, t: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    check_state(state, grid)?;
    let w = grid.length() / grid.intervals() as f64;
    Ok(weighted_error(state, exact, grid, t, |_| w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h_error: f64,
    pub u_error: f64,
    pub h_rate: Option<f64>,
    pub u_rate: Option<f64>,
    /// Same errors with uniform nodal weights.
    pub h_error_nodal: f64,
    pub u_error_nodal: f64,
}

/// `log(e_coarse / e_fine) / log(n_fine / n_coarse)`; `None` when either
/// error vanishes or is not finite.
pub fn observed_rate(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    if !ok(e_coarse) || !ok(e_fine) || n_fine <= n_coarse {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
}

/// Fill in the rate columns from consecutive rows.
pub fn fill_rates(rows: &mut [ConvergenceRow]) {
    if let Some(first) = rows.first_mut() {
        first.h_rate = None;
        first.u_rate = None;
    }
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1].clone(), &mut rows[i]);
        b.h_rate = observed_rate(a.h_error, b.h_error, a.n, b.n);
        b.u_rate = observed_rate(a.u_error, b.u_error, a.n, b.n);
    }
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

/// Run `f` over `items` in parallel, honouring [`THREADS_ENV`].
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        None => items.par_iter().map(&f).collect(),
    }
}

/// Errors at `params.t_final` on uniform grids of `resolutions` intervals.
pub fn convergence_table(
    scenario: &Scenario,
    cfg: &FlowConfig,
    params: &RunParams,
    resolutions: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if resolutions.is_empty() {
        return Err(SwweError::InvalidConfig {
            field: "resolutions",
            reason: "at least one resolution is required".into(),
        });
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SwweError::InvalidConfig {
            field: "resolutions",
            reason: format!("must be strictly increasing, got {resolutions:?}"),
        });
    }
    let exact = scenario.exact.clone().ok_or_else(|| SwweError::InvalidConfig {
        field: "scenario",
        reason: format!("{} has no exact solution", scenario.kind),
    })?;
    params.validate()?;

    let results = par_map(resolutions, |&n| -> Result<ConvergenceRow> {
        let grid = Grid::uniform(n, scenario.domain_length)?;
        let res = run(scenario, &grid, cfg, params)?;
        let t = res.final_state.t;
        let (h_error, u_error) = l2_error(&res.final_state, &*exact, &grid, t)?;
        let (h_error_nodal, u_error_nodal) = l2_error_nodal(&res.final_state, &*exact, &grid, t)?;
        Ok(ConvergenceRow {
            n,
            h_error,
            u_error,
            h_rate: None,
            u_rate: None,
            h_error_nodal,
            u_error_nodal,
        })
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    fill_rates(&mut rows);
    Ok(rows)
}

/// `sum_i |v_{i+1} - v_i|`
pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::mms_exact;

    #[test]
    fn exact_samples_have_zero_error() {
        let grid = Grid::uniform(16, 1.0).unwrap();
        let (h, u): (Vec<_>, Vec<_>) = grid.nodes().iter().map(|x| mms_exact(*x, 0.3)).unzip();
        let s = State::from_fields(&h, &u, 0.3).unwrap();
        assert_eq!(l2_error(&s, mms_exact, &grid, 0.3).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn constant_offset_error() {
        let grid = Grid::uniform(32, 1.0).unwrap();
        let s = State::from_fields(&[0.25; 33], &[0.0; 33], 0.0).unwrap();
        let (eh, eu) = l2_error(&s, |_, _| (0.0, 0.0), &grid, 0.0).unwrap();
        assert!((eh - 0.25).abs() < 1e-15);
        assert_eq!(eu, 0.0);
    }

    #[test]
    fn rates() {
        assert!((observed_rate(4e-2, 1e-2, 64, 128).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(observed_rate(0.0, 0.0, 64, 128), None);
        assert_eq!(observed_rate(1.0, 0.5, 128, 64), None);
    }

    #[test]
    fn first_row_has_no_rate() {
        let row = |n, e| ConvergenceRow {
            n,
            h_error: e,
            u_error: e,
            h_rate: Some(9.0),
            u_rate: Some(9.0),
            h_error_nodal: e,
            u_error_nodal: e,
        };
        let mut rows = vec![row(64, 1.0), row(128, 0.5)];
        fill_rates(&mut rows);
        assert_eq!(rows[0].h_rate, None);
        assert!((rows[1].u_rate.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn total_variation_examples() {
        let ramp: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        assert!((total_variation(&ramp) - 1.0).abs() < 1e-15);
        assert_eq!(total_variation(&[0.0, 0.0, 1.0, 1.0, 0.0]), 2.0);
        assert_eq!(total_variation(&[3.0]), 0.0);
    }

    #[test]
    fn rejects_bad_resolutions() {
        let cfg = FlowConfig::new(9.8, 1.0, 0.0).unwrap();
        let s = crate::scenarios::mms_scenario(&cfg);
        let p = RunParams::default();
        assert!(convergence_table(&s, &cfg, &p, &[]).is_err());
        assert!(convergence_table(&s, &cfg, &p, &[64, 32]).is_err());
    }
}
