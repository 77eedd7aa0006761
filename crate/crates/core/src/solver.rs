//! Semi-discrete system and explicit time integration.
//!
//! ```text
//!   dq/dt = (I (x) P)^{-1} [ -(M (x) Q) q + c_A (I (x) A) q + SAT ] + F
//! ```
//!
//! with `c_A = alpha/2` (or `alpha`, see [`DissipationScaling`]), integrated by
//! the classical four-stage Runge-Kutta method at a fixed CFL time step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};
use crate::model::{spectral_data, FlowConfig, SpectralData};
use crate::sat::{boundary_penalty, resolve_penalties, BoundaryData, PenaltyOverride, PenaltySet};
use crate::sbp::{build_operators_scaled, DissipationScaling, Grid, SbpOperators};
use crate::scenarios::Scenario;

/// Nodal forcing `(x, t) -> (F_h, F_u)`.
pub type Forcing = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Cell averages in component-major layout `[h_0..h_N, u_0..u_N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub data: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            data: vec![0.0; 2 * nodes],
            t: 0.0,
        }
    }

    pub fn from_fields(h: &[f64], u: &[f64], t: f64) -> Result<Self> {
        if h.len() != u.len() {
            return Err(SwweError::Shape {
                expected: h.len(),
                found: u.len(),
            });
        }
        let data = h.iter().chain(u).copied().collect();
        Ok(Self { data, t })
    }

    pub fn nodes(&self) -> usize {
        self.data.len() / 2
    }

    pub fn h(&self) -> &[f64] {
        &self.data[..self.nodes()]
    }

    pub fn u(&self) -> &[f64] {
        &self.data[self.nodes()..]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `dt = cr * min(dx) / (|U| + sqrt(gH))`
pub fn cfl_dt(grid: &Grid, cfg: &FlowConfig, cr: f64) -> Result<f64> {
    if !(cr > 0.0 && cr <= 1.0) {
        return Err(SwweError::InvalidConfig {
            field: "cr",
            reason: format!("CFL number must be in (0, 1], got {cr}"),
        });
    }
    Ok(cr * grid.min_width() / cfg.max_speed())
}

/// Everything needed to evaluate the semi-discrete right-hand side.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub spectral: SpectralData,
    pub grid: Grid,
    pub ops: SbpOperators,
    pub penalties: PenaltySet,
}

impl Discretization {
    /// Refuses penalty sets whose boundary layout or strengths do not match
    /// the flow regime.
    pub fn new(
        cfg: &FlowConfig,
        grid: Grid,
        ops: SbpOperators,
        penalties: PenaltySet,
    ) -> Result<Self> {
        if ops.len() != grid.len() {
            return Err(SwweError::Shape {
                expected: grid.len(),
                found: ops.len(),
            });
        }
        let spectral = spectral_data(cfg)?;
        penalties.validate(&spectral)?;
        Ok(Self {
            spectral,
            grid,
            ops,
            penalties,
        })
    }

    pub fn with_default_penalties(
        cfg: &FlowConfig,
        grid: Grid,
        alpha: f64,
        scaling: DissipationScaling,
    ) -> Result<Self> {
        Self::with_penalties(cfg, grid, alpha, scaling, &PenaltyOverride::default())
    }

    pub fn with_penalties(
        cfg: &FlowConfig,
        grid: Grid,
        alpha: f64,
        scaling: DissipationScaling,
        ov: &PenaltyOverride,
    ) -> Result<Self> {
        let sd = spectral_data(cfg)?;
        let pen = resolve_penalties(&sd, ov)?;
        let ops = build_operators_scaled(&grid, alpha, scaling)?;
        Self::new(cfg, grid, ops, pen)
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn flow(&self) -> &FlowConfig {
        &self.spectral.flow
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != 2 * self.nodes() {
            return Err(SwweError::Shape {
                expected: 2 * self.nodes(),
                found: len,
            });
        }
        Ok(())
    }

    /// `out = rhs(q, t)`; O(N).
    pub fn rhs_into(
        &self,
        q: &[f64],
        t: f64,
        data: &BoundaryData,
        forcing: Option<&Forcing>,
        out: &mut [f64],
    ) -> Result<()> {
        self.check_len(q.len())?;
        self.check_len(out.len())?;
        self.rhs_unchecked(q, t, data, forcing, out);
        Ok(())
    }

    fn rhs_unchecked(
        &self,
        q: &[f64],
        t: f64,
        data: &BoundaryData,
        forcing: Option<&Forcing>,
        out: &mut [f64],
    ) {
        let m = self.nodes();
        let n = m - 1;
        let FlowConfig {
            gravity: g,
            depth: hm,
            velocity: um,
        } = *self.flow();
        let ca = self.ops.dissipation_coefficient();
        let (h, u) = q.split_at(m);
        let (oh, ou) = out.split_at_mut(m);

        let mut node = |i: usize, qh: f64, qu: f64, ah: f64, au: f64| {
            oh[i] = -(um * qh + hm * qu) + ca * ah;
            ou[i] = -(g * qh + um * qu) + ca * au;
        };
        node(
            0,
            0.5 * (h[1] - h[0]),
            0.5 * (u[1] - u[0]),
            h[1] - h[0],
            u[1] - u[0],
        );
        for i in 1..n {
            node(
                i,
                0.5 * (h[i + 1] - h[i - 1]),
                0.5 * (u[i + 1] - u[i - 1]),
                h[i + 1] - 2.0 * h[i] + h[i - 1],
                u[i + 1] - 2.0 * u[i] + u[i - 1],
            );
        }
        node(
            n,
            0.5 * (h[n] - h[n - 1]),
            0.5 * (u[n] - u[n - 1]),
            h[n - 1] - h[n],
            u[n - 1] - u[n],
        );

        let (s0, sn) = boundary_penalty(
            &self.spectral,
            &self.penalties,
            (h[0], u[0]),
            (h[n], u[n]),
            data.eval(t),
        );
        oh[0] += s0[0];
        ou[0] += s0[1];
        oh[n] += sn[0];
        ou[n] += sn[1];

        let inv_p = self.ops.inv_norm();
        for i in 0..m {
            oh[i] *= inv_p[i];
            ou[i] *= inv_p[i];
        }
        if let Some(f) = forcing {
            for (i, x) in self.grid.nodes().iter().enumerate() {
                let (fh, fu) = f(*x, t);
                oh[i] += fh;
                ou[i] += fu;
            }
        }
    }

    pub fn rhs(
        &self,
        state: &State,
        data: &BoundaryData,
        forcing: Option<&Forcing>,
    ) -> Result<Vec<f64>> {
        let mut out = vec![0.0; state.data.len()];
        self.rhs_into(&state.data, state.t, data, forcing, &mut out)?;
        Ok(out)
    }

    /// `||q||^2_WP = q^T (W (x) P) q`
    pub fn energy(&self, q: &[f64]) -> f64 {
        discrete_energy(q, self.flow(), self.ops.norm())
    }

    /// `q^T (W (x) P) rhs(q)` for homogeneous data and no forcing.
    pub fn energy_rate(&self, q: &[f64]) -> Result<f64> {
        let mut r = vec![0.0; q.len()];
        self.rhs_into(q, 0.0, &BoundaryData::zero(), None, &mut r)?;
        let m = self.nodes();
        let p = self.ops.norm();
        let FlowConfig { gravity: g, depth: hm, .. } = *self.flow();
        Ok((0..m)
            .map(|i| p[i] * (g * q[i] * r[i] + hm * q[m + i] * r[m + i]))
            .sum())
    }
}

/// `sum_i |I_i| (g h_i^2 + H u_i^2)`
pub fn discrete_energy(q: &[f64], cfg: &FlowConfig, volumes: &[f64]) -> f64 {
    let m = volumes.len();
    let (h, u) = q.split_at(m);
    volumes
        .iter()
        .zip(h.iter().zip(u))
        .map(|(p, (hi, ui))| p * (cfg.gravity * hi * hi + cfg.depth * ui * ui))
        .sum()
}

/// Classical RK4 with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    steps: usize,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; len]),
            tmp: vec![0.0; len],
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance `y` from `t` to `t + dt`. `f(t, y, out)` is evaluated at the
    /// stage times `t, t + dt/2, t + dt/2, t + dt`.
    pub fn step<F>(&mut self, y: &mut [f64], t: f64, dt: f64, mut f: F) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if y.len() != self.tmp.len() {
            return Err(SwweError::Shape {
                expected: self.tmp.len(),
                found: y.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SwweError::InvalidConfig {
                field: "dt",
                reason: format!("time step must be positive, got {dt}"),
            });
        }
        let step = self.steps;
        let diverged = |stage| SwweError::Diverged { step, time: t, stage };
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        f(t, y, k1);
        if !all_finite(k1) {
            return Err(diverged(1));
        }
        axpy_into(tmp, y, 0.5 * dt, k1);
        f(t + 0.5 * dt, tmp, k2);
        if !all_finite(k2) {
            return Err(diverged(2));
        }
        axpy_into(tmp, y, 0.5 * dt, k2);
        f(t + 0.5 * dt, tmp, k3);
        if !all_finite(k3) {
            return Err(diverged(3));
        }
        axpy_into(tmp, y, dt, k3);
        f(t + dt, tmp, k4);
        if !all_finite(k4) {
            return Err(diverged(4));
        }
        let w = dt / 6.0;
        for i in 0..y.len() {
            y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !all_finite(y) {
            return Err(diverged(4));
        }
        self.steps += 1;
        Ok(())
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], a: f64, x: &[f64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + a * xi;
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One RK4 step of an arbitrary system, returning the new state.
pub fn rk4_step<F>(state: &State, dt: f64, f: F) -> Result<State>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut rk = Rk4::new(state.data.len());
    let mut data = state.data.clone();
    rk.step(&mut data, state.t, dt, f)?;
    Ok(State {
        data,
        t: state.t + dt,
    })
}

/// A discretization bundled with its data, its state and a time stepper.
pub struct Simulation {
    disc: Discretization,
    data: BoundaryData,
    forcing: Option<Forcing>,
    state: State,
    dt: f64,
    rk: Rk4,
}

impl Simulation {
    pub fn new(
        disc: Discretization,
        data: BoundaryData,
        forcing: Option<Forcing>,
        initial: State,
        cr: f64,
    ) -> Result<Self> {
        disc.check_len(initial.data.len())?;
        let dt = cfl_dt(&disc.grid, disc.flow(), cr)?;
        let rk = Rk4::new(initial.data.len());
        Ok(Self {
            disc,
            data,
            forcing,
            state: initial,
            dt,
            rk,
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.rk.steps()
    }

    pub fn energy(&self) -> f64 {
        self.disc.energy(&self.state.data)
    }

    /// Take one step of at most `dt`, stopping exactly at `limit`.
    pub fn step_toward(&mut self, limit: f64) -> Result<()> {
        let remaining = limit - self.state.t;
        if remaining <= 0.0 {
            return Ok(());
        }
        // absorb round-off so that we never take a sliver step
        let last = remaining <= self.dt * (1.0 + 1e-9);
        let dt = if last { remaining } else { self.dt };
        let disc = &self.disc;
        let data = &self.data;
        let forcing = self.forcing.as_ref();
        self.rk.step(&mut self.state.data, self.state.t, dt, |t, y, out| {
            disc.rhs_unchecked(y, t, data, forcing, out)
        })?;
        self.state.t = if last { limit } else { self.state.t + dt };
        Ok(())
    }

    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.state.t < t_target {
            self.step_toward(t_target)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub cr: f64,
    pub t_final: f64,
    pub alpha: f64,
    #[serde(default)]
    pub scaling: DissipationScaling,
    pub record_energy: bool,
    /// Record the energy every this many steps (and at the end).
    pub record_interval: usize,
    /// Extra output times; `t_final` is always included.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub penalties: PenaltyOverride,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            cr: 0.25,
            t_final: 0.1,
            alpha: 0.0,
            scaling: DissipationScaling::Half,
            record_energy: true,
            record_interval: 1,
            snapshots: Vec::new(),
            penalties: PenaltyOverride::default(),
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cr > 0.0 && self.cr <= 1.0) {
            return Err(SwweError::InvalidConfig {
                field: "cr",
                reason: format!("must be in (0, 1], got {}", self.cr),
            });
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(SwweError::InvalidConfig {
                field: "t_final",
                reason: format!("must be finite and >= 0, got {}", self.t_final),
            });
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(SwweError::InvalidConfig {
                field: "alpha",
                reason: format!("must be finite and >= 0, got {}", self.alpha),
            });
        }
        if self.record_interval == 0 {
            return Err(SwweError::InvalidConfig {
                field: "record_interval",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(bad) = self
            .snapshots
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0 && **t <= self.t_final))
        {
            return Err(SwweError::InvalidConfig {
                field: "snapshots",
                reason: format!("snapshot time {bad} outside [0, t_final]"),
            });
        }
        Ok(())
    }

    fn output_times(&self) -> Vec<f64> {
        let mut times = self.snapshots.clone();
        times.push(self.t_final);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: State,
    /// States at the requested snapshot times, in time order (the final time
    /// is always the last entry).
    pub snapshots: Vec<State>,
    /// `(t, ||q||^2_WP)` pairs.
    pub energy: Vec<(f64, f64)>,
    pub steps: usize,
    pub dt: f64,
}

/// Integrate `scenario` on `grid` with the default penalties, adjusted by
/// `params.penalties`.
pub fn run(scenario: &Scenario, grid: &Grid, cfg: &FlowConfig, params: &RunParams) -> Result<RunResult> {
    params.validate()?;
    let disc = Discretization::with_penalties(
        cfg,
        grid.clone(),
        params.alpha,
        params.scaling,
        &params.penalties,
    )?;
    run_with(disc, scenario, params)
}

/// Integrate with a prepared discretization (for custom penalties).
pub fn run_with(disc: Discretization, scenario: &Scenario, params: &RunParams) -> Result<RunResult> {
    params.validate()?;
    let data = scenario.boundary_data(&disc.spectral)?;
    let initial = scenario.initial_state(&disc.grid);
    let mut sim = Simulation::new(disc, data, scenario.forcing.clone(), initial, params.cr)?;

    let mut energy = Vec::new();
    if params.record_energy {
        energy.push((0.0, sim.energy()));
    }
    let mut snapshots = Vec::new();
    for target in params.output_times() {
        while sim.time() < target {
            sim.step_toward(target)?;
            let landed = sim.time() >= target;
            if params.record_energy
                && (sim.steps() % params.record_interval == 0 || landed)
                && energy.last().map(|e| e.0) != Some(sim.time())
            {
                energy.push((sim.time(), sim.energy()));
            }
        }
        snapshots.push(sim.state().clone());
    }
    Ok(RunResult {
        final_state: sim.state().clone(),
        snapshots,
        energy,
        steps: sim.steps(),
        dt: sim.dt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::build_operators;

    const G: f64 = 9.8;

    fn disc(m: f64, n: usize, alpha: f64) -> Discretization {
        let cfg = FlowConfig::with_froude(G, 1.0, m).unwrap();
        Discretization::with_default_penalties(
            &cfg,
            Grid::uniform(n, 1.0).unwrap(),
            alpha,
            DissipationScaling::Half,
        )
        .unwrap()
    }

    #[test]
    fn constant_state_interior_rhs_vanishes() {
        let d = disc(0.5, 8, 0.0);
        let mut q = vec![0.7; 9];
        q.extend(vec![-0.3; 9]);
        let state = State { data: q, t: 0.0 };
        let r = d.rhs(&state, &BoundaryData::zero(), None).unwrap();
        for i in 1..8 {
            assert!(r[i].abs() < 1e-13 && r[9 + i].abs() < 1e-13);
        }
    }

    #[test]
    fn zero_state_rhs_is_zero() {
        for m in [-2.0, -1.0, 0.5, 1.0, 2.0] {
            let d = disc(m, 6, 0.3);
            let r = d.rhs(&State::zeros(7), &BoundaryData::zero(), None).unwrap();
            assert!(r.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn rhs_shape_mismatch() {
        let d = disc(0.5, 6, 0.0);
        assert!(matches!(
            d.rhs(&State::zeros(5), &BoundaryData::zero(), None),
            Err(SwweError::Shape { .. })
        ));
    }

    #[test]
    fn cfl_examples() {
        let c0 = G.sqrt();
        let cfg = FlowConfig::new(G, 1.0, 0.5 * c0).unwrap();
        let grid = Grid::uniform(64, 1.0).unwrap();
        let dt = cfl_dt(&grid, &cfg, 0.25).unwrap();
        let expected = 0.25 * (1.0 / 64.0) / (1.5 * c0);
        assert!((dt - expected).abs() < 1e-18);
        assert!((dt - 8.318e-4).abs() < 1e-6);

        let rest = FlowConfig::new(G, 1.0, 0.0).unwrap();
        let dt = cfl_dt(&grid, &rest, 0.5).unwrap();
        assert!((dt - 0.5 / 64.0 / c0).abs() < 1e-18);

        let g = crate::sbp::build_grid(3, 1.0, crate::sbp::Spacing::Widths(vec![0.5, 0.3, 0.2])).unwrap();
        let dt = cfl_dt(&g, &rest, 1.0).unwrap();
        assert!((dt - 0.2 / c0).abs() < 1e-15);

        assert!(cfl_dt(&grid, &cfg, 0.0).is_err());
        assert!(cfl_dt(&grid, &cfg, 1.5).is_err());
    }

    #[test]
    fn rk4_fixed_point() {
        let s = State {
            data: vec![1.0, -2.0, 3.0],
            t: 0.0,
        };
        let out = rk4_step(&s, 0.1, |_, _, o| o.fill(0.0)).unwrap();
        assert_eq!(out.data, s.data);
        assert!((out.t - 0.1).abs() < 1e-16);
    }

    #[test]
    fn rk4_scalar_decay() {
        let s = State { data: vec![1.0], t: 0.0 };
        let out = rk4_step(&s, 0.1, |_, y, o| o[0] = -y[0]).unwrap();
        let exact = (-0.1f64).exp();
        assert!((exact - 0.904_837_418_035_96).abs() < 1e-14);
        // RK4 amplification factor 1 - z + z^2/2 - z^3/6 + z^4/24
        let z: f64 = 0.1;
        let r = 1.0 - z + z * z / 2.0 - z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((out.data[0] - r).abs() < 1e-15);
        // leading local error term z^5/120 ~ 8.3e-8
        let err = (out.data[0] - exact).abs();
        assert!(err < z.powi(5) / 120.0 && err > 0.9 * z.powi(5) / 120.0 * (-z).exp());
    }

    #[test]
    fn rk4_stage_times() {
        let mut seen = Vec::new();
        let s = State { data: vec![0.0], t: 1.0 };
        rk4_step(&s, 0.5, |t, _, o| {
            seen.push(t);
            o[0] = 0.0;
        })
        .unwrap();
        assert_eq!(seen, vec![1.0, 1.25, 1.25, 1.5]);
    }

    #[test]
    fn rk4_reports_divergence() {
        let mut rk = Rk4::new(1);
        let mut y = vec![1.0];
        let err = rk
            .step(&mut y, 0.0, 0.1, |_, _, o| o[0] = f64::NAN)
            .unwrap_err();
        assert!(matches!(err, SwweError::Diverged { step: 0, stage: 1, .. }));
    }

    #[test]
    fn energy_examples() {
        let cfg = FlowConfig::new(G, 1.0, 0.0).unwrap();
        let grid = Grid::uniform(16, 1.0).unwrap();
        let ops = build_operators(&grid, 0.0).unwrap();
        assert_eq!(discrete_energy(&[0.0; 34], &cfg, ops.norm()), 0.0);
        let mut q = vec![1.0; 17];
        q.extend(vec![0.0; 17]);
        assert!((discrete_energy(&q, &cfg, ops.norm()) - G).abs() < 1e-13);
    }

    #[test]
    fn simulation_lands_on_target() {
        let d = disc(0.5, 16, 0.0);
        let mut sim = Simulation::new(d, BoundaryData::zero(), None, State::zeros(17), 0.25).unwrap();
        sim.advance_to(0.0123).unwrap();
        assert_eq!(sim.time(), 0.0123);
        let full = (0.0123 / sim.dt()).ceil() as usize;
        assert_eq!(sim.steps(), full);
    }

    #[test]
    fn run_params_validation() {
        let mut p = RunParams::default();
        assert!(p.validate().is_ok());
        p.alpha = -1.0;
        assert!(p.validate().is_err());
        let p = RunParams {
            snapshots: vec![0.5],
            t_final: 0.1,
            ..RunParams::default()
        };
        assert!(p.validate().is_err());
        let p = RunParams {
            record_interval: 0,
            ..RunParams::default()
        };
        assert!(p.validate().is_err());
    }
}
