//! Experiment definitions: pulse propagation through an open channel and a
//! manufactured smooth solution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};
use crate::model::{classify_regime, FlowConfig, FlowKind, SpectralData, CRITICAL_TOLERANCE};
use crate::sat::BoundaryData;
use crate::sbp::Grid;
use crate::solver::{Forcing, State};

/// `(x, t) -> (h, u)`
pub type Field = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
/// `t -> value`
pub type Signal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SmoothPulse,
    StepPulse,
    Mms,
    ZeroRandom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::SmoothPulse,
        ScenarioKind::StepPulse,
        ScenarioKind::Mms,
        ScenarioKind::ZeroRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SmoothPulse => "smooth-pulse",
            ScenarioKind::StepPulse => "step-pulse",
            ScenarioKind::Mms => "mms",
            ScenarioKind::ZeroRandom => "zero-random",
        }
    }

    /// `seed` only matters for [`ScenarioKind::ZeroRandom`].
    pub fn build(self, cfg: &FlowConfig, seed: u64) -> Result<Scenario> {
        match self {
            ScenarioKind::SmoothPulse => smooth_pulse_scenario(cfg),
            ScenarioKind::StepPulse => step_pulse_scenario(cfg),
            ScenarioKind::Mms => Ok(mms_scenario(cfg)),
            ScenarioKind::ZeroRandom => Ok(zero_random_scenario(seed)),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = SwweError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SwweError::InvalidConfig {
                field: "scenario",
                reason: format!(
                    "unknown scenario `{s}` (expected smooth-pulse, step-pulse, mms or zero-random)"
                ),
            })
    }
}

#[derive(Clone)]
pub enum InitialData {
    Profile(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
    /// Independent uniform samples in `[-1, 1]` at every node.
    Random { seed: u64 },
}

/// Initial data, transmissive boundary signals, optional forcing and optional
/// exact solution on `[0, domain_length]`.
///
/// `g1` is `(h + k u)/2` and `g2` is `(h - k u)/2` with `k = sqrt(H/g)`, each
/// taken at the end where the regime needs it.
#[derive(Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub domain_length: f64,
    pub initial: InitialData,
    pub g1: Signal,
    pub g2: Signal,
    /// Zero boundary data; skips the data closure entirely.
    pub homogeneous: bool,
    pub forcing: Option<Forcing>,
    pub exact: Option<Field>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("kind", &self.kind)
            .field("domain_length", &self.domain_length)
            .field("homogeneous", &self.homogeneous)
            .field("forcing", &self.forcing.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Scenario {
    pub fn initial_state(&self, grid: &Grid) -> State {
        let m = grid.len();
        match &self.initial {
            InitialData::Profile(f) => {
                let mut data = vec![0.0; 2 * m];
                for (i, x) in grid.nodes().iter().enumerate() {
                    let (h, u) = f(*x);
                    data[i] = h;
                    data[m + i] = u;
                }
                State { data, t: 0.0 }
            }
            InitialData::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let data = (0..2 * m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                State { data, t: 0.0 }
            }
        }
    }

    pub fn boundary_data(&self, sd: &SpectralData) -> Result<BoundaryData> {
        if self.homogeneous {
            return Ok(BoundaryData::zero());
        }
        let (g1, g2) = (self.g1.clone(), self.g2.clone());
        BoundaryData::from_transmissive(sd, move |t| g1(t), move |t| g2(t))
    }

    pub fn exact_at(&self, x: f64, t: f64) -> Option<(f64, f64)> {
        self.exact.as_ref().map(|f| f(x, t))
    }

    /// Scale used to plot against `x / (U + sqrt(gH))`.
    pub fn x_scale(cfg: &FlowConfig) -> f64 {
        cfg.velocity + cfg.wave_speed()
    }
}

fn transmissive_k(cfg: &FlowConfig) -> f64 {
    (cfg.depth / cfg.gravity).sqrt()
}

fn pulse(cfg: &FlowConfig, kind: ScenarioKind, g1: fn(f64) -> f64) -> Result<Scenario> {
    if cfg.velocity.is_nan() || cfg.velocity <= 0.0 {
        return Err(SwweError::InvalidConfig {
            field: "velocity",
            reason: format!(
                "pulse scenarios need inflow at x = 0 (U > 0), got U = {}",
                cfg.velocity
            ),
        });
    }
    let speed = cfg.velocity + cfg.wave_speed();
    let k = transmissive_k(cfg);
    let exact: Field = Arc::new(move |x, t| {
        let h = g1(t - x / speed);
        (h, h / k)
    });
    Ok(Scenario {
        kind,
        domain_length: 5.0 * speed,
        initial: InitialData::Profile(Arc::new(|_| (0.0, 0.0))),
        g1: Arc::new(g1),
        g2: Arc::new(|_| 0.0),
        homogeneous: false,
        forcing: None,
        exact: Some(exact),
    })
}

/// `sin^4(pi t)` on `[0, 1]`, zero elsewhere.
pub fn smooth_pulse(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        (PI * t).sin().powi(4)
    } else {
        0.0
    }
}

/// Indicator of `(0, 1]`.
pub fn step_pulse(t: f64) -> f64 {
    if t > 0.0 && t <= 1.0 {
        1.0
    } else {
        0.0
    }
}

pub fn smooth_pulse_scenario(cfg: &FlowConfig) -> Result<Scenario> {
    pulse(cfg, ScenarioKind::SmoothPulse, smooth_pulse)
}

pub fn step_pulse_scenario(cfg: &FlowConfig) -> Result<Scenario> {
    pulse(cfg, ScenarioKind::StepPulse, step_pulse)
}

/// `h = cos(2 pi t) sin(6 pi x)`, `u = sin(2 pi t) cos(4 pi x)`
pub fn mms_exact(x: f64, t: f64) -> (f64, f64) {
    let tt = 2.0 * PI * t;
    (tt.cos() * (6.0 * PI * x).sin(), tt.sin() * (4.0 * PI * x).cos())
}

/// Forcing that makes [`mms_exact`] a solution of the forced system.
pub fn mms_forcing(cfg: &FlowConfig, x: f64, t: f64) -> (f64, f64) {
    let FlowConfig {
        gravity: g,
        depth: hm,
        velocity: um,
    } = *cfg;
    let (st, ct) = (2.0 * PI * t).sin_cos();
    let (s6, c6) = (6.0 * PI * x).sin_cos();
    let (s4, c4) = (4.0 * PI * x).sin_cos();
    let fh = -2.0 * PI * st * s6 + 6.0 * PI * um * ct * c6 - 4.0 * PI * hm * st * s4;
    let fu = 2.0 * PI * ct * c4 + 6.0 * PI * g * ct * c6 - 4.0 * PI * um * st * s4;
    (fh, fu)
}

/// Manufactured solution on `[0, 1]`.
///
/// Sub-critical and critical flow take `g1` at `x = 0` and `g2` at `x = 1`;
/// super-critical flow takes both at the inflow end.
pub fn mms_scenario(cfg: &FlowConfig) -> Scenario {
    let c = *cfg;
    let k = transmissive_k(cfg);
    let regime = classify_regime(cfg, CRITICAL_TOLERANCE);
    let (x1, x2) = match regime.kind {
        FlowKind::SuperCritical if cfg.velocity < 0.0 => (1.0, 1.0),
        FlowKind::SuperCritical => (0.0, 0.0),
        _ => (0.0, 1.0),
    };
    let g1: Signal = Arc::new(move |t| {
        let (h, u) = mms_exact(x1, t);
        0.5 * (h + k * u)
    });
    let g2: Signal = Arc::new(move |t| {
        let (h, u) = mms_exact(x2, t);
        0.5 * (h - k * u)
    });
    Scenario {
        kind: ScenarioKind::Mms,
        domain_length: 1.0,
        initial: InitialData::Profile(Arc::new(|x| mms_exact(x, 0.0))),
        g1,
        g2,
        homogeneous: false,
        forcing: Some(Arc::new(move |x, t| mms_forcing(&c, x, t))),
        exact: Some(Arc::new(mms_exact)),
    }
}

/// Random initial data, zero boundary data, no forcing, unit domain.
pub fn zero_random_scenario(seed: u64) -> Scenario {
    Scenario {
        kind: ScenarioKind::ZeroRandom,
        domain_length: 1.0,
        initial: InitialData::Random { seed },
        g1: Arc::new(|_| 0.0),
        g2: Arc::new(|_| 0.0),
        homogeneous: true,
        forcing: None,
        exact: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reflection_coefficients, spectral_data};

    const G: f64 = 9.8;

    fn cfg(m: f64) -> FlowConfig {
        FlowConfig::with_froude(G, 1.0, m).unwrap()
    }

    #[test]
    fn pulse_signals() {
        assert!((smooth_pulse(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(smooth_pulse(1.5), 0.0);
        assert_eq!(step_pulse(0.5), 1.0);
        assert_eq!(step_pulse(1.5), 0.0);
        assert_eq!(step_pulse(0.0), 0.0);
        assert_eq!(step_pulse(1.0), 1.0);
    }

    #[test]
    fn pulse_rejects_nonpositive_velocity() {
        assert!(smooth_pulse_scenario(&cfg(0.0)).is_err());
        assert!(step_pulse_scenario(&cfg(-0.5)).is_err());
    }

    #[test]
    fn pulse_is_causal() {
        let c = cfg(0.5);
        let s = smooth_pulse_scenario(&c).unwrap();
        let speed = Scenario::x_scale(&c);
        assert!((s.domain_length - 5.0 * speed).abs() < 1e-14);
        let (h, u) = s.exact_at(2.0 * speed, 1.5).unwrap();
        assert_eq!((h, u), (0.0, 0.0));
    }

    #[test]
    fn step_exact_is_transported_indicator() {
        let c = cfg(0.5);
        let s = step_pulse_scenario(&c).unwrap();
        let speed = Scenario::x_scale(&c);
        let x = 1.3;
        for t in [0.1, 0.5, 1.0, 1.2, 1.5, 2.0, 2.4, 3.0] {
            let tau = t - x / speed;
            let expected = if tau > 0.0 && tau <= 1.0 { 1.0 } else { 0.0 };
            assert_eq!(s.exact_at(x, t).unwrap().0, expected);
        }
    }

    /// Chain rule on `h = f(t - x/a)`, `u = h/k`.
    #[test]
    fn pulse_satisfies_homogeneous_system() {
        let c = cfg(0.5);
        let a = Scenario::x_scale(&c);
        let k = (c.depth / c.gravity).sqrt();
        let df = |tau: f64| 4.0 * PI * (PI * tau).sin().powi(3) * (PI * tau).cos();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = rng.gen_range(0.0..5.0 * a);
            let t = x / a + rng.gen_range(0.01..0.99);
            let d = df(t - x / a);
            let (ht, hx) = (d, -d / a);
            let (ut, ux) = (ht / k, hx / k);
            assert!((ht + c.velocity * hx + c.depth * ux).abs() < 1e-8);
            assert!((ut + c.gravity * hx + c.velocity * ux).abs() < 1e-8);
        }
    }

    #[test]
    fn mms_initial_and_boundary_values() {
        let s = mms_scenario(&cfg(0.5));
        let (h, u) = mms_exact(0.3, 0.0);
        assert!((h - (6.0 * PI * 0.3).sin()).abs() < 1e-15);
        assert_eq!(u, 0.0);
        assert_eq!((s.g1)(0.0), 0.0);
    }

    /// Central differences of the exact solution against the analytic forcing.
    #[test]
    fn mms_forcing_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let c = cfg(m);
            for _ in 0..100 {
                let x = rng.gen_range(0.0..1.0);
                let t = rng.gen_range(0.0..1.0);
                let e = 1e-5;
                let (hxp, uxp) = mms_exact(x + e, t);
                let (hxm, uxm) = mms_exact(x - e, t);
                let (htp, utp) = mms_exact(x, t + e);
                let (htm, utm) = mms_exact(x, t - e);
                let (hx, ux) = ((hxp - hxm) / (2.0 * e), (uxp - uxm) / (2.0 * e));
                let (ht, ut) = ((htp - htm) / (2.0 * e), (utp - utm) / (2.0 * e));
                let (fh, fu) = mms_forcing(&c, x, t);
                let rh = ht + c.velocity * hx + c.depth * ux - fh;
                let ru = ut + c.gravity * hx + c.velocity * ux - fu;
                // truncation O(e^2 * (6 pi)^3 * |coef|)
                assert!(rh.abs() < 1e-5 * (1.0 + c.velocity.abs()), "{rh}");
                assert!(ru.abs() < 1e-5 * (c.gravity + c.velocity.abs()), "{ru}");
            }
        }
    }

    #[test]
    fn subcritical_data_matches_boundary_operator_on_exact_solution() {
        let c = cfg(0.5);
        let sd = spectral_data(&c).unwrap();
        let rc = reflection_coefficients(&c).unwrap();
        let s = mms_scenario(&c);
        let data = s.boundary_data(&sd).unwrap();
        for t in [0.0, 0.013, 0.1, 0.37, 0.9] {
            let (b1, b2) = data.eval(t);
            let (h0, u0) = mms_exact(0.0, t);
            let w0 = sd.to_characteristic(h0, u0);
            assert!((b1 - (w0.w1 - rc.gamma0 * w0.w2)).abs() < 1e-12);
            let (hl, ul) = mms_exact(1.0, t);
            let wl = sd.to_characteristic(hl, ul);
            assert!((b2 - (wl.w2 - rc.gamma1 * wl.w1)).abs() < 1e-12);
        }
    }

    #[test]
    fn inflow_data_matches_characteristics_on_exact_solution() {
        for m in [1.0, -1.0, 2.0, -2.0] {
            let c = cfg(m);
            let sd = spectral_data(&c).unwrap();
            let data = mms_scenario(&c).boundary_data(&sd).unwrap();
            let x = if m > 0.0 { 0.0 } else { 1.0 };
            for t in [0.02, 0.3, 0.71] {
                let (b1, b2) = data.eval(t);
                let (h, u) = mms_exact(x, t);
                let w = sd.to_characteristic(h, u);
                match (sd.regime.kind, m > 0.0) {
                    (FlowKind::Critical, true) => assert!((b1 - w.w1).abs() < 1e-12),
                    (FlowKind::Critical, false) => assert!((b2 - w.w2).abs() < 1e-12),
                    _ => {
                        assert!((b1 - w.w1).abs() < 1e-12);
                        assert!((b2 - w.w2).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn random_initial_data_is_seeded() {
        let g = Grid::uniform(8, 1.0).unwrap();
        let a = zero_random_scenario(5).initial_state(&g);
        let b = zero_random_scenario(5).initial_state(&g);
        let c = zero_random_scenario(6).initial_state(&g);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.data.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn scenario_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("dam-break".parse::<ScenarioKind>().is_err());
    }
}
