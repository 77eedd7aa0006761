//! Continuous model of the linearized shallow water system
//!
//! ```text
//!   h_t + U h_x + H u_x = 0
//!   u_t + g h_x + U u_x = 0        q_t + M q_x = 0,  M = [[U, H], [g, U]]
//! ```
//!
//! The diagonal weight `W = diag(g, H)` symmetrizes the flux matrix,
//! `Mt = W M = [[gU, gH], [gH, HU]]`, and the eigen-decomposition
//! `Mt = gH * S diag(lambda1, lambda2) S^T` yields the characteristic variables
//! `w = S^T q` that decide how many boundary conditions go where.
//!
//! All 2x2 algebra is closed form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};

/// Relative tolerance on `|U^2 - gH| / gH` below which a flow is critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Slack allowed when checking the reflection coefficient bounds.
const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// Physical constants of the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
    /// Mean water depth `H` (m).
    pub depth: f64,
    /// Mean velocity `U` (m/s), any sign.
    pub velocity: f64,
}

impl FlowConfig {
    pub fn new(gravity: f64, depth: f64, velocity: f64) -> Result<Self> {
        if !(gravity.is_finite() && gravity > 0.0) {
            return Err(SwweError::InvalidConfig {
                field: "g",
                reason: format!("must be finite and positive, got {gravity}"),
            });
        }
        if !(depth.is_finite() && depth > 0.0) {
            return Err(SwweError::InvalidConfig {
                field: "depth",
                reason: format!("must be finite and positive, got {depth}"),
            });
        }
        if !velocity.is_finite() {
            return Err(SwweError::InvalidConfig {
                field: "velocity",
                reason: format!("must be finite, got {velocity}"),
            });
        }
        let cfg = Self { gravity, depth, velocity };
        if !cfg.froude_sq().is_finite() {
            return Err(SwweError::InvalidConfig {
                field: "velocity",
                reason: "U^2/(gH) overflows".into(),
            });
        }
        Ok(cfg)
    }

    /// Flow with `U = multiple * sqrt(gH)`.
    ///
    /// `multiple = 1` is constructed so that it classifies as critical.
    pub fn with_froude(gravity: f64, depth: f64, multiple: f64) -> Result<Self> {
        let c0 = (gravity * depth).sqrt();
        Self::new(gravity, depth, multiple * c0)
    }

    /// Gravity wave speed `sqrt(gH)`.
    pub fn wave_speed(&self) -> f64 {
        (self.gravity * self.depth).sqrt()
    }

    /// Fastest characteristic speed `|U| + sqrt(gH)`.
    pub fn max_speed(&self) -> f64 {
        self.velocity.abs() + self.wave_speed()
    }

    pub fn froude_sq(&self) -> f64 {
        self.velocity * self.velocity / (self.gravity * self.depth)
    }

    /// Flux matrix `M`.
    pub fn flux_matrix(&self) -> [[f64; 2]; 2] {
        let (g, h, u) = (self.gravity, self.depth, self.velocity);
        [[u, h], [g, u]]
    }

    /// Diagonal of the symmetrizer `W = diag(g, H)`.
    pub fn weight(&self) -> [f64; 2] {
        [self.gravity, self.depth]
    }

    /// `W M`, symmetric by construction.
    pub fn symmetrized(&self) -> [[f64; 2]; 2] {
        let (g, h, u) = (self.gravity, self.depth, self.velocity);
        [[g * u, g * h], [g * h, h * u]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    SubCritical,
    Critical,
    SuperCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Positive,
    Negative,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Regime {
    pub kind: FlowKind,
    pub direction: Direction,
}

impl Regime {
    /// Number of boundary conditions required at `(x = 0, x = L)`.
    pub fn boundary_counts(&self) -> (usize, usize) {
        match (self.kind, self.direction) {
            (FlowKind::SubCritical, _) => (1, 1),
            (FlowKind::Critical, Direction::Negative) => (0, 1),
            (FlowKind::Critical, _) => (1, 0),
            (FlowKind::SuperCritical, Direction::Negative) => (0, 2),
            (FlowKind::SuperCritical, _) => (2, 0),
        }
    }

    /// Short name used in CSV output and on the command line.
    pub fn label(&self) -> &'static str {
        match self.kind {
            FlowKind::SubCritical => "sub",
            FlowKind::Critical => "critical",
            FlowKind::SuperCritical => "super",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            FlowKind::SubCritical => "sub-critical",
            FlowKind::Critical => "critical",
            FlowKind::SuperCritical => "super-critical",
        };
        let dir = match self.direction {
            Direction::Positive => "U > 0",
            Direction::Negative => "U < 0",
            Direction::Zero => "U = 0",
        };
        write!(f, "{kind} ({dir})")
    }
}

/// Classify by the sign of `gH - U^2`; `|U^2 - gH| <= tol * gH` is critical.
pub fn classify_regime(cfg: &FlowConfig, tol: f64) -> Regime {
    let gh = cfg.gravity * cfg.depth;
    let u2 = cfg.velocity * cfg.velocity;
    let kind = if (u2 - gh).abs() <= tol * gh {
        FlowKind::Critical
    } else if u2 < gh {
        FlowKind::SubCritical
    } else {
        FlowKind::SuperCritical
    };
    let direction = if cfg.velocity > 0.0 {
        Direction::Positive
    } else if cfg.velocity < 0.0 {
        Direction::Negative
    } else {
        Direction::Zero
    };
    Regime { kind, direction }
}

/// Characteristic variables `w = S^T q` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicPair {
    pub w1: f64,
    pub w2: f64,
}

/// Symmetrizer, eigenvalues and orthonormal eigenvectors of `W M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub flow: FlowConfig,
    pub regime: Regime,
    /// Eigenvalues of `W M` scaled by `1/(gH)`; `lambda1 >= lambda2`.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Columns are the eigenvectors `(lambda_i - U/g, 1) / n_i`.
    pub s: [[f64; 2]; 2],
    pub c: f64,
    pub d: f64,
    /// `lambda1 - U/g` and `lambda2 - U/g`; `x1 > 0 > x2`, `x1 * x2 = -1`.
    pub x1: f64,
    pub x2: f64,
}

impl SpectralData {
    pub fn weight(&self) -> [f64; 2] {
        self.flow.weight()
    }

    pub fn mtilde(&self) -> [[f64; 2]; 2] {
        self.flow.symmetrized()
    }

    /// `gH`, the scaling between `W M` and `diag(lambda)`.
    pub fn gh(&self) -> f64 {
        self.flow.gravity * self.flow.depth
    }

    pub fn to_characteristic(&self, h: f64, u: f64) -> CharacteristicPair {
        let s = &self.s;
        CharacteristicPair {
            w1: s[0][0] * h + s[1][0] * u,
            w2: s[0][1] * h + s[1][1] * u,
        }
    }

    pub fn from_characteristic(&self, w: CharacteristicPair) -> (f64, f64) {
        let s = &self.s;
        (
            s[0][0] * w.w1 + s[0][1] * w.w2,
            s[1][0] * w.w1 + s[1][1] * w.w2,
        )
    }
}

pub fn spectral_data(cfg: &FlowConfig) -> Result<SpectralData> {
    let FlowConfig { gravity: g, depth: h, velocity: u } = *cfg;
    let gh = g * h;
    let c0 = gh.sqrt();
    let regime = classify_regime(cfg, CRITICAL_TOLERANCE);

    // lambda^2 - sigma*lambda + p = 0, with discriminant sigma^2 - 4p = s^2 + 4
    let sigma = u * (g + h) / gh;
    let s = u * (g - h) / gh;
    let p = (u - c0) * (u + c0) / gh;
    let disc = s * s + 4.0;
    if !(disc.is_finite() && sigma.is_finite() && p.is_finite()) || disc < 0.0 {
        return Err(SwweError::Inconsistent(format!(
            "eigenvalue discriminant is not a finite non-negative number (g={g}, H={h}, U={u})"
        )));
    }
    let root = disc.sqrt();

    // Large-magnitude root directly, the other from the product.
    let (mut lambda1, mut lambda2) = if u >= 0.0 {
        let l1 = 0.5 * (sigma + root);
        (l1, p / l1)
    } else {
        let l2 = 0.5 * (sigma - root);
        (p / l2, l2)
    };
    if regime.kind == FlowKind::Critical {
        match regime.direction {
            Direction::Negative => lambda1 = 0.0,
            _ => lambda2 = 0.0,
        }
    }

    // x = lambda - U/g solves x^2 - s x - 1 = 0
    let (x1, x2) = if s >= 0.0 {
        let x1 = 0.5 * (s + root);
        (x1, -1.0 / x1)
    } else {
        let x2 = 0.5 * (s - root);
        (-1.0 / x2, x2)
    };
    let c = x1.hypot(1.0);
    let d = x2.hypot(1.0);
    let sd = SpectralData {
        flow: *cfg,
        regime,
        lambda1,
        lambda2,
        s: [[x1 / c, x2 / d], [1.0 / c, 1.0 / d]],
        c,
        d,
        x1,
        x2,
    };
    let all_finite = [lambda1, lambda2, x1, x2, c, d]
        .iter()
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(SwweError::Inconsistent(format!(
            "non-finite spectral data for g={g}, H={h}, U={u}"
        )));
    }
    Ok(sd)
}

/// Reflection coefficients of the sub-critical conditions
/// `w1 - gamma0 w2 = b1` at `x = 0` and `w2 - gamma1 w1 = b2` at `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCoefficients {
    pub gamma0: f64,
    pub gamma1: f64,
}

impl ReflectionCoefficients {
    /// Check `gamma0^2 <= -lambda2/lambda1` and `gamma1^2 <= -lambda1/lambda2`.
    pub fn check_admissible(&self, sd: &SpectralData) -> Result<()> {
        if sd.regime.kind != FlowKind::SubCritical {
            return Err(SwweError::Regime {
                expected: "sub-critical",
                found: sd.regime,
            });
        }
        let bound0 = -sd.lambda2 / sd.lambda1;
        let bound1 = -sd.lambda1 / sd.lambda2;
        if !(self.gamma0.is_finite() && self.gamma1.is_finite()) {
            return Err(SwweError::Inadmissible(
                "reflection coefficients must be finite".into(),
            ));
        }
        if self.gamma0 * self.gamma0 > bound0 * (1.0 + ADMISSIBILITY_SLACK) {
            return Err(SwweError::Inadmissible(format!(
                "gamma0^2 = {} exceeds -lambda2/lambda1 = {bound0}",
                self.gamma0 * self.gamma0
            )));
        }
        if self.gamma1 * self.gamma1 > bound1 * (1.0 + ADMISSIBILITY_SLACK) {
            return Err(SwweError::Inadmissible(format!(
                "gamma1^2 = {} exceeds -lambda1/lambda2 = {bound1}",
                self.gamma1 * self.gamma1
            )));
        }
        Ok(())
    }
}

/// `sqrt(H/g)`, the velocity weight in the transmissive data `(h +- k u) / 2`.
fn transmissive_weight(cfg: &FlowConfig) -> f64 {
    (cfg.depth / cfg.gravity).sqrt()
}

/// Coefficients that turn the transmissive conditions
/// `(h + k u)/2 = g1` at `x = 0` and `(h - k u)/2 = g2` at `x = L`
/// (`k = sqrt(H/g)`) into reflection form.
pub fn reflection_coefficients(cfg: &FlowConfig) -> Result<ReflectionCoefficients> {
    let sd = spectral_data(cfg)?;
    if sd.regime.kind != FlowKind::SubCritical {
        return Err(SwweError::Regime {
            expected: "sub-critical",
            found: sd.regime,
        });
    }
    let k = transmissive_weight(cfg);
    // h + k u = (x1 + k)/c w1 + (x2 + k)/d w2
    // h - k u = (x1 - k)/c w1 + (x2 - k)/d w2
    let gamma0 = -((sd.x2 + k) / sd.d) / ((sd.x1 + k) / sd.c);
    let gamma1 = -((sd.x1 - k) / sd.c) / ((sd.x2 - k) / sd.d);
    let rc = ReflectionCoefficients { gamma0, gamma1 };
    rc.check_admissible(&sd).map_err(|e| {
        SwweError::Inadmissible(format!("derived reflection coefficients: {e}"))
    })?;
    Ok(rc)
}

/// Alternate closed form with the `sqrt(g/H)` factor and `-1/+1` offsets:
///
/// ```text
/// gamma0 = -(1/d)(sqrt(g/H)(lambda2 - U/g) - 1) / ((1/c)(sqrt(g/H)(lambda1 - U/g) - 1))
/// gamma1 = -(1/d)(sqrt(g/H)(lambda2 - U/g) + 1) / ((1/c)(sqrt(g/H)(lambda1 - U/g) + 1))
/// ```
///
/// It does not satisfy the admissibility bounds in general (at `U = 0`,
/// `g = 9.8`, `H = 1` it gives `gamma0 ~ 1.94`). Reported for diagnostics only.
pub fn reflection_formula_variant(sd: &SpectralData) -> (f64, f64) {
    let r = (sd.flow.gravity / sd.flow.depth).sqrt();
    let g0 = -((r * sd.x2 - 1.0) / sd.d) / ((r * sd.x1 - 1.0) / sd.c);
    let g1 = -((r * sd.x2 + 1.0) / sd.d) / ((r * sd.x1 + 1.0) / sd.c);
    (g0, g1)
}

/// Scalings from transmissive data to characteristic data:
/// `b1 = 2 kappa0 g1` at `x = 0`, `b2 = 2 kappa1 g2` at `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataScalings {
    pub kappa0: Option<f64>,
    pub kappa1: Option<f64>,
}

/// Sub-critical flows get both scalings; critical flows only the one at the
/// inflow end. Super-critical inflow data is mapped by
/// [`supercritical_inflow_map`] instead.
pub fn inflow_outflow_scalings(cfg: &FlowConfig) -> Result<DataScalings> {
    let sd = spectral_data(cfg)?;
    let k = transmissive_weight(cfg);
    let kappa = |num: f64, den: f64| -> Result<f64> {
        if den.abs() <= f64::EPSILON * (num.abs() + k) {
            return Err(SwweError::Inconsistent(format!(
                "degenerate boundary data scaling ({num} / {den})"
            )));
        }
        Ok(num / den)
    };
    let kappa0 = || kappa(sd.c, sd.x1 + k);
    let kappa1 = || kappa(sd.d, sd.x2 - k);
    match (sd.regime.kind, sd.regime.direction) {
        (FlowKind::SubCritical, _) => Ok(DataScalings {
            kappa0: Some(kappa0()?),
            kappa1: Some(kappa1()?),
        }),
        (FlowKind::Critical, Direction::Negative) => Ok(DataScalings {
            kappa0: None,
            kappa1: Some(kappa1()?),
        }),
        (FlowKind::Critical, _) => Ok(DataScalings {
            kappa0: Some(kappa0()?),
            kappa1: None,
        }),
        (FlowKind::SuperCritical, _) => Err(SwweError::Regime {
            expected: "sub-critical or critical",
            found: sd.regime,
        }),
    }
}

/// Matrix taking `(g1, g2)` to `(b1, b2)` for a super-critical inflow end,
/// where both `(h + k u)/2 = g1` and `(h - k u)/2 = g2` are imposed:
/// `q = (g1 + g2, (g1 - g2)/k)` and `b = S^T q`.
pub fn supercritical_inflow_map(sd: &SpectralData) -> [[f64; 2]; 2] {
    let k = transmissive_weight(&sd.flow);
    let s = &sd.s;
    // b_i = S_0i h + S_1i u
    let row = |i: usize| [s[0][i] + s[1][i] / k, s[0][i] - s[1][i] / k];
    [row(0), row(1)]
}
