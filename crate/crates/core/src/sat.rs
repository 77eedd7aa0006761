//! Weak boundary treatment by simultaneous approximation terms.
//!
//! With `w = S^T q` evaluated at the boundary nodes the penalty is
//!
//! ```text
//!   SAT = -1/2 (W^{-1} S W (x) I) [ tau_.1 H e_. r_. ; tau_.2 g e_. r_. ]
//! ```
//!
//! which at a boundary node reduces to `-1/2 gH W^{-1} S (tau_1 r, tau_2 r')`.
//! Sub-critical flows penalize the reflection residuals
//! `r_0 = w1 - gamma0 w2 - b1` and `r_N = w2 - gamma1 w1 - b2`; critical and
//! super-critical flows penalize `w1 - b1` and `w2 - b2` directly at the
//! inflow end.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};
use crate::model::{
    inflow_outflow_scalings, reflection_coefficients, supercritical_inflow_map, Direction, FlowKind,
    ReflectionCoefficients, Regime, SpectralData,
};

const PENALTY_TOL: f64 = 1e-12;

/// Number of boundary conditions imposed at each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLayout {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for BoundaryLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} at x=0, {} at x=L)", self.left, self.right)
    }
}

pub fn required_layout(regime: Regime) -> BoundaryLayout {
    let (left, right) = regime.boundary_counts();
    BoundaryLayout { left, right }
}

pub fn check_layout(regime: Regime, layout: BoundaryLayout) -> Result<()> {
    let req = required_layout(regime);
    if req != layout {
        return Err(SwweError::Layout {
            regime,
            left: layout.left,
            right: layout.right,
            req_left: req.left,
            req_right: req.right,
        });
    }
    Ok(())
}

/// Penalty strengths for both ends.
///
/// `reflection` selects the coupled sub-critical form; without it each
/// nonzero `tau` imposes its own characteristic condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySet {
    pub tau01: f64,
    pub tau02: f64,
    pub taun1: f64,
    pub taun2: f64,
    pub reflection: Option<ReflectionCoefficients>,
    pub regime: Regime,
}

impl PenaltySet {
    pub fn layout(&self) -> BoundaryLayout {
        let nz = |t: f64| usize::from(t != 0.0);
        match self.reflection {
            Some(_) => BoundaryLayout {
                left: usize::from(self.tau01 != 0.0 || self.tau02 != 0.0),
                right: usize::from(self.taun1 != 0.0 || self.taun2 != 0.0),
            },
            None => BoundaryLayout {
                left: nz(self.tau01) + nz(self.tau02),
                right: nz(self.taun1) + nz(self.taun2),
            },
        }
    }

    /// Check the boundary layout and the energy-stability conditions on the
    /// penalties for the regime of `sd`.
    pub fn validate(&self, sd: &SpectralData) -> Result<()> {
        if self.regime != sd.regime {
            return Err(SwweError::Inadmissible(format!(
                "penalties built for {} applied to {}",
                self.regime, sd.regime
            )));
        }
        let taus = [self.tau01, self.tau02, self.taun1, self.taun2];
        if taus.iter().any(|t| !t.is_finite()) {
            return Err(SwweError::Inadmissible("penalties must be finite".into()));
        }
        check_layout(sd.regime, self.layout())?;

        let (l1, l2) = (sd.lambda1, sd.lambda2);
        let at_least = |name: &str, tau: f64, bound: f64| -> Result<()> {
            if tau < bound - PENALTY_TOL * bound.abs().max(1.0) {
                return Err(SwweError::Inadmissible(format!(
                    "{name} = {tau} is below the stability bound {bound}"
                )));
            }
            Ok(())
        };
        let equal = |name: &str, tau: f64, value: f64| -> Result<()> {
            if (tau - value).abs() > PENALTY_TOL * value.abs().max(1.0) {
                return Err(SwweError::Inadmissible(format!(
                    "{name} = {tau}, stability requires {value}"
                )));
            }
            Ok(())
        };

        match (sd.regime.kind, self.reflection) {
            (FlowKind::SubCritical, Some(rc)) => {
                rc.check_admissible(sd)?;
                equal("tau01", self.tau01, l1)?;
                equal("tau02", self.tau02, rc.gamma0 * l1)?;
                equal("tauN2", self.taun2, -l2)?;
                equal("tauN1", self.taun1, -rc.gamma1 * l2)
            }
            (FlowKind::SubCritical, None) => Err(SwweError::Inadmissible(
                "sub-critical flow needs reflection coefficients".into(),
            )),
            (_, Some(_)) => Err(SwweError::Inadmissible(format!(
                "reflection coefficients apply to sub-critical flow only, got {}",
                sd.regime
            ))),
            (FlowKind::SuperCritical, None) => match sd.regime.direction {
                Direction::Negative => {
                    at_least("tauN1", self.taun1, -l1)?;
                    at_least("tauN2", self.taun2, -l2)
                }
                _ => {
                    at_least("tau01", self.tau01, l1)?;
                    at_least("tau02", self.tau02, l2)
                }
            },
            (FlowKind::Critical, None) => match sd.regime.direction {
                // the layout check already forces the zero penalties
                Direction::Negative => at_least("tauN2", self.taun2, -l2),
                _ => at_least("tau01", self.tau01, l1),
            },
        }
    }
}

/// Minimal admissible penalties for the regime of `sd`.
///
/// `reflection` must be given for sub-critical flow and omitted otherwise.
pub fn default_penalties(
    sd: &SpectralData,
    reflection: Option<ReflectionCoefficients>,
) -> Result<PenaltySet> {
    let (l1, l2) = (sd.lambda1, sd.lambda2);
    let regime = sd.regime;
    let pen = match (regime.kind, regime.direction, reflection) {
        (FlowKind::SubCritical, _, Some(rc)) => {
            rc.check_admissible(sd)?;
            PenaltySet {
                tau01: l1,
                tau02: rc.gamma0 * l1,
                taun1: -rc.gamma1 * l2,
                taun2: -l2,
                reflection: Some(rc),
                regime,
            }
        }
        (FlowKind::SubCritical, _, None) => {
            return Err(SwweError::Inadmissible(
                "sub-critical flow needs reflection coefficients".into(),
            ))
        }
        (_, _, Some(_)) => {
            return Err(SwweError::Inadmissible(format!(
                "reflection coefficients apply to sub-critical flow only, got {regime}"
            )))
        }
        (FlowKind::SuperCritical, Direction::Negative, None) => PenaltySet {
            tau01: 0.0,
            tau02: 0.0,
            taun1: -l1,
            taun2: -l2,
            reflection: None,
            regime,
        },
        (FlowKind::SuperCritical, _, None) => PenaltySet {
            tau01: l1,
            tau02: l2,
            taun1: 0.0,
            taun2: 0.0,
            reflection: None,
            regime,
        },
        (FlowKind::Critical, Direction::Negative, None) => PenaltySet {
            tau01: 0.0,
            tau02: 0.0,
            taun1: 0.0,
            taun2: -l2,
            reflection: None,
            regime,
        },
        (FlowKind::Critical, _, None) => PenaltySet {
            tau01: l1,
            tau02: 0.0,
            taun1: 0.0,
            taun2: 0.0,
            reflection: None,
            regime,
        },
    };
    pen.validate(sd)?;
    Ok(pen)
}

/// User-supplied replacements for the default reflection coefficients and
/// penalty strengths. Anything left `None` keeps its default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PenaltyOverride {
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
    pub tau01: Option<f64>,
    pub tau02: Option<f64>,
    pub taun1: Option<f64>,
    pub taun2: Option<f64>,
}

impl PenaltyOverride {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Default penalties with `ov` applied, validated against the regime.
///
/// Overriding a reflection coefficient recomputes the coupled penalties
/// unless those are overridden as well.
pub fn resolve_penalties(sd: &SpectralData, ov: &PenaltyOverride) -> Result<PenaltySet> {
    let rc = match sd.regime.kind {
        FlowKind::SubCritical => {
            let mut rc = reflection_coefficients(&sd.flow)?;
            rc.gamma0 = ov.gamma0.unwrap_or(rc.gamma0);
            rc.gamma1 = ov.gamma1.unwrap_or(rc.gamma1);
            Some(rc)
        }
        _ if ov.gamma0.is_some() || ov.gamma1.is_some() => {
            return Err(SwweError::Inadmissible(format!(
                "reflection coefficients apply to sub-critical flow only, got {}",
                sd.regime
            )))
        }
        _ => None,
    };
    let mut pen = default_penalties(sd, rc)?;
    pen.tau01 = ov.tau01.unwrap_or(pen.tau01);
    pen.tau02 = ov.tau02.unwrap_or(pen.tau02);
    pen.taun1 = ov.taun1.unwrap_or(pen.taun1);
    pen.taun2 = ov.taun2.unwrap_or(pen.taun2);
    pen.validate(sd)?;
    Ok(pen)
}

type DataFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Characteristic boundary data `t -> (b1, b2)`.
#[derive(Clone)]
pub struct BoundaryData {
    f: Option<DataFn>,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("homogeneous", &self.f.is_none())
            .finish()
    }
}

impl BoundaryData {
    pub fn zero() -> Self {
        Self { f: None }
    }

    pub fn from_fn(f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { f: Some(Arc::new(f)) }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        match &self.f {
            Some(f) => f(t),
            None => (0.0, 0.0),
        }
    }

    /// Convert transmissive data `(h + k u)/2 = g1`, `(h - k u)/2 = g2`
    /// (`k = sqrt(H/g)`) at the ends the regime prescribes into
    /// characteristic data.
    pub fn from_transmissive<G1, G2>(sd: &SpectralData, g1: G1, g2: G2) -> Result<Self>
    where
        G1: Fn(f64) -> f64 + Send + Sync + 'static,
        G2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if sd.regime.kind == FlowKind::SuperCritical {
            let m = supercritical_inflow_map(sd);
            return Ok(Self::from_fn(move |t| {
                let (a, b) = (g1(t), g2(t));
                (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
            }));
        }
        let scalings = inflow_outflow_scalings(&sd.flow)?;
        let k0 = 2.0 * scalings.kappa0.unwrap_or(0.0);
        let k1 = 2.0 * scalings.kappa1.unwrap_or(0.0);
        Ok(Self::from_fn(move |t| {
            let b1 = if k0 != 0.0 { k0 * g1(t) } else { 0.0 };
            let b2 = if k1 != 0.0 { k1 * g2(t) } else { 0.0 };
            (b1, b2)
        }))
    }
}

/// SAT contributions `(h, u)` at node 0 and node N, before division by `P`.
pub(crate) fn boundary_penalty(
    sd: &SpectralData,
    pen: &PenaltySet,
    left: (f64, f64),
    right: (f64, f64),
    b: (f64, f64),
) -> ([f64; 2], [f64; 2]) {
    let w0 = sd.to_characteristic(left.0, left.1);
    let wn = sd.to_characteristic(right.0, right.1);
    let (b1, b2) = b;
    let (a0, an) = match pen.reflection {
        Some(rc) => {
            let r0 = w0.w1 - rc.gamma0 * w0.w2 - b1;
            let rn = wn.w2 - rc.gamma1 * wn.w1 - b2;
            ([pen.tau01 * r0, pen.tau02 * r0], [pen.taun1 * rn, pen.taun2 * rn])
        }
        None => (
            [pen.tau01 * (w0.w1 - b1), pen.tau02 * (w0.w2 - b2)],
            [pen.taun1 * (wn.w1 - b1), pen.taun2 * (wn.w2 - b2)],
        ),
    };
    (lift(sd, a0), lift(sd, an))
}

/// `-1/2 gH W^{-1} S a`
fn lift(sd: &SpectralData, a: [f64; 2]) -> [f64; 2] {
    let s = &sd.s;
    let (g, h) = (sd.flow.gravity, sd.flow.depth);
    [
        -0.5 * h * (s[0][0] * a[0] + s[0][1] * a[1]),
        -0.5 * g * (s[1][0] * a[0] + s[1][1] * a[1]),
    ]
}

/// Full state-shaped SAT vector (component-major `[h_0..h_N, u_0..u_N]`).
/// Only the four boundary entries can be nonzero.
pub fn assemble_sat(
    state: &[f64],
    t: f64,
    sd: &SpectralData,
    pen: &PenaltySet,
    data: &BoundaryData,
) -> Result<Vec<f64>> {
    if state.len() < 6 || !state.len().is_multiple_of(2) {
        return Err(SwweError::Shape {
            expected: 2 * (state.len() / 2).max(3),
            found: state.len(),
        });
    }
    pen.validate(sd)?;
    let m = state.len() / 2;
    let n = m - 1;
    let (s0, sn) = boundary_penalty(
        sd,
        pen,
        (state[0], state[m]),
        (state[n], state[m + n]),
        data.eval(t),
    );
    let mut out = vec![0.0; state.len()];
    out[0] = s0[0];
    out[m] = s0[1];
    out[n] = sn[0];
    out[m + n] = sn[1];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reflection_coefficients, spectral_data, FlowConfig};

    const G: f64 = 9.8;

    fn setup(m: f64) -> (SpectralData, PenaltySet) {
        let cfg = FlowConfig::with_froude(G, 1.0, m).unwrap();
        let sd = spectral_data(&cfg).unwrap();
        let rc = reflection_coefficients(&cfg).ok();
        (sd, default_penalties(&sd, rc).unwrap())
    }

    #[test]
    fn subcritical_at_rest_penalties() {
        let (_, pen) = setup(0.0);
        let g0 = (G.sqrt() - 1.0) / (G.sqrt() + 1.0);
        assert!((pen.tau01 - 1.0).abs() < 1e-14);
        assert!((pen.tau02 - g0).abs() < 1e-14);
        assert!((pen.taun2 - 1.0).abs() < 1e-14);
        assert!((pen.taun1 - g0).abs() < 1e-14);
        assert_eq!(pen.layout(), BoundaryLayout { left: 1, right: 1 });
    }

    #[test]
    fn supercritical_has_no_outflow_penalty() {
        let (sd, pen) = setup(2.0);
        assert_eq!((pen.taun1, pen.taun2), (0.0, 0.0));
        assert_eq!((pen.tau01, pen.tau02), (sd.lambda1, sd.lambda2));
        let (sd, pen) = setup(-2.0);
        assert_eq!((pen.tau01, pen.tau02), (0.0, 0.0));
        assert_eq!((pen.taun1, pen.taun2), (-sd.lambda1, -sd.lambda2));
    }

    #[test]
    fn critical_zero_penalties() {
        let (_, pen) = setup(1.0);
        assert_eq!(pen.tau02, 0.0);
        assert_eq!(pen.layout(), BoundaryLayout { left: 1, right: 0 });
        let (_, pen) = setup(-1.0);
        assert_eq!(pen.taun1, 0.0);
        assert_eq!(pen.layout(), BoundaryLayout { left: 0, right: 1 });
    }

    #[test]
    fn inadmissible_gamma_rejected() {
        let cfg = FlowConfig::new(G, 1.0, 0.0).unwrap();
        let sd = spectral_data(&cfg).unwrap();
        let rc = ReflectionCoefficients { gamma0: 1.5, gamma1: 0.0 };
        assert!(matches!(
            default_penalties(&sd, Some(rc)),
            Err(SwweError::Inadmissible(_))
        ));
        assert!(default_penalties(&sd, None).is_err());
    }

    #[test]
    fn penalty_below_bound_rejected() {
        let (sd, mut pen) = setup(2.0);
        pen.tau01 = 0.5 * sd.lambda1;
        assert!(pen.validate(&sd).is_err());
        let (sd, mut pen) = setup(2.0);
        pen.tau01 = 3.0 * sd.lambda1;
        assert!(pen.validate(&sd).is_ok());
    }

    #[test]
    fn outflow_penalty_in_supercritical_rejected() {
        let (sd, mut pen) = setup(2.0);
        pen.taun1 = 1.0;
        assert!(matches!(pen.validate(&sd), Err(SwweError::Layout { .. })));
    }

    #[test]
    fn zero_state_zero_data_gives_zero_sat() {
        for m in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let (sd, pen) = setup(m);
            let sat = assemble_sat(&[0.0; 10], 0.0, &sd, &pen, &BoundaryData::zero()).unwrap();
            assert!(sat.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn satisfied_conditions_give_zero_sat() {
        let (sd, pen) = setup(0.5);
        let rc = pen.reflection.unwrap();
        let n = 4;
        let m = n + 1;
        let mut state = vec![0.0; 2 * m];
        let (h0, u0, hn, un) = (0.3, -0.7, 1.1, 0.4);
        state[0] = h0;
        state[m] = u0;
        state[n] = hn;
        state[m + n] = un;
        state[2] = 5.0;
        let w0 = sd.to_characteristic(h0, u0);
        let wn = sd.to_characteristic(hn, un);
        let b1 = w0.w1 - rc.gamma0 * w0.w2;
        let b2 = wn.w2 - rc.gamma1 * wn.w1;
        let data = BoundaryData::from_fn(move |_| (b1, b2));
        let sat = assemble_sat(&state, 0.0, &sd, &pen, &data).unwrap();
        assert!(sat.iter().all(|v| v.abs() < 1e-15), "{sat:?}");
    }

    /// `-1/2 (W^{-1} S W (x) I) [top; bottom]` materialized densely.
    fn dense_sat(sd: &SpectralData, top: &[f64], bottom: &[f64]) -> Vec<f64> {
        let (g, h) = (sd.flow.gravity, sd.flow.depth);
        let w = [g, h];
        let mut k = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                k[i][j] = sd.s[i][j] * w[j] / w[i];
            }
        }
        let m = top.len();
        let stacked: Vec<f64> = top.iter().chain(bottom).copied().collect();
        let mut out = vec![0.0; 2 * m];
        for bi in 0..2 {
            for bj in 0..2 {
                for i in 0..m {
                    out[bi * m + i] += -0.5 * k[bi][bj] * stacked[bj * m + i];
                }
            }
        }
        out
    }

    #[test]
    fn unit_perturbation_matches_dense_oracle() {
        let cfg = FlowConfig::new(G, 1.0, 0.0).unwrap();
        let sd = spectral_data(&cfg).unwrap();
        let rc = reflection_coefficients(&cfg).unwrap();
        let pen = default_penalties(&sd, Some(rc)).unwrap();
        let n = 4;
        let m = n + 1;
        let mut state = vec![0.0; 2 * m];
        state[0] = 1.0;
        let sat = assemble_sat(&state, 0.0, &sd, &pen, &BoundaryData::zero()).unwrap();

        let w0 = sd.to_characteristic(1.0, 0.0);
        let r0 = w0.w1 - rc.gamma0 * w0.w2;
        let mut top = vec![0.0; m];
        let mut bottom = vec![0.0; m];
        top[0] = pen.tau01 * cfg.depth * r0;
        bottom[0] = pen.tau02 * cfg.gravity * r0;
        let expected = dense_sat(&sd, &top, &bottom);
        for (i, (a, b)) in sat.iter().zip(&expected).enumerate() {
            assert!((a - b).abs() < 1e-14, "{i}: {a} vs {b}");
            if i != 0 && i != m {
                assert_eq!(*a, 0.0);
            }
        }
        assert!(sat[0] != 0.0 && sat[m] != 0.0);
    }

    #[test]
    fn transmissive_data_mapping() {
        let cfg = FlowConfig::new(G, 1.0, 0.0).unwrap();
        let sd = spectral_data(&cfg).unwrap();
        let data = BoundaryData::from_transmissive(&sd, |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(data.eval(0.3), (0.0, 0.0));
        let ks = inflow_outflow_scalings(&cfg).unwrap();
        let data = BoundaryData::from_transmissive(&sd, |t| t, |_| 1.0).unwrap();
        let (b1, b2) = data.eval(2.0);
        assert!((b1 - 4.0 * ks.kappa0.unwrap()).abs() < 1e-14);
        assert!((b2 - 2.0 * ks.kappa1.unwrap()).abs() < 1e-14);
    }
}
