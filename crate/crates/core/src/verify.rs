//! Self-checks of the discretization for a given configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{spectral_data, FlowConfig, FlowKind, SpectralData};
use crate::sat::{assemble_sat, required_layout, resolve_penalties, BoundaryData, PenaltyOverride, PenaltySet};
use crate::sbp::{build_operators_scaled, DissipationScaling, Grid};
use crate::solver::Discretization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub flow: FlowConfig,
    pub n: usize,
    pub alpha: f64,
    pub scaling: DissipationScaling,
    pub penalties: PenaltyOverride,
    pub samples: usize,
    pub seed: u64,
}

impl VerifyConfig {
    pub fn new(flow: FlowConfig) -> Self {
        Self {
            flow,
            n: 64,
            alpha: 0.0,
            scaling: DissipationScaling::Half,
            penalties: PenaltyOverride::default(),
            samples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub regime: String,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn sbp_identity(grid: &Grid, alpha: f64, scaling: DissipationScaling) -> CheckResult {
    let ops = match build_operators_scaled(grid, alpha, scaling) {
        Ok(ops) => ops,
        Err(e) => return check("sbp-identity", false, e.to_string()),
    };
    let m = ops.len();
    let mut bad = 0usize;
    let mut v = vec![0.0; m];
    let mut qv = vec![0.0; m];
    let mut qtv = vec![0.0; m];
    // column j of Q + Q^T from stencil applications, compared exactly
    for j in 0..m {
        v.fill(0.0);
        v[j] = 1.0;
        ops.apply_q(&v, &mut qv).expect("length checked");
        // (Q^T e_j)_i = Q_ji
        qtv.fill(0.0);
        for i in j.saturating_sub(1)..(j + 2).min(m) {
            v.fill(0.0);
            v[i] = 1.0;
            let mut col = vec![0.0; m];
            ops.apply_q(&v, &mut col).expect("length checked");
            qtv[i] = col[j];
        }
        for i in 0..m {
            let b = if i == j && i == 0 {
                -1.0
            } else if i == j && i == m - 1 {
                1.0
            } else {
                0.0
            };
            if qv[i] + qtv[i] != b {
                bad += 1;
            }
        }
    }
    let positive = ops.norm().iter().all(|p| *p > 0.0);
    check(
        "sbp-identity",
        bad == 0 && positive,
        format!("Q + Q^T = diag(-1, 0, .., 0, 1): {} mismatched entries; P > 0: {positive}", bad),
    )
}

fn orthonormality(sd: &SpectralData) -> CheckResult {
    let s = &sd.s;
    let mut err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot = s[0][i] * s[0][j] + s[1][i] * s[1][j];
            err = err.max((dot - f64::from(u8::from(i == j))).abs());
        }
    }
    let mt = sd.mtilde();
    let norm = mt.iter().map(|r| r[0].abs() + r[1].abs()).fold(0.0, f64::max);
    let lam = [sd.lambda1, sd.lambda2];
    let mut diag_err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    v += s[a][i] * mt[a][b] * s[b][j];
                }
            }
            let want = if i == j { sd.gh() * lam[i] } else { 0.0 };
            diag_err = diag_err.max((v - want).abs());
        }
    }
    check(
        "eigen-orthonormality",
        err <= 1e-12 && diag_err <= 1e-9 * norm,
        format!("|S^T S - I| = {err:.3e}; |S^T Mt S - gH diag(lambda)| = {diag_err:.3e}"),
    )
}

fn round_trip(sd: &SpectralData, rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (h, u) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (h2, u2) = sd.from_characteristic(sd.to_characteristic(h, u));
        let scale = h.abs().max(u.abs()).max(1e-300);
        worst = worst.max((h2 - h).abs().max((u2 - u).abs()) / scale);
    }
    check(
        "characteristic-round-trip",
        worst <= 1e-13,
        format!("max relative error {worst:.3e}"),
    )
}

fn layout(sd: &SpectralData, pen: &PenaltySet) -> CheckResult {
    let req = required_layout(sd.regime);
    let got = pen.layout();
    check(
        "boundary-layout",
        req == got,
        format!("{} requires {req}, penalties impose {got}", sd.regime),
    )
}

fn energy_rate(disc: &Discretization, rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let len = 2 * disc.nodes();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let q: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = disc.energy(&q);
        let rate = disc.energy_rate(&q).expect("length checked");
        worst = worst.max(rate / e);
    }
    check(
        "energy-rate",
        worst <= 1e-10,
        format!("max q^T (W (x) P) rhs(q) / |q|^2 over {samples} states: {worst:.3e}"),
    )
}

/// A constant state with boundary data taken from that state must not be
/// penalized.
fn sat_consistency(sd: &SpectralData, pen: &PenaltySet, rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..samples.min(100) {
        let (h, u) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let w = sd.to_characteristic(h, u);
        let b = match pen.reflection {
            Some(rc) => (w.w1 - rc.gamma0 * w.w2, w.w2 - rc.gamma1 * w.w1),
            None => (w.w1, w.w2),
        };
        let mut q = vec![h; 5];
        q.extend(vec![u; 5]);
        let sat = assemble_sat(&q, 0.0, sd, pen, &BoundaryData::from_fn(move |_| b))
            .expect("validated penalties");
        worst = worst.max(sat.iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    check(
        "sat-consistency",
        worst <= 1e-12,
        format!("max |SAT| on consistent data {worst:.3e}"),
    )
}

fn admissibility(sd: &SpectralData, pen: &PenaltySet) -> CheckResult {
    match (sd.regime.kind, pen.reflection) {
        (FlowKind::SubCritical, Some(rc)) => {
            let b0 = -sd.lambda2 / sd.lambda1;
            let b1 = -sd.lambda1 / sd.lambda2;
            check(
                "admissibility",
                rc.check_admissible(sd).is_ok(),
                format!(
                    "gamma0^2 = {:.6} <= {b0:.6}, gamma1^2 = {:.6} <= {b1:.6}",
                    rc.gamma0 * rc.gamma0,
                    rc.gamma1 * rc.gamma1
                ),
            )
        }
        _ => check(
            "admissibility",
            pen.validate(sd).is_ok(),
            format!(
                "tau = ({}, {}, {}, {})",
                pen.tau01, pen.tau02, pen.taun1, pen.taun2
            ),
        ),
    }
}

/// Run every check; a failure to build the spectral data, the grid or the
/// penalties is itself reported as a failed check.
pub fn run_verification(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sd = match spectral_data(&cfg.flow) {
        Ok(sd) => sd,
        Err(e) => {
            return VerifyReport {
                regime: "unknown".into(),
                checks: vec![check("spectral-data", false, e.to_string())],
            }
        }
    };
    let regime = sd.regime.to_string();
    let grid = match Grid::uniform(cfg.n, 1.0) {
        Ok(g) => g,
        Err(e) => {
            checks.push(check("grid", false, e.to_string()));
            return VerifyReport { regime, checks };
        }
    };
    checks.push(sbp_identity(&grid, cfg.alpha, cfg.scaling));
    checks.push(orthonormality(&sd));
    checks.push(round_trip(&sd, &mut rng, cfg.samples));

    let pen = match resolve_penalties(&sd, &cfg.penalties) {
        Ok(p) => p,
        Err(e) => {
            checks.push(check("admissibility", false, e.to_string()));
            return VerifyReport { regime, checks };
        }
    };
    checks.push(admissibility(&sd, &pen));
    checks.push(layout(&sd, &pen));
    checks.push(sat_consistency(&sd, &pen, &mut rng, cfg.samples));
    match build_operators_scaled(&grid, cfg.alpha, cfg.scaling)
        .and_then(|ops| Discretization::new(&cfg.flow, grid.clone(), ops, pen))
    {
        Ok(disc) => checks.push(energy_rate(&disc, &mut rng, cfg.samples)),
        Err(e) => checks.push(check("energy-rate", false, e.to_string())),
    }
    VerifyReport { regime, checks }
}
