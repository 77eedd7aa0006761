#![allow(dead_code)]

use swwe_core::model::FlowConfig;
use swwe_core::sat::BoundaryData;
use swwe_core::sbp::{DissipationScaling, Grid};
use swwe_core::solver::Discretization;

pub const G: f64 = 9.8;

/// `(multiple, label)` for the six regime/sign combinations.
pub const REGIMES: [(f64, &str); 6] = [
    (0.5, "sub U>0"),
    (-0.5, "sub U<0"),
    (1.0, "critical U>0"),
    (-1.0, "critical U<0"),
    (2.0, "super U>0"),
    (-2.0, "super U<0"),
];

pub fn flow(multiple: f64) -> FlowConfig {
    FlowConfig::with_froude(G, 1.0, multiple).unwrap()
}

pub fn disc(multiple: f64, n: usize, alpha: f64) -> Discretization {
    Discretization::with_default_penalties(
        &flow(multiple),
        Grid::uniform(n, 1.0).unwrap(),
        alpha,
        DissipationScaling::Half,
    )
    .unwrap()
}

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn kron(a: &[[f64; 2]; 2], b: &Mat) -> Mat {
    let m = b.len();
    let mut out = zeros(2 * m, 2 * m);
    for i in 0..2 {
        for j in 0..2 {
            for r in 0..m {
                for c in 0..m {
                    out[i * m + r][j * m + c] = a[i][j] * b[r][c];
                }
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l] != 0.0 {
                for j in 0..m {
                    out[i][j] += a[i][l] * b[l][j];
                }
            }
        }
    }
    out
}

/// Right-hand side with every operator materialized:
/// `(I (x) P)^{-1} [ -(M (x) Q) q + c_A (I (x) A) q + SAT ]`, where
/// `SAT = -1/2 (W^{-1} S W (x) I) z` and `z` holds `H tau_.1 r` and
/// `g tau_.2 r` at the boundary nodes.
pub fn dense_rhs(d: &Discretization, q: &[f64], b: (f64, f64)) -> Vec<f64> {
    let m = d.nodes();
    let n = m - 1;
    let cfg = d.spectral.flow;
    let (g, hm) = (cfg.gravity, cfg.depth);
    let s = d.spectral.s;
    let eye = [[1.0, 0.0], [0.0, 1.0]];

    let mq = kron(&cfg.flux_matrix(), &d.ops.dense_q());
    let ia = kron(&eye, &d.ops.dense_a());
    let p = kron(&eye, &d.ops.dense_p());
    let c_a = d.ops.dissipation_coefficient();

    let wt = |h: f64, u: f64| (s[0][0] * h + s[1][0] * u, s[0][1] * h + s[1][1] * u);
    let (w01, w02) = wt(q[0], q[m]);
    let (wn1, wn2) = wt(q[n], q[m + n]);
    let pen = &d.penalties;
    let (a01, a02, an1, an2) = match pen.reflection {
        Some(rc) => {
            let r0 = w01 - rc.gamma0 * w02 - b.0;
            let rn = wn2 - rc.gamma1 * wn1 - b.1;
            (pen.tau01 * r0, pen.tau02 * r0, pen.taun1 * rn, pen.taun2 * rn)
        }
        None => (
            pen.tau01 * (w01 - b.0),
            pen.tau02 * (w02 - b.1),
            pen.taun1 * (wn1 - b.0),
            pen.taun2 * (wn2 - b.1),
        ),
    };
    let mut z = vec![0.0; 2 * m];
    z[0] = hm * a01;
    z[m] = g * a02;
    z[n] = hm * an1;
    z[m + n] = g * an2;
    let w = [g, hm];
    let mut wsw = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            wsw[i][j] = s[i][j] * w[j] / w[i];
        }
    }
    let sat = matvec(&kron(&wsw, &eye_n(m)), &z);

    let mqv = matvec(&mq, q);
    let iav = matvec(&ia, q);
    (0..2 * m)
        .map(|i| (-mqv[i] + c_a * iav[i] - 0.5 * sat[i]) / p[i][i])
        .collect()
}

pub fn eye_n(m: usize) -> Mat {
    let mut e = zeros(m, m);
    for (i, row) in e.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    e
}

/// Matrix of the homogeneous (b = 0, no forcing) semi-discrete operator.
pub fn dense_operator(d: &Discretization) -> Mat {
    let len = 2 * d.nodes();
    let mut cols = Vec::with_capacity(len);
    for j in 0..len {
        let mut e = vec![0.0; len];
        e[j] = 1.0;
        cols.push(dense_rhs(d, &e, (0.0, 0.0)));
    }
    (0..len).map(|i| (0..len).map(|j| cols[j][i]).collect()).collect()
}

pub fn stencil_rhs(d: &Discretization, q: &[f64], b: (f64, f64)) -> Vec<f64> {
    let mut out = vec![0.0; q.len()];
    d.rhs_into(q, 0.0, &BoundaryData::from_fn(move |_| b), None, &mut out)
        .unwrap();
    out
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Leading-order L2 error in h of the smooth pulse at time `t` on `n` cells.
///
/// The interior stencil solves `w_t + a w_x = -a dx^2/6 w_xxx` to leading
/// order, so the error accumulated along a characteristic that entered at time
/// `s` and reached `x = a (t - s)` is `dx^2/6 x g1'''(s) / a^3`.
#[allow(dead_code)]
pub fn pulse_truncation_estimate(cfg: &FlowConfig, n: usize, t: f64) -> f64 {
    use std::f64::consts::PI;
    let a = cfg.velocity + cfg.wave_speed();
    let length = 5.0 * a;
    let dx = length / n as f64;
    let g3 = |s: f64| {
        let (sn, cs) = (PI * s).sin_cos();
        8.0 * PI.powi(3) * sn * cs * (3.0 * cs * cs - 5.0 * sn * sn)
    };
    let (lo, hi) = ((t - length / a).max(0.0), t.min(1.0));
    let m = 20_000;
    let ds = (hi - lo) / m as f64;
    let sum: f64 = (0..m)
        .map(|i| {
            let s = lo + (i as f64 + 0.5) * ds;
            let e = dx * dx / 6.0 * a * (t - s) * g3(s) / a.powi(3);
            e * e * a * ds
        })
        .sum();
    sum.sqrt()
}
