//! Finite volume grid and the summation-by-parts operators.
//!
//! Nodes `x_0 = 0 < x_1 < ... < x_N = L` carry control volumes
//! `|I_0| = dx_1/2`, `|I_i| = (dx_i + dx_{i+1})/2`, `|I_N| = dx_N/2`, so
//! `P = diag(|I_i|)` is a diagonal norm. With the centered interface flux the
//! difference matrix is
//!
//! ```text
//!       [-1/2  1/2              ]        [-1  1          ]
//!       [-1/2   0   1/2         ]        [ 1 -2  1       ]
//!   Q = [       ...  ...  ...   ]    A = [    ...  ...   ]
//!       [        -1/2   0   1/2 ]        [       1 -2  1 ]
//!       [              -1/2 1/2 ]        [          1 -1 ]
//! ```
//!
//! and `Q + Q^T = diag(-1, 0, ..., 0, 1)`. Everything is applied as a
//! stencil; dense matrices exist only for checking.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwweError};

#[derive(Debug, Clone, PartialEq)]
pub enum Spacing {
    Uniform,
    /// Explicit cell widths `dx_1..dx_N`.
    Widths(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    nodes: Vec<f64>,
    widths: Vec<f64>,
    volumes: Vec<f64>,
}

impl Grid {
    pub fn uniform(n: usize, length: f64) -> Result<Self> {
        build_grid(n, length, Spacing::Uniform)
    }

    /// Number of cell intervals; the grid has `n + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn build_grid(n: usize, length: f64, spacing: Spacing) -> Result<Grid> {
    if n < 2 {
        return Err(SwweError::Grid(format!("need at least 2 intervals, got {n}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(SwweError::Grid(format!("domain length must be positive, got {length}")));
    }
    let (nodes, widths) = match spacing {
        Spacing::Uniform => {
            let dx = length / n as f64;
            let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * length / n as f64).collect();
            nodes[n] = length;
            (nodes, vec![dx; n])
        }
        Spacing::Widths(widths) => {
            if widths.len() != n {
                return Err(SwweError::Grid(format!(
                    "expected {n} widths, got {}",
                    widths.len()
                )));
            }
            if let Some(bad) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(SwweError::Grid(format!("non-positive cell width {bad}")));
            }
            let total: f64 = widths.iter().sum();
            if (total - length).abs() > 1e-12 * length {
                return Err(SwweError::Grid(format!(
                    "widths sum to {total}, expected {length}"
                )));
            }
            let mut nodes = Vec::with_capacity(n + 1);
            let mut x = 0.0;
            nodes.push(x);
            for w in &widths {
                x += w;
                nodes.push(x);
            }
            nodes[n] = length;
            (nodes, widths)
        }
    };
    let mut volumes = vec![0.0; n + 1];
    volumes[0] = 0.5 * widths[0];
    volumes[n] = 0.5 * widths[n - 1];
    for i in 1..n {
        volumes[i] = 0.5 * (widths[i - 1] + widths[i]);
    }
    Ok(Grid {
        n,
        length,
        nodes,
        widths,
        volumes,
    })
}

/// How the dissipation strength enters the semi-discrete system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissipationScaling {
    /// `(alpha/2) A`, as produced by the local Lax-Friedrichs interface flux.
    #[default]
    Half,
    /// `alpha A`. This is the convention behind the published `alpha = 0.05`
    /// convergence table.
    Full,
}

impl DissipationScaling {
    pub fn factor(self) -> f64 {
        match self {
            DissipationScaling::Half => 0.5,
            DissipationScaling::Full => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperators {
    volumes: Vec<f64>,
    inv_volumes: Vec<f64>,
    alpha: f64,
    scaling: DissipationScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `D_x = P^{-1} Q`
    Derivative,
    Difference,
    Dissipation,
    Norm,
}

impl SbpOperators {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scaling(&self) -> DissipationScaling {
        self.scaling
    }

    /// Coefficient multiplying `A` in the semi-discrete system.
    pub fn dissipation_coefficient(&self) -> f64 {
        self.alpha * self.scaling.factor()
    }

    /// Diagonal of `P`.
    pub fn norm(&self) -> &[f64] {
        &self.volumes
    }

    pub fn inv_norm(&self) -> &[f64] {
        &self.inv_volumes
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(SwweError::Shape {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// `out = Q v`
    pub fn apply_q(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(v.len())?;
        self.check_len(out.len())?;
        q_stencil(v, out);
        Ok(())
    }

    /// `out = A v`
    pub fn apply_a(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(v.len())?;
        self.check_len(out.len())?;
        a_stencil(v, out);
        Ok(())
    }

    pub fn apply(&self, op: Operator, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let mut out = vec![0.0; v.len()];
        match op {
            Operator::Derivative => {
                q_stencil(v, &mut out);
                out.iter_mut()
                    .zip(&self.inv_volumes)
                    .for_each(|(o, ip)| *o *= ip);
            }
            Operator::Difference => q_stencil(v, &mut out),
            Operator::Dissipation => a_stencil(v, &mut out),
            Operator::Norm => out
                .iter_mut()
                .zip(v.iter().zip(&self.volumes))
                .for_each(|(o, (x, p))| *o = x * p),
        }
        Ok(out)
    }

    pub fn dense_q(&self) -> Vec<Vec<f64>> {
        dense_from_stencil(self.len(), q_stencil)
    }

    pub fn dense_a(&self) -> Vec<Vec<f64>> {
        dense_from_stencil(self.len(), a_stencil)
    }

    pub fn dense_p(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, p) in self.volumes.iter().enumerate() {
            m[i][i] = *p;
        }
        m
    }
}

pub fn build_operators(grid: &Grid, alpha: f64) -> Result<SbpOperators> {
    build_operators_scaled(grid, alpha, DissipationScaling::default())
}

pub fn build_operators_scaled(
    grid: &Grid,
    alpha: f64,
    scaling: DissipationScaling,
) -> Result<SbpOperators> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(SwweError::InvalidConfig {
            field: "alpha",
            reason: format!("must be finite and >= 0, got {alpha}"),
        });
    }
    let volumes = grid.volumes().to_vec();
    let inv_volumes = volumes.iter().map(|p| 1.0 / p).collect();
    Ok(SbpOperators {
        volumes,
        inv_volumes,
        alpha,
        scaling,
    })
}

pub(crate) fn q_stencil(v: &[f64], out: &mut [f64]) {
    let n = v.len() - 1;
    out[0] = 0.5 * (v[1] - v[0]);
    for i in 1..n {
        out[i] = 0.5 * (v[i + 1] - v[i - 1]);
    }
    out[n] = 0.5 * (v[n] - v[n - 1]);
}

pub(crate) fn a_stencil(v: &[f64], out: &mut [f64]) {
    let n = v.len() - 1;
    out[0] = v[1] - v[0];
    for i in 1..n {
        out[i] = v[i + 1] - 2.0 * v[i] + v[i - 1];
    }
    out[n] = v[n - 1] - v[n];
}

fn dense_from_stencil(n: usize, stencil: fn(&[f64], &mut [f64])) -> Vec<Vec<f64>> {
    // column j = stencil applied to e_j
    let mut m = vec![vec![0.0; n]; n];
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        stencil(&e, &mut col);
        for i in 0..n {
            m[i][j] = col[i];
        }
        e[j] = 0.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_volumes() {
        let g = Grid::uniform(4, 1.0).unwrap();
        assert_eq!(g.widths(), &[0.25; 4]);
        assert_eq!(g.volumes(), &[0.125, 0.25, 0.25, 0.25, 0.125]);
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn fine_grid_partition_of_unity() {
        let g = Grid::uniform(2048, 1.0).unwrap();
        let total: f64 = g.volumes().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let widths: f64 = g.widths().iter().sum();
        assert!((widths - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_widths() {
        let g = build_grid(3, 1.0, Spacing::Widths(vec![0.5, 0.3, 0.2])).unwrap();
        let expected = [0.25, 0.4, 0.25, 0.1];
        for (v, e) in g.volumes().iter().zip(expected) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!((g.min_width() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(Grid::uniform(1, 1.0), Err(SwweError::Grid(_))));
        assert!(Grid::uniform(4, 0.0).is_err());
        assert!(build_grid(2, 1.0, Spacing::Widths(vec![1.2, -0.2])).is_err());
        assert!(build_grid(2, 1.0, Spacing::Widths(vec![0.5, 0.4])).is_err());
        assert!(build_grid(3, 1.0, Spacing::Widths(vec![0.5, 0.5])).is_err());
    }

    #[test]
    fn sbp_identity_exact() {
        for n in [2, 4, 17] {
            let ops = build_operators(&Grid::uniform(n, 1.0).unwrap(), 0.0).unwrap();
            let q = ops.dense_q();
            for i in 0..=n {
                for j in 0..=n {
                    let b = if i == j && i == 0 {
                        -1.0
                    } else if i == j && i == n {
                        1.0
                    } else {
                        0.0
                    };
                    assert_eq!(q[i][j] + q[j][i], b);
                }
            }
        }
    }

    #[test]
    fn dissipation_small_case() {
        let ops = build_operators(&Grid::uniform(2, 1.0).unwrap(), 0.1).unwrap();
        let a = ops.dense_a();
        assert_eq!(
            a,
            vec![
                vec![-1.0, 1.0, 0.0],
                vec![1.0, -2.0, 1.0],
                vec![0.0, 1.0, -1.0]
            ]
        );
        // eigenvalues 0, -1, -3: check A v = mu v for the known eigenvectors
        let pairs: [(f64, [f64; 3]); 3] = [
            (0.0, [1.0, 1.0, 1.0]),
            (-1.0, [1.0, 0.0, -1.0]),
            (-3.0, [1.0, -2.0, 1.0]),
        ];
        for (mu, v) in pairs {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
                assert!((av - mu * v[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_annihilated() {
        let ops = build_operators(&Grid::uniform(8, 1.0).unwrap(), 0.0).unwrap();
        let ones = vec![1.0; 9];
        assert!(ops.apply(Operator::Derivative, &ones).unwrap().iter().all(|v| *v == 0.0));
        assert!(ops.apply(Operator::Dissipation, &ones).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn derivative_of_linear_is_one() {
        let g = Grid::uniform(8, 1.0).unwrap();
        let ops = build_operators(&g, 0.0).unwrap();
        let d = ops.apply(Operator::Derivative, g.nodes()).unwrap();
        for v in d {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_quadratic() {
        let g = Grid::uniform(8, 1.0).unwrap();
        let ops = build_operators(&g, 0.0).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let d = ops.apply(Operator::Derivative, &v).unwrap();
        let x = g.nodes();
        let dx = 1.0 / 8.0;
        for i in 1..8 {
            assert!((d[i] - 2.0 * x[i]).abs() < 1e-13);
        }
        // one-sided closures: (x1^2 - x0^2)/dx = dx and 2 - dx at the right
        assert!((d[0] - dx).abs() < 1e-13);
        assert!((d[8] - (2.0 - dx)).abs() < 1e-13);
    }

    #[test]
    fn shape_errors() {
        let ops = build_operators(&Grid::uniform(4, 1.0).unwrap(), 0.0).unwrap();
        assert!(matches!(
            ops.apply(Operator::Norm, &[1.0; 3]),
            Err(SwweError::Shape { expected: 5, found: 3 })
        ));
        let mut out = vec![0.0; 4];
        assert!(ops.apply_q(&[0.0; 5], &mut out).is_err());
    }

    #[test]
    fn negative_alpha_rejected() {
        let g = Grid::uniform(4, 1.0).unwrap();
        assert!(build_operators(&g, -0.1).is_err());
    }
}
