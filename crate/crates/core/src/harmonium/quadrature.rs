//! Gauss-Hermite rules and Gaussian-weighted product grids.
//!
//! Weights are stored pre-multiplied by exp(z^2) so that integrands can be
//! evaluated together with their own Gaussian factor; every stored number
//! then stays O(1) and no overflow occurs at the outer nodes.

use nalgebra::{DMatrix, SymmetricEigen};

/// Hermite functions psi_0..psi_{k_max} at x (orthonormal in L^2(R)).
pub fn hermite_functions(x: f64, k_max: usize, out: &mut [f64]) {
    debug_assert!(out.len() > k_max);
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if k_max == 0 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * x * out[0];
    for k in 1..k_max {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// G-point Gauss-Hermite rule for the weight exp(-z^2).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    /// w_j exp(z_j^2)
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub-Welsch nodes polished by Newton steps on psi_G; weights from
    /// the Christoffel function 1 / sum_{k<G} psi_k(z)^2.
    pub fn new(g: usize) -> Self {
        assert!(g >= 1, "Gauss-Hermite rule needs at least one node");
        let jacobi = DMatrix::from_fn(g, g, |i, j| {
            if i.abs_diff(j) == 1 {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        let mut psi = vec![0.0; g + 1];
        for z in nodes.iter_mut() {
            for _ in 0..3 {
                hermite_functions(*z, g, &mut psi);
                let deriv = (2.0 * g as f64).sqrt() * psi[g - 1] - *z * psi[g];
                if deriv == 0.0 {
                    break;
                }
                *z -= psi[g] / deriv;
            }
        }
        // exact symmetry
        for i in 0..g / 2 {
            let m = 0.5 * (nodes[g - 1 - i] - nodes[i]);
            nodes[i] = -m;
            nodes[g - 1 - i] = m;
        }
        if g % 2 == 1 {
            nodes[g / 2] = 0.0;
        }
        let scaled_weights = nodes
            .iter()
            .map(|&z| {
                hermite_functions(z, g - 1, &mut psi);
                1.0 / psi[..g].iter().map(|p| p * p).sum::<f64>()
            })
            .collect();
        Self { nodes, scaled_weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Smallest G integrating polynomials of degree `degree` exactly.
pub fn nodes_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

/// Product grid for integrands p(x) exp(-x^T Q x) on R^N with
/// Q = a_cm P_cm + a_rel (1 - P_cm), P_cm the projector onto (1,..,1).
///
/// x = T z with T = O diag(a)^(-1/2) and O a Helmert basis, so x^T Q x = |z|^2.
#[derive(Debug, Clone)]
pub struct PrincipalGrid {
    pub n: usize,
    pub rule: GaussHermite,
    /// Row-major N x N transform.
    pub transform: Vec<f64>,
    pub jacobian: f64,
}

impl PrincipalGrid {
    pub fn new(n: usize, a_cm: f64, a_rel: f64, g: usize) -> Self {
        assert!(a_cm > 0.0 && a_rel > 0.0);
        let helmert = helmert_basis(n);
        let scale: Vec<f64> = (0..n).map(|j| if j == 0 { a_cm } else { a_rel }.sqrt().recip()).collect();
        let mut transform = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                transform[i * n + j] = helmert[i * n + j] * scale[j];
            }
        }
        let jacobian = scale.iter().product();
        Self { n, rule: GaussHermite::new(g), transform, jacobian }
    }

    pub fn points(&self) -> usize {
        self.rule.len().pow(self.n as u32)
    }

    /// Coordinates and weight (Jacobian included) of grid point `p`.
    pub fn point(&self, p: usize, x: &mut [f64]) -> f64 {
        let g = self.rule.len();
        let n = self.n;
        let mut z = [0.0f64; 8];
        let mut rem = p;
        let mut w = self.jacobian;
        for j in (0..n).rev() {
            let idx = rem % g;
            rem /= g;
            z[j] = self.rule.nodes[idx];
            w *= self.rule.scaled_weights[idx];
        }
        for (i, xi) in x.iter_mut().enumerate().take(n) {
            *xi = (0..n).map(|j| self.transform[i * n + j] * z[j]).sum();
        }
        w
    }

    /// sum_p W_p f(x_p), approximating the integral of f over R^N.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut x = vec![0.0; self.n];
        let mut acc = 0.0;
        for p in 0..self.points() {
            let w = self.point(p, &mut x);
            acc += w * f(&x);
        }
        acc
    }
}

/// Orthonormal basis (row-major, columns are vectors) whose first column is
/// (1,..,1)/sqrt(N).
fn helmert_basis(n: usize) -> Vec<f64> {
    let mut o = vec![0.0; n * n];
    let inv = (n as f64).sqrt().recip();
    for i in 0..n {
        o[i * n] = inv;
    }
    for j in 1..n {
        let norm = ((j * (j + 1)) as f64).sqrt().recip();
        for i in 0..j {
            o[i * n + j] = norm;
        }
        o[j * n + j] = -(j as f64) * norm;
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn five_point_rule_matches_tabulated_nodes() {
        let r = GaussHermite::new(5);
        let expect = [-2.020182870456086, -0.9585724646138185, 0.0, 0.9585724646138185, 2.020182870456086];
        for (a, b) in r.nodes.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w: Vec<f64> = r.nodes.iter().zip(&r.scaled_weights).map(|(z, s)| s * (-z * z).exp()).collect();
        let expect_w = [0.01995324205904591, 0.3936193231522412, 0.9453087204829419, 0.3936193231522412, 0.01995324205904591];
        for (a, b) in w.iter().zip(expect_w) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn moments_are_exact() {
        // int z^(2m) e^(-z^2) = Gamma(m + 1/2)
        for g in [10usize, 41, 90] {
            let r = GaussHermite::new(g);
            let mut gamma = PI.sqrt();
            for m in 0..g.min(30) {
                let approx: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.scaled_weights)
                    .map(|(z, s)| s * (-z * z).exp() * z.powi(2 * m as i32))
                    .sum();
                assert!(((approx - gamma) / gamma).abs() < 1e-12, "g={g} m={m}");
                gamma *= m as f64 + 0.5;
            }
        }
    }

    #[test]
    fn hermite_functions_orthonormal_under_rule() {
        let g = 40;
        let r = GaussHermite::new(g);
        let mut psi = vec![0.0; g];
        let mut gram = vec![0.0; 30 * 30];
        for (z, s) in r.nodes.iter().zip(&r.scaled_weights) {
            hermite_functions(*z, 29, &mut psi);
            for a in 0..30 {
                for b in 0..30 {
                    gram[a * 30 + b] += s * psi[a] * psi[b];
                }
            }
        }
        for a in 0..30 {
            for b in 0..30 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * 30 + b] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn principal_grid_integrates_gaussian() {
        // int exp(-x^T Q x) = pi^(N/2) / sqrt(det Q)
        for n in 2..=4 {
            let grid = PrincipalGrid::new(n, 1.0, 1.7, 3);
            let (a_cm, a_rel) = (1.0, 1.7);
            let q = |x: &[f64]| {
                let s: f64 = x.iter().sum();
                let sq: f64 = x.iter().map(|v| v * v).sum();
                a_rel * sq + (a_cm - a_rel) * s * s / n as f64
            };
            let val = grid.integrate(|x| (-q(x)).exp());
            let exact = PI.powf(n as f64 / 2.0) / (a_cm * a_rel.powi(n as i32 - 1)).sqrt();
            assert!(((val - exact) / exact).abs() < 1e-14);
        }
    }
}
