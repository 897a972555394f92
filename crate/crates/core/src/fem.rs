//! Piecewise-linear Galerkin discretization on the fixed interval `[0, 1]`.
//!
//! With `u_k = sum_j alpha_j phi_j`, the semi-discrete system reads
//!
//! ```text
//! h'     = A0 (alpha_{N-1} - sigma*(h))
//! M alpha' = (h'/h) K alpha - (1/h²) A alpha
//!          + (Bi/h) (b*(tau) - H alpha_0) e_0 - (h'/h) alpha_{N-1} e_{N-1}
//! ```
//!
//! where `M_ij = ∫ phi_i phi_j`, `K_ij = ∫ y phi_i phi_j'` and
//! `A_ij = ∫ phi_i' phi_j'`.

use crate::error::{Error, Result};
use crate::params::DimensionlessParams;
use crate::tridiag::{Tridiagonal, TridiagonalLu, DEFAULT_PIVOT_FLOOR};

/// Uniform mesh `y_j = j k`, `k = 1 / (N - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    nodes: usize,
}

impl Mesh {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::invalid("N", format!("need at least 2 nodes, got {nodes}")));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.nodes {
            1.0
        } else {
            j as f64 * self.spacing()
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.node(j)).collect()
    }

    /// Hat function `phi_j` evaluated at `y`.
    pub fn basis(&self, j: usize, y: f64) -> f64 {
        let k = self.spacing();
        let yj = self.node(j);
        if j > 0 && y >= self.node(j - 1) && y <= yj {
            (y - self.node(j - 1)) / k
        } else if j + 1 < self.nodes && y >= yj && y <= self.node(j + 1) {
            (self.node(j + 1) - y) / k
        } else {
            0.0
        }
    }

    /// Derivative of `phi_j` on element `[y_e, y_{e+1}]`.
    pub fn basis_slope(&self, j: usize, element: usize) -> f64 {
        let k = self.spacing();
        if j == element {
            -1.0 / k
        } else if j == element + 1 {
            1.0 / k
        } else {
            0.0
        }
    }
}

/// Assembled mass `M`, convection `K` and stiffness `A` matrices plus the
/// once-factored mass matrix.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: Mesh,
    pub mass: Tridiagonal,
    pub convection: Tridiagonal,
    pub stiffness: Tridiagonal,
    mass_lu: TridiagonalLu,
}

pub fn assemble(mesh: Mesh) -> Result<FemSystem> {
    let n = mesh.nodes();
    let k = mesh.spacing();
    let y = mesh.coordinates();

    let mut m_diag = vec![4.0 * k / 6.0; n];
    m_diag[0] = 2.0 * k / 6.0;
    m_diag[n - 1] = 2.0 * k / 6.0;
    let mass = Tridiagonal::new(vec![k / 6.0; n - 1], m_diag, vec![k / 6.0; n - 1])?;

    let mut a_diag = vec![2.0 / k; n];
    a_diag[0] = 1.0 / k;
    a_diag[n - 1] = 1.0 / k;
    let stiffness = Tridiagonal::new(vec![-1.0 / k; n - 1], a_diag, vec![-1.0 / k; n - 1])?;

    let mut k_diag = vec![-k / 3.0; n];
    k_diag[0] = -k / 6.0;
    k_diag[n - 1] = (y[n - 2] + 2.0 * y[n - 1]) / 6.0;
    let k_upper = (0..n - 1).map(|i| (2.0 * y[i] + y[i + 1]) / 6.0).collect();
    let k_lower = (1..n).map(|i| -(y[i - 1] + 2.0 * y[i]) / 6.0).collect();
    let convection = Tridiagonal::new(k_lower, k_diag, k_upper)?;

    debug_assert!(
        convection_matches_quadrature(&mesh, &convection),
        "closed-form K disagrees with quadrature"
    );

    let mass_lu = mass.factor(DEFAULT_PIVOT_FLOOR)?;
    Ok(FemSystem {
        mesh,
        mass,
        convection,
        stiffness,
        mass_lu,
    })
}

/// Two-point Gauss on each element integrates the quadratic `y phi_i phi_j'` exactly.
fn convection_matches_quadrature(mesh: &Mesh, k_mat: &Tridiagonal) -> bool {
    let n = mesh.nodes();
    let h = mesh.spacing();
    let g = 0.5 / 3f64.sqrt();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i.saturating_sub(1)..(i + 2).min(n) {
            let mut sum = 0.0;
            for e in i.saturating_sub(1)..i.min(n - 2) + 1 {
                let (a, b) = (mesh.node(e), mesh.node(e + 1));
                let slope = mesh.basis_slope(j, e);
                for q in [0.5 - g, 0.5 + g] {
                    let yq = a + q * (b - a);
                    sum += 0.5 * h * yq * mesh.basis(i, yq) * slope;
                }
            }
            worst = worst.max((sum - k_mat.get(i, j)).abs());
        }
    }
    worst < 1e-12
}

impl FemSystem {
    pub fn nodes(&self) -> usize {
        self.mesh.nodes()
    }

    /// First unit vector `e_0` (Robin inflow node).
    pub fn e_first(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.nodes()];
        e[0] = 1.0;
        e
    }

    /// Last unit vector `e_{N-1}` (front node).
    pub fn e_last(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.nodes()];
        e[self.nodes() - 1] = 1.0;
        e
    }

    /// Apply `M^{-1}` in place.
    pub fn solve_mass(&self, x: &mut [f64]) {
        self.mass_lu.solve_in_place(x);
    }

    /// Total dimensionless mass `h (M alpha) · 1`.
    pub fn total_mass(&self, alpha: &[f64], h: f64) -> f64 {
        h * self.mass.mul_vec(alpha).iter().sum::<f64>()
    }

    /// Right-hand side of the semi-discrete system.
    ///
    /// Writes `alpha'` into `d_alpha` and returns `h'`. The front speed is
    /// evaluated first and then reused inside the concentration equation.
    pub fn rhs(
        &self,
        params: &DimensionlessParams,
        tau: f64,
        alpha: &[f64],
        h: f64,
        d_alpha: &mut [f64],
    ) -> Result<f64> {
        let n = self.nodes();
        debug_assert_eq!(alpha.len(), n);
        debug_assert_eq!(d_alpha.len(), n);
        let fail = |reason: &str| Error::Integration {
            tau,
            front: h,
            reason: reason.to_string(),
        };
        if !(h > 0.0) {
            return Err(fail("front position is not positive"));
        }

        let last = alpha[n - 1];
        let dh = params.thiele * (last - params.swelling(h));
        let drift = dh / h;
        let inv_h2 = 1.0 / (h * h);

        // (h'/h) K alpha - (1/h²) A alpha, fused over the three bands
        let kc = &self.convection;
        let ks = &self.stiffness;
        for i in 0..n {
            let mut conv = kc.diag[i] * alpha[i];
            let mut stiff = ks.diag[i] * alpha[i];
            if i > 0 {
                conv += kc.lower[i - 1] * alpha[i - 1];
                stiff += ks.lower[i - 1] * alpha[i - 1];
            }
            if i + 1 < n {
                conv += kc.upper[i] * alpha[i + 1];
                stiff += ks.upper[i] * alpha[i + 1];
            }
            d_alpha[i] = drift * conv - inv_h2 * stiff;
        }
        d_alpha[0] += params.biot * (params.reservoir(tau) - params.henry * alpha[0]) / h;
        d_alpha[n - 1] -= drift * last;
        self.solve_mass(d_alpha);

        if !dh.is_finite() || d_alpha.iter().any(|v| !v.is_finite()) {
            return Err(fail("right-hand side is not finite"));
        }
        Ok(dh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{nondimensionalize, PhysicalParams, SwellingLaw};

    fn dense(n: usize) -> Vec<Vec<f64>> {
        assemble(Mesh::new(n).unwrap()).unwrap().convection.to_dense()
    }

    #[test]
    fn two_node_matrices() {
        let sys = assemble(Mesh::new(2).unwrap()).unwrap();
        let m = sys.mass.to_dense();
        let a = sys.stiffness.to_dense();
        let k = dense(2);
        let close = |x: f64, y: f64| (x - y).abs() < 1e-15;
        assert!(close(m[0][0], 2.0 / 6.0) && close(m[0][1], 1.0 / 6.0));
        assert!(close(m[1][0], 1.0 / 6.0) && close(m[1][1], 2.0 / 6.0));
        assert_eq!(a, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!(close(k[0][0], -1.0 / 6.0) && close(k[0][1], 1.0 / 6.0));
        assert!(close(k[1][0], -1.0 / 3.0) && close(k[1][1], 1.0 / 3.0));
    }

    #[test]
    fn three_node_convection() {
        // entries from direct integration on [0, 1/2] and [1/2, 1]
        let k = dense(3);
        let expect = [
            [-1.0 / 12.0, 1.0 / 12.0, 0.0],
            [-1.0 / 6.0, -1.0 / 6.0, 1.0 / 3.0],
            [0.0, -5.0 / 12.0, 5.0 / 12.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15, "K[{i}][{j}]");
            }
        }
    }

    #[test]
    fn rejects_single_node() {
        assert!(Mesh::new(1).is_err());
        assert!(Mesh::new(0).is_err());
    }

    #[test]
    fn boundary_selectors() {
        let sys = assemble(Mesh::new(4).unwrap()).unwrap();
        assert_eq!(sys.e_first(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(sys.e_last(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn rhs_initial_front_speed() {
        let p = PhysicalParams::dense_rubber();
        let d = nondimensionalize(&p).unwrap();
        let sys = assemble(Mesh::new(100).unwrap()).unwrap();
        let mut da = vec![0.0; 100];
        let dh = sys.rhs(&d, 0.0, &vec![1.0; 100], d.initial_front, &mut da).unwrap();
        assert!((dh - d.thiele * (1.0 - 0.01)).abs() < 1e-6 * dh);
        assert!(dh > 0.0);
    }

    #[test]
    fn rhs_vanishes_at_equilibrium() {
        let p = PhysicalParams::dense_rubber();
        let d = nondimensionalize(&p).unwrap();
        let u_star = d.reservoir(0.0) / d.henry;
        assert_eq!(u_star, 4.0);
        let h_star = u_star / d.swelling_slope;
        assert!((h_star - 0.4).abs() < 1e-15);
        let sys = assemble(Mesh::new(30).unwrap()).unwrap();
        let mut da = vec![0.0; 30];
        let dh = sys.rhs(&d, 0.0, &vec![u_star; 30], h_star, &mut da).unwrap();
        assert!(dh.abs() < 1e-6, "h' = {dh}");
        assert!(da.iter().all(|v| v.abs() < 1e-6), "{da:?}");
    }

    #[test]
    fn rhs_unforced_uniform_is_still() {
        let p = PhysicalParams {
            absorption_rate: 0.0,
            swelling: SwellingLaw::none(),
            ..PhysicalParams::dense_rubber()
        };
        let mut d = nondimensionalize(&p).unwrap();
        d.thiele = 0.0;
        let sys = assemble(Mesh::new(12).unwrap()).unwrap();
        let mut da = vec![1.0; 12];
        let dh = sys.rhs(&d, 0.0, &[1.0; 12], 0.3, &mut da).unwrap();
        assert_eq!(dh, 0.0);
        assert!(da.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rhs_rejects_overflow_and_bad_front() {
        let p = PhysicalParams::dense_rubber();
        let mut d = nondimensionalize(&p).unwrap();
        let sys = assemble(Mesh::new(5).unwrap()).unwrap();
        let mut da = vec![0.0; 5];
        assert!(sys.rhs(&d, 0.0, &[1.0; 5], 0.0, &mut da).is_err());
        d.thiele = f64::MAX;
        assert!(matches!(
            sys.rhs(&d, 0.0, &[1.0; 5], 1e-300, &mut da),
            Err(Error::Integration { .. })
        ));
    }
}
