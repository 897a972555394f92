//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{Error, Result};

/// Relative pivot floor used by [`thomas_solve`].
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-14;

/// Square tridiagonal matrix stored by diagonals.
///
/// `lower[i]` is entry `(i + 1, i)`, `upper[i]` is entry `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::invalid(
                "tridiagonal",
                format!(
                    "inconsistent diagonal lengths {}/{}/{}",
                    lower.len(),
                    n,
                    upper.len()
                ),
            ));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![1.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.lower[j]
        } else {
            0.0
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        if n == 1 {
            out[0] = self.diag[0] * x[0];
            return;
        }
        out[0] = self.diag[0] * x[0] + self.upper[0] * x[1];
        for i in 1..n - 1 {
            out[i] = self.lower[i - 1] * x[i - 1] + self.diag[i] * x[i] + self.upper[i] * x[i + 1];
        }
        out[n - 1] = self.lower[n - 2] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// LU factorization without pivoting. Fails if any pivot falls below
    /// `floor` times the largest diagonal magnitude.
    pub fn factor(&self, floor: f64) -> Result<TridiagonalLu> {
        let n = self.len();
        let scale = self.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let min_pivot = floor * scale;
        let mut pivot = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        pivot.push(self.diag[0]);
        if !(pivot[0].abs() > min_pivot) {
            return Err(Error::PivotBreakdown {
                row: 0,
                pivot: pivot[0],
            });
        }
        for i in 1..n {
            let l = self.lower[i - 1] / pivot[i - 1];
            let p = self.diag[i] - l * self.upper[i - 1];
            if !(p.abs() > min_pivot) {
                return Err(Error::PivotBreakdown { row: i, pivot: p });
            }
            mult.push(l);
            pivot.push(p);
        }
        Ok(TridiagonalLu {
            mult,
            pivot,
            upper: self.upper.clone(),
        })
    }
}

/// Factored form reused across many right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    mult: Vec<f64>,
    pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn len(&self) -> usize {
        self.pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivot.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        for i in 1..n {
            x[i] -= self.mult[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.pivot[i];
        }
    }
}

/// Solve `tri * x = rhs` by the Thomas algorithm.
pub fn thomas_solve(tri: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != tri.len() {
        return Err(Error::invalid(
            "rhs",
            format!("length {} does not match matrix size {}", rhs.len(), tri.len()),
        ));
    }
    let lu = tri.factor(DEFAULT_PIVOT_FLOOR)?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}
