//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Value and slope of hat function `j` restricted to element `e` of a
/// uniform `n`-node mesh on `[0, 1]`.
fn local_hat(n: usize, j: usize, e: usize, y: f64) -> (f64, f64) {
    let k = 1.0 / (n - 1) as f64;
    let left = e as f64 / (n - 1) as f64;
    let right = (e + 1) as f64 / (n - 1) as f64;
    if j == e {
        ((right - y) / k, -1.0 / k)
    } else if j == e + 1 {
        ((y - left) / k, 1.0 / k)
    } else {
        (0.0, 0.0)
    }
}

pub enum Form {
    /// `∫ phi_i phi_j`
    Mass,
    /// `∫ y phi_i phi_j'`
    Convection,
    /// `∫ phi_i' phi_j'`
    Stiffness,
}

/// Entry `(i, j)` of a Galerkin matrix by element-wise quadrature.
pub fn galerkin_entry(form: &Form, n: usize, i: usize, j: usize) -> f64 {
    (0..n - 1)
        .map(|e| {
            let a = e as f64 / (n - 1) as f64;
            let b = (e + 1) as f64 / (n - 1) as f64;
            let f = |y: f64| {
                let (pi, di) = local_hat(n, i, e, y);
                let (pj, dj) = local_hat(n, j, e, y);
                match form {
                    Form::Mass => pi * pj,
                    Form::Convection => y * pi * dj,
                    Form::Stiffness => di * dj,
                }
            };
            simpson(&f, a, b, 1e-16)
        })
        .sum()
}

pub fn galerkin_matrix(form: &Form, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| galerkin_entry(form, n, i, j)).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| m[r][c].abs().total_cmp(&m[s][c].abs())).unwrap();
        m.swap(c, p);
        x.swap(c, p);
        for r in c + 1..n {
            let l = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= l * m[c][k];
            }
            x[r] -= l * x[c];
        }
    }
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (x[c] - s) / m[c][c];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
