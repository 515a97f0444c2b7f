//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `(2n+1)!! = 1 * 3 * ... * (2n+1)`.
pub fn double_factorial_odd(n: u32) -> f64 {
    (0..=n).map(|k| f64::from(2 * k + 1)).product()
}

/// `Gamma(n + 1/2)` by the product `sqrt(pi) (2n-1)!! / 2^n`.
pub fn gamma_half_integer(n: u32) -> f64 {
    let mut g = PI.sqrt();
    for k in 0..n {
        g *= f64::from(k) + 0.5;
    }
    g
}

/// Power series `j_l(r) = sum_k (-1)^k r^{l+2k} / (2^k k! (2l+2k+1)!!)`.
pub fn bessel_series(ell: u32, r: f64) -> f64 {
    let mut term = r.powi(ell as i32) / double_factorial_odd(ell);
    let mut sum = term;
    for k in 1..400 {
        term *= -r * r / (2.0 * k as f64 * (2.0 * (ell + k) as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-300 || (term.abs() < 1e-18 * sum.abs() && k > 5) {
            break;
        }
    }
    sum
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `panels` panels of order `order`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(c + 0.5 * h * xi);
        }
    }
    s * 0.5 * h
}

/// Legendre polynomial `P_n(t)` by the three-term recurrence.
pub fn legendre(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Explicit Wigner sum for `d_l^{m,m'}(theta)`, summing over every `k` with
/// nonnegative factorial arguments.
pub fn wigner_explicit(ell: i64, m: i64, mp: i64, theta: f64) -> f64 {
    let f = |n: i64| factorial(n as u32);
    let pre = (f(ell + m) * f(ell - m) * f(ell + mp) * f(ell - mp)).sqrt();
    let (s, c) = (theta / 2.0).sin_cos();
    let mut total = 0.0;
    for k in 0..=(2 * ell) {
        let a = ell - m - k;
        let b = ell + mp - k;
        let d = k + m - mp;
        if a < 0 || b < 0 || d < 0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * pre / (f(a) * f(b) * f(d) * f(k));
        total += w * c.powi((2 * (ell - k) + mp - m) as i32) * s.powi((2 * k + m - mp) as i32);
    }
    total
}

/// Normalization `gamma_l^m` from exact factorials.
pub fn gamma_lm(ell: i64, m: i64) -> f64 {
    ((2 * ell + 1) as f64 / (4.0 * PI) * factorial((ell - m) as u32) / factorial((ell + m) as u32)).sqrt()
}

/// `Q(a, x)` by quadrature of `t^{a-1} e^{-t}` over `[x, x + 400]`, divided by `gamma`.
pub fn upper_q_quadrature(a: f64, x: f64, gamma: f64) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { ((a - 1.0) * t.ln() - t).exp() };
    let upper = x + 400.0 + 4.0 * a;
    integrate(f, x, upper, 4000, 12) / gamma
}

/// Least-squares solution by the normal equations `A^H A x = A^H b` with
/// Gaussian elimination and partial pivoting.
pub fn normal_equations(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let rows = a.len();
    let n = a[0].len();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = (0..rows).map(|r| a[r][i].conj() * a[r][j]).sum();
        }
        m[i][n] = (0..rows).map(|r| a[r][i].conj() * b[r]).sum();
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col].clone();
            for (dst, v) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * v;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// `||b~_l||_B^2 = 2 int_0^1 j_l(kr)^2 r^2 dr + k^{-2} (l j_l(k)^2 - k j_l(k) j_{l+1}(k))`
/// with series Bessel values and Gauss-Legendre radial quadrature.
pub fn b_norm_sq(ell: u32, kappa: f64) -> f64 {
    let radial = integrate(|r| bessel_series(ell, kappa * r).powi(2) * r * r, 0.0, 1.0, 40, 16);
    let jl = bessel_series(ell, kappa);
    let jl1 = bessel_series(ell + 1, kappa);
    2.0 * radial + (ell as f64 * jl * jl - kappa * jl * jl1) / (kappa * kappa)
}

/// Simple deterministic unit vector stream for tests.
pub fn unit_from(u: f64, v: f64) -> [f64; 3] {
    let z = 1.0 - 2.0 * u;
    let s = (1.0 - z * z).max(0.0).sqrt();
    let p = 2.0 * PI * v;
    [s * p.cos(), s * p.sin(), z]
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
