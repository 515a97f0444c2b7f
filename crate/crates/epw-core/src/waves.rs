//! Propagative and evanescent plane waves: directions, evaluation, modal
//! coefficients and truncated Jacobi-Anger expansions.

use crate::basis::{i_pow, ln_beta, ln_beta_seq};
use crate::error::{domain, Result};
use crate::specfun::{
    normalized_assoc_legendre_ln_table, normalized_ferrers_table, sph_bessel_j_log_seq,
    spherical_angles, spherical_harmonics_all, ModeIndex, TriTable,
};
use crate::wigner::{wigner_d, WignerSmallD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Evanescent-wave parameter `y = (theta1, theta2, theta3, zeta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub zeta: f64,
}

impl ParametricPoint {
    pub fn new(theta1: f64, theta2: f64, theta3: f64, zeta: f64) -> Result<Self> {
        let tau = 2.0 * PI;
        if !(0.0..=PI).contains(&theta1)
            || !(0.0..tau).contains(&theta2)
            || !(0.0..tau).contains(&theta3)
            || !(zeta >= 0.0 && zeta.is_finite())
        {
            return domain(format!(
                "parameter out of range: ({theta1}, {theta2}, {theta3}, {zeta})"
            ));
        }
        Ok(Self { theta1, theta2, theta3, zeta })
    }

    /// `z = zeta / (2 kappa) + 1`.
    pub fn z(&self, kappa: f64) -> f64 {
        self.zeta / (2.0 * kappa) + 1.0
    }
}

/// Complex direction `d` with `d . d = 1`.
pub type ComplexDirection = [Complex64; 3];

/// Rotation `R = R_z(theta2) R_y(theta1) R_z(theta3)`, row-major.
pub fn rotation_matrix(theta1: f64, theta2: f64, theta3: f64) -> [[f64; 3]; 3] {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    [
        [c1 * c2 * c3 - s2 * s3, -c1 * c2 * s3 - s2 * c3, s1 * c2],
        [c1 * s2 * c3 + c2 * s3, -c1 * s2 * s3 + c2 * c3, s1 * s2],
        [-s1 * c3, s1 * s3, c1],
    ]
}

/// `(sin t1 cos t2, sin t1 sin t2, cos t1)`.
pub fn propagative_direction(theta1: f64, theta2: f64) -> [f64; 3] {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    [s1 * c2, s1 * s2, c1]
}

/// `d(y) = R (i sqrt(z^2-1), 0, z)`.
pub fn evanescent_direction(y: &ParametricPoint, kappa: f64) -> ComplexDirection {
    let r = rotation_matrix(y.theta1, y.theta2, y.theta3);
    let z = y.z(kappa);
    let im = ((z - 1.0) * (z + 1.0)).sqrt();
    [
        Complex64::new(z * r[0][2], im * r[0][0]),
        Complex64::new(z * r[1][2], im * r[1][0]),
        Complex64::new(z * r[2][2], im * r[2][0]),
    ]
}

pub fn real_direction(d: [f64; 3]) -> ComplexDirection {
    [Complex64::new(d[0], 0.0), Complex64::new(d[1], 0.0), Complex64::new(d[2], 0.0)]
}

/// Unconjugated product `d . x`.
pub fn cdot(d: &ComplexDirection, x: &[f64; 3]) -> Complex64 {
    d[0] * x[0] + d[1] * x[1] + d[2] * x[2]
}

/// `e^{i kappa d . x}`.
pub fn plane_wave_eval(d: &ComplexDirection, kappa: f64, x: [f64; 3]) -> Complex64 {
    (Complex64::i() * kappa * cdot(d, &x)).exp()
}

fn check_inside(x: &[f64; 3]) -> Result<f64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if !(r < 1.0) {
        return domain(format!("Jacobi-Anger series needs |x| < 1, got {r}"));
    }
    Ok(r)
}

/// Partial sum `4 pi sum_{l<=L} i^l j_l(kappa|x|) sum_m conj(Y_l^m(d)) Y_l^m(x/|x|)`.
pub fn jacobi_anger_propagative(d: [f64; 3], kappa: f64, x: [f64; 3], l_max: usize) -> Result<Complex64> {
    let r = check_inside(&x)?;
    if r == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let j = sph_bessel_j_log_seq(l_max, kappa * r)?;
    let (a1, a2) = spherical_angles(d);
    let (b1, b2) = spherical_angles(x);
    let yd = spherical_harmonics_all(l_max, a1, a2);
    let yx = spherical_harmonics_all(l_max, b1, b2);
    let mut total = Complex64::new(0.0, 0.0);
    for (l, jl) in j.iter().enumerate() {
        let inner: Complex64 =
            (l * l..(l + 1) * (l + 1)).map(|k| yd[k].conj() * yx[k]).sum();
        total += i_pow(l as i64) * inner * jl.value();
    }
    Ok(total * 4.0 * PI)
}

/// Complex Jacobi-Anger partial sum
/// `4 pi sum_{l<=L} i^l j_l(kappa|x|) sum_m Y_l^m(d_up(z)) Y_l^m(R^T x/|x|)`,
/// where `Y_l^m(d_up(z)) = i^{-m} gamma_l^m P_l^m(z)`.
pub fn jacobi_anger_evanescent(y: &ParametricPoint, kappa: f64, x: [f64; 3], l_max: usize) -> Result<Complex64> {
    let r = check_inside(&x)?;
    if r == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rot = rotation_matrix(y.theta1, y.theta2, y.theta3);
    let xr = [
        rot[0][0] * x[0] + rot[1][0] * x[1] + rot[2][0] * x[2],
        rot[0][1] * x[0] + rot[1][1] * x[1] + rot[2][1] * x[2],
        rot[0][2] * x[0] + rot[1][2] * x[1] + rot[2][2] * x[2],
    ];
    let j = sph_bessel_j_log_seq(l_max, kappa * r)?;
    let q = normalized_assoc_legendre_ln_table(l_max, y.z(kappa))?;
    let (b1, b2) = spherical_angles(xr);
    let yx = spherical_harmonics_all(l_max, b1, b2);
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..=l_max {
        if j[l].sign == 0.0 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for m in -(l as i64)..=(l as i64) {
            let mag = j[l].sign * (q.get(l, m.unsigned_abs() as usize) + j[l].ln).exp();
            if mag == 0.0 {
                continue;
            }
            inner += i_pow(-m) * yx[ModeIndex { ell: l, m }.flat()] * mag;
        }
        total += i_pow(l as i64) * inner;
    }
    Ok(total * 4.0 * PI)
}

/// Modal coefficient modulus of a propagative wave,
/// `(4 pi / beta_l) gamma_l^m |P_l^m(cos theta1)|`.
pub fn modal_coeff_propagative(ell: usize, m: i64, theta1: f64, kappa: f64) -> Result<f64> {
    ModeIndex::new(ell, m)?;
    let t = normalized_ferrers_table(ell, theta1.cos().clamp(-1.0, 1.0))?;
    let p = t.get(ell, m.unsigned_abs() as usize).abs();
    Ok(4.0 * PI * p * (-ln_beta(ell, kappa)?).exp())
}

/// Modal coefficient moduli of an evanescent wave for all `m` of degree `ell`,
/// given the normalized Legendre table at `z`, a d-block at `theta1` and `ln beta_l`.
pub fn modal_coeffs_evanescent_from(
    ell: usize,
    theta3: f64,
    q: &TriTable,
    d: &WignerSmallD,
    ln_beta_l: f64,
) -> Vec<f64> {
    let l = ell as i64;
    let lnq: Vec<f64> = (-l..=l).map(|mp| q.get(ell, mp.unsigned_abs() as usize)).collect();
    let shift = lnq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<Complex64> = (-l..=l)
        .zip(&lnq)
        .map(|(mp, lq)| i_pow(-mp) * Complex64::from_polar((lq - shift).exp(), -(mp as f64) * theta3))
        .collect();
    (-l..=l)
        .map(|m| {
            let s: Complex64 = (-l..=l)
                .zip(&weights)
                .map(|(mp, w)| w * d.get(mp, m))
                .sum();
            let ln = (4.0 * PI).ln() - ln_beta_l + shift + s.norm().ln();
            ln.exp()
        })
        .collect()
}

/// Modal coefficient modulus of an evanescent wave,
/// `(4 pi / beta_l) |sum_m' gamma_l^m' i^{-m'} d_l^{m',m}(theta1) e^{-i m' theta3} P_l^m'(z)|`.
pub fn modal_coeff_evanescent(ell: usize, m: i64, y: &ParametricPoint, kappa: f64) -> Result<f64> {
    ModeIndex::new(ell, m)?;
    let q = normalized_assoc_legendre_ln_table(ell, y.z(kappa))?;
    let d = wigner_d(ell, y.theta1)?;
    let all = modal_coeffs_evanescent_from(ell, y.theta3, &q, &d, ln_beta(ell, kappa)?);
    Ok(all[(m + ell as i64) as usize])
}

/// `ln` of the l2 norm over `m` of the modal coefficients,
/// `(4 pi / beta_l) (sum_m' (gamma_l^m' P_l^m'(z))^2)^{1/2}`.
pub fn ln_modal_norm(ell: usize, zeta: f64, kappa: f64) -> Result<f64> {
    let q = normalized_assoc_legendre_ln_table(ell, zeta / (2.0 * kappa) + 1.0)?;
    let lb = ln_beta_seq(ell, kappa)?[ell];
    Ok((4.0 * PI).ln() - lb + 0.5 * ln_sum_sq_row(&q, ell))
}

/// `ln sum_{m'=-l}^{l} (gamma_l^m' P_l^m'(z))^2` from a log table.
pub fn ln_sum_sq_row(q: &TriTable, ell: usize) -> f64 {
    let shift = (0..=ell).map(|m| q.get(ell, m)).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = (0..=ell)
        .map(|m| {
            let v = (2.0 * (q.get(ell, m) - shift)).exp();
            if m == 0 {
                v
            } else {
                2.0 * v
            }
        })
        .sum();
    2.0 * shift + s.ln()
}

/// l2 norm over `m` of the modal coefficients of degree `ell`.
pub fn modal_norm(ell: usize, zeta: f64, kappa: f64) -> Result<f64> {
    Ok(ln_modal_norm(ell, zeta, kappa)?.exp())
}
