//! Normalized spherical waves `b_l^m = beta_l j_l(kappa r) Y_l^m`, the Herglotz
//! density normalization `alpha_l` and the diagonal Herglotz transform
//! `tau_l = 4 pi i^l / (alpha_l beta_l)`.

use crate::error::{domain, EpwError, Result};
use crate::specfun::{
    ln_factorial, ln_gamma, ln_upper_incomplete_q, mode_count, signed_log_sum,
    sph_bessel_j_log_seq, spherical_angles, spherical_harmonic, spherical_harmonics_all,
    SignedLog,
};
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return domain(format!("wavenumber must be positive and finite, got {kappa}"));
    }
    Ok(())
}

/// `ln beta_l` for `l = 0..=lmax`.
///
/// `beta_l^{-2} = (1 + l/k^2) j_l^2 - j_{l-1} j_{l+1} - j_l j_{l+1}/k` with
/// all Bessel values at `k`, summed in signed log form.
pub fn ln_beta_seq(lmax: usize, kappa: f64) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let j = sph_bessel_j_log_seq(lmax + 1, kappa)?;
    let jm1 = SignedLog::from_value(kappa.cos() / kappa);
    let inv_k = SignedLog::from_value(-1.0 / kappa);
    (0..=lmax)
        .map(|l| {
            let prev = if l == 0 { jm1 } else { j[l - 1] };
            let t1 = SignedLog {
                ln: (1.0 + l as f64 / (kappa * kappa)).ln() + 2.0 * j[l].ln,
                sign: j[l].sign * j[l].sign,
            };
            let mut t2 = prev * j[l + 1];
            t2.sign = -t2.sign;
            let t3 = j[l] * j[l + 1] * inv_k;
            let s = signed_log_sum(&[t1, t2, t3]);
            if s.sign <= 0.0 {
                return Err(EpwError::Numeric(format!("nonpositive norm for degree {l}")));
            }
            Ok(-0.5 * s.ln)
        })
        .collect()
}

/// `ln beta_l`.
pub fn ln_beta(ell: usize, kappa: f64) -> Result<f64> {
    Ok(ln_beta_seq(ell, kappa)?[ell])
}

/// Normalization `beta_l` of the spherical wave of degree `l`.
pub fn beta(ell: usize, kappa: f64) -> Result<f64> {
    Ok(ln_beta(ell, kappa)?.exp())
}

/// `ln` of the approximation
/// `alpha_l ~ [2 sqrt(pi) e^{2k} Gamma(l+1/2) Gamma(2l+3/2, 2k) / (l! k^{2l})]^{-1/2}`.
pub fn ln_alpha_approx(ell: usize, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let l = ell as f64;
    let a = 2.0 * l + 1.5;
    let ln_upper_gamma = ln_gamma(a) + ln_upper_incomplete_q(a, 2.0 * kappa)?;
    let ln_inv_sq = 2f64.ln() + 0.5 * PI.ln() + 2.0 * kappa + ln_gamma(l + 0.5) + ln_upper_gamma
        - ln_factorial(ell)
        - 2.0 * l * kappa.ln();
    Ok(-0.5 * ln_inv_sq)
}

/// Approximate Herglotz density normalization `alpha_l`.
pub fn alpha_approx(ell: usize, kappa: f64) -> Result<f64> {
    Ok(ln_alpha_approx(ell, kappa)?.exp())
}

/// `|tau_l| = 4 pi / (alpha_l beta_l)`.
pub fn tau_abs(ell: usize, kappa: f64) -> Result<f64> {
    Ok(((4.0 * PI).ln() - ln_alpha_approx(ell, kappa)? - ln_beta(ell, kappa)?).exp())
}

/// `i^k` for integer `k`, exactly.
pub fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Per-degree constants of the spherical-wave and Herglotz bases.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisContext {
    pub kappa: f64,
    pub lmax: usize,
    pub log_beta: Vec<f64>,
    pub log_alpha: Vec<f64>,
    pub tau_abs: Vec<f64>,
}

impl BasisContext {
    pub fn new(kappa: f64, lmax: usize) -> Result<Self> {
        let log_beta = ln_beta_seq(lmax, kappa)?;
        let log_alpha =
            (0..=lmax).map(|l| ln_alpha_approx(l, kappa)).collect::<Result<Vec<_>>>()?;
        let tau_abs = log_alpha
            .iter()
            .zip(&log_beta)
            .map(|(a, b)| ((4.0 * PI).ln() - a - b).exp())
            .collect();
        Ok(Self { kappa, lmax, log_beta, log_alpha, tau_abs })
    }

    /// `tau_l` with its phase `i^l` applied exactly.
    pub fn tau(&self, ell: usize) -> Complex64 {
        i_pow(ell as i64) * self.tau_abs[ell]
    }

    fn check_len(&self, n: usize) -> Result<usize> {
        let l = (n as f64).sqrt().round() as usize;
        if l == 0 || l * l != n || l - 1 > self.lmax {
            return Err(EpwError::Shape(format!(
                "coefficient vector of length {n} does not match degree <= {}",
                self.lmax
            )));
        }
        Ok(l - 1)
    }

    /// Maps Herglotz-basis coefficients to spherical-wave coefficients.
    pub fn herglotz_diag_forward(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let lmax = self.check_len(coeffs.len())?;
        let mut out = coeffs.to_vec();
        for l in 0..=lmax {
            let t = self.tau(l);
            for c in &mut out[l * l..(l + 1) * (l + 1)] {
                *c *= t;
            }
        }
        Ok(out)
    }

    /// Inverse of [`BasisContext::herglotz_diag_forward`].
    pub fn herglotz_diag_inverse(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let lmax = self.check_len(coeffs.len())?;
        let mut out = coeffs.to_vec();
        for l in 0..=lmax {
            let t = self.tau(l);
            for c in &mut out[l * l..(l + 1) * (l + 1)] {
                *c /= t;
            }
        }
        Ok(out)
    }

    /// All `b_l^m(x)`, `l <= lmax`, in flat mode order.
    pub fn spherical_waves_all(&self, x: [f64; 3]) -> Result<Vec<Complex64>> {
        let r = norm3(&x);
        check_ball(r)?;
        let mut out = vec![Complex64::new(0.0, 0.0); mode_count(self.lmax)];
        if r == 0.0 {
            out[0] = Complex64::new(self.log_beta[0].exp() / (4.0 * PI).sqrt(), 0.0);
            return Ok(out);
        }
        let j = sph_bessel_j_log_seq(self.lmax, self.kappa * r)?;
        let (t1, t2) = spherical_angles(x);
        let y = spherical_harmonics_all(self.lmax, t1, t2);
        for (l, (jl, lb)) in j.iter().zip(&self.log_beta).enumerate() {
            let radial = jl.sign * (lb + jl.ln).exp();
            for k in l * l..(l + 1) * (l + 1) {
                out[k] = y[k] * radial;
            }
        }
        Ok(out)
    }
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn check_ball(r: f64) -> Result<()> {
    if !(r <= 1.0 + 1e-12) {
        return domain(format!("point must lie in the closed unit ball, |x| = {r}"));
    }
    Ok(())
}

/// Spherical wave `b_l^m(x) = beta_l j_l(kappa |x|) Y_l^m(x/|x|)`, `|x| <= 1`.
pub fn spherical_wave_eval(ell: usize, m: i64, kappa: f64, x: [f64; 3]) -> Result<Complex64> {
    let r = norm3(&x);
    check_ball(r)?;
    let lb = ln_beta(ell, kappa)?;
    if r == 0.0 {
        crate::specfun::ModeIndex::new(ell, m)?;
        let v = if ell == 0 { lb.exp() / (4.0 * PI).sqrt() } else { 0.0 };
        return Ok(Complex64::new(v, 0.0));
    }
    let j = sph_bessel_j_log_seq(ell, kappa * r)?[ell];
    let (t1, t2) = spherical_angles(x);
    let y = spherical_harmonic(ell, m, t1, t2)?;
    Ok(y * (j.sign * (lb + j.ln).exp()))
}
