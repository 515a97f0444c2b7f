//! Scalar special functions: spherical Bessel functions, Ferrers functions,
//! associated Legendre functions on `z >= 1`, spherical harmonics, the
//! normalization constants `gamma_l^m` and the regularized upper incomplete
//! gamma function `Q(a, x)`.
//!
//! Quantities that overflow for large degrees are also exposed in log space.

use crate::error::{domain, EpwError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Degree/order pair `(ell, m)` with `|m| <= ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub ell: usize,
    pub m: i64,
}

impl ModeIndex {
    pub fn new(ell: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > ell {
            return domain(format!("|m| = {} exceeds ell = {ell}", m.abs()));
        }
        Ok(Self { ell, m })
    }

    /// Position in the flat ordering `(0,0), (1,-1), (1,0), (1,1), (2,-2), ...`.
    pub fn flat(self) -> usize {
        self.ell * self.ell + (self.m + self.ell as i64) as usize
    }

    pub fn from_flat(k: usize) -> Self {
        let ell = (k as f64).sqrt().floor() as usize;
        let ell = if (ell + 1) * (ell + 1) <= k { ell + 1 } else { ell };
        let m = k as i64 - (ell * ell) as i64 - ell as i64;
        Self { ell, m }
    }
}

/// Number of modes with degree at most `lmax`, `(lmax + 1)^2`.
pub fn mode_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// A real number stored as `sign * exp(ln)`; `sign` is -1, 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln: f64,
    pub sign: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { ln: f64::NEG_INFINITY, sign: 0.0 };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { ln: v.abs().ln(), sign: v.signum() }
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln.exp()
        }
    }
}

impl std::ops::Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, other: SignedLog) -> SignedLog {
        if self.sign == 0.0 || other.sign == 0.0 {
            Self::ZERO
        } else {
            Self { ln: self.ln + other.ln, sign: self.sign * other.sign }
        }
    }
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    const TABLE: [f64; 21] = {
        let mut t = [0.0; 21];
        let mut acc = 1.0f64;
        let mut i = 1;
        while i < 21 {
            acc *= i as f64;
            t[i] = acc;
            i += 1;
        }
        t[0] = 1.0;
        t
    };
    if n <= 20 {
        TABLE[n].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Log-sum-exp over signed terms. Returns the signed log of the sum.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    let max = terms
        .iter()
        .filter(|t| t.sign != 0.0)
        .map(|t| t.ln)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let s: f64 = terms
        .iter()
        .filter(|t| t.sign != 0.0)
        .map(|t| t.sign * (t.ln - max).exp())
        .sum();
    let mut r = SignedLog::from_value(s);
    r.ln += max;
    r
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("spherical Bessel argument must be finite and >= 0, got {r}"));
    }
    Ok(())
}

/// Spherical Bessel `j_ell(r)` for `ell = 0..=lmax`, in signed log form.
///
/// Upward recurrence below the turning point `ell <= floor(r)`, backward
/// continued-fraction ratios above it.
pub fn sph_bessel_j_log_seq(lmax: usize, r: f64) -> Result<Vec<SignedLog>> {
    check_r(r)?;
    let mut out = vec![SignedLog::ZERO; lmax + 1];
    if r == 0.0 {
        out[0] = SignedLog { ln: 0.0, sign: 1.0 };
        return Ok(out);
    }
    let n0 = (r.floor() as usize).min(lmax);
    // Upward part, linear space.
    let mut jm1 = r.sin() / r;
    out[0] = SignedLog::from_value(jm1);
    if n0 >= 1 {
        let mut j = r.sin() / (r * r) - r.cos() / r;
        out[1] = SignedLog::from_value(j);
        for l in 1..n0 {
            let jn = (2 * l + 1) as f64 / r * j - jm1;
            jm1 = j;
            j = jn;
            out[l + 1] = SignedLog::from_value(j);
        }
    }
    if n0 == lmax {
        return Ok(out);
    }
    // Ratios rho_k = j_k / j_{k-1} for k in n0+1..=lmax.
    let top = lmax.max(r.ceil() as usize);
    let n_start = top + 60 + (40.0 * top as f64).sqrt().ceil() as usize;
    let mut rho = 0.0f64;
    let mut ratios = vec![0.0f64; lmax + 1];
    for k in (n0 + 1..=n_start).rev() {
        rho = 1.0 / ((2 * k + 1) as f64 / r - rho);
        if k <= lmax {
            ratios[k] = rho;
        }
    }
    let mut cur = out[n0];
    for k in n0 + 1..=lmax {
        cur = cur * SignedLog::from_value(ratios[k]);
        out[k] = cur;
    }
    Ok(out)
}

/// Spherical Bessel function of the first kind `j_ell(r)`.
pub fn spherical_bessel_j(ell: usize, r: f64) -> Result<f64> {
    Ok(sph_bessel_j_log_seq(ell, r)?[ell].value())
}

/// Signed log of `j_ell(r)`.
pub fn spherical_bessel_j_log(ell: usize, r: f64) -> Result<SignedLog> {
    Ok(sph_bessel_j_log_seq(ell, r)?[ell])
}

/// `ln gamma_l^m` with `gamma_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!)`.
pub fn ln_gamma_norm(ell: usize, m: i64) -> Result<f64> {
    let idx = ModeIndex::new(ell, m)?;
    let lm = (idx.ell as i64 - m) as usize;
    let lp = (idx.ell as i64 + m) as usize;
    Ok(0.5 * (((2 * ell + 1) as f64 / (4.0 * PI)).ln() + ln_factorial(lm) - ln_factorial(lp)))
}

/// Normalization constant `gamma_l^m`.
pub fn gamma_norm(ell: usize, m: i64) -> Result<f64> {
    Ok(ln_gamma_norm(ell, m)?.exp())
}

/// Triangular table indexed by `(l, m)` with `0 <= m <= l <= lmax`.
#[derive(Debug, Clone)]
pub struct TriTable {
    pub lmax: usize,
    pub data: Vec<f64>,
}

impl TriTable {
    fn zeros(lmax: usize, fill: f64) -> Self {
        Self { lmax, data: vec![fill; (lmax + 1) * (lmax + 2) / 2] }
    }

    #[inline]
    pub fn idx(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.data[Self::idx(l, m)]
    }
}

#[inline]
fn rec_a(l: usize, m: usize) -> f64 {
    let (l, m) = (l as f64, m as f64);
    ((4.0 * l * l - 1.0) / (l * l - m * m)).sqrt()
}

#[inline]
fn rec_b(l: usize, m: usize) -> f64 {
    let (l, m) = (l as f64, m as f64);
    (((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0)).sqrt()
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return domain(format!("Ferrers argument must lie in [-1, 1], got {x}"));
    }
    Ok(())
}

/// Normalized Ferrers values `gamma_l^m P_l^m(x)` for `0 <= m <= l <= lmax`
/// (Condon-Shortley phase included).
pub fn normalized_ferrers_table(lmax: usize, x: f64) -> Result<TriTable> {
    check_unit_interval(x)?;
    let mut t = TriTable::zeros(lmax, 0.0);
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -(((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt() * s;
        }
        t.data[TriTable::idx(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mut p1 = pmm;
        let mut p0 = x * ((2 * m + 3) as f64).sqrt() * pmm;
        t.data[TriTable::idx(m + 1, m)] = p0;
        for l in m + 2..=lmax {
            let pl = rec_a(l, m) * (x * p0 - rec_b(l, m) * p1);
            p1 = p0;
            p0 = pl;
            t.data[TriTable::idx(l, m)] = pl;
        }
    }
    Ok(t)
}

/// Normalized Ferrers value `gamma_l^m P_l^m(x)` for one `(l, |m|)` column.
fn normalized_ferrers_single(ell: usize, m: usize, x: f64) -> f64 {
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        pmm *= -(((2 * k + 1) as f64) / ((2 * k) as f64)).sqrt() * s;
    }
    if ell == m {
        return pmm;
    }
    let mut p1 = pmm;
    let mut p0 = x * ((2 * m + 3) as f64).sqrt() * pmm;
    for l in m + 2..=ell {
        let pl = rec_a(l, m) * (x * p0 - rec_b(l, m) * p1);
        p1 = p0;
        p0 = pl;
    }
    p0
}

/// Ferrers function `P_l^m(x)` on `[-1, 1]` with the Condon-Shortley phase.
/// Negative orders use `P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m`.
pub fn ferrers_p(ell: usize, m: i64, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    ModeIndex::new(ell, m)?;
    let ma = m.unsigned_abs() as usize;
    let pbar = normalized_ferrers_single(ell, ma, x);
    // P^m = pbar / gamma^m; for negative m, P^{-m} = (-1)^m pbar / gamma^{-m}.
    let lg = ln_gamma_norm(ell, m)?;
    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * pbar * (-lg).exp())
}

/// Spherical harmonic `Y_l^m(theta1, theta2) = gamma_l^m e^{i m theta2} P_l^m(cos theta1)`.
pub fn spherical_harmonic(ell: usize, m: i64, theta1: f64, theta2: f64) -> Result<Complex64> {
    ModeIndex::new(ell, m)?;
    let ma = m.unsigned_abs() as usize;
    let x = theta1.cos().clamp(-1.0, 1.0);
    let mut v = normalized_ferrers_single(ell, ma, x);
    if m < 0 && ma % 2 == 1 {
        v = -v;
    }
    Ok(Complex64::from_polar(1.0, m as f64 * theta2) * v)
}

/// All spherical harmonics `Y_l^m`, `l <= lmax`, in [`ModeIndex::flat`] order.
pub fn spherical_harmonics_all(lmax: usize, theta1: f64, theta2: f64) -> Vec<Complex64> {
    let x = theta1.cos().clamp(-1.0, 1.0);
    let t = normalized_ferrers_table(lmax, x).expect("clamped argument");
    let mut out = vec![Complex64::new(0.0, 0.0); mode_count(lmax)];
    let phases: Vec<Complex64> =
        (0..=lmax).map(|m| Complex64::from_polar(1.0, m as f64 * theta2)).collect();
    for l in 0..=lmax {
        for m in 0..=l {
            let p = t.get(l, m);
            let pos = phases[m] * p;
            out[ModeIndex { ell: l, m: m as i64 }.flat()] = pos;
            if m > 0 {
                let sgn = if m % 2 == 1 { -1.0 } else { 1.0 };
                out[ModeIndex { ell: l, m: -(m as i64) }.flat()] = pos.conj() * sgn;
            }
        }
    }
    out
}

/// Spherical angles `(theta1, theta2)` of a nonzero vector, `theta2` in `[0, 2 pi)`.
pub fn spherical_angles(x: [f64; 3]) -> (f64, f64) {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let t1 = (x[2] / r).clamp(-1.0, 1.0).acos();
    let mut t2 = x[1].atan2(x[0]);
    if t2 < 0.0 {
        t2 += 2.0 * PI;
    }
    (t1, t2)
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 1.0) || !z.is_finite() {
        return domain(format!("associated Legendre argument must be >= 1, got {z}"));
    }
    Ok(())
}

/// `ln P_l^m(z)` for `z >= 1` from the finite binomial sum (all terms nonnegative).
/// Returns `-inf` where the function vanishes.
pub fn assoc_legendre_p_ln(ell: usize, m: i64, z: f64) -> Result<f64> {
    check_z(z)?;
    ModeIndex::new(ell, m)?;
    let ma = m.unsigned_abs() as usize;
    let lzm = (z - 1.0).ln();
    let lzp = (z + 1.0).ln();
    let lnc = |n: usize, k: usize| ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let mut terms = Vec::with_capacity(ell - ma + 1);
    for k in 0..=(ell - ma) {
        let e_minus = ell as f64 - (ma as f64 / 2.0 + k as f64);
        let e_plus = ma as f64 / 2.0 + k as f64;
        let a = if e_minus == 0.0 { 0.0 } else { e_minus * lzm };
        let b = if e_plus == 0.0 { 0.0 } else { e_plus * lzp };
        terms.push(SignedLog { ln: lnc(ell, k) + lnc(ell, ma + k) + a + b, sign: 1.0 });
    }
    let s = signed_log_sum(&terms);
    if s.sign == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut v = ln_factorial(ell + ma) - ell as f64 * 2f64.ln() - ln_factorial(ell) + s.ln;
    if m < 0 {
        v += ln_factorial(ell - ma) - ln_factorial(ell + ma);
    }
    Ok(v)
}

/// Associated Legendre function `P_l^m(z) >= 0` for `z >= 1`.
pub fn assoc_legendre_p(ell: usize, m: i64, z: f64) -> Result<f64> {
    Ok(assoc_legendre_p_ln(ell, m, z)?.exp())
}

/// `ln(gamma_l^m P_l^m(z))` for `0 <= m <= l <= lmax`, `z >= 1`, by upward
/// ratio recurrence. The same value holds for `-m`.
pub fn normalized_assoc_legendre_ln_table(lmax: usize, z: f64) -> Result<TriTable> {
    check_z(z)?;
    let mut t = TriTable::zeros(lmax, f64::NEG_INFINITY);
    let ls = ((z - 1.0) * (z + 1.0)).ln();
    let mut lmm = -0.5 * (4.0 * PI).ln();
    for m in 0..=lmax {
        if m > 0 {
            lmm += 0.5 * ((2 * m + 1) as f64 / (2 * m) as f64).ln() + 0.5 * ls;
        }
        t.data[TriTable::idx(m, m)] = lmm;
        if m == lmax {
            break;
        }
        let mut r = z * ((2 * m + 3) as f64).sqrt();
        let mut cur = lmm + r.ln();
        t.data[TriTable::idx(m + 1, m)] = cur;
        for l in m + 2..=lmax {
            r = rec_a(l, m) * (z - rec_b(l, m) / r);
            cur += r.ln();
            t.data[TriTable::idx(l, m)] = cur;
        }
    }
    Ok(t)
}

/// Regularized upper incomplete gamma `Q(a, x) = Gamma(a, x) / Gamma(a)`, in log space.
pub fn ln_upper_incomplete_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("incomplete gamma parameter must be > 0, got {a}"));
    }
    if !(x >= 0.0) {
        return domain(format!("incomplete gamma argument must be >= 0, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 100_000;
    if x < a + 1.0 {
        // Series for P(a, x).
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 1.0;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
            if term.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(EpwError::Convergence(format!("incomplete gamma series a={a} x={x}")));
        }
        let lnp = -x + a * x.ln() - ln_gamma(a) + sum.ln();
        let p = lnp.exp();
        Ok((-p).ln_1p())
    } else {
        // Modified Lentz continued fraction for Gamma(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(EpwError::Convergence(format!("incomplete gamma fraction a={a} x={x}")));
        }
        Ok(-x + a * x.ln() - ln_gamma(a) + h.ln())
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn upper_incomplete_q(a: f64, x: f64) -> Result<f64> {
    Ok(ln_upper_incomplete_q(a, x)?.exp())
}
