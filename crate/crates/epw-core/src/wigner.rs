//! Wigner d- and D-matrices in the z-y-z Euler convention, computed by the
//! Fourier method: `d^{m,m'}(theta) = sum_mu e^{i mu theta} j_{mu,m} conj(j_{mu,m'})`
//! with `j_mu` the eigenvectors of the angular momentum operator `J_y`.

use crate::error::{EpwError, Result};
use crate::sphquad::gauss_legendre;
use num_complex::Complex64;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Real Wigner d-block, entries indexed by `(m, m')` in `[-ell, ell]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSmallD {
    pub ell: usize,
    pub entries: Vec<f64>,
}

impl WignerSmallD {
    pub fn dim(&self) -> usize {
        2 * self.ell + 1
    }

    #[inline]
    pub fn get(&self, m: i64, mp: i64) -> f64 {
        let n = self.dim();
        let l = self.ell as i64;
        self.entries[(m + l) as usize * n + (mp + l) as usize]
    }
}

/// Complex Wigner D-block, entries indexed by `(m, m')` in `[-ell, ell]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerBigD {
    pub ell: usize,
    pub entries: Vec<Complex64>,
}

impl WignerBigD {
    pub fn dim(&self) -> usize {
        2 * self.ell + 1
    }

    #[inline]
    pub fn get(&self, m: i64, mp: i64) -> Complex64 {
        let n = self.dim();
        let l = self.ell as i64;
        self.entries[(m + l) as usize * n + (mp + l) as usize]
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix by the QL
/// algorithm with implicit shifts. `diag` has length n, `off[i]` couples
/// rows i and i+1 (length n-1). Returns eigenvalues ascending and the
/// eigenvectors as columns of a row-major n x n matrix.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if off.len() + 1 != n.max(1) {
        return Err(EpwError::Shape(format!(
            "tridiagonal sizes: diag {n}, off {}",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(EpwError::Convergence("tridiagonal QL iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (newc, &oldc) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + newc] = z[k * n + oldc];
        }
    }
    Ok((vals, vecs))
}

/// Real eigenvectors of the tridiagonal form of `J_y` for degree `ell`.
///
/// `J_y = D T D^H` with `D = diag((-i)^{m+ell})` and `T` real symmetric with
/// off-diagonal `X_{-m}/2`, `X_m = sqrt((ell+m)(ell-m+1))`. Columns are
/// ordered by ascending eigenvalue `mu = -ell..=ell`.
pub fn jy_eigenvectors(ell: usize) -> Result<Vec<f64>> {
    let n = 2 * ell + 1;
    let l = ell as f64;
    let diag = vec![0.0; n];
    let off: Vec<f64> = (0..n - 1)
        .map(|i| {
            let m = i as f64 - l;
            ((l - m) * (l + m + 1.0)).sqrt() / 2.0
        })
        .collect();
    let (vals, vecs) = symmetric_tridiagonal_eigen(&diag, &off)?;
    for (k, v) in vals.iter().enumerate() {
        let mu = k as f64 - l;
        if (v - mu).abs() > 1e-8 * (1.0 + l) {
            return Err(EpwError::Numeric(format!("J_y eigenvalue {v} differs from {mu}")));
        }
    }
    Ok(vecs)
}

/// Wigner d-block `d_ell(theta)`.
pub fn wigner_d(ell: usize, theta: f64) -> Result<WignerSmallD> {
    let n = 2 * ell + 1;
    let v = jy_eigenvectors(ell)?;
    let l = ell as i64;
    let phases: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(1.0, (k as i64 - l) as f64 * theta)).collect();
    let mut entries = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += phases[k] * (v[a * n + k] * v[b * n + k]);
            }
            // multiply by (-i)^{m - m'}
            let val = match (a as i64 - b as i64).rem_euclid(4) {
                0 => acc.re,
                1 => acc.im,
                2 => -acc.re,
                _ => -acc.im,
            };
            entries[a * n + b] = val;
        }
    }
    Ok(WignerSmallD { ell, entries })
}

/// Wigner D-block `D^{m,m'} = e^{i m' theta2} d^{m,m'}(theta1) e^{i m theta3}`.
pub fn wigner_big_d(ell: usize, theta1: f64, theta2: f64, theta3: f64) -> Result<WignerBigD> {
    let d = wigner_d(ell, theta1)?;
    Ok(big_d_from_small(&d, theta2, theta3))
}

pub fn big_d_from_small(d: &WignerSmallD, theta2: f64, theta3: f64) -> WignerBigD {
    let n = d.dim();
    let l = d.ell as i64;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        let m = a as i64 - l;
        for b in 0..n {
            let mp = b as i64 - l;
            entries[a * n + b] =
                Complex64::from_polar(d.entries[a * n + b], mp as f64 * theta2 + m as f64 * theta3);
        }
    }
    WignerBigD { ell: d.ell, entries }
}

type CacheKey = (usize, u64);
type CacheState = (HashMap<CacheKey, Arc<WignerSmallD>>, VecDeque<CacheKey>);

/// Bounded cache of d-blocks keyed by `(ell, theta bits)`.
pub struct WignerCache {
    capacity: usize,
    inner: Mutex<CacheState>,
}

impl WignerCache {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, inner: Mutex::new((HashMap::new(), VecDeque::new())) }
    }

    pub fn get(&self, ell: usize, theta: f64) -> Result<Arc<WignerSmallD>> {
        let key = (ell, theta.to_bits());
        if let Some(hit) = self.inner.lock().expect("cache lock").0.get(&key) {
            return Ok(hit.clone());
        }
        let block = Arc::new(wigner_d(ell, theta)?);
        if self.capacity > 0 {
            let mut guard = self.inner.lock().expect("cache lock");
            let (map, order) = &mut *guard;
            if !map.contains_key(&key) {
                if map.len() >= self.capacity {
                    if let Some(old) = order.pop_front() {
                        map.remove(&old);
                    }
                }
                map.insert(key, block.clone());
                order.push_back(key);
            }
        }
        Ok(block)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Numerical check of `int_Theta D_l conj(D_q) sin(theta1) = 8 pi^2/(2l+1) delta`.
/// Returns the maximum deviation over all index quadruples.
pub fn wigner_orthogonality_check(ell: usize, q: usize, grid_density: usize) -> Result<f64> {
    let n1 = grid_density.max(2 * (ell + q) + 16);
    let nphi = grid_density.max(2 * (ell + q) + 2);
    let (x, w) = gauss_legendre(n1);
    // Map Gauss nodes from [-1, 1] onto theta1 in [0, pi].
    let thetas: Vec<f64> = x.iter().map(|t| 0.5 * PI * (t + 1.0)).collect();
    let wts: Vec<f64> = w.iter().zip(&thetas).map(|(w, t)| 0.5 * PI * w * t.sin()).collect();
    let dl: Vec<WignerSmallD> = thetas.iter().map(|&t| wigner_d(ell, t)).collect::<Result<_>>()?;
    let dq: Vec<WignerSmallD> = thetas.iter().map(|&t| wigner_d(q, t)).collect::<Result<_>>()?;
    let h = 2.0 * PI / nphi as f64;
    let trap = |k: i64| -> Complex64 {
        (0..nphi).map(|j| Complex64::from_polar(h, k as f64 * j as f64 * h)).sum()
    };
    let (li, qi) = (ell as i64, q as i64);
    let mut worst = 0.0f64;
    let expect = 8.0 * PI * PI / (2 * ell + 1) as f64;
    for m in -li..=li {
        for mp in -li..=li {
            for n in -qi..=qi {
                for np in -qi..=qi {
                    let radial: f64 = (0..n1)
                        .map(|k| wts[k] * dl[k].get(m, mp) * dq[k].get(n, np))
                        .sum();
                    let val = trap(mp - np) * trap(m - n) * radial;
                    let target = if ell == q && m == n && mp == np { expect } else { 0.0 };
                    worst = worst.max((val - target).norm());
                }
            }
        }
    }
    Ok(worst)
}
