//! Regularized boundary sampling: weighted collocation matrix, truncated SVD
//! solve and accuracy/stability metrics.

use crate::error::{domain, EpwError, Result};
use crate::sphquad::{sphere_rule, surface_grid, CubatureRule, Geometry, Spacing};
use crate::waves::{cdot, evanescent_direction, real_direction, ComplexDirection, ParametricPoint};
use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::time::Instant;

thread_local! {
    static FACTORIZATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Number of SVD factorizations performed on the calling thread so far.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.with(|c| c.get())
}

/// Default relative truncation threshold.
pub const DEFAULT_EPSILON: f64 = 1e-14;
/// Default ratio of sampling points to waves.
pub const DEFAULT_OVERSAMPLE: f64 = 2.0;

/// One plane wave of an approximation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaveDescriptor {
    Propagative([f64; 3]),
    Evanescent(ParametricPoint),
}

/// Ordered plane waves with per-wave normalization, stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationSet {
    pub kappa: f64,
    pub waves: Vec<WaveDescriptor>,
    pub ln_norms: Vec<f64>,
}

impl ApproximationSet {
    /// `{ phi_{d_p} / sqrt(P) }`.
    pub fn propagative(directions: &[[f64; 3]], kappa: f64) -> Self {
        let ln = -0.5 * (directions.len() as f64).ln();
        Self {
            kappa,
            waves: directions.iter().map(|d| WaveDescriptor::Propagative(*d)).collect(),
            ln_norms: vec![ln; directions.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.ln_norms.iter().map(|v| v.exp()).collect()
    }

    pub fn direction(&self, p: usize) -> ComplexDirection {
        match &self.waves[p] {
            WaveDescriptor::Propagative(d) => real_direction(*d),
            WaveDescriptor::Evanescent(y) => evanescent_direction(y, self.kappa),
        }
    }

    /// Normalized wave `p` at `x`, evaluated as `exp(i kappa d.x + ln_norm)`.
    pub fn eval(&self, p: usize, x: [f64; 3]) -> Complex64 {
        let d = self.direction(p);
        wave_value(&d, self.kappa, self.ln_norms[p], &x)
    }

    /// Rescales every wave to unit maximum modulus over `points`.
    pub fn renormalize_boundary_sup(&mut self, points: &[[f64; 3]]) {
        for p in 0..self.len() {
            let d = self.direction(p);
            let im = [d[0].im, d[1].im, d[2].im];
            let max_ln = points
                .iter()
                .map(|x| -self.kappa * (im[0] * x[0] + im[1] * x[1] + im[2] * x[2]))
                .fold(f64::NEG_INFINITY, f64::max);
            self.ln_norms[p] = -max_ln;
        }
    }
}

#[inline]
fn wave_value(d: &ComplexDirection, kappa: f64, ln_norm: f64, x: &[f64; 3]) -> Complex64 {
    let e = Complex64::i() * kappa * cdot(d, x);
    Complex64::from_polar((e.re + ln_norm).exp(), e.im)
}

fn check_weights(rule: &CubatureRule) -> Result<()> {
    if let Some((index, &weight)) = rule.weights.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
        return Err(EpwError::Positivity { index, weight });
    }
    Ok(())
}

/// Collocation matrix `A_{s,p} = sqrt(w_s) phi_p(x_s)`.
pub fn assemble_matrix(set: &ApproximationSet, rule: &CubatureRule) -> Result<Mat<Complex64>> {
    check_weights(rule)?;
    let dirs: Vec<ComplexDirection> = (0..set.len()).map(|p| set.direction(p)).collect();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = Mat::<Complex64>::zeros(rule.len(), set.len());
    for (p, d) in dirs.iter().enumerate() {
        let ln = set.ln_norms[p];
        for (s, x) in rule.points.iter().enumerate() {
            a[(s, p)] = wave_value(d, set.kappa, ln, x) * sw[s];
        }
    }
    Ok(a)
}

/// Right-hand side `b_s = sqrt(w_s) g(x_s)`.
pub fn assemble_rhs<F>(rule: &CubatureRule, trace: F) -> Result<Vec<Complex64>>
where
    F: Fn([f64; 3]) -> Complex64,
{
    check_weights(rule)?;
    Ok(rule.points.iter().zip(&rule.weights).map(|(x, w)| trace(*x) * w.sqrt()).collect())
}

/// Matrix and right-hand side of the sampling system.
pub fn assemble<F>(set: &ApproximationSet, rule: &CubatureRule, trace: F) -> Result<(Mat<Complex64>, Vec<Complex64>)>
where
    F: Fn([f64; 3]) -> Complex64,
{
    Ok((assemble_matrix(set, rule)?, assemble_rhs(rule, trace)?))
}

/// Thin SVD `A = U S V^H` with the relative threshold applied at solve time.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Mat<Complex64>,
    pub s: Vec<f64>,
    pub v: Mat<Complex64>,
    pub epsilon: f64,
    pub rank: usize,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return domain(format!("truncation threshold must lie in (0, 1], got {epsilon}"));
    }
    Ok(())
}

impl TruncatedSvd {
    pub fn factor(a: MatRef<'_, Complex64>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(EpwError::Shape("empty matrix".into()));
        }
        let svd = a
            .thin_svd()
            .map_err(|e| EpwError::Numeric(format!("SVD did not converge: {e:?}")))?;
        FACTORIZATIONS.with(|c| c.set(c.get() + 1));
        let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
        Self::from_parts(svd.U().to_owned(), s, svd.V().to_owned(), epsilon)
    }

    /// Builds a factorization from given factors; `s` must be nonincreasing and nonnegative.
    pub fn from_parts(u: Mat<Complex64>, s: Vec<f64>, v: Mat<Complex64>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if u.ncols() != s.len() || v.ncols() != s.len() {
            return Err(EpwError::Shape(format!(
                "factor shapes U {}x{}, S {}, V {}x{}",
                u.nrows(),
                u.ncols(),
                s.len(),
                v.nrows(),
                v.ncols()
            )));
        }
        if s.iter().any(|v| !(*v >= 0.0)) || s.windows(2).any(|w| w[1] > w[0]) {
            return Err(EpwError::Numeric("singular values must be nonnegative and sorted".into()));
        }
        let smax = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().take_while(|&&v| v > 0.0 && v >= epsilon * smax).count();
        Ok(Self { u, s, v, epsilon, rank })
    }

    /// `X = V (S_eps^+ (U^H B))`, evaluated right to left; one column per right-hand side.
    pub fn solve_many(&self, b: MatRef<'_, Complex64>) -> Result<Mat<Complex64>> {
        if b.nrows() != self.u.nrows() {
            return Err(EpwError::Shape(format!(
                "right-hand side has {} rows, expected {}",
                b.nrows(),
                self.u.nrows()
            )));
        }
        let mut c = self.u.adjoint() * b;
        for k in 0..c.nrows() {
            for j in 0..c.ncols() {
                c[(k, j)] = if k < self.rank { c[(k, j)] / self.s[k] } else { Complex64::new(0.0, 0.0) };
            }
        }
        Ok(&self.v * &c)
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let bm = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.solve_many(bm.as_ref())?;
        Ok((0..x.nrows()).map(|i| x[(i, 0)]).collect())
    }
}

/// `xi = V S_eps^+ U^H b` and the singular values of `A`.
pub fn truncated_svd_solve(a: MatRef<'_, Complex64>, b: &[Complex64], epsilon: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let svd = TruncatedSvd::factor(a, epsilon)?;
    Ok((svd.solve(b)?, svd.s))
}

pub fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||A xi - b|| / ||b||`.
pub fn relative_residual(a: MatRef<'_, Complex64>, xi: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.ncols() != xi.len() || a.nrows() != b.len() {
        return Err(EpwError::Shape("residual operand shapes disagree".into()));
    }
    let nb = l2_norm(b);
    if nb == 0.0 {
        return domain("relative residual needs a nonzero right-hand side");
    }
    let x = Mat::from_fn(xi.len(), 1, |i, _| xi[i]);
    let ax = a * &x;
    let r: f64 = (0..b.len()).map(|i| (ax[(i, 0)] - b[i]).norm_sqr()).sum();
    Ok(r.sqrt() / nb)
}

/// Outcome of one regularized solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub s: usize,
    pub p: usize,
    pub epsilon: f64,
    pub eps_rank: usize,
    pub singular_values: Vec<f64>,
    pub xi: Vec<Complex64>,
    pub residual: f64,
    pub coeff_norm: f64,
    pub seconds: f64,
}

#[derive(Serialize)]
struct SolveReportJson<'a> {
    s: usize,
    p: usize,
    epsilon: f64,
    eps_rank: usize,
    residual: f64,
    coeff_norm: f64,
    seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_values: Option<&'a [f64]>,
    xi: Vec<[f64; 2]>,
}

impl SolveReport {
    pub fn to_json(&self, with_singular_values: bool) -> Result<String> {
        let view = SolveReportJson {
            s: self.s,
            p: self.p,
            epsilon: self.epsilon,
            eps_rank: self.eps_rank,
            residual: self.residual,
            coeff_norm: self.coeff_norm,
            seconds: self.seconds,
            singular_values: with_singular_values.then_some(&self.singular_values[..]),
            xi: self.xi.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string_pretty(&view).map_err(|e| EpwError::Io(e.into()))
    }

    /// `(S, P, epsilon, eps_rank, residual, coeff_norm)` for sweep CSVs.
    pub fn csv_row(&self) -> (usize, usize, f64, usize, f64, f64) {
        (self.s, self.p, self.epsilon, self.eps_rank, self.residual, self.coeff_norm)
    }
}

/// An assembled and factorized sampling system, reusable across targets.
#[derive(Debug, Clone)]
pub struct SampledSystem {
    pub rule: CubatureRule,
    pub a: Mat<Complex64>,
    pub svd: TruncatedSvd,
    pub factor_seconds: f64,
}

impl SampledSystem {
    pub fn new(set: &ApproximationSet, rule: CubatureRule, epsilon: f64) -> Result<Self> {
        let t = Instant::now();
        let a = assemble_matrix(set, &rule)?;
        let svd = TruncatedSvd::factor(a.as_ref(), epsilon)?;
        Ok(Self { rule, a, svd, factor_seconds: t.elapsed().as_secs_f64() })
    }

    pub fn rhs<F: Fn([f64; 3]) -> Complex64>(&self, trace: F) -> Result<Vec<Complex64>> {
        assemble_rhs(&self.rule, trace)
    }

    /// Solves for several right-hand sides (columns of `b`) with one pass over the factors.
    pub fn solve_many(&self, b: MatRef<'_, Complex64>) -> Result<Vec<SolveReport>> {
        let t = Instant::now();
        let x = self.svd.solve_many(b)?;
        let ax = &self.a * &x;
        let per = t.elapsed().as_secs_f64() / b.ncols().max(1) as f64;
        (0..b.ncols())
            .map(|j| {
                let nb: f64 = (0..b.nrows()).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt();
                if nb == 0.0 {
                    return domain("relative residual needs a nonzero right-hand side");
                }
                let r: f64 = (0..b.nrows()).map(|i| (ax[(i, j)] - b[(i, j)]).norm_sqr()).sum();
                let xi: Vec<Complex64> = (0..x.nrows()).map(|i| x[(i, j)]).collect();
                Ok(SolveReport {
                    s: self.a.nrows(),
                    p: self.a.ncols(),
                    epsilon: self.svd.epsilon,
                    eps_rank: self.svd.rank,
                    singular_values: self.svd.s.clone(),
                    coeff_norm: l2_norm(&xi),
                    xi,
                    residual: r.sqrt() / nb,
                    seconds: self.factor_seconds + per,
                })
            })
            .collect()
    }

    pub fn solve_rhs(&self, b: &[Complex64]) -> Result<SolveReport> {
        let bm = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        Ok(self.solve_many(bm.as_ref())?.remove(0))
    }

    pub fn solve<F: Fn([f64; 3]) -> Complex64>(&self, trace: F) -> Result<SolveReport> {
        let b = self.rhs(trace)?;
        self.solve_rhs(&b)
    }
}

/// `S = ceil(sqrt(oversample * P))^2`.
pub fn sphere_sample_count(p: usize, oversample: f64) -> usize {
    let n = (oversample * p as f64).sqrt().ceil() as usize;
    n * n
}

/// Boundary rule with about `oversample * P` points: a sphere rule of size
/// `ceil(sqrt(oversample P))^2`, or the smallest polyhedral grid at least that large.
pub fn boundary_rule(geometry: Geometry, spacing: Spacing, p: usize, oversample: f64) -> Result<CubatureRule> {
    if !(oversample > 0.0) {
        return domain(format!("oversampling factor must be positive, got {oversample}"));
    }
    let s = sphere_sample_count(p, oversample);
    match geometry {
        Geometry::Sphere => sphere_rule(s),
        _ => Ok(surface_grid(geometry, geometry.grid_n_for(s), spacing)?.to_rule()),
    }
}

/// Assembles and solves the sampling system for one target on `rule`.
pub fn approximate_on_rule<F>(trace: F, set: &ApproximationSet, rule: CubatureRule, epsilon: f64) -> Result<SolveReport>
where
    F: Fn([f64; 3]) -> Complex64,
{
    SampledSystem::new(set, rule, epsilon)?.solve(trace)
}

/// Approximates a boundary trace with `set` on the given boundary.
pub fn approximate<F>(
    trace: F,
    set: &ApproximationSet,
    geometry: Geometry,
    spacing: Spacing,
    oversample: f64,
    epsilon: f64,
) -> Result<SolveReport>
where
    F: Fn([f64; 3]) -> Complex64,
{
    let rule = boundary_rule(geometry, spacing, set.len(), oversample)?;
    approximate_on_rule(trace, set, rule, epsilon)
}
