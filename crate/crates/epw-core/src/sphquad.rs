//! Cubature on the unit sphere and sampling grids on polyhedral boundaries.
//!
//! Sphere rules come from extremal (determinant-maximizing) point systems
//! with interpolatory weights, from point files, or from a Gauss product
//! rule when the degree is beyond the built-in optimizer.

use crate::error::{domain, EpwError, Result};
use crate::rng::{stream_rng, STREAM_EXTREMAL};
use crate::specfun::{mode_count, spherical_angles, spherical_harmonics_all};
use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::{Mat, Side};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Largest degree handled by the built-in extremal optimizer.
pub const EXTREMAL_MAX_DEGREE: usize = 15;
/// Default iteration cap of the extremal optimizer.
pub const EXTREMAL_DEFAULT_ITERS: usize = 400;

const FOUR_PI: f64 = 4.0 * PI;

/// Points on the sphere (or a polyhedral surface) with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubatureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Exactness degree for sphere rules; `None` for surface grids.
    pub degree: Option<usize>,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: FnMut([f64; 3]) -> T,
    {
        self.points.iter().zip(&self.weights).map(|(p, &w)| f(*p) * w).sum()
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        0 => return (Vec::new(), Vec::new()),
        1 => return (vec![0.0], vec![2.0]),
        _ => {}
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Reproducing kernel `K(t) = (1/4pi) sum_{l<=L} (2l+1) P_l(t)` and its derivative.
pub fn kernel_with_derivative(l_max: usize, t: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, t);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    let mut k = 1.0;
    let mut dk = 0.0;
    if l_max >= 1 {
        k += 3.0 * p;
        dk += 3.0 * dp;
    }
    for l in 1..l_max {
        let lf = l as f64;
        let p_next = ((2.0 * lf + 1.0) * t * p - lf * p_prev) / (lf + 1.0);
        let dp_next = dp_prev + (2.0 * lf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        let c = 2.0 * (lf + 1.0) + 1.0;
        k += c * p;
        dk += c * dp;
    }
    (k / FOUR_PI, dk / FOUR_PI)
}

/// Kernel value `K(t)` alone.
pub fn kernel_k(l_max: usize, t: f64) -> f64 {
    kernel_with_derivative(l_max, t).0
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn check_count(l_max: usize, n: usize) -> Result<()> {
    if n != mode_count(l_max) {
        return Err(EpwError::Shape(format!(
            "degree {l_max} needs {} points, got {n}",
            mode_count(l_max)
        )));
    }
    Ok(())
}

/// Gram matrix `K_L` with entries `K(x_j . x_s)`.
pub fn gram_k(l_max: usize, points: &[[f64; 3]]) -> Result<Mat<f64>> {
    check_count(l_max, points.len())?;
    let n = points.len();
    let mut k = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for s in 0..=j {
            let t = dot(&points[j], &points[s]).clamp(-1.0, 1.0);
            let v = kernel_k(l_max, t);
            k[(j, s)] = v;
            k[(s, j)] = v;
        }
    }
    Ok(k)
}

/// `n` points on a Fibonacci spiral, `z_k = 1 - 2k/(n-1)`, first point at
/// the north pole and the second rotated onto the prime meridian.
pub fn fibonacci_points(n: usize) -> Vec<[f64; 3]> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![[0.0, 0.0, 1.0]];
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * k as f64 / (n - 1) as f64;
            let r = ((1.0 - z) * (1.0 + z)).max(0.0).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    apply_pole_constraints(&mut pts);
    pts
}

/// Puts point 0 at the north pole and rotates about the z-axis so that
/// point 1 has zero azimuth.
fn apply_pole_constraints(pts: &mut [[f64; 3]]) {
    if pts.is_empty() {
        return;
    }
    pts[0] = [0.0, 0.0, 1.0];
    if pts.len() < 2 {
        return;
    }
    let phi = pts[1][1].atan2(pts[1][0]);
    let (s, c) = (-phi).sin_cos();
    for p in pts.iter_mut().skip(1) {
        let (x, y) = (p[0], p[1]);
        *p = [c * x - s * y, s * x + c * y, p[2]];
    }
    pts[1][1] = 0.0;
    pts[1] = normalize(pts[1]);
}

/// `ln det K_L` and `K_L^{-1}`, or `None` if `K_L` is not positive definite.
fn logdet_and_inverse(l_max: usize, pts: &[[f64; 3]]) -> Result<Option<(f64, Mat<f64>)>> {
    let k = gram_k(l_max, pts)?;
    let Ok(llt) = k.llt(Side::Lower) else {
        return Ok(None);
    };
    let l = llt.L();
    let logdet: f64 = (0..pts.len()).map(|i| 2.0 * l[(i, i)].ln()).sum();
    if !logdet.is_finite() {
        return Ok(None);
    }
    Ok(Some((logdet, llt.inverse())))
}

/// `ln det K_L` of a point system; errors if it is not fundamental.
pub fn log_det_gram(l_max: usize, points: &[[f64; 3]]) -> Result<f64> {
    match logdet_and_inverse(l_max, points)? {
        Some((v, _)) => Ok(v),
        None => Err(EpwError::NotFundamental("Gram matrix is not positive definite".into())),
    }
}

/// Tangential gradient of `ln det K_L` at each point; point 0 is fixed and
/// point 1 moves along the prime meridian.
fn log_det_gradient(l_max: usize, pts: &[[f64; 3]], kinv: &Mat<f64>) -> Vec<[f64; 3]> {
    let n = pts.len();
    let mut grads = vec![[0.0; 3]; n];
    for j in 1..n {
        let mut g = [0.0; 3];
        for s in 0..n {
            if s == j {
                continue;
            }
            let t = dot(&pts[j], &pts[s]).clamp(-1.0, 1.0);
            let c = 2.0 * kinv[(j, s)] * kernel_with_derivative(l_max, t).1;
            for a in 0..3 {
                g[a] += c * pts[s][a];
            }
        }
        let x = pts[j];
        let radial = dot(&g, &x);
        for a in 0..3 {
            g[a] -= radial * x[a];
        }
        if j == 1 {
            let tang = [x[2], 0.0, -x[0]];
            let tn = dot(&tang, &tang);
            let c = if tn > 0.0 { dot(&g, &tang) / tn } else { 0.0 };
            g = [c * tang[0], 0.0, c * tang[2]];
        }
        grads[j] = g;
    }
    grads
}

/// Locally extremal fundamental system of degree `l_max` by tangential
/// gradient ascent on `ln det K_L` from a Fibonacci start. A nonzero `seed`
/// jitters the start.
pub fn optimize_extremal(l_max: usize, seed: u64, max_iters: usize) -> Result<Vec<[f64; 3]>> {
    let n = mode_count(l_max);
    let mut pts = fibonacci_points(n);
    if n == 1 {
        return Ok(pts);
    }
    if seed != 0 {
        let mut rng = stream_rng(seed, STREAM_EXTREMAL);
        let scale = 0.05 / (l_max as f64 + 1.0);
        for p in pts.iter_mut().skip(1) {
            let mut q = *p;
            for c in q.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *c += scale * e;
            }
            *p = normalize(q);
        }
        apply_pole_constraints(&mut pts);
    }
    let Some((mut f, mut kinv)) = logdet_and_inverse(l_max, &pts)? else {
        return Err(EpwError::NotFundamental("initial point system is degenerate".into()));
    };
    let mut h = 0.1 / (l_max as f64 + 1.0);
    for _ in 0..max_iters {
        let grads = log_det_gradient(l_max, &pts, &kinv);
        let gmax = grads.iter().map(|g| dot(g, g).sqrt()).fold(0.0, f64::max);
        if gmax < 1e-12 {
            break;
        }
        let mut accepted = false;
        while h > 1e-12 {
            let trial: Vec<[f64; 3]> = pts
                .iter()
                .zip(&grads)
                .map(|(p, g)| {
                    let s = h / gmax;
                    normalize([p[0] + s * g[0], p[1] + s * g[1], p[2] + s * g[2]])
                })
                .collect();
            if let Some((ft, kt)) = logdet_and_inverse(l_max, &trial)? {
                if ft > f {
                    let gain = ft - f;
                    pts = trial;
                    f = ft;
                    kinv = kt;
                    accepted = true;
                    h = (h * 1.5).min(0.5);
                    if gain <= 1e-13 * f.abs().max(1.0) {
                        h = 0.0;
                    }
                    break;
                }
            }
            h *= 0.5;
        }
        if !accepted || h <= 1e-12 {
            break;
        }
    }
    Ok(pts)
}

/// Interpolatory cubature weights solving `K_L w = 1`, without sign checks.
pub fn cubature_weights_unchecked(l_max: usize, points: &[[f64; 3]]) -> Result<Vec<f64>> {
    let k = gram_k(l_max, points)?;
    let llt = k
        .llt(Side::Lower)
        .map_err(|_| EpwError::NotFundamental("Gram matrix is not positive definite".into()))?;
    let ones = Mat::<f64>::from_fn(points.len(), 1, |_, _| 1.0);
    let w = llt.solve(&ones);
    let w: Vec<f64> = (0..points.len()).map(|i| w[(i, 0)]).collect();
    let sum: f64 = w.iter().sum();
    if (sum - FOUR_PI).abs() > 1e-8 {
        return Err(EpwError::NotFundamental(format!("weights sum to {sum}, expected 4 pi")));
    }
    Ok(w)
}

/// Interpolatory cubature weights; every weight must be positive.
pub fn cubature_weights(l_max: usize, points: &[[f64; 3]]) -> Result<Vec<f64>> {
    let w = cubature_weights_unchecked(l_max, points)?;
    check_positive(&w)?;
    Ok(w)
}

fn check_positive(w: &[f64]) -> Result<()> {
    if let Some((index, &weight)) = w.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(EpwError::Positivity { index, weight });
    }
    Ok(())
}

/// Extremal rule of degree `l_max`: optimized points plus interpolatory weights.
pub fn extremal_rule(l_max: usize, seed: u64, max_iters: usize) -> Result<CubatureRule> {
    if l_max > EXTREMAL_MAX_DEGREE {
        return Err(EpwError::Unsupported(format!(
            "built-in extremal optimization is limited to degree {EXTREMAL_MAX_DEGREE}; load a point file"
        )));
    }
    let points = optimize_extremal(l_max, seed, max_iters)?;
    let weights = cubature_weights(l_max, &points)?;
    Ok(CubatureRule { points, weights, degree: Some(l_max) })
}

/// Product rule with `l_max + 1` Gauss-Legendre nodes in `cos theta` and
/// `l_max + 1` equispaced azimuths; exact for degree `l_max`.
pub fn gauss_product_rule(l_max: usize) -> CubatureRule {
    let n = l_max + 1;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (xi, wi) in x.iter().zip(&w) {
        let r = ((1.0 - xi) * (1.0 + xi)).sqrt();
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            points.push([r * phi.cos(), r * phi.sin(), *xi]);
            weights.push(wi * 2.0 * PI / n as f64);
        }
    }
    CubatureRule { points, weights, degree: Some(l_max) }
}

/// Integer square root if `s` is a perfect square.
pub fn exact_sqrt(s: usize) -> Option<usize> {
    let r = (s as f64).sqrt().round() as usize;
    (r * r == s).then_some(r)
}

/// Sphere rule with `s` points (a perfect square): extremal up to degree
/// [`EXTREMAL_MAX_DEGREE`], Gauss product beyond.
pub fn sphere_rule(s: usize) -> Result<CubatureRule> {
    let Some(n) = exact_sqrt(s).filter(|&n| n > 0) else {
        return Err(EpwError::Shape(format!("sphere rule size {s} is not a positive square")));
    };
    let l_max = n - 1;
    if l_max <= EXTREMAL_MAX_DEGREE {
        extremal_rule(l_max, 0, EXTREMAL_DEFAULT_ITERS)
    } else {
        Ok(gauss_product_rule(l_max))
    }
}

/// `p` well-spread unit directions with the first at the north pole:
/// extremal points when `p` is a square of degree up to
/// [`EXTREMAL_MAX_DEGREE`], a Fibonacci spiral otherwise.
pub fn direction_set(p: usize) -> Result<Vec<[f64; 3]>> {
    match exact_sqrt(p) {
        Some(n) if n >= 1 && n - 1 <= EXTREMAL_MAX_DEGREE => {
            optimize_extremal(n - 1, 0, EXTREMAL_DEFAULT_ITERS)
        }
        _ => Ok(fibonacci_points(p)),
    }
}

/// Raw contents of a point-set file.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFile {
    pub points: Vec<[f64; 3]>,
    pub weights: Option<Vec<f64>>,
}

/// Parses `x y z [w]` rows; `#` starts a comment line.
pub fn parse_pointset(text: &str) -> Result<PointFile> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| EpwError::Parse { line: lineno, msg: e.to_string() })?;
        if fields.len() != 3 && fields.len() != 4 {
            return Err(EpwError::Parse {
                line: lineno,
                msg: format!("expected 3 or 4 fields, found {}", fields.len()),
            });
        }
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(EpwError::Parse { line: lineno, msg: "non-finite value".into() });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(EpwError::Parse {
                    line: lineno,
                    msg: format!("row has {} fields, previous rows have {w}", fields.len()),
                })
            }
            _ => {}
        }
        let p = [fields[0], fields[1], fields[2]];
        let norm = dot(&p, &p).sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(EpwError::Validation(format!(
                "point on line {lineno} has norm {norm}, expected 1"
            )));
        }
        points.push(p);
        if fields.len() == 4 {
            weights.push(fields[3]);
        }
    }
    if points.is_empty() {
        return Err(EpwError::Validation("point file contains no points".into()));
    }
    let weights = (width == Some(4)).then_some(weights);
    Ok(PointFile { points, weights })
}

/// Builds a sphere rule from parsed file contents, computing weights when absent.
pub fn rule_from_pointfile(pf: PointFile) -> Result<CubatureRule> {
    let Some(n) = exact_sqrt(pf.points.len()) else {
        return Err(EpwError::Validation(format!(
            "{} points is not a perfect square",
            pf.points.len()
        )));
    };
    let l_max = n - 1;
    let weights = match pf.weights {
        Some(w) => {
            check_positive(&w)?;
            let sum: f64 = w.iter().sum();
            if (sum - FOUR_PI).abs() > 1e-8 {
                return Err(EpwError::Validation(format!("weights sum to {sum}, expected 4 pi")));
            }
            w
        }
        None => cubature_weights(l_max, &pf.points)?,
    };
    Ok(CubatureRule { points: pf.points, weights, degree: Some(l_max) })
}

pub fn load_pointset(path: impl AsRef<Path>) -> Result<CubatureRule> {
    let text = std::fs::read_to_string(path)?;
    rule_from_pointfile(parse_pointset(&text)?)
}

/// Serializes a rule in the `x y z w` point-file format.
pub fn format_pointset(rule: &CubatureRule) -> String {
    let mut out = String::new();
    if let Some(l) = rule.degree {
        let _ = writeln!(out, "# degree {l}, {} points", rule.len());
    }
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e} {:.17e}", p[0], p[1], p[2], w);
    }
    out
}

pub fn write_pointset(path: impl AsRef<Path>, rule: &CubatureRule) -> Result<()> {
    std::fs::write(path, format_pointset(rule))?;
    Ok(())
}

/// Summary of a sphere rule's quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub points: usize,
    pub degree: usize,
    pub weight_sum: f64,
    pub weight_sum_error: f64,
    pub min_weight: f64,
    pub max_norm_error: f64,
    pub max_exactness_error: f64,
    pub all_weights_positive: bool,
}

/// Weight sum, positivity, unit norms and exactness on all `Y_l^m`, `l <= degree`.
pub fn validate_rule(rule: &CubatureRule, degree: usize) -> RuleReport {
    let n = mode_count(degree);
    let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); n];
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let (t1, t2) = spherical_angles(*p);
        for (a, y) in acc.iter_mut().zip(spherical_harmonics_all(degree, t1, t2)) {
            *a += y * w;
        }
    }
    acc[0] -= FOUR_PI.sqrt();
    let weight_sum: f64 = rule.weights.iter().sum();
    RuleReport {
        points: rule.len(),
        degree,
        weight_sum,
        weight_sum_error: (weight_sum - FOUR_PI).abs(),
        min_weight: rule.weights.iter().copied().fold(f64::INFINITY, f64::min),
        max_norm_error: rule
            .points
            .iter()
            .map(|p| (dot(p, p).sqrt() - 1.0).abs())
            .fold(0.0, f64::max),
        max_exactness_error: acc.iter().map(|c| c.norm()).fold(0.0, f64::max),
        all_weights_positive: rule.weights.iter().all(|&w| w > 0.0),
    }
}

/// Domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Sphere,
    Cube,
    Tetra,
}

/// Node placement along grid lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Equispaced,
    Chebyshev,
}

/// Half edge of the cube inscribed in the unit sphere.
pub fn cube_half_edge() -> f64 {
    1.0 / 3f64.sqrt()
}

/// Vertices of the regular tetrahedron inscribed in the unit sphere.
pub fn tetra_vertices() -> [[f64; 3]; 4] {
    let a = (2.0f64 / 9.0).sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    [
        [-a, b, -1.0 / 3.0],
        [-a, -b, -1.0 / 3.0],
        [(8.0f64 / 9.0).sqrt(), 0.0, -1.0 / 3.0],
        [0.0, 0.0, 1.0],
    ]
}

impl Geometry {
    /// Surface area of the boundary.
    pub fn area(self) -> f64 {
        match self {
            Geometry::Sphere => FOUR_PI,
            Geometry::Cube => 8.0,
            Geometry::Tetra => 8.0 / 3f64.sqrt(),
        }
    }

    /// Whether `x` lies in the closed domain (up to `tol`).
    pub fn contains(self, x: [f64; 3], tol: f64) -> bool {
        match self {
            Geometry::Sphere => dot(&x, &x).sqrt() <= 1.0 + tol,
            Geometry::Cube => x.iter().all(|c| c.abs() <= cube_half_edge() + tol),
            Geometry::Tetra => {
                let v = tetra_vertices();
                // Outward face normals are opposite to the omitted vertex.
                (0..4).all(|k| {
                    let n = [-v[k][0], -v[k][1], -v[k][2]];
                    dot(&n, &x) <= 1.0 / 3.0 + tol
                })
            }
        }
    }

    /// Number of grid points for `n` nodes per edge.
    pub fn grid_count(self, n: usize) -> usize {
        match self {
            Geometry::Sphere => n * n,
            Geometry::Cube => 6 * n * n - 12 * n + 8,
            Geometry::Tetra => 2 * n * n - 4 * n + 4,
        }
    }

    /// Smallest `n >= 2` whose grid has at least `target` points.
    pub fn grid_n_for(self, target: usize) -> usize {
        let mut n = 2;
        while self.grid_count(n) < target {
            n += 1;
        }
        n
    }
}

/// Boundary sampling grid on a polyhedron with uniform weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub shape: Geometry,
    pub n: usize,
    pub spacing: Spacing,
    pub points: Vec<[f64; 3]>,
    pub weight: f64,
}

impl SurfaceGrid {
    pub fn to_rule(&self) -> CubatureRule {
        CubatureRule {
            points: self.points.clone(),
            weights: vec![self.weight; self.points.len()],
            degree: None,
        }
    }
}

fn line_nodes(n: usize, spacing: Spacing) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|j| {
            let s = j as f64 / (n - 1) as f64;
            match spacing {
                Spacing::Equispaced => s,
                Spacing::Chebyshev => {
                    if 2 * j == n - 1 {
                        0.5
                    } else {
                        0.5 * (1.0 - (PI * s).cos())
                    }
                }
            }
        })
        .collect()
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

fn push_unique(pts: &mut Vec<[f64; 3]>, p: [f64; 3]) {
    let dup = pts.iter().any(|q| {
        let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        dot(&d, &d).sqrt() <= 1e-9
    });
    if !dup {
        pts.push(p);
    }
}

/// Boundary grid with `n` nodes per edge. Each face is covered by lines
/// parallel to one edge; on tetrahedron faces each successive line carries
/// one node fewer, ending at the opposite vertex.
pub fn surface_grid(shape: Geometry, n: usize, spacing: Spacing) -> Result<SurfaceGrid> {
    if n < 2 {
        return domain(format!("surface grid needs at least 2 nodes per edge, got {n}"));
    }
    let t = line_nodes(n, spacing);
    let mut pts: Vec<[f64; 3]> = Vec::new();
    match shape {
        Geometry::Sphere => {
            return Err(EpwError::Unsupported("surface grids are defined for cube and tetra".into()))
        }
        Geometry::Cube => {
            let h = cube_half_edge();
            for axis in 0..3 {
                for side in [-1.0, 1.0] {
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    for &a in &t {
                        for &b in &t {
                            let mut p = [0.0; 3];
                            p[axis] = side * h;
                            p[u] = -h + 2.0 * h * a;
                            p[v] = -h + 2.0 * h * b;
                            push_unique(&mut pts, p);
                        }
                    }
                }
            }
        }
        Geometry::Tetra => {
            let v = tetra_vertices();
            for opp in (0..4).rev() {
                let face: Vec<[f64; 3]> = (0..4).filter(|&k| k != opp).map(|k| v[k]).collect();
                let (a, b, c) = (face[0], face[1], face[2]);
                for (i, &ti) in t.iter().enumerate() {
                    let start = lerp(a, c, ti);
                    let end = lerp(b, c, ti);
                    for s in line_nodes(n - i, spacing) {
                        push_unique(&mut pts, lerp(start, end, s));
                    }
                }
            }
        }
    }
    let weight = shape.area() / pts.len() as f64;
    Ok(SurfaceGrid { shape, n, spacing, points: pts, weight })
}
