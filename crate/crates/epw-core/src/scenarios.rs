//! Experiment drivers behind the `epw` subcommands. Each driver has a pure
//! part returning rows and a `cmd_*` wrapper that writes CSV/JSON artifacts.

use crate::basis::BasisContext;
use crate::config::{ScenarioConfig, Target};
use crate::error::{domain, EpwError, Result};
use crate::output::write_table;
use crate::rng::{stream_rng, STREAM_SURROGATE};
use crate::sampling::{build_evanescent_set, generate_nodes, Strategy};
use crate::solver::{boundary_rule, factorization_count, sphere_sample_count, ApproximationSet, SampledSystem, TruncatedSvd, assemble_matrix};
use crate::specfun::{mode_count, ModeIndex};
use crate::sphquad::{
    cube_half_edge, direction_set, extremal_rule, load_pointset, validate_rule, write_pointset,
    CubatureRule, Geometry, RuleReport, Spacing, EXTREMAL_DEFAULT_ITERS,
};
use faer::Mat;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Largest `S * P^2` run without `--paper-scale`.
pub const COST_GUARD: f64 = 2.0e11;

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub paper_scale: bool,
}

/// Approximation set: propagative (no strategy) or evanescent.
pub fn build_set(kappa: f64, strategy: Option<Strategy>, l_max: usize, p: usize, seed: u64) -> Result<ApproximationSet> {
    match strategy {
        None => Ok(ApproximationSet::propagative(&direction_set(p)?, kappa)),
        Some(s) => {
            let pp = s.rounded_size(p);
            let dirs = if s.needs_directions() { Some(direction_set(pp)?) } else { None };
            let nodes = generate_nodes(s, l_max, p, kappa, seed, dirs.as_deref())?;
            build_evanescent_set(&nodes)
        }
    }
}

fn set_label(strategy: Option<Strategy>) -> &'static str {
    if strategy.is_some() {
        "evanescent"
    } else {
        "propagative"
    }
}

fn check_cost(s: usize, p: usize, opts: &RunOptions) -> Result<()> {
    let cost = s as f64 * (p as f64).powi(2);
    if cost > COST_GUARD && !opts.paper_scale {
        return Err(EpwError::Config(format!(
            "S*P^2 = {cost:.3e} exceeds {COST_GUARD:.1e}; pass --paper-scale to run it"
        )));
    }
    Ok(())
}

fn sampling_rule(cfg: &ScenarioConfig, p: usize) -> Result<CubatureRule> {
    if let (Geometry::Sphere, Some(path)) = (cfg.geometry, &cfg.points_file) {
        return load_pointset(path);
    }
    boundary_rule(cfg.geometry, cfg.spacing, p, cfg.oversample)
}

/// One row of a mode sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub ell: usize,
    pub m: i64,
    pub residual: f64,
    pub coeff_norm: f64,
    pub eps_rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSweep {
    pub rows: Vec<ModeRow>,
    /// SVD factorizations performed by the sweep.
    pub factorizations: usize,
}

/// Approximates `b_l^m` for `l <= ell_max` (`m = 0`, or all `m`) with one
/// factorization of the sampling matrix.
pub fn mode_sweep(set: &ApproximationSet, rule: CubatureRule, epsilon: f64, ell_max: usize, all_m: bool) -> Result<ModeSweep> {
    let before = factorization_count();
    let system = SampledSystem::new(set, rule, epsilon)?;
    let modes: Vec<ModeIndex> = (0..=ell_max)
        .flat_map(|l| {
            let li = l as i64;
            let ms: Vec<i64> = if all_m { (-li..=li).collect() } else { vec![0] };
            ms.into_iter().map(move |m| ModeIndex { ell: l, m })
        })
        .collect();
    let ctx = BasisContext::new(set.kappa, ell_max)?;
    let rule = &system.rule;
    let mut b = Mat::<Complex64>::zeros(rule.len(), modes.len());
    for (s, (x, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let waves = ctx.spherical_waves_all(*x)?;
        let sw = w.sqrt();
        for (j, mi) in modes.iter().enumerate() {
            b[(s, j)] = waves[mi.flat()] * sw;
        }
    }
    let reports = system.solve_many(b.as_ref())?;
    let rows = modes
        .iter()
        .zip(reports)
        .map(|(mi, r)| ModeRow {
            ell: mi.ell,
            m: mi.m,
            residual: r.residual,
            coeff_norm: r.coeff_norm,
            eps_rank: r.eps_rank,
        })
        .collect();
    Ok(ModeSweep { rows, factorizations: factorization_count() - before })
}

fn out_file(opts: &RunOptions, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let path = opts.out_dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

pub fn cmd_mode_sweep(cfg: &ScenarioConfig, opts: &RunOptions, all_m: bool) -> Result<Vec<PathBuf>> {
    let kappa = cfg.kappa()?;
    let ell_max = cfg.ell_max.unwrap_or((5.0 * kappa).ceil() as usize);
    let l_max = if cfg.strategy.is_some() { cfg.l()? } else { cfg.l.unwrap_or(0) };
    let mut written = Vec::new();
    for p in cfg.p_values()? {
        let set = build_set(kappa, cfg.strategy, l_max, p, cfg.seed)?;
        let rule = sampling_rule(cfg, set.len())?;
        check_cost(rule.len(), set.len(), opts)?;
        let sweep = mode_sweep(&set, rule, cfg.epsilon, ell_max, all_m)?;
        let (path, w) = out_file(opts, &format!("mode_sweep_P{p}.csv"))?;
        write_table(w, "mode-sweep", &["ell", "m", "residual", "coeff_norm", "eps_rank"], &sweep.rows)?;
        written.push(path);
    }
    Ok(written)
}

/// Surrogate coefficients `u_l^m = N(0,1) / max(1, l - kappa)` in flat mode order.
pub fn surrogate_coefficients(kappa: f64, l_max: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, STREAM_SURROGATE);
    (0..mode_count(l_max))
        .map(|k| {
            let l = ModeIndex::from_flat(k).ell as f64;
            let g: f64 = StandardNormal.sample(&mut rng);
            g / (l - kappa).max(1.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateRow {
    pub ratio: f64,
    pub residual: f64,
    pub coeff_norm_over_unorm: f64,
}

/// Approximates the surrogate `u = sum u_l^m b_l^m`, `l <= l_max`, with a set
/// of size about `p` on the sphere.
pub fn surrogate_run(
    kappa: f64,
    l_max: usize,
    strategy: Option<Strategy>,
    p: usize,
    seed: u64,
    epsilon: f64,
    oversample: f64,
) -> Result<SurrogateRow> {
    let coeffs = surrogate_coefficients(kappa, l_max, seed);
    let unorm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let ctx = BasisContext::new(kappa, l_max)?;
    let set = build_set(kappa, strategy, l_max, p, seed)?;
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, set.len(), oversample)?;
    let system = SampledSystem::new(&set, rule, epsilon)?;
    let b: Vec<Complex64> = system
        .rule
        .points
        .iter()
        .zip(&system.rule.weights)
        .map(|(x, w)| {
            let waves = ctx.spherical_waves_all(*x)?;
            let u: Complex64 = waves.iter().zip(&coeffs).map(|(b, c)| b * c).sum();
            Ok(u * w.sqrt())
        })
        .collect::<Result<_>>()?;
    let r = system.solve_rhs(&b)?;
    Ok(SurrogateRow {
        ratio: set.len() as f64 / mode_count(l_max) as f64,
        residual: r.residual,
        coeff_norm_over_unorm: r.coeff_norm / unorm,
    })
}

pub fn cmd_surrogate(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let kappa = cfg.kappa()?;
    let l_max = cfg.l()?;
    let mut rows = Vec::new();
    for p in cfg.p_values()? {
        let s = sphere_sample_count(p, cfg.oversample);
        check_cost(s, p, opts)?;
        rows.push(surrogate_run(kappa, l_max, cfg.strategy, p, cfg.seed, cfg.epsilon, cfg.oversample)?);
    }
    let (path, w) = out_file(opts, "surrogate.csv")?;
    write_table(w, "surrogate", &["ratio", "residual", "coeff_norm_over_unorm"], &rows)?;
    Ok(vec![path])
}

/// `Phi_s(x) = e^{i kappa |x - s|} / (4 pi |x - s|)`.
pub fn fundamental_solution(kappa: f64, source: [f64; 3], x: [f64; 3]) -> Complex64 {
    let r = ((x[0] - source[0]).powi(2) + (x[1] - source[1]).powi(2) + (x[2] - source[2]).powi(2)).sqrt();
    Complex64::from_polar(1.0 / (4.0 * PI * r), kappa * r)
}

/// Evanescent truncation used for fundamental-solution targets, `max(ceil(kappa), floor(sqrt(P/10)))`.
pub fn fundamental_evanescent_degree(kappa: f64, p: usize) -> usize {
    (kappa.ceil() as usize).max(((p as f64) / 10.0).sqrt().floor() as usize)
}

/// Default source at distance `dist` from a polyhedron (cube: along +x, tetra: below the base).
pub fn default_source(geometry: Geometry, dist: f64) -> [f64; 3] {
    match geometry {
        Geometry::Sphere => [1.0 + dist, 0.0, 0.0],
        Geometry::Cube => [cube_half_edge() + dist, 0.0, 0.0],
        Geometry::Tetra => [0.0, 0.0, -1.0 / 3.0 - dist],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalRow {
    /// `P` for a set-size sweep or `dist / lambda` for a distance sweep.
    pub key: f64,
    pub set: String,
    pub residual: f64,
    pub coeff_norm: f64,
}

/// Distances (in wavelengths) used by the distance sweep.
pub const DISTANCE_GRID: [f64; 12] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0];

/// Common parameters of fundamental-solution runs.
#[derive(Debug, Clone)]
pub struct FundamentalSetup {
    pub kappa: f64,
    pub strategy: Strategy,
    pub seed: u64,
    pub epsilon: f64,
    pub oversample: f64,
    pub geometry: Geometry,
    pub spacing: Spacing,
}

impl FundamentalSetup {
    fn systems(&self, p: usize) -> Result<Vec<(&'static str, SampledSystem)>> {
        let l_ev = fundamental_evanescent_degree(self.kappa, p);
        let mut out = Vec::new();
        for strategy in [None, Some(self.strategy)] {
            let mut set = build_set(self.kappa, strategy, l_ev, p, self.seed)?;
            let rule = boundary_rule(self.geometry, self.spacing, set.len(), self.oversample)?;
            if strategy.is_some() && self.geometry != Geometry::Sphere {
                set.renormalize_boundary_sup(&rule.points);
            }
            out.push((set_label(strategy), SampledSystem::new(&set, rule, self.epsilon)?));
        }
        Ok(out)
    }

    fn check_source(&self, source: [f64; 3]) -> Result<()> {
        if self.geometry.contains(source, 1e-12) {
            return domain(format!("source {source:?} lies inside the closed domain"));
        }
        Ok(())
    }

    /// Residuals for the fundamental solution at `source`, one row per set and `P`.
    pub fn p_sweep(&self, source: [f64; 3], p_values: &[usize]) -> Result<Vec<FundamentalRow>> {
        self.check_source(source)?;
        let mut rows = Vec::new();
        for &p in p_values {
            for (label, sys) in self.systems(p)? {
                let r = sys.solve(|x| fundamental_solution(self.kappa, source, x))?;
                rows.push(FundamentalRow {
                    key: p as f64,
                    set: label.into(),
                    residual: r.residual,
                    coeff_norm: r.coeff_norm,
                });
            }
        }
        Ok(rows)
    }

    /// Residuals for sources at `dist = t * lambda` from the boundary along
    /// `direction`, one factorization per set.
    pub fn distance_sweep(&self, direction: [f64; 3], dists_over_lambda: &[f64], p: usize) -> Result<Vec<FundamentalRow>> {
        let n = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
        if n == 0.0 {
            return domain("source direction must be nonzero");
        }
        let unit = [direction[0] / n, direction[1] / n, direction[2] / n];
        let lambda = 2.0 * PI / self.kappa;
        let exit = boundary_exit(self.geometry, unit);
        let sources: Vec<[f64; 3]> = dists_over_lambda
            .iter()
            .map(|t| {
                let r = exit + t * lambda;
                [unit[0] * r, unit[1] * r, unit[2] * r]
            })
            .collect();
        for s in &sources {
            self.check_source(*s)?;
        }
        let mut rows = Vec::new();
        let systems = self.systems(p)?;
        for (k, src) in sources.iter().enumerate() {
            for (label, sys) in &systems {
                let r = sys.solve(|x| fundamental_solution(self.kappa, *src, x))?;
                rows.push(FundamentalRow {
                    key: dists_over_lambda[k],
                    set: (*label).into(),
                    residual: r.residual,
                    coeff_norm: r.coeff_norm,
                });
            }
        }
        Ok(rows)
    }
}

/// Distance from the origin to the boundary along a unit direction.
fn boundary_exit(geometry: Geometry, unit: [f64; 3]) -> f64 {
    match geometry {
        Geometry::Sphere => 1.0,
        Geometry::Cube => cube_half_edge() / unit.iter().map(|c| c.abs()).fold(0.0, f64::max),
        Geometry::Tetra => {
            let v = crate::sphquad::tetra_vertices();
            (0..4)
                .filter_map(|k| {
                    let c = -(v[k][0] * unit[0] + v[k][1] * unit[1] + v[k][2] * unit[2]);
                    (c > 0.0).then(|| (1.0 / 3.0) / c)
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn fundamental_setup(cfg: &ScenarioConfig) -> Result<FundamentalSetup> {
    Ok(FundamentalSetup {
        kappa: cfg.kappa()?,
        strategy: cfg.strategy.unwrap_or(Strategy::E),
        seed: cfg.seed,
        epsilon: cfg.epsilon,
        oversample: cfg.oversample,
        geometry: cfg.geometry,
        spacing: cfg.spacing,
    })
}

fn fundamental_source(cfg: &ScenarioConfig, kappa: f64) -> Result<[f64; 3]> {
    match &cfg.target {
        Some(Target::Fundamental { source }) => Ok(*source),
        None => Ok(default_source(cfg.geometry, 2.0 * (2.0 * PI / kappa) / 3.0)),
        Some(_) => Err(EpwError::Config("target must be a fundamental solution".into())),
    }
}

fn guard_sizes(setup: &FundamentalSetup, ps: &[usize], opts: &RunOptions) -> Result<()> {
    for &p in ps {
        let pp = setup.strategy.rounded_size(p).max(p);
        check_cost(sphere_sample_count(pp, setup.oversample), pp, opts)?;
    }
    Ok(())
}

const FUNDAMENTAL_HEADER_P: [&str; 4] = ["P", "set", "residual", "coeff_norm"];

/// With several `P` values, sweeps `P` at the configured source; with one,
/// sweeps the source distance along the configured source direction.
pub fn cmd_fundamental(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let setup = fundamental_setup(cfg)?;
    let source = fundamental_source(cfg, setup.kappa)?;
    let ps = cfg.p_values()?;
    guard_sizes(&setup, &ps, opts)?;
    if ps.len() > 1 {
        let rows = setup.p_sweep(source, &ps)?;
        let (path, w) = out_file(opts, "fundamental_P.csv")?;
        write_table(w, "fundamental-p", &FUNDAMENTAL_HEADER_P, &rows)?;
        Ok(vec![path])
    } else {
        let rows = setup.distance_sweep(source, &DISTANCE_GRID, ps[0])?;
        let (path, w) = out_file(opts, "fundamental_distance.csv")?;
        write_table(w, "fundamental-distance", &["dist_over_lambda", "set", "residual", "coeff_norm"], &rows)?;
        Ok(vec![path])
    }
}

/// Fundamental-solution `P` sweep on a cube or tetrahedron boundary.
pub fn cmd_geometry(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    if cfg.geometry == Geometry::Sphere {
        return Err(EpwError::Config("geometry must be cube or tetra".into()));
    }
    let setup = fundamental_setup(cfg)?;
    let source = fundamental_source(cfg, setup.kappa)?;
    let ps = cfg.p_values()?;
    guard_sizes(&setup, &ps, opts)?;
    let rows = setup.p_sweep(source, &ps)?;
    let name = match cfg.geometry {
        Geometry::Cube => "geometry_cube.csv",
        _ => "geometry_tetra.csv",
    };
    let (path, w) = out_file(opts, name)?;
    write_table(w, "geometry", &FUNDAMENTAL_HEADER_P, &rows)?;
    Ok(vec![path])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaRow {
    #[serde(rename = "P")]
    pub p: usize,
    pub index: usize,
    pub sigma: f64,
}

/// Singular values of the sampling matrix of `set` on `rule`.
pub fn singular_values(set: &ApproximationSet, rule: &CubatureRule) -> Result<Vec<f64>> {
    let a = assemble_matrix(set, rule)?;
    Ok(TruncatedSvd::factor(a.as_ref(), 1.0)?.s)
}

pub fn cmd_singular_values(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let kappa = cfg.kappa()?;
    let l_max = if cfg.strategy.is_some() { cfg.l()? } else { 0 };
    let mut rows = Vec::new();
    for p in cfg.p_values()? {
        let set = build_set(kappa, cfg.strategy, l_max, p, cfg.seed)?;
        let rule = sampling_rule(cfg, set.len())?;
        check_cost(rule.len(), set.len(), opts)?;
        for (index, sigma) in singular_values(&set, &rule)?.into_iter().enumerate() {
            rows.push(SigmaRow { p, index, sigma });
        }
    }
    let (path, w) = out_file(opts, "singular_values.csv")?;
    write_table(w, "singular-values", &["P", "index", "sigma"], &rows)?;
    Ok(vec![path])
}

/// Optimizes an extremal rule of degree `l_max`, writes it as a point file and
/// returns its validation report.
pub fn cmd_extremal(l_max: usize, seed: u64, out: &Path) -> Result<RuleReport> {
    let rule = extremal_rule(l_max, seed, EXTREMAL_DEFAULT_ITERS)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_pointset(out, &rule)?;
    Ok(validate_rule(&rule, l_max))
}

/// Loads a point file and reports weight sum, positivity and exactness.
pub fn cmd_validate_points(path: &Path) -> Result<RuleReport> {
    let rule = load_pointset(path)?;
    let degree = rule.degree.unwrap_or(0);
    Ok(validate_rule(&rule, degree))
}
