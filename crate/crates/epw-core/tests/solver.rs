mod common;

use common::*;
use epw_core::rng::stream_rng;
use epw_core::scenarios::mode_sweep;
use epw_core::solver::*;
use epw_core::sphquad::{direction_set, extremal_rule, CubatureRule, Geometry, Spacing};
use epw_core::EpwError;
use faer::Mat;
use num_complex::Complex64;
use rand::RngExt;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_system(seed: u64, rows: usize, cols: usize) -> (Mat<Complex64>, Vec<Complex64>) {
    let mut rng = stream_rng(seed, 0);
    let mut draw = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let a = Mat::from_fn(rows, cols, |_, _| draw());
    let b = (0..rows).map(|_| draw()).collect();
    (a, b)
}

fn to_rows(a: &Mat<Complex64>) -> Vec<Vec<Complex64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

#[test]
fn threshold_drops_tiny_direction() {
    let a = Mat::from_fn(2, 2, |i, j| if i != j { c(0.0) } else if i == 0 { c(2.0) } else { c(1e-16) });
    let (xi, s) = truncated_svd_solve(a.as_ref(), &[c(2.0), c(1e-16)], 1e-14).unwrap();
    assert_eq!(s, vec![2.0, 1e-16]);
    assert!((xi[0] - 1.0).norm() < 1e-15 && xi[1].norm() == 0.0);
}

#[test]
fn matches_normal_equations() {
    let (a, b) = random_system(61, 30, 8);
    let (xi, _) = truncated_svd_solve(a.as_ref(), &b, 1e-14).unwrap();
    let want = normal_equations(&to_rows(&a), &b);
    assert!(max_abs_diff(&xi, &want) < 1e-10);
}

#[test]
fn residual_monotone_in_epsilon() {
    let (a, b) = random_system(62, 20, 12);
    let mut last = 0.0;
    for eps in [1e-14, 1e-3, 0.1, 0.5, 1.0] {
        let (xi, _) = truncated_svd_solve(a.as_ref(), &b, eps).unwrap();
        let r = relative_residual(a.as_ref(), &xi, &b).unwrap();
        assert!(r >= last - 1e-15, "eps {eps}");
        last = r;
    }
    assert!(truncated_svd_solve(a.as_ref(), &b, 0.0).is_err());
    assert!(truncated_svd_solve(a.as_ref(), &b, 1.5).is_err());
}

#[test]
fn relative_residual_cases() {
    let (a, b) = random_system(63, 6, 6);
    let (xi, _) = truncated_svd_solve(a.as_ref(), &b, 1e-14).unwrap();
    assert!(relative_residual(a.as_ref(), &xi, &b).unwrap() <= 1e-14);
    let zero = vec![c(0.0); 6];
    assert!((relative_residual(a.as_ref(), &zero, &b).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(relative_residual(a.as_ref(), &xi, &zero), Err(EpwError::Domain(_))));
    let (a, b) = random_system(64, 9, 4);
    let xi: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 1.0)).collect();
    let r: f64 = to_rows(&a)
        .iter()
        .zip(&b)
        .map(|(row, bi)| (row.iter().zip(&xi).map(|(x, y)| x * y).sum::<Complex64>() - bi).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!((relative_residual(a.as_ref(), &xi, &b).unwrap() - r).abs() < 1e-14);
}

#[test]
fn right_to_left_avoids_overflow() {
    // the pseudo-inverse of diag(1, 1e-310) is not representable; its action on b is
    let u = Mat::from_fn(2, 2, |i, j| c(if i == j { 1.0 } else { 0.0 }));
    let v = u.clone();
    let svd = TruncatedSvd::from_parts(u, vec![1.0, 1e-310], v, 1e-320).unwrap();
    assert_eq!(svd.rank, 2);
    assert!((1.0f64 / 1e-310).is_infinite());
    let xi = svd.solve(&[c(1.0), c(1e-310)]).unwrap();
    assert!((xi[0] - 1.0).norm() < 1e-15 && (xi[1] - 1.0).norm() < 1e-15);
}

#[test]
fn from_parts_validation() {
    let u = Mat::<Complex64>::zeros(3, 2);
    let v = Mat::<Complex64>::zeros(2, 2);
    assert!(TruncatedSvd::from_parts(u.clone(), vec![1.0, 2.0], v.clone(), 1e-3).is_err());
    assert!(TruncatedSvd::from_parts(u.clone(), vec![1.0, -1.0], v.clone(), 1e-3).is_err());
    assert!(matches!(TruncatedSvd::from_parts(u.clone(), vec![1.0], v.clone(), 1e-3), Err(EpwError::Shape(_))));
    let svd = TruncatedSvd::from_parts(u, vec![1.0, 1e-4], v, 1e-3).unwrap();
    assert_eq!(svd.rank, 1);
    assert!(matches!(svd.solve(&[c(1.0); 2]), Err(EpwError::Shape(_))));
}

#[test]
fn nonpositive_weights_rejected() {
    let set = ApproximationSet::propagative(&[[0.0, 0.0, 1.0]], 1.0);
    let rule = CubatureRule { points: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], weights: vec![1.0, 0.0], degree: None };
    assert!(matches!(assemble_matrix(&set, &rule), Err(EpwError::Positivity { index: 1, .. })));
}

#[test]
fn constant_wave_trivial_system() {
    // kappa d . x = 0 on the sampled points, so the single wave is identically 1
    let set = ApproximationSet { kappa: 3.0, waves: vec![WaveDescriptor::Propagative([0.0, 0.0, 1.0])], ln_norms: vec![0.0] };
    let rule = CubatureRule {
        points: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]],
        weights: vec![1.0, 2.0, 4.0],
        degree: None,
    };
    let (a, b) = assemble(&set, &rule, |_| c(1.0)).unwrap();
    for s in 0..3 {
        assert!((a[(s, 0)] - rule.weights[s].sqrt()).norm() < 1e-15);
        assert!((b[s] - rule.weights[s].sqrt()).norm() < 1e-15);
    }
    let (xi, _) = truncated_svd_solve(a.as_ref(), &b, 1e-14).unwrap();
    assert!((xi[0] - 1.0).norm() < 1e-14);
}

#[test]
fn weighted_norm_identity() {
    let dirs = direction_set(16).unwrap();
    let set = ApproximationSet::propagative(&dirs, 4.0);
    let rule = extremal_rule(5, 0, 100).unwrap();
    let a = assemble_matrix(&set, &rule).unwrap();
    let mut rng = stream_rng(65, 0);
    let mu: Vec<Complex64> = (0..16).map(|_| Complex64::new(rng.random(), rng.random())).collect();
    let amu: f64 = to_rows(&a).iter().map(|r| r.iter().zip(&mu).map(|(x, y)| x * y).sum::<Complex64>().norm_sqr()).sum();
    let direct: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| {
            let u: Complex64 = dirs
                .iter()
                .zip(&mu)
                .map(|(d, m)| m * Complex64::new(0.0, 4.0 * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])).exp() / 4.0)
                .sum();
            w * u.norm_sqr()
        })
        .sum();
    assert!((amu - direct).abs() < 1e-12 * direct);
}

#[test]
fn sampling_matrix_dimensions() {
    assert_eq!(sphere_sample_count(2304, 2.0), 4624);
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, 2304, 2.0).unwrap();
    assert_eq!(rule.len(), 4624);
    let set = ApproximationSet::propagative(&direction_set(2304).unwrap(), 6.0);
    let a = assemble_matrix(&set, &rule).unwrap();
    assert_eq!((a.nrows(), a.ncols()), (4624, 2304));
    let cube = boundary_rule(Geometry::Cube, Spacing::Chebyshev, 100, 2.0).unwrap();
    assert!(cube.len() >= 200);
    assert!(boundary_rule(Geometry::Sphere, Spacing::Equispaced, 10, 0.0).is_err());
}

#[test]
fn largest_singular_value_ignores_row_order() {
    let set = ApproximationSet::propagative(&direction_set(25).unwrap(), 5.0);
    let rule = extremal_rule(7, 0, 100).unwrap();
    let mut perm: Vec<usize> = (0..rule.len()).collect();
    let mut rng = stream_rng(66, 0);
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let shuffled = CubatureRule {
        points: perm.iter().map(|&i| rule.points[i]).collect(),
        weights: perm.iter().map(|&i| rule.weights[i]).collect(),
        degree: rule.degree,
    };
    let s1 = TruncatedSvd::factor(assemble_matrix(&set, &rule).unwrap().as_ref(), 1e-14).unwrap().s[0];
    let s2 = TruncatedSvd::factor(assemble_matrix(&set, &shuffled).unwrap().as_ref(), 1e-14).unwrap().s[0];
    assert!((s1 - s2).abs() < 1e-12 * s1);
}

#[test]
fn eps_rank_saturates_with_more_waves() {
    let kappa = 6.0f64;
    let ranks: Vec<usize> = [576usize, 1024, 1296]
        .iter()
        .map(|&p| {
            let set = ApproximationSet::propagative(&direction_set(p).unwrap(), kappa);
            let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, p, 2.0).unwrap();
            SampledSystem::new(&set, rule, 1e-8).unwrap().svd.rank
        })
        .collect();
    assert!(ranks[1] < 576 && ranks[2] < 576, "{ranks:?}");
    assert!(ranks[2] as f64 <= 1.05 * ranks[0] as f64, "{ranks:?}");
}

#[test]
fn coefficient_bound_and_self_target() {
    let p = 36;
    let set = ApproximationSet::propagative(&direction_set(p).unwrap(), 3.0);
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, p, 2.0).unwrap();
    let sys = SampledSystem::new(&set, rule, 1e-14).unwrap();
    let d = set.direction(7);
    let r = sys.solve(|x| (Complex64::i() * 3.0 * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])).exp()).unwrap();
    assert!(r.residual <= 1e-12, "{}", r.residual);
    assert!(r.coeff_norm <= 1.0001 * (p as f64).sqrt(), "{}", r.coeff_norm);
    let b = sys.rhs(|x| c(x[0] * x[1] + 1.0)).unwrap();
    let rep = sys.solve_rhs(&b).unwrap();
    let bound = solver_bound(&rep.singular_values, rep.eps_rank) * l2_norm(&b);
    assert!(rep.coeff_norm <= bound * (1.0 + 1e-12));
    assert!(rep.singular_values.windows(2).all(|w| w[0] >= w[1] && w[1] >= 0.0));
    let smax = rep.singular_values[0];
    assert_eq!(rep.eps_rank, rep.singular_values.iter().filter(|&&s| s >= 1e-14 * smax).count());
}

fn solver_bound(s: &[f64], rank: usize) -> f64 {
    1.0 / s[rank - 1]
}

#[test]
fn propagative_modes_low_and_high() {
    let kappa = 6.0;
    let p = 576;
    let set = ApproximationSet::propagative(&direction_set(p).unwrap(), kappa);
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, p, 2.0).unwrap();
    let before = factorization_count();
    let sweep = mode_sweep(&set, rule, 1e-14, 30, false).unwrap();
    assert_eq!(sweep.factorizations, 1);
    assert_eq!(factorization_count() - before, 1);
    assert_eq!(sweep.rows.len(), 31);
    for row in &sweep.rows {
        if row.ell <= 6 {
            assert!(row.residual < 1e-10 && row.coeff_norm < 1e2, "{row:?}");
        }
    }
    assert!(sweep.rows[30].residual >= 0.1, "{:?}", sweep.rows[30]);
}

#[test]
fn report_serialization() {
    let set = ApproximationSet::propagative(&direction_set(9).unwrap(), 1.0);
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, 9, 2.0).unwrap();
    let rep = approximate_on_rule(|_| c(1.0), &set, rule, 1e-14).unwrap();
    let full: serde_json::Value = serde_json::from_str(&rep.to_json(true).unwrap()).unwrap();
    let lean: serde_json::Value = serde_json::from_str(&rep.to_json(false).unwrap()).unwrap();
    assert_eq!(full["singular_values"].as_array().unwrap().len(), 9);
    assert!(lean.get("singular_values").is_none());
    assert_eq!(lean["p"], 9);
    assert_eq!(rep.csv_row().0, rep.s);
}
