//! Parameter-node generation for evanescent plane-wave sets.
//!
//! Nodes in `Y = [0,pi] x [0,2pi) x [0,2pi) x [0,inf)` are drawn from the
//! density `rho_N = mu_N^{-1} w / N` by mapping points of `[0,1]^4` through
//! `(arccos(1-2z1), 2 pi z2, 2 pi z3, Upsilon^{-1}(z4))`, where `Upsilon` is
//! the approximate marginal CDF of `zeta`.

use crate::basis::ln_alpha_approx;
use crate::error::{domain, EpwError, Result};
use crate::rng::{stream_rng, STREAM_NODES};
use crate::sobol::sobol;
use crate::solver::{ApproximationSet, WaveDescriptor};
use crate::specfun::{ln_upper_incomplete_q, mode_count, normalized_assoc_legendre_ln_table, spherical_angles};
use crate::waves::{ln_sum_sq_row, ParametricPoint};
use rand::RngExt;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Upper end of the bracket search when inverting `Upsilon`.
pub const ZETA_MAX: f64 = 1e6;

/// Per-`(kappa, L)` constants shared by density evaluations.
#[derive(Debug, Clone)]
pub struct DensityContext {
    pub kappa: f64,
    pub l_max: usize,
    ln_alpha: Vec<f64>,
    ln_q0: Vec<f64>,
}

impl DensityContext {
    pub fn new(kappa: f64, l_max: usize) -> Result<Self> {
        let ln_alpha = (0..=l_max).map(|l| ln_alpha_approx(l, kappa)).collect::<Result<Vec<_>>>()?;
        let ln_q0 = (0..=l_max)
            .map(|l| ln_upper_incomplete_q(2.0 * l as f64 + 1.5, 2.0 * kappa))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kappa, l_max, ln_alpha, ln_q0 })
    }

    /// `ln mu_N(zeta)` with `1/mu_N = sum_l alpha_l^2 sum_m' (gamma_l^m' P_l^m'(z))^2`.
    pub fn ln_mu_n(&self, zeta: f64) -> Result<f64> {
        check_zeta(zeta)?;
        let q = normalized_assoc_legendre_ln_table(self.l_max, zeta / (2.0 * self.kappa) + 1.0)?;
        let terms: Vec<f64> =
            (0..=self.l_max).map(|l| 2.0 * self.ln_alpha[l] + ln_sum_sq_row(&q, l)).collect();
        let shift = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|t| (t - shift).exp()).sum();
        Ok(-(shift + s.ln()))
    }

    pub fn mu_n(&self, zeta: f64) -> Result<f64> {
        Ok(self.ln_mu_n(zeta)?.exp())
    }

    /// `1 - (1/N) sum_l (2l+1) Q(2l+3/2, 2k+zeta) / Q(2l+3/2, 2k)`, clamped to `[0, 1]`.
    pub fn upsilon_hat(&self, zeta: f64) -> Result<f64> {
        check_zeta(zeta)?;
        if zeta == 0.0 {
            return Ok(0.0);
        }
        let n = mode_count(self.l_max) as f64;
        let mut s = 0.0;
        for l in 0..=self.l_max {
            let a = 2.0 * l as f64 + 1.5;
            let lq = ln_upper_incomplete_q(a, 2.0 * self.kappa + zeta)?;
            s += (2 * l + 1) as f64 * (lq - self.ln_q0[l]).exp();
        }
        Ok((1.0 - s / n).clamp(0.0, 1.0))
    }

    /// `zeta` with `|Upsilon(zeta) - u| <= tol`, by bisection on a bracket
    /// doubled from `4 kappa`.
    pub fn invert_upsilon(&self, u: f64, tol: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return domain(format!("CDF level must lie in [0, 1), got {u}"));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 4.0 * self.kappa;
        while self.upsilon_hat(hi)? < u {
            hi *= 2.0;
            if hi > ZETA_MAX {
                return Err(EpwError::Convergence(format!(
                    "bracket for level {u} exceeds zeta = {ZETA_MAX}"
                )));
            }
        }
        let mut lo = 0.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            let f = self.upsilon_hat(mid)?;
            if (f - u).abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(mid);
            }
            if f < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return domain(format!("zeta must be finite and >= 0, got {zeta}"));
    }
    Ok(())
}

pub fn mu_n(zeta: f64, kappa: f64, l_max: usize) -> Result<f64> {
    DensityContext::new(kappa, l_max)?.mu_n(zeta)
}

pub fn upsilon_hat(zeta: f64, kappa: f64, l_max: usize) -> Result<f64> {
    DensityContext::new(kappa, l_max)?.upsilon_hat(zeta)
}

pub fn invert_upsilon(u: f64, kappa: f64, l_max: usize, tol: f64) -> Result<f64> {
    DensityContext::new(kappa, l_max)?.invert_upsilon(u, tol)
}

/// Tolerance used when mapping node coordinates through `Upsilon^{-1}`.
pub const NODE_INVERSION_TOL: f64 = 1e-12;

/// Sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Midpoint tensor grid in `[0,1]^4`, rounded up to a 4th power.
    A,
    /// Seeded uniform points in `[0,1]^4`.
    B,
    /// Sobol points in `[0,1]^4`.
    C,
    /// Extremal `(theta1, theta2)`, seeded uniform `(theta3, zeta)`.
    D,
    /// Extremal `(theta1, theta2)`, Sobol `(theta3, zeta)`.
    E,
}

impl Strategy {
    /// Actual set size for a requested `p`.
    pub fn rounded_size(self, p: usize) -> usize {
        match self {
            Strategy::A => {
                let n = smallest_root(p, 4);
                n.pow(4)
            }
            Strategy::B | Strategy::C => p,
            Strategy::D | Strategy::E => {
                let n = smallest_root(p, 2);
                n * n
            }
        }
    }

    pub fn needs_directions(self) -> bool {
        matches!(self, Strategy::D | Strategy::E)
    }
}

/// Smallest `n` with `n^k >= p`.
fn smallest_root(p: usize, k: u32) -> usize {
    let mut n = (p as f64).powf(1.0 / k as f64).floor().max(1.0) as usize;
    while n.pow(k) < p {
        n += 1;
    }
    while n > 1 && (n - 1).pow(k) >= p {
        n -= 1;
    }
    n
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::A => "a",
            Strategy::B => "b",
            Strategy::C => "c",
            Strategy::D => "d",
            Strategy::E => "e",
        };
        f.write_str(s)
    }
}

impl FromStr for Strategy {
    type Err = EpwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Strategy::A),
            "b" => Ok(Strategy::B),
            "c" => Ok(Strategy::C),
            "d" => Ok(Strategy::D),
            "e" => Ok(Strategy::E),
            _ => Err(EpwError::Config(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Evanescent parameter nodes with their set normalization `sqrt(mu_N / P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub strategy: Strategy,
    pub kappa: f64,
    pub l_max: usize,
    pub p_requested: usize,
    pub seed: u64,
    pub nodes: Vec<ParametricPoint>,
    /// `ln sqrt(mu_N(zeta_p) / P)` per node.
    pub ln_norms: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.ln_norms.iter().map(|v| v.exp()).collect()
    }

    /// CSV with columns `theta1,theta2,theta3,zeta,norm`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = crate::output::csv_writer(w, "nodes")?;
        out.write_record(["theta1", "theta2", "theta3", "zeta", "norm"]).map_err(std::io::Error::from)?;
        for (n, ln) in self.nodes.iter().zip(&self.ln_norms) {
            out.serialize((n.theta1, n.theta2, n.theta3, n.zeta, ln.exp()))
                .map_err(std::io::Error::from)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn midpoint_grid(n: usize) -> Vec<[f64; 4]> {
    let c = |i: usize| (i as f64 + 0.5) / n as f64;
    let mut out = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                for e in 0..n {
                    out.push([c(a), c(b), c(d), c(e)]);
                }
            }
        }
    }
    out
}

/// Generates `P'` nodes for a strategy. Strategies `d` and `e` take
/// `(theta1, theta2)` from `directions`, which must hold exactly `P'` points.
pub fn generate_nodes(
    strategy: Strategy,
    l_max: usize,
    p: usize,
    kappa: f64,
    seed: u64,
    directions: Option<&[[f64; 3]]>,
) -> Result<NodeSet> {
    if p == 0 {
        return domain("node count must be positive");
    }
    let pp = strategy.rounded_size(p);
    let ctx = DensityContext::new(kappa, l_max)?;
    let zeta = |u: f64| ctx.invert_upsilon(u, NODE_INVERSION_TOL);
    let two_pi = 2.0 * PI;
    let from_unit = |z: [f64; 4]| -> Result<ParametricPoint> {
        Ok(ParametricPoint {
            theta1: (1.0 - 2.0 * z[0]).clamp(-1.0, 1.0).acos(),
            theta2: two_pi * z[1],
            theta3: two_pi * z[2],
            zeta: zeta(z[3])?,
        })
    };
    let nodes: Vec<ParametricPoint> = match strategy {
        Strategy::A => {
            let n = smallest_root(p, 4);
            midpoint_grid(n).into_iter().map(from_unit).collect::<Result<_>>()?
        }
        Strategy::B => {
            let mut rng = stream_rng(seed, STREAM_NODES);
            (0..pp)
                .map(|_| from_unit([rng.random(), rng.random(), rng.random(), rng.random()]))
                .collect::<Result<_>>()?
        }
        Strategy::C => sobol(4, pp, 1)?
            .into_iter()
            .map(|z| from_unit([z[0], z[1], z[2], z[3]]))
            .collect::<Result<_>>()?,
        Strategy::D | Strategy::E => {
            let Some(dirs) = directions else {
                return Err(EpwError::Config(format!(
                    "strategy {strategy} needs a direction set of {pp} points"
                )));
            };
            if dirs.len() != pp {
                return Err(EpwError::Shape(format!(
                    "strategy {strategy} needs {pp} directions, got {}",
                    dirs.len()
                )));
            }
            let pairs: Vec<[f64; 2]> = if strategy == Strategy::D {
                let mut rng = stream_rng(seed, STREAM_NODES);
                (0..pp).map(|_| [rng.random(), rng.random()]).collect()
            } else {
                sobol(2, pp, 1)?.into_iter().map(|z| [z[0], z[1]]).collect()
            };
            dirs.iter()
                .zip(pairs)
                .map(|(d, z)| {
                    let (t1, t2) = spherical_angles(*d);
                    Ok(ParametricPoint { theta1: t1, theta2: t2, theta3: two_pi * z[0], zeta: zeta(z[1])? })
                })
                .collect::<Result<_>>()?
        }
    };
    let ln_p = (nodes.len() as f64).ln();
    let ln_norms = nodes
        .iter()
        .map(|n| Ok(0.5 * (ctx.ln_mu_n(n.zeta)? - ln_p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NodeSet { strategy, kappa, l_max, p_requested: p, seed, nodes, ln_norms })
}

/// Evanescent approximation set `{ sqrt(mu_N(y_p)/P) phi_{y_p} }`.
pub fn build_evanescent_set(nodes: &NodeSet) -> Result<ApproximationSet> {
    if nodes.is_empty() {
        return domain("node set is empty");
    }
    Ok(ApproximationSet {
        kappa: nodes.kappa,
        waves: nodes.nodes.iter().map(|y| WaveDescriptor::Evanescent(*y)).collect(),
        ln_norms: nodes.ln_norms.clone(),
    })
}
