//! Walk-on-spheres estimates for the exterior problem of the half space.
//!
//! The symmetric `2s`-stable process started at the centre of `B_r` leaves the
//! ball in one jump, with exit law given by the ball Poisson kernel. The radial
//! part of that law is `|Y| = r/√(1-V)` with `V ~ Beta(1-s, s)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::kernels::{poisson_halfspace, NormMode};
use crate::quad::{compensated_sum, integrate, integrate_graded, QuadOptions};
use crate::special::{inc_beta_regularized, inc_beta_regularized_inv, FracOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n_walks: u64,
    pub max_steps: u32,
    pub seed: u64,
    /// Compare against quadrature of the half-space Poisson kernel.
    pub norm_check: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { n_walks: 100_000, max_steps: 10_000, seed: 0x5eed, norm_check: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub estimate: f64,
    pub std_error: f64,
    pub mean_steps: f64,
    pub capped_fraction: f64,
    /// Set when more than 1% of the walks hit `max_steps`.
    pub bias_warning: bool,
    pub reference: Option<f64>,
    pub n_walks: u64,
    pub seed: u64,
}

impl WalkStats {
    /// `|estimate - reference| / std_error`, when a reference is known.
    pub fn z_score(&self) -> Option<f64> {
        self.reference.map(|r| {
            let d = (self.estimate - r).abs();
            if self.std_error > 0.0 {
                d / self.std_error
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }
}

/// Bounded data on the closed left half space.
#[derive(Clone)]
pub enum ExteriorData {
    Constant(f64),
    /// Indicator of `Π [lo_i, hi_i]` with `hi_1 ≤ 0`.
    BoxIndicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Custom {
        label: String,
        f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ExteriorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExteriorData::Constant(c) => write!(f, "Constant({c})"),
            ExteriorData::BoxIndicator { lo, hi } => write!(f, "BoxIndicator({lo:?}, {hi:?})"),
            ExteriorData::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl ExteriorData {
    pub fn custom(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ExteriorData::Custom { label: label.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            ExteriorData::Constant(c) => *c,
            ExteriorData::BoxIndicator { lo, hi } => {
                let inside = y.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            ExteriorData::Custom { f, .. } => f(y),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            ExteriorData::Constant(c) if !c.is_finite() => Err(FracError::domain("wos", "constant data must be finite")),
            ExteriorData::BoxIndicator { lo, hi } => {
                if lo.len() != n || hi.len() != n {
                    return Err(FracError::domain("wos", "box dimension does not match N"));
                }
                if hi[0] > 0.0 {
                    return Err(FracError::domain("wos", "box must lie in {y_1 <= 0}"));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
                    return Err(FracError::domain("wos", "box corners must be finite with lo <= hi"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// One exit point of `B_r(0)` for the process started at the centre.
pub fn sample_ball_jump<R: Rng + ?Sized>(order: &FracOrder, r: f64, rng: &mut R) -> Vec<f64> {
    let n = order.dim();
    let s = order.s();
    let mut dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut len = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
    while len == 0.0 {
        dir = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        len = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
    }
    let radius = loop {
        let u: f64 = rng.gen();
        let (_, one_minus_v) = inc_beta_regularized_inv(u, 1.0 - s, s, 1e-13).expect("valid beta parameters");
        let rho = r / one_minus_v.sqrt();
        if rho.is_finite() && rho > r {
            break rho;
        }
    };
    dir.iter().map(|c| c / len * radius).collect()
}

/// `P(|Y| > k r)` for the exit point of a ball of radius `r`.
pub fn ball_exit_tail(order: &FracOrder, k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Ok(1.0);
    }
    let s = order.s();
    Ok(1.0 - inc_beta_regularized(1.0 - 1.0 / (k * k), 1.0 - s, s)?)
}

fn walk(order: &FracOrder, x: &[f64], g: &ExteriorData, max_steps: u32, rng: &mut ChaCha8Rng) -> (f64, u32, bool) {
    let mut p = x.to_vec();
    for step in 1..=max_steps {
        let jump = sample_ball_jump(order, p[0], rng);
        for (a, b) in p.iter_mut().zip(&jump) {
            *a += b;
        }
        if p[0] <= 0.0 {
            return (g.eval(&p), step, false);
        }
    }
    (0.0, max_steps, true)
}

/// `∫_{R^N_-} P_∞(x, y) g(y) dy` by walk on spheres.
pub fn wos_estimate(order: &FracOrder, x: &[f64], g: &ExteriorData, config: &WalkConfig) -> Result<WalkStats> {
    let n = order.dim();
    if x.len() != n {
        return Err(FracError::domain("wos_estimate", "start point has the wrong dimension"));
    }
    if !(x[0] > 0.0) || x.iter().any(|c| !c.is_finite()) {
        return Err(FracError::domain("wos_estimate", "start point must lie in the open half space"));
    }
    if config.n_walks < 2 || config.max_steps == 0 {
        return Err(FracError::domain("wos_estimate", "need at least two walks and one step"));
    }
    g.validate(n)?;
    let outcomes: Vec<(f64, u32, bool)> = (0..config.n_walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            walk(order, x, g, config.max_steps, &mut rng)
        })
        .collect();
    let m = config.n_walks as f64;
    let mean = compensated_sum(outcomes.iter().map(|o| o.0)) / m;
    let var = compensated_sum(outcomes.iter().map(|o| (o.0 - mean).powi(2))) / (m - 1.0);
    let mean_steps = outcomes.iter().map(|o| o.1 as u64).sum::<u64>() as f64 / m;
    let capped = outcomes.iter().filter(|o| o.2).count() as f64 / m;
    let reference = if config.norm_check { exterior_reference(order, x, g)? } else { None };
    Ok(WalkStats {
        estimate: mean,
        std_error: (var / m).sqrt(),
        mean_steps,
        capped_fraction: capped,
        bias_warning: capped > 0.01,
        reference,
        n_walks: config.n_walks,
        seed: config.seed,
    })
}

/// Quadrature of `∫ P_∞(x, y) g(y) dy` with the probabilistic normalization;
/// `None` for custom data.
pub fn exterior_reference(order: &FracOrder, x: &[f64], g: &ExteriorData) -> Result<Option<f64>> {
    match g {
        ExteriorData::Constant(c) => Ok(Some(*c)),
        ExteriorData::BoxIndicator { lo, hi } => Ok(Some(box_poisson_mass(order, x, lo, hi)?)),
        ExteriorData::Custom { .. } => Ok(None),
    }
}

/// `∫_{box} P_∞(x, y) dy` by nested adaptive quadrature.
pub fn box_poisson_mass(order: &FracOrder, x: &[f64], lo: &[f64], hi: &[f64]) -> Result<f64> {
    let n = order.dim();
    let opts = QuadOptions::new(1e-12, 1e-10);
    fn inner(order: &FracOrder, x: &[f64], lo: &[f64], hi: &[f64], y: &mut Vec<f64>, opts: &QuadOptions) -> f64 {
        let k = y.len();
        if k == lo.len() {
            return poisson_halfspace(order, x, y, NormMode::ProbabilisticKappa).unwrap_or(f64::NAN);
        }
        let cell = std::cell::RefCell::new(std::mem::take(y));
        let f = |t: f64| {
            let mut yy = cell.borrow().clone();
            yy.push(t);
            inner(order, x, lo, hi, &mut yy, opts)
        };
        let v = if k == 0 && hi[0] == 0.0 {
            // (-y_1)^{-s} at the hyperplane
            integrate_graded(|h| f(-h), -lo[0], -order.s(), opts).value
        } else {
            integrate(f, lo[k], hi[k], opts).value
        };
        *y = cell.into_inner();
        v
    }
    if lo.len() != n || hi.len() != n {
        return Err(FracError::domain("box_poisson_mass", "box dimension does not match N"));
    }
    let mut y = Vec::with_capacity(n);
    Ok(inner(order, x, lo, hi, &mut y, &opts))
}
