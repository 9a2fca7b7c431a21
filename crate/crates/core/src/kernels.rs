//! Closed-form Green kernels, Poisson kernels, the fundamental solution,
//! boundary-layer superpositions and source densities in the half space
//! `R^N_+ = {x_1 > 0}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::quad::{integrate, integrate_graded, integrate_power_tail, integrate_real_line, QuadOptions};
use crate::special::{beta, inc_beta, planar_moment, FracOrder};

/// A point of `R^N`; `coords[0]` is the distance coordinate `x_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    /// `λ e_1` in `R^n`.
    pub fn on_axis(n: usize, lambda: f64) -> Self {
        let mut coords = vec![0.0; n];
        coords[0] = lambda;
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn x1(&self) -> f64 {
        self.coords[0]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn scaled(&self, k: f64) -> Point {
        Point::new(self.coords.iter().map(|c| c * k).collect())
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

pub(crate) fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub(crate) fn check_dim(order: &FracOrder, x: &[f64], op: &'static str) -> Result<()> {
    if x.len() != order.dim() {
        return Err(FracError::domain(op, format!("point has dimension {}, expected {}", x.len(), order.dim())));
    }
    Ok(())
}

/// A kernel value, or the tag for evaluation on the kernel's singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelValue {
    Finite(f64),
    Singular,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Singular => None,
        }
    }

    /// The value with `+∞` standing in for the singular tag.
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn is_singular(self) -> bool {
        matches!(self, KernelValue::Singular)
    }
}

/// Prefactor used for Poisson kernels and their superpositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// The printed fundamental-solution constant `K_s`.
    #[default]
    PaperK,
    /// `κ_{N,s}`, which makes the Poisson kernels probability densities.
    ProbabilisticKappa,
}

impl NormMode {
    pub fn prefactor(self, order: &FracOrder) -> f64 {
        let c = order.constants();
        match self {
            NormMode::PaperK => c.k_s_paper,
            NormMode::ProbabilisticKappa => c.kappa_ns,
        }
    }
}

/// Prefactor used for Green kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GreenNorm {
    /// `κ/2` as printed.
    #[default]
    Paper,
    /// `Γ(N/2)/(4^s π^{N/2} Γ(s)^2)`, matching the Riesz potential near the diagonal.
    Exact,
}

impl GreenNorm {
    pub fn prefactor(self, order: &FracOrder) -> f64 {
        let c = order.constants();
        match self {
            GreenNorm::Paper => c.green_norm_paper(),
            GreenNorm::Exact => c.green_norm_bgr,
        }
    }
}

/// The three Green-kernel arguments of a pair of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenGeometry {
    /// `(1-|x|^2)(1-|y|^2)/|x-y|^2`, clamped at 0 outside the unit ball.
    pub psi: f64,
    /// `(r^2-|x|^2)(r^2-|y|^2)/(r^2|x-y|^2)`, clamped at 0 outside `B_r`.
    pub psi_r: f64,
    /// `4 x_1 y_1 / |x-y|^2`, clamped at 0 outside the half space.
    pub psi_inf: f64,
}

pub fn green_geometry(x: &[f64], y: &[f64], r: f64) -> GreenGeometry {
    let d2 = dist_sq(x, y);
    let (nx, ny) = (norm_sq(x), norm_sq(y));
    let psi = ((1.0 - nx).max(0.0) * (1.0 - ny).max(0.0)) / d2;
    let psi_r = ((r * r - nx).max(0.0) * (r * r - ny).max(0.0)) / (r * r * d2);
    let psi_inf = 4.0 * x[0].max(0.0) * y[0].max(0.0) / d2;
    GreenGeometry { psi, psi_r, psi_inf }
}

/// `∫_0^ψ z^{s-1} (1+z)^{-N/2} dz`.
///
/// With `u = z/(1+z)` this is the incomplete beta integral
/// `B_{ψ/(1+ψ)}(s, N/2 - s)`; large `ψ` goes through the complement so that
/// `1/(1+ψ)` is never formed by subtraction.
pub fn psi_integral(psi: f64, n: usize, s: f64) -> Result<f64> {
    if psi <= 0.0 {
        return Ok(0.0);
    }
    let a = s;
    let b = n as f64 / 2.0 - s;
    if psi.is_infinite() {
        return if b > 0.0 { beta(a, b) } else { Err(FracError::divergent("psi_integral", "ψ = ∞ with N ≤ 2s")) };
    }
    let u = psi / (1.0 + psi);
    let v = 1.0 / (1.0 + psi);
    if b == 0.0 && a == 0.5 {
        // 2 artanh √u, written without 1 - √u
        let su = u.sqrt();
        return Ok(((1.0 + su) * (1.0 + su) / v).ln());
    }
    if b > 0.0 && u > 0.5 {
        return Ok(beta(a, b)? - inc_beta(v, b, a)?);
    }
    inc_beta(u, a, b)
}

fn green_from_psi(order: &FracOrder, d2: f64, psi: f64, norm: GreenNorm) -> Result<f64> {
    let n = order.dim();
    let s = order.s();
    let pre = norm.prefactor(order);
    let radial = d2.powf(s - n as f64 / 2.0);
    Ok(pre * radial * psi_integral(psi, n, s)?)
}

/// Green kernel of `B_r` with the printed normalization.
pub fn green_ball(order: &FracOrder, x: &[f64], y: &[f64], r: f64) -> Result<KernelValue> {
    green_ball_with(order, x, y, r, GreenNorm::Paper)
}

/// Green kernel of `B_r`: `pre·|x-y|^{2s-N} ∫_0^{ψ_r} z^{s-1}(1+z)^{-N/2} dz`.
pub fn green_ball_with(order: &FracOrder, x: &[f64], y: &[f64], r: f64, norm: GreenNorm) -> Result<KernelValue> {
    check_dim(order, x, "green_ball")?;
    check_dim(order, y, "green_ball")?;
    if !order.is_transient() && !order.is_critical() {
        return Err(FracError::domain("green_ball", "requires N > 2s or N = 1 = 2s"));
    }
    if !(r > 0.0) {
        return Err(FracError::domain("green_ball", format!("radius {r} must be positive")));
    }
    if norm_sq(x) >= r * r || norm_sq(y) >= r * r {
        return Ok(KernelValue::Finite(0.0));
    }
    let d2 = dist_sq(x, y);
    if d2 == 0.0 {
        return Ok(KernelValue::Singular);
    }
    let g = green_geometry(x, y, r);
    Ok(KernelValue::Finite(green_from_psi(order, d2, g.psi_r, norm)?))
}

/// Green kernel of the half space with the printed normalization.
pub fn green_halfspace(order: &FracOrder, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    green_halfspace_with(order, x, y, GreenNorm::Paper)
}

/// Green kernel of the half space: `pre·|x-y|^{2s-N} ∫_0^{ψ∞} ...`.
pub fn green_halfspace_with(order: &FracOrder, x: &[f64], y: &[f64], norm: GreenNorm) -> Result<KernelValue> {
    check_dim(order, x, "green_halfspace")?;
    check_dim(order, y, "green_halfspace")?;
    order.require_transient("green_halfspace")?;
    if x[0] <= 0.0 || y[0] <= 0.0 {
        return Ok(KernelValue::Finite(0.0));
    }
    let d2 = dist_sq(x, y);
    if d2 == 0.0 {
        return Ok(KernelValue::Singular);
    }
    let psi = 4.0 * x[0] * y[0] / d2;
    Ok(KernelValue::Finite(green_from_psi(order, d2, psi, norm)?))
}

/// Poisson kernel of `B_r`: `pre·((r²-|x|²)/(|y|²-r²))^s |x-y|^{-N}` for `|x| < r < |y|`.
pub fn poisson_ball(order: &FracOrder, x: &[f64], y: &[f64], r: f64, mode: NormMode) -> Result<KernelValue> {
    check_dim(order, x, "poisson_ball")?;
    check_dim(order, y, "poisson_ball")?;
    if !(r > 0.0) {
        return Err(FracError::domain("poisson_ball", format!("radius {r} must be positive")));
    }
    let (nx, ny) = (norm_sq(x), norm_sq(y));
    let r2 = r * r;
    if nx >= r2 || ny < r2 {
        return Ok(KernelValue::Finite(0.0));
    }
    if ny == r2 {
        return Ok(KernelValue::Singular);
    }
    let s = order.s();
    let n = order.dim() as f64;
    let ratio = (r2 - nx) / (ny - r2);
    let v = mode.prefactor(order) * ratio.powf(s) * dist_sq(x, y).powf(-n / 2.0);
    Ok(KernelValue::Finite(v))
}

/// Poisson kernel of the half space: `pre·(x_1/(-y_1))^s |x-y|^{-N}`.
pub fn poisson_halfspace(order: &FracOrder, x: &[f64], y: &[f64], mode: NormMode) -> Result<f64> {
    check_dim(order, x, "poisson_halfspace")?;
    check_dim(order, y, "poisson_halfspace")?;
    if y[0] >= 0.0 {
        return Err(FracError::domain("poisson_halfspace", format!("y_1 = {} must be negative", y[0])));
    }
    if x[0] <= 0.0 {
        return Ok(0.0);
    }
    let s = order.s();
    let n = order.dim() as f64;
    Ok(mode.prefactor(order) * (x[0] / -y[0]).powf(s) * dist_sq(x, y).powf(-n / 2.0))
}

/// Fundamental solution `K_s |x|^{-N} x_1^s`, zero on the closed left half space.
pub fn fundamental_ps(order: &FracOrder, x: &[f64]) -> Result<KernelValue> {
    check_dim(order, x, "fundamental_ps")?;
    let r2 = norm_sq(x);
    if r2 == 0.0 {
        return Ok(KernelValue::Singular);
    }
    if x[0] <= 0.0 {
        return Ok(KernelValue::Finite(0.0));
    }
    let c = order.constants();
    let n = order.dim() as f64;
    Ok(KernelValue::Finite(c.k_s_paper * r2.powf(-n / 2.0) * x[0].powf(order.s())))
}

/// One-dimensional boundary profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `x_1^{s-1}` on the half space.
    Qs,
    /// `(x_1)_+^s`.
    Rs,
}

pub fn boundary_profile(order: &FracOrder, x: &[f64], which: Profile) -> KernelValue {
    let x1 = x[0];
    let s = order.s();
    match which {
        Profile::Qs if x1 == 0.0 => KernelValue::Singular,
        Profile::Qs if x1 < 0.0 => KernelValue::Finite(0.0),
        Profile::Qs => KernelValue::Finite(x1.powf(s - 1.0)),
        Profile::Rs => KernelValue::Finite(if x1 > 0.0 { x1.powf(s) } else { 0.0 }),
    }
}

/// Measures on the closed left half space `R^N_* = {y_1 ≤ 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundaryLayerMeasure {
    /// `δ_p` with `p_1 ≤ 0`.
    DiracAt { point: Point },
    /// `μ_t = δ_{-t}(y_1) t^s dy'`.
    LayerMu { t: f64 },
    /// `ν_t = δ_{-t}(y_1) t^{1+s} dy'`.
    LayerNu { t: f64 },
    /// Unit mass at `-ε e_1`, carrying the `ε^{-s}` scaling of the shifted
    /// fundamental solution.
    DiracShifted { eps: f64 },
}

impl BoundaryLayerMeasure {
    fn validate(&self, n: usize, op: &'static str) -> Result<()> {
        match self {
            BoundaryLayerMeasure::DiracAt { point } => {
                if point.dim() != n {
                    return Err(FracError::domain(op, "measure point has wrong dimension"));
                }
                if point.x1() > 0.0 {
                    return Err(FracError::domain(op, "Dirac mass lies in the open half space"));
                }
            }
            BoundaryLayerMeasure::LayerMu { t } | BoundaryLayerMeasure::LayerNu { t } => {
                if !(*t > 0.0) {
                    return Err(FracError::domain(op, format!("layer depth {t} must be positive")));
                }
            }
            BoundaryLayerMeasure::DiracShifted { eps } => {
                if !(*eps > 0.0) {
                    return Err(FracError::domain(op, format!("shift {eps} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Depth weight `t^s` or `t^{1+s}` of a layer measure.
    fn layer_weight(&self, s: f64) -> Option<(f64, f64)> {
        match *self {
            BoundaryLayerMeasure::LayerMu { t } => Some((t, t.powf(s))),
            BoundaryLayerMeasure::LayerNu { t } => Some((t, t.powf(1.0 + s))),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            BoundaryLayerMeasure::DiracAt { point } => format!("dirac_at{:?}", point.coords),
            BoundaryLayerMeasure::LayerMu { t } => format!("layer_mu(t={t})"),
            BoundaryLayerMeasure::LayerNu { t } => format!("layer_nu(t={t})"),
            BoundaryLayerMeasure::DiracShifted { eps } => format!("dirac_shifted(eps={eps})"),
        }
    }
}

/// `pre · ∫_{R^{N-1}} (1+|z'|^2)^{-N/2} dz'`.
pub fn layer_c1(order: &FracOrder, mode: NormMode) -> f64 {
    let n = order.dim();
    mode.prefactor(order) * planar_moment(n - 1, -(n as f64) / 2.0).expect("convergent moment")
}

/// Poisson superposition `∫ P(x, y) dμ(y)` in closed form.
pub fn poisson_superposition(order: &FracOrder, x: &[f64], mu: &BoundaryLayerMeasure, mode: NormMode) -> Result<f64> {
    check_dim(order, x, "poisson_superposition")?;
    mu.validate(order.dim(), "poisson_superposition")?;
    let x1 = x[0];
    if !(x1 > 0.0) {
        return Err(FracError::domain("poisson_superposition", "x must lie in the open half space"));
    }
    let s = order.s();
    let n = order.dim() as f64;
    let pre = mode.prefactor(order);
    match mu {
        BoundaryLayerMeasure::DiracAt { point } => {
            let d2 = dist_sq(x, point);
            if point.x1() == 0.0 {
                Ok(pre * x1.powf(s) * d2.powf(-n / 2.0))
            } else {
                poisson_halfspace(order, x, point, mode)
            }
        }
        BoundaryLayerMeasure::LayerMu { t } => Ok(layer_c1(order, mode) * x1.powf(s) / (x1 + t)),
        BoundaryLayerMeasure::LayerNu { t } => Ok(layer_c1(order, mode) * x1.powf(s) * t / (x1 + t)),
        BoundaryLayerMeasure::DiracShifted { eps } => {
            let mut d2 = (x1 + eps) * (x1 + eps);
            d2 += x[1..].iter().map(|c| c * c).sum::<f64>();
            Ok(pre * eps.powf(-s) * x1.powf(s) * d2.powf(-n / 2.0))
        }
    }
}

/// `∫_{R^d} f`, tensorized with `z_i = tan θ_i` per coordinate.
pub(crate) fn integrate_rd(d: usize, f: &dyn Fn(&[f64]) -> f64, opts: &QuadOptions) -> f64 {
    fn rec(level: usize, z: &mut Vec<f64>, f: &dyn Fn(&[f64]) -> f64, opts: &QuadOptions) -> f64 {
        if level == z.len() {
            return f(z);
        }
        let cell = std::cell::RefCell::new(std::mem::take(z));
        let v = integrate_real_line(
            |t| {
                let mut zz = cell.borrow().clone();
                zz[level] = t;
                rec(level + 1, &mut zz, f, opts)
            },
            opts,
        )
        .value;
        *z = cell.into_inner();
        v
    }
    let mut z = vec![0.0; d];
    rec(0, &mut z, f, opts)
}

/// Poisson superposition of a layer measure by direct quadrature over the
/// hyperplane `{y_1 = -t}`; independent of the closed forms.
pub fn poisson_superposition_quadrature(
    order: &FracOrder,
    x: &[f64],
    mu: &BoundaryLayerMeasure,
    mode: NormMode,
    opts: &QuadOptions,
) -> Result<f64> {
    check_dim(order, x, "poisson_superposition_quadrature")?;
    mu.validate(order.dim(), "poisson_superposition_quadrature")?;
    let Some((t, w)) = mu.layer_weight(order.s()) else {
        return poisson_superposition(order, x, mu, mode);
    };
    let n = order.dim();
    if n == 1 {
        return Ok(w * poisson_halfspace(order, x, &[-t], mode)?);
    }
    let f = |z: &[f64]| {
        let mut y = Vec::with_capacity(n);
        y.push(-t);
        y.extend(z.iter().zip(&x[1..]).map(|(a, b)| a + b));
        poisson_halfspace(order, x, &y, mode).unwrap_or(f64::NAN)
    };
    Ok(w * integrate_rd(n - 1, &f, opts))
}

/// A source density `Γ` on the half space.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDensity {
    order: FracOrder,
    measure: BoundaryLayerMeasure,
    c2: f64,
    pub description: String,
}

impl SourceDensity {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.order.dim() as f64;
        let s = self.order.s();
        let c = self.order.constants();
        let x1 = x[0];
        match &self.measure {
            BoundaryLayerMeasure::DiracAt { point } => c.c_ns * dist_sq(x, point).powf(-(n + 2.0 * s) / 2.0),
            BoundaryLayerMeasure::DiracShifted { eps } => {
                let e = -eps;
                let d2 = (x1 - e) * (x1 - e) + x[1..].iter().map(|v| v * v).sum::<f64>();
                c.c_ns * d2.powf(-(n + 2.0 * s) / 2.0)
            }
            BoundaryLayerMeasure::LayerMu { t } => self.c2 * t.powf(s) * (x1 + t).powf(-1.0 - 2.0 * s),
            BoundaryLayerMeasure::LayerNu { t } => self.c2 * t.powf(1.0 + s) * (x1 + t).powf(-1.0 - 2.0 * s),
        }
    }
}

/// Density `c_{N,s} ∫ |x-y|^{-N-2s} dμ(y)` generated on the half space by `mu`.
///
/// Layers integrate in closed form to `C_2 w(t) (x_1+t)^{-1-2s}` with
/// `C_2 = c_{N,s} ∫_{R^{N-1}} (1+|z'|^2)^{-(N+2s)/2} dz'`.
pub fn source_density(order: &FracOrder, mu: &BoundaryLayerMeasure) -> Result<SourceDensity> {
    mu.validate(order.dim(), "source_density")?;
    let c2 = order.constants().layer_c2;
    Ok(SourceDensity { order: *order, measure: mu.clone(), c2, description: format!("Gamma[{}]", mu.label()) })
}

/// Layer source density by quadrature over the hyperplane, for cross-checks.
pub fn source_density_quadrature(order: &FracOrder, x: &[f64], mu: &BoundaryLayerMeasure, opts: &QuadOptions) -> Result<f64> {
    let dens = source_density(order, mu)?;
    let Some((t, w)) = mu.layer_weight(order.s()) else {
        return Ok(dens.eval(x));
    };
    let n = order.dim();
    let c = order.constants().c_ns;
    let e = -(n as f64 + 2.0 * order.s()) / 2.0;
    let dx = x[0] + t;
    if n == 1 {
        return Ok(w * c * (dx * dx).powf(e));
    }
    let f = |z: &[f64]| (dx * dx + norm_sq(z)).powf(e);
    Ok(w * c * integrate_rd(n - 1, &f, opts))
}

/// `∫_{|y|>r} P_r(x, y) dy` by quadrature in polar coordinates about the origin.
pub fn poisson_ball_mass(order: &FracOrder, x: &[f64], r: f64, mode: NormMode, opts: &QuadOptions) -> Result<f64> {
    check_dim(order, x, "poisson_ball_mass")?;
    let n = order.dim();
    let s = order.s();
    let rx = norm(x);
    if rx >= r {
        return Ok(0.0);
    }
    let pre = mode.prefactor(order);
    let nf = n as f64;
    // angular integral of |x-y|^{-N} over |y| = rho, measured from the direction of x
    let shell = |rho: f64| -> f64 {
        if n == 1 {
            return (rho - rx).powf(-1.0) + (rho + rx).powf(-1.0);
        }
        if rx == 0.0 {
            return crate::special::sphere_measure(n).unwrap() * rho.powf(-nf);
        }
        let om = crate::special::sphere_measure(n - 1).unwrap();
        integrate(
            |th: f64| {
                let d2 = rho * rho + rx * rx - 2.0 * rho * rx * th.cos();
                om * th.sin().powi(n as i32 - 2) * d2.powf(-nf / 2.0)
            },
            0.0,
            PI,
            opts,
        )
        .value
    };
    // radius written as r + h so that |y|^2 - r^2 = h(2r + h) keeps its digits
    let radial = |h: f64| {
        let rho = r + h;
        ((r * r - rx * rx) / (h * (2.0 * r + h))).powf(s) * shell(rho) * rho.powi(n as i32 - 1)
    };
    let near = integrate_graded(radial, r, -s, opts).value;
    let far = integrate_power_tail(radial, r, 1.0 + 2.0 * s, opts).value;
    Ok(pre * (near + far))
}

/// `∫_{y_1<0} P(x, y) dy` by quadrature: depth `t = -y_1`, then radial in `y'`.
pub fn poisson_halfspace_mass(order: &FracOrder, x: &[f64], mode: NormMode, opts: &QuadOptions) -> Result<f64> {
    check_dim(order, x, "poisson_halfspace_mass")?;
    let x1 = x[0];
    if !(x1 > 0.0) {
        return Err(FracError::domain("poisson_halfspace_mass", "x must lie in the open half space"));
    }
    let n = order.dim();
    let s = order.s();
    let nf = n as f64;
    let pre = mode.prefactor(order);
    let plane = |t: f64| -> f64 {
        let a = x1 + t;
        if n == 1 {
            return a.powf(-1.0);
        }
        let om = crate::special::sphere_measure(n - 1).unwrap();
        let f = |rho: f64| om * rho.powi(n as i32 - 2) * (a * a + rho * rho).powf(-nf / 2.0);
        integrate(f, 0.0, a, opts).value + integrate_power_tail(f, a, 2.0, opts).value
    };
    let depth = |t: f64| (x1 / t).powf(s) * plane(t);
    let near = integrate_graded(depth, x1, -s, opts).value;
    let far = integrate_power_tail(depth, x1, 1.0 + s, opts).value;
    Ok(pre * (near + far))
}
