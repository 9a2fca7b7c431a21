//! Convergence studies for the half-space limits of Green kernels, Poisson
//! kernels and boundary-layer superpositions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::kernels::{
    green_halfspace_with, layer_c1, poisson_halfspace, poisson_superposition, poisson_superposition_quadrature, BoundaryLayerMeasure,
    GreenNorm, NormMode,
};
use crate::quad::{integrate_graded, integrate_panels, integrate_power_tail, QuadOptions};
use crate::special::{sphere_measure, FracOrder};

/// Points per axis of the sup-error lattice.
pub const LATTICE_POINTS: usize = 33;

/// Axis-aligned box strictly inside the open half space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CompactBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = CompactBox { lo, hi };
        b.validate(b.lo.len())?;
        Ok(b)
    }

    /// `[a, b] × [-c, c]^{N-1}`.
    pub fn slab(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        let mut lo = vec![-c; n];
        let mut hi = vec![c; n];
        lo[0] = a;
        hi[0] = b;
        CompactBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.lo.len() != n || self.hi.len() != n || n == 0 {
            return Err(FracError::domain("compact set", "box dimension does not match N"));
        }
        if !(self.lo[0] > 0.0) {
            return Err(FracError::domain("compact set", "box must satisfy min x_1 > 0"));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(FracError::domain("compact set", "box corners must be finite with lo <= hi"));
        }
        Ok(())
    }

    /// Tensor lattice with `LATTICE_POINTS` nodes per axis, in row-major order.
    pub fn lattice(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let m = LATTICE_POINTS;
        let total = m.pow(n as u32);
        (0..total)
            .map(|mut k| {
                (0..n)
                    .map(|i| {
                        let j = k % m;
                        k /= m;
                        self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (m - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }

    pub fn centre(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// Least-squares slope of `log error` against `log ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    /// Two standard errors of the slope; zero for exactly log-linear data.
    pub half_width: f64,
    pub intercept: f64,
}

pub fn rate_fit(eps: &[f64], errors: &[f64]) -> Result<RateFit> {
    if eps.len() != errors.len() {
        return Err(FracError::domain("rate_fit", "grid and error lengths differ"));
    }
    if eps.len() < 3 {
        return Err(FracError::domain("rate_fit", "at least three grid points are needed"));
    }
    if errors.iter().chain(eps).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(FracError::domain("rate_fit", "errors and grid values must be positive and finite"));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FracError::domain("rate_fit", "grid values must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, half_width: 2.0 * se, intercept })
}

/// Value at `ε = 0` of the polynomial through `(ε_k, v_k)`.
pub fn extrapolate_to_zero(eps: &[f64], values: &[f64]) -> f64 {
    let mut p = values.to_vec();
    let m = p.len();
    for k in 1..m {
        for i in 0..m - k {
            p[i] = (eps[i + k] * p[i] - eps[i] * p[i + 1]) / (eps[i + k] - eps[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Green,
    Poisson,
    LayerMu,
    LayerNu,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Green => "green",
            StudyKind::Poisson => "poisson",
            StudyKind::LayerMu => "layer_mu",
            StudyKind::LayerNu => "layer_nu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub study: StudyKind,
    pub n: usize,
    pub s: f64,
    /// Strictly decreasing. For the ν-layer this is `1/t`.
    pub eps_grid: Vec<f64>,
    pub compact_set: CompactBox,
    pub sup_errors: Vec<f64>,
    pub l1s_errors: Vec<f64>,
    pub fitted_rate: RateFit,
    pub l1s_rate: RateFit,
    /// Largest value of the limit profile on the lattice.
    pub sup_limit: f64,
    /// Extrapolated constant of the leading term and its reference value.
    pub leading_constant: Option<f64>,
    pub reference_constant: Option<f64>,
    pub notes: Vec<String>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(FracError::domain("convergence study", "grid values must be positive and finite"));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(FracError::domain("convergence study", "grid must be strictly decreasing"));
    }
    Ok(())
}

/// `∫_{R^N_+} |f(x)| (1+|x|^{N+2s})^{-1} dx` for `f` depending on `x_1` and
/// `|x'|` only, with `h` the length scale of its features near the origin.
///
/// Polar coordinates with the angle measured from `e_1`; the radial integral is
/// split at `h` and `2h` and graded at the origin and at `r = h`.
pub fn weighted_l1s_axisymmetric(order: &FracOrder, h: f64, f: &(dyn Fn(f64, f64) -> f64 + Sync)) -> f64 {
    let n = order.dim();
    let s = order.s();
    let nf = n as f64;
    let w = |r: f64| 1.0 / (1.0 + r.powf(nf + 2.0 * s));
    let opts = QuadOptions::new(1e-13, 1e-9).with_max_subdivisions(400);
    if n == 1 {
        let g = |x: f64| f(x, 0.0).abs() * w(x);
        let mut v = integrate_graded(g, h, s - 1.0, &opts).value;
        v += integrate_graded(|d| g(h + d), h, 2.0 * s - 1.0, &opts).value;
        v += integrate_power_tail(g, 2.0 * h, 1.0 + s, &opts).value;
        return v;
    }
    let transverse = sphere_measure(n - 1).expect("n >= 2");
    let half_pi = std::f64::consts::FRAC_PI_2;
    let shell = |r: f64| {
        let g = |th: f64| {
            let (c, sn) = (th.cos(), th.sin());
            f(r * c, r * sn).abs() * sn.powi(n as i32 - 2)
        };
        let d = ((r - h).abs() / r).min(0.25 * half_pi);
        let mut pts = vec![0.0];
        if d > 1e-12 {
            pts.extend([d, 4.0 * d].into_iter().filter(|p| *p < 0.5 * half_pi));
        }
        pts.push(0.5 * half_pi);
        let lower = integrate_panels(g, &pts, &opts).value;
        let upper = integrate_graded(|e| g(half_pi - e), 0.5 * half_pi, s - 1.0, &opts).value;
        transverse * r.powi(n as i32 - 1) * w(r) * (lower + upper)
    };
    let mut v = integrate_graded(shell, 0.5 * h, s - 1.0, &opts).value;
    v += integrate_graded(|d| shell(h - d), 0.5 * h, 2.0 * s - 1.0, &opts).value;
    v += integrate_graded(|d| shell(h + d), h, 2.0 * s - 1.0, &opts).value;
    v += integrate_power_tail(shell, 2.0 * h, 1.0 + s, &opts).value;
    v
}

fn point(n: usize, x1: f64, rho: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = x1;
    if n > 1 {
        x[1] = rho;
    }
    x
}

fn sup_on(lattice: &[Vec<f64>], f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let vals: Vec<f64> = lattice.par_iter().map(|x| f(x).abs()).collect();
    vals.into_iter().fold(0.0, f64::max)
}

fn p_s(order: &FracOrder, x: &[f64]) -> f64 {
    let n = order.dim() as f64;
    let r2: f64 = x.iter().map(|c| c * c).sum();
    order.constants().k_s_paper * x[0].powf(order.s()) * r2.powf(-n / 2.0)
}

/// Assembles a study from a difference `D_ε(x_1, |x'|)` evaluated per grid value.
fn assemble(
    order: &FracOrder,
    kind: StudyKind,
    grid: &[f64],
    compact: &CompactBox,
    diff: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
    limit: &(dyn Fn(&[f64]) -> f64 + Sync),
    scale: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<ConvergenceStudy> {
    let lattice = compact.lattice();
    let radial = |x: &[f64]| (x[0], x[1..].iter().map(|c| c * c).sum::<f64>().sqrt());
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&e| {
            let sup = sup_on(&lattice, &|x| {
                let (a, b) = radial(x);
                diff(e, a, b)
            });
            let l1 = weighted_l1s_axisymmetric(order, scale(e), &|a, b| diff(e, a, b));
            (sup, l1)
        })
        .collect();
    let sup_errors: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let l1s_errors: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fitted_rate = rate_fit(grid, &sup_errors)?;
    let l1s_rate = rate_fit(grid, &l1s_errors)?;
    Ok(ConvergenceStudy {
        study: kind,
        n: order.dim(),
        s: order.s(),
        eps_grid: grid.to_vec(),
        compact_set: compact.clone(),
        sup_errors,
        l1s_errors,
        fitted_rate,
        l1s_rate,
        sup_limit: sup_on(&lattice, limit),
        leading_constant: None,
        reference_constant: None,
        notes: Vec::new(),
    })
}

/// `ε^{-s} G_∞(·, ε e_1) → P_s` with the printed Green normalization.
pub fn green_limit_study(order: &FracOrder, eps_grid: &[f64], compact: &CompactBox) -> Result<ConvergenceStudy> {
    check_grid(eps_grid)?;
    compact.validate(order.dim())?;
    order.require_transient("green_limit_study")?;
    if 2.0 * eps_grid[0] >= compact.lo[0] {
        return Err(FracError::domain("green_limit_study", "2ε must stay below min x_1 of the compact set"));
    }
    let n = order.dim();
    let s = order.s();
    let g = |e: f64, x: &[f64]| -> f64 {
        let mut y = vec![0.0; n];
        y[0] = e;
        green_halfspace_with(order, x, &y, GreenNorm::Paper).map(|k| k.finite().unwrap_or(0.0)).unwrap_or(f64::NAN)
    };
    let diff = |e: f64, a: f64, b: f64| {
        let x = point(n, a, b);
        e.powf(-s) * g(e, &x) - p_s(order, &x)
    };
    let mut st = assemble(order, StudyKind::Green, eps_grid, compact, &diff, &|x| p_s(order, x), &|e| e)?;
    let x0 = compact.centre();
    let base = x0[0].powf(s) * x0.iter().map(|c| c * c).sum::<f64>().powf(-(n as f64) / 2.0);
    let ratios: Vec<f64> = eps_grid.iter().map(|&e| e.powf(-s) * g(e, &x0) / base).collect();
    st.leading_constant = Some(extrapolate_to_zero(eps_grid, &ratios));
    st.reference_constant = Some(order.constants().k_s_paper);
    Ok(st)
}

/// `ε^s P_∞(·, -ε e_1) → P_s` with the printed Poisson normalization.
pub fn poisson_limit_study(order: &FracOrder, eps_grid: &[f64], compact: &CompactBox) -> Result<ConvergenceStudy> {
    check_grid(eps_grid)?;
    compact.validate(order.dim())?;
    if 2.0 * eps_grid[0] >= compact.lo[0] {
        return Err(FracError::domain("poisson_limit_study", "2ε must stay below min x_1 of the compact set"));
    }
    let n = order.dim();
    let s = order.s();
    let diff = |e: f64, a: f64, b: f64| {
        let x = point(n, a, b);
        let mut y = vec![0.0; n];
        y[0] = -e;
        e.powf(s) * poisson_halfspace(order, &x, &y, NormMode::PaperK).unwrap_or(f64::NAN) - p_s(order, &x)
    };
    let mut st = assemble(order, StudyKind::Poisson, eps_grid, compact, &diff, &|x| p_s(order, x), &|e| e)?;
    st.leading_constant = Some(order.constants().k_s_paper);
    st.reference_constant = Some(order.constants().k_s_paper);
    Ok(st)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Mu,
    Nu,
}

/// Boundary-layer limits `P[μ_t] → C_1 x_1^{s-1}` as `t → 0` and
/// `P[ν_t] → C_1 x_1^s` as `t → ∞`.
///
/// `grid` holds the depths `t` for μ (decreasing) and `τ = 1/t` for ν
/// (decreasing), so both studies are fitted against a parameter tending to 0.
pub fn boundary_layer_study(order: &FracOrder, layer: Layer, grid: &[f64], compact: &CompactBox) -> Result<ConvergenceStudy> {
    check_grid(grid)?;
    compact.validate(order.dim())?;
    let n = order.dim();
    let s = order.s();
    let mode = NormMode::PaperK;
    let c1 = layer_c1(order, mode);
    let measure = |e: f64| match layer {
        Layer::Mu => BoundaryLayerMeasure::LayerMu { t: e },
        Layer::Nu => BoundaryLayerMeasure::LayerNu { t: 1.0 / e },
    };
    let limit = move |x1: f64| match layer {
        Layer::Mu => c1 * x1.powf(s - 1.0),
        Layer::Nu => c1 * x1.powf(s),
    };
    let diff = |e: f64, a: f64, b: f64| {
        let x = point(n, a, b);
        poisson_superposition(order, &x, &measure(e), mode).unwrap_or(f64::NAN) - limit(a)
    };
    let (kind, scale): (StudyKind, Box<dyn Fn(f64) -> f64 + Sync>) = match layer {
        Layer::Mu => (StudyKind::LayerMu, Box::new(|e| e)),
        Layer::Nu => (StudyKind::LayerNu, Box::new(|e| 1.0 / e)),
    };
    let mut st = assemble(order, kind, grid, compact, &diff, &|x| limit(x[0]), &*scale)?;
    st.leading_constant = Some(c1);
    st.reference_constant = Some(c1);
    if layer == Layer::Nu {
        let x1 = compact.centre()[0];
        let small_t = poisson_superposition(order, &point(n, x1, 0.0), &BoundaryLayerMeasure::LayerNu { t: 1e-8 }, mode)?;
        st.notes.push(format!(
            "nu-layer as t -> 0 at x_1 = {x1}: P[nu_t] = {small_t:.3e} versus C_1 x_1^s = {:.6e}; the limit holds as t -> infinity",
            limit(x1)
        ));
    }
    Ok(st)
}

/// Largest relative gap between the closed form and direct hyperplane
/// quadrature of a layer superposition at the given points.
pub fn layer_closed_form_gap(order: &FracOrder, layer: Layer, t: f64, points: &[Vec<f64>]) -> Result<f64> {
    let mu = match layer {
        Layer::Mu => BoundaryLayerMeasure::LayerMu { t },
        Layer::Nu => BoundaryLayerMeasure::LayerNu { t },
    };
    let opts = QuadOptions::new(0.0, 1e-10);
    let gaps: Result<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            let a = poisson_superposition(order, x, &mu, NormMode::PaperK)?;
            let b = poisson_superposition_quadrature(order, x, &mu, NormMode::PaperK, &opts)?;
            Ok((a - b).abs() / a.abs())
        })
        .collect();
    Ok(gaps?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ord(n: usize, s: f64) -> FracOrder {
        FracOrder::new(n, s).unwrap()
    }

    #[test]
    fn rate_fit_examples() {
        let e = [1e-1, 1e-2, 1e-3];
        let r = rate_fit(&e, &e).unwrap();
        assert_relative_eq!(r.slope, 1.0, epsilon = 1e-12);
        let half: Vec<f64> = e.iter().map(|x| 3.0 * x.sqrt()).collect();
        let r = rate_fit(&e, &half).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12 && r.half_width < 1e-12);
        let r = rate_fit(&e, &[1e-1, 3e-3, 1e-3]).unwrap();
        assert!(r.half_width > 0.0);
        assert!(rate_fit(&e, &[1.0, 0.0, 1.0]).is_err());
        assert!(rate_fit(&e[..2], &e[..2]).is_err());
    }

    #[test]
    fn lattice_and_box() {
        let b = CompactBox::slab(2, 0.5, 2.0, 1.0).unwrap();
        let l = b.lattice();
        assert_eq!(l.len(), 33 * 33);
        assert_eq!(l[0], vec![0.5, -1.0]);
        assert_eq!(l[l.len() - 1], vec![2.0, 1.0]);
        assert!(CompactBox::slab(2, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn weighted_l1s_of_half_space_weight() {
        // π ∫_0^∞ r/(1+r^3) dr with ∫_0^∞ r/(1+r^3) dr = 2π/(3√3)
        let o = ord(2, 0.5);
        let v = weighted_l1s_axisymmetric(&o, 1.0, &|_, _| 1.0);
        let exact = std::f64::consts::PI * 2.0 * std::f64::consts::PI / (3.0 * 3f64.sqrt());
        assert_relative_eq!(v, exact, max_relative = 1e-7);
        let o1 = ord(1, 0.5);
        let v = weighted_l1s_axisymmetric(&o1, 1.0, &|_, _| 1.0);
        assert_relative_eq!(v, std::f64::consts::FRAC_PI_2, max_relative = 1e-7);
    }

    #[test]
    fn green_study_examples() {
        let grid = [1e-1, 1e-2, 1e-3, 1e-4];
        let b = CompactBox::slab(2, 0.5, 2.0, 1.0).unwrap();
        for &s in &[0.5] {
            let o = ord(2, s);
            let st = green_limit_study(&o, &grid, &b).unwrap();
            assert_relative_eq!(st.leading_constant.unwrap(), o.constants().k_s_paper, max_relative = 1e-9);
            assert!(st.sup_errors.windows(2).all(|w| w[1] < w[0]), "{st:?}");
            assert!(st.l1s_errors.windows(2).all(|w| w[1] < w[0]), "{st:?}");
            assert!((st.fitted_rate.slope - 1.0).abs() < 0.05, "{:?}", st.fitted_rate);
            assert!((st.l1s_rate.slope - s).abs() < 0.1, "{:?}", st.l1s_rate);
        }
        let o = ord(2, 0.5);
        assert!(green_limit_study(&o, &[0.3, 0.1, 0.01], &b).is_err());
    }

    #[test]
    fn poisson_study_examples() {
        let o = ord(2, 0.5);
        let b = CompactBox::slab(2, 0.5, 2.0, 1.0).unwrap();
        let st = poisson_limit_study(&o, &[1e-1, 1e-2, 1e-3, 1e-4], &b).unwrap();
        assert!((st.fitted_rate.slope - 1.0).abs() < 0.05);
        assert!(st.sup_errors[2] < 1e-2 * st.sup_limit);
        assert!(st.l1s_errors.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn layer_studies() {
        let b = CompactBox::slab(2, 0.5, 2.0, 1.0).unwrap();
        for &s in &[0.25, 0.5] {
            let o = ord(2, s);
            let mu = boundary_layer_study(&o, Layer::Mu, &[1e-1, 1e-2, 1e-3, 1e-4], &b).unwrap();
            assert!((mu.fitted_rate.slope - 1.0).abs() < 0.05, "{:?}", mu.fitted_rate);
            let nu = boundary_layer_study(&o, Layer::Nu, &[1e-1, 1e-2, 1e-3, 1e-4], &b).unwrap();
            assert!((nu.fitted_rate.slope - 1.0).abs() < 0.05, "{:?}", nu.fitted_rate);
            assert!(nu.l1s_errors.windows(2).all(|w| w[1] < w[0]));
        }
        let o = ord(2, 0.5);
        let c1 = layer_c1(&o, NormMode::PaperK);
        let v = poisson_superposition(&o, &[1.0, 0.0], &BoundaryLayerMeasure::LayerMu { t: 0.1 }, NormMode::PaperK).unwrap();
        assert_relative_eq!(v - c1, c1 * (1.0 / 1.1 - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn layer_closed_forms_match_quadrature() {
        for n in 2..=3 {
            let o = ord(n, 0.5);
            let pts = vec![point(n, 0.5, 0.0), point(n, 1.0, 0.7), point(n, 2.0, -0.3)];
            for layer in [Layer::Mu, Layer::Nu] {
                let g = layer_closed_form_gap(&o, layer, 0.3, &pts).unwrap();
                assert!(g < 1e-6, "{n} {layer:?} {g}");
            }
        }
    }
}
