//! Distributional identities against test functions `φ = (x_1)_+^s ψ`.
//!
//! The left-hand sides are nested quadratures: an outer adaptive integral
//! over the half space of a profile times pointwise principal values of
//! `(-Δ)^s φ`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::field::{Growth, ScalarField, Singularity};
use crate::pvlap::{annulus_frac_lap, pv_frac_lap, QuadratureSpec};
use crate::quad::{integrate, integrate_graded, integrate_power_tail, QuadOptions, QuadResult};
use crate::special::{planar_moment, CsMode, FracOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `(1 - q)^3`, `C^2` across the edge of the support.
    Polynomial,
    /// `exp(1 - 1/(1 - q))`, smooth.
    #[default]
    Exponential,
}

/// Bump `ψ` with `ψ(c) = 1`, supported on `|x - c| < radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub kind: BumpKind,
}

impl BumpSpec {
    pub fn at_origin(n: usize, radius: f64, kind: BumpKind) -> Self {
        BumpSpec { center: vec![0.0; n], radius, kind }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let q = crate::kernels::dist_sq(x, &self.center) / (self.radius * self.radius);
        if q >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Polynomial => (1.0 - q).powi(3),
            BumpKind::Exponential => (1.0 - 1.0 / (1.0 - q)).exp(),
        }
    }
}

/// `φ(x) = (x_1)_+^s ψ(x)` with compact support in the closed half space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub n: usize,
    pub rho_power: f64,
    pub bump: BumpSpec,
    /// `ψ` multiplied by this factor; kept separate so linearity checks are exact.
    pub amplitude: f64,
}

impl TestFunction {
    pub fn psi(&self, x: &[f64]) -> f64 {
        self.amplitude * self.bump.eval(x)
    }

    pub fn support_radius(&self) -> f64 {
        self.bump.radius
    }

    /// Interval of `x_1` on which `φ` can be nonzero.
    pub fn x1_range(&self) -> (f64, f64) {
        let c = self.bump.center[0];
        ((c - self.bump.radius).max(0.0), c + self.bump.radius)
    }

    pub fn sup_psi(&self) -> f64 {
        self.amplitude.abs()
    }

    pub fn scaled(&self, k: f64) -> TestFunction {
        TestFunction { amplitude: self.amplitude * k, ..self.clone() }
    }

    fn is_inside_support(&self, x: &[f64]) -> bool {
        crate::kernels::dist_sq(x, &self.bump.center) < self.bump.radius * self.bump.radius
    }
}

impl ScalarField for TestFunction {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if x[0] <= 0.0 {
            return 0.0;
        }
        let p = self.psi(x);
        if p == 0.0 {
            0.0
        } else {
            x[0].powf(self.rho_power) * p
        }
    }

    fn growth(&self) -> Growth {
        Growth::WeightedL1s
    }

    fn singularities(&self) -> Vec<Singularity> {
        vec![Singularity::Hyperplane { exponent: self.rho_power }]
    }

    fn label(&self) -> String {
        format!("(x1)_+^{} psi", self.rho_power)
    }
}

/// Builds `(x_1)_+^s ψ` and checks the support and continuity conditions.
pub fn make_test_function(order: &FracOrder, bump: BumpSpec) -> Result<TestFunction> {
    let n = order.dim();
    if bump.center.len() != n {
        return Err(FracError::domain("make_test_function", "bump centre has the wrong dimension"));
    }
    if !(bump.radius > 0.0 && bump.radius.is_finite()) || bump.center.iter().any(|c| !c.is_finite()) {
        return Err(FracError::domain("make_test_function", "bump radius must be positive and the centre finite"));
    }
    if bump.center[0] + bump.radius <= 0.0 {
        return Err(FracError::domain("make_test_function", "support lies in {x_1 <= 0}"));
    }
    Ok(TestFunction { n, rho_power: order.s(), bump, amplitude: 1.0 })
}

/// Uniform bound of `|(-Δ)^s_ε φ|` over sample points and a finite `ε` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XsSurrogate {
    pub eps: Vec<f64>,
    /// Maximum over the sample points, per `ε`.
    pub max_abs: Vec<f64>,
    pub bound: f64,
    pub points: usize,
}

/// Sample points on the segment from the boundary through the bump centre.
pub fn default_sample_points(phi: &TestFunction) -> Vec<Vec<f64>> {
    let (_, hi) = phi.x1_range();
    [0.05, 0.2, 0.4, 0.6, 0.8, 1.2]
        .iter()
        .map(|f| {
            let mut p = phi.bump.center.clone();
            p[0] = f * hi;
            p
        })
        .collect()
}

/// Numerical stand-in for the dominated-convergence condition of the test space.
pub fn xs_surrogate(order: &FracOrder, phi: &TestFunction, eps: &[f64], points: &[Vec<f64>], spec: &QuadratureSpec) -> Result<XsSurrogate> {
    let mut max_abs = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut m: f64 = 0.0;
        for p in points {
            m = m.max(annulus_frac_lap(order, phi, p, e, 1.0 / e, spec)?.abs());
        }
        max_abs.push(m);
    }
    let bound = max_abs.iter().cloned().fold(0.0, f64::max);
    Ok(XsSurrogate { eps: eps.to_vec(), max_abs, bound, points: points.len() })
}

/// `∂^s φ(0, x') = lim_{t→0+} φ(t, x') / t^s = ψ(0, x')`.
pub fn frac_boundary_derivative_at(phi: &TestFunction, x_prime: &[f64]) -> f64 {
    let mut p = Vec::with_capacity(phi.n);
    p.push(0.0);
    p.extend_from_slice(x_prime);
    phi.psi(&p)
}

pub fn frac_boundary_derivative(phi: &TestFunction) -> f64 {
    frac_boundary_derivative_at(phi, &vec![0.0; phi.n - 1])
}

/// `lim_{t→0+} f(t)/t^s` from `t = 2^{-k}`, with the leading correction
/// exponent estimated from consecutive differences.
pub fn frac_boundary_derivative_numeric(f: &dyn Fn(f64) -> f64, s: f64, tol: f64) -> Result<f64> {
    let g: Vec<f64> = (0..60)
        .map(|k| {
            let t = 0.5f64.powi(k);
            f(t) / t.powf(s)
        })
        .collect();
    let mut prev: Option<f64> = None;
    let mut streak = 0;
    for k in 2..g.len() {
        let (a, b, c) = (g[k - 2], g[k - 1], g[k]);
        let d1 = b - a;
        let d2 = c - b;
        let est = if d1 == 0.0 || d2 == 0.0 {
            c
        } else {
            let rho = d2 / d1;
            if rho > 0.0 && rho < 1.0 {
                c + d2 * rho / (1.0 - rho)
            } else {
                c
            }
        };
        if !est.is_finite() {
            break;
        }
        if let Some(p) = prev {
            if (est - p).abs() <= tol * est.abs().max(1.0) {
                streak += 1;
                if streak >= 2 {
                    return Ok(est);
                }
            } else {
                streak = 0;
            }
        }
        prev = Some(est);
    }
    Err(FracError::not_settled("frac_boundary_derivative", "φ(t e_1)/t^s did not settle over t = 2^{-k}"))
}

/// Tolerances for the nested quadrature of an identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityBudget {
    pub outer_abs: f64,
    pub outer_rel: f64,
    pub outer_max_subdivisions: usize,
    pub inner: QuadratureSpec,
}

impl Default for IdentityBudget {
    fn default() -> Self {
        IdentityBudget {
            outer_abs: 1e-6,
            outer_rel: 1e-5,
            outer_max_subdivisions: 200,
            inner: QuadratureSpec::default().with_tolerance(1e-8, 1e-6),
        }
    }
}

impl IdentityBudget {
    fn outer(&self) -> QuadOptions {
        QuadOptions::new(self.outer_abs, self.outer_rel).with_max_subdivisions(self.outer_max_subdivisions)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDiagnostics {
    pub outer_evals: usize,
    pub inner_evals: usize,
    pub outer_error: f64,
    pub max_inner_error: f64,
    pub outer_converged: bool,
}

/// Same integral with another normalization constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityVariant {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub n: usize,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    /// `abs_gap / |rhs|`, or `abs_gap / sup|ψ|` when the right side vanishes.
    pub rel_gap: f64,
    pub constant_mode: String,
    pub variants: Vec<IdentityVariant>,
    pub budgets: QuadratureDiagnostics,
}

fn gaps(lhs: f64, rhs: f64, sup_psi: f64) -> (f64, f64) {
    let abs_gap = (lhs - rhs).abs();
    let rel = if rhs != 0.0 { abs_gap / rhs.abs() } else { abs_gap / sup_psi.max(f64::MIN_POSITIVE) };
    (abs_gap, rel)
}

/// Weight `x_1^a |x|^b` of an identity's left side.
#[derive(Debug, Clone, Copy)]
struct Weight {
    a: f64,
    b: f64,
}

impl Weight {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = x[0].powf(self.a);
        if self.b != 0.0 {
            v *= crate::kernels::norm(x).powf(self.b);
        }
        v
    }
}

struct Lhs<'a> {
    order: &'a FracOrder,
    phi: &'a TestFunction,
    budget: &'a IdentityBudget,
    inner_evals: Cell<usize>,
    max_inner_error: Cell<f64>,
    failure: std::cell::RefCell<Option<FracError>>,
}

impl<'a> Lhs<'a> {
    fn record(&self, e: FracError) -> f64 {
        self.failure.borrow_mut().get_or_insert(e);
        0.0
    }

    /// `(-Δ)^s φ(x)` for `x_1 > 0`.
    fn frac_lap(&self, x: &[f64]) -> f64 {
        if self.phi.n == 1 && !self.phi.is_inside_support(x) && x[0] > self.phi.x1_range().1 {
            return self.outside_1d(x[0]);
        }
        match pv_frac_lap(self.order, self.phi, x, &self.budget.inner) {
            Ok(r) => {
                self.inner_evals.set(self.inner_evals.get() + r.budget);
                if r.diverging {
                    return self.record(FracError::not_settled("identity inner principal value", format!("diverging at x = {x:?}")));
                }
                self.max_inner_error.set(self.max_inner_error.get().max(r.error_estimate));
                r.value
            }
            Err(e) => self.record(e),
        }
    }

    /// `-c_{1,s} ∫ φ(y) |x-y|^{-1-2s} dy` to the right of the support.
    fn outside_1d(&self, x: f64) -> f64 {
        let s = self.order.s();
        let (lo, hi) = self.phi.x1_range();
        let opts = QuadOptions::new(0.0, 1e-11);
        let f = |y: f64| self.phi.eval(&[y]) * (x - y).powf(-1.0 - 2.0 * s);
        let m = 0.5 * (lo + hi);
        let left = if lo == 0.0 { integrate_graded(f, m, s, &opts) } else { integrate(f, lo, m, &opts) };
        let right = integrate(f, m, hi, &opts);
        self.inner_evals.set(self.inner_evals.get() + left.evals + right.evals);
        -self.order.constants().c_ns * (left.value + right.value)
    }

    /// `∫_{R^N_+} w(x) (-Δ)^s φ(x) dx`.
    fn integral(&self, w: Weight) -> Result<QuadResult> {
        let s = self.order.s();
        let n = self.phi.n;
        let opts = self.budget.outer();
        let (lo, hi) = self.phi.x1_range();
        let res = match n {
            1 => {
                let f = |x: f64| w.eval(&[x]) * self.frac_lap(&[x]);
                let edge = if lo > 0.0 { lo } else { 0.5 * hi };
                let mut r = integrate_graded(f, edge, (w.a + w.b).min(0.0), &opts);
                r = r.add(integrate(f, edge, hi, &opts));
                r = r.add(integrate(f, hi, 2.0 * hi, &opts));
                let p = 1.0 + 2.0 * s - (w.a + w.b);
                r.add(integrate_power_tail(f, 2.0 * hi, p, &opts))
            }
            2 => {
                // polar coordinates about the origin, θ ∈ (-π/2, π/2)
                let radial = |r: f64| {
                    let g = |th: f64| {
                        let x = [r * th.cos(), r * th.sin()];
                        w.eval(&x) * self.frac_lap(&x)
                    };
                    r * (integrate_graded(|h| g(0.5 * PI - h), 0.5 * PI, w.a.min(0.0), &opts).value
                        + integrate_graded(|h| g(h - 0.5 * PI), 0.5 * PI, w.a.min(0.0), &opts).value)
                };
                let far = crate::kernels::norm(&self.phi.bump.center) + self.phi.bump.radius;
                let mut r = integrate_graded(radial, 0.5 * far, (w.a + w.b + 1.0).min(0.0), &opts);
                r = r.add(integrate(radial, 0.5 * far, far, &opts));
                r = r.add(integrate(radial, far, 2.0 * far, &opts));
                let p = 2.0 * s - (w.a + w.b) + 1.0;
                r.add(integrate_power_tail(radial, 2.0 * far, p, &opts))
            }
            _ => return Err(FracError::domain("identity check", "nested identity quadrature is implemented for N = 1 and N = 2")),
        };
        if let Some(e) = self.failure.borrow_mut().take() {
            return Err(e);
        }
        Ok(res)
    }

    fn diagnostics(&self, r: &QuadResult) -> QuadratureDiagnostics {
        QuadratureDiagnostics {
            outer_evals: r.evals,
            inner_evals: self.inner_evals.get(),
            outer_error: r.abs_err,
            max_inner_error: self.max_inner_error.get(),
            outer_converged: r.converged,
        }
    }
}

fn lhs_engine<'a>(order: &'a FracOrder, phi: &'a TestFunction, budget: &'a IdentityBudget) -> Result<Lhs<'a>> {
    if phi.n != order.dim() {
        return Err(FracError::domain("identity check", "test function and order dimensions differ"));
    }
    if (phi.rho_power - order.s()).abs() > 0.0 {
        return Err(FracError::domain("identity check", "test function was built for another s"));
    }
    Ok(Lhs { order, phi, budget, inner_evals: Cell::new(0), max_inner_error: Cell::new(0.0), failure: Default::default() })
}

/// `∫ P_s (-Δ)^s φ = ∂^s φ(0)` with `P_s = K_s x_1^s |x|^{-N}`.
pub fn check_identity_ps(order: &FracOrder, phi: &TestFunction, budget: &IdentityBudget) -> Result<IdentityReport> {
    let eng = lhs_engine(order, phi, budget)?;
    let n = order.dim() as f64;
    let j = eng.integral(Weight { a: order.s(), b: -n })?;
    let c = order.constants();
    let rhs = frac_boundary_derivative(phi);
    let lhs = c.k_s_paper * j.value;
    let (abs_gap, rel_gap) = gaps(lhs, rhs, phi.sup_psi());
    let lhs_exact = c.k_s_exact * j.value;
    Ok(IdentityReport {
        identity: "P_s".into(),
        n: order.dim(),
        s: order.s(),
        lhs,
        rhs,
        abs_gap,
        rel_gap,
        constant_mode: "paper K_s".into(),
        variants: vec![IdentityVariant { label: "exact K_s".into(), lhs: lhs_exact, rhs, rel_gap: gaps(lhs_exact, rhs, phi.sup_psi()).1 }],
        budgets: eng.diagnostics(&j),
    })
}

/// `∫_{R^{N-1}} ∂^s φ(0, x') dx'`, or `∂^s φ(0)` when `N = 1`.
pub fn boundary_trace_integral(phi: &TestFunction) -> f64 {
    match phi.n {
        1 => frac_boundary_derivative(phi),
        2 => {
            let c = phi.bump.center[1];
            let r = phi.bump.radius;
            let opts = QuadOptions::new(1e-14, 1e-12);
            integrate(|y| frac_boundary_derivative_at(phi, &[y]), c - r, c + r, &opts).value
        }
        _ => {
            let f = |y: &[f64]| frac_boundary_derivative_at(phi, y);
            crate::kernels::integrate_rd(phi.n - 1, &f, &QuadOptions::new(1e-10, 1e-8))
        }
    }
}

/// `∫ Q_s (-Δ)^s φ = C_s ∫_{R^{N-1}} ∂^s φ(0, x') dx'` with `Q_s = x_1^{s-1}`.
pub fn check_identity_qs(order: &FracOrder, phi: &TestFunction, mode: CsMode, budget: &IdentityBudget) -> Result<IdentityReport> {
    let eng = lhs_engine(order, phi, budget)?;
    let j = eng.integral(Weight { a: order.s() - 1.0, b: 0.0 })?;
    let c = order.constants();
    let trace = boundary_trace_integral(phi);
    let lhs = j.value;
    let rhs = c.c_s(mode) * trace;
    let (abs_gap, rel_gap) = gaps(lhs, rhs, phi.sup_psi());
    let variants = [CsMode::Derived, CsMode::Paper, CsMode::Exact]
        .into_iter()
        .filter(|m| *m != mode)
        .map(|m| {
            let r = c.c_s(m) * trace;
            IdentityVariant { label: format!("{m:?} C_s").to_lowercase(), lhs, rhs: r, rel_gap: gaps(lhs, r, phi.sup_psi()).1 }
        })
        .collect();
    Ok(IdentityReport {
        identity: "Q_s".into(),
        n: order.dim(),
        s: order.s(),
        lhs,
        rhs,
        abs_gap,
        rel_gap,
        constant_mode: format!("{mode:?}").to_lowercase(),
        variants,
        budgets: eng.diagnostics(&j),
    })
}

/// `∫ R_s (-Δ)^s φ = 0` with `R_s = x_1^s`.
pub fn check_identity_rs(order: &FracOrder, phi: &TestFunction, budget: &IdentityBudget) -> Result<IdentityReport> {
    let eng = lhs_engine(order, phi, budget)?;
    let j = eng.integral(Weight { a: order.s(), b: 0.0 })?;
    let (abs_gap, rel_gap) = gaps(j.value, 0.0, phi.sup_psi());
    Ok(IdentityReport {
        identity: "R_s".into(),
        n: order.dim(),
        s: order.s(),
        lhs: j.value,
        rhs: 0.0,
        abs_gap,
        rel_gap,
        constant_mode: "none".into(),
        variants: Vec::new(),
        budgets: eng.diagnostics(&j),
    })
}

/// `C_2 / C_1` from the two transverse moments.
pub fn cs_ratio_numeric(n: usize, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(FracError::domain("cs_ratio_numeric", "N must be at least 2"));
    }
    let order = FracOrder::new(n, s)?;
    let c = order.constants();
    let nf = n as f64;
    let c1 = c.k_s_paper * planar_moment(n - 1, -nf / 2.0)?;
    let c2 = c.c_ns * planar_moment(n - 1, -(nf + 2.0 * s) / 2.0)?;
    Ok(c2 / c1)
}

/// `C_s` values side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsReport {
    pub n: usize,
    pub s: f64,
    pub numeric_ratio: f64,
    pub derived: f64,
    pub paper: f64,
    pub exact: f64,
}

pub fn cs_report(n: usize, s: f64) -> Result<CsReport> {
    let c = FracOrder::new(n, s)?.constants();
    Ok(CsReport { n, s, numeric_ratio: cs_ratio_numeric(n, s)?, derived: c.c_s_derived, paper: c.c_s_paper, exact: c.c_s_exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ord(n: usize, s: f64) -> FracOrder {
        FracOrder::new(n, s).unwrap()
    }

    #[test]
    fn test_function_basics() {
        let o = ord(1, 0.25);
        let phi = make_test_function(&o, BumpSpec::at_origin(1, 1.0, BumpKind::Exponential)).unwrap();
        assert_eq!(phi.eval(&[0.0]), 0.0);
        assert_eq!(phi.eval(&[-0.5]), 0.0);
        assert_eq!(frac_boundary_derivative(&phi), 1.0);
        let num = frac_boundary_derivative_numeric(&|t| phi.eval(&[t]), 0.25, 1e-10).unwrap();
        assert_relative_eq!(num, 1.0, max_relative = 1e-8);
        let shifted = make_test_function(&o, BumpSpec { center: vec![2.0], radius: 1.0, kind: BumpKind::Polynomial }).unwrap();
        assert_eq!(frac_boundary_derivative(&shifted), 0.0);
        assert!(make_test_function(&o, BumpSpec { center: vec![-2.0], radius: 1.0, kind: BumpKind::Polynomial }).is_err());
    }

    #[test]
    fn boundary_derivative_numeric_examples() {
        let s = 0.3;
        let v = frac_boundary_derivative_numeric(&|t: f64| t, s, 1e-8).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
        let phi = |t: f64| t.powf(s) * (1.0 + t).exp();
        let lam: f64 = 3.0;
        let a = frac_boundary_derivative_numeric(&|t| phi(lam * t), s, 1e-10).unwrap();
        assert_relative_eq!(a, lam.powf(s) * 1f64.exp(), max_relative = 1e-7);
    }

    #[test]
    fn cs_ratio_examples() {
        assert_relative_eq!(cs_ratio_numeric(2, 0.5).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(cs_ratio_numeric(3, 0.5).unwrap(), 0.5, max_relative = 1e-12);
        for &s in &[0.25, 0.5, 0.75] {
            let r = cs_report(2, s).unwrap();
            assert_relative_eq!(r.numeric_ratio, r.derived, max_relative = 1e-10);
            for n in 3..=4 {
                assert_relative_eq!(cs_ratio_numeric(n, s).unwrap(), r.numeric_ratio, max_relative = 1e-10);
            }
        }
        assert_relative_eq!(cs_report(2, 0.5).unwrap().paper, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rs_identity_1d() {
        let o = ord(1, 0.5);
        let phi = make_test_function(&o, BumpSpec::at_origin(1, 1.0, BumpKind::Exponential)).unwrap();
        let r = check_identity_rs(&o, &phi, &IdentityBudget::default()).unwrap();
        assert!(r.lhs.abs() < 1e-2, "{r:?}");
        let r2 = check_identity_rs(&o, &phi.scaled(2.0), &IdentityBudget::default()).unwrap();
        assert!((r2.lhs - 2.0 * r.lhs).abs() < 1e-9, "{} {}", r2.lhs, r.lhs);
    }

    #[test]
    fn ps_identity_at_half() {
        let o = ord(1, 0.5);
        let phi = make_test_function(&o, BumpSpec::at_origin(1, 1.0, BumpKind::Exponential)).unwrap();
        let r = check_identity_ps(&o, &phi, &IdentityBudget::default()).unwrap();
        assert!(r.rel_gap < 0.05, "{r:?}");
    }

    #[test]
    fn qs_identity_uses_exact_constant() {
        let o = ord(1, 0.25);
        let phi = make_test_function(&o, BumpSpec::at_origin(1, 1.0, BumpKind::Exponential)).unwrap();
        let r = check_identity_qs(&o, &phi, CsMode::Exact, &IdentityBudget::default()).unwrap();
        assert!(r.rel_gap < 0.05, "{r:?}");
    }

    #[test]
    fn xs_surrogate_is_bounded() {
        let o = ord(1, 0.5);
        let phi = make_test_function(&o, BumpSpec::at_origin(1, 1.0, BumpKind::Polynomial)).unwrap();
        let pts = default_sample_points(&phi);
        let r = xs_surrogate(&o, &phi, &[1e-1, 1e-2, 1e-3], &pts, &QuadratureSpec::default()).unwrap();
        assert!(r.bound.is_finite() && r.bound < 50.0, "{r:?}");
        let spread = r.max_abs.iter().cloned().fold(0.0, f64::max) / r.max_abs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 2.0, "{r:?}");
    }
}
