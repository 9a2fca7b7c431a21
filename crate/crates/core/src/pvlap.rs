//! Principal-value evaluation of the fractional Laplacian
//!
//! `(-Δ)^s u(x) = c_{N,s} lim_{ε→0} ∫_{B_{1/ε} \ B_ε} (u(x) - u(x+z)) |z|^{-N-2s} dz`
//!
//! on dyadic annulus families, with the symmetrized and separable variants
//! and the weighted `L^1_s` norm.
//!
//! Radial integration runs over a core annulus `[ε_0, R_0]` whose breakpoints
//! are the distances from `x` to the singular set, followed by dyadic shells
//! `[ε_0 2^{-k-1}, ε_0 2^{-k}]` and `[R_0 2^k, R_0 2^{k+1}]`. Angular
//! integrals use `z = r(cos θ, sin θ η)` with `η ∈ S^{N-2}` and an
//! antipodally symmetric product rule, so odd parts cancel pairwise. When the
//! field is singular on `{x_1 = 0}`, the first coordinate of the sample point
//! is formed from the angular offset to the crossing angle rather than by
//! subtraction.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::field::{PolyField, ProfileField, ScalarField, Singularity};
use crate::quad::{integrate, integrate_graded, integrate_panels, QuadOptions, QuadResult};
use crate::special::{beta, gamma, inc_beta, sphere_measure, FracOrder};

/// Radial node rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialRule {
    /// Adaptive 21-point Gauss–Kronrod with graded maps at singular radii.
    AdaptiveGk21 { max_subdivisions: usize },
}

/// Spherical rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    /// Polar angle from `e_1` times a recursively paired rule on `S^{N-2}`.
    AntipodalProduct { max_subdivisions: usize },
}

/// Annulus cutoffs, node rules and tolerances for a principal-value evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub eps_inner: f64,
    pub r_outer: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Shells closer than this fraction of the distance to the singular set
    /// use the symmetric second difference.
    pub near_fraction: f64,
    pub max_shells: usize,
    pub radial_rule: RadialRule,
    pub angular_rule: AngularRule,
    pub antipodal: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            eps_inner: 0.5,
            r_outer: 2.0,
            tol_abs: 1e-9,
            tol_rel: 1e-6,
            near_fraction: 0.5,
            max_shells: 64,
            radial_rule: RadialRule::AdaptiveGk21 { max_subdivisions: 400 },
            angular_rule: AngularRule::AntipodalProduct { max_subdivisions: 200 },
            antipodal: true,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(mut self, tol_abs: f64, tol_rel: f64) -> Self {
        self.tol_abs = tol_abs;
        self.tol_rel = tol_rel;
        self
    }

    pub fn with_cutoffs(mut self, eps_inner: f64, r_outer: f64) -> Self {
        self.eps_inner = eps_inner;
        self.r_outer = r_outer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_inner > 0.0 && self.eps_inner < 1.0 && self.r_outer > 1.0) {
            return Err(FracError::domain(
                "QuadratureSpec",
                format!("need 0 < eps_inner < 1 < r_outer, got {} and {}", self.eps_inner, self.r_outer),
            ));
        }
        if !self.antipodal {
            return Err(FracError::domain("QuadratureSpec", "principal values require an antipodal angular rule"));
        }
        if !(self.tol_abs >= 0.0 && self.tol_rel >= 0.0 && self.tol_abs + self.tol_rel > 0.0) {
            return Err(FracError::domain("QuadratureSpec", "tolerances must be nonnegative and not both zero"));
        }
        if !(self.near_fraction > 0.0 && self.near_fraction <= 1.0) {
            return Err(FracError::domain("QuadratureSpec", "near_fraction must lie in (0, 1]"));
        }
        Ok(())
    }

    fn radial_opts(&self) -> QuadOptions {
        let RadialRule::AdaptiveGk21 { max_subdivisions } = self.radial_rule;
        QuadOptions::new(self.tol_abs * 1e-2, self.tol_rel * 1e-1).with_max_subdivisions(max_subdivisions)
    }

    fn angular_opts(&self) -> QuadOptions {
        let AngularRule::AntipodalProduct { max_subdivisions } = self.angular_rule;
        QuadOptions::new(self.tol_abs * 1e-3, self.tol_rel * 1e-2).with_max_subdivisions(max_subdivisions)
    }
}

/// Value of one finite annulus `B_R \ B_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusValue {
    pub eps: f64,
    pub r_outer: f64,
    pub value: f64,
}

/// Result of a principal-value evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    /// Difference between the last two refinement levels plus quadrature error.
    pub error_estimate: f64,
    /// The annulus sequence did not settle; `value` is then the last
    /// finite-annulus value.
    pub diverging: bool,
    /// Field evaluations used.
    pub budget: usize,
    pub levels: Vec<AnnulusValue>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    /// `∫_{ω_1 > 0} (2u(x) - u(x+rω) - u(x-rω)) dω`.
    Paired,
    /// `∫_{S^{N-1}} (u(x) - u(x+rω)) dω`.
    First,
    /// `-∫_{S^{N-1}} u(x+rω) dω`.
    FirstNoCenter,
}

/// A radius together with `r - x_1`, kept exact next to `r = x_1`.
#[derive(Debug, Clone, Copy)]
struct Rad {
    r: f64,
    gap: f64,
}

/// Point singularity cut out of the field by a smooth bump of radius `rho`.
#[derive(Debug, Clone)]
struct Excised {
    at: Vec<f64>,
    exponent: f64,
    dist: f64,
    rho: f64,
}

impl Excised {
    /// Bump weight: 1 within `rho/2` of the point, 0 beyond `rho`.
    fn bump(&self, t: f64) -> f64 {
        cutoff(2.0 * t / self.rho - 1.0)
    }
}

struct Engine<'a> {
    u: &'a dyn ScalarField,
    x: &'a [f64],
    n: usize,
    s: f64,
    ux: f64,
    hyper: Option<f64>,
    points: Vec<Excised>,
    paired_below: f64,
    ang: QuadOptions,
    rad: QuadOptions,
    evals: Cell<usize>,
    failure: RefCell<Option<FracError>>,
}

impl<'a> Engine<'a> {
    fn new(order: &FracOrder, u: &'a dyn ScalarField, x: &'a [f64], spec: &QuadratureSpec, paired_only: bool) -> Result<Self> {
        spec.validate()?;
        let n = order.dim();
        if u.dim() != n || x.len() != n {
            return Err(FracError::domain("pv_frac_lap", "field, point and order dimensions differ"));
        }
        let mut hyper = None;
        let mut points = Vec::new();
        let mut dist = f64::INFINITY;
        for sing in u.singularities() {
            let d = sing.distance(x);
            dist = dist.min(d);
            match sing {
                Singularity::Hyperplane { exponent } => {
                    if x[0] <= 0.0 {
                        return Err(FracError::domain("pv_frac_lap", "fields singular on {x_1 = 0} are evaluated in the open half space"));
                    }
                    hyper = Some(exponent);
                }
                Singularity::Point { at, exponent } => points.push(Excised { dist: d, rho: 0.5 * d, at, exponent }),
            }
        }
        if hyper.is_some() {
            for p in &mut points {
                if p.at[0] != 0.0 {
                    p.rho = p.rho.min(0.5 * p.at[0].abs());
                }
            }
        }
        if dist == 0.0 {
            return Err(FracError::singular("pv_frac_lap", format!("x = {x:?} lies on the singular set")));
        }
        let ux = u.eval(x);
        if !ux.is_finite() {
            return Err(FracError::Field { location: format!("{x:?}"), msg: "non-finite value at the centre".into() });
        }
        let paired_below = if paired_only { f64::INFINITY } else { spec.near_fraction * dist };
        Ok(Engine {
            u,
            x,
            n,
            s: order.s(),
            ux,
            hyper,
            points,
            paired_below,
            ang: spec.angular_opts(),
            rad: spec.radial_opts(),
            evals: Cell::new(1),
            failure: RefCell::new(None),
        })
    }

    fn dist_to_singular(&self) -> f64 {
        let mut d = f64::INFINITY;
        if self.hyper.is_some() {
            d = d.min(self.x[0]);
        }
        for p in &self.points {
            d = d.min(p.dist);
        }
        d
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut keep = 1.0;
        for p in &self.points {
            keep *= 1.0 - p.bump(crate::kernels::dist_sq(y, &p.at).sqrt());
        }
        if keep == 0.0 {
            return 0.0;
        }
        self.evals.set(self.evals.get() + 1);
        let v = keep * self.u.eval(y);
        if v.is_finite() {
            v
        } else {
            let mut slot = self.failure.borrow_mut();
            if slot.is_none() {
                *slot = Some(FracError::Field { location: format!("{y:?}"), msg: format!("value {v}") });
            }
            0.0
        }
    }

    fn second_difference(&self, z: &[f64]) -> f64 {
        if self.hyper.is_none() && self.points.is_empty() {
            self.evals.set(self.evals.get() + 2);
            let v = self.u.second_difference(self.x, z);
            if v.is_finite() {
                return v;
            }
        }
        let plus: Vec<f64> = self.x.iter().zip(z).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = self.x.iter().zip(z).map(|(a, b)| a - b).collect();
        2.0 * self.ux - self.eval(&plus) - self.eval(&minus)
    }

    fn take_failure(&self) -> Result<()> {
        match self.failure.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Crossing angle `θ_b = arccos(x_1/r)` for `r > x_1`.
    fn crossing(&self, rad: Rad) -> Option<f64> {
        if self.hyper.is_some() && rad.gap > 0.0 {
            Some(2.0 * (rad.gap / (2.0 * rad.r)).sqrt().min(1.0).asin())
        } else {
            None
        }
    }

    /// Integrand of one direction `(θ, η)`; `dtb = θ - θ_crossing` when a crossing exists.
    fn direction(&self, rad: Rad, form: Form, th: f64, dtb: f64, tb: Option<f64>, eta: &[f64]) -> f64 {
        let n = self.n;
        let r = rad.r;
        let (c, sn) = (th.cos(), th.sin());
        let mut z = Vec::with_capacity(n);
        z.push(r * c);
        z.extend(eta.iter().map(|e| r * sn * e));
        let x = self.x;
        match form {
            Form::Paired => {
                if self.hyper.is_none() {
                    return self.second_difference(&z);
                }
                let x1 = x[0];
                let y1m = match tb {
                    None => 2.0 * x1 * (0.5 * th).sin().powi(2) - rad.gap * c,
                    Some(tb) => 2.0 * r * (0.5 * (th + tb)).sin() * (0.5 * dtb).sin(),
                };
                let mut ym = Vec::with_capacity(n);
                ym.push(y1m);
                ym.extend(x[1..].iter().zip(&z[1..]).map(|(a, b)| a - b));
                let yp: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
                2.0 * self.ux - self.eval(&yp) - self.eval(&ym)
            }
            Form::First | Form::FirstNoCenter => {
                let yp: Vec<f64> = if self.hyper.is_some() {
                    let x1 = x[0];
                    let y1 = match tb {
                        None => 2.0 * x1 * (0.5 * th).cos().powi(2) + rad.gap * c,
                        Some(tbp) => -2.0 * r * (0.5 * (th + tbp)).sin() * (0.5 * dtb).sin(),
                    };
                    let mut v = Vec::with_capacity(n);
                    v.push(y1);
                    v.extend(x[1..].iter().zip(&z[1..]).map(|(a, b)| a + b));
                    v
                } else {
                    x.iter().zip(&z).map(|(a, b)| a + b).collect()
                };
                let center = if form == Form::First { self.ux } else { 0.0 };
                center - self.eval(&yp)
            }
        }
    }

    /// `∫` over the hemisphere (paired) or the sphere (first difference).
    fn angular(&self, rad: Rad, form: Form) -> f64 {
        let n = self.n;
        if n == 1 {
            let r = rad.r;
            let x1 = self.x[0];
            let below = if self.hyper.is_some() { -rad.gap } else { x1 - r };
            return match form {
                Form::Paired => {
                    if self.hyper.is_none() {
                        self.second_difference(&[r])
                    } else {
                        2.0 * self.ux - self.eval(&[x1 + r]) - self.eval(&[below])
                    }
                }
                Form::First => (self.ux - self.eval(&[x1 + r])) + (self.ux - self.eval(&[below])),
                Form::FirstNoCenter => -(self.eval(&[x1 + r]) + self.eval(&[below])),
            };
        }
        let th_hi = if form == Form::Paired { 0.5 * PI } else { PI };
        let cross = self.crossing(rad).map(|tb| if form == Form::Paired { tb } else { PI - tb });
        // breakpoints: (angle, graded exponent or None)
        let mut breaks: Vec<(f64, Option<f64>)> = Vec::new();
        if let Some(tb) = cross {
            breaks.push((tb, self.hyper));
        }
        let mut dir: Option<Vec<f64>> = None;
        for p in &self.points {
            let mut v: Vec<f64> = p.at.iter().zip(self.x).map(|(a, b)| a - b).collect();
            if form == Form::Paired && v[0] < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            let nv = crate::kernels::norm(&v);
            if nv > 0.0 {
                breaks.push(((v[0] / nv).clamp(-1.0, 1.0).acos(), None));
                let tn = crate::kernels::norm(&v[1..]);
                if tn > 0.0 {
                    dir = Some(v[1..].iter().map(|c| c / tn).collect());
                }
            }
        }
        breaks.retain(|(t, _)| *t > 0.0 && *t < th_hi);
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes: Vec<(f64, Option<f64>)> = vec![(0.0, None)];
        nodes.extend(breaks);
        nodes.push((th_hi, None));

        let ang = QuadOptions { epsabs: self.ang.epsabs * rad.r.powf(2.0 * self.s), ..self.ang };
        let weight = |th: f64| th.sin().powi(n as i32 - 2);
        let inner = |th: f64, dtb: f64| -> f64 {
            let f = |eta: &[f64]| self.direction(rad, form, th, dtb, cross, eta);
            weight(th) * subsphere(n - 1, &f, dir.as_deref(), &ang)
        };
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let (a, sa) = w[0];
            let (b, sb) = w[1];
            if b <= a {
                continue;
            }
            let is_cross_a = cross == Some(a);
            let is_cross_b = cross == Some(b);
            let tb = cross.unwrap_or(0.0);
            total += match (sa.filter(|_| is_cross_a), sb.filter(|_| is_cross_b)) {
                (Some(al), None) => integrate_graded(|h| inner(a + h, h), b - a, al, &ang).value,
                (None, Some(al)) => integrate_graded(|h| inner(b - h, -h), b - a, al, &ang).value,
                _ => integrate(|t| inner(t, t - tb), a, b, &ang).value,
            };
        }
        total
    }

    fn radial(&self, rad: Rad, form: Form) -> f64 {
        rad.r.powf(-1.0 - 2.0 * self.s) * self.angular(rad, form)
    }

    fn form_for(&self, r_hi: f64) -> Form {
        if r_hi <= self.paired_below * (1.0 + 1e-12) {
            Form::Paired
        } else {
            Form::First
        }
    }

    /// Radial integral over `[a, b]`; `sa`/`sb` carry graded exponents at
    /// singular endpoints.
    fn segment(&self, a: f64, b: f64, sa: Option<f64>, sb: Option<f64>, form: Form) -> QuadResult {
        let x1 = self.x[0];
        match (sa, sb) {
            (None, None) => integrate(|r| self.radial(Rad { r, gap: r - x1 }, form), a, b, &self.rad),
            (Some(al), None) => {
                let ga = a - x1;
                integrate_graded(|h| self.radial(Rad { r: a + h, gap: ga + h }, form), b - a, al, &self.rad)
            }
            (None, Some(al)) => {
                let gb = b - x1;
                integrate_graded(|h| self.radial(Rad { r: b - h, gap: gb - h }, form), b - a, al, &self.rad)
            }
            (Some(_), Some(_)) => {
                let m = 0.5 * (a + b);
                self.segment(a, m, sa, None, form).add(self.segment(m, b, None, sb, form))
            }
        }
    }

    /// `∫ χ_p(y) u(y) |x - y|^{-N-2s} dy` over the bumps, in polar coordinates about each point.
    fn excised(&self) -> QuadResult {
        let n = self.n;
        let mut total = QuadResult { converged: true, ..Default::default() };
        for p in &self.points {
            let through = self.hyper.filter(|_| p.at[0] == 0.0);
            let kernel = |y: &[f64]| {
                let d2 = crate::kernels::dist_sq(self.x, y);
                self.u.eval(y) * d2.powf(-0.5 * n as f64 - self.s)
            };
            let shell = |t: f64| -> f64 {
                let at = |w: &[f64]| -> f64 {
                    let y: Vec<f64> = p.at.iter().zip(w).map(|(a, b)| a + t * b).collect();
                    self.evals.set(self.evals.get() + 1);
                    kernel(&y)
                };
                let sphere = if n == 1 {
                    at(&[1.0]) + at(&[-1.0])
                } else {
                    let inner = |th: f64| {
                        let (c, sn) = (th.cos(), th.sin());
                        let f = |eta: &[f64]| {
                            let mut w = Vec::with_capacity(n);
                            w.push(c);
                            w.extend(eta.iter().map(|e| sn * e));
                            at(&w)
                        };
                        sn.powi(n as i32 - 2) * subsphere(n - 1, &f, None, &self.ang)
                    };
                    match through {
                        Some(e) => {
                            let h = 0.5 * PI;
                            integrate_graded(|d| inner(h - d), h, e, &self.ang).value
                                + integrate_graded(|d| inner(h + d), h, e, &self.ang).value
                        }
                        None => integrate(inner, 0.0, PI, &self.ang).value,
                    }
                };
                p.bump(t) * t.powi(n as i32 - 1) * sphere
            };
            total = total.add(integrate_graded(shell, p.rho, (p.exponent + n as f64 - 1.0).min(0.0), &self.rad));
        }
        total
    }

    fn radial_breaks(&self) -> Vec<(f64, Option<f64>)> {
        let mut v = Vec::new();
        if let Some(e) = self.hyper {
            v.push((self.x[0], Some(e.min(0.0))));
        }
        for p in &self.points {
            v.push((p.dist - p.rho, None));
            v.push((p.dist, None));
            v.push((p.dist + p.rho, None));
        }
        if self.paired_below.is_finite() {
            v.push((self.paired_below, None));
        }
        v
    }
}

/// `∫_{S^{m-1}} f(η) dη` with antipodal pairing; `dir` places a breakpoint.
fn subsphere(m: usize, f: &dyn Fn(&[f64]) -> f64, dir: Option<&[f64]>, opts: &QuadOptions) -> f64 {
    match m {
        1 => f(&[1.0]) + f(&[-1.0]),
        2 => {
            let phi0 = dir.map(|d| d[1].atan2(d[0])).unwrap_or(0.0);
            // pair φ with φ + π
            integrate(
                |phi: f64| {
                    let (c, s) = (phi.cos(), phi.sin());
                    f(&[c, s]) + f(&[-c, -s])
                },
                phi0,
                phi0 + PI,
                opts,
            )
            .value
        }
        _ => {
            let (b0, sub_dir) = match dir {
                Some(d) => {
                    let tn = crate::kernels::norm(&d[1..]);
                    let sub = if tn > 0.0 { Some(d[1..].iter().map(|c| c / tn).collect::<Vec<_>>()) } else { None };
                    (Some(d[0].clamp(-1.0, 1.0).acos()), sub)
                }
                None => (None, None),
            };
            let g = |beta: f64| {
                let (c, s) = (beta.cos(), beta.sin());
                let h = |zeta: &[f64]| {
                    let mut eta = Vec::with_capacity(m);
                    eta.push(c);
                    eta.extend(zeta.iter().map(|z| s * z));
                    f(&eta)
                };
                s.powi(m as i32 - 2) * subsphere(m - 1, &h, sub_dir.as_deref(), opts)
            };
            let mut pts = vec![0.0];
            if let Some(b) = b0.filter(|b| *b > 0.0 && *b < PI) {
                pts.push(b);
            }
            pts.push(PI);
            integrate_panels(g, &pts, opts).value
        }
    }
}

/// Geometric tail bookkeeping for a sequence of dyadic shells.
#[derive(Debug, Default)]
struct ShellSeries {
    partial: f64,
    shells: Vec<f64>,
}

impl ShellSeries {
    fn push(&mut self, v: f64) {
        self.partial += v;
        self.shells.push(v);
    }

    /// Remaining-tail estimate from the last shell ratio; `nominal` is used
    /// while the empirical ratio is unavailable or unusable.
    fn tail(&self, nominal: f64) -> f64 {
        let k = self.shells.len();
        if k == 0 {
            return 0.0;
        }
        let last = self.shells[k - 1];
        let mut rho = nominal;
        if k >= 2 && self.shells[k - 2] != 0.0 {
            let emp = last / self.shells[k - 2];
            if emp.abs() < 1.0 {
                rho = emp;
            }
        }
        if rho.abs() >= 1.0 {
            return 0.0;
        }
        last * rho / (1.0 - rho)
    }
}

/// Smooth step from 1 at `t <= 0` to 0 at `t >= 1`, flat to all orders at both ends.
fn cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 / (1.0 - t) - 1.0 / t).exp())
    }
}

/// Power decay rates in `2^{-k}` of the level corrections, ascending.
fn correction_exponents(u: &dyn ScalarField, s: f64, paired_outer: bool) -> Vec<f64> {
    let bounded = !matches!(u.growth(), crate::field::Growth::Power(_));
    let mut p = match u.growth() {
        crate::field::Growth::Power(p) => p,
        _ => 0.0,
    };
    for sing in u.singularities() {
        if let Singularity::Hyperplane { exponent } = sing {
            if !matches!(u.growth(), crate::field::Growth::Power(_)) {
                p = exponent;
            }
        }
    }
    let mut e = vec![2.0 - 2.0 * s, 4.0 - 2.0 * s];
    if !(bounded && paired_outer) {
        e.extend((0..3).map(|j| 2.0 * s - p + j as f64));
    }
    if paired_outer && !bounded {
        e.push(2.0 * s);
    }
    e.retain(|v| *v > 1e-6);
    e.sort_by(|a, b| a.total_cmp(b));
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    e.truncate(5);
    e
}

/// Richardson table on a sequence indexed by `k` with corrections `2^{-e k}`.
fn richardson(seq: &[f64], exps: &[f64]) -> Vec<f64> {
    let mut cur = seq.to_vec();
    for e in exps {
        if cur.len() < 2 {
            break;
        }
        let f = 2f64.powf(*e);
        cur = cur.windows(2).map(|w| w[1] + (w[1] - w[0]) / (f - 1.0)).collect();
    }
    cur
}

fn run(order: &FracOrder, u: &dyn ScalarField, x: &[f64], spec: &QuadratureSpec, paired_only: bool) -> Result<EvalResult> {
    let eng = Engine::new(order, u, x, spec, paired_only)?;
    let s = order.s();
    let cst = order.constants();
    let c = cst.c_ns;
    let omega = cst.omega_n;
    let dist = eng.dist_to_singular();
    let eps0 = spec.eps_inner.min(0.5 * dist).min(0.5 * eng.paired_below);
    let mut breaks = eng.radial_breaks();
    let max_break = breaks.iter().map(|b| b.0).fold(0.0, f64::max);
    let r0 = spec.r_outer.max(2.0 * max_break);
    breaks.retain(|b| b.0 > eps0 && b.0 < r0);
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut nodes: Vec<(f64, Option<f64>)> = vec![(eps0, None)];
    nodes.extend(breaks);
    nodes.push((r0, None));
    let local = eng.excised();
    let mut core = QuadResult { converged: true, value: -local.value, abs_err: local.abs_err, ..Default::default() };
    for w in nodes.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        if b > a {
            core = core.add(eng.segment(a, b, sa, sb, eng.form_for(b)));
        }
    }
    eng.take_failure()?;

    let paired_outer = !eng.paired_below.is_finite();
    let outer_form = if paired_outer { Form::Paired } else { Form::FirstNoCenter };
    // centre contribution of [r, ∞) for the first-difference form
    let center_tail = |r: f64| if paired_outer { 0.0 } else { eng.ux * omega * r.powf(-2.0 * s) / (2.0 * s) };
    let exps = correction_exponents(u, s, paired_outer);
    // for bounded fields the centre part of the paired form beyond the window is added exactly
    let bounded = !matches!(u.growth(), crate::field::Growth::Power(_));
    let window_tail = |r: f64| {
        if paired_outer && bounded {
            let part = integrate(|t| (1.0 - cutoff(t / r - 1.0)) * t.powf(-1.0 - 2.0 * s), r, 2.0 * r, &eng.rad).value;
            eng.ux * omega * (part + (2.0 * r).powf(-2.0 * s) / (2.0 * s))
        } else {
            0.0
        }
    };

    let mut inner_sum = 0.0;
    let mut inner_done = false;
    let mut outer_sum = 0.0;
    let mut outer_shells: Vec<f64> = Vec::new();
    let mut quad_err = core.abs_err;
    let mut scale = core.value.abs() + center_tail(r0).abs();
    let mut levels = Vec::new();
    let mut smooth: Vec<f64> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut diverging = false;
    let mut settled = false;

    for k in 0..spec.max_shells {
        let e_hi = eps0 * 0.5f64.powi(k as i32);
        let r_lo = r0 * 2f64.powi(k as i32);
        if !inner_done {
            let sh = eng.segment(0.5 * e_hi, e_hi, None, None, Form::Paired);
            quad_err += sh.abs_err;
            scale += sh.value.abs();
            inner_sum += sh.value;
            let tol = spec.tol_abs.max(spec.tol_rel * scale);
            if k >= 2 && c * sh.value.abs() < 1e-3 * tol {
                inner_done = true;
            }
        }
        let rad = |r: f64| eng.radial(Rad { r, gap: r - x[0] }, outer_form);
        let sharp = integrate(rad, r_lo, 2.0 * r_lo, &eng.rad);
        let win = integrate(|r| rad(r) * cutoff(r / r_lo - 1.0), r_lo, 2.0 * r_lo, &eng.rad);
        eng.take_failure()?;
        quad_err += sharp.abs_err + win.abs_err;
        scale += sharp.value.abs();

        let base = core.value + inner_sum + center_tail(r0);
        smooth.push(c * (base + outer_sum + win.value + window_tail(r_lo)));
        outer_sum += sharp.value;
        outer_shells.push(sharp.value);
        let r_now = 2.0 * r_lo;
        levels.push(AnnulusValue { eps: 0.5 * e_hi, r_outer: r_now, value: c * (base + outer_sum - center_tail(r_now)) });

        let tol = spec.tol_abs.max(spec.tol_rel * c * scale);
        let table = richardson(&smooth, &exps[..exps.len().min(smooth.len().saturating_sub(3))]);
        diag.push(*table.last().unwrap());

        let m = outer_shells.len();
        if m >= 5 {
            let last = &outer_shells[m - 4..];
            let same_sign = last.iter().all(|v| v.signum() == last[3].signum());
            let ratios: Vec<f64> = last.windows(2).map(|w| w[1].abs() / w[0].abs()).collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            let growing = lo >= 1.1 && hi <= 1.2 * lo;
            if same_sign && growing && c * last[3].abs() > tol {
                diverging = true;
                break;
            }
        }
        let m = diag.len();
        if m >= 4 {
            let d1 = (diag[m - 1] - diag[m - 2]).abs();
            let d2 = (diag[m - 2] - diag[m - 3]).abs();
            if d1 <= tol && d2 <= 10.0 * tol {
                settled = true;
                break;
            }
        }
    }
    if !settled {
        diverging = true;
    }
    let budget = eng.evals.get();
    let m = diag.len();
    let diff = if m >= 2 { (diag[m - 1] - diag[m - 2]).abs() } else { f64::INFINITY };
    let value = if diverging { levels.last().map(|l| l.value).unwrap_or(f64::NAN) } else { diag[m - 1] };
    Ok(EvalResult { value, error_estimate: diff + c * quad_err, diverging, budget, levels })
}

/// `c_{N,s} ∫_{O_ε} (u(x) - u(x+z)) |z|^{-N-2s} dz` on shrinking annuli,
/// first differences away from the singular set and paired differences near `x`.
pub fn pv_frac_lap(order: &FracOrder, u: &dyn ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<EvalResult> {
    run(order, u, x, spec, false)
}

/// `(c_{N,s}/2) ∫ (2u(x) - u(x+z) - u(x-z)) |z|^{-N-2s} dz` on every shell.
pub fn symmetrized_frac_lap(order: &FracOrder, u: &dyn ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<EvalResult> {
    run(order, u, x, spec, true)
}

/// Value on the single annulus `B_R \ B_ε`, without extrapolation.
pub fn annulus_frac_lap(order: &FracOrder, u: &dyn ScalarField, x: &[f64], eps: f64, r_outer: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(eps > 0.0 && r_outer > eps) {
        return Err(FracError::domain("annulus_frac_lap", format!("need 0 < eps < R, got {eps}, {r_outer}")));
    }
    let relaxed = QuadratureSpec { eps_inner: 0.5, r_outer: 2.0, ..*spec };
    let eng = Engine::new(order, u, x, &relaxed, false)?;
    let mut breaks = eng.radial_breaks();
    breaks.retain(|b| b.0 > eps && b.0 < r_outer);
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nodes: Vec<(f64, Option<f64>)> = vec![(eps, None)];
    nodes.extend(breaks);
    nodes.push((r_outer, None));
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        if b > a {
            total += eng.segment(a, b, sa, sb, eng.form_for(b)).value;
        }
    }
    eng.take_failure()?;
    Ok(order.constants().c_ns * total)
}

/// Weighted norm `∫ |u(x)| / (1 + |x|^{N+2s}) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub error_estimate: f64,
    pub diverging: bool,
    pub budget: usize,
}

pub fn weighted_l1s_norm(order: &FracOrder, u: &dyn ScalarField, opts: &QuadOptions) -> Result<NormResult> {
    let n = order.dim();
    if u.dim() != n {
        return Err(FracError::domain("weighted_l1s_norm", "field dimension differs from the order"));
    }
    let s = order.s();
    let nf = n as f64;
    let evals = Cell::new(0usize);
    let hyper = u.singularities().iter().any(|x| matches!(x, Singularity::Hyperplane { .. }));
    let failure: RefCell<Option<FracError>> = RefCell::new(None);
    let ev = |y: &[f64]| {
        evals.set(evals.get() + 1);
        let v = u.eval(y);
        if v.is_finite() {
            v.abs()
        } else {
            failure.borrow_mut().get_or_insert(FracError::Field { location: format!("{y:?}"), msg: format!("value {v}") });
            0.0
        }
    };
    // sphere average with the hyperplane crossing at θ = π/2 taken from the offset
    let shell = |r: f64| -> f64 {
        if n == 1 {
            return ev(&[r]) + ev(&[-r]);
        }
        let g = |th: f64, y1: f64| {
            let sn = th.sin();
            let f = |eta: &[f64]| {
                let mut y = Vec::with_capacity(n);
                y.push(y1);
                y.extend(eta.iter().map(|e| r * sn * e));
                ev(&y)
            };
            sn.powi(n as i32 - 2) * subsphere(n - 1, &f, None, opts)
        };
        let h = 0.5 * PI;
        if hyper {
            integrate_graded(|d| g(h - d, r * d.sin()), h, -0.5, opts).value
                + integrate_graded(|d| g(h + d, -r * d.sin()), h, -0.5, opts).value
        } else {
            integrate(|th| g(th, r * th.cos()), 0.0, PI, opts).value
        }
    };
    let radial = |r: f64| shell(r) * r.powi(n as i32 - 1) / (1.0 + r.powf(nf + 2.0 * s));
    let mut total = integrate_graded(radial, 1.0, -0.9, opts);
    let mut shells = ShellSeries::default();
    let mut diverging = true;
    let mut last_diff = f64::INFINITY;
    let mut r = 1.0;
    for _ in 0..64 {
        let sh = integrate(radial, r, 2.0 * r, opts);
        total = total.add(sh);
        shells.push(sh.value);
        r *= 2.0;
        let tail = shells.tail(2f64.powf(-2.0 * s));
        last_diff = sh.value.abs() + tail.abs();
        if shells.shells.len() >= 4 {
            let k = shells.shells.len();
            let ratio = shells.shells[k - 1].abs() / shells.shells[k - 2].abs().max(f64::MIN_POSITIVE);
            if ratio > 0.97 && shells.shells[k - 2].abs() / shells.shells[k - 3].abs().max(f64::MIN_POSITIVE) > 0.97 {
                break;
            }
        }
        if last_diff <= opts.epsabs.max(opts.epsrel * total.value.abs()) {
            diverging = false;
            total.value += tail;
            break;
        }
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    Ok(NormResult { value: total.value, error_estimate: total.abs_err + last_diff, diverging, budget: evals.get() })
}

/// `∫_{a}^{b} t^{p} (z^2+t^2)^{-q} dt` for `z > 0` through the incomplete beta
/// function in `u = t^2/(z^2+t^2)`.
fn power_kernel_integral(z: f64, p: f64, q: f64, a: f64, b: f64) -> Result<f64> {
    let am = 0.5 * (p + 1.0);
    let bm = q - am;
    let pref = 0.5 * z.powf(p + 1.0 - 2.0 * q);
    let ub = b * b / (z * z + b * b);
    let ua = a * a / (z * z + a * a);
    let va = z * z / (z * z + a * a);
    let vb = z * z / (z * z + b * b);
    let v = if bm > 0.0 && ua > 0.5 {
        // both limits in the upper half: use the complements
        inc_beta(va, bm, am)? - inc_beta(vb, bm, am)?
    } else {
        inc_beta(ub, am, bm)? - inc_beta(ua, am, bm)?
    };
    Ok(pref * v)
}

/// Normalized moments `∫_{S^{M-1}} η^β dη`.
fn sphere_moment_f64(beta_idx: &[u32]) -> f64 {
    if beta_idx.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let mut num = 1.0;
    let mut tot = 0.0;
    for &b in beta_idx {
        let h = (b as f64 + 1.0) / 2.0;
        num *= gamma(h).expect("positive");
        tot += h;
    }
    2.0 * num / gamma(tot).expect("positive")
}

/// `Y_j(x') = Σ_{|β|=j} (∂^β h(x')/β!) ∫_{S^{N-2}} η^β dη` for even `j ≥ 2`.
fn transverse_moments(h: &PolyField, xp: &[f64]) -> Vec<(u32, f64)> {
    let m = h.dim();
    let deg = h.degree();
    let mut out = Vec::new();
    for j in (2..=deg).step_by(2) {
        let mut acc = 0.0;
        for (a, c) in h.terms() {
            let mut b = vec![0u32; m];
            loop {
                let dj: u32 = b.iter().sum();
                if dj == j && b.iter().all(|v| v % 2 == 0) {
                    let mut t = *c;
                    for i in 0..m {
                        let mut bin = 1.0;
                        for k in 0..b[i] {
                            bin = bin * (a[i] - k) as f64 / (k + 1) as f64;
                        }
                        t *= bin * xp[i].powi((a[i] - b[i]) as i32);
                    }
                    acc += t * sphere_moment_f64(&b);
                }
                let mut i = 0;
                while i < m {
                    if b[i] < a[i] {
                        b[i] += 1;
                        break;
                    }
                    b[i] = 0;
                    i += 1;
                }
                if i == m {
                    break;
                }
            }
        }
        out.push((j, acc));
    }
    out
}

/// One annulus of the iterated principal value with `(z_1, z')` split:
/// `z_1 ∈ (-1/ε, -ε) ∪ (ε, 1/ε)`, `z' ∈ B*_{1/ε} \ B*_ε`.
fn separable_annulus(
    order: &FracOrder,
    profile: &ProfileField,
    h: &PolyField,
    x: &[f64],
    eps: f64,
    opts: &QuadOptions,
) -> Result<(f64, f64)> {
    let n = order.dim();
    let s = order.s();
    let nf = n as f64;
    let x1 = x[0];
    let xp = &x[1..];
    let hx = h.eval(xp);
    let q = (nf + 2.0 * s) / 2.0;
    let om = sphere_measure(n - 1)?;
    let big = 1.0 / eps;
    let u1 = |t: f64| profile.value_1d(t);
    let u1x = u1(x1);
    let a = profile.exponent;
    let failure: RefCell<Option<FracError>> = RefCell::new(None);
    let guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    // W(z_1) = ∫_{ε<|z'|<1/ε} (z_1^2+|z'|^2)^{-q} dz'
    let w = |z: f64| om * guard(power_kernel_integral(z, nf - 2.0, q, eps, big));
    let ym = transverse_moments(h, xp);
    let phi = |z: f64| -> f64 {
        ym.iter().filter(|(_, y)| *y != 0.0).map(|(j, y)| y * guard(power_kernel_integral(z, *j as f64 + nf - 2.0, q, eps, big))).sum()
    };
    // geometric panels on [x1, 1/ε]
    let mut far_pts = vec![x1.max(eps)];
    while *far_pts.last().unwrap() * 2.0 < big {
        let l = *far_pts.last().unwrap();
        far_pts.push(l * 2.0);
    }
    far_pts.push(big);
    let lo = eps.min(x1);
    let mid = x1.min(big);

    // term A: paired on (ε, x_1), one-sided beyond
    let pair_a = |z: f64, dz_to_x1: f64| (2.0 * u1x - u1(x1 + z) - u1(dz_to_x1)) * w(z);
    let near_a = if mid > lo {
        let m = 0.5 * (lo + mid);
        integrate(|z| pair_a(z, x1 - z), lo, m, opts).add(integrate_graded(|hh| pair_a(mid - hh, hh), mid - m, a.min(0.0), opts))
    } else {
        QuadResult::default()
    };
    let far_a = integrate_panels(|z| (2.0 * u1x - u1(x1 + z)) * w(z), &far_pts, opts);
    let term_a = near_a.value + if mid < big { far_a.value } else { 0.0 };

    // term B: ∫ u_1(x_1+z_1) Σ_j Y_j σ_j(z_1) dz_1 over both signs of z_1
    let term_b = if ym.iter().all(|(_, y)| *y == 0.0) {
        0.0
    } else {
        let pair_b = |z: f64, dz: f64| (u1(x1 + z) + u1(dz)) * phi(z);
        let near = if mid > lo {
            let m = 0.5 * (lo + mid);
            integrate(|z| pair_b(z, x1 - z), lo, m, opts).value
                + integrate_graded(|hh| pair_b(mid - hh, hh), mid - m, a.min(0.0), opts).value
        } else {
            0.0
        };
        let far = if mid < big { integrate_panels(|z| u1(x1 + z) * phi(z), &far_pts, opts).value } else { 0.0 };
        near + far
    };
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let c = order.constants().c_ns;
    Ok((c * hx * term_a, -c * term_b))
}

/// Iterated principal value for `u = (x_1)_+^a h(x')` with the `(z_1, z')`
/// split, on `ε_k = ε_0 2^{-k}` with Richardson elimination of the power
/// corrections and a settling check on the eliminated diagonal.
pub fn separable_frac_lap(
    order: &FracOrder,
    profile: &ProfileField,
    h: &PolyField,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<EvalResult> {
    spec.validate()?;
    let n = order.dim();
    if n < 2 || h.dim() != n - 1 || x.len() != n {
        return Err(FracError::domain("separable_frac_lap", "need N >= 2 with h on R^{N-1}"));
    }
    if !(x[0] > 0.0) {
        return Err(FracError::domain("separable_frac_lap", "x must lie in the open half space"));
    }
    let s = order.s();
    let opts = QuadOptions::new(spec.tol_abs * 1e-3, 1e-12).with_max_subdivisions(1000);
    let mut exps = vec![s, 2.0 * s, 1.0 + s, 2.0 - 2.0 * s, 1.0 + 2.0 * s, 2.0, 2.0 + s];
    exps.sort_by(|a, b| a.total_cmp(b));
    exps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let eps0 = spec.eps_inner.min(0.25 * x[0]).min(0.1);
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut levels = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut evals = 0usize;
    let mut settled = false;
    let mut growth = Vec::new();
    for k in 0..spec.max_shells.min(24) {
        let eps = eps0 * 0.5f64.powi(k as i32);
        let (ta, tb) = separable_annulus(order, profile, h, x, eps, &opts)?;
        evals += 1;
        let v = ta + tb;
        levels.push(AnnulusValue { eps, r_outer: 1.0 / eps, value: v });
        growth.push(v);
        let mut row = vec![v];
        for j in 0..exps.len().min(k) {
            let prev = &table[k - 1];
            if j >= prev.len() {
                break;
            }
            let f = 2f64.powf(exps[j]);
            let val = row[j] + (row[j] - prev[j]) / (f - 1.0);
            row.push(val);
        }
        diag.push(*row.last().unwrap());
        table.push(row);
        let scale = growth.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let tol = spec.tol_abs.max(spec.tol_rel * scale).max(1e-9 * scale);
        let m = diag.len();
        if m >= 4 {
            let d1 = (diag[m - 1] - diag[m - 2]).abs();
            let d2 = (diag[m - 2] - diag[m - 3]).abs();
            if d1 <= 10.0 * tol && d2 <= 10.0 * tol {
                settled = true;
                break;
            }
        }
        let g = growth.len();
        if g >= 5 && growth[g - 1].abs() > 2.0 * growth[g - 3].abs() && growth[g - 3].abs() > 2.0 * growth[g - 5].abs() {
            break;
        }
    }
    let m = diag.len();
    let diverging = !settled;
    let value = if diverging { levels.last().unwrap().value } else { diag[m - 1] };
    let err = if m >= 2 { (diag[m - 1] - diag[m - 2]).abs() } else { f64::INFINITY };
    Ok(EvalResult { value, error_estimate: err, diverging, budget: evals, levels })
}

/// `W_0 = ∫_{R^{N-1}} (1+|z'|^2)^{-(N+2s)/2} dz'`, the transverse kernel mass.
pub fn transverse_kernel_mass(order: &FracOrder) -> f64 {
    let n = order.dim();
    let s = order.s();
    if n == 1 {
        return 1.0;
    }
    0.5 * sphere_measure(n - 1).unwrap() * beta((n as f64 - 1.0) / 2.0, s + 0.5).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CosineField, FundamentalField};
    use approx::assert_relative_eq;

    fn ord(n: usize, s: f64) -> FracOrder {
        FracOrder::new(n, s).unwrap()
    }

    #[test]
    fn cosine_multiplier_1d() {
        let o = ord(1, 0.5);
        let u = CosineField::new(vec![1.0]);
        let r = pv_frac_lap(&o, &u, &[0.0], &QuadratureSpec::default()).unwrap();
        assert!(!r.diverging);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn cosine_multiplier_2d() {
        for &s in &[0.25, 0.5, 0.75] {
            for &k in &[0.5, 1.0, 2.0] {
                let o = ord(2, s);
                let xi = [0.6 * k, -0.8 * k];
                let u = CosineField::new(xi.to_vec());
                let x = [0.3, 0.7];
                let expect = f64::powf(k, 2.0 * s) * (xi[0] * x[0] + xi[1] * x[1]).cos();
                let r = pv_frac_lap(&o, &u, &x, &QuadratureSpec::default()).unwrap();
                assert!(!r.diverging, "s = {s}");
                assert_relative_eq!(r.value, expect, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn linear_field_is_exactly_zero() {
        let o = ord(2, 0.3);
        let u = PolyField::coordinate(2, 0);
        let r = pv_frac_lap(&o, &u, &[0.4, -1.3], &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
        for l in &r.levels {
            assert_eq!(l.value, 0.0);
        }
    }

    #[test]
    fn norm_squared_diverges() {
        let o = ord(2, 0.5);
        let u = PolyField::norm_sq(2);
        let r = pv_frac_lap(&o, &u, &[0.1, 0.2], &QuadratureSpec::default()).unwrap();
        assert!(r.diverging);
        assert!(r.value.is_finite());
        assert_eq!(r.value, r.levels.last().unwrap().value);
    }

    #[test]
    fn profiles_are_s_harmonic_1d() {
        for &s in &[0.25, 0.5, 0.75] {
            let o = ord(1, s);
            for u in [ProfileField::rs(&o), ProfileField::qs(&o)] {
                let r = symmetrized_frac_lap(&o, &u, &[1.0], &QuadratureSpec::default()).unwrap();
                assert!(!r.diverging);
                assert!(r.value.abs() < 1e-5, "s = {s} exp = {} value = {}", u.exponent, r.value);
                let r = pv_frac_lap(&o, &u, &[0.7], &QuadratureSpec::default()).unwrap();
                assert!(r.value.abs() < 1e-5 * u.eval(&[0.7]), "pv s = {s} value = {}", r.value);
            }
        }
    }

    #[test]
    fn fundamental_solution_is_s_harmonic_2d() {
        let o = ord(2, 0.5);
        let u = FundamentalField::new(&o);
        let x = [1.0, 0.3];
        let r = pv_frac_lap(&o, &u, &x, &QuadratureSpec::default()).unwrap();
        assert!(!r.diverging);
        assert!(r.value.abs() < 1e-5 * u.eval(&x), "{}", r.value);
    }

    #[test]
    fn separable_examples() {
        let o = ord(3, 0.5);
        let h = PolyField::coordinate(2, 0);
        let r = separable_frac_lap(&o, &ProfileField::rs(&o), &h, &[1.0, 0.5, -0.2], &QuadratureSpec::default()).unwrap();
        assert!(!r.diverging);
        assert!(r.value.abs() < 1e-4, "{}", r.value);
        let o = ord(2, 0.5);
        let one = PolyField::new(1, vec![(vec![0], 1.0)]);
        let r = separable_frac_lap(&o, &ProfileField::qs(&o), &one, &[1.0, 0.0], &QuadratureSpec::default()).unwrap();
        assert!(r.value.abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn weighted_norm_examples() {
        let o = ord(1, 0.5);
        let one = PolyField::new(1, vec![(vec![0], 1.0)]);
        let r = weighted_l1s_norm(&o, &one, &QuadOptions::new(1e-10, 1e-10)).unwrap();
        assert!(!r.diverging);
        assert_relative_eq!(r.value, PI, max_relative = 1e-6);
        let crit = crate::field::FnField::new(1, "|x|^{2s}", |x: &[f64]| x[0].abs());
        let r = weighted_l1s_norm(&o, &crit, &QuadOptions::new(1e-10, 1e-10)).unwrap();
        assert!(r.diverging);
    }
}
