//! Scalar fields on `R^N` consumed by the principal-value evaluator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kernels::norm_sq;
use crate::special::FracOrder;

/// Growth of `|u(x)|` as `|x| → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    /// `|u(x)| ≤ C(1+|x|)^p`.
    Power(f64),
    /// Finite `L^1_s` norm with no pointwise bound.
    WeightedL1s,
}

impl Growth {
    /// Envelope `(1+|x|)^p` at radius `r`.
    pub fn envelope(self, r: f64) -> f64 {
        match self {
            Growth::Bounded | Growth::WeightedL1s => 1.0,
            Growth::Power(p) => (1.0 + r).powf(p),
        }
    }
}

/// Where a field fails to be smooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Singularity {
    /// Along `{x_1 = 0}`, behaving like `|x_1|^exponent` from one side.
    Hyperplane { exponent: f64 },
    /// At a point, behaving like `|x - at|^exponent`.
    Point { at: Vec<f64>, exponent: f64 },
}

impl Singularity {
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Singularity::Hyperplane { .. } => x[0].abs(),
            Singularity::Point { at, .. } => crate::kernels::dist_sq(x, at).sqrt(),
        }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            Singularity::Hyperplane { exponent } | Singularity::Point { exponent, .. } => *exponent,
        }
    }
}

/// An evaluatable function on `R^N` with declared growth and singular set.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    fn growth(&self) -> Growth {
        Growth::Bounded
    }

    fn singularities(&self) -> Vec<Singularity> {
        Vec::new()
    }

    /// Whether the field is `C^2` in a neighbourhood of `x`.
    fn is_c2_at(&self, x: &[f64]) -> bool {
        self.singularities().iter().all(|s| s.distance(x) > 0.0)
    }

    /// `2u(x) - u(x+z) - u(x-z)`. Fields with algebraic structure override
    /// this to cancel odd parts exactly.
    fn second_difference(&self, x: &[f64], z: &[f64]) -> f64 {
        let plus: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
        2.0 * self.eval(x) - self.eval(&plus) - self.eval(&minus)
    }

    fn label(&self) -> String;
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn growth(&self) -> Growth {
        (**self).growth()
    }
    fn singularities(&self) -> Vec<Singularity> {
        (**self).singularities()
    }
    fn is_c2_at(&self, x: &[f64]) -> bool {
        (**self).is_c2_at(x)
    }
    fn second_difference(&self, x: &[f64], z: &[f64]) -> f64 {
        (**self).second_difference(x, z)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// `cos(ξ·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineField {
    pub xi: Vec<f64>,
}

impl CosineField {
    pub fn new(xi: Vec<f64>) -> Self {
        CosineField { xi }
    }
}

impl ScalarField for CosineField {
    fn dim(&self) -> usize {
        self.xi.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.xi, x).cos()
    }

    fn second_difference(&self, x: &[f64], z: &[f64]) -> f64 {
        // cos(a+b) + cos(a-b) = 2 cos a cos b, and 1 - cos b = 2 sin^2(b/2)
        let half = 0.5 * dot(&self.xi, z);
        4.0 * dot(&self.xi, x).cos() * half.sin() * half.sin()
    }

    fn label(&self) -> String {
        format!("cos(xi.x), xi = {:?}", self.xi)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Floating-point polynomial `Σ c_α x^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    n: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl PolyField {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, f64)>) -> Self {
        assert!(terms.iter().all(|(a, _)| a.len() == n), "exponent length must equal dimension");
        PolyField { n, terms }
    }

    /// `x_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut a = vec![0; n];
        a[i] = 1;
        PolyField::new(n, vec![(a, 1.0)])
    }

    /// `|x|^2`.
    pub fn norm_sq(n: usize) -> Self {
        let terms = (0..n)
            .map(|i| {
                let mut a = vec![0; n];
                a[i] = 2;
                (a, 1.0)
            })
            .collect();
        PolyField::new(n, terms)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    fn monomial(a: &[u32], x: &[f64]) -> f64 {
        a.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product()
    }
}

impl ScalarField for PolyField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, c)| c * Self::monomial(a, x)).sum()
    }

    fn growth(&self) -> Growth {
        Growth::Power(self.degree() as f64)
    }

    /// Expands `p(x±z)` and keeps only the even-degree parts in `z`, so that
    /// odd components cancel before any rounding.
    fn second_difference(&self, x: &[f64], z: &[f64]) -> f64 {
        let mut total = 0.0;
        for (a, c) in &self.terms {
            // Π_i (x_i + z_i)^{a_i} = Σ_β Π binom(a_i, β_i) x^{a-β} z^β
            let mut acc = 0.0;
            let mut beta = vec![0u32; a.len()];
            loop {
                let deg: u32 = beta.iter().sum();
                if deg >= 2 && deg % 2 == 0 {
                    let mut term = 1.0;
                    for i in 0..a.len() {
                        term *= binom(a[i], beta[i]) * x[i].powi((a[i] - beta[i]) as i32) * z[i].powi(beta[i] as i32);
                    }
                    acc += term;
                }
                let mut i = 0;
                loop {
                    if i == a.len() {
                        break;
                    }
                    if beta[i] < a[i] {
                        beta[i] += 1;
                        break;
                    }
                    beta[i] = 0;
                    i += 1;
                }
                if i == a.len() {
                    break;
                }
            }
            total += c * acc;
        }
        -2.0 * total
    }

    fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(a, c)| format!("{c}*x^{a:?}")).collect();
        parts.join(" + ")
    }
}

fn binom(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// `(x_1)_+^a`, the one-dimensional boundary profile lifted to `R^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileField {
    pub n: usize,
    pub exponent: f64,
}

impl ProfileField {
    /// `R_s = (x_1)_+^s`.
    pub fn rs(order: &FracOrder) -> Self {
        ProfileField { n: order.dim(), exponent: order.s() }
    }

    /// `Q_s = (x_1)_+^{s-1}`.
    pub fn qs(order: &FracOrder) -> Self {
        ProfileField { n: order.dim(), exponent: order.s() - 1.0 }
    }

    pub fn value_1d(&self, t: f64) -> f64 {
        if t > 0.0 {
            t.powf(self.exponent)
        } else {
            0.0
        }
    }
}

impl ScalarField for ProfileField {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.value_1d(x[0])
    }

    fn growth(&self) -> Growth {
        if self.exponent >= 0.0 {
            Growth::Power(self.exponent)
        } else {
            Growth::WeightedL1s
        }
    }

    fn singularities(&self) -> Vec<Singularity> {
        vec![Singularity::Hyperplane { exponent: self.exponent }]
    }

    fn label(&self) -> String {
        format!("(x1)_+^{}", self.exponent)
    }
}

/// `K x_1^s |x|^{-N}` on the half space, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalField {
    order: FracOrder,
    scale: f64,
}

impl FundamentalField {
    pub fn new(order: &FracOrder) -> Self {
        FundamentalField { order: *order, scale: order.constants().k_s_paper }
    }
}

impl ScalarField for FundamentalField {
    fn dim(&self) -> usize {
        self.order.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if x[0] <= 0.0 {
            return 0.0;
        }
        let n = self.order.dim() as f64;
        self.scale * x[0].powf(self.order.s()) * norm_sq(x).powf(-n / 2.0)
    }

    fn growth(&self) -> Growth {
        Growth::Bounded
    }

    fn singularities(&self) -> Vec<Singularity> {
        let n = self.order.dim();
        let s = self.order.s();
        vec![Singularity::Hyperplane { exponent: s }, Singularity::Point { at: vec![0.0; n], exponent: s - n as f64 }]
    }

    fn label(&self) -> String {
        "P_s".to_string()
    }
}

/// `(x_1)_+^a h(x')` with `h` a polynomial on `R^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableField {
    pub profile_exponent: f64,
    pub h: PolyField,
}

impl SeparableField {
    pub fn new(profile_exponent: f64, h: PolyField) -> Self {
        SeparableField { profile_exponent, h }
    }
}

impl ScalarField for SeparableField {
    fn dim(&self) -> usize {
        self.h.dim() + 1
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if x[0] <= 0.0 {
            return 0.0;
        }
        x[0].powf(self.profile_exponent) * self.h.eval(&x[1..])
    }

    fn growth(&self) -> Growth {
        Growth::Power(self.profile_exponent.max(0.0) + self.h.degree() as f64)
    }

    fn singularities(&self) -> Vec<Singularity> {
        vec![Singularity::Hyperplane { exponent: self.profile_exponent }]
    }

    fn label(&self) -> String {
        format!("(x1)_+^{} * [{}]", self.profile_exponent, self.h.label())
    }
}

/// A field defined by a closure.
#[derive(Clone)]
pub struct FnField {
    n: usize,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    growth: Growth,
    singular: Vec<Singularity>,
    label: String,
}

impl FnField {
    pub fn new(n: usize, label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnField { n, f: Arc::new(f), growth: Growth::Bounded, singular: Vec::new(), label: label.into() }
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    pub fn with_singularity(mut self, s: Singularity) -> Self {
        self.singular.push(s);
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("n", &self.n).field("label", &self.label).finish()
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn growth(&self) -> Growth {
        self.growth
    }
    fn singularities(&self) -> Vec<Singularity> {
        self.singular.clone()
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_second_difference_is_exactly_zero() {
        let p = PolyField::new(2, vec![(vec![1, 0], 1.0), (vec![0, 1], -3.7)]);
        assert_eq!(p.second_difference(&[0.3, 1.7], &[1e-3, 2.5]), 0.0);
        let odd = PolyField::new(3, vec![(vec![1, 1, 1], 1.0), (vec![3, 0, 0], 2.0)]);
        assert_eq!(odd.second_difference(&[0.0, 0.0, 0.0], &[0.4, -1.1, 0.9]), 0.0);
    }

    #[test]
    fn norm_sq_second_difference() {
        let p = PolyField::norm_sq(2);
        assert_eq!(p.second_difference(&[1.0, 2.0], &[0.5, 0.5]), -1.0);
    }

    #[test]
    fn growth_envelope_honoured() {
        let o = FracOrder::new(2, 0.4).unwrap();
        let fields: Vec<Box<dyn ScalarField>> = vec![
            Box::new(ProfileField::rs(&o)),
            Box::new(ProfileField::qs(&o)),
            Box::new(FundamentalField::new(&o)),
            Box::new(PolyField::norm_sq(2)),
            Box::new(CosineField::new(vec![1.0, 2.0])),
        ];
        for f in &fields {
            for &th in &[0.1, 1.0, 2.5] {
                let x = [1e3 * f64::cos(th), 1e3 * f64::sin(th)];
                assert!(f.eval(&x).abs() <= 10.0 * f.growth().envelope(1e3), "{}", f.label());
            }
        }
    }

    proptest! {
        #[test]
        fn poly_second_difference_matches_direct(x0 in -2.0f64..2.0, x1 in -2.0f64..2.0, z0 in -2.0f64..2.0, z1 in -2.0f64..2.0) {
            let p = PolyField::new(2, vec![(vec![2, 1], 1.5), (vec![0, 3], -0.5), (vec![1, 0], 4.0), (vec![0, 0], 1.0)]);
            let x = [x0, x1];
            let z = [z0, z1];
            let direct = 2.0 * p.eval(&x) - p.eval(&[x0 + z0, x1 + z1]) - p.eval(&[x0 - z0, x1 - z1]);
            prop_assert!((p.second_difference(&x, &z) - direct).abs() < 1e-10);
        }

        #[test]
        fn cosine_second_difference_matches_direct(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let f = CosineField::new(vec![0.7]);
            let direct = 2.0 * f.eval(&[a]) - f.eval(&[a + b]) - f.eval(&[a - b]);
            prop_assert!((f.second_difference(&[a], &[b]) - direct).abs() < 1e-12);
        }
    }
}
