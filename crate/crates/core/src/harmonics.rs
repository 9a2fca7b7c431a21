//! Exact polynomial algebra on `R^N`: harmonic bases, sphere moments, the
//! spherical-cancellation coefficients `Z_j` and radial kernel ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::field::PolyField;
use crate::quad::QuadOptions;
use crate::special::{gamma, sphere_measure, FracOrder};

/// Exponent vector `α` of the monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex { exponents }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex { exponents: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_even(&self) -> bool {
        self.exponents.iter().all(|a| a % 2 == 0)
    }

    /// All indices of total degree `m` in `n` variables, `x_1`-heavy first.
    pub fn all_of_degree(n: usize, m: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(m);
                out.push(MultiIndex::new(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=m).rev() {
                prefix.push(a);
                rec(n, m - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if m == 0 {
                out.push(MultiIndex::new(vec![]));
            }
            return out;
        }
        rec(n, m, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All `β ≤ α` componentwise.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (i, &a) in self.exponents.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
            for b in &out {
                for k in 0..=a {
                    let mut e = b.exponents.clone();
                    e[i] = k;
                    next.push(MultiIndex::new(e));
                }
            }
            out = next;
        }
        out
    }
}

fn binom(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| FracError::domain("rational_from_f64", format!("{x} is not finite")))
}

fn pow_rat(x: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        Polynomial::monomial(MultiIndex::zero(n), c)
    }

    pub fn monomial(alpha: MultiIndex, c: BigRational) -> Self {
        let n = alpha.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(alpha, c);
        }
        Polynomial { n, terms }
    }

    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Polynomial::monomial(MultiIndex::new(e), BigRational::one())
    }

    /// `|x|^2`.
    pub fn norm_sq(n: usize) -> Self {
        let mut p = Polynomial::zero(n);
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            p.add_term(MultiIndex::new(e), BigRational::one());
        }
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, BigRational)>) -> Result<Self> {
        let mut p = Polynomial::zero(n);
        for (a, c) in terms {
            if a.dim() != n {
                return Err(FracError::domain("Polynomial", format!("index {:?} has wrong length for N = {n}", a.exponents)));
            }
            p.add_term(a, c);
        }
        Ok(p)
    }

    /// Integer coefficients, mostly for tests and examples.
    pub fn from_int_terms(n: usize, terms: &[(&[u32], i64)]) -> Self {
        let mut p = Polynomial::zero(n);
        for (a, c) in terms {
            assert_eq!(a.len(), n);
            p.add_term(MultiIndex::new(a.to_vec()), rat(*c));
        }
        p
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.degree()).max()
    }

    /// Common degree of all terms; the zero polynomial counts as homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|a| a.degree());
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_degree().is_some()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (a, c) in &other.terms {
            p.add_term(a.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, v) in &self.terms {
            p.add_term(a.clone(), v * c);
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
                p.add_term(MultiIndex::new(e), c * d);
            }
        }
        p
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, c) in &self.terms {
            let k = a.exponents[i];
            if k > 0 {
                let mut e = a.exponents.clone();
                e[i] -= 1;
                p.add_term(MultiIndex::new(e), c * rat(k as i64));
            }
        }
        p
    }

    /// Classical Laplacian, exact.
    pub fn laplacian(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for i in 0..self.n {
            p = p.add(&self.derivative(i).derivative(i));
        }
        p
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (a, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(&a.exponents) {
                t *= pow_rat(xi, k);
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &k) in x.iter().zip(&a.exponents) {
                    t *= xi.powi(k as i32);
                }
                t
            })
            .sum()
    }

    /// Floating-point field for the numerical evaluators.
    pub fn to_field(&self) -> PolyField {
        PolyField::new(self.n, self.terms.iter().map(|(a, c)| (a.exponents.clone(), c.to_f64().unwrap_or(f64::NAN))).collect())
    }

    /// Coefficients of `z^β` in `p(x+z)`:
    /// `Σ_{α ≥ β} c_α Π binom(α_i, β_i) x^{α-β}`.
    pub fn shift_coefficients(&self, x: &[BigRational]) -> BTreeMap<MultiIndex, BigRational> {
        let mut out: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
        for (a, c) in &self.terms {
            for b in a.below() {
                let mut t = c.clone();
                for i in 0..self.n {
                    let (ai, bi) = (a.exponents[i], b.exponents[i]);
                    t *= BigRational::from_integer(binom(ai, bi));
                    t *= pow_rat(&x[i], ai - bi);
                }
                *out.entry(b).or_insert_with(BigRational::zero) += t;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Parses expressions such as `x1^2 - x2^2 + 3/2*x1*x2`.
    pub fn parse(n: usize, src: &str) -> Result<Polynomial> {
        let err = |m: String| FracError::domain("Polynomial::parse", m);
        let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut p = Polynomial::zero(n);
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in cleaned.char_indices() {
            if (ch == '+' || ch == '-') && !(i > 0 && cleaned[..i].ends_with('^')) {
                if !cur.is_empty() {
                    terms.push((neg, std::mem::take(&mut cur)));
                } else if i > 0 {
                    return Err(err(format!("dangling sign in `{src}`")));
                }
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(err(format!("trailing sign in `{src}`")));
        }
        terms.push((neg, cur));
        for (neg, term) in terms {
            let mut coef = if neg { rat(-1) } else { BigRational::one() };
            let mut e = vec![0u32; n];
            for factor in term.split('*') {
                if let Some(rest) = factor.strip_prefix('x') {
                    let (idx, pow) = match rest.split_once('^') {
                        Some((i, k)) => (i, k.parse::<u32>().map_err(|_| err(format!("bad exponent in `{factor}`")))?),
                        None => (rest, 1),
                    };
                    let i: usize = idx.parse().map_err(|_| err(format!("bad variable `{factor}`")))?;
                    if i == 0 || i > n {
                        return Err(err(format!("variable x{i} outside 1..={n}")));
                    }
                    e[i - 1] += pow;
                } else {
                    let r = match factor.split_once('/') {
                        Some((a, b)) => {
                            let a: BigInt = a.parse().map_err(|_| err(format!("bad number `{factor}`")))?;
                            let b: BigInt = b.parse().map_err(|_| err(format!("bad number `{factor}`")))?;
                            if b.is_zero() {
                                return Err(err("zero denominator".into()));
                            }
                            BigRational::new(a, b)
                        }
                        None => {
                            if factor.contains('.') || factor.contains('e') {
                                let v: f64 = factor.parse().map_err(|_| err(format!("bad number `{factor}`")))?;
                                rational_from_f64(v)?
                            } else {
                                BigRational::from_integer(factor.parse().map_err(|_| err(format!("bad number `{factor}`")))?)
                            }
                        }
                    };
                    coef *= r;
                }
            }
            p.add_term(MultiIndex::new(e), coef);
        }
        Ok(p)
    }

    /// Uniformly random integer coefficients in `[-bound, bound]` on all
    /// monomials of degree `m`.
    pub fn random_homogeneous<R: Rng + ?Sized>(n: usize, m: u32, bound: i64, rng: &mut R) -> Polynomial {
        let mut p = Polynomial::zero(n);
        for a in MultiIndex::all_of_degree(n, m) {
            p.add_term(a, rat(rng.gen_range(-bound..=bound)));
        }
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let vars: Vec<String> = a
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", abs, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// `dim H^1_m(R^N) = C(m+N-1, m) - C(m+N-3, m-2)`.
pub fn harmonic_dim(n: usize, m: u32) -> Result<u64> {
    if n < 2 {
        return Err(FracError::domain("harmonic_dim", format!("N = {n} must be at least 2")));
    }
    let c = |a: u32, b: u32| binom(a, b).to_u64().expect("small binomial");
    let n = n as u32;
    let full = c(m + n - 1, m);
    Ok(if m >= 2 { full - c(m + n - 3, m - 2) } else { full })
}

/// Row-reduced nullspace basis of an exact matrix, one vector per free column.
fn nullspace(mut a: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &a[r][k] * &f;
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[i][free].clone();
        }
        out.push(v);
    }
    out
}

/// Scales to coprime integers with a positive leading coefficient.
fn primitive(p: &Polynomial) -> Polynomial {
    let mut den = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for c in p.terms.values() {
        den = den.lcm(c.denom());
    }
    for c in p.terms.values() {
        let v = (c * BigRational::from_integer(den.clone())).to_integer();
        num_gcd = num_gcd.gcd(&v);
    }
    if num_gcd.is_zero() {
        return p.clone();
    }
    let lead_neg = p.terms.iter().next_back().map(|(_, c)| c.is_negative()).unwrap_or(false);
    let mut f = BigRational::new(den, num_gcd);
    if lead_neg {
        f = -f;
    }
    p.scale(&f)
}

/// Exact basis of the homogeneous harmonic polynomials of degree `m`,
/// as the nullspace of `Δ: P_m → P_{m-2}`.
pub fn harmonic_basis(n: usize, m: u32) -> Result<Vec<Polynomial>> {
    if n < 2 {
        return Err(FracError::domain("harmonic_basis", format!("N = {n} must be at least 2")));
    }
    let cols = MultiIndex::all_of_degree(n, m);
    if m < 2 {
        return Ok(cols.into_iter().map(|a| Polynomial::monomial(a, BigRational::one())).collect());
    }
    let rows = MultiIndex::all_of_degree(n, m - 2);
    let row_of: BTreeMap<&MultiIndex, usize> = rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut mat = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (j, a) in cols.iter().enumerate() {
        let lap = Polynomial::monomial(a.clone(), BigRational::one()).laplacian();
        for (b, c) in lap.terms() {
            mat[row_of[b]][j] += c;
        }
    }
    let basis = nullspace(mat, cols.len())
        .into_iter()
        .map(|v| {
            let p = Polynomial::from_terms(n, cols.iter().cloned().zip(v)).expect("consistent dimension");
            primitive(&p)
        })
        .collect();
    Ok(basis)
}

/// Fischer pairing `[P, Q]_m = P(∂) Q` of two homogeneous polynomials of degree `m`.
pub fn fischer_pairing(p: &Polynomial, q: &Polynomial) -> Result<BigRational> {
    let (Some(dp), Some(dq)) = (p.homogeneous_degree(), q.homogeneous_degree()) else {
        return Err(FracError::domain("fischer_pairing", "both polynomials must be homogeneous"));
    };
    if p.dim() != q.dim() || (dp != dq && !p.is_zero() && !q.is_zero()) {
        return Err(FracError::domain("fischer_pairing", "degrees or dimensions differ"));
    }
    let mut acc = BigRational::zero();
    for (a, c) in p.terms() {
        if let Some(d) = q.terms().get(a) {
            let mut fact = BigInt::one();
            for &k in &a.exponents {
                for i in 2..=k {
                    fact *= BigInt::from(i);
                }
            }
            acc += c * d * BigRational::from_integer(fact);
        }
    }
    Ok(acc)
}

/// `Q_m = |x|^2 P_{m-2}`, spanned by `|x|^2 x^β`.
pub fn q_space_basis(n: usize, m: u32) -> Vec<Polynomial> {
    if m < 2 {
        return Vec::new();
    }
    let r2 = Polynomial::norm_sq(n);
    MultiIndex::all_of_degree(n, m - 2).into_iter().map(|b| r2.mul(&Polynomial::monomial(b, BigRational::one()))).collect()
}

/// Average of `ω^α` over `S^{N-1}`: `Π (α_i - 1)!! / (N (N+2) ⋯ (N + |α| - 2))`.
pub fn sphere_average_exact(alpha: &MultiIndex) -> BigRational {
    if !alpha.is_even() {
        return BigRational::zero();
    }
    let mut num = BigInt::one();
    for &a in &alpha.exponents {
        let mut k = 1;
        while k < a {
            num *= BigInt::from(k);
            k += 2;
        }
    }
    let n = alpha.dim() as u32;
    let mut den = BigInt::one();
    let mut k = 0;
    while k < alpha.degree() {
        den *= BigInt::from(n + k);
        k += 2;
    }
    BigRational::new(num, den)
}

/// `∫_{S^{N-1}} ω^α dω = 2 Π Γ((α_i+1)/2) / Γ(Σ (α_i+1)/2)`, zero for odd indices.
pub fn sphere_moment(alpha: &MultiIndex) -> f64 {
    if !alpha.is_even() || alpha.dim() == 0 {
        return 0.0;
    }
    let mut num = 2.0;
    let mut tot = 0.0;
    for &a in &alpha.exponents {
        let h = (a as f64 + 1.0) / 2.0;
        num *= gamma(h).expect("positive argument");
        tot += h;
    }
    num / gamma(tot).expect("positive argument")
}

fn exact_point(x: &[f64]) -> Result<Vec<BigRational>> {
    x.iter().map(|v| rational_from_f64(*v)).collect()
}

/// Normalized coefficients `Z_j / |S^{N-1}|` at a rational point.
fn zj_normalized(p: &Polynomial, x: &[BigRational]) -> BTreeMap<u32, BigRational> {
    let mut out: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (b, c) in p.shift_coefficients(x) {
        let j = b.degree();
        if j < 2 {
            continue;
        }
        let avg = sphere_average_exact(&b);
        if !avg.is_zero() {
            *out.entry(j).or_insert_with(BigRational::zero) += c * avg;
        }
    }
    out
}

/// Spherical-cancellation coefficients with exact normalized values.
#[derive(Debug, Clone, PartialEq)]
pub struct ZjCoefficients {
    /// `Z_j / |S^{N-1}|` for `j = 2..=m`, exact at the rational image of `x`.
    pub normalized: BTreeMap<u32, BigRational>,
    pub sphere_measure: f64,
}

impl ZjCoefficients {
    pub fn value(&self, j: u32) -> f64 {
        self.normalized.get(&j).map(|v| v.to_f64().unwrap_or(f64::NAN) * self.sphere_measure).unwrap_or(0.0)
    }

    pub fn values(&self) -> BTreeMap<u32, f64> {
        self.normalized.keys().map(|&j| (j, self.value(j))).collect()
    }

    pub fn all_zero(&self) -> bool {
        self.normalized.values().all(|v| v.is_zero())
    }
}

/// `Z_j(x) = Σ_{|β| = j} [∂^β p(x)/β!] ∫_{S^{N-1}} ω^β dω`, `j = 2..=m`,
/// the coefficients of `∫_{∂B_r} (p(x+z) - p(x)) = Σ_j Z_j r^{j+N-1}`.
pub fn zj_coefficients(p: &Polynomial, x: &[f64]) -> Result<ZjCoefficients> {
    let Some(m) = p.homogeneous_degree() else {
        return Err(FracError::domain("zj_coefficients", "polynomial is not homogeneous"));
    };
    if x.len() != p.dim() {
        return Err(FracError::domain("zj_coefficients", "point dimension differs from the polynomial"));
    }
    let xr = exact_point(x)?;
    let mut normalized = zj_normalized(p, &xr);
    for j in 2..=m {
        normalized.entry(j).or_insert_with(BigRational::zero);
    }
    Ok(ZjCoefficients { normalized, sphere_measure: sphere_measure(p.dim())? })
}

/// `|∂B_r|^{-1} ∫_{∂B_r} p(x+z) dω_r(z) - p(x)`, exact at the rational images of `x, r`.
pub fn spherical_average_deficit_exact(p: &Polynomial, x: &[BigRational], r: &BigRational) -> BigRational {
    zj_normalized(p, x).into_iter().map(|(j, z)| z * pow_rat(r, j)).fold(BigRational::zero(), |a, b| a + b)
}

pub fn spherical_average_deficit(p: &Polynomial, x: &[f64], r: f64) -> Result<f64> {
    if x.len() != p.dim() || !(r > 0.0) {
        return Err(FracError::domain("spherical_average_deficit", "need matching dimension and r > 0"));
    }
    let v = spherical_average_deficit_exact(p, &exact_point(x)?, &rational_from_f64(r)?);
    Ok(v.to_f64().unwrap_or(f64::NAN))
}

/// Which radial kernel family a [`RadialKernel`] represents.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `t^{-N-2s}`.
    Frac { s: f64 },
    /// `(1+t)^{-N-ζ}`, inside the class `c^{-1}(1+t)^{-N-ζ} ≤ K ≤ c t^{-N-ζ}`.
    K1 { zeta: f64 },
    /// `t^{-N-ζ} e^{-t}`, inside the class `c^{-1} t^{-N-ζ} χ_{(0,1)} ≤ K ≤ c t^{-N-ζ} e^{-t}`.
    K2 { zeta: f64 },
    #[serde(skip)]
    Custom { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Frac { s } => write!(f, "Frac {{ s: {s} }}"),
            KernelFamily::K1 { zeta } => write!(f, "K1 {{ zeta: {zeta} }}"),
            KernelFamily::K2 { zeta } => write!(f, "K2 {{ zeta: {zeta} }}"),
            KernelFamily::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// Continuous nonnegative kernel `K(t)` on `(0, ∞)` in dimension `N`.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    pub n: usize,
    pub family: KernelFamily,
    /// Largest `i` with `∫_0^∞ K(t) t^{N-1+i} dt < ∞`; `None` when every
    /// moment is finite past some index, `Some(-1)` when none is.
    pub moment_finite_up_to: Option<i64>,
}

impl RadialKernel {
    pub fn frac(n: usize, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::domain("RadialKernel::frac", format!("s = {s} outside (0, 1)")));
        }
        Ok(RadialKernel { n, family: KernelFamily::Frac { s }, moment_finite_up_to: Some(-1) })
    }

    pub fn k1(n: usize, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta <= 2.0) {
            return Err(FracError::domain("RadialKernel::k1", format!("ζ = {zeta} outside (0, 2]")));
        }
        Ok(RadialKernel { n, family: KernelFamily::K1 { zeta }, moment_finite_up_to: Some(zeta.ceil() as i64 - 1) })
    }

    pub fn k2(n: usize, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0) {
            return Err(FracError::domain("RadialKernel::k2", format!("ζ = {zeta} must be positive")));
        }
        Ok(RadialKernel { n, family: KernelFamily::K2 { zeta }, moment_finite_up_to: None })
    }

    pub fn custom(n: usize, label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialKernel { n, family: KernelFamily::Custom { label: label.into(), f: Arc::new(f) }, moment_finite_up_to: None }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        match &self.family {
            KernelFamily::Frac { s } => t.powf(-nf - 2.0 * s),
            KernelFamily::K1 { zeta } => (1.0 + t).powf(-nf - zeta),
            KernelFamily::K2 { zeta } => t.powf(-nf - zeta) * (-t).exp(),
            KernelFamily::Custom { f, .. } => f(t),
        }
    }

    /// `σ_j(ε) = ∫_ε^{1/ε} K(t) t^{N-1+j} dt`.
    pub fn sigma(&self, j: u32, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(FracError::domain("RadialKernel::sigma", format!("ε = {eps} outside (0, 1)")));
        }
        if let KernelFamily::Frac { s } = self.family {
            return Ok(frac_sigma(j, s, eps));
        }
        let nf = self.n as f64;
        let jf = j as f64;
        let l = -eps.ln();
        // t = e^v
        let g = |v: f64| {
            let t = v.exp();
            self.eval(t) * (v * (nf + jf)).exp()
        };
        let opts = QuadOptions::new(0.0, 1e-12).with_max_subdivisions(4000);
        let mut pts = vec![-l];
        let k = (2.0 * l).ceil().max(1.0) as usize;
        for i in 1..k {
            pts.push(-l + 2.0 * l * i as f64 / k as f64);
        }
        pts.push(l);
        Ok(crate::quad::integrate_panels(g, &pts, &opts).value)
    }
}

/// Closed form of `∫_ε^{1/ε} t^{j-1-2s} dt`, logarithmic when `j = 2s`.
pub fn frac_sigma(j: u32, s: f64, eps: f64) -> f64 {
    let e = j as f64 - 2.0 * s;
    if e.abs() < 1e-14 {
        -2.0 * eps.ln()
    } else {
        // (ε^{-e} - ε^{e}) / e, written to avoid cancellation for small e ln ε
        2.0 * (-e * eps.ln()).sinh() / e
    }
}

/// `κ_{i,j}(ε) = σ_j(ε) / σ_i(ε)`.
pub fn kappa_ratio(k: &RadialKernel, i: u32, j: u32, eps: f64) -> Result<f64> {
    if i < 2 || j < 2 {
        return Err(FracError::domain("kappa_ratio", "indices start at 2"));
    }
    let den = k.sigma(i, eps)?;
    if den == 0.0 || !den.is_finite() {
        return Err(FracError::domain("kappa_ratio", format!("denominator σ_{i}({eps}) = {den}")));
    }
    Ok(k.sigma(j, eps)? / den)
}

/// Least-squares slope of `ln κ_{i,j}` against `ln ε`.
pub fn kappa_decay_exponent(k: &RadialKernel, i: u32, j: u32, eps: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = eps.iter().map(|&e| kappa_ratio(k, i, j, e).map(|r| (e.ln(), r.abs().ln()))).collect::<Result<_>>()?;
    Ok(slope(&pts))
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Exact finite-annulus value
/// `c_{N,s} ∫_{ε<|z|<1/ε} (p(x) - p(x+z)) |z|^{-N-2s} dz = -c_{N,s} Σ_j Z_j(x) σ_j(ε)`.
pub fn annulus_frac_lap_poly(order: &FracOrder, p: &Polynomial, x: &[f64], eps: f64) -> Result<f64> {
    if order.dim() != p.dim() {
        return Err(FracError::domain("annulus_frac_lap_poly", "order and polynomial dimensions differ"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FracError::domain("annulus_frac_lap_poly", format!("ε = {eps} outside (0, 1)")));
    }
    let z = zj_coefficients(p, x)?;
    let c = order.constants().c_ns;
    let mut acc = 0.0;
    for (&j, v) in &z.normalized {
        if !v.is_zero() {
            acc -= v.to_f64().unwrap_or(f64::NAN) * frac_sigma(j, order.s(), eps);
        }
    }
    Ok(c * z.sphere_measure * acc)
}
