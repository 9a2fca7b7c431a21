//! One-dimensional quadrature: adaptive Gauss–Kronrod (21-point), Gauss–
//! Legendre node generation, algebraic maps for infinite ranges and a graded
//! substitution for integrable endpoint singularities.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub epsabs: f64,
    pub epsrel: f64,
    pub max_subdivisions: usize,
}

impl QuadOptions {
    pub fn new(epsabs: f64, epsrel: f64) -> Self {
        QuadOptions { epsabs, epsrel, max_subdivisions: 2000 }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions::new(1e-10, 1e-10)
    }
}

/// Integral estimate with its error bound and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, k: f64) -> QuadResult {
        QuadResult { value: self.value * k, abs_err: self.abs_err * k.abs(), ..self }
    }
}

/// 21-point Kronrod rule with embedded 10-point Gauss error estimate.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration over consecutive panels `points[i]..points[i+1]`.
///
/// Panels with the largest error estimate are bisected until the summed
/// error meets `max(epsabs, epsrel·|I|)` or the subdivision budget runs out.
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: &QuadOptions) -> QuadResult {
    assert!(points.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        total += v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
    }
    let mut subdivisions = heap.len();
    let tol = |total: f64| opts.epsabs.max(opts.epsrel * total.abs());
    while total_err > tol(total) && subdivisions < opts.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Panel { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evals += 42;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated update drift
    let mut value = 0.0;
    let mut err = 0.0;
    for p in heap.iter() {
        value += p.value;
        err += p.err;
    }
    let converged = err <= tol(value) * 1.0000001;
    QuadResult { value, abs_err: err, evals, converged }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { converged: true, ..Default::default() };
    }
    if a > b {
        let r = integrate_panels(f, &[b, a], opts);
        return r.scale(-1.0);
    }
    integrate_panels(f, &[a, b], opts)
}

/// `∫_a^∞ f` with the algebraic map `x = a + t/(1-t)`, `t ∈ [0, 1)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: &QuadOptions) -> QuadResult {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let om = 1.0 - t;
        let x = a + t / om;
        let v = f(x) / (om * om);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_panels(g, &[0.0, 0.5, 1.0], opts)
}

/// `∫_a^∞ f` for `a > 0` and `f(t) ~ t^{-p}` with `p > 1`.
///
/// Uses `t = a v^{-q}`, `q = 2/(p-1)`, which turns the algebraic tail into an
/// integrand vanishing linearly at `v = 0`.
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(mut f: F, a: f64, p: f64, opts: &QuadOptions) -> QuadResult {
    assert!(a > 0.0 && p > 1.0, "power tail needs a > 0 and p > 1");
    let q = (2.0 / (p - 1.0)).max(1.0);
    let g = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let t = a * v.powf(-q);
        let val = f(t) * a * q * v.powf(-q - 1.0);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    integrate_panels(g, &[0.0, 0.5, 1.0], opts)
}

/// `∫_{-∞}^{∞} f` with `x = tan θ`.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(mut f: F, opts: &QuadOptions) -> QuadResult {
    let h = std::f64::consts::FRAC_PI_2;
    let g = |th: f64| {
        let c = th.cos();
        if c <= 0.0 {
            return 0.0;
        }
        let v = f(th.tan()) / (c * c);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_panels(g, &[-h, -h / 2.0, 0.0, h / 2.0, h], opts)
}

/// `∫_0^L g(h) dh` where `g(h) ~ h^α` (α > -1) as `h → 0`.
///
/// Substitutes `h = L v^q` with `q = 2/(1+α)`, so the transformed integrand
/// vanishes linearly at `v = 0`. The closure receives `h` itself, which keeps
/// full relative precision next to the singular point.
pub fn integrate_graded<F: FnMut(f64) -> f64>(mut g: F, len: f64, alpha: f64, opts: &QuadOptions) -> QuadResult {
    if len <= 0.0 {
        return QuadResult { converged: true, ..Default::default() };
    }
    let q = (2.0 / (1.0 + alpha.max(-0.95))).max(1.0);
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let h = len * v.powf(q);
        let val = g(h) * len * q * v.powf(q - 1.0);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    integrate_panels(integrand, &[0.0, 0.5, 1.0], opts)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule with `n` nodes.
    pub fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::compute(n))).clone()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// Kahan–Babuška summation; used where sums must not depend on magnitude mix.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, &QuadOptions::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert_relative_eq!(r.value, exact, max_relative = 1e-14);
        assert!(r.converged);
        assert_eq!(r.evals, 21);
    }

    #[test]
    fn infinite_ranges() {
        let opts = QuadOptions::new(1e-12, 1e-12);
        let r = integrate_real_line(|x| 1.0 / (1.0 + x * x), &opts);
        assert_relative_eq!(r.value, PI, max_relative = 1e-10);
        let r = integrate_to_infinity(|x| (-x).exp(), 0.0, &opts);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-11);
        let r = integrate_power_tail(|x| x.powf(-1.25) / (1.0 + 1.0 / x), 1.0, 1.25, &opts);
        let direct = integrate_graded(|v: f64| v.powf(-0.75) / (1.0 + v), 1.0, -0.75, &opts);
        assert_relative_eq!(r.value, direct.value, max_relative = 1e-10);
    }

    #[test]
    fn graded_endpoint_singularity() {
        let opts = QuadOptions::new(1e-13, 1e-13);
        for &alpha in &[-0.75, -0.5, 0.25] {
            let r = integrate_graded(|h: f64| h.powf(alpha) * (1.0 + h), 2.0, alpha, &opts);
            let exact = 2f64.powf(alpha + 1.0) / (alpha + 1.0) + 2f64.powf(alpha + 2.0) / (alpha + 2.0);
            assert_relative_eq!(r.value, exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn gauss_legendre_weights() {
        for n in [1, 2, 5, 16, 33] {
            let gl = GaussLegendre::get(n);
            let s: f64 = gl.weights.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-13);
            for (x, y) in gl.nodes.iter().zip(gl.nodes.iter().rev()) {
                assert_eq!(*x, -*y);
            }
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let val: f64 = gl.mapped(0.0, 1.0).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(val, 1.0 / (deg as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn compensated_sum_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
