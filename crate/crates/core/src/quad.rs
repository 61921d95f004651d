//! Quadrature rules: adaptive Gauss–Kronrod, Gauss–Legendre node tables,
//! and a tanh-sinh rule that hands its abscissae out in batches.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub converged: bool,
    pub evals: usize,
}

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

/// 21-point Kronrod rule with the QUADPACK error heuristic.
/// Returns `(integral, error estimate)`.
pub fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
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
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut abserr = ((resk - resg) * half).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (200.0 * abserr / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    (result, abserr)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive bisection on GK21, stopping once the summed error
/// estimate drops below `max(epsabs, epsrel * |I|)`.
pub fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    epsrel: f64,
    epsabs: f64,
    max_subdiv: usize,
) -> QuadResult {
    let (v0, e0) = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v0, err: e0 });
    let mut total = v0;
    let mut err = e0;
    let mut evals = 21;
    let mut n = 1;
    while err > epsabs.max(epsrel * total.abs()) {
        if n >= max_subdiv {
            return QuadResult { value: total, abs_err: err, converged: false, evals };
        }
        let seg = heap.pop().expect("heap never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval too small to split further
            heap.push(seg);
            return QuadResult { value: total, abs_err: err, converged: false, evals };
        }
        let (v1, e1) = gk21(f, seg.a, mid);
        let (v2, e2) = gk21(f, mid, seg.b);
        evals += 42;
        n += 1;
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
    }
    // resum to shed accumulated rounding from the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_err: f64 = heap.iter().map(|s| s.err).sum();
    QuadResult { value, abs_err, converged: true, evals }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

macro_rules! cached_rule {
    ($name:ident, $n:expr) => {
        pub fn $name() -> &'static (Vec<f64>, Vec<f64>) {
            static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
            RULE.get_or_init(|| gauss_legendre($n))
        }
    };
}

cached_rule!(gl16, 16);
cached_rule!(gl20, 20);
cached_rule!(gl30, 30);
cached_rule!(gl48, 48);

/// Fixed Gauss–Legendre rule on `[a, b]` with a precomputed table.
pub fn fixed<F: Fn(f64) -> f64 + ?Sized>(rule: &(Vec<f64>, Vec<f64>), f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

/// One abscissa of the tanh-sinh rule on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct TsNode {
    pub x: f64,
    /// distance to the nearer endpoint, exact even when `x` rounds onto it
    pub dist: f64,
    pub weight: f64,
}

fn ts_node(a: f64, b: f64, s: f64) -> TsNode {
    use std::f64::consts::FRAC_PI_2;
    let q = FRAC_PI_2 * s.sinh();
    let len = b - a;
    let cosh_q = q.cosh();
    // d/ds tanh(q) = (pi/2) cosh(s) / cosh(q)^2, scaled by len/2
    let weight = 0.5 * len * FRAC_PI_2 * s.cosh() / (cosh_q * cosh_q);
    let dist = len / (1.0 + (2.0 * q.abs()).exp());
    let x = if q < 0.0 { a + dist } else { b - dist };
    TsNode { x, dist, weight }
}

const TS_SMAX: f64 = 6.5;

/// Tanh-sinh quadrature with level doubling. `eval` receives the new nodes of
/// each level as one batch so callers can evaluate them concurrently. Nodes
/// whose weight underflows are dropped. Stops once successive levels agree to
/// `tol` (absolute) or `max_level` is reached.
pub fn tanh_sinh<E>(eval: &mut E, a: f64, b: f64, tol: f64, max_level: usize) -> QuadResult
where
    E: FnMut(&[TsNode]) -> Vec<f64>,
{
    let mut h = 0.5;
    let mut nodes = Vec::new();
    let mut k = 0i64;
    loop {
        let s = k as f64 * h;
        if s > TS_SMAX {
            break;
        }
        nodes.push(ts_node(a, b, s));
        if k > 0 {
            nodes.push(ts_node(a, b, -s));
        }
        k += 1;
    }
    nodes.retain(|n| n.weight > 1e-300 && n.dist > 0.0);
    let vals = eval(&nodes);
    let mut sum: f64 = nodes.iter().zip(&vals).map(|(n, v)| n.weight * v).sum();
    let mut evals = nodes.len();
    let mut estimate = sum * h;
    let mut prev_diff = f64::INFINITY;
    for _level in 1..=max_level {
        h *= 0.5;
        let mut fresh = Vec::new();
        let mut k = 1i64;
        loop {
            let s = k as f64 * h;
            if s > TS_SMAX {
                break;
            }
            fresh.push(ts_node(a, b, s));
            fresh.push(ts_node(a, b, -s));
            k += 2;
        }
        fresh.retain(|n| n.weight > 1e-300 && n.dist > 0.0);
        let vals = eval(&fresh);
        evals += fresh.len();
        sum += fresh.iter().zip(&vals).map(|(n, v)| n.weight * v).sum::<f64>();
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= tol {
            // quadratic convergence: the next correction is far below diff
            let err = if prev_diff.is_finite() && prev_diff > 0.0 {
                (diff * diff / prev_diff).max(4.0 * f64::EPSILON * estimate.abs())
            } else {
                diff
            };
            return QuadResult { value: estimate, abs_err: err.min(diff), converged: true, evals };
        }
        prev_diff = diff;
    }
    QuadResult { value: estimate, abs_err: prev_diff, converged: false, evals }
}
