//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod integrator.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rule for small `n`.
pub fn cached_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=64).map(|k| gauss_legendre(k.max(1))).collect());
    &rules[n]
}

/// Fixed Gauss–Legendre rule on [a, b].
pub fn gl_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = cached_rule(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + h * xi);
    }
    s * h
}

/// Fixed Gauss–Legendre rule over consecutive panels.
pub fn gl_panels<F: FnMut(f64) -> f64>(mut f: F, edges: &[f64], n: usize) -> f64 {
    edges.windows(2).map(|p| gl_fixed(&mut f, p[0], p[1], n)).sum()
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_745_492,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// One 21-point Kronrod panel: (value, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Integral estimate with its error bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-11, max_intervals: 2000 }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature over consecutive breakpoints.
///
/// Fails with [`Error::Quadrature`] when the interval budget runs out before
/// the requested tolerance is met.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, edges: &[f64], tol: Tolerance) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for p in edges.windows(2) {
        if p[1] == p[0] {
            continue;
        }
        let (v, e) = gk21(&mut f, p[0], p[1]);
        value += v;
        error += e;
        heap.push(Piece { a: p[0], b: p[1], value: v, error: e });
    }
    let mut count = heap.len();
    loop {
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if !value.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: target });
        }
        let Some(worst) = heap.pop() else {
            return Ok(Estimate { value, error });
        };
        let m = 0.5 * (worst.a + worst.b);
        if count >= tol.max_intervals || m <= worst.a || m >= worst.b {
            heap.push(worst);
            // Sum again from the pieces to avoid drift in the running totals.
            let error: f64 = heap.iter().map(|p| p.error).sum();
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let target = tol.abs.max(tol.rel * value.abs());
            if error <= target {
                return Ok(Estimate { value, error });
            }
            return Err(Error::Quadrature { achieved: error, requested: target });
        }
        let (v1, e1) = gk21(&mut f, worst.a, m);
        let (v2, e2) = gk21(&mut f, m, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        count += 1;
    }
}

/// Trapezoid rule on a periodic integrand over one period, doubled until the
/// change falls below `abs_tol`.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, period: f64, start: usize, abs_tol: f64) -> Estimate {
    let mut m = start.max(4);
    let mut sum: f64 = (0..m).map(|k| f(period * k as f64 / m as f64)).sum();
    let mut prev = sum * period / m as f64;
    for _ in 0..14 {
        let mut extra = 0.0;
        for k in 0..m {
            extra += f(period * (k as f64 + 0.5) / m as f64);
        }
        sum += extra;
        m *= 2;
        let cur = sum * period / m as f64;
        let diff = (cur - prev).abs();
        if diff <= abs_tol {
            return Estimate { value: cur, error: diff };
        }
        prev = cur;
    }
    Estimate { value: prev, error: f64::INFINITY }
}

/// Trapezoid rule for an even, 2π-periodic integrand over [0, π].
pub fn even_periodic_half<F: FnMut(f64) -> f64>(mut f: F, start: usize, abs_tol: f64) -> Estimate {
    // Nodes kπ/m, k = 0..m with half weights at both ends.
    let pi = std::f64::consts::PI;
    let mut m = start.max(4);
    let mut sum = 0.5 * (f(0.0) + f(pi)) + (1..m).map(|k| f(pi * k as f64 / m as f64)).sum::<f64>();
    let mut prev = sum * pi / m as f64;
    for _ in 0..14 {
        let mut extra = 0.0;
        for k in 0..m {
            extra += f(pi * (k as f64 + 0.5) / m as f64);
        }
        sum += extra;
        m *= 2;
        let cur = sum * pi / m as f64;
        let diff = (cur - prev).abs();
        if diff <= abs_tol {
            return Estimate { value: cur, error: diff };
        }
        prev = cur;
    }
    Estimate { value: prev, error: f64::INFINITY }
}

/// Panel edges on [0, π/2] refined geometrically toward zero, with extra
/// breakpoints merged in.
pub fn angular_edges(depth: u32, extra: &[f64]) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut e: Vec<f64> = (0..=depth).map(|k| half_pi * 0.5f64.powi(k as i32)).collect();
    e.push(0.0);
    e.extend(extra.iter().copied().filter(|&t| t > 0.0 && t < half_pi));
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [1, 2, 5, 10, 20, 33] {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gl_is_exact_to_degree_2n_minus_1() {
        let n = 8;
        for k in 0..(2 * n) {
            let got = gl_fixed(|x| x.powi(k as i32), 0.0, 1.0, n);
            assert_relative_eq!(got, 1.0 / (k as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn kronrod_gauss_nodes_match_legendre_roots() {
        let (x, w) = gauss_legendre(10);
        for j in 0..5 {
            assert_relative_eq!(XGK[2 * j + 1], x[9 - j], epsilon = 1e-15);
            assert_relative_eq!(WG[j], w[9 - j], epsilon = 1e-15);
        }
    }

    #[test]
    fn kronrod_is_exact_to_degree_31() {
        let mut sum = WGK[10];
        for w in &WGK[..10] {
            sum += 2.0 * w;
        }
        assert_relative_eq!(sum, 2.0, epsilon = 1e-15);
        for k in 0..=31 {
            let (v, _) = gk21(&mut |x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = integrate(|x: f64| x.powf(-0.5), &[0.0, 1.0], Tolerance { max_intervals: 5000, ..Default::default() }).unwrap();
        assert_relative_eq!(est.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = integrate(|x: f64| (1.0 / x).sin() / x, &[1e-6, 1.0], Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 8 });
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic() {
        // ∫_0^{2π} e^{cos x} dx = 2π I0(1)
        let i0 = 1.266_065_877_752_008_4;
        let est = periodic_trapezoid(|x| x.cos().exp(), 2.0 * std::f64::consts::PI, 8, 1e-15);
        assert_relative_eq!(est.value, 2.0 * std::f64::consts::PI * i0, max_relative = 1e-14);
        let half = even_periodic_half(|x| x.cos().exp(), 8, 1e-15);
        assert_relative_eq!(half.value, std::f64::consts::PI * i0, max_relative = 1e-14);
    }

    #[test]
    fn angular_edges_are_sorted() {
        let e = angular_edges(40, &[0.3]);
        assert_eq!(e[0], 0.0);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert!(e.contains(&0.3));
        assert_eq!(*e.last().unwrap(), std::f64::consts::FRAC_PI_2);
    }
}
