//! Adaptive Gauss-Kronrod quadrature and exponentially decaying tails.
//!
//! Finite intervals are handled by globally adaptive bisection with the
//! 10-point Gauss / 21-point Kronrod pair. Semi-infinite integrals are only
//! supported after a change of variables that makes the integrand decay
//! exponentially; [`integrate_tail`] then sums chunks of doubling length.

// node and weight tables are quoted at their published precision
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
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
    0.123_491_976_262_065_851_077_208_037_358_908,
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

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

enum Rule {
    Finite { value: f64, error: f64 },
    /// An evaluation returned an infinity of this sign.
    Infinite(f64),
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Rule> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    let mut values = [0.0; 21];
    values[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = f1;
        values[20 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    for &v in &values {
        if v.is_nan() {
            return Err(Error::Numerical(format!(
                "integrand is NaN on [{a}, {b}]"
            )));
        }
        if v.is_infinite() {
            return Ok(Rule::Infinite(v.signum() * half.signum()));
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((values[j] - mean).abs() + (values[20 - j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Rule::Finite { value, error })
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
///
/// An infinite integrand value is propagated as an infinite integral, which
/// is what callers computing `1/sqrt(F)` with overflowing primitives need.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Parameter(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evaluations = 21;
    let first = match gk21(&mut f, a, b)? {
        Rule::Infinite(sign) => {
            return Ok(Integral {
                value: sign * f64::INFINITY,
                error: 0.0,
                evaluations,
            })
        }
        Rule::Finite { value, error } => Segment { a, b, value, error },
    };
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total:e} ± {total_err:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let mut children = Vec::with_capacity(2);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            evaluations += 21;
            match gk21(&mut f, lo, hi)? {
                Rule::Infinite(sign) => {
                    return Ok(Integral {
                        value: sign * f64::INFINITY,
                        error: 0.0,
                        evaluations,
                    })
                }
                Rule::Finite { value, error } => children.push(Segment {
                    a: lo,
                    b: hi,
                    value,
                    error,
                }),
            }
        }
        total += children[0].value + children[1].value - worst.value;
        total_err += children[0].error + children[1].error - worst.error;
        heap.extend(children);
        // recompute occasionally to avoid drift in the running sums
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Integrates `g` over `[start, +∞)` (or `(-∞, start]`) for integrands that
/// decay at least exponentially in the integration variable.
///
/// Chunks `[start, start+1]`, then lengths 2, 4, 8, ... are added until a
/// chunk contributes less than the tolerance and less than its predecessor.
/// `limit` bounds the distance from `start`; reaching it without the tail
/// becoming negligible is reported as a numerical failure, which is how a
/// divergent integral shows up.
pub fn integrate_tail<F: FnMut(f64) -> f64>(
    g: F,
    start: f64,
    direction: Direction,
    limit: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    match integrate_tail_partial(g, start, direction, limit, opts)? {
        (i, true) => Ok(i),
        (i, false) => Err(Error::Numerical(format!(
            "tail integral not negligible after distance {limit}: partial value {:e}",
            i.value
        ))),
    }
}

/// Like [`integrate_tail`], but stops exactly at distance `limit` and returns
/// the partial integral with a flag telling whether the tail had become
/// negligible before.
pub fn integrate_tail_partial<F: FnMut(f64) -> f64>(
    mut g: F,
    start: f64,
    direction: Direction,
    limit: f64,
    opts: QuadOptions,
) -> Result<(Integral, bool)> {
    let sign = match direction {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut offset = 0.0;
    let mut len = 1.0_f64;
    let mut previous = f64::INFINITY;
    while offset < limit {
        let step = len.min(limit - offset);
        let lo = start + sign * offset;
        let hi = start + sign * (offset + step);
        let (x0, x1) = if sign > 0.0 { (lo, hi) } else { (hi, lo) };
        let chunk = integrate(&mut g, x0, x1, opts)?;
        evaluations += chunk.evaluations;
        if chunk.value.is_infinite() {
            let i = Integral {
                value: chunk.value,
                error: 0.0,
                evaluations,
            };
            return Ok((i, true));
        }
        total += chunk.value;
        error += chunk.error;
        let size = chunk.value.abs();
        if size <= opts.abs_tol.max(0.1 * opts.rel_tol * total.abs()) && size <= previous {
            let i = Integral {
                value: total,
                error: error + size,
                evaluations,
            };
            return Ok((i, true));
        }
        previous = size;
        offset += step;
        len *= 2.0;
    }
    let i = Integral {
        value: total,
        error,
        evaluations,
    };
    Ok((i, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15, "{k}");
        assert!((g - 2.0).abs() < 1e-15, "{g}");
    }

    #[test]
    fn kronrod_is_exact_to_degree_31() {
        for p in 0..=31 {
            let mut f = |x: f64| x.powi(p);
            let Rule::Finite { value, .. } = gk21(&mut f, 0.0, 1.0).unwrap() else {
                panic!("finite integrand");
            };
            let exact = 1.0 / (p as f64 + 1.0);
            assert!((value - exact).abs() < 1e-14, "degree {p}: {value} vs {exact}");
        }
    }

    #[test]
    fn gauss_part_is_exact_to_degree_19() {
        for p in 0..=19 {
            let mut gauss = 0.0;
            for j in 0..10 {
                if j % 2 == 1 {
                    let x = XGK[j];
                    gauss += WG[j / 2] * (x.powi(p) + (-x).powi(p));
                }
            }
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((gauss - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::default().with_rel_tol(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn infinite_values_propagate() {
        let r = integrate(|x: f64| if x > 0.5 { f64::INFINITY } else { 1.0 }, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn nan_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, QuadOptions::default()).is_err());
    }

    #[test]
    fn exponential_tails() {
        let up = integrate_tail(|v: f64| (-v).exp(), 0.0, Direction::Up, 800.0, QuadOptions::default()).unwrap();
        assert!((up.value - 1.0).abs() < 1e-12);
        let down = integrate_tail(|v: f64| (0.5 * v).exp(), 0.0, Direction::Down, 800.0, QuadOptions::default()).unwrap();
        assert!((down.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_tail_stops_at_the_limit() {
        let (i, converged) =
            integrate_tail_partial(|_| 1.0, 0.0, Direction::Up, 10.5, QuadOptions::default()).unwrap();
        assert!(!converged);
        assert!((i.value - 10.5).abs() < 1e-12);
    }

    #[test]
    fn divergent_tail_is_reported() {
        let r = integrate_tail(|_| 1.0, 0.0, Direction::Up, 100.0, QuadOptions::default());
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
