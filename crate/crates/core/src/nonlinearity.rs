//! Zero-order terms `f`, their primitives, structural flags and the
//! Keller-Osserman classification.
//!
//! A [`NonlinearitySpec`] is either a parametric family with closed-form
//! primitive, a piecewise-linear table, or one of two transforms of another
//! spec: the lower truncation `f̃(t) = min_{[t, t0]} f` and the shifted odd
//! extension `f̃(t) = f(t + t0) − f(t0)` (reflected oddly for `t < 0`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Half-width of the default sampling window used for sampled flags.
pub const SAMPLE_HALF_WIDTH: f64 = 100.0;
/// Default number of sample points for sampled flags.
pub const SAMPLE_POINTS: usize = 10_000;
/// Default number of grid cells for the running minimum of a truncation.
pub const TRUNCATION_CELLS: usize = 10_000;
const TRUNCATION_SUBSAMPLES: usize = 8;
const PRIMITIVE_REL_TOL: f64 = 1e-12;
const KO_LADDER: [f64; 7] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];
const KO_CAUCHY_TOL: f64 = 1e-8;
const KO_FAIL_SLOPE: f64 = -0.05;
const KO_HOLD_SLOPE: f64 = -0.01;
const BETA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum NonlinearitySpec {
    /// `t^γ + ε` for `t ≥ 0`, `ε` for `t < 0`.
    PowerPlusEps { gamma: f64, eps: f64 },
    /// `scale·eᵗ`.
    Exponential { scale: f64 },
    /// `slope·t + offset` on all of ℝ.
    Affine { slope: f64, offset: f64 },
    Constant { value: f64 },
    Tabulated(Tabulated),
    TruncatedBelow(TruncatedBelow),
    OddExtension(OddExtension),
}

/// Piecewise-linear interpolation of knots, constant to the left of the
/// first knot and continued linearly to the right of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    knots: Vec<(f64, f64)>,
    extrapolate: bool,
}

/// `f̃(t) = f(t)` for `t ≥ t0`, `min_{[t, t0]} f` below `t0`.
///
/// The running minimum is precomputed on a uniform grid of
/// [`TRUNCATION_CELLS`] cells covering `[t_min, t0]`, each cell refined by a
/// few subsamples. Below `t_min` the minimum is sampled on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedBelow {
    base: Box<NonlinearitySpec>,
    t0: f64,
    t_min: f64,
    step: f64,
    // node_min[i] = min of base over [t0 - i·step, t0]
    node_min: Vec<f64>,
}

/// `f̃(t) = f(t + t0) − f(t0)` for `t ≥ 0`, `−f̃(−t)` for `t < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddExtension {
    base: Box<NonlinearitySpec>,
    t0: f64,
    base_at_t0: f64,
}

/// JSON representation, tagged by `"family"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecRepr {
    PowerPlusEps {
        gamma: f64,
        eps: f64,
    },
    Exponential {
        scale: f64,
    },
    Affine {
        slope: f64,
        offset: f64,
    },
    Constant {
        value: f64,
    },
    Tabulated {
        knots: Vec<[f64; 2]>,
        #[serde(default = "default_true")]
        extrapolate: bool,
    },
    TruncatedBelow {
        base: Box<SpecRepr>,
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_min: Option<f64>,
    },
    OddExtension {
        base: Box<SpecRepr>,
        t0: f64,
    },
}

fn default_true() -> bool {
    true
}

impl TryFrom<SpecRepr> for NonlinearitySpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        match r {
            SpecRepr::PowerPlusEps { gamma, eps } => NonlinearitySpec::power_plus_eps(gamma, eps),
            SpecRepr::Exponential { scale } => NonlinearitySpec::exponential(scale),
            SpecRepr::Affine { slope, offset } => NonlinearitySpec::affine(slope, offset),
            SpecRepr::Constant { value } => NonlinearitySpec::constant(value),
            SpecRepr::Tabulated { knots, extrapolate } => {
                let knots = knots.into_iter().map(|[t, v]| (t, v)).collect();
                if extrapolate {
                    NonlinearitySpec::tabulated(knots)
                } else {
                    NonlinearitySpec::tabulated_strict(knots)
                }
            }
            SpecRepr::TruncatedBelow { base, t0, t_min } => {
                let base = NonlinearitySpec::try_from(*base)?;
                match t_min {
                    Some(t_min) => truncate_below_on(&base, t0, t_min),
                    None => truncate_below(&base, t0),
                }
            }
            SpecRepr::OddExtension { base, t0 } => {
                let base = NonlinearitySpec::try_from(*base)?;
                odd_extension(&base, t0)
            }
        }
    }
}

impl From<NonlinearitySpec> for SpecRepr {
    fn from(s: NonlinearitySpec) -> Self {
        SpecRepr::from(&s)
    }
}

impl From<&NonlinearitySpec> for SpecRepr {
    fn from(s: &NonlinearitySpec) -> Self {
        match s {
            NonlinearitySpec::PowerPlusEps { gamma, eps } => SpecRepr::PowerPlusEps {
                gamma: *gamma,
                eps: *eps,
            },
            NonlinearitySpec::Exponential { scale } => SpecRepr::Exponential { scale: *scale },
            NonlinearitySpec::Affine { slope, offset } => SpecRepr::Affine {
                slope: *slope,
                offset: *offset,
            },
            NonlinearitySpec::Constant { value } => SpecRepr::Constant { value: *value },
            NonlinearitySpec::Tabulated(t) => SpecRepr::Tabulated {
                knots: t.knots.iter().map(|&(a, b)| [a, b]).collect(),
                extrapolate: t.extrapolate,
            },
            NonlinearitySpec::TruncatedBelow(tr) => SpecRepr::TruncatedBelow {
                base: Box::new(SpecRepr::from(tr.base.as_ref())),
                t0: tr.t0,
                t_min: Some(tr.t_min),
            },
            NonlinearitySpec::OddExtension(o) => SpecRepr::OddExtension {
                base: Box::new(SpecRepr::from(o.base.as_ref())),
                t0: o.t0,
            },
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {v}")))
    }
}

impl NonlinearitySpec {
    pub fn power_plus_eps(gamma: f64, eps: f64) -> Result<Self> {
        if !(finite("gamma", gamma)? > 0.0) {
            return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(finite("eps", eps)? >= 0.0) {
            return Err(Error::Parameter(format!("eps must be nonnegative, got {eps}")));
        }
        Ok(NonlinearitySpec::PowerPlusEps { gamma, eps })
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        if !(finite("scale", scale)? > 0.0) {
            return Err(Error::Parameter(format!("scale must be positive, got {scale}")));
        }
        Ok(NonlinearitySpec::Exponential { scale })
    }

    pub fn affine(slope: f64, offset: f64) -> Result<Self> {
        if !(finite("slope", slope)? >= 0.0) {
            return Err(Error::Parameter(format!("slope must be nonnegative, got {slope}")));
        }
        finite("offset", offset)?;
        Ok(NonlinearitySpec::Affine { slope, offset })
    }

    pub fn constant(value: f64) -> Result<Self> {
        finite("value", value)?;
        Ok(NonlinearitySpec::Constant { value })
    }

    /// Table with the default extrapolation (constant left, linear right).
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        Ok(NonlinearitySpec::Tabulated(Tabulated::new(knots, true)?))
    }

    /// Table that refuses evaluation outside its knot range.
    pub fn tabulated_strict(knots: Vec<(f64, f64)>) -> Result<Self> {
        Ok(NonlinearitySpec::Tabulated(Tabulated::new(knots, false)?))
    }

    /// `f(t)`, or a domain error outside a strict table.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = self.value(t);
        if v.is_nan() {
            return Err(Error::Domain(format!("f is undefined at t = {t}")));
        }
        Ok(v)
    }

    /// `f(t)` with NaN standing for "undefined here".
    pub fn value(&self, t: f64) -> f64 {
        match self {
            NonlinearitySpec::PowerPlusEps { gamma, eps } => {
                if t >= 0.0 {
                    t.powf(*gamma) + eps
                } else {
                    *eps
                }
            }
            NonlinearitySpec::Exponential { scale } => scale * t.exp(),
            NonlinearitySpec::Affine { slope, offset } => slope * t + offset,
            NonlinearitySpec::Constant { value } => *value,
            NonlinearitySpec::Tabulated(tab) => tab.value(t),
            NonlinearitySpec::TruncatedBelow(tr) => tr.value(t),
            NonlinearitySpec::OddExtension(o) => o.value(t),
        }
    }

    /// `F(t; a) = ∫ₐᵗ f(s) ds`.
    pub fn primitive(&self, a: f64, t: f64) -> Result<f64> {
        if !(a <= t) {
            return Err(Error::Parameter(format!(
                "primitive needs a ≤ t, got a = {a}, t = {t}"
            )));
        }
        if a == t {
            return Ok(0.0);
        }
        match self {
            NonlinearitySpec::PowerPlusEps { gamma, eps } => {
                let mut total = eps * (t - a);
                if t > 0.0 {
                    let lo = a.max(0.0);
                    total += pow_difference(t, lo, gamma + 1.0) / (gamma + 1.0);
                }
                Ok(total)
            }
            NonlinearitySpec::Exponential { scale } => Ok(scale * a.exp() * (t - a).exp_m1()),
            NonlinearitySpec::Affine { slope, offset } => Ok((t - a) * (0.5 * slope * (t + a) + offset)),
            NonlinearitySpec::Constant { value } => Ok(value * (t - a)),
            NonlinearitySpec::Tabulated(tab) => tab.primitive(a, t),
            NonlinearitySpec::TruncatedBelow(tr) => {
                let mut total = 0.0;
                if t > tr.t0 {
                    total += tr.base.primitive(a.max(tr.t0), t)?;
                }
                if a < tr.t0 {
                    total += integrate_values(self, a, t.min(tr.t0))?;
                }
                Ok(total)
            }
            NonlinearitySpec::OddExtension(_) => {
                if a < 0.0 && t > 0.0 {
                    Ok(integrate_values(self, a, 0.0)? + integrate_values(self, 0.0, t)?)
                } else {
                    integrate_values(self, a, t)
                }
            }
        }
    }

    /// Compact JSON, used to tag profiles with the `f` that produced them.
    pub fn label(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }

    fn is_parametric(&self) -> bool {
        matches!(
            self,
            NonlinearitySpec::PowerPlusEps { .. }
                | NonlinearitySpec::Exponential { .. }
                | NonlinearitySpec::Affine { .. }
                | NonlinearitySpec::Constant { .. }
        )
    }
}

/// `x^p − y^p` for `x ≥ y ≥ 0` without cancellation when `x ≈ y`.
fn pow_difference(x: f64, y: f64, p: f64) -> f64 {
    if y == 0.0 {
        x.powf(p)
    } else {
        y.powf(p) * (p * ((x - y) / y).ln_1p()).exp_m1()
    }
}

fn integrate_values(spec: &NonlinearitySpec, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let opts = QuadOptions::default().with_rel_tol(PRIMITIVE_REL_TOL);
    Ok(quadrature::integrate(|s| spec.value(s), a, b, opts)?.value)
}

impl Tabulated {
    fn new(knots: Vec<(f64, f64)>, extrapolate: bool) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Input("a table needs at least one knot".into()));
        }
        for (i, (t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::Input(format!("knot {i} is not finite")));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Input(format!(
                "knot abscissae must be strictly increasing (at index {})",
                i + 1
            )));
        }
        Ok(Tabulated { knots, extrapolate })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn right_slope(&self) -> f64 {
        match self.knots.len() {
            1 => 0.0,
            m => {
                let (t1, v1) = self.knots[m - 2];
                let (t2, v2) = self.knots[m - 1];
                (v2 - v1) / (t2 - t1)
            }
        }
    }

    fn value(&self, t: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if t < first.0 {
            return if self.extrapolate { first.1 } else { f64::NAN };
        }
        if t > last.0 {
            return if self.extrapolate {
                last.1 + self.right_slope() * (t - last.0)
            } else {
                f64::NAN
            };
        }
        let i = self.knots.partition_point(|k| k.0 <= t);
        if i >= self.knots.len() {
            return last.1;
        }
        let (t1, v1) = self.knots[i - 1];
        let (t2, v2) = self.knots[i];
        v1 + (v2 - v1) * (t - t1) / (t2 - t1)
    }

    // exact: the interpolant is linear between consecutive breakpoints
    fn primitive(&self, a: f64, t: f64) -> Result<f64> {
        let first = self.knots[0].0;
        let last = self.knots[self.knots.len() - 1].0;
        if !self.extrapolate && (a < first || t > last) {
            return Err(Error::Domain(format!(
                "[{a}, {t}] leaves the table range [{first}, {last}]"
            )));
        }
        let mut points = vec![a];
        points.extend(self.knots.iter().map(|k| k.0).filter(|&x| x > a && x < t));
        points.push(t);
        Ok(points
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
            .sum())
    }
}

impl TruncatedBelow {
    pub fn base(&self) -> &NonlinearitySpec {
        &self.base
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    fn node(&self, i: usize) -> f64 {
        self.t0 - i as f64 * self.step
    }

    fn value(&self, t: f64) -> f64 {
        if t >= self.t0 {
            return self.base.value(t);
        }
        let cells = self.node_min.len() - 1;
        if t < self.t_min {
            let mut m = self.node_min[cells].min(self.base.value(t));
            let span = self.t_min - t;
            for j in 1..SAMPLE_POINTS {
                m = m.min(self.base.value(t + span * j as f64 / SAMPLE_POINTS as f64));
            }
            return m;
        }
        // node j-1 is the first node at or above t
        let j = (((self.t0 - t) / self.step).ceil() as usize).clamp(1, cells);
        let right = self.node(j - 1);
        let left = self.node(j);
        let mut m = self.node_min[j - 1].min(self.base.value(t));
        for s in 1..TRUNCATION_SUBSAMPLES {
            let x = left + (right - left) * s as f64 / TRUNCATION_SUBSAMPLES as f64;
            if x > t {
                m = m.min(self.base.value(x));
            }
        }
        m
    }
}

impl OddExtension {
    pub fn base(&self) -> &NonlinearitySpec {
        &self.base
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    fn value(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.base.value(t + self.t0) - self.base_at_t0
        } else {
            -(self.base.value(-t + self.t0) - self.base_at_t0)
        }
    }
}

/// Lower truncation on the default window `[t0 − 100, t0]`.
pub fn truncate_below(spec: &NonlinearitySpec, t0: f64) -> Result<NonlinearitySpec> {
    truncate_below_on(spec, t0, t0 - SAMPLE_HALF_WIDTH)
}

/// Lower truncation with the running-minimum grid on `[t_min, t0]`.
pub fn truncate_below_on(spec: &NonlinearitySpec, t0: f64, t_min: f64) -> Result<NonlinearitySpec> {
    finite("t0", t0)?;
    finite("t_min", t_min)?;
    if !(t_min < t0) {
        return Err(Error::Parameter(format!("t_min = {t_min} must lie below t0 = {t0}")));
    }
    let step = (t0 - t_min) / TRUNCATION_CELLS as f64;
    let mut node_min = Vec::with_capacity(TRUNCATION_CELLS + 1);
    let mut running = spec.value(t0);
    node_min.push(running);
    for i in 1..=TRUNCATION_CELLS {
        let right = t0 - (i - 1) as f64 * step;
        let left = t0 - i as f64 * step;
        for s in 0..TRUNCATION_SUBSAMPLES {
            running = running.min(spec.value(left + (right - left) * s as f64 / TRUNCATION_SUBSAMPLES as f64));
        }
        node_min.push(running);
    }
    if node_min.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain(format!(
            "base is undefined somewhere on [{t_min}, {t0}]"
        )));
    }
    Ok(NonlinearitySpec::TruncatedBelow(TruncatedBelow {
        base: Box::new(spec.clone()),
        t0,
        t_min,
        step,
        node_min,
    }))
}

/// Shifted odd extension; the base must be strictly increasing and convex
/// on `[t0, ∞)`.
pub fn odd_extension(spec: &NonlinearitySpec, t0: f64) -> Result<NonlinearitySpec> {
    finite("t0", t0)?;
    let flags = validate_from(spec, t0);
    if !flags.strictly_increasing {
        return Err(Error::hypothesis(
            "strictly_increasing",
            format!("odd extension needs a strictly increasing base on [{t0}, ∞)"),
        ));
    }
    if !flags.convex {
        return Err(Error::hypothesis(
            "convex",
            format!("odd extension needs a convex base on [{t0}, ∞)"),
        ));
    }
    let base_at_t0 = spec.eval(t0)?;
    Ok(NonlinearitySpec::OddExtension(OddExtension {
        base: Box::new(spec.clone()),
        t0,
        base_at_t0,
    }))
}

/// Structural properties of `f` on a domain `ℝ` or `[lo, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyFlags {
    pub positive: bool,
    pub nonnegative: bool,
    pub nondecreasing: bool,
    pub strictly_increasing: bool,
    /// Convex on the whole domain.
    pub convex: bool,
    /// Convex on the domain intersected with `[0, ∞)`.
    pub convex_on_positives: bool,
    /// Determined from samples rather than analytically.
    pub sampled: bool,
}

impl PropertyFlags {
    /// Name of the first flag among `required` that is false.
    pub fn first_missing(&self, required: &[&'static str]) -> Option<&'static str> {
        required.iter().copied().find(|name| !self.get(name))
    }

    pub fn get(&self, name: &str) -> bool {
        match name {
            "positive" => self.positive,
            "nonnegative" => self.nonnegative,
            "nondecreasing" => self.nondecreasing,
            "strictly_increasing" => self.strictly_increasing,
            "convex" => self.convex,
            "convex_on_positives" => self.convex_on_positives,
            _ => false,
        }
    }
}

/// Flags on all of ℝ.
pub fn validate(spec: &NonlinearitySpec) -> PropertyFlags {
    validate_from(spec, f64::NEG_INFINITY)
}

/// Flags on `[lo, ∞)`; pass `-∞` for the whole line.
pub fn validate_from(spec: &NonlinearitySpec, lo: f64) -> PropertyFlags {
    match spec {
        NonlinearitySpec::PowerPlusEps { gamma, eps } => PropertyFlags {
            positive: *eps > 0.0 || lo > 0.0,
            nonnegative: true,
            nondecreasing: true,
            strictly_increasing: lo >= 0.0,
            convex: *gamma >= 1.0,
            convex_on_positives: *gamma >= 1.0,
            sampled: false,
        },
        NonlinearitySpec::Exponential { .. } => PropertyFlags {
            positive: true,
            nonnegative: true,
            nondecreasing: true,
            strictly_increasing: true,
            convex: true,
            convex_on_positives: true,
            sampled: false,
        },
        NonlinearitySpec::Affine { slope, offset } => {
            let inf = if *slope == 0.0 { *offset } else { slope * lo + offset };
            PropertyFlags {
                positive: inf > 0.0,
                nonnegative: inf >= 0.0,
                nondecreasing: true,
                strictly_increasing: *slope > 0.0,
                convex: true,
                convex_on_positives: true,
                sampled: false,
            }
        }
        NonlinearitySpec::Constant { value } => PropertyFlags {
            positive: *value > 0.0,
            nonnegative: *value >= 0.0,
            nondecreasing: true,
            strictly_increasing: false,
            convex: true,
            convex_on_positives: true,
            sampled: false,
        },
        _ => {
            let (a, b) = sample_window(lo);
            sampled_flags(spec, a, b, SAMPLE_POINTS)
        }
    }
}

fn sample_window(lo: f64) -> (f64, f64) {
    if lo == f64::NEG_INFINITY {
        (-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH)
    } else {
        (lo, SAMPLE_HALF_WIDTH.max(lo + SAMPLE_HALF_WIDTH))
    }
}

/// Flags read off `points` equally spaced samples of `[a, b]`.
pub fn sampled_flags(spec: &NonlinearitySpec, a: f64, b: f64, points: usize) -> PropertyFlags {
    let points = points.max(3);
    let ts: Vec<f64> = (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect();
    let vs: Vec<f64> = ts.iter().map(|&t| spec.value(t)).collect();
    if vs.iter().any(|v| v.is_nan()) {
        return PropertyFlags {
            positive: false,
            nonnegative: false,
            nondecreasing: false,
            strictly_increasing: false,
            convex: false,
            convex_on_positives: false,
            sampled: true,
        };
    }
    let slack = |v: f64| 1e-12 * v.abs().max(1.0);
    let nondecreasing = vs.windows(2).all(|w| w[1] >= w[0] - slack(w[0]));
    let strictly_increasing = vs.windows(2).all(|w| w[1] > w[0]);
    let convex_where = |keep: &dyn Fn(f64) -> bool| {
        (1..points - 1)
            .filter(|&i| keep(ts[i - 1]))
            .all(|i| vs[i + 1] - 2.0 * vs[i] + vs[i - 1] >= -1e-10 * vs[i].abs().max(1.0))
    };
    PropertyFlags {
        positive: vs.iter().all(|&v| v > 0.0),
        nonnegative: vs.iter().all(|&v| v >= 0.0),
        nondecreasing,
        strictly_increasing,
        convex: convex_where(&|_| true),
        convex_on_positives: convex_where(&|t| t >= 0.0),
        sampled: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoMethod {
    Analytic,
    NumericalExtrapolation,
}

/// Verdict on `∫^∞ (∫₀ᵗ f)^{-1/2} dt = ∞` with supporting diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoVerdict {
    pub status: KoStatus,
    pub method: KoMethod,
    pub evidence: BTreeMap<String, f64>,
}

fn ko_hypotheses(spec: &NonlinearitySpec) -> Result<()> {
    let flags = validate_from(spec, 0.0);
    if let Some(flag) = flags.first_missing(&["nonnegative", "nondecreasing"]) {
        return Err(Error::hypothesis(
            flag,
            "the Keller-Osserman classification needs f on [0, ∞)",
        ));
    }
    Ok(())
}

/// Classifies `f`: closed-form tail rates for the parametric families,
/// ladder extrapolation otherwise.
pub fn classify_ko(spec: &NonlinearitySpec) -> Result<KoVerdict> {
    ko_hypotheses(spec)?;
    if spec.is_parametric() {
        Ok(classify_analytic(spec))
    } else {
        classify_numerical_unchecked(spec)
    }
}

/// Ladder extrapolation for any spec, including parametric ones (used to
/// cross-check the analytic path).
pub fn classify_ko_numerical(spec: &NonlinearitySpec) -> Result<KoVerdict> {
    ko_hypotheses(spec)?;
    classify_numerical_unchecked(spec)
}

fn classify_analytic(spec: &NonlinearitySpec) -> KoVerdict {
    let mut evidence = BTreeMap::new();
    // integrand (∫₀ᵗ f)^{-1/2} ~ t^{-p}; the integral diverges iff p ≤ 1
    let status = match spec {
        NonlinearitySpec::PowerPlusEps { gamma, .. } => {
            let p = 0.5 * (gamma + 1.0);
            evidence.insert("tail_exponent".into(), p);
            if p <= 1.0 {
                KoStatus::Holds
            } else {
                KoStatus::Fails
            }
        }
        NonlinearitySpec::Exponential { .. } => {
            evidence.insert("exponential_decay_rate".into(), 0.5);
            KoStatus::Fails
        }
        NonlinearitySpec::Affine { slope, offset } => {
            if *slope > 0.0 {
                evidence.insert("tail_exponent".into(), 1.0);
            } else if *offset > 0.0 {
                evidence.insert("tail_exponent".into(), 0.5);
            } else {
                evidence.insert("vanishing_f".into(), 1.0);
            }
            KoStatus::Holds
        }
        NonlinearitySpec::Constant { value } => {
            if *value > 0.0 {
                evidence.insert("tail_exponent".into(), 0.5);
            } else {
                evidence.insert("vanishing_f".into(), 1.0);
            }
            KoStatus::Holds
        }
        _ => unreachable!("analytic classification is only used for parametric families"),
    };
    KoVerdict {
        status,
        method: KoMethod::Analytic,
        evidence,
    }
}

fn classify_numerical_unchecked(spec: &NonlinearitySpec) -> Result<KoVerdict> {
    let mut evidence = BTreeMap::new();
    let verdict = |status, evidence| KoVerdict {
        status,
        method: KoMethod::NumericalExtrapolation,
        evidence,
    };
    // the head of the integral is irrelevant for divergence; start where F > 0
    let Some(start) = KO_LADDER
        .iter()
        .position(|&t| spec.primitive(0.0, t).map(|v| v > 0.0).unwrap_or(false))
    else {
        evidence.insert("f_vanishes_up_to".into(), KO_LADDER[KO_LADDER.len() - 1]);
        return Ok(verdict(KoStatus::Inconclusive, evidence));
    };
    evidence.insert("t_start".into(), KO_LADDER[start]);

    let opts = QuadOptions::default().with_rel_tol(1e-10);
    let integrand = |t: f64| match spec.primitive(0.0, t) {
        Ok(big_f) if big_f.is_infinite() => 0.0,
        Ok(big_f) if big_f > 0.0 => 1.0 / big_f.sqrt(),
        Ok(_) => f64::INFINITY,
        Err(_) => f64::NAN,
    };
    let mut increments = Vec::new();
    let mut cumulative = 0.0;
    for w in KO_LADDER[start..].windows(2) {
        let piece = quadrature::integrate(integrand, w[0], w[1], opts)?.value;
        cumulative += piece;
        increments.push(piece);
        evidence.insert(format!("I({:e})", w[1]), cumulative);
    }
    let last = *increments.last().unwrap_or(&f64::INFINITY);
    evidence.insert("last_increment".into(), last);
    if last < KO_CAUCHY_TOL {
        evidence.insert("cauchy_tol".into(), KO_CAUCHY_TOL);
        return Ok(verdict(KoStatus::Fails, evidence));
    }
    if increments.len() < 3 {
        return Ok(verdict(KoStatus::Inconclusive, evidence));
    }
    // least-squares slope of log10(increment) per decade over the last three
    let tail: Vec<f64> = increments[increments.len() - 3..].iter().map(|v| v.log10()).collect();
    let slope = (tail[2] - tail[0]) / 2.0;
    evidence.insert("log10_increment_slope".into(), slope);
    if slope <= KO_FAIL_SLOPE {
        let ratio = 10f64.powf(slope);
        evidence.insert("extrapolated_tail".into(), last * ratio / (1.0 - ratio));
        Ok(verdict(KoStatus::Fails, evidence))
    } else if slope >= KO_HOLD_SLOPE {
        Ok(verdict(KoStatus::Holds, evidence))
    } else {
        Ok(verdict(KoStatus::Inconclusive, evidence))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSample {
    pub t: f64,
    pub h: f64,
    /// `f̃(t+h) − f̃(t) − 2 f̃(h/2)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub worst_margin: f64,
    pub worst: Option<BetaSample>,
    /// Samples with margin below `-1e-9`.
    pub failures: Vec<BetaSample>,
}

impl BetaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `f̃(t+h) − f̃(t) ≥ 2 f̃(h/2)` on each `(t, h)` sample.
pub fn check_beta(spec: &NonlinearitySpec, samples: &[(f64, f64)]) -> Result<BetaReport> {
    if !matches!(spec, NonlinearitySpec::OddExtension(_)) {
        return Err(Error::Parameter("the increment inequality is checked on odd extensions only".into()));
    }
    let mut report = BetaReport {
        worst_margin: f64::INFINITY,
        worst: None,
        failures: Vec::new(),
    };
    for &(t, h) in samples {
        if !(h >= 0.0) || !t.is_finite() || !h.is_finite() {
            return Err(Error::Parameter(format!("sample (t = {t}, h = {h}) needs finite t and h ≥ 0")));
        }
        let margin = spec.eval(t + h)? - spec.eval(t)? - 2.0 * spec.eval(0.5 * h)?;
        let sample = BetaSample { t, h, margin };
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst = Some(sample);
        }
        if margin < -BETA_TOL {
            report.failures.push(sample);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn ppe(g: f64, e: f64) -> NonlinearitySpec {
        NonlinearitySpec::power_plus_eps(g, e).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ppe(3.0, 1.0).eval(2.0).unwrap(), 9.0);
        assert_eq!(ppe(3.0, 1.0).eval(-1.0).unwrap(), 1.0);
        let odd = odd_extension(&NonlinearitySpec::exponential(1.0).unwrap(), 0.0).unwrap();
        assert!((odd.eval(-1.0).unwrap() + (E - 1.0)).abs() < 1e-15);
        assert_eq!(odd.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn strict_table_reports_domain_errors() {
        let t = NonlinearitySpec::tabulated_strict(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.5);
        assert!(matches!(t.eval(2.0), Err(Error::Domain(_))));
        assert!(matches!(t.primitive(-1.0, 0.5), Err(Error::Domain(_))));
        let loose = NonlinearitySpec::tabulated(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(loose.eval(-3.0).unwrap(), 1.0);
        assert_eq!(loose.eval(3.0).unwrap(), 4.0);
    }

    #[test]
    fn primitive_examples() {
        let c = NonlinearitySpec::constant(0.7).unwrap();
        assert!((c.primitive(0.0, 3.0).unwrap() - 2.1).abs() < 1e-15);
        let p = ppe(2.5, 0.3);
        for t in [0.5_f64, 1.0, 4.0, 17.0] {
            let exact = t.powf(3.5) / 3.5 + 0.3 * t;
            assert!((p.primitive(0.0, t).unwrap() - exact).abs() <= 1e-14 * exact);
        }
        let e = NonlinearitySpec::exponential(1.0).unwrap();
        for t in [-2.0_f64, 0.5, 3.0] {
            let exact = t.exp() - 1.0;
            let (lo, hi) = if t < 0.0 { (t, 0.0) } else { (0.0, t) };
            let got = e.primitive(lo, hi).unwrap();
            let want = if t < 0.0 { -exact } else { exact };
            assert!((got - want).abs() <= 1e-14 * want.abs());
        }
        assert!(matches!(c.primitive(1.0, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn primitive_matches_quadrature_for_every_family() {
        let specs = vec![
            ppe(1.5, 1.0),
            NonlinearitySpec::exponential(2.0).unwrap(),
            NonlinearitySpec::affine(1.0, 1.0).unwrap(),
            NonlinearitySpec::tabulated(vec![(-1.0, 2.0), (0.0, 1.0), (1.0, 2.0), (3.0, 2.5)]).unwrap(),
            truncate_below(&ppe(2.0, 0.5), 0.5).unwrap(),
            odd_extension(&NonlinearitySpec::exponential(1.0).unwrap(), 0.3).unwrap(),
        ];
        for s in &specs {
            for (a, b) in [(-2.0, -0.5), (-1.0, 2.0), (0.25, 4.0)] {
                let direct = s.primitive(a, b).unwrap();
                let oracle = quadrature::integrate(|x| s.value(x), a, b, QuadOptions::default()).unwrap().value;
                assert!((direct - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{s:?} on [{a}, {b}]: {direct} vs {oracle}");
            }
        }
    }

    #[test]
    fn validate_examples() {
        let f = validate(&ppe(3.0, 1.0));
        assert!(f.positive && f.nondecreasing && !f.strictly_increasing);
        let e = validate(&NonlinearitySpec::exponential(1.0).unwrap());
        assert!(e.positive && e.strictly_increasing && e.convex);
        let z = validate(&NonlinearitySpec::constant(0.0).unwrap());
        assert!(z.nonnegative && !z.positive);
        let a = validate(&NonlinearitySpec::affine(1.0, 1.0).unwrap());
        assert!(!a.positive && a.strictly_increasing);
        assert!(validate_from(&NonlinearitySpec::affine(1.0, 1.0).unwrap(), 0.0).positive);
    }

    #[test]
    fn sampled_flags_agree_with_analytic_ones() {
        for s in [ppe(3.0, 1.0), ppe(0.5, 0.0), NonlinearitySpec::exponential(1.0).unwrap(), NonlinearitySpec::constant(2.0).unwrap()] {
            let analytic = validate(&s);
            let sampled = sampled_flags(&s, -SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH, SAMPLE_POINTS);
            assert_eq!(analytic.positive, sampled.positive, "{s:?}");
            assert_eq!(analytic.nonnegative, sampled.nonnegative, "{s:?}");
            assert_eq!(analytic.nondecreasing, sampled.nondecreasing, "{s:?}");
            assert_eq!(analytic.strictly_increasing, sampled.strictly_increasing, "{s:?}");
            assert_eq!(analytic.convex_on_positives, sampled.convex_on_positives, "{s:?}");
            assert!(sampled.sampled && !analytic.sampled);
        }
    }

    #[test]
    fn ko_analytic_table() {
        let cases = [
            (ppe(0.5, 1.0), KoStatus::Holds),
            (ppe(1.0, 1.0), KoStatus::Holds),
            (ppe(1.5, 1.0), KoStatus::Fails),
            (ppe(3.0, 1.0), KoStatus::Fails),
            (NonlinearitySpec::exponential(1.0).unwrap(), KoStatus::Fails),
            (NonlinearitySpec::constant(1.0).unwrap(), KoStatus::Holds),
            (NonlinearitySpec::affine(1.0, 1.0).unwrap(), KoStatus::Holds),
        ];
        for (s, want) in cases {
            let v = classify_ko(&s).unwrap();
            assert_eq!(v.status, want, "{s:?}");
            assert_eq!(v.method, KoMethod::Analytic);
        }
    }

    #[test]
    fn ko_rejects_failed_hypotheses() {
        let neg = NonlinearitySpec::constant(-1.0).unwrap();
        match classify_ko(&neg) {
            Err(Error::Hypothesis { flag, .. }) => assert_eq!(flag, "nonnegative"),
            other => panic!("unexpected {other:?}"),
        }
        let bumpy = NonlinearitySpec::tabulated(vec![(0.0, 2.0), (1.0, 1.0), (2.0, 3.0)]).unwrap();
        match classify_ko(&bumpy) {
            Err(Error::Hypothesis { flag, .. }) => assert_eq!(flag, "nondecreasing"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ko_numerical_on_transforms() {
        let t = truncate_below(&ppe(3.0, 1.0), 0.0).unwrap();
        assert_eq!(classify_ko(&t).unwrap().status, KoStatus::Fails);
        let tab = NonlinearitySpec::tabulated(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let v = classify_ko(&tab).unwrap();
        assert_eq!(v.status, KoStatus::Holds);
        assert_eq!(v.method, KoMethod::NumericalExtrapolation);
        let odd = odd_extension(&NonlinearitySpec::exponential(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(classify_ko(&odd).unwrap().status, KoStatus::Fails);
    }

    #[test]
    fn truncation_examples() {
        let vee = NonlinearitySpec::tabulated(vec![(-1.0, 2.0), (0.0, 1.0), (1.0, 2.0)]).unwrap();
        let t = truncate_below(&vee, 0.0).unwrap();
        for x in [-50.0, -3.0, -0.4, -1e-9] {
            assert_eq!(t.eval(x).unwrap(), 1.0);
        }
        for x in [0.0, 0.3, 2.0] {
            assert_eq!(t.eval(x).unwrap(), vee.eval(x).unwrap());
        }
        let inc = ppe(0.5, 1.0);
        let ti = truncate_below(&inc, 3.0).unwrap();
        for x in [-250.0, -7.3, 0.001, 2.99, 10.0] {
            assert_eq!(ti.eval(x).unwrap(), inc.eval(x).unwrap());
        }
    }

    #[test]
    fn truncation_matches_brute_force_min() {
        // (t - 1)^2 + 0.5 tabulated finely
        let knots: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let t = -3.0 + i as f64 * 0.0125;
                (t, (t - 1.0).powi(2) + 0.5)
            })
            .collect();
        let base = NonlinearitySpec::tabulated(knots.clone()).unwrap();
        let tr = truncate_below(&base, 2.0).unwrap();
        for x in [-2.5, -1.0, 0.0, 0.7, 0.99, 1.0, 1.3, 1.9] {
            // piecewise-linear base: the minimum sits on a knot or an endpoint
            let brute = (0..=20_000)
                .map(|j| x + (2.0 - x) * j as f64 / 20_000.0)
                .chain(knots.iter().map(|k| k.0).filter(|&t| t >= x && t <= 2.0))
                .map(|t| base.value(t))
                .fold(f64::INFINITY, f64::min);
            assert!((tr.eval(x).unwrap() - brute).abs() < 1e-9, "x = {x}");
            if x < 1.0 {
                assert!((tr.eval(x).unwrap() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_extension_examples_and_errors() {
        let lin = odd_extension(&NonlinearitySpec::affine(1.0, 1.0).unwrap(), 0.0).unwrap();
        for x in [-3.0, -0.5, 0.0, 2.0] {
            assert_eq!(lin.eval(x).unwrap(), x);
        }
        assert!(matches!(
            odd_extension(&NonlinearitySpec::constant(1.0).unwrap(), 0.0),
            Err(Error::Hypothesis { .. })
        ));
        assert!(matches!(odd_extension(&ppe(0.5, 1.0), 1.0), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn beta_examples() {
        let odd = odd_extension(&NonlinearitySpec::exponential(1.0).unwrap(), 0.0).unwrap();
        let r = check_beta(&odd, &[(0.0, 2.0)]).unwrap();
        let want = E * E - 1.0 - 2.0 * (E - 1.0);
        assert!((r.worst_margin - want).abs() < 1e-12);
        let r = check_beta(&odd, &[(-1.3, 0.0)]).unwrap();
        assert_eq!(r.worst_margin, 0.0);
        let lin = odd_extension(&NonlinearitySpec::affine(1.0, 1.0).unwrap(), 0.0).unwrap();
        let r = check_beta(&lin, &[(-2.0, 1.0), (0.5, 3.0), (-4.0, 9.0)]).unwrap();
        assert!(r.worst_margin.abs() < 1e-12 && r.passed());
        assert!(check_beta(&NonlinearitySpec::constant(1.0).unwrap(), &[(0.0, 1.0)]).is_err());
        assert!(check_beta(&odd, &[(0.0, -1.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let odd = odd_extension(&ppe(2.0, 1.0), 0.5).unwrap();
        let text = serde_json::to_string(&odd).unwrap();
        let back: NonlinearitySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, odd);
        let parsed: NonlinearitySpec = serde_json::from_str(r#"{"family":"power_plus_eps","gamma":3,"eps":1}"#).unwrap();
        assert_eq!(parsed, ppe(3.0, 1.0));
        assert!(serde_json::from_str::<NonlinearitySpec>(r#"{"family":"power_plus_eps","gama":3,"eps":1}"#).is_err());
        assert!(serde_json::from_str::<NonlinearitySpec>(r#"{"family":"exponential","scale":-1}"#).is_err());
        let tr: NonlinearitySpec =
            serde_json::from_str(r#"{"family":"truncated_below","t0":0,"base":{"family":"tabulated","knots":[[-1,2],[0,1],[1,2]]}}"#).unwrap();
        assert_eq!(tr.eval(-5.0).unwrap(), 1.0);
    }
}
