//! The radial problem `φ'' + (c−1)/r·φ' = f(φ)`, `φ'(0) = 0`.
//!
//! [`shoot`] integrates it with an embedded Dormand-Prince 5(4) pair. The
//! origin is singular, so the first step uses the series
//! `φ = a + f(a) r²/(2c) + f'(a) f(a) r⁴/(8c(c+2))`.
//!
//! Near a blow-up the step size in `r` collapses long before `φ` gets large
//! (for `f = eᵗ`, `φ` is only about 70 when `R − r` reaches the resolution of
//! `f64`). Once that happens the integrator switches to `φ` as independent
//! variable, integrating `(r, φ')` against `u` with `φ = φ_s + σ(eᵘ − 1)`.
//! From any point `(r₀, φ₀, ψ₀)` the remaining existence time is sandwiched
//! by the energy integrals
//!
//! ```text
//! ∫_{φ₀}^∞ dφ / √(ψ₀² + 2F(φ; φ₀))  ≤  R − r₀  ≤  ∫_{φ₀}^∞ dφ / √(ψ₀² + (2/c)F(φ; φ₀))
//! ```
//!
//! and the blow-up bracket is the intersection of these intervals, refined
//! as `φ` grows until it is tighter than `bracket_rel_tol·R`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{classify_ko, validate_from, KoStatus, NonlinearitySpec, PropertyFlags};
use crate::quadrature::{self, Direction, QuadOptions};

/// A zero-order term the radial solver can integrate against.
pub trait Forcing {
    fn value(&self, t: f64) -> f64;
    /// `∫ₐᵗ f`.
    fn primitive(&self, a: f64, t: f64) -> Result<f64>;
    fn flags_from(&self, lo: f64) -> PropertyFlags;
    fn label(&self) -> String;
}

impl Forcing for NonlinearitySpec {
    fn value(&self, t: f64) -> f64 {
        NonlinearitySpec::value(self, t)
    }

    fn primitive(&self, a: f64, t: f64) -> Result<f64> {
        NonlinearitySpec::primitive(self, a, t)
    }

    fn flags_from(&self, lo: f64) -> PropertyFlags {
        validate_from(self, lo)
    }

    fn label(&self) -> String {
        NonlinearitySpec::label(self)
    }
}

/// `factor·f` for a positive factor.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a> {
    pub base: &'a NonlinearitySpec,
    pub factor: f64,
}

impl Forcing for Scaled<'_> {
    fn value(&self, t: f64) -> f64 {
        self.factor * self.base.value(t)
    }

    fn primitive(&self, a: f64, t: f64) -> Result<f64> {
        Ok(self.factor * self.base.primitive(a, t)?)
    }

    fn flags_from(&self, lo: f64) -> PropertyFlags {
        validate_from(self.base, lo)
    }

    fn label(&self) -> String {
        format!(r#"{{"scaled":{},"base":{}}}"#, self.factor, self.base.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootConfig {
    /// Dimension-like constant, at least 1.
    pub c: f64,
    /// Initial value `φ(0)`.
    pub a: f64,
    pub r_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest `φ` the solver will follow before giving up on refining.
    pub blowup_cap: f64,
    pub min_step: f64,
    /// Upper bound on accepted steps in `r`; `0` means `r_max / 256`.
    pub max_step: f64,
    /// Target relative width of the blow-up bracket.
    pub bracket_rel_tol: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            c: 1.0,
            a: 0.0,
            r_max: 100.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            blowup_cap: 1e100,
            min_step: 1e-14,
            max_step: 0.0,
            bracket_rel_tol: 1e-8,
        }
    }
}

impl ShootConfig {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        let cfg = ShootConfig {
            c,
            a,
            ..Default::default()
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return bad(format!("c = {} must be at least 1", self.c));
        }
        if !self.a.is_finite() {
            return bad(format!("initial value a = {} must be finite", self.a));
        }
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return bad(format!("r_max = {} must be positive", self.r_max));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("blowup_cap", self.blowup_cap),
            ("min_step", self.min_step),
            ("bracket_rel_tol", self.bracket_rel_tol),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.max_step >= 0.0) {
            return bad(format!("max_step = {} must be nonnegative", self.max_step));
        }
        Ok(())
    }

    fn effective_max_step(&self) -> f64 {
        if self.max_step > 0.0 {
            self.max_step
        } else {
            self.r_max / 256.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProfileStatus {
    /// Integrated up to `r_max` without blowing up.
    Global { r_max: f64 },
    /// Maximal existence radius lies in `[r_lo, r_hi]`.
    BlowUp { r_lo: f64, r_hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub c: f64,
    pub a: f64,
    pub samples: Vec<Sample>,
    pub status: ProfileStatus,
    /// Label of the zero-order term, see [`NonlinearitySpec::label`].
    pub spec_label: String,
}

impl RadialProfile {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("profiles always hold the origin sample")
    }

    pub fn is_global(&self) -> bool {
        matches!(self.status, ProfileStatus::Global { .. })
    }

    /// Midpoint of the blow-up bracket, if any.
    pub fn blowup_radius(&self) -> Option<f64> {
        match self.status {
            ProfileStatus::BlowUp { r_lo, r_hi } => Some(0.5 * (r_lo + r_hi)),
            ProfileStatus::Global { .. } => None,
        }
    }

    /// `r_lo` of the blow-up bracket, or `r_max` for a global profile.
    pub fn radius_lower(&self) -> f64 {
        match self.status {
            ProfileStatus::BlowUp { r_lo, .. } => r_lo,
            ProfileStatus::Global { r_max } => r_max,
        }
    }

    /// Values at an arbitrary `r` in the sampled range.
    ///
    /// `φ` is the cubic Hermite interpolant of `(φ, φ')`, `φ'` that of
    /// `(φ', φ'')` and `φ''` the derivative of the latter, each with the
    /// Fritsch-Carlson slope limiter so that monotone data stay monotone.
    pub fn evaluate(&self, r: f64) -> Result<RadialPoint> {
        let first = self.samples[0].r;
        let last = self.last().r;
        if !(r >= first && r <= last) {
            return Err(Error::Domain(format!("r = {r} outside sampled range [{first}, {last}]")));
        }
        let i = match self.samples.partition_point(|s| s.r <= r) {
            0 => 0,
            p if p >= self.samples.len() => self.samples.len().saturating_sub(2),
            p => p - 1,
        };
        if self.samples.len() == 1 {
            let s = self.samples[0];
            return Ok(RadialPoint {
                r,
                phi: s.phi,
                dphi: s.dphi,
                ddphi: s.ddphi,
                dphi_over_r: s.ddphi,
            });
        }
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let h = s1.r - s0.r;
        let t = (r - s0.r) / h;
        let phi = Hermite::new(s0.phi, s1.phi, s0.dphi, s1.dphi, h).value(t);
        let dcurve = Hermite::new(s0.dphi, s1.dphi, s0.ddphi, s1.ddphi, h);
        let dphi = dcurve.value(t);
        let ddphi = dcurve.derivative(t);
        let dphi_over_r = if r == 0.0 {
            s0.ddphi
        } else if s0.r == 0.0 && s0.dphi == 0.0 {
            // dcurve vanishes at 0, so divide the polynomial by r exactly
            dcurve.divided_by_offset(t)
        } else {
            dphi / r
        };
        Ok(RadialPoint {
            r,
            phi,
            dphi,
            ddphi,
            dphi_over_r,
        })
    }

    /// `r,phi,dphi,ddphi` rows followed by a `# status=...` trailer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,phi,dphi,ddphi\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", s.r, s.phi, s.dphi, s.ddphi);
        }
        match self.status {
            ProfileStatus::Global { r_max } => {
                let _ = write!(out, "# status=global r_max={r_max}");
            }
            ProfileStatus::BlowUp { r_lo, r_hi } => {
                let _ = write!(out, "# status=blowup R_lo={r_lo} R_hi={r_hi}");
            }
        }
        let _ = writeln!(out, " c={} a={} spec={}", self.c, self.a, self.spec_label);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,phi,dphi,ddphi" => {}
            other => {
                return Err(Error::Input(format!(
                    "expected header `r,phi,dphi,ddphi`, found {other:?}"
                )))
            }
        }
        let mut samples = Vec::new();
        let mut trailer = None;
        for (lineno, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                trailer = Some(rest.trim().to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Input(format!("line {}: {e} in `{line}`", lineno + 2)))?;
            if cols.len() != 4 {
                return Err(Error::Input(format!("line {}: expected 4 columns", lineno + 2)));
            }
            samples.push(Sample {
                r: cols[0],
                phi: cols[1],
                dphi: cols[2],
                ddphi: cols[3],
            });
        }
        let trailer = trailer.ok_or_else(|| Error::Input("missing `# status=` trailer".into()))?;
        let (fields, spec_label) = match trailer.split_once(" spec=") {
            Some((f, s)) => (f.to_string(), s.to_string()),
            None => (trailer.clone(), String::new()),
        };
        let mut kv = std::collections::HashMap::new();
        for token in fields.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("malformed trailer token `{token}`")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let num = |key: &str| -> Result<f64> {
            kv.get(key)
                .ok_or_else(|| Error::Input(format!("trailer lacks `{key}`")))?
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("trailer field `{key}`: {e}")))
        };
        let status = match kv.get("status").map(String::as_str) {
            Some("global") => ProfileStatus::Global { r_max: num("r_max")? },
            Some("blowup") => ProfileStatus::BlowUp {
                r_lo: num("R_lo")?,
                r_hi: num("R_hi")?,
            },
            other => return Err(Error::Input(format!("unknown status {other:?}"))),
        };
        if samples.is_empty() {
            return Err(Error::Input("profile has no samples".into()));
        }
        Ok(RadialProfile {
            c: num("c")?,
            a: num("a")?,
            samples,
            status,
            spec_label,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    /// `φ'(r)/r`, with the limit `φ''(0)` at the origin.
    pub dphi_over_r: f64,
}

/// Cubic on `[x₀, x₀ + h]` with end values `y` and end slopes `m`.
struct Hermite {
    y0: f64,
    y1: f64,
    m0: f64,
    m1: f64,
    h: f64,
}

impl Hermite {
    fn new(y0: f64, y1: f64, mut m0: f64, mut m1: f64, h: f64) -> Self {
        let delta = (y1 - y0) / h;
        if delta == 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else {
            let alpha = m0 / delta;
            let beta = m1 / delta;
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                m0 = tau * alpha * delta;
                m1 = tau * beta * delta;
            }
        }
        Hermite { y0, y1, m0, m1, h }
    }

    fn value(&self, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y0 + h10 * self.h * self.m0 + h01 * self.y1 + h11 * self.h * self.m1
    }

    fn derivative(&self, t: f64) -> f64 {
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * (self.y0 - self.y1) / self.h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.m0
            + (3.0 * t2 - 2.0 * t) * self.m1
    }

    /// `value(t) / (t·h)` when `y0 = 0`, without cancellation near `t = 0`.
    fn divided_by_offset(&self, t: f64) -> f64 {
        // value = h10·h·m0 + h01·y1 + h11·h·m1, each term divisible by t
        let h10 = t * t - 2.0 * t + 1.0;
        let h01 = -2.0 * t * t + 3.0 * t;
        let h11 = t * t - t;
        (h10 * self.h * self.m0 + h01 * self.y1 + h11 * self.h * self.m1) / self.h
    }
}

// Dormand-Prince 5(4)
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (w, k) in terms {
        out[0] += h * w * k[0];
        out[1] += h * w * k[1];
    }
    out
}

/// One DP5 step; returns the new state, its derivative, and the error vector.
fn dp5_step<F: FnMut(f64, &State) -> State>(rhs: &mut F, x: f64, y: &State, k1: &State, h: f64) -> (State, State, State) {
    let k2 = rhs(x + C2 * h, &axpy(y, &[(A21, k1)], h));
    let k3 = rhs(x + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = rhs(x + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = rhs(x + C5 * h, &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = rhs(x + h, &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    let y_new = axpy(y, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = rhs(x + h, &y_new);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}

fn error_norm(err: &State, y0: &State, y1: &State, rel_tol: f64, abs_tol: f64) -> f64 {
    (0..2)
        .map(|i| err[i].abs() / (abs_tol + rel_tol * y0[i].abs().max(y1[i].abs())))
        .fold(0.0, f64::max)
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

const SWITCH_RATIO: f64 = 1e-3;
const BRACKET_CHECK_GROWTH: f64 = 4.0;
const SERIES_MAX_STEP: f64 = 1e-4;

fn check_shoot_hypotheses<T: Forcing + ?Sized>(f: &T, a: f64) -> Result<()> {
    let flags = f.flags_from(a);
    if let Some(flag) = flags.first_missing(&["nonnegative", "nondecreasing"]) {
        return Err(Error::hypothesis(
            flag,
            format!("radial shooting needs f on [{a}, ∞)"),
        ));
    }
    Ok(())
}

/// Integrates the radial problem with `f` from `φ(0) = cfg.a`.
pub fn shoot<T: Forcing + ?Sized>(f: &T, cfg: &ShootConfig) -> Result<RadialProfile> {
    cfg.check()?;
    check_shoot_hypotheses(f, cfg.a)?;
    Shooter { f, cfg }.run()
}

struct Shooter<'a, T: ?Sized> {
    f: &'a T,
    cfg: &'a ShootConfig,
}

struct Point {
    r: f64,
    phi: f64,
    psi: f64,
}

impl<T: Forcing + ?Sized> Shooter<'_, T> {
    fn sample(&self, r: f64, phi: f64, psi: f64) -> Sample {
        let ddphi = self.f.value(phi) - (self.cfg.c - 1.0) * psi / r;
        Sample {
            r,
            phi,
            dphi: psi,
            ddphi,
        }
    }

    fn run(&self) -> Result<RadialProfile> {
        let cfg = self.cfg;
        let (a, c) = (cfg.a, cfg.c);
        let fa = self.f.value(a);
        if !fa.is_finite() {
            return Err(Error::Domain(format!("f({a}) = {fa}")));
        }
        let delta = 1e-6 * a.abs().max(1.0);
        let slope = ((self.f.value(a + delta) - fa) / delta).max(0.0);
        let alpha = fa / (2.0 * c);
        let beta = slope * fa / (8.0 * c * (c + 2.0));
        let tol = cfg.abs_tol + cfg.rel_tol * a.abs();
        let mut h0 = SERIES_MAX_STEP.min(cfg.r_max);
        if beta > 0.0 {
            h0 = h0.min((tol / beta).powf(0.25));
        }
        let mut samples = vec![Sample {
            r: 0.0,
            phi: a,
            dphi: 0.0,
            ddphi: fa / c,
        }];
        let start = Point {
            r: h0,
            phi: a + alpha * h0 * h0 + beta * h0.powi(4),
            psi: 2.0 * alpha * h0 + 4.0 * beta * h0.powi(3),
        };
        samples.push(self.sample(start.r, start.phi, start.psi));

        let status = match self.integrate_r(start, &mut samples, true)? {
            RPhaseEnd::Reached => ProfileStatus::Global { r_max: cfg.r_max },
            RPhaseEnd::Switch(p) => self.integrate_phi(p, &mut samples)?,
        };
        Ok(RadialProfile {
            c,
            a,
            samples,
            status,
            spec_label: self.f.label(),
        })
    }

    fn integrate_r(&self, start: Point, samples: &mut Vec<Sample>, allow_switch: bool) -> Result<RPhaseEnd> {
        let cfg = self.cfg;
        let c = cfg.c;
        let max_step = cfg.effective_max_step();
        let mut rhs = |r: f64, y: &State| [y[1], self.f.value(y[0]) - (c - 1.0) * y[1] / r];
        let mut r = start.r;
        let mut y = [start.phi, start.psi];
        let mut k1 = rhs(r, &y);
        let mut h = (start.r).min(max_step);
        while r < cfg.r_max {
            let remaining = cfg.r_max - r;
            let last_step = h >= remaining;
            let step = if last_step { remaining } else { h };
            let (y_new, k_new, err) = dp5_step(&mut rhs, r, &y, &k1, step);
            let finite = y_new.iter().chain(&k_new).all(|v| v.is_finite());
            let err = if finite {
                error_norm(&err, &y, &y_new, cfg.rel_tol, cfg.abs_tol)
            } else {
                f64::INFINITY
            };
            if err <= 1.0 {
                r = if last_step { cfg.r_max } else { r + step };
                y = y_new;
                k1 = k_new;
                samples.push(self.sample(r, y[0], y[1]));
                let proposal = step * step_factor(err);
                h = proposal.min(max_step);
                let collapsing = proposal < step && proposal < SWITCH_RATIO * r;
                if allow_switch && y[1] > 0.0 && (collapsing || y[0] > cfg.blowup_cap) && r < cfg.r_max {
                    return Ok(RPhaseEnd::Switch(Point { r, phi: y[0], psi: y[1] }));
                }
            } else {
                h = step * if finite { step_factor(err) } else { 0.25 };
            }
            if h < cfg.min_step && r < cfg.r_max {
                if allow_switch && y[1] > 0.0 {
                    return Ok(RPhaseEnd::Switch(Point { r, phi: y[0], psi: y[1] }));
                }
                return Err(Error::Integration(format!(
                    "step size {h:e} below min_step at r = {r}, φ = {}, φ' = {}",
                    y[0], y[1]
                )));
            }
        }
        Ok(RPhaseEnd::Reached)
    }

    fn integrate_phi(&self, start: Point, samples: &mut Vec<Sample>) -> Result<ProfileStatus> {
        let cfg = self.cfg;
        let c = cfg.c;
        let (r_s, phi_s) = (start.r, start.phi);
        let sigma = phi_s.abs().max(1.0);
        let phi_of = |u: f64| phi_s + sigma * u.exp_m1();
        // y = (r - r_s, ψ); d/du = σeᵘ/ψ · (1, f(φ) − (c−1)ψ/r)
        let mut rhs = |u: f64, y: &State| {
            let dphi_du = sigma * u.exp();
            let r = r_s + y[0];
            let psi = y[1];
            let w = dphi_du / psi;
            [w, w * (self.f.value(phi_of(u)) - (c - 1.0) * psi / r)]
        };
        let mut u = 0.0;
        let mut y = [0.0, start.psi];
        let mut k1 = rhs(u, &y);
        let mut h = 1e-3;
        let mut bracket: Option<(f64, f64)> = None;
        let mut next_check = phi_s;
        loop {
            let phi = phi_of(u);
            let r = r_s + y[0];
            if phi >= next_check {
                next_check = phi_s + BRACKET_CHECK_GROWTH * (phi - phi_s).max(sigma);
                if let Some((lo, hi)) = sandwich_from(self.f, phi, y[1], c)? {
                    let (lo, hi) = (r + lo, r + hi);
                    bracket = Some(match bracket {
                        Some((l, h)) => (l.max(lo), h.min(hi)),
                        None => (lo, hi),
                    });
                }
            }
            if let Some((lo, hi)) = bracket {
                let (lo, hi) = (lo.min(hi), lo.max(hi));
                if lo > cfg.r_max {
                    // blow-up beyond the horizon: finish as a global run
                    return self.final_approach(r, phi, y[1], samples);
                }
                // stop once the bracket is tight and the samples reach it
                let tight = cfg.bracket_rel_tol * hi;
                if hi - lo <= tight && lo - r <= tight {
                    return Ok(ProfileStatus::BlowUp { r_lo: lo, r_hi: hi });
                }
            }
            if phi > cfg.blowup_cap || h < 1e-14 {
                return match bracket {
                    Some((lo, hi)) => Ok(ProfileStatus::BlowUp {
                        r_lo: lo.min(hi),
                        r_hi: lo.max(hi),
                    }),
                    None => Err(Error::Integration(format!(
                        "φ reached {phi:e} at r = {r} without a finite blow-up bound"
                    ))),
                };
            }
            let (y_new, k_new, err) = dp5_step(&mut rhs, u, &y, &k1, h);
            let finite = y_new.iter().chain(&k_new).all(|v| v.is_finite()) && y_new[1] > 0.0;
            let err = if finite {
                error_norm(&err, &y, &y_new, cfg.rel_tol, cfg.abs_tol)
            } else {
                f64::INFINITY
            };
            if err <= 1.0 {
                let r_new = r_s + y_new[0];
                if r_new > cfg.r_max {
                    return self.final_approach(r, phi, y[1], samples);
                }
                u += h;
                y = y_new;
                k1 = k_new;
                if r_new > samples.last().map_or(0.0, |s| s.r) {
                    samples.push(self.sample(r_new, phi_of(u), y[1]));
                }
                h *= step_factor(err);
            } else {
                h *= if finite { step_factor(err) } else { 0.25 };
            }
        }
    }

    fn final_approach(&self, r: f64, phi: f64, psi: f64, samples: &mut Vec<Sample>) -> Result<ProfileStatus> {
        match self.integrate_r(Point { r, phi, psi }, samples, false)? {
            RPhaseEnd::Reached => Ok(ProfileStatus::Global { r_max: self.cfg.r_max }),
            RPhaseEnd::Switch(_) => unreachable!("switching is disabled on the final approach"),
        }
    }
}

enum RPhaseEnd {
    Reached,
    Switch(Point),
}

const TAIL_OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-11,
    max_intervals: 4000,
};
// e^v stays finite for v below ~709
const TAIL_UP_LIMIT: f64 = 700.0;
const TAIL_DOWN_LIMIT: f64 = 760.0;

const SMALL_INCREMENT: f64 = 1e-6;
// extrapolated remainders beyond the overflow point must be this small
// relative to the computed part, with at least this exponential decay rate
const TAIL_EXTRAPOLATION_SHARE: f64 = 1e-6;
const MIN_TAIL_DECAY: f64 = 0.05;

/// Largest `x ≤ hi` up to which `g` is still positive and finite, i.e. its
/// ingredients have not overflowed; `None` if `g(lo)` is not.
fn overflow_point(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let finite = |x: f64| {
        let v = g(x);
        v > 0.0 && v.is_finite()
    };
    if finite(hi) {
        return Some(hi);
    }
    if !finite(lo) {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..64 {
        let m = 0.5 * (a + b);
        if finite(m) {
            a = m;
        } else {
            b = m;
        }
    }
    Some(a)
}

/// `∫_{start}^∞ g` for `g` computable only up to `end`. If the chunked sum
/// has not settled by `end`, the remainder is extrapolated from the local
/// decay rate of `g`; `None` when that remainder is not negligible.
fn tail_to_overflow(mut g: impl FnMut(f64) -> f64, start: f64, end: f64) -> Result<Option<(f64, f64, usize)>> {
    if end <= start + 1.0 {
        return Ok(None);
    }
    let (part, converged) = quadrature::integrate_tail_partial(&mut g, start, Direction::Up, end - start, TAIL_OPTS)?;
    if converged {
        return Ok(Some((part.value, part.error, part.evaluations)));
    }
    let (g_end, g_before) = (g(end), g(end - 1.0));
    let rate = (g_before / g_end).ln();
    let rest = if g_end == 0.0 { 0.0 } else { g_end / rate };
    if !(g_end == 0.0 || rate >= MIN_TAIL_DECAY) || !(rest <= TAIL_EXTRAPOLATION_SHARE * part.value) {
        return Ok(None);
    }
    Ok(Some((part.value + rest, part.error + rest, part.evaluations + 2)))
}

/// `F(φ₀ + d; φ₀)` without losing `d` to rounding in `φ₀ + d`: Simpson's
/// rule once `d` is below `1e-6·max(1, |φ₀|)`.
fn primitive_increment<T: Forcing + ?Sized>(f: &T, phi0: f64, d: f64) -> Result<f64> {
    if d <= SMALL_INCREMENT * phi0.abs().max(1.0) {
        Ok(d / 6.0 * (f.value(phi0) + 4.0 * f.value(phi0 + 0.5 * d) + f.value(phi0 + d)))
    } else {
        f.primitive(phi0, phi0 + d)
    }
}

/// `∫_{φ₀}^∞ dφ / √(ψ₀² + κ F(φ; φ₀))` via `φ = φ₀ + eᵛ`; `None` when the
/// tail does not decay (the integral diverges or is too slow to resolve).
pub fn energy_tail<T: Forcing + ?Sized>(f: &T, phi0: f64, psi0: f64, kappa: f64) -> Result<Option<f64>> {
    let psi_sq = psi0 * psi0;
    let integrand = |v: f64| {
        let d = v.exp();
        if d == 0.0 {
            return 0.0;
        }
        match primitive_increment(f, phi0, d) {
            Ok(big_f) => {
                let denom = psi_sq + kappa * big_f;
                if denom > 0.0 {
                    d / denom.sqrt()
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::NAN,
        }
    };
    let v0 = phi0.abs().max(1.0).ln().min(TAIL_UP_LIMIT - 1.0);
    let Some(v_end) = overflow_point(integrand, v0, TAIL_UP_LIMIT) else {
        return Ok(None);
    };
    let up = match tail_to_overflow(integrand, v0, v_end) {
        Ok(Some((v, _, _))) if v.is_finite() => v,
        Ok(_) | Err(Error::Numerical(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let down = match quadrature::integrate_tail(integrand, v0, Direction::Down, TAIL_DOWN_LIMIT, TAIL_OPTS) {
        Ok(i) if i.value.is_finite() => i.value,
        Ok(_) | Err(Error::Numerical(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(up + down))
}

/// Bounds on the remaining existence time from a point with value `φ₀` and
/// slope `ψ₀ ≥ 0`; `None` if the upper integral diverges.
pub fn sandwich_from<T: Forcing + ?Sized>(f: &T, phi0: f64, psi0: f64, c: f64) -> Result<Option<(f64, f64)>> {
    let Some(upper) = energy_tail(f, phi0, psi0, 2.0 / c)? else {
        return Ok(None);
    };
    let lower = energy_tail(f, phi0, psi0, 2.0)?.unwrap_or(upper);
    Ok(Some((lower.min(upper), upper)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    pub lower: f64,
    pub upper: f64,
    /// Quadrature error estimates of the two integrals.
    pub lower_error: f64,
    pub upper_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Radius {
    Finite(RadiusBounds),
    /// No finite blow-up radius exists.
    Unbounded,
}

impl Radius {
    pub fn bounds(&self) -> Option<&RadiusBounds> {
        match self {
            Radius::Finite(b) => Some(b),
            Radius::Unbounded => None,
        }
    }
}

fn positivity_for_radius<T: Forcing + ?Sized>(f: &T, a: f64) -> Result<()> {
    let flags = f.flags_from(a);
    if let Some(flag) = flags.first_missing(&["positive", "nondecreasing"]) {
        return Err(Error::hypothesis(flag, format!("radius bounds need f on [{a}, ∞)")));
    }
    Ok(())
}

/// `∫ₐ^∞ dφ/√(κ F(φ; a))` through `φ = a + s²`: `[0, 1]` directly and
/// `s = eʷ` beyond.
fn radius_integral<T: Forcing + ?Sized>(f: &T, a: f64, kappa: f64) -> Result<(f64, f64, usize)> {
    let head_integrand = |s: f64| {
        if s == 0.0 {
            return 2.0 / (kappa * f.value(a)).sqrt();
        }
        match primitive_increment(f, a, s * s) {
            Ok(big_f) if big_f > 0.0 => 2.0 * s / (kappa * big_f).sqrt(),
            Ok(_) => f64::INFINITY,
            Err(_) => f64::NAN,
        }
    };
    let head = quadrature::integrate(head_integrand, 0.0, 1.0, TAIL_OPTS)?;
    let tail_integrand = |w: f64| {
        let s2 = (2.0 * w).exp();
        match primitive_increment(f, a, s2) {
            Ok(big_f) if big_f > 0.0 => 2.0 * s2 / (kappa * big_f).sqrt(),
            Ok(_) => f64::INFINITY,
            Err(_) => f64::NAN,
        }
    };
    let diverges = || Error::Numerical(format!("radius integral from a = {a} diverges or decays too slowly"));
    let w_end = overflow_point(tail_integrand, 0.0, 0.5 * TAIL_UP_LIMIT).ok_or_else(diverges)?;
    let (tail, tail_error, evaluations) = tail_to_overflow(tail_integrand, 0.0, w_end)?.ok_or_else(diverges)?;
    Ok((head.value + tail, head.error + tail_error, head.evaluations + evaluations))
}

/// Bounds `∫ₐ^∞ (2F(φ;a))^{-1/2} dφ ≤ R ≤ ∫ₐ^∞ ((2/c)F(φ;a))^{-1/2} dφ` on the
/// blow-up radius of the solution with `φ(0) = a`.
pub fn radius_bounds(spec: &NonlinearitySpec, a: f64, c: f64) -> Result<Radius> {
    if classify_ko(spec)?.status == KoStatus::Holds {
        return Ok(Radius::Unbounded);
    }
    radius_bounds_for(spec, a, c)
}

/// [`radius_bounds`] for any forcing, trusting the caller that it violates
/// the Keller-Osserman condition.
pub fn radius_bounds_for<T: Forcing + ?Sized>(f: &T, a: f64, c: f64) -> Result<Radius> {
    if !(c >= 1.0) {
        return Err(Error::Parameter(format!("c = {c} must be at least 1")));
    }
    positivity_for_radius(f, a)?;
    let (lower, lower_error, n1) = radius_integral(f, a, 2.0)?;
    let (upper, upper_error, n2) = radius_integral(f, a, 2.0 / c)?;
    Ok(Radius::Finite(RadiusBounds {
        lower,
        upper,
        lower_error,
        upper_error,
        evaluations: n1 + n2,
    }))
}

/// Exact blow-up radius for `c = 1`, `∫ₐ^∞ (2F(φ;a))^{-1/2} dφ`, computed
/// through `φ = a + eᵛ` (a different route from [`radius_bounds`]).
pub fn energy_radius_c1(spec: &NonlinearitySpec, a: f64) -> Result<Radius> {
    if classify_ko(spec)?.status == KoStatus::Holds {
        return Ok(Radius::Unbounded);
    }
    positivity_for_radius(spec, a)?;
    match energy_tail(spec, a, 0.0, 2.0)? {
        Some(r) => Ok(Radius::Finite(RadiusBounds {
            lower: r,
            upper: r,
            lower_error: 0.0,
            upper_error: 0.0,
            evaluations: 0,
        })),
        None => Err(Error::Numerical(format!(
            "energy integral from a = {a} did not converge"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BlowupEstimate {
    Global { r_max: f64 },
    BlowUp { radius: f64, r_lo: f64, r_hi: f64 },
}

impl BlowupEstimate {
    pub fn radius(&self) -> Option<f64> {
        match self {
            BlowupEstimate::BlowUp { radius, .. } => Some(*radius),
            BlowupEstimate::Global { .. } => None,
        }
    }
}

/// Shoots and reports the blow-up radius (midpoint of the bracket).
pub fn estimate_blowup_radius<T: Forcing + ?Sized>(f: &T, cfg: &ShootConfig) -> Result<BlowupEstimate> {
    let profile = shoot(f, cfg)?;
    Ok(match profile.status {
        ProfileStatus::Global { r_max } => BlowupEstimate::Global { r_max },
        ProfileStatus::BlowUp { r_lo, r_hi } => BlowupEstimate::BlowUp {
            radius: 0.5 * (r_lo + r_hi),
            r_lo,
            r_hi,
        },
    })
}

/// Worst violation of each qualitative property of the profile; a value
/// `≤ 0` means the property holds at every sample within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub samples: usize,
    /// `φ' ≥ 0`.
    pub nondecreasing: f64,
    /// `φ'' ≥ 0`.
    pub convex: f64,
    /// `φ'(s)/s ≤ f(φ(s))/c`.
    pub slope_bound: f64,
    /// `f(φ)/c ≤ φ''`.
    pub curvature_lower: f64,
    /// `φ'' ≤ f(φ)`.
    pub curvature_upper: f64,
    /// `φ'' ≥ φ'/s`.
    pub convexity_ordering: f64,
    /// `r^{c−1}φ'` nondecreasing between samples.
    pub flux_monotone: f64,
    /// `φ` nondecreasing between samples.
    pub values_monotone: f64,
    pub tolerance: f64,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn violations(&self) -> Vec<(&'static str, f64)> {
        [
            ("nondecreasing", self.nondecreasing),
            ("convex", self.convex),
            ("slope_bound", self.slope_bound),
            ("curvature_lower", self.curvature_lower),
            ("curvature_upper", self.curvature_upper),
            ("convexity_ordering", self.convexity_ordering),
            ("flux_monotone", self.flux_monotone),
            ("values_monotone", self.values_monotone),
        ]
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .collect()
    }
}

/// Checks every sample against the monotonicity/convexity estimates. Each
/// comparison is scaled by `max(1, |f(φ)|)` and allowed `tol` of slack.
pub fn check_invariants<T: Forcing + ?Sized>(profile: &RadialProfile, f: &T, tol: f64) -> InvariantReport {
    let c = profile.c;
    let mut rep = InvariantReport {
        samples: profile.samples.len(),
        nondecreasing: f64::NEG_INFINITY,
        convex: f64::NEG_INFINITY,
        slope_bound: f64::NEG_INFINITY,
        curvature_lower: f64::NEG_INFINITY,
        curvature_upper: f64::NEG_INFINITY,
        convexity_ordering: f64::NEG_INFINITY,
        flux_monotone: f64::NEG_INFINITY,
        values_monotone: f64::NEG_INFINITY,
        tolerance: tol,
    };
    let upd = |slot: &mut f64, excess: f64| *slot = slot.max(excess);
    for (i, s) in profile.samples.iter().enumerate() {
        let fv = f.value(s.phi);
        let scale = fv.abs().max(1.0);
        let slack = tol * scale;
        upd(&mut rep.nondecreasing, -s.dphi - slack);
        upd(&mut rep.convex, -s.ddphi - slack);
        upd(&mut rep.curvature_lower, fv / c - s.ddphi - slack);
        upd(&mut rep.curvature_upper, s.ddphi - fv - slack);
        if s.r > 0.0 {
            let ratio = s.dphi / s.r;
            upd(&mut rep.slope_bound, ratio - fv / c - slack);
            upd(&mut rep.convexity_ordering, ratio - s.ddphi - slack);
        }
        if i > 0 {
            let p = &profile.samples[i - 1];
            let flux = |x: &Sample| x.r.powf(c - 1.0) * x.dphi;
            let (f0, f1) = (flux(p), flux(s));
            upd(&mut rep.flux_monotone, f0 - f1 - tol * f0.abs().max(1.0));
            upd(&mut rep.values_monotone, p.phi - s.phi - tol * p.phi.abs().max(1.0));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn exp1() -> NonlinearitySpec {
        NonlinearitySpec::exponential(1.0).unwrap()
    }

    #[test]
    fn dp5_has_fifth_order_accuracy() {
        // y' = y on [0, 1] with fixed steps
        let mut rhs = |_x: f64, y: &State| [y[0], 0.0];
        let run = |n: usize, rhs: &mut dyn FnMut(f64, &State) -> State| {
            let h = 1.0 / n as f64;
            let mut y = [1.0, 0.0];
            let mut x = 0.0;
            for _ in 0..n {
                let k1 = rhs(x, &y);
                let mut wrapped = |x: f64, y: &State| rhs(x, y);
                y = dp5_step(&mut wrapped, x, &y, &k1, h).0;
                x += h;
            }
            (y[0] - 1f64.exp()).abs()
        };
        let e1 = run(10, &mut rhs);
        let e2 = run(20, &mut rhs);
        let order = (e1 / e2).log2();
        assert!(order > 4.7 && order < 5.5, "observed order {order}");
    }

    #[test]
    fn config_validation() {
        assert!(ShootConfig::new(0.5, 0.0).is_err());
        assert!(ShootConfig::new(-3.0, 0.0).is_err());
        assert!(ShootConfig::new(1.0, f64::NAN).is_err());
        assert!(ShootConfig::new(2.0, 1.0).unwrap().with_r_max(-1.0).check().is_err());
    }

    #[test]
    fn constant_forcing_gives_the_quadratic() {
        let f = NonlinearitySpec::constant(0.8).unwrap();
        for k in [1.0, 2.0, 3.0] {
            let cfg = ShootConfig::new(k, 5.0).unwrap().with_r_max(10.0);
            let p = shoot(&f, &cfg).unwrap();
            assert!(p.is_global());
            assert_eq!(p.last().r, 10.0);
            for s in &p.samples {
                let exact = 5.0 + 0.8 * s.r * s.r / (2.0 * k);
                assert!((s.phi - exact).abs() <= 1e-10, "k={k} r={} err {}", s.r, s.phi - exact);
            }
        }
    }

    #[test]
    fn exponential_blows_up_at_pi_over_root_two() {
        let cfg = ShootConfig::new(1.0, 0.0).unwrap();
        let p = shoot(&exp1(), &cfg).unwrap();
        let ProfileStatus::BlowUp { r_lo, r_hi } = p.status else {
            panic!("expected blow-up, got {:?}", p.status);
        };
        let exact = 2.0 * FRAC_PI_2 / SQRT_2;
        assert!(r_hi - r_lo <= 1e-8 * r_hi, "bracket [{r_lo}, {r_hi}]");
        assert!((0.5 * (r_lo + r_hi) - exact).abs() < 1e-7, "R = {}", 0.5 * (r_lo + r_hi));
        // closed form φ = −2 ln cos(r/√2)
        for s in p.samples.iter().filter(|s| s.r < 2.0) {
            let exact_phi = -2.0 * (s.r / SQRT_2).cos().ln();
            assert!((s.phi - exact_phi).abs() < 1e-8 * exact_phi.max(1.0), "r = {}", s.r);
        }
    }

    #[test]
    fn affine_solution_is_cosh() {
        let f = NonlinearitySpec::affine(1.0, 1.0).unwrap();
        let cfg = ShootConfig::new(1.0, 0.0).unwrap().with_r_max(10.0);
        let p = shoot(&f, &cfg).unwrap();
        assert!(p.is_global());
        for s in &p.samples {
            let exact = s.r.cosh() - 1.0;
            assert!((s.phi - exact).abs() <= 1e-8 * exact.max(1.0), "r = {}", s.r);
        }
    }

    #[test]
    fn radius_bounds_for_exponential() {
        let rb = radius_bounds(&exp1(), 0.0, 1.0).unwrap();
        let b = rb.bounds().unwrap();
        let exact = std::f64::consts::PI / SQRT_2;
        assert!((b.lower - exact).abs() < 1e-9 && (b.upper - exact).abs() < 1e-9, "{b:?}");
        let e = energy_radius_c1(&exp1(), 0.0).unwrap();
        assert!((e.bounds().unwrap().lower - exact).abs() < 1e-9);
        let rb4 = radius_bounds(&exp1(), 0.3, 4.0).unwrap();
        let b4 = rb4.bounds().unwrap();
        assert!((b4.upper - 2.0 * b4.lower).abs() < 1e-9 * b4.upper);
        assert_eq!(radius_bounds(&NonlinearitySpec::constant(1.0).unwrap(), 0.0, 1.0).unwrap(), Radius::Unbounded);
    }

    #[test]
    fn csv_round_trip() {
        let cfg = ShootConfig::new(2.0, 0.5).unwrap();
        let p = shoot(&exp1(), &cfg).unwrap();
        let back = RadialProfile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back, p);
        assert!(RadialProfile::from_csv("r,phi\n1,2\n").is_err());
        assert!(RadialProfile::from_csv("r,phi,dphi,ddphi\n0,0,0,1\n").is_err());
    }

    #[test]
    fn interpolation_reproduces_the_quadratic() {
        let f = NonlinearitySpec::constant(0.6).unwrap();
        let p = shoot(&f, &ShootConfig::new(3.0, 2.0).unwrap().with_r_max(10.0)).unwrap();
        for r in [0.0, 1e-9, 0.0123, 1.7, 4.41, 9.999, 10.0] {
            let v = p.evaluate(r).unwrap();
            assert!((v.phi - (2.0 + 0.1 * r * r)).abs() < 1e-10, "r = {r}");
            assert!((v.dphi - 0.2 * r).abs() < 1e-10);
            assert!((v.ddphi - 0.2).abs() < 1e-9);
            assert!((v.dphi_over_r - 0.2).abs() < 1e-9);
        }
        assert!(matches!(p.evaluate(10.5), Err(Error::Domain(_))));
        assert!(p.evaluate(-1.0).is_err());
    }

    #[test]
    fn interpolation_tracks_the_exponential_solution() {
        let cfg = ShootConfig::new(1.0, 0.0).unwrap().with_max_step(1e-3);
        let p = shoot(&exp1(), &cfg).unwrap();
        for r in [0.05, 0.5, 1.0, 1.5, 2.0] {
            let v = p.evaluate(r).unwrap();
            let cos = (r / SQRT_2).cos();
            assert!((v.phi + 2.0 * cos.ln()).abs() < 1e-8, "r = {r}");
            assert!((v.dphi - SQRT_2 * (r / SQRT_2).tan()).abs() < 1e-7, "r = {r}");
            assert!((v.ddphi - 1.0 / (cos * cos)).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn samples_reach_the_blowup_bracket() {
        let f = NonlinearitySpec::power_plus_eps(3.0, 1.0).unwrap();
        for c in [1.0, 2.0] {
            let p = shoot(&f, &ShootConfig::new(c, 1.0).unwrap()).unwrap();
            let ProfileStatus::BlowUp { r_lo, r_hi } = p.status else { panic!() };
            assert!(r_lo - p.last().r <= 1e-8 * r_hi);
            assert!(p.samples.windows(2).all(|w| w[0].r < w[1].r));
        }
    }

    #[test]
    fn hypothesis_failure_names_the_flag() {
        let f = NonlinearitySpec::constant(-1.0).unwrap();
        let err = shoot(&f, &ShootConfig::new(1.0, 0.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { ref flag, .. } if flag == "nonnegative"), "{err}");
    }
}
