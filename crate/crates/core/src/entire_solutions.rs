//! Radial candidates `Φ(x) = φ(|x|)` for fully nonlinear equations, their
//! residuals, comparison checks, and existence/non-existence certificates.
//!
//! For `r = |x| > 0` the Hessian of a radial function is
//! `(φ'/r)·I + (φ'' − φ'/r)·(x/r)⊗(x/r)`, with the simple eigenvalue `φ''`
//! and `φ'/r` repeated `n − 1` times. When `φ'' ≥ φ'/r ≥ 0` the top `k`
//! eigenvalues are therefore `φ''` and `k − 1` copies of `φ'/r`, and
//! `𝒫⁺ₖ(D²Φ) = φ'' + (k−1)φ'/r` is exactly the radial operator with `c = k`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixops::{mminus, mplus_01, pplus_k, PucciParams, SymMatrix};
use crate::nonlinearity::{classify_ko, validate, validate_from, KoStatus, KoVerdict, NonlinearitySpec};
use crate::radial_ode::{radius_bounds_for, shoot, Radius, RadialProfile, Scaled, ShootConfig};

/// Slack allowed in pointwise comparisons, scaled by `max(1, |value|)`.
pub const POINTWISE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    PPlusK { k: usize },
    MPlus01,
    MMinus { params: PucciParams },
}

impl Operator {
    pub fn apply(&self, x: &SymMatrix) -> Result<f64> {
        match self {
            Operator::PPlusK { k } => pplus_k(x, *k),
            Operator::MPlus01 => Ok(mplus_01(x)),
            Operator::MMinus { params } => Ok(mminus(x, params)),
        }
    }

    fn check_dimension(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Parameter("dimension n must be at least 1".into()));
        }
        if let Operator::PPlusK { k } = self {
            if *k == 0 || *k > n {
                return Err(Error::Parameter(format!("k = {k} must lie in [1, {n}]")));
            }
        }
        Ok(())
    }

    /// Whether the candidate is meant to solve the equation (`true`) or only
    /// to be a subsolution (`false`).
    fn expects_equality(&self) -> bool {
        !matches!(self, Operator::MPlus01)
    }
}

/// `Φ(x) = φ(|x|)` tested against `Op(D²Φ) = f(Φ)` in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireCandidate {
    pub profile: RadialProfile,
    pub n: usize,
    pub operator: Operator,
    /// Right-hand side of the equation (not necessarily the one the profile
    /// was shot with).
    pub spec: NonlinearitySpec,
}

impl EntireCandidate {
    pub fn new(profile: RadialProfile, n: usize, operator: Operator, spec: NonlinearitySpec) -> Result<Self> {
        operator.check_dimension(n)?;
        Ok(EntireCandidate {
            profile,
            n,
            operator,
            spec,
        })
    }

    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.profile.evaluate(norm(x))?.phi)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `D²Φ(x)` for `Φ(x) = φ(|x|)`.
pub fn hessian_radial(profile: &RadialProfile, x: &[f64]) -> Result<SymMatrix> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Parameter("point must have at least one coordinate".into()));
    }
    let r = norm(x);
    let v = profile.evaluate(r)?;
    if r == 0.0 {
        return Ok(SymMatrix::scaled_identity(n, v.ddphi));
    }
    let unit: Vec<f64> = x.iter().map(|xi| xi / r).collect();
    Ok(SymMatrix::identity_plus_rank_one(v.dphi_over_r, v.ddphi - v.dphi_over_r, &unit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub r: f64,
    pub op: f64,
    pub f: f64,
}

impl ResidualPoint {
    pub fn residual(&self) -> f64 {
        self.op - self.f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub points: Vec<ResidualPoint>,
    /// `max |Op(D²Φ) − f(Φ)|`.
    pub max_abs: f64,
    /// `max (f(Φ) − Op(D²Φ))⁺`, the failure of the subsolution inequality.
    pub max_defect: f64,
    pub worst_r: f64,
}

impl ResidualReport {
    /// The figure of merit for `op`: `max_abs` for equations,
    /// `max_defect` for subsolutions.
    pub fn for_operator(&self, op: &Operator) -> f64 {
        if op.expects_equality() {
            self.max_abs
        } else {
            self.max_defect
        }
    }
}

pub fn residual(cand: &EntireCandidate, points: &[Vec<f64>]) -> Result<ResidualReport> {
    let mut out = Vec::with_capacity(points.len());
    let (mut max_abs, mut max_defect, mut worst_r) = (0.0_f64, 0.0_f64, 0.0);
    for x in points {
        if x.len() != cand.n {
            return Err(Error::Parameter(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                cand.n
            )));
        }
        let r = norm(x);
        let phi = cand.profile.evaluate(r)?.phi;
        let op = cand.operator.apply(&hessian_radial(&cand.profile, x)?)?;
        let f = cand.spec.value(phi);
        let p = ResidualPoint { r, op, f };
        if p.residual().abs() > max_abs {
            max_abs = p.residual().abs();
            worst_r = r;
        }
        max_defect = max_defect.max(f - op);
        out.push(p);
    }
    Ok(ResidualReport {
        points: out,
        max_abs,
        max_defect,
        worst_r,
    })
}

/// `φ''(r) ≥ φ'(r)/r` at every sample, the ordering under which the top
/// eigenvalues of `D²Φ` are `φ''` followed by `φ'/r`.
pub fn verify_convexity_ordering(profile: &RadialProfile) -> bool {
    profile
        .samples
        .iter()
        .filter(|s| s.r > 0.0)
        .all(|s| s.ddphi >= s.dphi / s.r - POINTWISE_TOL * s.ddphi.abs().max(1.0))
}

/// Uniform random points in the closed ball of radius `radius` in `ℝⁿ`.
pub fn random_ball_points<R: Rng + ?Sized>(n: usize, radius: f64, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let len = norm(&v);
            let rho = radius * rng.random::<f64>().powf(1.0 / n as f64);
            for c in &mut v {
                *c *= rho / len;
            }
            v
        })
        .collect()
}

/// Values of a candidate subsolution at points of a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSamples {
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl GridSamples {
    pub fn new(radius: f64, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Input(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !(norm(p) < radius)) {
            return Err(Error::Domain(format!("point at |x| = {} outside the ball of radius {radius}", norm(p))));
        }
        Ok(GridSamples { radius, points, values })
    }

    /// `count` points `rᵢ = radius·i/count` along the first axis of `ℝⁿ`,
    /// valued by `profile`.
    pub fn radial(profile: &RadialProfile, n: usize, radius: f64, count: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let r = radius * i as f64 / count as f64;
            let mut x = vec![0.0; n.max(1)];
            x[0] = r;
            values.push(profile.evaluate(r)?.phi);
            points.push(x);
        }
        Self::new(radius, points, values)
    }

    pub fn shifted(&self, delta: f64) -> Self {
        GridSamples {
            radius: self.radius,
            points: self.points.clone(),
            values: self.values.iter().map(|v| v + delta).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub r: f64,
    pub u: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl ComparisonReport {
    pub fn violation_fraction(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.violations.len() as f64 / self.checked as f64
        }
    }
}

/// Checks `u ≤ Φ` pointwise on `B_R`. Violations are data: they mean `u`
/// is not a subsolution or the hypotheses of the comparison fail.
pub fn comparison_experiment(u: &GridSamples, sup: &EntireCandidate) -> Result<ComparisonReport> {
    let mut violations = Vec::new();
    for (index, (x, &uv)) in u.points.iter().zip(&u.values).enumerate() {
        let r = norm(x);
        let phi = sup.profile.evaluate(r)?.phi;
        if uv > phi + POINTWISE_TOL * phi.abs().max(1.0) {
            violations.push(Violation { index, r, u: uv, phi });
        }
    }
    Ok(ComparisonReport {
        checked: u.points.len(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Exists,
    NotExists,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DichotomyOptions {
    /// Initial value of the shot profile.
    pub a: f64,
    /// Radius of the ball on which an existence candidate is checked.
    pub r_max: f64,
    /// Step cap for the profile; `0` means `r_max·1e-4`, dense enough for
    /// the interpolated Hessian to be accurate.
    pub max_step: f64,
    pub residual_points: usize,
    pub seed: u64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions {
            a: 0.0,
            r_max: 10.0,
            max_step: 0.0,
            residual_points: 1000,
            seed: 0,
        }
    }
}

impl DichotomyOptions {
    fn shoot_config(&self, c: f64) -> Result<ShootConfig> {
        let step = if self.max_step > 0.0 { self.max_step } else { self.r_max * 1e-4 };
        let cfg = ShootConfig::new(c, self.a)?.with_r_max(self.r_max).with_max_step(step);
        cfg.check()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyCertificate {
    pub verdict: Verdict,
    pub ko: KoVerdict,
    /// Upper bound on the blow-up radius of every radial solution from `a`.
    pub radius_bound: Option<f64>,
    pub radius_lower: Option<f64>,
    pub residual_max: Option<f64>,
    /// Path of the exported profile, filled in by callers that write it.
    pub profile_csv: Option<String>,
    pub operator: Operator,
    pub n: usize,
    pub a: f64,
    /// The constant `c` of the radial problem that was solved or bounded.
    pub c: f64,
    pub convexity_ordering: Option<bool>,
    pub residual_points: Option<usize>,
    pub seed: u64,
    /// For the inf-operator: whether `n ≤ 1 + Λ/λ`.
    pub dimension_condition: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dichotomy {
    pub certificate: DichotomyCertificate,
    pub candidate: Option<EntireCandidate>,
}

fn construction_context(operator: &Operator) -> &'static str {
    match operator {
        Operator::PPlusK { .. } => "the partial-trace existence dichotomy",
        Operator::MPlus01 => "the degenerate maximal Pucci existence dichotomy",
        Operator::MMinus { .. } => "the Pucci inf-operator construction",
    }
}

fn require(flags: &crate::nonlinearity::PropertyFlags, names: &[&'static str], context: String) -> Result<()> {
    match flags.first_missing(names) {
        Some(flag) => Err(Error::hypothesis(flag, context)),
        None => Ok(()),
    }
}

/// Decides whether `Op(D²u) = f(u)` (or `≥` for `MPlus01`) has an entire
/// solution in `ℝⁿ`, with numerical evidence either way.
pub fn dichotomy(spec: &NonlinearitySpec, operator: Operator, n: usize, opts: &DichotomyOptions) -> Result<Dichotomy> {
    operator.check_dimension(n)?;
    let (c_exist, c_bound, required): (f64, f64, &[&'static str]) = match operator {
        Operator::PPlusK { k } => (k as f64, k as f64, &["positive", "nondecreasing"]),
        Operator::MPlus01 => (1.0, n as f64, &["positive", "strictly_increasing"]),
        Operator::MMinus { .. } => {
            return Err(Error::Parameter(
                "the inf-operator is handled by construct_pucci_inf".into(),
            ))
        }
    };
    let ko = classify_ko(spec)?;
    let base = |verdict, c| DichotomyCertificate {
        verdict,
        ko: ko.clone(),
        radius_bound: None,
        radius_lower: None,
        residual_max: None,
        profile_csv: None,
        operator,
        n,
        a: opts.a,
        c,
        convexity_ordering: None,
        residual_points: None,
        seed: opts.seed,
        dimension_condition: None,
    };
    match ko.status {
        KoStatus::Inconclusive => Ok(Dichotomy {
            certificate: base(Verdict::Inconclusive, c_exist),
            candidate: None,
        }),
        KoStatus::Holds => {
            let ctx = format!("{} needs f on [{}, ∞)", construction_context(&operator), opts.a);
            require(&validate_from(spec, opts.a), required, ctx)?;
            let profile = shoot(spec, &opts.shoot_config(c_exist)?)?;
            if !profile.is_global() {
                return Err(Error::Numerical(format!(
                    "profile from a = {} blew up near r = {:?} although the growth condition holds",
                    opts.a,
                    profile.blowup_radius()
                )));
            }
            let ordering = verify_convexity_ordering(&profile);
            let cand = EntireCandidate::new(profile, n, operator, spec.clone())?;
            let mut rng = StdRng::seed_from_u64(opts.seed);
            let points = random_ball_points(n, opts.r_max, opts.residual_points, &mut rng);
            let report = residual(&cand, &points)?;
            let mut cert = base(Verdict::Exists, c_exist);
            cert.residual_max = Some(report.for_operator(&operator));
            cert.convexity_ordering = Some(ordering);
            cert.residual_points = Some(points.len());
            Ok(Dichotomy {
                certificate: cert,
                candidate: Some(cand),
            })
        }
        KoStatus::Fails => {
            let ctx = format!("{} needs f on ℝ", construction_context(&operator));
            require(&validate(spec), required, ctx)?;
            let mut cert = base(Verdict::NotExists, c_bound);
            match radius_bounds_for(spec, opts.a, c_bound)? {
                Radius::Finite(b) => {
                    cert.radius_bound = Some(b.upper);
                    cert.radius_lower = Some(b.lower);
                }
                Radius::Unbounded => {
                    return Err(Error::Numerical("radius bound is infinite although the growth condition fails".into()))
                }
            }
            Ok(Dichotomy {
                certificate: cert,
                candidate: None,
            })
        }
    }
}

/// Result of [`construct_pucci_inf`].
#[derive(Debug, Clone, PartialEq)]
pub enum PucciInf {
    /// A global radial solution of `ℳ⁻λ,Λ(D²Φ) = f(Φ)`.
    Candidate {
        ko: KoVerdict,
        candidate: EntireCandidate,
        report: ResidualReport,
    },
    /// Every radial solution blows up; `radius` bounds where.
    NotExists {
        ko: KoVerdict,
        radius: Radius,
        /// Whether `n ≤ 1 + Λ/λ`, the dimension range in which non-existence
        /// extends to all (not only radial) solutions.
        dimension_condition: bool,
    },
    Inconclusive { ko: KoVerdict },
}

/// For a convex nondecreasing radial profile every Hessian eigenvalue is
/// nonnegative, so `ℳ⁻λ,Λ(D²Φ) = λ(φ'' + (n−1)φ'/r)`: shoot with `c = n`
/// and forcing `f/λ`.
pub fn construct_pucci_inf(spec: &NonlinearitySpec, n: usize, params: PucciParams, opts: &DichotomyOptions) -> Result<PucciInf> {
    let operator = Operator::MMinus { params };
    operator.check_dimension(n)?;
    let ctx = format!("{} needs f on [{}, ∞)", construction_context(&operator), opts.a);
    require(&validate_from(spec, opts.a), &["nonnegative", "nondecreasing"], ctx)?;
    let ko = classify_ko(spec)?;
    let forcing = Scaled {
        base: spec,
        factor: 1.0 / params.lambda_lo(),
    };
    match ko.status {
        KoStatus::Inconclusive => Ok(PucciInf::Inconclusive { ko }),
        KoStatus::Holds => {
            let profile = shoot(&forcing, &opts.shoot_config(n as f64)?)?;
            if !profile.is_global() {
                return Err(Error::Numerical(format!(
                    "profile from a = {} blew up although the growth condition holds",
                    opts.a
                )));
            }
            let candidate = EntireCandidate::new(profile, n, operator, spec.clone())?;
            let mut rng = StdRng::seed_from_u64(opts.seed);
            let points = random_ball_points(n, opts.r_max, opts.residual_points, &mut rng);
            let report = residual(&candidate, &points)?;
            Ok(PucciInf::Candidate { ko, candidate, report })
        }
        KoStatus::Fails => {
            let radius = radius_bounds_for(&forcing, opts.a, n as f64)?;
            Ok(PucciInf::NotExists {
                ko,
                radius,
                dimension_condition: params.liouville_dimension_ok(n),
            })
        }
    }
}

impl PucciInf {
    /// The outcome in certificate form, as [`dichotomy`] reports it.
    pub fn into_dichotomy(self, n: usize, params: PucciParams, opts: &DichotomyOptions) -> Dichotomy {
        let operator = Operator::MMinus { params };
        let (verdict, ko) = match &self {
            PucciInf::Candidate { ko, .. } => (Verdict::Exists, ko.clone()),
            PucciInf::NotExists { ko, .. } => (Verdict::NotExists, ko.clone()),
            PucciInf::Inconclusive { ko } => (Verdict::Inconclusive, ko.clone()),
        };
        let mut cert = DichotomyCertificate {
            verdict,
            ko,
            radius_bound: None,
            radius_lower: None,
            residual_max: None,
            profile_csv: None,
            operator,
            n,
            a: opts.a,
            c: n as f64,
            convexity_ordering: None,
            residual_points: None,
            seed: opts.seed,
            dimension_condition: Some(params.liouville_dimension_ok(n)),
        };
        let candidate = match self {
            PucciInf::Candidate { candidate, report, .. } => {
                cert.residual_max = Some(report.max_abs);
                cert.residual_points = Some(report.points.len());
                cert.convexity_ordering = Some(verify_convexity_ordering(&candidate.profile));
                Some(candidate)
            }
            PucciInf::NotExists { radius, .. } => {
                if let Some(b) = radius.bounds() {
                    cert.radius_bound = Some(b.upper);
                    cert.radius_lower = Some(b.lower);
                }
                None
            }
            PucciInf::Inconclusive { .. } => None,
        };
        Dichotomy {
            certificate: cert,
            candidate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixops::eigenvalues;
    use crate::radial_ode::{ProfileStatus, Sample};
    use std::f64::consts::PI;

    fn constant_profile(eps: f64, c: f64, a: f64) -> RadialProfile {
        let f = NonlinearitySpec::constant(eps).unwrap();
        shoot(&f, &ShootConfig::new(c, a).unwrap().with_r_max(10.0)).unwrap()
    }

    #[test]
    fn constant_profile_hessian_is_scalar() {
        let p = constant_profile(0.9, 3.0, 1.0);
        for x in [vec![0.0, 0.0, 0.0, 0.0], vec![1.0, -2.0, 0.5, 3.0], vec![0.0, 0.0, 0.0, 1e-6]] {
            let h = hessian_radial(&p, &x).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 0.3 } else { 0.0 };
                    assert!((h.get(i, j) - want).abs() < 1e-10, "{x:?} ({i},{j}) = {}", h.get(i, j));
                }
            }
        }
    }

    #[test]
    fn hessian_at_origin_uses_second_derivative() {
        let f = NonlinearitySpec::exponential(1.0).unwrap();
        let p = shoot(&f, &ShootConfig::new(2.0, 0.5).unwrap()).unwrap();
        let h = hessian_radial(&p, &[0.0, 0.0, 0.0]).unwrap();
        let want = 0.5_f64.exp() / 2.0;
        assert_eq!(h, SymMatrix::scaled_identity(3, want));
    }

    #[test]
    fn hessian_eigenstructure() {
        let f = NonlinearitySpec::power_plus_eps(2.0, 1.0).unwrap();
        let p = shoot(&f, &ShootConfig::new(2.0, 0.0).unwrap()).unwrap();
        let x = [0.3, -0.4, 0.2];
        let r = norm(&x);
        let v = p.evaluate(r).unwrap();
        let mut want = vec![v.ddphi, v.dphi / r, v.dphi / r];
        want.sort_by(f64::total_cmp);
        let got = eigenvalues(&hessian_radial(&p, &x).unwrap());
        for (g, w) in got.values().iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
        assert!(hessian_radial(&p, &[1e3, 0.0, 0.0]).is_err());
    }

    #[test]
    fn residuals_of_constant_candidates() {
        let f = NonlinearitySpec::constant(0.7).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let pts = random_ball_points(3, 10.0, 100, &mut rng);
        let good = EntireCandidate::new(constant_profile(0.7, 2.0, 0.0), 3, Operator::PPlusK { k: 2 }, f.clone()).unwrap();
        assert!(residual(&good, &pts).unwrap().max_abs <= 1e-10);
        // c = 2 profile under 𝒫⁺₁ sees only φ'' = ε/2
        let bad = EntireCandidate::new(constant_profile(0.7, 2.0, 0.0), 3, Operator::PPlusK { k: 1 }, f).unwrap();
        let rep = residual(&bad, &pts).unwrap();
        for p in &rep.points {
            assert!((p.residual() + 0.35).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_residual_inside_the_blowup_ball() {
        let f = NonlinearitySpec::exponential(1.0).unwrap();
        let cfg = ShootConfig::new(1.0, 0.0).unwrap().with_max_step(2e-4);
        let p = shoot(&f, &cfg).unwrap();
        let big_r = p.blowup_radius().unwrap();
        let cand = EntireCandidate::new(p, 3, Operator::PPlusK { k: 1 }, f).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let pts = random_ball_points(3, 0.9 * big_r, 300, &mut rng);
        let rep = residual(&cand, &pts).unwrap();
        assert!(rep.max_abs <= 1e-6, "max residual {} at r = {}", rep.max_abs, rep.worst_r);
    }

    #[test]
    fn convexity_ordering_checks() {
        assert!(verify_convexity_ordering(&constant_profile(1.0, 2.0, 0.0)));
        let f = NonlinearitySpec::exponential(1.0).unwrap();
        assert!(verify_convexity_ordering(&shoot(&f, &ShootConfig::new(1.0, 0.0).unwrap()).unwrap()));
        let concave = RadialProfile {
            c: 1.0,
            a: 0.0,
            samples: (0..10)
                .map(|i| {
                    let r = i as f64 * 0.1;
                    Sample { r, phi: r.sqrt(), dphi: 1.0, ddphi: -0.5 }
                })
                .collect(),
            status: ProfileStatus::Global { r_max: 0.9 },
            spec_label: String::new(),
        };
        assert!(!verify_convexity_ordering(&concave));
    }

    #[test]
    fn comparison_controls() {
        let f = NonlinearitySpec::power_plus_eps(3.0, 1.0).unwrap();
        let sup = shoot(&f, &ShootConfig::new(1.0, 1.0).unwrap()).unwrap();
        let big_r = sup.radius_lower();
        let cand = EntireCandidate::new(sup.clone(), 2, Operator::PPlusK { k: 1 }, f.clone()).unwrap();
        let same = GridSamples::radial(&sup, 2, big_r, 200).unwrap();
        assert!(comparison_experiment(&same, &cand).unwrap().violations.is_empty());
        let lifted = same.shifted(1.0);
        assert_eq!(comparison_experiment(&lifted, &cand).unwrap().violation_fraction(), 1.0);
        assert!(GridSamples::new(1.0, vec![vec![1.0, 0.0]], vec![0.0]).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        let opts = DichotomyOptions::default();
        let no = dichotomy(&NonlinearitySpec::power_plus_eps(3.0, 1.0).unwrap(), Operator::PPlusK { k: 2 }, 5, &opts).unwrap();
        assert_eq!(no.certificate.verdict, Verdict::NotExists);
        assert!(no.certificate.radius_bound.unwrap().is_finite());
        let yes = dichotomy(&NonlinearitySpec::constant(1.0).unwrap(), Operator::PPlusK { k: 2 }, 3, &opts).unwrap();
        assert_eq!(yes.certificate.verdict, Verdict::Exists);
        assert!(yes.certificate.residual_max.unwrap() <= 1e-10);
        let sub = dichotomy(&NonlinearitySpec::affine(1.0, 1.0).unwrap(), Operator::MPlus01, 4, &opts).unwrap();
        assert_eq!(sub.certificate.verdict, Verdict::Exists);
        assert!(sub.certificate.residual_max.unwrap() <= 1e-6);
        // constant f is not strictly increasing
        let err = dichotomy(&NonlinearitySpec::constant(1.0).unwrap(), Operator::MPlus01, 3, &opts).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { ref flag, .. } if flag == "strictly_increasing"), "{err}");
        assert!(dichotomy(&NonlinearitySpec::constant(1.0).unwrap(), Operator::PPlusK { k: 4 }, 3, &opts).is_err());
    }

    #[test]
    fn pucci_inf_examples() {
        let opts = DichotomyOptions { a: 0.5, ..Default::default() };
        let eps = NonlinearitySpec::constant(1.0).unwrap();
        let PucciInf::Candidate { candidate, report, .. } =
            construct_pucci_inf(&eps, 3, PucciParams::new(2.0, 3.0).unwrap(), &opts).unwrap()
        else {
            panic!("expected a candidate")
        };
        assert!(report.max_abs <= 1e-10);
        for s in candidate.profile.samples.iter().step_by(97) {
            assert!((s.phi - (0.5 + s.r * s.r / 12.0)).abs() < 1e-10);
        }
        let exp = NonlinearitySpec::exponential(1.0).unwrap();
        let out = construct_pucci_inf(&exp, 1, PucciParams::new(1.0, 1.0).unwrap(), &DichotomyOptions::default()).unwrap();
        let PucciInf::NotExists { radius, dimension_condition, .. } = out else { panic!() };
        let b = radius.bounds().unwrap();
        assert!((b.lower - PI / 2f64.sqrt()).abs() < 1e-9 && (b.upper - b.lower).abs() < 1e-12);
        assert!(dimension_condition);
    }

    #[test]
    fn certificate_json_fields() {
        let d = dichotomy(&NonlinearitySpec::constant(1.0).unwrap(), Operator::PPlusK { k: 2 }, 3, &DichotomyOptions::default()).unwrap();
        let v = serde_json::to_value(&d.certificate).unwrap();
        for key in ["verdict", "ko", "radius_bound", "residual_max", "profile_csv"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "Exists");
        let back: DichotomyCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, d.certificate);
    }
}
