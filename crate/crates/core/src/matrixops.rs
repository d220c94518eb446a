//! Dense symmetric matrices and the extremal operators built on their spectra.
//!
//! All operators here are functions of the ordered eigenvalues
//! `μ₁ ≤ … ≤ μₙ`:
//!
//! * `pplus_k`: the partial trace `μ_{n-k+1} + … + μₙ`, equal to the supremum
//!   of `Trace_W(X)` over `k`-dimensional subspaces `W`;
//! * `mplus_01`: the sum of the positive eigenvalues;
//! * `mminus`: `λ·Σ_{μ>0} μ + Λ·Σ_{μ<0} μ`.
//!
//! Eigenvalues come from a cyclic Jacobi sweep, which is accurate and simple
//! for the small dimensions this crate targets.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and symmetrized away) on construction.
pub const ASYMMETRY_TOL: f64 = 1e-12;
/// Default relative cutoff below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const FRAME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SymMatrix {
    n: usize,
    entries: Vec<f64>,
}

/// Wire format: `{"n": int, "entries": row-major array of n² reals}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl TryFrom<MatrixJson> for SymMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        SymMatrix::from_row_major(m.n, m.entries)
    }
}

impl From<SymMatrix> for MatrixJson {
    fn from(m: SymMatrix) -> Self {
        MatrixJson {
            n: m.n,
            entries: m.entries,
        }
    }
}

impl SymMatrix {
    /// Builds a matrix from row-major entries. Entries that differ from their
    /// transpose by at most `1e-12·max(1, max|entry|)` are averaged; anything
    /// larger is rejected.
    pub fn from_row_major(n: usize, mut entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("matrix dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Input(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "entry ({}, {}) is not finite",
                bad / n,
                bad % n
            )));
        }
        let scale = entries.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                let (u, l) = (entries[i * n + j], entries[j * n + i]);
                if (u - l).abs() > ASYMMETRY_TOL * scale {
                    return Err(Error::Input(format!(
                        "matrix is not symmetric at ({i}, {j}): {u} vs {l}"
                    )));
                }
                let avg = 0.5 * (u + l);
                entries[i * n + j] = avg;
                entries[j * n + i] = avg;
            }
        }
        Ok(SymMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("rows must form a square matrix".into()));
        }
        SymMatrix::from_row_major(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        SymMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = s;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::from_row_major(n, entries)
    }

    /// `s·I + t·v⊗v`.
    pub fn identity_plus_rank_one(s: f64, t: f64, v: &[f64]) -> Self {
        let n = v.len();
        let mut m = Self::scaled_identity(n, s);
        for i in 0..n {
            for j in 0..n {
                m.entries[i * n + j] += t * v[i] * v[j];
            }
        }
        m
    }

    /// `GᵀG` for an arbitrary square `G` given row-major; always PSD.
    pub fn gram(n: usize, g: &[f64]) -> Self {
        assert_eq!(g.len(), n * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|r| g[r * n + i] * g[r * n + j]).sum();
                m.entries[i * n + j] = s;
                m.entries[j * n + i] = s;
            }
        }
        m
    }

    /// Random symmetric matrix with independent upper-triangle entries
    /// uniform in `[-bound, bound]`.
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, bound: f64, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-bound..=bound);
                m.entries[i * n + j] = v;
                m.entries[j * n + i] = v;
            }
        }
        m
    }

    /// Random positive semidefinite matrix `GᵀG` with Gaussian `G`.
    pub fn random_psd<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Self {
        let g: Vec<f64> = (0..n * n)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::gram(n, &g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `max(1, ‖X‖_F)`, the scale used by every relative tolerance here.
    pub fn scale(&self) -> f64 {
        self.frobenius_norm().max(1.0)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(Error::Input(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(SymMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale_by(&self, t: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            entries: self.entries.iter().map(|v| t * v).collect(),
        }
    }

    /// Quadratic form `⟨X v, v⟩`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| v[i] * (0..n).map(|j| self.get(i, j) * v[j]).sum::<f64>())
            .sum()
    }
}

/// Ordered eigenvalues `μ₁ ≤ … ≤ μₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum of the `k` largest eigenvalues.
    pub fn top_k_sum(&self, k: usize) -> f64 {
        self.values[self.values.len() - k..].iter().sum()
    }
}

/// Eigen-decomposition: ascending eigenvalues with eigenvectors stored as
/// rows of `vectors` in the same order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub spectrum: Spectrum,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigen-decomposition. Iterates until the off-diagonal
/// Frobenius norm is below `1e-12·‖X‖_F`.
pub fn eigen_decomposition(x: &SymMatrix) -> EigenDecomposition {
    let n = x.n;
    let mut a = x.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = JACOBI_TOL * x.frobenius_norm();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    EigenDecomposition {
        spectrum: Spectrum { values },
        vectors,
        sweeps,
    }
}

pub fn eigenvalues(x: &SymMatrix) -> Spectrum {
    eigen_decomposition(x).spectrum
}

/// `𝒫⁺ₖ(X)`: the sum of the `k` largest eigenvalues.
pub fn pplus_k(x: &SymMatrix, k: usize) -> Result<f64> {
    check_k(k, x.n)?;
    Ok(eigenvalues(x).top_k_sum(k))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} must lie in [1, {n}]")));
    }
    Ok(())
}

/// `ℳ⁺₀,₁(X)` with the default zero threshold.
pub fn mplus_01(x: &SymMatrix) -> f64 {
    mplus_01_with_threshold(x, DEFAULT_ZERO_THRESHOLD)
}

/// Sum of eigenvalues exceeding `rel_threshold·max(1, ‖X‖_F)`.
pub fn mplus_01_with_threshold(x: &SymMatrix, rel_threshold: f64) -> f64 {
    let cut = rel_threshold * x.scale();
    eigenvalues(x).values.iter().filter(|&&m| m > cut).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PucciParamsJson", into = "PucciParamsJson")]
pub struct PucciParams {
    lambda_lo: f64,
    lambda_hi: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PucciParamsJson {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl TryFrom<PucciParamsJson> for PucciParams {
    type Error = Error;

    fn try_from(p: PucciParamsJson) -> Result<Self> {
        PucciParams::new(p.lambda_lo, p.lambda_hi)
    }
}

impl From<PucciParams> for PucciParamsJson {
    fn from(p: PucciParams) -> Self {
        PucciParamsJson {
            lambda_lo: p.lambda_lo,
            lambda_hi: p.lambda_hi,
        }
    }
}

impl PucciParams {
    pub fn new(lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        if !(lambda_lo.is_finite() && lambda_hi.is_finite() && lambda_lo > 0.0 && lambda_hi >= lambda_lo) {
            return Err(Error::Parameter(format!(
                "ellipticity constants must satisfy 0 < λ ≤ Λ, got λ = {lambda_lo}, Λ = {lambda_hi}"
            )));
        }
        Ok(PucciParams {
            lambda_lo,
            lambda_hi,
        })
    }

    pub fn lambda_lo(&self) -> f64 {
        self.lambda_lo
    }

    pub fn lambda_hi(&self) -> f64 {
        self.lambda_hi
    }

    /// Whether the Liouville restriction `n ≤ 1 + Λ/λ` holds.
    pub fn liouville_dimension_ok(&self, n: usize) -> bool {
        n as f64 <= 1.0 + self.lambda_hi / self.lambda_lo
    }
}

/// `ℳ⁻λ,Λ(X) = λ·Σ_{μ>0} μ + Λ·Σ_{μ<0} μ`.
pub fn mminus(x: &SymMatrix, p: &PucciParams) -> f64 {
    let spectrum = eigenvalues(x);
    let pos: f64 = spectrum.values.iter().filter(|&&m| m > 0.0).sum();
    let neg: f64 = spectrum.values.iter().filter(|&&m| m < 0.0).sum();
    p.lambda_lo * pos + p.lambda_hi * neg
}

/// `k` orthonormal vectors spanning a point of the Grassmannian `G(k, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Vec<Vec<f64>>,
}

impl Frame {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.len();
        if k == 0 {
            return Err(Error::Input("a frame needs at least one vector".into()));
        }
        let n = vectors[0].len();
        if vectors.iter().any(|v| v.len() != n) || k > n {
            return Err(Error::Input(format!(
                "frame of {k} vectors must share a dimension n ≥ k"
            )));
        }
        for i in 0..k {
            for j in 0..k {
                let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).abs() > FRAME_TOL {
                    return Err(Error::Input(format!(
                        "frame is not orthonormal: <w{i}, w{j}> = {dot}"
                    )));
                }
            }
        }
        Ok(Frame { vectors })
    }

    /// Gram-Schmidt on Gaussian vectors; uniformly distributed on `G(k, n)`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        check_k(k, n)?;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        while vectors.len() < k {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for w in &vectors {
                    let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(w).for_each(|(a, b)| *a -= d * b);
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-8 {
                v.iter_mut().for_each(|a| *a /= norm);
                vectors.push(v);
            }
        }
        Frame::new(vectors)
    }

    /// Eigenvectors of the `k` largest eigenvalues of `x`.
    pub fn top_eigenvectors(x: &SymMatrix, k: usize) -> Result<Self> {
        check_k(k, x.n)?;
        let dec = eigen_decomposition(x);
        let n = x.n;
        Frame::new(dec.vectors[n - k..].to_vec())
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// `Trace_W(X) = Σᵢ ⟨X wᵢ, wᵢ⟩` over the frame vectors.
pub fn subspace_trace(x: &SymMatrix, w: &Frame) -> Result<f64> {
    if w.dim() != x.n {
        return Err(Error::Input(format!(
            "frame lives in dimension {}, matrix has n = {}",
            w.dim(),
            x.n
        )));
    }
    Ok(w.vectors.iter().map(|v| x.quad_form(v)).sum())
}
