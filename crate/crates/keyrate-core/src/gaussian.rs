//! Exact mutual information for jointly circularly-symmetric complex
//! Gaussian variables, straight from covariance determinants.
//!
//! For complex circular Gaussians `I(A; B) = log2(det Σ_A · det Σ_B /
//! det Σ_{A∪B})` with no factor 1/2. This module is the independent
//! oracle against which every closed-form rate expression in the crate
//! is checked, so it computes determinants by pivoted LU on the raw
//! covariance and nothing else.
//!
//! The builders assemble the joint law of the two-way estimation chain:
//! pilot observations give LMMSE estimates `ĥ = α h + e` with
//! `α = P₁/(1+P₁)` and `e ~ CN(0, α(1−α))` independent of the gains;
//! quantization test channels add `u = ĥ + q` with `q ~ CN(0, Q₁)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use thiserror::Error;

/// Symbol names used by the chain builders.
pub mod symbols {
    pub const H_AB: &str = "h_ab";
    pub const H_BA: &str = "h_ba";
    pub const HHAT_AB: &str = "hhat_ab";
    pub const HHAT_BA: &str = "hhat_ba";
    pub const U_AB: &str = "u_ab";
    pub const U_BA: &str = "u_ba";
}

const HERMITIAN_TOL: f64 = 1e-12;
const PIVOT_CLAMP: f64 = -1e-12;
const SINGULAR_LOG_RATIO: f64 = -27.631_021_115_928_547; // ln(1e-12)
const ILL_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error, PartialEq)]
pub enum GaussianError {
    #[error("covariance matrix is not square: {rows} rows, {len} entries")]
    NotSquare { rows: usize, len: usize },
    #[error("matrix departs from Hermitian symmetry by {0:e}")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite: pivot {0:e}")]
    NotPsd(f64),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("groups must be disjoint; {0:?} appears twice")]
    OverlappingGroups(String),
    #[error("group contains linearly dependent symbols; split it")]
    DegenerateGroup,
}

/// A labelled Hermitian PSD covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    labels: Vec<String>,
    /// Row-major `n × n`.
    data: Vec<Complex64>,
}

impl CovarianceModel {
    /// Validates Hermitian symmetry (within 1e-12, then symmetrized) and
    /// positive semidefiniteness (LDL pivots; pivots in `[-1e-12, 0)`
    /// are clamped to zero).
    pub fn new<S: Into<String>>(
        labels: Vec<S>,
        data: Vec<Complex64>,
    ) -> Result<Self, GaussianError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if data.len() != n * n {
            return Err(GaussianError::NotSquare {
                rows: n,
                len: data.len(),
            });
        }
        let mut m = Self { labels, data };
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                let dev = (m.at(i, j) - m.at(j, i).conj()).norm();
                worst = worst.max(dev);
            }
            worst = worst.max(m.at(i, i).im.abs());
        }
        if worst > HERMITIAN_TOL {
            return Err(GaussianError::NotHermitian(worst));
        }
        // symmetrize to kill rounding asymmetry
        for i in 0..n {
            let d = m.at(i, i).re;
            *m.at_mut(i, i) = Complex64::new(d, 0.0);
            for j in 0..i {
                let avg = 0.5 * (m.at(i, j) + m.at(j, i).conj());
                *m.at_mut(i, j) = avg;
                *m.at_mut(j, i) = avg.conj();
            }
        }
        m.check_psd()?;
        Ok(m)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.labels.len() + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let n = self.labels.len();
        &mut self.data[i * n + j]
    }

    /// Covariance entry by symbol names.
    pub fn entry(&self, a: &str, b: &str) -> Result<Complex64, GaussianError> {
        Ok(self.at(self.index_of(a)?, self.index_of(b)?))
    }

    fn index_of(&self, name: &str) -> Result<usize, GaussianError> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| GaussianError::UnknownSymbol(name.to_string()))
    }

    /// LDL^H pivots must stay above the clamp threshold.
    fn check_psd(&self) -> Result<(), GaussianError> {
        let n = self.dimension();
        let scale: f64 = (0..n).map(|i| self.at(i, i).re.abs()).fold(1.0, f64::max);
        let mut l = vec![Complex64::default(); n * n];
        let mut d = vec![0.0f64; n];
        for j in 0..n {
            let mut dj = self.at(j, j).re;
            for k in 0..j {
                dj -= l[j * n + k].norm_sqr() * d[k];
            }
            if dj < PIVOT_CLAMP * scale {
                return Err(GaussianError::NotPsd(dj));
            }
            d[j] = dj.max(0.0);
            for i in (j + 1)..n {
                if d[j] == 0.0 {
                    l[i * n + j] = Complex64::default();
                    continue;
                }
                let mut v = self.at(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k].conj() * d[k];
                }
                l[i * n + j] = v / d[j];
            }
        }
        Ok(())
    }

    fn submatrix(&self, idx: &[usize]) -> Vec<Complex64> {
        let k = idx.len();
        let mut out = vec![Complex64::default(); k * k];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                out[r * k + c] = self.at(i, j);
            }
        }
        out
    }
}

/// Log-determinant of a Hermitian PSD matrix by LU with partial
/// pivoting. Returns `(ln |det|, ln scale, condition proxy)`; the scale
/// is the Hadamard bound `Π diag`, so `ln det − ln scale ≤ 0` and a very
/// negative gap flags singularity.
fn lu_log_det(mut m: Vec<Complex64>, n: usize) -> (f64, f64, f64) {
    let ln_scale: f64 = (0..n)
        .map(|i| m[i * n + i].re.abs().max(f64::MIN_POSITIVE).ln())
        .sum();
    let mut ln_det = 0.0f64;
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0f64;
    for col in 0..n {
        // partial pivot
        let mut pivot_row = col;
        let mut best = m[col * n + col].norm();
        for r in (col + 1)..n {
            let mag = m[r * n + col].norm();
            if mag > best {
                best = mag;
                pivot_row = r;
            }
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(col * n + c, pivot_row * n + c);
            }
        }
        let piv = m[col * n + col];
        let mag = piv.norm();
        min_piv = min_piv.min(mag);
        max_piv = max_piv.max(mag);
        if mag == 0.0 {
            return (f64::NEG_INFINITY, ln_scale, f64::INFINITY);
        }
        ln_det += mag.ln();
        for r in (col + 1)..n {
            let factor = m[r * n + col] / piv;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in (col + 1)..n {
                let sub = factor * m[col * n + c];
                m[r * n + c] -= sub;
            }
        }
    }
    (ln_det, ln_scale, max_piv / min_piv)
}

/// Outcome of a mutual-information query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MiValue {
    Finite {
        bits: f64,
        /// Joint covariance condition estimate exceeded 1e12.
        ill_conditioned: bool,
    },
    /// Joint covariance singular while both marginals are regular: the
    /// variables determine each other.
    Infinite,
}

impl MiValue {
    pub fn bits(&self) -> f64 {
        match *self {
            MiValue::Finite { bits, .. } => bits,
            MiValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, MiValue::Infinite)
    }
}

/// `I(group_a; group_b)` in bits.
pub fn gaussian_mi(
    model: &CovarianceModel,
    group_a: &[&str],
    group_b: &[&str],
) -> Result<MiValue, GaussianError> {
    let mut idx_a = Vec::with_capacity(group_a.len());
    for s in group_a {
        idx_a.push(model.index_of(s)?);
    }
    let mut idx_b = Vec::with_capacity(group_b.len());
    for s in group_b {
        let i = model.index_of(s)?;
        if idx_a.contains(&i) {
            return Err(GaussianError::OverlappingGroups(s.to_string()));
        }
        idx_b.push(i);
    }
    // Zero-variance symbols carry no information; drop them so a chain
    // built with no pilot power reports zero bits rather than 0/0.
    let max_diag = (0..model.dimension())
        .map(|i| model.at(i, i).re)
        .fold(0.0f64, f64::max);
    let live = |i: &usize| model.at(*i, *i).re > 1e-14 * max_diag;
    let idx_a: Vec<usize> = idx_a.into_iter().filter(|i| live(i)).collect();
    let idx_b: Vec<usize> = idx_b.into_iter().filter(|i| live(i)).collect();
    if idx_a.is_empty() || idx_b.is_empty() {
        return Ok(MiValue::Finite {
            bits: 0.0,
            ill_conditioned: false,
        });
    }

    let (ln_a, scale_a, _) = lu_log_det(model.submatrix(&idx_a), idx_a.len());
    let (ln_b, scale_b, _) = lu_log_det(model.submatrix(&idx_b), idx_b.len());
    if ln_a - scale_a < SINGULAR_LOG_RATIO || ln_b - scale_b < SINGULAR_LOG_RATIO {
        return Err(GaussianError::DegenerateGroup);
    }
    let joint: Vec<usize> = idx_a.iter().chain(idx_b.iter()).copied().collect();
    let (ln_j, scale_j, cond) = lu_log_det(model.submatrix(&joint), joint.len());
    if ln_j - scale_j < SINGULAR_LOG_RATIO {
        return Ok(MiValue::Infinite);
    }
    Ok(MiValue::Finite {
        bits: (ln_a + ln_b - ln_j) / LN_2,
        ill_conditioned: cond > ILL_CONDITION_LIMIT,
    })
}

/// Derived coefficients of the estimation and quantization chain:
/// `α = P₁/(1+P₁)`, channel-quantizer variance `Q₁`, source-quantizer
/// variance `Q₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationChain {
    pub alpha: f64,
    pub q1: f64,
    pub q2: f64,
}

impl EstimationChain {
    pub fn from_pilot_power(p1: f64, q1: f64, q2: f64) -> Self {
        assert!(p1 >= 0.0 && q1 >= 0.0 && q2 >= 0.0);
        Self {
            alpha: alpha_from_pilot(p1),
            q1,
            q2,
        }
    }
}

/// LMMSE coefficient of a unit-power pilot observation.
pub fn alpha_from_pilot(p1: f64) -> f64 {
    assert!(p1 >= 0.0, "pilot power must be non-negative, got {p1}");
    if p1.is_infinite() {
        1.0
    } else {
        p1 / (1.0 + p1)
    }
}

/// Joint law of `{h_AB, h_BA, ĥ_AB, ĥ_BA}` for unit-variance gains with
/// reciprocity correlation `rho` and pilot power `p1`.
pub fn build_training_chain(rho: f64, p1: f64) -> Result<CovarianceModel, GaussianError> {
    assert!((0.0..1.0).contains(&rho), "rho={rho}");
    let al = alpha_from_pilot(p1);
    let e = |v: f64| Complex64::new(v, 0.0);
    let a2r = al * al * rho;
    use symbols::*;
    CovarianceModel::new(
        vec![H_AB, H_BA, HHAT_AB, HHAT_BA],
        vec![
            e(1.0), e(rho), e(al), e(al * rho),
            e(rho), e(1.0), e(al * rho), e(al),
            e(al), e(al * rho), e(al), e(a2r),
            e(al * rho), e(al), e(a2r), e(al),
        ],
    )
}

/// Training chain extended with the quantizer outputs
/// `u = ĥ + q`, `q ~ CN(0, q1)` independent per direction.
pub fn build_quantized_chain(
    rho: f64,
    p1: f64,
    q1: f64,
) -> Result<CovarianceModel, GaussianError> {
    assert!((0.0..1.0).contains(&rho), "rho={rho}");
    assert!(q1 >= 0.0, "q1={q1}");
    let al = alpha_from_pilot(p1);
    let e = |v: f64| Complex64::new(v, 0.0);
    let a2r = al * al * rho;
    use symbols::*;
    CovarianceModel::new(
        vec![H_AB, H_BA, HHAT_AB, HHAT_BA, U_AB, U_BA],
        vec![
            e(1.0), e(rho), e(al), e(al * rho), e(al), e(al * rho),
            e(rho), e(1.0), e(al * rho), e(al), e(al * rho), e(al),
            e(al), e(al * rho), e(al), e(a2r), e(al), e(a2r),
            e(al * rho), e(al), e(a2r), e(al), e(a2r), e(al),
            e(al), e(al * rho), e(al), e(a2r), e(al + q1), e(a2r),
            e(al * rho), e(al), e(a2r), e(al), e(a2r), e(al + q1),
        ],
    )
}

/// Residual variance of a gain given the single-sided quantized
/// estimate: `σ² = 1 − α²/(Q₁ + α)`.
///
/// `q1 = 0` collapses to the pilot-only error `1 − α = 1/(1+P₁)`; with
/// no estimate at all (`α = 0`) the prior variance 1 remains. The
/// zero-quantizer branch feeds both the discussion and no-discussion
/// penalties, so the two paths agree bit-for-bit there.
pub fn sigma_sq_residual(alpha: f64, q1: f64) -> f64 {
    assert!((0.0..1.0).contains(&alpha) || alpha == 1.0, "alpha={alpha}");
    assert!(q1 >= 0.0, "q1={q1}");
    if alpha == 0.0 {
        return 1.0;
    }
    if q1 == 0.0 {
        return 1.0 - alpha;
    }
    1.0 - alpha * alpha / (q1 + alpha)
}
