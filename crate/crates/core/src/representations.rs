//! Inverse representations of invertible multipliers.
//!
//! For an invertible `M = M_{m,Φ,Ψ}` with semi-normalized `m`,
//!
//! ```text
//! Γ = U_Φ (M⁻¹)* − ℳ_{1/m̄} U_Ψ S_Ψ⁻¹        M⁻¹ = M_{1/m,Ψ̃,Φ^d} + Γ* U_{Φ^d}
//! Θ = U_Ψ M⁻¹   − ℳ_{1/m}  U_Φ S_Φ⁻¹        M⁻¹ = M_{1/m,Ψ^d,Φ̃} + T_{Ψ^d} Θ
//! ```
//!
//! for every dual `Φ^d` of `Φ` (resp. `Ψ^d` of `Ψ`). Both operators are
//! stored as `N × d` matrices.
//!
//! `Γ*` vanishes on the range of `ℳ_m U_Ψ`, so `T_Ψ ℳ_{m̄} Γ = 0` always
//! holds; `T_Ψ Γ = 0` holds only when `ℳ_m U_Ψ` and `U_Ψ` share a range
//! (constant symbols, Riesz bases). Both residuals are reported.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{DualFrame, Frame};
use crate::generators::{rng_from_seed, unit_norm_matrix};
use crate::multiplier::{realize, Multiplier};
use crate::numeric::{op_norm, pinv, Mat, Tol, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepKind {
    Gamma,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResidual {
    /// Position of the dual in the list it was verified against.
    pub index: usize,
    pub canonical: bool,
    /// `‖M⁻¹ − (M_{1/m,·,·} + correction)‖`.
    pub residual: f64,
    /// `‖M⁻¹ − M_{1/m,·,·}‖`, i.e. the same comparison without the correction term.
    pub formula_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RepResult {
    pub op: Mat,
    pub kind: RepKind,
    /// `max(1, ‖M⁻¹‖)`; every threshold is `rel_eq · scale`.
    pub scale: f64,
    /// `‖T_Ψ Γ‖` (Gamma) or `‖T_Φ Θ‖` (Theta).
    pub annihilation_residual: f64,
    /// `‖T_Ψ ℳ_{m̄} Γ‖` (Gamma) or `‖T_Φ ℳ_m Θ‖` (Theta).
    pub weighted_annihilation_residual: f64,
    pub decomposition_residuals: Vec<DecompositionResidual>,
}

impl RepResult {
    pub fn threshold(&self, tol: &Tol) -> f64 {
        tol.rel_eq * self.scale
    }

    pub fn max_decomposition_residual(&self) -> f64 {
        self.decomposition_residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn max_formula_residual(&self) -> f64 {
        self.decomposition_residuals
            .iter()
            .map(|r| r.formula_residual)
            .fold(0.0, f64::max)
    }

    pub fn decompositions_hold(&self, tol: &Tol) -> bool {
        self.max_decomposition_residual() <= self.threshold(tol)
    }

    /// Copy with the operator moved by `eps · R` for a seeded unit-norm `R`
    /// and the residual list cleared.
    pub fn perturbed(&self, eps: f64, seed: u64) -> RepResult {
        let mut rng = rng_from_seed(seed);
        let r = unit_norm_matrix(self.op.nrows(), self.op.ncols(), &mut rng);
        RepResult {
            op: &self.op + r.scale(eps),
            decomposition_residuals: Vec::new(),
            ..self.clone()
        }
    }
}

fn require_invertible_semi_normalized(m: &Multiplier, tol: &Tol) -> Result<Mat> {
    if let Some(index) = m.symbol().values().iter().position(|z| z.norm() == 0.0) {
        return Err(Error::ZeroEntry { index });
    }
    m.invert(tol)
}

pub fn gamma_of(m: &Multiplier, tol: &Tol) -> Result<RepResult> {
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let phi = m.left();
    let psi = m.right();
    let recip_conj = m.symbol().reciprocal()?.conj();
    let op = phi.analysis_matrix() * m_inv.adjoint()
        - recip_conj.diag() * psi.analysis_matrix() * psi.frame_operator_inverse();
    let annihilation_residual = op_norm(&(psi.synthesis_matrix() * &op));
    let weighted_annihilation_residual =
        op_norm(&(psi.synthesis_matrix() * m.symbol().conj().diag() * &op));
    Ok(RepResult {
        op,
        kind: RepKind::Gamma,
        scale: 1f64.max(op_norm(&m_inv)),
        annihilation_residual,
        weighted_annihilation_residual,
        decomposition_residuals: Vec::new(),
    })
}

pub fn theta_of(m: &Multiplier, tol: &Tol) -> Result<RepResult> {
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let phi = m.left();
    let psi = m.right();
    let recip = m.symbol().reciprocal()?;
    let op = psi.analysis_matrix() * &m_inv
        - recip.diag() * phi.analysis_matrix() * phi.frame_operator_inverse();
    let annihilation_residual = op_norm(&(phi.synthesis_matrix() * &op));
    let weighted_annihilation_residual =
        op_norm(&(phi.synthesis_matrix() * m.symbol().diag() * &op));
    Ok(RepResult {
        op,
        kind: RepKind::Theta,
        scale: 1f64.max(op_norm(&m_inv)),
        annihilation_residual,
        weighted_annihilation_residual,
        decomposition_residuals: Vec::new(),
    })
}

fn check_dual(dual: &DualFrame, parent: &Frame, tol: &Tol) -> Result<()> {
    if !dual.is_dual_of(parent) {
        return Err(Error::InvalidDual {
            residual: f64::INFINITY,
        });
    }
    let residual = dual.duality_residual();
    if residual > tol.rel_eq {
        return Err(Error::InvalidDual { residual });
    }
    Ok(())
}

/// Residuals of `M⁻¹ = M_{1/m,Ψ̃,Φ^d} + Γ* U_{Φ^d}` for each dual of `Φ`.
pub fn verify_gamma_decomposition(
    m: &Multiplier,
    gamma: &RepResult,
    duals: &[DualFrame],
    tol: &Tol,
) -> Result<RepResult> {
    if gamma.kind != RepKind::Gamma {
        return Err(Error::InvalidArgument("expected a Gamma operator".into()));
    }
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let recip = m.symbol().reciprocal()?;
    let psi_canonical = m.right().frame_operator_inverse() * m.right().synthesis_matrix();
    let correction_adj = gamma.op.adjoint();
    let mut residuals = Vec::with_capacity(duals.len());
    for (index, dual) in duals.iter().enumerate() {
        check_dual(dual, m.left(), tol)?;
        let base = realize(&recip, &psi_canonical, dual.frame().synthesis_matrix());
        let correction = &correction_adj * dual.frame().analysis_matrix();
        residuals.push(DecompositionResidual {
            index,
            canonical: op_norm(dual.v_part()) == 0.0,
            residual: op_norm(&(&m_inv - &base - correction)),
            formula_residual: op_norm(&(&m_inv - &base)),
        });
    }
    Ok(RepResult {
        decomposition_residuals: residuals,
        ..gamma.clone()
    })
}

/// Residuals of `M⁻¹ = M_{1/m,Ψ^d,Φ̃} + T_{Ψ^d} Θ` for each dual of `Ψ`.
pub fn verify_theta_decomposition(
    m: &Multiplier,
    theta: &RepResult,
    duals: &[DualFrame],
    tol: &Tol,
) -> Result<RepResult> {
    if theta.kind != RepKind::Theta {
        return Err(Error::InvalidArgument("expected a Theta operator".into()));
    }
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let recip = m.symbol().reciprocal()?;
    let phi_canonical = m.left().frame_operator_inverse() * m.left().synthesis_matrix();
    let mut residuals = Vec::with_capacity(duals.len());
    for (index, dual) in duals.iter().enumerate() {
        check_dual(dual, m.right(), tol)?;
        let base = realize(&recip, dual.frame().synthesis_matrix(), &phi_canonical);
        let correction = dual.frame().synthesis_matrix() * &theta.op;
        residuals.push(DecompositionResidual {
            index,
            canonical: op_norm(dual.v_part()) == 0.0,
            residual: op_norm(&(&m_inv - &base - correction)),
            formula_residual: op_norm(&(&m_inv - &base)),
        });
    }
    Ok(RepResult {
        decomposition_residuals: residuals,
        ..theta.clone()
    })
}

/// The canonical dual followed by `count` duals `φ̃_n + W(I − U S⁻¹ T)δ_n`
/// with independent unit-norm Gaussian `W`.
pub fn sample_duals(frame: &Frame, count: usize, seed: u64, tol: &Tol) -> Result<Vec<DualFrame>> {
    let mut rng = rng_from_seed(seed);
    sample_duals_with(frame, count, &mut rng, tol)
}

pub fn sample_duals_with<R: Rng>(
    frame: &Frame,
    count: usize,
    rng: &mut R,
    tol: &Tol,
) -> Result<Vec<DualFrame>> {
    let mut duals = Vec::with_capacity(count + 1);
    duals.push(frame.canonical_dual(tol)?);
    for _ in 0..count {
        let w = unit_norm_matrix(frame.dim(), frame.count(), rng);
        duals.push(frame.parametrized_dual(&w, tol)?);
    }
    Ok(duals)
}

/// Least-squares fit of `Γ` from the decomposition identities alone:
/// solves `Γ* [U_{Φ^{d_1}} … U_{Φ^{d_k}}] = [M⁻¹ − M_{1/m,Ψ̃,Φ^{d_i}}]_i`.
pub fn gamma_from_decompositions(m: &Multiplier, duals: &[DualFrame], tol: &Tol) -> Result<Mat> {
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let recip = m.symbol().reciprocal()?;
    let psi_canonical = m.right().frame_operator_inverse() * m.right().synthesis_matrix();
    let (d, n) = (m.dim(), m.left().count());
    let k = duals.len();
    let mut lhs = Mat::zeros(n, k * d);
    let mut rhs = Mat::zeros(d, k * d);
    for (i, dual) in duals.iter().enumerate() {
        check_dual(dual, m.left(), tol)?;
        let base = realize(&recip, &psi_canonical, dual.frame().synthesis_matrix());
        lhs.view_mut((0, i * d), (n, d))
            .copy_from(&dual.frame().analysis_matrix());
        rhs.view_mut((0, i * d), (d, d)).copy_from(&(&m_inv - base));
    }
    let gamma_adj = rhs * pinv(&lhs, tol);
    Ok(gamma_adj.adjoint())
}

/// Least-squares fit of `Θ` from `T_{Ψ^{d_i}} Θ = M⁻¹ − M_{1/m,Ψ^{d_i},Φ̃}`.
pub fn theta_from_decompositions(m: &Multiplier, duals: &[DualFrame], tol: &Tol) -> Result<Mat> {
    let m_inv = require_invertible_semi_normalized(m, tol)?;
    let recip = m.symbol().reciprocal()?;
    let phi_canonical = m.left().frame_operator_inverse() * m.left().synthesis_matrix();
    let (d, n) = (m.dim(), m.right().count());
    let k = duals.len();
    let mut lhs = Mat::zeros(k * d, n);
    let mut rhs = Mat::zeros(k * d, d);
    for (i, dual) in duals.iter().enumerate() {
        check_dual(dual, m.right(), tol)?;
        let base = realize(&recip, dual.frame().synthesis_matrix(), &phi_canonical);
        lhs.view_mut((i * d, 0), (d, n))
            .copy_from(dual.frame().synthesis_matrix());
        rhs.view_mut((i * d, 0), (d, d)).copy_from(&(&m_inv - base));
    }
    Ok(pinv(&lhs, tol) * rhs)
}

/// Three independent readings of "`Ψ` is equivalent to `mΦ`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// An invertible `V` with `ψ_n = V(m_n φ_n)` exists.
    pub equivalent: bool,
    /// `‖Γ‖ ≤ rel_eq · scale`.
    pub gamma_zero: bool,
    /// `M⁻¹ = M_{1/m,Ψ̃,Φ^d}` for every sampled dual.
    pub all_duals_formula: bool,
    pub equivalence_residual: f64,
    pub gamma_norm: f64,
    pub max_formula_residual: f64,
    pub scale: f64,
    pub indeterminate: bool,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.equivalent == self.gamma_zero && self.gamma_zero == self.all_duals_formula
    }

    pub fn flags(&self) -> [bool; 3] {
        [self.equivalent, self.gamma_zero, self.all_duals_formula]
    }
}

/// Compares equivalence of `Ψ` and `mΦ`, vanishing of `Γ`, and the
/// correction-free inverse formula over `duals` (duals of `Φ`).
pub fn equivalence_criterion(
    m: &Multiplier,
    duals: &[DualFrame],
    tol: &Tol,
) -> Result<EquivalenceReport> {
    let gamma = gamma_of(m, tol)?;
    let verified = verify_gamma_decomposition(m, &gamma, duals, tol)?;
    let scaled = m.left().scale_by_symbol(m.symbol(), tol)?;
    let (v0, equivalence_residual) =
        scaled
            .equivalence_candidate(m.right(), tol)
            .ok_or(Error::DimensionMismatch {
                context: "equivalence candidate",
                expected: scaled.count(),
                found: m.right().count(),
            })?;
    let (smin, smax) = crate::numeric::sigma_extremes(&v0);
    let v0_invertible = smax > 0.0 && smin >= tol.inv_cond * smax;
    let equivalent = equivalence_residual <= tol.rel_eq && v0_invertible;

    let threshold = verified.threshold(tol);
    let gamma_norm = op_norm(&verified.op);
    let max_formula_residual = verified.max_formula_residual();
    let indeterminate = Verdict::classify(equivalence_residual, tol.rel_eq).is_indeterminate()
        || Verdict::classify(gamma_norm, threshold).is_indeterminate()
        || Verdict::classify(max_formula_residual, threshold).is_indeterminate();
    Ok(EquivalenceReport {
        equivalent,
        gamma_zero: gamma_norm <= threshold,
        all_duals_formula: max_formula_residual <= threshold,
        equivalence_residual,
        gamma_norm,
        max_formula_residual,
        scale: verified.scale,
        indeterminate,
    })
}

/// The mirrored criterion: `Φ` equivalent to `m̄Ψ` ⇔ `Θ = 0` ⇔
/// `M⁻¹ = M_{1/m,Ψ^d,Φ̃}` for every sampled dual of `Ψ`. Evaluated as the
/// direct criterion of the adjoint multiplier `M_{m̄,Ψ,Φ}`, whose `Γ` is `Θ`.
pub fn equivalence_criterion_dual_side(
    m: &Multiplier,
    psi_duals: &[DualFrame],
    tol: &Tol,
) -> Result<EquivalenceReport> {
    equivalence_criterion(&m.adjoint(tol)?, psi_duals, tol)
}
