//! Companion frames that keep a multiplier fixed when one of its
//! ingredients is perturbed.
//!
//! All constructions share one formula. With `F_old = mΦ` and `F_new` the
//! perturbed scaled frame (`mΦ′` or `m′Φ`),
//!
//! ```text
//! T_{Ψ′} = T_Ψ · ( U_{F_old} S_{F_new}⁻¹ T_{F_new} + (I − U_{F_new} S_{F_new}⁻¹ T_{F_new}) )
//! ```
//!
//! so that `T_{F_new} U_{Ψ′} = T_{F_old} U_Ψ`, i.e. the multiplier is unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::generators::{rng_from_seed, unit_norm_matrix};
use crate::multiplier::Multiplier;
use crate::numeric::{op_norm, Mat, Tol};
use crate::symbols::Symbol;

/// Fraction of the requested `μ` actually realised by
/// [`random_frame_perturbation`].
pub const ACHIEVED_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    /// `‖T_Φ − T_{Φ′}‖`, or `‖m − m′‖_∞` for symbol perturbations.
    pub achieved_mu: f64,
    /// `λ` (frame perturbations) or `δ` (symbol perturbations).
    pub bound_coefficient: f64,
    /// `‖T_{Ψ′} − T_Ψ‖`.
    pub companion_deviation: f64,
    /// `‖M_new − M_old‖`.
    pub multiplier_residual: f64,
    /// `max(1, ‖M_old‖)`.
    pub scale: f64,
    /// `companion_deviation ≤ bound_coefficient · achieved_mu + rel_eq`.
    pub bound_satisfied: bool,
    /// `companion_deviation / achieved_mu` (zero for a zero perturbation).
    pub empirical_ratio: f64,
    pub scaled_frame_bound: Option<ScaledFrameBound>,
    pub symbol_branches: Option<SymbolBranches>,
}

impl PerturbReport {
    pub fn multiplier_preserved(&self, tol: &Tol) -> bool {
        self.multiplier_residual <= tol.rel_eq * self.scale
    }
}

/// Lower frame bound of `mΦ` for an invertible multiplier with a
/// possibly vanishing symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledFrameBound {
    /// `λ_min(S_{mΦ})`.
    pub lambda_min: f64,
    /// `1 / (B_Φ ‖M⁻¹‖²)`.
    pub stated_bound: f64,
    /// `λ_min(S_{mΦ}) · B_Φ · ‖M⁻¹‖`², to be compared with 1.
    pub stated_ratio: f64,
    /// `1 / (B_Ψ ‖M⁻¹‖²)`, which follows from `M* = T_Ψ U_{mΦ}` for every instance.
    pub analysis_side_bound: f64,
}

impl ScaledFrameBound {
    pub fn stated_holds(&self, tol: &Tol) -> bool {
        self.stated_ratio >= 1.0 - tol.rel_eq
    }
}

/// Which hypothesis of the symbol-perturbation result an instance meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolBranches {
    /// `M` invertible and `ε B_Φ < 1/‖M⁻¹‖`.
    pub invertible: bool,
    /// `m` semi-normalized and `ε √B_Φ < inf|m_n| √B_Φ`.
    pub semi_normalized: bool,
}

/// `Φ′` with `‖T_Φ − T_{Φ′}‖ = 0.9 μ`, along a seeded unit-norm direction.
pub fn random_frame_perturbation(f: &Frame, mu: f64, seed: u64, tol: &Tol) -> Result<Frame> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let direction = unit_norm_matrix(f.dim(), f.count(), &mut rng);
    Frame::new(
        f.synthesis_matrix() + direction.scale(ACHIEVED_FRACTION * mu),
        tol,
    )
}

fn companion_synthesis(psi: &Frame, old_scaled: &Mat, new_scaled: &Frame) -> Mat {
    let range_part =
        old_scaled.adjoint() * new_scaled.frame_operator_inverse() * new_scaled.synthesis_matrix();
    psi.synthesis_matrix() * (range_part + new_scaled.proj_ker_synthesis())
}

fn singular_scaled(e: Error) -> Error {
    match e {
        Error::NotAFrame {
            lambda_min,
            lambda_max,
        } => Error::Singular {
            sigma_min: lambda_min.max(0.0).sqrt(),
            sigma_max: lambda_max.max(0.0).sqrt(),
        },
        other => other,
    }
}

/// Companion `Ψ′` for a perturbation `Φ′` of the synthesis frame, with a
/// semi-normalized symbol and `μ < √A_Φ`.
///
/// The deviation bound is `λ μ` with
/// `λ = ‖m‖_∞ √B_Ψ / (inf|m_n| (√A_Φ − μ))`, evaluated at the achieved `μ`.
pub fn companion_for_synthesis_perturbation(
    m: &Multiplier,
    phi_prime: &Frame,
    tol: &Tol,
) -> Result<(Frame, PerturbReport)> {
    let symbol = m.symbol();
    let phi = m.left();
    let psi = m.right();
    if !symbol.is_semi_normalized() {
        return Err(Error::HypothesisViolated(
            "symbol is not semi-normalized".into(),
        ));
    }
    let mu = phi.distance(phi_prime)?;
    let sqrt_a = phi.lower_bound().sqrt();
    if mu >= sqrt_a {
        return Err(Error::HypothesisViolated(format!(
            "perturbation {mu:.6e} is not below sqrt(A_phi) = {sqrt_a:.6e}"
        )));
    }
    let old_scaled = phi.synthesis_matrix() * symbol.diag();
    let new_scaled = phi_prime.scale_by_symbol(symbol, tol)?;
    let psi_prime = Frame::new(companion_synthesis(psi, &old_scaled, &new_scaled), tol)?;

    let lambda = symbol.sup_mod() * psi.upper_bound().sqrt() / (symbol.inf_mod() * (sqrt_a - mu));
    let report = report_for(
        m,
        &Multiplier::build(symbol, phi_prime, &psi_prime, tol)?,
        psi,
        &psi_prime,
        mu,
        lambda,
        tol,
    )?;
    Ok((psi_prime, report))
}

/// Companion `Φ′` for a perturbation `Ψ′` of the analysis frame.
///
/// Runs the synthesis-side construction on the adjoint `M_{m̄,Ψ,Φ}`; the
/// returned report measures `‖M_{m,Φ′,Ψ′} − M_{m,Φ,Ψ}‖` directly and
/// `‖T_{Φ′} − T_Φ‖` as the companion deviation.
pub fn companion_for_analysis_perturbation(
    m: &Multiplier,
    psi_prime: &Frame,
    tol: &Tol,
) -> Result<(Frame, PerturbReport)> {
    let adjoint = m.adjoint(tol)?;
    let (phi_prime, mut report) = companion_for_synthesis_perturbation(&adjoint, psi_prime, tol)?;
    let rebuilt = Multiplier::build(m.symbol(), &phi_prime, psi_prime, tol)?;
    report.multiplier_residual = op_norm(&(rebuilt.matrix() - m.matrix()));
    report.scale = 1f64.max(op_norm(m.matrix()));
    Ok((phi_prime, report))
}

/// Companion `Ψ′` for a perturbation `Φ′` when `M` is invertible and the
/// symbol may vanish, under `μ ‖m‖_∞ < (√B_Φ ‖M⁻¹‖)⁻¹`.
///
/// The deviation bound uses `λ = ‖m‖_∞ √B_Ψ / (√A_{mΦ} − μ‖m‖_∞)` with the
/// optimal lower bound of `mΦ`.
pub fn companion_for_invertible_synthesis_perturbation(
    m: &Multiplier,
    phi_prime: &Frame,
    tol: &Tol,
) -> Result<(Frame, PerturbReport)> {
    let symbol = m.symbol();
    let phi = m.left();
    let psi = m.right();
    let m_inv_norm = op_norm(&m.invert(tol)?);
    let mu = phi.distance(phi_prime)?;
    let limit = 1.0 / (phi.upper_bound().sqrt() * m_inv_norm);
    if mu * symbol.sup_mod() >= limit {
        return Err(Error::HypothesisViolated(format!(
            "mu * ||m||_inf = {:.6e} is not below 1/(sqrt(B_phi) ||M^-1||) = {limit:.6e}",
            mu * symbol.sup_mod()
        )));
    }
    let old_frame = phi.scale_by_symbol(symbol, tol).map_err(singular_scaled)?;
    let lambda_min = old_frame.lower_bound();
    let bound = ScaledFrameBound {
        lambda_min,
        stated_bound: 1.0 / (phi.upper_bound() * m_inv_norm.powi(2)),
        stated_ratio: lambda_min * phi.upper_bound() * m_inv_norm.powi(2),
        analysis_side_bound: 1.0 / (psi.upper_bound() * m_inv_norm.powi(2)),
    };
    let new_scaled = phi_prime
        .scale_by_symbol(symbol, tol)
        .map_err(singular_scaled)?;
    let psi_prime = Frame::new(
        companion_synthesis(psi, old_frame.synthesis_matrix(), &new_scaled),
        tol,
    )?;
    let gap = lambda_min.sqrt() - mu * symbol.sup_mod();
    let lambda = if gap > 0.0 {
        symbol.sup_mod() * psi.upper_bound().sqrt() / gap
    } else {
        f64::INFINITY
    };
    let mut report = report_for(
        m,
        &Multiplier::build(symbol, phi_prime, &psi_prime, tol)?,
        psi,
        &psi_prime,
        mu,
        lambda,
        tol,
    )?;
    report.scaled_frame_bound = Some(bound);
    Ok((psi_prime, report))
}

/// Companion `Ψ′` for a symbol perturbation `m′`, so that
/// `M_{m′,Φ,Ψ′} = M_{m,Φ,Ψ}`.
///
/// Accepts either hypothesis: `M` invertible with `ε B_Φ < 1/‖M⁻¹‖`, or `m`
/// semi-normalized with `ε √B_Φ < inf|m_n| √B_Φ` (equivalently
/// `ε < inf|m_n|`). The coefficient is `δ = √(B_Φ B_Ψ / A_{m′Φ})`.
pub fn companion_for_symbol_perturbation(
    m: &Multiplier,
    m_prime: &Symbol,
    tol: &Tol,
) -> Result<(Frame, PerturbReport)> {
    let symbol = m.symbol();
    let phi = m.left();
    let psi = m.right();
    let eps = symbol.sup_distance(m_prime)?;
    let b_phi = phi.upper_bound();
    let invertible = match m.invert(tol) {
        Ok(inverse) => eps * b_phi < 1.0 / op_norm(&inverse),
        Err(Error::Singular { .. }) => false,
        Err(e) => return Err(e),
    };
    let semi_normalized =
        symbol.is_semi_normalized() && eps * b_phi.sqrt() < symbol.inf_mod() * b_phi.sqrt();
    let branches = SymbolBranches {
        invertible,
        semi_normalized,
    };
    if !invertible && !semi_normalized {
        return Err(Error::HypothesisViolated(format!(
            "symbol perturbation {eps:.6e} meets neither the invertible nor the semi-normalized hypothesis"
        )));
    }
    let old_scaled = phi.synthesis_matrix() * symbol.diag();
    let new_scaled = phi.scale_by_symbol(m_prime, tol).map_err(singular_scaled)?;
    let psi_prime = Frame::new(companion_synthesis(psi, &old_scaled, &new_scaled), tol)?;
    let delta = (b_phi * psi.upper_bound() / new_scaled.lower_bound()).sqrt();
    let mut report = report_for(
        m,
        &Multiplier::build(m_prime, phi, &psi_prime, tol)?,
        psi,
        &psi_prime,
        eps,
        delta,
        tol,
    )?;
    report.symbol_branches = Some(branches);
    Ok((psi_prime, report))
}

fn report_for(
    old: &Multiplier,
    new: &Multiplier,
    psi: &Frame,
    psi_prime: &Frame,
    achieved_mu: f64,
    bound_coefficient: f64,
    tol: &Tol,
) -> Result<PerturbReport> {
    let companion_deviation = psi.distance(psi_prime)?;
    Ok(PerturbReport {
        achieved_mu,
        bound_coefficient,
        companion_deviation,
        multiplier_residual: op_norm(&(new.matrix() - old.matrix())),
        scale: 1f64.max(op_norm(old.matrix())),
        bound_satisfied: companion_deviation <= bound_coefficient * achieved_mu + tol.rel_eq,
        empirical_ratio: if achieved_mu > 0.0 {
            companion_deviation / achieved_mu
        } else {
            0.0
        },
        scaled_frame_bound: None,
        symbol_branches: None,
    })
}
