//! Frame multipliers `M_{m,Φ,Ψ} f = Σ m_n ⟨f, ψ_n⟩ φ_n = T_Φ ℳ_m U_Ψ f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{DualFrame, Frame};
use crate::numeric::{
    check_dims, herm_eig_extremes, inv, op_norm, relative_residual, sigma_extremes, Mat, Tol,
    Vector, Verdict,
};
use crate::symbols::Symbol;

/// Matrix of `T_L ℳ_m T_R*` for raw synthesis matrices.
pub fn realize(symbol: &Symbol, left: &Mat, right: &Mat) -> Mat {
    left * symbol.diag() * right.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvDiag {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub invertible: bool,
}

#[derive(Debug, Clone)]
pub struct Multiplier {
    symbol: Symbol,
    left: Frame,
    right: Frame,
    matrix: Mat,
    inv_diag: InvDiag,
}

impl Multiplier {
    pub fn build(m: &Symbol, phi: &Frame, psi: &Frame, tol: &Tol) -> Result<Self> {
        check_dims("multiplier frame dimensions", phi.dim(), psi.dim())?;
        check_dims("multiplier frame lengths", phi.count(), psi.count())?;
        check_dims("multiplier symbol length", phi.count(), m.len())?;
        let matrix = realize(m, phi.synthesis_matrix(), psi.synthesis_matrix());
        let (sigma_min, sigma_max) = sigma_extremes(&matrix);
        let inv_diag = InvDiag {
            sigma_min,
            sigma_max,
            invertible: sigma_max > 0.0 && sigma_min >= tol.inv_cond * sigma_max,
        };
        Ok(Multiplier {
            symbol: m.clone(),
            left: phi.clone(),
            right: psi.clone(),
            matrix,
            inv_diag,
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    /// `Φ`, the synthesis side.
    pub fn left(&self) -> &Frame {
        &self.left
    }

    /// `Ψ`, the analysis side.
    pub fn right(&self) -> &Frame {
        &self.right
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn inv_diag(&self) -> InvDiag {
        self.inv_diag
    }

    pub fn is_invertible(&self) -> bool {
        self.inv_diag.invertible
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    pub fn apply(&self, f: &Vector) -> Result<Vector> {
        check_dims("multiplier input", self.dim(), f.len())?;
        Ok(&self.matrix * f)
    }

    /// `M_{m̄,Ψ,Φ}`, which equals the adjoint of `self`.
    pub fn adjoint(&self, tol: &Tol) -> Result<Multiplier> {
        Multiplier::build(&self.symbol.conj(), &self.right, &self.left, tol)
    }

    pub fn invert(&self, tol: &Tol) -> Result<Mat> {
        if !self.inv_diag.invertible {
            return Err(Error::Singular {
                sigma_min: self.inv_diag.sigma_min,
                sigma_max: self.inv_diag.sigma_max,
            });
        }
        Ok(inv(&self.matrix, tol)?.matrix)
    }

    /// Matrix of `M_{1/m, Ψ̃, Φ̃}`.
    pub fn canonical_inverse_candidate(&self, tol: &Tol) -> Result<Mat> {
        let recip = self.symbol.reciprocal()?;
        let psi_dual = self.right.canonical_dual(tol)?;
        let phi_dual = self.left.canonical_dual(tol)?;
        Ok(realize(
            &recip,
            psi_dual.frame().synthesis_matrix(),
            phi_dual.frame().synthesis_matrix(),
        ))
    }

    /// `ψ†_n = M⁻¹(m_n φ_n)` (a dual of `Ψ`) and `φ†_n = (M⁻¹)*(m̄_n ψ_n)` (a dual of `Φ`).
    pub fn dagger_frames(&self, tol: &Tol) -> Result<DaggerFrames> {
        let m_inv = self.invert(tol)?;
        let psi_dagger = Frame::new(
            &m_inv * self.left.synthesis_matrix() * self.symbol.diag(),
            tol,
        )?;
        let phi_dagger = Frame::new(
            m_inv.adjoint() * self.right.synthesis_matrix() * self.symbol.conj().diag(),
            tol,
        )?;
        Ok(DaggerFrames {
            psi_dagger: DualFrame::from_frame(psi_dagger, &self.right, tol)?,
            phi_dagger: DualFrame::from_frame(phi_dagger, &self.left, tol)?,
        })
    }

    /// Evaluates the four norm conditions characterising
    /// `M⁻¹ = M_{1/m, Ψ̃, Φ̃}` together with the direct comparison.
    ///
    /// Conditions (i)/(ii) hold iff `Ψ† = Ψ̃` and (iii)/(iv) iff `Φ† = Φ̃`.
    /// For `N > d` each of these is sufficient for the direct equality but
    /// they need not coincide: `Ψ = V(mΦ)` with non-constant `|m|` gives
    /// `Ψ† = Ψ̃` and `Φ† ≠ Φ̃`. The report records all five independently.
    pub fn inversion_report(&self, tol: &Tol) -> Result<InversionReport> {
        if let Some(index) = self.symbol.values().iter().position(|z| z.norm() == 0.0) {
            return Err(Error::ZeroEntry { index });
        }
        let m_inv = self.invert(tol)?;
        let candidate = self.canonical_inverse_candidate(tol)?;
        let direct_residual = relative_residual(&m_inv, &candidate);
        let direct = Verdict::classify(direct_residual, tol.rel_eq);

        let abs_m = self.symbol.modulus().diag();
        let daggers = self.dagger_frames(tol)?;

        // ‖S_Ψ⁻¹‖ = 1/A_Ψ, never by explicit inversion.
        let inv_lower_psi = 1.0 / self.right.lower_bound();
        let inv_lower_phi = 1.0 / self.left.lower_bound();
        let rhs_i = op_norm(&(&m_inv * self.left.synthesis_matrix() * &abs_m)).powi(2);
        let rhs_iii = op_norm(&(m_inv.adjoint() * self.right.synthesis_matrix() * &abs_m)).powi(2);
        let upper_psi_dagger =
            herm_eig_extremes(daggers.psi_dagger.frame().frame_operator(), tol)?.1;
        let upper_phi_dagger =
            herm_eig_extremes(daggers.phi_dagger.frame().frame_operator(), tol)?.1;

        let cond_i = ConditionCheck::new(inv_lower_psi, rhs_i, tol);
        let cond_ii = ConditionCheck::new(upper_psi_dagger, inv_lower_psi, tol);
        let cond_iii = ConditionCheck::new(inv_lower_phi, rhs_iii, tol);
        let cond_iv = ConditionCheck::new(upper_phi_dagger, inv_lower_phi, tol);

        let direct_equal = direct_residual <= tol.rel_eq;
        let flags = [
            direct_equal,
            cond_i.holds,
            cond_ii.holds,
            cond_iii.holds,
            cond_iv.holds,
        ];
        let consistent = flags.iter().all(|&b| b == flags[0]);
        let indeterminate = direct.is_indeterminate()
            || [&cond_i, &cond_ii, &cond_iii, &cond_iv]
                .iter()
                .any(|c| c.verdict.is_indeterminate());
        Ok(InversionReport {
            direct_residual,
            direct_equal,
            cond_i,
            cond_ii,
            cond_iii,
            cond_iv,
            consistent,
            indeterminate,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DaggerFrames {
    pub psi_dagger: DualFrame,
    pub phi_dagger: DualFrame,
}

/// One scalar comparison `lhs = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(1, lhs, rhs)`.
    pub residual: f64,
    pub holds: bool,
    pub verdict: Verdict,
}

impl ConditionCheck {
    pub fn new(lhs: f64, rhs: f64, tol: &Tol) -> Self {
        let residual = (lhs - rhs).abs() / 1f64.max(lhs).max(rhs);
        ConditionCheck {
            lhs,
            rhs,
            residual,
            holds: residual <= tol.rel_eq,
            verdict: Verdict::classify(residual, tol.rel_eq),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    /// Relative residual of `M⁻¹` against `M_{1/m,Ψ̃,Φ̃}`.
    pub direct_residual: f64,
    pub direct_equal: bool,
    pub cond_i: ConditionCheck,
    pub cond_ii: ConditionCheck,
    pub cond_iii: ConditionCheck,
    pub cond_iv: ConditionCheck,
    /// All five indicators agree.
    pub consistent: bool,
    /// Some residual sits inside the margin band around `rel_eq`.
    pub indeterminate: bool,
}

impl InversionReport {
    pub fn indicators(&self) -> [bool; 5] {
        [
            self.direct_equal,
            self.cond_i.holds,
            self.cond_ii.holds,
            self.cond_iii.holds,
            self.cond_iv.holds,
        ]
    }
}
