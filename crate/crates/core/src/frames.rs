//! Frames on `ℂ^d` given by their `d × N` synthesis matrix.
//!
//! Inner products are linear in the first argument, so the analysis
//! operator is the conjugate transpose of the synthesis operator:
//! `(U f)_n = ⟨f, φ_n⟩ = (T* f)_n`.

use crate::error::{Error, Result};
use crate::numeric::{
    self, check_dims, herm_eig_extremes, identity, inv, op_norm, pinv, relative_residual, Mat, Tol,
    Vector,
};
use crate::symbols::Symbol;

/// A validated frame with its frame operator and optimal bounds cached.
#[derive(Debug, Clone)]
pub struct Frame {
    synth: Mat,
    frame_op: Mat,
    frame_op_inv: Mat,
    lower: f64,
    upper: f64,
}

impl Frame {
    /// Validates that the columns of `synth` span `ℂ^d`.
    pub fn new(synth: Mat, tol: &Tol) -> Result<Self> {
        numeric::ensure_finite(&synth)?;
        if synth.nrows() == 0 || synth.ncols() == 0 {
            return Err(Error::InvalidArgument("frame needs d ≥ 1 and N ≥ 1".into()));
        }
        let frame_op = numeric::hermitian_part(&(&synth * synth.adjoint()));
        let (lower, upper) = herm_eig_extremes(&frame_op, tol)?;
        if synth.ncols() < synth.nrows()
            || upper.is_nan()
            || upper <= 0.0
            || lower <= tol.inv_cond * upper
        {
            return Err(Error::NotAFrame {
                lambda_min: lower,
                lambda_max: upper,
            });
        }
        let frame_op_inv = inv(&frame_op, tol)
            .map_err(|_| Error::NotAFrame {
                lambda_min: lower,
                lambda_max: upper,
            })?
            .matrix;
        Ok(Frame {
            synth,
            frame_op,
            frame_op_inv: numeric::hermitian_part(&frame_op_inv),
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.synth.nrows()
    }

    pub fn count(&self) -> usize {
        self.synth.ncols()
    }

    /// `T`, the `d × N` matrix whose columns are the frame vectors.
    pub fn synthesis_matrix(&self) -> &Mat {
        &self.synth
    }

    /// `U = T*`, the `N × d` analysis matrix.
    pub fn analysis_matrix(&self) -> Mat {
        self.synth.adjoint()
    }

    /// `S = T T*`.
    pub fn frame_operator(&self) -> &Mat {
        &self.frame_op
    }

    pub fn frame_operator_inverse(&self) -> &Mat {
        &self.frame_op_inv
    }

    /// Optimal frame bounds `(A, B)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn vector(&self, n: usize) -> Vector {
        self.synth.column(n).into_owned()
    }

    pub fn analysis(&self, f: &Vector) -> Result<Vector> {
        check_dims("analysis input", self.dim(), f.len())?;
        Ok(self.synth.adjoint() * f)
    }

    pub fn synthesis(&self, c: &Vector) -> Result<Vector> {
        check_dims("synthesis input", self.count(), c.len())?;
        Ok(&self.synth * c)
    }

    pub fn is_riesz_basis(&self) -> bool {
        self.count() == self.dim()
    }

    /// Orthogonal projection of `ℓ²` onto `ker T`: `I_N − U S⁻¹ T`.
    pub fn proj_ker_synthesis(&self) -> Mat {
        let n = self.count();
        let range = self.synth.adjoint() * &self.frame_op_inv * &self.synth;
        numeric::hermitian_part(&(identity(n) - range))
    }

    pub fn canonical_dual(&self, tol: &Tol) -> Result<DualFrame> {
        let synth = &self.frame_op_inv * &self.synth;
        Ok(DualFrame {
            frame: Frame::new(synth, tol)?,
            parent: self.clone(),
            v_part: Mat::zeros(self.dim(), self.count()),
        })
    }

    /// The dual `φ̃_n + V δ_n` with `V = W (I − U S⁻¹ T)`.
    pub fn parametrized_dual(&self, w: &Mat, tol: &Tol) -> Result<DualFrame> {
        check_dims("dual parameter rows", self.dim(), w.nrows())?;
        check_dims("dual parameter cols", self.count(), w.ncols())?;
        let v_part = w * self.proj_ker_synthesis();
        let synth = &self.frame_op_inv * &self.synth + &v_part;
        Ok(DualFrame {
            frame: Frame::new(synth, tol)?,
            parent: self.clone(),
            v_part,
        })
    }

    /// The frame `(m_n φ_n)`, i.e. `T_{mΦ} = T_Φ ℳ_m`.
    pub fn scale_by_symbol(&self, m: &Symbol, tol: &Tol) -> Result<Frame> {
        check_dims("symbol length", self.count(), m.len())?;
        Frame::new(&self.synth * m.diag(), tol)
    }

    /// An invertible `V` on `ℂ^d` with `V φ_n = g_n` for all `n`, if one exists.
    pub fn equivalence_map(&self, other: &Frame, tol: &Tol) -> Option<Mat> {
        let (v, residual) = self.equivalence_candidate(other, tol)?;
        let (smin, smax) = numeric::sigma_extremes(&v);
        (residual <= tol.rel_eq && smax > 0.0 && smin >= tol.inv_cond * smax).then_some(v)
    }

    /// Candidate `V₀ = T_G · pinv(T_F)` and its consistency residual
    /// `‖V₀ T_F − T_G‖ / max(1, ‖V₀ T_F‖, ‖T_G‖)`.
    pub fn equivalence_candidate(&self, other: &Frame, tol: &Tol) -> Option<(Mat, f64)> {
        if self.dim() != other.dim() || self.count() != other.count() {
            return None;
        }
        let v = &other.synth * pinv(&self.synth, tol);
        let residual = relative_residual(&(&v * &self.synth), &other.synth);
        Some((v, residual))
    }

    /// Synthesis-matrix distance `‖T_F − T_G‖`.
    pub fn distance(&self, other: &Frame) -> Result<f64> {
        check_dims("frame distance rows", self.dim(), other.dim())?;
        check_dims("frame distance cols", self.count(), other.count())?;
        Ok(op_norm(&(&self.synth - &other.synth)))
    }
}

/// A dual frame `Φ^d` of a parent frame `Φ`, with `T_{Φ^d} U_Φ = I`.
#[derive(Debug, Clone)]
pub struct DualFrame {
    frame: Frame,
    parent: Frame,
    v_part: Mat,
}

impl DualFrame {
    /// Wraps an arbitrary frame after checking it reconstructs through `parent`.
    pub fn from_frame(frame: Frame, parent: &Frame, tol: &Tol) -> Result<Self> {
        check_dims("dual frame rows", parent.dim(), frame.dim())?;
        check_dims("dual frame cols", parent.count(), frame.count())?;
        let residual = relative_residual(
            &(frame.synthesis_matrix() * parent.analysis_matrix()),
            &identity(parent.dim()),
        );
        if residual > tol.rel_eq {
            return Err(Error::InvalidDual { residual });
        }
        let v_part =
            frame.synthesis_matrix() - parent.frame_operator_inverse() * parent.synthesis_matrix();
        Ok(DualFrame {
            frame,
            parent: parent.clone(),
            v_part,
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn parent(&self) -> &Frame {
        &self.parent
    }

    /// Offset `V` from the canonical dual; zero for the canonical dual itself.
    pub fn v_part(&self) -> &Mat {
        &self.v_part
    }

    pub fn into_frame(self) -> Frame {
        self.frame
    }

    /// `‖T_{Φ^d} U_Φ − I‖` in the relative residual policy.
    pub fn duality_residual(&self) -> f64 {
        relative_residual(
            &(self.frame.synthesis_matrix() * self.parent.analysis_matrix()),
            &identity(self.parent.dim()),
        )
    }

    /// `max(‖V U_{Φ̃}‖, ‖T_{Φ̃} V*‖)`.
    pub fn annihilation_residual(&self) -> f64 {
        let canonical_analysis =
            self.parent.analysis_matrix() * self.parent.frame_operator_inverse();
        let a = op_norm(&(&self.v_part * &canonical_analysis));
        let b = op_norm(&(canonical_analysis.adjoint() * self.v_part.adjoint()));
        a.max(b)
    }

    /// Whether this dual belongs to `parent` (same synthesis matrix).
    pub fn is_dual_of(&self, parent: &Frame) -> bool {
        self.parent.synthesis_matrix() == parent.synthesis_matrix()
    }
}
