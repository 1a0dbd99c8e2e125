//! Dense complex linear algebra used by every other module.
//!
//! Operators are plain `DMatrix<Complex<f64>>` values. Norms are spectral
//! norms throughout, and operator equality is always judged with the
//! scale-aware residual `‖X − Y‖ / max(1, ‖X‖, ‖Y‖)`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tol {
    /// Relative residual threshold for operator equalities.
    pub rel_eq: f64,
    /// `σ_min / σ_max` below which a matrix counts as singular.
    pub inv_cond: f64,
    /// Relative singular-value cutoff for the pseudo-inverse.
    pub pinv_cutoff: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rel_eq: 1e-8,
            inv_cond: 1e-10,
            pinv_cutoff: 1e-12,
        }
    }
}

impl Tol {
    pub fn new(rel_eq: f64, inv_cond: f64, pinv_cutoff: f64) -> Result<Self> {
        let tol = Tol {
            rel_eq,
            inv_cond,
            pinv_cutoff,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn with_rel_eq(self, rel_eq: f64) -> Result<Self> {
        Tol::new(rel_eq, self.inv_cond, self.pinv_cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_eq", self.rel_eq),
            ("inv_cond", self.inv_cond),
            ("pinv_cutoff", self.pinv_cutoff),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of comparing a residual against a threshold with a margin band.
///
/// Residuals within a factor of ten of the threshold (either side) are
/// `Indeterminate`: an iff statement cannot be adjudicated there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

impl Verdict {
    pub const MARGIN: f64 = 10.0;

    pub fn classify(residual: f64, threshold: f64) -> Verdict {
        if residual <= threshold / Self::MARGIN {
            Verdict::Holds
        } else if residual >= threshold * Self::MARGIN {
            Verdict::Fails
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn is_indeterminate(self) -> bool {
        self == Verdict::Indeterminate
    }
}

pub fn is_finite(a: &Mat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(a: &Mat) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Spectral norm: the largest singular value.
pub fn op_norm(a: &Mat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn hermitian_part(h: &Mat) -> Mat {
    (h + h.adjoint()).scale(0.5)
}

/// Extremal eigenvalues `(λ_min, λ_max)` of a Hermitian matrix.
pub fn herm_eig_extremes(h: &Mat, tol: &Tol) -> Result<(f64, f64)> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            context: "herm_eig_extremes (square input)",
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    ensure_finite(h)?;
    let norm = op_norm(h);
    let asym = op_norm(&(h - h.adjoint()));
    if asym > tol.rel_eq * norm {
        return Err(Error::NotHermitian {
            asymmetry: if norm > 0.0 { asym / norm } else { asym },
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
pub fn pinv(a: &Mat, tol: &Tol) -> Mat {
    let (rows, cols) = a.shape();
    if a.is_empty() {
        return Mat::zeros(cols, rows);
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.pinv_cutoff * sigma_max;
    let mut out = Mat::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k).adjoint();
            out += (vk * uk).scale(1.0 / s);
        }
    }
    out
}

/// A matrix inverse together with the conditioning it was computed under.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub matrix: Mat,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Inverse {
    pub fn condition(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }
}

/// Inverse via the SVD; fails when `σ_min / σ_max < inv_cond`.
pub fn inv(a: &Mat, tol: &Tol) -> Result<Inverse> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "inv (square input)",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    ensure_finite(a)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot invert an empty matrix".into(),
        ));
    }
    let svd = SVD::new(a.clone(), true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let sigma_min = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if sigma_max == 0.0 || sigma_min < tol.inv_cond * sigma_max {
        return Err(Error::Singular {
            sigma_min,
            sigma_max,
        });
    }
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let n = a.nrows();
    let mut matrix = Mat::zeros(n, n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let vk = v_t.row(k).adjoint();
        let uk = u.column(k).adjoint();
        matrix += (vk * uk).scale(1.0 / s);
    }
    Ok(Inverse {
        matrix,
        sigma_min,
        sigma_max,
    })
}

/// `(σ_min, σ_max)` of a matrix; `σ_min` is taken over `min(rows, cols)` values.
pub fn sigma_extremes(a: &Mat) -> (f64, f64) {
    let sv = singular_values(a);
    (
        sv.last().copied().unwrap_or(0.0),
        sv.first().copied().unwrap_or(0.0),
    )
}

/// `‖X − Y‖ / max(1, ‖X‖, ‖Y‖)`.
pub fn relative_residual(x: &Mat, y: &Mat) -> f64 {
    let scale = 1f64.max(op_norm(x)).max(op_norm(y));
    op_norm(&(x - y)) / scale
}

pub fn approx_eq(x: &Mat, y: &Mat, tol: &Tol) -> bool {
    x.shape() == y.shape() && relative_residual(x, y) <= tol.rel_eq
}

pub fn diag(values: &[C64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(values))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub(crate) fn check_dims(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real_diag(v: &[f64]) -> Mat {
        diag(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn op_norm_trivial_cases() {
        assert_relative_eq!(op_norm(&identity(3)), 1.0, epsilon = 1e-15);
        assert_eq!(op_norm(&Mat::zeros(2, 4)), 0.0);
        assert_relative_eq!(op_norm(&real_diag(&[1.0, -7.0, 3.0])), 7.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_extremes_of_diagonal() {
        let tol = Tol::default();
        assert_eq!(herm_eig_extremes(&identity(4), &tol).unwrap(), (1.0, 1.0));
        let (lo, hi) = herm_eig_extremes(&real_diag(&[1.0, 4.0, 9.0]), &tol).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-14);
        assert_relative_eq!(hi, 9.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_extremes_rejects_non_hermitian() {
        let mut h = identity(2);
        h[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(
            herm_eig_extremes(&h, &Tol::default()),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            herm_eig_extremes(&Mat::zeros(2, 3), &Tol::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pinv_of_rank_deficient_diagonal() {
        let p = pinv(&real_diag(&[2.0, 0.0]), &Tol::default());
        assert!(relative_residual(&p, &real_diag(&[0.5, 0.0])) < 1e-15);
        assert!(relative_residual(&pinv(&identity(3), &Tol::default()), &identity(3)) < 1e-15);
        assert_eq!(pinv(&Mat::zeros(2, 3), &Tol::default()).shape(), (3, 2));
    }

    #[test]
    fn inv_of_diagonal_and_singular() {
        let tol = Tol::default();
        let i = inv(&real_diag(&[2.0, 4.0]), &tol).unwrap();
        assert!(relative_residual(&i.matrix, &real_diag(&[0.5, 0.25])) < 1e-15);
        assert_relative_eq!(i.sigma_min, 2.0, epsilon = 1e-14);
        assert_relative_eq!(i.sigma_max, 4.0, epsilon = 1e-14);
        assert!(matches!(
            inv(&real_diag(&[1.0, 1e-12]), &tol),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            inv(&Mat::zeros(2, 3), &tol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tol_validation() {
        assert!(Tol::new(1e-8, 1e-10, 1e-12).is_ok());
        assert!(Tol::new(0.0, 1e-10, 1e-12).is_err());
        assert!(Tol::new(1e-8, 1.0, 1e-12).is_err());
        assert!(Tol::default().with_rel_eq(-1.0).is_err());
    }

    #[test]
    fn verdict_margin_band() {
        assert_eq!(Verdict::classify(1e-12, 1e-8), Verdict::Holds);
        assert_eq!(Verdict::classify(1e-3, 1e-8), Verdict::Fails);
        assert_eq!(Verdict::classify(2e-8, 1e-8), Verdict::Indeterminate);
        assert_eq!(Verdict::classify(5e-9, 1e-8), Verdict::Indeterminate);
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = identity(2);
        a[(1, 1)] = C64::new(f64::NAN, 0.0);
        assert!(!is_finite(&a));
        assert!(matches!(inv(&a, &Tol::default()), Err(Error::NonFinite)));
    }
}
