//! Symbol sequences `m = (m_n)` and their pointwise transforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{diag, Mat, C64};

/// A finite complex symbol with cached modulus extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    values: Vec<C64>,
    inf_mod: f64,
    sup_mod: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub semi_normalized: bool,
    pub inf_mod: f64,
    pub sup_mod: f64,
}

impl Symbol {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "symbol must have at least one entry".into(),
            ));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let inf_mod = values
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        let sup_mod = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Symbol {
            values,
            inf_mod,
            sup_mod,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Symbol::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn constant(len: usize, value: C64) -> Result<Self> {
        Symbol::new(vec![value; len])
    }

    pub fn ones(len: usize) -> Result<Self> {
        Symbol::constant(len, C64::new(1.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn inf_mod(&self) -> f64 {
        self.inf_mod
    }

    /// `‖m‖_∞`.
    pub fn sup_mod(&self) -> f64 {
        self.sup_mod
    }

    pub fn is_semi_normalized(&self) -> bool {
        self.inf_mod > 0.0
    }

    pub fn classify(&self) -> Classification {
        Classification {
            semi_normalized: self.is_semi_normalized(),
            inf_mod: self.inf_mod,
            sup_mod: self.sup_mod,
        }
    }

    pub fn reciprocal(&self) -> Result<Symbol> {
        if let Some(index) = self.values.iter().position(|z| z.norm() == 0.0) {
            return Err(Error::ZeroEntry { index });
        }
        Symbol::new(self.values.iter().map(|z| z.inv()).collect())
    }

    pub fn conj(&self) -> Symbol {
        Symbol {
            values: self.values.iter().map(|z| z.conj()).collect(),
            inf_mod: self.inf_mod,
            sup_mod: self.sup_mod,
        }
    }

    pub fn modulus(&self) -> Symbol {
        Symbol {
            values: self
                .values
                .iter()
                .map(|z| C64::new(z.norm(), 0.0))
                .collect(),
            inf_mod: self.inf_mod,
            sup_mod: self.sup_mod,
        }
    }

    /// The diagonal multiplication operator `ℳ_m`.
    pub fn diag(&self) -> Mat {
        diag(&self.values)
    }

    /// `‖m − other‖_∞`.
    pub fn sup_distance(&self, other: &Symbol) -> Result<f64> {
        crate::numeric::check_dims("symbol distance", self.len(), other.len())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Copy with entry `index` replaced by `value`.
    pub fn with_entry(&self, index: usize, value: C64) -> Result<Symbol> {
        if index >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for symbol of length {}",
                self.len()
            )));
        }
        let mut values = self.values.clone();
        values[index] = value;
        Symbol::new(values)
    }

    /// A seeded ε-perturbation `m′` with `0.5·eps ≤ ‖m − m′‖_∞ ≤ eps`.
    ///
    /// Per-entry offsets are drawn uniformly from the unit disc, then the
    /// whole offset vector is rescaled so its sup-norm is uniform in
    /// `[0.5·eps, eps]`. Semi-normalization is not enforced.
    pub fn perturb(&self, eps: f64, seed: u64) -> Result<Symbol> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets: Vec<C64> = (0..self.len()).map(|_| unit_disc(&mut rng)).collect();
        let sup = offsets.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let target = eps * rng.random_range(0.5..=1.0);
        // Degenerate draws (all offsets at the origin) fall back to a unit offset on entry 0.
        let (offsets, sup) = if sup > 0.0 {
            (offsets, sup)
        } else {
            let mut o = vec![C64::new(0.0, 0.0); self.len()];
            o[0] = C64::new(1.0, 0.0);
            (o, 1.0)
        };
        let values = self
            .values
            .iter()
            .zip(&offsets)
            .map(|(m, o)| m + o * (target / sup))
            .collect();
        Symbol::new(values)
    }
}

fn unit_disc<R: Rng>(rng: &mut R) -> C64 {
    let r = rng.random::<f64>().sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, theta)
}
