//! Seeded constructors for the frame and symbol families used in tests and
//! by the command-line harness. Equal seeds give bit-identical output.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::numeric::{identity, op_norm, sigma_extremes, Mat, Tol, C64};
use crate::symbols::Symbol;

pub const DEFAULT_CONDITION_CAP: f64 = 100.0;
const MAX_ATTEMPTS: usize = 1000;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes `(seed, stream, index)` into an independent sub-seed (SplitMix64 finaliser).
pub fn sub_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Entries i.i.d. standard complex Gaussian (real and imaginary parts `N(0, 1/2)`).
pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// A Gaussian matrix rescaled to unit spectral norm.
pub fn unit_norm_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    loop {
        let g = gaussian_matrix(rows, cols, rng);
        let n = op_norm(&g);
        if n > 0.0 {
            return g.unscale(n);
        }
    }
}

/// A random invertible `d × d` matrix with `σ_max / σ_min ≤ cap`.
pub fn random_invertible<R: Rng>(d: usize, cap: f64, rng: &mut R) -> Result<Mat> {
    for _ in 0..MAX_ATTEMPTS {
        let g = gaussian_matrix(d, d, rng);
        let (smin, smax) = sigma_extremes(&g);
        if smin > 0.0 && smax / smin <= cap {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
        reason: format!("no {d}x{d} matrix with condition ≤ {cap}"),
    })
}

pub fn onb(d: usize) -> Result<Frame> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    Frame::new(identity(d), &Tol::default())
}

/// First `d` rows of the `N`-point DFT matrix with unit-norm columns.
pub fn harmonic_tight(d: usize, n: usize) -> Result<Frame> {
    if d == 0 || n < d {
        return Err(Error::InvalidArgument(format!(
            "harmonic frame needs 1 ≤ d ≤ N, got d={d}, N={n}"
        )));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let t = Mat::from_fn(d, n, |j, k| {
        let phase = TAU * ((j * k) % n) as f64 / n as f64;
        C64::from_polar(scale, phase)
    });
    Frame::new(t, &Tol::default())
}

/// Normalised periodic Gaussian window `g[t] = exp(−π (t − d/2)² / d)`.
pub fn gaussian_window(d: usize) -> Vec<f64> {
    let half = d as f64 / 2.0;
    let g: Vec<f64> = (0..d)
        .map(|t| (-PI * (t as f64 - half).powi(2) / d as f64).exp())
        .collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.into_iter().map(|x| x / norm).collect()
}

/// Time-frequency shifts of a Gaussian window on `ℤ_d` over the lattice `aℤ × bℤ`.
///
/// Column `k·(d/b) + l` is `g[(t − k a) mod d] · exp(2πi l b t / d)`.
pub fn finite_gabor(d: usize, a: usize, b: usize) -> Result<Frame> {
    if d == 0 || a == 0 || b == 0 || !d.is_multiple_of(a) || !d.is_multiple_of(b) {
        return Err(Error::InvalidArgument(format!(
            "lattice steps must divide d: d={d}, a={a}, b={b}"
        )));
    }
    let shifts = d / a;
    let mods = d / b;
    let n = shifts * mods;
    let g = gaussian_window(d);
    let mut t = Mat::zeros(d, n);
    for k in 0..shifts {
        for l in 0..mods {
            let col = k * mods + l;
            for s in 0..d {
                let w = g[(s + d - (k * a) % d) % d];
                let phase = TAU * ((l * b * s) % d) as f64 / d as f64;
                t[(s, col)] = C64::from_polar(w, phase);
            }
        }
    }
    Frame::new(t, &Tol::default())
}

/// `(a, b)` with `a, b | d` and `(d/a)(d/b) = N` giving a Gabor frame,
/// preferring the finest frequency sampling.
pub fn gabor_lattice(d: usize, n: usize) -> Option<(usize, usize)> {
    (1..=d)
        .rev()
        .filter(|mods| d.is_multiple_of(*mods) && n.is_multiple_of(*mods))
        .filter_map(|mods| {
            let shifts = n / mods;
            (shifts > 0 && d.is_multiple_of(shifts)).then_some((d / shifts, d / mods))
        })
        .find(|&(a, b)| finite_gabor(d, a, b).is_ok())
}

/// Complex Gaussian frame, resampled until `B / A ≤ condition_cap`.
pub fn random_frame(d: usize, n: usize, seed: u64, condition_cap: f64) -> Result<Frame> {
    random_frame_with(d, n, &mut rng_from_seed(seed), condition_cap)
}

pub fn random_frame_with<R: Rng>(
    d: usize,
    n: usize,
    rng: &mut R,
    condition_cap: f64,
) -> Result<Frame> {
    if d == 0 || n < d {
        return Err(Error::InvalidArgument(format!(
            "random frame needs 1 ≤ d ≤ N, got d={d}, N={n}"
        )));
    }
    if condition_cap.is_nan() || condition_cap < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "condition cap must be ≥ 1, got {condition_cap}"
        )));
    }
    let tol = Tol::default();
    for _ in 0..MAX_ATTEMPTS {
        if let Ok(f) = Frame::new(gaussian_matrix(d, n, rng), &tol) {
            let (a, b) = f.bounds();
            if b / a <= condition_cap {
                return Ok(f);
            }
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
        reason: format!("no {d}x{n} frame with B/A ≤ {condition_cap}"),
    })
}

pub fn riesz_basis(d: usize, seed: u64, condition_cap: f64) -> Result<Frame> {
    random_frame(d, d, seed, condition_cap)
}

/// Moduli uniform in `[lo, hi]`, phases uniform on the circle.
pub fn random_symbol(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Symbol> {
    random_symbol_with(n, lo, hi, &mut rng_from_seed(seed))
}

pub fn random_symbol_with<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<Symbol> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo ≤ hi, got lo={lo}, hi={hi}"
        )));
    }
    let values = (0..n)
        .map(|_| {
            let r = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            C64::from_polar(r, rng.random::<f64>() * TAU)
        })
        .collect();
    Symbol::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_residual;
    use approx::assert_relative_eq;

    #[test]
    fn onb_fixture() {
        assert_eq!(onb(1).unwrap().synthesis_matrix(), &identity(1));
        assert_eq!(onb(3).unwrap().synthesis_matrix(), &identity(3));
        assert_eq!(onb(5).unwrap().bounds(), (1.0, 1.0));
        assert!(onb(0).is_err());
    }

    #[test]
    fn harmonic_frames_are_tight() {
        for (d, n) in [(3, 3), (2, 3), (3, 7), (4, 10)] {
            let f = harmonic_tight(d, n).unwrap();
            let c = n as f64 / d as f64;
            let (a, b) = f.bounds();
            assert_relative_eq!(a, c, epsilon = 1e-12);
            assert_relative_eq!(b, c, epsilon = 1e-12);
            assert!(
                relative_residual(f.frame_operator(), &(identity(d) * C64::new(c, 0.0))) < 1e-12
            );
            for k in 0..n {
                assert_relative_eq!(f.vector(k).norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gabor_lattices() {
        assert_eq!(finite_gabor(4, 1, 1).unwrap().count(), 16);
        assert!(matches!(
            finite_gabor(4, 4, 4),
            Err(Error::NotAFrame { .. })
        ));
        assert!(matches!(
            finite_gabor(6, 4, 3),
            Err(Error::InvalidArgument(_))
        ));
        let g = gaussian_window(8);
        assert_relative_eq!(g.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_frames_are_seeded_and_capped() {
        let a = random_frame(4, 9, 11, 50.0).unwrap();
        let b = random_frame(4, 9, 11, 50.0).unwrap();
        assert_eq!(a.synthesis_matrix(), b.synthesis_matrix());
        let (lo, hi) = a.bounds();
        assert!(hi / lo <= 50.0);
        assert!(riesz_basis(5, 3, DEFAULT_CONDITION_CAP)
            .unwrap()
            .is_riesz_basis());
        assert!(random_frame(4, 3, 0, 10.0).is_err());
        assert!(random_frame(4, 4, 0, 0.5).is_err());
    }

    #[test]
    fn symbols_within_requested_moduli() {
        let m = random_symbol(12, 0.5, 2.0, 4).unwrap();
        let k = m.classify();
        assert!(k.semi_normalized && k.inf_mod >= 0.5 && k.sup_mod <= 2.0);
        assert_eq!(m, random_symbol(12, 0.5, 2.0, 4).unwrap());
        let u = random_symbol(6, 1.0, 1.0, 9).unwrap();
        assert!(u.values().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!(random_symbol(3, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, 0, 0), sub_seed(1, 0, 1));
        assert_ne!(sub_seed(1, 0, 0), sub_seed(1, 1, 0));
        assert_eq!(sub_seed(7, 3, 2), sub_seed(7, 3, 2));
    }

    #[test]
    fn lattice_search() {
        assert_eq!(gabor_lattice(4, 8), Some((2, 1)));
        assert_eq!(gabor_lattice(6, 6), Some((6, 1)));
        assert!(gabor_lattice(4, 5).is_none());
    }
}
