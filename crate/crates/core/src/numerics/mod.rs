//! Dense complex/real linear algebra used throughout the crate.
//!
//! Complex quantities (channels, beamforming vectors) live in [`CMat`] and
//! [`CVec`]. Everything that needs an eigendecomposition goes through the
//! real embedding `[Re -Im; Im Re]`, so only a real symmetric eigensolver is
//! provided ([`sym_eig_desc`]).

mod eigen;
mod embed;

pub use eigen::{sym_eig_desc, SymEigen};
pub use embed::{complex_reassemble, real_embed_matrix, real_embed_vector, RealEmbedding};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Squared Frobenius norm of a complex matrix.
pub fn frobenius_sqr(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re{a^H b}`.
pub fn re_inner(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Convert a linear power ratio to dB. Zero maps to `-inf`.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Convert dB to a linear power ratio. `-inf` maps to zero.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Multiply `x` by a unit-modulus scalar so that its largest-magnitude entry
/// is real and positive. The first maximal entry wins ties.
pub fn normalize_global_phase(x: &mut CVec) {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in x.iter().enumerate() {
        let m = z.norm();
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    if best_mag > 0.0 {
        let rot = x[best].conj() / best_mag;
        for z in x.iter_mut() {
            *z *= rot;
        }
    }
}

pub(crate) fn check_finite_c(m: &CMat, what: &str) -> crate::Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversions() {
        assert_eq!(to_db(1.0), 0.0);
        assert_eq!(to_db(0.0), f64::NEG_INFINITY);
        assert_eq!(from_db(f64::NEG_INFINITY), 0.0);
        assert!((from_db(30.0) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn phase_normalization_makes_peak_real() {
        let mut x = CVec::from_vec(vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(0.0, -3.0),
            Complex64::new(1.0, 1.0),
        ]);
        let before: Vec<f64> = x.iter().map(|z| z.norm()).collect();
        normalize_global_phase(&mut x);
        assert!((x[1].re - 3.0).abs() < 1e-15 && x[1].im.abs() < 1e-15);
        for (z, m) in x.iter().zip(before) {
            assert!((z.norm() - m).abs() < 1e-15);
        }
    }
}
