use super::{CMat, CVec, Complex64, RMat, RVec};
use crate::{Error, Result};

/// Real 2N x 2M image `[Re H, -Im H; Im H, Re H]` of a complex N x M matrix.
///
/// For any complex `x` with stacked real form `x' = [Re x; Im x]`,
/// `G x'` is the stacked real form of `H x`, so `|G x'| = |H x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealEmbedding {
    g: RMat,
}

impl RealEmbedding {
    pub fn matrix(&self) -> &RMat {
        &self.g
    }

    pub fn into_matrix(self) -> RMat {
        self.g
    }

    /// `G^T G`, the real Gram matrix used as the quadratic form of the lifted problem.
    pub fn gram(&self) -> RMat {
        self.g.tr_mul(&self.g)
    }

    pub fn apply(&self, x_prime: &RVec) -> RVec {
        &self.g * x_prime
    }
}

pub fn real_embed_matrix(h: &CMat) -> RealEmbedding {
    let (n, m) = h.shape();
    let g = RMat::from_fn(2 * n, 2 * m, |r, c| {
        let z = h[(r % n, c % m)];
        match (r < n, c < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    RealEmbedding { g }
}

pub fn real_embed_vector(x: &CVec) -> RVec {
    let m = x.len();
    RVec::from_fn(2 * m, |i, _| if i < m { x[i].re } else { x[i - m].im })
}

/// Inverse of [`real_embed_vector`]: `x = x'[0..M] + j x'[M..2M]`.
pub fn complex_reassemble(x_prime: &RVec) -> Result<CVec> {
    let len = x_prime.len();
    if !len.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "real-embedded vector must have even length, got {len}"
        )));
    }
    let m = len / 2;
    Ok(CVec::from_fn(m, |i, _| {
        Complex64::new(x_prime[i], x_prime[i + m])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_scalar_embeds_as_identity() {
        let g = real_embed_matrix(&CMat::from_element(1, 1, c(1.0, 0.0)));
        assert_eq!(
            g.matrix(),
            &RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn imaginary_unit_embeds_as_rotation() {
        let g = real_embed_matrix(&CMat::from_element(1, 1, c(0.0, 1.0)));
        assert_eq!(
            g.matrix(),
            &RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn vector_stacking() {
        let x = CVec::from_vec(vec![c(1.0, 2.0)]);
        assert_eq!(real_embed_vector(&x).as_slice(), &[1.0, 2.0]);
        assert_eq!(real_embed_vector(&CVec::zeros(3)), RVec::zeros(6));
        let back = complex_reassemble(&RVec::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(back[0], c(1.0, 2.0));
        assert_eq!(complex_reassemble(&RVec::zeros(4)).unwrap(), CVec::zeros(2));
    }

    #[test]
    fn odd_length_rejected() {
        assert!(matches!(
            complex_reassemble(&RVec::zeros(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn block_structure_3x2() {
        let h = CMat::from_fn(3, 2, |r, col| c(r as f64 + 1.0, -(col as f64) - 0.5));
        let g = real_embed_matrix(&h);
        let g = g.matrix();
        assert_eq!(g.shape(), (6, 4));
        for r in 0..3 {
            for col in 0..2 {
                let z = h[(r, col)];
                assert_eq!(g[(r, col)], z.re);
                assert_eq!(g[(r, col + 2)], -z.im);
                assert_eq!(g[(r + 3, col)], z.im);
                assert_eq!(g[(r + 3, col + 2)], z.re);
            }
        }
    }

    fn cvec(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), len)
    }

    proptest! {
        #[test]
        fn embedding_preserves_product_norm(h in cvec(6), x in cvec(2)) {
            let h = CMat::from_iterator(3, 2, h.into_iter().map(|(a, b)| c(a, b)));
            let x = CVec::from_iterator(2, x.into_iter().map(|(a, b)| c(a, b)));
            let direct = (&h * &x).norm();
            let embedded = real_embed_matrix(&h).apply(&real_embed_vector(&x)).norm();
            prop_assert!((direct - embedded).abs() <= 1e-12 * direct.max(1e-300) + 1e-300);
        }

        #[test]
        fn reassemble_inverts_embedding(x in cvec(5)) {
            let x = CVec::from_iterator(5, x.into_iter().map(|(a, b)| c(a, b)));
            prop_assert_eq!(complex_reassemble(&real_embed_vector(&x)).unwrap(), x);
        }
    }
}
