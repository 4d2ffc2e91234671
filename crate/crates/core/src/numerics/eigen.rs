use super::RMat;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, eigenvalues in non-increasing order.
///
/// Column `i` of `vectors` pairs with `values[i]`. Each column is signed so its
/// largest-magnitude component is positive. Within a repeated eigenvalue the
/// basis is arbitrary.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: RMat,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> RMat {
        let n = self.dim();
        let mut out = RMat::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let q = self.vectors.column(k);
            out += lam * &q * q.transpose();
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// The input must be symmetric to 1e-10 relative to its largest entry; it is
/// symmetrized before the sweeps start.
pub fn sym_eig_desc(s: &RMat) -> Result<SymEigen> {
    let n = s.nrows();
    if n == 0 || s.ncols() != n {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a non-empty square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let scale = s.amax();
    let asymmetry = (s - s.transpose()).amax();
    if asymmetry > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry, scale });
    }

    let mut a = (s + s.transpose()) * 0.5;
    let mut v = RMat::identity(n, n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // negligible against both diagonal entries: drop it
                let g = 100.0 * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));

    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        let lead = col
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(SymEigen { values, vectors })
}
