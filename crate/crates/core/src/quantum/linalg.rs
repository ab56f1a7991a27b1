//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Sweeps stop once the off-diagonal Frobenius norm drops below this.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and eigenvectors (matching columns) of a Hermitian matrix.
///
/// Only the Hermitian part `(M + M†)/2` is used.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

fn off_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues only; skips eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    jacobi(m, false).values
}

pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> HermitianEigen {
    jacobi(m, true)
}

fn jacobi(m: &DMatrix<Complex64>, want_vectors: bool) -> HermitianEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    // row-major working copy of the Hermitian part
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = if want_vectors {
        let mut id = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            id[i * n + i] = Complex64::new(1.0, 0.0);
        }
        id
    } else {
        Vec::new()
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a, n) < OFF_DIAGONAL_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[p * n + q];
                let mag = b.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = b / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let ph = phase.conj();
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -ph * s;
                let uqq = ph * c;
                // A ← A U
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * upp + akq * uqp;
                    a[k * n + q] = akp * upq + akq * uqq;
                }
                // A ← U† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = upp.conj() * apk + uqp.conj() * aqk;
                    a[q * n + k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * upp + vkq * uqp;
                        v[k * n + q] = vkp * upq + vkq * uqq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = if want_vectors {
        DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]])
    } else {
        DMatrix::zeros(0, 0)
    };
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_y() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let e = hermitian_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let recon = &e.vectors
            * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                e.values.iter().map(|&x| c(x, 0.)),
            ))
            * e.vectors.adjoint();
        assert!((recon - m).norm() < 1e-13);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let n = 7;
        let g = DMatrix::from_fn(n, n, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i * 2 + j * 5) % 7) as f64 - 3.0)
        });
        let h = &g + g.adjoint();
        let e = hermitian_eigen(&h);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            e.values.iter().map(|&x| c(x, 0.)),
        ));
        let recon = &e.vectors * d * e.vectors.adjoint();
        assert!((recon - &h).norm() < 1e-11);
        let unit = e.vectors.adjoint() * &e.vectors - DMatrix::identity(n, n);
        assert!(unit.norm() < 1e-12);
        let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-11);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
