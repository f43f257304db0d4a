//! Small dense eigenvalue routine for Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Eigenvalues of an `n×n` Hermitian matrix (row-major), ascending.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, −B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled; cyclic Jacobi
/// rotations diagonalize it.
pub(crate) fn hermitian_eigenvalues(n: usize, matrix: &[Complex64]) -> Vec<f64> {
    debug_assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = matrix[r * n + c];
            a[r * m + c] = z.re;
            a[(r + n) * m + (c + n)] = z.re;
            a[r * m + (c + n)] = -z.im;
            a[(r + n) * m + c] = z.im;
        }
    }
    // symmetrize away round-off in the input
    for r in 0..m {
        for c in r + 1..m {
            let avg = 0.5 * (a[r * m + c] + a[c * m + r]);
            a[r * m + c] = avg;
            a[c * m + r] = avg;
        }
    }
    let mut eig = symmetric_eigenvalues(m, a);
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

fn symmetric_eigenvalues(m: usize, mut a: Vec<f64>) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|r| (0..m).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * m + c] * a[r * m + c])
            .sum();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * m + p], a[q * m + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn real_two_by_two() {
        let c = |x| Complex64::new(x, 0.0);
        let eig = hermitian_eigenvalues(2, &[c(0.5), c(0.2), c(0.2), c(0.5)]);
        assert!((eig[0] - 0.3).abs() < 1e-14);
        assert!((eig[1] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn complex_pure_state_has_rank_one() {
        let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let m: Vec<Complex64> = (0..4).map(|k| psi[k / 2] * psi[k % 2].conj()).collect();
        let eig = hermitian_eigenvalues(2, &m);
        assert!(eig[0].abs() < 1e-14);
        assert!((eig[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_trace_and_determinant() {
        let c = |re, im| Complex64::new(re, im);
        let m = [
            c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5),
            c(1.0, -1.0), c(3.0, 0.0), c(0.25, 0.0),
            c(0.0, 0.5), c(0.25, 0.0), c(1.0, 0.0),
        ];
        let eig = hermitian_eigenvalues(3, &m);
        let trace: f64 = eig.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
        // det computed by cofactor expansion
        let det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6]);
        let prod: f64 = eig.iter().product();
        assert!((prod - det.re).abs() < 1e-12);
    }
}
