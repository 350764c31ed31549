//! Dense eigen-solvers for the small Floquet matrices.
//!
//! Hermitian matrices use a cyclic complex Jacobi iteration; general complex
//! matrices go through nalgebra's Schur decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues and the matching unit eigenvectors (columns).
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    jacobi(m, true)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    jacobi(m, false).0
}

fn off_norm2(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(m: &DMatrix<Complex64>, vectors: bool) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix expected");
    // Symmetrize so tiny asymmetries from assembly cannot bias the rotations.
    let mut a = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = if vectors {
        DMatrix::identity(n, n)
    } else {
        DMatrix::zeros(0, 0)
    };
    let total: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let eps = f64::EPSILON * f64::EPSILON * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_norm2(&a) <= eps {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                // Phase e^{i phi} of a_pq; after the diagonal unitary the
                // off-diagonal entry is real and a real rotation finishes it.
                let ph = apq / b;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = [[c, s], [-s conj(ph), c conj(ph)]] acting on columns p, q.
                let w_qp = -ph.conj() * s;
                let w_qq = ph.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * w_qp;
                    a[(k, q)] = akp * s + akq * w_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * w_qp.conj();
                    a[(q, k)] = apk * s + aqk * w_qq.conj();
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                if vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * w_qp;
                        v[(k, q)] = vkp * s + vkq * w_qq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = if vectors {
        DMatrix::from_fn(n, n, |r, c| v[(r, order[c])])
    } else {
        v
    };
    (vals, vecs)
}

/// Eigenvalues of a general complex matrix, sorted by (real, imaginary).
pub fn general_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Largest distance between two multisets under a greedy nearest pairing
/// (both sorted by real then imaginary part first).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
