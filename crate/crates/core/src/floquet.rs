//! Floquet matrices `D_V(z)` / `D_V(k)`, the diagonal-plus-Fourier form of
//! the quasi-periodic problem, and the exact characteristic Laurent
//! polynomial `P_V(z, lambda) = det(D_V(z) - lambda I)`.
//!
//! Sign convention: the operator is `-Δ + V`, so every hop carries `-1`. A hop
//! that leaves the fundamental domain through `n_j = q_j - 1` carries `-z_j`,
//! one leaving through `n_j = 0` carries `-z_j^{-1}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{general_eigenvalues, hermitian_eigenvalues, multiset_distance};
use crate::error::{Error, Result};
use crate::lattice::{dft, PeriodSpec, PeriodicPotential};
use crate::laurent::LaurentPoly;
use crate::scalar::GaussRat;

/// One hopping contribution `-1` or `-z_axis^{sign}` to entry `(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Hop {
    row: usize,
    col: usize,
    wrap: Option<(usize, i32)>,
}

fn hops(p: &PeriodSpec) -> Vec<Hop> {
    let q = p.periods();
    let mut out = Vec::new();
    for (row, n) in p.domain().iter().enumerate() {
        for j in 0..q.len() {
            // u(n + e_j)
            let mut m = n.clone();
            let wrap_up = n[j] + 1 == q[j];
            m[j] = if wrap_up { 0 } else { n[j] + 1 };
            out.push(Hop {
                row,
                col: p.index_of(&m),
                wrap: wrap_up.then_some((j, 1)),
            });
            // u(n - e_j)
            let mut m = n.clone();
            let wrap_down = n[j] == 0;
            m[j] = if wrap_down { q[j] - 1 } else { n[j] - 1 };
            out.push(Hop {
                row,
                col: p.index_of(&m),
                wrap: wrap_down.then_some((j, -1)),
            });
        }
    }
    out
}

/// Symbolic `D_V(z)`: a `Q x Q` array of Laurent polynomials in `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloquetMatrix {
    periods: PeriodSpec,
    entries: Vec<Vec<LaurentPoly>>,
}

impl FloquetMatrix {
    pub fn periods(&self) -> &PeriodSpec {
        &self.periods
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &LaurentPoly {
        &self.entries[row][col]
    }

    pub fn entries(&self) -> &[Vec<LaurentPoly>] {
        &self.entries
    }

    /// `D_V(z) - lambda I` with a lambda slot on every entry.
    pub fn minus_lambda(&self) -> Vec<Vec<LaurentPoly>> {
        let d = self.periods.dim();
        let lam = LaurentPoly::lambda_var(d);
        self.entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, e)| {
                        let e = with_lambda_slot(e);
                        if i == j {
                            e.sub(&lam)
                        } else {
                            e
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Numeric value at `z`.
    pub fn eval(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entries[i][j].eval(z, Complex64::new(0.0, 0.0))?;
            }
        }
        Ok(m)
    }
}

fn with_lambda_slot(p: &LaurentPoly) -> LaurentPoly {
    LaurentPoly::from_terms(
        p.nz(),
        true,
        p.terms().map(|(m, c)| {
            let mut e = m.exps().to_vec();
            e.push(0);
            (e, c.clone())
        }),
    )
}

/// Builds the symbolic Floquet matrix under `u(n + q_j e_j) = z_j u(n)`.
pub fn build_script_d(v: &PeriodicPotential) -> Result<FloquetMatrix> {
    let vals = v.require_exact("the symbolic Floquet matrix")?;
    let p = v.periods();
    let d = p.dim();
    let qq = p.volume();
    let mut entries = vec![vec![LaurentPoly::zero(d, false); qq]; qq];
    for (i, row) in entries.iter_mut().enumerate() {
        row[i] = LaurentPoly::constant(d, false, vals[i].clone());
    }
    let minus_one = GaussRat::from_int(-1);
    for h in hops(p) {
        let mut e = vec![0; d];
        if let Some((j, s)) = h.wrap {
            e[j] = s;
        }
        let term = LaurentPoly::monomial(d, false, e, minus_one.clone());
        entries[h.row][h.col] = entries[h.row][h.col].add(&term);
    }
    Ok(FloquetMatrix {
        periods: p.clone(),
        entries,
    })
}

/// Numeric `D_V` at an arbitrary point `z` of `(C^*)^d`.
pub fn build_d_at(v: &PeriodicPotential, z: &[Complex64]) -> DMatrix<Complex64> {
    let p = v.periods();
    assert_eq!(z.len(), p.dim(), "one z per dimension");
    let qq = p.volume();
    let vals = v.complex_values();
    let mut m = DMatrix::from_fn(qq, qq, |i, j| {
        if i == j {
            vals[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for h in hops(p) {
        let w = match h.wrap {
            None => Complex64::new(1.0, 0.0),
            Some((j, 1)) => z[j],
            Some((j, _)) => z[j].inv(),
        };
        m[(h.row, h.col)] -= w;
    }
    m
}

/// `D_V(k)`, i.e. [`build_d_at`] at `z_j = exp(2 pi i k_j)`. Hermitian for real `V`.
pub fn build_d_numeric(v: &PeriodicPotential, k: &[f64]) -> DMatrix<Complex64> {
    let z: Vec<Complex64> = k.iter().map(|&kj| Complex64::from_polar(1.0, 2.0 * PI * kj)).collect();
    build_d_at(v, &z)
}

/// `det(D_V(z) - lambda I)` in floating point.
pub fn char_value(v: &PeriodicPotential, z: &[Complex64], lambda: Complex64) -> Complex64 {
    let mut m = build_d_at(v, z);
    for i in 0..m.nrows() {
        m[(i, i)] -= lambda;
    }
    m.determinant()
}

/// Fraction-free (Bareiss) determinant over the Laurent ring.
///
/// Each row is first multiplied by the monomial that clears its negative
/// powers; the monomial is divided back out at the end.
pub fn det_bareiss(m: &[Vec<LaurentPoly>]) -> Result<LaurentPoly> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("square nonempty matrix expected".into()));
    }
    let nz = m[0][0].nz();
    let lambda = m[0][0].has_lambda();
    let nv = m[0][0].nvars();
    let mut total = vec![0i32; nv];
    let mut a: Vec<Vec<LaurentPoly>> = m
        .iter()
        .map(|row| {
            let mut mins = vec![0i32; nv];
            for e in row.iter().filter(|e| !e.is_zero()) {
                for (mi, ei) in mins.iter_mut().zip(e.min_degrees()) {
                    *mi = (*mi).min(ei);
                }
            }
            for (t, mi) in total.iter_mut().zip(&mins) {
                *t += mi;
            }
            let neg: Vec<i32> = mins.iter().map(|x| -x).collect();
            row.iter().map(|e| e.shift(&neg)).collect()
        })
        .collect();

    let mut negate = false;
    let mut prev = LaurentPoly::one(nz, lambda);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(LaurentPoly::zero(nz, lambda)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let mut det = a[n - 1][n - 1].clone();
    if negate {
        det = det.neg();
    }
    Ok(det.shift(&total))
}

/// Laplace expansion along the first row. Exponential cost; used as an
/// independent check of [`det_bareiss`] for small matrices.
pub fn det_cofactor(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let nz = m[0][0].nz();
    let lambda = m[0][0].has_lambda();
    let mut acc = LaurentPoly::zero(nz, lambda);
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let t = m[0][c].mul(&det_cofactor(&minor));
        acc = if c % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Exact `P_V(z, lambda) = det(D_V(z) - lambda I)`.
pub fn char_laurent(v: &PeriodicPotential) -> Result<LaurentPoly> {
    if !v.is_exact() {
        return Err(Error::NotExact("the characteristic Laurent polynomial"));
    }
    let d = build_script_d(v)?;
    det_bareiss(&d.minus_lambda())
}

/// Checks that `P` carries `lambda^Q` and `z_j^{+-Q/q_j}` with coefficients
/// `+-1` and that no exponent exceeds those degrees. Returns a description
/// of the first violation.
pub fn highest_degree_violation(p: &LaurentPoly, periods: &PeriodSpec) -> Option<String> {
    let q = periods.periods();
    let d = q.len();
    let qq = periods.volume() as i32;
    let pm1 = |c: Option<&GaussRat>| {
        c.is_some_and(|c| c.is_one() || (-c).is_one())
    };
    let mut e = vec![0i32; d + 1];
    e[d] = qq;
    if !pm1(p.coeff(&e)) {
        return Some(format!("lambda^{qq} coefficient is {:?}", p.coeff(&e)));
    }
    let maxd = p.max_degrees();
    let mind = p.min_degrees();
    if maxd[d] > qq {
        return Some(format!("lambda degree {} exceeds {qq}", maxd[d]));
    }
    for j in 0..d {
        let top = qq / q[j] as i32;
        for s in [top, -top] {
            let mut e = vec![0i32; d + 1];
            e[j] = s;
            if !pm1(p.coeff(&e)) {
                return Some(format!("z{}^{} coefficient is {:?}", j + 1, s, p.coeff(&e)));
            }
        }
        if maxd[j] > top || mind[j] < -top {
            return Some(format!(
                "z{} degrees [{}, {}] exceed +-{top}",
                j + 1,
                mind[j],
                maxd[j]
            ));
        }
    }
    None
}

/// `D~_V(z) = D_V(z^q)` in the diagonal-plus-Fourier form `A(z) + B_V`.
#[derive(Clone, Debug)]
pub struct LesepMatrix {
    periods: PeriodSpec,
    /// `B_V(n; n') = V^(n - n')`.
    b: DMatrix<Complex64>,
}

/// `rho^j_{n_j} = exp(2 pi i n_j / q_j)`.
pub fn rho(q: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (n % q) as f64 / q as f64)
}

impl LesepMatrix {
    pub fn new(v: &PeriodicPotential) -> Self {
        let p = v.periods();
        let t = dft(v);
        let w = p.domain();
        let qq = p.volume();
        let b = DMatrix::from_fn(qq, qq, |i, j| {
            let l: Vec<i64> = w[i]
                .iter()
                .zip(&w[j])
                .map(|(&a, &b)| a as i64 - b as i64)
                .collect();
            t.at(&l)
        });
        LesepMatrix {
            periods: p.clone(),
            b,
        }
    }

    pub fn b(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    /// Diagonal of `A(z)`: `-sum_j (rho^j_{n_j} z_j + 1/(rho^j_{n_j} z_j))`.
    pub fn a_diag(&self, z: &[Complex64]) -> Vec<Complex64> {
        let q = self.periods.periods();
        self.periods
            .domain()
            .iter()
            .map(|n| {
                -n.iter()
                    .zip(q)
                    .zip(z)
                    .map(|((&nj, &qj), &zj)| {
                        let t = rho(qj, nj) * zj;
                        t + t.inv()
                    })
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn matrix_at(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = self.b.clone();
        for (i, a) in self.a_diag(z).into_iter().enumerate() {
            m[(i, i)] += a;
        }
        m
    }
}

/// Outcome of [`verify_lesep`].
#[derive(Clone, Debug, Serialize)]
pub struct LesepReport {
    pub passed: bool,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Largest eigenvalue mismatch over all sample points.
    pub worst_eigen_gap: f64,
    /// Largest relative determinant mismatch.
    pub worst_det_gap: f64,
    /// Torus angles `theta` (with `z_j = exp(2 pi i theta_j)`) of the worst point.
    pub worst_point: Vec<f64>,
}

/// Compares the spectra of `D_V(z^q)` and `A(z) + B_V` at random points of
/// the unit torus, and `det(D_V(z^q) - mu)` against `det(A + B_V - mu)` at a
/// random complex `mu`.
pub fn verify_lesep(v: &PeriodicPotential, samples: usize, tol: f64, seed: u64) -> Result<LesepReport> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample point is required".into()));
    }
    let lesep = LesepMatrix::new(v);
    let q = v.periods().periods().to_vec();
    let real = v.is_real();
    let per_point: Vec<(f64, f64, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let theta: Vec<f64> = q.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
            let z: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, 2.0 * PI * t)).collect();
            let zq: Vec<Complex64> = z.iter().zip(&q).map(|(zj, &qj)| zj.powi(qj as i32)).collect();
            let dt = build_d_at(v, &zq);
            let ab = lesep.matrix_at(&z);
            let (e1, e2) = if real {
                let f = |m: &DMatrix<Complex64>| -> Vec<Complex64> {
                    hermitian_eigenvalues(m).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
                };
                (f(&dt), f(&ab))
            } else {
                (general_eigenvalues(&dt), general_eigenvalues(&ab))
            };
            let gap = multiset_distance(&e1, &e2);
            let mu = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let shift = |m: &DMatrix<Complex64>| {
                let mut m = m.clone();
                for k in 0..m.nrows() {
                    m[(k, k)] -= mu;
                }
                m.determinant()
            };
            let (d1, d2) = (shift(&dt), shift(&ab));
            let det_gap = (d1 - d2).norm() / d1.norm().max(1.0);
            (gap, det_gap, theta)
        })
        .collect();
    let mut rep = LesepReport {
        passed: true,
        samples,
        tol,
        seed,
        worst_eigen_gap: 0.0,
        worst_det_gap: 0.0,
        worst_point: Vec::new(),
    };
    for (gap, det_gap, theta) in per_point {
        if gap.max(det_gap) >= rep.worst_eigen_gap.max(rep.worst_det_gap) {
            rep.worst_point = theta;
        }
        rep.worst_eigen_gap = rep.worst_eigen_gap.max(gap);
        rep.worst_det_gap = rep.worst_det_gap.max(det_gap);
    }
    rep.passed = rep.worst_eigen_gap <= tol && rep.worst_det_gap <= tol;
    Ok(rep)
}

/// Numeric check that `P~_V(rho . z) = P~_V(z)` for every `rho` in the group
/// of roots of unity, using the `A + B_V` form at random `z`. Returns the
/// largest relative deviation.
pub fn mu_invariance_deviation(v: &PeriodicPotential, points: usize, seed: u64) -> f64 {
    let lesep = LesepMatrix::new(v);
    let p = v.periods();
    let q = p.periods();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let z: Vec<Complex64> = q
            .iter()
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let mu = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let det_at = |z: &[Complex64]| {
            let mut m = lesep.matrix_at(z);
            for k in 0..m.nrows() {
                m[(k, k)] -= mu;
            }
            m.determinant()
        };
        let base = det_at(&z);
        for s in 0..p.volume() {
            let shifts = p.point(s);
            let rz: Vec<Complex64> = z
                .iter()
                .zip(q.iter().zip(&shifts))
                .map(|(zj, (&qj, &sj))| zj * rho(qj, sj))
                .collect();
            let dev = (det_at(&rz) - base).norm() / base.norm().max(1.0);
            worst = worst.max(dev);
        }
    }
    worst
}
