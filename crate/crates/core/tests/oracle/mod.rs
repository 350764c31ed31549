//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond reading potential values.

#![allow(dead_code)]

use std::f64::consts::PI;

use fermikit::lattice::PeriodicPotential;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// All points of `prod_j {0, .., q_j - 1}` in lexicographic order.
pub fn domain(q: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &qj in q {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..qj).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

fn value(v: &PeriodicPotential, n: &[usize]) -> Complex64 {
    let n: Vec<i64> = n.iter().map(|&x| x as i64).collect();
    v.at(&n).to_complex()
}

/// Floquet matrix: `(-Δ + V) ψ` restricted to `W` with `ψ(n + q_j e_j) = z_j ψ(n)`.
pub fn floquet_matrix(v: &PeriodicPotential, z: &[Complex64]) -> DMatrix<Complex64> {
    let q = v.periods().periods().to_vec();
    let w = domain(&q);
    let index = |p: &[usize]| w.iter().position(|x| x.as_slice() == p).unwrap();
    let mut m = DMatrix::zeros(w.len(), w.len());
    for (i, n) in w.iter().enumerate() {
        m[(i, i)] += value(v, n);
        for j in 0..q.len() {
            let mut up = n.clone();
            let mut f_up = c(1.0, 0.0);
            if n[j] + 1 == q[j] {
                up[j] = 0;
                f_up = z[j];
            } else {
                up[j] += 1;
            }
            let mut down = n.clone();
            let mut f_down = c(1.0, 0.0);
            if n[j] == 0 {
                down[j] = q[j] - 1;
                f_down = z[j].inv();
            } else {
                down[j] -= 1;
            }
            m[(i, index(&up))] -= f_up;
            m[(i, index(&down))] -= f_down;
        }
    }
    m
}

/// `A(z) + B_V`: `A` diagonal with `-sum_j (rho_j^{n_j} z_j + 1/(rho_j^{n_j} z_j))`,
/// `B(n, n') = V^(n - n')` with `V^(l) = Q^{-1} sum_m V(m) e^{-2 pi i sum_j l_j m_j / q_j}`.
pub fn fourier_side(v: &PeriodicPotential, z: &[Complex64]) -> DMatrix<Complex64> {
    let q = v.periods().periods().to_vec();
    let w = domain(&q);
    let qq = w.len() as f64;
    let hat = |l: &[i64]| -> Complex64 {
        w.iter()
            .map(|m| {
                let ph: f64 = (0..q.len()).map(|j| l[j] as f64 * m[j] as f64 / q[j] as f64).sum();
                value(v, m) * Complex64::from_polar(1.0, -2.0 * PI * ph)
            })
            .sum::<Complex64>()
            / qq
    };
    DMatrix::from_fn(w.len(), w.len(), |a, b| {
        let l: Vec<i64> = (0..q.len()).map(|j| w[a][j] as i64 - w[b][j] as i64).collect();
        let mut x = hat(&l);
        if a == b {
            for j in 0..q.len() {
                let t = Complex64::from_polar(1.0, 2.0 * PI * w[a][j] as f64 / q[j] as f64) * z[j];
                x -= t + t.inv();
            }
        }
        x
    })
}

pub fn hermitian_spectrum(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `det(D_0(z) - lambda) = prod_{n in W} (-sum_j (w_j rho_j^{n_j} + 1/(w_j rho_j^{n_j})) - lambda)`
/// with `w_j^{q_j} = z_j`.
pub fn zero_potential_value(q: &[usize], z: &[Complex64], lambda: Complex64) -> Complex64 {
    let roots: Vec<Complex64> = z.iter().zip(q).map(|(zj, &qj)| zj.powf(1.0 / qj as f64)).collect();
    domain(q)
        .iter()
        .map(|n| {
            let mut e = -lambda;
            for j in 0..q.len() {
                let t = roots[j] * Complex64::from_polar(1.0, 2.0 * PI * n[j] as f64 / q[j] as f64);
                e -= t + t.inv();
            }
            e
        })
        .product()
}

pub fn random_torus_point<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    (0..d).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect()
}

pub fn random_complex_point<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(0.0..2.0 * PI)))
        .collect()
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `a` and constant off-diagonal `b`.
pub fn sturm_count(a: &[f64], b: f64, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &ai) in a.iter().enumerate() {
        d = ai - x - if i == 0 { 0.0 } else { b * b / d };
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the tridiagonal matrix by bisection.
pub fn lowest_tridiagonal(a: &[f64], b: f64) -> f64 {
    let bound = a.iter().map(|x| x.abs()).fold(0.0, f64::max) + 2.0 * b.abs() + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(a, b, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bivariate polynomial `sum c_ij x^i y^j` with complex coefficients.
#[derive(Clone, Debug)]
pub struct Poly2 {
    pub terms: Vec<(usize, usize, Complex64)>,
}

impl Poly2 {
    pub fn new(terms: &[(usize, usize, Complex64)]) -> Self {
        let mut p = Poly2 { terms: Vec::new() };
        for &(i, j, x) in terms {
            p.add_term(i, j, x);
        }
        p
    }

    fn add_term(&mut self, i: usize, j: usize, x: Complex64) {
        match self.terms.iter_mut().find(|t| t.0 == i && t.1 == j) {
            Some(t) => t.2 += x,
            None => self.terms.push((i, j, x)),
        }
        self.terms.retain(|t| t.2.norm() > 0.0);
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut p = Poly2 { terms: Vec::new() };
        for a in &self.terms {
            for b in &o.terms {
                p.add_term(a.0 + b.0, a.1 + b.1, a.2 * b.2);
            }
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    /// Coefficients in `x` of `f(x, a x + s)`, constant term first.
    fn on_line(&self, a: Complex64, s: Complex64) -> Vec<Complex64> {
        let n = self.degree();
        let mut out = vec![c(0.0, 0.0); n + 1];
        for &(i, j, x) in &self.terms {
            // (a x + s)^j = sum_k binom(j, k) a^k s^(j-k) x^k
            let mut binom = 1.0;
            for k in 0..=j {
                out[i + k] += x * binom * a.powu(k as u32) * s.powu((j - k) as u32);
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
        }
        out
    }
}

fn horner(p: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut v = c(0.0, 0.0);
    let mut dv = c(0.0, 0.0);
    for &a in p.iter().rev() {
        dv = dv * x + v;
        v = v * x + a;
    }
    (v, dv)
}

/// All roots by the Aberth iteration followed by Newton polishing.
fn roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let scale = 1.0 + p[..n].iter().map(|a| (a / p[n]).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * scale, 2.0 * PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (v, dv) = horner(p, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (c(1.0, 0.0) - ratio * sum);
            z[k] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = horner(p, *r);
            if dv.norm() > 0.0 {
                *r -= v / dv;
            }
        }
    }
    z
}

fn min_separation(z: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            m = m.min((z[i] - z[j]).norm());
        }
    }
    m
}

/// Roots at `s0 + t * dir` for `t = 0, 1, 2`, continued along the segment
/// so that index `i` follows one root throughout.
fn tracked_roots(f: &Poly2, a: Complex64, s0: Complex64, dir: Complex64) -> Option<[Vec<Complex64>; 3]> {
    const STEPS: usize = 400;
    let mut cur = roots(&f.on_line(a, s0));
    let first = cur.clone();
    let mut mid = Vec::new();
    for step in 1..=2 * STEPS {
        let s = s0 + dir * (step as f64 / STEPS as f64);
        let p = f.on_line(a, s);
        let sep = min_separation(&cur);
        for r in cur.iter_mut() {
            let start = *r;
            for _ in 0..30 {
                let (v, dv) = horner(&p, *r);
                if dv.norm() == 0.0 {
                    return None;
                }
                let dx = v / dv;
                *r -= dx;
                if dx.norm() < 1e-15 * (1.0 + r.norm()) {
                    break;
                }
            }
            if (*r - start).norm() > 0.25 * sep {
                return None;
            }
        }
        if min_separation(&cur) < 1e-6 {
            return None;
        }
        if step == STEPS {
            mid = cur.clone();
        }
    }
    Some([first, mid, cur])
}

/// Number of absolutely irreducible factors of a squarefree `f` by the trace
/// test: over a generic line pencil `y = a x + s`, the sum of the roots
/// belonging to one factor is affine in `s`; the factors are the minimal
/// root subsets with affine sums.
pub fn trace_test_count<R: Rng>(f: &Poly2, rng: &mut R) -> Option<usize> {
    let n = f.degree();
    if n == 0 || n > 16 {
        return None;
    }
    for _attempt in 0..10 {
        let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lead = f.on_line(a, c(0.0, 0.0))[n];
        if lead.norm() < 1e-3 {
            continue;
        }
        let s0 = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let dir = Complex64::from_polar(0.7, rng.gen_range(0.0..2.0 * PI));
        let Some([r0, r1, r2]) = tracked_roots(f, a, s0, dir) else {
            continue;
        };
        let second: Vec<Complex64> = (0..n).map(|i| r2[i] - 2.0 * r1[i] + r0[i]).collect();
        let size: f64 = r0.iter().chain(&r2).map(|x| x.norm()).fold(1.0, f64::max);
        let affine = |mask: usize| {
            let s: Complex64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| second[i]).sum();
            s.norm() <= 1e-7 * size
        };
        let full = (1usize << n) - 1;
        if !affine(full) {
            continue;
        }
        let good: Vec<usize> = (1..=full).filter(|&m| affine(m)).collect();
        let atoms: Vec<usize> = good
            .iter()
            .copied()
            .filter(|&m| !good.iter().any(|&o| o != m && o & m == o))
            .collect();
        let union = atoms.iter().fold(0, |acc, m| acc | m);
        let disjoint = atoms.iter().map(|m| m.count_ones()).sum::<u32>() as usize == n;
        if union == full && disjoint {
            return Some(atoms.len());
        }
    }
    None
}
