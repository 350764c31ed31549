//! Dense bivariate polynomials over a [`Field`], squarefree decomposition in
//! `F[y][x]`, and the Gao partial-differential-equation count of absolutely
//! irreducible factors.

use super::field::Field;
use crate::error::{Error, Result};

/// Univariate polynomial in `y`, lowest degree first, no trailing zeros.
pub type UPoly<F> = Vec<F>;

fn u_trim<F: Field>(mut a: UPoly<F>) -> UPoly<F> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn u_deg<F: Field>(a: &[F]) -> Option<usize> {
    a.len().checked_sub(1)
}

fn u_add<F: Field>(a: &[F], b: &[F]) -> UPoly<F> {
    let n = a.len().max(b.len());
    let z = F::zero();
    u_trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z)))
            .collect(),
    )
}

fn u_sub<F: Field>(a: &[F], b: &[F]) -> UPoly<F> {
    let n = a.len().max(b.len());
    let z = F::zero();
    u_trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z)))
            .collect(),
    )
}

fn u_mul<F: Field>(a: &[F], b: &[F]) -> UPoly<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    u_trim(out)
}

fn u_scale<F: Field>(a: &[F], s: &F) -> UPoly<F> {
    u_trim(a.iter().map(|c| c.mul(s)).collect())
}

fn u_divrem<F: Field>(a: &[F], b: &[F]) -> (UPoly<F>, UPoly<F>) {
    let db = u_deg(b).expect("division by zero polynomial");
    let inv = b[db].inv();
    let mut r = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), u_trim(r));
    }
    let mut q = vec![F::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].mul(&inv);
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[k + j] = r[k + j].sub(&c.mul(bj));
            }
        }
        q[k] = c;
    }
    r.truncate(db);
    (u_trim(q), u_trim(r))
}

fn u_monic<F: Field>(a: &[F]) -> UPoly<F> {
    match a.last() {
        None => Vec::new(),
        Some(l) => u_scale(a, &l.inv()),
    }
}

fn u_gcd<F: Field>(a: &[F], b: &[F]) -> UPoly<F> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    while !b.is_empty() {
        let (_, r) = u_divrem(&a, &b);
        a = b;
        b = r;
    }
    u_monic(&a)
}

/// `sum_i c[i](y) x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivar<F: Field> {
    c: Vec<UPoly<F>>,
}

impl<F: Field> Bivar<F> {
    pub fn zero() -> Self {
        Bivar { c: Vec::new() }
    }

    /// From `(deg_x, deg_y, coefficient)` triples; repeated monomials add up.
    pub fn from_terms(terms: impl IntoIterator<Item = (usize, usize, F)>) -> Self {
        let mut c: Vec<UPoly<F>> = Vec::new();
        for (i, j, v) in terms {
            if c.len() <= i {
                c.resize(i + 1, Vec::new());
            }
            if c[i].len() <= j {
                c[i].resize(j + 1, F::zero());
            }
            c[i][j] = c[i][j].add(&v);
        }
        Self::from_coeffs(c)
    }

    fn from_coeffs(c: Vec<UPoly<F>>) -> Self {
        let mut c: Vec<UPoly<F>> = c.into_iter().map(u_trim).collect();
        while c.last().is_some_and(|p| p.is_empty()) {
            c.pop();
        }
        Bivar { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg_x(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn deg_y(&self) -> usize {
        self.c.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> usize {
        self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &F)> {
        self.c
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(j, v)| (i, j, v)))
    }

    pub fn coeff(&self, i: usize, j: usize) -> F {
        self.c.get(i).and_then(|p| p.get(j)).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms().count() == 1
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Vec::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = u_add(&c[i + j], &u_mul(a, b));
            }
        }
        Self::from_coeffs(c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let e = Vec::new();
        Self::from_coeffs(
            (0..n)
                .map(|i| u_sub(self.c.get(i).unwrap_or(&e), o.c.get(i).unwrap_or(&e)))
                .collect(),
        )
    }

    pub fn derivative_x(&self) -> Self {
        Self::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, p)| u_scale(p, &F::from_i64(i as i64)))
                .collect(),
        )
    }

    /// Gcd in `F[y]` of the `x`-coefficients, monic.
    pub fn content(&self) -> UPoly<F> {
        let mut g: UPoly<F> = Vec::new();
        for p in &self.c {
            g = u_gcd(&g, p);
            if g.len() == 1 {
                break;
            }
        }
        g
    }

    fn div_upoly(&self, d: &[F]) -> Self {
        Self::from_coeffs(
            self.c
                .iter()
                .map(|p| {
                    let (q, r) = u_divrem(p, d);
                    debug_assert!(r.is_empty(), "content division must be exact");
                    q
                })
                .collect(),
        )
    }

    /// Primitive part with a monic leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let pp = self.div_upoly(&self.content());
        let l = pp.c.last().unwrap().last().unwrap().inv();
        Self::from_coeffs(pp.c.iter().map(|p| u_scale(p, &l)).collect())
    }

    /// Pseudo-remainder of `self` by `b` with respect to `x`.
    fn prem(&self, b: &Self) -> Self {
        let db = b.deg_x();
        let lb = &b.c[db];
        let mut r = self.clone();
        while !r.is_zero() && r.deg_x() >= db {
            let dr = r.deg_x();
            let lr = r.c[dr].clone();
            let shift = dr - db;
            let mut c: Vec<UPoly<F>> = r.c.iter().map(|p| u_mul(p, lb)).collect();
            for (j, bj) in b.c.iter().enumerate() {
                c[j + shift] = u_sub(&c[j + shift], &u_mul(bj, &lr));
            }
            r = Self::from_coeffs(c);
        }
        r
    }

    /// Exact quotient in `F[y][x]`, or `None`.
    pub fn div_exact(&self, b: &Self) -> Option<Self> {
        if b.is_zero() {
            return None;
        }
        let db = b.deg_x();
        let lb = &b.c[db];
        let mut r = self.clone();
        let mut q: Vec<UPoly<F>> = vec![Vec::new(); self.c.len().saturating_sub(db).max(1)];
        while !r.is_zero() {
            let dr = r.deg_x();
            if dr < db {
                return None;
            }
            let (t, rem) = u_divrem(&r.c[dr], lb);
            if !rem.is_empty() {
                return None;
            }
            let shift = dr - db;
            let mut c = r.c.clone();
            for (j, bj) in b.c.iter().enumerate() {
                c[j + shift] = u_sub(&c[j + shift], &u_mul(bj, &t));
            }
            q[shift] = t;
            r = Self::from_coeffs(c);
        }
        Some(Self::from_coeffs(q))
    }

    /// Gcd of two polynomials that are primitive in `x` (primitive PRS).
    fn gcd_primitive(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = if a.deg_x() >= b.deg_x() {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if b.is_zero() {
            return a.primitive_part();
        }
        loop {
            let r = a.prem(&b);
            if r.is_zero() {
                return b.primitive_part();
            }
            if r.deg_x() == 0 {
                return Self::from_coeffs(vec![vec![F::one()]]);
            }
            a = b;
            b = r.primitive_part();
        }
    }

    /// Yun decomposition of a primitive polynomial with `deg_x >= 1`:
    /// `self = unit * prod_k s_k^k`, entry `k - 1` holding `s_k`.
    pub fn squarefree_decomposition(&self) -> Vec<Self> {
        let f = self.primitive_part();
        let fx = f.derivative_x();
        let a0 = Self::gcd_primitive(&f, &fx.primitive_part());
        let mut b = f.div_exact(&a0).expect("gcd divides f");
        let c = fx.div_exact(&a0).expect("gcd divides f_x");
        let mut d = c.sub(&b.derivative_x());
        let mut out = Vec::new();
        while b.deg_x() > 0 {
            let a = if d.is_zero() {
                b.primitive_part()
            } else {
                Self::gcd_primitive(&b, &d.primitive_part())
            };
            b = b.div_exact(&a).expect("Yun step: a divides b");
            let c = d.div_exact(&a).expect("Yun step: a divides d");
            d = c.sub(&b.derivative_x());
            out.push(a);
        }
        out
    }
}

/// Incremental row echelon form for rank computations.
struct Echelon<F: Field> {
    pivots: Vec<(usize, Vec<F>)>,
}

impl<F: Field> Echelon<F> {
    fn new() -> Self {
        Echelon { pivots: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn insert(&mut self, mut v: Vec<F>) {
        for (p, w) in &self.pivots {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, y) in v.iter_mut().zip(w).skip(*p) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            let inv = v[p].inv();
            for x in v.iter_mut().skip(p) {
                if !x.is_zero() {
                    *x = x.mul(&inv);
                }
            }
            self.pivots.push((p, v));
        }
    }
}

/// Number of absolutely irreducible factors of `f`, assumed squarefree with
/// `gcd(f, f_x) = 1`.
///
/// Counts the `g` with `deg g <= (m - 1, n)` for which some `h` with
/// `deg h <= (m, n - 1)` solves `d/dy (g / f) = d/dx (h / f)`.
pub fn gao_count<F: Field>(f: &Bivar<F>) -> usize {
    let m = f.deg_x();
    let n = f.deg_y();
    if n == 0 {
        return m;
    }
    let rows = 4 * m * n;
    let idx = |i: usize, j: usize| i * 2 * n + j;
    let terms: Vec<(usize, usize, F)> = f.terms().map(|(i, j, c)| (i, j, c.clone())).collect();
    let mut ech = Echelon::new();
    // h columns: x^a y^b f_x - a x^(a-1) y^b f
    for a in 0..=m {
        for b in 0..n {
            let mut v = vec![F::zero(); rows];
            for (i, j, c) in &terms {
                let k = *i as i64 - a as i64;
                if i + a >= 1 && k != 0 {
                    let e = &mut v[idx(i + a - 1, j + b)];
                    *e = e.add(&c.mul(&F::from_i64(k)));
                }
            }
            ech.insert(v);
        }
    }
    let rank_h = ech.rank();
    // g columns: b x^a y^(b-1) f - x^a y^b f_y
    for a in 0..m {
        for b in 0..=n {
            let mut v = vec![F::zero(); rows];
            for (i, j, c) in &terms {
                let k = b as i64 - *j as i64;
                if j + b >= 1 && k != 0 {
                    let e = &mut v[idx(i + a, j + b - 1)];
                    *e = e.add(&c.mul(&F::from_i64(k)));
                }
            }
            ech.insert(v);
        }
    }
    m * (n + 1) - (ech.rank() - rank_h)
}

/// Absolutely irreducible factors of `f`, counted with multiplicity.
pub fn count_factors<F: Field>(f: &Bivar<F>) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.is_monomial() {
        return Err(Error::Domain("factor count of a monomial is undefined".into()));
    }
    let content = f.content();
    let mut total = content.len() - 1;
    let pp = f.primitive_part();
    if pp.deg_x() == 0 {
        return Ok(total);
    }
    for (k, s) in pp.squarefree_decomposition().iter().enumerate() {
        if s.deg_x() > 0 {
            total += (k + 1) * gao_count(s);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreducibility::field::{Fp, PRIMES};
    use crate::scalar::GaussRat;

    type G = GaussRat;
    type F = Fp<{ PRIMES[0] }>;

    fn bv<K: Field>(t: &[(usize, usize, i64)]) -> Bivar<K> {
        Bivar::from_terms(t.iter().map(|&(i, j, c)| (i, j, K::from_i64(c))))
    }

    #[test]
    fn arithmetic_and_division() {
        let a: Bivar<G> = bv(&[(1, 0, 1), (0, 1, -1)]);
        let b: Bivar<G> = bv(&[(2, 0, 1), (0, 1, 3), (0, 0, 1)]);
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert_eq!(p.div_exact(&b).unwrap(), a);
        assert!(b.div_exact(&a).is_none());
        assert_eq!(p.total_degree(), 3);
    }

    #[test]
    fn squarefree_decomposition_recovers_powers() {
        let a: Bivar<G> = bv(&[(1, 0, 1), (0, 1, -1)]);
        let b: Bivar<G> = bv(&[(2, 0, 1), (0, 2, 1), (0, 0, -1)]);
        let f = a.mul(&a).mul(&a).mul(&b);
        let s = f.squarefree_decomposition();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], b.primitive_part());
        assert_eq!(s[1].deg_x(), 0);
        assert_eq!(s[2], a.primitive_part());
    }

    #[test]
    fn spec_examples() {
        // t1^2 - t2^2, t1 t2 - 1, t1^2 + t2^2
        let cases: [(&[(usize, usize, i64)], usize); 3] = [
            (&[(2, 0, 1), (0, 2, -1)], 2),
            (&[(1, 1, 1), (0, 0, -1)], 1),
            (&[(2, 0, 1), (0, 2, 1)], 2),
        ];
        for (t, want) in cases {
            assert_eq!(count_factors(&bv::<G>(t)).unwrap(), want, "{t:?}");
            assert_eq!(count_factors(&bv::<F>(t)).unwrap(), want, "{t:?}");
        }
        assert!(count_factors(&bv::<G>(&[(2, 3, 5)])).is_err());
        assert!(count_factors(&Bivar::<G>::zero()).is_err());
    }

    #[test]
    fn content_and_multiplicity() {
        // (y - 1)^2 (x^2 - y) (x - y)^2 x
        let y1: Bivar<G> = bv(&[(0, 1, 1), (0, 0, -1)]);
        let p: Bivar<G> = bv(&[(2, 0, 1), (0, 1, -1)]);
        let l: Bivar<G> = bv(&[(1, 0, 1), (0, 1, -1)]);
        let x: Bivar<G> = bv(&[(1, 0, 1)]);
        let f = y1.mul(&y1).mul(&p).mul(&l).mul(&l).mul(&x);
        assert_eq!(count_factors(&f).unwrap(), 2 + 1 + 2 + 1);
        // univariate in x: x^3 - x has three linear factors
        assert_eq!(count_factors(&bv::<G>(&[(3, 0, 1), (1, 0, -1)])).unwrap(), 3);
        // univariate in y
        assert_eq!(count_factors(&bv::<G>(&[(0, 2, 1), (0, 0, 1)])).unwrap(), 2);
    }

    #[test]
    fn irreducible_high_degree() {
        // y^3 - x^5 + x y + 1 is absolutely irreducible
        let f: Bivar<F> = bv(&[(0, 3, 1), (5, 0, -1), (1, 1, 1), (0, 0, 1)]);
        assert_eq!(count_factors(&f).unwrap(), 1);
        let g: Bivar<F> = bv(&[(3, 0, 1), (0, 2, 1), (1, 1, -7), (0, 0, 2)]);
        assert_eq!(count_factors(&f.mul(&g)).unwrap(), 2);
        assert_eq!(count_factors(&f.mul(&g).mul(&g)).unwrap(), 3);
    }
}
