//! Sparse multivariate Laurent polynomials in `z_1..z_d` and an optional
//! spectral variable `lambda`.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose ordering is graded
//! lexicographic over `(z_1, .., z_d, lambda)`. The canonical text rendering
//! lists terms from the largest monomial down, one per line:
//!
//! ```text
//! (1,0) * z1^1 * l^2
//! (-1,0) * z1^2 * l^0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{Cyclo, GaussRat};

/// Coefficient ring of a [`LaurentPoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn c_is_zero(&self) -> bool;
    fn c_add(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
}

impl Coeff for GaussRat {
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
}

impl Coeff for Cyclo {
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn c_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
}

/// Exponent vector. Ordered by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: i64,
    exps: Vec<i32>,
}

impl Monomial {
    pub fn new(exps: Vec<i32>) -> Self {
        let deg = exps.iter().map(|&e| e as i64).sum();
        Monomial { deg, exps }
    }

    pub fn one(n: usize) -> Self {
        Monomial::new(vec![0; n])
    }

    pub fn exps(&self) -> &[i32] {
        &self.exps
    }

    pub fn total_degree(&self) -> i64 {
        self.deg
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial {
            deg: self.deg + o.deg,
            exps: self.exps.iter().zip(&o.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        Monomial {
            deg: self.deg - o.deg,
            exps: self.exps.iter().zip(&o.exps).map(|(a, b)| a - b).collect(),
        }
    }

    fn divides(&self, o: &Monomial) -> bool {
        self.exps.iter().zip(&o.exps).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.deg.cmp(&o.deg).then_with(|| self.exps.cmp(&o.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse Laurent polynomial. Negative exponents are allowed on the `z`
/// variables only; the `lambda` slot, when present, is last and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<C: Coeff = GaussRat> {
    nz: usize,
    lambda: bool,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero(nz: usize, lambda: bool) -> Self {
        LaurentPoly {
            nz,
            lambda,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(nz: usize, lambda: bool, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<i32>, C)>,
    {
        let mut p = LaurentPoly::zero(nz, lambda);
        for (e, c) in terms {
            assert_eq!(e.len(), p.nvars(), "exponent vector length");
            if lambda {
                assert!(e[nz] >= 0, "negative lambda exponent");
            }
            p.add_term(Monomial::new(e), c);
        }
        p
    }

    pub fn monomial(nz: usize, lambda: bool, exps: Vec<i32>, c: C) -> Self {
        LaurentPoly::from_terms(nz, lambda, [(exps, c)])
    }

    /// Number of `z` variables.
    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn has_lambda(&self) -> bool {
        self.lambda
    }

    pub fn nvars(&self) -> usize {
        self.nz + self.lambda as usize
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> Option<&C> {
        self.terms.get(&Monomial::new(exps.to_vec()))
    }

    /// Largest term in the canonical order.
    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        use std::collections::btree_map::Entry;
        if c.c_is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().c_add(&c);
                if s.c_is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_vars(&self, o: &Self) -> Result<()> {
        if self.nz != o.nz || self.lambda != o.lambda {
            return Err(Error::NvarsMismatch(self.nvars(), o.nvars()));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_vars(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check_vars(o)?;
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca.c_mul(cb));
            }
        }
        Ok(out)
    }

    /// Panicking variants for internal use where variable sets agree by construction.
    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("variable mismatch")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("variable mismatch")
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("variable mismatch")
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            nz: self.nz,
            lambda: self.lambda,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.c_neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.c_mul(s));
        }
        out
    }

    pub fn pow(&self, e: u32, one: C) -> Self {
        let mut acc = LaurentPoly::monomial(self.nz, self.lambda, vec![0; self.nvars()], one);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplies by the monomial `z^shift` (shift over all variables).
    pub fn shift(&self, shift: &[i32]) -> Self {
        let s = Monomial::new(shift.to_vec());
        LaurentPoly {
            nz: self.nz,
            lambda: self.lambda,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(&s), c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> Option<D>) -> Option<LaurentPoly<D>> {
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Some(out)
    }

    /// Per-variable minimum exponent (zeros for the zero polynomial).
    pub fn min_degrees(&self) -> Vec<i32> {
        let mut out = vec![i32::MAX; self.nvars()];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m.exps()) {
                *o = (*o).min(e);
            }
        }
        out.iter().map(|&e| if e == i32::MAX { 0 } else { e }).collect()
    }

    /// Per-variable maximum exponent (zeros for the zero polynomial).
    pub fn max_degrees(&self) -> Vec<i32> {
        let mut out = vec![i32::MIN; self.nvars()];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m.exps()) {
                *o = (*o).max(e);
            }
        }
        out.iter().map(|&e| if e == i32::MIN { 0 } else { e }).collect()
    }

    /// The map `z_j -> z_j^{q_j}`; the lambda exponent is untouched.
    pub fn substitute_powers(&self, q: &[usize]) -> Self {
        assert_eq!(q.len(), self.nz, "period vector length");
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            let mut e = m.exps().to_vec();
            for (ej, &qj) in e.iter_mut().zip(q) {
                *ej *= qj as i32;
            }
            out.add_term(Monomial::new(e), c.clone());
        }
        out
    }

    /// Inverse of [`substitute_powers`](Self::substitute_powers): divides every
    /// `z_j` exponent by `q_j`, failing if any division is inexact.
    pub fn collapse_powers(&self, q: &[usize]) -> Result<Self> {
        assert_eq!(q.len(), self.nz, "period vector length");
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            let mut e = m.exps().to_vec();
            for (j, (ej, &qj)) in e.iter_mut().zip(q).enumerate() {
                if *ej % qj as i32 != 0 {
                    return Err(Error::Internal(format!(
                        "exponent {} of z{} is not divisible by q = {}",
                        ej,
                        j + 1,
                        qj
                    )));
                }
                *ej /= qj as i32;
            }
            out.add_term(Monomial::new(e), c.clone());
        }
        Ok(out)
    }

    /// Weighted degree `sum_j signs_j * a_j` over the `z` variables.
    fn signed_degree(&self, m: &Monomial, signs: &[i32]) -> i64 {
        m.exps()[..self.nz]
            .iter()
            .zip(signs)
            .map(|(&a, &s)| a as i64 * s as i64)
            .sum()
    }

    /// Initial form for the grading `sum_j signs_j * a_j`: all terms of minimal
    /// signed degree. Lambda exponents do not enter the grading.
    pub fn lowest_component(&self, signs: &[i32]) -> Result<Self> {
        if signs.len() != self.nz || signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::Shape(format!(
                "signs must be {} entries of +1/-1",
                self.nz
            )));
        }
        let low = self
            .terms
            .keys()
            .map(|m| self.signed_degree(m, signs))
            .min()
            .ok_or(Error::ZeroPolynomial)?;
        let mut out = LaurentPoly::zero(self.nz, self.lambda);
        for (m, c) in &self.terms {
            if self.signed_degree(m, signs) == low {
                out.add_term(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// True if every monomial's exponent of `z_j` is divisible by `q_j`,
    /// which is exactly invariance under the full group of roots of unity.
    pub fn is_mu_invariant(&self, q: &[usize]) -> bool {
        self.terms.keys().all(|m| {
            m.exps()[..self.nz]
                .iter()
                .zip(q)
                .all(|(&a, &qj)| a % qj as i32 == 0)
        })
    }
}

/// Result of a symbolic group action: every term picks up a formal phase
/// `zeta_N^k` with `N = lcm(q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasedPoly<C: Coeff = GaussRat> {
    pub order: usize,
    pub terms: Vec<(Monomial, C, usize)>,
}

impl<C: Coeff> PhasedPoly<C> {
    pub fn is_unphased(&self) -> bool {
        self.terms.iter().all(|(_, _, k)| *k == 0)
    }
}

impl<C: Coeff> LaurentPoly<C> {
    /// `f(rho . z)` with `rho_j = exp(2 pi i shifts_j / q_j)`, phases kept symbolic.
    pub fn group_act_symbolic(&self, q: &[usize], shifts: &[i64]) -> Result<PhasedPoly<C>> {
        if q.len() != self.nz || shifts.len() != self.nz || q.contains(&0) {
            return Err(Error::Shape("group action needs one period and one shift per z variable".into()));
        }
        let order = q.iter().fold(1usize, |a, &b| num_integer::lcm(a, b));
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let k: i64 = m.exps()[..self.nz]
                    .iter()
                    .zip(q.iter().zip(shifts))
                    .map(|(&a, (&qj, &s))| a as i64 * s * (order / qj) as i64)
                    .sum();
                (m.clone(), c.clone(), k.rem_euclid(order as i64) as usize)
            })
            .collect();
        Ok(PhasedPoly { order, terms })
    }
}

impl LaurentPoly<GaussRat> {
    pub fn constant(nz: usize, lambda: bool, c: GaussRat) -> Self {
        let n = nz + lambda as usize;
        LaurentPoly::monomial(nz, lambda, vec![0; n], c)
    }

    pub fn one(nz: usize, lambda: bool) -> Self {
        LaurentPoly::constant(nz, lambda, GaussRat::one())
    }

    /// `z_j^e` (0-based `j`).
    pub fn z_pow(nz: usize, lambda: bool, j: usize, e: i32) -> Self {
        let mut ex = vec![0; nz + lambda as usize];
        ex[j] = e;
        LaurentPoly::monomial(nz, lambda, ex, GaussRat::one())
    }

    pub fn lambda_var(nz: usize) -> Self {
        let mut ex = vec![0; nz + 1];
        ex[nz] = 1;
        LaurentPoly::monomial(nz, true, ex, GaussRat::one())
    }

    /// Numeric value at `z`, `lambda`.
    pub fn eval(&self, z: &[Complex64], lambda: Complex64) -> Result<Complex64> {
        if z.len() != self.nz {
            return Err(Error::NvarsMismatch(self.nz, z.len()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (j, &e) in m.exps()[..self.nz].iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if z[j] == Complex64::new(0.0, 0.0) && e < 0 {
                    return Err(Error::ZeroCoordinate(j + 1));
                }
                t *= z[j].powi(e);
            }
            if self.lambda {
                t *= lambda.powi(m.exps()[self.nz]);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact value at a Gaussian-rational point.
    pub fn eval_exact(&self, z: &[GaussRat], lambda: &GaussRat) -> Result<GaussRat> {
        if z.len() != self.nz {
            return Err(Error::NvarsMismatch(self.nz, z.len()));
        }
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (j, &e) in m.exps()[..self.nz].iter().enumerate() {
                if e > 0 {
                    t = &t * &z[j].pow(e as u32);
                } else if e < 0 {
                    let inv = z[j].inv().ok_or(Error::ZeroCoordinate(j + 1))?;
                    t = &t * &inv.pow((-e) as u32);
                }
            }
            if self.lambda {
                t = &t * &lambda.pow(m.exps()[self.nz] as u32);
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Sets `lambda = lambda0` and drops the lambda slot.
    pub fn specialize_lambda(&self, lambda0: &GaussRat) -> Self {
        if !self.lambda {
            return self.clone();
        }
        let mut out = LaurentPoly::zero(self.nz, false);
        for (m, c) in &self.terms {
            let e = m.exps();
            let c = c * &lambda0.pow(e[self.nz] as u32);
            out.add_term(Monomial::new(e[..self.nz].to_vec()), c);
        }
        out
    }

    /// Treats lambda as an ordinary variable (appends it to the z block).
    pub fn lambda_as_variable(&self) -> Self {
        LaurentPoly {
            nz: self.nvars(),
            lambda: false,
            terms: self.terms.clone(),
        }
    }

    /// Exact quotient `self / d`, failing if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        self.check_vars(d)?;
        if d.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        // Shift both to genuine polynomials so the grlex division terminates.
        let sa = self.min_degrees();
        let sd = d.min_degrees();
        let neg = |v: &[i32]| v.iter().map(|e| -e).collect::<Vec<_>>();
        let a = self.shift(&neg(&sa));
        let b = d.shift(&neg(&sd));
        let (bm, bc) = b.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let binv = bc.inv().unwrap();
        let mut rem = a;
        let mut quo = LaurentPoly::zero(self.nz, self.lambda);
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !bm.divides(&rm) {
                return Err(Error::Domain("polynomial division is not exact".into()));
            }
            let tm = rm.div(&bm);
            let tc = &rc * &binv;
            for (m, c) in &b.terms {
                rem.add_term(m.mul(&tm), -(c * &tc));
            }
            quo.add_term(tm, tc);
        }
        let mut shift = sa;
        for (s, t) in shift.iter_mut().zip(&sd) {
            *s -= t;
        }
        Ok(quo.shift(&shift))
    }

    /// Monomial-unit normal form; see [`UnitNormalForm`].
    pub fn unit_normalize(&self) -> Result<UnitNormalForm> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let mut mins = self.min_degrees();
        if self.lambda {
            mins[self.nz] = 0;
        }
        let neg: Vec<i32> = mins.iter().map(|e| -e).collect();
        let shifted = self.shift(&neg);
        let c = shifted.leading().unwrap().1.clone();
        let body = shifted.scale(&c.inv().unwrap());
        Ok(UnitNormalForm {
            unit_coeff: c,
            unit_exps: mins[..self.nz].to_vec(),
            body,
        })
    }

    /// Associates in the Laurent ring: equal up to a nonzero constant times a monomial.
    pub fn is_associate(&self, o: &Self) -> Result<bool> {
        if self.is_zero() || o.is_zero() {
            return Ok(self.is_zero() && o.is_zero());
        }
        self.check_vars(o)?;
        Ok(self.unit_normalize()?.body == o.unit_normalize()?.body)
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }

    /// Parses the canonical text format with explicitly given variable layout,
    /// so that the zero polynomial (`0`) round-trips.
    pub fn parse_canonical(text: &str, nz: usize, lambda: bool) -> Result<Self> {
        let mut out = LaurentPoly::zero(nz, lambda);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line == "0" {
                continue;
            }
            let mut parts = line.split(" * ");
            let c: GaussRat = parts
                .next()
                .ok_or_else(|| Error::Parse("empty term".into()))?
                .parse()?;
            let mut e = vec![0i32; nz + lambda as usize];
            let mut seen = vec![false; e.len()];
            for f in parts {
                let (var, exp) = f
                    .split_once('^')
                    .ok_or_else(|| Error::Parse(format!("bad factor `{f}`")))?;
                let exp: i32 = exp
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{f}`")))?;
                let idx = if var == "l" && lambda {
                    nz
                } else if let Some(j) = var.strip_prefix('z') {
                    let j: usize = j
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable `{var}`")))?;
                    if j == 0 || j > nz {
                        return Err(Error::Parse(format!("variable `{var}` out of range")));
                    }
                    j - 1
                } else {
                    return Err(Error::Parse(format!("unknown variable `{var}`")));
                };
                if seen[idx] {
                    return Err(Error::Parse(format!("repeated variable `{var}`")));
                }
                seen[idx] = true;
                e[idx] = exp;
            }
            if lambda && e[nz] < 0 {
                return Err(Error::Parse("negative lambda exponent".into()));
            }
            out.add_term(Monomial::new(e), c);
        }
        Ok(out)
    }
}

impl fmt::Display for LaurentPoly<GaussRat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (m, c) in self.terms.iter().rev() {
            write!(f, "{c}")?;
            for (j, e) in m.exps()[..self.nz].iter().enumerate() {
                write!(f, " * z{}^{}", j + 1, e)?;
            }
            if self.lambda {
                write!(f, " * l^{}", m.exps()[self.nz])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly<GaussRat> {
    type Err = Error;

    /// Infers the variable layout from the first term.
    fn from_str(s: &str) -> Result<Self> {
        let first = s
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && *l != "0")
            .ok_or_else(|| Error::Parse("cannot infer variables of the zero polynomial".into()))?;
        let nz = first.matches(" * z").count();
        let lambda = first.contains(" * l^");
        LaurentPoly::parse_canonical(s, nz, lambda)
    }
}

/// `f = unit_coeff * z^unit_exps * body`, with every `z_j` minimum degree of
/// `body` equal to zero and `body` monic in the canonical order. Two Laurent
/// polynomials are associates exactly when their bodies coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitNormalForm {
    pub unit_coeff: GaussRat,
    pub unit_exps: Vec<i32>,
    pub body: LaurentPoly<GaussRat>,
}

impl UnitNormalForm {
    pub fn reconstruct(&self) -> LaurentPoly<GaussRat> {
        let mut shift = self.unit_exps.clone();
        if self.body.has_lambda() {
            shift.push(0);
        }
        self.body.shift(&shift).scale(&self.unit_coeff)
    }
}

/// `(-1)^Q z_1^{Q/q_1} ... z_d^{Q/q_d} f`, the classical normalization of the
/// characteristic polynomial into an ordinary polynomial.
pub fn p1_normalization(f: &LaurentPoly<GaussRat>, q: &[usize]) -> LaurentPoly<GaussRat> {
    let qq: usize = q.iter().product();
    let mut shift: Vec<i32> = q.iter().map(|&qj| (qq / qj) as i32).collect();
    if f.has_lambda() {
        shift.push(0);
    }
    let sign = if qq.is_multiple_of(2) { 1 } else { -1 };
    f.shift(&shift).scale(&GaussRat::from_int(sign))
}

/// Exact rational helper used in tests and generators.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}
