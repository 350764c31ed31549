//! Counting absolutely irreducible factors of Fermi and Bloch polynomials,
//! the zero-potential product formula, and the lowest-degree components.
//!
//! Bivariate inputs are counted directly with the Gao kernel criterion.
//! Polynomials in three or more variables are restricted to random affine
//! planes `z = p + t_1 u + t_2 v` and the slices are counted modulo word-size
//! primes; the reported count is the modal slice count.

pub mod bivar;
pub mod field;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::char_laurent;
use crate::lattice::{average, PeriodSpec, PeriodicPotential};
use crate::laurent::{rat, LaurentPoly};
use crate::scalar::{CycloField, Cyclo, GaussRat};
use bivar::{count_factors, Bivar};
use field::{Field, Fp, PRIMES};

/// Fraction of agreeing slices needed for a confident report.
pub const AGREEMENT_THRESHOLD: f64 = 0.8;
/// Minimum number of accepted slices for a sliced count.
pub const MIN_TRIALS: usize = 5;
const MAX_SLICE_ATTEMPTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// One-variable body: the count is its degree.
    Univariate,
    BivariateDirect,
    Sliced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Linear algebra over the Gaussian rationals.
    Exact,
    /// Linear algebra modulo two large primes; the smaller count is kept.
    Modular,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorReport {
    pub count: usize,
    pub method: CountMethod,
    pub trials: usize,
    pub agreement: f64,
    pub seed: u64,
    pub tainted: bool,
    pub confident: bool,
    /// `(count, number of slices)` pairs, ascending by count.
    pub histogram: Vec<(usize, usize)>,
}

impl FactorReport {
    fn direct(count: usize, method: CountMethod, seed: u64, tainted: bool) -> Self {
        FactorReport {
            count,
            method,
            trials: 1,
            agreement: 1.0,
            seed,
            tainted,
            confident: true,
            histogram: vec![(count, 1)],
        }
    }
}

fn body_to_bivar<F: Field>(body: &LaurentPoly, map: impl Fn(&GaussRat) -> Option<F>) -> Option<Bivar<F>> {
    let mut terms = Vec::with_capacity(body.len());
    for (m, c) in body.terms() {
        let e = m.exps();
        terms.push((e[0] as usize, e[1] as usize, map(c)?));
    }
    Some(Bivar::from_terms(terms))
}

fn modular_count<const P: u64>(f: &LaurentPoly, bideg: (usize, usize)) -> Option<usize> {
    let i = Fp::<P>::sqrt_minus_one();
    let b = body_to_bivar(f, |c| Fp::<P>::from_gauss(c, i))?;
    if (b.deg_x(), b.deg_y()) != bideg {
        return None;
    }
    count_factors(&b).ok()
}

/// Number of absolutely irreducible factors (with multiplicity) of a
/// polynomial in two variables with nonnegative exponents.
pub fn factor_count_bivariate(f: &LaurentPoly, mode: CountMode) -> Result<usize> {
    if f.nvars() != 2 {
        return Err(Error::Shape(format!("bivariate input expected, got {} variables", f.nvars())));
    }
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.min_degrees().iter().any(|&e| e < 0) {
        return Err(Error::Domain("negative exponents; pass the unit-normalized body".into()));
    }
    match mode {
        CountMode::Exact => count_factors(&body_to_bivar(f, |c| Some(c.clone())).unwrap()),
        CountMode::Modular => {
            let exact = body_to_bivar(f, |c| Some(c.clone())).unwrap();
            if exact.is_monomial() {
                return Err(Error::Domain("factor count of a monomial is undefined".into()));
            }
            let bideg = (exact.deg_x(), exact.deg_y());
            [modular_count::<{ PRIMES[0] }>(f, bideg), modular_count::<{ PRIMES[1] }>(f, bideg)]
                .into_iter()
                .flatten()
                .min()
                .ok_or_else(|| Error::Domain("no usable prime for modular counting".into()))
        }
    }
}

fn total_degree(body: &LaurentPoly) -> usize {
    body.terms()
        .map(|(m, _)| m.exps().iter().map(|&e| e as usize).sum::<usize>())
        .max()
        .unwrap_or(0)
}

/// Dense triangular bivariate polynomial in `(t_1, t_2)` of degree at most `deg`.
struct Dense<F: Field> {
    deg: usize,
    c: Vec<F>,
}

impl<F: Field> Dense<F> {
    fn constant(deg: usize, v: F) -> Self {
        let mut c = vec![F::zero(); (deg + 1) * (deg + 1)];
        c[0] = v;
        Dense { deg, c }
    }

    fn at(&self, a: usize, b: usize) -> &F {
        &self.c[a * (self.deg + 1) + b]
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.deg + 1;
        let mut out = Dense::constant(self.deg, F::zero());
        for a in 0..n {
            for b in 0..n - a {
                let x = self.at(a, b);
                if x.is_zero() {
                    continue;
                }
                for c in 0..n - a - b {
                    for d in 0..n - a - b - c {
                        let y = o.at(c, d);
                        if !y.is_zero() {
                            let e = &mut out.c[(a + c) * n + b + d];
                            *e = e.add(&x.mul(y));
                        }
                    }
                }
            }
        }
        out
    }
}

/// A random affine plane `z = p + t_1 u + t_2 v` in `Q^k`.
#[derive(Clone, Debug)]
struct Plane {
    p: Vec<BigRational>,
    u: Vec<BigRational>,
    v: Vec<BigRational>,
}

impl Plane {
    fn random(k: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut draw = || -> Vec<BigRational> {
            (0..k)
                .map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=5)))
                .collect()
        };
        Plane {
            p: draw(),
            u: draw(),
            v: draw(),
        }
    }
}

/// Restriction of `body` to the plane, reduced mod `P`.
fn slice_mod<const P: u64>(body: &LaurentPoly, plane: &Plane, deg: usize) -> Option<Bivar<Fp<P>>> {
    let i = Fp::<P>::sqrt_minus_one();
    let k = body.nvars();
    let maxd = body.max_degrees();
    let mut powers: Vec<Vec<Dense<Fp<P>>>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut lin = Dense::constant(deg, Fp::from_rational(&plane.p[j])?);
        if deg >= 1 {
            lin.c[deg + 1] = Fp::from_rational(&plane.u[j])?;
            lin.c[1] = Fp::from_rational(&plane.v[j])?;
        }
        let mut pw = vec![Dense::constant(deg, Fp::one())];
        for e in 1..=maxd[j].max(0) as usize {
            let next = pw[e - 1].mul(&lin);
            pw.push(next);
        }
        powers.push(pw);
    }
    let mut acc = vec![Fp::<P>::zero(); (deg + 1) * (deg + 1)];
    for (m, c) in body.terms() {
        let c = Fp::from_gauss(c, i)?;
        let e = m.exps();
        let mut prod: Option<Dense<Fp<P>>> = None;
        for (j, &ej) in e.iter().enumerate() {
            if ej == 0 {
                continue;
            }
            let pw = &powers[j][ej as usize];
            prod = Some(match prod {
                None => Dense { deg, c: pw.c.clone() },
                Some(q) => q.mul(pw),
            });
        }
        match prod {
            None => acc[0] = acc[0].add(&c),
            Some(q) => {
                for (a, x) in acc.iter_mut().zip(&q.c) {
                    if !x.is_zero() {
                        *a = a.add(&c.mul(x));
                    }
                }
            }
        }
    }
    let n = deg + 1;
    let b = Bivar::from_terms(
        acc.into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(idx, v)| (idx / n, idx % n, v)),
    );
    (!b.is_zero() && b.total_degree() == deg).then_some(b)
}

fn sliced_trial(body: &LaurentPoly, deg: usize, seed: u64, trial: usize) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    for _ in 0..MAX_SLICE_ATTEMPTS {
        let plane = Plane::random(body.nvars(), &mut rng);
        let Some(s0) = slice_mod::<{ PRIMES[0] }>(body, &plane, deg) else {
            continue;
        };
        let Ok(c0) = count_factors(&s0) else {
            continue;
        };
        if c0 == 1 {
            return Some(1);
        }
        let c1 = slice_mod::<{ PRIMES[1] }>(body, &plane, deg).and_then(|s| count_factors(&s).ok());
        return Some(c1.map_or(c0, |c1| c0.min(c1)));
    }
    None
}

/// Sliced count of a polynomial body in three or more variables.
pub fn sliced_count(body: &LaurentPoly, trials: usize, seed: u64, tainted: bool) -> Result<FactorReport> {
    if trials < MIN_TRIALS {
        return Err(Error::Precondition(format!("sliced counts need at least {MIN_TRIALS} trials")));
    }
    if body.min_degrees().iter().any(|&e| e < 0) {
        return Err(Error::Domain("negative exponents; pass the unit-normalized body".into()));
    }
    let deg = total_degree(body);
    if deg == 0 {
        return Err(Error::Domain("constant polynomial has no factors to count".into()));
    }
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| sliced_trial(body, deg, seed, t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    if counts.is_empty() {
        return Err(Error::Domain("all slices were degenerate".into()));
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &counts {
        *hist.entry(*c).or_default() += 1;
    }
    let (&count, &freq) = hist.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).unwrap();
    let agreement = freq as f64 / counts.len() as f64;
    Ok(FactorReport {
        count,
        method: CountMethod::Sliced,
        trials: counts.len(),
        agreement,
        seed,
        tainted,
        confident: counts.len() >= MIN_TRIALS && agreement >= AGREEMENT_THRESHOLD,
        histogram: hist.into_iter().collect(),
    })
}

fn count_body(body: &LaurentPoly, trials: usize, seed: u64, tainted: bool) -> Result<FactorReport> {
    match body.nvars() {
        0 => Err(Error::Shape("no variables".into())),
        1 => {
            let deg = body.max_degrees()[0] as usize;
            if deg == 0 {
                return Err(Error::Domain("constant polynomial has no factors to count".into()));
            }
            Ok(FactorReport::direct(deg, CountMethod::Univariate, seed, tainted))
        }
        2 => {
            let c = factor_count_bivariate(body, CountMode::Exact)?;
            Ok(FactorReport::direct(c, CountMethod::BivariateDirect, seed, tainted))
        }
        _ => sliced_count(body, trials, seed, tainted),
    }
}

/// `P_V(z, lambda0)` as a polynomial in `z`: counted directly for `d <= 2`,
/// by slicing for `d >= 3`.
pub fn fermi_factor_count(v: &PeriodicPotential, lambda0: &GaussRat, trials: usize, seed: u64) -> Result<FactorReport> {
    let p = char_laurent(v)?.specialize_lambda(lambda0);
    let body = p.unit_normalize()?.body;
    count_body(&body, trials, seed, v.periods().is_tainted())
}

/// `P_V(z, lambda)` as a polynomial in `(z, lambda)`.
pub fn bloch_factor_count(v: &PeriodicPotential, trials: usize, seed: u64) -> Result<FactorReport> {
    let p = char_laurent(v)?.lambda_as_variable();
    let body = p.unit_normalize()?.body;
    count_body(&body, trials, seed, v.periods().is_tainted())
}

struct RootsOfUnity {
    field: Arc<CycloField>,
    periods: Vec<usize>,
}

impl RootsOfUnity {
    fn new(q: &[usize]) -> Self {
        let n = q.iter().fold(4usize, |a, &b| num_integer::lcm(a, b));
        RootsOfUnity {
            field: CycloField::new(n),
            periods: q.to_vec(),
        }
    }

    /// `(rho^j_{n_j})^sign`.
    fn rho(&self, j: usize, nj: usize, sign: i64) -> Cyclo {
        let step = (self.field.order() / self.periods[j]) as i64;
        Cyclo::zeta_pow(&self.field, sign * step * nj as i64)
    }

    fn one(&self) -> Cyclo {
        Cyclo::from_rational(&self.field, rat(1, 1))
    }

    /// `(-1)^Q prod_{n in W} factor(n)`, converted back to Gaussian rationals.
    fn product(
        &self,
        periods: &PeriodSpec,
        nz: usize,
        lambda: bool,
        factor: impl Fn(&[usize]) -> Result<LaurentPoly<Cyclo>>,
    ) -> Result<LaurentPoly> {
        let n = nz + lambda as usize;
        let mut acc = LaurentPoly::<Cyclo>::monomial(nz, lambda, vec![0; n], self.one());
        for w in periods.domain() {
            acc = acc.try_mul(&factor(&w)?)?;
        }
        if periods.volume() % 2 == 1 {
            acc = acc.neg();
        }
        acc.try_map_coeffs(|c| c.to_gauss())
            .ok_or_else(|| Error::Internal("product over W has coefficients outside Q(i)".into()))
    }
}

/// `P_0(z, lambda)` from the product formula over `W`, without determinants.
///
/// With `lambda = None` the result keeps `lambda` as a variable.
pub fn zero_potential_reference(periods: &PeriodSpec, lambda: Option<&GaussRat>) -> Result<LaurentPoly> {
    let d = periods.dim();
    let q = periods.periods();
    let ru = RootsOfUnity::new(q);
    let sym = lambda.is_none();
    let n = d + sym as usize;
    let lam_term = match lambda {
        None => {
            let mut e = vec![0; n];
            e[d] = 1;
            (e, ru.one())
        }
        Some(l) => (vec![0; n], Cyclo::from_gauss(&ru.field, l)?),
    };
    let tilde = ru.product(periods, d, sym, |w| {
        let mut terms = vec![lam_term.clone()];
        for j in 0..d {
            let mut e = vec![0; n];
            e[j] = 1;
            terms.push((e.clone(), ru.rho(j, w[j], 1)));
            e[j] = -1;
            terms.push((e, ru.rho(j, w[j], -1)));
        }
        Ok(LaurentPoly::from_terms(d, sym, terms))
    })?;
    if !tilde.is_mu_invariant(q) {
        return Err(Error::Internal("product over W is not invariant under the roots of unity".into()));
    }
    tilde.collapse_powers(q)
}

/// For `d = 2`: the `f` and `g` with `f(z^q) = prod (rho^1 z_1 + rho^2 z_2)` and
/// `g(z^q) = prod (1 + 1/(rho^1 rho^2 z_1 z_2))`; `P_0(z, 0) = (-1)^Q f g`.
pub fn zero_potential_factors(periods: &PeriodSpec) -> Result<(LaurentPoly, LaurentPoly)> {
    if periods.dim() != 2 {
        return Err(Error::Shape("the two-factor split is defined for d = 2".into()));
    }
    let q = periods.periods();
    let ru = RootsOfUnity::new(q);
    let sign = if periods.volume() % 2 == 1 { -1 } else { 1 };
    let f = ru.product(periods, 2, false, |w| {
        Ok(LaurentPoly::from_terms(
            2,
            false,
            [(vec![1, 0], ru.rho(0, w[0], 1)), (vec![0, 1], ru.rho(1, w[1], 1))],
        ))
    })?;
    let g = ru.product(periods, 2, false, |w| {
        Ok(LaurentPoly::from_terms(
            2,
            false,
            [(vec![0, 0], ru.one()), (vec![-1, -1], ru.rho(0, w[0], -1).mul(&ru.rho(1, w[1], -1)))],
        ))
    })?;
    // undo the (-1)^Q applied by `product` to each factor
    let f = f.scale(&GaussRat::from_int(sign)).collapse_powers(q)?;
    let g = g.scale(&GaussRat::from_int(sign)).collapse_powers(q)?;
    Ok((f, g))
}

/// Outcome of [`lowest_component_check`].
#[derive(Clone, Debug, Serialize)]
pub struct LowestComponentReport {
    pub all_plus: bool,
    pub minus_last: bool,
    /// First differing term, when a check fails.
    pub mismatch: Option<String>,
}

impl LowestComponentReport {
    pub fn passed(&self) -> bool {
        self.all_plus && self.minus_last
    }
}

fn first_difference(a: &LaurentPoly, b: &LaurentPoly) -> String {
    let diff = a.sub(b);
    let out = match diff.terms().next_back() {
        Some((m, c)) => format!("term {:?} differs by {}", m.exps(), c),
        None => "no difference".into(),
    };
    out
}

/// Compares the lowest-degree components of `P~_V` for the gradings
/// `(+,..,+)` and `(+,..,+,-)` with the `V`-independent products
/// `(-1)^Q prod 1/(rho z)`-sums and `(-1)^Q prod (rho^d z_d + sum 1/(rho z))`.
pub fn lowest_component_check(v: &PeriodicPotential) -> Result<LowestComponentReport> {
    let periods = v.periods();
    let d = periods.dim();
    let q = periods.periods();
    let tilde = char_laurent(v)?.substitute_powers(q);
    let ru = RootsOfUnity::new(q);
    let n = d + 1;
    let expected = |flip_last: bool| {
        ru.product(periods, d, true, |w| {
            let mut terms = Vec::with_capacity(d);
            for j in 0..d {
                let mut e = vec![0; n];
                if flip_last && j == d - 1 {
                    e[j] = 1;
                    terms.push((e, ru.rho(j, w[j], 1)));
                } else {
                    e[j] = -1;
                    terms.push((e, ru.rho(j, w[j], -1)));
                }
            }
            Ok(LaurentPoly::from_terms(d, true, terms))
        })
    };
    let mut report = LowestComponentReport {
        all_plus: true,
        minus_last: true,
        mismatch: None,
    };
    let h1 = expected(false)?;
    let low1 = tilde.lowest_component(&vec![1; d])?;
    if h1 != low1 {
        report.all_plus = false;
        report.mismatch = Some(format!("all-plus grading: {}", first_difference(&low1, &h1)));
    }
    let h2 = expected(true)?;
    let mut signs = vec![1; d];
    signs[d - 1] = -1;
    let low2 = tilde.lowest_component(&signs)?;
    if h2 != low2 {
        report.minus_last = false;
        report
            .mismatch
            .get_or_insert(format!("minus-last grading: {}", first_difference(&low2, &h2)));
    }
    Ok(report)
}

/// `[V]` as an exact scalar.
pub fn exact_average(v: &PeriodicPotential) -> Result<GaussRat> {
    average(v)
        .as_exact()
        .cloned()
        .ok_or(Error::NotExact("the exact average"))
}

/// Whether the body of `P_V(z, [V])` equals the body of `P_0(z, 0)`.
pub fn matches_zero_potential_at_average(v: &PeriodicPotential) -> Result<bool> {
    let avg = exact_average(v)?;
    let pv = char_laurent(v)?.specialize_lambda(&avg).unit_normalize()?.body;
    let p0 = zero_potential_reference(v.periods(), Some(&GaussRat::zero()))?
        .unit_normalize()?
        .body;
    Ok(pv == p0)
}
