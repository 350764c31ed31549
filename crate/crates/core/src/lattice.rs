//! Periods, the fundamental domain `W`, periodic potentials and their
//! discrete Fourier transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::GaussRat;

/// Periods `q = (q_1, .., q_d)` of the lattice `Gamma = q_1 Z + .. + q_d Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodSpec {
    q: Vec<usize>,
    /// Set when the pairwise-coprime check was overridden.
    tainted: bool,
}

impl PeriodSpec {
    /// Pairwise-coprime periods, each at least 1.
    pub fn new(q: &[usize]) -> Result<Self> {
        Self::build(q, false)
    }

    /// Skips the coprimality check; downstream irreducibility reports are tainted.
    pub fn new_unchecked_coprime(q: &[usize]) -> Result<Self> {
        Self::build(q, true)
    }

    fn build(q: &[usize], allow_non_coprime: bool) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidPeriods("need at least one period".into()));
        }
        if let Some(bad) = q.iter().position(|&x| x == 0) {
            return Err(Error::InvalidPeriods(format!("q_{} must be >= 1", bad + 1)));
        }
        let mut tainted = false;
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                let g = q[i].gcd(&q[j]);
                if g != 1 {
                    if !allow_non_coprime {
                        return Err(Error::NonCoprime {
                            periods: q.to_vec(),
                            a: q[i],
                            b: q[j],
                            g,
                        });
                    }
                    tainted = true;
                }
            }
        }
        Ok(PeriodSpec {
            q: q.to_vec(),
            tainted,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn periods(&self) -> &[usize] {
        &self.q
    }

    /// `Q = q_1 ... q_d`.
    pub fn volume(&self) -> usize {
        self.q.iter().product()
    }

    pub fn is_tainted(&self) -> bool {
        self.tainted
    }

    /// Position of `n in W` in lexicographic order.
    pub fn index_of(&self, n: &[usize]) -> usize {
        n.iter().zip(&self.q).fold(0, |acc, (&nj, &qj)| acc * qj + nj)
    }

    /// Element of `W` at lexicographic position `idx`.
    pub fn point(&self, mut idx: usize) -> Vec<usize> {
        let mut n = vec![0; self.q.len()];
        for j in (0..self.q.len()).rev() {
            n[j] = idx % self.q[j];
            idx /= self.q[j];
        }
        n
    }

    /// `W` in lexicographic order.
    pub fn domain(&self) -> Vec<Vec<usize>> {
        (0..self.volume()).map(|i| self.point(i)).collect()
    }

    /// Reduces an arbitrary lattice point modulo `Gamma`.
    pub fn reduce(&self, n: &[i64]) -> Vec<usize> {
        n.iter()
            .zip(&self.q)
            .map(|(&x, &qj)| x.rem_euclid(qj as i64) as usize)
            .collect()
    }

    pub fn reduce_index(&self, n: &[i64]) -> usize {
        self.index_of(&self.reduce(n))
    }
}

/// Builds the period spec for a period vector, checking pairwise coprimality.
pub fn fundamental_domain(q: &[usize]) -> Result<PeriodSpec> {
    PeriodSpec::new(q)
}

/// Values over `W`, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Exact(Vec<GaussRat>),
    Float(Vec<Complex64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Exact(v) => v.len(),
            Values::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Values::Exact(v) => v.iter().map(GaussRat::to_complex).collect(),
            Values::Float(v) => v.clone(),
        }
    }
}

/// Scalar in either exact or floating mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRat),
    Float(Complex64),
}

impl Scalar {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_complex(),
            Scalar::Float(c) => *c,
        }
    }

    pub fn as_exact(&self) -> Option<&GaussRat> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Float(_) => None,
        }
    }
}

/// A `Gamma`-periodic function on `Z^d`, stored by its values on `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPotential {
    periods: PeriodSpec,
    values: Values,
}

impl PeriodicPotential {
    pub fn new(periods: PeriodSpec, values: Values) -> Result<Self> {
        if values.len() != periods.volume() {
            return Err(Error::Shape(format!(
                "expected Q = {} values, got {}",
                periods.volume(),
                values.len()
            )));
        }
        Ok(PeriodicPotential { periods, values })
    }

    pub fn exact(periods: PeriodSpec, values: Vec<GaussRat>) -> Result<Self> {
        Self::new(periods, Values::Exact(values))
    }

    pub fn float(periods: PeriodSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::new(periods, Values::Float(values))
    }

    /// Real integer values, convenient for tests and generators.
    pub fn from_ints(periods: PeriodSpec, values: &[i64]) -> Result<Self> {
        Self::exact(periods, values.iter().map(|&v| GaussRat::from_int(v)).collect())
    }

    pub fn zero(periods: &PeriodSpec) -> Self {
        let q = periods.volume();
        PeriodicPotential {
            periods: periods.clone(),
            values: Values::Exact(vec![GaussRat::zero(); q]),
        }
    }

    pub fn constant(periods: &PeriodSpec, c: GaussRat) -> Self {
        let q = periods.volume();
        PeriodicPotential {
            periods: periods.clone(),
            values: Values::Exact(vec![c; q]),
        }
    }

    /// Uniform random integers in `[lo, hi]`.
    pub fn random_integer<R: Rng>(periods: &PeriodSpec, lo: i64, hi: i64, rng: &mut R) -> Self {
        let v = (0..periods.volume())
            .map(|_| GaussRat::from_int(rng.gen_range(lo..=hi)))
            .collect();
        PeriodicPotential {
            periods: periods.clone(),
            values: Values::Exact(v),
        }
    }

    /// Random real rationals `p/r` with `p in [-num, num]`, `r in [1, den]`.
    pub fn random_rational<R: Rng>(periods: &PeriodSpec, num: i64, den: i64, rng: &mut R) -> Self {
        let v = (0..periods.volume())
            .map(|_| GaussRat::ratio(rng.gen_range(-num..=num), rng.gen_range(1..=den)))
            .collect();
        PeriodicPotential {
            periods: periods.clone(),
            values: Values::Exact(v),
        }
    }

    pub fn periods(&self) -> &PeriodSpec {
        &self.periods
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact(_))
    }

    pub fn exact_values(&self) -> Option<&[GaussRat]> {
        match &self.values {
            Values::Exact(v) => Some(v),
            Values::Float(_) => None,
        }
    }

    pub fn require_exact(&self, what: &'static str) -> Result<&[GaussRat]> {
        self.exact_values().ok_or(Error::NotExact(what))
    }

    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values.to_complex()
    }

    /// Real values, or an error for complex potentials.
    pub fn real_values(&self, what: &'static str) -> Result<Vec<f64>> {
        if !self.is_real() {
            return Err(Error::NotReal(what));
        }
        Ok(self.complex_values().iter().map(|c| c.re).collect())
    }

    /// All imaginary parts vanish.
    pub fn is_real(&self) -> bool {
        match &self.values {
            Values::Exact(v) => v.iter().all(GaussRat::is_real),
            Values::Float(v) => v.iter().all(|c| c.im == 0.0),
        }
    }

    /// Value at an arbitrary lattice point (periodic extension).
    pub fn at(&self, n: &[i64]) -> Scalar {
        let i = self.periods.reduce_index(n);
        match &self.values {
            Values::Exact(v) => Scalar::Exact(v[i].clone()),
            Values::Float(v) => Scalar::Float(v[i]),
        }
    }

    pub fn at_index(&self, i: usize) -> Scalar {
        match &self.values {
            Values::Exact(v) => Scalar::Exact(v[i].clone()),
            Values::Float(v) => Scalar::Float(v[i]),
        }
    }

    /// `V(n) -> V(n + shift)`.
    pub fn translate(&self, shift: &[i64]) -> Self {
        self.remap(|n| n.iter().zip(shift).map(|(a, b)| a + b).collect())
    }

    /// `V(n) -> V(-n)`.
    pub fn reflect(&self) -> Self {
        self.remap(|n| n.iter().map(|a| -a).collect())
    }

    fn remap(&self, f: impl Fn(&[i64]) -> Vec<i64>) -> Self {
        let src: Vec<usize> = self
            .periods
            .domain()
            .iter()
            .map(|n| {
                let n: Vec<i64> = n.iter().map(|&x| x as i64).collect();
                self.periods.reduce_index(&f(&n))
            })
            .collect();
        let values = match &self.values {
            Values::Exact(v) => Values::Exact(src.iter().map(|&i| v[i].clone()).collect()),
            Values::Float(v) => Values::Float(src.iter().map(|&i| v[i]).collect()),
        };
        PeriodicPotential {
            periods: self.periods.clone(),
            values,
        }
    }

    /// Adds a constant to every value.
    pub fn shifted(&self, c: &GaussRat) -> Self {
        let values = match &self.values {
            Values::Exact(v) => Values::Exact(v.iter().map(|x| x + c).collect()),
            Values::Float(v) => Values::Float(v.iter().map(|x| x + c.to_complex()).collect()),
        };
        PeriodicPotential {
            periods: self.periods.clone(),
            values,
        }
    }
}

/// `[V] = (1/Q) sum_{n in W} V(n)`.
pub fn average(v: &PeriodicPotential) -> Scalar {
    let q = v.periods.volume();
    match &v.values {
        Values::Exact(vals) => {
            let mut s = GaussRat::zero();
            for x in vals {
                s += x;
            }
            Scalar::Exact(s.scale(&BigRational::new(1.into(), (q as i64).into())))
        }
        Values::Float(vals) => Scalar::Float(vals.iter().sum::<Complex64>() / q as f64),
    }
}

/// Fourier coefficients `V^(l)`, `l in W`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    periods: PeriodSpec,
    coeffs: Values,
    /// Exact values were supplied but some period has irrational roots of
    /// unity, so the transform was computed in floating point.
    degraded: bool,
}

impl FourierTable {
    pub fn periods(&self) -> &PeriodSpec {
        &self.periods
    }

    pub fn coeffs(&self) -> &Values {
        &self.coeffs
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded
    }

    /// `V^(l)` for arbitrary `l` (periodic extension).
    pub fn at(&self, l: &[i64]) -> Complex64 {
        let i = self.periods.reduce_index(l);
        match &self.coeffs {
            Values::Exact(v) => v[i].to_complex(),
            Values::Float(v) => v[i],
        }
    }

    pub fn at_exact(&self, l: &[i64]) -> Option<GaussRat> {
        let i = self.periods.reduce_index(l);
        match &self.coeffs {
            Values::Exact(v) => Some(v[i].clone()),
            Values::Float(_) => None,
        }
    }

    pub fn complex_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.to_complex()
    }
}

fn gaussian_roots_available(q: &[usize]) -> bool {
    q.iter().all(|&x| matches!(x, 1 | 2 | 4))
}

/// Phase `exp(sign * 2 pi i sum_j l_j n_j / q_j)`.
fn phase(q: &[usize], l: &[usize], n: &[usize], sign: f64) -> Complex64 {
    let t: f64 = l
        .iter()
        .zip(n)
        .zip(q)
        .map(|((&a, &b), &qj)| ((a * b) % qj) as f64 / qj as f64)
        .sum();
    Complex64::from_polar(1.0, sign * 2.0 * PI * t)
}

/// Exact phase when every `q_j` divides 4: returned as a power of `i`.
fn phase_exact(q: &[usize], l: &[usize], n: &[usize], sign: i64) -> GaussRat {
    let quarter_turns: i64 = l
        .iter()
        .zip(n)
        .zip(q)
        .map(|((&a, &b), &qj)| ((a * b) % qj) as i64 * (4 / qj as i64))
        .sum();
    GaussRat::i_pow(sign * quarter_turns)
}

fn transform(periods: &PeriodSpec, values: &Values, sign: i64, normalize: bool) -> (Values, bool) {
    let q = periods.periods();
    let w = periods.domain();
    let vol = periods.volume();
    match values {
        Values::Exact(v) if gaussian_roots_available(q) => {
            let inv_q = BigRational::new(1.into(), (vol as i64).into());
            let out = w
                .iter()
                .map(|l| {
                    let mut s = GaussRat::zero();
                    for (n, x) in w.iter().zip(v) {
                        if !x.is_zero() {
                            s += &(x * &phase_exact(q, l, n, sign));
                        }
                    }
                    if normalize {
                        s.scale(&inv_q)
                    } else {
                        s
                    }
                })
                .collect();
            (Values::Exact(out), false)
        }
        _ => {
            let degraded = matches!(values, Values::Exact(_));
            let v = values.to_complex();
            let out = w
                .iter()
                .map(|l| {
                    let s: Complex64 = w
                        .iter()
                        .zip(&v)
                        .map(|(n, x)| x * phase(q, l, n, sign as f64))
                        .sum();
                    if normalize {
                        s / vol as f64
                    } else {
                        s
                    }
                })
                .collect();
            (Values::Float(out), degraded)
        }
    }
}

/// `V^(l) = (1/Q) sum_n V(n) exp(-2 pi i sum_j l_j n_j / q_j)`.
///
/// Exact when every period lies in `{1, 2, 4}`; otherwise computed in
/// floating point with [`FourierTable::is_degraded`] set for exact input.
pub fn dft(v: &PeriodicPotential) -> FourierTable {
    let (coeffs, degraded) = transform(&v.periods, &v.values, -1, true);
    FourierTable {
        periods: v.periods.clone(),
        coeffs,
        degraded,
    }
}

/// `V(n) = sum_l V^(l) exp(2 pi i sum_j l_j n_j / q_j)`.
pub fn idft(t: &FourierTable) -> PeriodicPotential {
    let (values, _) = transform(&t.periods, &t.coeffs, 1, false);
    PeriodicPotential {
        periods: t.periods.clone(),
        values,
    }
}

fn check_partition(d: usize, partition: &[usize]) -> Result<()> {
    if partition.is_empty() || partition.contains(&0) || partition.iter().sum::<usize>() != d {
        return Err(Error::Shape(format!(
            "partition {partition:?} does not split dimension {d}"
        )));
    }
    Ok(())
}

/// Coordinate ranges of each block.
fn blocks(partition: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    partition
        .iter()
        .map(|&dj| {
            let r = start..start + dj;
            start += dj;
            r
        })
        .collect()
}

/// `V(n) = sum_j V_j(n restricted to block j)`.
pub fn direct_sum(parts: &[PeriodicPotential], partition: &[usize]) -> Result<PeriodicPotential> {
    if parts.len() != partition.len() {
        return Err(Error::Shape(format!(
            "{} parts for a partition with {} blocks",
            parts.len(),
            partition.len()
        )));
    }
    for (p, &dj) in parts.iter().zip(partition) {
        if p.periods.dim() != dj {
            return Err(Error::Shape(format!(
                "part of dimension {} in a block of size {}",
                p.periods.dim(),
                dj
            )));
        }
    }
    let q: Vec<usize> = parts.iter().flat_map(|p| p.periods.periods().to_vec()).collect();
    let tainted = parts.iter().any(|p| p.periods.is_tainted());
    let periods = if tainted {
        PeriodSpec::new_unchecked_coprime(&q)?
    } else {
        PeriodSpec::new(&q)?
    };
    let ranges = blocks(partition);
    let exact = parts.iter().all(|p| p.is_exact());
    let w = periods.domain();
    let values = if exact {
        Values::Exact(
            w.iter()
                .map(|n| {
                    let mut s = GaussRat::zero();
                    for (p, r) in parts.iter().zip(&ranges) {
                        let idx = p.periods.index_of(&n[r.clone()]);
                        s += &p.exact_values().unwrap()[idx];
                    }
                    s
                })
                .collect(),
        )
    } else {
        let cv: Vec<Vec<Complex64>> = parts.iter().map(|p| p.complex_values()).collect();
        Values::Float(
            w.iter()
                .map(|n| {
                    parts
                        .iter()
                        .zip(&ranges)
                        .zip(&cv)
                        .map(|((p, r), v)| v[p.periods.index_of(&n[r.clone()])])
                        .sum()
                })
                .collect(),
        )
    };
    PeriodicPotential::new(periods, values)
}

/// Outcome of a separability test.
#[derive(Clone, Debug)]
pub struct Separability {
    pub separable: bool,
    /// On success, `V_1, .., V_r` with `[V_j] = 0` for `j >= 2`.
    pub parts: Vec<PeriodicPotential>,
}

/// Default threshold for the floating-point Fourier-support test.
pub const SEPARABILITY_TOL: f64 = 1e-10;

/// Tests whether `V = V_1 (+) .. (+) V_r` for the given coordinate partition.
///
/// The criterion is that `V^(l)` vanishes whenever `l` is nonzero in more
/// than one block. Exact potentials are tested by exact reconstruction from
/// block averages (an equivalent condition that needs no roots of unity);
/// floating potentials by the Fourier support with `tol`.
pub fn is_separable(v: &PeriodicPotential, partition: &[usize], tol: f64) -> Result<Separability> {
    let d = v.periods.dim();
    check_partition(d, partition)?;
    let parts = witness_parts(v, partition)?;
    let separable = match &v.values {
        Values::Exact(vals) => {
            let rebuilt = direct_sum(&parts, partition)?;
            rebuilt.exact_values().unwrap() == vals.as_slice()
        }
        Values::Float(_) => fourier_support_in_blocks(&dft(v), partition, tol),
    };
    Ok(Separability {
        separable,
        parts: if separable { parts } else { Vec::new() },
    })
}

/// True if every `l` with nonzero entries in two or more blocks has `|V^(l)| <= tol`.
pub fn fourier_support_in_blocks(t: &FourierTable, partition: &[usize], tol: f64) -> bool {
    let ranges = blocks(partition);
    let coeffs = t.complex_coeffs();
    t.periods.domain().iter().zip(&coeffs).all(|(l, c)| {
        let active = ranges
            .iter()
            .filter(|r| l[(*r).clone()].iter().any(|&x| x != 0))
            .count();
        active <= 1 || c.norm() <= tol
    })
}

/// Block averages: `A_j(m) = mean of V over the coordinates outside block j`.
fn witness_parts(v: &PeriodicPotential, partition: &[usize]) -> Result<Vec<PeriodicPotential>> {
    let ranges = blocks(partition);
    let q = v.periods.periods();
    let w = v.periods.domain();
    let mean = average(v);
    let mut parts = Vec::with_capacity(ranges.len());
    for (bj, r) in ranges.iter().enumerate() {
        let sub = if v.periods.is_tainted() {
            PeriodSpec::new_unchecked_coprime(&q[r.clone()])?
        } else {
            PeriodSpec::new(&q[r.clone()])?
        };
        let qs = sub.volume();
        let count = (v.periods.volume() / qs) as i64;
        let part = match &v.values {
            Values::Exact(vals) => {
                let mut acc = vec![GaussRat::zero(); qs];
                for (n, x) in w.iter().zip(vals) {
                    acc[sub.index_of(&n[r.clone()])] += x;
                }
                let inv = BigRational::new(1.into(), count.into());
                let shift = if bj == 0 {
                    GaussRat::zero()
                } else {
                    mean.as_exact().unwrap().clone()
                };
                Values::Exact(acc.iter().map(|a| &a.scale(&inv) - &shift).collect())
            }
            Values::Float(vals) => {
                let mut acc = vec![Complex64::zero(); qs];
                for (n, x) in w.iter().zip(vals) {
                    acc[sub.index_of(&n[r.clone()])] += x;
                }
                let shift = if bj == 0 {
                    Complex64::zero()
                } else {
                    mean.to_complex()
                };
                Values::Float(acc.iter().map(|a| a / count as f64 - shift).collect())
            }
        };
        parts.push(PeriodicPotential::new(sub, part)?);
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(q: &[usize]) -> PeriodSpec {
        PeriodSpec::new(q).unwrap()
    }

    #[test]
    fn fundamental_domain_examples() {
        let p = fundamental_domain(&[2, 3]).unwrap();
        assert_eq!(p.volume(), 6);
        assert_eq!(
            p.domain(),
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
        let p = fundamental_domain(&[1, 1]).unwrap();
        assert_eq!(p.domain(), vec![vec![0, 0]]);
        let err = fundamental_domain(&[2, 4]).unwrap_err();
        assert!(err.to_string().contains("relatively prime"));
        let p = PeriodSpec::new_unchecked_coprime(&[2, 4]).unwrap();
        assert!(p.is_tainted());
        assert!(fundamental_domain(&[0, 3]).is_err());
        // coprime as a set but not pairwise
        assert!(fundamental_domain(&[6, 10, 15]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let p = ps(&[2, 3, 5]);
        for (i, n) in p.domain().iter().enumerate() {
            assert_eq!(p.index_of(n), i);
        }
        assert_eq!(p.reduce(&[-1, 4, 10]), vec![1, 1, 0]);
    }

    #[test]
    fn dft_examples() {
        let v = PeriodicPotential::from_ints(ps(&[2]), &[1, 3]).unwrap();
        let t = dft(&v);
        assert!(!t.is_degraded());
        assert_eq!(t.at_exact(&[0]), Some(GaussRat::from_int(2)));
        assert_eq!(t.at_exact(&[1]), Some(GaussRat::from_int(-1)));
        assert_eq!(t.at_exact(&[3]), Some(GaussRat::from_int(-1)));

        let c = PeriodicPotential::constant(&ps(&[4]), GaussRat::ratio(7, 3));
        let t = dft(&c);
        assert_eq!(t.at_exact(&[0]), Some(GaussRat::ratio(7, 3)));
        for l in 1..4 {
            assert_eq!(t.at_exact(&[l]), Some(GaussRat::zero()));
        }

        let mut vals = vec![0; 6];
        vals[0] = 1;
        let delta = PeriodicPotential::from_ints(ps(&[2, 3]), &vals).unwrap();
        let t = dft(&delta);
        assert!(t.is_degraded());
        for c in t.complex_coeffs() {
            assert!((c - Complex64::new(1.0 / 6.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn exact_dft_roundtrip_q4() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ps(&[4, 1]);
        for _ in 0..20 {
            let v = PeriodicPotential::random_rational(&p, 9, 4, &mut rng);
            let back = idft(&dft(&v));
            assert_eq!(back, v);
        }
    }

    #[test]
    fn average_examples() {
        let v = PeriodicPotential::from_ints(ps(&[2, 3]), &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(average(&v), Scalar::Exact(GaussRat::ratio(7, 2)));
        assert_eq!(
            average(&PeriodicPotential::zero(&ps(&[2, 3]))),
            Scalar::Exact(GaussRat::zero())
        );
        let rt = idft(&dft(&v));
        assert!((average(&rt).to_complex() - Complex64::new(3.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn direct_sum_examples() {
        let v1 = PeriodicPotential::from_ints(ps(&[2]), &[0, 1]).unwrap();
        let v2 = PeriodicPotential::from_ints(ps(&[3]), &[0, 0, 5]).unwrap();
        let v = direct_sum(&[v1.clone(), v2], &[1, 1]).unwrap();
        assert_eq!(v.at(&[1, 2]), Scalar::Exact(GaussRat::from_int(6)));
        assert!(direct_sum(std::slice::from_ref(&v1), &[2]).is_err());

        let z1 = PeriodicPotential::zero(&ps(&[2]));
        let z3 = PeriodicPotential::zero(&ps(&[3]));
        let z = direct_sum(&[z1.clone(), z3.clone()], &[1, 1]).unwrap();
        assert_eq!(z, PeriodicPotential::zero(&ps(&[2, 3])));

        // completely separable d = 3
        let v3 = PeriodicPotential::from_ints(ps(&[5]), &[1, -1, 2, 0, 3]).unwrap();
        let v = direct_sum(&[v1, PeriodicPotential::from_ints(ps(&[3]), &[2, 0, 1]).unwrap(), v3], &[1, 1, 1]).unwrap();
        assert_eq!(v.periods().periods(), &[2, 3, 5]);
        assert!(is_separable(&v, &[1, 1, 1], SEPARABILITY_TOL).unwrap().separable);
    }

    #[test]
    fn separability_examples() {
        let v1 = PeriodicPotential::from_ints(ps(&[2]), &[3, 1]).unwrap();
        let v2 = PeriodicPotential::from_ints(ps(&[3]), &[0, 4, 5]).unwrap();
        let v = direct_sum(&[v1.clone(), v2.clone()], &[1, 1]).unwrap();
        let s = is_separable(&v, &[1, 1], SEPARABILITY_TOL).unwrap();
        assert!(s.separable);
        // parts differ from inputs by constants summing to zero
        let d1 = &s.parts[0].exact_values().unwrap()[0] - &v1.exact_values().unwrap()[0];
        let d2 = &s.parts[1].exact_values().unwrap()[0] - &v2.exact_values().unwrap()[0];
        assert!((&d1 + &d2).is_zero());
        assert_eq!(average(&s.parts[1]), Scalar::Exact(GaussRat::zero()));

        // (-1)^{n1} cos(2 pi n2 / 3): values 1, -1/2, -1/2 on n1 = 0, negated on n1 = 1
        let h = GaussRat::ratio(-1, 2);
        let prod = PeriodicPotential::exact(
            ps(&[2, 3]),
            vec![GaussRat::one(), h.clone(), h.clone(), -GaussRat::one(), -&h, -&h],
        )
        .unwrap();
        assert!(!is_separable(&prod, &[1, 1], SEPARABILITY_TOL).unwrap().separable);
        // Fourier oracle: the mixed index (1,1) carries weight
        let t = dft(&prod);
        assert!(t.at(&[1, 1]).norm() > 0.1);
        assert!(!fourier_support_in_blocks(&t, &[1, 1], 1e-10));
        let pf = PeriodicPotential::float(ps(&[2, 3]), prod.complex_values()).unwrap();
        assert!(!is_separable(&pf, &[1, 1], 1e-10).unwrap().separable);

        let c = PeriodicPotential::constant(&ps(&[2, 3, 5]), GaussRat::from_int(4));
        for part in [&[1usize, 1, 1][..], &[2, 1], &[1, 2], &[3]] {
            assert!(is_separable(&c, part, SEPARABILITY_TOL).unwrap().separable);
        }
        assert!(is_separable(&c, &[1, 1], SEPARABILITY_TOL).is_err());
    }

    #[test]
    fn translate_and_reflect() {
        let v = PeriodicPotential::from_ints(ps(&[3]), &[1, 2, 3]).unwrap();
        assert_eq!(v.translate(&[1]).exact_values().unwrap()[0], GaussRat::from_int(2));
        assert_eq!(v.reflect().exact_values().unwrap()[1], GaussRat::from_int(3));
    }
}
