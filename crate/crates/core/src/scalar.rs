//! Exact scalars: Gaussian rationals `a + b i` and elements of cyclotomic
//! fields `Q(zeta_n)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        GaussRat::new(BigRational::from_integer(v.into()), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat::new(re, BigRational::zero())
    }

    /// `p/q` as a real Gaussian rational. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        GaussRat::real(BigRational::new(p.into(), q.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        GaussRat::new(&self.re * r, &self.im * r)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussRat::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => GaussRat::from_int(1),
            1 => GaussRat::i(),
            2 => GaussRat::from_int(-1),
            _ => -GaussRat::i(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Leading-sign convention: positive real part, or positive imaginary part
    /// when the real part vanishes.
    pub fn is_positive_normalized(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_positive()
        } else {
            self.im.is_positive()
        }
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to a scaled quotient.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", fmt_rational(&self.re), fmt_rational(&self.im))
    }
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Accepts `(re,im)` or a bare rational `p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (re, im) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected `(re,im)`, got `{s}`")))?;
            Ok(GaussRat::new(parse_rational(re)?, parse_rational(im)?))
        } else {
            Ok(GaussRat::real(parse_rational(t)?))
        }
    }
}

impl From<i64> for GaussRat {
    fn from(v: i64) -> Self {
        GaussRat::from_int(v)
    }
}

impl From<BigRational> for GaussRat {
    fn from(v: BigRational) -> Self {
        GaussRat::real(v)
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn div(self, o: &GaussRat) -> GaussRat {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        &self + &o
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        &self - &o
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        &self * &o
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, o: GaussRat) -> GaussRat {
        &self / &o
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

/// Monic integer cyclotomic polynomial `Phi_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<BigInt> {
    assert!(n >= 1);
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut num = vec![BigInt::zero(); n + 1];
    num[0] = BigInt::from(-1);
    num[n] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = div_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quo = vec![BigInt::zero(); qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (i, di) in den.iter().enumerate() {
            rem[k + i] -= &c * di;
        }
        quo[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quo
}

/// Arithmetic context for `Q(zeta_n)`: holds `Phi_n`.
#[derive(Debug)]
pub struct CycloField {
    n: usize,
    modulus: Vec<BigInt>,
}

impl CycloField {
    pub fn new(n: usize) -> Arc<Self> {
        Arc::new(CycloField {
            n,
            modulus: cyclotomic_polynomial(n),
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Degree `phi(n)` of the field over Q.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }
}

/// Element of `Q(zeta_n)` in the power basis `1, zeta, ..., zeta^{phi(n)-1}`.
#[derive(Clone, Debug)]
pub struct Cyclo {
    field: Arc<CycloField>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for Cyclo {
    fn eq(&self, o: &Self) -> bool {
        self.field.n == o.field.n && self.coeffs == o.coeffs
    }
}

impl Cyclo {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Cyclo {
            field: field.clone(),
            coeffs: vec![BigRational::zero(); field.degree()],
        }
    }

    pub fn from_rational(field: &Arc<CycloField>, r: BigRational) -> Self {
        let mut c = Cyclo::zero(field);
        c.coeffs[0] = r;
        c
    }

    /// `zeta_n^k` for any integer `k`.
    pub fn zeta_pow(field: &Arc<CycloField>, k: i64) -> Self {
        let n = field.n as i64;
        let e = k.rem_euclid(n) as usize;
        let mut raw = vec![BigRational::zero(); e + 1];
        raw[e] = BigRational::one();
        Cyclo {
            field: field.clone(),
            coeffs: reduce(&field.modulus, raw),
        }
    }

    /// Embeds a Gaussian rational; requires `4 | n` when the imaginary part is nonzero.
    pub fn from_gauss(field: &Arc<CycloField>, g: &GaussRat) -> Result<Self> {
        let mut out = Cyclo::from_rational(field, g.re.clone());
        if !g.im.is_zero() {
            if !field.n.is_multiple_of(4) {
                return Err(Error::Domain(format!(
                    "i is not in Q(zeta_{}); need 4 | n",
                    field.n
                )));
            }
            let i = Cyclo::zeta_pow(field, (field.n / 4) as i64);
            out = out.add(&i.scale(&g.im));
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Cyclo {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        Cyclo {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Cyclo {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let deg = self.coeffs.len();
        let mut raw = vec![BigRational::zero(); 2 * deg.max(1) - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Cyclo {
            field: self.field.clone(),
            coeffs: reduce(&self.field.modulus, raw),
        }
    }

    /// Rational value, if the element lies in Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Gaussian-rational value, if the element lies in `Q(i)`.
    pub fn to_gauss(&self) -> Option<GaussRat> {
        if let Some(r) = self.to_rational() {
            return Some(GaussRat::real(r));
        }
        if !self.field.n.is_multiple_of(4) {
            return None;
        }
        let i = Cyclo::zeta_pow(&self.field, (self.field.n / 4) as i64);
        let pivot = 1 + i.coeffs[1..].iter().position(|c| !c.is_zero())?;
        let b = &self.coeffs[pivot] / &i.coeffs[pivot];
        let rest = self.add(&i.scale(&b).neg());
        let a = rest.to_rational()?;
        Some(GaussRat::new(a, b))
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.field.n as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n)
                    * rat_to_f64(c)
            })
            .sum()
    }
}

fn reduce(modulus: &[BigInt], mut raw: Vec<BigRational>) -> Vec<BigRational> {
    let deg = modulus.len() - 1;
    if raw.len() > deg {
        for k in (deg..raw.len()).rev() {
            let c = std::mem::replace(&mut raw[k], BigRational::zero());
            if c.is_zero() {
                continue;
            }
            // x^k = x^{k-deg} * (x^deg) and x^deg = -sum_{i<deg} m_i x^i.
            for (i, mi) in modulus[..deg].iter().enumerate() {
                if !mi.is_zero() {
                    raw[k - deg + i] -= &c * BigRational::from_integer(mi.clone());
                }
            }
        }
    }
    raw.resize(deg, BigRational::zero());
    raw
}
