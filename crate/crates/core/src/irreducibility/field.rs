//! Coefficient fields for factor counting: exact Gaussian rationals and
//! word-size prime fields `F_p` with `p = 1 mod 4`, where `i` has a square root.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::scalar::GaussRat;

pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Panics on zero.
    fn inv(&self) -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Field for GaussRat {
    fn zero() -> Self {
        GaussRat::zero()
    }
    fn one() -> Self {
        GaussRat::one()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        GaussRat::inv(self).expect("inverse of zero")
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::from_int(v)
    }
}

/// Primes just below `2^31`, all `1 mod 4`.
pub const PRIMES: [u64; 3] = [2147483629, 2147483549, 2147483497];

/// Element of `Z / P`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp<const P: u64>(pub u64);

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Fp<P> {
    pub fn new(v: u64) -> Self {
        Fp(v % P)
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut b = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = Field::mul(&acc, &b);
            }
            b = Field::mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// A square root of `-1`.
    pub fn sqrt_minus_one() -> Self {
        assert_eq!(P % 4, 1, "p must be 1 mod 4");
        (2..)
            .map(|a| Fp::<P>(a).pow((P - 1) / 4))
            .find(|r| Field::mul(r, r).0 == P - 1)
            .unwrap()
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        let r = v.mod_floor(&BigInt::from(P));
        Fp(r.to_u64().unwrap())
    }

    /// `None` when the denominator vanishes mod `P`.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let d = Self::from_bigint(r.denom());
        if d.0 == 0 {
            return None;
        }
        Some(Field::mul(&Self::from_bigint(r.numer()), &Field::inv(&d)))
    }

    /// Image of a Gaussian rational under `i -> sqrt_i`.
    pub fn from_gauss(g: &GaussRat, sqrt_i: Self) -> Option<Self> {
        let re = Self::from_rational(&g.re)?;
        let im = Self::from_rational(&g.im)?;
        Some(Field::add(&re, &Field::mul(&im, &sqrt_i)))
    }
}

impl<const P: u64> Field for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    #[inline]
    fn add(&self, o: &Self) -> Self {
        let s = self.0 + o.0;
        Fp(if s >= P { s - P } else { s })
    }
    #[inline]
    fn sub(&self, o: &Self) -> Self {
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + P - o.0 })
    }
    #[inline]
    fn mul(&self, o: &Self) -> Self {
        Fp(self.0 * o.0 % P)
    }
    fn neg(&self) -> Self {
        Fp(if self.0 == 0 { 0 } else { P - self.0 })
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "inverse of zero");
        self.pow(P - 2)
    }
    fn from_i64(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }
}
