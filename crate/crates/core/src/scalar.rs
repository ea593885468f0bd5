//! Coefficient fields for operator polynomials: double-precision complex
//! numbers, and an exact field (complex numbers over Q(√2)) for checks that
//! must hold with no tolerance at all.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// `a + b√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt2 {
    pub fn rational(a: BigRational) -> Self {
        QSqrt2 { a, b: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sqrt2() -> Self {
        QSqrt2 {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    /// 1/√2 = √2/2.
    pub fn inv_sqrt2() -> Self {
        QSqrt2 {
            a: BigRational::zero(),
            b: BigRational::new(BigInt::from(1), BigInt::from(2)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }

    /// Exact sign of `a + b√2`.
    pub fn signum(&self) -> i32 {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        // opposite signs: compare a² with 2b²
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(2));
        if a2 > b2 {
            sa
        } else if a2 < b2 {
            sb
        } else {
            0
        }
    }
}

fn sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2 {
            a: self.a - o.a,
            b: self.b - o.b,
        }
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(BigInt::from(2));
        QSqrt2 {
            a: &self.a * &o.a + two * (&self.b * &o.b),
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 {
            a: -self.a,
            b: -self.b,
        }
    }
}

/// Complex number with real and imaginary parts in Q(√2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: QSqrt2,
    pub im: QSqrt2,
}

impl ExactComplex {
    pub fn new(re: QSqrt2, im: QSqrt2) -> Self {
        ExactComplex { re, im }
    }

    pub fn real(re: QSqrt2) -> Self {
        ExactComplex {
            re,
            im: QSqrt2::from_ratio(0, 1),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(QSqrt2::from_ratio(num, den))
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        ExactComplex {
            re: QSqrt2::from_ratio(re, 1),
            im: QSqrt2::from_ratio(im, 1),
        }
    }

    pub fn inv_sqrt2() -> Self {
        Self::real(QSqrt2::inv_sqrt2())
    }
}

impl Add for ExactComplex {
    type Output = ExactComplex;
    fn add(self, o: Self) -> Self {
        ExactComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for ExactComplex {
    type Output = ExactComplex;
    fn sub(self, o: Self) -> Self {
        ExactComplex {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for ExactComplex {
    type Output = ExactComplex;
    fn mul(self, o: Self) -> Self {
        let rr = self.re.clone() * o.re.clone();
        let ii = self.im.clone() * o.im.clone();
        let ri = self.re * o.im;
        let ir = self.im * o.re;
        ExactComplex {
            re: rr - ii,
            im: ri + ir,
        }
    }
}

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> Self {
        ExactComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Coeff for ExactComplex {
    fn zero() -> Self {
        ExactComplex::gaussian(0, 0)
    }
    fn one() -> Self {
        ExactComplex::gaussian(1, 0)
    }
    fn imag_unit() -> Self {
        ExactComplex::gaussian(0, 1)
    }
    fn from_i64(n: i64) -> Self {
        ExactComplex::gaussian(n, 0)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn conj(&self) -> Self {
        ExactComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
