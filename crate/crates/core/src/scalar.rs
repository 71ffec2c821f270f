//! The two numeric towers: exact Gaussian rationals and complex doubles.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Which numeric tower an evaluation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tower {
    Exact,
    Float,
}

/// A complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn int(n: i64) -> Self {
        GaussRat::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        GaussRat::real(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn complex(re: i64, im: i64) -> Self {
        GaussRat::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Display for GaussRat {
    /// Unit imaginary coefficients are written bare: `i`, `2-i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coef = |x: &BigRational| if x.is_one() { String::new() } else { x.to_string() };
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            if (-&self.im).is_one() {
                write!(f, "-i")
            } else {
                write!(f, "{}i", coef(&self.im))
            }
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, coef(&-&self.im))
        } else {
            write!(f, "{}+{}i", self.re, coef(&self.im))
        }
    }
}

/// Parses a real literal: an integer, `p/q`, or a decimal such as `-0.25`
/// or `1e-3`. Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], i32::from_str(&t[k + 1..]).ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all).ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` where `a` and `b` are accepted by
/// [`parse_rational`]; `i` alone means `1i`.
pub fn parse_gauss(text: &str) -> Option<GaussRat> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return parse_rational(&t).map(GaussRat::real);
    };
    // Split at the last sign that is not at the start and not part of an
    // exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |s: &str| -> Option<BigRational> {
        match s {
            "" | "+" => Some(BigRational::one()),
            "-" => Some(-BigRational::one()),
            _ => parse_rational(s),
        }
    };
    match split {
        Some(k) => Some(GaussRat::new(parse_rational(&body[..k])?, imag(&body[k..])?)),
        None => Some(GaussRat::new(BigRational::zero(), imag(body)?)),
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Element type of matrices. Implemented by [`GaussRat`] (exact) and
/// [`Complex64`] (floating point).
///
/// Tolerance arguments are ignored by the exact tower.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    const TOWER: Tower;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_gauss(g: &GaussRat) -> Self;
    /// `None` when the tower cannot represent `z` exactly.
    fn from_c64(z: Complex64) -> Option<Self>;
    fn to_c64(&self) -> Complex64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn re(&self) -> Self;
    fn im(&self) -> Self;
    /// `1/x`, with `1/0 = 0`.
    fn inv(&self, tol: f64) -> Self;

    fn is_zero_tol(&self, tol: f64) -> bool;
    fn is_real(&self, tol: f64) -> bool;
    /// Compares real parts, `None` unless both values are real.
    fn cmp_real(&self, o: &Self, tol: f64) -> Option<Ordering>;
    /// Complex equality.
    fn eq_tol(&self, o: &Self, tol: f64) -> bool {
        self.sub(o).is_zero_tol(tol)
    }
    /// Modulus as a double.
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
    /// A total order used to store values in sets.
    fn total_cmp(&self, o: &Self) -> Ordering;

    fn from_i64(n: i64) -> Self {
        Self::from_gauss(&GaussRat::int(n))
    }
    fn div(&self, o: &Self, tol: f64) -> Self {
        self.mul(&o.inv(tol))
    }
}

impl Scalar for GaussRat {
    const TOWER: Tower = Tower::Exact;

    fn zero() -> Self {
        GaussRat::int(0)
    }
    fn one() -> Self {
        GaussRat::int(1)
    }
    fn from_gauss(g: &GaussRat) -> Self {
        g.clone()
    }
    fn from_c64(_: Complex64) -> Option<Self> {
        None
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn add(&self, o: &Self) -> Self {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    fn neg(&self) -> Self {
        GaussRat::new(-&self.re, -&self.im)
    }
    fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -&self.im)
    }
    fn re(&self) -> Self {
        GaussRat::real(self.re.clone())
    }
    fn im(&self) -> Self {
        GaussRat::real(self.im.clone())
    }
    fn inv(&self, _tol: f64) -> Self {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Self::zero();
        }
        GaussRat::new(&self.re / &n, -&self.im / &n)
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_real(&self, _tol: f64) -> bool {
        self.im.is_zero()
    }
    fn cmp_real(&self, o: &Self, _tol: f64) -> Option<Ordering> {
        (self.im.is_zero() && o.im.is_zero()).then(|| self.re.cmp(&o.re))
    }
    fn total_cmp(&self, o: &Self) -> Ordering {
        self.re.cmp(&o.re).then_with(|| self.im.cmp(&o.im))
    }
}

impl Scalar for Complex64 {
    const TOWER: Tower = Tower::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_gauss(g: &GaussRat) -> Self {
        g.to_c64()
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }
    fn to_c64(&self) -> Complex64 {
        *self
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
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn re(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn im(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
    fn inv(&self, tol: f64) -> Self {
        if self.is_zero_tol(tol) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0) / self
        }
    }
    fn is_zero_tol(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_real(&self, tol: f64) -> bool {
        self.im.abs() <= tol
    }
    fn cmp_real(&self, o: &Self, tol: f64) -> Option<Ordering> {
        if !(self.is_real(tol) && o.is_real(tol)) {
            return None;
        }
        Some(if (self.re - o.re).abs() <= tol {
            Ordering::Equal
        } else if self.re < o.re {
            Ordering::Less
        } else {
            Ordering::Greater
        })
    }
    fn total_cmp(&self, o: &Self) -> Ordering {
        self.re.total_cmp(&o.re).then_with(|| self.im.total_cmp(&o.im))
    }
}
