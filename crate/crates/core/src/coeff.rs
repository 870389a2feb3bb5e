//! Exact coefficients `a + b·√3` with rational `a`, `b`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::exact::{rational_to_f64, BigRational};

/// An element of `ℚ(√3)`, carrying its correctly rounded double.
#[derive(Clone)]
pub struct ExactCoefficient {
    a: BigRational,
    b: BigRational,
    float: f64,
}

impl ExactCoefficient {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        let float = nearest_double(&a, &b);
        Self { a, b, float }
    }

    pub fn rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero())
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `p/q + (r/s)·√3`.
    pub fn from_ratios(p: i64, q: i64, r: i64, s: i64) -> Self {
        Self::new(
            BigRational::new(p.into(), q.into()),
            BigRational::new(r.into(), s.into()),
        )
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// Rational part.
    pub fn a(&self) -> &BigRational {
        &self.a
    }

    /// Coefficient of `√3`.
    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Nearest double to the exact value.
    pub fn to_f64(&self) -> f64 {
        self.float
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of `a + b√3`.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b)
    }

    /// Exact square, used for squared Euclidean norms.
    pub fn square(&self) -> Self {
        self * self
    }
}

fn sign_of(a: &BigRational, b: &BigRational) -> Ordering {
    let sa = a.cmp(&BigRational::zero());
    let sb = b.cmp(&BigRational::zero());
    match (sa, sb) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (x, y) if x == y => x,
        _ => {
            let three = BigRational::from_integer(3.into());
            // a and b have opposite signs; whichever of a², 3b² is larger wins.
            match (a * a).cmp(&(b * b * three)) {
                Ordering::Greater => sa,
                Ordering::Less => sb,
                Ordering::Equal => unreachable!("√3 is irrational"),
            }
        }
    }
}

fn nearest_double(a: &BigRational, b: &BigRational) -> f64 {
    if b.is_zero() {
        return rational_to_f64(a);
    }
    let lift = |x: f64| crate::exact::double_to_rational(x).expect("finite double");
    let half = BigRational::new(1.into(), 2.into());
    // Sign of value - (lo + hi)/2, decided exactly.
    let vs_midpoint = |lo: f64, hi: f64| sign_of(&(a - (lift(lo) + lift(hi)) * &half), b);
    let mut c = rational_to_f64(a) + rational_to_f64(b) * 3f64.sqrt();
    loop {
        let up = c.next_up();
        if vs_midpoint(c, up) == Ordering::Greater {
            c = up;
            continue;
        }
        let down = c.next_down();
        if vs_midpoint(down, c) == Ordering::Less {
            c = down;
            continue;
        }
        return c;
    }
}

impl PartialEq for ExactCoefficient {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Eq for ExactCoefficient {}

impl PartialOrd for ExactCoefficient {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactCoefficient {
    fn cmp(&self, other: &Self) -> Ordering {
        sign_of(&(&self.a - &other.a), &(&self.b - &other.b))
    }
}

impl Add for &ExactCoefficient {
    type Output = ExactCoefficient;
    fn add(self, rhs: Self) -> ExactCoefficient {
        ExactCoefficient::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &ExactCoefficient {
    type Output = ExactCoefficient;
    fn sub(self, rhs: Self) -> ExactCoefficient {
        ExactCoefficient::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Mul for &ExactCoefficient {
    type Output = ExactCoefficient;
    fn mul(self, rhs: Self) -> ExactCoefficient {
        // (a + b√3)(c + d√3) = (ac + 3bd) + (ad + bc)√3
        let three = BigRational::from_integer(3.into());
        ExactCoefficient::new(
            &self.a * &rhs.a + three * &self.b * &rhs.b,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

impl Neg for &ExactCoefficient {
    type Output = ExactCoefficient;
    fn neg(self) -> ExactCoefficient {
        ExactCoefficient {
            a: -self.a.clone(),
            b: -self.b.clone(),
            float: -self.float,
        }
    }
}

impl fmt::Debug for ExactCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}√3", self.b),
            (false, false) => write!(f, "{} + {}√3", self.a, self.b),
        }
    }
}

/// Exact value of a JSON number token such as `-1`, `0.25` or `1e-3`.
pub(crate) fn parse_decimal(token: &str) -> Option<BigRational> {
    let token = token.trim();
    let (mantissa, exponent) = match token.find(['e', 'E']) {
        Some(pos) => (&token[..pos], token[pos + 1..].parse::<i64>().ok()?),
        None => (token, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if !frac_part.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = all_digits.parse().ok()?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        BigRational::from_integer(num * pow)
    } else {
        BigRational::new(num, pow)
    })
}

fn raw_number(n: &BigInt) -> Box<RawValue> {
    RawValue::from_string(n.to_string()).expect("integers are valid JSON")
}

fn rational_pair(q: &BigRational) -> [Box<RawValue>; 2] {
    [raw_number(q.numer()), raw_number(q.denom())]
}

impl Serialize for ExactCoefficient {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.b.is_zero() && self.a.is_integer() {
            return raw_number(self.a.numer()).serialize(serializer);
        }
        #[derive(Serialize)]
        struct Pairs {
            a: [Box<RawValue>; 2],
            b: [Box<RawValue>; 2],
        }
        Pairs {
            a: rational_pair(&self.a),
            b: rational_pair(&self.b),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactCoefficient {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Box::<RawValue>::deserialize(deserializer)?;
        let text = raw.get().trim();
        if text.starts_with('{') {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Pairs {
                a: Option<[Box<RawValue>; 2]>,
                b: Option<[Box<RawValue>; 2]>,
            }
            let pairs: Pairs = serde_json::from_str(text).map_err(D::Error::custom)?;
            let ratio = |pair: Option<[Box<RawValue>; 2]>| -> Result<BigRational, D::Error> {
                let Some([p, q]) = pair else {
                    return Ok(BigRational::zero());
                };
                let p: BigInt = p.get().trim().parse().map_err(D::Error::custom)?;
                let q: BigInt = q.get().trim().parse().map_err(D::Error::custom)?;
                if q.is_zero() {
                    return Err(D::Error::custom("zero denominator"));
                }
                Ok(BigRational::new(p, q))
            };
            return Ok(ExactCoefficient::new(ratio(pairs.a)?, ratio(pairs.b)?));
        }
        parse_decimal(text)
            .map(ExactCoefficient::rational)
            .ok_or_else(|| D::Error::custom(format!("`{text}` is not a coefficient")))
    }
}

impl Zero for ExactCoefficient {
    fn zero() -> Self {
        ExactCoefficient::zero()
    }
    fn is_zero(&self) -> bool {
        ExactCoefficient::is_zero(self)
    }
}

impl Add for ExactCoefficient {
    type Output = ExactCoefficient;
    fn add(self, rhs: Self) -> ExactCoefficient {
        &self + &rhs
    }
}

impl Mul for ExactCoefficient {
    type Output = ExactCoefficient;
    fn mul(self, rhs: Self) -> ExactCoefficient {
        &self * &rhs
    }
}

impl One for ExactCoefficient {
    fn one() -> Self {
        ExactCoefficient::one()
    }
}

impl ExactCoefficient {
    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }
}
