use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, WavekitError};

/// Exact rational scalar. `BigRational` keeps itself in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Wire format: always `p/q`, including `q = 1`.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || WavekitError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => {
            if let Some((whole, frac)) = s.split_once('.') {
                // finite decimals are exact rationals
                let neg = whole.trim_start().starts_with('-');
                let whole_abs = whole.trim_start_matches(['-', '+']);
                let whole_int = if whole_abs.is_empty() {
                    BigInt::zero()
                } else {
                    BigInt::from_str(whole_abs).map_err(|_| bad())?
                };
                if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                let scale = num_traits::pow(BigInt::from(10), frac.len());
                let frac_int = BigInt::from_str(frac).map_err(|_| bad())?;
                let mag = Rat::new(whole_int * &scale + frac_int, scale);
                return Ok(if neg { -mag } else { mag });
            }
            Ok(Rat::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
        }
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Nearest integer, exact halves rounded toward zero.
pub fn round_half_toward_zero(x: &Rat) -> BigInt {
    let two = BigInt::from(2);
    let doubled = x * Rat::from_integer(two.clone());
    if doubled.is_integer() && doubled.numer().is_odd() {
        return x.trunc().to_integer();
    }
    (x + rat(1, 2)).floor().to_integer()
}

/// Exact vector of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVec(pub Vec<Rat>);

impl RatVec {
    pub fn zeros(n: usize) -> Self {
        RatVec(vec![Rat::zero(); n])
    }

    pub fn ones(n: usize) -> Self {
        RatVec(vec![Rat::one(); n])
    }

    pub fn filled(n: usize, value: &Rat) -> Self {
        RatVec(vec![value.clone(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Rat::one();
        v
    }

    pub fn from_ints(values: &[i64]) -> Self {
        RatVec(values.iter().map(|&v| int(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rat) -> RatVec {
        RatVec(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> RatVec {
        RatVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn dot(&self, other: &RatVec) -> Rat {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn sum(&self) -> Rat {
        self.0.iter().fold(Rat::zero(), |acc, a| acc + a)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|a| a.is_integer())
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> Rat {
        self.dot(self)
    }

    pub fn max_abs(&self) -> Rat {
        self.0
            .iter()
            .map(|a| a.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|a| if a.is_integer() { a.to_integer().to_i64() } else { None })
            .collect()
    }
}

impl std::ops::Index<usize> for RatVec {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RatVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(format_rat))
    }
}

impl<'de> Deserialize<'de> for RatVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(RatVec)
    }
}

/// `#[serde(with = "rat_serde")]` for bare `Rat` fields.
pub mod rat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format_is_p_over_q() {
        assert_eq!(format_rat(&rat(6, -4)), "-3/2");
        assert_eq!(format_rat(&int(5)), "5/1");
        assert_eq!(parse_rat("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("7").unwrap(), int(7));
        assert_eq!(parse_rat("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rat("1.5").unwrap(), rat(3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn halves_round_toward_zero() {
        assert_eq!(round_half_toward_zero(&rat(3, 2)), BigInt::from(1));
        assert_eq!(round_half_toward_zero(&rat(-3, 2)), BigInt::from(-1));
        assert_eq!(round_half_toward_zero(&rat(5, 3)), BigInt::from(2));
        assert_eq!(round_half_toward_zero(&rat(-5, 3)), BigInt::from(-2));
        assert_eq!(round_half_toward_zero(&rat(1, 2)), BigInt::from(0));
        assert_eq!(round_half_toward_zero(&int(-4)), BigInt::from(-4));
    }
}
