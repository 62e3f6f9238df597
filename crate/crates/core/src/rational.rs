//! Exact rational quantities: monetary amounts and item shares.
//!
//! Both are thin newtypes over [`BigRational`]. The textual form is canonical:
//! integers render as `-12`, everything else as `num/den` in lowest terms.
//! Parsing also accepts plain decimals such as `0.125` or `-3.5`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational `{input}`: {reason}")]
pub struct RationalParseError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `n`, `n/d` or a decimal literal into an exact rational.
pub fn parse_rational(input: &str) -> Result<BigRational, RationalParseError> {
    let err = |reason| RationalParseError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num).ok_or_else(|| err("bad numerator"))?;
        let den = parse_int(den).ok_or_else(|| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let (negative, int) = match int.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int.strip_prefix('+').unwrap_or(int)),
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad fraction digits"));
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
            return Err(err("bad integer digits"));
        }
        let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac)
            .parse()
            .map_err(|_| err("bad digits"))?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = BigRational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    parse_int(s)
        .map(BigRational::from_integer)
        .ok_or_else(|| err("not a number"))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let body = s
        .strip_prefix('-')
        .or_else(|| s.strip_prefix('+'))
        .unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn write_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// An exact amount of money in the protocol's currency unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(pub BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn from_integer(value: i64) -> Self {
        Money(BigRational::from_integer(value.into()))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Money(BigRational::new(numer.into(), denom.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// `share × self`.
    pub fn scale(&self, share: &Share) -> Money {
        Money(&self.0 * &share.0)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(&self.0, f)
    }
}

impl FromStr for Money {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Money)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Money> for Money {
    type Output = Money;
    fn add(self, rhs: &'a Money) -> Money {
        Money(self.0 + &rhs.0)
    }
}

impl<'a> Add<&'a Money> for &'a Money {
    type Output = Money;
    fn add(self, rhs: &'a Money) -> Money {
        Money(&self.0 + &rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl<'a> Sub<&'a Money> for Money {
    type Output = Money;
    fn sub(self, rhs: &'a Money) -> Money {
        Money(self.0 - &rhs.0)
    }
}

impl<'a> Sub<&'a Money> for &'a Money {
    type Output = Money;
    fn sub(self, rhs: &'a Money) -> Money {
        Money(&self.0 - &rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Money> for Money {
    fn sub_assign(&mut self, rhs: &Money) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

/// A portion of an item, nominally in `[0, 1]`.
///
/// Sums of shares along a path may transiently exceed one while a protocol is
/// being validated, so the type itself does not enforce the bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Share(pub BigRational);

impl Share {
    pub fn zero() -> Self {
        Share(BigRational::zero())
    }

    pub fn one() -> Self {
        Share(BigRational::one())
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Share(BigRational::new(numer.into(), denom.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn in_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(&self.0, f)
    }
}

impl FromStr for Share {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Share)
    }
}

impl Add for Share {
    type Output = Share;
    fn add(self, rhs: Share) -> Share {
        Share(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Share> for Share {
    type Output = Share;
    fn add(self, rhs: &'a Share) -> Share {
        Share(self.0 + &rhs.0)
    }
}

impl Sub for Share {
    type Output = Share;
    fn sub(self, rhs: Share) -> Share {
        Share(self.0 - rhs.0)
    }
}

impl<'a> Mul<&'a Share> for &'a Share {
    type Output = Share;
    fn mul(self, rhs: &'a Share) -> Share {
        Share(&self.0 * &rhs.0)
    }
}

impl<'a> Sum<&'a Share> for Share {
    fn sum<I: Iterator<Item = &'a Share>>(iter: I) -> Share {
        iter.fold(Share::zero(), |acc, s| acc + s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!("-12".parse::<Money>().unwrap(), Money::from_integer(-12));
        assert_eq!("6/8".parse::<Share>().unwrap(), Share::new(3, 4));
        assert_eq!("0.125".parse::<Share>().unwrap(), Share::new(1, 8));
        assert_eq!("-3.5".parse::<Money>().unwrap(), Money::new(-7, 2));
        assert_eq!(".5".parse::<Share>().unwrap(), Share::new(1, 2));
        assert_eq!("+4".parse::<Money>().unwrap(), Money::from_integer(4));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "abc", "1.", "1/2/3", "1e5", "--1", "0x10"] {
            assert!(bad.parse::<Money>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Money::new(10, 4).to_string(), "5/2");
        assert_eq!(Money::new(-1050000, 1).to_string(), "-1050000");
        assert_eq!(Share::new(0, 7).to_string(), "0");
    }

    #[test]
    fn scale_multiplies_exactly() {
        assert_eq!(
            Money::from_integer(80).scale(&Share::new(1, 2)),
            Money::from_integer(40)
        );
    }
}
