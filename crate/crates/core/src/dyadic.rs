//! Exact dyadic rationals `n / 2^e`.
//!
//! Every coordinate, midpoint, length and patch radius of the index domain is
//! a dyadic rational, so all geometric predicates in this crate are exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A rational number `numerator / 2^exponent`, kept in normal form:
/// the numerator is odd, or it is zero and the exponent is zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// Builds `numerator / 2^exponent` and normalizes it.
    pub fn new(numerator: i128, exponent: u32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let tz = numerator.trailing_zeros().min(exponent);
        Dyadic {
            num: numerator >> tz,
            exp: exponent - tz,
        }
    }

    pub fn from_int(value: i64) -> Self {
        Self::new(value as i128, 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: 1, exp: k }
    }

    pub fn numerator(self) -> i128 {
        self.num
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_integer(self) -> bool {
        self.exp == 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn half(self) -> Self {
        if self.num == 0 {
            self
        } else {
            Dyadic {
                num: self.num,
                exp: self.exp + 1,
            }
        }
    }

    /// Multiplies by `2^-k`.
    pub fn scale_pow2_neg(self, k: u32) -> Self {
        if self.num == 0 {
            self
        } else {
            Dyadic {
                num: self.num,
                exp: self.exp + k,
            }
        }
    }

    /// Multiplies by an integer.
    pub fn mul_int(self, factor: i64) -> Self {
        let num = self
            .num
            .checked_mul(factor as i128)
            .expect("dyadic numerator overflow");
        Self::new(num, self.exp)
    }

    pub fn to_f64(self) -> f64 {
        // exponents stay far below the f64 range, so this is exact up to 53 significant bits
        self.num as f64 * (-(self.exp as f64)).exp2()
    }

    /// Numerator of `self` rescaled to denominator `2^exp`, `exp >= self.exp`.
    fn scaled_to(self, exp: u32) -> i128 {
        debug_assert!(exp >= self.exp);
        let shift = exp - self.exp;
        if self.num == 0 {
            return 0;
        }
        assert!(shift < 127, "dyadic exponent gap too large");
        let factor = 1i128 << shift;
        self.num
            .checked_mul(factor)
            .expect("dyadic numerator overflow")
    }

    fn common(self, other: Self) -> (i128, i128, u32) {
        let exp = self.exp.max(other.exp);
        (self.scaled_to(exp), other.scaled_to(exp), exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, exp) = self.common(rhs);
        Dyadic::new(a.checked_add(b).expect("dyadic numerator overflow"), exp)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let (a, b, exp) = self.common(rhs);
        Dyadic::new(a.checked_sub(b).expect("dyadic numerator overflow"), exp)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let (a, b, _) = self.common(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

/// Exact fraction notation: `n` for integers, `n/2^e` otherwise.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i128, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    #[test]
    fn normal_form() {
        assert_eq!(d(4, 3), d(1, 1));
        assert_eq!(d(4, 3).numerator(), 1);
        assert_eq!(d(4, 3).exponent(), 1);
        assert_eq!(d(0, 7), Dyadic::ZERO);
        assert_eq!(d(0, 7).exponent(), 0);
        assert_eq!(d(12, 0).numerator(), 12);
        assert_eq!(d(-6, 2), d(-3, 1));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(d(1, 1) + d(1, 2), d(3, 2));
        assert_eq!(d(1, 1) - d(1, 1), Dyadic::ZERO);
        assert_eq!(d(1, 2) - d(1, 1), d(-1, 2));
        assert_eq!(d(-3, 2).abs(), d(3, 2));
        assert_eq!(Dyadic::ONE.half().half(), d(1, 2));
        assert_eq!(d(3, 0).scale_pow2_neg(3), d(3, 3));
        assert_eq!(d(3, 2).mul_int(4), d(3, 0));
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(1, 1) < d(3, 2));
        assert!(d(5, 2) > d(1, 0));
        assert!(d(-1, 3) < Dyadic::ZERO);
        assert_eq!(d(3, 2).max(d(5, 3)), d(3, 2));
        assert_eq!(d(3, 2).min(d(5, 3)), d(5, 3));
    }

    #[test]
    fn display() {
        assert_eq!(d(5, 1).to_string(), "5/2^1");
        assert_eq!(d(3, 0).to_string(), "3");
        assert_eq!(d(-1, 4).to_string(), "-1/2^4");
    }

    proptest! {
        #[test]
        fn add_sub_match_rationals(a in -1_000_000i64..1_000_000, ea in 0u32..40,
                                   b in -1_000_000i64..1_000_000, eb in 0u32..40) {
            let x = d(a as i128, ea);
            let y = d(b as i128, eb);
            // compare against a common-denominator integer computation
            let s = (a as i128) * (1i128 << (80 - ea)) + (b as i128) * (1i128 << (80 - eb));
            prop_assert_eq!(x + y, d(s, 80));
            prop_assert_eq!((x + y) - y, x);
            prop_assert_eq!(x.cmp(&y), ((a as i128) << (80 - ea)).cmp(&((b as i128) << (80 - eb))));
            let n = x + y;
            prop_assert!(n.exponent() == 0 || n.numerator() % 2 != 0);
        }
    }
}
