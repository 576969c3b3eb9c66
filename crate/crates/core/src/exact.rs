//! Exact dyadic arithmetic: values `m * 2^e` with integer mantissa.
//!
//! Lattice coordinates are kept multiplied by 3 so that third-shifted
//! endpoints stay integral.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

/// Exact value `m * 2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dy {
    pub m: BigInt,
    pub e: i32,
}

impl Dy {
    pub fn new(m: impl Into<BigInt>, e: i32) -> Dy {
        Dy { m: m.into(), e }
    }

    pub fn zero() -> Dy {
        Dy::new(0, 0)
    }

    /// Exact decoding of a finite double.
    pub fn from_f64(x: f64) -> Dy {
        assert!(x.is_finite(), "non-finite coordinate");
        if x == 0.0 {
            return Dy::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1i64 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1i64 << 52), exp - 1075) };
        Dy::new(sign * m, e)
    }

    fn aligned(&self, other: &Dy) -> (BigInt, BigInt, i32) {
        let e = self.e.min(other.e);
        let a = &self.m << ((self.e - e) as usize);
        let b = &other.m << ((other.e - e) as usize);
        (a, b, e)
    }

    pub fn add(&self, other: &Dy) -> Dy {
        let (a, b, e) = self.aligned(other);
        Dy { m: a + b, e }
    }

    pub fn sub(&self, other: &Dy) -> Dy {
        let (a, b, e) = self.aligned(other);
        Dy { m: a - b, e }
    }

    pub fn mul(&self, other: &Dy) -> Dy {
        Dy { m: &self.m * &other.m, e: self.e + other.e }
    }

    pub fn scale_int(&self, k: i64) -> Dy {
        Dy { m: &self.m * k, e: self.e }
    }

    pub fn is_negative(&self) -> bool {
        self.m < BigInt::zero()
    }

    pub fn max(self, other: Dy) -> Dy {
        if self.cmp_value(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Dy) -> Dy {
        if self.cmp_value(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn cmp_value(&self, other: &Dy) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        // Keep the top bits to avoid overflow in the mantissa conversion.
        let bits = self.m.bits() as i32;
        let drop = (bits - 60).max(0);
        let top = (&self.m >> (drop as usize)).to_f64().unwrap_or(f64::NAN);
        let e = self.e + drop;
        if e < -1022 {
            // Two steps so that a large mantissa can still land in the subnormal range.
            top * pow2(-1022) * pow2(e + 1022)
        } else {
            top * pow2(e)
        }
    }
}

/// `2^k` as a double, exact for the representable range.
/// Nearest `f64` of an exact rational.
pub fn rational_to_f64(r: &num_rational::BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

pub fn pow2(k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else if k > 1023 {
        f64::INFINITY
    } else if k >= -1074 {
        f64::from_bits(1u64 << (k + 1074))
    } else {
        0.0
    }
}

/// `floor(a / 2)` for signed integers.
pub fn floor_half(a: i64) -> i64 {
    a.div_euclid(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_round_trips() {
        for &x in &[0.0, 1.0, -0.75, 1e-300, 3.0e200, 0.1, -123.456, f64::MIN_POSITIVE / 8.0] {
            assert_eq!(Dy::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn compare_across_exponents() {
        let a = Dy::new(3, -2);
        let b = Dy::new(6, -3);
        assert_eq!(a.cmp_value(&b), Ordering::Equal);
        assert_eq!(Dy::new(1, 100).cmp_value(&Dy::new(1, -100)), Ordering::Greater);
        assert_eq!(a.sub(&b).m, BigInt::zero());
    }

    #[test]
    fn pow2_matches_halving() {
        let mut x = 1.0f64;
        for k in 0..1100 {
            assert_eq!(pow2(-k), x);
            x /= 2.0;
        }
        assert_eq!(pow2(1023), 2f64.powi(1023));
        assert_eq!(pow2(1024), f64::INFINITY);
    }
}
