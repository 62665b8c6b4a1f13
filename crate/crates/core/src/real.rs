//! Configurable-precision real numbers.
//!
//! `Real` is a thin wrapper over [`astro_float::BigFloat`] that carries its
//! working precision (in bits) so arithmetic can be written with ordinary
//! operators. Binary operations run at the larger of the two operand
//! precisions and round to nearest-even.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Number of mantissa bits needed to carry `digits` significant decimal digits.
pub fn bits_for_digits(digits: u32) -> usize {
    // log2(10) = 3.3219...; four guard bits on top.
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize + 4
}

#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    bits: usize,
}

impl Real {
    pub fn from_f64(x: f64, bits: usize) -> Self {
        Real {
            v: BigFloat::from_f64(x, bits),
            bits,
        }
    }

    pub fn from_i64(n: i64, bits: usize) -> Self {
        Real {
            v: BigFloat::from_i64(n, bits),
            bits,
        }
    }

    pub fn from_u64(n: u64, bits: usize) -> Self {
        Real {
            v: BigFloat::from_u64(n, bits),
            bits,
        }
    }

    pub fn zero(bits: usize) -> Self {
        Self::from_u64(0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_u64(1, bits)
    }

    /// Parses a decimal literal such as `"0.5772156649"` or `"-1.5e-3"`.
    pub fn parse_decimal(s: &str, bits: usize) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Real { v, bits })
        }
    }

    pub fn pi(bits: usize) -> Self {
        Real {
            v: with_consts(|cc| cc.pi(bits, RM)),
            bits,
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Same value, re-rounded to `bits`.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.v.clone();
        // Only fails for zero/inf/nan, which carry no mantissa to round.
        let _ = v.set_precision(bits, RM);
        Real { v, bits }
    }

    /// Constructs a value at the same precision as `self`.
    pub fn lift(&self, x: f64) -> Self {
        Self::from_f64(x, self.bits)
    }

    pub fn lift_int(&self, n: i64) -> Self {
        Self::from_i64(n, self.bits)
    }

    pub fn ln(&self) -> Self {
        Real {
            v: with_consts(|cc| self.v.ln(self.bits, RM, cc)),
            bits: self.bits,
        }
    }

    pub fn exp(&self) -> Self {
        Real {
            v: with_consts(|cc| self.v.exp(self.bits, RM, cc)),
            bits: self.bits,
        }
    }

    pub fn sqrt(&self) -> Self {
        Real {
            v: self.v.sqrt(self.bits, RM),
            bits: self.bits,
        }
    }

    pub fn powi(&self, n: usize) -> Self {
        if n == 0 {
            return Self::one(self.bits);
        }
        Real {
            v: self.v.powi(n, self.bits, RM),
            bits: self.bits,
        }
    }

    /// `self^e` for a real exponent; requires `self > 0`.
    pub fn powf(&self, e: &Real) -> Self {
        (e * &self.ln()).exp()
    }

    pub fn recip(&self) -> Self {
        Real {
            v: self.v.reciprocal(self.bits, RM),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        Real {
            v: self.v.abs(),
            bits: self.bits,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.v.is_zero() && self.v.is_positive()
    }

    /// Nearest `f64` (truncated to the leading mantissa word, then rounded).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exp, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *words.last().expect("normalized mantissa") as f64;
        let e = i64::from(exp) - 64;
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            // split the scaling so the intermediate never overflows
            let half = e / 2;
            top * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
        };
        match sign {
            Sign::Neg => -mag,
            Sign::Pos => mag,
        }
    }

    /// Decimal rendering with `digits` significant digits, `d.ddd…e±x` form.
    pub fn to_decimal(&self, digits: u32) -> String {
        if self.v.is_nan() {
            return "nan".into();
        }
        if self.v.is_inf() {
            return if self.v.is_negative() { "-inf" } else { "inf" }.into();
        }
        if self.v.is_zero() {
            return "0".into();
        }
        // Widen before formatting so the conversion does not lose the digits
        // we are about to round.
        let wide = self.with_bits(self.bits.max(bits_for_digits(digits + 8)));
        let raw =
            with_consts(|cc| wide.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "nan".into());
        round_scientific(&raw, digits.max(1) as usize)
    }

    pub fn max_bits(a: &Real, b: &Real) -> usize {
        a.bits.max(b.bits)
    }
}

/// Rounds a `[-]d.ddd[e±x]` string to `n` significant digits (half-up).
fn round_scientific(s: &str, n: usize) -> String {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    // exponent of the first digit
    let mut e10 = exp + int_part.len() as i64 - 1;
    let lead = digits.iter().position(|&d| d != 0).unwrap_or(0);
    digits.drain(..lead);
    e10 -= lead as i64;
    if digits.is_empty() {
        return "0".into();
    }
    if digits.len() > n {
        let round_up = digits[n] >= 5;
        digits.truncate(n);
        if round_up {
            let mut i = n;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.truncate(n);
                    e10 += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() > 1 && *digits.last().unwrap() == 0 {
        digits.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + digits[0]) as char);
    if digits.len() > 1 {
        out.push('.');
        out.extend(digits[1..].iter().map(|&d| (b'0' + d) as char));
    }
    if e10 != 0 {
        out.push_str(&format!("e{e10}"));
    }
    out
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_decimal(40))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20) as u32;
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let bits = Real::max_bits(self, rhs);
                Real {
                    v: self.v.$method(&rhs.v, bits, RM),
                    bits,
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                self.$method(&self.lift(rhs))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                (&self).$method(&self.lift(rhs))
            }
        }
    };
}

bin_op!(Add, add);
bin_op!(Sub, sub);
bin_op!(Mul, mul);
bin_op!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            v: self.v.neg(),
            bits: self.bits,
        }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            v: self.v.clone().neg(),
            bits: self.bits,
        }
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let first = iter.next().unwrap_or_else(|| Real::zero(64));
        iter.fold(first, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 128;

    #[test]
    fn f64_round_trip_is_exact() {
        for &x in &[1.0, -2.5, 0.1, 1e-300, 6.02e23, -7.25e-8, 123456.789] {
            assert_eq!(Real::from_f64(x, P).to_f64(), x, "{x}");
        }
        assert_eq!(Real::zero(P).to_f64(), 0.0);
    }

    #[test]
    fn arithmetic_beyond_double_precision() {
        // (1 + 2^-80) - 1 vanishes in f64 but not at 128 bits
        let tiny = Real::from_f64(2f64.powi(-80), P);
        let one = Real::one(P);
        let d = (&one + &tiny) - &one;
        assert_eq!(d.to_f64(), 2f64.powi(-80));
    }

    #[test]
    fn elementary_functions() {
        let two = Real::from_u64(2, P);
        assert!((two.ln().to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((two.sqrt().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
        assert!((Real::one(P).exp().to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((Real::pi(P).to_f64() - std::f64::consts::PI).abs() < 1e-16);
        assert_eq!(two.powi(10).to_f64(), 1024.0);
        assert_eq!(two.powi(0).to_f64(), 1.0);
    }

    #[test]
    fn decimal_rendering_rounds_to_requested_digits() {
        let third = Real::one(P) / Real::from_u64(3, P);
        assert_eq!(third.to_decimal(5), "3.3333e-1");
        let x = Real::parse_decimal("9.99996", P).unwrap();
        assert_eq!(x.to_decimal(5), "1e1");
        assert_eq!(Real::from_f64(-24.0, P).to_decimal(16), "-2.4e1");
        assert_eq!(Real::from_f64(1.0, P).to_decimal(16), "1");
    }

    #[test]
    fn decimal_parse_round_trips_through_rendering() {
        let pi = Real::pi(P);
        let s = pi.to_decimal(30);
        let back = Real::parse_decimal(&s, P).unwrap();
        assert!(((&back - &pi).abs().to_f64()) < 1e-29);
        assert!(Real::parse_decimal("not a number", P).is_none());
    }

    #[test]
    fn ordering() {
        let a = Real::from_f64(1.5, P);
        let b = Real::from_f64(-3.0, P);
        assert!(a > b);
        assert!(b.is_negative() && a.is_positive());
        assert_eq!(a.clone(), a);
    }
}
