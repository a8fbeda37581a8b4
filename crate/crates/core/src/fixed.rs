//! Binary fixed-point reals `m / 2^prec` on arbitrary precision integers.
//!
//! Products round to nearest. Values used by the interval lab stay in a
//! bounded range, so a fixed exponent loses nothing over a float format.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

pub const DEFAULT_PRECISION: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fixed {
    mant: BigInt,
    prec: u32,
}

impl Fixed {
    pub fn zero(prec: u32) -> Self {
        Fixed {
            mant: BigInt::zero(),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Fixed {
            mant: BigInt::from(1) << prec,
            prec,
        }
    }

    pub fn from_raw(mant: BigInt, prec: u32) -> Self {
        Fixed { mant, prec }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Fixed {
            mant: BigInt::from(v) << prec,
            prec,
        }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32, prec: u32) -> Self {
        if k > prec {
            return Fixed::zero(prec);
        }
        Fixed {
            mant: BigInt::from(1) << (prec - k),
            prec,
        }
    }

    /// Nearest representable value to an exact rational.
    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let num = r.numer() << (prec + 1);
        let q = num.div_floor(r.denom());
        // floor(2x) then halve with rounding
        Fixed {
            mant: (q + 1) >> 1,
            prec,
        }
    }

    /// Exact for finite doubles at or above `2^-prec`.
    pub fn from_f64(v: f64, prec: u32) -> Result<Self> {
        let r = Rational::from_float(v)
            .ok_or_else(|| Error::Invalid(format!("non-finite value {v}")))?;
        Ok(Fixed::from_rational(&r, prec))
    }

    /// Accepts decimals ("3.83"), fractions ("7/2"), integers and the hex
    /// form written by `to_hex`.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let t = s.trim();
        if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("-0x")) {
            let neg = t.starts_with('-');
            let (digits, exp) = hex
                .split_once('p')
                .ok_or_else(|| Error::Invalid(format!("hex value without exponent: {s}")))?;
            let m = BigInt::parse_bytes(digits.as_bytes(), 16)
                .ok_or_else(|| Error::Invalid(format!("bad hex digits: {s}")))?;
            let e: i64 = exp
                .parse()
                .map_err(|_| Error::Invalid(format!("bad exponent: {s}")))?;
            let m = if neg { -m } else { m };
            let shift = e + prec as i64;
            let mant = if shift >= 0 {
                m << shift as u32
            } else {
                let k = (-shift) as u32;
                (m + (BigInt::from(1) << (k - 1))) >> k
            };
            return Ok(Fixed { mant, prec });
        }
        if let Some((ip, fp)) = t.split_once('.') {
            if !fp.chars().all(|c| c.is_ascii_digit()) || fp.is_empty() {
                return Err(Error::Invalid(format!("bad decimal: {s}")));
            }
            let neg = ip.starts_with('-');
            let ip = ip.trim_start_matches(['-', '+']);
            let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
            let n = BigInt::parse_bytes(digits.as_bytes(), 10)
                .ok_or_else(|| Error::Invalid(format!("bad decimal: {s}")))?;
            let d = num_traits::pow(BigInt::from(10), fp.len());
            let r = Rational::new(if neg { -n } else { n }, d);
            return Ok(Fixed::from_rational(&r, prec));
        }
        Ok(Fixed::from_rational(&parse_rational(t)?, prec))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn raw(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, o.prec);
        Fixed {
            mant: &self.mant + &o.mant,
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, o.prec);
        Fixed {
            mant: &self.mant - &o.mant,
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Fixed {
        Fixed {
            mant: -&self.mant,
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Fixed {
        Fixed {
            mant: self.mant.abs(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, o.prec);
        let p = &self.mant * &o.mant;
        Fixed {
            mant: round_shift(p, self.prec),
            prec: self.prec,
        }
    }

    pub fn mul_int(&self, k: i64) -> Fixed {
        Fixed {
            mant: &self.mant * k,
            prec: self.prec,
        }
    }

    /// Exact halving is not guaranteed; rounds to nearest.
    pub fn half(&self) -> Fixed {
        Fixed {
            mant: round_shift(self.mant.clone(), 1),
            prec: self.prec,
        }
    }

    pub fn midpoint(&self, o: &Fixed) -> Fixed {
        self.add(o).half()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.mant.clone(), BigInt::from(1) << self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits();
        if bits <= 60 {
            return self.mant.to_f64().unwrap_or(0.0) * 2f64.powi(-(self.prec as i32));
        }
        let drop = bits - 60;
        let top = (&self.mant >> drop).to_f64().unwrap_or(0.0);
        top * 2f64.powi(drop as i32 - self.prec as i32)
    }

    /// Bit-exact hexadecimal form `0x<mantissa>p-<prec>`.
    pub fn to_hex(&self) -> String {
        let (sign, mag) = match self.mant.sign() {
            Sign::Minus => ("-", -&self.mant),
            _ => ("", self.mant.clone()),
        };
        format!("{sign}0x{}p-{}", mag.to_str_radix(16), self.prec)
    }

    /// Short decimal rendering for humans.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let v = round_shift(&self.mant * &scale, self.prec);
        let neg = v.is_negative();
        let s = v.abs().to_str_radix(10);
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (ip, fp) = s.split_at(s.len() - digits);
        format!("{}{}.{}", if neg { "-" } else { "" }, ip, fp)
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, o: &Fixed) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Fixed {
    fn cmp(&self, o: &Fixed) -> Ordering {
        debug_assert_eq!(self.prec, o.prec);
        self.mant.cmp(&o.mant)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(20))
    }
}

fn round_shift(v: BigInt, k: u32) -> BigInt {
    if k == 0 {
        return v;
    }
    (v + (BigInt::from(1) << (k - 1))) >> k
}
