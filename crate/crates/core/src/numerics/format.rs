use std::fmt;
use std::str::FromStr;

use super::NumericError;

/// Arithmetic contract for every tensor operation.
///
/// `Float53` is IEEE binary64 with round-to-nearest-even. `Fixed` is two's
/// complement fixed point with `frac_bits` fractional bits inside a
/// `total_bits` wide word; every intermediate result is rounded to the grid
/// (ties to even) and range-checked.
///
/// Fixed-point values are carried in `f64` slots holding the exact grid value
/// `raw * 2^-frac_bits`. A raw word wider than 53 bits cannot be carried
/// exactly and is reported as an overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NumericFormat {
    #[default]
    Float53,
    Fixed { frac_bits: u32, total_bits: u32 },
}

const CARRIER_BITS: u32 = 53;

impl NumericFormat {
    pub fn fixed(frac_bits: u32, total_bits: u32) -> Result<Self, NumericError> {
        if frac_bits == 0 || frac_bits >= total_bits || total_bits > 64 {
            return Err(NumericError::InvalidFormat {
                frac_bits,
                total_bits,
            });
        }
        Ok(Self::Fixed {
            frac_bits,
            total_bits,
        })
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Self::Fixed { .. })
    }

    /// Largest representable raw word.
    fn raw_limit(total_bits: u32) -> i128 {
        let word = (1i128 << (total_bits - 1)) - 1;
        word.min(1i128 << CARRIER_BITS)
    }

    /// Round `x` once into the format.
    pub fn round(&self, x: f64) -> Result<f64, NumericError> {
        if !x.is_finite() {
            return Err(NumericError::NonFinite);
        }
        match *self {
            Self::Float53 => Ok(x),
            Self::Fixed {
                frac_bits,
                total_bits,
            } => {
                let scaled = x * pow2(frac_bits);
                if !scaled.is_finite() || scaled.abs() > 2f64.powi(100) {
                    return Err(NumericError::Overflow { value: x });
                }
                let raw = scaled.round_ties_even() as i128;
                self.decode_raw(raw, frac_bits, total_bits, x)
            }
        }
    }

    fn decode_raw(
        &self,
        raw: i128,
        frac_bits: u32,
        total_bits: u32,
        value: f64,
    ) -> Result<f64, NumericError> {
        if raw.abs() > Self::raw_limit(total_bits) {
            return Err(NumericError::Overflow { value });
        }
        Ok(raw as f64 / pow2(frac_bits))
    }

    /// Raw integer word of a value already on the grid.
    pub(crate) fn raw(&self, x: f64) -> i128 {
        match *self {
            Self::Float53 => unreachable!("raw word requested in float format"),
            Self::Fixed { frac_bits, .. } => (x * pow2(frac_bits)) as i128,
        }
    }

    /// Round an exact product-sum held at scale `2^(2f)` back onto the grid.
    pub(crate) fn rescale_product(&self, acc: i128) -> Result<f64, NumericError> {
        match *self {
            Self::Float53 => unreachable!(),
            Self::Fixed {
                frac_bits,
                total_bits,
            } => {
                let raw = div_round_even(acc, 1i128 << frac_bits);
                let approx = acc as f64 / pow2(2 * frac_bits);
                self.decode_raw(raw, frac_bits, total_bits, approx)
            }
        }
    }

    /// `a / b` rounded into the format.
    pub fn div(&self, a: f64, b: f64) -> Result<f64, NumericError> {
        if b == 0.0 {
            return Err(NumericError::NonFinite);
        }
        match *self {
            Self::Float53 => check_finite(a / b),
            Self::Fixed {
                frac_bits,
                total_bits,
            } => {
                let (ra, rb) = (self.raw(a), self.raw(b));
                let raw = div_round_even(ra << frac_bits, rb);
                self.decode_raw(raw, frac_bits, total_bits, a / b)
            }
        }
    }

    pub fn add(&self, a: f64, b: f64) -> Result<f64, NumericError> {
        match *self {
            Self::Float53 => check_finite(a + b),
            Self::Fixed {
                frac_bits,
                total_bits,
            } => self.decode_raw(self.raw(a) + self.raw(b), frac_bits, total_bits, a + b),
        }
    }

    pub fn mul(&self, a: f64, b: f64) -> Result<f64, NumericError> {
        match *self {
            Self::Float53 => check_finite(a * b),
            Self::Fixed { .. } => self.rescale_product(self.raw(a) * self.raw(b)),
        }
    }

    /// `exp(x)` evaluated in binary64 and rounded once into the format.
    pub fn exp(&self, x: f64) -> Result<f64, NumericError> {
        self.round(x.exp())
    }

    /// Unit in the last place of `x` for tolerance checks.
    pub fn ulp(&self, x: f64) -> f64 {
        match *self {
            Self::Float53 => {
                let a = x.abs();
                if a == 0.0 {
                    f64::from_bits(1)
                } else {
                    f64::from_bits(a.to_bits() + 1) - a
                }
            }
            Self::Fixed { frac_bits, .. } => 1.0 / pow2(frac_bits),
        }
    }
}

fn check_finite(x: f64) -> Result<f64, NumericError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(NumericError::NonFinite)
    }
}

fn pow2(bits: u32) -> f64 {
    2f64.powi(bits as i32)
}

/// Integer division rounding to nearest, ties to even.
pub(crate) fn div_round_even(num: i128, den: i128) -> i128 {
    debug_assert!(den != 0);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

impl fmt::Display for NumericFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Float53 => write!(f, "float53"),
            Self::Fixed {
                frac_bits,
                total_bits,
            } => write!(f, "fixedpoint:{frac_bits}:{total_bits}"),
        }
    }
}

impl FromStr for NumericFormat {
    type Err = NumericError;

    /// Accepts `float53`, `fixedpoint:FRAC` (64-bit word) and
    /// `fixedpoint:FRAC:TOTAL`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::Parse(s.to_string());
        if s == "float53" {
            return Ok(Self::Float53);
        }
        let rest = s.strip_prefix("fixedpoint:").ok_or_else(bad)?;
        let mut parts = rest.split(':');
        let frac: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let total: u32 = match parts.next() {
            Some(t) => t.parse().map_err(|_| bad())?,
            None => 64,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::fixed(frac, total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_format_bounds() {
        assert!(NumericFormat::fixed(0, 16).is_err());
        assert!(NumericFormat::fixed(16, 16).is_err());
        assert!(NumericFormat::fixed(8, 65).is_err());
        assert!(NumericFormat::fixed(20, 64).is_ok());
    }

    #[test]
    fn rounding_is_ties_to_even() {
        let f = NumericFormat::fixed(1, 16).unwrap();
        assert_eq!(f.round(0.25).unwrap(), 0.0);
        assert_eq!(f.round(0.75).unwrap(), 1.0);
        assert_eq!(f.round(-0.25).unwrap(), 0.0);
        assert_eq!(div_round_even(5, 2), 2);
        assert_eq!(div_round_even(7, 2), 4);
        assert_eq!(div_round_even(-5, 2), -2);
        assert_eq!(div_round_even(-7, 2), -4);
    }

    #[test]
    fn overflow_is_reported() {
        let f = NumericFormat::fixed(4, 8).unwrap();
        assert_eq!(f.round(7.0).unwrap(), 7.0);
        assert!(matches!(f.round(8.0), Err(NumericError::Overflow { .. })));
        assert!(f.add(7.0, 1.0).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["float53", "fixedpoint:20:32"] {
            assert_eq!(s.parse::<NumericFormat>().unwrap().to_string(), s);
        }
        assert_eq!(
            "fixedpoint:12".parse::<NumericFormat>().unwrap(),
            NumericFormat::fixed(12, 64).unwrap()
        );
        assert!("fixed:3".parse::<NumericFormat>().is_err());
    }
}
