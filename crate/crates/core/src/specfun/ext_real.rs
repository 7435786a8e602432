//! Signed extended-range reals.
//!
//! A value is stored as `sign * exp(logmag)`. Products and quotients are
//! exact in the sign and additive in the log-magnitude, so factorial-sized
//! quantities never overflow. Addition rescales both operands against the
//! larger magnitude before combining.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Product;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtReal {
    sign: i8,
    logmag: f64,
}

/// Result of converting an [`ExtReal`] to `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F64Conversion {
    pub value: f64,
    /// Set when the magnitude exceeded `f64::MAX` and `value` was clamped.
    pub overflow: bool,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal { sign: 0, logmag: 0.0 };
    pub const ONE: ExtReal = ExtReal { sign: 1, logmag: 0.0 };

    /// Builds a value from a sign and a natural-log magnitude.
    ///
    /// A zero sign, or a magnitude of `-inf`, yields exact zero.
    pub fn from_parts(sign: i8, logmag: f64) -> Self {
        debug_assert!(!logmag.is_nan(), "NaN log-magnitude");
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            ExtReal {
                sign: sign.signum(),
                logmag,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x.is_finite(), "ExtReal::from_f64({x})");
        if x == 0.0 {
            Self::ZERO
        } else {
            ExtReal {
                sign: if x > 0.0 { 1 } else { -1 },
                logmag: x.abs().ln(),
            }
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of `|self|`; `-inf` for zero.
    #[inline]
    pub fn logmag(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.logmag
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        ExtReal {
            sign: self.sign.abs(),
            logmag: self.logmag,
        }
    }

    pub fn recip(self) -> Option<Self> {
        if self.sign == 0 {
            None
        } else {
            Some(ExtReal {
                sign: self.sign,
                logmag: -self.logmag,
            })
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if k % 2 == 0 { 1 } else { self.sign };
        ExtReal {
            sign,
            logmag: self.logmag * f64::from(k),
        }
    }

    /// Principal square root of a non-negative value.
    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            0 => Some(Self::ZERO),
            1 => Some(ExtReal {
                sign: 1,
                logmag: 0.5 * self.logmag,
            }),
            _ => None,
        }
    }

    /// Converts to `f64`, clamping to `±f64::MAX` and raising the overflow
    /// flag when the magnitude is out of range. Magnitudes below the
    /// smallest subnormal flush to zero without a flag.
    pub fn to_f64(self) -> F64Conversion {
        if self.sign == 0 {
            return F64Conversion {
                value: 0.0,
                overflow: false,
            };
        }
        let mag = self.logmag.exp();
        if mag.is_finite() {
            F64Conversion {
                value: f64::from(self.sign) * mag,
                overflow: false,
            }
        } else {
            F64Conversion {
                value: f64::from(self.sign) * f64::MAX,
                overflow: true,
            }
        }
    }

    /// `Some(x)` if the value fits in an `f64`.
    pub fn try_to_f64(self) -> Option<f64> {
        let c = self.to_f64();
        (!c.overflow).then_some(c.value)
    }

    /// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
    pub fn rel_diff(self, other: Self) -> f64 {
        if self.sign == 0 && other.sign == 0 {
            return 0.0;
        }
        let scale = self.logmag().max(other.logmag());
        let a = f64::from(self.sign) * (self.logmag() - scale).exp();
        let b = f64::from(other.sign) * (other.logmag() - scale).exp();
        (a - b).abs() / a.abs().max(b.abs())
    }
}

impl Default for ExtReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "ExtReal(0)"),
            s => write!(f, "ExtReal({}exp({}))", if s < 0 { "-" } else { "+" }, self.logmag),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.try_to_f64() {
            Some(v) => write!(f, "{v}"),
            None => {
                let log10 = self.logmag / std::f64::consts::LN_10;
                let exp10 = log10.floor();
                let mant = 10f64.powf(log10 - exp10) * f64::from(self.sign);
                write!(f, "{mant}e{exp10}")
            }
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        ExtReal {
            sign: self.sign * rhs.sign,
            logmag: self.logmag + rhs.logmag,
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: f64) -> ExtReal {
        self * ExtReal::from_f64(rhs)
    }
}

impl Div for ExtReal {
    type Output = ExtReal;
    /// Panics on division by exact zero; callers guard singular denominators.
    fn div(self, rhs: ExtReal) -> ExtReal {
        assert!(rhs.sign != 0, "ExtReal division by zero");
        if self.sign == 0 {
            return Self::ZERO;
        }
        ExtReal {
            sign: self.sign * rhs.sign,
            logmag: self.logmag - rhs.logmag,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.logmag >= rhs.logmag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let t = (small.logmag - big.logmag).exp();
        let m = if big.sign == small.sign { 1.0 + t } else { 1.0 - t };
        if m == 0.0 {
            return Self::ZERO;
        }
        ExtReal {
            sign: big.sign,
            logmag: big.logmag + m.ln(),
        }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl Product for ExtReal {
    fn product<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ONE, |acc, x| acc * x)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.logmag.partial_cmp(&other.logmag),
                _ => other.logmag.partial_cmp(&self.logmag),
            },
            ord => Some(ord),
        }
    }
}
