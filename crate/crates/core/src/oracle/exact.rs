//! Exact rational arithmetic for Laguerre sums and factorial ratios.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

/// A finite f64 written exactly as p / 2^e with e ≥ 0.
#[derive(Debug, Clone)]
pub struct DyadicRational {
    pub num: BigInt,
    pub exp2: u32,
}

impl DyadicRational {
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return DyadicRational {
                num: BigInt::zero(),
                exp2: 0,
            };
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut mant, mut e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        while mant % 2 == 0 {
            mant /= 2;
            e += 1;
        }
        let mut num = BigInt::from(mant);
        let exp2 = if e >= 0 {
            num <<= e as usize;
            0
        } else {
            (-e) as u32
        };
        if negative {
            num = -num;
        }
        DyadicRational { num, exp2 }
    }
}

/// Scaled Laguerre sum: returns N with L_n^m(x) = N / (2^{e·n} · n!) where
/// x = p / 2^e, evaluated term by term from
///
/// ```text
/// L_n^m(x) = Σ_{k=0}^{n} (−1)^k C(n+m, n−k) x^k / k!
/// ```
pub fn laguerre_scaled(n: u64, m: u64, x: &DyadicRational) -> BigInt {
    // U_k = C(n+m, n−k) · n!/k! · p^k
    let mut u = binomial(n + m, n) * falling(n, n);
    let mut total = u.clone() << (x.exp2 as u64 * n) as usize;
    for k in 1..=n {
        u *= BigInt::from(n - k + 1) * &x.num;
        u /= BigInt::from((m + k) * k);
        let term = u.clone() << (x.exp2 as u64 * (n - k)) as usize;
        if k % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    total
}

/// L_n^m(x) converted to f64 from the exact rational value.
pub fn laguerre_exact(n: u64, m: u64, x: f64) -> f64 {
    let dx = DyadicRational::from_f64(x);
    let num = laguerre_scaled(n, m, &dx);
    let den = falling(n, n) << (dx.exp2 as u64 * n) as usize;
    ratio_to_f64(&num, &den)
}

/// n! / (n − k)!
pub fn falling(n: u64, k: u64) -> BigInt {
    let mut out = BigInt::one();
    for s in 0..k {
        out *= n - s;
    }
    out
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut out = BigInt::one();
    for s in 0..k {
        out *= n - s;
        out /= s + 1;
    }
    out
}

/// Top 64 bits of |a| and the number of discarded low bits.
fn leading_bits(a: &BigInt) -> (u64, i64) {
    let bits = a.bits() as i64;
    let shift = (bits - 64).max(0);
    let top = (a.abs() >> shift as usize)
        .to_u64_digits()
        .1
        .first()
        .copied()
        .unwrap_or(0);
    (top, shift)
}

/// (sign, ln|a/b|) with the binary exponents aligned before any rounding so
/// that huge operands keep full relative precision. a = 0 gives (0, −∞).
pub fn ln_ratio(a: &BigInt, b: &BigInt) -> (i8, f64) {
    assert!(!b.is_zero(), "zero denominator");
    if a.is_zero() {
        return (0, f64::NEG_INFINITY);
    }
    let sign = if (a.sign() == Sign::Minus) == (b.sign() == Sign::Minus) {
        1
    } else {
        -1
    };
    let (ta, sa) = leading_bits(a);
    let (tb, sb) = leading_bits(b);
    let ln = ((ta as f64) / (tb as f64)).ln() + (sa - sb) as f64 * std::f64::consts::LN_2;
    (sign, ln)
}

/// a / b rounded to f64 (a few ulp), saturating outside the f64 range.
pub fn ratio_to_f64(a: &BigInt, b: &BigInt) -> f64 {
    assert!(!b.is_zero(), "zero denominator");
    if a.is_zero() {
        return 0.0;
    }
    let sign = if (a.sign() == Sign::Minus) == (b.sign() == Sign::Minus) {
        1.0
    } else {
        -1.0
    };
    let (ta, sa) = leading_bits(a);
    let (tb, sb) = leading_bits(b);
    let mut v = (ta as f64) / (tb as f64);
    let mut d = sa - sb;
    // apply the exponent in steps that stay inside the normal range
    while d != 0 {
        let step = d.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        d -= step;
    }
    sign * v
}
