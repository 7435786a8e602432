//! The nonlinear function family
//!
//! ```text
//! f(n) = L_n^i(η²) / ((1 + n^r) · L_n^j(η²))
//! ```
//!
//! and the same-parity products f(2n)!! = f(2)·f(4)⋯f(2n) and
//! f(2n+1)!! = f(3)·f(5)⋯f(2n+1) that enter the state coefficients. Both
//! products start at k = 1, so f(0) and f(1) never contribute.
//!
//! When i = j the Laguerre factors cancel and f(n) = 1/(1 + n^r) is returned
//! without evaluating any polynomial. The convention 0⁰ = 1 makes f(0) = 1/2
//! for r = 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{laguerre, ExtReal, LaguerreSeq};

/// Parameters (i, j, r, η) of the nonlinear function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearSpec {
    /// Upper Laguerre index of the numerator.
    pub i: u32,
    /// Upper Laguerre index of the denominator.
    pub j: u32,
    /// Exponent in 1 + n^r.
    pub r: f64,
    /// Lamb–Dicke parameter; polynomials are evaluated at η².
    pub eta: f64,
}

impl NonlinearSpec {
    pub fn new(i: u32, j: u32, r: f64, eta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!("r must be finite and >= 0, got {r}")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be finite and >= 0, got {eta}")));
        }
        Ok(NonlinearSpec { i, j, r, eta })
    }

    /// The i = j family, f(n) = 1/(1 + n^r).
    pub fn degenerate(r: f64) -> Result<Self> {
        Self::new(0, 0, r, 0.0)
    }

    /// Laguerre argument η².
    #[inline]
    pub fn x(&self) -> f64 {
        self.eta * self.eta
    }

    #[inline]
    pub fn is_degenerate(&self) -> bool {
        self.i == self.j
    }

    /// f(0), f(1), f(2), … computed incrementally.
    pub fn values(&self) -> FValues {
        FValues::new(*self)
    }
}

/// Photon-number parity of an even or odd state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Fock index of superposition slot 0.
    #[inline]
    pub fn offset(self) -> u64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// Fock index 2n or 2n + 1 carried by slot n.
    #[inline]
    pub fn fock_index(self, slot: usize) -> u64 {
        2 * slot as u64 + self.offset()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!("unknown parity `{other}`"))),
        }
    }
}

/// 1 + n^r with 0⁰ = 1.
fn one_plus_power(n: u64, r: f64) -> f64 {
    if n == 0 {
        if r == 0.0 {
            2.0
        } else {
            1.0
        }
    } else {
        1.0 + (r * (n as f64).ln()).exp()
    }
}

fn ratio(spec: &NonlinearSpec, n: u64, num: ExtReal, den: ExtReal) -> Result<ExtReal> {
    if den.is_zero() || !den.logmag().is_finite() {
        return Err(Error::SingularFunction {
            n,
            j: spec.j,
            x: spec.x(),
        });
    }
    Ok(num / (den * ExtReal::from_f64(one_plus_power(n, spec.r))))
}

/// f(n) for a single argument.
pub fn eval_f(spec: &NonlinearSpec, n: u64) -> Result<ExtReal> {
    if spec.is_degenerate() {
        return Ok(ExtReal::from_parts(1, -one_plus_power(n, spec.r).ln()));
    }
    let x = spec.x();
    ratio(spec, n, laguerre(n, spec.i, x), laguerre(n, spec.j, x))
}

/// Abstraction point for the function that deforms the annihilation
/// operator. Only [`NonlinearSpec`] ships; tests wrap it to perturb values.
pub trait NonlinearFunction: Sync {
    /// Values f(0), f(1), f(2), … in order.
    fn values(&self) -> Box<dyn Iterator<Item = Result<ExtReal>> + Send + '_>;

    /// Parameters to echo into results, if the function has them.
    fn spec(&self) -> Option<NonlinearSpec> {
        None
    }
}

impl NonlinearFunction for NonlinearSpec {
    fn values(&self) -> Box<dyn Iterator<Item = Result<ExtReal>> + Send + '_> {
        Box::new(FValues::new(*self))
    }

    fn spec(&self) -> Option<NonlinearSpec> {
        Some(*self)
    }
}

/// Sequential evaluation of f(n): one Laguerre recurrence step per
/// polynomial per argument.
#[derive(Debug, Clone)]
pub struct FValues {
    spec: NonlinearSpec,
    n: u64,
    seqs: Option<(LaguerreSeq, LaguerreSeq)>,
}

impl FValues {
    fn new(spec: NonlinearSpec) -> Self {
        let seqs = (!spec.is_degenerate()).then(|| {
            let x = spec.x();
            (LaguerreSeq::new(spec.i, x), LaguerreSeq::new(spec.j, x))
        });
        FValues { spec, n: 0, seqs }
    }
}

impl Iterator for FValues {
    type Item = Result<ExtReal>;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.n;
        self.n += 1;
        let out = match &mut self.seqs {
            None => Ok(ExtReal::from_parts(1, -one_plus_power(n, self.spec.r).ln())),
            Some((num, den)) => {
                let a = num.next().expect("infinite sequence");
                let b = den.next().expect("infinite sequence");
                ratio(&self.spec, n, a, b)
            }
        };
        Some(out)
    }
}

/// Running product f(2n)!! or f(2n+1)!!; each [`advance`](Self::advance)
/// multiplies in one new factor.
pub struct FDoubleFactorial<'a> {
    values: Box<dyn Iterator<Item = Result<ExtReal>> + Send + 'a>,
    n: u64,
    product: ExtReal,
}

impl<'a> FDoubleFactorial<'a> {
    pub fn new<F: NonlinearFunction + ?Sized>(f: &'a F, parity: Parity) -> Self {
        let mut values = f.values();
        // f(0) and, for the odd product, f(1) are not part of the product
        let skip = 1 + parity.offset();
        for _ in 0..skip {
            // a singular value at an unused argument is irrelevant
            let _ = values.next();
        }
        FDoubleFactorial {
            values,
            n: 0,
            product: ExtReal::ONE,
        }
    }

    /// Current product index n.
    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn current(&self) -> ExtReal {
        self.product
    }

    /// Moves from n to n + 1. Returns the new factor f(2n+2) (even) or
    /// f(2n+3) (odd).
    pub fn advance(&mut self) -> Result<ExtReal> {
        // the even product skips odd arguments and vice versa
        let _ = self.values.next();
        let factor = self.values.next().expect("infinite sequence")?;
        self.product = self.product * factor;
        self.n += 1;
        Ok(factor)
    }
}

/// f(2n)!! (even) or f(2n+1)!! (odd); the empty product at n = 0 is 1.
pub fn f_double_factorial(spec: &NonlinearSpec, parity: Parity, n: u64) -> Result<ExtReal> {
    let mut prod = FDoubleFactorial::new(spec, parity);
    while prod.index() < n {
        prod.advance()?;
    }
    Ok(prod.current())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64_of(v: ExtReal) -> f64 {
        v.to_f64().value
    }

    #[test]
    fn degenerate_family_values() {
        let spec = NonlinearSpec::new(2, 2, 2.0, 0.3).unwrap();
        assert!((f64_of(eval_f(&spec, 3).unwrap()) - 0.1).abs() < 1e-15);
        let r0 = NonlinearSpec::degenerate(0.0).unwrap();
        // 0⁰ = 1 → 1/(1 + 1)
        assert_eq!(f64_of(eval_f(&r0, 0).unwrap()), 0.5);
        let r1 = NonlinearSpec::degenerate(1.5).unwrap();
        assert_eq!(f64_of(eval_f(&r1, 0).unwrap()), 1.0);
    }

    #[test]
    fn eta_zero_with_unit_numerator_index() {
        // L_n^1(0) = n + 1, L_n^0(0) = 1
        let spec = NonlinearSpec::new(1, 0, 1.0, 0.0).unwrap();
        assert!((f64_of(eval_f(&spec, 5).unwrap()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_values_keep_their_sign() {
        // L_4^1(0.64) / (5 L_4^0(0.64)) < 0
        let spec = NonlinearSpec::new(1, 0, 1.0, 0.8).unwrap();
        let v = eval_f(&spec, 4).unwrap();
        assert_eq!(v.sign(), -1);
    }

    #[test]
    fn double_factorial_examples() {
        let spec = NonlinearSpec::degenerate(2.0).unwrap();
        assert_eq!(f_double_factorial(&spec, Parity::Even, 0).unwrap(), ExtReal::ONE);
        let even = f64_of(f_double_factorial(&spec, Parity::Even, 2).unwrap());
        assert!((even - 1.0 / 85.0).abs() < 1e-16);
        let spec1 = NonlinearSpec::degenerate(1.0).unwrap();
        let odd = f64_of(f_double_factorial(&spec1, Parity::Odd, 2).unwrap());
        assert!((odd - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn sequential_values_match_pointwise() {
        let spec = NonlinearSpec::new(2, 1, 1.5, 0.8).unwrap();
        for (n, v) in spec.values().take(120).enumerate() {
            let direct = eval_f(&spec, n as u64).unwrap();
            assert!(v.unwrap().rel_diff(direct) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn incremental_product_is_one_multiplication_per_step() {
        let spec = NonlinearSpec::new(1, 0, 1.0, 0.4).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let mut prod = FDoubleFactorial::new(&spec, parity);
            for _ in 0..60 {
                let before = prod.current();
                let arg = 2 * (prod.index() + 1) + parity.offset();
                let factor = prod.advance().unwrap();
                let direct = eval_f(&spec, arg).unwrap();
                assert_eq!(factor.sign(), direct.sign());
                assert!(factor.rel_diff(direct) < 1e-12);
                assert_eq!(prod.current(), before * factor);
            }
        }
    }

    #[test]
    fn general_path_reproduces_degenerate_shortcut() {
        // evaluate L_n^i / ((1+n^r) L_n^i) numerically and compare with 1/(1+n^r)
        for &(i, r, eta) in &[(0u32, 0.5, 0.2), (1, 1.0, 0.6), (2, 2.0, 1.0), (3, 1.5, 0.8)] {
            let spec = NonlinearSpec::new(i, i, r, eta).unwrap();
            let mut seq = LaguerreSeq::new(i, spec.x());
            for n in 0..=500u64 {
                let l = seq.next().unwrap();
                let general = ratio(&spec, n, l, l).unwrap();
                let short = eval_f(&spec, n).unwrap();
                assert!(general.rel_diff(short) <= 1e-10, "i={i} r={r} eta={eta} n={n}");
            }
        }
    }

    #[test]
    fn eta_zero_degenerate_is_positive_and_non_increasing() {
        for &r in &[0.5, 1.0, 1.5, 2.0] {
            let spec = NonlinearSpec::new(3, 3, r, 0.0).unwrap();
            let vals: Vec<f64> = spec.values().take(300).map(|v| f64_of(v.unwrap())).collect();
            assert!(vals.iter().all(|v| *v > 0.0));
            assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NonlinearSpec::new(0, 0, -1.0, 0.1).is_err());
        assert!(NonlinearSpec::new(0, 0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn parity_parsing() {
        assert_eq!("Even".parse::<Parity>().unwrap(), Parity::Even);
        assert_eq!("odd".parse::<Parity>().unwrap(), Parity::Odd);
        assert!("both".parse::<Parity>().is_err());
        assert_eq!(Parity::Odd.fock_index(3), 7);
    }
}
