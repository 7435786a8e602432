//! Brute-force reference implementations used to validate the production
//! paths: dense ladder algebra on a truncated Fock space, a series-built
//! displacement matrix, and closed-form coefficients in exact arithmetic.
//!
//! Nothing here is tuned for speed.

pub mod exact;

use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::nlfunc::NonlinearSpec;
use crate::observables::MomentSet;
use crate::specfun::log_factorial;
use crate::state::{CoefficientTable, StateParams};
use crate::wigner::PhasePoint;

use exact::{laguerre_scaled, ln_ratio, DyadicRational};

/// Top-entry magnitude that still leaves room for the a⁴ and a†² shifts.
pub const HEADROOM_TOP: f64 = 1e-10;
/// Bound on e^{|α|²}·|α|^{2·dim}/dim! for a usable displacement dimension.
pub const DISPLACEMENT_TAIL: f64 = 1e-16;
/// Largest slot count accepted by [`oracle_state_closed_form`].
pub const CLOSED_FORM_MAX_SLOTS: usize = 300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// Dense amplitudes on |0⟩ … |dim − 1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub entries: DVector<Complex64>,
    /// Set once a raising operator pushed non-zero amplitude past the top.
    pub leaked: bool,
}

impl FockVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        FockVector {
            entries: DVector::from_element(dim, ZERO),
            leaked: false,
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Embeds a coefficient table into a flat basis of the given size.
    pub fn from_table(table: &CoefficientTable, dim: usize) -> Result<Self> {
        let top = table.max_fock_index() as usize;
        if top >= dim {
            return Err(Error::InsufficientHeadroom(format!(
                "table reaches |{top}⟩ but dim = {dim}"
            )));
        }
        let mut v = Self::zeros(dim);
        for (k, a) in table.fock_entries() {
            v.entries[k as usize] = a;
        }
        Ok(v)
    }

    /// Dimension 2·(highest Fock index) + 8.
    pub fn embed(table: &CoefficientTable) -> Self {
        let dim = 2 * table.max_fock_index() as usize + 8;
        Self::from_table(table, dim).expect("dimension covers the table")
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.entries.dotc(&other.entries)
    }
}

pub fn apply_ladder(v: &FockVector, which: Ladder) -> FockVector {
    let dim = v.dim();
    let mut out = FockVector::zeros(dim);
    out.leaked = v.leaked;
    match which {
        Ladder::Lower => {
            for n in 0..dim - 1 {
                out.entries[n] = v.entries[n + 1] * ((n + 1) as f64).sqrt();
            }
        }
        Ladder::Raise => {
            for n in 1..dim {
                out.entries[n] = v.entries[n - 1] * (n as f64).sqrt();
            }
            if v.entries[dim - 1] != ZERO {
                out.leaked = true;
            }
        }
    }
    out
}

fn apply_n(v: &FockVector, which: Ladder, times: usize) -> FockVector {
    (0..times).fold(v.clone(), |acc, _| apply_ladder(&acc, which))
}

/// Moments by explicit operator application and inner products.
pub fn oracle_moments(v: &FockVector) -> Result<MomentSet> {
    let top = v.entries[v.dim() - 1].norm();
    if top >= HEADROOM_TOP || v.leaked {
        return Err(Error::InsufficientHeadroom(format!(
            "top entry {top:e} of a {}-dimensional vector",
            v.dim()
        )));
    }
    let a1 = apply_ladder(v, Ladder::Lower);
    let a2 = apply_ladder(&a1, Ladder::Lower);
    let a4 = apply_n(&a2, Ladder::Lower, 2);
    let ad2 = apply_n(v, Ladder::Raise, 2);
    if ad2.leaked {
        return Err(Error::InsufficientHeadroom("a†² leaked past the top".into()));
    }
    Ok(MomentSet {
        mean_n: a1.norm_sqr(),
        mean_aa: a2.norm_sqr(),
        mean_a2: v.inner(&a2),
        mean_a4: v.inner(&a4),
        mean_a2ad2: ad2.norm_sqr(),
        mean_a: v.inner(&a1),
    })
}

/// True when e^{|α|²}·|α|^{2·dim}/dim! < 10⁻¹⁶.
pub fn displacement_headroom(alpha_abs: f64, dim: usize) -> bool {
    if alpha_abs == 0.0 {
        return true;
    }
    let x = alpha_abs * alpha_abs;
    let log_bound = x + dim as f64 * x.ln() - log_factorial(dim as u64);
    log_bound < DISPLACEMENT_TAIL.ln()
}

/// Smallest dimension satisfying [`displacement_headroom`].
pub fn min_displacement_dim(alpha_abs: f64) -> usize {
    let mut dim = 1;
    while !displacement_headroom(alpha_abs, dim) {
        dim += 1;
    }
    dim
}

/// exp(z·L) for a nilpotent shift L (Raise or Lower), summed term by term.
fn shift_exponential(z: Complex64, which: Ladder, dim: usize) -> DMatrix<Complex64> {
    let mut total = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..dim {
        // term ← term · (z L) / k, with L acting on the column index
        let mut next = DMatrix::from_element(dim, dim, ZERO);
        for col in 0..dim {
            let (src, weight) = match which {
                Ladder::Raise if col + 1 < dim => (col + 1, ((col + 1) as f64).sqrt()),
                Ladder::Lower if col >= 1 => (col - 1, (col as f64).sqrt()),
                _ => continue,
            };
            let scale = z * weight / k as f64;
            for row in 0..dim {
                next[(row, col)] = term[(row, src)] * scale;
            }
        }
        term = next;
        let largest = term.iter().map(|c| c.norm()).fold(0.0, f64::max);
        total += &term;
        if largest < DISPLACEMENT_TAIL {
            break;
        }
    }
    total
}

/// Matrix of D(α) = e^{−|α|²/2} exp(α a†) exp(−α* a) on the first `dim`
/// Fock states.
pub fn oracle_displacement(alpha: PhasePoint, dim: usize) -> Result<DMatrix<Complex64>> {
    let z = alpha.to_complex();
    if dim == 0 || !displacement_headroom(z.norm(), dim) {
        return Err(Error::InsufficientHeadroom(format!(
            "dim = {dim} is too small for |α| = {}",
            z.norm()
        )));
    }
    let raise = shift_exponential(z, Ladder::Raise, dim);
    let lower = shift_exponential(-z.conj(), Ladder::Lower, dim);
    Ok(raise * lower * Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0))
}

fn log_sum_exp(logs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = logs.collect();
    let peak = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    peak + v.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
}

/// Round-off estimate for ⟨ψ|D(β)(−1)^N|ψ⟩ built from the normally ordered
/// series: ε·dim times the same sum with every term replaced by its
/// magnitude, e^{−|β|²/2}·‖exp(|β|a)|ψ̄⟩‖² with ψ̄ the entrywise modulus.
/// The alternating series cancels heavily at high Fock index, so this grows
/// like e^{2|β|√n}.
pub fn displacement_rounding_bound(table: &CoefficientTable, beta_abs: f64, dim: usize) -> f64 {
    let entries: Vec<(u64, f64)> = table
        .fock_entries()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let ln_beta = beta_abs.ln();
    let top = entries.iter().map(|e| e.0).max().unwrap_or(0);
    let ln_w = (0..=top).map(|l| {
        log_sum_exp(entries.iter().filter(|(n, _)| *n >= l).map(|&(n, lc)| {
            let d = n - l;
            let power = if d == 0 { 0.0 } else { d as f64 * ln_beta };
            power - log_factorial(d) + 0.5 * (log_factorial(n) - log_factorial(l)) + lc
        }))
    });
    let ln_norm = log_sum_exp(ln_w.map(|l| 2.0 * l));
    (ln_norm - 0.5 * beta_abs * beta_abs).exp() * dim as f64 * f64::EPSILON
}

/// Largest tolerated round-off estimate for an oracle Wigner value.
pub const WIGNER_ROUNDING_LIMIT: f64 = 1e-9;

/// (2/π)·⟨ψ|D(2α)(−1)^N|ψ⟩ with the displacement matrix above.
///
/// Fails with [`Error::InsufficientHeadroom`] when the series would lose
/// more than [`WIGNER_ROUNDING_LIMIT`] to cancellation.
pub fn oracle_wigner_point(table: &CoefficientTable, alpha: PhasePoint) -> Result<f64> {
    let beta = PhasePoint::new(2.0 * alpha.re, 2.0 * alpha.im);
    let dim = (2 * table.max_fock_index() as usize + 8)
        .max(min_displacement_dim(beta.to_complex().norm()));
    let bound = FRAC_2_PI * displacement_rounding_bound(table, beta.to_complex().norm(), dim);
    if !(bound <= WIGNER_ROUNDING_LIMIT) {
        return Err(Error::InsufficientHeadroom(format!(
            "series round-off estimate {bound:e} exceeds {WIGNER_ROUNDING_LIMIT:e}"
        )));
    }
    let v = FockVector::from_table(table, dim)?;
    let mut flipped = v.entries.clone();
    for (k, c) in flipped.iter_mut().enumerate() {
        if k % 2 == 1 {
            *c = -*c;
        }
    }
    // D(β) = e^{−|β|²/2} e^{βa†} e^{−β*a}; raising only feeds higher
    // indices, so truncating it at dim leaves the projection onto ψ exact.
    let z = beta.to_complex();
    let lowered = shift_exponential_apply(-z.conj(), Ladder::Lower, &flipped);
    let displaced = shift_exponential_apply(z, Ladder::Raise, &lowered) * Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    Ok(FRAC_2_PI * v.entries.dotc(&displaced).re)
}

/// exp(z·L)|v⟩ on the truncated space, summed until the nilpotent series
/// runs out.
fn shift_exponential_apply(z: Complex64, which: Ladder, v: &DVector<Complex64>) -> DVector<Complex64> {
    let dim = v.len();
    let mut total = v.clone();
    let mut term = v.clone();
    for k in 1..dim {
        let mut next = DVector::from_element(dim, ZERO);
        match which {
            Ladder::Lower => {
                for n in 0..dim - 1 {
                    next[n] = term[n + 1] * ((n + 1) as f64).sqrt();
                }
            }
            Ladder::Raise => {
                for n in 1..dim {
                    next[n] = term[n - 1] * (n as f64).sqrt();
                }
            }
        }
        term = next * (z / k as f64);
        total += &term;
    }
    total
}

/// Compensated running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Sign and ln|f(k)|, with the Laguerre ratio taken from exact sums.
fn ln_f(spec: &NonlinearSpec, k: u64, x: &DyadicRational) -> Result<(i8, f64)> {
    let base = -(1.0 + (k as f64).powf(spec.r)).ln();
    if spec.i == spec.j {
        return Ok((1, base));
    }
    let num = laguerre_scaled(k, u64::from(spec.i), x);
    let den = laguerre_scaled(k, u64::from(spec.j), x);
    if den == BigInt::from(0) {
        return Err(Error::SingularFunction {
            n: k,
            j: spec.j,
            x: spec.x(),
        });
    }
    let (sign, ln) = ln_ratio(&num, &den);
    Ok((sign, ln + base))
}

/// Coefficients from the closed forms
///
/// ```text
/// C_{2n}   ∝ λ^n f(2n)!!   √((2n−1)!!/(2n)!!)
/// C_{2n+1} ∝ λ^n f(2n+1)!! √((2n)!!/(2n+1)!!)
/// ```
///
/// truncated at slot `n_max` and normalized by the sum of squares. Factorial
/// ratios are exact rationals; the f-products are accumulated as compensated
/// log sums.
pub fn oracle_state_closed_form(
    spec: &NonlinearSpec,
    params: StateParams,
    n_max: usize,
) -> Result<CoefficientTable> {
    if params.lambda.im != 0.0 || !params.lambda.re.is_finite() {
        return Err(Error::InvalidParameter("closed-form oracle needs a real λ".into()));
    }
    if n_max > CLOSED_FORM_MAX_SLOTS {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} exceeds {CLOSED_FORM_MAX_SLOTS}"
        )));
    }
    let lambda = params.lambda.re;
    let table = |amps: Vec<Complex64>| {
        CoefficientTable::from_amplitudes(params.parity, amps)
            .map(|t| t.with_source(Some(*spec), params.lambda))
    };
    if lambda == 0.0 {
        let mut amps = vec![ZERO; n_max + 1];
        amps[0] = Complex64::new(1.0, 0.0);
        return table(amps);
    }

    let x = DyadicRational::from_f64(spec.x());
    let offset = params.parity.offset();
    let ln_lambda = lambda.abs().ln();
    let mut signs = Vec::with_capacity(n_max + 1);
    let mut logs = Vec::with_capacity(n_max + 1);
    let mut f_log = Compensated::default();
    let mut f_sign = 1i8;
    // ratio numerator/denominator: (2n−1)!!/(2n)!! or (2n)!!/(2n+1)!!
    let mut ratio_num = BigInt::one();
    let mut ratio_den = BigInt::one();
    for n in 0..=n_max as u64 {
        if n > 0 {
            let k = 2 * n + offset;
            let (s, l) = ln_f(spec, k, &x)?;
            if s == 0 {
                // f(k) = 0 terminates the series
                break;
            }
            f_sign *= s;
            f_log.add(l);
            ratio_num *= k - 1;
            ratio_den *= k;
        }
        let (_, ln_ratio_val) = ln_ratio(&ratio_num, &ratio_den);
        let lambda_sign = if lambda < 0.0 && n % 2 == 1 { -1 } else { 1 };
        signs.push(f_sign * lambda_sign);
        logs.push(n as f64 * ln_lambda + f_log.value() + 0.5 * ln_ratio_val);
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut amps: Vec<Complex64> = logs
        .iter()
        .zip(&signs)
        .map(|(l, s)| Complex64::new(f64::from(*s) * (l - peak).exp(), 0.0))
        .collect();
    amps.resize(n_max + 1, ZERO);
    table(amps)
}
