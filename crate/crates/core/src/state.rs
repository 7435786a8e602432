//! Normalized Fock-basis coefficient tables of the even and odd states.
//!
//! The unnormalized coefficients follow from the eigenvalue recursion
//!
//! ```text
//! C_{2n}   = λ f(2n)   √((2n−1)/(2n))   C_{2n−2},   C_0 = 1   (even)
//! C_{2n+1} = λ f(2n+1) √((2n)/(2n+1))   C_{2n−1},   C_1 = 1   (odd)
//! ```
//!
//! which is carried in log-magnitude, sign and phase. The series is cut at
//! the first slot past the probability peak where the geometric estimate of
//! the discarded normalized amplitudes, Σ|c_m| over m > n, drops below the
//! requested tolerance, then normalized so that Σ|amps|² = 1 (relative to
//! the largest term). Moments are bilinear in neighbouring amplitudes, so
//! bounding the amplitudes rather than the probability keeps them stable;
//! the discarded probability is at most tol².
//!
//! Laguerre ratios in f oscillate, so a short run of falling terms does not
//! prove convergence. A candidate cut at slot n is kept only if the terms
//! actually computed out to slot 2n + 4, and on to the next falling
//! stretch, stay below the tolerance together with the geometric estimate
//! there. No cut lies beyond (n_cap − 4)/2. The reported tail bound is the
//! discarded probability: measured mass plus the geometric estimate.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlfunc::{FDoubleFactorial, NonlinearFunction, NonlinearSpec, Parity};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_N_CAP: usize = 20_000;

/// Number of trailing term ratios whose maximum sets the geometric tail ratio.
const RATIO_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub parity: Parity,
    /// Eigenvalue λ.
    pub lambda: Complex64,
}

impl StateParams {
    pub fn new(parity: Parity, lambda: Complex64) -> Self {
        StateParams { parity, lambda }
    }

    pub fn real(parity: Parity, lambda: f64) -> Self {
        StateParams {
            parity,
            lambda: Complex64::new(lambda, 0.0),
        }
    }
}

/// Normalized amplitudes of one even or odd state. Entry n of `amps` is the
/// amplitude of |2n⟩ (even) or |2n+1⟩ (odd).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    parity: Parity,
    amps: Vec<Complex64>,
    tail_bound: f64,
    spec: Option<NonlinearSpec>,
    lambda: Complex64,
}

impl CoefficientTable {
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Highest superposition slot retained.
    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    /// Highest Fock index carried by the table.
    pub fn max_fock_index(&self) -> u64 {
        self.parity.fock_index(self.n_max())
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Upper estimate of the probability discarded by truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn spec(&self) -> Option<NonlinearSpec> {
        self.spec
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn params(&self) -> StateParams {
        StateParams::new(self.parity, self.lambda)
    }

    /// Σ|amps|².
    pub fn norm_sqr(&self) -> f64 {
        neumaier_sum(self.amps.iter().map(|a| a.norm_sqr()))
    }

    /// Iterator of (Fock index, amplitude).
    pub fn fock_entries(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(move |(n, a)| (self.parity.fock_index(n), *a))
    }

    /// Dense amplitudes indexed by Fock number 0..=max_fock_index.
    pub fn to_fock_vector(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.max_fock_index() as usize + 1];
        for (k, a) in self.fock_entries() {
            v[k as usize] = a;
        }
        v
    }

    /// Table from explicit slot amplitudes, normalized on construction.
    /// Used for hand-made states such as pure Fock states.
    pub fn from_amplitudes(parity: Parity, amps: Vec<Complex64>) -> Result<Self> {
        let norm = neumaier_sum(amps.iter().map(|a| a.norm_sqr())).sqrt();
        if amps.is_empty() || !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("amplitudes must have a finite non-zero norm".into()));
        }
        Ok(CoefficientTable {
            parity,
            amps: amps.into_iter().map(|a| a / norm).collect(),
            tail_bound: 0.0,
            spec: None,
            lambda: Complex64::new(0.0, 0.0),
        })
    }

    /// Attaches the generating parameters to a hand-made table.
    pub fn with_source(mut self, spec: Option<NonlinearSpec>, lambda: Complex64) -> Self {
        self.spec = spec;
        self.lambda = lambda;
        self
    }

    /// The pure Fock state |k⟩.
    pub fn fock_state(k: u64) -> Self {
        let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        let mut amps = vec![Complex64::new(0.0, 0.0); (k / 2) as usize + 1];
        amps[(k / 2) as usize] = Complex64::new(1.0, 0.0);
        CoefficientTable {
            parity,
            amps,
            tail_bound: 0.0,
            spec: None,
            lambda: Complex64::new(0.0, 0.0),
        }
    }
}

/// Compensated summation.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Builds the normalized table for the nonlinear function `spec`.
pub fn build_state(
    spec: &NonlinearSpec,
    params: StateParams,
    tol: f64,
    n_cap: usize,
) -> Result<CoefficientTable> {
    build_state_with(spec, params, tol, n_cap)
}

/// [`build_state`] for any [`NonlinearFunction`].
pub fn build_state_with<F: NonlinearFunction + ?Sized>(
    f: &F,
    params: StateParams,
    tol: f64,
    n_cap: usize,
) -> Result<CoefficientTable> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidParameter(format!("tol must lie in (0, 1e-6], got {tol}")));
    }
    if n_cap < 1 {
        return Err(Error::InvalidParameter("n_cap must be at least 1".into()));
    }
    let lambda = params.lambda;
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
    }
    let parity = params.parity;
    let spec = f.spec();

    if lambda.norm() == 0.0 {
        return Ok(CoefficientTable {
            parity,
            amps: vec![Complex64::new(1.0, 0.0)],
            tail_bound: 0.0,
            spec,
            lambda,
        });
    }

    let log_lambda_sq = 2.0 * lambda.norm().ln();
    // log of unnormalized probability |C|² per slot, and sign of the f-product
    let mut log_p: Vec<f64> = vec![0.0];
    let mut signs: Vec<i8> = vec![1];
    let mut log_max = 0.0f64;
    // Σ exp(log_p − log_max), rescaled whenever the maximum moves
    let mut rel_sum = 1.0f64;
    let mut ratios: VecDeque<f64> = VecDeque::with_capacity(RATIO_WINDOW);
    let mut amp_tail = f64::INFINITY;
    let mut cut: Option<Cut> = None;
    let mut accepted: Option<(usize, f64)> = None;

    let mut product = FDoubleFactorial::new(f, parity);
    for n in 1..=n_cap {
        let factor = product.advance()?;
        if factor.is_zero() {
            // every later coefficient carries this factor
            accepted = Some(match cut {
                Some(c) => (c.n, c.discarded()),
                None => (n - 1, 0.0),
            });
            break;
        }
        let k = parity.fock_index(n) as f64;
        let prev = log_p[n - 1];
        let lp = prev + log_lambda_sq + 2.0 * factor.logmag() + ((k - 1.0) / k).ln();
        log_p.push(lp);
        signs.push(signs[n - 1] * factor.sign());

        if lp > log_max {
            rel_sum = rel_sum * (log_max - lp).exp() + 1.0;
            log_max = lp;
        } else {
            rel_sum += (lp - log_max).exp();
        }
        if ratios.len() == RATIO_WINDOW {
            ratios.pop_front();
        }
        ratios.push_back(lp - prev);

        let mut tail = f64::INFINITY;
        amp_tail = f64::INFINITY;
        if lp < log_max {
            let worst = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if worst < 0.0 {
                let rho = worst.exp();
                let rho_amp = (0.5 * worst).exp();
                tail = (lp - log_max).exp() * rho / (1.0 - rho) / rel_sum;
                amp_tail = (0.5 * (lp - log_max)).exp() * rho_amp / (1.0 - rho_amp) / rel_sum.sqrt();
            }
        }

        if let Some(c) = cut.as_mut() {
            c.extra += (lp - c.log_max).exp();
            c.extra_amp += (0.5 * (lp - c.log_max)).exp();
            let keep = if c.discarded_amp() > tol {
                c.advance(&log_p, tol)
            } else if n >= c.check_at && amp_tail.is_finite() {
                // on a rising stretch the check waits for the next fall
                if c.discarded_amp() + amp_tail <= tol {
                    accepted = Some((c.n, c.discarded() + tail));
                    break;
                }
                c.advance(&log_p, tol - amp_tail)
            } else {
                true
            };
            if !keep || c.check_at > n_cap {
                cut = None;
            }
        } else if amp_tail < tol && 2 * n + RATIO_WINDOW <= n_cap {
            cut = Some(Cut {
                n,
                log_max,
                rel_sum,
                extra: 0.0,
                extra_amp: 0.0,
                check_at: 2 * n + RATIO_WINDOW,
            });
        }
    }

    let Some((n_max, tail)) = accepted else {
        return Err(Error::NotConverged {
            n_cap,
            achieved_tail: amp_tail,
        });
    };
    log_p.truncate(n_max + 1);
    signs.truncate(n_max + 1);
    let log_max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let weights: Vec<f64> = log_p.iter().map(|lp| (lp - log_max).exp()).collect();
    let scale = neumaier_sum(weights.iter().copied()).sqrt().recip();
    let theta = lambda.arg();
    let real_lambda = lambda.im == 0.0;
    let amps = weights
        .iter()
        .zip(&signs)
        .enumerate()
        .map(|(n, (w, s))| {
            let mag = f64::from(*s) * w.sqrt() * scale;
            if real_lambda {
                let phase = if lambda.re < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                Complex64::new(mag * phase, 0.0)
            } else {
                Complex64::from_polar(mag, n as f64 * theta)
            }
        })
        .collect();

    Ok(CoefficientTable {
        parity,
        amps,
        tail_bound: tail,
        spec,
        lambda,
    })
}

/// A tentative truncation point awaiting confirmation.
struct Cut {
    n: usize,
    log_max: f64,
    rel_sum: f64,
    /// Σ|C|² of the terms computed past `n`, in the frame of `log_max`.
    extra: f64,
    /// Σ|C| of the same terms.
    extra_amp: f64,
    check_at: usize,
}

impl Cut {
    fn discarded(&self) -> f64 {
        self.extra / self.rel_sum
    }

    fn discarded_amp(&self) -> f64 {
        self.extra_amp / self.rel_sum.sqrt()
    }

    /// Moves the cut forward until the terms computed past it fit in
    /// `budget`. Returns false if no slot before the last one does.
    fn advance(&mut self, log_p: &[f64], budget: f64) -> bool {
        let last = log_p.len() - 1;
        let moved = self.n;
        while self.n < last && !(self.discarded_amp() <= budget) {
            self.n += 1;
            let lp = log_p[self.n] - self.log_max;
            self.extra = (self.extra - lp.exp()).max(0.0);
            self.extra_amp = (self.extra_amp - (0.5 * lp).exp()).max(0.0);
        }
        if self.n != moved {
            let rest = &log_p[self.n + 1..];
            self.extra = neumaier_sum(rest.iter().map(|lp| (lp - self.log_max).exp()));
            self.extra_amp = neumaier_sum(rest.iter().map(|lp| (0.5 * (lp - self.log_max)).exp()));
        }
        self.check_at = 2 * self.n + RATIO_WINDOW;
        self.n < last && self.discarded_amp() <= budget
    }
}

/// Photon-number distribution as (Fock index, probability).
pub fn photon_distribution(table: &CoefficientTable) -> Vec<(u64, f64)> {
    table.fock_entries().map(|(k, a)| (k, a.norm_sqr())).collect()
}
