//! Operator moments and the non-classicality diagnostics built from them.
//!
//! All moments come from one pass over the Fock amplitudes:
//!
//! ```text
//! ⟨N⟩        = Σ k |c_k|²
//! ⟨a†²a²⟩    = Σ k(k−1) |c_k|²
//! ⟨a²a†²⟩    = Σ (k+1)(k+2) |c_k|²
//! ⟨a^p⟩      = Σ c*_{k−p} c_k √(k!/(k−p)!)      p = 1, 2, 4
//! ```
//!
//! For the even and odd tables only same-parity neighbours couple, so ⟨a⟩
//! vanishes identically and ⟨a²⟩, ⟨a⁴⟩ pair adjacent and next-adjacent slots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{neumaier_sum, CoefficientTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// ⟨a†a⟩
    pub mean_n: f64,
    /// ⟨a†²a²⟩ = ⟨N(N−1)⟩
    pub mean_aa: f64,
    /// ⟨a²⟩
    pub mean_a2: Complex64,
    /// ⟨a⁴⟩
    pub mean_a4: Complex64,
    /// ⟨a²a†²⟩
    pub mean_a2ad2: f64,
    /// ⟨a⟩
    pub mean_a: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    /// g²(0); `None` for the vacuum.
    pub g2: Option<f64>,
    /// Mandel Q; `None` for the vacuum.
    pub q: Option<f64>,
    pub d1_1: f64,
    pub d2_1: f64,
    pub d1_2: f64,
    pub d2_2: f64,
    pub mean_n: f64,
    pub lambda_abs: f64,
    pub n_max: usize,
    pub tail_bound: f64,
}

/// Moments of the state held in `table`.
pub fn moments(table: &CoefficientTable) -> MomentSet {
    moments_from_fock(&table.to_fock_vector())
}

/// Moments of an arbitrary pure state given by dense Fock amplitudes
/// (entry k is the amplitude of |k⟩). The vector is assumed normalized.
pub fn moments_from_fock(c: &[Complex64]) -> MomentSet {
    let weight = |k: usize| -> f64 { c[k].norm_sqr() };
    let mean_n = neumaier_sum((0..c.len()).map(|k| k as f64 * weight(k)));
    let mean_aa = neumaier_sum((0..c.len()).map(|k| (k as f64) * (k as f64 - 1.0) * weight(k)));
    let mean_a2ad2 =
        neumaier_sum((0..c.len()).map(|k| (k as f64 + 1.0) * (k as f64 + 2.0) * weight(k)));

    MomentSet {
        mean_n,
        mean_aa,
        mean_a2: lowering_moment(c, 2),
        mean_a4: lowering_moment(c, 4),
        mean_a2ad2,
        mean_a: lowering_moment(c, 1),
    }
}

/// ⟨a^p⟩ = Σ_k c*_{k−p} c_k √(k (k−1) ⋯ (k−p+1)).
fn lowering_moment(c: &[Complex64], p: usize) -> Complex64 {
    let terms = (p..c.len()).filter_map(|k| {
        let lo = c[k - p];
        let hi = c[k];
        if lo == Complex64::new(0.0, 0.0) || hi == Complex64::new(0.0, 0.0) {
            return None;
        }
        let falling: f64 = (0..p).map(|s| (k - s) as f64).product();
        Some(lo.conj() * hi * falling.sqrt())
    });
    let (re, im): (Vec<f64>, Vec<f64>) = terms.map(|z| (z.re, z.im)).unzip();
    Complex64::new(neumaier_sum(re), neumaier_sum(im))
}

/// g²(0) = ⟨a†²a²⟩ / ⟨N⟩².
pub fn g2(m: &MomentSet) -> Result<f64> {
    if m.mean_n <= 0.0 {
        return Err(Error::VacuumState);
    }
    Ok(m.mean_aa / (m.mean_n * m.mean_n))
}

/// Mandel Q = (⟨N²⟩ − ⟨N⟩²)/⟨N⟩ − 1 = ⟨a†²a²⟩/⟨N⟩ − ⟨N⟩.
pub fn mandel_q(m: &MomentSet) -> Result<f64> {
    if m.mean_n <= 0.0 {
        return Err(Error::VacuumState);
    }
    Ok(m.mean_aa / m.mean_n - m.mean_n)
}

/// Quadrature squeezing degrees (D¹(1), D²(1)) = (4⟨ΔX₁²⟩ − 1, 4⟨ΔX₂²⟩ − 1).
/// A value in [−1, 0) means the quadrature is squeezed.
pub fn squeezing_degrees(m: &MomentSet) -> (f64, f64) {
    let base = 2.0 * m.mean_n;
    let a2 = 2.0 * m.mean_a2.re;
    // ⟨a + a†⟩ = 2 Re⟨a⟩, ⟨(a − a†)/i⟩ = 2 Im⟨a⟩
    let shift1 = (2.0 * m.mean_a.re).powi(2);
    let shift2 = (2.0 * m.mean_a.im).powi(2);
    (base + a2 - shift1, base - a2 - shift2)
}

/// Amplitude-squared squeezing degrees (D¹(2), D²(2)), normalized by
/// ⟨a²a†²⟩ − ⟨a†²a²⟩ = 4⟨N⟩ + 2.
pub fn amp_squared_degrees(m: &MomentSet) -> (f64, f64) {
    let denom = m.mean_a2ad2 - m.mean_aa;
    // ⟨a†⁴ + a⁴⟩ = 2 Re⟨a⁴⟩;  ⟨a†² + a²⟩ = 2 Re⟨a²⟩;  ⟨(a² − a†²)/i⟩ = 2 Im⟨a²⟩
    let sym = 2.0 * m.mean_a4.re;
    let y1 = 2.0 * m.mean_a2.re;
    let y2 = 2.0 * m.mean_a2.im;
    let d1 = (2.0 * m.mean_aa + sym - y1 * y1) / denom;
    let d2 = (2.0 * m.mean_aa - sym - y2 * y2) / denom;
    (d1, d2)
}

/// Every diagnostic for one table. g² and Q are `None` for the vacuum.
pub fn stats(table: &CoefficientTable) -> StatsReport {
    let m = moments(table);
    let (d1_1, d2_1) = squeezing_degrees(&m);
    let (d1_2, d2_2) = amp_squared_degrees(&m);
    StatsReport {
        g2: g2(&m).ok(),
        q: mandel_q(&m).ok(),
        d1_1,
        d2_1,
        d1_2,
        d2_2,
        mean_n: m.mean_n,
        lambda_abs: table.lambda().norm(),
        n_max: table.n_max(),
        tail_bound: table.tail_bound(),
    }
}
