//! Wigner function of the even and odd states.
//!
//! With Δ(α) = (2/π) D(2α) (−1)^N the Wigner function of a pure state with
//! Fock amplitudes c_k is
//!
//! ```text
//! W(α) = (2/π) Σ_{j,k} c*_j c_k (−1)^k χ_{jk}(2α),   χ_{jk}(β) = ⟨j|D(β)|k⟩
//! ```
//!
//! where the displacement matrix elements are
//!
//! ```text
//! χ_{jk}(β) = √(k!/j!) β^{j−k}     L_k^{j−k}(|β|²) e^{−|β|²/2}   (j ≥ k)
//! χ_{jk}(β) = √(j!/k!) (−β*)^{k−j} L_j^{k−j}(|β|²) e^{−|β|²/2}   (j < k)
//! ```
//!
//! The parity factor is taken at the physical Fock index, so W(0) = +2/π for
//! the vacuum and −2/π for |1⟩.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlfunc::{NonlinearSpec, Parity};
use crate::specfun::{laguerre, log_factorial, LaguerreSeq};
use crate::state::CoefficientTable;

/// Largest tolerated contribution of the two outermost shells of the double sum.
pub const SHELL_TOLERANCE: f64 = 1e-10;

/// A phase-space point α = re + i·im.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub re: f64,
    pub im: f64,
}

impl PhasePoint {
    pub fn new(re: f64, im: f64) -> Self {
        PhasePoint { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for PhasePoint {
    fn from(z: Complex64) -> Self {
        PhasePoint::new(z.re, z.im)
    }
}

/// Unit phase of β, or 1 at the origin.
fn unit_phase(beta: Complex64) -> Complex64 {
    let r = beta.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        beta / r
    }
}

/// ⟨j|D(α)|i⟩ with D(α) = exp(α a† − α* a).
pub fn chi(j: u64, i: u64, alpha: PhasePoint) -> Complex64 {
    let beta = alpha.to_complex();
    let x = beta.norm_sqr();
    let (lo, hi) = if j >= i { (i, j) } else { (j, i) };
    let d = hi - lo;
    if d > 0 && x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lag = laguerre(lo, d as u32, x);
    if lag.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = 0.5 * (log_factorial(lo) - log_factorial(hi))
        + if d > 0 { d as f64 * beta.norm().ln() } else { 0.0 }
        - 0.5 * x
        + lag.logmag();
    let base = if j >= i {
        unit_phase(beta)
    } else {
        -unit_phase(beta).conj()
    };
    base.powu(d as u32) * (f64::from(lag.sign()) * log_mag.exp())
}

/// One Wigner evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub value: f64,
    /// Imaginary part of the raw double sum (zero up to round-off).
    pub imag_residue: f64,
    /// Magnitude of the contribution of the two outermost shells.
    pub shell_residual: f64,
}

/// Raw double sum at α with residue and shell diagnostics.
pub fn wigner_sample(table: &CoefficientTable, alpha: PhasePoint) -> WignerSample {
    let amps = table.amps();
    let parity = table.parity();
    let slots = amps.len();
    let beta = 2.0 * alpha.to_complex();
    let x = beta.norm_sqr();
    let log_abs_beta = beta.norm().ln();
    let unit = unit_phase(beta);
    let damping = -0.5 * x;
    let sign_of = |k: u64| if k % 2 == 0 { 1.0 } else { -1.0 };

    let shell_start = if table.tail_bound() > 0.0 {
        table.n_max().saturating_sub(1).max(1)
    } else {
        usize::MAX
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut shell = Complex64::new(0.0, 0.0);

    // slot offset Δ = |m − n| fixes the Laguerre upper index d = 2Δ, so one
    // recurrence per Δ serves the whole diagonal
    for delta in 0..slots {
        let d = 2 * delta as u64;
        if d > 0 && x == 0.0 {
            break;
        }
        let mut seq = LaguerreSeq::new(d as u32, x);
        let up = unit.powu(d as u32);
        let down = (-unit.conj()).powu(d as u32);
        for lo_slot in 0..slots - delta {
            let hi_slot = lo_slot + delta;
            let lo = parity.fock_index(lo_slot);
            let hi = parity.fock_index(hi_slot);
            while seq.next_index() < lo {
                seq.next();
            }
            let lag = seq.next().expect("infinite sequence");
            if lag.is_zero() {
                continue;
            }
            let log_mag = 0.5 * (log_factorial(lo) - log_factorial(hi))
                + if d > 0 { d as f64 * log_abs_beta } else { 0.0 }
                + damping
                + lag.logmag();
            let mag = f64::from(lag.sign()) * log_mag.exp();
            // χ_{hi,lo} (row ≥ column) and χ_{lo,hi}
            let chi_hi_lo = up * mag;
            let mut term = amps[hi_slot].conj() * amps[lo_slot] * sign_of(lo) * chi_hi_lo;
            if delta > 0 {
                let chi_lo_hi = down * mag;
                term += amps[lo_slot].conj() * amps[hi_slot] * sign_of(hi) * chi_lo_hi;
            }
            total += term;
            if hi_slot >= shell_start {
                shell += term;
            }
        }
    }

    WignerSample {
        value: FRAC_2_PI * total.re,
        imag_residue: FRAC_2_PI * total.im,
        shell_residual: FRAC_2_PI * shell.norm(),
    }
}

/// W(α) for the state in `table`.
///
/// Fails with [`Error::WignerNotConverged`] when the outermost shells of the
/// double sum still contribute more than [`SHELL_TOLERANCE`].
pub fn wigner_point(table: &CoefficientTable, alpha: PhasePoint) -> Result<f64> {
    let s = wigner_sample(table, alpha);
    if s.shell_residual > SHELL_TOLERANCE {
        return Err(Error::WignerNotConverged {
            residual: s.shell_residual,
        });
    }
    Ok(s.value)
}

/// Rectangular lattice re_min + k·step, im_min + l·step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub step: f64,
}

impl GridGeometry {
    pub fn square(half_width: f64, step: f64) -> Self {
        GridGeometry {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max, self.step]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.step <= 0.0 {
            return Err(Error::InvalidParameter("grid step must be positive and bounds finite".into()));
        }
        if self.re_max <= self.re_min || self.im_max <= self.im_min {
            return Err(Error::InvalidParameter("grid ranges must be non-degenerate".into()));
        }
        Ok(())
    }

    fn count(min: f64, max: f64, step: f64) -> usize {
        ((max - min) / step + 1e-9).floor() as usize + 1
    }

    pub fn n_re(&self) -> usize {
        Self::count(self.re_min, self.re_max, self.step)
    }

    pub fn n_im(&self) -> usize {
        Self::count(self.im_min, self.im_max, self.step)
    }

    pub fn re_at(&self, col: usize) -> f64 {
        self.re_min + col as f64 * self.step
    }

    pub fn im_at(&self, row: usize) -> f64 {
        self.im_min + row as f64 * self.step
    }
}

/// Wigner values on a lattice, row-major with rows indexed by Im α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub geometry: GridGeometry,
    pub values: Vec<f64>,
    pub parity: Parity,
    pub spec: Option<NonlinearSpec>,
    pub lambda: Complex64,
    pub n_max: usize,
    pub tail_bound: f64,
    /// Largest |Im| of the raw double sum over the grid.
    pub max_imag_residue: f64,
}

impl WignerGrid {
    pub fn n_re(&self) -> usize {
        self.geometry.n_re()
    }

    pub fn n_im(&self) -> usize {
        self.geometry.n_im()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_re() + col]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Σ W · step².
    pub fn riemann_sum(&self) -> f64 {
        let s = self.geometry.step;
        crate::state::neumaier_sum(self.values.iter().copied()) * s * s
    }

    /// Largest |W| on the outer edge of the grid.
    pub fn boundary_max_abs(&self) -> f64 {
        let (rows, cols) = (self.n_im(), self.n_re());
        let mut m = 0.0f64;
        for row in 0..rows {
            for col in 0..cols {
                if row == 0 || col == 0 || row + 1 == rows || col + 1 == cols {
                    m = m.max(self.value(row, col).abs());
                }
            }
        }
        m
    }
}

/// Evaluates [`wigner_point`] over the lattice. Rows run in parallel on the
/// current rayon pool; the result does not depend on scheduling.
pub fn wigner_grid(table: &CoefficientTable, geometry: GridGeometry) -> Result<WignerGrid> {
    geometry.validate()?;
    let (rows, cols) = (geometry.n_im(), geometry.n_re());
    let row_results: Vec<(Vec<f64>, f64)> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let im = geometry.im_at(row);
            let mut out = Vec::with_capacity(cols);
            let mut residue = 0.0f64;
            for col in 0..cols {
                let s = wigner_sample(table, PhasePoint::new(geometry.re_at(col), im));
                if s.shell_residual > SHELL_TOLERANCE {
                    return Err(Error::WignerNotConverged {
                        residual: s.shell_residual,
                    });
                }
                residue = residue.max(s.imag_residue.abs());
                out.push(s.value);
            }
            Ok((out, residue))
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(rows * cols);
    let mut max_imag_residue = 0.0f64;
    for (row, residue) in row_results {
        values.extend(row);
        max_imag_residue = max_imag_residue.max(residue);
    }
    Ok(WignerGrid {
        geometry,
        values,
        parity: table.parity(),
        spec: table.spec(),
        lambda: table.lambda(),
        n_max: table.n_max(),
        tail_bound: table.tail_bound(),
        max_imag_residue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{build_state, StateParams};

    #[test]
    fn chi_examples() {
        let c00 = chi(0, 0, PhasePoint::new(1.0, 0.0));
        assert!((c00.re - (-0.5f64).exp()).abs() < 1e-15 && c00.im == 0.0);
        let c10 = chi(1, 0, PhasePoint::new(0.5, 0.0));
        assert!((c10.re - 0.5 * (-0.125f64).exp()).abs() < 1e-15);
        // L_2^0(0.09) e^{−0.045}
        let c22 = chi(2, 2, PhasePoint::new(0.0, 0.3));
        assert!((c22.re - 0.82405 * (-0.045f64).exp()).abs() < 1e-15);
        assert!(c22.im.abs() < 1e-17);
        // ⟨0|D(β)|1⟩ = −β* e^{−|β|²/2}
        let b = Complex64::new(0.3, -0.7);
        let c01 = chi(0, 1, b.into());
        let expect = -b.conj() * (-0.5 * b.norm_sqr()).exp();
        assert!((c01 - expect).norm() < 1e-15);
    }

    #[test]
    fn chi_hermitian_symmetry() {
        for &(re, im) in &[(0.4, -1.2), (2.5, 3.0), (-3.9, 0.1)] {
            let a = PhasePoint::new(re, im);
            let neg = PhasePoint::new(-re, -im);
            for i in 0..=40 {
                for j in 0..=40 {
                    let lhs = chi(i, j, a);
                    let rhs = chi(j, i, neg).conj();
                    assert!((lhs - rhs).norm() <= 1e-12, "i={i} j={j} α=({re},{im})");
                }
            }
        }
    }

    #[test]
    fn fock_state_values() {
        let vac = CoefficientTable::fock_state(0);
        assert!((wigner_point(&vac, PhasePoint::new(0.0, 0.0)).unwrap() - FRAC_2_PI).abs() < 1e-15);
        let one = CoefficientTable::fock_state(1);
        assert!((wigner_point(&one, PhasePoint::new(0.0, 0.0)).unwrap() + FRAC_2_PI).abs() < 1e-15);
        // zero circle of |1⟩ at |α| = 1/2
        assert!(wigner_point(&one, PhasePoint::new(0.5, 0.0)).unwrap().abs() < 1e-15);
        assert!(wigner_point(&one, PhasePoint::new(0.0, -0.5)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn diagonal_sum_matches_pointwise_chi() {
        let spec = NonlinearSpec::new(1, 0, 1.0, 0.6).unwrap();
        let t = build_state(&spec, StateParams::real(Parity::Odd, 0.7), 1e-14, 1000).unwrap();
        let alpha = PhasePoint::new(0.35, -0.8);
        let beta = PhasePoint::new(0.7, -1.6);
        let mut naive = Complex64::new(0.0, 0.0);
        for (j, cj) in t.fock_entries() {
            for (k, ck) in t.fock_entries() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                naive += cj.conj() * ck * sign * chi(j, k, beta);
            }
        }
        let s = wigner_sample(&t, alpha);
        assert!((s.value - FRAC_2_PI * naive.re).abs() < 1e-14);
        assert!(s.imag_residue.abs() < 1e-14);
    }

    #[test]
    fn under_truncated_table_is_flagged() {
        let spec = NonlinearSpec::new(1, 0, 1.0, 0.2).unwrap();
        let t = build_state(&spec, StateParams::real(Parity::Even, 0.1), 1e-6, 1000).unwrap();
        assert!(matches!(
            wigner_point(&t, PhasePoint::new(1.0, 1.0)),
            Err(Error::WignerNotConverged { .. })
        ));
    }

    #[test]
    fn geometry_counts() {
        let g = GridGeometry::square(3.0, 0.05);
        assert_eq!(g.n_re(), 121);
        assert!((g.re_at(120) - 3.0).abs() < 1e-12);
        assert!(GridGeometry::square(1.0, 0.0).validate().is_err());
    }
}
