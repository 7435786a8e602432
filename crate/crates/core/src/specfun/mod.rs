//! Log-factorials, double factorials and generalized Laguerre polynomials
//! carried in extended range.

mod ext_real;
mod laguerre;

pub use ext_real::{ExtReal, F64Conversion};
pub use laguerre::{laguerre, LaguerreSeq};

/// ln(n!).
///
/// Exact product for n ≤ 20, Stirling series beyond (relative error well
/// under 1e-15 for n > 20).
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        let prod: u64 = (1..=n).product();
        return (prod as f64).ln();
    }
    let x = n as f64 + 1.0;
    // ln Γ(x) for x = n + 1
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// ln(n!!) with the conventions 0!! = 1 and (−1)!! = 1.
pub fn log_double_factorial(n: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    if n <= 33 {
        let prod: u128 = (1..=n).rev().step_by(2).map(u128::from).product();
        return (prod as f64).ln();
    }
    let ln2 = std::f64::consts::LN_2;
    if n % 2 == 0 {
        let k = n / 2;
        k as f64 * ln2 + log_factorial(k)
    } else {
        // (2k−1)!! = (2k)! / (2^k k!)
        let k = (n + 1) / 2;
        log_factorial(2 * k) - k as f64 * ln2 - log_factorial(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factorial_examples() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!((log_factorial(5) - 120f64.ln()).abs() < 1e-14);
        // 20! = 2432902008176640000 exactly
        assert!((log_factorial(20) - 42.335616460753485).abs() < 1e-13);
    }

    #[test]
    fn log_factorial_stirling_branch_is_continuous() {
        // ln(21!) = ln(20!) + ln 21
        let direct = log_factorial(20) + 21f64.ln();
        assert!((log_factorial(21) - direct).abs() < 1e-13 * direct);
        // lgamma(3001) from a 40-digit reference
        assert!((log_factorial(3000) - 21024.024853045548).abs() < 1e-12 * 21024.0);
        assert!((log_factorial(1_000_000) - 12815518.384658169).abs() < 1e-12 * 1.3e7);
    }

    #[test]
    fn log_factorial_matches_cumulative_sum() {
        let mut acc = 0.0;
        for n in 1..=400u64 {
            acc += (n as f64).ln();
            assert!((log_factorial(n) - acc).abs() <= 1e-12 * acc.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn log_double_factorial_examples() {
        assert_eq!(log_double_factorial(0), 0.0);
        assert!((log_double_factorial(6) - 48f64.ln()).abs() < 1e-15);
        assert!((log_double_factorial(7) - 105f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn even_double_factorial_identity() {
        let ln2 = std::f64::consts::LN_2;
        for n in 0..=10_000u64 {
            let lhs = log_double_factorial(2 * n);
            let rhs = n as f64 * ln2 + log_factorial(n);
            assert!((lhs - rhs).abs() <= 1e-10, "n = {n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn odd_double_factorial_branches_agree() {
        // crossover between the exact product and the factorial identity
        for n in (35..=61u64).step_by(2) {
            let mut acc = 0.0;
            let mut k = n;
            while k > 1 {
                acc += (k as f64).ln();
                k -= 2;
            }
            assert!((log_double_factorial(n) - acc).abs() < 1e-12 * acc, "n = {n}");
        }
    }
}
