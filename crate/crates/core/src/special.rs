//! Log-space special functions and combinatorial coefficients.
//!
//! Every factorial-type quantity is returned as a natural logarithm. Rising
//! factorials of moderate length are accumulated term by term so that ratios
//! of neighbouring weights stay accurate at large sample sizes; long ones fall
//! back to differences of `ln Γ`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Products longer than this are evaluated through `ln Γ` differences.
const DIRECT_PRODUCT_LIMIT: usize = 512;

/// Arguments are shifted upward until they reach this value before the
/// asymptotic series are applied.
const ASYMPTOTIC_SHIFT: f64 = 8.0;

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

// B_{2k} / (2k) for k = 1..8.
const DIGAMMA_SERIES: [f64; 8] =
    [1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0, -3617.0 / 8160.0];

// B_{2k} for k = 1..8.
const TRIGAMMA_SERIES: [f64; 8] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];

fn check_positive<T: Real>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} requires a positive finite argument, got {x}")))
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    check_positive(x, "ln_gamma")?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(ASYMPTOTIC_SHIFT);
    let mut z = x;
    let mut log_prod = T::zero();
    let mut prod = T::one();
    while z < shift {
        prod = prod * z;
        z = z + T::one();
    }
    if prod != T::one() {
        log_prod = prod.ln();
    }
    let half = T::lit(0.5);
    let inv = z.recip();
    let inv2 = inv * inv;
    let mut series = T::zero();
    let mut pow = inv;
    for &c in STIRLING.iter() {
        series = series + T::lit(c) * pow;
        pow = pow * inv2;
    }
    (z - half) * z.ln() - z + half * T::lit(std::f64::consts::TAU).ln() + series - log_prod
}

/// Digamma ψ₀(x) = d/dx ln Γ(x), for `x > 0`.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    check_positive(x, "digamma")?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(ASYMPTOTIC_SHIFT);
    let mut z = x;
    let mut acc = T::zero();
    while z < shift {
        acc = acc - z.recip();
        z = z + T::one();
    }
    let inv2 = (z * z).recip();
    let mut pow = inv2;
    let mut series = T::zero();
    for &c in DIGAMMA_SERIES.iter() {
        series = series + T::lit(c) * pow;
        pow = pow * inv2;
    }
    acc + z.ln() - T::lit(0.5) / z - series
}

/// Trigamma ψ₁(x) = d/dx ψ₀(x), for `x > 0`.
pub fn trigamma<T: Real>(x: T) -> Result<T> {
    check_positive(x, "trigamma")?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(ASYMPTOTIC_SHIFT);
    let mut z = x;
    let mut acc = T::zero();
    while z < shift {
        acc = acc + (z * z).recip();
        z = z + T::one();
    }
    let inv = z.recip();
    let inv2 = inv * inv;
    let mut pow = inv2 * inv;
    let mut series = T::zero();
    for &c in TRIGAMMA_SERIES.iter() {
        series = series + T::lit(c) * pow;
        pow = pow * inv2;
    }
    acc + inv + T::lit(0.5) * inv2 + series
}

/// `ln (x)_y = ln x(x+1)…(x+y-1)`; `y = 0` gives `0`.
pub fn log_rising<T: Real>(x: T, y: usize) -> Result<T> {
    if y == 0 {
        return Ok(T::zero());
    }
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain(format!("rising factorial ({x})_{y} has a nonpositive factor")));
    }
    Ok(log_rising_unchecked(x, y))
}

pub(crate) fn log_rising_unchecked<T: Real>(x: T, y: usize) -> T {
    if y == 0 {
        return T::zero();
    }
    if y <= DIRECT_PRODUCT_LIMIT {
        let mut acc = T::zero();
        let mut prod = T::one();
        let mut z = x;
        // Group factors into partial products to save logarithms, flushing
        // before the product can overflow.
        let flush = T::max_value().sqrt();
        for _ in 0..y {
            prod = prod * z;
            if prod > flush || prod < flush.recip() {
                acc = acc + prod.ln();
                prod = T::one();
            }
            z = z + T::one();
        }
        acc + prod.ln()
    } else {
        ln_gamma_unchecked(x + T::from_count(y)) - ln_gamma_unchecked(x)
    }
}

/// `ln (x)_y` for a real length `y ≥ 0`, i.e. `ln Γ(x+y) − ln Γ(x)`.
///
/// Integer lengths take the exact product path.
pub fn log_rising_real<T: Real>(x: T, y: T) -> Result<T> {
    if y < T::zero() || !y.is_finite() {
        return Err(Error::domain(format!("rising factorial length must be >= 0, got {y}")));
    }
    if y == y.floor() {
        if let Some(n) = y.to_usize() {
            return log_rising(x, n);
        }
    }
    check_positive(x, "log_rising_real")?;
    Ok(ln_gamma_unchecked(x + y) - ln_gamma_unchecked(x))
}

/// `ln (x)_{y↑a} = ln x(x+a)…(x+(y-1)a)`.
pub fn log_gen_rising<T: Real>(x: T, y: usize, a: T) -> Result<T> {
    if a == T::one() {
        return log_rising(x, y);
    }
    let mut acc = T::zero();
    let mut factor = x;
    for j in 0..y {
        if !(factor > T::zero()) {
            return Err(Error::domain(format!(
                "generalized rising factorial ({x})_({y}↑{a}) has nonpositive factor at j={j}"
            )));
        }
        acc = acc + factor.ln();
        factor = factor + a;
    }
    Ok(acc)
}

/// `ln n!`.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    log_rising_unchecked(T::one(), n)
}

/// Log of the Lah number `L(n,k) = (n!/k!) C(n-1,k-1)`.
pub fn log_lah<T: Real>(n: usize, k: usize) -> Result<T> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("Lah number needs 1 <= k <= n, got n={n}, k={k}")));
    }
    let lf = |m: usize| ln_factorial::<T>(m);
    Ok(lf(n) - lf(k) + lf(n - 1) - lf(k - 1) - lf(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rising_examples() {
        assert_relative_eq!(log_rising(1.0, 3).unwrap(), 6f64.ln(), max_relative = 1e-15);
        assert_eq!(log_rising(3.7_f64, 0).unwrap(), 0.0);
        assert_relative_eq!(log_rising(0.5, 3).unwrap(), 1.875f64.ln(), max_relative = 1e-15);
        assert!(log_rising(-0.5_f64, 2).is_err());
        assert!(log_rising(0.0_f64, 1).is_err());
    }

    #[test]
    fn rising_recurrence() {
        for &x in &[0.3_f64, 1.0, 2.5, 17.0, 1.0e4] {
            for y in 0..=500usize {
                let lhs = log_rising(x, y + 1).unwrap();
                let rhs = log_rising(x, y).unwrap() + (x + y as f64).ln();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-13, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn rising_long_matches_gamma_path() {
        let direct = log_rising(2.5_f64, DIRECT_PRODUCT_LIMIT).unwrap();
        let via_gamma = ln_gamma(2.5 + DIRECT_PRODUCT_LIMIT as f64).unwrap() - ln_gamma(2.5).unwrap();
        assert_relative_eq!(direct, via_gamma, max_relative = 1e-13);
    }

    #[test]
    fn gen_rising_examples() {
        assert_relative_eq!(log_gen_rising(0.7_f64, 1, 0.2).unwrap(), 0.7f64.ln());
        assert_relative_eq!(log_gen_rising(2.0_f64, 3, 1.0).unwrap(), 24f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(log_gen_rising(0.5_f64, 2, 0.3).unwrap(), 0.4f64.ln(), max_relative = 1e-15);
        assert!(log_gen_rising(0.5_f64, 3, -0.25).is_err());
    }

    #[test]
    fn digamma_reference_values() {
        let table = [
            (0.5, -1.963_510_026_021_423_5),
            (1.0, -0.577_215_664_901_532_9),
            (1.5, 0.036_489_973_978_576_52),
            (2.0, 0.422_784_335_098_467_1),
            (10.0, 2.251_752_589_066_721),
        ];
        for (x, want) in table {
            assert_relative_eq!(digamma(x).unwrap(), want, max_relative = 1e-12);
        }
        assert_relative_eq!(digamma(2.0).unwrap() - digamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(digamma(0.0_f64).is_err());
    }

    #[test]
    fn trigamma_reference_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        let table = [
            (0.5, pi2 / 2.0),
            (1.0, pi2 / 6.0),
            (1.5, pi2 / 2.0 - 4.0),
            (2.0, pi2 / 6.0 - 1.0),
            (10.0, 0.105_166_335_681_685_75),
        ];
        for (x, want) in table {
            assert_relative_eq!(trigamma(x).unwrap(), want, max_relative = 1e-12);
        }
        assert!(trigamma(-1.0_f64).is_err());
    }

    #[test]
    fn digamma_large_arguments() {
        for &x in &[1.0e3_f64, 1.0e5, 1.0e6] {
            // ψ(x+1) − ψ(x) = 1/x holds to high relative accuracy far out.
            let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert_relative_eq!(d, 1.0 / x, max_relative = 1e-6);
            assert_relative_eq!(
                trigamma(x).unwrap(),
                1.0 / x + 0.5 / (x * x) + 1.0 / (6.0 * x * x * x),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn ln_gamma_values() {
        // the shifted Stirling sum carries a few ulps of absolute error at the zeros
        assert_relative_eq!(ln_gamma(1.0_f64).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(2.0_f64).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5_f64).unwrap(), std::f64::consts::PI.sqrt().ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(11.0_f64).unwrap(), 3628800f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(1.0e-8_f64).unwrap(), 18.420_680_738_180_21, max_relative = 1e-12);
    }

    #[test]
    fn lah_small_values() {
        assert_eq!(log_lah::<f64>(4, 4).unwrap(), 0.0);
        assert_eq!(log_lah::<f64>(1, 1).unwrap(), 0.0);
        assert_relative_eq!(log_lah::<f64>(3, 2).unwrap(), 6f64.ln(), max_relative = 1e-14);
        assert!(log_lah::<f64>(3, 0).is_err());
        assert!(log_lah::<f64>(3, 4).is_err());
    }

    /// Counts partitions of [n] into k blocks, each block linearly ordered.
    fn lah_by_enumeration(n: usize, k: usize) -> u64 {
        // Insert elements one at a time: element i either starts a new
        // block or is inserted into one of the (i-1) + blocks positions.
        fn rec(i: usize, n: usize, blocks: usize, k: usize) -> u64 {
            if i > n {
                return u64::from(blocks == k);
            }
            let placed = i - 1;
            let mut total = rec(i + 1, n, blocks + 1, k);
            if blocks > 0 {
                // positions: before any element of a block or after the last one
                total += (placed + blocks) as u64 * rec(i + 1, n, blocks, k);
            }
            total
        }
        rec(1, n, 0, k)
    }

    #[test]
    fn lah_matches_enumeration() {
        for n in 1..=8 {
            for k in 1..=n {
                let want = lah_by_enumeration(n, k) as f64;
                let got = log_lah::<f64>(n, k).unwrap().exp();
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn f32_path_compiles_and_is_close() {
        let x: f32 = digamma(3.0_f32).unwrap();
        assert!((x - 0.922_784_3).abs() < 1e-5);
    }
}
