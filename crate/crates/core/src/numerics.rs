//! Binomial basis weights `p_{n,k}(x) = C(n,k) x^k (1-x)^(n-k)` and the
//! classical quantities built on them: integrals, algebraic moments, tail
//! sums and the first absolute moment.
//!
//! Weights are evaluated in log space so that degrees in the thousands
//! neither overflow the binomial nor underflow the powers. The endpoints
//! `x = 0` and `x = 1` are exact Kronecker cases.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{check_unit, Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

const LN_FACTORIAL_TABLE: usize = 8192;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACTORIAL_TABLE + 1);
        let mut acc = CompensatedSum::new();
        table.push(0.0);
        for i in 1..=LN_FACTORIAL_TABLE {
            acc.add((i as f64).ln());
            table.push(acc.value());
        }
        table
    })
}

/// `ln(m!)`. Tabulated up to 8192, Stirling series beyond.
pub fn ln_factorial(m: usize) -> f64 {
    if m <= LN_FACTORIAL_TABLE {
        return ln_factorial_table()[m];
    }
    let x = m as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// `ln C(n, k)` for `k <= n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// A validated evaluation point of the basis: degree `n`, index `k`, abscissa `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisPoint {
    n: usize,
    k: usize,
    x: f64,
}

impl BasisPoint {
    pub fn new(n: usize, k: usize, x: f64) -> Result<Self> {
        if n == 0 && k != 0 {
            return Err(Error::Domain(format!("index k = {k} exceeds degree 0")));
        }
        if k > n {
            return Err(Error::Domain(format!("index k = {k} exceeds degree n = {n}")));
        }
        check_unit(x, "x")?;
        Ok(Self { n, k, x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

#[inline]
fn weight_unchecked(n: usize, k: usize, ln_x: f64, ln_1mx: f64) -> f64 {
    let lw = ln_binomial(n, k) + k as f64 * ln_x + (n - k) as f64 * ln_1mx;
    if lw < -745.2 {
        0.0
    } else {
        lw.exp().min(1.0)
    }
}

/// `p_{n,k}(x)`.
pub fn binomial_weight(p: BasisPoint) -> f64 {
    let BasisPoint { n, k, x } = p;
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    weight_unchecked(n, k, x.ln(), (-x).ln_1p())
}

/// All `n + 1` weights `p_{n,0}(y), ..., p_{n,n}(y)`.
///
/// `y` is expected in `[0, 1]`; callers validate.
pub fn basis_weights(n: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    fill_basis_weights(n, y, &mut out);
    out
}

/// Writes the degree-`n` weights at `y` into `out[..=n]`.
pub fn fill_basis_weights(n: usize, y: f64, out: &mut [f64]) {
    debug_assert!(out.len() > n);
    if y <= 0.0 {
        out[..=n].fill(0.0);
        out[0] = 1.0;
        return;
    }
    if y >= 1.0 {
        out[..=n].fill(0.0);
        out[n] = 1.0;
        return;
    }
    let ln_y = y.ln();
    let ln_1my = (-y).ln_1p();
    for (k, w) in out[..=n].iter_mut().enumerate() {
        *w = weight_unchecked(n, k, ln_y, ln_1my);
    }
}

/// `sum_k values[k] * p_{n,k}(y)` with `n = values.len() - 1`, compensated.
pub fn weighted_sum(values: &[f64], y: f64) -> f64 {
    assert!(!values.is_empty(), "weighted_sum needs at least one value");
    let n = values.len() - 1;
    if y <= 0.0 {
        return values[0];
    }
    if y >= 1.0 {
        return values[n];
    }
    let ln_y = y.ln();
    let ln_1my = (-y).ln_1p();
    values
        .iter()
        .enumerate()
        .map(|(k, v)| v * weight_unchecked(n, k, ln_y, ln_1my))
        .collect::<CompensatedSum>()
        .value()
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first split into 16 panels so that sharply peaked
/// integrands are not mistaken for flat ones by the first error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..PANELS {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        acc.add(simpson_step(&f, lo, hi, flo, fmid, fhi, whole, tol / PANELS as f64, 48));
    }
    acc.value()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫₀¹ p_{n,k}(x) dx` by adaptive quadrature. The closed form is `1/(n+1)`.
pub fn weight_integral(n: usize, k: usize) -> Result<f64> {
    BasisPoint::new(n, k, 0.0)?;
    Ok(integrate(
        |x| binomial_weight(BasisPoint { n, k, x }),
        0.0,
        1.0,
        1e-13,
    ))
}

/// Algebraic moment `T_{n,s}(x) = sum_k (k - n x)^s p_{n,k}(x)`.
pub fn algebraic_moment(n: usize, s: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("algebraic moments need n >= 1".into()));
    }
    check_unit(x, "x")?;
    let nx = n as f64 * x;
    let weights = basis_weights(n, x);
    Ok(weights
        .iter()
        .enumerate()
        .map(|(k, w)| (k as f64 - nx).powi(s as i32) * w)
        .collect::<CompensatedSum>()
        .value())
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentGrowthRow {
    pub n: usize,
    /// `max_x T_{n,order}(x) / n^(order/2)` over the grid.
    pub max_ratio: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentGrowthReport {
    pub order: u32,
    pub rows: Vec<MomentGrowthRow>,
    /// Largest ratio over all degrees; an empirical stand-in for `A_s`.
    pub sup_ratio: f64,
    /// The ratio never exceeds its value at the smallest degree by more than 5%.
    pub bounded: bool,
}

/// Empirical check of `0 <= T_{n,2s}(x) <= A_s n^s`: reports the scaled
/// maximum of the even moment of the given `order = 2s` for each degree.
pub fn moment_growth_check(n_list: &[usize], order: u32, grid: &[f64]) -> Result<MomentGrowthReport> {
    if order % 2 != 0 {
        return Err(Error::Parameter(format!("moment order must be even, got {order}")));
    }
    if n_list.is_empty() || grid.is_empty() {
        return Err(Error::Input("degree list and grid must be non-empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("degree list must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let scale = (n as f64).powi((order / 2) as i32);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &x in grid {
            let r = algebraic_moment(n, order, x)? / scale;
            if r > best.0 {
                best = (r, x);
            }
        }
        rows.push(MomentGrowthRow { n, max_ratio: best.0, argmax: best.1 });
    }
    let sup_ratio = rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    let bounded = sup_ratio <= rows[0].max_ratio * 1.05 + 1e-12;
    Ok(MomentGrowthReport { order, rows, sup_ratio, bounded })
}

/// `sum_{|k/n - x| > delta} p_{n,k}(x)`.
pub fn tail_sum(n: usize, x: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    check_unit(x, "x")?;
    let weights = basis_weights(n, x);
    let nf = n.max(1) as f64;
    Ok(weights
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64 / nf - x).abs() > delta)
        .map(|(_, w)| *w)
        .collect::<CompensatedSum>()
        .value())
}

/// `sum_k |y - k/n| p_{n,k}(y)`; always below `1 / (2 sqrt n)`.
pub fn first_absolute_moment(n: usize, y: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("first absolute moment needs n >= 1".into()));
    }
    check_unit(y, "y")?;
    let nf = n as f64;
    let weights = basis_weights(n, y);
    Ok(weights
        .iter()
        .enumerate()
        .map(|(k, w)| (y - k as f64 / nf).abs() * w)
        .collect::<CompensatedSum>()
        .value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_and_endpoints() {
        assert_abs_diff_eq!(binomial_weight(BasisPoint::new(2, 1, 0.5).unwrap()), 0.5, epsilon = 1e-15);
        assert_eq!(binomial_weight(BasisPoint::new(5, 0, 0.0).unwrap()), 1.0);
        assert_eq!(binomial_weight(BasisPoint::new(5, 3, 0.0).unwrap()), 0.0);
        assert_eq!(binomial_weight(BasisPoint::new(5, 5, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn invalid_points_are_domain_errors() {
        assert!(matches!(BasisPoint::new(3, 4, 0.5), Err(Error::Domain(_))));
        assert!(matches!(BasisPoint::new(3, 1, 1.5), Err(Error::Domain(_))));
        assert!(matches!(BasisPoint::new(3, 1, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn ln_factorial_matches_product_and_stirling_join() {
        let mut exact = 0.0f64;
        for m in 1..=20usize {
            exact += (m as f64).ln();
            assert_abs_diff_eq!(ln_factorial(m), exact, epsilon = 1e-12);
        }
        // continuity across the table boundary
        let a = ln_factorial(LN_FACTORIAL_TABLE);
        let b = ln_factorial(LN_FACTORIAL_TABLE + 1);
        assert_abs_diff_eq!(b - a, ((LN_FACTORIAL_TABLE + 1) as f64).ln(), epsilon = 1e-9);
    }

    #[test]
    fn partition_of_unity_at_n50() {
        let s = sum_compensated(basis_weights(50, 0.3));
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn integrals() {
        assert_abs_diff_eq!(weight_integral(3, 0).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(weight_integral(0, 0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(weight_integral(3, 5).is_err());
    }

    #[test]
    fn low_order_moments() {
        assert_abs_diff_eq!(algebraic_moment(20, 0, 0.37).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(algebraic_moment(20, 1, 0.37).unwrap(), 0.0, epsilon = 1e-12);
        assert!(algebraic_moment(0, 2, 0.5).is_err());
    }

    #[test]
    fn tail_edge_cases() {
        assert_eq!(tail_sum(30, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(tail_sum(30, 0.4, 1.0).unwrap(), 0.0);
        assert!(tail_sum(30, 0.4, 0.0).is_err());
        let t = tail_sum(100, 0.5, 0.25).unwrap();
        assert!(t > 0.0 && t < 1e-4);
    }

    #[test]
    fn absolute_moment_vanishes_at_endpoint() {
        assert_eq!(first_absolute_moment(10, 0.0).unwrap(), 0.0);
        assert!(first_absolute_moment(25, 0.5).unwrap() < 0.1);
    }

    #[test]
    fn moment_growth_rejects_odd_orders() {
        assert!(moment_growth_check(&[10, 20], 3, &[0.5]).is_err());
        assert!(moment_growth_check(&[20, 10], 2, &[0.5]).is_err());
    }

    #[test]
    fn compensated_sum_recovers_lost_bits() {
        let s = sum_compensated([1.0, 1e-16, 1e-16, -1.0]);
        assert_abs_diff_eq!(s, 2e-16, epsilon = 1e-30);
    }
}
