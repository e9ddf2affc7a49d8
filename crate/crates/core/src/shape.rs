//! Shape diagnostics for `L_n`: divided differences of `f_mu`, closed-form
//! first and second derivatives, the `BV_mu` norm and its contraction under
//! `L_n`, and the monotone-in-`n` ordering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{AnalyticFunction, Grid, TransformedFunction};
use crate::numerics::weighted_sum;
use crate::operators::{LogApproximant, LogarithmicOperator};
use crate::warp::Mu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DifferenceOrder {
    First = 1,
    Second = 2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DividedDifferences {
    pub order: DifferenceOrder,
    /// `Δ1 f_mu(k/n)` for `k < n`, or `Δ2 f_mu(k/n)` for `k < n - 1`.
    pub values: Vec<f64>,
}

fn first_differences(fmu: &[f64]) -> Vec<f64> {
    let n = (fmu.len() - 1) as f64;
    fmu.windows(2).map(|w| n * (w[1] - w[0])).collect()
}

fn second_differences(fmu: &[f64]) -> Vec<f64> {
    let n = (fmu.len() - 1) as f64;
    fmu.windows(3).map(|w| n * n * (w[2] - 2.0 * w[1] + w[0])).collect()
}

pub fn divided_diff(f: &AnalyticFunction, mu: Mu, n: usize, order: DifferenceOrder) -> Result<DividedDifferences> {
    if n < order as usize {
        return Err(Error::Parameter(format!("degree {n} is below difference order {}", order as usize)));
    }
    let fmu = TransformedFunction::new(f.clone(), mu).node_samples(n);
    let values = match order {
        DifferenceOrder::First => first_differences(&fmu),
        DifferenceOrder::Second => second_differences(&fmu),
    };
    Ok(DividedDifferences { order, values })
}

/// Derivative data of a bound `L_n f`: the difference tables driving the
/// closed-form derivative formulas.
#[derive(Debug, Clone)]
pub struct DerivativeTables {
    approx: LogApproximant,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl DerivativeTables {
    pub fn new(approx: LogApproximant) -> Self {
        let d1 = first_differences(approx.transformed_node_values());
        let d2 = second_differences(approx.transformed_node_values());
        Self { approx, d1, d2 }
    }

    pub fn approximant(&self) -> &LogApproximant {
        &self.approx
    }

    /// `(L_n f / ln_mu)'(x) = a_n'(x) sum_k Δ1 f_mu(k/n) p_{n-1,k}(a_n(x))`.
    pub fn ratio_d1(&self, x: f64) -> f64 {
        let w = self.approx.warp();
        w.node_d1(x) * weighted_sum(&self.d1, w.node(x))
    }

    /// `(L_n f)'(x)`.
    pub fn d1(&self, x: f64) -> f64 {
        let w = self.approx.warp();
        let mu = w.mu();
        self.approx.eval_ratio(x) / (1.0 + mu.get() + x) + mu.ln_shift(x) * self.ratio_d1(x)
    }

    /// `(L_n f / ln_mu)''(x) = a_n'' S1 + (n-1)/n a_n'^2 S2`.
    pub fn ratio_d2(&self, x: f64) -> f64 {
        let w = self.approx.warp();
        let a = w.node(x);
        let s1 = weighted_sum(&self.d1, a);
        let n = w.n() as f64;
        let s2 = if self.d2.is_empty() { 0.0 } else { weighted_sum(&self.d2, a) };
        let a1 = w.node_d1(x);
        w.node_d2(x) * s1 + (n - 1.0) / n * a1 * a1 * s2
    }
}

fn tables(f: &AnalyticFunction, mu: Mu, n: usize) -> Result<DerivativeTables> {
    Ok(DerivativeTables::new(LogarithmicOperator::new(mu, n)?.apply(f)))
}

/// `(L_n f)'(x)` from the closed-form derivative formula.
pub fn lnf_derivative(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> Result<f64> {
    crate::error::check_unit(x, "x")?;
    Ok(tables(f, mu, n)?.d1(x))
}

/// `(L_n f / ln_mu)''(x)`.
pub fn second_derivative_ratio(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> Result<f64> {
    crate::error::check_unit(x, "x")?;
    Ok(tables(f, mu, n)?.ratio_d2(x))
}

/// `||f||_{BV_mu} = Var(f / ln_mu) + |f(0)|` on a given partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BvNorm {
    pub variation: f64,
    pub f0: f64,
    pub norm: f64,
}

fn check_partition(partition: &[f64]) -> Result<()> {
    if partition.len() < 2 || partition[0] != 0.0 || partition[partition.len() - 1] != 1.0 {
        return Err(Error::Input("partition must start at 0 and end at 1".into()));
    }
    if let Some(i) = partition.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Input(format!(
            "partition is not strictly increasing at index {}: {} >= {}",
            i + 1,
            partition[i],
            partition[i + 1]
        )));
    }
    Ok(())
}

/// `BV_mu` norm from samples `f(x_i)` on the partition `0 = x_0 < ... < x_m = 1`.
pub fn bv_norm_sampled(partition: &[f64], values: &[f64], mu: Mu) -> Result<BvNorm> {
    check_partition(partition)?;
    if values.len() != partition.len() {
        return Err(Error::Input(format!(
            "{} samples for a partition of {} points",
            values.len(),
            partition.len()
        )));
    }
    let fmu: Vec<f64> = partition.iter().zip(values).map(|(&x, v)| v / mu.ln_shift(x)).collect();
    let variation = crate::numerics::sum_compensated(fmu.windows(2).map(|w| (w[1] - w[0]).abs()));
    let f0 = values[0];
    Ok(BvNorm { variation, f0, norm: variation + f0.abs() })
}

/// `BV_mu` norm of `f` on a partition (a lower bound of the true norm).
pub fn bv_norm(f: &AnalyticFunction, mu: Mu, partition: &[f64]) -> Result<BvNorm> {
    check_partition(partition)?;
    let values: Vec<f64> = partition.iter().map(|&x| f.eval(x)).collect();
    bv_norm_sampled(partition, &values, mu)
}

#[derive(Debug, Clone, Serialize)]
pub struct BvContractionReport {
    pub n: usize,
    pub norm_f: BvNorm,
    pub norm_lnf: BvNorm,
    pub partition_size: usize,
    pub turning_points: Vec<f64>,
    pub holds: bool,
}

const BV_FINE_POINTS: usize = 4001;

/// Turning points of `L_n f / ln_mu`: sign changes of its derivative on a
/// fine grid, refined by bisection.
fn turning_points(t: &DerivativeTables, fine: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev = (fine[0], t.ratio_d1(fine[0]));
    for &x in &fine[1..] {
        let d = t.ratio_d1(x);
        if prev.1 * d < 0.0 {
            let (mut lo, mut hi, mut dlo) = (prev.0, x, prev.1);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let dm = t.ratio_d1(mid);
                if dm * dlo > 0.0 {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = (x, d);
    }
    out
}

/// Checks `||L_n f||_{BV_mu} <= ||f||_{BV_mu} + 1e-9`, both norms on a shared
/// partition made of a fine uniform grid, the nodes `k/n`, and the turning
/// points of `L_n f / ln_mu`.
pub fn bv_contraction_check(f: &AnalyticFunction, mu: Mu, n: usize) -> Result<BvContractionReport> {
    let t = tables(f, mu, n)?;
    let fine = Grid::uniform(BV_FINE_POINTS)?;
    let turning = turning_points(&t, fine.nodes());
    let mut partition: Vec<f64> = fine.nodes().to_vec();
    partition.extend((0..=n).map(|k| k as f64 / n as f64));
    partition.extend(turning.iter().copied());
    partition.sort_by(f64::total_cmp);
    partition.dedup();
    let norm_f = bv_norm(f, mu, &partition)?;
    let lnf: Vec<f64> = partition.iter().map(|&x| t.approximant().eval(x)).collect();
    let norm_lnf = bv_norm_sampled(&partition, &lnf, mu)?;
    Ok(BvContractionReport {
        n,
        holds: norm_lnf.norm <= norm_f.norm + 1e-9,
        norm_f,
        norm_lnf,
        partition_size: partition.len(),
        turning_points: turning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    /// `f_mu` increasing and convex: `L_n f >= L_{n+1} f >= f`.
    IncreasingConvex,
    /// `f_mu` decreasing and concave: `L_n f <= L_{n+1} f <= f`.
    DecreasingConcave,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneInNReport {
    pub class: ShapeClass,
    pub degrees: Vec<usize>,
    /// Smallest signed margin of `L_n f - L_{n+1} f` (sign-adjusted for the class).
    pub min_step_margin: f64,
    /// Smallest signed margin of `L_{n+1} f - f` (sign-adjusted).
    pub min_limit_margin: f64,
    pub violations: usize,
    pub holds: bool,
}

const CHAIN_TOL: f64 = 1e-10;

/// Verifies the shape class of `f_mu` on the grid, then checks the
/// three-term chain at every interior grid point for each `n` in `n_list`.
pub fn monotone_in_n_check(
    f: &AnalyticFunction,
    mu: Mu,
    n_list: &[usize],
    grid: &Grid,
    class: ShapeClass,
) -> Result<MonotoneInNReport> {
    let sign = match class {
        ShapeClass::IncreasingConvex => 1.0,
        ShapeClass::DecreasingConcave => -1.0,
    };
    let tf = TransformedFunction::new(f.clone(), mu);
    let fmu: Vec<f64> = grid.nodes().iter().map(|&x| sign * tf.eval(x)).collect();
    let scale = fmu.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let shape_tol = 1e-12 * scale;
    if let Some(i) = fmu.windows(2).position(|w| w[1] - w[0] < -shape_tol) {
        return Err(Error::Precondition(format!(
            "f_mu is not {} near x = {}",
            if sign > 0.0 { "increasing" } else { "decreasing" },
            grid.nodes()[i]
        )));
    }
    if let Some(i) = fmu.windows(3).position(|w| w[2] - 2.0 * w[1] + w[0] < -shape_tol) {
        return Err(Error::Precondition(format!(
            "f_mu is not {} near x = {}",
            if sign > 0.0 { "convex" } else { "concave" },
            grid.nodes()[i + 1]
        )));
    }
    let interior: Vec<f64> = grid.nodes().iter().copied().filter(|&x| x > 0.0 && x < 1.0).collect();
    let mut min_step = f64::INFINITY;
    let mut min_limit = f64::INFINITY;
    let mut violations = 0;
    for &n in n_list {
        let ln = LogarithmicOperator::new(mu, n)?.apply(f);
        let ln1 = LogarithmicOperator::new(mu, n + 1)?.apply(f);
        for &x in &interior {
            let (a, b, c) = (ln.eval(x), ln1.eval(x), f.eval(x));
            let step = sign * (a - b);
            let limit = sign * (b - c);
            min_step = min_step.min(step);
            min_limit = min_limit.min(limit);
            if step < -CHAIN_TOL || limit < -CHAIN_TOL {
                violations += 1;
            }
        }
    }
    Ok(MonotoneInNReport {
        class,
        degrees: n_list.to_vec(),
        min_step_margin: min_step,
        min_limit_margin: min_limit,
        violations,
        holds: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{ln_mu_function, square};
    use approx::assert_abs_diff_eq;

    fn mu(v: f64) -> Mu {
        Mu::new(v).unwrap()
    }

    fn times_ln(m: Mu, g: fn(f64) -> f64) -> AnalyticFunction {
        AnalyticFunction::new("g*ln_mu", move |x| g(x) * m.ln_shift(x))
    }

    #[test]
    fn differences_of_constant_and_linear_f_mu() {
        let m = mu(1.0);
        let d = divided_diff(&ln_mu_function(m), m, 6, DifferenceOrder::First).unwrap();
        assert_eq!(d.values.len(), 6);
        assert!(d.values.iter().all(|v| v.abs() < 1e-13));
        let lin = times_ln(m, |x| x);
        let d1 = divided_diff(&lin, m, 6, DifferenceOrder::First).unwrap();
        let d2 = divided_diff(&lin, m, 6, DifferenceOrder::Second).unwrap();
        assert_eq!(d2.values.len(), 5);
        assert!(d1.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(d2.values.iter().all(|v| v.abs() < 1e-10));
        assert!(divided_diff(&lin, m, 1, DifferenceOrder::Second).is_err());
    }

    #[test]
    fn derivative_of_reproduced_logarithm() {
        let m = mu(1.0);
        for x in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(
                lnf_derivative(&ln_mu_function(m), m, 12, x).unwrap(),
                1.0 / (2.0 + x),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn second_ratio_for_linear_f_mu_is_scaled_warp_curvature() {
        let m = mu(0.5);
        let lin = times_ln(m, |x| 3.0 * x);
        let ctx = crate::warp::WarpContext::new(m, 8).unwrap();
        for x in [0.2, 0.7] {
            assert_abs_diff_eq!(
                second_derivative_ratio(&lin, m, 8, x).unwrap(),
                3.0 * ctx.node_d2(x),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn bv_norm_cases() {
        let m = mu(1.0);
        let p = Grid::uniform(101).unwrap();
        let b = bv_norm(&ln_mu_function(m), m, p.nodes()).unwrap();
        assert!(b.variation < 1e-13);
        assert_abs_diff_eq!(b.norm, 2f64.ln(), epsilon = 1e-13);
        let sq = times_ln(m, |x| x * x);
        let b = bv_norm(&sq, m, p.nodes()).unwrap();
        assert_abs_diff_eq!(b.variation, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.norm, 1.0, epsilon = 1e-12);
        assert!(matches!(bv_norm(&sq, m, &[0.0, 0.6, 0.4, 1.0]), Err(Error::Input(_))));
        assert!(matches!(bv_norm(&sq, m, &[0.1, 1.0]), Err(Error::Input(_))));
    }

    #[test]
    fn bv_contraction_for_reproduced_function() {
        let m = mu(1.0);
        let r = bv_contraction_check(&ln_mu_function(m), m, 10).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.norm_f.norm, 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.norm_lnf.norm, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn shape_precondition_is_enforced() {
        let m = mu(1.0);
        let grid = Grid::uniform(51).unwrap();
        let r = monotone_in_n_check(&square(), m, &[5], &grid, ShapeClass::DecreasingConcave);
        assert!(matches!(r, Err(Error::Precondition(_))));
        let linear = times_ln(m, |x| x);
        let ok = monotone_in_n_check(&linear, m, &[1, 2, 3], &grid, ShapeClass::IncreasingConvex).unwrap();
        assert!(ok.holds);
    }

    #[test]
    fn increasing_negative_f_mu_can_give_decreasing_lnf() {
        // f = -ln_mu: f_mu = -1 is nondecreasing, yet L_n f = -ln_mu decreases
        let m = mu(1.0);
        let f = times_ln(m, |_| -1.0);
        for x in [0.0, 0.4, 1.0] {
            let d = lnf_derivative(&f, m, 12, x).unwrap();
            assert_abs_diff_eq!(d, -1.0 / (2.0 + x), epsilon = 1e-12);
        }
        // the ratio stays nondecreasing
        let t = tables(&f, m, 12).unwrap();
        assert!(t.ratio_d1(0.4).abs() < 1e-12);
    }
}
