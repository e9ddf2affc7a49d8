//! Quantitative behaviour of `L_n`: modulus of continuity and the uniform
//! error bound, the asymptotic (Voronovskaja) residual, the second-order
//! operator `D` whose kernel is the saturation class, and the inverse
//! theorem diagnostic.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::function::{AnalyticFunction, Grid, TransformedFunction};
use crate::operators::LogarithmicOperator;
use crate::warp::{gamma_n, Mu, WarpContext};

/// Grid estimate of `omega(f, delta)`; a lower bound of the true modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub omega: f64,
    pub grid_step: f64,
}

/// `omega(f, delta)` on the default resolution: `max(10^4, ceil(10/delta))` intervals.
pub fn modulus_of_continuity(f: &AnalyticFunction, delta: f64) -> Result<ModulusEstimate> {
    modulus_of_continuity_fn(&|x| f.eval(x), delta, default_intervals(delta))
}

fn default_intervals(delta: f64) -> usize {
    if delta > 0.0 {
        ((10.0 / delta).ceil() as usize).max(10_000)
    } else {
        10_000
    }
}

/// `sup { |f(x) - f(y)| : |x - y| <= delta }` over a uniform grid with the
/// given number of intervals, via a sliding-window max/min.
pub fn modulus_of_continuity_fn(
    f: &dyn Fn(f64) -> f64,
    delta: f64,
    intervals: usize,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    if intervals == 0 {
        return Err(Error::Parameter("modulus grid needs at least one interval".into()));
    }
    let step = 1.0 / intervals as f64;
    let values: Vec<f64> = (0..=intervals).map(|i| f(i as f64 * step)).collect();
    // nudge so that delta = m/N counts m whole steps despite rounding
    let window = ((delta * intervals as f64) * (1.0 + 1e-12)).floor() as usize;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut omega = 0.0f64;
    for (j, &v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&i| values[i] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| values[i] >= v) {
            minq.pop_back();
        }
        minq.push_back(j);
        while maxq.front().is_some_and(|&i| i + window < j) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i + window < j) {
            minq.pop_front();
        }
        let spread = values[maxq[0]] - values[minq[0]];
        omega = omega.max(spread);
    }
    Ok(ModulusEstimate { delta, omega, grid_step: step })
}

/// `ln(2+mu) * omega(f_mu, 1/sqrt n) * (2 + sqrt(n) gamma_n)`, an upper bound
/// for `sup |L_n f - f|`.
pub fn error_bound(f: &AnalyticFunction, mu: Mu, n: usize) -> Result<f64> {
    let ctx = WarpContext::new(mu, n)?;
    let tf = TransformedFunction::new(f.clone(), mu);
    let delta = 1.0 / (n as f64).sqrt();
    let omega = modulus_of_continuity_fn(&|x| tf.eval(x), delta, default_intervals(delta))?.omega;
    let gamma = gamma_n(&ctx).gamma;
    Ok((2.0 + mu.get()).ln() * omega * (2.0 + (n as f64).sqrt() * gamma))
}

/// `max over the grid of |L_n f(x) - f(x)|`.
pub fn sup_error(f: &AnalyticFunction, mu: Mu, n: usize, grid: &Grid) -> Result<f64> {
    let op = LogarithmicOperator::new(mu, n)?.apply(f);
    Ok(grid
        .nodes()
        .par_iter()
        .map(|&x| (op.eval(x) - f.eval(x)).abs())
        .reduce(|| 0.0, f64::max))
}

/// `1/2 ln_mu(x) (x - x^2) [f_mu'/(1+mu) + f_mu'']`, shared by the
/// Voronovskaja limit and `D`.
fn saturation_kernel(tf: &TransformedFunction, x: f64) -> Result<f64> {
    check_unit(x, "x")?;
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    let mu = tf.mu();
    let (_, g1, g2) = tf.jet(x)?;
    Ok(0.5 * mu.ln_shift(x) * (x - x * x) * (g1 / (1.0 + mu.get()) + g2))
}

/// Limit of `n (L_n f(x) - f(x))` for `f` in `C^2`.
pub fn voronovskaja_limit(f: &AnalyticFunction, mu: Mu, x: f64) -> Result<f64> {
    saturation_kernel(&TransformedFunction::new(f.clone(), mu), x)
}

/// The second-order operator `D(f)(x)`; identical to [`voronovskaja_limit`].
pub fn differential_operator_d(f: &AnalyticFunction, mu: Mu, x: f64) -> Result<f64> {
    saturation_kernel(&TransformedFunction::new(f.clone(), mu), x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoronovskajaReport {
    pub n: usize,
    pub x: f64,
    /// `n (L_n f(x) - f(x))`.
    pub scaled_residual: f64,
    pub limit_value: f64,
    pub deviation: f64,
}

pub fn voronovskaja_residual(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> Result<VoronovskajaReport> {
    let limit_value = voronovskaja_limit(f, mu, x)?;
    let op = LogarithmicOperator::new(mu, n)?.apply(f);
    let scaled_residual = n as f64 * (op.eval(x) - f.eval(x));
    Ok(VoronovskajaReport {
        n,
        x,
        scaled_residual,
        limit_value,
        deviation: (scaled_residual - limit_value).abs(),
    })
}

/// Coefficients of the saturation class element `A ln_mu + B ln_mu e^{-x/(1+mu)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationCoefficients {
    pub a: f64,
    pub b: f64,
}

/// `A ln_mu(x) + B ln_mu(x) e^{-x/(1+mu)}` with closed-form derivatives.
pub fn saturation_solution(c: SaturationCoefficients, mu: Mu) -> AnalyticFunction {
    let SaturationCoefficients { a, b } = c;
    let rate = 1.0 / (1.0 + mu.get());
    // f = L * q with q = a + b e^{-rate x}
    let q = move |x: f64| {
        let e = b * (-rate * x).exp();
        (a + e, -rate * e, rate * rate * e)
    };
    AnalyticFunction::new(format!("saturation:{a}:{b}"), move |x| mu.ln_shift(x) * q(x).0).with_derivatives(
        move |x| {
            let (l0, l1, _) = mu.ln_shift_jet(x);
            let (q0, q1, _) = q(x);
            l1 * q0 + l0 * q1
        },
        move |x| {
            let (l0, l1, l2) = mu.ln_shift_jet(x);
            let (q0, q1, q2) = q(x);
            l2 * q0 + 2.0 * l1 * q1 + l0 * q2
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthClass {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseRow {
    pub n: usize,
    /// `max over the grid of n |L_n f - f|`.
    pub scaled_sup_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseTheoremReport {
    pub rows: Vec<InverseRow>,
    /// `max over the grid of |f_mu' + (1+mu) f_mu''|`.
    pub saturation_sup: f64,
    /// `max over the grid of 1/2 ln_mu(x) (x - x^2)`.
    pub weight_sup: f64,
    /// `saturation_sup * weight_sup / (1 + mu)`, the predicted ceiling of the scaled error.
    pub predicted_bound: f64,
    /// `max over the grid of |D(f)|`, the pointwise limit's sup.
    pub limit_sup: f64,
    /// Log-log slope of the scaled error between the first and last degree.
    pub growth_exponent: f64,
    pub classification: GrowthClass,
}

/// Both directions of the inverse theorem checked empirically: whether
/// `n |L_n f - f|` stays bounded along `n_list`, next to the size of
/// `f_mu' + (1+mu) f_mu''`. A growth exponent of at least 1/4 is flagged
/// as unbounded.
pub fn inverse_theorem_diagnostic(
    f: &AnalyticFunction,
    mu: Mu,
    n_list: &[usize],
    grid: &Grid,
) -> Result<InverseTheoremReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("need a strictly increasing list of at least two degrees".into()));
    }
    let tf = TransformedFunction::new(f.clone(), mu);
    let m = mu.get();
    let mut saturation_sup = 0.0f64;
    let mut weight_sup = 0.0f64;
    let mut limit_sup = 0.0f64;
    for &x in grid.nodes() {
        if x <= 0.0 || x >= 1.0 {
            continue;
        }
        let (_, g1, g2) = tf.jet(x)?;
        saturation_sup = saturation_sup.max((g1 + (1.0 + m) * g2).abs());
        weight_sup = weight_sup.max(0.5 * mu.ln_shift(x) * (x - x * x));
        limit_sup = limit_sup.max(saturation_kernel(&tf, x)?.abs());
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            Ok(InverseRow { n, scaled_sup_error: n as f64 * sup_error(f, mu, n, grid)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let floor = 1e-12;
    let growth_exponent = ((last.scaled_sup_error.max(floor)) / (first.scaled_sup_error.max(floor))).ln()
        / (last.n as f64 / first.n as f64).ln();
    let classification = if growth_exponent < 0.25 { GrowthClass::Bounded } else { GrowthClass::Unbounded };
    Ok(InverseTheoremReport {
        rows,
        saturation_sup,
        weight_sup,
        predicted_bound: saturation_sup * weight_sup / (1.0 + m),
        limit_sup,
        growth_exponent,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{abs_center, ln_mu_function, square};
    use approx::assert_abs_diff_eq;

    fn mu(v: f64) -> Mu {
        Mu::new(v).unwrap()
    }

    #[test]
    fn modulus_of_linear_and_constant() {
        let lin = AnalyticFunction::new("3x", |x| 3.0 * x);
        assert_abs_diff_eq!(modulus_of_continuity(&lin, 0.2).unwrap().omega, 0.6, epsilon = 1e-12);
        let c = AnalyticFunction::new("c", |_| 4.0);
        assert_eq!(modulus_of_continuity(&c, 0.3).unwrap().omega, 0.0);
        assert!(modulus_of_continuity(&c, 0.0).is_err());
        assert!(modulus_of_continuity(&c, -1.0).is_err());
    }

    #[test]
    fn modulus_of_square_at_tenth() {
        let m = modulus_of_continuity(&square(), 0.1).unwrap();
        assert_abs_diff_eq!(m.omega, 0.19, epsilon = 1e-12);
        assert!(m.grid_step <= 0.01);
    }

    #[test]
    fn bound_vanishes_for_ln_mu() {
        let m = mu(1.0);
        assert_eq!(error_bound(&ln_mu_function(m), m, 50).unwrap(), 0.0);
    }

    #[test]
    fn limit_is_zero_at_endpoints_and_on_ln_mu() {
        let m = mu(0.4);
        assert_eq!(voronovskaja_limit(&square(), m, 0.0).unwrap(), 0.0);
        assert_eq!(voronovskaja_limit(&square(), m, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(voronovskaja_limit(&ln_mu_function(m), m, 0.3).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn limit_and_d_share_a_kernel() {
        let m = mu(1.0);
        let a = voronovskaja_limit(&square(), m, 0.5).unwrap();
        let d = differential_operator_d(&square(), m, 0.5).unwrap();
        assert_eq!(a.to_bits(), d.to_bits());
        assert!(a.abs() > 1e-3);
    }

    #[test]
    fn missing_derivatives_surface_as_capability_errors() {
        let f = AnalyticFunction::new("x^3", |x| x * x * x).without_fd_fallback();
        assert!(matches!(voronovskaja_limit(&f, mu(1.0), 0.5), Err(Error::Capability(_))));
    }

    #[test]
    fn saturation_elements_are_annihilated() {
        let m = mu(1.0);
        let f = saturation_solution(SaturationCoefficients { a: 0.7, b: -0.3 }, m);
        for x in [0.1, 0.5, 0.9] {
            assert!(differential_operator_d(&f, m, x).unwrap().abs() < 1e-13);
        }
        let zero = saturation_solution(SaturationCoefficients { a: 0.0, b: 0.0 }, m);
        assert_eq!(LogarithmicOperator::new(m, 9).unwrap().apply(&zero).eval(0.4), 0.0);
    }

    #[test]
    fn corner_is_flagged_unbounded() {
        let m = mu(1.0);
        let grid = Grid::uniform(201).unwrap();
        let r = inverse_theorem_diagnostic(&abs_center(), m, &[32, 128, 512], &grid).unwrap();
        assert_eq!(r.classification, GrowthClass::Unbounded);
        let s = inverse_theorem_diagnostic(&square(), m, &[32, 128, 512], &grid).unwrap();
        assert_eq!(s.classification, GrowthClass::Bounded);
    }
}
