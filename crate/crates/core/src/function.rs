//! Real functions on `[0,1]` with optional derivative data, sampling grids,
//! and the registry of named built-in test functions.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::warp::Mu;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An evaluable function on `[0,1]`, optionally carrying `f'` and `f''`.
///
/// When a derivative is missing and the finite-difference fallback is
/// enabled (the default), it is approximated by central differences with
/// step `max(1e-5, 1e-5 |x|)` for `f'` and `max(1e-4, 1e-4 |x|)` for `f''`,
/// switching to one-sided stencils near the endpoints so that `f` is never
/// sampled outside `[0,1]`.
#[derive(Clone)]
pub struct AnalyticFunction {
    name: String,
    eval: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
    positive: bool,
    fd_fallback: bool,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("name", &self.name)
            .field("d1", &self.d1.is_some())
            .field("d2", &self.d2.is_some())
            .field("positive", &self.positive)
            .field("fd_fallback", &self.fd_fallback)
            .finish()
    }
}

impl AnalyticFunction {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            d1: None,
            d2: None,
            positive: false,
            fd_fallback: true,
        }
    }

    pub fn with_derivatives<D1, D2>(mut self, d1: D1, d2: D2) -> Self
    where
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn with_first_derivative<D1>(mut self, d1: D1) -> Self
    where
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self
    }

    /// Marks `f > 0` on `[0,1]`.
    pub fn positive(mut self) -> Self {
        self.positive = true;
        self
    }

    pub fn without_fd_fallback(mut self) -> Self {
        self.fd_fallback = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn as_fn(&self) -> RealFn {
        Arc::clone(&self.eval)
    }

    pub fn d1(&self, x: f64) -> Result<f64> {
        match (&self.d1, self.fd_fallback) {
            (Some(d), _) => Ok(d(x)),
            (None, true) => Ok(fd_first(&*self.eval, x)),
            (None, false) => Err(self.capability("first")),
        }
    }

    pub fn d2(&self, x: f64) -> Result<f64> {
        match (&self.d2, self.fd_fallback) {
            (Some(d), _) => Ok(d(x)),
            (None, true) => Ok(fd_second(&*self.eval, x)),
            (None, false) => Err(self.capability("second")),
        }
    }

    fn capability(&self, which: &str) -> Error {
        Error::Capability(format!(
            "{which} derivative of '{}' is unavailable and finite differences are disabled",
            self.name
        ))
    }

    /// `alpha f + beta g`; derivatives are combined when both sides have them.
    pub fn linear_combination(alpha: f64, f: &Self, beta: f64, g: &Self) -> Self {
        let (fe, ge) = (Arc::clone(&f.eval), Arc::clone(&g.eval));
        let mut out = Self::new(format!("{alpha}*{}+{beta}*{}", f.name, g.name), move |x| {
            alpha * fe(x) + beta * ge(x)
        });
        if let (Some(f1), Some(g1), Some(f2), Some(g2)) = (&f.d1, &g.d1, &f.d2, &g.d2) {
            let (f1, g1, f2, g2) = (f1.clone(), g1.clone(), f2.clone(), g2.clone());
            out = out.with_derivatives(
                move |x| alpha * f1(x) + beta * g1(x),
                move |x| alpha * f2(x) + beta * g2(x),
            );
        }
        out.fd_fallback = f.fd_fallback && g.fd_fallback;
        out
    }

    /// Largest relative disagreement between the analytic derivatives and
    /// central differences on a uniform interior grid. `None` when no
    /// analytic derivative is attached.
    pub fn derivative_mismatch(&self, points: usize) -> Option<f64> {
        if self.d1.is_none() && self.d2.is_none() {
            return None;
        }
        let mut worst = 0.0f64;
        for i in 0..points {
            let x = (i as f64 + 0.5) / points as f64;
            if let Some(d) = &self.d1 {
                let a = d(x);
                let n = fd_first(&*self.eval, x);
                worst = worst.max((a - n).abs() / a.abs().max(1.0));
            }
            if let Some(d) = &self.d2 {
                let a = d(x);
                let n = fd_second(&*self.eval, x);
                worst = worst.max((a - n).abs() / a.abs().max(1.0));
            }
        }
        Some(worst)
    }
}

fn fd_first(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5f64.max(1e-5 * x.abs());
    if x - h < 0.0 {
        (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    } else if x + h > 1.0 {
        (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    } else {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }
}

fn fd_second(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-4f64.max(1e-4 * x.abs());
    if x - h < 0.0 {
        (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) - f(x + 3.0 * h)) / (h * h)
    } else if x + h > 1.0 {
        (2.0 * f(x) - 5.0 * f(x - h) + 4.0 * f(x - 2.0 * h) - f(x - 3.0 * h)) / (h * h)
    } else {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }
}

/// `f_mu = f / ln_mu`, with its first two derivatives from the quotient rule.
#[derive(Debug, Clone)]
pub struct TransformedFunction {
    base: AnalyticFunction,
    mu: Mu,
}

impl TransformedFunction {
    pub fn new(base: AnalyticFunction, mu: Mu) -> Self {
        Self { base, mu }
    }

    pub fn base(&self) -> &AnalyticFunction {
        &self.base
    }

    pub fn mu(&self) -> Mu {
        self.mu
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.base.eval(x) / self.mu.ln_shift(x)
    }

    /// `(f_mu, f_mu', f_mu'')` at `x`.
    pub fn jet(&self, x: f64) -> Result<(f64, f64, f64)> {
        let f0 = self.base.eval(x);
        let f1 = self.base.d1(x)?;
        let f2 = self.base.d2(x)?;
        let (l0, l1, l2) = self.mu.ln_shift_jet(x);
        let g0 = f0 / l0;
        let g1 = (f1 - g0 * l1) / l0;
        let g2 = (f2 - 2.0 * g1 * l1 - g0 * l2) / l0;
        Ok((g0, g1, g2))
    }

    /// Samples `f_mu(k/n)` for `k = 0..=n`.
    pub fn node_samples(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.eval(k as f64 / n as f64)).collect()
    }
}

/// Evaluation nodes in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(Vec<f64>);

impl Grid {
    /// `points` equispaced nodes including both endpoints.
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Parameter(format!("a uniform grid needs at least 2 points, got {points}")));
        }
        let m = (points - 1) as f64;
        Ok(Self((0..points).map(|i| if i + 1 == points { 1.0 } else { i as f64 / m }).collect()))
    }

    /// `points` nodes `(i + 1/2) / points`, i.e. the endpoints excluded by half a step.
    pub fn interior(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::Parameter("an interior grid needs at least one point".into()));
        }
        Ok(Self((0..points).map(|i| (i as f64 + 0.5) / points as f64).collect()))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Input("grid must contain at least one node".into()));
        }
        for &x in &nodes {
            check_unit(x, "grid node")?;
        }
        Ok(Self(nodes))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A function sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn sample(f: &AnalyticFunction, grid: &Grid) -> Self {
        Self {
            nodes: grid.nodes().to_vec(),
            values: grid.nodes().iter().map(|&x| f.eval(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `max_i |values[i] - f(nodes[i])|`.
    pub fn sup_error(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// `e_0`, `e_1`, `e_2`: the monomials `1`, `x`, `x^2`.
pub fn monomial(power: u32) -> AnalyticFunction {
    match power {
        0 => AnalyticFunction::new("e0", |_| 1.0).with_derivatives(|_| 0.0, |_| 0.0),
        1 => AnalyticFunction::new("e1", |x| x).with_derivatives(|_| 1.0, |_| 0.0),
        p => {
            let pf = p as f64;
            AnalyticFunction::new(format!("e{p}"), move |x: f64| x.powi(p as i32)).with_derivatives(
                move |x: f64| pf * x.powi(p as i32 - 1),
                move |x: f64| pf * (pf - 1.0) * x.powi(p as i32 - 2),
            )
        }
    }
}

/// `ln_mu(x) = ln(1 + mu + x)`.
pub fn ln_mu_function(mu: Mu) -> AnalyticFunction {
    AnalyticFunction::new("ln_mu", move |x| mu.ln_shift(x))
        .with_derivatives(move |x| mu.ln_shift_jet(x).1, move |x| mu.ln_shift_jet(x).2)
        .positive()
}

pub fn square() -> AnalyticFunction {
    AnalyticFunction::new("square", |x| x * x).with_derivatives(|x| 2.0 * x, |_| 2.0)
}

pub fn sine() -> AnalyticFunction {
    AnalyticFunction::new("sin", f64::sin).with_derivatives(f64::cos, |x: f64| -x.sin())
}

/// `e^x` on `[0,1]`.
pub fn exponential() -> AnalyticFunction {
    AnalyticFunction::new("exp", f64::exp).with_derivatives(f64::exp, f64::exp).positive()
}

/// `|x - 1/2|`, with its almost-everywhere derivatives.
pub fn abs_center() -> AnalyticFunction {
    AnalyticFunction::new("abs_center", |x: f64| (x - 0.5).abs())
        .with_derivatives(|x: f64| if x < 0.5 { -1.0 } else { 1.0 }, |_| 0.0)
}

/// `x^2 / 5 + sin x + x / 2 + 1/10`, the reference signal of the denoising example.
pub fn paper_signal() -> AnalyticFunction {
    AnalyticFunction::new("paper_f", |x: f64| 0.2 * x * x + x.sin() + 0.5 * x + 0.1)
        .with_derivatives(|x: f64| 0.4 * x + x.cos() + 0.5, |x: f64| 0.4 - x.sin())
        .positive()
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["ln_mu", "square", "sin", "exp", "abs_center", "paper_f", "saturation:A:B"];

/// Looks up a built-in function by identifier. `saturation:A:B` builds the
/// kernel element `A ln_mu + B ln_mu e^{-x/(1+mu)}`.
pub fn builtin(id: &str, mu: Mu) -> Result<AnalyticFunction> {
    match id {
        "ln_mu" => Ok(ln_mu_function(mu)),
        "square" => Ok(square()),
        "sin" => Ok(sine()),
        "exp" => Ok(exponential()),
        "abs_center" => Ok(abs_center()),
        "paper_f" => Ok(paper_signal()),
        other => {
            if let Some(rest) = other.strip_prefix("saturation:") {
                let mut parts = rest.split(':');
                let parse = |s: Option<&str>| -> Result<f64> {
                    s.and_then(|v| v.trim().parse::<f64>().ok())
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parameter(format!("bad saturation coefficients in '{other}'")))
                };
                let a = parse(parts.next())?;
                let b = parse(parts.next())?;
                if parts.next().is_some() {
                    return Err(Error::Parameter(format!("bad saturation coefficients in '{other}'")));
                }
                Ok(crate::analysis::saturation_solution(
                    crate::analysis::SaturationCoefficients { a, b },
                    mu,
                ))
            } else {
                Err(Error::Parameter(format!(
                    "unknown function '{other}'; expected one of {}",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_derivatives_agree_with_differences() {
        let mu = Mu::new(0.8).unwrap();
        for id in ["ln_mu", "square", "sin", "exp", "paper_f", "saturation:0.7:-0.3"] {
            let f = builtin(id, mu).unwrap();
            assert!(f.derivative_mismatch(200).unwrap() < 1e-5, "{id}");
        }
    }

    #[test]
    fn unknown_builtin_is_a_parameter_error() {
        let mu = Mu::new(1.0).unwrap();
        assert!(matches!(builtin("cosh", mu), Err(Error::Parameter(_))));
        assert!(matches!(builtin("saturation:1", mu), Err(Error::Parameter(_))));
        assert!(matches!(builtin("saturation:1:x", mu), Err(Error::Parameter(_))));
    }

    #[test]
    fn quotient_rule_matches_differences_of_f_mu() {
        let mu = Mu::new(1.0).unwrap();
        let t = TransformedFunction::new(sine(), mu);
        for x in [0.2, 0.5, 0.8] {
            let (g0, g1, g2) = t.jet(x).unwrap();
            assert_abs_diff_eq!(g0, t.eval(x), epsilon = 1e-15);
            let h = 1e-4;
            let n1 = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
            let n2 = (t.eval(x + h) - 2.0 * t.eval(x) + t.eval(x - h)) / (h * h);
            assert!((g1 - n1).abs() <= 1e-5 * g1.abs().max(1.0));
            assert!((g2 - n2).abs() <= 1e-5 * g2.abs().max(1.0));
        }
    }

    #[test]
    fn missing_derivatives_without_fallback() {
        let f = AnalyticFunction::new("cube", |x| x * x * x).without_fd_fallback();
        assert!(matches!(f.d1(0.3), Err(Error::Capability(_))));
        let g = AnalyticFunction::new("cube", |x| x * x * x);
        assert_abs_diff_eq!(g.d1(0.3).unwrap(), 0.27, epsilon = 1e-8);
        assert_abs_diff_eq!(g.d2(0.3).unwrap(), 1.8, epsilon = 1e-6);
        // one-sided stencils at the endpoints
        assert_abs_diff_eq!(g.d1(0.0).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(g.d2(1.0).unwrap(), 6.0, epsilon = 1e-3);
    }

    #[test]
    fn grids() {
        let g = Grid::uniform(1001).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[1000], 1.0);
        assert!(Grid::uniform(1).is_err());
        let i = Grid::interior(4).unwrap();
        assert_eq!(i.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(Grid::from_nodes(vec![0.5, 1.5]).is_err());
    }
}
