//! The four operator families: classical Bernstein `B_n`, King `V_n` with a
//! pluggable node map, the logarithmic `L_n`, and the exponential `G_n`.
//!
//! `L_n` is evaluated as `ln_mu(x) * B_n(f_mu, a_n(x))`, reusing the
//! log-space Bernstein kernel of [`crate::numerics`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::function::{AnalyticFunction, Grid, GridFunction, RealFn};
use crate::numerics::weighted_sum;
use crate::warp::{Mu, WarpContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bernstein,
    King,
    Logarithmic,
    Exponential,
}

/// Which operator to apply, its degree, and the family-specific parameters.
#[derive(Clone)]
pub struct OperatorSpec {
    family: Family,
    n: usize,
    mu: Option<Mu>,
    node_fn: Option<RealFn>,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("family", &self.family)
            .field("n", &self.n)
            .field("mu", &self.mu)
            .field("node_fn", &self.node_fn.is_some())
            .finish()
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Parameter("degree n must be at least 1".into()))
    } else {
        Ok(())
    }
}

impl OperatorSpec {
    pub fn bernstein(n: usize) -> Result<Self> {
        check_degree(n)?;
        Ok(Self { family: Family::Bernstein, n, mu: None, node_fn: None })
    }

    /// King operator with node map `r_n`, which must take values in `[0,1]`.
    pub fn king<F>(n: usize, node_fn: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_degree(n)?;
        Ok(Self { family: Family::King, n, mu: None, node_fn: Some(Arc::new(node_fn)) })
    }

    /// King operator whose node map is the logarithmic warp `a_n`.
    pub fn king_with_warp(n: usize, mu: Mu) -> Result<Self> {
        let ctx = WarpContext::new(mu, n)?;
        Self::king(n, move |x| ctx.node(x))
    }

    pub fn logarithmic(n: usize, mu: Mu) -> Result<Self> {
        check_degree(n)?;
        Ok(Self { family: Family::Logarithmic, n, mu: Some(mu), node_fn: None })
    }

    pub fn exponential(n: usize, mu: Mu) -> Result<Self> {
        check_degree(n)?;
        Ok(Self { family: Family::Exponential, n, mu: Some(mu), node_fn: None })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> Option<Mu> {
        self.mu
    }

    fn require_mu(&self) -> Result<Mu> {
        self.mu
            .ok_or_else(|| Error::Parameter(format!("{:?} operator requires mu", self.family)))
    }

    /// Pointwise evaluation of the operator on `f` at `x`.
    pub fn eval(&self, f: &AnalyticFunction, x: f64) -> Result<f64> {
        match self.family {
            Family::Bernstein => bernstein(f, self.n, x),
            Family::King => king(f, self, x),
            Family::Logarithmic => logarithmic(f, self.require_mu()?, self.n, x),
            Family::Exponential => exponential_comparison(f, self.require_mu()?, self.n, x),
        }
    }
}

fn node_samples(f: &AnalyticFunction, n: usize) -> Vec<f64> {
    (0..=n).map(|k| f.eval(k as f64 / n as f64)).collect()
}

/// `B_n(f, x) = sum_k f(k/n) p_{n,k}(x)`.
pub fn bernstein(f: &AnalyticFunction, n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_unit(x, "x")?;
    Ok(weighted_sum(&node_samples(f, n), x))
}

fn king_node(spec: &OperatorSpec, x: f64) -> Result<f64> {
    let node_fn = spec
        .node_fn
        .as_ref()
        .ok_or_else(|| Error::Parameter("King operator requires a node function".into()))?;
    let r = node_fn(x);
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("node function maps x = {x} to {r}, outside [0, 1]")));
    }
    Ok(r)
}

/// `V_n(f, x) = sum_k f(k/n) p_{n,k}(r_n(x))`.
pub fn king(f: &AnalyticFunction, spec: &OperatorSpec, x: f64) -> Result<f64> {
    if spec.family != Family::King {
        return Err(Error::Parameter(format!("expected a King spec, got {:?}", spec.family)));
    }
    check_unit(x, "x")?;
    let r = king_node(spec, x)?;
    Ok(weighted_sum(&node_samples(f, spec.n), r))
}

/// `L_n` of fixed degree and shift, ready to be applied to node data.
#[derive(Debug, Clone, Copy)]
pub struct LogarithmicOperator {
    ctx: WarpContext,
}

impl LogarithmicOperator {
    pub fn new(mu: Mu, n: usize) -> Result<Self> {
        Ok(Self { ctx: WarpContext::new(mu, n)? })
    }

    pub fn warp(&self) -> &WarpContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn mu(&self) -> Mu {
        self.ctx.mu()
    }

    /// Binds `L_n` to the node values `f(k/n)`, `k = 0..=n`.
    pub fn bind(&self, node_values: Vec<f64>) -> Result<LogApproximant> {
        let n = self.n();
        if node_values.len() != n + 1 {
            return Err(Error::Input(format!(
                "expected {} node values for degree {n}, got {}",
                n + 1,
                node_values.len()
            )));
        }
        let mu = self.mu();
        let fmu_nodes = node_values
            .iter()
            .enumerate()
            .map(|(k, v)| v / mu.ln_shift(k as f64 / n as f64))
            .collect();
        Ok(LogApproximant { ctx: self.ctx, f_nodes: node_values, fmu_nodes })
    }

    pub fn apply(&self, f: &AnalyticFunction) -> LogApproximant {
        self.bind(node_samples(f, self.n())).expect("node sample count matches degree")
    }
}

/// `L_n f` for fixed node data; evaluates anywhere on `[0,1]`.
#[derive(Debug, Clone)]
pub struct LogApproximant {
    ctx: WarpContext,
    f_nodes: Vec<f64>,
    fmu_nodes: Vec<f64>,
}

impl LogApproximant {
    /// `L_n f(x)` for `x` in `[0,1]` (unchecked). Interpolates exactly at 0 and 1.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ctx.n();
        if x <= 0.0 {
            return self.f_nodes[0];
        }
        if x >= 1.0 {
            return self.f_nodes[n];
        }
        self.ctx.mu().ln_shift(x) * weighted_sum(&self.fmu_nodes, self.ctx.node(x))
    }

    /// `B_n(f_mu, a_n(x)) = L_n f(x) / ln_mu(x)`.
    pub fn eval_ratio(&self, x: f64) -> f64 {
        weighted_sum(&self.fmu_nodes, self.ctx.node(x))
    }

    pub fn eval_grid(&self, grid: &Grid) -> GridFunction {
        GridFunction {
            nodes: grid.nodes().to_vec(),
            values: grid.nodes().par_iter().map(|&x| self.eval(x)).collect(),
        }
    }

    pub fn warp(&self) -> &WarpContext {
        &self.ctx
    }

    /// `f(k/n)`.
    pub fn node_values(&self) -> &[f64] {
        &self.f_nodes
    }

    /// `f_mu(k/n) = f(k/n) / ln_mu(k/n)`.
    pub fn transformed_node_values(&self) -> &[f64] {
        &self.fmu_nodes
    }
}

/// `L_n(f, x) = ln_mu(x) * sum_k f(k/n) / ln_mu(k/n) * p_{n,k}(a_n(x))`.
pub fn logarithmic(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> Result<f64> {
    check_unit(x, "x")?;
    Ok(LogarithmicOperator::new(mu, n)?.apply(f).eval(x))
}

/// `G_n(f, x) = e^{mu x} sum_k f(k/n) e^{-mu k/n} p_{n,k}(b_n(x))` with
/// `b_n(x) = (e^{mu x/n} - 1) / (e^{mu/n} - 1)`.
pub fn exponential_comparison(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_unit(x, "x")?;
    let values = exponential_node_values(f, mu, n);
    Ok(exponential_eval(&values, mu, n, x))
}

fn exponential_node_values(f: &AnalyticFunction, mu: Mu, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            f.eval(t) * (-mu.get() * t).exp()
        })
        .collect()
}

fn exponential_eval(values: &[f64], mu: Mu, n: usize, x: f64) -> f64 {
    let m = mu.get();
    let node = if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        ((m * x / n as f64).exp_m1() / (m / n as f64).exp_m1()).clamp(0.0, 1.0)
    };
    (m * x).exp() * weighted_sum(values, node)
}

/// Evaluates the operator at every grid node; values are identical to the
/// pointwise calls.
pub fn operator_on_grid(f: &AnalyticFunction, spec: &OperatorSpec, grid: &Grid) -> Result<GridFunction> {
    let nodes = grid.nodes().to_vec();
    let values: Vec<f64> = match spec.family {
        Family::Logarithmic => {
            let op = LogarithmicOperator::new(spec.require_mu()?, spec.n)?.apply(f);
            nodes.par_iter().map(|&x| op.eval(x)).collect()
        }
        Family::Bernstein => {
            let samples = node_samples(f, spec.n);
            nodes.par_iter().map(|&x| weighted_sum(&samples, x)).collect()
        }
        Family::King => {
            let samples = node_samples(f, spec.n);
            nodes
                .par_iter()
                .map(|&x| king_node(spec, x).map(|r| weighted_sum(&samples, r)))
                .collect::<Result<_>>()?
        }
        Family::Exponential => {
            let mu = spec.require_mu()?;
            let values = exponential_node_values(f, mu, spec.n);
            nodes.par_iter().map(|&x| exponential_eval(&values, mu, spec.n, x)).collect()
        }
    };
    Ok(GridFunction { nodes, values })
}

/// Test function of the Korovkin-subset argument for `{1, ln_mu^l1, ln_mu^l2}`:
/// nonnegative on `[0,1]` and vanishing only at `x0`.
pub fn korovkin_h(mu: Mu, lambda1: f64, lambda2: f64, x0: f64, x: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda1 < lambda2 && lambda2.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < lambda1 < lambda2, got lambda1 = {lambda1}, lambda2 = {lambda2}"
        )));
    }
    check_unit(x0, "x0")?;
    check_unit(x, "x")?;
    let ratio = mu.ln_shift(x) / mu.ln_shift(x0);
    Ok(1.0
        + lambda2 / (lambda1 - lambda2) * ratio.powf(lambda1)
        + lambda1 / (lambda2 - lambda1) * ratio.powf(lambda2))
}
