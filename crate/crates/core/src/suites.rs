//! Verification suites: each invariant of the library evaluated numerically
//! and reported with its measured value, threshold, and a stable identifier.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    differential_operator_d, error_bound, inverse_theorem_diagnostic, saturation_solution, sup_error,
    voronovskaja_limit, voronovskaja_residual, GrowthClass, SaturationCoefficients,
};
use crate::denoise::{
    denoise, log_signal_approximant, paper_example_suite_on, synthesize_noisy, PAPER_MUS,
};
use crate::error::{Error, Result};
use crate::function::{abs_center, exponential, paper_signal, sine, square, AnalyticFunction, Grid, TransformedFunction};
use crate::numerics::{algebraic_moment, basis_weights, first_absolute_moment, weight_integral};
use crate::operators::{logarithmic, LogarithmicOperator, OperatorSpec};
use crate::shape::{
    bv_contraction_check, lnf_derivative, DerivativeTables, monotone_in_n_check, second_derivative_ratio, ShapeClass,
};
use crate::warp::{gamma_n, Mu, WarpContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Numerics,
    Warp,
    Operators,
    Voronovskaja,
    Saturation,
    Bound,
    Shape,
    Bv,
    Denoise,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Numerics,
        Suite::Warp,
        Suite::Operators,
        Suite::Voronovskaja,
        Suite::Saturation,
        Suite::Bound,
        Suite::Shape,
        Suite::Bv,
        Suite::Denoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Numerics => "numerics",
            Suite::Warp => "warp",
            Suite::Operators => "operators",
            Suite::Voronovskaja => "voronovskaja",
            Suite::Saturation => "saturation",
            Suite::Bound => "bound",
            Suite::Shape => "shape",
            Suite::Bv => "bv",
            Suite::Denoise => "denoise",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|v| v.name()).collect();
                Error::Parameter(format!("unknown suite '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

/// Inputs shared by all suites. `n_list` and `function` override the
/// defaults of the suites that use them.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub mu: Mu,
    pub n_list: Option<Vec<usize>>,
    pub grid_points: usize,
    pub function: Option<AnalyticFunction>,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(mu: Mu) -> Self {
        Self { mu, n_list: None, grid_points: 1001, function: None, seed: 0x5eed }
    }

    fn degrees(&self, default: &[usize]) -> Vec<usize> {
        self.n_list.clone().unwrap_or_else(|| default.to_vec())
    }

    fn functions(&self, default: Vec<AnalyticFunction>) -> Vec<AnalyticFunction> {
        match &self.function {
            Some(f) => vec![f.clone()],
            None => default,
        }
    }

    fn grid(&self) -> Result<Grid> {
        Grid::uniform(self.grid_points)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    /// Named series backing the measurement (for example `n_gamma` per degree).
    pub data: BTreeMap<String, Vec<f64>>,
}

impl CheckResult {
    fn new(id: &str, passed: bool, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { id: id.into(), passed, measured, threshold, detail: detail.into(), data: BTreeMap::new() }
    }

    /// `measured <= threshold`.
    fn at_most(id: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(id, measured <= threshold, measured, threshold, detail)
    }

    /// `measured >= threshold`.
    fn at_least(id: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(id, measured >= threshold, measured, threshold, detail)
    }

    fn with(mut self, key: &str, values: Vec<f64>) -> Self {
        self.data.insert(key.into(), values);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub mu: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Numerics => numerics_checks(cfg)?,
        Suite::Warp => warp_checks(cfg)?,
        Suite::Operators => operator_checks(cfg)?,
        Suite::Voronovskaja => voronovskaja_checks(cfg)?,
        Suite::Saturation => saturation_checks(cfg)?,
        Suite::Bound => bound_checks(cfg)?,
        Suite::Shape => shape_checks(cfg)?,
        Suite::Bv => bv_checks(cfg)?,
        Suite::Denoise => denoise_checks(cfg)?,
    };
    Ok(SuiteReport { suite, mu: cfg.mu.get(), passed: checks.iter().all(|c| c.passed), checks })
}

fn sup_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn with_ln(mu: Mu, name: &str, g: fn(f64) -> f64) -> AnalyticFunction {
    AnalyticFunction::new(format!("{name}*ln_mu"), move |x| g(x) * mu.ln_shift(x))
}

// ---------------------------------------------------------------- numerics

/// `C(n,k) x^k (1-x)^(n-k)` by running products; independent of the
/// log-space path. Valid for moderate `n` only.
fn product_weights(n: usize, x: f64) -> Vec<f64> {
    let mut c = 1.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                c = c * (n - k + 1) as f64 / k as f64;
            }
            c * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32)
        })
        .collect()
}

fn numerics_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let grid = cfg.grid()?;
    let degrees = [1usize, 2, 10, 100, 500, 1000, 2000];
    let mut pu = 0.0f64;
    let mut min_w = f64::INFINITY;
    for &n in &degrees {
        for &x in grid.nodes() {
            let w = basis_weights(n, x);
            pu = pu.max((w.iter().sum::<f64>() - 1.0).abs());
            min_w = min_w.min(w.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    let mut integral = 0.0f64;
    for n in 0..=50 {
        for k in 0..=n {
            integral = integral.max((weight_integral(n, k)? - 1.0 / (n + 1) as f64).abs());
        }
    }
    let coarse = Grid::uniform(101)?;
    let mut moment = 0.0f64;
    for n in 1..=64usize {
        for &x in coarse.nodes() {
            let w = product_weights(n, x);
            for s in 0..=2u32 {
                let brute: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (k as f64 - n as f64 * x).powi(s as i32) * p)
                    .sum();
                let closed = match s {
                    0 => 1.0,
                    1 => 0.0,
                    _ => n as f64 * x * (1.0 - x),
                };
                let got = algebraic_moment(n, s, x)?;
                let scale = (n as f64).max(1.0);
                moment = moment.max((got - brute).abs() / scale).max((got - closed).abs() / scale);
            }
        }
    }
    let mut worst_ratio = 0.0f64;
    for n in 4..=1024usize {
        let bound = 0.5 / (n as f64).sqrt();
        for &x in coarse.nodes() {
            worst_ratio = worst_ratio.max(first_absolute_moment(n, x)? / bound);
        }
    }
    Ok(vec![
        CheckResult::at_most("numerics.partition_of_unity", pu, 1e-10, "max |sum_k p_{n,k}(x) - 1|, n up to 2000"),
        CheckResult::at_least("numerics.nonnegativity", min_w, 0.0, "smallest computed weight"),
        CheckResult::at_most("numerics.integral_identity", integral, 1e-8, "max |int p_{n,k} - 1/(n+1)|, k <= n <= 50"),
        CheckResult::at_most(
            "numerics.moment_identities",
            moment,
            1e-12,
            "max deviation / n of T_{n,0..2} from brute force and closed forms, n <= 64",
        ),
        CheckResult::new(
            "numerics.absolute_moment_bound",
            worst_ratio < 1.0,
            worst_ratio,
            1.0,
            "max of first_absolute_moment(n,y) * 2 sqrt(n), must stay below 1, n in 4..=1024",
        ),
    ])
}

// ---------------------------------------------------------------- warp

fn warp_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let grid = cfg.grid()?;
    let degrees = [1usize, 2, 3, 5, 10, 50, 100, 500, 1000];
    let mut range_ok = true;
    let mut dom = f64::INFINITY;
    let mut curvature = f64::NEG_INFINITY;
    let mut increase = f64::INFINITY;
    let mut order = f64::INFINITY;
    let mut sup_gap = Vec::new();
    for &n in &degrees {
        let ctx = WarpContext::new(mu, n)?;
        let next = WarpContext::new(mu, n + 1)?;
        range_ok &= ctx.node(0.0) == 0.0 && ctx.node(1.0) == 1.0;
        let a: Vec<f64> = grid.nodes().iter().map(|&x| ctx.node(x)).collect();
        range_ok &= a.iter().all(|v| (0.0..=1.0).contains(v));
        dom = dom.min(grid.nodes().iter().zip(&a).map(|(x, v)| v - x).fold(f64::INFINITY, f64::min));
        increase = increase.min(a.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min));
        curvature = curvature.max(a.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).fold(f64::NEG_INFINITY, f64::max));
        order = order.min(
            grid.nodes()
                .iter()
                .zip(&a)
                .map(|(&x, v)| v - next.node(x))
                .fold(f64::INFINITY, f64::min),
        );
        sup_gap.push(sup_abs(grid.nodes().iter().zip(&a).map(|(x, v)| v - x)));
    }
    let limit = 1.0 / (8.0 * (1.0 + mu.get()));
    let n_req = (1.1 / (limit * 1e-3)).ceil() as usize;
    let gap_req = {
        let ctx = WarpContext::new(mu, n_req)?;
        sup_abs(grid.nodes().iter().map(|&x| ctx.node(x) - x))
    };
    let decreasing = sup_gap.windows(2).all(|w| w[1] < w[0]);

    let gamma_degrees = cfg.degrees(&[100, 1_000, 10_000]);
    let mut n_gamma = Vec::new();
    for &n in &gamma_degrees {
        n_gamma.push(n as f64 * gamma_n(&WarpContext::new(mu, n)?).gamma);
    }
    let last = *n_gamma.last().ok_or_else(|| Error::Parameter("empty degree list".into()))?;
    let rel = (last - limit).abs() / limit;
    let dist: Vec<f64> = n_gamma.iter().map(|v| (v - limit).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] <= w[0])
        && (n_gamma.windows(2).all(|w| w[1] >= w[0]) || n_gamma.windows(2).all(|w| w[1] <= w[0]));
    Ok(vec![
        CheckResult::new(
            "warp.range_fixed_points",
            range_ok,
            if range_ok { 0.0 } else { 1.0 },
            0.0,
            "a_n maps [0,1] into [0,1] with a_n(0) = 0 and a_n(1) = 1 exactly",
        ),
        CheckResult::at_least("warp.domination", dom, -1e-14, "min over grid of a_n(x) - x"),
        CheckResult::new(
            "warp.monotone_concave",
            increase > 0.0 && curvature <= 1e-12,
            curvature,
            1e-12,
            format!("max second difference of a_n on the grid; min first difference {increase:e}"),
        ),
        CheckResult::new(
            "warp.uniform_convergence",
            decreasing && gap_req < 1e-3,
            gap_req,
            1e-3,
            format!("sup |a_n - x| at n = {n_req}; decreasing along the degree list: {decreasing}"),
        )
        .with("degrees", degrees.iter().map(|&n| n as f64).collect())
        .with("sup_gap", sup_gap),
        CheckResult::at_least("warp.monotone_in_n", order, 0.0, "min over grid of a_n(x) - a_{n+1}(x)"),
        CheckResult::new(
            "warp.gamma_limit",
            rel <= 0.01 && monotone,
            rel,
            0.01,
            format!(
                "relative distance of n gamma_n to 1/(8(1+mu)) = {limit} at the last degree; monotone approach: {monotone}"
            ),
        )
        .with("degrees", gamma_degrees.iter().map(|&n| n as f64).collect())
        .with("n_gamma", n_gamma),
    ])
}

// ---------------------------------------------------------------- operators

/// Direct summation of `ln_mu(x) sum_k f(k/n) / ln_mu(k/n) p_{n,k}(a_n(x))`
/// with product-form weights; independent of the factorized path.
pub fn direct_logarithmic_sum(f: &AnalyticFunction, mu: Mu, n: usize, x: f64) -> f64 {
    let m = mu.get();
    let scale = n as f64 * (1.0 + m);
    let a = (x / scale).ln_1p() / (1.0 / scale).ln_1p();
    let w = product_weights(n, a);
    let lnx = (1.0 + m + x).ln();
    let s: f64 = w
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let xk = k as f64 / n as f64;
            f.eval(xk) / (1.0 + m + xk).ln() * p
        })
        .sum();
    lnx * s
}

fn operator_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let grid = cfg.grid()?;
    let mut rng = cfg.rng(3);
    let f = sine();
    let g = exponential();
    let (alpha, beta) = (1.7, -0.6);
    let combo = AnalyticFunction::linear_combination(alpha, &f, beta, &g);
    let nonneg = abs_center();
    let probe = Grid::uniform(101)?;
    let mut lin = 0.0f64;
    let mut pos = f64::INFINITY;
    for n in [1usize, 7, 40, 150] {
        let specs = [
            OperatorSpec::bernstein(n)?,
            OperatorSpec::king_with_warp(n, mu)?,
            OperatorSpec::logarithmic(n, mu)?,
            OperatorSpec::exponential(n, mu)?,
        ];
        for spec in &specs {
            for &x in probe.nodes() {
                let lhs = spec.eval(&combo, x)?;
                let rhs = alpha * spec.eval(&f, x)? + beta * spec.eval(&g, x)?;
                lin = lin.max((lhs - rhs).abs());
                pos = pos.min(spec.eval(&nonneg, x)?);
            }
        }
    }

    let mut fact = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=200usize);
        let m = Mu::new(rng.random_range(0.05..3.0))?;
        let x: f64 = rng.random_range(0.0..=1.0);
        let c: [f64; 3] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.5..4.0)];
        let h = AnalyticFunction::new("random", move |t: f64| c[0] + c[1] * t + (c[2] * t).sin());
        let got = logarithmic(&h, m, n, x)?;
        let want = direct_logarithmic_sum(&h, m, n, x);
        fact = fact.max((got - want).abs() / want.abs().max(1.0));
    }

    let mut repro = 0.0f64;
    let ln = crate::function::ln_mu_function(mu);
    for n in 1..=200usize {
        let approx = LogarithmicOperator::new(mu, n)?.apply(&ln);
        repro = repro.max(approx.eval_grid(&grid).sup_error(&|x| ln.eval(x)));
    }

    let e0 = AnalyticFunction::new("1", |_| 1.0);
    let e1 = AnalyticFunction::new("x", |x| x);
    let e2 = AnalyticFunction::new("x^2", |x| x * x);
    let mut king_dev = 0.0f64;
    let node_maps: [(&str, fn(f64) -> f64); 3] = [("x^2", |x| x * x), ("sqrt", f64::sqrt), ("sin", |x| (1.5707963267948966 * x).sin())];
    for n in [1usize, 3, 25, 200] {
        let ctx = WarpContext::new(mu, n)?;
        let mut specs = vec![(OperatorSpec::king_with_warp(n, mu)?, Box::new(move |x: f64| ctx.node(x)) as Box<dyn Fn(f64) -> f64>)];
        for (_, r) in node_maps {
            specs.push((OperatorSpec::king(n, r)?, Box::new(r)));
        }
        for (spec, r) in &specs {
            for &x in probe.nodes() {
                let rx = r(x);
                let nf = n as f64;
                king_dev = king_dev
                    .max((spec.eval(&e0, x)? - 1.0).abs())
                    .max((spec.eval(&e1, x)? - rx).abs())
                    .max((spec.eval(&e2, x)? - (rx / nf + (nf - 1.0) / nf * rx * rx)).abs());
            }
        }
    }

    let conv_degrees: Vec<usize> = (0..7).map(|i| 10usize << i).collect();
    let mut conv = Vec::new();
    for h in [square(), sine(), abs_center()] {
        let errs: Vec<f64> = conv_degrees.iter().map(|&n| sup_error(&h, mu, n, &grid)).collect::<Result<_>>()?;
        let factor = errs[0] / errs[errs.len() - 1];
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        conv.push(
            CheckResult::new(
                &format!("operators.uniform_convergence:{}", h.name()),
                decreasing && factor >= 10.0,
                factor,
                10.0,
                format!("sup_error(n=10) / sup_error(n=640); decreasing along the doubling sequence: {decreasing}"),
            )
            .with("degrees", conv_degrees.iter().map(|&n| n as f64).collect())
            .with("sup_error", errs),
        );
    }

    Ok(vec![
        CheckResult::at_most("operators.linearity", lin, 1e-10, "max |L(af+bg) - aLf - bLg| over all four families"),
        CheckResult::at_least("operators.positivity", pos, -1e-12, "min of L(|x-1/2|) over all four families"),
        CheckResult::at_most(
            "operators.factorization",
            fact,
            1e-12,
            "max relative gap between direct summation and ln_mu * B_n(f_mu, a_n), 50 random cases",
        ),
        CheckResult::at_most("operators.reproduction", repro, 1e-10, "max |L_n ln_mu - ln_mu|, n in 1..=200"),
        CheckResult::at_most("operators.king_identities", king_dev, 1e-10, "max deviation of V_n e_0, e_1, e_2"),
    ]
    .into_iter()
    .chain(conv)
    .collect())
}

// ---------------------------------------------------------------- analysis

const VOR_POINTS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn voronovskaja_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let degrees = cfg.degrees(&[250, 500, 1000, 2000, 4000]);
    let mut conv_ok = true;
    let mut worst = 0.0f64;
    let mut data = BTreeMap::new();
    for f in cfg.functions(vec![square(), exponential(), sine()]) {
        for &x in &VOR_POINTS {
            let dev: Vec<f64> = degrees
                .iter()
                .map(|&n| Ok(voronovskaja_residual(&f, mu, n, x)?.deviation))
                .collect::<Result<_>>()?;
            for w in dev.windows(2) {
                let ratio = w[1] / w[0].max(1e-300);
                if w[0] > 1e-12 {
                    worst = worst.max(ratio);
                }
                conv_ok &= w[1] <= 1.05 * w[0] || w[1] <= 1e-12;
            }
            data.insert(format!("deviation:{}:{x}", f.name()), dev);
        }
    }
    let mut conv = CheckResult::new(
        "analysis.voronovskaja_convergence",
        conv_ok,
        worst,
        1.05,
        "largest ratio deviation(next n) / deviation(n); nonincreasing with 5% slack",
    );
    conv.data = data;
    conv.data.insert("degrees".into(), degrees.iter().map(|&n| n as f64).collect());

    let interior = Grid::interior(999)?;
    let mut equal = true;
    let mut gap = 0.0f64;
    let mut deriv = 0.0f64;
    for f in cfg.functions(vec![square(), exponential(), sine(), paper_signal()]) {
        let tf = TransformedFunction::new(f.clone(), mu);
        for &x in interior.nodes().iter().step_by(10) {
            let a = voronovskaja_limit(&f, mu, x)?;
            let b = differential_operator_d(&f, mu, x)?;
            equal &= a.to_bits() == b.to_bits();
            gap = gap.max((a - b).abs());
            if f.has_analytic_derivatives() {
                let (_, g1, g2) = tf.jet(x)?;
                let h1 = 1e-5;
                let h2 = 1e-4;
                let fd1 = (tf.eval(x + h1) - tf.eval(x - h1)) / (2.0 * h1);
                let fd2 = (tf.eval(x + h2) - 2.0 * tf.eval(x) + tf.eval(x - h2)) / (h2 * h2);
                deriv = deriv
                    .max((g1 - fd1).abs() / g1.abs().max(1.0))
                    .max((g2 - fd2).abs() / g2.abs().max(1.0));
            }
        }
    }
    Ok(vec![
        conv,
        CheckResult::new("analysis.equivalence", equal, gap, 0.0, "D(f) and the Voronovskaja limit compared bit for bit"),
        CheckResult::at_most(
            "analysis.derivative_consistency",
            deriv,
            1e-5,
            "max relative gap between closed-form f_mu', f_mu'' and central differences",
        ),
    ])
}

fn saturation_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let interior = Grid::interior(999)?;
    let mut rng = cfg.rng(5);
    let kernel_fns: Vec<AnalyticFunction> = match &cfg.function {
        Some(f) => vec![f.clone()],
        None => (0..20)
            .map(|_| {
                let c = SaturationCoefficients { a: rng.random_range(-2.0..=2.0), b: rng.random_range(-2.0..=2.0) };
                saturation_solution(c, mu)
            })
            .collect(),
    };
    let mut annihilation = 0.0f64;
    for f in &kernel_fns {
        for &x in interior.nodes() {
            annihilation = annihilation.max(differential_operator_d(f, mu, x)?.abs());
        }
    }

    let grid = cfg.grid()?;
    let decay_f = match &cfg.function {
        Some(f) => f.clone(),
        None => saturation_solution(SaturationCoefficients { a: 0.7, b: -0.3 }, mu),
    };
    let degrees = cfg.degrees(&[50, 100, 200, 400, 800, 1600]);
    let scaled: Vec<f64> = degrees
        .iter()
        .map(|&n| Ok(n as f64 * sup_error(&decay_f, mu, n, &grid)?))
        .collect::<Result<_>>()?;
    let first_100 = degrees.iter().position(|&n| n == 100).unwrap_or(0);
    let (s0, s1) = (scaled[first_100], scaled[scaled.len() - 1]);
    // f in the kernel is reproduced up to round-off, which grows with n
    let reproduced = degrees.iter().zip(&scaled).all(|(&n, v)| v / n as f64 <= 1e-10);
    let factor = if reproduced { f64::INFINITY } else { s0 / s1 };
    let decreasing = reproduced || scaled.windows(2).all(|w| w[1] < w[0]);

    let inv_degrees = [32usize, 128, 512];
    let kernel_report = inverse_theorem_diagnostic(&decay_f, mu, &inv_degrees, &grid)?;
    let square_report = inverse_theorem_diagnostic(&square(), mu, &inv_degrees, &grid)?;
    let corner_report = inverse_theorem_diagnostic(&abs_center(), mu, &inv_degrees, &grid)?;
    let inverse_ok = kernel_report.limit_sup <= 1e-10
        && kernel_report.saturation_sup <= 1e-9
        && square_report.classification == GrowthClass::Bounded
        && corner_report.classification == GrowthClass::Unbounded;

    let rows = |r: &crate::analysis::InverseTheoremReport| r.rows.iter().map(|v| v.scaled_sup_error).collect::<Vec<_>>();
    Ok(vec![
        CheckResult::at_most(
            "analysis.kernel_annihilation",
            annihilation,
            1e-10,
            format!("max |D(f)| on a 999-point interior grid over {} kernel functions", kernel_fns.len()),
        ),
        CheckResult::new(
            "analysis.saturation_decay",
            decreasing && factor >= 4.0,
            factor,
            4.0,
            format!(
                "ratio of n sup|L_n f - f| at n = {} to n = {}; decreasing: {decreasing}; reproduced: {reproduced}",
                degrees[first_100],
                degrees[degrees.len() - 1]
            ),
        )
        .with("degrees", degrees.iter().map(|&n| n as f64).collect())
        .with("scaled_sup_error", scaled),
        CheckResult::new(
            "analysis.inverse_theorem",
            inverse_ok,
            corner_report.growth_exponent,
            0.25,
            format!(
                "kernel limit sup {:e}; x^2 growth exponent {:.4} ({:?}); |x-1/2| growth exponent measured ({:?})",
                kernel_report.limit_sup,
                square_report.growth_exponent,
                square_report.classification,
                corner_report.classification
            ),
        )
        .with("degrees", inv_degrees.iter().map(|&n| n as f64).collect())
        .with("kernel", rows(&kernel_report))
        .with("square", rows(&square_report))
        .with("abs_center", rows(&corner_report)),
    ])
}

fn bound_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let grid = cfg.grid()?;
    let degrees = cfg.degrees(&[16, 32, 64, 128, 256, 512, 1024]);
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    let mut data = BTreeMap::new();
    let mut bounds_decrease = true;
    for f in cfg.functions(vec![square(), sine(), abs_center()]) {
        let mut margins = Vec::new();
        let mut bounds = Vec::new();
        for &n in &degrees {
            let bound = error_bound(&f, mu, n)?;
            let err = sup_error(&f, mu, n, &grid)?;
            if err > bound + 1e-10 {
                violations += 1;
            }
            min_margin = min_margin.min(bound - err);
            margins.push(bound - err);
            bounds.push(bound);
        }
        bounds_decrease &= bounds.windows(2).all(|w| w[1] <= w[0]);
        data.insert(format!("margin:{}", f.name()), margins);
        data.insert(format!("bound:{}", f.name()), bounds);
    }
    let mut check = CheckResult::new(
        "analysis.bound_validity",
        violations == 0,
        violations as f64,
        0.0,
        format!("violations of sup|L_n f - f| <= bound + 1e-10; smallest margin {min_margin:e}; bounds nonincreasing in n: {bounds_decrease}"),
    );
    check.data = data;
    check.data.insert("degrees".into(), degrees.iter().map(|&n| n as f64).collect());
    Ok(vec![check])
}

// ---------------------------------------------------------------- shape

/// Increasing and nonnegative `f_mu`.
fn increasing_fmu(mu: Mu) -> Vec<AnalyticFunction> {
    vec![
        with_ln(mu, "x", |x| x),
        with_ln(mu, "x^2", |x| x * x),
        with_ln(mu, "1+tanh", |x| 1.0 + (5.0 * (x - 0.5)).tanh()),
        with_ln(mu, "x^3+x/4", |x| x * x * x + 0.25 * x),
        square(),
    ]
}

/// Increasing `f_mu` that change sign; `L_n f` itself need not be increasing.
fn increasing_signed_fmu(mu: Mu) -> Vec<AnalyticFunction> {
    vec![
        with_ln(mu, "tanh", |x| (5.0 * (x - 0.5)).tanh()),
        with_ln(mu, "x-1", |x| x - 1.0),
        with_ln(mu, "x^3-1/2", |x| x * x * x - 0.5),
    ]
}

fn increasing_concave_fmu(mu: Mu) -> Vec<AnalyticFunction> {
    vec![
        with_ln(mu, "sqrt", |x| (x + 0.01).sqrt()),
        with_ln(mu, "1-(1-x)^2", |x| 1.0 - (1.0 - x) * (1.0 - x)),
        with_ln(mu, "ln(1+x)", |x| x.ln_1p()),
        with_ln(mu, "sin", |x| (1.5707963267948966 * x).sin()),
    ]
}

/// Ten functions whose `f_mu` is increasing and convex on `[0,1]`.
pub fn increasing_convex_cases(mu: Mu) -> Vec<AnalyticFunction> {
    vec![
        with_ln(mu, "x", |x| x),
        with_ln(mu, "x^2", |x| x * x),
        with_ln(mu, "x^3", |x| x * x * x),
        with_ln(mu, "e^x", f64::exp),
        with_ln(mu, "e^2x", |x| (2.0 * x).exp()),
        with_ln(mu, "x^2+x", |x| x * x + x),
        with_ln(mu, "cosh", f64::cosh),
        with_ln(mu, "x e^x", |x| x * x.exp()),
        with_ln(mu, "1/(2-x)", |x| 1.0 / (2.0 - x)),
        with_ln(mu, "x^2.5", |x| x.powf(2.5)),
    ]
}

fn shape_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let grid = Grid::uniform(201)?;
    let degrees = [5usize, 20, 100];
    let mut agreement = 0.0f64;
    for f in [square(), sine(), exponential()] {
        for &n in &degrees {
            let op = LogarithmicOperator::new(mu, n)?.apply(&f);
            for i in 1..50 {
                let x = i as f64 / 50.0;
                let h = 1e-5;
                let fd = (op.eval(x + h) - op.eval(x - h)) / (2.0 * h);
                let d = lnf_derivative(&f, mu, n, x)?;
                agreement = agreement.max((d - fd).abs() / d.abs().max(1.0));
            }
        }
    }
    let mut min_d1 = f64::INFINITY;
    let mut min_ratio_d1 = f64::INFINITY;
    for (f, nonneg) in increasing_fmu(mu)
        .into_iter()
        .map(|f| (f, true))
        .chain(increasing_signed_fmu(mu).into_iter().map(|f| (f, false)))
    {
        for &n in &degrees {
            let t = DerivativeTables::new(LogarithmicOperator::new(mu, n)?.apply(&f));
            for &x in grid.nodes() {
                min_ratio_d1 = min_ratio_d1.min(t.ratio_d1(x));
                if nonneg {
                    min_d1 = min_d1.min(lnf_derivative(&f, mu, n, x)?);
                }
            }
        }
    }
    let mut max_d2 = f64::NEG_INFINITY;
    for f in increasing_concave_fmu(mu) {
        for &n in &degrees {
            for &x in grid.nodes().iter().filter(|&&x| x > 0.0 && x < 1.0) {
                max_d2 = max_d2.max(second_derivative_ratio(&f, mu, n, x)?);
            }
        }
    }
    let chain_grid = Grid::uniform(101)?;
    let chain_degrees = cfg.degrees(&[1, 2, 5, 10, 20, 50]);
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    let cases = increasing_convex_cases(mu);
    for f in &cases {
        let r = monotone_in_n_check(f, mu, &chain_degrees, &chain_grid, ShapeClass::IncreasingConvex)?;
        violations += r.violations;
        min_margin = min_margin.min(r.min_step_margin.min(r.min_limit_margin));
    }
    let mirrored = with_ln(mu, "-x^2", |x| -x * x);
    let r = monotone_in_n_check(&mirrored, mu, &chain_degrees, &chain_grid, ShapeClass::DecreasingConcave)?;
    violations += r.violations;
    min_margin = min_margin.min(r.min_step_margin.min(r.min_limit_margin));
    Ok(vec![
        CheckResult::at_most(
            "shape.derivative_agreement",
            agreement,
            1e-5,
            "max relative gap between the derivative formula and central differences of L_n f",
        ),
        CheckResult::at_least(
            "shape.monotonicity_preservation",
            min_d1,
            -1e-10,
            "min of (L_n f)' for increasing nonnegative f_mu",
        ),
        CheckResult::at_least(
            "shape.ratio_monotonicity_preservation",
            min_ratio_d1,
            -1e-10,
            "min of (L_n f / ln_mu)' for increasing f_mu of either sign",
        ),
        CheckResult::at_most(
            "shape.concavity_preservation",
            max_d2,
            1e-10,
            "max of (L_n f / ln_mu)'' for increasing concave f_mu",
        ),
        CheckResult::new(
            "shape.monotone_in_n",
            violations == 0,
            violations as f64,
            0.0,
            format!(
                "chain violations over {} increasing-convex cases and one decreasing-concave case; smallest margin {min_margin:e}",
                cases.len()
            ),
        ),
    ])
}

/// A random test function for the BV check: a smooth trigonometric sum,
/// or `ln_mu` times a piecewise-linear profile with three kinks.
pub fn random_bv_function<R: Rng + ?Sized>(rng: &mut R, mu: Mu) -> AnalyticFunction {
    if rng.random_bool(0.25) {
        let mut kinks: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..0.95)).collect();
        kinks.sort_by(f64::total_cmp);
        let levels: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xs = [0.0, kinks[0], kinks[1], kinks[2], 1.0];
        AnalyticFunction::new("piecewise", move |x: f64| {
            let i = xs.windows(2).position(|w| x <= w[1]).unwrap_or(3);
            let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            mu.ln_shift(x) * (levels[i] + t * (levels[i + 1] - levels[i]))
        })
    } else {
        let terms: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..12.0), rng.random_range(0.0..6.3)))
            .collect();
        let c0 = rng.random_range(-1.0..1.0);
        AnalyticFunction::new("trig", move |x: f64| {
            c0 + terms.iter().map(|(a, w, p)| a * (w * x + p).sin()).sum::<f64>()
        })
    }
}

fn bv_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let mut rng = cfg.rng(7);
    let degrees = cfg.degrees(&[5, 20, 80]);
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0usize;
    let mut fns: Vec<AnalyticFunction> = match &cfg.function {
        Some(f) => vec![f.clone()],
        None => (0..100).map(|_| random_bv_function(&mut rng, mu)).collect(),
    };
    fns.push(crate::function::ln_mu_function(mu));
    for (i, f) in fns.iter().enumerate() {
        let n = degrees[i % degrees.len()];
        let r = bv_contraction_check(f, mu, n)?;
        cases += 1;
        worst = worst.max(r.norm_lnf.norm - r.norm_f.norm);
        if !r.holds {
            violations += 1;
        }
    }
    Ok(vec![CheckResult::new(
        "shape.bv_contraction",
        violations == 0,
        violations as f64,
        0.0,
        format!("violations of ||L_n f||_BV <= ||f||_BV + 1e-9 over {cases} cases; largest excess {worst:e}"),
    )])
}

// ---------------------------------------------------------------- denoise

fn denoise_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let report = paper_example_suite_on(cfg.grid_points)?;
    let dev = report
        .cases
        .iter()
        .map(|c| (c.max_error - c.reported_error).abs())
        .fold(0.0f64, f64::max);
    let f = paper_signal();
    let grid = cfg.grid()?;

    let mu1 = Mu::new(PAPER_MUS[0])?;
    let signal = synthesize_noisy(&f, mu1, 30)?;
    let a = denoise(&signal, &grid)?;
    let b = denoise(&synthesize_noisy(&f, mu1, 30)?, &grid)?;
    let identical = a
        .reconstruction
        .values
        .iter()
        .zip(&b.reconstruction.values)
        .all(|(u, v)| u.to_bits() == v.to_bits());

    let m = mu1.get();
    let ln_g = {
        let f = f.clone();
        AnalyticFunction::new("ln g", move |x: f64| ((1.0 + m + x) * f.eval(x)).ln())
    };
    let approx = log_signal_approximant(&signal)?;
    let mut consistency = 0.0f64;
    for &x in grid.nodes() {
        consistency = consistency.max((approx.eval(x) - logarithmic(&ln_g, mu1, 30, x)?).abs());
    }

    let rec_degrees = [10usize, 30, 100, 300];
    let errors: Vec<f64> = rec_degrees
        .iter()
        .map(|&n| {
            let mut r = denoise(&synthesize_noisy(&f, mu1, n)?, &grid)?;
            let e = crate::denoise::max_reconstruction_error(&r, &f);
            r.max_error = Some(e);
            Ok(e)
        })
        .collect::<Result<_>>()?;
    let recovering = errors.windows(2).all(|w| w[1] < w[0]);

    let mut kernel = 0.0f64;
    for mu_v in PAPER_MUS {
        let mu = Mu::new(mu_v)?;
        for c in [-0.5, 0.3, 1.0, 2.0] {
            let h = AnalyticFunction::new("exp(c ln_mu)", move |x| (c * mu.ln_shift(x)).exp());
            for n in [1usize, 4, 10, 30, 100] {
                let r = denoise(&synthesize_noisy(&h, mu, n)?, &grid)?;
                kernel = kernel.max(r.reconstruction.sup_error(&|x| h.eval(x)));
            }
        }
    }

    Ok(vec![
        CheckResult::at_most(
            "denoise.reference_errors",
            dev,
            0.005,
            "max |measured - reported| over the six reference reconstruction errors",
        )
        .with("max_error", report.cases.iter().map(|c| c.max_error).collect())
        .with("reported_error", report.cases.iter().map(|c| c.reported_error).collect()),
        CheckResult::new(
            "denoise.monotone_improvement",
            report.monotone_improvement && report.positive,
            if report.monotone_improvement { 0.0 } else { 1.0 },
            0.0,
            format!("error(n=30) < error(n=10) for every noise level; reconstructions positive: {}", report.positive),
        ),
        CheckResult::new(
            "denoise.determinism",
            identical,
            if identical { 0.0 } else { 1.0 },
            0.0,
            "two runs on identical input compared bit for bit",
        ),
        CheckResult::at_most(
            "denoise.consistency",
            consistency,
            1e-12,
            "max gap between the denoiser's L_n(ln g) and the operator applied to ln g",
        ),
        CheckResult::new(
            "denoise.asymptotic_recovery",
            recovering,
            errors[errors.len() - 1],
            errors[0],
            "max error strictly decreasing along n = 10, 30, 100, 300",
        )
        .with("degrees", rec_degrees.iter().map(|&n| n as f64).collect())
        .with("max_error", errors),
        CheckResult::at_most(
            "denoise.kernel_exactness",
            kernel,
            1e-10,
            "max reconstruction error for f = exp(c ln_mu)",
        ),
    ])
}
