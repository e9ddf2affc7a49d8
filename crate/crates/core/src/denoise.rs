//! Removal of the multiplicative distortion `y = (1 + mu + x) f(x)`.
//!
//! Taking logarithms turns the distortion into the additive term `ln_mu`,
//! which `L_n` reproduces exactly, so
//! `f(x) ≈ exp(L_n(ln g, x)) / (1 + mu + x)`.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{paper_signal, AnalyticFunction, Grid, GridFunction};
use crate::operators::{LogApproximant, LogarithmicOperator};
use crate::warp::Mu;

/// Samples `y_k` at the nodes `k/n`, `k = 0..=n`, with the known noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisySignal {
    n: usize,
    samples: Vec<f64>,
    mu_t: Mu,
}

impl NoisySignal {
    /// `samples.len() - 1` becomes the degree `n`; every sample must be positive.
    pub fn new(samples: Vec<f64>, mu_t: Mu) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Input(format!("need at least 2 samples, got {}", samples.len())));
        }
        if let Some((k, y)) = samples.iter().enumerate().find(|(_, y)| !(y.is_finite() && **y > 0.0)) {
            return Err(Error::Input(format!("sample {k} is {y}; samples must be finite and positive")));
        }
        Ok(Self { n: samples.len() - 1, samples, mu_t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mu_t(&self) -> Mu {
        self.mu_t
    }

    /// The node abscissae `k/n`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| k as f64 / self.n as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseResult {
    pub reconstruction: GridFunction,
    pub max_error: Option<f64>,
    pub n: usize,
    pub mu_t: f64,
}

/// `y_k = (1 + mu_t + k/n) f(k/n)`.
pub fn synthesize_noisy(f: &AnalyticFunction, mu_t: Mu, n: usize) -> Result<NoisySignal> {
    if n == 0 {
        return Err(Error::Parameter("degree n must be at least 1".into()));
    }
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let x = k as f64 / n as f64;
        let v = f.eval(x);
        if !(v > 0.0) {
            return Err(Error::Input(format!("f({x}) = {v} is not positive at node {k}")));
        }
        samples.push((1.0 + mu_t.get() + x) * v);
    }
    NoisySignal::new(samples, mu_t)
}

/// `L_n(ln g, ·)` with `mu = mu_t`, bound to the logged samples.
pub fn log_signal_approximant(signal: &NoisySignal) -> Result<LogApproximant> {
    let op = LogarithmicOperator::new(signal.mu_t, signal.n)?;
    op.bind(signal.samples.iter().map(|y| y.ln()).collect())
}

/// `exp(L_n(ln g, x)) / (1 + mu_t + x)` on every grid node.
pub fn denoise(signal: &NoisySignal, grid: &Grid) -> Result<DenoiseResult> {
    let approx = log_signal_approximant(signal)?;
    let mu = signal.mu_t.get();
    let values = grid
        .nodes()
        .iter()
        .map(|&x| approx.eval(x).exp() / (1.0 + mu + x))
        .collect();
    Ok(DenoiseResult {
        reconstruction: GridFunction { nodes: grid.nodes().to_vec(), values },
        max_error: None,
        n: signal.n,
        mu_t: mu,
    })
}

/// `max over the grid of |reconstruction - truth|`.
pub fn max_reconstruction_error(result: &DenoiseResult, truth: &AnalyticFunction) -> f64 {
    result.reconstruction.sup_error(&|x| truth.eval(x))
}

/// Draws a noise level from `N(0, sigma^2)`, rejecting non-positive draws.
pub fn sample_noise_level<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<Mu> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Parameter(format!("invalid noise deviation {sigma}: {e}")))?;
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("noise deviation must be positive, got {sigma}")));
    }
    loop {
        let v: f64 = normal.sample(rng);
        if v > 0.0 {
            return Mu::new(v);
        }
    }
}

/// Standard deviation of the noise-level model `mu(t) ~ N(0, 0.25)`.
pub const NOISE_SIGMA: f64 = 0.5;

/// One positive draw from `N(0, NOISE_SIGMA^2)` with a ChaCha8 stream seeded by `seed`.
pub fn seeded_noise_level(seed: u64) -> Result<Mu> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    sample_noise_level(NOISE_SIGMA, &mut rng)
}

/// Noise levels of the three reference experiments.
pub const PAPER_MUS: [f64; 3] = [0.2688, 0.9169, 1.1294];
/// Sample counts of the reference experiments.
pub const PAPER_NS: [usize; 2] = [10, 30];
/// Reported maximum reconstruction errors, indexed like `PAPER_MUS x PAPER_NS`.
pub const PAPER_ERRORS: [[f64; 2]; 3] = [[0.1109, 0.0343], [0.0658, 0.0202], [0.0622, 0.0191]];

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub x: f64,
    pub truth: f64,
    pub noisy: f64,
    pub reconstruction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperCase {
    pub mu: f64,
    pub n: usize,
    pub max_error: f64,
    pub reported_error: f64,
    /// `x, f(x), (1 + mu + x) f(x), reconstruction(x)` on the evaluation grid.
    pub series: Vec<SeriesRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperExampleReport {
    pub grid_points: usize,
    pub cases: Vec<PaperCase>,
    /// `error(n = 30) < error(n = 10)` for every noise level.
    pub monotone_improvement: bool,
    /// Every reconstruction value is positive.
    pub positive: bool,
}

/// Runs the six reference cases on a uniform grid of `grid_points` nodes.
pub fn paper_example_suite_on(grid_points: usize) -> Result<PaperExampleReport> {
    let f = paper_signal();
    let grid = Grid::uniform(grid_points)?;
    let mut cases = Vec::with_capacity(6);
    let mut positive = true;
    for (i, &m) in PAPER_MUS.iter().enumerate() {
        let mu = Mu::new(m)?;
        for (j, &n) in PAPER_NS.iter().enumerate() {
            let signal = synthesize_noisy(&f, mu, n)?;
            let mut result = denoise(&signal, &grid)?;
            let max_error = max_reconstruction_error(&result, &f);
            result.max_error = Some(max_error);
            positive &= result.reconstruction.values.iter().all(|v| *v > 0.0);
            let series = grid
                .nodes()
                .iter()
                .zip(&result.reconstruction.values)
                .map(|(&x, &r)| {
                    let truth = f.eval(x);
                    SeriesRow { x, truth, noisy: (1.0 + m + x) * truth, reconstruction: r }
                })
                .collect();
            cases.push(PaperCase { mu: m, n, max_error, reported_error: PAPER_ERRORS[i][j], series });
        }
    }
    let monotone_improvement = cases.chunks(2).all(|c| c[1].max_error < c[0].max_error);
    Ok(PaperExampleReport { grid_points, cases, monotone_improvement, positive })
}

/// The six reference cases on the default 1001-point grid.
pub fn paper_example_suite() -> Result<PaperExampleReport> {
    paper_example_suite_on(1001)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_signal_samples() {
        let one = AnalyticFunction::new("one", |_| 1.0);
        let s = synthesize_noisy(&one, Mu::new(1.0).unwrap(), 2).unwrap();
        let expected = [2.0, 2.5, 3.0];
        for (a, b) in s.samples().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        let mu = Mu::new(0.5).unwrap();
        let f = AnalyticFunction::new("x-0.5", |x| x - 0.5);
        assert!(matches!(synthesize_noisy(&f, mu, 4), Err(Error::Input(_))));
        assert!(matches!(NoisySignal::new(vec![1.0, 0.0, 2.0], mu), Err(Error::Input(_))));
        assert!(matches!(NoisySignal::new(vec![1.0], mu), Err(Error::Input(_))));
    }

    #[test]
    fn endpoint_values_are_recovered_exactly() {
        let c = AnalyticFunction::new("c", |_| 2.5);
        let mu = Mu::new(0.9169).unwrap();
        let s = synthesize_noisy(&c, mu, 10).unwrap();
        let r = denoise(&s, &Grid::uniform(2).unwrap()).unwrap();
        assert_abs_diff_eq!(r.reconstruction.values[0], 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.reconstruction.values[1], 2.5, epsilon = 1e-14);
    }

    #[test]
    fn sampler_only_yields_positive_levels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            assert!(sample_noise_level(0.5, &mut rng).unwrap().get() > 0.0);
        }
        assert!(sample_noise_level(0.0, &mut rng).is_err());
        assert_eq!(seeded_noise_level(11).unwrap(), seeded_noise_level(11).unwrap());
    }
}
