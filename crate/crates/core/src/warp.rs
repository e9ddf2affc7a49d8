//! The shifted logarithm `ln_mu(x) = ln(1 + mu + x)` and the concave node
//! map `a_n(x) = ln(1 + x eps_n) / ln(1 + eps_n)`, `eps_n = 1 / (n (1 + mu))`.

use serde::Serialize;

use crate::error::{check_unit, Error, Result};

/// Strictly positive shift `mu`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Mu(f64);

impl Mu {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu > 0.0 {
            Ok(Self(mu))
        } else {
            Err(Error::Parameter(format!("mu must be a finite positive number, got {mu}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `ln(1 + mu + x)` without the domain check.
    #[inline]
    pub fn ln_shift(self, x: f64) -> f64 {
        (self.0 + x).ln_1p()
    }

    /// Derivatives of `ln_mu`: `(ln_mu, ln_mu', ln_mu'')` at `x`.
    #[inline]
    pub fn ln_shift_jet(self, x: f64) -> (f64, f64, f64) {
        let s = 1.0 + self.0 + x;
        (self.ln_shift(x), 1.0 / s, -1.0 / (s * s))
    }
}

/// `ln_mu(x) = ln(1 + mu + x)` for `x` in `[0, 1]`.
pub fn ln_mu(mu: Mu, x: f64) -> Result<f64> {
    check_unit(x, "x")?;
    Ok(mu.ln_shift(x))
}

/// Shift and degree of the node map, with `eps_n` cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WarpContext {
    mu: Mu,
    n: usize,
    eps: f64,
    ln_1p_eps: f64,
}

impl WarpContext {
    pub fn new(mu: Mu, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("degree n must be at least 1".into()));
        }
        let eps = 1.0 / (n as f64 * (1.0 + mu.get()));
        Ok(Self { mu, n, eps, ln_1p_eps: eps.ln_1p() })
    }

    pub fn mu(&self) -> Mu {
        self.mu
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `eps_n = 1 / (n (1 + mu))`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `a_n(x)` for `x` in `[0, 1]` (unchecked); exact at both endpoints.
    #[inline]
    pub fn node(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        ((x * self.eps).ln_1p() / self.ln_1p_eps).min(1.0)
    }

    /// `a_n'(x)`.
    #[inline]
    pub fn node_d1(&self, x: f64) -> f64 {
        self.eps / ((1.0 + x * self.eps) * self.ln_1p_eps)
    }

    /// `a_n''(x)`, strictly negative.
    #[inline]
    pub fn node_d2(&self, x: f64) -> f64 {
        let d = 1.0 + x * self.eps;
        -self.eps * self.eps / (d * d * self.ln_1p_eps)
    }
}

/// `a_n(x)` with domain check.
pub fn warp(ctx: &WarpContext, x: f64) -> Result<f64> {
    check_unit(x, "x")?;
    Ok(ctx.node(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapMaximum {
    pub x_star: f64,
    pub gamma: f64,
}

/// `gamma_n = max_x (a_n(x) - x)` and its maximizer.
///
/// The gap is strictly concave, so a ternary search converges; the result
/// is checked against a 1001-point scan.
pub fn gamma_n(ctx: &WarpContext) -> GapMaximum {
    let gap = |x: f64| ctx.node(x) - x;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if gap(m1) < gap(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x_star = 0.5 * (lo + hi);
    let gamma = gap(x_star);
    let scan = (0..=1000)
        .map(|i| gap(i as f64 / 1000.0))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        gamma >= scan - 1e-15 * scan.abs().max(1.0),
        "ternary search missed the gap maximum: {gamma} < {scan}"
    );
    GapMaximum { x_star, gamma }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapAsymptoticsRow {
    pub n: usize,
    pub n_gamma: f64,
    pub sqrt_n_gamma: f64,
    /// `max_x |n (a_n(x) - x) - (x - x^2) / (2 (1 + mu))|` over the grid.
    pub max_deviation: f64,
    /// `n (a_n(x) - x)` at every grid point.
    pub scaled_gap: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapAsymptoticsReport {
    pub mu: Mu,
    /// `1 / (8 (1 + mu))`, the limit of `n gamma_n`.
    pub n_gamma_limit: f64,
    pub grid: Vec<f64>,
    pub rows: Vec<GapAsymptoticsRow>,
}

/// Tabulates `n (a_n(x) - x)` against its pointwise limit and the decay of
/// `sqrt(n) gamma_n` for each degree in `n_list`.
pub fn warp_gap_asymptotics(mu: Mu, n_list: &[usize], grid: &[f64]) -> Result<GapAsymptoticsReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("degree list must be strictly increasing".into()));
    }
    for &x in grid {
        check_unit(x, "grid node")?;
    }
    let limit = |x: f64| (x - x * x) / (2.0 * (1.0 + mu.get()));
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let ctx = WarpContext::new(mu, n)?;
        let nf = n as f64;
        let scaled_gap: Vec<f64> = grid.iter().map(|&x| nf * (ctx.node(x) - x)).collect();
        let max_deviation = grid
            .iter()
            .zip(&scaled_gap)
            .map(|(&x, g)| (g - limit(x)).abs())
            .fold(0.0, f64::max);
        let gm = gamma_n(&ctx);
        rows.push(GapAsymptoticsRow {
            n,
            n_gamma: nf * gm.gamma,
            sqrt_n_gamma: nf.sqrt() * gm.gamma,
            max_deviation,
            scaled_gap,
        });
    }
    Ok(GapAsymptoticsReport {
        mu,
        n_gamma_limit: 1.0 / (8.0 * (1.0 + mu.get())),
        grid: grid.to_vec(),
        rows,
    })
}
