//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

/// `ln C(n, k)` by plain summation of logarithms.
pub fn ln_binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `p_{n,k}(x)` through plain log-space arithmetic.
pub fn weight(n: usize, k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binom(n, k) + k as f64 * x.ln() + (n - k) as f64 * (-x).ln_1p()).exp()
}

/// `p_{n,k}(x)` by running products, for small `n`.
pub fn product_weights(n: usize, x: f64) -> Vec<f64> {
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

pub fn ln_mu(mu: f64, x: f64) -> f64 {
    (1.0 + mu + x).ln()
}

/// `a_n(x) = ln(1 + x/(n(1+mu))) / ln(1 + 1/(n(1+mu)))`.
pub fn warp(mu: f64, n: usize, x: f64) -> f64 {
    let s = n as f64 * (1.0 + mu);
    (x / s).ln_1p() / (1.0 / s).ln_1p()
}

/// Closed-form maximizer of `a_n(x) - x` and the maximum.
pub fn gamma(mu: f64, n: usize) -> (f64, f64) {
    let e = 1.0 / (n as f64 * (1.0 + mu));
    let xbar = 1.0 / e.ln_1p() - 1.0 / e;
    (xbar, warp(mu, n, xbar) - xbar)
}

/// `ln_mu(x) sum_k f(k/n) / ln_mu(k/n) p_{n,k}(a_n(x))`, summed directly.
pub fn log_operator(f: &dyn Fn(f64) -> f64, mu: f64, n: usize, x: f64) -> f64 {
    let a = warp(mu, n, x);
    let s: f64 = (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            f(t) / ln_mu(mu, t) * weight(n, k, a)
        })
        .sum();
    ln_mu(mu, x) * s
}

/// `sum_k f(k/n) p_{n,k}(r)`.
pub fn bernstein_at(f: &dyn Fn(f64) -> f64, n: usize, r: f64) -> f64 {
    (0..=n).map(|k| f(k as f64 / n as f64) * weight(n, k, r)).sum()
}

/// `1/2 ln_mu (x - x^2) [g'/(1+mu) + g'']` for `g = f / ln_mu`, with `g'`
/// and `g''` from the expanded quotient rule.
pub fn voronovskaja_limit(f: [f64; 3], mu: f64, x: f64) -> f64 {
    let s = 1.0 + mu + x;
    let l = s.ln();
    let (l1, l2) = (1.0 / s, -1.0 / (s * s));
    let [f0, f1, f2] = f;
    let g1 = (f1 * l - f0 * l1) / (l * l);
    let g2 = f2 / l - 2.0 * f1 * l1 / (l * l) - f0 * l2 / (l * l) + 2.0 * f0 * l1 * l1 / (l * l * l);
    0.5 * l * (x - x * x) * (g1 / (1.0 + mu) + g2)
}

/// `sup |f(x) - f(y)|` over grid pairs with `|x - y| <= delta`, by direct scan.
pub fn modulus(f: &dyn Fn(f64) -> f64, delta: f64, intervals: usize) -> f64 {
    let v: Vec<f64> = (0..=intervals).map(|i| f(i as f64 / intervals as f64)).collect();
    let w = (delta * intervals as f64 + 1e-9).floor() as usize;
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..=(i + w).min(v.len() - 1) {
            best = best.max((v[i] - v[j]).abs());
        }
    }
    best
}

pub fn uniform(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

pub const PAPER_MUS: [f64; 3] = [0.2688, 0.9169, 1.1294];

pub fn paper_f(x: f64) -> f64 {
    x * x / 5.0 + x.sin() + x / 2.0 + 0.1
}
