use std::fs::File;
use std::path::Path;

use logbern_core::denoise::{
    denoise as run_denoise, max_reconstruction_error, paper_example_suite_on, seeded_noise_level, synthesize_noisy,
    NoisySignal,
};
use logbern_core::function::builtin;
use logbern_core::numerics::{algebraic_moment, first_absolute_moment};
use logbern_core::suites::{run_suite, Suite, SuiteConfig, SuiteReport};
use logbern_core::{AnalyticFunction, Grid, LogarithmicOperator, Mu};
use serde::Serialize;

use crate::output::{csv_bytes, ensure_finite, fmt_f64, fmt_opt, write_atomic};
use crate::signal::SignalFile;
use crate::{CliError, Common};

/// Absolute tolerance against the reported reference errors.
const PAPER_TOLERANCE: f64 = 0.005;

fn read_signal(path: &Path) -> Result<SignalFile, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    SignalFile::parse(file).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn resolve_mu(flag: Option<f64>, header: Option<f64>) -> Result<Option<Mu>, CliError> {
    flag.or(header).map(Mu::new).transpose().map_err(CliError::from)
}

fn require_mu(flag: Option<f64>, header: Option<f64>) -> Result<Mu, CliError> {
    resolve_mu(flag, header)?.ok_or_else(|| CliError::Config("missing --mu".into()))
}

fn require_n(c: &Common) -> Result<usize, CliError> {
    match c.n {
        Some(0) => Err(CliError::Config("--n must be at least 1".into())),
        Some(n) => Ok(n),
        None => Err(CliError::Config("missing --n".into())),
    }
}

fn degrees(c: &Common) -> Result<Option<Vec<usize>>, CliError> {
    let list = match (&c.n_list, c.n) {
        (Some(l), _) => l.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Ok(None),
    };
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Config("degrees must be at least 1".into()));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("--n-list must be strictly increasing".into()));
    }
    Ok(Some(list))
}

fn grid(c: &Common) -> Result<Grid, CliError> {
    if c.grid < 2 {
        return Err(CliError::Config(format!("--grid must be at least 2, got {}", c.grid)));
    }
    Ok(Grid::uniform(c.grid)?)
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("LOGBERN_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("LOGBERN_SEED must be an unsigned integer, got '{s}'"))),
        Err(_) => Ok(None),
    }
}

fn function(c: &Common, mu: Mu) -> Result<Option<AnalyticFunction>, CliError> {
    c.function.as_deref().map(|id| builtin(id, mu)).transpose().map_err(CliError::from)
}

fn node_index(x: f64, n: usize) -> Option<usize> {
    let k = (x * n as f64).round();
    ((x - k / n as f64).abs() <= 1e-12).then_some(k as usize)
}

pub fn approximate(c: &Common) -> Result<(), CliError> {
    let grid = grid(c)?;
    let rows: Vec<Vec<String>> = if let Some(path) = &c.input {
        let sig = read_signal(path)?;
        if c.n.is_some_and(|n| n != sig.n) {
            return Err(CliError::Config(format!("--n {} disagrees with n = {} in the signal file", c.n.unwrap(), sig.n)));
        }
        let mu = require_mu(c.mu, sig.mu)?;
        let approx = LogarithmicOperator::new(mu, sig.n)?.bind(sig.values)?;
        let values = approx.eval_grid(&grid).values;
        ensure_finite("L_n f", values.iter().copied())?;
        grid.nodes()
            .iter()
            .zip(&values)
            .map(|(x, l)| vec![fmt_f64(*x), String::new(), fmt_f64(*l), String::new()])
            .collect()
    } else {
        let mu = require_mu(c.mu, None)?;
        let f = function(c, mu)?.ok_or_else(|| CliError::Config("approximate needs --fn or --in".into()))?;
        let n = require_n(c)?;
        let approx = LogarithmicOperator::new(mu, n)?.apply(&f);
        let values = approx.eval_grid(&grid).values;
        ensure_finite("L_n f", values.iter().copied())?;
        let mut sup = 0.0f64;
        let mut finite = true;
        let rows = grid
            .nodes()
            .iter()
            .zip(&values)
            .map(|(&x, &l)| {
                let fx = f.eval(x);
                let err = (l - fx).abs();
                sup = sup.max(err);
                finite &= fx.is_finite() && err.is_finite();
                vec![fmt_f64(x), fmt_f64(fx), fmt_f64(l), fmt_f64(err)]
            })
            .collect();
        if !finite {
            return Err(CliError::Numeric(format!("{} is not finite on the grid", f.name())));
        }
        eprintln!("sup_error={}", fmt_f64(sup));
        rows
    };
    write_atomic(c.out.as_deref(), &csv_bytes(&["x", "f", "Lnf", "error"], &rows)?)
}

pub fn denoise(c: &Common) -> Result<(), CliError> {
    let grid = grid(c)?;
    let mut source = "function";
    let (signal, truth) = if let Some(path) = &c.input {
        let sig = read_signal(path)?;
        source = sig.schema.name();
        if let Some((line, k, v)) = sig.first_nonpositive() {
            return Err(CliError::Data(format!(
                "{}: line {line}: sample {k} = {v} is not positive",
                path.display()
            )));
        }
        let mu = match resolve_mu(c.mu, sig.mu)? {
            Some(m) => m,
            None => seeded_mu()?,
        };
        (NoisySignal::new(sig.values, mu)?, None)
    } else if c.function.is_some() {
        let mu = match resolve_mu(c.mu, None)? {
            Some(m) => m,
            None => seeded_mu()?,
        };
        let f = function(c, mu)?.expect("checked above");
        let n = require_n(c)?;
        (synthesize_noisy(&f, mu, n)?, Some(f))
    } else {
        return Err(CliError::Config("denoise needs --in, --fn, or --paper-example".into()));
    };
    let result = run_denoise(&signal, &grid)?;
    ensure_finite("reconstruction", result.reconstruction.values.iter().copied())?;
    let mu = signal.mu_t().get();
    let rows: Vec<Vec<String>> = grid
        .nodes()
        .iter()
        .zip(&result.reconstruction.values)
        .map(|(&x, &r)| {
            let (t, noisy) = match &truth {
                Some(f) => {
                    let t = f.eval(x);
                    (Some(t), Some((1.0 + mu + x) * t))
                }
                None => (None, node_index(x, signal.n()).map(|k| signal.samples()[k])),
            };
            vec![fmt_f64(x), fmt_opt(t), fmt_opt(noisy), fmt_f64(r)]
        })
        .collect();
    write_atomic(c.out.as_deref(), &csv_bytes(&["x", "truth", "noisy", "reconstruction"], &rows)?)?;
    eprintln!("source={source} mu={} n={}", fmt_f64(mu), signal.n());
    if let Some(f) = &truth {
        println!("max_error={}", fmt_f64(max_reconstruction_error(&result, f)));
    }
    Ok(())
}

fn seeded_mu() -> Result<Mu, CliError> {
    match env_seed()? {
        Some(seed) => Ok(seeded_noise_level(seed)?),
        None => Err(CliError::Config("missing --mu (set LOGBERN_SEED to draw one)".into())),
    }
}

#[derive(Serialize)]
struct VerifyReport {
    schema: &'static str,
    mu: f64,
    grid_points: usize,
    seed: u64,
    function: Option<String>,
    n_list: Option<Vec<usize>>,
    passed: bool,
    suites: Vec<SuiteReport>,
}

pub fn verify(c: &Common, suite: &str) -> Result<(), CliError> {
    let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse::<Suite>()?] };
    grid(c)?;
    let mu = resolve_mu(c.mu, None)?.unwrap_or(Mu::new(1.0)?);
    let mut cfg = SuiteConfig::new(mu);
    cfg.n_list = degrees(c)?;
    cfg.grid_points = c.grid;
    cfg.function = function(c, mu)?;
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    let reports = suites.into_iter().map(|s| run_suite(s, &cfg)).collect::<logbern_core::Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(|c| c.id.clone()))
        .collect();
    let report = VerifyReport {
        schema: "logbern-verify v1",
        mu: mu.get(),
        grid_points: c.grid,
        seed: cfg.seed,
        function: c.function.clone(),
        n_list: cfg.n_list.clone(),
        passed,
        suites: reports,
    };
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
    json.push(b'\n');
    write_atomic(c.out.as_deref(), &json)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
    }
}

pub fn moments(c: &Common) -> Result<(), CliError> {
    let list = degrees(c)?.ok_or_else(|| CliError::Config("moments needs --n or --n-list".into()))?;
    let grid = grid(c)?;
    let mut rows = Vec::with_capacity(list.len() * grid.len());
    for &n in &list {
        let bound = 0.5 / (n as f64).sqrt();
        for &x in grid.nodes() {
            let t = [0, 1, 2, 4].map(|s| algebraic_moment(n, s, x));
            let abs = first_absolute_moment(n, x)?;
            let mut row = vec![n.to_string(), fmt_f64(x)];
            for v in t {
                let v = v?;
                ensure_finite("moment", [v])?;
                row.push(fmt_f64(v));
            }
            row.push(fmt_f64(abs));
            row.push(fmt_f64(bound));
            rows.push(row);
        }
    }
    let header = ["n", "x", "T0", "T1", "T2", "T4", "abs_moment", "abs_bound"];
    write_atomic(c.out.as_deref(), &csv_bytes(&header, &rows)?)
}

#[derive(Serialize)]
struct CaseSummary {
    mu: f64,
    n: usize,
    max_error: f64,
    reported_error: f64,
    deviation: f64,
    within_tolerance: bool,
    file: String,
}

#[derive(Serialize)]
struct PaperSummary {
    grid_points: usize,
    tolerance: f64,
    monotone_improvement: bool,
    positive: bool,
    passed: bool,
    cases: Vec<CaseSummary>,
}

pub fn paper_example(c: &Common) -> Result<(), CliError> {
    let dir = c.out.as_deref().ok_or_else(|| CliError::Config("paper-example needs --out DIR".into()))?;
    grid(c)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let report = paper_example_suite_on(c.grid)?;
    let mut cases = Vec::with_capacity(report.cases.len());
    for case in &report.cases {
        let file = format!("mu{}_n{}.csv", case.mu, case.n);
        let rows: Vec<Vec<String>> = case
            .series
            .iter()
            .map(|r| vec![fmt_f64(r.x), fmt_f64(r.truth), fmt_f64(r.noisy), fmt_f64(r.reconstruction)])
            .collect();
        ensure_finite("reconstruction", case.series.iter().map(|r| r.reconstruction))?;
        write_atomic(Some(&dir.join(&file)), &csv_bytes(&["x", "truth", "noisy", "reconstruction"], &rows)?)?;
        let deviation = (case.max_error - case.reported_error).abs();
        println!(
            "mu={} n={} max_error={} reported={} deviation={}",
            case.mu,
            case.n,
            fmt_f64(case.max_error),
            case.reported_error,
            fmt_f64(deviation)
        );
        cases.push(CaseSummary {
            mu: case.mu,
            n: case.n,
            max_error: case.max_error,
            reported_error: case.reported_error,
            deviation,
            within_tolerance: deviation <= PAPER_TOLERANCE,
            file,
        });
    }
    let passed = report.monotone_improvement && report.positive && cases.iter().all(|c| c.within_tolerance);
    let summary = PaperSummary {
        grid_points: report.grid_points,
        tolerance: PAPER_TOLERANCE,
        monotone_improvement: report.monotone_improvement,
        positive: report.positive,
        passed,
        cases,
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Numeric(e.to_string()))?;
    json.push(b'\n');
    write_atomic(Some(&dir.join("summary.json")), &json)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed("reference cases outside tolerance".into()))
    }
}
