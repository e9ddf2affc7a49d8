//! Reference values computed outside the library: exact rationals, 50-digit
//! evaluations of the defining sums, and symbolic derivatives.

mod common;

use approx::assert_relative_eq;
use logbern_core::analysis::{
    differential_operator_d, error_bound, inverse_theorem_diagnostic, modulus_of_continuity, saturation_solution,
    sup_error, voronovskaja_limit, voronovskaja_residual, GrowthClass, SaturationCoefficients,
};
use logbern_core::denoise::{denoise, max_reconstruction_error, paper_example_suite, synthesize_noisy, PAPER_ERRORS};
use logbern_core::function::{abs_center, builtin, ln_mu_function, paper_signal, sine, square, AnalyticFunction, Grid};
use logbern_core::numerics::{algebraic_moment, first_absolute_moment, weight_integral};
use logbern_core::operators::logarithmic;
use logbern_core::shape::{
    bv_norm, divided_diff, lnf_derivative, monotone_in_n_check, second_derivative_ratio, DifferenceOrder, ShapeClass,
};
use logbern_core::warp::{gamma_n, warp, Mu, WarpContext};
use logbern_core::Error;

fn mu(v: f64) -> Mu {
    Mu::new(v).unwrap()
}

#[test]
fn exact_rational_moments() {
    // T_{8,2}(1/4) = 3/2, T_{8,4}(1/4) = 105/16
    assert_relative_eq!(algebraic_moment(8, 2, 0.25).unwrap(), 1.5, max_relative = 1e-14);
    assert_relative_eq!(algebraic_moment(8, 4, 0.25).unwrap(), 6.5625, max_relative = 1e-14);
    // sum_k |3/10 - k/16| p_{16,k}(3/10) = 918217151627139 / 10^16
    assert_relative_eq!(first_absolute_moment(16, 0.3).unwrap(), 0.0918217151627139, max_relative = 1e-13);
    assert_relative_eq!(weight_integral(10, 7).unwrap(), 1.0 / 11.0, max_relative = 1e-12);
}

#[test]
fn high_precision_operator_values() {
    let sq = square();
    assert_relative_eq!(logarithmic(&sq, mu(1.0), 10, 0.3).unwrap(), 0.1080872798807375449, max_relative = 1e-14);
    assert_relative_eq!(logarithmic(&sine(), mu(0.2688), 200, 0.7).unwrap(), 0.64390218305854075345, max_relative = 1e-13);
    assert_relative_eq!(
        logarithmic(&abs_center(), mu(1.1294), 37, 0.5).unwrap(),
        0.06616472310511051332,
        max_relative = 1e-13
    );
    assert_eq!(warp(&WarpContext::new(mu(1.0), 2).unwrap(), 0.5).unwrap(), 0.5278352655171847);
}

#[test]
fn gap_maximum_matches_closed_form() {
    let cases = [
        (10usize, 0.49593431428787151512, 0.0060985688929286068143),
        (100, 0.49958437171306322459, 0.00062344247348427479201),
        (1000, 0.49995834374670256032, 0.000062484379989529767097),
        (10000, 0.49999583343749670151, 6.2498437549911404149e-6),
    ];
    for (n, xbar, g) in cases {
        let m = gamma_n(&WarpContext::new(mu(1.0), n).unwrap());
        assert_relative_eq!(m.gamma, g, max_relative = 1e-9);
        assert!((m.x_star - xbar).abs() < 1e-5, "n={n}: {} vs {xbar}", m.x_star);
    }
}

#[test]
fn symbolic_voronovskaja_values() {
    let sq = square();
    let v = voronovskaja_limit(&sq, mu(1.0), 0.5).unwrap();
    assert_relative_eq!(v, 0.21391073113786111540, max_relative = 1e-13);
    assert_relative_eq!(
        differential_operator_d(&sq, mu(0.2688), 0.3).unwrap(),
        0.11715055451311224464,
        max_relative = 1e-13
    );
    assert_eq!(differential_operator_d(&sq, mu(1.0), 0.5).unwrap(), v);
    assert_eq!(voronovskaja_limit(&sq, mu(1.0), 0.0).unwrap(), 0.0);
    assert_eq!(voronovskaja_limit(&sq, mu(1.0), 1.0).unwrap(), 0.0);
    let second = AnalyticFunction::new("ln_mu e^-x/2", |x: f64| (2.0 + x).ln() * (-x / 2.0).exp());
    assert!(differential_operator_d(&second, mu(1.0), 0.4).unwrap().abs() < 1e-8);
}

#[test]
fn voronovskaja_residual_behaviour() {
    let m = mu(1.0);
    let l = ln_mu_function(m);
    for n in [3usize, 50, 700] {
        assert!(voronovskaja_residual(&l, m, n, 0.37).unwrap().scaled_residual.abs() < 1e-9);
        assert_eq!(voronovskaja_residual(&square(), m, n, 0.0).unwrap().scaled_residual, 0.0);
    }
    let d500 = voronovskaja_residual(&square(), m, 500, 0.5).unwrap().deviation;
    let d4000 = voronovskaja_residual(&square(), m, 4000, 0.5).unwrap().deviation;
    assert!(d4000 * 4.0 <= d500, "{d4000} vs {d500}");
}

#[test]
fn modulus_examples() {
    let w = modulus_of_continuity(&square(), 0.1).unwrap();
    assert!((w.omega - 0.19).abs() < 1e-12);
    assert!(w.grid_step <= 0.01);
    assert_eq!(modulus_of_continuity(&AnalyticFunction::new("c", |_| 4.0), 0.3).unwrap().omega, 0.0);
    let lin = modulus_of_continuity(&AnalyticFunction::new("3x", |x| -3.0 * x), 0.25).unwrap();
    assert!((lin.omega - 0.75).abs() < 1e-12);
    assert!(matches!(modulus_of_continuity(&square(), 0.0), Err(Error::Parameter(_))));
    let scan = common::modulus(&|x| x * x, 0.1, 10_000);
    assert!((scan - w.omega).abs() < 1e-12);
}

#[test]
fn error_bound_examples() {
    let m = mu(1.0);
    let l = ln_mu_function(m);
    assert_eq!(error_bound(&l, m, 40).unwrap(), 0.0);
    let grid = Grid::uniform(1001).unwrap();
    assert!(sup_error(&l, m, 40, &grid).unwrap() < 1e-13);
    let b = error_bound(&square(), m, 100).unwrap();
    assert!(sup_error(&square(), m, 100, &grid).unwrap() <= b);
    let bounds: Vec<f64> = [10usize, 40, 160, 640].iter().map(|&n| error_bound(&square(), m, n).unwrap()).collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn saturation_examples() {
    let m = mu(1.0);
    let grid = Grid::uniform(1001).unwrap();
    let ln = saturation_solution(SaturationCoefficients { a: 1.0, b: 0.0 }, m);
    assert!(sup_error(&ln, m, 50, &grid).unwrap() < 1e-13);
    let zero = saturation_solution(SaturationCoefficients { a: 0.0, b: 0.0 }, m);
    assert_eq!(logarithmic(&zero, m, 9, 0.3).unwrap(), 0.0);
    let f = saturation_solution(SaturationCoefficients { a: 0.7, b: -0.3 }, m);
    let scaled: Vec<f64> = [50usize, 100, 200, 400, 800, 1600]
        .iter()
        .map(|&n| n as f64 * sup_error(&f, m, n, &grid).unwrap())
        .collect();
    assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    let via_registry = builtin("saturation:0.7:-0.3", m).unwrap();
    assert_eq!(via_registry.eval(0.42), f.eval(0.42));
}

#[test]
fn inverse_theorem_examples() {
    let m = mu(1.0);
    let grid = Grid::uniform(401).unwrap();
    let n_list = [32usize, 128, 512];
    let kernel = saturation_solution(SaturationCoefficients { a: -1.2, b: 0.9 }, m);
    let r = inverse_theorem_diagnostic(&kernel, m, &n_list, &grid).unwrap();
    assert!(r.limit_sup < 1e-12 && r.saturation_sup < 1e-10);
    let r = inverse_theorem_diagnostic(&square(), m, &n_list, &grid).unwrap();
    assert_eq!(r.classification, GrowthClass::Bounded);
    assert!(r.rows.iter().all(|row| row.scaled_sup_error <= 1.05 * r.limit_sup));
    let r = inverse_theorem_diagnostic(&abs_center(), m, &n_list, &grid).unwrap();
    assert_eq!(r.classification, GrowthClass::Unbounded);
}

#[test]
fn divided_difference_tables() {
    let m = mu(1.0);
    let d1 = divided_diff(&square(), m, 4, DifferenceOrder::First).unwrap();
    let d2 = divided_diff(&square(), m, 4, DifferenceOrder::Second).unwrap();
    let g = |k: f64| {
        let x = k / 4.0;
        x * x / (2.0 + x).ln()
    };
    for k in 0..4 {
        let kf = k as f64;
        assert_relative_eq!(d1.values[k], 4.0 * (g(kf + 1.0) - g(kf)), max_relative = 1e-13);
    }
    for k in 0..3 {
        let kf = k as f64;
        assert_relative_eq!(d2.values[k], 16.0 * (g(kf + 2.0) - 2.0 * g(kf + 1.0) + g(kf)), max_relative = 1e-12);
    }
}

#[test]
fn derivative_formulas_against_finite_differences() {
    let m = mu(1.0);
    let sq = square();
    let h = 1e-5;
    let fd = (logarithmic(&sq, m, 20, 0.3 + h).unwrap() - logarithmic(&sq, m, 20, 0.3 - h).unwrap()) / (2.0 * h);
    assert_relative_eq!(lnf_derivative(&sq, m, 20, 0.3).unwrap(), fd, max_relative = 1e-6);
    let r = |x: f64| logarithmic(&sq, m, 20, x).unwrap() / (2.0 + x).ln();
    let h = 1e-4;
    let fd2 = (r(0.5 + h) - 2.0 * r(0.5) + r(0.5 - h)) / (h * h);
    assert_relative_eq!(second_derivative_ratio(&sq, m, 20, 0.5).unwrap(), fd2, max_relative = 1e-5);
    let l = ln_mu_function(m);
    for x in [0.0, 0.6, 1.0] {
        assert_relative_eq!(lnf_derivative(&l, m, 9, x).unwrap(), 1.0 / (2.0 + x), max_relative = 1e-12);
    }
    // f_mu = 3x: second ratio reduces to 3 a_n''
    let lin = AnalyticFunction::new("3x ln_mu", |x: f64| 3.0 * x * (2.0 + x).ln());
    let ctx = WarpContext::new(m, 11).unwrap();
    assert_relative_eq!(second_derivative_ratio(&lin, m, 11, 0.4).unwrap(), 3.0 * ctx.node_d2(0.4), max_relative = 1e-9);
}

#[test]
fn bv_norm_examples() {
    let m = mu(1.0);
    let p = Grid::uniform(101).unwrap();
    let sq = AnalyticFunction::new("x^2 ln_mu", |x: f64| x * x * (2.0 + x).ln());
    let b = bv_norm(&sq, m, p.nodes()).unwrap();
    assert_relative_eq!(b.variation, 1.0, max_relative = 1e-12);
    assert_relative_eq!(b.norm, 1.0, max_relative = 1e-12);
    let mono = bv_norm(&paper_signal(), m, p.nodes()).unwrap();
    let g = |x: f64| paper_signal().eval(x) / (2.0 + x).ln();
    assert_relative_eq!(mono.variation, (g(1.0) - g(0.0)).abs(), max_relative = 1e-12);
}

#[test]
fn monotone_in_n_examples() {
    let m = mu(1.0);
    let grid = Grid::uniform(101).unwrap();
    let n_list: Vec<usize> = (5..=50).step_by(5).collect();
    let sq = AnalyticFunction::new("x^2 ln_mu", |x: f64| x * x * (2.0 + x).ln());
    let r = monotone_in_n_check(&sq, m, &n_list, &grid, ShapeClass::IncreasingConvex).unwrap();
    assert!(r.holds && r.min_step_margin > 0.0 && r.min_limit_margin > 0.0);
    let neg = AnalyticFunction::new("-x^2 ln_mu", |x: f64| -x * x * (2.0 + x).ln());
    assert!(monotone_in_n_check(&neg, m, &n_list, &grid, ShapeClass::DecreasingConcave).unwrap().holds);
    assert!(matches!(
        monotone_in_n_check(&neg, m, &n_list, &grid, ShapeClass::IncreasingConvex),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn paper_example_values() {
    // 50-digit evaluations of the reconstruction on the 1001-point grid
    let reference = [
        [0.110920883155259, 0.0342702080520488],
        [0.0657714758210939, 0.0202133743526281],
        [0.0622252948669752, 0.0190921346627527],
    ];
    let report = paper_example_suite().unwrap();
    for (i, case) in report.cases.iter().enumerate() {
        let (r, c) = (i / 2, i % 2);
        assert_relative_eq!(case.max_error, reference[r][c], max_relative = 1e-10);
        assert!((case.max_error - PAPER_ERRORS[r][c]).abs() <= 0.005);
        assert_eq!(case.series.len(), 1001);
    }
    assert!(report.monotone_improvement && report.positive);
}

#[test]
fn denoise_pipeline_examples() {
    let f = paper_signal();
    let s = synthesize_noisy(&f, mu(0.2688), 10).unwrap();
    assert_eq!(s.samples().len(), 11);
    assert_relative_eq!(s.samples()[0], 1.2688 * 0.1, max_relative = 1e-15);
    let grid = Grid::uniform(1001).unwrap();
    let errors: Vec<f64> = [10usize, 30, 100, 300]
        .iter()
        .map(|&n| {
            let r = denoise(&synthesize_noisy(&f, mu(0.2688), n).unwrap(), &grid).unwrap();
            max_reconstruction_error(&r, &f)
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let r = denoise(&s, &grid).unwrap();
    let shifted = AnalyticFunction::new("shift", {
        let r = r.clone();
        move |x| r.reconstruction.values[(x * 1000.0).round() as usize] + 0.01
    });
    assert!((max_reconstruction_error(&r, &shifted) - 0.01).abs() < 1e-15);
}
