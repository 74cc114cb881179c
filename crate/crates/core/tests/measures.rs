use tauber::classical::{to_unified, ClassicalSpec};
use tauber::measure::{
    geometric_grid, measure_transform_kasahara, measure_transform_kohlbecker, MeasureView, QuantizedMeasure, TabulatedMeasure,
};
use tauber::transform::{log_transform, sample_at_psi, QuadratureOptions, TargetFunction};

#[test]
fn kohlbecker_quantization_brackets_the_transform() {
    let x_max = 1e4;
    let grid = geometric_grid(1e-8, x_max, 6_000, true);
    let q = QuantizedMeasure::from_log_cdf(|x| 2.0 * x.sqrt(), &grid).unwrap();
    let target = TargetFunction::pure(2.0, 0.5);
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        let sum = measure_transform_kohlbecker(&q.measure, lambda).unwrap();
        let quad = log_transform(&target, -1.0, 0.0, lambda, 1e-10).unwrap();
        let b = q.bracket(|x| -x / lambda);
        let trunc = 2.0 * lambda * (-x_max / (2.0 * lambda)).exp() / x_max.sqrt();
        assert!(b.log_lower <= sum && sum <= b.log_upper);
        assert!(quad.log_f >= b.log_lower - quad.quad_error, "lambda {lambda}");
        assert!(quad.log_f <= b.log_upper + quad.quad_error + trunc, "lambda {lambda}");
        assert!(b.width() < 0.05);
    }
}

#[test]
fn kasahara_quantization_brackets_the_transform() {
    let x_max = 30.0;
    let grid = geometric_grid(1e-8, x_max, 20_000, true);
    let q = QuantizedMeasure::from_log_tail(|x| -x * x, &grid).unwrap();
    assert!(q.log_truncated_mass < -800.0);
    let target = TargetFunction::pure(-1.0, 2.0);
    for lambda in [0.2, 1.0, 5.0] {
        let sum = measure_transform_kasahara(&q.measure, lambda).unwrap();
        let quad = log_transform(&target, 1.0, 1.0, 1.0 / lambda, 1e-10).unwrap();
        let b = q.bracket(|x| lambda * x);
        assert!(b.log_lower <= sum && sum <= b.log_upper);
        assert!(quad.log_f >= b.log_lower - quad.quad_error, "lambda {lambda}");
        assert!(quad.log_f <= b.log_upper + quad.quad_error + 1e-12, "lambda {lambda}");
    }
}

#[test]
fn stieltjes_sum_equals_piecewise_transform() {
    let m = TabulatedMeasure::parse("0\t1\n0.3\t2\n1.7\t0.25\n4\t3\n").unwrap();
    for lambda in [0.1, 1.0, 10.0] {
        let cumulative = TargetFunction::Tabulated {
            measure: m.clone(),
            view: MeasureView::Cumulative,
        };
        let by_parts = log_transform(&cumulative, -1.0, 0.0, lambda, 1e-10).unwrap().log_f;
        assert!((by_parts - measure_transform_kohlbecker(&m, lambda).unwrap()).abs() < 1e-13);

        let tail = TargetFunction::Tabulated {
            measure: m.clone(),
            view: MeasureView::Tail,
        };
        let by_parts = log_transform(&tail, 1.0, m.total_mass(), 1.0 / lambda, 1e-10).unwrap().log_f;
        assert!((by_parts - measure_transform_kasahara(&m, lambda).unwrap()).abs() < 1e-13);
    }
}

/// `∫₀^∞ g` by composite Simpson on `[lo, hi]`.
fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = g(lo) + g(hi);
    for i in 1..n {
        acc += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn de_bruijn_transform_is_f_at_reciprocal() {
    // P(y) = exp(−1/y), rate 2: M(λ) = λ ∫ P(x) e^{−2λx} dx.
    let spec = ClassicalSpec::DeBruijn {
        beta: -1.0,
        coefficient: -1.0,
        rate: 2.0,
    };
    let ad = to_unified(&spec, None).unwrap();
    let p = ad.params;
    let target = TargetFunction::for_params(&p);
    for lambda in [0.5, 2.0, 8.0] {
        let direct = lambda * simpson(|x| if x > 0.0 { (-1.0 / x - 2.0 * lambda * x).exp() } else { 0.0 }, 0.0, 40.0, 400_000);
        let s = ad.lambda_map.s_of_lambda(lambda);
        let via_f = log_transform(&target, p.c(), 0.0, s, 1e-12).unwrap().log_f;
        assert!((direct.ln() - via_f).abs() < 1e-9, "lambda {lambda}: {} vs {via_f}", direct.ln());
        let via_psi = sample_at_psi(&p, &target, p.psi_of_s(s), &QuadratureOptions::default()).unwrap();
        assert!((via_psi.log_f - via_f).abs() < 1e-9);
    }
}
