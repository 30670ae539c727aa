//! Special functions, statistics and thresholds checked against independent
//! reference computations: an erf power series inverted by bisection, a
//! Simpson-rule chi-square integral, nalgebra eigenvalues, and frozen
//! reference values.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use onebit_emr::detector::{
    dof, emr_full, emr_one_bit, emr_one_bit_from_signs, threshold, ThresholdScheme, ThresholdSpec,
};
use onebit_emr::numerics::{chi_square_cdf, chi_square_quantile, std_normal_cdf, std_normal_quantile, RngStream};
use onebit_emr::quantizer::{full_res_scm, one_bit_quantize, one_bit_scm, SignFrame};
use onebit_emr::signal::{generate_frame, population_covariance, ComplexFrame, ScenarioConfig};

/// `erf(x)` from its Maclaurin series; accurate to ~1e-13 for `|x| <= 4`.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for k in 1..200 {
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn phi_series(x: f64) -> f64 {
    0.5 * (1.0 + erf_series(x / std::f64::consts::SQRT_2))
}

fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln Gamma(q/2)` for integer `q` from factorial products only.
fn ln_gamma_half_integer(q: u64) -> f64 {
    if q.is_multiple_of(2) {
        (1..q / 2).map(|k| (k as f64).ln()).sum()
    } else {
        // Gamma(k + 1/2) = sqrt(pi) prod_{j=1..k} (j - 1/2)
        let k = (q - 1) / 2;
        0.5 * std::f64::consts::PI.ln() + (1..=k).map(|j| (j as f64 - 0.5).ln()).sum::<f64>()
    }
}

fn chi2_pdf_ref(x: f64, q: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let h = q as f64 / 2.0;
    ((h - 1.0) * x.ln() - x / 2.0 - h * 2f64.ln() - ln_gamma_half_integer(q)).exp()
}

/// Composite Simpson rule on `[0, x]` after substituting `x = u^2`, which
/// removes the square-root behaviour of odd-`q` densities at the origin.
fn chi2_cdf_ref(x: f64, q: u64) -> f64 {
    let g = |u: f64| {
        if u == 0.0 {
            if q == 1 {
                (2.0 / std::f64::consts::PI).sqrt()
            } else {
                0.0
            }
        } else {
            2.0 * u * chi2_pdf_ref(u * u, q)
        }
    };
    let steps = 20_000;
    let end = x.sqrt();
    let h = end / steps as f64;
    let mut s = g(0.0) + g(end);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn normal_cdf_matches_erf_series() {
    for i in -80..=80 {
        let x = i as f64 * 0.05;
        let (a, b) = (std_normal_cdf(x), phi_series(x));
        assert!((a - b).abs() < 1e-12, "x={x}: {a} vs {b}");
    }
}

#[test]
fn normal_quantile_matches_bisection_on_erf_series() {
    for &p in &[0.001, 0.005, 0.01, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.99, 0.999] {
        let want = bisect(-6.0, 6.0, p, phi_series);
        let got = std_normal_quantile(p).unwrap();
        assert!((got - want).abs() < 1e-9, "p={p}: {got} vs {want}");
    }
}

#[test]
fn normal_quantile_deep_tail_reference_values() {
    let table = [
        (2f64.powi(-60), -8.77332116902755),
        (2f64.powi(-40), -7.047700256664409),
        (1e-10, -6.361340902404056),
        (0.999, 3.090232306167813),
        (0.975, 1.959963984540054),
    ];
    for (p, want) in table {
        let got = std_normal_quantile(p).unwrap();
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "p={p}: {got} vs {want}");
    }
}

#[test]
fn chi_square_cdf_matches_simpson_integral() {
    for q in [1u64, 2, 3, 28, 120] {
        let mean = q as f64;
        for frac in [0.3, 0.7, 1.0, 1.4, 2.0] {
            let x = mean * frac;
            let (got, want) = (chi_square_cdf(x, q).unwrap(), chi2_cdf_ref(x, q));
            assert!((got - want).abs() < 1e-9, "q={q} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn chi_square_quantile_matches_bisection_on_simpson_integral() {
    for q in [2u64, 28, 120] {
        for p in [0.01, 0.5, 0.99, 0.999] {
            let want = bisect(0.0, 10.0 * q as f64 + 50.0, p, |x| chi2_cdf_ref(x, q));
            let got = chi_square_quantile(p, q).unwrap();
            assert!((got - want).abs() < 1e-6 * want.max(1.0), "q={q} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn chi_square_reference_values() {
    let table = [
        (0.999, 28, 56.892285393353625),
        (0.5, 1, 0.454936423119572),
        (0.99, 120, 158.95016589730625),
        (0.999, 2016, 2217.9363642248486),
    ];
    for (p, q, want) in table {
        let got = chi_square_quantile(p, q).unwrap();
        assert!((got - want).abs() < 1e-7 * want, "p={p} q={q}: {got} vs {want}");
    }
    let cdf = chi_square_cdf(27.336, 28).unwrap();
    assert!((cdf - 0.49998760837576484).abs() < 1e-10);
}

#[test]
fn exact_and_normal_one_bit_thresholds_agree_at_large_q() {
    let (m, n, eps) = (4, 1000, 1e-3);
    assert_eq!(dof(m), 28);
    let spec = |s| ThresholdSpec::new(m, n, eps, s).unwrap();
    let exact = threshold(&spec(ThresholdScheme::OneBitExact)).unwrap();
    let normal = threshold(&spec(ThresholdScheme::OneBitNormal)).unwrap();
    // 1 + 56.892 / 4000
    assert!((exact - (1.0 + 56.892285393353625 / 4000.0)).abs() < 1e-12);
    // At q = 28 the CLT quantile sits about 10% below the chi-square one:
    // sqrt(56) (3.0902 + sqrt(14)) = 51.125 against 56.892.
    let rel = (exact - normal) / (exact - 1.0);
    assert!((rel - 0.1014).abs() < 1e-3, "relative gap {rel}");
    let big = |s| threshold(&ThresholdSpec::new(64, 100_000, eps, s).unwrap()).unwrap();
    let rel = (big(ThresholdScheme::OneBitExact) - big(ThresholdScheme::OneBitNormal))
        / (big(ThresholdScheme::OneBitExact) - 1.0);
    assert!(rel.abs() < 0.02, "relative gap at q = 8128: {rel}");
}

#[test]
fn full_resolution_threshold_formula() {
    let spec = ThresholdSpec::new(64, 128, 1e-2, ThresholdScheme::FullRes).unwrap();
    let want = 1.0 + 0.5 + 2f64.sqrt() * 2.3263478740408408 / 128.0;
    assert!((threshold(&spec).unwrap() - want).abs() < 1e-12);
}

/// Real `2m x 2m` embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix;
/// each eigenvalue appears twice.
fn real_embedding(m: usize, at: impl Fn(usize, usize) -> Complex64) -> DMatrix<f64> {
    DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let z = at(r % m, c % m);
        match (r < m, c < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[test]
fn population_covariance_top_eigenvalue() {
    let (m, snr_db) = (6, 3.0);
    let cfg = ScenarioConfig::single_pu(m, 10, snr_db, -std::f64::consts::FRAC_PI_3);
    let r = population_covariance(&cfg).unwrap();
    let eig = SymmetricEigen::new(real_embedding(m, |i, j| r.get(i, j)));
    let top = eig.eigenvalues.max();
    let sigma2 = 10f64.powf(snr_db / 10.0) * cfg.noise_power;
    assert!((top - (cfg.noise_power + m as f64 * sigma2)).abs() < 1e-10);
    let min = eig.eigenvalues.min();
    assert!((min - cfg.noise_power).abs() < 1e-10);
}

#[test]
fn full_resolution_emr_equals_eigenvalue_moment_ratio() {
    let (m, n) = (5, 40);
    let cfg = ScenarioConfig::single_pu(m, n, 0.0, 0.4);
    let frame = generate_frame(&cfg, &mut RngStream::new(3, 9)).unwrap();
    let phi = full_res_scm(&frame).unwrap();
    let eig = SymmetricEigen::new(real_embedding(m, |i, j| phi.get(i, j)));
    // Doubling in the embedding cancels: (2 sum l^2) / (2 sum l)^2 * 2m.
    let l = &eig.eigenvalues;
    let ratio = 2.0 * m as f64 * l.iter().map(|v| v * v).sum::<f64>() / l.sum().powi(2);
    assert!((emr_full(&phi).unwrap() - ratio).abs() < 1e-10);
}

#[test]
fn one_bit_emr_matches_dense_reference() {
    let (m, n) = (3, 17);
    let frame = generate_frame(&ScenarioConfig::single_pu(m, n, 2.0, 1.0), &mut RngStream::new(5, 1)).unwrap();
    let z = one_bit_quantize(&frame);
    // Dense 2m x n sign matrix, real parts stacked over imaginary parts.
    let mut dense = DMatrix::<f64>::zeros(2 * m, n);
    for k in 0..m {
        for t in 0..n {
            let x = frame.get(k, t);
            dense[(k, t)] = if x.re >= 0.0 { 1.0 } else { -1.0 };
            dense[(m + k, t)] = if x.im >= 0.0 { 1.0 } else { -1.0 };
        }
    }
    let s = &dense * dense.transpose() / n as f64;
    let mut want = 1.0;
    for j in 0..2 * m {
        for i in 0..j {
            want += s[(i, j)] * s[(i, j)] / m as f64;
        }
    }
    assert!((emr_one_bit_from_signs(&z) - want).abs() < 1e-12);
    assert!((emr_one_bit(&one_bit_scm(&z).unwrap(), m).unwrap() - want).abs() < 1e-12);
}

#[test]
fn exact_zero_quantizes_to_plus_one() {
    let z = one_bit_quantize(&ComplexFrame::zeros(2, 3));
    for r in 0..4 {
        for t in 0..3 {
            assert_eq!(z.get(r, t), 1);
        }
    }
    let z = SignFrame::from_signs(2, 3, &[1, -1, 1, 1, 1, -1]).unwrap();
    assert_eq!(z.correlation_sum(0, 1), -1);
}
