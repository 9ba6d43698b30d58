use ibvp_lab::expr::eta;
use ibvp_lab::field::Field2D;
use ibvp_lab::grid::{integrate, LineSamples};
use ibvp_lab::sobolev::{
    fourier_hs_norm, gagliardo_seminorm, h1200_norm, hardy_integral, hsdelta_norm, mollifier_equiv_norm,
    weighted_hs_gamma_norm, MollifierSpec,
};
use ibvp_lab::Verdict;

fn cut(x: f64) -> f64 {
    eta(x, 0.5, 1.5)
}

fn half_line(n: usize, ext: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
    let h = ext / n as f64;
    ((0..=n).map(|i| f(i as f64 * h)).collect(), h)
}

#[test]
fn gaussian_l2_norm() {
    let u = LineSamples::from_fn(-20.0, 20.0, 1024, |x| (-x * x / 2.0).exp());
    let r = fourier_hs_norm(&u, 0.0).unwrap();
    assert!((r.value - std::f64::consts::PI.sqrt().sqrt()).abs() < 1e-6, "{}", r.value);
    assert!((r.value - 1.33133).abs() < 1e-5);
}

#[test]
fn gaussian_h1_matches_quadrature() {
    let u = LineSamples::from_fn(-20.0, 20.0, 1024, |x| (-x * x / 2.0).exp());
    let r = fourier_hs_norm(&u, 1.0).unwrap();
    let n = 10 * 1024;
    let h = 40.0 / n as f64;
    let sq: Vec<f64> = (0..=n)
        .map(|i| {
            let x = -20.0 + i as f64 * h;
            let v = (-x * x / 2.0).exp();
            v * v + (x * v) * (x * v)
        })
        .collect();
    let want = integrate(&sq, h).sqrt();
    assert!((r.value - want).abs() < 1e-6 * want, "{} vs {want}", r.value);
}

#[test]
fn zero_inputs_give_zero() {
    let z = LineSamples::from_fn(-4.0, 4.0, 64, |_| 0.0);
    assert_eq!(fourier_hs_norm(&z, 1.5).unwrap().value, 0.0);
    assert_eq!(hsdelta_norm(&z, 0.5, 0.25).unwrap().value, 0.0);
    assert_eq!(mollifier_equiv_norm(&z, 0.5, 0.25, &MollifierSpec::for_order(0.5)).unwrap().value, 0.0);
    let zz = vec![0.0; 65];
    assert_eq!(hardy_integral(&zz, 0.1).value, 0.0);
    assert_eq!(hardy_integral(&zz, 0.1).verdict, Verdict::Finite);
    assert_eq!(h1200_norm(&zz, 0.1).value, 0.0);
    assert_eq!(gagliardo_seminorm(&vec![3.0; 65], 0.1, 0.4).unwrap().value, 0.0);
    assert_eq!(weighted_hs_gamma_norm(&Field2D::zeros(1, 8, 8, 0.1, 0.1), 0.0, 1.0).unwrap().value, 0.0);
}

#[test]
fn step_seminorm_threshold() {
    let (u, h) = half_line(1024, 2.0, |x| if x < 1.0 { 1.0 } else { 0.0 });
    assert_eq!(gagliardo_seminorm(&u, h, 0.25).unwrap().verdict, Verdict::Finite);
    assert_eq!(gagliardo_seminorm(&u, h, 0.75).unwrap().verdict, Verdict::Divergent);
}

#[test]
fn smooth_seminorm_is_stable_under_refinement() {
    let f = |x: f64| x * (-x).exp();
    let (a, ha) = half_line(1024, 16.0, f);
    let (b, hb) = half_line(2048, 16.0, f);
    let ra = gagliardo_seminorm(&a, ha, 0.5).unwrap();
    let rb = gagliardo_seminorm(&b, hb, 0.5).unwrap();
    assert_eq!(ra.verdict, Verdict::Finite);
    assert!((ra.value / rb.value - 1.0).abs() < 0.02, "{} {}", ra.value, rb.value);
}

#[test]
fn hardy_root_matches_quadrature() {
    let (u, h) = half_line(1 << 14, 2.0, |x| x.powf(0.3) * cut(x));
    let r = hardy_integral(&u, h);
    assert_eq!(r.verdict, Verdict::Finite);
    // int_0^{1/2} x^-0.4 exactly, the cutoff ramp by fine quadrature.
    let (ramp, hr) = {
        let n = 20000;
        let hr = 1.0 / n as f64;
        let v: Vec<f64> = (0..=n)
            .map(|i| {
                let x = 0.5 + i as f64 * hr;
                x.powf(-0.4) * cut(x).powi(2)
            })
            .collect();
        (v, hr)
    };
    let want = 0.5f64.powf(0.6) / 0.6 + integrate(&ramp, hr);
    assert!((r.value - want).abs() < 1e-2 * want, "{} vs {want}", r.value);
}

#[test]
fn hardy_detects_cutoff_at_corner() {
    let (u, h) = half_line(4096, 2.0, cut);
    let r = hardy_integral(&u, h);
    assert_eq!(r.verdict, Verdict::Divergent);
    let incs: Vec<f64> = r.truncation_sequence.windows(2).map(|w| w[1] - w[0]).collect();
    let last = incs[incs.len() - 1];
    assert!((last - std::f64::consts::LN_2).abs() < 0.01, "per-octave increment {last}");
}

#[test]
fn h1200_separates_from_h_half() {
    let (u, h) = half_line(4096, 2.0, cut);
    assert_eq!(gagliardo_seminorm(&u, h, 0.5).unwrap().verdict, Verdict::Finite);
    assert_eq!(h1200_norm(&u, h).verdict, Verdict::Divergent);
    let (v, hv) = half_line(4096, 16.0, |x| x * (-x).exp());
    assert_eq!(h1200_norm(&v, hv).verdict, Verdict::Finite);
}

#[test]
fn weighted_separable_value() {
    let n = 1024;
    let h = 10.0 / n as f64;
    let mut u = Field2D::zeros(1, n, n, h, h);
    for j in 0..=n {
        for i in 0..=n {
            u.data[[0, j, i]] = (-(i as f64) * h - j as f64 * h).exp();
        }
    }
    let r = weighted_hs_gamma_norm(&u, 0.0, 1.0).unwrap();
    assert!((r.value - 0.125f64.sqrt()).abs() < 1e-4, "{}", r.value);
    let r2 = weighted_hs_gamma_norm(&u, 0.0, 2.0).unwrap();
    assert!(r2.value < r.value);
}

#[test]
fn hsdelta_at_one_is_hs() {
    let v = LineSamples::from_fn(-16.0, 16.0, 512, |x| (-x * x).exp());
    for s in [0.0, 0.5, 1.5] {
        let a = hsdelta_norm(&v, s, 1.0).unwrap().value;
        let b = fourier_hs_norm(&v, s).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hsdelta_increases_to_next_order() {
    let v = LineSamples::from_fn(-16.0, 16.0, 512, |x| (-x * x).exp());
    let limit = fourier_hs_norm(&v, 1.5).unwrap().value;
    let mut prev = 0.0;
    for d in [1.0, 0.5, 0.25, 0.1, 0.01, 1e-4] {
        let n = hsdelta_norm(&v, 0.5, d).unwrap().value;
        assert!(n > prev && n <= limit * (1.0 + 1e-12));
        prev = n;
    }
    assert!((prev / limit - 1.0).abs() < 1e-4);
}

#[test]
fn mollifier_envelope_for_gaussian() {
    let v = LineSamples::from_fn(-16.0, 16.0, 1024, |x| (-x * x).exp());
    let rho = MollifierSpec::for_order(0.5);
    let ratios: Vec<f64> = [1.0, 0.25, 1.0 / 16.0]
        .iter()
        .map(|&d| mollifier_equiv_norm(&v, 0.5, d, &rho).unwrap().value / hsdelta_norm(&v, 0.5, d).unwrap().value)
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let mid = mollifier_equiv_norm(&v, 0.5, 0.5, &rho).unwrap().value / hsdelta_norm(&v, 0.5, 0.5).unwrap().value;
    assert!(mid >= 0.9 * lo && mid <= 1.1 * hi, "{mid} vs [{lo}, {hi}]");
}

#[test]
fn mollifier_norm_of_step_is_finite() {
    let v = LineSamples::from_fn(-8.0, 8.0, 2048, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 });
    let r = mollifier_equiv_norm(&v, 0.25, 1.0, &MollifierSpec::for_order(0.25)).unwrap();
    assert!(r.value.is_finite());
    let (u, h) = half_line(1024, 2.0, |x| if x < 1.0 { 1.0 } else { 0.0 });
    assert_eq!(gagliardo_seminorm(&u, h, 0.25).unwrap().verdict, Verdict::Finite);
}
