use std::f64::consts::PI;

use proptest::prelude::*;
use rmt_fluct::funclab::*;
use rmt_fluct::limitvar::*;

fn quad(phi: &TestFunction, family: Family) -> f64 {
    limit_variance_quadrature(&LimitVarianceRequest {
        phi: phi.clone(),
        family,
        method: Method::Quadrature,
    })
    .unwrap()
}

fn cheb(phi: &TestFunction, family: Family) -> f64 {
    limit_variance_chebyshev(phi, family).unwrap().value
}

/// Tanh–sinh trapezoid for `∫_{-2}^{2} g(x)/√(4−x²) dx`.
fn tanh_sinh_arcsine<G: Fn(f64) -> f64>(g: G) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for i in -400i32..=400 {
        let t = i as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let x = 2.0 * u.tanh();
        // 4 − x² = 4 sech²u, dx = 2 sech²u · (π/2) cosh t dt
        let w = 0.5 * PI * t.cosh() / u.cosh();
        if w.is_finite() && w > 0.0 {
            sum += g(x) * w;
        }
    }
    h * sum
}

#[test]
fn methods_agree_on_corpus() {
    for phi in corpus() {
        let tol = match phi.class {
            RegularityClass::Smooth => 1e-6,
            RegularityClass::Holder(a) if a >= 0.6 => 1e-3,
            _ => continue,
        };
        let q = quad(&phi, Family::Gue);
        let c = cheb(&phi, Family::Gue);
        let err = (q - c).abs() / (1.0 + q.abs());
        assert!(err <= tol, "{}: {q} vs {c}", phi.label);
    }
}

#[test]
fn goe_doubles_gue() {
    for phi in corpus().into_iter().filter(|p| p.class != RegularityClass::Indicator) {
        let r = quad(&phi, Family::Goe) / quad(&phi, Family::Gue);
        assert!((r - 2.0).abs() < 1e-10, "{}", phi.label);
        let r = cheb(&phi, Family::Goe) / cheb(&phi, Family::Gue);
        assert!((r - 2.0).abs() < 1e-10, "{}", phi.label);
    }
}

#[test]
fn wigner_corrections() {
    let x2 = lookup("x2").unwrap();
    let oracle = tanh_sinh_arcsine(|x| x * x * (2.0 - x * x));
    assert!((oracle + 2.0 * PI).abs() < 1e-8, "{oracle}");
    // (κ₄/4π²)(−2π)² with κ₄ = 1
    let extra = limit_variance_general_wigner(&x2, 1.0, 2.0).unwrap() - quad(&x2, Family::Gue);
    assert!((extra - oracle * oracle / (4.0 * PI * PI)).abs() < 1e-8);
    let via_cheb = cheb(&x2, Family::WignerGeneral { kappa4: 1.0, w2: 2.0 }) - 2.0;
    assert!((via_cheb - 1.0).abs() < 1e-10);

    // odd φ: no κ₄ term; the w₂ term uses ∫x²(2−x²)/√(4−x²) = −2π
    let x = lookup("x").unwrap();
    let k = limit_variance_general_wigner(&x, 3.0, 2.0).unwrap();
    assert!((k - 1.0).abs() < 1e-10);
    let w = limit_variance_general_wigner(&x, 0.0, 3.0).unwrap();
    assert!((w - 2.0).abs() < 1e-10);
}

#[test]
fn finiteness_frontier() {
    let refine = |phi: &TestFunction, min_width: f64| {
        let opts = QuadratureOptions {
            min_width,
            tolerance: None,
            ..Default::default()
        };
        quadrature_with(phi, Family::Gue, &opts).unwrap().0
    };
    for label in ["abs0.6", "abs0.8"] {
        let phi = lookup(label).unwrap();
        let a = refine(&phi, 1e-6);
        let b = refine(&phi, 1e-12);
        assert!((a - b).abs() < 1e-3 * b, "{label}: {a} {b}");
    }
    let ind = lookup("indicator").unwrap();
    let vals: Vec<f64> = [1e-3, 1e-6, 1e-9, 1e-12].iter().map(|&w| refine(&ind, w)).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0] + 0.1), "{vals:?}");
    // and the default evaluator refuses to report a value
    assert!(limit_variance_quadrature(&LimitVarianceRequest {
        phi: ind.clone(),
        family: Family::Gue,
        method: Method::Quadrature
    })
    .is_err());
    assert!(limit_variance_chebyshev(&ind, Family::Gue).unwrap().low_regularity);
    assert!(!limit_variance_chebyshev(&lookup("abs0.6").unwrap(), Family::Gue).unwrap().low_regularity);
}

#[test]
fn table_csv() {
    let rows: Vec<LimitVariance> = ["x", "bump"]
        .iter()
        .flat_map(|l| {
            let phi = lookup(l).unwrap();
            [Method::Quadrature, Method::Chebyshev].map(|method| {
                limit_variance(&LimitVarianceRequest { phi: phi.clone(), family: Family::Gue, method }).unwrap()
            })
        })
        .collect();
    let mut buf = Vec::new();
    write_table_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("x,gue,quadrature,1.0000000000000"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scale_and_shift(c in -4.0f64..4.0, d in -10.0f64..10.0, which in 0usize..4) {
        let phi = lookup(["x", "x2", "bump", "sin3"][which]).unwrap();
        let base = quad(&phi, Family::Gue);
        let scaled = quad(&phi.affine(c, 0.0), Family::Gue);
        prop_assert!((scaled - c * c * base).abs() <= 1e-12 * (1.0 + c * c * base));
        let shifted = quad(&phi.affine(1.0, d), Family::Gue);
        prop_assert!((shifted - base).abs() <= 1e-10);
        let shifted = cheb(&phi.affine(1.0, d), Family::Gue);
        prop_assert!((shifted - base).abs() <= 1e-10);
    }
}
