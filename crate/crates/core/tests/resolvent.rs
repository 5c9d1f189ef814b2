use num_complex::Complex64;
use rmt_fluct::ensembles::{sample, EnsembleSpec};
use rmt_fluct::resolvent::*;

fn gue(n: usize) -> EnsembleSpec {
    EnsembleSpec::gue(n).unwrap()
}

#[test]
fn semicircle_transform_solves_its_quadratic() {
    for i in 0..41 {
        for eta in [1e-3, 0.01, 0.1, 1.0, 10.0] {
            let p = SpectralPoint::new(-5.0 + 0.25 * i as f64, eta).unwrap();
            let m = msc(p);
            assert!(m.im > 0.0);
            assert!((m + 1.0 / (p.z() + m)).norm() <= 1e-12, "{p:?}");
        }
    }
}

#[test]
fn semicircle_transform_matches_density_integral() {
    // ∫ √(4−x²)/(2π(x−z)) dx with x = 2cosθ
    let p = SpectralPoint::new(0.7, 0.3).unwrap();
    let m = 4000;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let th = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
        let x = 2.0 * th.cos();
        acc += (2.0 * th.sin().powi(2) / std::f64::consts::PI) / (x - p.z());
    }
    acc *= std::f64::consts::PI / m as f64;
    assert!((acc - msc(p)).norm() < 1e-8);
}

#[test]
fn herglotz_and_far_field_on_samples() {
    for t in 0..20 {
        let s = sample(&gue(200), 11, t).unwrap().rescale_to_canonical();
        let ev = &s.eigenvalues;
        for &(e, eta) in &[(0.0, 1e-3), (1.9, 0.01), (-3.0, 0.1), (0.0, 10.0)] {
            let p = SpectralPoint::new(e, eta).unwrap();
            let tr = trace_resolvent(ev, p);
            assert!(tr.im > 0.0);
            assert!(tr.norm() <= ev.len() as f64 / eta * (1.0 + 1e-12));
        }
        for &(e, eta) in &[(10.0, 0.5), (0.0, 12.0), (-8.0, 8.0)] {
            let p = SpectralPoint::new(e, eta).unwrap();
            let z = p.z();
            assert!((stieltjes(ev, p) + 1.0 / z).norm() <= 2.0 / z.norm_sqr());
        }
    }
}

#[test]
fn local_law_at_desk_scale() {
    let grid: Vec<SpectralPoint> = [0.5, 0.1, 0.02, 10.0]
        .iter()
        .map(|&eta| SpectralPoint::new(0.0, eta).unwrap())
        .collect();
    let rows = local_law_deviation(&gue(1000), &grid, 200, 5).unwrap();
    assert!(rows[1].p95 <= 50.0 / (1000.0 * 0.1), "{:?}", rows[1]);
    assert!(rows[3].p95 <= 1e-2);
    assert!(rows[0].p95 < rows[1].p95 && rows[1].p95 < rows[2].p95);
    let mut buf = Vec::new();
    write_local_law_csv(&mut buf, &rows).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
}

#[test]
fn trace_variance_down_the_eta_hierarchy() {
    let etas: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).chain([10.0]).collect();
    let rows = var_trace_sweep(&gue(1000), 0.0, &etas, 500, 9).unwrap();
    let base = rows[0].scaled;
    let worst = rows[..6].iter().map(|r| r.scaled).fold(0.0, f64::max);
    assert!(worst <= 10.0 * base, "{worst} vs {base}");
    assert!(rows[6].var <= 1000.0 * 1e-3);
    assert!(rows.iter().all(|r| r.se > 0.0));
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("n,E,eta,var,se,eta^2.2*var"));
}

#[test]
fn standard_error_scales_with_trials() {
    let spec = gue(100);
    let a = var_trace_sweep(&spec, 0.3, &[0.1], 600, 2).unwrap()[0].se.powi(2);
    let b = var_trace_sweep(&spec, 0.3, &[0.1], 1200, 2).unwrap()[0].se.powi(2);
    let r = b / a;
    assert!((r - 0.5).abs() <= 0.3 * 0.5, "{r}");
}

#[test]
fn trace_variance_does_not_grow_with_n() {
    let v: Vec<(f64, f64)> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            let r = &var_trace_sweep(&gue(n), 0.0, &[0.05], 400, 21).unwrap()[0];
            (r.var, r.se)
        })
        .collect();
    for w in v.windows(2) {
        assert!(w[1].0 <= w[0].0 + 2.0 * (w[0].1 + w[1].1), "{v:?}");
    }
}

#[test]
fn shcherbina_bound_is_finite_and_monotone() {
    let n = 500;
    let cut = (n as f64).powf(-0.9);
    let eta_nodes: Vec<f64> = (0..=24).map(|j| cut * (8.0 / cut).powf(j as f64 / 24.0)).collect();
    let e_nodes: Vec<f64> = (0..=24).map(|j| -6.0 + 0.5 * j as f64).collect();
    let spec = gue(n);
    let table = variance_table(&spec, &eta_nodes, &e_nodes, 100, 4).unwrap();
    assert!(table.iter().flatten().all(|v| *v >= 0.0));
    let at = |s: f64| shcherbina_from_table(s, &eta_nodes, &e_nodes, &table);
    let direct = shcherbina_integrand(&spec, 1.1, &eta_nodes, &e_nodes, 100, 4).unwrap();
    assert!(direct.is_finite() && direct > 0.0);
    assert!((direct - at(1.1)).abs() <= 1e-12 * direct);
    let vals: Vec<f64> = (0..=6).map(|j| at(1.2 + 0.1 * j as f64)).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]) || vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    assert!(shcherbina_integrand(&spec, 0.5, &eta_nodes, &e_nodes, 10, 4).is_err());
}
