use std::f64::consts::PI;
use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Density histogram of `samples` over `±4 sd` with the `N(0, sd²)` density
/// drawn on top.
pub fn histogram_vs_normal(samples: &[f64], sd: f64, bins: usize, title: &str) -> String {
    let (lo, hi) = (-4.0 * sd, 4.0 * sd);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x >= lo && x < hi {
            counts[((x - lo) / width) as usize] += 1;
        }
    }
    let density = |x: f64| (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt());
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (samples.len() as f64 * width)).collect();
    let top = heights.iter().copied().fold(density(0.0), f64::max) * 1.1;
    let px = |x: f64| PAD + (x - lo) / (hi - lo) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - y / top * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{y0} H{x1}" stroke="black" fill="none"/>"#,
        y0 = H - PAD,
        x1 = W - PAD
    );
    for k in -4..=4 {
        let x = px(k as f64 * sd);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{k}σ</text>"#,
            H - PAD + 14.0
        );
    }
    for (i, &h) in heights.iter().enumerate() {
        let x = px(lo + i as f64 * width);
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>"##,
            py(h),
            px(lo + width) - px(lo),
            py(0.0) - py(h)
        );
    }
    let pts: Vec<String> = (0..=200)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            format!("{:.2},{:.2}", px(x), py(density(x)))
        })
        .collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##, pts.join(" "));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_and_deterministic() {
        let xs: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 25.0 - 2.0).collect();
        let a = histogram_vs_normal(&xs, 1.0, 24, "bump <n=400>");
        assert_eq!(a, histogram_vs_normal(&xs, 1.0, 24, "bump <n=400>"));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<rect").count(), 25);
        assert!(a.contains("&lt;n=400&gt;"));
    }
}
