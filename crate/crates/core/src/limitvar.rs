//! Limiting variances of linear eigenvalue statistics, by double quadrature
//! in the angle variable and independently by Chebyshev coefficients.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::funclab::TestFunction;
use crate::quad::PanelRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gue,
    Goe,
    WignerGeneral { kappa4: f64, w2: f64 },
    /// Johansson-type matrices with spectrum on `[-√2, √2]`.
    JohanssonSqrt2,
}

impl Family {
    /// Spectral edge implied by the family.
    pub fn edge(&self) -> f64 {
        match self {
            Family::JohanssonSqrt2 => std::f64::consts::SQRT_2,
            _ => 2.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gue => write!(f, "gue"),
            Family::Goe => write!(f, "goe"),
            Family::WignerGeneral { kappa4, w2 } => write!(f, "wigner(kappa4={kappa4};w2={w2})"),
            Family::JohanssonSqrt2 => write!(f, "johansson"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;
    /// `gue`, `goe`, `johansson`, or `wigner:kappa4,w2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "gue" => return Ok(Family::Gue),
            "goe" => return Ok(Family::Goe),
            "johansson" | "johansson-sqrt2" => return Ok(Family::JohanssonSqrt2),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("wigner:") {
            let v: Vec<f64> = rest
                .split(',')
                .map(|p| p.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad family `{s}`: {e}")))?;
            if let [kappa4, w2] = v[..] {
                return Ok(Family::WignerGeneral { kappa4, w2 });
            }
        }
        Err(Error::Config(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    Chebyshev,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::Chebyshev => "chebyshev",
        })
    }
}

#[derive(Debug, Clone)]
pub struct LimitVarianceRequest {
    pub phi: TestFunction,
    pub family: Family,
    pub method: Method,
}

/// Knobs of the angle-variable double quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub per_panel: usize,
    pub max_width: f64,
    /// Smallest panel next to a singular point.
    pub min_width: f64,
    /// Relative node-doubling tolerance; `None` skips the check.
    pub tolerance: Option<f64>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        // 16 panels × 32 nodes = 512 nodes for smooth φ
        QuadratureOptions {
            per_panel: 32,
            max_width: PI / 16.0,
            min_width: 1e-12,
            tolerance: Some(1e-7),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevReport {
    pub value: f64,
    /// Coefficients `c_0..c_K` of `φ(e cos θ)`.
    pub coefficients: Vec<f64>,
    /// Number of terms actually summed.
    pub terms: usize,
    /// `Σ k c_k²` over dyadic blocks `[2^j, 2^{j+1})`.
    pub block_sums: Vec<f64>,
    /// Set when the coefficient tail does not decay (below `H^{1/2}`).
    pub low_regularity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitVariance {
    pub label: String,
    pub family: Family,
    pub method: Method,
    pub value: f64,
    /// Node-doubling change (quadrature) or last summed increment (Chebyshev).
    pub diagnostic: f64,
    pub low_regularity: bool,
}

/// Dispatches on the requested method.
pub fn limit_variance(req: &LimitVarianceRequest) -> Result<LimitVariance> {
    let (value, diagnostic, low_regularity) = match req.method {
        Method::Quadrature => {
            let (v, d) = quadrature_with(&req.phi, req.family, &QuadratureOptions::default())?;
            (v, d, false)
        }
        Method::Chebyshev => {
            let r = limit_variance_chebyshev(&req.phi, req.family)?;
            let last = r.terms as f64 * r.coefficients.get(r.terms).map_or(0.0, |c| c * c);
            (r.value, last, r.low_regularity)
        }
    };
    Ok(LimitVariance {
        label: req.phi.label.clone(),
        family: req.family,
        method: req.method,
        value,
        diagnostic,
        low_regularity,
    })
}

pub fn limit_variance_quadrature(req: &LimitVarianceRequest) -> Result<f64> {
    Ok(quadrature_with(&req.phi, req.family, &QuadratureOptions::default())?.0)
}

fn singular_angles(phi: &TestFunction, edge: f64) -> Vec<f64> {
    phi.singular_points
        .iter()
        .filter(|&&s| s.abs() < edge)
        .map(|&s| (s / edge).acos())
        .collect()
}

fn angle_rule(phi: &TestFunction, edge: f64, opts: &QuadratureOptions, per_panel: usize) -> PanelRule {
    let sing = singular_angles(phi, edge);
    PanelRule::graded(0.0, PI, opts.max_width, &[], &sing, opts.min_width, per_panel)
}

/// `φ'(x)` by a central difference kept clear of singular points.
fn derivative(phi: &TestFunction, x: f64) -> f64 {
    let d = phi
        .singular_points
        .iter()
        .map(|s| (x - s).abs())
        .fold(f64::INFINITY, f64::min);
    let h = (1e-5f64).min(0.01 * d).max(1e-14);
    (phi.eval(x + h) - phi.eval(x - h)) / (2.0 * h)
}

/// GUE-normalised quadratic functional on `[-e, e]` with `x = e cos θ`:
/// `(1/4π²) ∬ D(x,y)² (e² − xy) dθ dψ`, `D` the difference quotient.
fn quadratic_part(phi: &TestFunction, edge: f64, rule: &PanelRule) -> Result<f64> {
    let xs: Vec<f64> = rule.nodes.iter().map(|t| edge * t.cos()).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
    let e2 = edge * edge;
    let mut total = 0.0;
    for i in 0..xs.len() {
        let dphi = derivative(phi, xs[i]);
        let mut row = rule.weights[i] * dphi * dphi * (e2 - xs[i] * xs[i]);
        for j in (i + 1)..xs.len() {
            let q = (fs[i] - fs[j]) / (xs[i] - xs[j]);
            row += 2.0 * rule.weights[j] * q * q * (e2 - xs[i] * xs[j]);
        }
        let contribution = rule.weights[i] * row;
        if !contribution.is_finite() {
            return Err(Error::NonFinite(format!(
                "limit-variance integrand of {} in the cell at theta = {:.6e}",
                phi.label, rule.nodes[i]
            )));
        }
        total += contribution;
    }
    Ok(total / (4.0 * PI * PI))
}

/// `∫ φ(x) p(x) / √(e² − x²) dx = ∫_0^π φ(e cos θ) p(e cos θ) dθ`.
fn angle_integral<P: Fn(f64) -> f64>(phi: &TestFunction, edge: f64, rule: &PanelRule, p: P) -> f64 {
    rule.integrate(|t| {
        let x = edge * t.cos();
        phi.eval(x) * p(x)
    })
}

fn family_value(phi: &TestFunction, family: Family, rule: &PanelRule) -> Result<f64> {
    let edge = family.edge();
    let q = quadratic_part(phi, edge, rule)?;
    Ok(match family {
        Family::Gue | Family::JohanssonSqrt2 => q,
        Family::Goe => 2.0 * q,
        Family::WignerGeneral { kappa4, w2 } => {
            let a = angle_integral(phi, edge, rule, |x| 2.0 - x * x);
            let b = angle_integral(phi, edge, rule, |x| x * (2.0 - x * x));
            q + kappa4 / (4.0 * PI * PI) * a * a + (w2 - 2.0) / (4.0 * PI * PI) * b * b
        }
    })
}

/// Value and node-doubling change of the quadrature evaluator.
pub fn quadrature_with(
    phi: &TestFunction,
    family: Family,
    opts: &QuadratureOptions,
) -> Result<(f64, f64)> {
    let edge = family.edge();
    let coarse = family_value(phi, family, &angle_rule(phi, edge, opts, opts.per_panel))?;
    let Some(tol) = opts.tolerance else {
        return Ok((coarse, f64::NAN));
    };
    let fine = family_value(phi, family, &angle_rule(phi, edge, opts, 2 * opts.per_panel))?;
    let delta = (fine - coarse).abs();
    if delta > tol * (1.0 + fine.abs()) {
        return Err(Error::QuadratureNoConvergence {
            context: format!("limit variance of {} ({family})", phi.label),
            delta,
        });
    }
    Ok((fine, delta))
}

/// General Hermitian Wigner limit: GUE part plus the `κ₄` and `w₂`
/// corrections, with the coefficients taken verbatim.
pub fn limit_variance_general_wigner(phi: &TestFunction, kappa4: f64, w2: f64) -> Result<f64> {
    Ok(quadrature_with(phi, Family::WignerGeneral { kappa4, w2 }, &QuadratureOptions::default())?.0)
}

/// Number of angle samples behind the discrete cosine transform.
pub const DCT_POINTS: usize = 1 << 16;
/// Truncation of the Chebyshev series.
pub const CHEBYSHEV_TERMS: usize = 2048;

/// `c_k = (2/π) ∫_0^π φ(e cos θ) cos kθ dθ` for `k <= k_max`, by the
/// midpoint (Gauss–Chebyshev) rule on `m` angles evaluated with one FFT.
pub fn chebyshev_coefficients(phi: &TestFunction, edge: f64, k_max: usize, m: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
    for j in 0..m {
        let t = PI * (j as f64 + 0.5) / m as f64;
        let v = phi.eval(edge * t.cos());
        buf[j] = Complex64::new(v, 0.0);
        buf[2 * m - 1 - j] = Complex64::new(v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    (0..=k_max.min(m - 1))
        .map(|k| {
            let tw = Complex64::from_polar(1.0, -PI * k as f64 / (2 * m) as f64);
            // Σ_j f_j cos(kθ_j) = Re(e^{-iπk/2m} V_k)/2
            (tw * buf[k]).re / m as f64
        })
        .collect()
}

fn block_sums(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut lo = 1;
    while 2 * lo <= c.len() {
        out.push((lo..2 * lo).map(|k| k as f64 * c[k] * c[k]).sum());
        lo *= 2;
    }
    out
}

/// `(1/4) Σ_{k>=1} k c_k²` (GUE normalisation; GOE doubles it).
pub fn limit_variance_chebyshev(phi: &TestFunction, family: Family) -> Result<ChebyshevReport> {
    let edge = family.edge();
    let c = chebyshev_coefficients(phi, edge, CHEBYSHEV_TERMS, DCT_POINTS);
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("Chebyshev coefficients of {}", phi.label)));
    }
    let mut sum = 0.0;
    let mut terms = c.len() - 1;
    let mut quiet = 0;
    for (k, ck) in c.iter().enumerate().skip(1) {
        let inc = k as f64 * ck * ck;
        sum += inc;
        // stop once the increments stay negligible over a few terms (odd or
        // even coefficients may vanish by parity)
        quiet = if inc < 1e-12 * (1.0 + sum) { quiet + 1 } else { 0 };
        if quiet >= 8 {
            terms = k;
            break;
        }
    }
    let blocks = block_sums(&c);
    let low_regularity = match blocks.len() {
        n if n >= 3 => {
            let (a, b) = (blocks[n - 2], blocks[n - 1]);
            a > 1e-20 && b >= 0.9 * a
        }
        _ => false,
    };
    let quad = 0.25 * sum;
    let value = match family {
        Family::Gue | Family::JohanssonSqrt2 => quad,
        Family::Goe => 2.0 * quad,
        Family::WignerGeneral { kappa4, w2 } => {
            // ∫φ(2−x²)/√(4−x²) = −π c_2 and ∫φ x(2−x²)/√(4−x²) = −π(c_1 + c_3)
            let c1 = c.get(1).copied().unwrap_or(0.0);
            let c2 = c.get(2).copied().unwrap_or(0.0);
            let c3 = c.get(3).copied().unwrap_or(0.0);
            quad + 0.25 * kappa4 * c2 * c2 + 0.25 * (w2 - 2.0) * (c1 + c3).powi(2)
        }
    };
    Ok(ChebyshevReport {
        value,
        coefficients: c,
        terms,
        block_sums: blocks,
        low_regularity,
    })
}

/// Columns `label, family, method, value, tail`.
pub fn write_table_csv<W: Write>(w: W, rows: &[LimitVariance]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "family", "method", "value", "tail", "low_regularity"])?;
    for r in rows {
        out.write_record([
            r.label.clone(),
            r.family.to_string(),
            r.method.to_string(),
            format!("{:.17e}", r.value),
            format!("{:.3e}", r.diagnostic),
            r.low_regularity.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
