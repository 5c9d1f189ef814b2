//! The Gaussian-convolution (Brézin–Hikami/Johansson) kernel.
//!
//! `M = H + (GUE with variance 1/(4n))`, with `H` having eigenvalues `z`
//! (semicircle of radius 1 at leading order, so `M` has radius √2). Its
//! correlation kernel is
//!
//! ```text
//! K(x,y) = −(n/π²) e^{2n(x²−y²)} ∫_Γ dw ∮_γ ds e^{n f_x(w) − n f_y(s)} / (w − s),
//! f_x(w) = 2(w² − 2xw) + (1/n) Σ log(w − z_j),
//! ```
//!
//! with `γ` a counter-clockwise rectangle around the `z_j` and `Γ` an upward
//! vertical line to its right. Two evaluations are provided:
//!
//! * crossing contours: `Γ` through the saddle of `f_x`, the rectangle's
//!   horizontal sides through the saddles of `f_y`. Dragging `Γ` across `γ`
//!   picks up `2πi ∫ e^{4n(y−x)s} ds` along the part of `γ` right of `Γ`,
//!   which on the diagonal is exactly the leading term `n ρ_sc(x)`.
//! * singularity-free: since `(∂_w + ∂_s)` kills `1/(w−s)`, integrating by
//!   parts gives `4(x−y) ∬ e/(w−s) = ∬ g e` with
//!   `g = 4 − (1/n) Σ 1/((w−z_j)(s−z_j))`, a pole-free integrand that
//!   splits into sums of products of one-dimensional integrals. The diagonal
//!   follows by differentiating in `x`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;

use crate::ensembles::{sample, EnsembleSpec};
use crate::error::{Error, Result};
use crate::quad::PanelRule;
use crate::resolvent::msc_at;

/// Largest `n` accepted by the contour evaluators.
pub const MAX_CONTOUR_N: usize = 200;
/// Exponent `δ₂` in the admissible range `|x| ≤ √2 − n^{−1/3+δ₂}`.
pub const DELTA2: f64 = 0.05;

const POLE_GUARD: f64 = 1e-10;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationSource {
    Sampled,
    SemicircleQuantiles,
    Zero,
}

/// Eigenvalues `z` of the non-Gaussian part `H = W/(2√n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationData {
    pub z: Vec<f64>,
    pub source: DeformationSource,
    pub n: usize,
    /// Set when a sampled spectrum violates `max|z| ≤ 1.2√2` at `n ≥ 200`.
    pub outlier: bool,
}

/// Distribution function of the radius-one semicircle `(2/π)√(1−x²)`.
fn semicircle_cdf(x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI
}

fn semicircle_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid) > p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

impl DeformationData {
    /// `z_j = F^{−1}((j − 1/2)/n)` for the radius-one semicircle.
    pub fn semicircle_quantiles(n: usize) -> Result<Self> {
        check_n(n)?;
        let z = (1..=n).map(|j| semicircle_quantile((j as f64 - 0.5) / n as f64)).collect();
        Ok(DeformationData { z, source: DeformationSource::SemicircleQuantiles, n, outlier: false })
    }

    /// `z ≡ 0`: `M` is then a GUE matrix with spectrum in `[−1, 1]`.
    pub fn zero(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(DeformationData { z: vec![0.0; n], source: DeformationSource::Zero, n, outlier: false })
    }

    pub fn from_eigenvalues(mut z: Vec<f64>, source: DeformationSource) -> Result<Self> {
        check_n(z.len())?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("deformation eigenvalues".into()));
        }
        z.sort_by(f64::total_cmp);
        let n = z.len();
        let outlier = source == DeformationSource::Sampled
            && n >= 200
            && z.iter().any(|v| v.abs() > 1.2 * 2f64.sqrt());
        Ok(DeformationData { z, source, n, outlier })
    }

    /// One draw of `H = W/(2√n)` from the given Wigner ensemble.
    pub fn sampled(spec: &EnsembleSpec, seed: u64, trial: u64) -> Result<Self> {
        let s = sample(spec, seed, trial)?.rescale_to_canonical();
        Self::from_eigenvalues(s.eigenvalues.iter().map(|x| 0.5 * x).collect(), DeformationSource::Sampled)
    }

    /// `(1/n) Σ 1/(z_j − ζ)`.
    pub fn stieltjes(&self, zeta: Complex64) -> Complex64 {
        self.z.iter().map(|&v| 1.0 / (v - zeta)).sum::<Complex64>() / self.n as f64
    }

    /// Local-law spot check `|m(ζ) − m_1(ζ)| ≤ 10/(nη)` against the radius-one
    /// semicircle transform `m_1(ζ) = 2 m_sc(2ζ)`.
    pub fn satisfies_local_law(&self) -> bool {
        [-0.5, 0.0, 0.5].iter().all(|&e| {
            [0.1, 0.5].iter().all(|&eta| {
                let zeta = Complex64::new(e, eta);
                let dev = (self.stieltjes(zeta) - 2.0 * msc_at(2.0 * zeta)).norm();
                dev <= 10.0 / (self.n as f64 * eta)
            })
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.z.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn nearest(&self, w: Complex64) -> f64 {
        self.z.iter().fold(f64::INFINITY, |m, &v| m.min((w - v).norm()))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("deformation needs n >= 1".into()));
    }
    Ok(())
}

/// `f_{n,x}(w)` with the principal branch of each logarithm.
pub fn phase_eval(x: f64, data: &DeformationData, w: Complex64) -> Result<Complex64> {
    let dist = data.nearest(w);
    if dist < 1e-14 {
        return Err(Error::TooCloseToPole { w: w.to_string(), dist });
    }
    Ok(phase_unchecked(x, data, w))
}

fn log_product(data: &DeformationData, w: Complex64) -> Complex64 {
    data.z.iter().map(|&v| (w - v).ln()).sum()
}

fn phase_unchecked(x: f64, data: &DeformationData, w: Complex64) -> Complex64 {
    2.0 * (w * w - 2.0 * x * w) + log_product(data, w) / data.n as f64
}

/// `f′_{n,x}(w) = 4(w − x) + (1/n) Σ 1/(w − z_j)`.
pub fn phase_derivative(x: f64, data: &DeformationData, w: Complex64) -> Complex64 {
    4.0 * (w - x) - data.stieltjes(w)
}

fn phase_second(data: &DeformationData, w: Complex64) -> Complex64 {
    let s: Complex64 = data.z.iter().map(|&v| 1.0 / ((w - v) * (w - v))).sum();
    4.0 - s / data.n as f64
}

/// Root of `f′_{n,x}` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePair {
    pub s_plus: Complex64,
    pub iterations: usize,
    /// `|f′(s_plus)|`.
    pub residual: f64,
    pub x: f64,
}

impl SaddlePair {
    pub fn s_minus(&self) -> Complex64 {
        self.s_plus.conj()
    }
}

/// Limiting saddle `3x/4 + i√(2−x²)/4`.
pub fn limiting_saddle(x: f64) -> Complex64 {
    Complex64::new(0.75 * x, 0.25 * (2.0 - x * x).max(0.0).sqrt())
}

/// Largest admissible `|x|` at size `n`.
pub fn admissible_edge(n: usize) -> f64 {
    2f64.sqrt() - (n as f64).powf(-1.0 / 3.0 + DELTA2)
}

/// Fixed-point iteration `s ← x − (1/4n) Σ 1/(s − z_j)` from the limiting
/// saddle, finished (or rescued) by damped Newton on `f′`.
pub fn find_saddle(x: f64, data: &DeformationData) -> Result<SaddlePair> {
    if !x.is_finite() || x.abs() > admissible_edge(data.n) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} outside the admissible range |x| <= {:.4}",
            admissible_edge(data.n)
        )));
    }
    let start = limiting_saddle(x);
    let mut trail: Vec<Complex64> = Vec::new();
    let mut s = start;
    let mut iterations = 0;
    for _ in 0..MAX_ITER {
        iterations += 1;
        let next = x + 0.25 * data.stieltjes(s);
        trail.push(next);
        if !next.is_finite() || next.im <= 0.0 {
            break;
        }
        let step = (next - s).norm();
        s = next;
        if step < 1e-14 {
            break;
        }
    }
    if !(s.is_finite() && s.im > 0.0) {
        s = start;
    }
    // Newton polish (damped so that the iterate stays in the upper half plane)
    for _ in 0..MAX_ITER.saturating_sub(iterations).max(50) {
        let r = phase_derivative(x, data, s);
        if r.norm() <= 1e-13 {
            break;
        }
        iterations += 1;
        let mut step = r / phase_second(data, s);
        let mut lambda = 1.0;
        loop {
            let cand = s - step;
            if cand.is_finite() && cand.im > 0.0 && phase_derivative(x, data, cand).norm() < r.norm() {
                s = cand;
                break;
            }
            lambda *= 0.5;
            step *= 0.5;
            if lambda < 1e-6 {
                s = cand;
                break;
            }
        }
        trail.push(s);
    }
    let residual = phase_derivative(x, data, s).norm();
    if !(residual <= 1e-12 && s.im > 0.0) {
        let tail = trail.iter().rev().take(10).rev().map(|c| (c.re, c.im)).collect();
        return Err(Error::SaddleNoConvergence {
            x,
            reason: format!("residual {residual:.3e} after {iterations} iterations"),
            trail: tail,
        });
    }
    Ok(SaddlePair { s_plus: s, iterations, residual, x })
}

/// `|w⁺ − s⁺|` for the saddles of `f_x` and `f_y`.
pub fn saddle_separation(x: f64, y: f64, data: &DeformationData) -> Result<f64> {
    let a = find_saddle(x, data)?;
    let b = find_saddle(y, data)?;
    Ok((a.s_plus - b.s_plus).norm())
}

/// `m · e^{log}`, to keep `e^{n(...)}` factors out of floating range.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scaled {
    m: Complex64,
    log: f64,
}

impl Scaled {
    fn add(self, o: Scaled) -> Scaled {
        if self.m == Complex64::new(0.0, 0.0) {
            return o;
        }
        if o.m == Complex64::new(0.0, 0.0) {
            return self;
        }
        let l = self.log.max(o.log);
        Scaled { m: self.m * (self.log - l).exp() + o.m * (o.log - l).exp(), log: l }
    }

    fn mul(self, o: Scaled) -> Scaled {
        Scaled { m: self.m * o.m, log: self.log + o.log }
    }

    fn value(self) -> Complex64 {
        self.m * self.log.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourForm {
    /// Double integral with `1/(w−s)` on crossing contours plus the residue term.
    Crossing,
    /// Pole-free integrand, evaluated as sums of products of line integrals.
    SingularityFree,
}

impl fmt::Display for ContourForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContourForm::Crossing => "crossing",
            ContourForm::SingularityFree => "singularity-free",
        })
    }
}

/// Nodes and weights (`dz` included) of the two contours.
#[derive(Debug, Clone)]
pub struct ContourSpec {
    /// Counter-clockwise rectangle `[−M, M] × [−b, b]`.
    pub gamma: Vec<(Complex64, Complex64)>,
    /// Upward line `Re w = L`, truncated to `|Im w| ≤ T`.
    pub gamma_l: Vec<(Complex64, Complex64)>,
    pub m: f64,
    pub b: f64,
    pub l: f64,
    pub w_saddle: SaddlePair,
    pub s_saddle: SaddlePair,
}

impl ContourSpec {
    /// `Γ` through the saddle of `f_x`, the rectangle's horizontal sides
    /// through the saddles of `f_y`. For the crossing form the rules are
    /// refined geometrically towards the two crossing points.
    pub fn place(data: &DeformationData, x: f64, y: f64, form: ContourForm, per_panel: usize) -> Result<Self> {
        let w_saddle = find_saddle(x, data)?;
        let s_saddle = find_saddle(y, data)?;
        let l = w_saddle.s_plus.re;
        let b = s_saddle.s_plus.im;
        let m = data.max_abs().max(l.abs()) + 0.5;
        if b < POLE_GUARD {
            return Err(Error::TooCloseToPole { w: s_saddle.s_plus.to_string(), dist: b });
        }
        let h = (1.0 / (data.n as f64).sqrt()).min(0.25);
        let crossing = form == ContourForm::Crossing;
        let deep = |pts: &[f64]| if crossing { pts.to_vec() } else { vec![] };
        let t_max = w_saddle.s_plus.im.max(b) + 3.0;

        let line = PanelRule::graded(
            -t_max,
            t_max,
            h,
            &[-w_saddle.s_plus.im, w_saddle.s_plus.im],
            &deep(&[-b, b]),
            1e-9,
            per_panel,
        );
        let gamma_l = line
            .nodes
            .iter()
            .zip(&line.weights)
            .map(|(&t, &wt)| (Complex64::new(l, t), Complex64::new(0.0, wt)))
            .collect();

        let side = PanelRule::graded(-m, m, h, &[s_saddle.s_plus.re], &deep(&[l]), 1e-9, per_panel);
        let short = PanelRule::graded(-b, b, h, &[], &[], 1.0, per_panel);
        let mut gamma = Vec::with_capacity(2 * side.len() + 2 * short.len());
        for (&t, &wt) in side.nodes.iter().zip(&side.weights) {
            gamma.push((Complex64::new(t, -b), Complex64::new(wt, 0.0)));
        }
        for (&t, &wt) in short.nodes.iter().zip(&short.weights) {
            gamma.push((Complex64::new(m, t), Complex64::new(0.0, wt)));
        }
        for (&t, &wt) in side.nodes.iter().zip(&side.weights).rev() {
            gamma.push((Complex64::new(t, b), Complex64::new(-wt, 0.0)));
        }
        for (&t, &wt) in short.nodes.iter().zip(&short.weights).rev() {
            gamma.push((Complex64::new(-m, t), Complex64::new(0.0, -wt)));
        }
        let spec = ContourSpec { gamma, gamma_l, m, b, l, w_saddle, s_saddle };
        let closest = spec.gamma.iter().map(|(s, _)| data.nearest(*s)).fold(f64::INFINITY, f64::min);
        if closest < POLE_GUARD {
            return Err(Error::TooCloseToPole { w: "rectangle contour".into(), dist: closest });
        }
        Ok(spec)
    }

    pub fn node_counts(&self) -> (usize, usize) {
        (self.gamma.len(), self.gamma_l.len())
    }
}

/// `e^{n f_x(w) − shift}` and `e^{−n f_y(s) + shift'}` on the contour nodes.
struct Exponentials {
    w: Vec<Complex64>,
    s: Vec<Complex64>,
    /// `n(Re f_x(w⁺) − Re f_y(s⁺))`.
    log: f64,
}

fn exponentials(data: &DeformationData, x: f64, y: f64, c: &ContourSpec) -> Exponentials {
    let n = data.n as f64;
    let ref_w = n * phase_unchecked(x, data, c.w_saddle.s_plus).re;
    let ref_s = n * phase_unchecked(y, data, c.s_saddle.s_plus).re;
    let w = c
        .gamma_l
        .iter()
        .map(|(w, dw)| dw * (n * phase_unchecked(x, data, *w) - ref_w).exp())
        .collect();
    let s = c
        .gamma
        .iter()
        .map(|(s, ds)| ds * (ref_s - n * phase_unchecked(y, data, *s)).exp())
        .collect();
    Exponentials { w, s, log: ref_w - ref_s }
}

/// `∬ e^{n f_x(w) − n f_y(s)}/(w − s)` on the (possibly crossing) contours,
/// plus the residue collected by dragging `Γ` across `γ`.
fn pole_integral(data: &DeformationData, x: f64, y: f64, c: &ContourSpec, form: ContourForm) -> Scaled {
    match form {
        ContourForm::Crossing => {
            let e = exponentials(data, x, y, c);
            let mut acc = Complex64::new(0.0, 0.0);
            for ((w, _), ew) in c.gamma_l.iter().zip(&e.w) {
                let mut inner = Complex64::new(0.0, 0.0);
                for ((s, _), es) in c.gamma.iter().zip(&e.s) {
                    inner += es / (w - s);
                }
                acc += ew * inner;
            }
            let double = Scaled { m: acc, log: e.log };
            // 2πi ∫ e^{cs} ds from L − ib to L + ib, c = 4n(y − x)
            let residue = if c.l.abs() < c.m {
                let k = 4.0 * data.n as f64 * (y - x);
                let sinc = if (k * c.b).abs() < 1e-12 { c.b } else { (k * c.b).sin() / k };
                Scaled { m: Complex64::new(-4.0 * PI * sinc, 0.0), log: k * c.l }
            } else {
                Scaled { m: Complex64::new(0.0, 0.0), log: 0.0 }
            };
            double.add(residue)
        }
        ContourForm::SingularityFree => {
            let e = exponentials(data, x, y, c);
            let n = data.n as f64;
            if x == y {
                // ∂_x of the pole-free identity: −n ∬ w g e
                let a1: Complex64 = c.gamma_l.iter().zip(&e.w).map(|((w, _), ew)| w * ew).sum();
                let b0: Complex64 = e.s.iter().sum();
                let mut cross = Complex64::new(0.0, 0.0);
                for &zj in &data.z {
                    let aj: Complex64 = c.gamma_l.iter().zip(&e.w).map(|((w, _), ew)| w * ew / (w - zj)).sum();
                    let bj: Complex64 = c.gamma.iter().zip(&e.s).map(|((s, _), es)| es / (s - zj)).sum();
                    cross += aj * bj;
                }
                Scaled { m: -n * (4.0 * a1 * b0 - cross / n), log: e.log }
            } else {
                let a0: Complex64 = e.w.iter().sum();
                let b0: Complex64 = e.s.iter().sum();
                let mut cross = Complex64::new(0.0, 0.0);
                for &zj in &data.z {
                    let aj: Complex64 = c.gamma_l.iter().zip(&e.w).map(|((w, _), ew)| ew / (w - zj)).sum();
                    let bj: Complex64 = c.gamma.iter().zip(&e.s).map(|((s, _), es)| es / (s - zj)).sum();
                    cross += aj * bj;
                }
                Scaled { m: (4.0 * a0 * b0 - cross / n) / (4.0 * (x - y)), log: e.log }
            }
        }
    }
}

/// One-sided kernel `e^{ω(x−y)} K(x,y)` at a fixed node count, in scaled form.
fn one_sided(data: &DeformationData, x: f64, y: f64, form: ContourForm, per_panel: usize, omega: f64) -> Result<Scaled> {
    let c = ContourSpec::place(data, x, y, form, per_panel)?;
    let n = data.n as f64;
    let d = pole_integral(data, x, y, &c, form);
    let gauge = 2.0 * n * (x * x - y * y) + omega * (x - y);
    let k = Scaled { m: d.m * (-n / (PI * PI)), log: d.log + gauge };
    if !(k.m.is_finite() && k.log.is_finite()) {
        return Err(Error::NonFinite(format!("contour kernel at ({x}, {y})")));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    pub form: ContourForm,
    /// Gauss–Legendre nodes per panel; the check reruns with twice as many.
    pub per_panel: usize,
    /// Gauge parameter `ω` of `e^{ω(x−y)}`; gauge-invariant outputs ignore it.
    pub omega: f64,
    pub tolerance: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { form: ContourForm::SingularityFree, per_panel: 16, omega: 0.0, tolerance: 1e-3 }
    }
}

/// Gauge-invariant contour output: `𝒦(x,x)` when `x == y`, otherwise the
/// product `K(x,y)K(y,x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourKernel {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
    /// Relative change under node doubling.
    pub delta: f64,
    pub form: ContourForm,
}

fn invariant(data: &DeformationData, x: f64, y: f64, opts: &ContourOptions, per_panel: usize) -> Result<Complex64> {
    if x == y {
        return Ok(one_sided(data, x, x, opts.form, per_panel, opts.omega)?.value());
    }
    let a = one_sided(data, x, y, opts.form, per_panel, opts.omega)?;
    let b = one_sided(data, y, x, opts.form, per_panel, opts.omega)?;
    Ok(a.mul(b).value())
}

pub fn kernel_contour(data: &DeformationData, x: f64, y: f64, opts: &ContourOptions) -> Result<ContourKernel> {
    if data.n > MAX_CONTOUR_N {
        return Err(Error::InvalidParameter(format!(
            "contour evaluation is capped at n = {MAX_CONTOUR_N}, got {}",
            data.n
        )));
    }
    if opts.form == ContourForm::SingularityFree && x != y && (x - y).abs() < 1e-3 {
        return Err(Error::InvalidParameter("pole-free off-diagonal form needs |x − y| ≥ 1e-3".into()));
    }
    let coarse = invariant(data, x, y, opts, opts.per_panel)?;
    let fine = invariant(data, x, y, opts, 2 * opts.per_panel)?;
    let delta = (fine - coarse).norm() / fine.norm().max(f64::MIN_POSITIVE);
    if !(delta <= opts.tolerance) {
        return Err(Error::QuadratureNoConvergence {
            context: format!("{} contour kernel at ({x}, {y}), n = {}", opts.form, data.n),
            delta,
        });
    }
    Ok(ContourKernel { n: data.n, x, y, value: fine, delta, form: opts.form })
}

/// `ρ_sc(x) = √(2 − x²)/π`, the density of `M`.
pub fn rho_sc(x: f64) -> f64 {
    (2.0 - x * x).max(0.0).sqrt() / PI
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformedDiagnostic {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    /// `𝒦(x,x)/(n ρ_sc(x))` on diagonal rows.
    pub diagonal_ratio: Option<f64>,
    /// `|K(x,y)K(y,x)|·(x−y)²` on off-diagonal rows.
    pub scaled_product: Option<f64>,
    pub residual_x: f64,
    pub residual_y: f64,
}

/// Diagonal ratios at every grid point and scaled products for every pair
/// with `|x − y| ≥ n^{−0.9}`.
pub fn bulk_sweep(data: &DeformationData, xs: &[f64], opts: &ContourOptions) -> Result<Vec<DeformedDiagnostic>> {
    let n = data.n;
    let mut rows = Vec::new();
    let sep = (n as f64).powf(-0.9);
    for (i, &x) in xs.iter().enumerate() {
        let rx = find_saddle(x, data)?.residual;
        let d = kernel_contour(data, x, x, opts)?;
        rows.push(DeformedDiagnostic {
            n,
            x,
            y: x,
            diagonal_ratio: Some(d.value.re / (n as f64 * rho_sc(x))),
            scaled_product: None,
            residual_x: rx,
            residual_y: rx,
        });
        for &y in &xs[i + 1..] {
            if (x - y).abs() < sep {
                continue;
            }
            let ry = find_saddle(y, data)?.residual;
            let p = kernel_contour(data, x, y, opts)?;
            rows.push(DeformedDiagnostic {
                n,
                x,
                y,
                diagonal_ratio: None,
                scaled_product: Some(p.value.norm() * (x - y).powi(2)),
                residual_x: rx,
                residual_y: ry,
            });
        }
    }
    Ok(rows)
}

pub fn write_diagnostics_csv<W: Write>(out: W, rows: &[DeformedDiagnostic]) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "x", "y", "diagonal_ratio", "product_times_sep2", "residual_x", "residual_y"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            opt(r.diagonal_ratio),
            opt(r.scaled_product),
            r.residual_x.to_string(),
            r.residual_y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_invert_the_distribution() {
        for p in [0.001, 0.1, 0.5, 0.77, 0.999] {
            let e = (semicircle_cdf(semicircle_quantile(p)) - p).abs();
            assert!(e < 1e-13, "{p}: {e}");
        }
        let d = DeformationData::semicircle_quantiles(101).unwrap();
        assert!(d.z[50].abs() < 1e-15);
        assert!(d.z.windows(2).all(|w| w[0] < w[1]));
        assert!(d.satisfies_local_law());
    }

    #[test]
    fn single_point_kernel_is_gaussian_density() {
        // n = 1, z = 0: M ~ N(0, 1/4), density √(2/π) e^{−2x²}
        let d = DeformationData::zero(1).unwrap();
        for form in [ContourForm::Crossing, ContourForm::SingularityFree] {
            let opts = ContourOptions { form, ..Default::default() };
            for x in [-0.3, 0.0, 0.25] {
                // n = 1 admits only |x| ≤ √2 − 1
                let k = kernel_contour(&d, x, x, &opts).unwrap().value;
                let want = (2.0 / PI).sqrt() * (-2.0 * x * x).exp();
                assert!((k.re - want).abs() < 1e-8 * want && k.im.abs() < 1e-8, "{form} {x}: {k}");
            }
        }
    }

    #[test]
    fn scaled_arithmetic() {
        let a = Scaled { m: Complex64::new(2.0, 0.0), log: 800.0 };
        let b = Scaled { m: Complex64::new(3.0, 0.0), log: -800.0 };
        assert!((a.mul(b).value().re - 6.0).abs() < 1e-12);
        let c = Scaled { m: Complex64::new(1.0, 0.0), log: 1.0f64.ln() };
        assert!((c.add(c).value().re - 2.0).abs() < 1e-15);
    }
}
