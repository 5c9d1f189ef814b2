//! Finite-n GUE two-point kernel from orthonormal Hermite functions.
//!
//! With `H = W/√n` and `E|w_ij|² = 1` the eigenvalue process is determinantal
//! with `K_n(x, y) = Σ_{k<n} ψ_k(x) ψ_k(y)`, where `ψ_k(x) = √s h_k(s x)`,
//! `s = √(n/2)` and `h_k` are the orthonormal Hermite functions on ℝ.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::funclab::TestFunction;
use crate::quad::PanelRule;

const RESCALE_ABOVE: f64 = 1e150;

/// `h_{n-2}, h_{n-1}, h_n` at one point as mantissas times `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTriple {
    pub m: [f64; 3],
    pub log_scale: f64,
}

/// Orthonormal Hermite functions by the three-term recurrence with exponent
/// tracking, so values deep in the tails neither overflow nor underflow
/// prematurely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis {
    pub n: usize,
    /// `s = √(n/2)`, mapping the spectrum onto `[-2, 2]`.
    pub s: f64,
}

impl HermiteBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("kernel needs n >= 1".into()));
        }
        Ok(HermiteBasis {
            n,
            s: (0.5 * n as f64).sqrt(),
        })
    }

    /// Runs the recurrence to degree `top`, calling `visit(k, mantissa,
    /// log_scale)` for each degree. Returns `h_{top-2}, h_{top-1}, h_top`.
    fn recur<F: FnMut(usize, f64, f64)>(top: usize, u: f64, mut visit: F) -> ScaledTriple {
        let mut log_scale = -0.5 * u * u - 0.25 * PI.ln();
        let (mut a, mut b, mut c) = (0.0, 0.0, 1.0);
        visit(0, c, log_scale);
        for k in 0..top {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * u * c - (kf / (kf + 1.0)).sqrt() * b;
            a = b;
            b = c;
            c = next;
            if c.abs() > RESCALE_ABOVE {
                let e = c.abs().ln();
                let f = (-e).exp();
                a *= f;
                b *= f;
                c *= f;
                log_scale += e;
            }
            visit(k + 1, c, log_scale);
        }
        ScaledTriple {
            m: [a, b, c],
            log_scale,
        }
    }

    /// `h_{n-2}(u), h_{n-1}(u), h_n(u)` in the unscaled variable `u`.
    pub fn triple(&self, u: f64) -> ScaledTriple {
        Self::recur(self.n, u, |_, _, _| {})
    }

    /// `ψ_0(x), ..., ψ_top(x)`; values below the floating-point range are 0.
    pub fn psi_all(&self, top: usize, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; top + 1];
        let rs = self.s.sqrt();
        Self::recur(top, self.s * x, |k, v, l| out[k] = rs * v * l.exp());
        out
    }

    /// Point beyond which every `ψ_k`, `k <= n`, is negligible.
    pub fn support_edge(&self) -> f64 {
        ((2.0 * self.n as f64 + 1.0).sqrt() + 8.0) / self.s
    }
}

/// Hermite data at a point, ready for kernel evaluation.
#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    t: ScaledTriple,
}

/// Christoffel–Darboux kernel of size `n`.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    basis: HermiteBasis,
}

impl Kernel {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Kernel {
            basis: HermiteBasis::new(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    fn node(&self, x: f64) -> Node {
        Node {
            x,
            t: self.basis.triple(self.basis.s * x),
        }
    }

    /// `K_n(x, x) = s (n h_{n-1}² − √(n(n−1)) h_{n-2} h_n)` at `u = s x`.
    fn diag_node(&self, a: &Node) -> f64 {
        let n = self.basis.n as f64;
        let [h2, h1, h0] = a.t.m;
        let core = n * h1 * h1 - (n * (n - 1.0)).sqrt() * h2 * h0;
        self.basis.s * core * (2.0 * a.t.log_scale).exp()
    }

    fn pair(&self, a: &Node, b: &Node) -> f64 {
        if (a.x - b.x).abs() < 1e-7 {
            return self.diag_node(b);
        }
        // (ψ_n(x)ψ_{n-1}(y) − ψ_{n-1}(x)ψ_n(y))/(x − y) with ψ = √s h(s·)
        let num = a.t.m[2] * b.t.m[1] - a.t.m[1] * b.t.m[2];
        self.basis.s * num * (a.t.log_scale + b.t.log_scale).exp() / (a.x - b.x)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.pair(&self.node(x), &self.node(y))
    }

    pub fn diag(&self, x: f64) -> f64 {
        self.diag_node(&self.node(x))
    }
}

/// `K_n(x, y)`; the diagonal limit is used when `|x − y| < 1e−7`.
pub fn kernel_eval(n: usize, x: f64, y: f64) -> Result<f64> {
    let v = Kernel::new(n)?.eval(x, y);
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("kernel K_{n}({x}, {y})")));
    }
    Ok(v)
}

/// Panels of width `min(0.25, 4/n)` on `[a, b]`, split at `breaks`.
fn kernel_rule(n: usize, a: f64, b: f64, breaks: &[f64], per_panel: usize) -> PanelRule {
    let width = (4.0 / n as f64).min(0.25);
    // panels shrink geometrically towards the singular points of φ
    PanelRule::graded(a, b, width, breaks, breaks, 1e-10, per_panel)
}

/// `K_n` tabulated on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    /// Row-major `K_n(nodes[i], nodes[j])`.
    pub values: Vec<f64>,
}

impl KernelGrid {
    pub fn new(n: usize, nodes: Vec<f64>) -> Result<Self> {
        let k = Kernel::new(n)?;
        let pre: Vec<Node> = nodes.iter().map(|&x| k.node(x)).collect();
        let m = nodes.len();
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = k.pair(&pre[i], &pre[j]);
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("kernel grid for n = {n}")));
        }
        Ok(KernelGrid { n, nodes, values })
    }

    /// Equispaced grid on `[-2 - margin, 2 + margin]`.
    pub fn uniform(n: usize, margin: f64, points: usize) -> Result<Self> {
        let a = -2.0 - margin;
        let h = 2.0 * (2.0 + margin) / (points.max(2) - 1) as f64;
        Self::new(n, (0..points).map(|i| a + h * i as f64).collect())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nodes.len() + j]
    }

    /// Header row of nodes, then one row per node.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["x\\y".to_string()];
        header.extend(self.nodes.iter().map(|x| format!("{x:.17e}")));
        out.write_record(&header)?;
        for (i, x) in self.nodes.iter().enumerate() {
            let mut row = vec![format!("{x:.17e}")];
            row.extend((0..self.nodes.len()).map(|j| format!("{:.17e}", self.get(i, j))));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn tensor_variance(k: &Kernel, phi: &TestFunction, rule: &PanelRule) -> f64 {
    let nodes: Vec<Node> = rule.nodes.iter().map(|&x| k.node(x)).collect();
    let fs: Vec<f64> = rule.nodes.iter().map(|&x| phi.eval(x)).collect();
    let mut total = 0.0;
    for i in 0..nodes.len() {
        let mut row = 0.0;
        for j in (i + 1)..nodes.len() {
            let d = fs[i] - fs[j];
            if d != 0.0 {
                let kv = k.pair(&nodes[i], &nodes[j]);
                row += rule.weights[j] * d * d * kv * kv;
            }
        }
        total += rule.weights[i] * row;
    }
    total
}

/// `(1/2) ∬ (φ(x) − φ(y))² K_n(x, y)² dx dy` by tensor Gauss–Legendre,
/// checked by node doubling.
pub fn exact_variance(n: usize, phi: &TestFunction) -> Result<f64> {
    let k = Kernel::new(n)?;
    let edge = k.basis.support_edge();
    let breaks: Vec<f64> = phi
        .singular_points
        .iter()
        .copied()
        .filter(|s| s.abs() < edge)
        .collect();
    let coarse = tensor_variance(&k, phi, &kernel_rule(n, -edge, edge, &breaks, 16));
    let fine = tensor_variance(&k, phi, &kernel_rule(n, -edge, edge, &breaks, 32));
    let delta = (fine - coarse).abs();
    if !fine.is_finite() || delta > 1e-6 * (1.0 + fine.abs()) {
        return Err(Error::QuadratureNoConvergence {
            context: format!("exact variance of {} at n = {n}", phi.label),
            delta,
        });
    }
    Ok(fine.max(0.0))
}

/// Same quantity through the projection identity
/// `Var = Σ_j ∫φ²ψ_j² − Σ_{j,k} (∫φ ψ_j ψ_k)²`.
pub fn exact_variance_projection(n: usize, phi: &TestFunction) -> Result<f64> {
    let basis = HermiteBasis::new(n)?;
    let edge = basis.support_edge();
    let breaks: Vec<f64> = phi
        .singular_points
        .iter()
        .copied()
        .filter(|s| s.abs() < edge)
        .collect();
    let rule = kernel_rule(n, -edge, edge, &breaks, 24);
    let mut a = vec![0.0; n * n];
    let mut trace = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let f = phi.eval(x);
        if f == 0.0 {
            continue;
        }
        let psi = basis.psi_all(n - 1, x);
        for j in 0..n {
            let pj = w * f * psi[j];
            trace += pj * f * psi[j];
            for kk in j..n {
                a[j * n + kk] += pj * psi[kk];
            }
        }
    }
    let mut frob = 0.0;
    for j in 0..n {
        frob += a[j * n + j].powi(2);
        for kk in (j + 1)..n {
            frob += 2.0 * a[j * n + kk].powi(2);
        }
    }
    Ok((trace - frob).max(0.0))
}

/// Variance of the number of eigenvalues in `[y0, ∞)`.
///
/// Uses `A_jk = ∫_{y0}^∞ ψ_j ψ_k` and `Var = tr A − ‖A‖_F²`; off the diagonal
/// the Hermite equation gives `A_jk = (√(2j) h_{j-1} h_k − √(2k) h_j h_{k-1})(u0)
/// / (2(j − k))` exactly, the diagonal is integrated numerically.
pub fn counting_variance(n: usize, y0: f64) -> Result<f64> {
    let basis = HermiteBasis::new(n)?;
    let s = basis.s;
    let u0 = s * y0;
    let top = (2.0 * n as f64 + 1.0).sqrt() + 8.0;
    if u0 >= top || u0 <= -top {
        return Ok(0.0);
    }
    // h_0..h_n at u0 with a common scale
    let mut h = vec![0.0; n + 1];
    let mut scales = vec![0.0; n + 1];
    HermiteBasis::recur(n, u0, |k, v, l| {
        h[k] = v;
        scales[k] = l;
    });
    let hv: Vec<f64> = h.iter().zip(&scales).map(|(m, l)| m * l.exp()).collect();

    // diagonal ∫_{u0}^∞ h_j² du
        let width = (4.0 / (2.0 * n as f64 + 1.0).sqrt()).min(0.5);
    let rule = PanelRule::graded(u0, top, width, &[], &[], width, 24);
    let mut diag = vec![0.0; n];
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        HermiteBasis::recur(n - 1, u, |k, v, l| {
            let val = v * l.exp();
            diag[k] += w * val * val;
        });
    }
    let mut trace = 0.0;
    let mut frob = 0.0;
    for j in 0..n {
        trace += diag[j];
        frob += diag[j] * diag[j];
        let hj1 = if j > 0 { hv[j - 1] } else { 0.0 };
        for k in (j + 1)..n {
            let v = ((2.0 * j as f64).sqrt() * hj1 * hv[k]
                - (2.0 * k as f64).sqrt() * hv[j] * hv[k - 1])
                / (2.0 * (j as f64 - k as f64));
            frob += 2.0 * v * v;
        }
    }
    let var = trace - frob;
    if !var.is_finite() {
        return Err(Error::NonFinite(format!("counting variance n = {n}, y0 = {y0}")));
    }
    Ok(var.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkDiagnostic {
    pub n: usize,
    pub x: f64,
    pub in_bulk: bool,
    /// Window average of `K_n(t, t)` over `n ρ_sc(x)`.
    pub smoothed_ratio: Option<f64>,
    /// Half the peak-to-peak swing of `ψ_n²` over its window mean.
    pub oscillation_ratio: Option<f64>,
}

pub const BULK_MARGIN: f64 = 0.2;

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Local averages over a window of width `10/n` centred at `x`.
pub fn bulk_asymptotics_check(n: usize, x: f64) -> Result<BulkDiagnostic> {
    let k = Kernel::new(n)?;
    if x.abs() > 2.0 - BULK_MARGIN {
        return Ok(BulkDiagnostic {
            n,
            x,
            in_bulk: false,
            smoothed_ratio: None,
            oscillation_ratio: None,
        });
    }
    let half = 5.0 / n as f64;
    // symmetric offsets make the diagnostic exactly even in x
    let rule = PanelRule::graded(-half, half, half / 4.0, &[], &[], half, 16);
    let mut avg = 0.0;
    let mut psi_mean = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        avg += w * k.diag(x + t);
    }
    let samples = 400;
    let basis = k.basis;
    for i in 0..=samples {
        let t = -half + 2.0 * half * i as f64 / samples as f64;
        let tr = basis.triple(basis.s * (x + t));
        let p = basis.s * (tr.m[2] * tr.log_scale.exp()).powi(2);
        psi_mean += p;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    psi_mean /= (samples + 1) as f64;
    avg /= 2.0 * half;
    Ok(BulkDiagnostic {
        n,
        x,
        in_bulk: true,
        smoothed_ratio: Some(avg / (n as f64 * semicircle_density(x))),
        oscillation_ratio: Some(0.5 * (hi - lo) / psi_mean),
    })
}

/// Rows `n, x, in_bulk, smoothed_ratio, oscillation_ratio`.
pub fn write_diagnostics_csv<W: Write>(w: W, rows: &[BulkDiagnostic]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "x", "in_bulk", "smoothed_ratio", "oscillation_ratio"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.12e}"));
    for r in rows {
        out.write_record([
            r.n.to_string(),
            format!("{:.6}", r.x),
            r.in_bulk.to_string(),
            opt(r.smoothed_ratio),
            opt(r.oscillation_ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_n_closed_forms() {
        // n = 1: K(x,x) = ψ_0(x)² = s/√π e^{-s² x²} with s = √(1/2)
        let k = Kernel::new(1).unwrap();
        let s = 0.5f64.sqrt();
        let want = s / PI.sqrt() * (-(s * 0.7).powi(2)).exp();
        assert!((k.diag(0.7) - want).abs() < 1e-15);
        assert!((k.eval(0.3, -0.4) - s / PI.sqrt() * (-0.5 * s * s * (0.09 + 0.16)).exp()).abs() < 1e-12);
    }

    #[test]
    fn far_tail_does_not_overflow() {
        let b = HermiteBasis::new(2000).unwrap();
        let t = b.triple(b.s * 3.0);
        assert!(t.m.iter().all(|v| v.is_finite()));
        assert!(kernel_eval(2000, 2.9, 0.1).unwrap().abs() < 1e-10);
        assert!(kernel_eval(2000, 0.0, 0.0).unwrap().is_finite());
    }

    #[test]
    fn near_diagonal_switch_is_continuous() {
        let k = Kernel::new(60).unwrap();
        let a = k.eval(0.4, 0.4 + 2e-7);
        let b = k.eval(0.4, 0.4 + 5e-8);
        assert!((a - b).abs() < 1e-6 * b);
    }
}
