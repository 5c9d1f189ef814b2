//! Gauss–Legendre rules and composite panel quadrature.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the three-term recurrence, started from
    /// the Tricomi approximation. Accurate to machine precision for m up to a
    /// few thousand.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let theta = PI * (i as f64 + 0.75) / (mf + 0.5);
            let mut x = (1.0 - (mf - 1.0) / (8.0 * mf * mf * mf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A partition of an interval into panels, each carrying the same
/// Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub edges: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Panel index of every node.
    pub panel_of: Vec<usize>,
}

impl PanelRule {
    /// Panels with the given edges (sorted, at least two) and `per_panel`
    /// nodes in each.
    pub fn from_edges(edges: Vec<f64>, per_panel: usize) -> Self {
        assert!(edges.len() >= 2);
        let gl = GaussLegendre::new(per_panel);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panel_of = Vec::with_capacity(nodes.capacity());
        for (p, win) in edges.windows(2).enumerate() {
            for (x, w) in gl.on(win[0], win[1]) {
                nodes.push(x);
                weights.push(w);
                panel_of.push(p);
            }
        }
        PanelRule {
            edges,
            nodes,
            weights,
            panel_of,
        }
    }

    /// Uniform panels of width at most `max_width` on `[a, b]`, with
    /// mandatory breakpoints and geometric grading (ratio 1/2, down to
    /// `min_width`) towards each breakpoint in `graded`.
    pub fn graded(
        a: f64,
        b: f64,
        max_width: f64,
        breaks: &[f64],
        graded: &[f64],
        min_width: f64,
        per_panel: usize,
    ) -> Self {
        let mut pts = vec![a, b];
        for &c in breaks.iter().chain(graded) {
            if c > a && c < b {
                pts.push(c);
            }
        }
        for &c in graded {
            let mut d = max_width;
            while d > min_width {
                d *= 0.5;
                for q in [c - d, c + d] {
                    if q > a && q < b {
                        pts.push(q);
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        let mut edges = vec![pts[0]];
        for win in pts.windows(2) {
            let len = win[1] - win[0];
            let pieces = (len / max_width).ceil().max(1.0) as usize;
            for j in 1..=pieces {
                edges.push(win[0] + len * j as f64 / pieces as f64);
            }
        }
        *edges.last_mut().unwrap() = b;
        Self::from_edges(edges, per_panel)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite trapezoid rule on samples with uniform spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}
