use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularityClass {
    Smooth,
    Sobolev(f64),
    Holder(f64),
    Indicator,
}

impl RegularityClass {
    /// Hölder exponent when the class is a proper Hölder class.
    pub fn holder_exponent(&self) -> Option<f64> {
        match *self {
            RegularityClass::Holder(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for RegularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityClass::Smooth => write!(f, "smooth"),
            RegularityClass::Sobolev(s) => write!(f, "sobolev({s})"),
            RegularityClass::Holder(a) => write!(f, "holder({a})"),
            RegularityClass::Indicator => write!(f, "indicator"),
        }
    }
}

pub type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real test function: analytic rule, declared class and grid samples.
#[derive(Clone)]
pub struct TestFunction {
    pub label: String,
    pub class: RegularityClass,
    rule: Rule,
    /// Points where the rule is not smooth (cusps, jumps, kinks).
    pub singular_points: Vec<f64>,
    pub grid: GridFunction,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("class", &self.class)
            .field("singular_points", &self.singular_points)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    pub fn new<F>(label: &str, class: RegularityClass, singular_points: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_grid(label, class, singular_points, Arc::new(f), Grid::default())
    }

    fn with_grid(
        label: &str,
        class: RegularityClass,
        singular_points: Vec<f64>,
        rule: Rule,
        grid: Grid,
    ) -> Self {
        let samples = GridFunction::from_fn(grid, label, |x| rule(x));
        TestFunction {
            label: label.to_string(),
            class,
            rule,
            singular_points,
            grid: samples,
        }
    }

    /// Same function resampled on another grid.
    pub fn on_grid(&self, grid: Grid) -> Self {
        Self::with_grid(
            &self.label,
            self.class,
            self.singular_points.clone(),
            self.rule.clone(),
            grid,
        )
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.rule)(x)
    }

    pub fn rule(&self) -> Rule {
        self.rule.clone()
    }

    /// `c·φ + d`, keeping the class and singular points.
    pub fn affine(&self, c: f64, d: f64) -> Self {
        let r = self.rule.clone();
        Self::with_grid(
            &format!("{c}*{}+{d}", self.label),
            self.class,
            self.singular_points.clone(),
            Arc::new(move |x| c * r(x) + d),
            self.grid.grid,
        )
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.class, RegularityClass::Smooth)
    }
}

pub fn smooth_step(t: f64) -> f64 {
    // C^∞ transition from 0 (t <= 0) to 1 (t >= 1)
    fn psi(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Smooth cut-off: 1 on `|x| <= 1`, 0 on `|x| >= 1.8`.
pub fn window(x: f64) -> f64 {
    smooth_step((1.8 - x.abs()) / 0.8)
}

/// Compactly supported C^∞ bump on `(-r, r)` with value 1 at the origin.
pub fn bump(x: f64, r: f64) -> f64 {
    let u = x / r;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

pub const BUMP_RADIUS: f64 = 1.5;
pub const CUSP_CENTRE: f64 = 0.8;
pub const CUSP_HALF_WIDTH: f64 = 0.6;
pub const CUSP_EXPONENT: f64 = 0.75;
pub const POISSON_INDICATOR_ETA: f64 = 0.1;

pub fn abs_power(alpha: f64) -> TestFunction {
    TestFunction::new(
        &format!("abs{alpha}"),
        RegularityClass::Holder(alpha),
        vec![0.0],
        move |x| x.abs().powf(alpha) * window(x),
    )
}

pub fn indicator(y0: f64) -> TestFunction {
    let label = if y0 == 0.0 {
        "indicator".to_string()
    } else {
        format!("indicator@{y0}")
    };
    TestFunction::new(&label, RegularityClass::Indicator, vec![y0], move |x| {
        if x >= y0 {
            window(x)
        } else {
            0.0
        }
    })
}

/// The reference corpus spanning smooth, Hölder and indicator classes.
pub fn corpus() -> Vec<TestFunction> {
    let c = CUSP_CENTRE;
    let w = CUSP_HALF_WIDTH;
    let a = CUSP_EXPONENT;
    let eta = POISSON_INDICATOR_ETA;
    vec![
        TestFunction::new("x", RegularityClass::Smooth, vec![], |x| x),
        TestFunction::new("x2", RegularityClass::Smooth, vec![], |x| x * x),
        TestFunction::new("bump", RegularityClass::Smooth, vec![], |x| {
            bump(x, BUMP_RADIUS)
        }),
        TestFunction::new("sin3", RegularityClass::Smooth, vec![], |x| {
            (3.0 * x).sin() * window(x)
        }),
        abs_power(0.4),
        abs_power(0.6),
        abs_power(0.8),
        indicator(0.0),
        // Hölder-3/4 cusp centred in the bulk, kinks where it reaches zero
        TestFunction::new(
            "cusp",
            RegularityClass::Holder(a),
            vec![c - w, c, c + w],
            move |x| (1.0 - ((x - c).abs() / w).powf(a)).max(0.0),
        ),
        TestFunction::new(
            "poisson_indicator",
            RegularityClass::Smooth,
            vec![],
            move |x| (0.5 + (x / eta).atan() / PI) * window(x),
        ),
    ]
}

/// Looks up a corpus entry by label.
pub fn lookup(label: &str) -> Result<TestFunction> {
    corpus()
        .into_iter()
        .find(|f| f.label == label)
        .ok_or_else(|| Error::UnknownFunction(label.to_string()))
}

pub fn labels() -> Vec<String> {
    corpus().into_iter().map(|f| f.label).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_rule() {
        for f in corpus() {
            for (j, x) in f.grid.grid.nodes().enumerate() {
                assert!((f.grid.values[j] - f.eval(x)).abs() <= 1e-12, "{}", f.label);
            }
        }
    }

    #[test]
    fn declared_classes() {
        assert_eq!(lookup("abs0.6").unwrap().class, RegularityClass::Holder(0.6));
        assert_eq!(lookup("indicator").unwrap().class, RegularityClass::Indicator);
        assert!(lookup("nope").is_err());
        assert_eq!(labels().len(), 10);
    }

    #[test]
    fn window_shape() {
        assert_eq!(window(0.0), 1.0);
        assert_eq!(window(1.0), 1.0);
        assert_eq!(window(-1.8), 0.0);
        assert!(window(1.4) > 0.0 && window(1.4) < 1.0);
        assert!((window(1.4) - 0.5).abs() < 1e-15);
    }
}
