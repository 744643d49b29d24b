//! Table-lookup interpolation of e^{−z}.
//!
//! The input is rescaled to t = z / ln 2 and split as t = k + f with k an
//! integer and f ∈ [0, 1). A QROM outputs polynomial coefficients for 2^{−f}
//! on one of P uniform panels and the integer part becomes a bit shift,
//! so e^{−z} = 2^{−k} · 2^{−f}.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial order of each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Linear,
    Quadratic,
}

/// Order plus number of panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpSpec {
    pub order: Order,
    pub panels: u32,
}

impl Default for InterpSpec {
    fn default() -> Self {
        Self { order: Order::Linear, panels: 256 }
    }
}

impl std::str::FromStr for InterpSpec {
    type Err = Error;

    /// Parses `linear:256` or `quadratic:64`.
    fn from_str(s: &str) -> Result<Self> {
        let (o, p) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("interpolation spec `{s}` must look like linear:256")))?;
        let order = match o {
            "linear" => Order::Linear,
            "quadratic" => Order::Quadratic,
            _ => return Err(Error::InvalidArgument(format!("unknown interpolation order `{o}`"))),
        };
        let panels = p
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("invalid panel count `{p}`")))?;
        check_panels(panels)?;
        Ok(Self { order, panels })
    }
}

impl std::fmt::Display for InterpSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let o = match self.order {
            Order::Linear => "linear",
            Order::Quadratic => "quadratic",
        };
        write!(f, "{o}:{}", self.panels)
    }
}

/// Largest supported panel count.
pub const MAX_PANELS: u32 = 1 << 16;

fn check_panels(panels: u32) -> Result<()> {
    if panels == 0 || !panels.is_power_of_two() || panels > MAX_PANELS {
        return Err(Error::InvalidArgument(format!(
            "panel count must be a power of two in 1..={MAX_PANELS}, got {panels}"
        )));
    }
    Ok(())
}

/// Coefficients of one panel. Linear panels evaluate `a0 + a1·δ`;
/// quadratic panels evaluate `a0 + a1·δ·(a2 + δ)`, with δ the offset from
/// the panel's left edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Panel {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Built interpolation table for 2^{−f} on f ∈ [0, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpTable {
    pub spec: InterpSpec,
    pub panels: Vec<Panel>,
}

/// Builds the table: endpoint-matched lines, or quadratics through three
/// Chebyshev nodes per panel.
pub fn build_table(spec: InterpSpec) -> Result<InterpTable> {
    check_panels(spec.panels)?;
    let h = 1.0 / spec.panels as f64;
    let f = |x: f64| (-x * LN_2).exp();
    let panels = (0..spec.panels)
        .map(|k| {
            let x0 = k as f64 * h;
            match spec.order {
                Order::Linear => {
                    let (a, b) = (f(x0), f(x0 + h));
                    Panel { a0: a, a1: (b - a) / h, a2: 0.0 }
                }
                Order::Quadratic => {
                    let d: [f64; 3] = std::array::from_fn(|m| 0.5 * h * (1.0 - ((2 * m + 1) as f64 * PI / 6.0).cos()));
                    let y = d.map(|di| f(x0 + di));
                    // Newton divided differences, then expand to c0 + c1 δ + c2 δ².
                    let f01 = (y[1] - y[0]) / (d[1] - d[0]);
                    let f12 = (y[2] - y[1]) / (d[2] - d[1]);
                    let c2 = (f12 - f01) / (d[2] - d[0]);
                    let c1 = f01 - c2 * (d[0] + d[1]);
                    let c0 = y[0] - f01 * d[0] + c2 * d[0] * d[1];
                    Panel { a0: c0, a1: c2, a2: c1 / c2 }
                }
            }
        })
        .collect();
    Ok(InterpTable { spec, panels })
}

impl InterpTable {
    fn split(&self, z: f64) -> (f64, usize, f64) {
        let t = z / LN_2;
        let k = t.floor();
        let frac = t - k;
        let p = self.panels.len();
        let idx = ((frac * p as f64) as usize).min(p - 1);
        (k, idx, frac - idx as f64 / p as f64)
    }

    fn panel_value(&self, idx: usize, d: f64) -> f64 {
        let c = &self.panels[idx];
        match self.spec.order {
            Order::Linear => c.a0 + c.a1 * d,
            Order::Quadratic => c.a0 + c.a1 * d * (c.a2 + d),
        }
    }

    /// Approximates e^{−z} for z ≥ 0.
    pub fn evaluate(&self, z: f64) -> f64 {
        let (k, idx, d) = self.split(z);
        self.panel_value(idx, d) * (-k).exp2()
    }

    /// Error of the approximation relative to the panel's scale: the exact
    /// value at the panel's left edge, i.e. the magnitude the shifted QROM
    /// output represents.
    pub fn scaled_error(&self, z: f64) -> f64 {
        let (_, idx, d) = self.split(z);
        let x0 = idx as f64 / self.panels.len() as f64;
        let exact = (-((x0 + d) * LN_2)).exp();
        (self.panel_value(idx, d) - exact).abs() / (-(x0 * LN_2)).exp()
    }

    /// Analytic bound on the scaled error:
    /// (δz ln 2)²/8 for linear panels, (δz ln 2)³/192 for quadratic panels.
    pub fn error_bound(&self) -> f64 {
        let x = LN_2 / self.panels.len() as f64;
        match self.spec.order {
            Order::Linear => x * x / 8.0,
            Order::Quadratic => x * x * x / 192.0,
        }
    }

    /// Measured maximum scaled error over a uniform sweep of f ∈ [0, 1).
    pub fn verify_error(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|s| self.scaled_error((s as f64 + 0.5) / samples as f64 * LN_2))
            .fold(0.0, f64::max)
    }
}

/// Toffoli cost of evaluating the interpolant with b-bit arithmetic:
/// ⌈(7/4)b²⌉ + P for linear and ⌈(11/4)b²⌉ + P for quadratic tables.
pub fn interp_toffoli_cost(spec: InterpSpec, b: u32) -> u64 {
    let b2 = (b as u64) * (b as u64);
    let arith = match spec.order {
        Order::Linear => (7 * b2).div_ceil(4),
        Order::Quadratic => (11 * b2).div_ceil(4),
    };
    arith + spec.panels as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(order: Order, panels: u32) -> InterpTable {
        build_table(InterpSpec { order, panels }).unwrap()
    }

    #[test]
    fn parses_and_prints_specs() {
        let s: InterpSpec = "quadratic:64".parse().unwrap();
        assert_eq!(s, InterpSpec { order: Order::Quadratic, panels: 64 });
        assert_eq!(s.to_string(), "quadratic:64");
        assert!("cubic:64".parse::<InterpSpec>().is_err());
        assert!("linear:100".parse::<InterpSpec>().is_err());
        assert!("linear".parse::<InterpSpec>().is_err());
    }

    #[test]
    fn node_points_are_exact() {
        let t = table(Order::Linear, 256);
        assert_eq!(t.evaluate(0.0), 1.0);
        for k in [1usize, 17, 255] {
            let z = k as f64 / 256.0 * LN_2;
            assert!((t.evaluate(z) - (-z).exp()).abs() < 1e-15);
        }
        assert!((t.evaluate(LN_2) - 0.5).abs() <= 0.5 * t.error_bound());
    }

    #[test]
    fn quadratic_panels_reproduce_their_nodes() {
        let t = table(Order::Quadratic, 64);
        let h = 1.0 / 64.0;
        for k in [0usize, 31, 63] {
            for m in 0..3 {
                let d = 0.5 * h * (1.0 - ((2 * m + 1) as f64 * PI / 6.0).cos());
                let f = k as f64 * h + d;
                assert!((t.evaluate(f * LN_2) - (-f * LN_2).exp()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_arguments_stay_within_bound() {
        for t in [table(Order::Linear, 256), table(Order::Quadratic, 128)] {
            let bound = t.error_bound();
            for s in 0..20_000 {
                let z = 20.0 * (s as f64 * 0.618_033_988_749_894_8).fract();
                let exact = (-z).exp();
                assert!((t.evaluate(z) - exact).abs() <= bound * exact * 2f64.powf(1.0 / t.panels.len() as f64) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn costs() {
        let lin = InterpSpec { order: Order::Linear, panels: 256 };
        let quad = InterpSpec { order: Order::Quadratic, panels: 128 };
        assert_eq!(interp_toffoli_cost(lin, 20), 956);
        assert_eq!(interp_toffoli_cost(quad, 20), 1228);
        assert_eq!(interp_toffoli_cost(lin, 0), 256);
    }

    #[test]
    fn one_panel_table_is_poor_but_bounded() {
        let t = table(Order::Linear, 1);
        let e = t.verify_error(100_000);
        assert!(e > 1e-2 && e <= t.error_bound());
    }
}
