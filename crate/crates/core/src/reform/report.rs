//! Convergence reports across grid resolutions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::catalog::Equation;
use super::residuals::{ResidualNorms, residual_norms};
use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, build_slice_stack_n};
use crate::grid::{Grid, StencilOrder};
use crate::state::FluidState;

/// Verdict thresholds for a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportPolicy {
    /// Minimum observed order for order-2 stencils.
    pub min_order_second: f64,
    /// Minimum observed order for order-4 stencils.
    pub min_order_fourth: f64,
    /// Every norm at or below this counts as exact.
    pub exact_tol: f64,
}

impl Default for ReportPolicy {
    fn default() -> Self {
        Self {
            min_order_second: 1.8,
            min_order_fourth: 3.5,
            exact_tol: 1e-12,
        }
    }
}

impl ReportPolicy {
    pub fn min_order(&self, order: StencilOrder) -> f64 {
        match order {
            StencilOrder::Second => self.min_order_second,
            StencilOrder::Fourth => self.min_order_fourth,
        }
    }
}

/// Residual norms at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionResult {
    pub n: usize,
    pub dt: f64,
    pub norms: Vec<ResidualNorms>,
}

/// Content of the `order_vs_prev` column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum OrderCell {
    Empty,
    Order(f64),
    /// Every norm of the equation is at or below the exactness tolerance.
    Exact,
    /// Every norm of the equation is exactly zero while other rows of the
    /// report are not exact.
    IdenticallyZero,
}

impl OrderCell {
    fn csv(&self) -> String {
        match self {
            OrderCell::Empty => String::new(),
            OrderCell::Order(p) => format!("{p:.4}"),
            OrderCell::Exact => "exact".into(),
            OrderCell::IdenticallyZero => "identically zero".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub equation: Equation,
    pub n: usize,
    pub dt: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub order_vs_prev: OrderCell,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationVerdict {
    pub equation: Equation,
    /// Order between the two finest resolutions.
    pub observed_order: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub stencil_order: u8,
    pub rows: Vec<ResidualRow>,
    pub verdicts: Vec<EquationVerdict>,
}

pub const CSV_HEADER: &str = "equation,n,dt,sup_norm,l2_norm,order_vs_prev,pass";

impl ResidualReport {
    /// Assembles rows and verdicts. `results` must be sorted by increasing
    /// `n` and list the same equations in the same order.
    pub fn build(results: &[ResolutionResult], order: StencilOrder, policy: &ReportPolicy) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::Usage("a report needs at least one resolution".into()));
        }
        if results.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::Usage("resolutions must be strictly increasing".into()));
        }
        let eqs: Vec<Equation> = results[0].norms.iter().map(|r| r.equation).collect();
        if results
            .iter()
            .any(|r| r.norms.iter().map(|x| x.equation).ne(eqs.iter().copied()))
        {
            return Err(Error::Usage("resolutions report different equations".into()));
        }
        let threshold = policy.min_order(order);
        // A report that is exact throughout labels every row "exact", zero
        // rows included.
        let report_exact = results
            .iter()
            .all(|r| r.norms.iter().all(|x| x.sup_norm <= policy.exact_tol));
        let mut rows = Vec::new();
        let mut verdicts = Vec::new();
        for (k, &equation) in eqs.iter().enumerate() {
            let series: Vec<&ResidualNorms> = results.iter().map(|r| &r.norms[k]).collect();
            let all_zero = series.iter().all(|r| r.sup_norm == 0.0 && r.l2_norm == 0.0);
            let all_exact = series.iter().all(|r| r.sup_norm <= policy.exact_tol);
            let with_orders = results.len() >= 3;
            let orders: Vec<Option<f64>> = (0..results.len())
                .map(|j| {
                    (j > 0).then(|| {
                        let (a, b) = (&results[j - 1], &results[j]);
                        (series[j - 1].sup_norm / series[j].sup_norm).ln() / (b.n as f64 / a.n as f64).ln()
                    })
                })
                .collect();
            let (observed_order, pass) = if all_zero || all_exact {
                (None, true)
            } else if with_orders {
                let last = orders.last().copied().flatten();
                (last, last.is_some_and(|p| p >= threshold))
            } else {
                (None, false)
            };
            for (j, res) in results.iter().enumerate() {
                let order_vs_prev = if report_exact {
                    OrderCell::Exact
                } else if all_zero {
                    OrderCell::IdenticallyZero
                } else if all_exact {
                    OrderCell::Exact
                } else if with_orders {
                    orders[j].map_or(OrderCell::Empty, OrderCell::Order)
                } else {
                    OrderCell::Empty
                };
                rows.push(ResidualRow {
                    equation,
                    n: res.n,
                    dt: res.dt,
                    sup_norm: series[j].sup_norm,
                    l2_norm: series[j].l2_norm,
                    order_vs_prev,
                    pass,
                });
            }
            verdicts.push(EquationVerdict {
                equation,
                observed_order,
                threshold,
                pass,
            });
        }
        Ok(Self {
            stencil_order: order.as_u8(),
            rows,
            verdicts,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, equation: Equation) -> Option<&EquationVerdict> {
        self.verdicts.iter().find(|v| v.equation == equation)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e},{},{}",
                r.equation.id(),
                r.n,
                r.dt,
                r.sup_norm,
                r.l2_norm,
                r.order_vs_prev.csv(),
                r.pass
            );
        }
        out
    }
}

/// Time placement of the slice stacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackSettings {
    /// Time of the middle slice.
    pub t_center: f64,
    /// Slice spacing as a multiple of `h`.
    pub dt_over_h: f64,
}

impl Default for StackSettings {
    fn default() -> Self {
        Self {
            t_center: 0.2,
            dt_over_h: 0.1,
        }
    }
}

/// Evolves `initial` to a five-slice stack and measures every residual.
pub fn run_resolution(initial: &FluidState, stack: &StackSettings) -> Result<ResolutionResult> {
    let g = initial.grid();
    let dt = stack.dt_over_h * g.h();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("slice spacing must be positive, got dt={dt}")));
    }
    let st = build_slice_stack_n(initial, stack.t_center, dt, 5, EvolveOptions::default())?;
    Ok(ResolutionResult {
        n: g.n(),
        dt,
        norms: residual_norms(&st)?,
    })
}

/// Runs [`run_resolution`] for each `n` on data built by `fixture`.
pub fn convergence_study<F>(
    fixture: F,
    ns: &[usize],
    order: StencilOrder,
    stack: &StackSettings,
    policy: &ReportPolicy,
) -> Result<ResidualReport>
where
    F: Fn(Grid) -> Result<FluidState>,
{
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let results: Result<Vec<ResolutionResult>> = ns
        .iter()
        .map(|&n| {
            let g = Grid::new(n, order)?;
            run_resolution(&fixture(g)?, stack)
        })
        .collect();
    ResidualReport::build(&results?, order, policy)
}
