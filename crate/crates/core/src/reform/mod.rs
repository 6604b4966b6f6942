//! The second-order reformulation: pointwise source terms, the term catalog,
//! residuals on slice stacks, convergence reports and the frequency probe.

pub mod catalog;
pub mod probe;
pub mod report;
pub mod residuals;
pub mod terms;

pub use catalog::{Equation, SourceGroup, TermClass, TermSpec, term_catalog};
pub use probe::{ProbeResult, ProbeVariable, frequency_scaling_probe};
pub use report::{
    EquationVerdict, OrderCell, ReportPolicy, ResidualReport, ResidualRow, ResolutionResult, StackSettings,
    convergence_study, run_resolution,
};
pub use residuals::{
    CellView, DivCurlResiduals, EquationResidual, ResidualContext, ResidualField, ResidualNorms, SourceTerms,
    TransportResiduals, WaveResiduals, divcurl_residuals, residual_norms, source_terms, transport_residuals,
    wave_residuals,
};
