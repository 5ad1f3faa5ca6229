//! The h-flow (Ricci–DeTurck flow against a fixed background) in
//! SO(n)-invariant reduction, its DeTurck diffeomorphisms and monitors.

mod diffeo;
mod flow;
mod monitor;
mod rhs;

pub use diffeo::{attach_diffeo, flow_residuals, integrate_diffeo, pullback_metric, FlowResiduals};
pub use flow::{frozen_mask, run_hflow, step_flow, FlowConfig, FlowState, FlowTrace, COLLAR};
pub use rhs::{deturck_field, deturck_point, deturck_rhs, hflow_point, hflow_rhs};
pub use monitor::{fit_monotone_constant, monitor_estimates, MonitorReport, MonitorSample, MONITOR_FRACTION};
pub(crate) use rhs::metric_jets;
