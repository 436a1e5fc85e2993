//! Sweep plans, the run scheduler, the results ledger, rate fits and reports.

mod fit;
mod ledger;
mod plan;
mod report;
mod runner;

pub use fit::{fit_rate, fit_rate_excluding, spearman, RateFit};
pub use ledger::{read_ledger, write_ledger, LedgerRow, STATUS_OK};
pub use plan::{Numerics, SweepPlan};
pub use report::{report, write_report, CoVanishing, KappaRow, Permutation, RateRow, Report};
pub use runner::{run_id, run_sweep, GapSeries, RunOptions, SweepOutcome};
