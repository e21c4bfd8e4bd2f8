//! Exact conditional distributions of run and scan statistics given the
//! number of successes, and the distribution-free Phase I control charts
//! built on them.
//!
//! Given `n1` ones among `n` binary trials, every arrangement is equally
//! likely whatever the underlying success probability, so these
//! distributions hold for any continuous process distribution once the
//! observations are thresholded.
//!
//! * [`fmci`]: sparse propagation engine for nonhomogeneous imbedded chains.
//! * [`runs`]: number of success runs via the zero-insertion chain.
//! * [`scan`]: scan statistic via the ending-block automaton.
//! * [`charting`]: the R-1 (runs) and R-2 (scan) charts with exact or
//!   randomized limits.
//! * [`localization`]: top windows and longest runs after a signal.
//! * [`simulation`]: change-point Monte Carlo harness.
//! * [`oracle`]: brute-force enumeration used to certify the above.

pub mod charting;
pub mod error;
pub mod fmci;
pub mod ingest;
pub mod localization;
pub mod oracle;
pub mod pmf;
pub mod runs;
pub mod scan;
pub mod simulation;

pub use charting::{
    binarize, randomized_lower_limit, randomized_upper_limit, run_chart, run_chart_r1,
    run_chart_r2, threshold_from_quantile, BinarySequence, ChartConfig, ChartDecision, ChartKind,
    LimitRule, RandomizedLimit, Sample,
};
pub use error::{Error, Result};
pub use localization::{longest_runs, topk_windows, LocalizationReport, RunReport, WindowReport};
pub use pmf::{ConditionalPmf, Percentile, Statistic};
pub use runs::{runs_lower_percentile, runs_pmf, RunsQuery};
pub use scan::{
    scan_cdf_at, scan_pmf, scan_tail, scan_tail_mc, scan_upper_percentile, ScanEngine, ScanQuery,
    ScanRoute,
};
