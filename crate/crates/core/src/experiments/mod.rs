//! Degree-by-degree scans over monic irreducibles and the predicted
//! densities they are compared against.

mod constants;
mod scan;

pub use constants::{const_cyclic, const_koblitz, ConstantApprox, ConstantKind, DEFAULT_TRUNCATION};
pub use scan::{
    lt_ratio_report, scan, tabulate_cyclic, tabulate_koblitz, tabulate_lang_trotter, DegreeSummary, ScanConfig,
    ScanSummary, DEFAULT_DEGREE_CAP,
};

/// The density correction for cyclicity of the default module is 1.
pub const D_PHI: u32 = 1;
