//! Numerical certificates for an explicit Brun-Titchmarsh bound.
//!
//! The crate recomputes the constants behind the zero-density estimates
//! (`G2`, `C2`, `G3`, the `N*` density table), assembles them into the final
//! ladder inequality, and checks the prime-counting inequalities directly
//! with a sieve at desk scale.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every certificate uses.

pub mod assembly;
pub mod density_first;
pub mod density_second;
pub mod density_third;
pub mod error;
pub mod kernels;
pub mod numerics;
pub mod primes;
pub mod report;
pub mod scalar;

pub use assembly::{
    build_table2, d, final_rhs, reference_rows, siegel_coefficient, siegel_psi_check, AssemblyParams, AssemblyRow,
    Certificate, CertificateRow, RhsBreakdown, SiegelCaseParams, SiegelCurve,
};
pub use density_first::{b1, c1, CharacterClass};
pub use density_second::{b2, c2, g2_breakdown, g2_term, g2_total, G2Breakdown, G2Options, SieveWeights};
pub use density_third::{
    build_table1, build_table1_with, g3_bound, nstar_bound, Bound, DensityTable, G3Options, Table1Spec, TableCell,
};
pub use error::{Error, Result};
pub use kernels::{
    kernel_g, kernel_h1, kernel_h2, laplace_f, laplace_g, majorant_g4, smooth_cutoff_f, MollifierParams,
    QuinticKernelParams, RampParams,
};
pub use numerics::{integrate, max1d, max2d, BoxDomain, MaximizeResult, Maximizer};
pub use primes::{bt_report, li, pi_ap, psi_ap, sieve_primes, theta_ap, PrimeCountReport, PrimeTable};
pub use report::{Cell, Report};
pub use scalar::Scalar;

pub type Complex64 = num_complex::Complex<f64>;
pub type BoxDomain64 = BoxDomain<f64>;
pub type MaximizeResult64 = MaximizeResult<f64>;
pub type RampParams64 = RampParams<f64>;
pub type MollifierParams64 = MollifierParams<f64>;
pub type QuinticKernelParams64 = QuinticKernelParams<f64>;
pub type SieveWeights64 = SieveWeights<f64>;
pub type G2Breakdown64 = G2Breakdown<f64>;
pub type AssemblyParams64 = AssemblyParams<f64>;
pub type SiegelCaseParams64 = SiegelCaseParams<f64>;
pub type SiegelCurve64 = SiegelCurve<f64>;
pub type RhsBreakdown64 = RhsBreakdown<f64>;
