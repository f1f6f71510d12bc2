//! Stability, spectral and bifurcation analysis of the two-user map.

pub mod bifurcation;
pub mod lyapunov;
pub mod stability;

pub use bifurcation::{bifurcation_scan, BifurcationScan, GridSample, ScanSettings, Sweep, SweepParameter};
pub use lyapunov::{classify_attractor, lyapunov_spectrum, AttractorKind, LyapunovSpectrum};
pub use stability::{
    characteristic_coeffs, claimed_fixed_point, find_fixed_points, hopf_alpha, jacobian_at,
    published_stability_window, residual, routh_classify, stability_report, CharCoeffs, FixedPoint,
    Mat3, ModulusVerdict, RouthVerdict, StabilityReport, Vec3,
};
