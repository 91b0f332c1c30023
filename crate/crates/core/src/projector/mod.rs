//! Smoothed spectral projectors: cutoff families and the kernels of
//! chi((sqrt(Delta - 1/4) - lambda) / eta) and its Littlewood-Paley pieces.

pub mod bump;
pub mod checks;
pub mod kernels;

pub use bump::{BumpFamily, BumpKind};
pub use kernels::{
    dual_route, dyadic_k0, kernel_p, kernel_q, kernel_sigma, rel_sup_error, uniform_grid, DualRouteReport, KernelConfig,
    DUAL_ROUTE_RESOLUTION,
    KernelFamily, KernelValues, ProjectorKernel, SpectralWindow,
};
pub use checks::{
    bound_cell, low_frequency_check, low_frequency_scan, sampling_grid, sigma_band, summarize_bounds, telescoping_check,
    verify_pointwise_bounds, BoundReport, BoundRow, EtaRule, ScanSpec,
};
