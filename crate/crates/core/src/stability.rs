//! Von Neumann stability of the G-FDTD schemes.
//!
//! Substituting a plane wave into one leapfrog step gives the amplification
//! quadratic `λ² − (2 − α²)λ + 1 = 0` with `α = 2·S(x)`, where `S` is the
//! sine series truncated after `x^{2N+1}` and `x` is the plane-wave symbol of
//! `−(Δt/2)·B`. Roots stay on the unit circle iff `|S(x)| ≤ 1`.
//!
//! The endpoint test evaluates `S` only at the Nyquist wavenumber. That is
//! only sufficient while `S` is monotone on `[0, x_max]`; the scan checks
//! every sampled wavenumber and is the authoritative verdict.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::field::GridSpec;
use crate::scheme::SchemeConfig;
use crate::stencil::StencilOrder;

pub const DEFAULT_THRESHOLD: f64 = 0.99;
pub const DEFAULT_SCAN_SAMPLES: usize = 256;
pub const MIN_SCAN_SAMPLES: usize = 64;

/// `Σ_{p=0..N} (−1)^p x^{2p+1} / (2p+1)!`
pub fn truncated_sine(x: f64, terms: usize) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for p in 1..=terms {
        term *= -x2 / ((2 * p) * (2 * p + 1)) as f64;
        sum += term;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySymbol {
    pub x: f64,
    pub beta_x: f64,
    pub beta_y: f64,
}

fn axis_symbol(order: StencilOrder, s: f64) -> f64 {
    match order {
        StencilOrder::Second => s,
        StencilOrder::Fourth => s * (3.0 + s) / 3.0,
    }
}

/// Symbol `x` at wavenumbers `(β_x, β_y)` (1/m); `β_y` is ignored in 1-D.
pub fn symbol_x(
    beta_x: f64,
    beta_y: f64,
    grid: &GridSpec,
    cfg: &SchemeConfig,
    v_max: f64,
) -> StabilitySymbol {
    let sx = (beta_x * grid.dx() / 2.0).sin().powi(2);
    let mut spatial = cfg.r_x() * axis_symbol(cfg.order(), sx);
    if grid.is_2d() {
        let sy = (beta_y * grid.dy() / 2.0).sin().powi(2);
        spatial += cfg.r_y() * axis_symbol(cfg.order(), sy);
    }
    let phys = cfg.physics();
    let x = phys.hbar() / phys.mass() * spatial + v_max * cfg.dt() / (2.0 * phys.hbar());
    StabilitySymbol { x, beta_x, beta_y }
}

fn nyquist(grid: &GridSpec) -> (f64, f64) {
    (PI / grid.dx(), PI / grid.dy())
}

/// `|S(x_max)|` at the Nyquist corner and whether it is `≤ c`.
pub fn endpoint_condition(cfg: &SchemeConfig, grid: &GridSpec, v_max: f64, c: f64) -> (f64, bool) {
    let (bx, by) = nyquist(grid);
    let x = symbol_x(bx, by, grid, cfg, v_max).x;
    let value = truncated_sine(x, cfg.terms()).abs();
    (value, value <= c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StableByEndpoint,
    StableByScan,
    Unstable,
    EndpointScanDisagree,
}

impl Verdict {
    pub fn is_stable(self) -> bool {
        matches!(self, Verdict::StableByEndpoint | Verdict::StableByScan)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::StableByEndpoint => "stable (endpoint)",
            Verdict::StableByScan => "stable (scan)",
            Verdict::Unstable => "unstable",
            Verdict::EndpointScanDisagree => "unstable (endpoint passes, scan fails)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub endpoint_value: f64,
    pub scan_max: f64,
    /// Symbol value at which `scan_max` was attained.
    pub scan_argmax_x: f64,
    pub threshold_c: f64,
    pub verdict: Verdict,
    pub margin: f64,
}

/// Endpoint-only report; `scan_max` mirrors the endpoint value.
pub fn endpoint_report(cfg: &SchemeConfig, grid: &GridSpec, v_max: f64, c: f64) -> StabilityReport {
    let (value, ok) = endpoint_condition(cfg, grid, v_max, c);
    let (bx, by) = nyquist(grid);
    StabilityReport {
        endpoint_value: value,
        scan_max: value,
        scan_argmax_x: symbol_x(bx, by, grid, cfg, v_max).x,
        threshold_c: c,
        verdict: if ok {
            Verdict::StableByEndpoint
        } else {
            Verdict::Unstable
        },
        margin: c - value,
    }
}

/// Evaluates `|S(x(β))|` on a uniform grid of `samples` wavenumbers per axis
/// over `(0, π/Δ]`. `samples` below [`MIN_SCAN_SAMPLES`] is raised to it.
pub fn wavenumber_scan(
    cfg: &SchemeConfig,
    grid: &GridSpec,
    v_max: f64,
    samples: usize,
    c: f64,
) -> StabilityReport {
    let samples = samples.max(MIN_SCAN_SAMPLES);
    let (value, endpoint_ok) = endpoint_condition(cfg, grid, v_max, c);
    let (nbx, nby) = nyquist(grid);
    let beta = |i: usize, top: f64| top * i as f64 / samples as f64;
    let rows = if grid.is_2d() { samples } else { 1 };
    let (scan_max, scan_argmax_x) = (1..=samples)
        .into_par_iter()
        .map(|i| {
            let bx = beta(i, nbx);
            (1..=rows)
                .map(|m| {
                    let x = symbol_x(bx, beta(m, nby), grid, cfg, v_max).x;
                    (truncated_sine(x, cfg.terms()).abs(), x)
                })
                .fold((f64::NEG_INFINITY, 0.0), pick_max)
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0), pick_max);
    let verdict = match (endpoint_ok, scan_max <= c) {
        (true, true) => Verdict::StableByScan,
        (true, false) => Verdict::EndpointScanDisagree,
        (false, _) => Verdict::Unstable,
    };
    StabilityReport {
        endpoint_value: value,
        scan_max,
        scan_argmax_x,
        threshold_c: c,
        verdict,
        margin: c - scan_max,
    }
}

// Ties resolve to the smaller x so the reduction is schedule independent.
fn pick_max(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationRoots {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub max_modulus: f64,
}

/// Roots of `λ² − (2 − α²)λ + 1 = 0`.
pub fn amplification_roots(alpha: f64) -> AmplificationRoots {
    let b = 2.0 - alpha * alpha;
    let disc = b * b - 4.0;
    let (l1, l2) = if disc <= 0.0 {
        let im = (-disc).sqrt() / 2.0;
        (Complex64::new(b / 2.0, im), Complex64::new(b / 2.0, -im))
    } else {
        // larger-magnitude root first, the other from the unit product
        let big = (b + b.signum() * disc.sqrt()) / 2.0;
        (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
    };
    AmplificationRoots {
        lambda1: l1,
        lambda2: l2,
        max_modulus: l1.norm().max(l2.norm()),
    }
}
