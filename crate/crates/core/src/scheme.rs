//! Staggered leapfrog G-FDTD steppers.
//!
//! The real plane advances from tₙ₋₁ to tₙ using the imaginary plane at
//! tₙ₋₁/₂, then the imaginary plane advances to tₙ₊₁/₂ using the new real
//! plane. Each half update is a truncated odd Taylor series in the generator
//! `B = (ħ/2m)∇² − V/ħ`:
//!
//! ```text
//! real += 2 Σ_{p=0..N} (Δt/2)^{2p+1} (−1)^{p+1} / (2p+1)! · B^{2p+1} imag
//! imag += 2 Σ_{p=0..N} (Δt/2)^{2p+1} (−1)^{p}   / (2p+1)! · B^{2p+1} real
//! ```
//!
//! With N = 0 this is the classic FDTD leapfrog. The series is evaluated with
//! the dimensionless operator `G = (Δt/2)·B` so that high powers stay in range.

use crate::error::{Result, SolverError};
use crate::field::{GridSpec, PhysicalParams, PotentialField, WaveField};
use crate::stencil::{Generator, StencilOrder};

/// Largest supported truncation index; (2N+1)! stays an exact double.
pub const MAX_TERMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    terms: usize,
    order: StencilOrder,
    mu: f64,
    dt: f64,
    dx: f64,
    dy: f64,
    physics: PhysicalParams,
}

impl SchemeConfig {
    /// Time step from the mesh ratio: `Δt = μ·2m·Δx²/ħ`.
    pub fn new(
        terms: usize,
        order: StencilOrder,
        mu: f64,
        physics: PhysicalParams,
        grid: &GridSpec,
    ) -> Result<Self> {
        if terms > MAX_TERMS {
            return Err(SolverError::key(
                "scheme.N",
                format!("truncation index must be in 0..={MAX_TERMS}, got {terms}"),
            ));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::key(
                "scheme.mu",
                format!("mu must be positive, got {mu}"),
            ));
        }
        let dt = mu * 2.0 * physics.mass() * grid.dx() * grid.dx() / physics.hbar();
        Ok(Self {
            terms,
            order,
            mu,
            dt,
            dx: grid.dx(),
            dy: grid.dy(),
            physics,
        })
    }

    /// Truncation index N (the series keeps p = 0..=N).
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn order(&self) -> StencilOrder {
        self.order
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn physics(&self) -> &PhysicalParams {
        &self.physics
    }

    /// Mesh ratio Δt/Δx².
    pub fn r_x(&self) -> f64 {
        self.dt / (self.dx * self.dx)
    }

    /// Mesh ratio Δt/Δy².
    pub fn r_y(&self) -> f64 {
        self.dt / (self.dy * self.dy)
    }

    pub fn with_mu(&self, mu: f64, grid: &GridSpec) -> Result<Self> {
        Self::new(self.terms, self.order, mu, self.physics, grid)
    }

    pub fn with_terms(&self, terms: usize, grid: &GridSpec) -> Result<Self> {
        Self::new(terms, self.order, self.mu, self.physics, grid)
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        if rel(self.dx, grid.dx()) > 1e-14 || (grid.is_2d() && rel(self.dy, grid.dy()) > 1e-14) {
            return Err(SolverError::Config(
                "scheme configuration was built for a different grid spacing".into(),
            ));
        }
        Ok(())
    }
}

/// Owns the scaled generator and scratch planes for repeated stepping.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SchemeConfig,
    generator: Generator,
    /// `2·(−1)^p/(2p+1)!` for p = 0..=N.
    coeffs: Vec<f64>,
    power: Vec<f64>,
    scratch: Vec<f64>,
    series: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: &SchemeConfig, grid: &GridSpec, potential: &PotentialField) -> Result<Self> {
        cfg.check_grid(grid)?;
        let generator = Generator::new(grid, potential, &cfg.physics, cfg.order, 0.5 * cfg.dt)?;
        let mut coeffs = Vec::with_capacity(cfg.terms + 1);
        let mut factorial = 1.0;
        for p in 0..=cfg.terms {
            if p > 0 {
                factorial *= ((2 * p) * (2 * p + 1)) as f64;
            }
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(2.0 * sign / factorial);
        }
        let n = grid.len();
        Ok(Self {
            cfg: *cfg,
            generator,
            coeffs,
            power: vec![0.0; n],
            scratch: vec![0.0; n],
            series: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// series ← Σ_p 2(−1)^p/(2p+1)! · G^{2p+1} src
    fn series_of(&mut self, src: &[f64]) {
        let gen = &self.generator;
        gen.apply_into(src, &mut self.power);
        let c0 = self.coeffs[0];
        for (s, g) in self.series.iter_mut().zip(&self.power) {
            *s = c0 * g;
        }
        for &c in &self.coeffs[1..] {
            gen.apply_into(&self.power, &mut self.scratch);
            gen.apply_into(&self.scratch, &mut self.power);
            for (s, g) in self.series.iter_mut().zip(&self.power) {
                *s += c * g;
            }
        }
    }

    /// Advances the real plane by one step using the current imaginary plane.
    pub fn step_real(&mut self, field: &mut WaveField) {
        self.series_of(&field.imag);
        for (r, s) in field.real.iter_mut().zip(&self.series) {
            *r -= s;
        }
    }

    /// Advances the imaginary plane by one step using the current real plane.
    pub fn step_imag(&mut self, field: &mut WaveField) {
        self.series_of(&field.real);
        for (i, s) in field.imag.iter_mut().zip(&self.series) {
            *i += s;
        }
    }

    /// One full leapfrog step. Fails with `Diverged` if any value is not finite.
    pub fn step(&mut self, field: &mut WaveField) -> Result<()> {
        self.step_real(field);
        self.step_imag(field);
        field.real_time_index += 1;
        if !field.is_finite() {
            return Err(SolverError::Diverged {
                step: field.real_time_index,
            });
        }
        Ok(())
    }
}

fn prepared(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    cfg: &SchemeConfig,
) -> Result<(Stepper, WaveField)> {
    field.check_shape(grid)?;
    Ok((Stepper::new(cfg, grid, potential)?, field.clone()))
}

/// Real plane after one real-part update.
pub fn step_real(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    cfg: &SchemeConfig,
) -> Result<Vec<f64>> {
    let (mut st, mut f) = prepared(field, potential, grid, cfg)?;
    st.step_real(&mut f);
    if f.real.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Diverged {
            step: field.real_time_index + 1,
        });
    }
    Ok(f.real)
}

/// Imaginary plane after one imaginary-part update.
pub fn step_imag(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    cfg: &SchemeConfig,
) -> Result<Vec<f64>> {
    let (mut st, mut f) = prepared(field, potential, grid, cfg)?;
    st.step_imag(&mut f);
    if f.imag.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Diverged {
            step: field.real_time_index + 1,
        });
    }
    Ok(f.imag)
}

pub fn step(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    cfg: &SchemeConfig,
) -> Result<WaveField> {
    let (mut st, mut f) = prepared(field, potential, grid, cfg)?;
    st.step(&mut f)?;
    Ok(f)
}

/// Replaces the imaginary plane with Im[exp(iBΔt/2)ψ], i.e. the imaginary
/// part half a step ahead of the real plane under the semi-discrete
/// evolution. Used when both planes were sampled at the same instant.
pub fn half_step_correction(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    cfg: &SchemeConfig,
) -> Result<WaveField> {
    field.check_shape(grid)?;
    cfg.check_grid(grid)?;
    let g = Generator::new(grid, potential, &cfg.physics, cfg.order, 0.5 * cfg.dt)?;
    let n = grid.len();
    let scale = field.max_abs();
    let (mut tr, mut ti) = (field.real.clone(), field.imag.clone());
    let mut acc = field.imag.clone();
    let (mut gr, mut gi) = (vec![0.0; n], vec![0.0; n]);
    for k in 1..=80 {
        // (iG)(tr + i ti)/k = (−G ti + i G tr)/k
        g.apply_into(&tr, &mut gr);
        g.apply_into(&ti, &mut gi);
        let inv = 1.0 / k as f64;
        let mut largest = 0.0_f64;
        for idx in 0..n {
            let nr = -gi[idx] * inv;
            let ni = gr[idx] * inv;
            tr[idx] = nr;
            ti[idx] = ni;
            acc[idx] += ni;
            largest = largest.max(nr.abs()).max(ni.abs());
        }
        if largest <= 1e-19 * scale {
            break;
        }
    }
    Ok(WaveField {
        real: field.real.clone(),
        imag: acc,
        real_time_index: field.real_time_index,
    })
}
