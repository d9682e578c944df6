//! Grids, wavefunction storage, potentials and physical constants.
//!
//! All quantities are SI: meters, seconds, kilograms and Joules. Fields are
//! stored as two separate row-major planes (real, imaginary); for a 2-D grid
//! the flat index of point `(j, k)` is `j * ny + k`, with `j` running along x.

use crate::error::{Result, SolverError};

/// Reduced Planck constant used by default, J·s.
pub const HBAR: f64 = 1.054e-34;
/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.10938e-31;
/// Joules per electron-volt.
pub const EV: f64 = 1.602176634e-19;
/// Meters per angstrom.
pub const ANGSTROM: f64 = 1e-10;

/// Smallest admissible point count per axis (two-cell halo of the
/// fourth-order stencil on either side of a centre point).
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dims: Dims,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
}

impl GridSpec {
    pub fn one_d(nx: usize, dx: f64) -> Result<Self> {
        Self::validate_axis("grid.nx", nx, "grid.dx", dx)?;
        Ok(Self {
            dims: Dims::One,
            nx,
            ny: 1,
            dx,
            dy: dx,
        })
    }

    pub fn two_d(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::validate_axis("grid.nx", nx, "grid.dx", dx)?;
        Self::validate_axis("grid.ny", ny, "grid.dy", dy)?;
        Ok(Self {
            dims: Dims::Two,
            nx,
            ny,
            dx,
            dy,
        })
    }

    fn validate_axis(nkey: &str, n: usize, dkey: &str, d: f64) -> Result<()> {
        if n < MIN_POINTS {
            return Err(SolverError::key(
                nkey,
                format!("need at least {MIN_POINTS} points, got {n}"),
            ));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(SolverError::key(
                dkey,
                format!("spacing must be positive, got {d}"),
            ));
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn is_2d(&self) -> bool {
        self.dims == Dims::Two
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Point count along y; 1 for a 1-D grid.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Spacing along y. Equal to `dx` (and unused) on a 1-D grid.
    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.ny + k
    }

    /// Measure of one grid cell: `dx` in 1-D, `dx·dy` in 2-D.
    pub fn cell_volume(&self) -> f64 {
        match self.dims {
            Dims::One => self.dx,
            Dims::Two => self.dx * self.dy,
        }
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(SolverError::Config(format!(
                "{what} has {len} entries but the grid has {} points",
                self.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    hbar: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(SolverError::key("physics.mass_kg", "mass must be positive"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(SolverError::key("physics.hbar", "hbar must be positive"));
        }
        Ok(Self { mass, hbar })
    }

    pub fn electron() -> Self {
        Self {
            mass: ELECTRON_MASS,
            hbar: HBAR,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// ħ/2m, the coefficient of the Laplacian in the generator.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::electron()
    }
}

/// Time-staggered wavefunction samples.
///
/// With `real_time_index == n` the real plane holds ψ_real(tₙ) and the
/// imaginary plane holds ψ_imag(tₙ₊₁/₂).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
    pub real_time_index: u64,
}

impl WaveField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            real: vec![0.0; grid.len()],
            imag: vec![0.0; grid.len()],
            real_time_index: 0,
        }
    }

    pub fn from_parts(grid: &GridSpec, real: Vec<f64>, imag: Vec<f64>) -> Result<Self> {
        grid.check_len("real plane", real.len())?;
        grid.check_len("imaginary plane", imag.len())?;
        Ok(Self {
            real,
            imag,
            real_time_index: 0,
        })
    }

    pub fn check_shape(&self, grid: &GridSpec) -> Result<()> {
        grid.check_len("real plane", self.real.len())?;
        grid.check_len("imaginary plane", self.imag.len())
    }

    pub fn is_finite(&self) -> bool {
        self.real.iter().chain(&self.imag).all(|v| v.is_finite())
    }

    /// Largest absolute entry over both planes. NaN propagates as NaN.
    pub fn max_abs(&self) -> f64 {
        self.real.iter().chain(&self.imag).fold(0.0_f64, |m, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v.abs())
            }
        })
    }

    /// Largest pointwise density real² + imag².
    pub fn max_density(&self) -> f64 {
        self.real
            .iter()
            .zip(&self.imag)
            .map(|(r, i)| r * r + i * i)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            real: self.real.iter().map(|v| v * factor).collect(),
            imag: self.imag.iter().map(|v| v * factor).collect(),
            real_time_index: self.real_time_index,
        }
    }
}

/// Time-independent potential energy per grid point, in Joules.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    values: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn uniform(grid: &GridSpec, value: f64) -> Result<Self> {
        Self::from_values(grid, vec![value; grid.len()])
    }

    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.check_len("potential", values.len())?;
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Config(format!(
                "potential entry {bad} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Discrete probability Σ (real² + imag²)·cell volume.
pub fn norm(field: &WaveField, grid: &GridSpec) -> Result<f64> {
    field.check_shape(grid)?;
    let sum: f64 = field
        .real
        .iter()
        .zip(&field.imag)
        .map(|(r, i)| r * r + i * i)
        .sum();
    Ok(sum * grid.cell_volume())
}

/// Rescales both planes by the same factor so that `norm` is 1.
pub fn normalize(field: &WaveField, grid: &GridSpec) -> Result<WaveField> {
    let n = norm(field, grid)?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(SolverError::Degenerate(format!(
            "cannot normalize a field with norm {n}"
        )));
    }
    Ok(field.scaled(1.0 / n.sqrt()))
}
