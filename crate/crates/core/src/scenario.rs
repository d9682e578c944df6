//! Wavepacket-on-barrier experiment: initial data, potentials, observables
//! and the time-stepping driver.
//!
//! Grid indices in this module (`center_j`, `j_min`, ...) are 1-based, the
//! way the experiment is described; point `(j, k)` lives at storage index
//! `(j − 1, k − 1)`.

use std::f64::consts::PI;
use std::path::PathBuf;

use log::{info, warn};

use crate::error::{Result, SolverError};
use crate::field::{self, GridSpec, PhysicalParams, PotentialField, WaveField};
use crate::io::snapshot::{self, RunLogWriter};
use crate::scheme::{self, SchemeConfig, Stepper};
use crate::stability::{self, StabilityReport};
use crate::stencil::{laplacian_into, StencilOrder};

/// Divergence is declared once max |ψ| exceeds this multiple of its initial value.
pub const DIVERGENCE_GROWTH: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacketSpec {
    /// Envelope width, m.
    pub sigma: f64,
    /// Carrier wavelength, m.
    pub wavelength: f64,
    pub center_j: usize,
    /// Ignored on 1-D grids.
    pub center_k: usize,
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    /// Region `j ≥ j_min && k ≥ k_min` (1-based); `k_min` is ignored in 1-D.
    pub j_min: usize,
    pub k_min: usize,
    /// Joules.
    pub height: f64,
}

fn check_index(key: &str, v: usize, n: usize) -> Result<()> {
    if v == 0 || v > n {
        return Err(SolverError::key(key, format!("index {v} outside 1..={n}")));
    }
    Ok(())
}

/// Gaussian envelope times a carrier moving along the grid diagonal:
/// `exp(−½(Δj/σ)² − ½(Δk/σ)²)·(cos, sin)(2π(Δj + Δk)/λ)` with physical offsets.
pub fn gaussian_packet(spec: &GaussianPacketSpec, grid: &GridSpec) -> Result<WaveField> {
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(SolverError::key(
            "init.sigma_angstrom",
            "sigma must be positive",
        ));
    }
    if !(spec.wavelength > 0.0 && spec.wavelength.is_finite()) {
        return Err(SolverError::key(
            "init.lambda_angstrom",
            "wavelength must be positive",
        ));
    }
    check_index("init.center_j", spec.center_j, grid.nx())?;
    if grid.is_2d() {
        check_index("init.center_k", spec.center_k, grid.ny())?;
    }
    let mut f = WaveField::zeros(grid);
    let offset = |i: usize, c: usize, d: f64| (i as f64 - (c as f64 - 1.0)) * d;
    for j in 0..grid.nx() {
        let xj = offset(j, spec.center_j, grid.dx());
        for k in 0..grid.ny() {
            let yk = if grid.is_2d() {
                offset(k, spec.center_k, grid.dy())
            } else {
                0.0
            };
            let env = (-0.5 * (xj / spec.sigma).powi(2) - 0.5 * (yk / spec.sigma).powi(2)).exp();
            let (s, c) = (2.0 * PI * (xj + yk) / spec.wavelength).sin_cos();
            let i = grid.index(j, k);
            f.real[i] = env * c;
            f.imag[i] = env * s;
        }
    }
    if spec.normalize {
        f = field::normalize(&f, grid)?;
    }
    Ok(f)
}

pub fn barrier_potential(spec: &BarrierSpec, grid: &GridSpec) -> Result<PotentialField> {
    if !(spec.height >= 0.0 && spec.height.is_finite()) {
        return Err(SolverError::key(
            "potential.height_ev",
            "height must be nonnegative",
        ));
    }
    check_index("potential.j_min", spec.j_min, grid.nx())?;
    if grid.is_2d() {
        check_index("potential.k_min", spec.k_min, grid.ny())?;
    }
    let mut v = vec![0.0; grid.len()];
    for j in spec.j_min - 1..grid.nx() {
        let k0 = if grid.is_2d() { spec.k_min - 1 } else { 0 };
        for k in k0..grid.ny() {
            v[grid.index(j, k)] = spec.height;
        }
    }
    PotentialField::from_values(grid, v)
}

/// `Σ ψ*·(−(ħ²/2m)∇² + V)·ψ · cell volume`, in Joules. Not divided by the norm.
pub fn energy_expectation(
    field: &WaveField,
    potential: &PotentialField,
    grid: &GridSpec,
    physics: &PhysicalParams,
    order: StencilOrder,
) -> Result<f64> {
    field.check_shape(grid)?;
    grid.check_len("potential", potential.len())?;
    let n = grid.len();
    let (mut lr, mut li) = (vec![0.0; n], vec![0.0; n]);
    laplacian_into(&field.real, &mut lr, grid, order);
    laplacian_into(&field.imag, &mut li, grid, order);
    let kin = -physics.hbar() * physics.kinetic_coefficient();
    let v = potential.values();
    let (mut re, mut im, mut scale) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (r, q) = (field.real[i], field.imag[i]);
        let hr = kin * lr[i] + v[i] * r;
        let hq = kin * li[i] + v[i] * q;
        re += r * hr + q * hq;
        im += r * hq - q * hr;
        scale += (r * hr).abs() + (q * hq).abs();
    }
    if im.abs() > 1e-10 * scale {
        return Err(SolverError::Contract(format!(
            "energy has imaginary residual {im:e} against scale {scale:e}"
        )));
    }
    Ok(re * grid.cell_volume())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub step: u64,
    pub time_s: f64,
    pub norm: f64,
    pub max_density: f64,
    /// Energy expectation divided by the norm, J.
    pub energy_j: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub records: Vec<RunRecord>,
    pub divergence_step: Option<u64>,
}

impl RunLog {
    pub fn diverged(&self) -> bool {
        self.divergence_step.is_some()
    }

    pub fn initial(&self) -> Option<&RunRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&RunRecord> {
        self.records.last()
    }

    /// Largest |norm/initial − 1| over the recorded steps.
    pub fn max_norm_drift(&self) -> f64 {
        let Some(first) = self.initial() else {
            return 0.0;
        };
        self.records
            .iter()
            .map(|r| (r.norm / first.norm - 1.0).abs())
            .fold(
                0.0,
                |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) },
            )
    }
}

/// Everything needed to run one experiment, in SI units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridSpec,
    pub scheme: SchemeConfig,
    pub packet: GaussianPacketSpec,
    pub barrier: BarrierSpec,
    pub steps: u64,
    /// Record observables every this many steps; 0 records only the ends.
    pub snapshot_every: u64,
    pub out_dir: Option<PathBuf>,
    pub full_field_dumps: bool,
    pub stability_c: f64,
    pub scan_samples: usize,
    /// Start the imaginary plane half a step ahead instead of at t = 0.
    pub half_step_start: bool,
}

impl Scenario {
    pub fn potential(&self) -> Result<PotentialField> {
        barrier_potential(&self.barrier, &self.grid)
    }

    pub fn initial_field(&self, potential: &PotentialField) -> Result<WaveField> {
        let f = gaussian_packet(&self.packet, &self.grid)?;
        if self.half_step_start {
            scheme::half_step_correction(&f, potential, &self.grid, &self.scheme)
        } else {
            Ok(f)
        }
    }

    pub fn stability(&self) -> StabilityReport {
        let v_max = if self.barrier.height > 0.0 {
            self.barrier.height
        } else {
            0.0
        };
        stability::wavenumber_scan(
            &self.scheme,
            &self.grid,
            v_max,
            self.scan_samples,
            self.stability_c,
        )
    }

    fn records_at(&self, step: u64) -> bool {
        step == 0
            || step == self.steps
            || (self.snapshot_every > 0 && step.is_multiple_of(self.snapshot_every))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub log: RunLog,
    pub stability: StabilityReport,
    pub final_field: WaveField,
}

fn observe(field: &WaveField, potential: &PotentialField, sc: &Scenario) -> Result<RunRecord> {
    let norm = field::norm(field, &sc.grid)?;
    let energy = if field.is_finite() {
        energy_expectation(
            field,
            potential,
            &sc.grid,
            sc.scheme.physics(),
            sc.scheme.order(),
        )? / norm
    } else {
        f64::NAN
    };
    Ok(RunRecord {
        step: field.real_time_index,
        time_s: field.real_time_index as f64 * sc.scheme.dt(),
        norm,
        max_density: field.max_density(),
        energy_j: energy,
    })
}

/// Runs the scenario, calling `observer` on every recorded field.
pub fn run_with<F>(sc: &Scenario, mut observer: F) -> Result<RunOutcome>
where
    F: FnMut(&WaveField),
{
    let report = sc.stability();
    info!(
        "stability: endpoint {:.6}, scan max {:.6}, verdict {}, margin {:.4}",
        report.endpoint_value, report.scan_max, report.verdict, report.margin
    );
    if !report.verdict.is_stable() {
        warn!("configuration is not predicted stable; divergence is likely");
    }
    let potential = sc.potential()?;
    let mut field = sc.initial_field(&potential)?;
    let mut stepper = Stepper::new(&sc.scheme, &sc.grid, &potential)?;

    let mut writer = match &sc.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            snapshot::write_stability_report(&report, sc, dir)?;
            Some(RunLogWriter::create(&dir.join("runlog.csv"))?)
        }
        None => None,
    };

    let initial_max = field.max_abs();
    let mut log = RunLog::default();
    let mut record = |field: &WaveField, log: &mut RunLog, observer: &mut F| -> Result<()> {
        let rec = observe(field, &potential, sc)?;
        if let Some(w) = writer.as_mut() {
            w.append(&rec)?;
        }
        if let Some(dir) = &sc.out_dir {
            snapshot::write_diagonal_snapshot(field, &sc.grid, rec.step, dir)?;
            if sc.full_field_dumps {
                snapshot::write_field_dump(field, &sc.grid, rec.step, rec.time_s, dir)?;
            }
        }
        observer(field);
        log.records.push(rec);
        Ok(())
    };

    record(&field, &mut log, &mut observer)?;
    for _ in 0..sc.steps {
        let stepped = stepper.step(&mut field);
        let blown =
            field.max_abs() > DIVERGENCE_GROWTH * initial_max || !field.max_abs().is_finite();
        if stepped.is_err() || blown {
            let step = field.real_time_index;
            warn!("divergence detected at step {step}");
            log.divergence_step = Some(step);
            record(&field, &mut log, &mut observer)?;
            break;
        }
        if sc.records_at(field.real_time_index) {
            record(&field, &mut log, &mut observer)?;
        }
    }
    Ok(RunOutcome {
        log,
        stability: report,
        final_field: field,
    })
}

pub fn run(sc: &Scenario) -> Result<RunOutcome> {
    run_with(sc, |_| {})
}
