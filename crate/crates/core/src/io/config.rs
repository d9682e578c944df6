//! TOML run configuration.
//!
//! Lengths are given in angstrom and energies in eV (the unit is part of the
//! key name); the SI accessors convert. Grid indices are 1-based.
//!
//! ```toml
//! [grid]
//! dims = 2
//! nx = 200
//! ny = 200
//! dx_angstrom = 0.1
//!
//! [scheme]
//! N = 2
//! stencil_order = 2
//! mu = 0.35
//!
//! [run]
//! steps = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::field::{GridSpec, PhysicalParams, ANGSTROM, ELECTRON_MASS, EV, HBAR, MIN_POINTS};
use crate::scenario::{BarrierSpec, GaussianPacketSpec, Scenario};
use crate::scheme::{SchemeConfig, MAX_TERMS};
use crate::stability::{DEFAULT_SCAN_SAMPLES, DEFAULT_THRESHOLD, MIN_SCAN_SAMPLES};
use crate::stencil::StencilOrder;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["dims", "nx", "ny", "dx_angstrom"]),
    ("physics", &["mass_kg", "hbar"]),
    ("scheme", &["N", "stencil_order", "mu"]),
    (
        "init",
        &[
            "sigma_angstrom",
            "lambda_angstrom",
            "center_j",
            "center_k",
            "normalize",
        ],
    ),
    ("potential", &["type", "height_ev", "j_min", "k_min"]),
    (
        "run",
        &["steps", "snapshot_every", "out_dir", "full_field_dumps"],
    ),
    ("stability", &["c", "scan_samples"]),
];

const REQUIRED: &[&str] = &[
    "grid.dims",
    "grid.nx",
    "scheme.N",
    "scheme.stencil_order",
    "scheme.mu",
    "run.steps",
];

pub const QUADRANT_BARRIER: &str = "quadrant_barrier";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dims: u8,
    pub nx: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default = "defaults::dx_angstrom")]
    pub dx_angstrom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default = "defaults::mass")]
    pub mass_kg: f64,
    #[serde(default = "defaults::hbar")]
    pub hbar: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            mass_kg: ELECTRON_MASS,
            hbar: HBAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(rename = "N")]
    pub terms: usize,
    pub stencil_order: u32,
    pub mu: f64,
}

/// Unset centres default to a quarter of the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    #[serde(default = "defaults::one")]
    pub sigma_angstrom: f64,
    #[serde(default = "defaults::one")]
    pub lambda_angstrom: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_k: Option<usize>,
    #[serde(default = "defaults::yes")]
    pub normalize: bool,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            sigma_angstrom: 1.0,
            lambda_angstrom: 1.0,
            center_j: None,
            center_k: None,
            normalize: true,
        }
    }
}

/// Unset barrier corners default to the middle of the axis plus one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(rename = "type", default = "defaults::barrier")]
    pub kind: String,
    #[serde(default = "defaults::height")]
    pub height_ev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            kind: QUADRANT_BARRIER.into(),
            height_ev: 100.0,
            j_min: None,
            k_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: u64,
    #[serde(default = "defaults::snapshot_every")]
    pub snapshot_every: u64,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub full_field_dumps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "defaults::c")]
    pub c: f64,
    #[serde(default = "defaults::scan_samples")]
    pub scan_samples: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            c: DEFAULT_THRESHOLD,
            scan_samples: DEFAULT_SCAN_SAMPLES,
        }
    }
}

mod defaults {
    use std::path::PathBuf;

    pub fn dx_angstrom() -> f64 {
        0.1
    }
    pub fn mass() -> f64 {
        super::ELECTRON_MASS
    }
    pub fn hbar() -> f64 {
        super::HBAR
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn yes() -> bool {
        true
    }
    pub fn barrier() -> String {
        super::QUADRANT_BARRIER.into()
    }
    pub fn height() -> f64 {
        100.0
    }
    pub fn snapshot_every() -> u64 {
        50
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn c() -> f64 {
        super::DEFAULT_THRESHOLD
    }
    pub fn scan_samples() -> usize {
        super::DEFAULT_SCAN_SAMPLES
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub potential: PotentialSection,
    pub run: RunSection,
    #[serde(default)]
    pub stability: StabilitySection,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| SolverError::Config(e.message().to_string()))?;
    check_keys(&table)?;
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| SolverError::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn check_keys(table: &toml::Table) -> Result<()> {
    for (section, value) in table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == section) else {
            return Err(SolverError::key(section.clone(), "unknown section"));
        };
        let Some(inner) = value.as_table() else {
            return Err(SolverError::key(section.clone(), "expected a table"));
        };
        if let Some(bad) = inner.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(SolverError::key(format!("{section}.{bad}"), "unknown key"));
        }
    }
    for path in REQUIRED {
        let (s, k) = path.split_once('.').expect("dotted path");
        let present = table
            .get(s)
            .and_then(|v| v.as_table())
            .is_some_and(|t| t.contains_key(k));
        if !present {
            return Err(SolverError::key(*path, "missing required key"));
        }
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SolverError::key(
            key,
            format!("must be a positive number, got {v}"),
        ))
    }
}

fn in_axis(key: &str, v: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&v) {
        Ok(())
    } else {
        Err(SolverError::key(key, format!("index {v} outside 1..={n}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn is_2d(&self) -> bool {
        self.grid.dims == 2
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.dims != 1 && g.dims != 2 {
            return Err(SolverError::key(
                "grid.dims",
                format!("must be 1 or 2, got {}", g.dims),
            ));
        }
        if g.nx < MIN_POINTS {
            return Err(SolverError::key(
                "grid.nx",
                format!("need at least {MIN_POINTS} points"),
            ));
        }
        match (g.dims, g.ny) {
            (2, None) => return Err(SolverError::key("grid.ny", "required for a 2-D grid")),
            (2, Some(ny)) if ny < MIN_POINTS => {
                return Err(SolverError::key(
                    "grid.ny",
                    format!("need at least {MIN_POINTS} points"),
                ))
            }
            (1, Some(_)) => return Err(SolverError::key("grid.ny", "not allowed for a 1-D grid")),
            _ => {}
        }
        positive("grid.dx_angstrom", g.dx_angstrom)?;
        positive("physics.mass_kg", self.physics.mass_kg)?;
        positive("physics.hbar", self.physics.hbar)?;
        if self.scheme.terms > MAX_TERMS {
            return Err(SolverError::key(
                "scheme.N",
                format!("must be in 0..={MAX_TERMS}"),
            ));
        }
        if StencilOrder::from_accuracy(self.scheme.stencil_order).is_none() {
            return Err(SolverError::key(
                "scheme.stencil_order",
                format!("must be 2 or 4, got {}", self.scheme.stencil_order),
            ));
        }
        positive("scheme.mu", self.scheme.mu)?;
        positive("init.sigma_angstrom", self.init.sigma_angstrom)?;
        positive("init.lambda_angstrom", self.init.lambda_angstrom)?;
        let (nx, ny) = (g.nx, g.ny.unwrap_or(1));
        in_axis("init.center_j", self.center_j(), nx)?;
        if self.init.center_k.is_some() && !self.is_2d() {
            return Err(SolverError::key(
                "init.center_k",
                "not allowed for a 1-D grid",
            ));
        }
        if self.is_2d() {
            in_axis("init.center_k", self.center_k(), ny)?;
        }
        if self.potential.kind != QUADRANT_BARRIER {
            return Err(SolverError::key(
                "potential.type",
                format!("unsupported potential `{}`", self.potential.kind),
            ));
        }
        let h = self.potential.height_ev;
        if !(h.is_finite() && h >= 0.0) {
            return Err(SolverError::key(
                "potential.height_ev",
                "must be a nonnegative number",
            ));
        }
        in_axis("potential.j_min", self.j_min(), nx)?;
        if self.potential.k_min.is_some() && !self.is_2d() {
            return Err(SolverError::key(
                "potential.k_min",
                "not allowed for a 1-D grid",
            ));
        }
        if self.is_2d() {
            in_axis("potential.k_min", self.k_min(), ny)?;
        }
        let c = self.stability.c;
        if !(c > 0.0 && c < 1.0) {
            return Err(SolverError::key(
                "stability.c",
                format!("must lie in (0, 1), got {c}"),
            ));
        }
        if self.stability.scan_samples < MIN_SCAN_SAMPLES {
            return Err(SolverError::key(
                "stability.scan_samples",
                format!("must be at least {MIN_SCAN_SAMPLES}"),
            ));
        }
        Ok(())
    }

    pub fn center_j(&self) -> usize {
        self.init.center_j.unwrap_or(self.grid.nx / 4)
    }

    pub fn center_k(&self) -> usize {
        self.init.center_k.unwrap_or(self.grid.ny.unwrap_or(1) / 4)
    }

    pub fn j_min(&self) -> usize {
        self.potential.j_min.unwrap_or(self.grid.nx / 2 + 1)
    }

    pub fn k_min(&self) -> usize {
        self.potential
            .k_min
            .unwrap_or(self.grid.ny.unwrap_or(1) / 2 + 1)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let d = self.grid.dx_angstrom * ANGSTROM;
        match self.grid.ny {
            Some(ny) if self.is_2d() => GridSpec::two_d(self.grid.nx, ny, d, d),
            _ => GridSpec::one_d(self.grid.nx, d),
        }
    }

    pub fn physics_params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.physics.mass_kg, self.physics.hbar)
    }

    pub fn stencil_order(&self) -> Result<StencilOrder> {
        StencilOrder::from_accuracy(self.scheme.stencil_order)
            .ok_or_else(|| SolverError::key("scheme.stencil_order", "must be 2 or 4"))
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let grid = self.grid_spec()?;
        SchemeConfig::new(
            self.scheme.terms,
            self.stencil_order()?,
            self.scheme.mu,
            self.physics_params()?,
            &grid,
        )
    }

    pub fn packet(&self) -> GaussianPacketSpec {
        GaussianPacketSpec {
            sigma: self.init.sigma_angstrom * ANGSTROM,
            wavelength: self.init.lambda_angstrom * ANGSTROM,
            center_j: self.center_j(),
            center_k: self.center_k(),
            normalize: self.init.normalize,
        }
    }

    pub fn barrier(&self) -> BarrierSpec {
        BarrierSpec {
            j_min: self.j_min(),
            k_min: self.k_min(),
            height: self.potential.height_ev * EV,
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.validate()?;
        Ok(Scenario {
            grid: self.grid_spec()?,
            scheme: self.scheme_config()?,
            packet: self.packet(),
            barrier: self.barrier(),
            steps: self.run.steps,
            snapshot_every: self.run.snapshot_every,
            out_dir: Some(self.run.out_dir.clone()),
            full_field_dumps: self.run.full_field_dumps,
            stability_c: self.stability.c,
            scan_samples: self.stability.scan_samples,
            half_step_start: false,
        })
    }

    /// The wavepacket-on-barrier experiment at full size: 800×800 points of
    /// 0.1 Å, packet centred at (200, 200), 100 eV barrier from (401, 401).
    pub fn standard(terms: usize, stencil_order: u32, mu: f64) -> Self {
        Self::square(800, terms, stencil_order, mu)
    }

    /// Same experiment at 200×200 with all index positions scaled by 1/4.
    pub fn reduced(terms: usize, stencil_order: u32, mu: f64) -> Self {
        Self::square(200, terms, stencil_order, mu)
    }

    fn square(n: usize, terms: usize, stencil_order: u32, mu: f64) -> Self {
        Self {
            grid: GridSection {
                dims: 2,
                nx: n,
                ny: Some(n),
                dx_angstrom: 0.1,
            },
            physics: PhysicsSection::default(),
            scheme: SchemeSection {
                terms,
                stencil_order,
                mu,
            },
            init: InitSection {
                center_j: Some(n / 4),
                center_k: Some(n / 4),
                ..InitSection::default()
            },
            potential: PotentialSection {
                j_min: Some(n / 2 + 1),
                k_min: Some(n / 2 + 1),
                ..PotentialSection::default()
            },
            run: RunSection {
                steps: 500,
                snapshot_every: 50,
                out_dir: defaults::out_dir(),
                full_field_dumps: false,
            },
            stability: StabilitySection::default(),
        }
    }
}
