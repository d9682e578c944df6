//! Output files.
//!
//! * `diag_<step>.csv`: `k,psi_real,psi_imag,density`, one row per diagonal
//!   point (the whole line for 1-D grids), 1-based `k`, 17 significant digits.
//! * `field_<step>.f64`: little-endian f64, row-major, real plane then
//!   imaginary plane; `field_<step>.meta` holds `key = value` lines.
//! * `runlog.csv`: `step,time_s,norm,max_density,energy_ev`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Result, SolverError};
use crate::field::{GridSpec, WaveField, EV};
use crate::scenario::{RunRecord, Scenario};
use crate::stability::StabilityReport;

pub const DIAGONAL_HEADER: &str = "k,psi_real,psi_imag,density";
pub const RUNLOG_HEADER: &str = "step,time_s,norm,max_density,energy_ev";
pub const DUMP_LAYOUT_VERSION: u32 = 1;

fn bad_file(path: &Path, msg: impl std::fmt::Display) -> SolverError {
    SolverError::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("{}: {msg}", path.display()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalRow {
    pub k: usize,
    pub psi_real: f64,
    pub psi_imag: f64,
    pub density: f64,
}

/// Storage indices of the diagonal (or the full 1-D line).
fn diagonal_indices(grid: &GridSpec) -> Result<Vec<usize>> {
    if !grid.is_2d() {
        return Ok((0..grid.nx()).collect());
    }
    if grid.nx() != grid.ny() {
        return Err(SolverError::Config(format!(
            "diagonal snapshots need a square grid, got {}x{}",
            grid.nx(),
            grid.ny()
        )));
    }
    Ok((0..grid.nx()).map(|k| grid.index(k, k)).collect())
}

pub fn diagonal_rows(field: &WaveField, grid: &GridSpec) -> Result<Vec<DiagonalRow>> {
    field.check_shape(grid)?;
    Ok(diagonal_indices(grid)?
        .into_iter()
        .enumerate()
        .map(|(k, i)| {
            let (r, q) = (field.real[i], field.imag[i]);
            DiagonalRow {
                k: k + 1,
                psi_real: r,
                psi_imag: q,
                density: r * r + q * q,
            }
        })
        .collect())
}

pub fn write_diagonal_snapshot(
    field: &WaveField,
    grid: &GridSpec,
    step: u64,
    out_dir: &Path,
) -> Result<PathBuf> {
    let rows = diagonal_rows(field, grid)?;
    let path = out_dir.join(format!("diag_{step}.csv"));
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "{DIAGONAL_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            r.k, r.psi_real, r.psi_imag, r.density
        )?;
    }
    w.flush()?;
    Ok(path)
}

pub fn read_diagonal_snapshot(path: &Path) -> Result<Vec<DiagonalRow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h == DIAGONAL_HEADER => {}
        _ => return Err(bad_file(path, "missing diagonal header")),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad_file(path, format!("bad row `{line}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad_file(path, e));
        rows.push(DiagonalRow {
            k: cols[0].parse().map_err(|e| bad_file(path, e))?,
            psi_real: num(cols[1])?,
            psi_imag: num(cols[2])?,
            density: num(cols[3])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpMeta {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub step: u64,
    pub time_s: f64,
    pub layout_version: u32,
}

pub fn dump_paths(out_dir: &Path, step: u64) -> (PathBuf, PathBuf) {
    (
        out_dir.join(format!("field_{step}.f64")),
        out_dir.join(format!("field_{step}.meta")),
    )
}

pub fn write_field_dump(
    field: &WaveField,
    grid: &GridSpec,
    step: u64,
    time_s: f64,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    field.check_shape(grid)?;
    let (data, meta) = dump_paths(out_dir, step);
    let mut w = BufWriter::new(File::create(&data)?);
    for v in field.real.iter().chain(&field.imag) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let mut m = BufWriter::new(File::create(&meta)?);
    writeln!(m, "layout_version = {DUMP_LAYOUT_VERSION}")?;
    writeln!(m, "nx = {}", grid.nx())?;
    writeln!(m, "ny = {}", grid.ny())?;
    writeln!(m, "dx = {:e}", grid.dx())?;
    writeln!(m, "dy = {:e}", grid.dy())?;
    writeln!(m, "step = {step}")?;
    writeln!(m, "time_s = {time_s:e}")?;
    m.flush()?;
    Ok((data, meta))
}

pub fn read_dump_meta(path: &Path) -> Result<DumpMeta> {
    let text = std::fs::read_to_string(path)?;
    let get = |key: &str| -> Result<String> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim().to_string())
            .ok_or_else(|| bad_file(path, format!("missing `{key}`")))
    };
    macro_rules! field {
        ($k:literal) => {
            get($k)?
                .parse()
                .map_err(|e| bad_file(path, format!("{}: {e}", $k)))?
        };
    }
    let meta = DumpMeta {
        layout_version: field!("layout_version"),
        nx: field!("nx"),
        ny: field!("ny"),
        dx: field!("dx"),
        dy: field!("dy"),
        step: field!("step"),
        time_s: field!("time_s"),
    };
    if meta.layout_version != DUMP_LAYOUT_VERSION {
        return Err(bad_file(
            path,
            format!("unsupported layout {}", meta.layout_version),
        ));
    }
    Ok(meta)
}

/// Reads `field_<step>.f64` and its sidecar.
pub fn read_field_dump(data_path: &Path) -> Result<(WaveField, DumpMeta)> {
    let meta = read_dump_meta(&data_path.with_extension("meta"))?;
    let mut bytes = Vec::new();
    File::open(data_path)?.read_to_end(&mut bytes)?;
    let n = meta.nx * meta.ny;
    if bytes.len() != 2 * n * 8 {
        return Err(bad_file(
            data_path,
            format!("expected {} bytes, found {}", 2 * n * 8, bytes.len()),
        ));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let (re, im) = vals.split_at(n);
    Ok((
        WaveField {
            real: re.to_vec(),
            imag: im.to_vec(),
            real_time_index: meta.step,
        },
        meta,
    ))
}

/// Appends run records to `runlog.csv`, flushing after each line so that a
/// failed run leaves a readable partial log.
pub struct RunLogWriter {
    w: BufWriter<File>,
}

impl RunLogWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{RUNLOG_HEADER}")?;
        w.flush()?;
        Ok(Self { w })
    }

    pub fn append(&mut self, r: &RunRecord) -> Result<()> {
        writeln!(
            self.w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.step,
            r.time_s,
            r.norm,
            r.max_density,
            r.energy_j / EV
        )?;
        self.w.flush()?;
        Ok(())
    }
}

/// Reads `runlog.csv` back; energies are converted from eV to Joules.
pub fn read_run_log(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(RUNLOG_HEADER) {
        return Err(bad_file(path, "missing run log header"));
    }
    lines
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 5 {
                return Err(bad_file(path, format!("bad row `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad_file(path, e));
            Ok(RunRecord {
                step: c[0].parse().map_err(|e| bad_file(path, e))?,
                time_s: num(c[1])?,
                norm: num(c[2])?,
                max_density: num(c[3])?,
                energy_j: num(c[4])? * EV,
            })
        })
        .collect()
}

pub fn format_stability_report(report: &StabilityReport) -> String {
    format!(
        "endpoint_value = {:.6}\nscan_max = {:.6}\nscan_argmax_x = {:.6}\nthreshold_c = {}\nverdict = {}\nmargin = {:.6}\n",
        report.endpoint_value,
        report.scan_max,
        report.scan_argmax_x,
        report.threshold_c,
        report.verdict,
        report.margin
    )
}

pub(crate) fn write_stability_report(
    report: &StabilityReport,
    sc: &Scenario,
    out_dir: &Path,
) -> Result<()> {
    let mut text = format_stability_report(report);
    text.push_str(&format!(
        "N = {}\nstencil_order = {}\nmu = {}\ndt_s = {:e}\n",
        sc.scheme.terms(),
        sc.scheme.order().accuracy(),
        sc.scheme.mu(),
        sc.scheme.dt()
    ));
    std::fs::write(out_dir.join("stability.txt"), text)?;
    Ok(())
}
