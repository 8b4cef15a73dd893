//! On-disk formats: CSV tables for plottable data, JSON for structured
//! results, JSON Lines for per-run records.
//!
//! Floating-point values round-trip losslessly through every format here
//! (shortest-representation encoding on write, exact parse on read).

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimize::HopRecord;
use crate::tomography::MeasurementRecord;
use crate::walk::{CoinSchedule, Spin, WalkState};

/// One (site, spin) amplitude of a stored state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub site: i32,
    pub spin: Spin,
    pub re: f64,
    pub im: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct DensityRow {
    step: usize,
    lambda: usize,
    site: i32,
    spin: Spin,
    density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct LambdaDensityRow {
    lambda: usize,
    site: i32,
    spin: Spin,
    density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct SchmidtRow {
    step: usize,
    schmidt_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct MeasurementRow {
    site: i32,
    i_l: f64,
    i_r: f64,
    i_d: f64,
    i_c: f64,
}

/// Writes every (site, spin) amplitude of `state`, one row per basis
/// state in λ order, with columns site, spin, re, im, density.
pub fn write_state_csv<P: AsRef<Path>>(path: P, state: &WalkState) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for site in state.sites() {
        for spin in Spin::ALL {
            let amp = state.amplitude(site, spin);
            writer.serialize(StateRow {
                site,
                spin,
                re: amp.re,
                im: amp.im,
                density: amp.norm_sqr(),
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a state written by [`write_state_csv`].
///
/// Rows may be sparse (missing basis states are zero); the lattice
/// half-width is the largest |site| present. The density column is
/// derived data and is ignored. The amplitudes must form a normalized
/// state.
pub fn read_state_csv<P: AsRef<Path>>(path: P) -> Result<WalkState> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut entries = Vec::new();
    for row in reader.deserialize() {
        let row: StateRow = row?;
        entries.push((row.site, row.spin, Complex64::new(row.re, row.im)));
    }
    if entries.is_empty() {
        return Err(Error::MalformedFile("state file has no amplitude rows".into()));
    }
    let half_width = entries
        .iter()
        .map(|(site, _, _)| site.unsigned_abs() as usize)
        .max()
        .expect("entries is non-empty");
    WalkState::from_site_amplitudes(half_width, &entries)
}

/// Writes step-resolved densities with columns step, lambda, site, spin,
/// density. `rows[s]` holds the λ-ordered densities after step s and
/// must have 2·(2·half_width + 1) entries.
pub fn write_density_table_csv<P: AsRef<Path>>(
    path: P,
    half_width: usize,
    rows: &[Vec<f64>],
) -> Result<()> {
    let dim = 2 * (2 * half_width + 1);
    let mut writer = csv::Writer::from_path(path)?;
    for (step, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "density row {step} has {} entries, lattice needs {dim}",
                row.len()
            )));
        }
        for (lambda, &density) in row.iter().enumerate() {
            writer.serialize(DensityRow {
                step,
                lambda,
                site: (lambda / 2) as i32 - half_width as i32,
                spin: if lambda % 2 == 0 { Spin::L } else { Spin::R },
                density,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes one λ-ordered density row with columns lambda, site, spin,
/// density.
pub fn write_lambda_density_csv<P: AsRef<Path>>(
    path: P,
    half_width: usize,
    densities: &[f64],
) -> Result<()> {
    let dim = 2 * (2 * half_width + 1);
    if densities.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "density row has {} entries, lattice needs {dim}",
            densities.len()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    for (lambda, &density) in densities.iter().enumerate() {
        writer.serialize(LambdaDensityRow {
            lambda,
            site: (lambda / 2) as i32 - half_width as i32,
            spin: if lambda % 2 == 0 { Spin::L } else { Spin::R },
            density,
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes per-step Schmidt norms with columns step, schmidt_norm.
pub fn write_schmidt_csv<P: AsRef<Path>>(path: P, per_step: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for (step, &schmidt_norm) in per_step.iter().enumerate() {
        writer.serialize(SchmidtRow { step, schmidt_norm })?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a basin-hopping trace with columns hop, proposed_cost,
/// accepted, best_so_far.
pub fn write_hop_trace_csv<P: AsRef<Path>>(path: P, trace: &[HopRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for record in trace {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes measured intensities with columns site, i_l, i_r, i_d, i_c.
pub fn write_measurements_csv<P: AsRef<Path>>(
    path: P,
    record: &MeasurementRecord,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let h = record.half_width as i32;
    for (m, site) in (-h..=h).enumerate() {
        writer.serialize(MeasurementRow {
            site,
            i_l: record.i_l[m],
            i_r: record.i_r[m],
            i_d: record.i_d[m],
            i_c: record.i_c[m],
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a coin schedule as a JSON array of {xi, zeta, theta} objects.
pub fn write_schedule_json<P: AsRef<Path>>(path: P, schedule: &CoinSchedule) -> Result<()> {
    write_json(path, schedule)
}

/// Reads a coin schedule written by [`write_schedule_json`].
pub fn read_schedule_json<P: AsRef<Path>>(path: P) -> Result<CoinSchedule> {
    read_json(path)
}

/// Pretty-prints any serializable value to a JSON file.
pub fn write_json<T: Serialize, P: AsRef<Path>>(path: P, value: &T) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned, P: AsRef<Path>>(path: P) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes one compact JSON document per line.
pub fn write_jsonl<T: Serialize, P: AsRef<Path>>(path: P, items: &[T]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, P: AsRef<Path>>(path: P) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut items = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line)?);
    }
    Ok(items)
}
