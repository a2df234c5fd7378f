//! CSV readers and writers for particles, snapshots, and metrics.
//!
//! Floating-point columns are written with 17 significant digits
//! (`{:.16e}`), which round-trips every f64 bit pattern through text.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::diagnostics::MetricsRecord;
use crate::error::{Error, Result};
use crate::particles::ParticleSet;
use crate::solvers::Snapshot;

fn coordinate_header(dim: usize) -> String {
    (0..dim)
        .map(|c| format!("x{c}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes one ensemble as `x0,...,x{d-1}` rows.
pub fn write_particles(path: &Path, particles: &ParticleSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", coordinate_header(particles.dim()))?;
    for row in particles.positions().rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a particles file with a header but no rows (an empty sample).
pub fn write_empty_particles(path: &Path, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dim must be at least 1"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", coordinate_header(dim))?;
    w.flush()?;
    Ok(())
}

/// Reads an ensemble written by [`write_particles`] (any standard float
/// formatting is accepted). The header must be `x0,x1,...` in order.
pub fn read_particles(path: &Path) -> Result<ParticleSet> {
    let reader = BufReader::new(
        File::open(path)
            .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?,
    );
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let names: Vec<&str> = header.trim_end().split(',').collect();
    let dim = names.len();
    for (c, name) in names.iter().enumerate() {
        let expected = format!("x{c}");
        if name.trim() != expected {
            return Err(Error::Parse(format!(
                "{}: header column {} is {name:?}, expected {expected:?}",
                path.display(),
                c + 1
            )));
        }
    }

    let mut data: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim {
            return Err(Error::Parse(format!(
                "{}: row {} has {} fields, expected {dim}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        for (c, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{}: row {}, column x{c}: invalid float {field:?}",
                    path.display(),
                    idx + 1
                ))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse(format!(
            "{}: no particle rows",
            path.display()
        )));
    }
    let array = Array2::from_shape_vec((rows, dim), data)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    ParticleSet::new(array)
}

/// Writes recorded snapshots as `iter,particle_id,x0,...,x{d-1}` rows.
pub fn write_snapshots(path: &Path, snapshots: &[Snapshot]) -> Result<()> {
    let dim = snapshots
        .first()
        .map(|s| s.particles.dim())
        .ok_or_else(|| Error::invalid("no snapshots to write"))?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iter,particle_id,{}", coordinate_header(dim))?;
    for snapshot in snapshots {
        for (id, row) in snapshot
            .particles
            .positions()
            .rows()
            .into_iter()
            .enumerate()
        {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{},{},{}", snapshot.iter, id, fields.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes per-iteration metrics as `iter,energy,grad_norm,mmd2,wall_time_s`
/// rows. Runs without a reference sample leave the mmd2 field empty.
pub fn write_metrics(path: &Path, metrics: &[MetricsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iter,energy,grad_norm,mmd2,wall_time_s")?;
    for m in metrics {
        let mmd = match m.mmd2 {
            Some(v) => format!("{v:.16e}"),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{:.6}",
            m.iter, m.energy, m.grad_norm, mmd, m.wall_time_s
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Formats a value with 6 significant digits for terminal output
/// (e.g. 1.370370... prints as "1.37037", zero prints as "0.000000").
pub fn format_six_significant(v: f64) -> String {
    if v == 0.0 {
        return "0.000000".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let precision = (5 - magnitude).max(0) as usize;
    format!("{v:.precision$}")
}
