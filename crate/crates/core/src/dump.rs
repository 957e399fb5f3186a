//! Plain-text CSV dump of one trial: configuration, channels, supports and observations.
//!
//! Layout, one record per line:
//!
//! ```text
//! ris-est-dump,1
//! config,<key>,<value>                  one line per SystemConfig field
//! noise_variance,<σ²>
//! row_support,<m>,<m>,...
//! column_support,<user>,<k>,<n>,<n>,... one line per user and support row
//! matrix,<name>,<index>,<rows>,<cols>   followed by <rows> lines of re,im pairs
//! end
//! ```
//!
//! Matrices appear in this order: `h_bs_ris`, then per user `h_ris_user` (1 × N),
//! `cascaded`, `angular`, `raw` (M × T) and `observations` (T × M), then `schedule`
//! (N × T) and `sensing` (T × N). Floats are written in shortest round-trip form, so
//! reading a dump reproduces every value exactly.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::channel::{ChannelRealization, SystemConfig};
use crate::error::{Error, Result};
use crate::harness::TrialData;
use crate::measurement::{MeasurementSet, RisSchedule};
use crate::numerics::ComplexMatrix;

const MAGIC: &str = "ris-est-dump,1";

fn write_matrix<W: Write>(w: &mut W, name: &str, index: usize, m: &ComplexMatrix) -> Result<()> {
    writeln!(w, "matrix,{name},{index},{},{}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes `cfg` and `data` in the dump layout.
pub fn write_dump<W: Write>(w: &mut W, cfg: &SystemConfig, data: &TrialData) -> Result<()> {
    let r = &data.realization;
    writeln!(w, "{MAGIC}")?;
    for (k, v) in cfg.entries() {
        writeln!(w, "config,{k},{v}")?;
    }
    writeln!(w, "noise_variance,{}", data.measurement.noise_variance)?;
    if r.row_support.is_empty() {
        writeln!(w, "row_support")?;
    } else {
        writeln!(w, "row_support,{}", join(&r.row_support))?;
    }
    for (j, rows) in r.column_supports.iter().enumerate() {
        for (k, cols) in rows.iter().enumerate() {
            let tail = if cols.is_empty() { String::new() } else { format!(",{}", join(cols)) };
            writeln!(w, "column_support,{j},{k}{tail}")?;
        }
    }
    write_matrix(w, "h_bs_ris", 0, &r.h_bs_ris)?;
    for j in 0..r.users() {
        write_matrix(w, "h_ris_user", j, &ComplexMatrix::new(1, r.h_ris_user[j].len(), r.h_ris_user[j].clone())?)?;
        write_matrix(w, "cascaded", j, &r.cascaded[j])?;
        write_matrix(w, "angular", j, &r.angular[j])?;
        write_matrix(w, "raw", j, &data.raw[j])?;
        write_matrix(w, "observations", j, &data.measurement.observations[j])?;
    }
    write_matrix(w, "schedule", 0, &data.schedule.phases)?;
    write_matrix(w, "sensing", 0, &data.measurement.sensing)?;
    writeln!(w, "end")?;
    Ok(())
}

struct Lines<R> {
    inner: R,
    number: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<&str>> {
        self.buf.clear();
        if self.inner.read_line(&mut self.buf)? == 0 {
            return Ok(None);
        }
        self.number += 1;
        Ok(Some(self.buf.trim_end_matches(['\n', '\r'])))
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Dump {
            line: self.number,
            reason: reason.into(),
        }
    }
}

fn parse_usizes(fields: &[&str], line: usize) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse().map_err(|_| Error::Dump {
                line,
                reason: format!("expected an index, got `{f}`"),
            })
        })
        .collect()
}

/// Reads a dump produced by [`write_dump`].
pub fn read_dump<R: BufRead>(reader: R) -> Result<(SystemConfig, TrialData)> {
    let mut lines = Lines {
        inner: reader,
        number: 0,
        buf: String::new(),
    };
    match lines.next()? {
        Some(MAGIC) => {}
        _ => return Err(lines.err("missing dump header")),
    }
    let mut cfg = SystemConfig::default();
    let mut noise_variance = None;
    let mut row_support = Vec::new();
    let mut column_supports: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut matrices: Vec<(String, usize, ComplexMatrix)> = Vec::new();
    loop {
        let line = match lines.next()? {
            Some(l) => l.to_string(),
            None => return Err(lines.err("unexpected end of file")),
        };
        let fields: Vec<&str> = line.split(',').collect();
        let here = lines.number;
        match fields[0] {
            "end" => break,
            "config" if fields.len() == 3 => {
                let known = cfg.set(fields[1], fields[2]).map_err(|e| lines.err(e.to_string()))?;
                if !known {
                    return Err(lines.err(format!("unknown config key `{}`", fields[1])));
                }
            }
            "noise_variance" if fields.len() == 2 => {
                noise_variance = Some(fields[1].parse::<f64>().map_err(|_| lines.err("bad noise variance"))?);
            }
            "row_support" => row_support = parse_usizes(&fields[1..], here)?,
            "column_support" if fields.len() >= 3 => {
                let head = parse_usizes(&fields[1..3], here)?;
                let (j, k) = (head[0], head[1]);
                if j != column_supports.len().saturating_sub(1) && j != column_supports.len() {
                    return Err(lines.err("column supports out of order"));
                }
                if j == column_supports.len() {
                    column_supports.push(Vec::new());
                }
                if k != column_supports[j].len() {
                    return Err(lines.err("column supports out of order"));
                }
                column_supports[j].push(parse_usizes(&fields[3..], here)?);
            }
            "matrix" if fields.len() == 5 => {
                let dims = parse_usizes(&fields[2..5], here)?;
                let (name, index, rows, cols) = (fields[1].to_string(), dims[0], dims[1], dims[2]);
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    let Some(row) = lines.next()? else {
                        return Err(lines.err("matrix truncated"));
                    };
                    let nums: Vec<f64> = if row.is_empty() {
                        Vec::new()
                    } else {
                        row.split(',')
                            .map(|f| f.parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| lines.err("bad number in matrix row"))?
                    };
                    if nums.len() != 2 * cols {
                        return Err(lines.err(format!("expected {} numbers, got {}", 2 * cols, nums.len())));
                    }
                    data.extend(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])));
                }
                let m = ComplexMatrix::new(rows, cols, data).map_err(|e| lines.err(e.to_string()))?;
                matrices.push((name, index, m));
            }
            other => return Err(lines.err(format!("unrecognized record `{other}`"))),
        }
    }

    let missing = |what: &str| Error::Dump {
        line: lines.number,
        reason: format!("missing {what}"),
    };
    let mut take_all = |name: &str| -> Vec<ComplexMatrix> {
        let mut picked: Vec<(usize, ComplexMatrix)> = Vec::new();
        matrices.retain(|(n, i, m)| {
            if n == name {
                picked.push((*i, m.clone()));
                false
            } else {
                true
            }
        });
        picked.sort_by_key(|p| p.0);
        picked.into_iter().map(|p| p.1).collect()
    };
    let one = |mut v: Vec<ComplexMatrix>, what: &str| v.pop().filter(|_| v.is_empty()).ok_or_else(|| missing(what));
    let h_bs_ris = one(take_all("h_bs_ris"), "h_bs_ris")?;
    let h_ris_user: Vec<_> = take_all("h_ris_user").into_iter().map(|m| m.into_vec()).collect();
    let cascaded = take_all("cascaded");
    let angular = take_all("angular");
    let raw = take_all("raw");
    let observations = take_all("observations");
    let schedule = one(take_all("schedule"), "schedule")?;
    let sensing = one(take_all("sensing"), "sensing")?;
    let users = cfg.users;
    for (what, len) in [
        ("h_ris_user", h_ris_user.len()),
        ("cascaded", cascaded.len()),
        ("angular", angular.len()),
        ("raw", raw.len()),
        ("observations", observations.len()),
        ("column_support", column_supports.len()),
    ] {
        if len != users {
            return Err(missing(&format!("{what} for all {users} users (found {len})")));
        }
    }
    let data = TrialData {
        realization: ChannelRealization {
            h_bs_ris,
            h_ris_user,
            cascaded,
            angular,
            row_support,
            column_supports,
        },
        schedule: RisSchedule { phases: schedule },
        raw,
        measurement: MeasurementSet {
            observations,
            sensing,
            noise_variance: noise_variance.ok_or_else(|| missing("noise_variance"))?,
        },
    };
    Ok((cfg, data))
}
