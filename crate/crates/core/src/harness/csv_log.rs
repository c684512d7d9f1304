//! CSV log format.
//!
//! One header row, then one row per control step. Columns follow the
//! [`LogRow`] field order with vectors expanded as `name_0 .. name_5` and the
//! torque vector as `tau_0 .. tau_{n-1}`. The phase column holds the phase
//! number 1-4. Floats are written with 17 significant digits so every value
//! round-trips exactly.

use std::path::Path;

use super::sim::{LogRow, SimLog};
use crate::scenario::StandUpPhase;
use crate::{Error, Result, Vec6};

const VECTOR_COLUMNS: [&str; 6] = ["x", "x_d", "xdot", "xdot_d", "f_hands", "f_feet"];

pub fn header(n_tau: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "phase".into(), "psi".into(), "psi_dot".into()];
    for name in VECTOR_COLUMNS {
        h.extend((0..6).map(|i| format!("{name}_{i}")));
    }
    h.push("alpha".into());
    h.extend((0..n_tau).map(|i| format!("tau_{i}")));
    h
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn record(row: &LogRow) -> Vec<String> {
    let mut r = Vec::with_capacity(4 + 36 + 1 + row.tau.len());
    r.push(fmt(row.t));
    r.push(row.phase.index().to_string());
    r.push(fmt(row.psi));
    r.push(fmt(row.psi_dot));
    for v in [
        &row.x,
        &row.x_d,
        &row.xdot,
        &row.xdot_d,
        &row.f_hands,
        &row.f_feet,
    ] {
        r.extend(v.iter().map(|&x| fmt(x)));
    }
    r.push(fmt(row.alpha));
    r.extend(row.tau.iter().map(|&x| fmt(x)));
    r
}

pub fn write_csv_to<W: std::io::Write>(log: &SimLog, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(log.n_tau))?;
    for row in &log.rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(log: &SimLog, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(log, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<SimLog> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));

    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let head: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let fixed = header(0).len();
    if head.len() < fixed {
        return Err(bad(format!("expected at least {fixed} columns")));
    }
    let n_tau = head.len() - fixed;
    if head != header(n_tau) {
        return Err(bad("header does not match the log layout".into()));
    }

    let mut log = SimLog::new(n_tau);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: column {}: {e}", line + 1, head[i])))
        };
        let vec6 = |start: usize| -> Result<Vec6> {
            let mut v = Vec6::zeros();
            for i in 0..6 {
                v[i] = num(start + i)?;
            }
            Ok(v)
        };
        let phase = rec[1]
            .parse::<u8>()
            .ok()
            .and_then(StandUpPhase::from_index)
            .ok_or_else(|| bad(format!("row {}: bad phase `{}`", line + 1, &rec[1])))?;
        let tau = (0..n_tau).map(|i| num(fixed + i)).collect::<Result<Vec<_>>>()?;
        log.rows.push(LogRow {
            t: num(0)?,
            phase,
            psi: num(2)?,
            psi_dot: num(3)?,
            x: vec6(4)?,
            x_d: vec6(10)?,
            xdot: vec6(16)?,
            xdot_d: vec6(22)?,
            f_hands: vec6(28)?,
            f_feet: vec6(34)?,
            alpha: num(40)?,
            tau,
        });
    }
    Ok(log)
}
