//! Diagnostics time series as CSV.
//!
//! Fixed columns come first, then one `M_<s>` column per moment order and
//! one `Lp_<p>` column per exponent, in record order. Floats use the
//! shortest representation that parses back to the same bits; a missing
//! entropy production is an empty field.

use std::io::{Read, Write};
use std::path::Path;

use landau_core::DiagnosticsRecord;

use crate::error::{CliError, CliResult};

pub const FIXED_COLUMNS: [&str; 14] = [
    "t",
    "mass",
    "momentum_x",
    "momentum_y",
    "momentum_z",
    "energy",
    "entropy",
    "entropy_production",
    "weighted_q",
    "interaction",
    "j_gamma",
    "coercivity",
    "clipped_mass",
    "tail_mass",
];

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn header(records: &[DiagnosticsRecord]) -> Vec<String> {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(r) = records.first() {
        cols.extend(r.moments.iter().map(|(s, _)| format!("M_{s}")));
        cols.extend(r.lp_norms.iter().map(|(p, _)| format!("Lp_{p}")));
    }
    cols
}

fn row(r: &DiagnosticsRecord) -> Vec<String> {
    let mut out: Vec<String> = [r.t, r.mass, r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.entropy]
        .iter()
        .map(|&x| format_f64(x))
        .collect();
    out.push(r.entropy_production.map_or_else(String::new, format_f64));
    out.extend(
        [r.weighted_q, r.interaction, r.j_gamma, r.coercivity, r.clipped_mass, r.tail_mass]
            .iter()
            .map(|&x| format_f64(x)),
    );
    out.extend(r.moments.iter().map(|&(_, m)| format_f64(m)));
    out.extend(r.lp_norms.iter().map(|&(_, m)| format_f64(m)));
    out
}

pub fn write_series_to<W: Write>(records: &[DiagnosticsRecord], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header(records))?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(records: &[DiagnosticsRecord], path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_series_to(records, std::io::BufWriter::new(file)).map_err(|e| CliError::format(path, e.to_string()))
}

fn parse_f64(field: &str) -> Result<f64, String> {
    field.parse::<f64>().map_err(|e| format!("'{field}': {e}"))
}

pub fn read_series_from<R: Read>(source: R) -> Result<Vec<DiagnosticsRecord>, String> {
    let mut rd = csv::Reader::from_reader(source);
    let head: Vec<String> = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if head.len() < FIXED_COLUMNS.len() || head[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err("unexpected header".into());
    }
    let mut moment_orders = Vec::new();
    let mut lp_exponents = Vec::new();
    for col in &head[FIXED_COLUMNS.len()..] {
        if let Some(s) = col.strip_prefix("M_") {
            moment_orders.push(parse_f64(s)?);
        } else if let Some(p) = col.strip_prefix("Lp_") {
            lp_exponents.push(parse_f64(p)?);
        } else {
            return Err(format!("unknown column '{col}'"));
        }
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let v = |i: usize| parse_f64(&rec[i]);
        let base = FIXED_COLUMNS.len();
        out.push(DiagnosticsRecord {
            t: v(0)?,
            mass: v(1)?,
            momentum: [v(2)?, v(3)?, v(4)?],
            energy: v(5)?,
            entropy: v(6)?,
            entropy_production: if rec[7].is_empty() { None } else { Some(v(7)?) },
            weighted_q: v(8)?,
            interaction: v(9)?,
            j_gamma: v(10)?,
            coercivity: v(11)?,
            clipped_mass: v(12)?,
            tail_mass: v(13)?,
            moments: moment_orders
                .iter()
                .enumerate()
                .map(|(k, &s)| Ok((s, v(base + k)?)))
                .collect::<Result<_, String>>()?,
            lp_norms: lp_exponents
                .iter()
                .enumerate()
                .map(|(k, &p)| Ok((p, v(base + moment_orders.len() + k)?)))
                .collect::<Result<_, String>>()?,
        });
    }
    Ok(out)
}

pub fn read_series(path: &Path) -> CliResult<Vec<DiagnosticsRecord>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_series_from(std::io::BufReader::new(file)).map_err(|e| CliError::format(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_round_trips() {
        for x in [0.0, -0.0, 1.0, -2.5e-3, 1e-4, 9.99e-5, 3.3e-17, 1e15, 6.02e23, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(0.25), "0.25");
        assert_eq!(format_f64(3.3e-17), "3.3e-17");
        assert_eq!(format_f64(2e15), "2e15");
    }
}
