use super::{OutputFormat, RowParity, Solver, SweepRow, SweepTable};
use crate::error::{Error, Result};
use crate::geometry::HamiltonianVariant;
use std::path::Path;

pub const CSV_HEADER: &str = "gamma,nu_star,epsilon0,parity,residual,solver,variant,curvature,alpha,beta";

/// 17 significant digits; parses back to the identical `f64`.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn variant_label(v: Option<HamiltonianVariant>) -> &'static str {
    v.map_or("n/a", |v| v.label())
}

fn curvature_label(c: Option<bool>) -> &'static str {
    match c {
        Some(true) => "on",
        Some(false) => "off",
        None => "n/a",
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn to_csv(table: &SweepTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in &table.rows {
        w.write_record([
            real(r.gamma),
            r.nu_star.to_string(),
            real(r.epsilon0),
            r.parity.label().to_string(),
            real(r.residual),
            r.solver.label().to_string(),
            variant_label(r.variant).to_string(),
            curvature_label(r.curvature).to_string(),
            real(r.alpha),
            real(r.beta),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

/// Reads a table written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<SweepTable> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header '{}'", header.join(","))));
    }
    let mut table = SweepTable::default();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = i + 2;
        let bad = |what: &str, v: &str| Error::Parse(format!("line {line}: bad {what} '{v}'"));
        let f = |k: usize, what: &str| rec[k].parse::<f64>().map_err(|_| bad(what, &rec[k]));
        let variant = match &rec[6] {
            "n/a" => None,
            v => Some(HamiltonianVariant::from_label(v).ok_or_else(|| bad("variant", v))?),
        };
        let curvature = match &rec[7] {
            "on" => Some(true),
            "off" => Some(false),
            "n/a" => None,
            v => return Err(bad("curvature", v)),
        };
        table.rows.push(SweepRow {
            gamma: f(0, "gamma")?,
            nu_star: rec[1].parse().map_err(|_| bad("nu_star", &rec[1]))?,
            epsilon0: f(2, "epsilon0")?,
            parity: RowParity::from_label(&rec[3]).ok_or_else(|| bad("parity", &rec[3]))?,
            residual: f(4, "residual")?,
            solver: Solver::from_label(&rec[5]).map_err(|_| bad("solver", &rec[5]))?,
            variant,
            curvature,
            alpha: f(8, "alpha")?,
            beta: f(9, "beta")?,
        });
    }
    Ok(table)
}

/// One whitespace-separated block per curve (`gamma epsilon0 nu_star`),
/// headed by a `#` comment naming the curve, blocks separated by a blank line.
pub fn to_plotdata(table: &SweepTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut keys = Vec::new();
    for r in &table.rows {
        if !keys.contains(&r.curve()) {
            keys.push(r.curve());
        }
    }
    let mut out = String::new();
    for (i, &(solver, variant, curvature)) in keys.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let first = table.rows.iter().find(|r| r.curve() == keys[i]).expect("curve has rows");
        out.push_str(&format!(
            "# solver={} variant={} curvature={} alpha={} beta={}\n# gamma epsilon0 nu_star\n",
            solver.label(),
            variant_label(variant),
            curvature_label(curvature),
            real(first.alpha),
            real(first.beta)
        ));
        for r in table.curve(solver, variant, curvature) {
            out.push_str(&format!("{} {} {}\n", real(r.gamma), real(r.epsilon0), r.nu_star));
        }
    }
    Ok(out)
}

/// Writes `table` to `path` in the requested format.
pub fn emit(table: &SweepTable, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(table)?,
        OutputFormat::Plotdata => to_plotdata(table)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
