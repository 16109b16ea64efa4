//! CSV artifacts. Every file has a header row, `,` separators and LF line
//! endings; primary states are labelled 1..N in column names.

use nalgebra::DMatrix;

use crate::analysis::{ComparisonReport, SweepTable};
use crate::automaton::PrimaryTimeSeries;
use crate::ensemble::{MarginalSeries, Method};
use crate::error::{Error, Result};
use crate::quantum::{CycleSpectrum, Generator};
use crate::synthesis::SynthesisReport;

/// Shortest round-trip decimal, switching to exponent form for very large
/// or very small magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<I: IntoIterator<Item = String>>(header: I) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header.into_iter().collect::<Vec<_>>())?;
        Ok(Table { writer })
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.writer.write_record(fields.into_iter().collect::<Vec<_>>())?;
        Ok(())
    }

    fn finish(self) -> Result<String> {
        let bytes = self.writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

fn labels(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

pub fn trajectory_csv(series: &PrimaryTimeSeries) -> Result<String> {
    let mut t = Table::new(["t".to_string(), "primary".to_string()])?;
    for (k, &p) in series.values.iter().enumerate() {
        t.row([(series.t0 + k as u64).to_string(), (p + 1).to_string()])?;
    }
    t.finish()
}

/// `t,<label>_1..N[,stderr_1..N]`.
pub fn marginals_csv(series: &MarginalSeries, label: &str) -> Result<String> {
    let n = series.dim();
    let header = std::iter::once("t".to_string())
        .chain(labels(label, n))
        .chain(series.stderr.iter().flat_map(|_| labels("stderr", n)));
    let mut t = Table::new(header)?;
    for (k, &time) in series.times.iter().enumerate() {
        let se = series.stderr.as_ref().map(|s| &s[k]);
        t.row(
            std::iter::once(time.to_string())
                .chain(series.probs[k].iter().map(|&p| fmt_f64(p)))
                .chain(se.into_iter().flatten().map(|&s| fmt_f64(s))),
        )?;
    }
    t.finish()
}

fn records(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn parse_field<T: std::str::FromStr>(row: usize, col: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Schema {
        field: format!("row {row}, column {col}"),
        message: format!("cannot parse `{s}`"),
    })
}

/// Reads a file written by [`marginals_csv`]. Probability columns are the
/// ones prefixed `P_`; `stderr_` columns are optional.
pub fn read_marginals_csv(text: &str) -> Result<MarginalSeries> {
    let (header, rows) = records(text)?;
    if header.first().map(String::as_str) != Some("t") {
        return Err(Error::Schema { field: "t".into(), message: "first column must be `t`".into() });
    }
    let p_cols: Vec<usize> = (1..header.len()).filter(|&c| header[c].starts_with("P_")).collect();
    let se_cols: Vec<usize> = (1..header.len()).filter(|&c| header[c].starts_with("stderr_")).collect();
    if p_cols.is_empty() {
        return Err(Error::Schema { field: "P_*".into(), message: "no probability columns".into() });
    }
    let quantum = header[p_cols[0]].starts_with("P_quantum") || header[p_cols[0]].starts_with("P_q_");
    let mut times = Vec::with_capacity(rows.len());
    let mut probs = Vec::with_capacity(rows.len());
    let mut stderr = Vec::with_capacity(rows.len());
    for (r, rec) in rows.iter().enumerate() {
        times.push(parse_field::<u64>(r + 1, "t", &rec[0])?);
        probs.push(p_cols.iter().map(|&c| parse_field(r + 1, &header[c], &rec[c])).collect::<Result<Vec<f64>>>()?);
        stderr.push(se_cols.iter().map(|&c| parse_field(r + 1, &header[c], &rec[c])).collect::<Result<Vec<f64>>>()?);
    }
    let has_se = !se_cols.is_empty();
    let method = match (quantum, has_se) {
        (true, _) => Method::Quantum,
        (false, true) => Method::MonteCarlo,
        (false, false) => Method::Exact,
    };
    Ok(MarginalSeries { times, probs, stderr: has_se.then_some(stderr), method, sample_count: None })
}

pub fn comparison_csv(report: &ComparisonReport) -> Result<String> {
    let n = report.classical.dim();
    let header = ["t".to_string(), "tv".to_string()].into_iter().chain(labels("P_c", n)).chain(labels("P_q", n));
    let mut t = Table::new(header)?;
    for (k, &time) in report.times.iter().enumerate() {
        t.row(
            [time.to_string(), fmt_f64(report.tv[k])]
                .into_iter()
                .chain(report.classical.probs[k].iter().map(|&p| fmt_f64(p)))
                .chain(report.quantum.probs[k].iter().map(|&p| fmt_f64(p))),
        )?;
    }
    t.finish()
}

fn join_periods(periods: &[u64]) -> String {
    periods.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

/// Runtime is left out so reruns are byte-identical.
pub fn sweep_csv(table: &SweepTable) -> Result<String> {
    let mut t = Table::new(["lambda", "L_list", "max_entry_err", "max_tv", "method"].map(String::from))?;
    for row in &table.rows {
        t.row([
            row.lambda.to_string(),
            join_periods(&row.periods),
            fmt_f64(row.max_entry_err),
            fmt_f64(row.max_tv),
            row.method.as_str().to_string(),
        ])?;
    }
    t.finish()
}

pub fn synthesis_csv(report: &SynthesisReport) -> Result<String> {
    let mut t = Table::new(["pair", "target", "achieved", "error", "bound", "n", "L_i", "L_j"].map(String::from))?;
    for p in &report.pairs {
        t.row([
            format!("{}-{}", p.pair.0 + 1, p.pair.1 + 1),
            fmt_f64(p.target),
            fmt_f64(p.achieved),
            fmt_f64(p.error),
            fmt_f64(p.bound),
            p.count.to_string(),
            p.periods.0.to_string(),
            p.periods.1.to_string(),
        ])?;
    }
    t.finish()
}

/// Row-major dense matrix with header `col_1..col_N`.
pub fn matrix_csv(m: &DMatrix<f64>) -> Result<String> {
    let mut t = Table::new(labels("col", m.ncols()))?;
    for r in 0..m.nrows() {
        t.row((0..m.ncols()).map(|c| fmt_f64(m[(r, c)])))?;
    }
    t.finish()
}

pub fn generator_csv(g: &Generator) -> Result<String> {
    matrix_csv(&g.to_matrix())
}

/// Reads a numeric matrix. The first line is treated as a header unless
/// every field in it is numeric.
pub fn read_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if r == 0 => continue,
            Err(_) => {
                return Err(Error::Schema {
                    field: format!("row {}", r + 1),
                    message: "non-numeric matrix entry".into(),
                })
            }
        }
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { expected: ncols, found: bad.len() });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn spectrum_csv(spectrum: &CycleSpectrum) -> Result<String> {
    let mut t = Table::new(["cycle_id", "T_r", "n", "E"].map(String::from))?;
    for (r, n, e) in spectrum.levels() {
        t.row([(r + 1).to_string(), spectrum.cycles[r].period.to_string(), n.to_string(), fmt_f64(e)])?;
    }
    t.finish()
}
