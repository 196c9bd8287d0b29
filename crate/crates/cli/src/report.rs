use freebound::convergence::loglog_slope;
use freebound::study::{phase_orders, LevelResult};
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const HEADER: [&str; 8] = ["level", "nx", "nt", "phase", "niters", "value", "error", "conv"];

/// 17 significant digits, so a CSV round trip is exact.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub level: usize,
    pub nx: usize,
    pub nt: Option<usize>,
    /// 1-based.
    pub phase: usize,
    /// Cumulative over phases 1..=phase.
    pub niters: usize,
    pub value: f64,
    pub error: Option<f64>,
    pub conv: Option<f64>,
}

pub struct Table {
    /// How the error column reads in the printed table.
    pub error_label: &'static str,
    pub rows: Vec<Row>,
    degraded: bool,
}

impl Table {
    pub fn new(error_label: &'static str, levels: &[LevelResult]) -> Self {
        let phases = levels.first().map_or(0, |l| l.phases.len());
        let orders: Vec<Vec<Option<f64>>> = (0..phases).map(|p| phase_orders(levels, p)).collect();
        let mut rows = Vec::new();
        for (i, l) in levels.iter().enumerate() {
            for (p, ph) in l.phases.iter().enumerate() {
                rows.push(Row {
                    level: l.level,
                    nx: l.nx,
                    nt: l.nt,
                    phase: p + 1,
                    niters: l.cumulative_iterations(p),
                    value: ph.value,
                    error: ph.error,
                    conv: orders[p][i],
                });
            }
        }
        Self { error_label, rows, degraded: levels.iter().any(|l| l.degraded) }
    }

    pub fn degraded(&self) -> bool {
        self.degraded
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut out = vec![HEADER.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            out.push(vec![
                r.level.to_string(),
                r.nx.to_string(),
                r.nt.map(|n| n.to_string()).unwrap_or_default(),
                r.phase.to_string(),
                r.niters.to_string(),
                full(r.value),
                opt(r.error),
                opt(r.conv),
            ]);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> csv::Result<()> {
        write_rows(path, &self.csv_rows())
    }

    /// Rounded like the published tables.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{:>5} {:>12} {:>5} {:>7} {:>15} {:>10} {:>6}\n",
            "level", "grid", "phase", "niters", "value", self.error_label, "conv"
        );
        for r in &self.rows {
            let grid = match r.nt {
                Some(nt) => format!("({},{})", r.nx, nt),
                None => r.nx.to_string(),
            };
            let err = r.error.map(|e| format!("{e:.2e}")).unwrap_or_else(|| "-".into());
            let conv = r.conv.map(|c| format!("{c:.2}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:>5} {:>12} {:>5} {:>7} {:>15.9} {:>10} {:>6}", r.level, grid, r.phase, r.niters, r.value, err, conv);
        }
        s
    }
}

pub fn write_rows(path: &Path, rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Flat key-value run record.
pub struct Record {
    map: Map<String, Value>,
    start: Instant,
}

impl Record {
    pub fn new(problem: &str, start: Instant) -> Self {
        let mut map = Map::new();
        map.insert("schema_version".into(), "v1".into());
        map.insert("problem".into(), problem.into());
        Self { map, start }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.map.insert(format!("param.{key}"), v.into());
    }

    pub fn list(&mut self, key: &str, v: &[usize]) {
        self.param(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    }

    pub fn shared(&mut self, phases: usize, tol: f64) {
        self.param("phases", phases);
        self.param("tol", tol);
    }

    pub fn with_table(mut self, table: &Table) -> Self {
        self.map.insert("degraded".into(), table.degraded().into());
        self.map.insert("error_meaning".into(), table.error_label.into());
        self.with_rows(&table.csv_rows())
    }

    /// One `row.<i>.<column>` key per table cell; numbers stay numbers.
    pub fn with_rows(mut self, rows: &[Vec<String>]) -> Self {
        let Some((header, body)) = rows.split_first() else { return self };
        for (i, r) in body.iter().enumerate() {
            for (name, cell) in header.iter().zip(r) {
                let v = match cell.parse::<f64>() {
                    _ if cell.is_empty() => Value::Null,
                    Ok(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
                    Err(_) => Value::String(cell.clone()),
                };
                self.map.insert(format!("row.{i}.{name}"), v);
            }
        }
        self.map.insert("rows".into(), body.len().into());
        self
    }

    pub fn write(mut self, path: &Path) -> std::io::Result<()> {
        self.map.insert("wall_time_s".into(), self.start.elapsed().as_secs_f64().into());
        let text = serde_json::to_string_pretty(&Value::Object(self.map))?;
        std::fs::write(path, text + "\n")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensRow {
    pub level: usize,
    pub n_front: usize,
    pub h: f64,
    pub col_max: f64,
    pub row_max: f64,
}

/// Local slope `log(m_prev / m) / log(h_prev / h)`.
fn local_slopes(rows: &[GreensRow], pick: fn(&GreensRow) -> f64) -> Vec<Option<f64>> {
    let mut out = vec![None];
    out.extend(rows.windows(2).map(|w| Some((pick(&w[0]) / pick(&w[1])).ln() / (w[0].h / w[1].h).ln())));
    out
}

pub fn greens_table(rows: &[GreensRow]) -> Vec<Vec<String>> {
    let col = local_slopes(rows, |r| r.col_max);
    let row = local_slopes(rows, |r| r.row_max);
    let mut out = vec![["level", "n_front", "h", "col_max", "row_max", "slope_col", "slope_row"].map(String::from).to_vec()];
    for (i, r) in rows.iter().enumerate() {
        out.push(vec![
            r.level.to_string(),
            r.n_front.to_string(),
            full(r.h),
            full(r.col_max),
            full(r.row_max),
            opt(col[i]),
            opt(row[i]),
        ]);
    }
    out
}

pub fn render_greens(rows: &[GreensRow]) -> String {
    let mut s = format!("{:>5} {:>8} {:>10} {:>10} {:>10}\n", "level", "n_front", "h", "col_max", "row_max");
    for r in rows {
        let _ = writeln!(s, "{:>5} {:>8} {:>10.4e} {:>10.3e} {:>10.3e}", r.level, r.n_front, r.h, r.col_max, r.row_max);
    }
    if rows.len() >= 2 {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let c: Vec<f64> = rows.iter().map(|r| r.col_max).collect();
        let w: Vec<f64> = rows.iter().map(|r| r.row_max).collect();
        if let (Ok(a), Ok(b)) = (loglog_slope(&h, &c), loglog_slope(&h, &w)) {
            let _ = writeln!(s, "fitted slope: columns {a:.3}, rows {b:.3}");
        }
    }
    s
}
