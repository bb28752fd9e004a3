//! CSV tables with a `#`-prefixed metadata header.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Optimum sits on the edge of the search window.
    Boundary,
    Failed(String),
}

impl Status {
    fn render(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Boundary => "boundary".into(),
            // Keep the row a single CSV record.
            Status::Failed(msg) => format!("error: {}", msg.replace([',', '\n', '\r'], ";")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// 17 significant digits; `NaN`/`inf` spelled as Rust prints them.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub status: Status,
}

impl Row {
    pub fn ok(values: &[f64]) -> Self {
        Self {
            cells: values.iter().map(|&x| Cell::Num(x)).collect(),
            status: Status::Ok,
        }
    }

    /// Keeps the leading coordinates and fills the rest with NaN.
    pub fn failed(coords: &[f64], width: usize, msg: String) -> Self {
        let mut cells: Vec<Cell> = coords.iter().map(|&x| Cell::Num(x)).collect();
        cells.resize(width, Cell::Num(f64::NAN));
        Self {
            cells,
            status: Status::Failed(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub engine: String,
    pub config_echo: String,
    pub units: Vec<String>,
    /// Column names excluding the trailing `status`.
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# qpump {}", qpump::VERSION).unwrap();
        writeln!(out, "# command: {}", self.command).unwrap();
        writeln!(out, "# engine: {}", self.engine).unwrap();
        writeln!(out, "# config: {}", self.config_echo).unwrap();
        for u in &self.units {
            writeln!(out, "# units: {u}").unwrap();
        }
        writeln!(out, "{},status", self.columns.join(",")).unwrap();
        for row in &self.rows {
            debug_assert_eq!(row.cells.len(), self.columns.len());
            let cells: Vec<String> = row.cells.iter().map(Cell::render).collect();
            writeln!(out, "{},{}", cells.join(","), row.status.render()).unwrap();
        }
        out
    }

    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| matches!(r.status, Status::Failed(_)))
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| matches!(r.status, Status::Failed(_)))
    }

    pub fn any_boundary(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed_width_scientific() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn render_and_flags() {
        let t = Table {
            command: "test",
            engine: "analytic".into(),
            config_echo: "omega=2".into(),
            units: vec!["natural".into()],
            columns: vec!["x", "y"],
            rows: vec![Row::ok(&[1.0, 2.0]), Row::failed(&[3.0], 2, "bad, very\nbad".into())],
        };
        let s = t.render();
        assert!(s.contains("# engine: analytic\n"));
        assert!(s.contains("x,y,status\n"));
        assert!(s.ends_with("3.0000000000000000e0,NaN,error: bad; very;bad\n"));
        assert!(t.any_failed() && !t.all_failed() && !t.any_boundary());
    }
}
