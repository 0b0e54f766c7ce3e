//! Report files: a `# key=value` header, the config echo, then CSV.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.9g`.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV report.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    header: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// A CSV cell.
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => g9(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Report {
    pub fn new(name: &str, command: &str, cfg: &RunConfig, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: vec![
                ("oppspec_version".into(), VERSION.into()),
                ("command".into(), command.into()),
                ("seed".into(), cfg.seed.to_string()),
            ],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
        .with_config(cfg)
    }

    fn with_config(mut self, cfg: &RunConfig) -> Self {
        for line in cfg.to_toml().lines() {
            self.header.push(("config".into(), line.to_string()));
        }
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.header.push((key.to_string(), value.into().render()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(cells.iter().map(Cell::render).collect());
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            if k == "config" {
                s.push_str("# config: ");
                s.push_str(v);
            } else {
                s.push_str(&format!("# {k}={v}"));
            }
            s.push('\n');
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Config echo embedded in a rendered report.
pub fn config_echo(rendered: &str) -> String {
    rendered
        .lines()
        .filter_map(|l| l.strip_prefix("# config: "))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(g9(0.0), "0");
        assert_eq!(g9(1.0), "1");
        assert_eq!(g9(100e6), "100000000");
        assert_eq!(g9(1e9), "1e+09");
        assert_eq!(g9(1.0 / 3.0), "0.333333333");
        assert_eq!(g9(2.0 / 3.0 * 1e-5), "6.66666667e-06");
        assert_eq!(g9(0.0001234), "0.0001234");
        assert_eq!(g9(-123456789.4), "-123456789");
        assert_eq!(g9(999999999.7), "1e+09");
        assert_eq!(g9(63.264917478736), "63.2649175");
        assert_eq!(g9(f64::NAN), "nan");
    }

    #[test]
    fn render_and_echo() {
        let cfg = RunConfig::default();
        let mut r = Report::new("x", "optimize", &cfg, &["a", "b"]);
        r.meta("t_opt_s", 0.5);
        r.row(vec![1.0.into(), "z".into()]);
        let text = r.render();
        assert!(text.starts_with("# oppspec_version="));
        assert!(text.contains("# t_opt_s=0.5\n"));
        assert!(text.ends_with("a,b\n1,z\n"));
        let echo = config_echo(&text);
        assert_eq!(RunConfig::from_toml(&echo).unwrap(), cfg);
    }
}
