//! Run configuration: `key = value` files, `--set` overrides and the
//! single-line echo written into every output header.

use std::fmt;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Secular,
    Full,
}

impl FromStr for Engine {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "secular" => Ok(Self::Secular),
            "full" => Ok(Self::Full),
            _ => Err(CliError::Config(format!("unknown engine `{s}` (analytic, secular or full)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Secular => "secular",
            Self::Full => "full",
        })
    }
}

/// Sample points along the swept axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Log { lo: f64, hi: f64, n: usize },
    Lin { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl Grid {
    /// Points in ascending order.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::Log { lo, hi, n } => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        lo * (hi / lo).powf(k as f64 / (n - 1) as f64)
                    }
                })
                .collect(),
            Grid::Lin { lo, hi, n } => (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
                .collect(),
            Grid::List(ref v) => v.clone(),
        }
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Config(format!("grid `{s}`: {why}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected log:a:b:n, lin:a:b:n or list:x,y,..."))?;
        let grid = match kind {
            "log" | "lin" => {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() != 3 {
                    return Err(bad("expected three fields after the kind"));
                }
                let lo = parse_f64("grid", parts[0])?;
                let hi = parse_f64("grid", parts[1])?;
                let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be an integer"))?;
                if n < 2 {
                    return Err(bad("count must be at least 2"));
                }
                if hi <= lo {
                    return Err(bad("upper bound must exceed lower bound"));
                }
                if kind == "log" {
                    if lo <= 0.0 {
                        return Err(bad("log bounds must be positive"));
                    }
                    Grid::Log { lo, hi, n }
                } else {
                    Grid::Lin { lo, hi, n }
                }
            }
            "list" => {
                let v = parse_list("grid", rest)?;
                if v.len() < 2 {
                    return Err(bad("a list needs at least 2 points"));
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("list must be strictly ascending"));
                }
                Grid::List(v)
            }
            _ => return Err(bad("unknown kind")),
        };
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Log { lo, hi, n } => write!(f, "log:{lo}:{hi}:{n}"),
            Grid::Lin { lo, hi, n } => write!(f, "lin:{lo}:{hi}:{n}"),
            Grid::List(v) => write!(f, "list:{}", join(v)),
        }
    }
}

/// Everything a subcommand reads. Unset options fall back to per-command
/// defaults at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub delta: f64,
    pub omega: f64,
    pub temperature: f64,
    pub alpha_x: f64,
    pub alpha_z: f64,
    pub cutoff: f64,
    pub engine: Option<Engine>,
    pub grid: Option<Grid>,
    pub temperatures: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub t_end: f64,
    pub tol: f64,
    pub gamma0_mev: Option<f64>,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            delta: 1.0,
            omega: 2.0,
            temperature: 1.0,
            alpha_x: 1e-3,
            alpha_z: 1e-3,
            cutoff: 50.0,
            engine: None,
            grid: None,
            temperatures: None,
            alphas: None,
            t_end: 400.0,
            tol: 1e-9,
            gamma0_mev: None,
            seed: 0,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: `{v}` is not a number")))?;
    if x.is_nan() {
        return Err(CliError::Config(format!("`{key}` must not be NaN")));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<f64> = v.split(',').map(|s| parse_f64(key, s)).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("`{key}` is empty")));
    }
    Ok(items)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Config {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "delta" => self.delta = parse_f64(key, value)?,
            "omega" => self.omega = parse_f64(key, value)?,
            "temperature" => self.temperature = parse_f64(key, value)?,
            "alpha" => {
                let a = parse_f64(key, value)?;
                self.alpha_x = a;
                self.alpha_z = a;
            }
            "alpha_x" => self.alpha_x = parse_f64(key, value)?,
            "alpha_z" => self.alpha_z = parse_f64(key, value)?,
            "cutoff" => {
                self.cutoff = match value {
                    "inf" | "infinity" => f64::INFINITY,
                    _ => parse_f64(key, value)?,
                }
            }
            "engine" => self.engine = Some(value.parse()?),
            "grid" => self.grid = Some(value.parse()?),
            "temperatures" => self.temperatures = Some(parse_list(key, value)?),
            "alphas" => self.alphas = Some(parse_list(key, value)?),
            "t_end" => self.t_end = parse_f64(key, value)?,
            "tol" => self.tol = parse_f64(key, value)?,
            "gamma0_mev" => self.gamma0_mev = Some(parse_f64(key, value)?),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("`seed`: `{value}` is not a non-negative integer")))?
            }
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// `key=value` form used by `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("`{pair}`: expected key=value")))?;
        self.set(k, v)
    }

    /// Parses a config file: one `key = value` per line, `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Whitespace-separated `key=value` pairs; inverse of [`Config::parse_echo`].
    pub fn echo(&self) -> String {
        let mut out = vec![
            format!("delta={}", self.delta),
            format!("omega={}", self.omega),
            format!("temperature={}", self.temperature),
            format!("alpha_x={}", self.alpha_x),
            format!("alpha_z={}", self.alpha_z),
            format!("cutoff={}", if self.cutoff.is_infinite() { "inf".to_string() } else { self.cutoff.to_string() }),
        ];
        if let Some(e) = self.engine {
            out.push(format!("engine={e}"));
        }
        if let Some(g) = &self.grid {
            out.push(format!("grid={g}"));
        }
        if let Some(t) = &self.temperatures {
            out.push(format!("temperatures={}", join(t)));
        }
        if let Some(a) = &self.alphas {
            out.push(format!("alphas={}", join(a)));
        }
        out.push(format!("t_end={}", self.t_end));
        out.push(format!("tol={}", self.tol));
        if let Some(g) = self.gamma0_mev {
            out.push(format!("gamma0_mev={g}"));
        }
        out.push(format!("seed={}", self.seed));
        out.join(" ")
    }

    pub fn parse_echo(line: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for pair in line.split_whitespace() {
            cfg.set_pair(pair)?;
        }
        Ok(cfg)
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha_x == self.alpha_z
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(CliError::Config(msg.to_string())) };
        check(self.delta > 0.0 && self.delta.is_finite(), "delta must be positive and finite")?;
        check(self.omega.is_finite(), "omega must be finite")?;
        check(self.temperature >= 0.0 && self.temperature.is_finite(), "temperature must be non-negative")?;
        check(self.alpha_x >= 0.0 && self.alpha_z >= 0.0, "couplings must be non-negative")?;
        check(self.cutoff > 0.0, "cutoff must be positive")?;
        check(self.t_end > 0.0 && self.t_end.is_finite(), "t_end must be positive")?;
        check(self.tol > 0.0 && self.tol < 1.0, "tol must lie in (0, 1)")?;
        if let Some(t) = &self.temperatures {
            check(t.iter().all(|&x| x >= 0.0 && x.is_finite()), "temperatures must be non-negative")?;
        }
        if let Some(a) = &self.alphas {
            check(a.iter().all(|&x| x >= 0.0 && x.is_finite()), "alphas must be non-negative")?;
        }
        if let Some(g) = self.gamma0_mev {
            check(g > 0.0 && g.is_finite(), "gamma0_mev must be positive")?;
        }
        if self.engine == Some(Engine::Analytic) && !self.is_symmetric() {
            return Err(CliError::Config(
                "engine=analytic needs a symmetric environment (alpha_x = alpha_z)".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!("log:0.1:100:4".parse::<Grid>().unwrap().points().len(), 4);
        let g: Grid = "lin:0:1:3".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.5, 1.0]);
        let g: Grid = "log:1:100:3".parse().unwrap();
        assert!((g.points()[1] - 10.0).abs() < 1e-13);
        assert_eq!(g.points()[2], 100.0);
        for bad in ["log:0:1:3", "lin:1:0:3", "lin:0:1:1", "list:1", "list:2,1", "cubic:1:2:3", "log:1:2"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn file_and_overrides() {
        let mut c = Config::default();
        c.apply_file("# sweep\nomega = 3\nalpha = 0.002  # both baths\n\nengine = secular\n").unwrap();
        assert_eq!((c.omega, c.alpha_x, c.alpha_z), (3.0, 0.002, 0.002));
        assert_eq!(c.engine, Some(Engine::Secular));
        c.set_pair("cutoff=inf").unwrap();
        assert!(c.cutoff.is_infinite());
        assert!(c.set_pair("nonsense=1").is_err());
        assert!(c.set_pair("omega").is_err());
        assert!(c.set_pair("omega=abc").is_err());
        let err = Config::default().apply_file("omega = 1\nbogus = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn analytic_engine_rejects_asymmetric_couplings() {
        let mut c = Config::default();
        c.set_pair("engine=analytic").unwrap();
        c.set_pair("alpha_x=0.002").unwrap();
        assert!(c.validate().is_err());
        c.set_pair("engine=full").unwrap();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = Config::default();
        for s in [
            "omega=0.30000000000000004",
            "alpha_x=1e-3",
            "alpha_z=0.0005",
            "cutoff=inf",
            "engine=full",
            "grid=list:0.1,0.2,7",
            "temperatures=0.1,0.3",
            "alphas=0,0.005",
            "gamma0_mev=0.05",
            "seed=42",
        ] {
            c.set_pair(s).unwrap();
        }
        assert_eq!(Config::parse_echo(&c.echo()).unwrap(), c);
        assert_eq!(Config::parse_echo(&Config::default().echo()).unwrap(), Config::default());
    }
}
