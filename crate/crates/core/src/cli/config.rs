//! Run configuration: flags merged over an optional `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

/// Parameter keys, named after their long flags.
pub const PARAM_KEYS: &[&str] = &[
    "h11", "h12", "h22", "rm-alpha", "rm-beta", "alpha", "beta", "gamma", "lambda", "g", "a", "b",
    "c", "omega", "k",
];

/// Every key accepted in a config file.
pub const ALL_KEYS: &[&str] = &[
    "h11",
    "h12",
    "h22",
    "rm-alpha",
    "rm-beta",
    "alpha",
    "beta",
    "gamma",
    "lambda",
    "g",
    "a",
    "b",
    "c",
    "omega",
    "k",
    "levels",
    "truncation",
    "tol",
    "format",
    "out",
    "family",
    "param",
    "start",
    "stop",
    "step",
    "level",
    "points",
    "half-width",
];

pub const DEFAULT_LEVELS: usize = 10;
pub const DEFAULT_TRUNCATION: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Scan,
    Verify,
    Wavefunction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Scan => "scan",
            Command::Verify => "verify",
            Command::Wavefunction => "wavefunction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRange {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ScanRange {
    /// `start + i step` for `i = 0 ..= floor((stop - start)/step)`, with a
    /// little slack so the end point survives rounding.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Raw parameter values keyed as in [`PARAM_KEYS`].
    pub params: BTreeMap<String, String>,
    pub family: Option<String>,
    pub levels: usize,
    pub truncation: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub scan: Option<ScanRange>,
    /// State index for `wavefunction`.
    pub level: usize,
    pub points: usize,
    pub half_width: Option<f64>,
}

impl RunConfig {
    /// Merges file entries with flag values (flags win) and validates.
    pub fn resolve(
        command: Command,
        file: Option<&Path>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut raw = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read config {}: {e}", p.display())))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        raw.extend(flags);
        Self::from_map(command, raw)
    }

    pub fn from_map(
        command: Command,
        mut raw: BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        for k in raw.keys() {
            if !ALL_KEYS.contains(&k.as_str()) {
                return err(format!("unknown key '{k}'"));
            }
        }
        let take = |raw: &mut BTreeMap<String, String>, k: &str| raw.remove(k);
        let levels = match take(&mut raw, "levels") {
            Some(v) => parse_usize("levels", &v)?,
            None => DEFAULT_LEVELS,
        };
        let truncation = match take(&mut raw, "truncation") {
            Some(v) => parse_usize("truncation", &v)?,
            None => DEFAULT_TRUNCATION.max(4 * levels),
        };
        let tol = match take(&mut raw, "tol") {
            Some(v) => parse_real("tol", &v)?,
            None => DEFAULT_TOL,
        };
        let format = match take(&mut raw, "format").as_deref() {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(other) => return err(format!("format must be json or csv, got '{other}'")),
        };
        let out = take(&mut raw, "out").map(PathBuf::from);
        let family = take(&mut raw, "family");
        let level = match take(&mut raw, "level") {
            Some(v) => parse_usize("level", &v)?,
            None => 0,
        };
        let points = match take(&mut raw, "points") {
            Some(v) => parse_usize("points", &v)?,
            None => crate::wavefun::DEFAULT_POINTS,
        };
        let half_width = take(&mut raw, "half-width")
            .map(|v| parse_real("half-width", &v))
            .transpose()?;

        let scan_keys = ["param", "start", "stop", "step"].map(|k| take(&mut raw, k));
        let scan = match (command, scan_keys) {
            (Command::Scan, [Some(param), Some(start), Some(stop), Some(step)]) => {
                Some(ScanRange {
                    param,
                    start: parse_real("start", &start)?,
                    stop: parse_real("stop", &stop)?,
                    step: parse_real("step", &step)?,
                })
            }
            (Command::Scan, _) => return err("scan needs --param, --start, --stop and --step"),
            (_, keys) if keys.iter().any(Option::is_some) => {
                return err("--param/--start/--stop/--step only apply to scan")
            }
            _ => None,
        };

        let cfg = Self {
            command,
            params: raw,
            family,
            levels,
            truncation,
            tol,
            format,
            out,
            scan,
            level,
            points,
            half_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return err(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.command != Command::Wavefunction {
            if self.levels == 0 {
                return err("level count must be >= 1");
            }
            if self.truncation < 4 * self.levels {
                return err(format!(
                    "truncation N = {} must be at least 4 * levels = {}",
                    self.truncation,
                    4 * self.levels
                ));
            }
        }
        if self.points < 2 {
            return err("wavefunction grid needs at least 2 points");
        }
        if let Some(h) = self.half_width {
            if !(h > 0.0) {
                return err(format!("half-width must be positive, got {h}"));
            }
        }
        if let Some(s) = &self.scan {
            if !PARAM_KEYS.contains(&s.param.as_str()) {
                return err(format!("cannot scan unknown parameter '{}'", s.param));
            }
            if self.params.contains_key(&s.param) {
                return err(format!("'{}' is both scanned and fixed", s.param));
            }
            if !(s.step > 0.0) || !s.step.is_finite() || !(s.stop >= s.start) {
                return err("scan range needs start <= stop and a positive step");
            }
            if s.values().len() > 1_000_000 {
                return err("scan range has more than 10^6 points");
            }
        }
        for (k, v) in &self.params {
            parse_complex(v).map_err(|e| ConfigError(format!("{k}: {e}")))?;
        }
        Ok(())
    }

    /// The parameter as a complex number.
    pub fn complex(&self, key: &str) -> Result<Option<Complex64>, ConfigError> {
        self.params
            .get(key)
            .map(|v| parse_complex(v).map_err(|e| ConfigError(format!("{key}: {e}"))))
            .transpose()
    }

    /// The parameter as a real number; a nonzero imaginary part is an error.
    pub fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.complex(key)? {
            None => Ok(None),
            Some(z) if z.im == 0.0 => Ok(Some(z.re)),
            Some(z) => err(format!("{key} must be real, got {z}")),
        }
    }

    /// Echo of every resolved setting, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("command".to_string(), self.command.name().to_string())];
        if let Some(f) = &self.family {
            out.push(("family".into(), f.clone()));
        }
        out.extend(self.params.iter().map(|(k, v)| (k.clone(), v.clone())));
        out.push(("levels".into(), self.levels.to_string()));
        out.push(("truncation".into(), self.truncation.to_string()));
        out.push(("tol".into(), format!("{:e}", self.tol)));
        if let Some(s) = &self.scan {
            out.push(("param".into(), s.param.clone()));
            out.push(("start".into(), s.start.to_string()));
            out.push(("stop".into(), s.stop.to_string()));
            out.push(("step".into(), s.step.to_string()));
        }
        if self.command == Command::Wavefunction {
            out.push(("level".into(), self.level.to_string()));
            out.push(("points".into(), self.points.to_string()));
            if let Some(h) = self.half_width {
                out.push(("half-width".into(), h.to_string()));
            }
        }
        out
    }
}

/// `key = value` lines; `#` starts a comment. Keys may use `_` for `-`.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return err(format!("config line {}: expected key = value", i + 1));
        };
        let key = k.trim().replace('_', "-");
        let key = match key.as_str() {
            "n" => "levels".to_string(),
            "N" => "truncation".to_string(),
            _ => key,
        };
        let value = v.trim().trim_matches('"').to_string();
        if value.is_empty() {
            return err(format!("config line {}: empty value for '{key}'", i + 1));
        }
        map.insert(key, value);
    }
    Ok(map)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key} must be a non-negative integer, got '{v}'")))
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key} must be a finite number, got '{v}'")),
    }
}

/// Accepts `1.5`, `2i`, `-i`, `0.3+0.2i`, `1e-3-4e-2j`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("'{text}' is not a number");
    if s.is_empty() {
        return Err(bad());
    }
    let finite = |z: Complex64| {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(z)
        } else {
            Err(bad())
        }
    };
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s
            .parse::<f64>()
            .map(|x| Complex64::new(x, 0.0))
            .map_err(|_| bad())
            .and_then(finite);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("", body),
    };
    let re = if re.is_empty() {
        0.0
    } else {
        re.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    finite(Complex64::new(re, im))
}
