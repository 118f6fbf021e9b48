//! Run configuration: command-line flags merged over config-file
//! defaults, validated with messages that name the offending field
//! before any computation starts.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spherelag::error::{Error, Result};
use spherelag::mesh::MeshFormat;
use spherelag::profile::FoliatedSpec;

/// Keys a config file may set; anything else is rejected by name.
const KNOWN_KEYS: &[&str] = &[
    "seed", "tol", "out", "preset", "param", "n", "C", "s", "x", "alpha0", "r0", "smax", "E",
    "table", "portrait", "levels", "s-steps", "sphere-steps", "format", "points", "count",
];

/// Line-oriented key=value defaults; repeated keys accumulate (only
/// `param` and `levels` consume more than the last value).
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: HashMap<String, Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        let mut entries: HashMap<String, Vec<String>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}: line {}: expected key=value, got {line:?}",
                    path.display(),
                    i + 1
                )));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "{}: line {}: unknown config key {key:?}",
                    path.display(),
                    i + 1
                )));
            }
            entries.entry(key.to_string()).or_default().push(value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn parse_field<T: FromStr>(raw: &str, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| Error::Config(format!("field {field}: cannot parse {raw:?}: {e}")))
}

/// CLI value if present, else the config-file value, else None.
fn merge<T: FromStr>(cli: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if cli.is_some() {
        return Ok(cli);
    }
    file.last(key).map(|raw| parse_field(raw, key)).transpose()
}

/// Comma-separated float list ("1,0,0").
pub fn parse_f64_list(raw: &str, field: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|tok| parse_field(tok.trim(), field)).collect()
}

/// "min:max:steps" energy sweep.
#[derive(Clone, Copy, Debug)]
pub struct EnergyTable {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl EnergyTable {
    pub fn parse(raw: &str) -> Result<Self> {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "field table: expected min:max:steps, got {raw:?}"
            )));
        }
        let lo = parse_field(parts[0], "table")?;
        let hi = parse_field(parts[1], "table")?;
        let steps: usize = parse_field(parts[2], "table")?;
        if steps == 0 {
            return Err(Error::Config("field table: steps must be >= 1".into()));
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn energies(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Every CLI-settable parameter after merging, with defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub params: Vec<(String, f64)>,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub s: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub alpha0: Option<f64>,
    pub r0: Option<f64>,
    pub smax: f64,
    pub e: Option<f64>,
    pub table: Option<EnergyTable>,
    pub portrait: bool,
    pub levels: Vec<f64>,
    pub s_steps: usize,
    pub sphere_steps: usize,
    pub format: MeshFormat,
    pub points: Option<usize>,
    pub count: usize,
}

/// Raw option values as parsed from the command line, before the
/// config file fills gaps.
#[derive(Debug, Default)]
pub struct RawOptions {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub params: Vec<String>,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub s: Option<f64>,
    pub x: Option<String>,
    pub alpha0: Option<f64>,
    pub r0: Option<f64>,
    pub smax: Option<f64>,
    pub e: Option<f64>,
    pub table: Option<String>,
    pub portrait: bool,
    pub levels: Option<String>,
    pub s_steps: Option<usize>,
    pub sphere_steps: Option<usize>,
    pub format: Option<String>,
    pub points: Option<usize>,
    pub count: Option<usize>,
}

impl RunConfig {
    pub fn assemble(raw: RawOptions, file: &FileConfig) -> Result<Self> {
        let param_raw: Vec<String> = if raw.params.is_empty() {
            file.all("param").to_vec()
        } else {
            raw.params
        };
        let mut params = Vec::with_capacity(param_raw.len());
        for entry in &param_raw {
            let Some((k, v)) = entry.split_once('=') else {
                return Err(Error::Config(format!(
                    "field param: expected key=value, got {entry:?}"
                )));
            };
            params.push((k.trim().to_string(), parse_field(v.trim(), "param")?));
        }

        let levels = match merge(raw.levels, file, "levels")? {
            Some(csv) => parse_f64_list(&csv, "levels")?,
            None => Vec::new(),
        };
        let x = merge(raw.x, file, "x")?.map(|csv| parse_f64_list(&csv, "x")).transpose()?;
        let table =
            merge(raw.table, file, "table")?.map(|t| EnergyTable::parse(&t)).transpose()?;
        let format = match merge(raw.format, file, "format")? {
            Some(name) => name.parse()?,
            None => MeshFormat::PlyAscii,
        };
        let out = match raw.out {
            Some(p) => Some(p),
            None => file.last("out").map(PathBuf::from),
        };

        let cfg = Self {
            seed: merge(raw.seed, file, "seed")?.unwrap_or(17),
            tol: merge(raw.tol, file, "tol")?.unwrap_or(1e-12),
            out,
            preset: merge(raw.preset, file, "preset")?,
            params,
            n: merge(raw.n, file, "n")?,
            c: merge(raw.c, file, "C")?,
            s: merge(raw.s, file, "s")?,
            x,
            alpha0: merge(raw.alpha0, file, "alpha0")?,
            r0: merge(raw.r0, file, "r0")?,
            smax: merge(raw.smax, file, "smax")?.unwrap_or(50.0),
            e: merge(raw.e, file, "E")?,
            table,
            portrait: raw.portrait || file.last("portrait") == Some("true"),
            levels,
            s_steps: merge(raw.s_steps, file, "s-steps")?.unwrap_or(24),
            sphere_steps: merge(raw.sphere_steps, file, "sphere-steps")?.unwrap_or(16),
            format,
            points: merge(raw.points, file, "points")?,
            count: merge(raw.count, file, "count")?.unwrap_or(12),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if n < 3 {
                return Err(Error::DimensionTooSmall(n));
            }
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("field tol: must be positive, got {}", self.tol)));
        }
        if !(self.smax > 0.0 && self.smax.is_finite()) {
            return Err(Error::Config(format!(
                "field smax: must be positive, got {}",
                self.smax
            )));
        }
        if self.s_steps == 0 {
            return Err(Error::Config("field s-steps: must be >= 1".into()));
        }
        if self.sphere_steps < 3 {
            return Err(Error::Config(format!(
                "field sphere-steps: must be >= 3, got {}",
                self.sphere_steps
            )));
        }
        if self.count == 0 {
            return Err(Error::Config("field count: must be >= 1".into()));
        }
        if self.points == Some(0) {
            return Err(Error::Config("field points: must be >= 1".into()));
        }
        if let Some(c) = self.c {
            if !c.is_finite() {
                return Err(Error::BadFlux(c));
            }
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn reject_stray_params(&self, allowed: &[&str], preset: &str) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "field param: preset {preset} does not take {k:?} (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Builds the preset immersion spec named by the configuration.
    pub fn build_spec(&self) -> Result<FoliatedSpec> {
        let preset = self
            .preset
            .as_deref()
            .ok_or_else(|| Error::Config("missing required field preset".into()))?;
        let need_n = || {
            self.n.ok_or_else(|| Error::Config("missing required field n for this preset".into()))
        };
        match preset {
            "standard_circle" => {
                self.reject_stray_params(&[], preset)?;
                FoliatedSpec::standard_circle(need_n()?)
            }
            "centered_circle" => {
                self.reject_stray_params(&["rho"], preset)?;
                FoliatedSpec::centered_circle(need_n()?, self.param("rho").unwrap_or(1.0))
            }
            "line" => {
                self.reject_stray_params(&["phi0", "w"], preset)?;
                FoliatedSpec::line(
                    need_n()?,
                    self.param("phi0").unwrap_or(0.0),
                    self.param("w").unwrap_or(0.0),
                )
            }
            "epicycloid" => {
                self.reject_stray_params(&["rho", "b"], preset)?;
                FoliatedSpec::epicycloid(
                    need_n()?,
                    self.param("rho").unwrap_or(1.0),
                    self.param("b").unwrap_or(0.5),
                )
            }
            "catenoid3" => {
                self.reject_stray_params(&["C_geo"], preset)?;
                if let Some(n) = self.n {
                    if n != 3 {
                        return Err(Error::Config(format!(
                            "field n: preset catenoid3 is three-dimensional, got n = {n}"
                        )));
                    }
                }
                FoliatedSpec::catenoid3(self.param("C_geo").unwrap_or(1.0))
            }
            other => Err(Error::Config(format!(
                "field preset: unknown preset {other:?} (use standard_circle, \
                 centered_circle, line, epicycloid, or catenoid3)"
            ))),
        }
    }
}
