use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Bad configuration or flags. The binary exits with status 2 on these.
#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseCover {
    HalfPlanes,
    Tiles(usize),
}

impl std::str::FromStr for BaseCover {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "halfplanes" {
            return Ok(Self::HalfPlanes);
        }
        let k = s
            .strip_prefix("tiles:")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| format!("expected `halfplanes` or `tiles:K` with K >= 1, got `{s}`"))?;
        Ok(Self::Tiles(k))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub map: String,
    pub resolution: usize,
    pub max_iter: usize,
    /// Read the continuum from this file instead of computing it.
    pub input: Option<PathBuf>,
    /// Skeleton pruning length in cell widths.
    pub prune_cells: f64,
    pub scales: usize,
    pub centers: usize,
    pub c_min: f64,
    pub min_radius_cells: f64,
    pub box_min: usize,
    pub box_max: usize,
    pub depth: usize,
    pub base: BaseCover,
    pub epsilon: f64,
    pub samples: usize,
    pub tuples: usize,
    pub patch_cells: usize,
    pub d_min: u32,
    pub d_max: u32,
    pub cheb_samples: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: "poly: i, 0, 1".into(),
            resolution: 1024,
            max_iter: 400,
            input: None,
            prune_cells: 4.0,
            scales: 4,
            centers: 16,
            c_min: 0.01,
            min_radius_cells: 32.0,
            box_min: 16,
            box_max: 1024,
            depth: 5,
            base: BaseCover::Tiles(4),
            epsilon: std::f64::consts::LN_2,
            samples: 64,
            tuples: 2000,
            patch_cells: 10,
            d_min: 2,
            d_max: 8,
            cheb_samples: 1000,
            out: PathBuf::from("out"),
            seed: 0,
            threads: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "map",
    "resolution",
    "max_iter",
    "input",
    "prune_cells",
    "scales",
    "centers",
    "c_min",
    "min_radius_cells",
    "box_min",
    "box_max",
    "depth",
    "base",
    "epsilon",
    "samples",
    "tuples",
    "patch_cells",
    "d_min",
    "d_max",
    "cheb_samples",
    "out",
    "seed",
    "threads",
];

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError(format!("{key} = `{v}`: {e}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "map" => self.map = v.to_string(),
            "resolution" => self.resolution = parse(key, v)?,
            "max_iter" => self.max_iter = parse(key, v)?,
            "input" => self.input = Some(PathBuf::from(v)),
            "prune_cells" => self.prune_cells = parse(key, v)?,
            "scales" => self.scales = parse(key, v)?,
            "centers" => self.centers = parse(key, v)?,
            "c_min" => self.c_min = parse(key, v)?,
            "min_radius_cells" => self.min_radius_cells = parse(key, v)?,
            "box_min" => self.box_min = parse(key, v)?,
            "box_max" => self.box_max = parse(key, v)?,
            "depth" => self.depth = parse(key, v)?,
            "base" => self.base = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "tuples" => self.tuples = parse(key, v)?,
            "patch_cells" => self.patch_cells = parse(key, v)?,
            "d_min" => self.d_min = parse(key, v)?,
            "d_max" => self.d_max = parse(key, v)?,
            "cheb_samples" => self.cheb_samples = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = parse(key, v)?,
            "threads" => self.threads = Some(parse(key, v)?),
            _ => return Err(ConfigError(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Defaults, then the config file, then flag overrides.
    pub fn build(file: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_kv(&text)? {
                c.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        if let Err(e) = cxcdim::dynamics::PolynomialMap::parse(&self.map) {
            return err(format!("map: {e}"));
        }
        if self.resolution < 16 || !self.resolution.is_power_of_two() {
            return err(format!("resolution must be a power of two >= 16, got {}", self.resolution));
        }
        if self.max_iter == 0 {
            return err("max_iter must be positive".into());
        }
        for (name, v) in [("prune_cells", self.prune_cells), ("epsilon", self.epsilon), ("min_radius_cells", self.min_radius_cells)] {
            if !(v.is_finite() && v > 0.0) {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.c_min > 0.0 && self.c_min < 1.0) {
            return err(format!("c_min must lie in (0, 1), got {}", self.c_min));
        }
        if self.scales < 2 || self.centers == 0 {
            return err("antenna scan needs scales >= 2 and centers >= 1".into());
        }
        if self.box_min == 0 || self.box_max < self.box_min {
            return err("need 1 <= box_min <= box_max".into());
        }
        if self.samples < 3 || self.tuples == 0 || self.patch_cells == 0 || self.cheb_samples == 0 {
            return err("samples >= 3, tuples, patch_cells and cheb_samples >= 1 required".into());
        }
        if self.d_min == 0 || self.d_max < self.d_min || self.d_max > cxcdim::chebyshev::COEFFICIENT_DEGREE_CAP {
            return err(format!(
                "need 1 <= d_min <= d_max <= {}, got {}..{}",
                cxcdim::chebyshev::COEFFICIENT_DEGREE_CAP,
                self.d_min,
                self.d_max
            ));
        }
        if self.threads == Some(0) {
            return err("threads must be positive".into());
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment. Later lines win.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`, got `{raw}`", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError(format!("line {}: unknown key `{k}`", n + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# run\nresolution = 256\nseed=3\nmap = poly: 0, 0, 1 # circle\n").unwrap();
        let c = RunConfig::build(Some(&path), &[("seed", "7".into())]).unwrap();
        assert_eq!(c.resolution, 256);
        assert_eq!(c.seed, 7);
        assert_eq!(c.map, "poly: 0, 0, 1");
    }

    #[test]
    fn rejects_bad_values() {
        for (k, v) in [("resolution", "0"), ("resolution", "1000"), ("c_min", "1.5"), ("epsilon", "-1"), ("base", "tiles:0"), ("d_max", "40")] {
            assert!(RunConfig::build(None, &[(k, v.into())]).is_err(), "{k}={v}");
        }
        assert!(parse_kv("colour = red").is_err());
        assert!(parse_kv("resolution 256").is_err());
    }

    #[test]
    fn base_cover_syntax() {
        assert_eq!("halfplanes".parse::<BaseCover>(), Ok(BaseCover::HalfPlanes));
        assert_eq!("tiles:3".parse::<BaseCover>(), Ok(BaseCover::Tiles(3)));
        assert!("tiles".parse::<BaseCover>().is_err());
    }
}
