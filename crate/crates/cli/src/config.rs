//! Experiment configuration files (TOML). See `docs/config.md` for the schema.

use anyhow::{bail, Context};
use mixlog_core::advection::{velocity_library, FlowParams, FlowSpec};
use mixlog_core::diagnostics::DiagnosticsOptions;
use mixlog_core::random::{band_limited_field, rng_from_seed};
use mixlog_core::{Grid, ScalarField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub horizon: f64,
    pub sample_dt: f64,
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub flow: FlowConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub certificates: CertificateConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub name: String,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub velocity: Option<[f64; 2]>,
    pub max_mode: Option<i64>,
    pub target: Option<f64>,
    pub p: Option<f64>,
    pub interval: Option<f64>,
    pub cfl: Option<f64>,
    pub dealias: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub pattern: String,
    pub mode: Option<u32>,
    pub amplitude: Option<f64>,
    pub offset: Option<f64>,
    pub max_mode: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub hs: Vec<f64>,
    pub geometric: bool,
    pub kappa: f64,
    pub dvdt_check: bool,
    pub dvdt_dt: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { hs: Vec::new(), geometric: true, kappa: 0.5, dvdt_check: false, dvdt_dt: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CMode {
    Calibrated,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateConfig {
    pub p: f64,
    pub s: Vec<f64>,
    pub c_mode: CMode,
    pub c: Option<f64>,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig { p: 2.0, s: vec![1.0], c_mode: CMode::Calibrated, c: None }
    }
}

/// 1-based line of the first `key =` assignment, for error messages.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn at(text: &str, key: &str) -> String {
    match line_of(text, key) {
        Some(n) => format!("line {n}: "),
        None => String::new(),
    }
}

impl ExperimentConfig {
    #[cfg(test)]
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Self::parse_with_seed(text, None)
    }

    /// Parse, let `seed` (from `--seed`) override the file's value, then validate.
    pub fn parse_with_seed(text: &str, seed: Option<u64>) -> anyhow::Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let loc = e.span().map(|s| format!("line {}: ", text[..s.start].matches('\n').count() + 1)).unwrap_or_default();
            anyhow::anyhow!("{loc}{}", e.message())
        })?;
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path, seed: Option<u64>) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_with_seed(&text, seed).with_context(|| format!("in {}", path.display()))
    }

    fn validate(&self, text: &str) -> anyhow::Result<()> {
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            bail!("{}horizon must be finite and non-negative", at(text, "horizon"));
        }
        if !(self.sample_dt > 0.0) {
            bail!("{}sample_dt must be positive", at(text, "sample_dt"));
        }
        Grid::torus(self.grid.d, self.grid.n).map_err(|e| anyhow::anyhow!("{}{e}", at(text, "n")))?;
        if let Err(e) = self.flow_spec() {
            bail!("{}{e}", at(text, "name"));
        }
        const PATTERNS: [&str; 4] = ["cosine", "stripes", "checkerboard", "random"];
        if !PATTERNS.contains(&self.initial.pattern.as_str()) {
            bail!("{}unknown initial pattern `{}` (expected one of {})", at(text, "pattern"), self.initial.pattern, PATTERNS.join(", "));
        }
        let randomized = self.initial.pattern == "random" || self.flow.name == "random";
        if randomized && self.seed.is_none() {
            bail!("a randomized flow or initial pattern needs `seed`");
        }
        if let Err(e) = self.initial_field() {
            bail!("{}{e}", at(text, "pattern"));
        }
        let dg = &self.diagnostics;
        if !(dg.kappa > 0.0 && dg.kappa < 1.0) {
            bail!("{}kappa must lie in (0, 1)", at(text, "kappa"));
        }
        if !(dg.dvdt_dt > 0.0) {
            bail!("{}dvdt_dt must be positive", at(text, "dvdt_dt"));
        }
        let c = &self.certificates;
        if !(c.p >= 1.0) {
            bail!("{}certificate exponent p must be at least 1", at(text, "p"));
        }
        if c.s.iter().any(|&s| !(s >= 0.0)) {
            bail!("{}certificate indices s must be non-negative", at(text, "s"));
        }
        match (c.c_mode, c.c) {
            (CMode::Fixed, None) => bail!("{}c_mode = \"fixed\" needs a value `c`", at(text, "c_mode")),
            (CMode::Fixed, Some(v)) if !(v >= 0.0) => bail!("{}c must be non-negative", at(text, "c")),
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::torus(self.grid.d, self.grid.n)?)
    }

    pub fn flow_spec(&self) -> anyhow::Result<FlowSpec> {
        let f = &self.flow;
        let def = FlowParams::default();
        let params = FlowParams {
            amplitude: f.amplitude.unwrap_or(def.amplitude),
            period: f.period.unwrap_or(def.period),
            velocity: f.velocity.unwrap_or(def.velocity),
            max_mode: f.max_mode.unwrap_or(def.max_mode),
            target: f.target.unwrap_or(def.target),
            p: f.p.unwrap_or(def.p),
            interval: f.interval.unwrap_or(def.interval),
            seed: self.seed.unwrap_or(0),
        };
        let mut spec = velocity_library(&f.name, &params)?;
        if let Some(cfl) = f.cfl {
            spec.cfl = cfl;
        }
        if let Some(d) = f.dealias {
            spec.dealias = d;
        }
        Ok(spec)
    }

    pub fn initial_field(&self) -> anyhow::Result<ScalarField> {
        initial_field(&self.initial, self.grid()?, self.seed)
    }

    pub fn diagnostics_options(&self) -> DiagnosticsOptions {
        DiagnosticsOptions {
            hs: self.diagnostics.hs.clone(),
            kappa: self.diagnostics.geometric.then_some(self.diagnostics.kappa),
        }
    }
}

/// Named initial data on the torus. The `random` pattern draws one extra
/// stream from `seed + 1` so it never coincides with a random flow's draws.
pub fn initial_field(cfg: &InitialConfig, grid: Grid, seed: Option<u64>) -> anyhow::Result<ScalarField> {
    let m = cfg.mode.unwrap_or(1) as f64;
    let offset = cfg.offset.unwrap_or(0.0);
    let field = match cfg.pattern.as_str() {
        "cosine" => {
            let a = cfg.amplitude.unwrap_or(2.0);
            ScalarField::from_fn(grid, move |x| offset + a * (2.0 * PI * m * x[0]).cos())
        }
        "stripes" => {
            let a = cfg.amplitude.unwrap_or(1.0);
            ScalarField::from_fn(grid, move |x| offset + if (2.0 * m * x[0]).floor() as i64 % 2 == 0 { a } else { -a })
        }
        "checkerboard" => {
            let a = cfg.amplitude.unwrap_or(1.0);
            let two_d = grid.dim() == 2;
            ScalarField::from_fn(grid, move |x| {
                let mut s = (2.0 * m * x[0]).floor() as i64;
                if two_d {
                    s += (2.0 * m * x[1]).floor() as i64;
                }
                offset + if s % 2 == 0 { a } else { -a }
            })
        }
        "random" => {
            let seed = seed.context("the random pattern needs a seed")?;
            let band = cfg.max_mode.unwrap_or(4);
            if band < 1 || band >= grid.max_mode() {
                bail!("initial max_mode must lie in [1, {})", grid.max_mode());
            }
            let f = band_limited_field(grid, band, true, &mut rng_from_seed(seed.wrapping_add(1)));
            f.scaled(cfg.amplitude.unwrap_or(1.0)).map(|v| v + offset)
        }
        other => bail!("unknown initial pattern `{other}`"),
    };
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "horizon = 0.0\nsample_dt = 0.1\n\n[grid]\nd = 2\nn = 16\n\n[flow]\nname = \"shear\"\n\n[initial]\npattern = \"cosine\"\n";

    #[test]
    fn minimal_parses_with_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.certificates.s, vec![1.0]);
        assert!(c.diagnostics.geometric);
        assert_eq!(c.initial_field().unwrap().max_abs(), 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = MINIMAL.replace("\"shear\"", "\"vortex\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.starts_with("line 9:"), "{e}");
        let bad = MINIMAL.replace("n = 16", "n = 16\nnn = 3");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.starts_with("line 7:"), "{e}");
        let bad = MINIMAL.replace("n = 16", "n = 15");
        assert!(ExperimentConfig::parse(&bad).unwrap_err().to_string().starts_with("line 6:"));
    }

    #[test]
    fn random_needs_seed() {
        let cfg = MINIMAL.replace("\"cosine\"", "\"random\"");
        assert!(ExperimentConfig::parse(&cfg).is_err());
        assert!(ExperimentConfig::parse(&format!("seed = 3\n{cfg}")).is_ok());
    }
}
