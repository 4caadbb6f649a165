//! Run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use slitres_core::{Backend, CrossMode, DirectOptions, Method, QuadratureConfig, SlitArray};

use crate::CliError;

/// Width-to-thickness ratio above which a warning is logged.
pub const WIDTH_WARN_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A single JSON document describing the geometry and solver settings.
/// Lengths are physical; the solver works in units of `slab_thickness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "one")]
    pub slab_thickness: f64,
    pub slit_width: f64,
    #[serde(default = "origin")]
    pub slit_centers: Vec<f64>,
    #[serde(default = "forty")]
    pub truncation_modes: usize,
    pub fp_range: [usize; 2],
    #[serde(default = "asym3")]
    pub method: Method,
    #[serde(default = "quadrature")]
    pub kernel_backend: Backend,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default = "full")]
    pub cross_mode: CrossMode,
    #[serde(default = "one")]
    pub rouche_scale: f64,
}

fn one() -> f64 {
    1.0
}
fn origin() -> Vec<f64> {
    vec![0.0]
}
fn forty() -> usize {
    40
}
fn asym3() -> Method {
    Method::Asym3
}
fn quadrature() -> Backend {
    Backend::Quadrature
}
fn full() -> CrossMode {
    CrossMode::Full
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Reject malformed input; log a warning for wide slits.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.slab_thickness > 0.0 && self.slab_thickness.is_finite()) {
            return bad(format!("slab_thickness must be positive, got {}", self.slab_thickness));
        }
        if !(self.slit_width > 0.0 && self.slit_width.is_finite()) {
            return bad(format!("slit_width must be positive, got {}", self.slit_width));
        }
        if self.slit_centers.is_empty() {
            return bad("slit_centers is empty".into());
        }
        for (i, a) in self.slit_centers.iter().enumerate() {
            if self.slit_centers[i + 1..].contains(a) {
                return bad(format!("duplicate slit center {a}"));
            }
        }
        let [lo, hi] = self.fp_range;
        if lo < 1 || hi < lo {
            return bad(format!("fp_range [{lo}, {hi}] is empty or starts below 1"));
        }
        if self.truncation_modes < 4 {
            return bad("truncation_modes must be at least 4".into());
        }
        if !(self.rouche_scale > 0.0) {
            return bad("rouche_scale must be positive".into());
        }
        self.quadrature
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let ratio = self.slit_width / self.slab_thickness;
        if ratio > WIDTH_WARN_RATIO {
            log::warn!("slit_width/slab_thickness = {ratio} exceeds {WIDTH_WARN_RATIO}");
        }
        self.geometry()?;
        Ok(())
    }

    /// Geometry in units of the slab thickness.
    pub fn geometry(&self) -> Result<SlitArray, CliError> {
        self.geometry_with_width(self.slit_width)
    }

    pub fn geometry_with_width(&self, width: f64) -> Result<SlitArray, CliError> {
        let l = self.slab_thickness;
        let centers = self.slit_centers.iter().map(|d| d / l).collect();
        SlitArray::new(width / l, centers).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn direct_options(&self) -> DirectOptions {
        DirectOptions {
            m_modes: self.truncation_modes,
            backend: self.kernel_backend,
            cross_mode: self.cross_mode,
            quadrature: self.quadrature,
            rouche_scale: self.rouche_scale,
            ..DirectOptions::default()
        }
    }
}
