//! Experiment configuration: one TOML document per experiment. Unknown keys
//! are hard errors; a summary always embeds the resolved config so any run
//! can be reproduced from its own report.

use crate::error::{HarnessError, Result};
use lagns_core::model::{ModelParams, PressureLaw, ViscosityLaw};
use lagns_core::solver::{Scheme, SolverConfig, Variant};
use lagns_core::{DyadicFilterBank, SpectralField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    pub grid: GridBlock,
    pub solver: SolverBlock,
    pub data: DataBlock,
    pub experiment: ExperimentBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    /// "affine" or "gamma".
    pub pressure: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Target Mach parameter at the reference state.
    #[serde(default = "one")]
    pub ma: f64,
    #[serde(default = "one")]
    pub eta_bar: f64,
    /// "constant-lagrangian" or "constant-eulerian".
    pub viscosity: String,
    #[serde(default = "one")]
    pub nu_bar: f64,
    /// Geometric sweep for the viscous-limit experiment.
    #[serde(default)]
    pub nu_bar_sweep: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    /// Domain length in units of pi.
    pub length_over_pi: f64,
    /// Dyadic index range; widest admissible range when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_min: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<i32>,
    #[serde(default)]
    pub j0: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    /// "modes", "bump" or "spectral-bump".
    pub kind: String,
    pub epsilon: f64,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    /// Bump center as a fraction of the domain.
    #[serde(default = "half")]
    pub center_frac: f64,
    #[serde(default = "one")]
    pub width: f64,
    /// Spectral-bump profile |xi|^exponent exp(-(xi/xi_cut)^2).
    #[serde(default = "one")]
    pub xi_cut: f64,
    #[serde(default = "half")]
    pub exponent: f64,
    #[serde(default = "one")]
    pub amp_a: f64,
    #[serde(default)]
    pub amp_v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: usize,
    #[serde(default)]
    pub amp_a: f64,
    #[serde(default)]
    pub amp_v: f64,
    #[serde(default)]
    pub phase_a: f64,
    #[serde(default)]
    pub phase_v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    /// linear-check | simulate | decay | visco-limit | stability | picard | besov
    pub kind: String,
    #[serde(default)]
    pub fit_t_min: f64,
    #[serde(default)]
    pub fit_t_max: f64,
    /// Extra low-frequency regularity entering the viscous-limit rate.
    #[serde(default = "one")]
    pub sigma: f64,
    /// Smallness threshold factor c in the global-existence condition.
    #[serde(default = "one")]
    pub smallness_c: f64,
    /// Stability experiment: perturbation mode and amplitude.
    #[serde(default = "default_perturb_k")]
    pub perturb_k: usize,
    #[serde(default)]
    pub perturb_eps: f64,
    #[serde(default = "default_picard_iters")]
    pub picard_iters: usize,
    /// Lyapunov monitor parameter.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn one_usize() -> usize {
    1
}
fn default_gamma() -> f64 {
    1.4
}
fn default_scheme() -> String {
    "etd2".into()
}
fn default_perturb_k() -> usize {
    3
}
fn default_picard_iters() -> usize {
    6
}
fn default_kappa() -> f64 {
    0.15
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.grid.n.is_power_of_two() {
            return Err(HarnessError::Config(format!(
                "grid.n = {} is not a power of two",
                self.grid.n
            )));
        }
        if self.data.epsilon <= 0.0 {
            return Err(HarnessError::Config("data.epsilon must be positive".into()));
        }
        if !matches!(self.model.pressure.as_str(), "affine" | "gamma") {
            return Err(HarnessError::Config(format!(
                "unknown pressure law '{}'",
                self.model.pressure
            )));
        }
        if !matches!(
            self.model.viscosity.as_str(),
            "constant-lagrangian" | "constant-eulerian"
        ) {
            return Err(HarnessError::Config(format!(
                "unknown viscosity law '{}'",
                self.model.viscosity
            )));
        }
        if !matches!(self.solver.scheme.as_str(), "etd1" | "etd2") {
            return Err(HarnessError::Config(format!(
                "unknown scheme '{}'",
                self.solver.scheme
            )));
        }
        if !matches!(self.data.kind.as_str(), "modes" | "bump" | "spectral-bump") {
            return Err(HarnessError::Config(format!(
                "unknown datum recipe '{}'",
                self.data.kind
            )));
        }
        let kinds = [
            "linear-check",
            "simulate",
            "decay",
            "visco-limit",
            "stability",
            "picard",
            "besov",
        ];
        if !kinds.contains(&self.experiment.kind.as_str()) {
            return Err(HarnessError::Config(format!(
                "unknown experiment kind '{}'",
                self.experiment.kind
            )));
        }
        if self.experiment.fit_t_max > 0.0
            && !(0.0 <= self.experiment.fit_t_min
                && self.experiment.fit_t_min < self.experiment.fit_t_max
                && self.experiment.fit_t_max <= self.solver.t_end + 1e-12)
        {
            return Err(HarnessError::Config(
                "fit window must satisfy 0 <= t_min < t_max <= t_end".into(),
            ));
        }
        Ok(())
    }

    pub fn domain_length(&self) -> f64 {
        self.grid.length_over_pi * PI
    }

    pub fn model_params(&self, nu_bar: f64) -> Result<ModelParams> {
        let eta_bar = self.model.eta_bar;
        let pressure = match self.model.pressure.as_str() {
            "affine" => PressureLaw::Affine { slope: 1.0 / (self.model.ma * self.model.ma) },
            "gamma" => PressureLaw::gamma_with_ma(self.model.gamma, eta_bar, self.model.ma),
            other => return Err(HarnessError::Config(format!("unknown pressure law '{other}'"))),
        };
        let viscosity = match self.model.viscosity.as_str() {
            "constant-lagrangian" => ViscosityLaw::ConstantLagrangian { nu: nu_bar },
            "constant-eulerian" => ViscosityLaw::ConstantEulerian { mu_bar: nu_bar * eta_bar },
            other => return Err(HarnessError::Config(format!("unknown viscosity law '{other}'"))),
        };
        Ok(ModelParams::normalize(pressure, viscosity, eta_bar)?)
    }

    pub fn bank(&self) -> Result<DyadicFilterBank> {
        let n = self.grid.n;
        let length = self.domain_length();
        let (lo, hi) = DyadicFilterBank::suggest_range(n, length);
        let j_min = self.grid.j_min.unwrap_or(lo);
        let j_max = self.grid.j_max.unwrap_or(hi);
        Ok(DyadicFilterBank::build(n, length, j_min, j_max)?)
    }

    pub fn solver_config(&self, variant: Variant) -> Result<SolverConfig> {
        let scheme = match self.solver.scheme.as_str() {
            "etd1" => Scheme::Etd1,
            "etd2" => Scheme::Etd2,
            other => return Err(HarnessError::Config(format!("unknown scheme '{other}'"))),
        };
        let cfg = SolverConfig {
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            scheme,
            dealias: self.solver.dealias,
            snapshot_stride: self.solver.snapshot_stride,
            variant,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Deterministic initial datum `(a0, v0)` on the configured grid.
    pub fn datum(&self) -> Result<(SpectralField, SpectralField)> {
        let n = self.grid.n;
        let length = self.domain_length();
        let eps = self.data.epsilon;
        match self.data.kind.as_str() {
            "modes" => {
                if self.data.modes.is_empty() {
                    return Err(HarnessError::Config("mode recipe needs at least one mode".into()));
                }
                let modes = self.data.modes.clone();
                let a = SpectralField::from_fn(n, length, |y| {
                    eps * modes
                        .iter()
                        .map(|m| {
                            m.amp_a * (2.0 * PI * m.k as f64 * y / length + m.phase_a).sin()
                        })
                        .sum::<f64>()
                });
                let v = SpectralField::from_fn(n, length, |y| {
                    eps * modes
                        .iter()
                        .map(|m| {
                            m.amp_v * (2.0 * PI * m.k as f64 * y / length + m.phase_v).cos()
                        })
                        .sum::<f64>()
                });
                Ok((a, v))
            }
            "bump" => {
                let c = self.data.center_frac * length;
                let w = self.data.width;
                let (aa, av) = (self.data.amp_a, self.data.amp_v);
                let bump = move |y: f64| {
                    // periodic distance to the center
                    let mut d = (y - c).abs();
                    if d > length / 2.0 {
                        d = length - d;
                    }
                    (-(d / w).powi(2)).exp()
                };
                let raw_a = SpectralField::from_fn(n, length, |y| eps * aa * bump(y));
                let raw_v = SpectralField::from_fn(n, length, |y| eps * av * bump(y));
                let mean_a = raw_a.mean();
                Ok((raw_a.map_samples(move |x| x - mean_a), raw_v))
            }
            "spectral-bump" => {
                // |xi|^q exp(-(xi/xi_c)^2) amplitude profile with coherent
                // phases: broadband data with a prescribed low-frequency
                // slope, normalized afterwards to peak amplitude eps * amp
                let probe = SpectralField::zero(n, length);
                let q = self.data.exponent;
                let xi_c = self.data.xi_cut;
                let mut coeffs = vec![num_complex::Complex64::new(0.0, 0.0); n];
                let cut = n as i64 / 3;
                for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
                    if probe.signed_index(k).abs() > cut {
                        continue;
                    }
                    let xi = probe.xi(k).abs();
                    let profile = xi.powf(q) * (-(xi / xi_c).powi(2)).exp();
                    *c = num_complex::Complex64::new(0.5 * profile, 0.0);
                }
                let raw = SpectralField::from_coeffs(length, coeffs);
                let peak = raw.max_abs();
                let normalized = |amp: f64| {
                    if amp == 0.0 || peak == 0.0 {
                        SpectralField::zero(n, length)
                    } else {
                        raw.scale(eps * amp / peak)
                    }
                };
                Ok((normalized(self.data.amp_a), normalized(self.data.amp_v)))
            }
            other => Err(HarnessError::Config(format!("unknown datum recipe '{other}'"))),
        }
    }

    /// Fixed perturbation direction for the stability experiment.
    pub fn perturbation(&self) -> (SpectralField, SpectralField) {
        let n = self.grid.n;
        let length = self.domain_length();
        let k = self.experiment.perturb_k as f64;
        let da = SpectralField::from_fn(n, length, |y| (2.0 * PI * k * y / length).sin());
        let dv = SpectralField::from_fn(n, length, |y| (2.0 * PI * k * y / length).cos());
        (da, dv)
    }
}
