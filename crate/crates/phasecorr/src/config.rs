//! Run configuration: a versioned TOML document. Unknown keys are rejected.
//!
//! Modes are numbered from 1 in the file and from 0 everywhere else.

use std::path::Path;

use phasecorr_core::bose_hubbard::{ModelParams, Propagator};
use phasecorr_core::multitime::{CorrelationSpec, Ladder, OperatorFactor};
use phasecorr_core::rng::NoiseKind;
use phasecorr_core::sde::StepConfig;
use phasecorr_core::{SOrder, C64};
use serde::{Deserialize, Serialize};

use crate::error::AppError;
use crate::runner::ModelVariant;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub correlations: Option<CorrelationSection>,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub modes: usize,
    pub interaction: f64,
    #[serde(default)]
    pub hopping: f64,
    #[serde(default)]
    pub detuning: f64,
    pub decay: f64,
    #[serde(default)]
    pub thermal_occupation: f64,
    #[serde(default)]
    pub drive: Vec<DriveEntry>,
    /// Full single-particle matrix as rows of `[re, im]` pairs; replaces `hopping` and `detuning`.
    #[serde(default)]
    pub single_particle: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveEntry {
    pub mode: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "positive-P")]
    PositiveP,
    #[serde(rename = "doubled-Wigner")]
    DoubledWigner,
    #[serde(rename = "doubled-Q")]
    DoubledQ,
    #[serde(rename = "classical-P")]
    ClassicalP,
}

impl From<Representation> for SOrder {
    fn from(r: Representation) -> Self {
        match r {
            Representation::PositiveP => SOrder::POSITIVE_P,
            Representation::DoubledWigner => SOrder::DOUBLED_WIGNER,
            Representation::DoubledQ => SOrder::DOUBLED_Q,
            Representation::ClassicalP => SOrder::CLASSICAL_P,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub representation: Representation,
    pub size: usize,
    pub blocks: usize,
    pub seed: u64,
    pub escape_cap: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { representation: Representation::PositiveP, size: 1 << 16, blocks: 32, seed: 1, escape_cap: 1e10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorChoice {
    Exponential,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    Gaussian,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub dt: f64,
    pub iterations: u32,
    pub t_end: f64,
    pub propagator: PropagatorChoice,
    pub correction: bool,
    pub noise: NoiseChoice,
    /// Uniforms summed per normal when `noise = "binomial"`.
    pub binomial_terms: u32,
    /// Occupation record interval; 0 disables the time series.
    pub record_every: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        IntegrationSection {
            dt: 0.005,
            iterations: 1,
            t_end: 30.0,
            propagator: PropagatorChoice::Exponential,
            correction: true,
            noise: NoiseChoice::Gaussian,
            binomial_terms: 4,
            record_every: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeToken {
    #[serde(rename = "t0")]
    Start,
    #[serde(rename = "t0+tau")]
    Delayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpToken {
    #[serde(rename = "a")]
    Annihilate,
    #[serde(rename = "adag")]
    Create,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorToken {
    pub op: OpToken,
    pub mode: usize,
    pub time: TimeToken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Entry {
    pub name: String,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub name: String,
    pub factors: Vec<FactorToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default = "default_t0")]
    pub t0: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    /// Must equal `t0` when given; the switch is otherwise placed by the planner.
    #[serde(default)]
    pub switch_time: Option<f64>,
    #[serde(default)]
    pub g2: Vec<G2Entry>,
    #[serde(default)]
    pub product: Vec<ProductEntry>,
}

fn default_t0() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Per-mode photon cutoff; by default 6 for weak drives and 12 otherwise.
    pub cutoff: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub halvings: u32,
    pub trajectories: usize,
    /// Integration span; defaults to `integration.t_end`.
    pub duration: Option<f64>,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        ConvergenceSection { halvings: 3, trajectories: 8, duration: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
    /// Write the final ensemble here after `simulate`.
    pub checkpoint: Option<String>,
    pub gnuplot: bool,
}

/// One requested delay correlation, resolved to zero-based modes.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationRequest {
    G2 { name: String, first: usize, second: usize },
    Product { name: String, spec: CorrelationSpec, labels: LabelTimes },
}

impl CorrelationRequest {
    pub fn name(&self) -> &str {
        match self {
            CorrelationRequest::G2 { name, .. } | CorrelationRequest::Product { name, .. } => name,
        }
    }
}

/// Which physical times the spec's labels stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTimes {
    /// Label 0 is `t0`, label 1 (if present) is `t0 + tau`.
    Both,
    /// Only label 0, at `t0`.
    StartOnly,
    /// Only label 0, at `t0 + tau`.
    DelayedOnly,
}

impl LabelTimes {
    pub fn times(self, t0: f64, tau: f64) -> Vec<f64> {
        match self {
            LabelTimes::Both => vec![t0, t0 + tau],
            LabelTimes::StartOnly => vec![t0],
            LabelTimes::DelayedOnly => vec![t0 + tau],
        }
    }

    pub fn is_delayed(self, label: usize) -> bool {
        match self {
            LabelTimes::Both => label == 1,
            LabelTimes::StartOnly => false,
            LabelTimes::DelayedOnly => true,
        }
    }
}

fn field(path: &str, msg: impl std::fmt::Display) -> AppError {
    AppError::Config(format!("{path}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, AppError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("expected {SCHEMA_VERSION}, found {}", self.schema_version)));
        }
        let m = &self.model;
        if m.modes == 0 {
            return Err(field("model.modes", "must be at least 1"));
        }
        for (i, d) in m.drive.iter().enumerate() {
            if d.mode == 0 || d.mode > m.modes {
                return Err(field(&format!("model.drive[{i}].mode"), format!("must be in 1..={}", m.modes)));
            }
        }
        if let Some(rows) = &m.single_particle {
            if rows.len() != m.modes || rows.iter().any(|r| r.len() != m.modes) {
                return Err(field("model.single_particle", format!("must be {0}x{0}", m.modes)));
            }
        }
        self.model_params()?.validate().map_err(|e| field("model", e))?;
        let e = &self.ensemble;
        if e.size < 2 {
            return Err(field("ensemble.size", "must be at least 2"));
        }
        if e.blocks < 2 || e.size % e.blocks != 0 {
            return Err(field("ensemble.blocks", "must be at least 2 and divide ensemble.size"));
        }
        if !(e.escape_cap > 0.0) {
            return Err(field("ensemble.escape_cap", "must be positive"));
        }
        let g = &self.integration;
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(field("integration.dt", "must be positive"));
        }
        if !(g.t_end >= 0.0) {
            return Err(field("integration.t_end", "must be nonnegative"));
        }
        if g.noise == NoiseChoice::Binomial && g.binomial_terms == 0 {
            return Err(field("integration.binomial_terms", "must be at least 1"));
        }
        if g.record_every < 0.0 {
            return Err(field("integration.record_every", "must be nonnegative"));
        }
        if let Some(c) = &self.correlations {
            if !(c.t0 >= 0.0 && c.t0 < g.t_end) {
                return Err(field("correlations.t0", "must satisfy 0 <= t0 < integration.t_end"));
            }
            if !(c.tau_step > 0.0) || !(c.tau_max >= 0.0) {
                return Err(field("correlations.tau_step", "needs tau_step > 0 and tau_max >= 0"));
            }
            if c.t0 + c.tau_max > g.t_end * (1.0 + 1e-12) {
                return Err(field("correlations.tau_max", "delay grid must end by integration.t_end"));
            }
            if let Some(ts) = c.switch_time {
                if (ts - c.t0).abs() > 1e-12 * c.t0.abs().max(1.0) {
                    return Err(field("correlations.switch_time", "two-time schedules switch at t0"));
                }
            }
            let mut names = std::collections::HashSet::new();
            for r in self.correlation_requests()? {
                if !names.insert(r.name().to_string()) {
                    return Err(field("correlations", format!("duplicate name '{}'", r.name())));
                }
                if r.name().is_empty() || r.name().contains(['/', '\\']) {
                    return Err(field("correlations", format!("name '{}' is not a plain file stem", r.name())));
                }
            }
        }
        if self.convergence.trajectories == 0 {
            return Err(field("convergence.trajectories", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, AppError> {
        let m = &self.model;
        let mut p = ModelParams::chain(m.modes, m.interaction, m.hopping, m.detuning, m.decay, m.thermal_occupation, 0.0);
        p.drive = vec![C64::new(0.0, 0.0); m.modes];
        for d in &m.drive {
            p.drive[d.mode - 1] += C64::new(d.re, d.im);
        }
        if let Some(rows) = &m.single_particle {
            p.single_particle = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
        }
        Ok(p)
    }

    pub fn order(&self) -> SOrder {
        self.ensemble.representation.into()
    }

    pub fn step(&self) -> StepConfig {
        StepConfig { dt: self.integration.dt, iterations: self.integration.iterations, escape_cap: self.ensemble.escape_cap }
    }

    pub fn noise(&self) -> NoiseKind {
        match self.integration.noise {
            NoiseChoice::Gaussian => NoiseKind::Gaussian,
            NoiseChoice::Binomial => NoiseKind::Binomial(self.integration.binomial_terms),
        }
    }

    pub fn variant(&self) -> ModelVariant {
        ModelVariant {
            propagator: match self.integration.propagator {
                PropagatorChoice::Exponential => Propagator::Exponential,
                PropagatorChoice::Linear => Propagator::Linear,
            },
            corrected: self.integration.correction,
        }
    }

    /// Delay grid `0, step, ..`, up to `tau_max`.
    pub fn taus(&self) -> Vec<f64> {
        let Some(c) = &self.correlations else { return Vec::new() };
        let n = (c.tau_max / c.tau_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * c.tau_step).collect()
    }

    pub fn correlation_requests(&self) -> Result<Vec<CorrelationRequest>, AppError> {
        let Some(c) = &self.correlations else { return Ok(Vec::new()) };
        let modes = self.model.modes;
        let mode = |path: String, j: usize| -> Result<usize, AppError> {
            if j == 0 || j > modes {
                return Err(field(&path, format!("mode must be in 1..={modes}")));
            }
            Ok(j - 1)
        };
        let mut out = Vec::new();
        for (i, g) in c.g2.iter().enumerate() {
            out.push(CorrelationRequest::G2 {
                name: g.name.clone(),
                first: mode(format!("correlations.g2[{i}].first"), g.first)?,
                second: mode(format!("correlations.g2[{i}].second"), g.second)?,
            });
        }
        for (i, p) in c.product.iter().enumerate() {
            if p.factors.is_empty() {
                return Err(field(&format!("correlations.product[{i}].factors"), "must not be empty"));
            }
            let has = |t: TimeToken| p.factors.iter().any(|f| f.time == t);
            let labels = match (has(TimeToken::Start), has(TimeToken::Delayed)) {
                (true, true) => LabelTimes::Both,
                (true, false) => LabelTimes::StartOnly,
                _ => LabelTimes::DelayedOnly,
            };
            let factors = p
                .factors
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let m = mode(format!("correlations.product[{i}].factors[{k}].mode"), f.mode)?;
                    let label = usize::from(labels == LabelTimes::Both && f.time == TimeToken::Delayed);
                    Ok(OperatorFactor {
                        op: match f.op {
                            OpToken::Annihilate => Ladder::Annihilate,
                            OpToken::Create => Ladder::Create,
                        },
                        mode: m,
                        time: label,
                    })
                })
                .collect::<Result<Vec<_>, AppError>>()?;
            let spec = CorrelationSpec::new(factors).map_err(|e| field(&format!("correlations.product[{i}]"), e))?;
            out.push(CorrelationRequest::Product { name: p.name.clone(), spec, labels });
        }
        Ok(out)
    }

    /// Oracle cutoff, defaulting on drive strength.
    pub fn oracle_cutoff(&self) -> usize {
        self.oracle.cutoff.unwrap_or_else(|| {
            let strongest = self.model.drive.iter().map(|d| d.re.hypot(d.im)).fold(0.0, f64::max);
            if strongest < 1.0 { 6 } else { 12 }
        })
    }
}

/// Parses a product written as `a+_1(t0) a_2(t1)`; `adag` is accepted for `a+`, modes count from 1.
pub fn parse_spec(text: &str) -> Result<CorrelationSpec, AppError> {
    let body = text.trim().trim_start_matches('<').trim_end_matches('>');
    let mut factors = Vec::new();
    for tok in body.split_whitespace() {
        let bad = || AppError::Config(format!("cannot parse operator '{tok}', expected e.g. a+_1(t0)"));
        let (head, rest) = tok.split_once('_').ok_or_else(bad)?;
        let op = match head {
            "a" => Ladder::Annihilate,
            "a+" | "adag" => Ladder::Create,
            _ => return Err(bad()),
        };
        let (mode, time) = rest.strip_suffix(')').and_then(|r| r.split_once("(t")).ok_or_else(bad)?;
        let mode: usize = mode.parse().map_err(|_| bad())?;
        let time: usize = time.parse().map_err(|_| bad())?;
        if mode == 0 {
            return Err(bad());
        }
        factors.push(OperatorFactor { op, mode: mode - 1, time });
    }
    CorrelationSpec::new(factors).map_err(AppError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOCKADE: &str = r#"
schema_version = 1

[model]
modes = 2
interaction = 0.0856
hopping = 3.0
detuning = -0.275
decay = 1.0
drive = [{ mode = 1, re = 0.01 }]

[correlations]
tau_max = 8.0
tau_step = 0.5
g2 = [{ name = "g11", first = 1, second = 1 }]

[[correlations.product]]
name = "pair"
factors = [
  { op = "adag", mode = 1, time = "t0" },
  { op = "a", mode = 1, time = "t0+tau" },
]
"#;

    #[test]
    fn blockade_config_round_trips() {
        let c = RunConfig::parse(BLOCKADE).unwrap();
        assert_eq!(c.ensemble.size, 1 << 16);
        assert_eq!(c.ensemble.blocks, 32);
        assert_eq!(c.correlations.as_ref().unwrap().t0, 20.0);
        let p = c.model_params().unwrap();
        assert_eq!(p.drive[0], C64::new(0.01, 0.0));
        assert_eq!(p.hsp(0, 1), C64::new(-3.0, 0.0));
        assert_eq!(c.taus().len(), 17);
        let reqs = c.correlation_requests().unwrap();
        assert_eq!(reqs.len(), 2);
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BLOCKADE.replace("decay = 1.0", "decay = 1.0\ndecya = 2.0");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("decya"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = BLOCKADE.replace("[correlations]", "[ensemble]\nsize = 100\nblocks = 32\nrepresentation = \"positive-P\"\nseed = 3\nescape_cap = 1e10\n\n[correlations]");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("ensemble.blocks"), "{err}");
        let text = BLOCKADE.replace("tau_max = 8.0", "tau_max = 80.0");
        assert!(RunConfig::parse(&text).unwrap_err().to_string().contains("correlations.tau_max"));
        let text = BLOCKADE.replace("mode = 1, re", "mode = 3, re");
        assert!(RunConfig::parse(&text).unwrap_err().to_string().contains("model.drive[0].mode"));
    }

    #[test]
    fn spec_text_parses() {
        let s = parse_spec("<a+_1(t0) adag_1(t1) a_1(t1) a_1(t0)>").unwrap();
        assert_eq!(s.to_string(), "<a+_1(t0) a+_1(t1) a_1(t1) a_1(t0)>");
        assert!(parse_spec("b_1(t0)").is_err());
        assert!(parse_spec("a_0(t0)").is_err());
        assert!(parse_spec("a_1(t1)").is_err());
    }
}
