//! Flat key-value scenario files.
//!
//! Every key mirrors a [`MaserConfig`] field or a run option. Times
//! (`delta_t`, `t_end`) are given in units of the interaction time `τ`,
//! and `τ` itself as `tau_over_pi`. Unknown keys are rejected so that typos
//! cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use maser_core::{
    FailureWeighting, GainChannel, MaserConfig, OdeOptions, RateConvention, SpinVector,
    DEFAULT_CUTOFF,
};
use serde_json::{json, Value};
use toml::Table;

use crate::error::CliError;

/// Scenario files shipped with the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig2", include_str!("../scenarios/fig2.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("fig4", include_str!("../scenarios/fig4.toml")),
    ("fig5", include_str!("../scenarios/fig5.toml")),
];

const KEYS: &[&str] = &[
    "name",
    "description",
    "run",
    "channels",
    "failure_weighting",
    "pre_up",
    "pre_down",
    "post_up",
    "post_down",
    "lambda",
    "kappa",
    "kappa_over_lambda",
    "nbar0",
    "tau_over_pi",
    "delta_t",
    "t_end",
    "samples",
    "pump_p",
    "cutoff",
    "rate_convention",
    "omega_m_hz",
    "lambda0_hz",
    "n_spins",
    "sampling",
    "seed",
    "outputs",
    "pump_sweep",
    "wigner_extent",
    "wigner_points",
    "ps_grid",
    "n_eigen_targets",
    "eigenstate_reference",
    "steady_tolerance",
    "rtol",
    "atol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// Keep only runs whose post-selection succeeded.
    Heralded,
    /// Keep only runs whose post-selection failed.
    Failures,
    /// Discard the spin without measuring it.
    Trace,
    /// Pre-select `|↑⟩` and discard the spin.
    Eigenstate,
}

impl Curve {
    pub fn label(self) -> &'static str {
        match self {
            Curve::Heralded => "heralded",
            Curve::Failures => "failures",
            Curve::Trace => "trace",
            Curve::Eigenstate => "eigenstate",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Curve::Heralded,
            Curve::Failures,
            Curve::Trace,
            Curve::Eigenstate,
        ]
        .into_iter()
        .find(|c| c.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    MeanPhonons,
    G2,
    Pn,
    Wigner,
    LinewidthSweep,
    PumpSweep,
}

impl Output {
    pub fn label(self) -> &'static str {
        match self {
            Output::MeanPhonons => "mean_phonons",
            Output::G2 => "g2",
            Output::Pn => "pn",
            Output::Wigner => "wigner",
            Output::LinewidthSweep => "linewidth_sweep",
            Output::PumpSweep => "pump_sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Output::MeanPhonons,
            Output::G2,
            Output::Pn,
            Output::Wigner,
            Output::LinewidthSweep,
            Output::PumpSweep,
        ]
        .into_iter()
        .find(|o| o.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunMode {
    /// Master-equation integration up to `t_end` (in `1/ω_m`).
    Ode {
        t_end: f64,
        samples: usize,
        ode: OdeOptions,
    },
    /// One spin after another.
    Discrete { n_spins: usize, sampled: bool },
}

/// Damping for a discrete sweep, either given or derived from the
/// eigenstate occupancy it should produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaPoint {
    pub kappa: f64,
    pub n_eigen_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub run: RunMode,
    pub channels: Vec<Curve>,
    pub failure_weighting: FailureWeighting,
    pub pre: (f64, f64),
    pub post: Option<(f64, f64)>,
    pub lambda: f64,
    /// Resolved damping points; a single entry unless swept.
    pub kappas: Vec<KappaPoint>,
    pub nbar0: f64,
    /// In `1/ω_m`.
    pub tau: f64,
    /// In `1/ω_m`.
    pub delta_t: f64,
    pub pump_p: f64,
    pub cutoff: usize,
    pub rate_convention: RateConvention,
    pub omega_m_hz: Option<f64>,
    pub lambda0_hz: Option<f64>,
    pub seed: u64,
    pub outputs: Vec<Output>,
    pub pump_sweep: Vec<f64>,
    pub wigner_extent: f64,
    pub wigner_points: usize,
    pub ps_grid: Vec<f64>,
    pub eigenstate_reference: bool,
    pub steady_tolerance: f64,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Reader {
    table: Table,
}

impl Reader {
    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(cfg_err(format!("`{key}` must be a number, got {v}"))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(cfg_err(format!(
                "`{key}` must be a non-negative integer, got {v}"
            ))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(cfg_err(format!("`{key}` must be a string, got {v}"))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(cfg_err(format!("`{key}` must be true or false, got {v}"))),
        }
    }

    fn array(&self, key: &str) -> Result<Option<&Vec<toml::Value>>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => Ok(Some(a)),
            Some(v) => Err(cfg_err(format!("`{key}` must be a list, got {v}"))),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(a) = self.array(key)? else {
            return Ok(None);
        };
        a.iter()
            .map(|v| match v {
                toml::Value::Float(x) => Ok(*x),
                toml::Value::Integer(i) => Ok(*i as f64),
                other => Err(cfg_err(format!(
                    "`{key}` entries must be numbers, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        let Some(a) = self.array(key)? else {
            return Ok(None);
        };
        a.iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s.clone()),
                other => Err(cfg_err(format!(
                    "`{key}` entries must be strings, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn positive(key: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(cfg_err(format!("`{key}` must be finite and > 0, got {x}")))
    }
}

/// Post state `cos φ|↑⟩ - sin φ|↓⟩` with success probability `ps` against a
/// real pre state. Takes the root closest to `φ = 0`.
pub fn post_for_probability(pre: (f64, f64), ps: f64) -> Result<(f64, f64), CliError> {
    if !(ps > 0.0 && ps <= 1.0) {
        return Err(cfg_err(format!(
            "post-selection probability must be in (0, 1], got {ps}"
        )));
    }
    let norm = pre.0.hypot(pre.1);
    // a cos φ - b sin φ = cos(φ + δ) with δ = atan2(b, a).
    let delta = (pre.1 / norm).atan2(pre.0 / norm);
    let phi = ps.sqrt().acos() - delta;
    Ok((phi.cos(), -phi.sin()))
}

impl ScenarioSpec {
    /// Bundled scenario by name, or a scenario file by path.
    pub fn load(name_or_path: &str) -> Result<Self, CliError> {
        if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == name_or_path) {
            return Self::parse(text);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            let known: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
            return Err(cfg_err(format!(
                "`{name_or_path}` is neither a bundled scenario ({}) nor a file",
                known.join(", ")
            )));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => cfg_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = text
            .parse()
            .map_err(|e| cfg_err(format!("malformed scenario: {e}")))?;
        if let Some(bad) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(cfg_err(format!("unknown key `{bad}`")));
        }
        let r = Reader { table };

        let name = r.string("name")?.ok_or_else(|| cfg_err("missing `name`"))?;
        let description = r.string("description")?.unwrap_or_default();
        let tau = PI * positive("tau_over_pi", r.number("tau_over_pi")?.unwrap_or(1.0))?;
        let delta_t = tau
            * positive(
                "delta_t",
                r.number("delta_t")?
                    .ok_or_else(|| cfg_err("missing `delta_t`"))?,
            )?;
        let lambda = r
            .number("lambda")?
            .ok_or_else(|| cfg_err("missing `lambda`"))?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(cfg_err(format!(
                "`lambda` must be finite and >= 0, got {lambda}"
            )));
        }
        let nbar0 = r
            .number("nbar0")?
            .ok_or_else(|| cfg_err("missing `nbar0`"))?;

        let run = match r.string("run")?.as_deref().unwrap_or("ode") {
            "ode" => {
                if r.table.contains_key("n_spins") || r.table.contains_key("sampling") {
                    return Err(cfg_err(
                        "`n_spins` and `sampling` only apply to run = \"discrete\"",
                    ));
                }
                let t_end = tau
                    * positive(
                        "t_end",
                        r.number("t_end")?
                            .ok_or_else(|| cfg_err("missing `t_end`"))?,
                    )?;
                let samples = r
                    .count("samples")?
                    .unwrap_or(maser_core::master::DEFAULT_SAMPLES as u64);
                if samples < 2 {
                    return Err(cfg_err("`samples` must be at least 2"));
                }
                let mut ode = OdeOptions::default();
                if let Some(x) = r.number("rtol")? {
                    ode.rtol = positive("rtol", x)?;
                }
                if let Some(x) = r.number("atol")? {
                    ode.atol = positive("atol", x)?;
                }
                RunMode::Ode {
                    t_end,
                    samples: samples as usize,
                    ode,
                }
            }
            "discrete" => {
                if ["t_end", "samples", "rtol", "atol"]
                    .iter()
                    .any(|k| r.table.contains_key(*k))
                {
                    return Err(cfg_err(
                        "`t_end`, `samples`, `rtol` and `atol` only apply to run = \"ode\"",
                    ));
                }
                let n_spins = r
                    .count("n_spins")?
                    .ok_or_else(|| cfg_err("missing `n_spins`"))?;
                if n_spins == 0 {
                    return Err(cfg_err("`n_spins` must be at least 1"));
                }
                let sampled = match r.string("sampling")?.as_deref().unwrap_or("expected") {
                    "expected" => false,
                    "sampled" => true,
                    other => return Err(cfg_err(format!("unknown sampling `{other}`"))),
                };
                RunMode::Discrete {
                    n_spins: n_spins as usize,
                    sampled,
                }
            }
            other => return Err(cfg_err(format!("unknown run mode `{other}`"))),
        };

        let pre = (
            r.number("pre_up")?
                .ok_or_else(|| cfg_err("missing `pre_up`"))?,
            r.number("pre_down")?
                .ok_or_else(|| cfg_err("missing `pre_down`"))?,
        );
        let post = match (r.number("post_up")?, r.number("post_down")?) {
            (Some(u), Some(d)) => Some((u, d)),
            (None, None) => None,
            _ => return Err(cfg_err("`post_up` and `post_down` must be given together")),
        };

        let rate_convention = match r.string("rate_convention")?.as_deref().unwrap_or("gap") {
            "gap" => RateConvention::Gap,
            "full_cycle" => RateConvention::FullCycle,
            other => return Err(cfg_err(format!("unknown rate convention `{other}`"))),
        };
        let failure_weighting = match r
            .string("failure_weighting")?
            .as_deref()
            .unwrap_or("projector")
        {
            "projector" => FailureWeighting::Projector,
            "fixed" => FailureWeighting::FixedProbability,
            "born" => FailureWeighting::BornRule,
            other => return Err(cfg_err(format!("unknown failure weighting `{other}`"))),
        };

        let ps_grid = r.numbers("ps_grid")?.unwrap_or_default();
        let targets = r.numbers("n_eigen_targets")?;
        let injection_rate = match rate_convention {
            RateConvention::Gap => 1.0 / delta_t,
            RateConvention::FullCycle => 1.0 / (tau + delta_t),
        };
        let kappas = match (r.number("kappa")?, r.number("kappa_over_lambda")?, targets) {
            (Some(k), None, None) => vec![KappaPoint {
                kappa: k,
                n_eigen_target: None,
            }],
            (None, Some(f), None) => vec![KappaPoint {
                kappa: f * lambda,
                n_eigen_target: None,
            }],
            (None, None, Some(t)) => {
                if t.is_empty() {
                    return Err(cfg_err("`n_eigen_targets` is empty"));
                }
                t.iter()
                    .map(|&n| {
                        if !(n > nbar0) || !n.is_finite() {
                            return Err(cfg_err(format!(
                                "eigenstate target {n} must exceed nbar0 = {nbar0}"
                            )));
                        }
                        // n = nbar0 + (4 λ r / κ)².
                        let kappa = 4.0 * lambda * injection_rate / (n - nbar0).sqrt();
                        Ok(KappaPoint {
                            kappa,
                            n_eigen_target: Some(n),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            (None, None, None) => {
                return Err(cfg_err(
                    "one of `kappa`, `kappa_over_lambda`, `n_eigen_targets` is required",
                ))
            }
            _ => {
                return Err(cfg_err(
                    "`kappa`, `kappa_over_lambda` and `n_eigen_targets` are mutually exclusive",
                ))
            }
        };

        let channels = r
            .strings("channels")?
            .unwrap_or_default()
            .iter()
            .map(|s| Curve::parse(s).ok_or_else(|| cfg_err(format!("unknown channel `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut outputs = r
            .strings("outputs")?
            .unwrap_or_default()
            .iter()
            .map(|s| Output::parse(s).ok_or_else(|| cfg_err(format!("unknown output `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        outputs.sort();
        outputs.dedup();

        let cutoff = r.count("cutoff")?.unwrap_or(DEFAULT_CUTOFF as u64) as usize;
        let spec = Self {
            name,
            description,
            run,
            channels,
            failure_weighting,
            pre,
            post,
            lambda,
            kappas,
            nbar0,
            tau,
            delta_t,
            pump_p: r.number("pump_p")?.unwrap_or(0.0),
            cutoff,
            rate_convention,
            omega_m_hz: r.number("omega_m_hz")?,
            lambda0_hz: r.number("lambda0_hz")?,
            seed: r.count("seed")?.unwrap_or(0),
            outputs,
            pump_sweep: r.numbers("pump_sweep")?.unwrap_or_default(),
            wigner_extent: r.number("wigner_extent")?.unwrap_or(4.0),
            wigner_points: r.count("wigner_points")?.unwrap_or(41) as usize,
            ps_grid,
            eigenstate_reference: r.boolean("eigenstate_reference")?.unwrap_or(false),
            steady_tolerance: r.number("steady_tolerance")?.unwrap_or(0.05),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self, CliError> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_ode(&self) -> bool {
        matches!(self.run, RunMode::Ode { .. })
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    /// Every curve of the run: `(kappa index, label, config)`.
    pub fn curves(&self) -> Result<Vec<(usize, String, MaserConfig)>, CliError> {
        let mut out = Vec::new();
        for (ki, kp) in self.kappas.iter().enumerate() {
            for &c in &self.channels {
                out.push((
                    ki,
                    c.label().to_string(),
                    self.config_for(self.channel(c)?, kp.kappa)?,
                ));
            }
            let pre = SpinVector::real(self.pre.0, self.pre.1).map_err(core_cfg)?;
            for &ps in &self.ps_grid {
                let (u, d) = post_for_probability(self.pre, ps)?;
                let post = SpinVector::real(u, d).map_err(core_cfg)?;
                let ch =
                    GainChannel::heralded(pre, post, self.tau, self.lambda).map_err(core_cfg)?;
                out.push((ki, format!("ps_{ps}"), self.config_for(ch, kp.kappa)?));
            }
            if self.eigenstate_reference && !self.channels.contains(&Curve::Eigenstate) {
                out.push((
                    ki,
                    "eigenstate".into(),
                    self.config_for(self.channel(Curve::Eigenstate)?, kp.kappa)?,
                ));
            }
        }
        Ok(out)
    }

    fn channel(&self, c: Curve) -> Result<GainChannel, CliError> {
        let pre = SpinVector::real(self.pre.0, self.pre.1).map_err(core_cfg)?;
        let post = || -> Result<SpinVector, CliError> {
            let (u, d) = self.post.ok_or_else(|| {
                cfg_err(format!(
                    "channel `{}` needs post_up and post_down",
                    c.label()
                ))
            })?;
            SpinVector::real(u, d).map_err(core_cfg)
        };
        let ch = match c {
            Curve::Heralded => GainChannel::heralded(pre, post()?, self.tau, self.lambda),
            Curve::Failures => GainChannel::with_failures(pre, post()?, self.tau, self.lambda)
                .map(|ch| ch.with_failure_weighting(self.failure_weighting)),
            Curve::Trace => GainChannel::spin_trace(pre, self.tau, self.lambda),
            Curve::Eigenstate => {
                GainChannel::spin_trace(SpinVector::spin_up(), self.tau, self.lambda)
            }
        };
        ch.map_err(core_cfg)
    }

    fn config_for(&self, channel: GainChannel, kappa: f64) -> Result<MaserConfig, CliError> {
        let mut cfg = MaserConfig::new(channel, kappa, self.nbar0, self.delta_t)
            .and_then(|c| c.with_pump_p(self.pump_p))
            .and_then(|c| c.with_cutoff(self.cutoff))
            .map_err(core_cfg)?
            .with_rate_convention(self.rate_convention);
        cfg.omega_m_hz = self.omega_m_hz;
        cfg.lambda0_hz = self.lambda0_hz;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() {
            return Err(cfg_err("`name` is empty"));
        }
        let ode_only = [
            Output::Pn,
            Output::Wigner,
            Output::LinewidthSweep,
            Output::PumpSweep,
        ];
        if !self.is_ode() {
            if let Some(o) = self.outputs.iter().find(|o| ode_only.contains(o)) {
                return Err(cfg_err(format!(
                    "output `{}` needs run = \"ode\"",
                    o.label()
                )));
            }
        } else if !self.ps_grid.is_empty() || self.eigenstate_reference {
            return Err(cfg_err(
                "`ps_grid` and `eigenstate_reference` need run = \"discrete\"",
            ));
        }
        if self.is_ode() && self.kappas.len() != 1 {
            return Err(cfg_err("`n_eigen_targets` needs run = \"discrete\""));
        }
        if self.channels.is_empty() && self.ps_grid.is_empty() && !self.eigenstate_reference {
            return Err(cfg_err(
                "no curves: give `channels`, `ps_grid` or `eigenstate_reference`",
            ));
        }
        let sweeps = [Output::LinewidthSweep, Output::PumpSweep];
        if self.outputs.iter().any(|o| sweeps.contains(o)) && self.pump_sweep.is_empty() {
            return Err(cfg_err(
                "pump or linewidth sweep requested without `pump_sweep` factors",
            ));
        }
        if let Some(f) = self
            .pump_sweep
            .iter()
            .find(|f| !(**f > 0.0) || !f.is_finite())
        {
            return Err(cfg_err(format!("pump sweep factors must be > 0, got {f}")));
        }
        if self.wants(Output::Wigner) {
            positive("wigner_extent", self.wigner_extent)?;
            if self.wigner_points < 2 {
                return Err(cfg_err("`wigner_points` must be at least 2"));
            }
        }
        if !(self.steady_tolerance > 0.0 && self.steady_tolerance < 1.0) {
            return Err(cfg_err(format!(
                "`steady_tolerance` must be in (0, 1), got {}",
                self.steady_tolerance
            )));
        }
        // Building every curve runs the library's own validation.
        self.curves().map(|_| ())
    }

    /// Full resolved parameter set, times both in `τ` and in `1/ω_m`.
    pub fn echo(&self) -> Value {
        let mut m = BTreeMap::new();
        m.insert("name", json!(self.name));
        m.insert("description", json!(self.description));
        match self.run {
            RunMode::Ode {
                t_end,
                samples,
                ode,
            } => {
                m.insert("run", json!("ode"));
                m.insert("rtol", json!(ode.rtol));
                m.insert("atol", json!(ode.atol));
                m.insert("t_end", json!(t_end / self.tau));
                m.insert("t_end_omega_m", json!(t_end));
                m.insert("samples", json!(samples));
            }
            RunMode::Discrete { n_spins, sampled } => {
                m.insert("run", json!("discrete"));
                m.insert("n_spins", json!(n_spins));
                m.insert(
                    "sampling",
                    json!(if sampled { "sampled" } else { "expected" }),
                );
            }
        }
        m.insert(
            "channels",
            json!(self.channels.iter().map(|c| c.label()).collect::<Vec<_>>()),
        );
        m.insert(
            "failure_weighting",
            json!(match self.failure_weighting {
                FailureWeighting::Projector => "projector",
                FailureWeighting::FixedProbability => "fixed",
                FailureWeighting::BornRule => "born",
            }),
        );
        m.insert("pre_up", json!(self.pre.0));
        m.insert("pre_down", json!(self.pre.1));
        m.insert("post_up", json!(self.post.map(|p| p.0)));
        m.insert("post_down", json!(self.post.map(|p| p.1)));
        m.insert("lambda", json!(self.lambda));
        m.insert(
            "kappa",
            json!(self
                .kappas
                .iter()
                .map(|k| json!({ "kappa": k.kappa, "n_eigen_target": k.n_eigen_target }))
                .collect::<Vec<_>>()),
        );
        m.insert("nbar0", json!(self.nbar0));
        m.insert("tau_over_pi", json!(self.tau / PI));
        m.insert("tau_omega_m", json!(self.tau));
        m.insert("delta_t", json!(self.delta_t / self.tau));
        m.insert("delta_t_omega_m", json!(self.delta_t));
        m.insert("pump_p", json!(self.pump_p));
        m.insert("cutoff", json!(self.cutoff));
        m.insert(
            "rate_convention",
            json!(match self.rate_convention {
                RateConvention::Gap => "gap",
                RateConvention::FullCycle => "full_cycle",
            }),
        );
        m.insert("omega_m_hz", json!(self.omega_m_hz));
        m.insert("lambda0_hz", json!(self.lambda0_hz));
        m.insert("seed", json!(self.seed));
        m.insert(
            "outputs",
            json!(self.outputs.iter().map(|o| o.label()).collect::<Vec<_>>()),
        );
        m.insert("pump_sweep", json!(self.pump_sweep));
        m.insert("wigner_extent", json!(self.wigner_extent));
        m.insert("wigner_points", json!(self.wigner_points));
        m.insert("ps_grid", json!(self.ps_grid));
        m.insert("eigenstate_reference", json!(self.eigenstate_reference));
        m.insert("steady_tolerance", json!(self.steady_tolerance));
        json!(m)
    }
}

fn core_cfg(e: maser_core::Error) -> CliError {
    CliError::Config(e.to_string())
}
