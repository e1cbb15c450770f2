//! Executes a scenario and collects its files and summary in memory.

use std::collections::BTreeMap;

use maser_core::fock::eta;
use maser_core::observables::rectangular_grid;
use maser_core::ode::log_grid;
use maser_core::{
    integrate_ode_with, number_distribution, poisson_pmf, run_discrete, spins_to_steady_state,
    thermal_state, total_variation, wigner, ChannelMode, ClosedFormSolution, DensityMatrix,
    InjectionMode, IntegrationOptions, MaserConfig, OdeOptions, StateDiagnostics, TimeSeries,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::format::{csv, num, opt};
use crate::scenario::{Output, RunMode, ScenarioSpec};

const SERIES_HEADER: &[&str] = &[
    "time",
    "mean_phonons_numeric",
    "mean_phonons_analytic",
    "g2_numeric",
    "g2_analytic",
    "trace_drift",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    /// Sorted by name.
    pub files: Vec<OutputFile>,
    pub summary: Value,
}

impl Bundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.contents.as_str())
    }
}

/// True when every spin applies the same displacement of size `2λ`, which is
/// the case the closed-form solution describes.
pub fn closed_form_applies(cfg: &MaserConfig) -> bool {
    let ch = &cfg.channel;
    let eigen = |up: f64, down: f64| up * down < 1e-12 * (up + down);
    let pre_eigen = eigen(ch.pre().up().norm_sqr(), ch.pre().down().norm_sqr());
    let fixed = match ch.mode() {
        ChannelMode::SpinTrace => pre_eigen,
        ChannelMode::HeraldedPostSelect => {
            let post = ch.post().expect("heralded channels carry a post state");
            pre_eigen || eigen(post.up().norm_sqr(), post.down().norm_sqr())
        }
        ChannelMode::PostSelectWithFailures => false,
    };
    fixed && (eta(ch.tau()).norm() - 2.0).abs() < 1e-9
}

struct Invariants {
    worst: StateDiagnostics,
    samples: usize,
}

impl Invariants {
    fn new() -> Self {
        Self {
            worst: StateDiagnostics {
                trace_error: 0.0,
                hermiticity_defect: 0.0,
                min_eigenvalue: f64::INFINITY,
            },
            samples: 0,
        }
    }

    fn absorb(&mut self, s: &TimeSeries) {
        let d = s.worst_diagnostics();
        self.worst.trace_error = self.worst.trace_error.max(d.trace_error);
        self.worst.hermiticity_defect = self.worst.hermiticity_defect.max(d.hermiticity_defect);
        self.worst.min_eigenvalue = self.worst.min_eigenvalue.min(d.min_eigenvalue);
        self.samples += s.len();
    }

    fn json(&self) -> Value {
        json!({
            "samples": self.samples,
            "max_trace_error": num(self.worst.trace_error),
            "max_hermiticity_defect": num(self.worst.hermiticity_defect),
            "min_eigenvalue": num(self.worst.min_eigenvalue),
        })
    }
}

fn diagnostics_json(s: &TimeSeries) -> Value {
    let mut inv = Invariants::new();
    inv.absorb(s);
    inv.json()
}

fn analytic_json(sol: &ClosedFormSolution, cfg: &MaserConfig) -> Result<Value, CliError> {
    Ok(json!({
        "n_ss": num(sol.steady_state_mean()),
        "beta1_inf": num(sol.beta1_inf()),
        "g2_ss": num(sol.g2_steady_state()?),
        "linewidth": num(sol.linewidth()?),
        "injection_rate": num(cfg.injection_rate()),
        "eigenstate_n_ss": num(cfg.eigenstate_steady_state()),
    }))
}

fn series_rows(
    s: &TimeSeries,
    tau: f64,
    analytic: Option<&ClosedFormSolution>,
    analytic_time: impl Fn(usize) -> f64,
) -> Result<Vec<Vec<f64>>, CliError> {
    (0..s.len())
        .map(|i| {
            let (mean_a, g2_a) = match analytic {
                Some(sol) => {
                    let t = analytic_time(i);
                    (sol.mean_phonons(t), sol.g2(t)?)
                }
                None => (f64::NAN, f64::NAN),
            };
            Ok(vec![
                s.times[i] / tau,
                s.mean_phonons[i],
                mean_a,
                s.g2_zero[i],
                g2_a,
                s.trace_drift[i],
            ])
        })
        .collect()
}

/// Largest `|g2_numeric - g2_analytic|` over rows where both are defined.
fn max_g2_gap(rows: &[Vec<f64>]) -> Option<f64> {
    rows.iter()
        .map(|r| (r[3] - r[4]).abs())
        .filter(|d| d.is_finite())
        .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
}

struct CurveOut {
    label: String,
    summary: Value,
    files: Vec<OutputFile>,
    final_state: DensityMatrix,
    series: TimeSeries,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<Bundle, CliError> {
    let curves = spec.curves()?;
    let mut summary = BTreeMap::new();
    summary.insert("scenario".to_string(), json!(spec.name));
    summary.insert("parameters".into(), spec.echo());
    summary.insert("seed".into(), json!(spec.seed));
    summary.insert(
        "versions".into(),
        json!({
            "maser_core": maser_core::VERSION,
            "maser_cli": env!("CARGO_PKG_VERSION"),
            "summary_format": 1,
        }),
    );
    if let Some(post) = spec.post {
        let pre = maser_core::SpinVector::real(spec.pre.0, spec.pre.1)?;
        let post = maser_core::SpinVector::real(post.0, post.1)?;
        summary.insert(
            "P_S".into(),
            num(maser_core::spin_overlap_probability(&pre, &post)),
        );
    }

    let mut files = Vec::new();
    let mut invariants = Invariants::new();
    match spec.run {
        RunMode::Ode {
            t_end,
            samples,
            ode,
        } => {
            let primary = &curves[0].2;
            summary.insert(
                "analytic".into(),
                analytic_json(&ClosedFormSolution::from_config(primary)?, primary)?,
            );
            let outs: Vec<CurveOut> = curves
                .par_iter()
                .map(|(_, label, cfg)| run_ode_curve(spec, label, cfg, t_end, samples, ode))
                .collect::<Result<_, _>>()?;
            for o in &outs {
                invariants.absorb(&o.series);
            }
            let lead = &outs[0];
            summary.insert("numeric_n_ss".into(), opt(lead.series.last_mean()));
            if spec.wants(Output::Pn) {
                let (f, s) = pn_outputs(spec, &curves[0].2, &lead.final_state, t_end)?;
                files.extend(f);
                summary.insert("pn".into(), s);
            }
            if spec.wants(Output::Wigner) {
                let (f, s) = wigner_outputs(spec, &lead.final_state)?;
                files.extend(f);
                summary.insert("wigner".into(), s);
            }
            if spec.wants(Output::PumpSweep) || spec.wants(Output::LinewidthSweep) {
                let (f, s) = sweep_outputs(spec, primary)?;
                files.extend(f);
                summary.extend(s);
            }
            let mut curve_summaries = BTreeMap::new();
            for o in outs {
                files.extend(o.files);
                curve_summaries.insert(o.label, o.summary);
            }
            summary.insert("curves".into(), json!(curve_summaries));
        }
        RunMode::Discrete { n_spins, sampled } => {
            let outs: Vec<(usize, CurveOut, f64, usize)> = curves
                .par_iter()
                .enumerate()
                .map(|(index, (ki, label, cfg))| {
                    let mode = if sampled {
                        InjectionMode::Sampled(spec.seed.wrapping_add(index as u64))
                    } else {
                        InjectionMode::Expected
                    };
                    run_discrete_curve(spec, *ki, label, cfg, n_spins, mode)
                        .map(|(o, p, n)| (*ki, o, p, n))
                })
                .collect::<Result<_, _>>()?;
            let mut rows = Vec::new();
            let mut by_kappa: BTreeMap<String, BTreeMap<String, Value>> = BTreeMap::new();
            for (ki, o, ps, needed) in outs {
                invariants.absorb(&o.series);
                let kp = spec.kappas[ki];
                rows.push(vec![
                    kp.n_eigen_target.unwrap_or(f64::NAN),
                    kp.kappa,
                    ps,
                    o.series.last_mean().unwrap_or(f64::NAN),
                    needed as f64,
                ]);
                files.extend(o.files);
                by_kappa
                    .entry(format!("k{ki}"))
                    .or_default()
                    .insert(o.label, o.summary);
            }
            if spec.wants(Output::MeanPhonons) {
                files.push(OutputFile {
                    name: "steady_vs_ps.csv".into(),
                    contents: csv(
                        &["n_eigen_target", "kappa", "p_s", "n_ss", "spins_to_steady"],
                        rows,
                    ),
                });
            }
            summary.insert("curves".into(), json!(by_kappa));
        }
    }
    summary.insert("invariants".into(), invariants.json());
    files.sort_by(|a, b| a.name.cmp(&b.name));
    summary.insert(
        "files".into(),
        json!(files.iter().map(|f| f.name.clone()).collect::<Vec<_>>()),
    );
    Ok(Bundle {
        files,
        summary: json!(summary),
    })
}

fn run_ode_curve(
    spec: &ScenarioSpec,
    label: &str,
    cfg: &MaserConfig,
    t_end: f64,
    samples: usize,
    ode: OdeOptions,
) -> Result<CurveOut, CliError> {
    let rho0 = thermal_state(spec.nbar0, spec.cutoff)?;
    let mut grid = vec![0.0];
    grid.extend(log_grid(t_end, samples - 1, 4.0));
    let traj = integrate_ode_with(
        cfg,
        &rho0,
        t_end,
        &grid,
        &IntegrationOptions {
            ode,
            snapshot_times: Vec::new(),
        },
    )?;
    let sol = if closed_form_applies(cfg) {
        Some(ClosedFormSolution::from_config(cfg)?)
    } else {
        None
    };
    let s = &traj.series;
    let rows = series_rows(s, spec.tau, sol.as_ref(), |i| s.times[i])?;
    let final_mean = s.last_mean().unwrap_or(f64::NAN);
    let summary = json!({
        "P_S": num(cfg.channel.success_probability()),
        "kappa": num(cfg.kappa),
        "linear": cfg.channel.is_linear(),
        "phase_locked": cfg.is_phase_locked(),
        "final_mean": num(final_mean),
        "final_g2": num(*s.g2_zero.last().unwrap_or(&f64::NAN)),
        "mean_growth_relative": num((final_mean - spec.nbar0) / spec.nbar0),
        "analytic": match &sol {
            Some(sol) => analytic_json(sol, cfg)?,
            None => Value::Null,
        },
        "max_g2_deviation": opt(max_g2_gap(&rows)),
        "ode": {
            "accepted": traj.stats.accepted,
            "rejected": traj.stats.rejected,
            "renormalizations": traj.stats.renormalizations,
            "max_trace_drift": num(traj.stats.max_trace_drift),
        },
        "invariants": diagnostics_json(s),
    });
    let mut files = Vec::new();
    if spec.wants(Output::MeanPhonons) || spec.wants(Output::G2) {
        files.push(OutputFile {
            name: format!("timeseries_{label}.csv"),
            contents: csv(SERIES_HEADER, rows),
        });
    }
    let final_state = s.final_state().cloned().ok_or_else(|| {
        CliError::Numeric(maser_core::Error::Consistency(
            "integration kept no final state".into(),
        ))
    })?;
    Ok(CurveOut {
        label: label.to_string(),
        summary,
        files,
        final_state,
        series: traj.series,
    })
}

/// Distance from the final value should never grow again once shrinking.
fn monotone_reversal(means: &[f64]) -> f64 {
    let last = *means.last().unwrap_or(&0.0);
    means
        .windows(2)
        .map(|w| (w[1] - last).abs() - (w[0] - last).abs())
        .fold(0.0, f64::max)
}

fn run_discrete_curve(
    spec: &ScenarioSpec,
    ki: usize,
    label: &str,
    cfg: &MaserConfig,
    n_spins: usize,
    mode: InjectionMode,
) -> Result<(CurveOut, f64, usize), CliError> {
    let rho0 = thermal_state(spec.nbar0, spec.cutoff)?;
    let run = run_discrete(cfg, &rho0, n_spins, mode)?;
    let s = &run.series;
    let ps = cfg.channel.success_probability();
    let sol = if closed_form_applies(cfg) {
        Some(ClosedFormSolution::from_config(cfg)?)
    } else {
        None
    };
    // After k spins the coarse-grained flow has run for k·Δt.
    let rows = series_rows(s, spec.tau, sol.as_ref(), |i| i as f64 * cfg.delta_t)?;
    let needed =
        spins_to_steady_state(&s.mean_phonons, spec.steady_tolerance).unwrap_or(usize::MAX);
    let kp = spec.kappas[ki];
    let summary = json!({
        "P_S": num(ps),
        "kappa": num(cfg.kappa),
        "n_eigen_target": opt(kp.n_eigen_target),
        "final_mean": opt(s.last_mean()),
        "final_g2": num(*s.g2_zero.last().unwrap_or(&f64::NAN)),
        "spins_to_steady": needed,
        "monotone_reversal": num(monotone_reversal(&s.mean_phonons)),
        "successes": run.successes,
        "eigenstate_n_ss": num(cfg.eigenstate_steady_state()),
        "invariants": diagnostics_json(s),
    });
    let mut files = Vec::new();
    if spec.wants(Output::MeanPhonons) || spec.wants(Output::G2) {
        files.push(OutputFile {
            name: format!("spins_k{ki}_{label}.csv"),
            contents: csv(SERIES_HEADER, rows),
        });
    }
    let final_state = s.final_state().cloned().ok_or_else(|| {
        CliError::Numeric(maser_core::Error::Consistency(
            "discrete run kept no final state".into(),
        ))
    })?;
    Ok((
        CurveOut {
            label: label.to_string(),
            summary,
            files,
            final_state,
            series: run.series,
        },
        ps,
        needed,
    ))
}

fn pn_table(
    rho: &DensityMatrix,
    sol: Option<&ClosedFormSolution>,
    t: f64,
) -> Result<(String, Value), CliError> {
    let p = number_distribution(rho);
    let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
    // Compare on a support long enough for the analytic tail.
    let len = p.len().max(sol.map_or(0, |s| s.series_length()));
    let mut padded = p.clone();
    padded.resize(len, 0.0);
    let poisson = poisson_pmf(mean, len);
    let analytic = match sol {
        Some(s) => Some(s.pn_distribution(t, len)?),
        None => None,
    };
    let rows = (0..p.len()).map(|n| {
        vec![
            n as f64,
            p[n],
            analytic.as_ref().map_or(f64::NAN, |a| a[n]),
            poisson[n],
        ]
    });
    let text = csv(&["n", "p_numeric", "p_analytic", "p_poisson"], rows);
    let summary = json!({
        "mean": num(mean),
        "tvd_poisson": num(total_variation(&padded, &poisson)),
        "tvd_analytic": opt(analytic.as_ref().map(|a| total_variation(&padded, a))),
        "analytic_mass_beyond_cutoff": opt(analytic.as_ref().map(|a| a[p.len()..].iter().sum())),
    });
    Ok((text, summary))
}

fn pn_outputs(
    spec: &ScenarioSpec,
    cfg: &MaserConfig,
    final_state: &DensityMatrix,
    t_end: f64,
) -> Result<(Vec<OutputFile>, Value), CliError> {
    let sol = if closed_form_applies(cfg) {
        Some(ClosedFormSolution::from_config(cfg)?)
    } else {
        None
    };
    let rho0 = thermal_state(spec.nbar0, spec.cutoff)?;
    let (initial, s0) = pn_table(&rho0, sol.as_ref(), 0.0)?;
    let (last, s1) = pn_table(final_state, sol.as_ref(), t_end)?;
    Ok((
        vec![
            OutputFile {
                name: "pn.csv".into(),
                contents: last,
            },
            OutputFile {
                name: "pn_initial.csv".into(),
                contents: initial,
            },
        ],
        json!({ "final": s1, "initial": s0 }),
    ))
}

fn wigner_table(spec: &ScenarioSpec, rho: &DensityMatrix) -> Result<(String, Value), CliError> {
    let e = spec.wigner_extent;
    let n = spec.wigner_points;
    let grid = rectangular_grid((-e, e), (-e, e), n, n);
    let w = wigner(rho, &grid)?;
    let cell = (2.0 * e / (n - 1) as f64).powi(2);
    let (peak, wmax) = w
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let text = csv(
        &["re_alpha", "im_alpha", "w"],
        grid.iter().zip(&w).map(|(z, &v)| vec![z.re, z.im, v]),
    );
    let summary = json!({
        "integral": num(w.iter().sum::<f64>() * cell),
        "max": num(wmax),
        "min": num(w.iter().copied().fold(f64::INFINITY, f64::min)),
        "peak_re_alpha": num(grid[peak].re),
        "peak_im_alpha": num(grid[peak].im),
    });
    Ok((text, summary))
}

fn wigner_outputs(
    spec: &ScenarioSpec,
    final_state: &DensityMatrix,
) -> Result<(Vec<OutputFile>, Value), CliError> {
    let rho0 = thermal_state(spec.nbar0, spec.cutoff)?;
    let (initial, s0) = wigner_table(spec, &rho0)?;
    let (last, s1) = wigner_table(spec, final_state)?;
    Ok((
        vec![
            OutputFile {
                name: "wigner.csv".into(),
                contents: last,
            },
            OutputFile {
                name: "wigner_initial.csv".into(),
                contents: initial,
            },
        ],
        json!({ "final": s1, "initial": s0 }),
    ))
}

/// Closed-form steady state and linewidth against pump rate.
type Sections = Vec<(String, Value)>;

fn sweep_outputs(
    spec: &ScenarioSpec,
    cfg: &MaserConfig,
) -> Result<(Vec<OutputFile>, Sections), CliError> {
    let r0 = cfg.injection_rate();
    let points = spec
        .pump_sweep
        .iter()
        .map(|&f| {
            let sol = ClosedFormSolution::new(cfg.lambda(), cfg.kappa, cfg.nbar0, f * r0)?;
            Ok((f, f * r0, sol.steady_state_mean(), sol.linewidth()?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    if spec.wants(Output::PumpSweep) {
        files.push(OutputFile {
            name: "pump_sweep.csv".into(),
            contents: csv(
                &["pump_factor", "r", "r_squared", "n_ss_analytic"],
                points.iter().map(|&(f, r, n, _)| vec![f, r, r * r, n]),
            ),
        });
        let increasing = points
            .windows(2)
            .all(|w| w[1].0 <= w[0].0 || w[1].2 > w[0].2);
        summary.push((
            "pump_sweep".into(),
            json!({ "points": points.len(), "n_ss_increasing": increasing }),
        ));
    }
    if spec.wants(Output::LinewidthSweep) {
        files.push(OutputFile {
            name: "linewidth_sweep.csv".into(),
            contents: csv(
                &[
                    "pump_factor",
                    "r",
                    "r_squared",
                    "n_ss_analytic",
                    "linewidth",
                ],
                points.iter().map(|&(f, r, n, d)| vec![f, r, r * r, n, d]),
            ),
        });
        let decreasing = points
            .windows(2)
            .all(|w| w[1].0 <= w[0].0 || w[1].3 < w[0].3);
        summary.push((
            "linewidth_sweep".into(),
            json!({ "points": points.len(), "strictly_decreasing": decreasing }),
        ));
    }
    Ok((files, summary))
}
