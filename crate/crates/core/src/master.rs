//! Coarse-grained maser master equation
//! `ρ̇ = r(M - 1)ρ - (rp/2)(M - 1)²ρ + 𝓛ρ`.
//!
//! `M` is the per-spin gain map expressed in the frame co-rotating with the
//! oscillator. This is exact when a full cycle `τ + Δt` is a whole number of
//! oscillator periods; otherwise successive spins meet the oscillator at
//! drifting phases and a warning is logged.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::GainMap;
use crate::config::MaserConfig;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, StateDiagnostics};
use crate::linalg::{self, CMatrix};
use crate::lindblad::ThermalBath;
use crate::observables;
use crate::ode::{self, OdeOptions, OdeStats};

/// Number of samples in the default output grid.
pub const DEFAULT_SAMPLES: usize = 400;

/// Prepared right-hand side of the master equation.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    gain: GainMap,
    bath: ThermalBath,
    rate: f64,
    pump_p: f64,
}

impl MasterEquation {
    pub fn new(config: &MaserConfig) -> Result<Self> {
        config.validate()?;
        if !config.is_phase_locked() {
            log::warn!(
                "cycle tau + delta_t = {:.6} is not a multiple of 2 pi; the coarse-grained gain ignores the phase slip between spins",
                config.cycle()
            );
        }
        Ok(Self {
            gain: config.channel.prepare(config.cutoff)?.into_rotating_frame(),
            bath: ThermalBath::new(config.kappa, config.nbar0)?,
            rate: config.injection_rate(),
            pump_p: config.pump_p,
        })
    }

    pub fn dim(&self) -> usize {
        self.gain.dim()
    }

    pub fn gain(&self) -> &GainMap {
        &self.gain
    }

    pub fn rhs(&self, rho: &CMatrix) -> Result<CMatrix> {
        let (m1, _) = self.gain.apply_matrix(rho)?;
        let delta = &m1 - rho;
        let mut out = &delta * Complex64::from(self.rate);
        if self.pump_p > 0.0 {
            // (M - 1)²ρ = M(Mρ) - 2Mρ + ρ.
            let (m2, _) = self.gain.apply_matrix(&m1)?;
            let second = m2 - &m1 * Complex64::from(2.0) + rho;
            out -= second * Complex64::from(0.5 * self.rate * self.pump_p);
        }
        out += self.bath.apply(rho);
        Ok(out)
    }
}

/// Time derivative of `rho` under the master equation of `config`.
pub fn maser_rhs(rho: &DensityMatrix, config: &MaserConfig) -> Result<CMatrix> {
    let me = MasterEquation::new(config)?;
    if me.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(me.dim(), rho.dim()));
    }
    me.rhs(rho.matrix())
}

/// Sampled trajectory of a simulation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub mean_phonons: Vec<f64>,
    /// `NaN` where the mean occupancy vanishes.
    pub g2_zero: Vec<f64>,
    pub trace_drift: Vec<f64>,
    #[serde(skip)]
    pub diagnostics: Vec<StateDiagnostics>,
    #[serde(skip)]
    pub snapshots: Vec<(f64, DensityMatrix)>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Record one sample. The state is rescaled to unit trace first; `drift`
    /// is the trace error before rescaling.
    pub(crate) fn record(&mut self, t: f64, rho: &CMatrix, drift: f64) -> Result<DensityMatrix> {
        let rescaled = linalg::hermitize(rho).unscale(linalg::trace(rho).re);
        let diag = StateDiagnostics::of(&rescaled);
        if !diag.is_valid() {
            return Err(Error::InvalidState(format!(
                "state at t = {t:e} violates invariants: {diag:?}"
            )));
        }
        self.times.push(t);
        self.mean_phonons
            .push(observables::mean_phonons_matrix(&rescaled)?);
        self.g2_zero
            .push(observables::g2_zero_matrix(&rescaled).unwrap_or(f64::NAN));
        self.trace_drift.push(drift);
        self.diagnostics.push(diag);
        Ok(DensityMatrix::from_trusted(rescaled))
    }

    pub fn last_mean(&self) -> Option<f64> {
        self.mean_phonons.last().copied()
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.snapshots.last().map(|(_, r)| r)
    }

    pub fn worst_diagnostics(&self) -> StateDiagnostics {
        self.diagnostics.iter().fold(
            StateDiagnostics {
                trace_error: 0.0,
                hermiticity_defect: 0.0,
                min_eigenvalue: f64::INFINITY,
            },
            |acc, d| StateDiagnostics {
                trace_error: acc.trace_error.max(d.trace_error),
                hermiticity_defect: acc.hermiticity_defect.max(d.hermiticity_defect),
                min_eigenvalue: acc.min_eigenvalue.min(d.min_eigenvalue),
            },
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct IntegrationOptions {
    pub ode: OdeOptions,
    /// Grid times at which the full state is kept. The final sample is
    /// always kept.
    pub snapshot_times: Vec<f64>,
}

/// Solution of [`integrate_ode`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub series: TimeSeries,
    pub stats: OdeStats,
}

pub fn integrate_ode(
    config: &MaserConfig,
    rho0: &DensityMatrix,
    t_end: f64,
    output_grid: &[f64],
) -> Result<Trajectory> {
    integrate_ode_with(
        config,
        rho0,
        t_end,
        output_grid,
        &IntegrationOptions::default(),
    )
}

pub fn integrate_ode_with(
    config: &MaserConfig,
    rho0: &DensityMatrix,
    t_end: f64,
    output_grid: &[f64],
    options: &IntegrationOptions,
) -> Result<Trajectory> {
    let me = MasterEquation::new(config)?;
    if me.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch(me.dim(), rho0.dim()));
    }
    let grid: Vec<f64> = if output_grid.is_empty() {
        ode::log_grid(t_end, DEFAULT_SAMPLES, 4.0)
    } else {
        output_grid.to_vec()
    };
    let last = grid.len().saturating_sub(1);
    let mut series = TimeSeries::default();
    let mut index = 0usize;
    let stats = ode::integrate(
        |_, y| me.rhs(y),
        rho0.matrix().clone(),
        t_end,
        &grid,
        &options.ode,
        |t, y, drift| {
            let state = series.record(t, y, drift)?;
            if index == last || options.snapshot_times.iter().any(|&s| s == grid[index]) {
                series.snapshots.push((t, state));
            }
            index += 1;
            Ok(())
        },
    )?;
    log::info!(
        "integrated to t = {t_end:e}: {} steps accepted, {} rejected, {} renormalizations, max drift {:e}",
        stats.accepted,
        stats.rejected,
        stats.renormalizations,
        stats.max_trace_drift
    );
    Ok(Trajectory { series, stats })
}
