//! Spin-by-spin injection: an instantaneous gain kick followed by free
//! evolution with thermal relaxation over `Δt`, in the laboratory frame.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::MaserConfig;
use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix};
use crate::linalg::{self, CMatrix};
use crate::lindblad::ThermalBath;
use crate::master::TimeSeries;
use crate::ode::OdeOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectionMode {
    /// Apply the deterministic outcome mixture for every spin.
    Expected,
    /// Draw one measurement outcome per spin from a seeded generator.
    Sampled(u64),
}

#[derive(Debug, Clone)]
pub struct DiscreteRun {
    /// Sample `k` is taken after `k` spins and their relaxation intervals.
    pub series: TimeSeries,
    /// Spins whose read-out matched the post-selected state.
    pub successes: usize,
}

/// Inject `n_spins` spins one after another, starting from `rho0`.
pub fn run_discrete(
    config: &MaserConfig,
    rho0: &DensityMatrix,
    n_spins: usize,
    mode: InjectionMode,
) -> Result<DiscreteRun> {
    config.validate()?;
    let dim = rho0.dim();
    if config.cutoff != dim {
        return Err(Error::DimensionMismatch(config.cutoff, dim));
    }
    let gain = config.channel.prepare(dim)?;
    let bath = ThermalBath::new(config.kappa, config.nbar0)?;
    let free = fock::rotation_phases(config.delta_t, dim);
    let opts = OdeOptions::default();
    let mut rng = match mode {
        InjectionMode::Sampled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        InjectionMode::Expected => None,
    };

    let mut series = TimeSeries::default();
    let mut rho: CMatrix = rho0.matrix().clone();
    let mut successes = 0;
    let state = series.record(0.0, &rho, 0.0)?;
    series.snapshots.push((0.0, state));
    for k in 1..=n_spins {
        rho = match rng.as_mut() {
            None => {
                let (next, _) = gain.apply_matrix(&rho)?;
                successes += 1;
                next
            }
            Some(rng) => {
                let outcomes = gain.outcomes(&rho)?;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = outcomes.len() - 1;
                for (i, o) in outcomes.iter().enumerate() {
                    acc += o.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let o = outcomes.into_iter().nth(pick).expect("non-empty outcomes");
                if o.success {
                    successes += 1;
                }
                o.state
            }
        };
        let rotated = linalg::conjugate_by_diagonal(&free, &rho);
        rho = bath.relax(&rotated, config.delta_t, &opts)?;
        let drift = (linalg::trace(&rho).re - 1.0).abs();
        let state = series.record(k as f64 * config.cycle(), &rho, drift)?;
        rho = state.matrix().clone();
        if k == n_spins {
            series.snapshots.push((k as f64 * config.cycle(), state));
        }
    }
    Ok(DiscreteRun { series, successes })
}

/// Number of spins after which the series stays within `tolerance`
/// (relative) of its final value.
pub fn spins_to_steady_state(means: &[f64], tolerance: f64) -> Option<usize> {
    let last = *means.last()?;
    let band = tolerance * last.abs();
    let mut k = means.len();
    while k > 0 && (means[k - 1] - last).abs() <= band {
        k -= 1;
    }
    Some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GainChannel;
    use crate::fock::thermal_state;
    use crate::master::integrate_ode;
    use crate::spin::SpinVector;
    use std::f64::consts::PI;

    fn config(pre: SpinVector, kappa: f64) -> MaserConfig {
        let ch = GainChannel::spin_trace(pre, PI, 0.06).unwrap();
        MaserConfig::new(ch, kappa, 0.1, 35.0 * PI)
            .unwrap()
            .with_cutoff(20)
            .unwrap()
    }

    #[test]
    fn zero_spins_returns_initial_state() {
        let cfg = config(SpinVector::spin_up(), 0.003);
        let rho = thermal_state(0.1, 20).unwrap();
        let run = run_discrete(&cfg, &rho, 0, InjectionMode::Expected).unwrap();
        assert_eq!(run.series.len(), 1);
        assert!((run.series.mean_phonons[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_kicks_climb_towards_closed_form() {
        let cfg = config(SpinVector::spin_up(), 0.003451);
        let rho = thermal_state(0.1, 20).unwrap();
        let run = run_discrete(&cfg, &rho, 60, InjectionMode::Expected).unwrap();
        let n = &run.series.mean_phonons;
        assert!(n.windows(2).all(|w| w[1] > w[0]));
        assert!((n[60] - 0.43).abs() < 0.03, "{}", n[60]);
    }

    #[test]
    fn sampled_ensemble_matches_expected() {
        let cfg = config(SpinVector::real(0.8, 0.6).unwrap(), 0.003);
        let rho = thermal_state(0.1, 20).unwrap();
        let spins = 6;
        let expected = run_discrete(&cfg, &rho, spins, InjectionMode::Expected).unwrap();
        let finals: Vec<f64> = (0..200u64)
            .map(|s| {
                run_discrete(&cfg, &rho, spins, InjectionMode::Sampled(s))
                    .unwrap()
                    .series
                    .last_mean()
                    .unwrap()
            })
            .collect();
        let m = finals.iter().sum::<f64>() / finals.len() as f64;
        let var = finals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (finals.len() - 1) as f64;
        let se = (var / finals.len() as f64).sqrt();
        let target = expected.series.last_mean().unwrap();
        assert!((m - target).abs() <= 2.0 * se, "{m} vs {target} (se {se})");
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let cfg = config(SpinVector::plus(), 0.003);
        let rho = thermal_state(0.1, 20).unwrap();
        let a = run_discrete(&cfg, &rho, 5, InjectionMode::Sampled(9)).unwrap();
        let b = run_discrete(&cfg, &rho, 5, InjectionMode::Sampled(9)).unwrap();
        assert_eq!(a.series.mean_phonons, b.series.mean_phonons);
    }

    #[test]
    fn coarse_graining_matches_master_equation() {
        let ch =
            GainChannel::heralded(SpinVector::plus(), SpinVector::spin_down(), PI, 0.001).unwrap();
        let cfg = MaserConfig::new(ch, 1e-5, 0.1, 41.0 * PI).unwrap();
        let rho = thermal_state(0.1, 26).unwrap();
        let spins = 3000;
        let run = run_discrete(&cfg, &rho, spins, InjectionMode::Expected).unwrap();
        // The kicks are instantaneous, so k spins correspond to k·Δt of
        // master-equation time at r = 1/Δt.
        let grid: Vec<f64> = (1..=6)
            .map(|i| (i * spins / 6) as f64 * cfg.delta_t)
            .collect();
        let me = integrate_ode(&cfg, &rho, *grid.last().unwrap(), &grid).unwrap();
        for (i, n_me) in me.series.mean_phonons.iter().enumerate() {
            let n_d = run.series.mean_phonons[(i + 1) * spins / 6];
            assert!((n_d - n_me).abs() <= 0.03 * n_me, "{n_d} vs {n_me}");
        }
    }

    #[test]
    fn steady_state_counter() {
        assert_eq!(
            spins_to_steady_state(&[0.0, 0.5, 0.98, 1.0, 1.0], 0.05),
            Some(2)
        );
        assert_eq!(spins_to_steady_state(&[1.0], 0.05), Some(0));
        assert_eq!(spins_to_steady_state(&[], 0.05), None);
    }
}
