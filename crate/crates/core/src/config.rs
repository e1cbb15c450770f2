//! Scenario parameters for the maser dynamics.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::channel::GainChannel;
use crate::error::{Error, Result};
use crate::fock::DEFAULT_CUTOFF;

/// Which interval sets the injection rate `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RateConvention {
    /// `r = 1/Δt`, the gap between consecutive interactions.
    #[default]
    Gap,
    /// `r = 1/(τ + Δt)`, one spin per full cycle.
    FullCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaserConfig {
    pub channel: GainChannel,
    pub kappa: f64,
    pub nbar0: f64,
    pub delta_t: f64,
    pub pump_p: f64,
    pub cutoff: usize,
    pub rate_convention: RateConvention,
    pub omega_m_hz: Option<f64>,
    pub lambda0_hz: Option<f64>,
}

impl MaserConfig {
    pub fn new(channel: GainChannel, kappa: f64, nbar0: f64, delta_t: f64) -> Result<Self> {
        let cfg = Self {
            channel,
            kappa,
            nbar0,
            delta_t,
            pump_p: 0.0,
            cutoff: DEFAULT_CUTOFF,
            rate_convention: RateConvention::Gap,
            omega_m_hz: None,
            lambda0_hz: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_pump_p(mut self, p: f64) -> Result<Self> {
        self.pump_p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rate_convention(mut self, rc: RateConvention) -> Self {
        self.rate_convention = rc;
        self
    }

    pub fn with_channel(mut self, channel: GainChannel) -> Result<Self> {
        self.channel = channel;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let tau = self.channel.tau();
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa must be > 0, got {}",
                self.kappa
            )));
        }
        if !(self.nbar0 >= 0.0) || !self.nbar0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nbar0 must be >= 0, got {}",
                self.nbar0
            )));
        }
        if !(0.0..=1.0).contains(&self.pump_p) {
            return Err(Error::InvalidParameter(format!(
                "pump_p must lie in [0, 1], got {}",
                self.pump_p
            )));
        }
        if !self.delta_t.is_finite() || self.delta_t < 10.0 * tau {
            return Err(Error::InvalidParameter(format!(
                "delta_t = {} must be at least 10 tau = {}",
                self.delta_t,
                10.0 * tau
            )));
        }
        if self.delta_t < 30.0 * tau {
            log::warn!(
                "delta_t = {:.3} is below 30 tau; coarse graining may be inaccurate",
                self.delta_t
            );
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidDimension(self.cutoff));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.channel.tau()
    }

    pub fn lambda(&self) -> f64 {
        self.channel.lambda()
    }

    /// Duration of one interaction plus the following gap.
    pub fn cycle(&self) -> f64 {
        self.tau() + self.delta_t
    }

    pub fn injection_rate(&self) -> f64 {
        match self.rate_convention {
            RateConvention::Gap => 1.0 / self.delta_t,
            RateConvention::FullCycle => 1.0 / self.cycle(),
        }
    }

    /// True when a full cycle is a whole number of oscillator periods, so
    /// that every spin meets the oscillator at the same phase.
    pub fn is_phase_locked(&self) -> bool {
        let turns = self.cycle() / TAU;
        (turns - turns.round()).abs() < 1e-9 * turns.max(1.0)
    }

    /// `n̄₀ + 16λ²r²/κ²`.
    pub fn eigenstate_steady_state(&self) -> f64 {
        let b = 4.0 * self.lambda() * self.injection_rate() / self.kappa;
        self.nbar0 + b * b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinVector;
    use std::f64::consts::PI;

    fn channel() -> GainChannel {
        GainChannel::heralded(SpinVector::plus(), SpinVector::spin_down(), PI, 0.001).unwrap()
    }

    #[test]
    fn validation() {
        assert!(MaserConfig::new(channel(), 1e-5, 0.1, 41.0 * PI).is_ok());
        assert!(MaserConfig::new(channel(), 0.0, 0.1, 41.0 * PI).is_err());
        assert!(MaserConfig::new(channel(), 1e-5, -0.1, 41.0 * PI).is_err());
        assert!(MaserConfig::new(channel(), 1e-5, 0.1, 9.0 * PI).is_err());
        let c = MaserConfig::new(channel(), 1e-5, 0.1, 41.0 * PI).unwrap();
        assert!(c.clone().with_pump_p(1.5).is_err());
        assert!(c.clone().with_pump_p(1.0).is_ok());
        assert!(c.with_cutoff(1).is_err());
    }

    #[test]
    fn rates_and_locking() {
        let c = MaserConfig::new(channel(), 1e-5, 0.1, 41.0 * PI).unwrap();
        assert!((c.injection_rate() * 41.0 * PI - 1.0).abs() < 1e-15);
        assert!(c.is_phase_locked());
        assert!((c.eigenstate_steady_state() - 9.744).abs() < 5e-4);
        let c = c.with_rate_convention(RateConvention::FullCycle);
        assert!((c.injection_rate() * 42.0 * PI - 1.0).abs() < 1e-15);
        let c = MaserConfig::new(channel(), 1e-5, 0.1, 40.0 * PI).unwrap();
        assert!(!c.is_phase_locked());
    }
}
