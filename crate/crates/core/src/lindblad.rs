//! Thermal phonon loss and gain
//! `𝓛ρ = κ(n̄₀+1)(bρb† - ½{b†b, ρ}) + κn̄₀(b†ρb - ½{bb†, ρ})`.
//!
//! Applied elementwise with the truncated ladder operators, so the generator
//! is exactly trace-preserving on the cutoff space and the truncated thermal
//! state is its fixed point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ode::{self, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalBath {
    pub kappa: f64,
    pub nbar0: f64,
}

impl ThermalBath {
    pub fn new(kappa: f64, nbar0: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        if !(nbar0 >= 0.0) || !nbar0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nbar0 must be >= 0, got {nbar0}"
            )));
        }
        Ok(Self { kappa, nbar0 })
    }

    /// `𝓛ρ` for a square matrix of any dimension.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = rho.nrows();
        let down = self.kappa * (self.nbar0 + 1.0);
        let up = self.kappa * self.nbar0;
        // Diagonal of the truncated b b†: 1..n-1 then 0 at the edge.
        let bbd = |k: usize| if k + 1 < n { (k + 1) as f64 } else { 0.0 };
        let sq: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
        CMatrix::from_fn(n, n, |i, j| {
            let mut v = rho[(i, j)] * (-0.5 * (down * (i + j) as f64 + up * (bbd(i) + bbd(j))));
            if i + 1 < n && j + 1 < n {
                v += rho[(i + 1, j + 1)] * (down * sq[i + 1] * sq[j + 1]);
            }
            if i > 0 && j > 0 {
                v += rho[(i - 1, j - 1)] * (up * sq[i] * sq[j]);
            }
            v
        })
    }

    /// Propagate `ρ̇ = 𝓛ρ` over `duration` with the adaptive integrator.
    pub fn relax(&self, rho: &CMatrix, duration: f64, opts: &OdeOptions) -> Result<CMatrix> {
        if duration == 0.0 || self.kappa == 0.0 {
            return Ok(rho.clone());
        }
        let mut out = None;
        ode::integrate(
            |_, y| Ok(self.apply(y)),
            rho.clone(),
            duration,
            &[duration],
            opts,
            |_, y, _| {
                out = Some(y.clone());
                Ok(())
            },
        )?;
        out.ok_or_else(|| Error::Consistency("relaxation produced no sample".into()))
    }

    /// Closed-form attenuator moments after `duration`: `(⟨b⟩, ⟨b†b⟩)`.
    pub fn attenuator_moments(&self, b0: Complex64, n0: f64, duration: f64) -> (Complex64, f64) {
        let e = (-self.kappa * duration).exp();
        (
            b0 * (-0.5 * self.kappa * duration).exp(),
            n0 * e + self.nbar0 * (1.0 - e),
        )
    }
}
