use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1e-14;

/// Normalized spin state `up|↑⟩ + down|↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinVector {
    up: Complex64,
    down: Complex64,
    input_norm: f64,
}

impl SpinVector {
    /// Normalizes the given amplitudes; the original norm is kept in
    /// [`SpinVector::input_norm`].
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "spin amplitudes ({up}, {down}) cannot be normalized"
            )));
        }
        Ok(Self {
            up: up / norm,
            down: down / norm,
            input_norm: norm,
        })
    }

    pub fn real(up: f64, down: f64) -> Result<Self> {
        Self::new(Complex64::from(up), Complex64::from(down))
    }

    /// `cos θ|↑⟩ + sin θ|↓⟩`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            up: Complex64::from(theta.cos()),
            down: Complex64::from(theta.sin()),
            input_norm: 1.0,
        }
    }

    pub fn spin_up() -> Self {
        Self::from_angle(0.0)
    }

    pub fn spin_down() -> Self {
        Self::from_angle(std::f64::consts::FRAC_PI_2)
    }

    /// `(|↑⟩ + |↓⟩)/√2`.
    pub fn plus() -> Self {
        Self::from_angle(std::f64::consts::FRAC_PI_4)
    }

    pub fn up(&self) -> Complex64 {
        self.up
    }

    pub fn down(&self) -> Complex64 {
        self.down
    }

    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    /// The state orthogonal to `self`, `-down*|↑⟩ + up*|↓⟩`.
    pub fn orthogonal(&self) -> Self {
        Self {
            up: -self.down.conj(),
            down: self.up.conj(),
            input_norm: 1.0,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    /// True when the state is (numerically) an eigenstate of σ_z.
    pub fn is_sz_eigenstate(&self) -> bool {
        self.up.norm() < EIGEN_EPS || self.down.norm() < EIGEN_EPS
    }
}

/// Probability `|⟨post|pre⟩|²` of a successful post-selection on the spin alone.
pub fn spin_overlap_probability(pre: &SpinVector, post: &SpinVector) -> f64 {
    post.inner(pre).norm_sqr()
}
