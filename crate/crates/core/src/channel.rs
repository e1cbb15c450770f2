//! Per-spin gain maps built from the factored interaction unitary
//! `U(τ) = exp[λσ_z(η b† - η* b)] exp(-i b†b τ)` with `η = 1 - e^{-iτ}`.
//!
//! For a spin prepared in `|i⟩` and read out in `|f⟩`, the conditioned
//! oscillator operator is `K_f = Σ_s ⟨f|s⟩⟨s|i⟩ D(sλη) R(τ)` with `s = ±1`
//! for `|↑⟩`/`|↓⟩` and `R(τ) = exp(-i b†b τ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix};
use crate::linalg::{self, CMatrix};
use crate::spin::{spin_overlap_probability, SpinVector};

/// Smallest conditioned trace accepted as a successful post-selection.
const MIN_SUCCESS_TRACE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelMode {
    HeraldedPostSelect,
    PostSelectWithFailures,
    SpinTrace,
}

/// How the failed read-outs are mixed back in for
/// [`ChannelMode::PostSelectWithFailures`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum FailureWeighting {
    /// Apply the weighted effect `P_S|f⟩⟨f| + (1-P_S)|f⊥⟩⟨f⊥|` to the spin and
    /// renormalize the oscillator state once.
    #[default]
    Projector,
    /// Mix the separately normalized branches with fixed weights `P_S` and
    /// `1 - P_S`.
    FixedProbability,
    /// Mix the branches with their state-dependent Born probabilities. This
    /// reproduces spin tracing exactly.
    BornRule,
}

/// Sign of σ_z on a branch: `|↑⟩ ↦ +1`, `|↓⟩ ↦ -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Up,
    Down,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Up => 1.0,
            Branch::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainChannel {
    mode: ChannelMode,
    pre: SpinVector,
    post: Option<SpinVector>,
    tau: f64,
    lambda: f64,
    failure_weighting: FailureWeighting,
}

impl GainChannel {
    fn validated(
        mode: ChannelMode,
        pre: SpinVector,
        post: Option<SpinVector>,
        tau: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau must be > 0, got {tau}"
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(Self {
            mode,
            pre,
            post,
            tau,
            lambda,
            failure_weighting: FailureWeighting::default(),
        })
    }

    pub fn heralded(pre: SpinVector, post: SpinVector, tau: f64, lambda: f64) -> Result<Self> {
        Self::validated(
            ChannelMode::HeraldedPostSelect,
            pre,
            Some(post),
            tau,
            lambda,
        )
    }

    pub fn with_failures(pre: SpinVector, post: SpinVector, tau: f64, lambda: f64) -> Result<Self> {
        Self::validated(
            ChannelMode::PostSelectWithFailures,
            pre,
            Some(post),
            tau,
            lambda,
        )
    }

    pub fn spin_trace(pre: SpinVector, tau: f64, lambda: f64) -> Result<Self> {
        Self::validated(ChannelMode::SpinTrace, pre, None, tau, lambda)
    }

    pub fn with_failure_weighting(mut self, weighting: FailureWeighting) -> Self {
        self.failure_weighting = weighting;
        self
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn pre(&self) -> &SpinVector {
        &self.pre
    }

    pub fn post(&self) -> Option<&SpinVector> {
        self.post.as_ref()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn failure_weighting(&self) -> FailureWeighting {
        self.failure_weighting
    }

    /// Spin-only success probability `P_S`; 1 for spin tracing.
    pub fn success_probability(&self) -> f64 {
        match &self.post {
            Some(post) => spin_overlap_probability(&self.pre, post),
            None => 1.0,
        }
    }

    /// True when the map does not depend on the state through a
    /// normalization, so that it is linear in ρ.
    pub fn is_linear(&self) -> bool {
        match self.mode {
            ChannelMode::SpinTrace => true,
            ChannelMode::HeraldedPostSelect => {
                // A single surviving branch makes the success trace constant.
                let post = self
                    .post
                    .as_ref()
                    .expect("heralded channel has a post state");
                self.pre.is_sz_eigenstate() || post.is_sz_eigenstate()
            }
            ChannelMode::PostSelectWithFailures => {
                self.failure_weighting == FailureWeighting::BornRule || self.pre.is_sz_eigenstate()
            }
        }
    }

    /// Trace-preserving Kraus set for the linear cases: both σ_z branches
    /// weighted by the pre-state populations when the spin is traced out,
    /// or the single surviving branch otherwise.
    fn linear_kraus(
        &self,
        d_up: &CMatrix,
        d_down: &CMatrix,
        phases: &[Complex64],
    ) -> Option<Vec<CMatrix>> {
        if !self.is_linear() {
            return None;
        }
        let dim = phases.len();
        let branch =
            |d: &CMatrix, amp: f64| CMatrix::from_fn(dim, dim, |i, j| d[(i, j)] * phases[j] * amp);
        let pu = self.pre.up().norm();
        let pd = self.pre.down().norm();
        let born = matches!(self.mode, ChannelMode::SpinTrace)
            || (self.mode == ChannelMode::PostSelectWithFailures
                && self.failure_weighting == FailureWeighting::BornRule);
        if born {
            return Some(vec![branch(d_up, pu), branch(d_down, pd)]);
        }
        let up_survives = if self.pre.is_sz_eigenstate() {
            pu > pd
        } else {
            let post = self
                .post
                .as_ref()
                .expect("post-selected channel has a post state");
            post.up().norm() > post.down().norm()
        };
        Some(vec![if up_survives {
            branch(d_up, 1.0)
        } else {
            branch(d_down, 1.0)
        }])
    }

    /// Build the Kraus operators at Fock dimension `dim` (laboratory frame).
    pub fn prepare(&self, dim: usize) -> Result<GainMap> {
        let alpha = fock::eta(self.tau) * self.lambda;
        let d_up = fock::displacement(alpha, dim)?.into_matrix();
        let d_down = fock::displacement(-alpha, dim)?.into_matrix();
        let phases = fock::rotation_phases(self.tau, dim);
        let kraus_for = |post: &SpinVector| -> CMatrix {
            let cu = post.up().conj() * self.pre.up();
            let cd = post.down().conj() * self.pre.down();
            let k = &d_up * cu + &d_down * cd;
            // Right-multiply by the diagonal rotation.
            CMatrix::from_fn(dim, dim, |i, j| k[(i, j)] * phases[j])
        };
        let kind = match self.mode {
            ChannelMode::HeraldedPostSelect => {
                let post = self
                    .post
                    .as_ref()
                    .expect("heralded channel has a post state");
                MapKind::Heralded {
                    success: kraus_for(post),
                }
            }
            ChannelMode::PostSelectWithFailures => {
                let post = self
                    .post
                    .as_ref()
                    .expect("failure channel has a post state");
                MapKind::Failures {
                    success: kraus_for(post),
                    failure: kraus_for(&post.orthogonal()),
                    p_s: self.success_probability(),
                    weighting: self.failure_weighting,
                }
            }
            ChannelMode::SpinTrace => MapKind::Trace {
                up: kraus_for(&SpinVector::spin_up()),
                down: kraus_for(&SpinVector::spin_down()),
            },
        };
        Ok(GainMap {
            kind,
            linear: self.linear_kraus(&d_up, &d_down, &phases),
            dim,
            tau: self.tau,
        })
    }
}

#[derive(Debug, Clone)]
enum MapKind {
    Heralded {
        success: CMatrix,
    },
    Failures {
        success: CMatrix,
        failure: CMatrix,
        p_s: f64,
        weighting: FailureWeighting,
    },
    Trace {
        up: CMatrix,
        down: CMatrix,
    },
}

/// One measurement outcome: probability weight used by the deterministic
/// mixture and the normalized conditioned state.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub weight: f64,
    pub state: CMatrix,
    pub success: bool,
}

/// Output of a single gain application.
#[derive(Debug, Clone)]
pub struct GainOutput {
    pub rho: DensityMatrix,
    pub success_weight: f64,
}

/// A [`GainChannel`] with its Kraus operators built at a fixed dimension.
#[derive(Debug, Clone)]
pub struct GainMap {
    kind: MapKind,
    linear: Option<Vec<CMatrix>>,
    dim: usize,
    tau: f64,
}

fn sandwich(k: &CMatrix, rho: &CMatrix) -> CMatrix {
    k * rho * k.adjoint()
}

fn real_trace(m: &CMatrix) -> f64 {
    linalg::trace(m).re
}

fn normalized(m: CMatrix, what: f64) -> Result<CMatrix> {
    if !(what > MIN_SUCCESS_TRACE) || !what.is_finite() {
        return Err(Error::DegeneratePostSelection(what));
    }
    Ok(m.unscale(what))
}

impl GainMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Express the map in the frame co-rotating with the oscillator, where
    /// the free rotation accumulated during the interaction is removed:
    /// every Kraus operator `K` becomes `R(τ)† K`.
    pub fn into_rotating_frame(self) -> Self {
        let back: Vec<Complex64> = fock::rotation_phases(-self.tau, self.dim);
        let left = |k: CMatrix| CMatrix::from_fn(k.nrows(), k.ncols(), |i, j| back[i] * k[(i, j)]);
        let kind = match self.kind {
            MapKind::Heralded { success } => MapKind::Heralded {
                success: left(success),
            },
            MapKind::Failures {
                success,
                failure,
                p_s,
                weighting,
            } => MapKind::Failures {
                success: left(success),
                failure: left(failure),
                p_s,
                weighting,
            },
            MapKind::Trace { up, down } => MapKind::Trace {
                up: left(up),
                down: left(down),
            },
        };
        let linear = self.linear.map(|ks| ks.into_iter().map(left).collect());
        Self {
            kind,
            linear,
            ..self
        }
    }

    /// Kraus operators of the map when it is linear in ρ.
    pub fn linear_kraus(&self) -> Option<&[CMatrix]> {
        self.linear.as_deref()
    }

    /// Measurement outcomes with the weights of the deterministic mixture.
    pub fn outcomes(&self, rho: &CMatrix) -> Result<Vec<Outcome>> {
        self.check_dim(rho)?;
        match &self.kind {
            MapKind::Heralded { success } => {
                let m = sandwich(success, rho);
                let tr = real_trace(&m);
                Ok(vec![Outcome {
                    weight: 1.0,
                    state: normalized(m, tr)?,
                    success: true,
                }])
            }
            MapKind::Trace { up, down } => {
                let mu = sandwich(up, rho);
                let md = sandwich(down, rho);
                let (tu, td) = (real_trace(&mu), real_trace(&md));
                let total = tu + td;
                let mut out = Vec::with_capacity(2);
                for (m, t) in [(mu, tu), (md, td)] {
                    if t > MIN_SUCCESS_TRACE {
                        out.push(Outcome {
                            weight: t / total,
                            state: m.unscale(t),
                            success: true,
                        });
                    }
                }
                if out.is_empty() {
                    return Err(Error::DegeneratePostSelection(total));
                }
                Ok(out)
            }
            MapKind::Failures {
                success,
                failure,
                p_s,
                weighting,
            } => {
                let ms = sandwich(success, rho);
                let mf = sandwich(failure, rho);
                let (ts, tf) = (real_trace(&ms), real_trace(&mf));
                let (ws, wf) = match weighting {
                    FailureWeighting::Projector => {
                        let z = p_s * ts + (1.0 - p_s) * tf;
                        (p_s * ts / z, (1.0 - p_s) * tf / z)
                    }
                    FailureWeighting::FixedProbability => (*p_s, 1.0 - p_s),
                    FailureWeighting::BornRule => (ts / (ts + tf), tf / (ts + tf)),
                };
                let mut out = Vec::with_capacity(2);
                for (m, t, w, success) in [(ms, ts, ws, true), (mf, tf, wf, false)] {
                    if w > 0.0 {
                        out.push(Outcome {
                            weight: w,
                            state: normalized(m, t)?,
                            success,
                        });
                    }
                }
                if out.is_empty() {
                    return Err(Error::DegeneratePostSelection(ts + tf));
                }
                Ok(out)
            }
        }
    }

    /// Apply the map to a raw matrix, returning the normalized mixture and
    /// the success weight. No state validation is performed.
    pub fn apply_matrix(&self, rho: &CMatrix) -> Result<(CMatrix, f64)> {
        match &self.kind {
            MapKind::Heralded { success } => {
                self.check_dim(rho)?;
                let m = sandwich(success, rho);
                let tr = real_trace(&m);
                Ok((normalized(m, tr)?, tr))
            }
            MapKind::Trace { up, down } => {
                self.check_dim(rho)?;
                let m = sandwich(up, rho) + sandwich(down, rho);
                let tr = real_trace(&m);
                Ok((normalized(m, tr)?, 1.0))
            }
            MapKind::Failures { p_s, .. } => {
                let mut acc = CMatrix::zeros(self.dim, self.dim);
                for o in self.outcomes(rho)? {
                    acc += o.state * Complex64::from(o.weight);
                }
                Ok((acc, *p_s))
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<GainOutput> {
        let (m, success_weight) = self.apply_matrix(rho.matrix())?;
        Ok(GainOutput {
            rho: DensityMatrix::from_unnormalized(m)?,
            success_weight,
        })
    }

    fn check_dim(&self, rho: &CMatrix) -> Result<()> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, rho.nrows()));
        }
        Ok(())
    }
}

/// `D(sλη) R(τ) ρ R(τ)† D(-sλη)` for one σ_z branch.
pub fn conditioned_branch_map(
    branch: Branch,
    tau: f64,
    lambda: f64,
    rho: &DensityMatrix,
) -> Result<CMatrix> {
    let dim = rho.dim();
    let alpha = fock::eta(tau) * (lambda * branch.sign());
    let d = fock::displacement(alpha, dim)?;
    let rotated = linalg::conjugate_by_diagonal(&fock::rotation_phases(tau, dim), rho.matrix());
    Ok(d.matrix() * rotated * d.matrix().adjoint())
}

/// Apply one spin's gain map to the oscillator state.
pub fn gain_map(channel: &GainChannel, rho: &DensityMatrix) -> Result<GainOutput> {
    channel.prepare(rho.dim())?.apply(rho)
}
