//! Truncated Fock-space operator algebra and oscillator states.
//!
//! All operators live on the span of `|0⟩..|dim-1⟩`. Time is measured in
//! units of the inverse mechanical frequency, so the free rotation over a
//! time `t` is `exp(-i n t)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Default Fock cutoff.
pub const DEFAULT_CUTOFF: usize = 26;

/// Tolerance on `|Tr ρ - 1|` for a valid density matrix.
pub const TRACE_TOLERANCE: f64 = 1e-12;
/// Tolerance on the entrywise Hermiticity defect of a density matrix.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Most negative eigenvalue tolerated from truncation noise.
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

/// Dense operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
}

impl FockOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension(matrix.nrows()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(linalg::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(self.dim(), rhs.dim()));
        }
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        let ab = self.compose(rhs)?;
        let ba = rhs.compose(self)?;
        Ok(Self {
            matrix: ab.matrix - ba.matrix,
        })
    }

    /// Apply the operator to a state vector.
    pub fn apply(&self, ket: &[Complex64]) -> Result<Vec<Complex64>> {
        if ket.len() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), ket.len()));
        }
        let v = nalgebra::DVector::from_column_slice(ket);
        Ok((&self.matrix * v).iter().copied().collect())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            matrix: &self.matrix * factor,
        }
    }
}

/// Annihilation, creation and number operators of one truncated mode.
#[derive(Debug, Clone)]
pub struct LadderOperators {
    pub annihilation: FockOperator,
    pub creation: FockOperator,
    pub number: FockOperator,
}

pub fn ladder_operators(dim: usize) -> Result<LadderOperators> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let annihilation = annihilation_matrix(dim);
    let creation = annihilation.adjoint();
    let number = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    });
    Ok(LadderOperators {
        annihilation: FockOperator::new(annihilation)?,
        creation: FockOperator::new(creation)?,
        number: FockOperator::new(number)?,
    })
}

pub(crate) fn annihilation_matrix(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn matrix_exp(op: &FockOperator) -> Result<FockOperator> {
    FockOperator::new(linalg::expm(op.matrix())?)
}

/// Number of extra Fock levels used when building `D(alpha)` at `dim`.
///
/// Columns of the truncated result agree with the infinite-space operator to
/// better than 1e-12 for `|alpha| <= 3` and `dim <= 64`.
pub fn displacement_padding(alpha: Complex64, dim: usize) -> usize {
    let a = alpha.norm();
    let lower = 16.0_f64.max((4.0 * a).ceil());
    lower.max((12.0 * a + (dim as f64).sqrt()).ceil() + 4.0) as usize
}

/// `D(alpha) = exp(alpha b† - alpha* b)`, exponentiated on a padded space and
/// truncated back to `dim`.
pub fn displacement(alpha: Complex64, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::NonFinite("displacement amplitude"));
    }
    if alpha.norm_sqr() > dim as f64 / 4.0 {
        log::warn!(
            "|alpha|^2 = {:.3} exceeds dim/4 = {:.3}; edge columns of D(alpha) are unreliable",
            alpha.norm_sqr(),
            dim as f64 / 4.0
        );
    }
    displacement_quiet(alpha, dim)
}

/// [`displacement`] without the large-amplitude warning, for callers that
/// check the amplitude range themselves.
pub(crate) fn displacement_quiet(alpha: Complex64, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if alpha == ZERO {
        return FockOperator::identity(dim);
    }
    let big = dim + displacement_padding(alpha, dim);
    let a = annihilation_matrix(big);
    let generator = a.adjoint() * alpha - a * alpha.conj();
    let full = linalg::expm(&generator)?;
    FockOperator::new(full.view((0, 0), (dim, dim)).into_owned())
}

/// Matrix elements `⟨m|D(β)|n⟩` for `m, n < dim`, from
/// `√(n!/m!) β^{m-n} e^{-|β|²/2} L_n^{(m-n)}(|β|²)` for `m ≥ n` and the
/// reflected form above the diagonal. These are the elements of the
/// infinite-space operator, so no padding is involved.
pub fn displacement_elements(beta: Complex64, dim: usize) -> CMatrix {
    let x = beta.norm_sqr();
    let r = beta.norm();
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..dim).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        // Forward recurrence in k for L_k^{(a)}(x).
        let af = a as f64;
        let (mut prev, mut cur) = (0.0, 1.0);
        for k in 0..dim - a {
            let kf = k as f64;
            let mag = if a == 0 {
                (-0.5 * x).exp()
            } else if r == 0.0 {
                0.0
            } else {
                (0.5 * (ln_fact[k] - ln_fact[k + a]) + af * r.ln() - 0.5 * x).exp()
            };
            let below = Complex64::from_polar(mag * cur, af * beta.arg());
            out[(k + a, k)] = below;
            if a > 0 {
                // ⟨k|D(β)|k+a⟩ = (-1)^a conj(⟨k+a|D(β)|k⟩).
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                out[(k, k + a)] = below.conj() * sign;
            }
            let next = ((2.0 * kf + 1.0 + af - x) * cur - (kf + af) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
    }
    out
}

/// Diagonal phases `exp(-i n t)` of the free rotation.
pub fn rotation_phases(t: f64, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|n| Complex64::from_polar(1.0, -(n as f64) * t))
        .collect()
}

/// Free rotation `exp(-i b†b t)`.
pub fn rotation(t: f64, dim: usize) -> Result<FockOperator> {
    let phases = rotation_phases(t, dim);
    FockOperator::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases)))
}

/// Parity `(-1)^{b†b}`.
pub fn parity(dim: usize) -> Result<FockOperator> {
    FockOperator::new(CMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    }))
}

/// `η = 1 - exp(-iτ)`, the displacement factor accumulated during an
/// interaction of duration `tau`.
pub fn eta(tau: f64) -> Complex64 {
    ONE - Complex64::from_polar(1.0, -tau)
}

/// Invariant diagnostics of a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn of(m: &CMatrix) -> Self {
        Self {
            trace_error: (linalg::trace(m) - ONE).norm(),
            hermiticity_defect: linalg::hermiticity_defect(m),
            min_eigenvalue: linalg::min_eigenvalue(m),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.trace_error <= TRACE_TOLERANCE
            && self.hermiticity_defect <= HERMITICITY_TOLERANCE
            && self.min_eigenvalue >= EIGENVALUE_FLOOR
    }
}

/// Hermitian, unit-trace, positive semidefinite oscillator (or joint) state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validate an already normalized matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension(matrix.nrows()));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite("density matrix"));
        }
        let diag = StateDiagnostics::of(&matrix);
        if diag.trace_error > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "trace off by {:e}",
                diag.trace_error
            )));
        }
        if diag.hermiticity_defect > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {:e}",
                diag.hermiticity_defect
            )));
        }
        if diag.min_eigenvalue < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                diag.min_eigenvalue
            )));
        }
        Ok(Self { matrix })
    }

    /// Hermitize and rescale to unit trace, then validate.
    pub fn from_unnormalized(matrix: CMatrix) -> Result<Self> {
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite("density matrix"));
        }
        let m = linalg::hermitize(&matrix);
        let tr = linalg::trace(&m).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("non-positive trace {tr:e}")));
        }
        Self::new(m.unscale(tr))
    }

    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(ket.len(), ket.iter().map(|z| z / norm));
        Self::from_unnormalized(&v * v.adjoint())
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "Fock level {n} outside cutoff {dim}"
            )));
        }
        let mut ket = vec![ZERO; dim];
        ket[n] = ONE;
        Self::pure(&ket)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Coherent state `|alpha⟩` from its Poisson amplitudes, renormalized on
    /// the truncated space.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        let mut ket = Vec::with_capacity(dim);
        let mut amp = Complex64::from(1.0);
        for n in 0..dim {
            if n > 0 {
                amp = amp * alpha / (n as f64).sqrt();
            }
            ket.push(amp);
        }
        Self::pure(&ket)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics::of(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &FockOperator) -> Result<CMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        Ok(u.matrix() * &self.matrix * u.matrix().adjoint())
    }
}

/// Thermal state with geometric populations `p_n ∝ (n̄/(1+n̄))^n`,
/// renormalized on the truncated space.
pub fn thermal_state(nbar0: f64, dim: usize) -> Result<DensityMatrix> {
    if !(nbar0 >= 0.0) || !nbar0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "thermal occupancy must be finite and >= 0, got {nbar0}"
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let ratio = nbar0 / (1.0 + nbar0);
    let mut pops: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    let diag = nalgebra::DVector::from_iterator(dim, pops.into_iter().map(Complex64::from));
    DensityMatrix::new(CMatrix::from_diagonal(&diag))
}
