//! Adaptive Dormand–Prince 5(4) integration of density-matrix flows.
//!
//! For density-matrix flows the state is Hermitized after every accepted
//! step, and its trace is reset to one whenever it drifts by more than
//! [`TRACE_TOLERANCE`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::TRACE_TOLERANCE;
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps smaller than this fraction of the current time scale count as
    /// underflow.
    pub min_step: f64,
    pub max_steps: usize,
    /// Treat the state as a density matrix: Hermitize after every step and
    /// reset the trace to one when it drifts.
    pub density_matrix: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            min_step: 1e-14,
            max_steps: 5_000_000,
            density_matrix: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub renormalizations: usize,
    pub max_trace_drift: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, opts: &OdeOptions) -> f64 {
    let mut sum = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
        sum += (e.norm() / scale).powi(2);
    }
    (sum / err.len() as f64).sqrt()
}

fn rms(m: &CMatrix) -> f64 {
    (m.iter().map(|z| z.norm_sqr()).sum::<f64>() / m.len() as f64).sqrt()
}

/// Integrate `ẏ = f(t, y)` from `t = 0` to `t_end`, calling `observe` at
/// every time in `grid` (sorted, within `[0, t_end]`) with the state and the
/// trace drift seen at that sample before any renormalization.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: CMatrix,
    t_end: f64,
    grid: &[f64],
    opts: &OdeOptions,
    mut observe: O,
) -> Result<OdeStats>
where
    F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
    O: FnMut(f64, &CMatrix, f64) -> Result<()>,
{
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be > 0, got {t_end}"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|&t| t < 0.0 || t > t_end) {
        return Err(Error::InvalidParameter(
            "output grid must be sorted and inside [0, t_end]".into(),
        ));
    }
    let mut stats = OdeStats::default();
    let mut y = y0;
    let mut t = 0.0;
    let mut next = 0;
    let drift = |y: &CMatrix| (linalg::trace(y).re - 1.0).abs();
    while next < grid.len() && grid[next] <= 0.0 {
        observe(0.0, &y, drift(&y))?;
        next += 1;
    }
    if next == grid.len() {
        return Ok(stats);
    }

    // Initial step from the scale of y and f(y).
    let f0 = rhs(t, &y)?;
    let d0 = rms(&y).max(1e-300);
    let d1 = rms(&f0);
    let mut h = if d1 > 1e-300 {
        0.01 * d0 / d1
    } else {
        1e-6 * t_end
    };
    h = h.min(t_end);
    let mut first = Some(f0);

    let mut k: Vec<CMatrix> = Vec::with_capacity(7);
    let mut last_failed = false;
    while next < grid.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Stiffness { time: t, step: h });
        }
        let target = grid[next];
        let mut step = h;
        let mut hits = false;
        if t + step >= target * (1.0 - 1e-13) {
            step = target - t;
            hits = true;
        }
        if step <= opts.min_step * t.abs().max(1.0) {
            return Err(Error::Stiffness { time: t, step });
        }

        k.clear();
        k.push(match first.take() {
            Some(f) => f,
            None => rhs(t, &y)?,
        });
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    ys += kj * Complex64::from(step * a);
                }
            }
            k.push(rhs(t + C[s] * step, &ys)?);
        }
        let mut y_new = y.clone();
        let mut err = CMatrix::zeros(y.nrows(), y.ncols());
        for (j, kj) in k.iter().enumerate() {
            if j < 6 && A[6][j] != 0.0 {
                y_new += kj * Complex64::from(step * A[6][j]);
            }
            if E[j] != 0.0 {
                err += kj * Complex64::from(step * E[j]);
            }
        }
        let en = error_norm(&err, &y, &y_new, opts);
        if !en.is_finite() || !linalg::is_finite(&y_new) {
            stats.rejected += 1;
            h = step * 0.2;
            last_failed = true;
            first = Some(k.swap_remove(0));
            continue;
        }
        if en <= 1.0 {
            stats.accepted += 1;
            t = if hits { target } else { t + step };
            y = if opts.density_matrix {
                linalg::hermitize(&y_new)
            } else {
                y_new
            };
            let d = drift(&y);
            stats.max_trace_drift = stats.max_trace_drift.max(d);
            if hits {
                observe(t, &y, d)?;
                next += 1;
                while next < grid.len() && grid[next] <= t {
                    observe(t, &y, d)?;
                    next += 1;
                }
            }
            if opts.density_matrix && d > TRACE_TOLERANCE {
                let tr = linalg::trace(&y).re;
                log::debug!("trace drift {d:e} at t = {t:e}; renormalizing");
                y = y.unscale(tr);
                stats.renormalizations += 1;
            }
            let grow = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            let grow = if last_failed { grow.min(1.0) } else { grow };
            // A step clipped to a grid point says nothing about the
            // admissible size, so keep the previous proposal.
            h = if hits {
                h.max(step * grow)
            } else {
                step * grow
            };
            last_failed = false;
        } else {
            stats.rejected += 1;
            h = step * (0.9 * en.powf(-0.2)).max(0.2);
            last_failed = true;
            first = Some(k.swap_remove(0));
        }
    }
    Ok(stats)
}

/// `n` points spaced logarithmically on `(0, t_end]`, starting at
/// `t_end * 10^-decades`.
pub fn log_grid(t_end: f64, n: usize, decades: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => {
            let lo = t_end.log10() - decades;
            let hi = t_end.log10();
            let mut out: Vec<f64> = (0..n)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
                .collect();
            out[n - 1] = t_end;
            out
        }
    }
}
