//! Brute-force validators that reach the same quantities by independent
//! routes: direct exponentiation of the joint spin-oscillator Hamiltonian,
//! repeated application of the finite-`K` pump map, the Fokker–Planck
//! equation itself, and the generating-function route to g²(0).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::channel::{FailureWeighting, GainChannel};
use crate::closed_form::{ClosedFormSolution, FpCoefficients};
use crate::config::MaserConfig;
use crate::error::{Error, Result};
use crate::fock::{self, thermal_state, DensityMatrix};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::observables::{mean_phonons_matrix, populations};
use crate::ode::{self, OdeOptions};
use crate::spin::SpinVector;

/// Largest Fock dimension accepted by the oracles.
pub const MAX_ORACLE_DIM: usize = 64;
/// Entrywise agreement required between the direct and factored routes.
pub const FACTORIZATION_TOLERANCE: f64 = 1e-8;
/// Extra Fock levels carried by the joint Hamiltonian.
const JOINT_PADDING: usize = 16;
/// Finite-difference step for the generating function.
pub const G2_SERIES_STEP: f64 = 1e-4;
const VERIFY_SEED: u64 = 0x5eed_2024;

/// Joint state from direct evolution, with its largest deviation from the
/// factored route.
#[derive(Debug, Clone)]
pub struct JointEvolution {
    /// Spin-major ordering: index `s·dim + n` with `s = 0` for `|↑⟩`.
    pub joint: DensityMatrix,
    pub max_deviation: f64,
}

fn spin_block(m: &CMatrix, dim: usize, s: usize, t: usize) -> CMatrix {
    m.view((s * dim, t * dim), (dim, dim)).into_owned()
}

/// Evolve `ρ ⊗ |pre⟩⟨pre|` with `exp(-iHτ)`, `H = b†b - λσ_z(b + b†)`, on a
/// padded joint space, and compare with the factored
/// `Σ_s |s⟩⟨s| ⊗ D(sλη)e^{-ib†bτ}` and with the gain channels built on it.
pub fn joint_evolution_oracle(
    pre: &SpinVector,
    tau: f64,
    lambda: f64,
    rho: &DensityMatrix,
) -> Result<JointEvolution> {
    let dim = rho.dim();
    if dim > MAX_ORACLE_DIM {
        return Err(Error::InvalidDimension(dim));
    }
    let big = dim + JOINT_PADDING;
    let lad = fock::ladder_operators(big)?;
    let x = lad.annihilation.matrix() + lad.creation.matrix();
    let sz = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    let h = linalg::kron(&linalg::identity(2), lad.number.matrix())
        - linalg::kron(&sz, &x) * Complex64::from(lambda);
    let u_big = linalg::expm(&(h * Complex64::new(0.0, -tau)))?;
    // Restrict to the unpadded levels of each spin block.
    let u = CMatrix::from_fn(2 * dim, 2 * dim, |i, j| {
        u_big[((i / dim) * big + i % dim, (j / dim) * big + j % dim)]
    });
    let spin = CMatrix::from_fn(2, 2, |i, j| {
        let a = [pre.up(), pre.down()];
        a[i] * a[j].conj()
    });
    let start = linalg::kron(&spin, rho.matrix());
    let direct = &u * &start * u.adjoint();

    // Factored route.
    let eta = fock::eta(tau);
    let rot = fock::rotation_phases(tau, dim);
    let mut u_fact = CMatrix::zeros(2 * dim, 2 * dim);
    for (s, sign) in [(0usize, 1.0), (1, -1.0)] {
        let d = fock::displacement(eta * (lambda * sign), dim)?;
        for i in 0..dim {
            for j in 0..dim {
                u_fact[(s * dim + i, s * dim + j)] = d.matrix()[(i, j)] * rot[j];
            }
        }
    }
    let factored = &u_fact * &start * u_fact.adjoint();
    let mut worst = linalg::max_abs_diff(&direct, &factored);

    // Conditioned states from the channel implementation.
    let posts = [
        SpinVector::spin_up(),
        SpinVector::spin_down(),
        SpinVector::plus(),
        SpinVector::new(ONE, Complex64::new(0.0, 1.0))?,
        *pre,
        pre.orthogonal(),
    ];
    for post in posts {
        let f = [post.up(), post.down()];
        let mut cond = CMatrix::zeros(dim, dim);
        for s in 0..2 {
            for t in 0..2 {
                cond += spin_block(&direct, dim, s, t) * (f[s].conj() * f[t]);
            }
        }
        let weight = linalg::trace(&cond).re;
        if weight < 1e-9 {
            continue;
        }
        let ch = GainChannel::heralded(*pre, post, tau, lambda)?;
        let (state, w) = ch.prepare(dim)?.apply_matrix(rho.matrix())?;
        worst = worst.max(linalg::max_abs_diff(&(state * Complex64::from(w)), &cond));
    }
    let traced = spin_block(&direct, dim, 0, 0) + spin_block(&direct, dim, 1, 1);
    let ch = GainChannel::spin_trace(*pre, tau, lambda)?;
    worst = worst.max(linalg::max_abs_diff(
        &ch.prepare(dim)?.apply_matrix(rho.matrix())?.0,
        &traced,
    ));

    if !(worst <= FACTORIZATION_TOLERANCE) {
        return Err(Error::FactorizationViolation(worst));
    }
    Ok(JointEvolution {
        joint: DensityMatrix::from_unnormalized(direct)?,
        max_deviation: worst,
    })
}

/// `{1 + p(M - 1)}^K ρ₀` with the per-spin map of `config` (co-rotating
/// frame). Only maps that are linear in ρ are accepted.
pub fn pump_map_power(config: &MaserConfig, k: u64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = rho0.dim();
    let map = config.channel.prepare(dim)?.into_rotating_frame();
    let kraus = map.linear_kraus().ok_or_else(|| {
        Error::UnsupportedChannel(format!(
            "{:?} with these spin states is not linear in rho",
            config.channel.mode()
        ))
    })?;
    let p = config.pump_p;
    let step = |rho: &CMatrix| -> CMatrix {
        let mut out = rho * Complex64::from(1.0 - p);
        for kr in kraus {
            out += kr * rho * kr.adjoint() * Complex64::from(p);
        }
        out
    };
    let out = if k <= 64 {
        let mut rho = rho0.matrix().clone();
        for _ in 0..k {
            rho = step(&rho);
        }
        rho
    } else {
        // Binary powering of the column-major superoperator.
        let n2 = dim * dim;
        let mut sup = CMatrix::zeros(n2, n2);
        for col in 0..n2 {
            let mut e = CMatrix::zeros(dim, dim);
            e[(col % dim, col / dim)] = ONE;
            let img = step(&e);
            for row in 0..n2 {
                sup[(row, col)] = img[(row % dim, row / dim)];
            }
        }
        let mut vec = nalgebra::DVector::from_iterator(n2, rho0.matrix().iter().copied());
        let mut base = sup;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                vec = &base * vec;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        CMatrix::from_column_slice(dim, dim, vec.as_slice())
    };
    DensityMatrix::from_unnormalized(out)
}

/// `d(t) ↦ factor·d(t)` with `a` re-derived from normalization, for
/// checking that [`fokker_planck_residual`] detects a wrong solution.
pub fn perturb_width(c: FpCoefficients, factor: f64) -> FpCoefficients {
    FpCoefficients::normalized(c.b, c.c, c.d * factor, c.db, c.dc, c.dd * factor)
}

/// Maximum of the Fokker–Planck residual
/// `κP + ½(κβ - 4λr)∂_βP + ½(κβ* - 4λr)∂_β*P + κn̄₀∂_β∂_β*P - ∂_tP`
/// over the grids, divided by `max |∂_tP|` (absolute if that vanishes).
pub fn fokker_planck_residual(
    sol: &ClosedFormSolution,
    t_grid: &[f64],
    beta_grid: &[Complex64],
) -> Result<f64> {
    fokker_planck_residual_with(sol, |t| sol.fp_coefficients(t), t_grid, beta_grid)
}

pub fn fokker_planck_residual_with<F>(
    sol: &ClosedFormSolution,
    coefficients: F,
    t_grid: &[f64],
    beta_grid: &[Complex64],
) -> Result<f64>
where
    F: Fn(f64) -> Result<FpCoefficients>,
{
    let k = sol.kappa;
    let pump = Complex64::from(4.0 * sol.lambda * sol.r);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for &t in t_grid {
        let c = coefficients(t)?;
        for &beta in beta_grid {
            let bc = beta.conj();
            let p = c.density(beta);
            let dp_b = (c.b + c.d * bc) * p;
            let dp_bc = (c.c + c.d * beta) * p;
            let dp_bbc = (c.d + (c.b + c.d * bc) * (c.c + c.d * beta)) * p;
            let dp_t = (c.da + c.db * beta + c.dc * bc + c.dd * beta.norm_sqr()) * p;
            let lhs = p * k
                + dp_b * 0.5 * (beta * k - pump)
                + dp_bc * 0.5 * (bc * k - pump)
                + dp_bbc * (k * sol.nbar0);
            worst = worst.max((lhs - dp_t).norm());
            scale = scale.max(dp_t.norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// g²(0) from the generating function `Q(s) = Σ(1-s)^n P(n)`, with `P(n)`
/// from quadrature and derivatives at `s = 0` by Richardson-extrapolated
/// central differences.
pub fn g2_series_oracle(sol: &ClosedFormSolution, t: f64) -> Result<f64> {
    let len = sol.series_length();
    let p = sol.pn_distribution(t, len)?;
    let mass: f64 = p.iter().sum();
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Precision(format!(
            "generating-function series holds mass {mass} after {len} terms"
        )));
    }
    // Q(s) - Q(0) summed term by term without cancellation.
    let delta = |s: f64| -> f64 {
        let l = (-s).ln_1p();
        p.iter()
            .enumerate()
            .map(|(n, pn)| pn * (n as f64 * l).exp_m1())
            .sum()
    };
    let first = |h: f64| (delta(h) - delta(-h)) / (2.0 * h);
    let second = |h: f64| (delta(h) + delta(-h)) / (h * h);
    let h = G2_SERIES_STEP;
    let q1 = (4.0 * first(h / 2.0) - first(h)) / 3.0;
    let q2 = (4.0 * second(h / 2.0) - second(h)) / 3.0;
    let mean = -q1;
    if mean <= 0.0 {
        return Err(Error::Domain(
            "g2(0) is undefined for zero mean occupancy".into(),
        ));
    }
    Ok(q2 / (mean * mean))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            passed: value >= tolerance,
            ..Self::at_most(name, value, tolerance)
        }
    }

    fn failed(name: &str, err: Error) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            detail: Some(err.to_string()),
        }
    }

    fn from_result(name: &str, r: Result<Check>) -> Self {
        r.unwrap_or_else(|e| Self::failed(name, e))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub dim: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Random density matrix supported on the lowest `support` levels.
pub fn random_interior_state(
    dim: usize,
    support: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    let g = CMatrix::from_fn(dim, dim, |i, j| {
        if i < support && j < support {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        } else {
            ZERO
        }
    });
    DensityMatrix::from_unnormalized(&g * g.adjoint())
}

/// Worst factorization deviation over 20 seeded random pre-states (with
/// random interior-supported oscillator states), λ ∈ {0.001, 0.01, 0.06}
/// and τ ∈ {π/2, π, 3π/2}.
pub fn joint_sweep(dim: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let support = (dim / 4).max(2);
    let mut cases = Vec::new();
    for _ in 0..20 {
        let pre = SpinVector::new(
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
        )?;
        let rho = random_interior_state(dim, support, &mut rng)?;
        for lambda in [0.001, 0.01, 0.06] {
            for tau in [PI / 2.0, PI, 1.5 * PI] {
                cases.push((pre, lambda, tau, rho.clone()));
            }
        }
    }
    let devs: Result<Vec<f64>> = cases
        .par_iter()
        .map(|(pre, lambda, tau, rho)| {
            joint_evolution_oracle(pre, *tau, *lambda, rho).map(|j| j.max_deviation)
        })
        .collect();
    Ok(devs?.into_iter().fold(0.0, f64::max))
}

fn fig2_solution() -> Result<ClosedFormSolution> {
    ClosedFormSolution::new(0.001, 1e-5, 0.1, 1.0 / (41.0 * PI))
}

fn beta_grid() -> Vec<Complex64> {
    crate::observables::rectangular_grid((-1.0, 4.0), (-1.5, 1.5), 10, 10)
}

fn time_grid(kappa: f64) -> Vec<f64> {
    (0..10).map(|i| i as f64 * 0.6 / kappa).collect()
}

/// Mean phonons of the pump product formula against the gain-only flow
/// `ρ̇ = r(M - 1)ρ` at `p = 10⁻³`, Fig. 2 coupling, after `r t = 500`.
fn pump_product_deviation() -> Result<f64> {
    let dim = 14;
    let ch = GainChannel::heralded(SpinVector::plus(), SpinVector::spin_down(), PI, 0.001)?;
    let base = MaserConfig::new(ch, 1e-5, 0.1, 41.0 * PI)?.with_cutoff(dim)?;
    let p = 1e-3;
    let spins = 500.0;
    let rho0 = thermal_state(0.1, dim)?;
    let cfg = base.clone().with_pump_p(p)?;
    let product = pump_map_power(&cfg, (spins / p) as u64, &rho0)?;
    let n_product = mean_phonons_matrix(product.matrix())?;

    let map = base.channel.prepare(dim)?.into_rotating_frame();
    let r = base.injection_rate();
    let t_end = spins / r;
    let mut n_flow = f64::NAN;
    ode::integrate(
        |_, y| Ok((map.apply_matrix(y)?.0 - y) * Complex64::from(r)),
        rho0.matrix().clone(),
        t_end,
        &[t_end],
        &OdeOptions::default(),
        |_, y, _| {
            n_flow = mean_phonons_matrix(y)?;
            Ok(())
        },
    )?;
    Ok((n_product - n_flow).abs() / n_flow)
}

/// Run every oracle at joint dimension `dim`.
pub fn verify(dim: usize) -> Result<VerifyReport> {
    if !(2..=MAX_ORACLE_DIM).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    let mut checks = Vec::new();

    checks.push(Check::from_result(
        "joint evolution: randomized sweep",
        joint_sweep(dim).map(|d| {
            Check::at_most(
                "joint evolution: randomized sweep",
                d,
                FACTORIZATION_TOLERANCE,
            )
        }),
    ));
    let simple = (|| -> Result<Vec<Check>> {
        let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED + 1);
        let rho = random_interior_state(dim, (dim / 4).max(2), &mut rng)?;
        let pre = SpinVector::real(0.4, 0.6)?;
        let free = joint_evolution_oracle(&pre, PI, 0.0, &rho)?;
        let expected = linalg::conjugate_by_diagonal(&fock::rotation_phases(PI, dim), rho.matrix());
        let traced =
            spin_block(free.joint.matrix(), dim, 0, 0) + spin_block(free.joint.matrix(), dim, 1, 1);
        let full = joint_evolution_oracle(&pre, 2.0 * PI, 0.06, &rho)?;
        let traced_full =
            spin_block(full.joint.matrix(), dim, 0, 0) + spin_block(full.joint.matrix(), dim, 1, 1);
        Ok(vec![
            Check::at_most(
                "joint evolution: zero coupling is free rotation",
                linalg::max_abs_diff(&traced, &expected),
                FACTORIZATION_TOLERANCE,
            ),
            Check::at_most(
                "joint evolution: full period is identity",
                linalg::max_abs_diff(&traced_full, rho.matrix()),
                FACTORIZATION_TOLERANCE,
            ),
        ])
    })();
    match simple {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Check::failed("joint evolution: limits", e)),
    }

    let fp = (|| -> Result<Vec<Check>> {
        let sol = fig2_solution()?;
        let thermal = fokker_planck_residual(&sol, &time_grid(sol.kappa), &beta_grid())?;
        let ou = ClosedFormSolution::with_initial(0.0, 1e-5, 0.1, 0.0, 0.1, Complex64::from(1.5))?;
        let ou_res = fokker_planck_residual(&ou, &time_grid(ou.kappa), &beta_grid())?;
        let perturbed = fokker_planck_residual_with(
            &sol,
            |t| sol.fp_coefficients(t).map(|c| perturb_width(c, 1.01)),
            &time_grid(sol.kappa),
            &beta_grid(),
        )?;
        Ok(vec![
            Check::at_most("Fokker-Planck residual: thermal start", thermal, 1e-8),
            Check::at_most(
                "Fokker-Planck residual: Ornstein-Uhlenbeck decay",
                ou_res,
                1e-10,
            ),
            Check::at_least(
                "Fokker-Planck residual: perturbed width detected",
                perturbed,
                1e-3,
            ),
        ])
    })();
    match fp {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Check::failed("Fokker-Planck residual", e)),
    }

    let g2 = (|| -> Result<Vec<Check>> {
        let sol = fig2_solution()?;
        let thermal = g2_series_oracle(&sol, 0.0)?;
        let steady_t = 40.0 / sol.kappa;
        let steady = g2_series_oracle(&sol, steady_t)?;
        let analytic = sol.g2(steady_t)?;
        let coherent = ClosedFormSolution::new(0.001, 1e-5, 1e-7, 1.0 / (41.0 * PI))?;
        let poisson = g2_series_oracle(&coherent, steady_t)?;
        Ok(vec![
            Check::at_most("g2 series: thermal limit", (thermal - 2.0).abs(), 1e-6),
            Check::at_most(
                "g2 series: steady state against closed form",
                (steady - analytic).abs(),
                1e-4,
            ),
            Check::at_most("g2 series: coherent limit", (poisson - 1.0).abs(), 1e-4),
        ])
    })();
    match g2 {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Check::failed("g2 series", e)),
    }

    let pn = (|| -> Result<Check> {
        let sol = fig2_solution()?;
        let t = 40.0 / sol.kappa;
        let len = sol.series_length();
        let quad = sol.pn_distribution(t, len)?;
        let lag = sol.pn_laguerre(t, len);
        let worst = quad
            .iter()
            .zip(&lag)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(Check::at_most(
            "P(n): quadrature against Laguerre form",
            worst,
            1e-9,
        ))
    })();
    checks.push(Check::from_result(
        "P(n): quadrature against Laguerre form",
        pn,
    ));

    checks.push(Check::from_result(
        "pump product formula against gain flow",
        pump_product_deviation()
            .map(|d| Check::at_most("pump product formula against gain flow", d, 0.01)),
    ));

    let gain = (|| -> Result<Check> {
        let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED + 2);
        let d = 20.min(dim);
        let rho = random_interior_state(d, (d / 4).max(2), &mut rng)?;
        let pre = SpinVector::real(0.4, 0.6)?;
        let post = SpinVector::real(0.9, -0.1)?;
        let born = GainChannel::with_failures(pre, post, PI, 0.02)?
            .with_failure_weighting(FailureWeighting::BornRule);
        let trace = GainChannel::spin_trace(pre, PI, 0.02)?;
        let a = born.prepare(d)?.apply_matrix(rho.matrix())?.0;
        let b = trace.prepare(d)?.apply_matrix(rho.matrix())?.0;
        let p = populations(&a);
        let total: f64 = p.iter().sum();
        Ok(Check::at_most(
            "Born-weighted failures reduce to spin tracing",
            linalg::max_abs_diff(&a, &b).max((total - 1.0).abs()),
            1e-12,
        ))
    })();
    checks.push(Check::from_result(
        "Born-weighted failures reduce to spin tracing",
        gain,
    ));

    Ok(VerifyReport { dim, checks })
}
