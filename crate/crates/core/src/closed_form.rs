//! Closed-form lasing solution: the Gaussian P-function
//! `P(β, t) = exp[a + bβ + cβ* + d|β|²]` and the statistics it implies.
//!
//! With a thermal initial state the P-function is a thermal Gaussian of
//! width `n̄₀` centred on the real amplitude
//! `β₁(t) = (4λr/κ)(1 - e^{-κt/2})`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::config::MaserConfig;
use crate::error::{Error, Result};

/// Radial and angular Gauss–Legendre orders for [`ClosedFormSolution::pn_quadrature`].
pub const RADIAL_NODES: usize = 200;
pub const ANGULAR_NODES: usize = 128;
/// Relative change on node doubling above which quadrature is rejected.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Allowed disagreement between quadrature and the Laguerre form.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormSolution {
    pub lambda: f64,
    pub kappa: f64,
    pub nbar0: f64,
    pub r: f64,
    pub epsilon: f64,
    pub beta0: Complex64,
}

/// Gaussian coefficients and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: f64,
    pub da: Complex64,
    pub db: Complex64,
    pub dc: Complex64,
    pub dd: f64,
}

impl FpCoefficients {
    /// Complete `(b, c, d)` and their rates with the normalization
    /// `a = ln(-d/π) + bc/d`.
    pub fn normalized(
        b: Complex64,
        c: Complex64,
        d: f64,
        db: Complex64,
        dc: Complex64,
        dd: f64,
    ) -> Self {
        let a = Complex64::from((-d / PI).ln()) + b * c / d;
        let da = Complex64::from(dd / d) + (db * c + b * dc) / d - b * c * dd / (d * d);
        Self {
            a,
            b,
            c,
            d,
            da,
            db,
            dc,
            dd,
        }
    }

    /// `P(β)`, treating `β` and `β*` as independent.
    pub fn density(&self, beta: Complex64) -> Complex64 {
        (self.a + self.b * beta + self.c * beta.conj() + self.d * beta.norm_sqr()).exp()
    }

    /// Centre `⟨β⟩ = -c/d` of the Gaussian.
    pub fn mean_amplitude(&self) -> Complex64 {
        -self.c / self.d
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be finite and >= 0, got {v}"
        )));
    }
    Ok(())
}

impl ClosedFormSolution {
    /// Thermal initial condition `ε = n̄₀`, `β₀ = 0`.
    pub fn new(lambda: f64, kappa: f64, nbar0: f64, r: f64) -> Result<Self> {
        Self::with_initial(lambda, kappa, nbar0, r, nbar0, Complex64::from(0.0))
    }

    pub fn with_initial(
        lambda: f64,
        kappa: f64,
        nbar0: f64,
        r: f64,
        epsilon: f64,
        beta0: Complex64,
    ) -> Result<Self> {
        check_nonneg("lambda", lambda)?;
        check_nonneg("nbar0", nbar0)?;
        check_nonneg("r", r)?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa must be > 0, got {kappa}"
            )));
        }
        check_nonneg("epsilon", epsilon)?;
        if !(beta0.re.is_finite() && beta0.im.is_finite()) {
            return Err(Error::NonFinite("beta0"));
        }
        Ok(Self {
            lambda,
            kappa,
            nbar0,
            r,
            epsilon,
            beta0,
        })
    }

    pub fn from_config(config: &MaserConfig) -> Result<Self> {
        Self::new(
            config.lambda(),
            config.kappa,
            config.nbar0,
            config.injection_rate(),
        )
    }

    pub fn beta1_inf(&self) -> f64 {
        4.0 * self.lambda * self.r / self.kappa
    }

    pub fn beta1(&self, t: f64) -> f64 {
        self.beta1_inf() * -(-0.5 * self.kappa * t).exp_m1()
    }

    pub fn mean_phonons(&self, t: f64) -> f64 {
        self.nbar0 + self.beta1(t).powi(2)
    }

    pub fn steady_state_mean(&self) -> f64 {
        self.nbar0 + self.beta1_inf().powi(2)
    }

    /// `|β̄|²`, the coherent part of the steady-state occupancy.
    pub fn beta_bar_squared(&self) -> f64 {
        self.beta1_inf().powi(2)
    }

    fn g2_at_amplitude(&self, beta: f64) -> Result<f64> {
        let n = self.nbar0;
        let b2 = beta * beta;
        let den = n * n + 2.0 * b2 * n + b2 * b2;
        if den <= 0.0 {
            return Err(Error::Domain("g2(0) is undefined for the vacuum".into()));
        }
        Ok((2.0 * n * n + 4.0 * b2 * n + b2 * b2) / den)
    }

    pub fn g2(&self, t: f64) -> Result<f64> {
        self.g2_at_amplitude(self.beta1(t))
    }

    pub fn g2_steady_state(&self) -> Result<f64> {
        self.g2_at_amplitude(self.beta1_inf())
    }

    /// Phase-diffusion linewidth `κn̄₀/(2n̄_SS)`.
    pub fn linewidth(&self) -> Result<f64> {
        let n = self.steady_state_mean();
        if n <= 0.0 {
            return Err(Error::Domain(
                "linewidth needs a positive steady-state occupancy".into(),
            ));
        }
        Ok(self.kappa * self.nbar0 / (2.0 * n))
    }

    /// Coefficients of the Gaussian solution at time `t`:
    /// `b = (4λr/κn̄₀)(1 - e^{-κt/2}) + (β₀*/n̄₀)e^{-κt/2}`, `c = b*`,
    /// `d = -1/(n̄₀(1 - e^{-κt}) + εe^{-κt})`.
    pub fn fp_coefficients(&self, t: f64) -> Result<FpCoefficients> {
        if self.nbar0 <= 0.0 {
            return Err(Error::Domain(
                "the Gaussian solution needs nbar0 > 0".into(),
            ));
        }
        let k = self.kappa;
        let e = (-0.5 * k * t).exp();
        let de = -0.5 * k * e;
        let n = self.nbar0;
        let b_inf = Complex64::from(self.beta1_inf() / n);
        let start = self.beta0.conj() / n;
        let b = b_inf * (1.0 - e) + start * e;
        let db = (start - b_inf) * de;
        let sigma = n * (1.0 - e * e) + self.epsilon * e * e;
        if sigma <= 0.0 {
            return Err(Error::Domain("Gaussian width vanished".into()));
        }
        let dsigma = 2.0 * (self.epsilon - n) * e * de;
        let d = -1.0 / sigma;
        let dd = dsigma / (sigma * sigma);
        Ok(FpCoefficients::normalized(
            b,
            b.conj(),
            d,
            db,
            db.conj(),
            dd,
        ))
    }

    /// Number distribution of the displaced thermal state through the
    /// Laguerre recurrence, `p_0..p_{len-1}`.
    pub fn pn_laguerre(&self, t: f64, len: usize) -> Vec<f64> {
        displaced_thermal_pn(self.nbar0, self.beta1(t), len)
    }

    /// `P(n)` by polar Gauss–Legendre quadrature of the P-function integral,
    /// checked by node doubling.
    pub fn pn_quadrature(&self, t: f64, n: usize) -> Result<f64> {
        let beta = self.beta1(t);
        if self.nbar0 == 0.0 {
            return Ok(poisson_term(beta * beta, n));
        }
        let coarse = PolarRule::new(RADIAL_NODES, ANGULAR_NODES);
        let fine = PolarRule::new(2 * RADIAL_NODES, 2 * ANGULAR_NODES);
        let p1 = coarse.integrate(self.nbar0, beta, n);
        let p2 = fine.integrate(self.nbar0, beta, n);
        let scale = p2.abs().max(f64::MIN_POSITIVE);
        if (p1 - p2).abs() > QUADRATURE_TOLERANCE * scale {
            return Err(Error::Precision(format!(
                "P({n}) quadrature changed by {:e} on node doubling",
                (p1 - p2).abs() / scale
            )));
        }
        Ok(p2)
    }

    /// `P(n)` by quadrature, cross-checked against the Laguerre form.
    pub fn pn_analytic(&self, t: f64, n: usize) -> Result<f64> {
        let q = self.pn_quadrature(t, n)?;
        let l = self.pn_laguerre(t, n + 1)[n];
        if (q - l).abs() > CROSS_CHECK_TOLERANCE {
            return Err(Error::Consistency(format!(
                "P({n}): quadrature {q:e} vs Laguerre {l:e}"
            )));
        }
        Ok(q)
    }

    /// `P(0..len)` via [`Self::pn_analytic`].
    pub fn pn_distribution(&self, t: f64, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|n| self.pn_analytic(t, n)).collect()
    }

    /// Series length that captures the distribution at steady state.
    pub fn series_length(&self) -> usize {
        (10.0 + 10.0 * self.steady_state_mean()).ceil() as usize + 1
    }
}

fn poisson_term(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * mean.ln() - mean - log_fact).exp()
}

/// `P(n)` of a thermal state with occupancy `nbar` displaced by `beta`.
pub fn displaced_thermal_pn(nbar: f64, beta: f64, len: usize) -> Vec<f64> {
    if nbar == 0.0 {
        return (0..len).map(|n| poisson_term(beta * beta, n)).collect();
    }
    let t = nbar / (1.0 + nbar);
    let kick = beta * beta / ((1.0 + nbar) * (1.0 + nbar));
    let prefactor = (-beta * beta / (1.0 + nbar)).exp() / (1.0 + nbar);
    // q_n = t^n L_n(-β²/(n̄(1+n̄))).
    let mut out = Vec::with_capacity(len);
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0..len {
        out.push(prefactor * cur);
        let nf = n as f64;
        let next = (t * (2.0 * nf + 1.0) * cur + kick * cur - nf * t * t * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    (x, w)
}

struct PolarRule {
    radial: (Vec<f64>, Vec<f64>),
    angular: (Vec<f64>, Vec<f64>),
}

impl PolarRule {
    fn new(nr: usize, na: usize) -> Self {
        Self {
            radial: gauss_legendre(nr),
            angular: gauss_legendre(na),
        }
    }

    /// `(1/(π n̄ n!)) ∫ d²β |β|^{2n} exp(-|β|² - |β - β̄|²/n̄)` for real `β̄`.
    fn integrate(&self, nbar: f64, beta_bar: f64, n: usize) -> f64 {
        let nf = n as f64;
        let log_norm = (PI * nbar).ln() + (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
        // Radial log-density along φ = 0, including the Jacobian ρ.
        let curv = 2.0 + 2.0 / nbar;
        let qa = curv;
        let qb = 2.0 * beta_bar / nbar;
        let peak = (qb + (qb * qb + 4.0 * qa * (2.0 * nf + 1.0)).sqrt()) / (2.0 * qa);
        // The log-density is concave with curvature at least `curv`, so 12
        // widths of that Gaussian bound leave a negligible tail.
        let half = 12.0 / curv.sqrt();
        let lo = (peak - half).max(0.0);
        let hi = peak + half;
        let log_f = |rho: f64, phi: f64| -> f64 {
            let radial = if n == 0 { 0.0 } else { 2.0 * nf * rho.ln() };
            // |ρe^{iφ} - β̄|² without cancellation near the peak.
            let dist = (rho - beta_bar).powi(2) + 4.0 * rho * beta_bar * (0.5 * phi).sin().powi(2);
            radial + rho.ln() - rho * rho - dist / nbar
        };
        let (rx, rw) = &self.radial;
        let (ax, aw) = &self.angular;
        let mut logs = Vec::with_capacity(rx.len() * ax.len());
        for (xi, wi) in rx.iter().zip(rw) {
            let rho = 0.5 * (hi - lo) * xi + 0.5 * (hi + lo);
            let wr = 0.5 * (hi - lo) * wi;
            // exp(k(cos φ - 1)) ≤ exp(-2kφ²/π²) on [0, π].
            let k = 2.0 * rho * beta_bar / nbar;
            let phi_max = if k > 0.0 {
                PI.min(PI * (20.0 / k).sqrt())
            } else {
                PI
            };
            for (yj, vj) in ax.iter().zip(aw) {
                let phi = 0.5 * phi_max * (yj + 1.0);
                // Doubled for the mirror half of the angular range.
                let w = wr * 0.5 * phi_max * vj * 2.0;
                logs.push(log_f(rho, phi) + w.ln());
            }
        }
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        (top + sum.ln() - log_norm).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> ClosedFormSolution {
        ClosedFormSolution::new(0.001, 1e-5, 0.1, 1.0 / (41.0 * PI)).unwrap()
    }

    #[test]
    fn drift_amplitude_examples() {
        let s = fig2();
        assert_eq!(s.beta1(0.0), 0.0);
        assert!((s.beta1_inf() - 3.1056).abs() < 5e-4);
        assert!((s.beta1_inf().powi(2) - 9.6445).abs() < 1e-3);
        let half = 2.0 * 2f64.ln() / s.kappa;
        assert!((s.beta1(half) - s.beta1_inf() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_phonon_examples() {
        let s = fig2();
        assert!((s.steady_state_mean() - 9.744).abs() < 5e-4);
        assert!((s.mean_phonons(1e12) - s.steady_state_mean()).abs() < 1e-12);
        let half = 2.0 * 2f64.ln() / s.kappa;
        assert!((s.mean_phonons(half) - 2.511).abs() < 1e-3);
        let fig4 = ClosedFormSolution::new(0.001, 1.4e-5, 0.1, 1.0 / (41.0 * PI)).unwrap();
        assert!((fig4.steady_state_mean() - 5.02).abs() < 5e-3);
        assert!((s.beta_bar_squared() - (s.steady_state_mean() - s.nbar0)).abs() < 1e-12);
    }

    #[test]
    fn g2_examples() {
        let s = fig2();
        assert_eq!(s.g2(0.0).unwrap(), 2.0);
        assert!((s.g2_steady_state().unwrap() - 1.0204).abs() < 1e-4);
        let strong = ClosedFormSolution::new(1.0, 1e-5, 0.1, 1.0).unwrap();
        assert!((strong.g2_steady_state().unwrap() - 1.0).abs() < 1e-9);
        let vac = ClosedFormSolution::new(0.001, 1e-5, 0.0, 0.01).unwrap();
        assert!(matches!(vac.g2(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn linewidth_examples() {
        let idle = ClosedFormSolution::new(0.001, 1e-5, 0.1, 0.0).unwrap();
        assert!((idle.linewidth().unwrap() - 0.5e-5).abs() < 1e-18);
        assert!((fig2().linewidth().unwrap() - 5.13e-8).abs() < 1e-10);
        let widths: Vec<f64> = (1..20)
            .map(|k| {
                ClosedFormSolution::new(0.001, 1e-5, 0.1, k as f64 * 1e-3)
                    .unwrap()
                    .linewidth()
                    .unwrap()
            })
            .collect();
        assert!(widths.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fp_coefficient_examples() {
        let s = fig2();
        let c0 = s.fp_coefficients(0.0).unwrap();
        assert_eq!(c0.b, Complex64::from(0.0));
        assert!((c0.d + 10.0).abs() < 1e-12);
        let inf = s.fp_coefficients(1e9).unwrap();
        assert!((inf.b.re - s.beta1_inf() / 0.1).abs() < 1e-9);
        assert!((inf.d + 10.0).abs() < 1e-12);
        for i in 0..20 {
            let t = i as f64 * 2e4;
            let c = s.fp_coefficients(t).unwrap();
            assert!((c.mean_amplitude() - Complex64::from(s.beta1(t))).norm() < 1e-10);
        }
    }

    #[test]
    fn gaussian_is_normalized() {
        let s = fig2();
        let c = s.fp_coefficients(3e5).unwrap();
        let mu = c.mean_amplitude();
        let (x, w) = gauss_legendre(80);
        let half = 3.0;
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, vj) in x.iter().zip(&w) {
                let beta = mu + Complex64::new(half * xi, half * yj);
                total += (c.density(beta) * wi * vj * half * half).re;
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((integral - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(400);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((integral - 2.0 * 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn thermal_limit_is_geometric() {
        let s = fig2();
        for n in 0..10 {
            let g = 0.1f64.powi(n as i32) / 1.1f64.powi(n as i32 + 1);
            assert!((s.pn_analytic(0.0, n).unwrap() - g).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_limit_is_poisson() {
        let s = ClosedFormSolution::new(0.001, 1e-5, 1e-9, 1.0 / (41.0 * PI)).unwrap();
        let mean = s.beta1_inf().powi(2);
        let lag = s.pn_laguerre(1e9, 40);
        for (n, p) in lag.iter().enumerate() {
            assert!((p - poisson_term(mean, n)).abs() < 1e-7);
        }
    }

    #[test]
    fn steady_state_moments_from_quadrature() {
        let s = fig2();
        let t = 2e6;
        let len = s.series_length();
        let p = s.pn_distribution(t, len).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        let mean: f64 = p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!((mean - s.mean_phonons(t)).abs() < 1e-8);
        let g2 = crate::observables::g2_from_populations(&p).unwrap();
        assert!((g2 - s.g2(t).unwrap()).abs() < 1e-8);
        let poisson = crate::observables::poisson_pmf(mean, len);
        assert!(crate::observables::total_variation(&p, &poisson) <= 0.05);
    }
}
