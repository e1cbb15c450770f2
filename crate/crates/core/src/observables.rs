//! Physical quantities extracted from oscillator density matrices.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, EIGENVALUE_FLOOR};
use crate::linalg::CMatrix;

/// Largest imaginary part tolerated in an expectation value.
const IMAGINARY_RESIDUE: f64 = 1e-8;

pub(crate) fn mean_phonons_matrix(rho: &CMatrix) -> Result<f64> {
    let mut acc = Complex64::from(0.0);
    for n in 1..rho.nrows() {
        acc += rho[(n, n)] * n as f64;
    }
    if acc.im.abs() > IMAGINARY_RESIDUE {
        return Err(Error::Consistency(format!(
            "mean phonon number has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// `Tr(b†b ρ)`.
pub fn mean_phonons(rho: &DensityMatrix) -> Result<f64> {
    mean_phonons_matrix(rho.matrix())
}

pub(crate) fn populations(rho: &CMatrix) -> Vec<f64> {
    let mut clamped = 0usize;
    let p = (0..rho.nrows())
        .map(|n| {
            let v = rho[(n, n)].re;
            if v < 0.0 {
                if v < EIGENVALUE_FLOOR {
                    log::warn!("population p_{n} = {v:e} below the eigenvalue floor");
                }
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    if clamped > 0 {
        log::debug!("clamped {clamped} negative populations to zero");
    }
    p
}

/// Fock-basis populations `p_0..p_{dim-1}` with negative truncation noise
/// clamped to zero.
pub fn number_distribution(rho: &DensityMatrix) -> Vec<f64> {
    populations(rho.matrix())
}

/// `⟨n(n-1)⟩/⟨n⟩²` from a population list.
pub fn g2_from_populations(p: &[f64]) -> Result<f64> {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, &pn) in p.iter().enumerate() {
        let n = n as f64;
        m1 += n * pn;
        m2 += n * (n - 1.0) * pn;
    }
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "g2(0) is undefined for zero mean occupancy".into(),
        ));
    }
    Ok(m2 / (m1 * m1))
}

pub(crate) fn g2_zero_matrix(rho: &CMatrix) -> Result<f64> {
    let p: Vec<f64> = (0..rho.nrows()).map(|n| rho[(n, n)].re).collect();
    g2_from_populations(&p)
}

/// `Tr(b†b†bb ρ)/Tr(b†b ρ)²`.
pub fn g2_zero_numeric(rho: &DensityMatrix) -> Result<f64> {
    g2_zero_matrix(rho.matrix())
}

/// Wigner function `W(α) = (2/π) Tr[D(-α) ρ D(α) Π]` at each point.
///
/// Evaluated as `(2/π) Tr[ρ D(2α) Π]`, which needs only the elements of
/// `D(2α)` inside the cutoff.
pub fn wigner(rho: &DensityMatrix, points: &[Complex64]) -> Result<Vec<f64>> {
    let dim = rho.dim();
    if points
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite("Wigner grid"));
    }
    let worst = points.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if worst > dim as f64 / 4.0 {
        log::info!(
            "Wigner grid reaches |alpha|^2 = {worst:.3}, beyond dim/4 = {:.3}",
            dim as f64 / 4.0
        );
    }
    let m = rho.matrix();
    points
        .par_iter()
        .map(|&alpha| {
            let d = fock::displacement_elements(alpha * 2.0, dim);
            let mut acc = Complex64::from(0.0);
            for n in 0..dim {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                for k in 0..dim {
                    acc += m[(n, k)] * d[(k, n)] * s;
                }
            }
            if acc.im.abs() > IMAGINARY_RESIDUE {
                return Err(Error::Consistency(format!(
                    "Wigner value has imaginary part {:e}",
                    acc.im
                )));
            }
            Ok(2.0 / PI * acc.re)
        })
        .collect()
}

/// Row-major rectangular grid of `nx × ny` points spanning the given ranges.
pub fn rectangular_grid(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Vec<Complex64> {
    let step = |lo: f64, hi: f64, n: usize, i: usize| {
        if n < 2 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Complex64::new(
                step(re.0, re.1, nx, i),
                step(im.0, im.1, ny, j),
            ));
        }
    }
    out
}

/// Poisson probabilities `p_0..p_{len-1}` with the given mean.
pub fn poisson_pmf(mean: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    if mean == 0.0 {
        out.push(1.0);
        out.resize(len, 0.0);
        return out;
    }
    let mut log_p = -mean;
    for n in 0..len {
        if n > 0 {
            log_p += mean.ln() - (n as f64).ln();
        }
        out.push(log_p.exp());
    }
    out
}

/// `½ Σ |p_n - q_n|`, treating missing entries as zero.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;

    #[test]
    fn mean_phonon_examples() {
        assert_eq!(
            mean_phonons(&DensityMatrix::vacuum(8).unwrap()).unwrap(),
            0.0
        );
        let c = DensityMatrix::coherent(Complex64::new(1.2, 0.5), 40).unwrap();
        assert!((mean_phonons(&c).unwrap() - 1.69).abs() < 1e-10);
        let t = thermal_state(0.1, 26).unwrap();
        assert!((mean_phonons(&t).unwrap() - 0.1).abs() < 1e-10);
    }

    #[test]
    fn distribution_examples() {
        let f = DensityMatrix::fock(2, 6).unwrap();
        assert_eq!(number_distribution(&f), vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let p = number_distribution(&thermal_state(0.1, 26).unwrap());
        for w in p.windows(2).take(10) {
            assert!((w[1] / w[0] - 1.0 / 11.0).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn g2_examples() {
        assert_eq!(
            g2_zero_numeric(&DensityMatrix::fock(1, 6).unwrap()).unwrap(),
            0.0
        );
        let t = thermal_state(0.1, 26).unwrap();
        assert!((g2_zero_numeric(&t).unwrap() - 2.0).abs() < 1e-6);
        let c = DensityMatrix::coherent(Complex64::new(1.5, 0.0), 40).unwrap();
        assert!((g2_zero_numeric(&c).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(
            g2_zero_numeric(&DensityMatrix::vacuum(4).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn wigner_examples() {
        let origin = [Complex64::from(0.0)];
        let w = wigner(&DensityMatrix::vacuum(16).unwrap(), &origin).unwrap();
        assert!((w[0] - 2.0 / PI).abs() < 1e-12);
        let w = wigner(&thermal_state(0.3, 26).unwrap(), &origin).unwrap();
        assert!((w[0] - 2.0 / PI / 1.6).abs() < 1e-9);
    }

    #[test]
    fn wigner_is_covariant_under_displacement() {
        let dim = 30;
        let rho = thermal_state(0.1, dim).unwrap();
        let shift = Complex64::new(0.8, 0.0);
        let d = fock::displacement(shift, dim).unwrap();
        let moved = DensityMatrix::from_unnormalized(rho.conjugate(&d).unwrap()).unwrap();
        let grid = rectangular_grid((-1.0, 1.0), (-1.0, 1.0), 5, 5);
        let shifted: Vec<Complex64> = grid.iter().map(|z| z + shift).collect();
        let a = wigner(&rho, &grid).unwrap();
        let b = wigner(&moved, &shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn wigner_matches_displaced_parity_route() {
        let dim = 20;
        let rho = DensityMatrix::coherent(Complex64::new(0.6, 0.3), dim).unwrap();
        for alpha in [Complex64::new(0.4, 0.1), Complex64::new(-0.7, 0.9)] {
            let d = fock::displacement(-alpha, dim).unwrap();
            let shifted = rho.conjugate(&d).unwrap();
            let parity: Complex64 = (0..dim)
                .map(|n| shifted[(n, n)] * if n % 2 == 0 { 1.0 } else { -1.0 })
                .sum();
            let w = wigner(&rho, &[alpha]).unwrap()[0];
            assert!((w - 2.0 / PI * parity.re).abs() < 1e-10);
        }
    }

    #[test]
    fn wigner_integrates_to_one() {
        let rho = DensityMatrix::coherent(Complex64::new(3.0, 0.0), 26).unwrap();
        let n = 61;
        let grid = rectangular_grid((-3.0, 9.0), (-6.0, 6.0), n, n);
        let w = wigner(&rho, &grid).unwrap();
        let cell = (12.0 / (n - 1) as f64).powi(2);
        let total: f64 = w.iter().sum::<f64>() * cell;
        assert!((total - 1.0).abs() < 0.01, "{total}");
    }

    #[test]
    fn poisson_and_tvd() {
        let p = poisson_pmf(2.0, 60);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((p[2] - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(poisson_pmf(0.0, 3), vec![1.0, 0.0, 0.0]);
        assert_eq!(total_variation(&[1.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&p, &p), 0.0);
    }
}
