//! Periodic-grid spectral primitives and closed-curve quadrature.
//!
//! Boundary traces live on an equispaced grid of the unit circle,
//! `zeta_i = exp(i psi_i)` with `psi_i = 2 pi i / N`. Every other module
//! samples, transforms, and integrates through the functions here.

pub mod interp;
pub mod poly;
pub mod roots;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integrality tolerance applied before rounding a winding-type quantity.
pub const WINDING_TOLERANCE: f64 = 0.05;

/// Equispaced nodes `psi_i = 2 pi i / N` on `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    size: usize,
}

impl PeriodicGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 8 {
            return Err(Error::Config(format!(
                "periodic grid needs at least 8 nodes, got {size}"
            )));
        }
        if size % 2 != 0 {
            return Err(Error::Config(format!(
                "periodic grid size must be even, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn angle(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.size as f64
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(move |i| self.angle(i))
    }

    /// Unit-circle points `exp(i psi_i)`.
    pub fn unit_points(&self) -> Vec<Complex64> {
        self.angles().map(|a| Complex64::from_polar(1.0, a)).collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }
}

/// One complex value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSamples {
    grid: PeriodicGrid,
    values: Vec<Complex64>,
}

impl CircleSamples {
    pub fn new(grid: PeriodicGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::Config(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.size()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(psi)` at every node.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.angles().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest distance between cyclically adjacent samples.
    pub fn mesh(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[(i + 1) % n] - self.values[i]).norm())
            .fold(0.0, f64::max)
    }
}

/// Discrete Fourier coefficients `c_k`, `k = -N/2 .. N/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    size: usize,
    // natural order: coeffs[k + N/2] = c_k
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    /// Builds a spectrum from a closure over the mode index.
    pub fn from_modes(size: usize, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        PeriodicGrid::new(size)?;
        let half = (size / 2) as i64;
        let coeffs = (-half..half).map(f).collect();
        Ok(Self { size, coeffs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn min_mode(&self) -> i64 {
        -((self.size / 2) as i64)
    }

    pub fn max_mode(&self) -> i64 {
        (self.size / 2) as i64 - 1
    }

    /// `c_k`; zero outside the stored band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < self.min_mode() || k > self.max_mode() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k - self.min_mode()) as usize]
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let lo = self.min_mode();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (lo + i as i64, *c))
    }

    /// Coefficients `c_0 .. c_{N/2-1}` (the holomorphic part).
    pub fn nonnegative(&self) -> &[Complex64] {
        &self.coeffs[self.size / 2..]
    }

    /// l2 norm of the modes with `k < 0`.
    pub fn negative_l2(&self) -> f64 {
        self.coeffs[..self.size / 2]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Samples of the trigonometric polynomial on the grid.
    pub fn inverse(&self) -> CircleSamples {
        let n = self.size;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.modes() {
            buf[k.rem_euclid(n as i64) as usize] = c;
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut buf);
        CircleSamples {
            grid: PeriodicGrid { size: n },
            values: buf,
        }
    }
}

/// `c_k = (1/N) sum_i v_i exp(-i k psi_i)`.
pub fn fourier_coeffs(samples: &CircleSamples) -> Result<FourierSpectrum> {
    let n = samples.grid.size();
    PeriodicGrid::new(n)?;
    let mut buf = samples.values.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let half = n / 2;
    let mut coeffs = Vec::with_capacity(n);
    coeffs.extend(buf[half..].iter().map(|c| c * scale));
    coeffs.extend(buf[..half].iter().map(|c| c * scale));
    Ok(FourierSpectrum { size: n, coeffs })
}

/// Spectrum of the `psi`-derivative: `c_k -> i k c_k`, Nyquist mode zeroed.
pub fn spectral_derivative(spectrum: &FourierSpectrum) -> FourierSpectrum {
    let nyquist = spectrum.min_mode();
    let coeffs = spectrum
        .modes()
        .map(|(k, c)| {
            if k == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, k as f64)
            }
        })
        .collect();
    FourierSpectrum {
        size: spectrum.size,
        coeffs,
    }
}

/// Rounds a winding-type value to an integer under the fixed tolerance.
pub fn round_winding(turns: f64) -> Result<i64> {
    let rounded = turns.round();
    if (turns - rounded).abs() > WINDING_TOLERANCE || !turns.is_finite() {
        return Err(Error::NonClosedCurve { turns });
    }
    Ok(rounded as i64)
}

/// Sum of principal argument increments of `values[i] - b`, in radians,
/// along the open polyline (no closing segment).
pub fn argument_variation(values: &[Complex64], b: Complex64) -> f64 {
    values
        .windows(2)
        .map(|w| ((w[1] - b) / (w[0] - b)).arg())
        .sum()
}

/// Winding index of the closed sampled curve around `b`.
pub fn winding_number(curve: &CircleSamples, b: Complex64) -> Result<i64> {
    let mesh = curve.mesh();
    closed_winding(&curve.values, b, mesh)
}

/// Winding index of an arbitrary closed polyline (implicitly closed).
pub(crate) fn closed_winding(values: &[Complex64], b: Complex64, mesh: f64) -> Result<i64> {
    let distance = values
        .iter()
        .map(|v| (v - b).norm())
        .fold(f64::INFINITY, f64::min);
    if distance <= 10.0 * mesh {
        return Err(Error::NearSingularWinding {
            point: b,
            distance,
            mesh,
        });
    }
    let n = values.len();
    let steps: Vec<f64> = (0..n)
        .map(|i| ((values[(i + 1) % n] - b) / (values[i] - b)).arg())
        .collect();
    let total: f64 = steps.iter().sum();
    // a step turning by more than a quarter revolution cannot be resolved
    // unambiguously; the polyline does not sample a continuous closed curve
    if steps.iter().any(|s| s.abs() > PI / 2.0) {
        return Err(Error::NonClosedCurve {
            turns: total / (2.0 * PI),
        });
    }
    round_winding(total / (2.0 * PI))
}

/// Evaluates `sum_{k=0}^{N/2-1} c_k zeta^k` inside the closed unit disc.
pub fn taylor_eval(spectrum: &FourierSpectrum, zeta: Complex64) -> Result<Complex64> {
    if zeta.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "taylor_eval needs |zeta| <= 1, got {}",
            zeta.norm()
        )));
    }
    Ok(poly::horner(spectrum.nonnegative(), zeta))
}

/// Rectangle rule `sum_i values_i * dz_i` for closed curves.
pub fn line_integral(values: &[Complex64], dz: &[Complex64]) -> Result<Complex64> {
    if values.len() != dz.len() {
        return Err(Error::Config(format!(
            "line_integral length mismatch: {} values, {} increments",
            values.len(),
            dz.len()
        )));
    }
    if values.len() < 8 {
        return Err(Error::Config(format!(
            "line_integral needs at least 8 nodes, got {}",
            values.len()
        )));
    }
    Ok(values.iter().zip(dz).map(|(v, d)| v * d).sum())
}

/// `dz_i = z'(psi_i) * (2 pi / N)` for a closed curve given by its samples,
/// with the derivative taken spectrally.
pub fn curve_increments(curve: &CircleSamples) -> Result<Vec<Complex64>> {
    let h = curve.grid.spacing();
    let deriv = spectral_derivative(&fourier_coeffs(curve)?).inverse();
    Ok(deriv.values.into_iter().map(|d| d * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_small_and_odd() {
        assert!(matches!(PeriodicGrid::new(6), Err(Error::Config(_))));
        assert!(matches!(PeriodicGrid::new(9), Err(Error::Config(_))));
        assert!(PeriodicGrid::new(8).is_ok());
    }

    #[test]
    fn pure_modes() {
        let grid = PeriodicGrid::new(16).unwrap();
        let s = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, 2.0 * p));
        let spec = fourier_coeffs(&s).unwrap();
        for (k, ck) in spec.modes() {
            let expect = if k == 2 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((ck - expect).norm() < 1e-14, "k={k} c={ck}");
        }

        let s = CircleSamples::from_fn(grid, |_| c(5.0, 0.0));
        let spec = fourier_coeffs(&s).unwrap();
        assert!((spec.coeff(0) - c(5.0, 0.0)).norm() < 1e-14);
        assert!(spec.modes().filter(|(k, _)| *k != 0).all(|(_, v)| v.norm() < 1e-14));

        let s = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, -p));
        let spec = fourier_coeffs(&s).unwrap();
        assert!((spec.coeff(-1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(spec.modes().filter(|(k, _)| *k != -1).all(|(_, v)| v.norm() < 1e-14));
    }

    #[test]
    fn derivative_of_modes() {
        let grid = PeriodicGrid::new(32).unwrap();
        let s = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, p));
        let d = spectral_derivative(&fourier_coeffs(&s).unwrap());
        assert!((d.coeff(1) - c(0.0, 1.0)).norm() < 1e-14);

        let s = CircleSamples::from_fn(grid, |_| c(2.5, -1.0));
        let d = spectral_derivative(&fourier_coeffs(&s).unwrap());
        assert!(d.modes().all(|(_, v)| v.norm() < 1e-14));

        let s = CircleSamples::from_fn(grid, |p| c(p.cos(), 0.0));
        let d = spectral_derivative(&fourier_coeffs(&s).unwrap()).inverse();
        for (i, v) in d.values().iter().enumerate() {
            let expect = -grid.angle(i).sin();
            assert!((v - c(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn nyquist_is_zeroed() {
        let grid = PeriodicGrid::new(8).unwrap();
        let s = CircleSamples::from_fn(grid, |p| c((4.0 * p).cos(), 0.0));
        let d = spectral_derivative(&fourier_coeffs(&s).unwrap());
        assert_eq!(d.coeff(-4), c(0.0, 0.0));
    }

    #[test]
    fn winding_examples() {
        let grid = PeriodicGrid::new(64).unwrap();
        let circle = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, p));
        assert_eq!(winding_number(&circle, c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&circle, c(2.0, 0.0)).unwrap(), 0);
        // the double cover needs a finer grid to satisfy the 10-mesh clearance
        let fine = PeriodicGrid::new(256).unwrap();
        let double = CircleSamples::from_fn(fine, |p| Complex64::from_polar(1.0, 2.0 * p));
        assert_eq!(winding_number(&double, c(0.0, 0.0)).unwrap(), 2);
    }

    #[test]
    fn winding_rejects_near_points() {
        let grid = PeriodicGrid::new(64).unwrap();
        let circle = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, p));
        let err = winding_number(&circle, c(1.05, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NearSingularWinding { .. }));
    }

    #[test]
    fn winding_rejects_open_curves() {
        let grid = PeriodicGrid::new(64).unwrap();
        // half circle traversed and then jumped back: not closed in argument
        let arc = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, 0.5 * p));
        let err = closed_winding(arc.values(), c(0.0, 0.0), 0.01).unwrap_err();
        assert!(matches!(err, Error::NonClosedCurve { .. }));
    }

    #[test]
    fn taylor_eval_examples() {
        let grid = PeriodicGrid::new(32).unwrap();
        let s = CircleSamples::from_fn(grid, |p| Complex64::from_polar(1.0, p));
        let spec = fourier_coeffs(&s).unwrap();
        assert!((taylor_eval(&spec, c(0.5, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-14);

        let s = CircleSamples::from_fn(grid, |_| c(3.0, 0.0));
        let spec = fourier_coeffs(&s).unwrap();
        assert!((taylor_eval(&spec, c(0.2, -0.7)).unwrap() - c(3.0, 0.0)).norm() < 1e-14);

        let s = CircleSamples::from_fn(grid, |p| {
            let z = Complex64::from_polar(1.0, p);
            (1.0 + z) * (1.0 + z)
        });
        let spec = fourier_coeffs(&s).unwrap();
        let zeta = c(0.3, 0.4);
        // (1 + zeta)^2 expanded by hand: 1 + 2 zeta + zeta^2
        let expect = c(1.0, 0.0) + 2.0 * zeta + zeta * zeta;
        assert!((taylor_eval(&spec, zeta).unwrap() - expect).norm() < 1e-13);
        assert!((expect - c(1.3, 0.4) * c(1.3, 0.4)).norm() < 1e-15);

        assert!(matches!(taylor_eval(&spec, c(1.1, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn line_integral_examples() {
        let grid = PeriodicGrid::new(64).unwrap();
        let h = grid.spacing();
        let z: Vec<_> = grid.unit_points();
        let dz: Vec<_> = z.iter().map(|z| Complex64::i() * z * h).collect();

        let inv: Vec<_> = z.iter().map(|z| 1.0 / z).collect();
        let v = line_integral(&inv, &dz).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-12);

        let v = line_integral(&z, &dz).unwrap();
        assert!(v.norm() < 1e-12);

        // circle |z - t| = rho: conj(z) dz integrates to 2 pi i rho^2
        let (t, rho) = (c(1.0, 0.0), 0.5);
        let pts: Vec<_> = grid.unit_points().iter().map(|u| t + rho * u).collect();
        let dz: Vec<_> = grid
            .unit_points()
            .iter()
            .map(|u| Complex64::i() * rho * u * h)
            .collect();
        let conj: Vec<_> = pts.iter().map(|p| p.conj()).collect();
        let v = line_integral(&conj, &dz).unwrap();
        assert!((v - c(0.0, 2.0 * PI * rho * rho)).norm() < 1e-10);

        assert!(matches!(line_integral(&z[..10], &dz), Err(Error::Config(_))));
        assert!(matches!(line_integral(&z[..4], &dz[..4]), Err(Error::Config(_))));
    }

    #[test]
    fn curve_increments_match_analytic() {
        let grid = PeriodicGrid::new(64).unwrap();
        let curve = CircleSamples::from_fn(grid, |p| c(2.0, 0.0) + Complex64::from_polar(0.5, p));
        let dz = curve_increments(&curve).unwrap();
        for (i, d) in dz.iter().enumerate() {
            let expect = Complex64::i() * Complex64::from_polar(0.5, grid.angle(i)) * grid.spacing();
            assert!((d - expect).norm() < 1e-13);
        }
    }
}
