//! Real 1-periodic scalar fields on an `n x n` grid of the unit torus.
//!
//! Samples live at `(i/n, j/n)` and are stored row-major with the first
//! index running along `x1`. Spectral coefficients are mode averages,
//! `coeff(k) = n^-2 sum f(x) e^{-2 pi i k.x}`, so `coeff(0)` is the mean and
//! Parseval reads `mean(f^2) = sum |coeff|^2` with no extra constants. Modes
//! are kept in FFT order; index `m` carries the signed mode `m` for
//! `m < n/2` and `m - n` otherwise, covering `{-n/2, ..., n/2 - 1}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SpectralError;

/// Relative tolerance used when checking Hermitian symmetry before an inverse transform.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
        }
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid on the unit torus. Cloning shares the FFT plans.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 8 || n % 2 != 0 {
            return Err(SpectralError::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Grid {
            n,
            plans: Arc::new(plans),
        })
    }

    /// Modes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, `n^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        1.0
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Signed mode carried by storage index `m`.
    pub fn mode(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Storage index of signed mode `k` (taken modulo `n`).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Physical wavenumber `2 pi k` for storage index `m`.
    pub fn kappa(&self, m: usize) -> f64 {
        2.0 * PI * self.mode(m) as f64
    }

    /// The self-mirrored Nyquist mode `-n/2`.
    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    fn fft2(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let plan = if forward {
            &self.plans.forward
        } else {
            &self.plans.inverse
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<(), SpectralError> {
    if a.n != b.n {
        return Err(SpectralError::GridMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(())
}

/// Point samples of a real periodic field.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    samples: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: &Grid, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.len() {
            return Err(SpectralError::MalformedField(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::MalformedField(format!(
                "non-finite sample at index {pos}"
            )));
        }
        Ok(PhysicalField {
            grid: grid.clone(),
            samples,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        PhysicalField {
            grid: grid.clone(),
            samples: vec![value; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x1 = grid.coordinate(i);
            for j in 0..n {
                samples.push(f(x1, grid.coordinate(j)));
            }
        }
        PhysicalField {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.grid.n + j]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PhysicalField {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid.n, other.grid.n, "grid mismatch in zip_map");
        PhysicalField {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn forward(&self) -> SpectralField {
        let mut data: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.fft2(&mut data, true);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid.clone(),
            coeffs: data,
        }
    }
}

impl Add for &PhysicalField {
    type Output = PhysicalField;
    fn add(self, rhs: Self) -> PhysicalField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &PhysicalField {
    type Output = PhysicalField;
    fn sub(self, rhs: Self) -> PhysicalField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Fourier coefficients of a real periodic field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps raw coefficients in FFT order. Symmetry is checked lazily by [`Self::inverse`].
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::MalformedField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::MalformedField(
                "non-finite coefficient".into(),
            ));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Field with coefficient `c` at `k` and `conj(c)` at `-k`, i.e. a real single mode.
    pub fn real_mode(grid: &Grid, k: [i64; 2], c: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        f.set(k, c);
        let minus = [-k[0], -k[1]];
        if grid.index_of(minus[0]) != grid.index_of(k[0])
            || grid.index_of(minus[1]) != grid.index_of(k[1])
        {
            f.set(minus, c.conj());
        } else {
            f.set(k, Complex64::new(c.re, 0.0));
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    fn flat(&self, k: [i64; 2]) -> usize {
        self.grid.index_of(k[0]) * self.grid.n + self.grid.index_of(k[1])
    }

    /// Coefficient of signed mode `k` (wrapped modulo `n`).
    pub fn get(&self, k: [i64; 2]) -> Complex64 {
        self.coeffs[self.flat(k)]
    }

    pub fn set(&mut self, k: [i64; 2], c: Complex64) {
        let idx = self.flat(k);
        self.coeffs[idx] = c;
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `sum |coeff|^2`, the mean square of the field.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|coeff(k) - conj(coeff(-k))|` over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            let ma = (n - a) % n;
            for b in 0..n {
                let mb = (n - b) % n;
                let d = self.coeffs[a * n + b] - self.coeffs[ma * n + mb].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Applies `f(k, kappa, coeff)` to every mode, with `kappa = 2 pi k`.
    pub fn map_modes(&self, f: impl Fn([i64; 2], [f64; 2], Complex64) -> Complex64) -> Self {
        let n = self.grid.n;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in 0..n {
            let k1 = self.grid.mode(a);
            let kap1 = self.grid.kappa(a);
            for b in 0..n {
                let k2 = self.grid.mode(b);
                coeffs.push(f([k1, k2], [kap1, self.grid.kappa(b)], self.coeffs[a * n + b]));
            }
        }
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Back to sample space. Fails if the coefficients do not describe a real field.
    pub fn inverse(&self) -> Result<PhysicalField, SpectralError> {
        let defect = self.hermitian_defect();
        let scale = self.max_abs_coeff();
        if defect > HERMITIAN_TOLERANCE * scale {
            return Err(SpectralError::MalformedField(format!(
                "Hermitian symmetry violated: defect {defect:.3e} relative to max coefficient {scale:.3e}"
            )));
        }
        Ok(self.inverse_unchecked())
    }

    /// Inverse transform keeping only the real part, without the symmetry check.
    pub fn inverse_unchecked(&self) -> PhysicalField {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, false);
        PhysicalField {
            grid: self.grid.clone(),
            samples: data.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Spectral derivative along `axis`; the Nyquist mode of that axis is dropped.
    pub fn derivative(&self, axis: Axis) -> Self {
        let nyq = self.grid.nyquist();
        let ax = axis.index();
        self.map_modes(|k, kappa, c| {
            if k[ax] == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, kappa[ax])
            }
        })
    }

    /// 2/3-rule truncation: zeroes every mode with `|k1| > n/3` or `|k2| > n/3`.
    pub fn dealias(&self) -> Self {
        let n = self.grid.n as i64;
        self.map_modes(|k, _, c| {
            if 3 * k[0].abs() > n || 3 * k[1].abs() > n {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
    }

    pub fn project_mean_zero(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// `-Laplacian` symbol applied: multiplies by `|kappa|^2`.
    pub fn neg_laplacian(&self) -> Self {
        self.map_modes(|_, kap, c| c * (kap[0] * kap[0] + kap[1] * kap[1]))
    }

    pub fn scale(&self, s: f64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.grid.n, other.grid.n, "grid mismatch in axpy");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
        }
    }

    /// Pointwise product of mode coefficients with per-mode real weights.
    pub fn weighted(&self, weights: &[f64]) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(weights)
                .map(|(c, w)| c * w)
                .collect(),
        }
    }

    /// Real inner product `mean(f g)` computed from coefficients.
    pub fn inner(&self, other: &Self) -> Result<f64, SpectralError> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// Dealiased product of two fields given in sample space.
pub fn dealiased_product(a: &PhysicalField, b: &PhysicalField) -> SpectralField {
    a.multiply(b).forward().dealias()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn random_bandlimited(g: &Grid, kmax: i64, seed: u64) -> PhysicalField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(g);
        for k1 in -kmax..=kmax {
            for k2 in 0..=kmax {
                if k2 == 0 && k1 < 0 {
                    continue;
                }
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                f = &f + &SpectralField::real_mode(g, [k1, k2], c);
            }
        }
        f.inverse().unwrap()
    }

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(Grid::new(7).is_err());
        assert!(Grid::new(6).is_err());
        assert!(Grid::new(10).is_ok());
    }

    #[test]
    fn forward_of_constant_is_mean_only() {
        let g = grid(16);
        let f = PhysicalField::constant(&g, 2.5).forward();
        assert!((f.get([0, 0]) - Complex64::new(2.5, 0.0)).norm() < 1e-14);
        let rest: f64 = f.coeffs()[1..].iter().map(|c| c.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn forward_of_sine_has_two_modes() {
        let g = grid(16);
        let f = PhysicalField::from_fn(&g, |x, _| (2.0 * PI * x).sin()).forward();
        assert!((f.get([1, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((f.get([-1, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        let total: f64 = f.coeffs().iter().map(|c| c.norm()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn inverse_examples() {
        let g = grid(16);
        let zero = SpectralField::zeros(&g).inverse().unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let mut mean = SpectralField::zeros(&g);
        mean.set([0, 0], Complex64::new(3.0, 0.0));
        let c = mean.inverse().unwrap();
        assert!(c.samples().iter().all(|&v| (v - 3.0).abs() < 1e-14));

        let s = SpectralField::real_mode(&g, [1, 0], Complex64::new(0.0, -0.5))
            .inverse()
            .unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = (2.0 * PI * i as f64 / 16.0).sin();
                assert!((s.at(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_rejects_non_hermitian_coefficients() {
        let g = grid(8);
        let mut f = SpectralField::zeros(&g);
        f.set([1, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(f.inverse(), Err(SpectralError::MalformedField(_))));
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid(32);
        for seed in 0..5 {
            let f = random_bandlimited(&g, 6, seed);
            let back = f.forward().inverse().unwrap();
            let err = (&back - &f).max_abs();
            assert!(err < 1e-12 * f.max_abs(), "round trip error {err}");
            let ms = f.samples().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
            let parseval = f.forward().mean_square();
            assert!((ms - parseval).abs() < 1e-12 * ms);
        }
    }

    #[test]
    fn derivative_examples() {
        let g = grid(16);
        let c = PhysicalField::constant(&g, 4.0).forward();
        assert!(c.derivative(Axis::X1).inverse().unwrap().max_abs() < 1e-13);

        let s = PhysicalField::from_fn(&g, |x, _| (2.0 * PI * x).sin()).forward();
        let ds = s.derivative(Axis::X1).inverse().unwrap();
        let expect = PhysicalField::from_fn(&g, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!((&ds - &expect).max_abs() < 1e-12);

        let cy = PhysicalField::from_fn(&g, |_, y| (2.0 * PI * y).cos()).forward();
        assert!(cy.derivative(Axis::X1).inverse().unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn derivative_drops_nyquist() {
        let g = grid(8);
        let mut f = SpectralField::zeros(&g);
        f.set([-4, 0], Complex64::new(1.0, 0.0));
        assert_eq!(f.derivative(Axis::X1).max_abs_coeff(), 0.0);
        // the other axis keeps it (multiplied by i*kappa_2 = 0 here)
        f.set([-4, 1], Complex64::new(1.0, 0.0));
        assert!(f.derivative(Axis::X2).get([-4, 1]).norm() > 0.0);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(32);
        let inside = SpectralField::real_mode(&g, [1, 0], Complex64::new(1.0, 0.0));
        assert_eq!(inside.dealias(), inside);
        let outside = SpectralField::real_mode(&g, [12, 0], Complex64::new(1.0, 0.0));
        assert_eq!(outside.dealias().max_abs_coeff(), 0.0);
        let border = SpectralField::real_mode(&g, [10, 10], Complex64::new(1.0, 0.0));
        assert_eq!(border.dealias(), border);
        let zero = SpectralField::zeros(&g);
        assert_eq!(zero.dealias(), zero);
    }

    #[test]
    fn mean_projection_examples() {
        let g = grid(16);
        let five = PhysicalField::constant(&g, 5.0).forward().project_mean_zero();
        assert!(five.max_abs_coeff() < 1e-14);
        let s = PhysicalField::from_fn(&g, |x, _| (2.0 * PI * x).sin()).forward();
        assert!((&s.project_mean_zero() - &s).max_abs_coeff() < 1e-15);
        let shifted = PhysicalField::from_fn(&g, |x, _| (2.0 * PI * x).sin() + 2.0).forward();
        let diff = &shifted.project_mean_zero() - &s;
        assert!(diff.max_abs_coeff() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn transform_round_trip(seed in 0u64..10_000, kmax in 1i64..10) {
                let g = grid(32);
                let f = random_bandlimited(&g, kmax, seed);
                let err = (&f.forward().inverse().unwrap() - &f).max_abs();
                prop_assert!(err < 1e-12 * f.max_abs());
            }

            #[test]
            fn derivative_commutes_with_dealias(seed in 0u64..10_000, axis in 0usize..2) {
                let g = grid(32);
                let ax = if axis == 0 { Axis::X1 } else { Axis::X2 };
                let f = random_bandlimited(&g, 15, seed).forward();
                let a = f.derivative(ax).dealias();
                let b = f.dealias().derivative(ax);
                prop_assert!((&a - &b).max_abs_coeff() < 1e-12);
            }

            #[test]
            fn mean_projection_idempotent(seed in 0u64..10_000, c in -5.0f64..5.0) {
                let g = grid(16);
                let f = random_bandlimited(&g, 3, seed).map(|v| v + c).forward();
                let once = f.project_mean_zero();
                prop_assert_eq!(once.project_mean_zero(), once);
            }
        }
    }
}
