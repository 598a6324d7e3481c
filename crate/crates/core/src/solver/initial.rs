use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SimState;
use crate::error::SolverError;
use crate::spectral::{Grid, PhysicalField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    TaylorGreen,
    RhoStripe,
    RandomBandlimited,
    Zero,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::TaylorGreen => "taylor-green",
            Preset::RhoStripe => "rho-stripe",
            Preset::RandomBandlimited => "random-bandlimited",
            Preset::Zero => "zero",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taylor-green" => Ok(Preset::TaylorGreen),
            "rho-stripe" => Ok(Preset::RhoStripe),
            "random-bandlimited" => Ok(Preset::RandomBandlimited),
            "zero" => Ok(Preset::Zero),
            other => Err(SolverError::UnknownPreset(other.to_string())),
        }
    }
}

/// Knobs shared by the presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetParams {
    /// Overall scale of the initial fields.
    pub amplitude: f64,
    /// Relative size of the tilt that breaks the layered rho-stripe equilibrium.
    pub perturbation: f64,
    /// Largest mode of the random preset (further capped at `n/6`).
    pub kmax: usize,
    /// Density mean added on top of the mean-free preset (nonzero-mean variant).
    pub rho_mean: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            amplitude: 1.0,
            perturbation: 0.1,
            kmax: 4,
            rho_mean: 0.0,
        }
    }
}

/// Mean-free real field with modes `1 <= |k| <= kmax`, Gaussian coefficients
/// damped as `1/|k|^2`, scaled to unit root-mean-square. Deterministic in `seed`.
pub fn random_bandlimited_field(grid: &Grid, kmax: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = kmax as i64;
    let mut raw = SpectralField::zeros(grid);
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let r2 = (k1 * k1 + k2 * k2) as f64;
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if r2 == 0.0 || r2 > (kmax * kmax) as f64 {
                continue;
            }
            raw.set([k1, k2], Complex64::new(re, im) / r2);
        }
    }
    // Hermitian part: c(k) <- (c(k) + conj c(-k)) / 2
    let mut sym = SpectralField::zeros(grid);
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let c = 0.5 * (raw.get([k1, k2]) + raw.get([-k1, -k2]).conj());
            sym.set([k1, k2], c);
        }
    }
    let rms = sym.mean_square().sqrt();
    if rms > 0.0 {
        sym.scale(1.0 / rms)
    } else {
        sym
    }
}

/// Initial state for a named preset. All presets are mean-free (up to
/// `rho_mean`) and band-limited to `|k| <= n/6`.
pub fn initial_data(
    preset: Preset,
    grid: &Grid,
    seed: u64,
    params: &PresetParams,
) -> Result<SimState, SolverError> {
    let a = params.amplitude;
    let cap = grid.n() / 6;
    let (omega, rho) = match preset {
        Preset::Zero => (SpectralField::zeros(grid), SpectralField::zeros(grid)),
        Preset::TaylorGreen => (
            PhysicalField::from_fn(grid, |x, y| {
                a * 4.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
            })
            .forward(),
            SpectralField::zeros(grid),
        ),
        Preset::RhoStripe => {
            let eps = params.perturbation;
            let rho = PhysicalField::from_fn(grid, |x, y| {
                a * ((2.0 * PI * y).sin() + eps * (2.0 * PI * x).cos() * (2.0 * PI * y).cos())
            })
            .forward();
            (SpectralField::zeros(grid), rho)
        }
        Preset::RandomBandlimited => {
            let kmax = params.kmax.min(cap).max(1);
            let omega = random_bandlimited_field(grid, kmax, seed).scale(a * 2.0 * PI);
            let rho = random_bandlimited_field(grid, kmax, seed.wrapping_add(0x9e37_79b9)).scale(a);
            (omega, rho)
        }
    };
    let mut rho = rho;
    rho.coeffs_mut()[0] = Complex64::new(params.rho_mean, 0.0);
    Ok(SimState::new(0.0, omega.project_mean_zero(), rho))
}
