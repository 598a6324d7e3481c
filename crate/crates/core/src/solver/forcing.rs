use std::f64::consts::PI;

use crate::error::SolverError;
use crate::spectral::{Axis, Grid, PhysicalField, SpectralField};

/// Exponents at which the forcing class is checked; the last entry stands in for `p = infinity`.
pub const CLASS_CHECK_EXPONENTS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 256.0];

/// Source term of the vorticity equation.
#[derive(Clone, Debug, PartialEq)]
pub enum ForcingSpec {
    /// Buoyancy `rho e2`, i.e. `d1 rho` in the vorticity equation.
    Boussinesq,
    /// Navier-Stokes driven by a body force `f`; the vorticity sees `div F`, `F = (f2, -f1)`.
    CurlForced(CurlForcing),
    None,
}

impl ForcingSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ForcingSpec::Boussinesq => "boussinesq",
            ForcingSpec::CurlForced(_) => "curl_forced",
            ForcingSpec::None => "none",
        }
    }
}

/// Travelling body force `f(x, t) = M (sin 2pi(x2 + c t), sin 2pi(x1 - c t))`.
///
/// Mean-free with `||f_i||_Lp <= M` for every component and every `p`, hence
/// inside the class `||f||_Lp <= p^lambda M` for any `lambda >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurlForcing {
    amplitude: f64,
    lambda: f64,
    speed: f64,
}

impl CurlForcing {
    /// Builds the generator and checks the class bound on a reference grid.
    pub fn new(amplitude: f64, lambda: f64) -> Result<Self, SolverError> {
        Self::with_speed(amplitude, lambda, 1.0)
    }

    pub fn with_speed(amplitude: f64, lambda: f64, speed: f64) -> Result<Self, SolverError> {
        if !(amplitude >= 1.0 && amplitude.is_finite()) {
            return Err(SolverError::ForcingClass(format!(
                "amplitude M must be >= 1, got {amplitude}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(SolverError::ForcingClass(format!(
                "exponent lambda must be >= 0, got {lambda}"
            )));
        }
        let forcing = CurlForcing {
            amplitude,
            lambda,
            speed,
        };
        forcing.check_class(&Grid::new(64)?)?;
        Ok(forcing)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Samples `(f1, f2)` at time `t`.
    pub fn sample(&self, grid: &Grid, t: f64) -> (PhysicalField, PhysicalField) {
        let (m, c) = (self.amplitude, self.speed);
        let f1 = PhysicalField::from_fn(grid, |_, y| m * (2.0 * PI * (y + c * t)).sin());
        let f2 = PhysicalField::from_fn(grid, |x, _| m * (2.0 * PI * (x - c * t)).sin());
        (f1, f2)
    }

    /// `div F = d1 f2 - d2 f1` in spectral form.
    pub fn curl_hat(&self, grid: &Grid, t: f64) -> SpectralField {
        let (f1, f2) = self.sample(grid, t);
        &f2.forward().derivative(Axis::X1) - &f1.forward().derivative(Axis::X2)
    }

    fn check_class(&self, grid: &Grid) -> Result<(), SolverError> {
        for &t in &[0.0, 0.125, 0.3] {
            let (f1, f2) = self.sample(grid, t);
            for (i, f) in [f1, f2].iter().enumerate() {
                let mean = f.mean();
                if mean.abs() > 1e-12 * self.amplitude {
                    return Err(SolverError::ForcingClass(format!(
                        "component {} has mean {mean:e} at t = {t}",
                        i + 1
                    )));
                }
                for &p in &CLASS_CHECK_EXPONENTS {
                    let norm = (f.samples().iter().map(|v| v.abs().powf(p)).sum::<f64>()
                        / grid.len() as f64)
                        .powf(1.0 / p);
                    let bound = p.powf(self.lambda) * self.amplitude;
                    if norm > bound * (1.0 + 1e-12) {
                        return Err(SolverError::ForcingClass(format!(
                            "||f{}||_L{p} = {norm} exceeds p^lambda M = {bound}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
