//! Time integration of the vorticity form
//!
//! ```text
//! omega_t - Lap omega + u.grad omega = B,    rho_t + u.grad rho = 0,
//! ```
//!
//! with `u` recovered from `omega` by Biot-Savart and `B` one of the buoyancy
//! term `d1 rho`, the curl of a prescribed body force, or nothing. Viscosity
//! is one and the density carries no diffusion. Diffusion is integrated
//! exactly per mode inside an integrating-factor RK4 scheme; advection is
//! explicit and dealiased by the 2/3 rule.

mod forcing;
mod initial;
mod run;

use crate::error::SolverError;
use crate::multiplier::{advect, biot_savart_unchecked};
use crate::spectral::{Axis, Grid, PhysicalField, SpectralField};

pub use forcing::{CurlForcing, ForcingSpec};
pub use initial::{initial_data, random_bandlimited_field, Preset, PresetParams};
pub use run::{initial_state, integrate, run, RunSummary, StopReason};

/// Velocity floor used by the CFL rule when the flow is at rest.
pub const VELOCITY_FLOOR: f64 = 1e-12;

/// Prognostic state: time, spectral vorticity and density, and (only when the
/// nonzero-mean variant is enabled) the spatially uniform velocity component.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub omega: SpectralField,
    pub rho: SpectralField,
    pub mean_velocity: Option<[f64; 2]>,
}

impl SimState {
    pub fn new(t: f64, omega: SpectralField, rho: SpectralField) -> Self {
        SimState {
            t,
            omega,
            rho,
            mean_velocity: None,
        }
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::new(0.0, SpectralField::zeros(grid), SpectralField::zeros(grid))
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn with_mean_velocity(mut self, mean: [f64; 2]) -> Self {
        self.mean_velocity = Some(mean);
        self
    }

    pub fn mean(&self) -> [f64; 2] {
        self.mean_velocity.unwrap_or([0.0, 0.0])
    }

    /// Spectral velocity, mean component included.
    pub fn velocity_hat(&self) -> (SpectralField, SpectralField) {
        let (mut u1, mut u2) = biot_savart_unchecked(&self.omega);
        let [m1, m2] = self.mean();
        u1.coeffs_mut()[0].re += m1;
        u2.coeffs_mut()[0].re += m2;
        (u1, u2)
    }

    pub fn velocity(&self) -> (PhysicalField, PhysicalField) {
        let (u1, u2) = self.velocity_hat();
        (u1.inverse_unchecked(), u2.inverse_unchecked())
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.omega.is_finite()
            && self.rho.is_finite()
            && self.mean().iter().all(|v| v.is_finite())
    }
}

/// Non-diffusive part of the right-hand side.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub omega: SpectralField,
    pub rho: SpectralField,
    pub mean_velocity: [f64; 2],
}

/// `(-(u.grad omega) + B, -(u.grad rho))`, both dealiased and mean-free.
pub fn explicit_rhs(state: &SimState, forcing: &ForcingSpec) -> Result<Tendency, SolverError> {
    let (u1, u2) = state.velocity();
    let mut domega = (-&advect(&u1, &u2, &state.omega)).project_mean_zero();
    let drho = (-&advect(&u1, &u2, &state.rho)).project_mean_zero();
    let mut dmean = [0.0, 0.0];
    match forcing {
        ForcingSpec::Boussinesq => {
            domega = &domega + &state.rho.derivative(Axis::X1);
            if state.mean_velocity.is_some() {
                dmean = [0.0, state.rho.mean()];
            }
        }
        ForcingSpec::CurlForced(f) => {
            domega = &domega + &f.curl_hat(state.grid(), state.t);
        }
        ForcingSpec::None => {}
    }
    if !domega.is_finite() || !drho.is_finite() {
        return Err(SolverError::BlowUp { t: state.t });
    }
    Ok(Tendency {
        omega: domega,
        rho: drho,
        mean_velocity: dmean,
    })
}

/// Per-mode viscous decay `exp(-|kappa|^2 tau)`.
fn decay_factors(grid: &Grid, tau: f64) -> Vec<f64> {
    let n = grid.n();
    let mut w = Vec::with_capacity(grid.len());
    for a in 0..n {
        let k1 = grid.kappa(a);
        for b in 0..n {
            let k2 = grid.kappa(b);
            w.push((-(k1 * k1 + k2 * k2) * tau).exp());
        }
    }
    w
}

fn stage(base: &SimState, t: f64, omega: SpectralField, rho: SpectralField, mean: [f64; 2]) -> SimState {
    SimState {
        t,
        omega,
        rho,
        mean_velocity: base.mean_velocity.map(|_| mean),
    }
}

fn shift(m: [f64; 2], s: f64, d: [f64; 2]) -> [f64; 2] {
    [m[0] + s * d[0], m[1] + s * d[1]]
}

/// One integrating-factor RK4 step of size `dt`.
pub fn step(state: &SimState, dt: f64, forcing: &ForcingSpec) -> Result<SimState, SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::InvalidStep(dt));
    }
    let grid = state.grid().clone();
    let half = decay_factors(&grid, 0.5 * dt);
    let full: Vec<f64> = half.iter().map(|e| e * e).collect();
    let t = state.t;
    let w = &state.omega;
    let r = &state.rho;
    let m = state.mean();

    let a = explicit_rhs(state, forcing)?;
    let sa = stage(
        state,
        t + 0.5 * dt,
        w.axpy(0.5 * dt, &a.omega).weighted(&half),
        r.axpy(0.5 * dt, &a.rho),
        shift(m, 0.5 * dt, a.mean_velocity),
    );
    let b = explicit_rhs(&sa, forcing)?;
    let w_half = w.weighted(&half);
    let sb = stage(
        state,
        t + 0.5 * dt,
        w_half.axpy(0.5 * dt, &b.omega),
        r.axpy(0.5 * dt, &b.rho),
        shift(m, 0.5 * dt, b.mean_velocity),
    );
    let c = explicit_rhs(&sb, forcing)?;
    let w_full = w.weighted(&full);
    let sc = stage(
        state,
        t + dt,
        w_full.axpy(dt, &c.omega.weighted(&half)),
        r.axpy(dt, &c.rho),
        shift(m, dt, c.mean_velocity),
    );
    let d = explicit_rhs(&sc, forcing)?;

    let bc = (&b.omega + &c.omega).weighted(&half);
    let incr = a.omega.weighted(&full).axpy(2.0, &bc).axpy(1.0, &d.omega);
    let omega = w_full.axpy(dt / 6.0, &incr);
    let rincr = a.rho.axpy(2.0, &b.rho).axpy(2.0, &c.rho).axpy(1.0, &d.rho);
    let rho = r.axpy(dt / 6.0, &rincr);
    let mut mean = m;
    for i in 0..2 {
        mean[i] += dt / 6.0
            * (a.mean_velocity[i]
                + 2.0 * b.mean_velocity[i]
                + 2.0 * c.mean_velocity[i]
                + d.mean_velocity[i]);
    }
    let next = stage(state, t + dt, omega, rho, mean);
    if !next.is_finite() {
        return Err(SolverError::BlowUp { t: t + dt });
    }
    Ok(next)
}

/// Step-size policy: CFL-limited, clamped to `[dt_min, dt_max]`, never past `t_end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub t_end: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            cfl: 0.4,
            dt_max: 1e-2,
            dt_min: 1e-8,
            t_end: 1.0,
        }
    }
}

impl StepPolicy {
    /// Fixed step `dt` up to `t_end`.
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        StepPolicy {
            cfl: 1.0,
            dt_max: dt,
            dt_min: dt,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::InvalidPolicy(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(SolverError::InvalidPolicy(format!(
                "need 0 < dt_min <= dt_max, got dt_min = {}, dt_max = {}",
                self.dt_min, self.dt_max
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::InvalidPolicy(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// `clamp(cfl dx / max(|u|_inf, floor), dt_min, dt_max)`, capped at `t_end - t`.
pub fn choose_dt(state: &SimState, policy: &StepPolicy) -> f64 {
    let (u1, u2) = state.velocity();
    let umax = u1
        .samples()
        .iter()
        .zip(u2.samples())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let dx = state.grid().dx();
    let dt = (policy.cfl * dx / umax.max(VELOCITY_FLOOR)).clamp(policy.dt_min, policy.dt_max);
    dt.min(policy.t_end - state.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_x1(grid: &Grid, amp: f64) -> SpectralField {
        PhysicalField::from_fn(grid, |x, _| amp * (2.0 * PI * x).sin()).forward()
    }

    fn taylor_green(grid: &Grid) -> SpectralField {
        PhysicalField::from_fn(grid, |x, y| {
            4.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
        })
        .forward()
    }

    fn rel_err(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).mean_square().sqrt() / b.mean_square().sqrt()
    }

    #[test]
    fn rest_state_has_zero_tendency() {
        let g = Grid::new(16).unwrap();
        let s = SimState::zero(&g);
        let d = explicit_rhs(&s, &ForcingSpec::Boussinesq).unwrap();
        assert_eq!(d.omega.max_abs_coeff(), 0.0);
        assert_eq!(d.rho.max_abs_coeff(), 0.0);
        let next = step(&s, 0.01, &ForcingSpec::Boussinesq).unwrap();
        assert_eq!(next.omega.max_abs_coeff() + next.rho.max_abs_coeff(), 0.0);
        assert!((next.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn unidirectional_shear_has_no_advection() {
        let g = Grid::new(32).unwrap();
        let s = SimState::new(0.0, sine_x1(&g, 1.0), SpectralField::zeros(&g));
        let d = explicit_rhs(&s, &ForcingSpec::Boussinesq).unwrap();
        assert!(d.omega.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn buoyancy_tendency_is_d1_rho() {
        let g = Grid::new(32).unwrap();
        let s = SimState::new(0.0, SpectralField::zeros(&g), sine_x1(&g, 1.0));
        let d = explicit_rhs(&s, &ForcingSpec::Boussinesq).unwrap();
        let expect = PhysicalField::from_fn(&g, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!((&d.omega.inverse().unwrap() - &expect).max_abs() < 1e-12);
        assert!(d.rho.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn single_mode_decays_exactly() {
        let g = Grid::new(32).unwrap();
        let mut s = SimState::new(0.0, sine_x1(&g, 1.0), SpectralField::zeros(&g));
        let dt = 1e-3;
        for _ in 0..50 {
            s = step(&s, dt, &ForcingSpec::Boussinesq).unwrap();
        }
        let expect = sine_x1(&g, (-4.0 * PI * PI * s.t).exp());
        assert!(rel_err(&s.omega, &expect) < 1e-10);
    }

    #[test]
    fn taylor_green_decays_at_rate_eight_pi_squared() {
        let g = Grid::new(64).unwrap();
        let w0 = taylor_green(&g);
        let mut s = SimState::new(0.0, w0.clone(), SpectralField::zeros(&g));
        for _ in 0..10 {
            s = step(&s, 1e-3, &ForcingSpec::None).unwrap();
        }
        let expect = w0.scale((-8.0 * PI * PI * s.t).exp());
        assert!(rel_err(&s.omega, &expect) < 1e-6);
    }

    #[test]
    fn step_rejects_bad_dt() {
        let g = Grid::new(16).unwrap();
        let s = SimState::zero(&g);
        assert!(matches!(
            step(&s, 0.0, &ForcingSpec::None),
            Err(SolverError::InvalidStep(_))
        ));
        assert!(step(&s, f64::NAN, &ForcingSpec::None).is_err());
    }

    #[test]
    fn blow_up_is_reported_with_time() {
        let g = Grid::new(16).unwrap();
        let mut w = SpectralField::zeros(&g);
        w.coeffs_mut()[g.index_of(1) * 16 + g.index_of(2)] = num_complex::Complex64::new(1e300, 0.0);
        w.coeffs_mut()[g.index_of(-1) * 16 + g.index_of(-2)] = num_complex::Complex64::new(1e300, 0.0);
        let mut s = SimState::new(0.5, w.clone(), w);
        s.rho = s.rho.scale(1e10);
        let err = step(&s, 0.1, &ForcingSpec::Boussinesq).unwrap_err();
        assert!(matches!(err, SolverError::BlowUp { .. }));
    }

    #[test]
    fn choose_dt_examples() {
        let g = Grid::new(64).unwrap();
        let policy = StepPolicy {
            cfl: 0.4,
            dt_max: 0.05,
            dt_min: 1e-6,
            t_end: 1.0,
        };
        assert_eq!(choose_dt(&SimState::zero(&g), &policy), 0.05);

        // omega = 2 pi sin(2 pi x1) gives u2 = -cos(2 pi x1), max |u| = 1
        let s = SimState::new(0.0, sine_x1(&g, 2.0 * PI), SpectralField::zeros(&g));
        assert!((choose_dt(&s, &policy) - 0.00625).abs() < 1e-12);

        let mut late = SimState::zero(&g);
        late.t = 1.0 - 1e-9;
        assert!((choose_dt(&late, &policy) - 1e-9).abs() < 1e-15);
    }

    #[test]
    fn policy_validation() {
        assert!(StepPolicy::default().validate().is_ok());
        let bad = StepPolicy {
            cfl: 1.5,
            ..StepPolicy::default()
        };
        assert!(bad.validate().is_err());
        let bad = StepPolicy {
            dt_min: 1.0,
            dt_max: 0.1,
            ..StepPolicy::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn density_mean_is_conserved_and_fields_stay_real() {
        let g = Grid::new(32).unwrap();
        let params = PresetParams::default();
        let mut s = initial_data(Preset::RandomBandlimited, &g, 3, &params).unwrap();
        s.rho.coeffs_mut()[0].re = 0.25;
        for _ in 0..20 {
            s = step(&s, 2e-3, &ForcingSpec::Boussinesq).unwrap();
            assert!(s.omega.hermitian_defect() < 1e-12 * s.omega.max_abs_coeff());
            assert!(s.rho.hermitian_defect() < 1e-12 * s.rho.max_abs_coeff());
        }
        assert_eq!(s.rho.mean(), 0.25);
    }

    #[test]
    fn unforced_energy_does_not_increase() {
        let g = Grid::new(32).unwrap();
        let mut s = initial_data(Preset::RandomBandlimited, &g, 11, &PresetParams::default()).unwrap();
        s.rho = SpectralField::zeros(&g);
        let energy = |s: &SimState| {
            let (u1, u2) = s.velocity_hat();
            0.5 * (u1.mean_square() + u2.mean_square())
        };
        let mut e = energy(&s);
        for _ in 0..30 {
            s = step(&s, 5e-3, &ForcingSpec::None).unwrap();
            let e2 = energy(&s);
            assert!(e2 <= e + 1e-12, "{e2} > {e}");
            e = e2;
        }
    }

    #[test]
    fn mean_velocity_grows_linearly_with_mean_density() {
        let g = Grid::new(16).unwrap();
        let mut rho = SpectralField::zeros(&g);
        rho.coeffs_mut()[0].re = 0.5;
        let mut s = SimState::new(0.0, SpectralField::zeros(&g), rho).with_mean_velocity([0.0, 0.0]);
        for _ in 0..10 {
            s = step(&s, 0.1, &ForcingSpec::Boussinesq).unwrap();
        }
        let m = s.mean();
        assert!(m[0].abs() < 1e-15);
        assert!((m[1] - 0.5).abs() < 1e-12);
    }
}
