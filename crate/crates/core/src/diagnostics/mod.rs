//! Norms, integral functionals, budget residuals, growth fitting and the
//! resolution monitor.
//!
//! Integrals over the torus are grid averages (the torus has unit area).
//! `L^infinity` is the grid maximum, which is an approximation for fields
//! that are not band-limited.

mod budget;
mod growth;
mod probes;
mod record;

use crate::error::DiagnosticsError;
use crate::multiplier::apply_r;
use crate::solver::SimState;
use crate::spectral::{Axis, PhysicalField, SpectralField};

pub use budget::{
    derivative_weights, energy_budget_residual, enstrophy_budget_residual, gronwall_ratios,
    time_derivative, zeta_equation_residual, zeta_equation_residual_with, BudgetSample,
};
pub use growth::{growth_fit, GrowthFit};
pub use probes::{inequality_probe_gn, inequality_probe_nash};
pub use record::{DiagnosticsRecord, RecordBuilder};

/// A run is under-resolved once this fraction of the density variance sits beyond `n/4`.
pub const TAIL_FRACTION_LIMIT: f64 = 1e-6;

fn check_exponent(p: f64, min: f64) -> Result<(), DiagnosticsError> {
    if p.is_nan() || p < min {
        return Err(DiagnosticsError::InvalidExponent(p));
    }
    Ok(())
}

/// `(mean |f|^p)^{1/p}`; `p = infinity` gives the grid maximum.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64, DiagnosticsError> {
    check_exponent(p, 1.0)?;
    Ok(lp_of_samples(f.samples(), p))
}

pub(crate) fn lp_of_samples(samples: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    // factor out the maximum so large p does not overflow
    let mean = samples
        .iter()
        .map(|v| (v.abs() / scale).powf(p))
        .sum::<f64>()
        / samples.len() as f64;
    scale * mean.powf(1.0 / p)
}

/// `(sum (1 + |kappa|^2)^s |coeff|^2)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    sobolev_sq(f, s).sqrt()
}

pub(crate) fn sobolev_sq(f: &SpectralField, s: f64) -> f64 {
    let n = f.grid().n();
    let g = f.grid();
    let mut acc = 0.0;
    for a in 0..n {
        let k1 = g.kappa(a);
        for b in 0..n {
            let k2 = g.kappa(b);
            let c = f.coeffs()[a * n + b];
            acc += (1.0 + k1 * k1 + k2 * k2).powf(s) * c.norm_sqr();
        }
    }
    acc
}

/// `mean |omega|^p`.
pub fn phi_p(omega: &PhysicalField, p: f64) -> Result<f64, DiagnosticsError> {
    check_exponent(p, 2.0)?;
    Ok(omega.samples().iter().map(|v| v.abs().powf(p)).sum::<f64>() / omega.samples().len() as f64)
}

/// Modified vorticity `omega - R rho`.
pub fn zeta(state: &SimState) -> SpectralField {
    &state.omega - &apply_r(&state.rho)
}

/// `sum_k mean |d_k zeta|^p`.
pub fn psi_p(zeta: &SpectralField, p: f64) -> Result<f64, DiagnosticsError> {
    check_exponent(p, 2.0)?;
    let mut acc = 0.0;
    for axis in [Axis::X1, Axis::X2] {
        let d = zeta.derivative(axis).inverse_unchecked();
        acc += phi_p(&d, p)?;
    }
    Ok(acc)
}

/// `|| |grad f| ||_Lp` with the Euclidean pointwise gradient magnitude.
pub fn gradient_lp_norm(f: &SpectralField, p: f64) -> Result<f64, DiagnosticsError> {
    check_exponent(p, 1.0)?;
    let d1 = f.derivative(Axis::X1).inverse_unchecked();
    let d2 = f.derivative(Axis::X2).inverse_unchecked();
    Ok(lp_of_samples(d1.zip_map(&d2, f64::hypot).samples(), p))
}

/// Fraction of `sum |rho_hat|^2` carried by modes with `max(|k1|, |k2|) > n/4`.
pub fn resolution_monitor(rho: &SpectralField) -> f64 {
    let quarter = rho.grid().n() as i64 / 4;
    let mut tail = 0.0;
    let mut total = 0.0;
    let n = rho.grid().n();
    for a in 0..n {
        let k1 = rho.grid().mode(a).abs();
        for b in 0..n {
            let k2 = rho.grid().mode(b).abs();
            let e = rho.coeffs()[a * n + b].norm_sqr();
            total += e;
            if k1.max(k2) > quarter {
                tail += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

pub fn is_under_resolved(rho: &SpectralField) -> bool {
    resolution_monitor(rho) > TAIL_FRACTION_LIMIT
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn sine(g: &Grid) -> PhysicalField {
        PhysicalField::from_fn(g, |x, _| (2.0 * PI * x).sin())
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::new(32).unwrap();
        let c = PhysicalField::constant(&g, -3.0);
        for p in [1.0, 2.0, 7.5, f64::INFINITY] {
            assert!((lp_norm(&c, p).unwrap() - 3.0).abs() < 1e-14);
        }
        let s = sine(&g);
        assert!((lp_norm(&s, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((lp_norm(&s, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-14);
        assert!(matches!(
            lp_norm(&s, 0.5),
            Err(DiagnosticsError::InvalidExponent(_))
        ));
    }

    #[test]
    fn lp_norm_handles_large_exponents() {
        let g = Grid::new(16).unwrap();
        let f = PhysicalField::constant(&g, 1e10);
        assert!((lp_norm(&f, 64.0).unwrap() / 1e10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_examples() {
        let g = Grid::new(32).unwrap();
        let s = sine(&g);
        let h = s.forward();
        assert!((sobolev_norm(&h, 0.0) - lp_norm(&s, 2.0).unwrap()).abs() < 1e-12);
        let expect = ((1.0 + 4.0 * PI * PI) / 2.0).sqrt();
        assert!((sobolev_norm(&h, 1.0) - expect).abs() < 1e-12);
        assert_eq!(sobolev_norm(&SpectralField::zeros(&g), 1.0), 0.0);
    }

    #[test]
    fn phi_examples() {
        let g = Grid::new(32).unwrap();
        let c = PhysicalField::constant(&g, 1.5);
        assert!((phi_p(&c, 3.0).unwrap() - 1.5f64.powi(3)).abs() < 1e-13);
        let s = sine(&g);
        assert!((phi_p(&s, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((phi_p(&s, 4.0).unwrap() - 0.375).abs() < 1e-14);
        assert!(phi_p(&s, 1.0).is_err());
        let scaled = s.map(|v| -2.0 * v);
        assert!((phi_p(&scaled, 4.0).unwrap() - 16.0 * 0.375).abs() < 1e-12);
    }

    #[test]
    fn zeta_examples() {
        let g = Grid::new(32).unwrap();
        let w = PhysicalField::from_fn(&g, |x, y| (2.0 * PI * (x + y)).cos()).forward();
        let s = SimState::new(0.0, w.clone(), SpectralField::zeros(&g));
        assert_eq!(zeta(&s), w);

        let stripe = PhysicalField::from_fn(&g, |_, y| (2.0 * PI * y).sin()).forward();
        let s = SimState::new(0.0, SpectralField::zeros(&g), stripe);
        assert!(zeta(&s).max_abs_coeff() < 1e-15);

        let rho = sine(&g).forward();
        let s = SimState::new(0.0, SpectralField::zeros(&g), rho.clone());
        let z = zeta(&s);
        let sym = Complex64::new(0.0, -2.0 * PI / (1.0 + 4.0 * PI * PI));
        assert!((z.get([1, 0]) - sym * rho.get([1, 0])).norm() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let g = Grid::new(32).unwrap();
        assert_eq!(psi_p(&PhysicalField::constant(&g, 2.0).forward(), 2.0).unwrap(), 0.0);
        let s = sine(&g).forward();
        assert!((psi_p(&s, 2.0).unwrap() - 2.0 * PI * PI).abs() < 1e-11);
        let two = PhysicalField::from_fn(&g, |x, y| (2.0 * PI * x).sin() + (2.0 * PI * y).sin()).forward();
        assert!((psi_p(&two, 2.0).unwrap() - 4.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn resolution_monitor_examples() {
        let g = Grid::new(48).unwrap();
        let low = PhysicalField::from_fn(&g, |x, y| (2.0 * PI * 6.0 * x).sin() * (2.0 * PI * 3.0 * y).cos()).forward();
        assert!(resolution_monitor(&low) < 1e-28);
        let high = SpectralField::real_mode(&g, [16, 0], Complex64::new(1.0, 0.0));
        assert_eq!(resolution_monitor(&high), 1.0);
        assert_eq!(resolution_monitor(&SpectralField::zeros(&g)), 0.0);
        assert!(is_under_resolved(&high));
        assert!(!is_under_resolved(&low));
    }

    #[test]
    fn even_lp_norms_are_exact_for_band_limited_fields() {
        let g = Grid::new(32).unwrap();
        let f = crate::solver::random_bandlimited_field(&g, 5, 3);
        let p = f.inverse().unwrap();
        let l2 = lp_norm(&p, 2.0).unwrap();
        assert!((l2 - f.mean_square().sqrt()).abs() < 1e-12 * l2);
    }
}
