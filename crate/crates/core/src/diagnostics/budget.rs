//! Exact budget identities evaluated as residuals along a time series.
//!
//! Time derivatives come from finite differences on the (possibly
//! non-uniform) record times; the spatial terms are evaluated at the record.

use crate::error::DiagnosticsError;
use crate::multiplier::{advect, commutator_r_advection_hat, MultiplierSymbol};
use crate::solver::{ForcingSpec, SimState};
use crate::spectral::{Axis, PhysicalField, SpectralField};

use super::zeta;

/// Accuracy order of the finite-difference time derivative used by the budget residuals.
pub const BUDGET_FD_ORDER: usize = 4;

/// Absolute floor added to budget normalizers so a fluid at rest (or starting from rest)
/// reports a bounded residual instead of dividing by zero.
pub const BUDGET_FLOOR: f64 = 1e-12;

/// Weights of the first-derivative stencil at `x0` over `nodes` (Fornberg's recursion).
pub fn derivative_weights(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![[0.0f64; 2]; n];
    if n == 0 {
        return Vec::new();
    }
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Stencil (first index, width) for a derivative of accuracy `order` at `i`.
fn stencil(len: usize, i: usize, order: usize) -> Result<(usize, usize), DiagnosticsError> {
    if len < 3 {
        return Err(DiagnosticsError::SeriesTooShort { needed: 3, got: len });
    }
    let mut width = order.max(2) + 1;
    while width > len {
        width -= 1;
    }
    let start = i.saturating_sub(width / 2).min(len - width);
    Ok((start, width))
}

/// `dy/dt` at index `i` from a stencil of accuracy `order` (reduced for short series).
pub fn time_derivative(
    ts: &[f64],
    ys: &[f64],
    i: usize,
    order: usize,
) -> Result<f64, DiagnosticsError> {
    let (start, width) = stencil(ts.len(), i, order)?;
    let w = derivative_weights(ts[i], &ts[start..start + width]);
    Ok(w.iter().zip(&ys[start..start + width]).map(|(a, b)| a * b).sum())
}

fn derivative_of_fields(
    ts: &[f64],
    fields: &[&SpectralField],
    i: usize,
    order: usize,
) -> Result<SpectralField, DiagnosticsError> {
    let (start, width) = stencil(ts.len(), i, order)?;
    let w = derivative_weights(ts[i], &ts[start..start + width]);
    let mut acc = SpectralField::zeros(fields[0].grid());
    for (k, wk) in w.iter().enumerate() {
        acc = acc.axpy(*wk, fields[start + k]);
    }
    Ok(acc)
}

/// Per-record ingredients of the energy and `L^{2p}` vorticity budgets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetSample {
    pub t: f64,
    /// `||u||^2 / 2`
    pub energy: f64,
    /// `||grad u||^2`
    pub dissipation: f64,
    /// `int rho u2` (buoyancy) or `int f.u` (body force)
    pub work: f64,
    /// `phi_{2p} / (2p)`
    pub phi_term: f64,
    /// `(2p - 1) int omega^{2p-2} |grad omega|^2`
    pub gradient_term: f64,
    /// `int S omega^{2p-1}` with `S` the vorticity source
    pub pairing: f64,
}

fn mean_of(f: &PhysicalField) -> f64 {
    f.mean()
}

impl BudgetSample {
    /// `p` is the (even) exponent of the vorticity budget.
    pub fn from_state(state: &SimState, forcing: &ForcingSpec, p: u32) -> Self {
        let (u1h, u2h) = state.velocity_hat();
        let energy = 0.5 * (u1h.mean_square() + u2h.mean_square());
        let dissipation = u1h.neg_laplacian().inner(&u1h).unwrap_or(0.0)
            + u2h.neg_laplacian().inner(&u2h).unwrap_or(0.0);
        let grid = state.grid();
        let (work, source) = match forcing {
            ForcingSpec::Boussinesq => (
                state.rho.inner(&u2h).unwrap_or(0.0),
                Some(state.rho.derivative(Axis::X1)),
            ),
            ForcingSpec::CurlForced(f) => {
                let (f1, f2) = f.sample(grid, state.t);
                let w = f1.forward().inner(&u1h).unwrap_or(0.0)
                    + f2.forward().inner(&u2h).unwrap_or(0.0);
                (w, Some(f.curl_hat(grid, state.t)))
            }
            ForcingSpec::None => (0.0, None),
        };
        let w = state.omega.inverse_unchecked();
        let w1 = state.omega.derivative(Axis::X1).inverse_unchecked();
        let w2 = state.omega.derivative(Axis::X2).inverse_unchecked();
        let two_p = 2 * p as i32;
        let phi_term = mean_of(&w.map(|v| v.powi(two_p))) / two_p as f64;
        let grad_sq = w1.zip_map(&w2, |a, b| a * a + b * b);
        let gradient_term =
            (two_p - 1) as f64 * mean_of(&w.zip_map(&grad_sq, |v, g| v.powi(two_p - 2) * g));
        let pairing = source
            .map(|s| mean_of(&s.inverse_unchecked().zip_map(&w, |a, v| a * v.powi(two_p - 1))))
            .unwrap_or(0.0);
        BudgetSample {
            t: state.t,
            energy,
            dissipation,
            work,
            phi_term,
            gradient_term,
            pairing,
        }
    }

    pub fn energy_residuals(samples: &[BudgetSample]) -> Result<Vec<f64>, DiagnosticsError> {
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let es: Vec<f64> = samples.iter().map(|s| s.energy).collect();
        (0..samples.len())
            .map(|i| Self::energy_residual_at(samples, &ts, &es, i))
            .collect()
    }

    pub(crate) fn energy_residual_at(
        samples: &[BudgetSample],
        ts: &[f64],
        es: &[f64],
        i: usize,
    ) -> Result<f64, DiagnosticsError> {
        let de = time_derivative(ts, es, i, BUDGET_FD_ORDER)?;
        let s = &samples[i];
        Ok((de + s.dissipation - s.work) / (s.dissipation + BUDGET_FLOOR))
    }

    pub fn enstrophy_residuals(samples: &[BudgetSample]) -> Result<Vec<f64>, DiagnosticsError> {
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let ps: Vec<f64> = samples.iter().map(|s| s.phi_term).collect();
        (0..samples.len())
            .map(|i| Self::enstrophy_residual_at(samples, &ts, &ps, i))
            .collect()
    }

    pub(crate) fn enstrophy_residual_at(
        samples: &[BudgetSample],
        ts: &[f64],
        ps: &[f64],
        i: usize,
    ) -> Result<f64, DiagnosticsError> {
        let dphi = time_derivative(ts, ps, i, BUDGET_FD_ORDER)?;
        let s = &samples[i];
        let scale = s.gradient_term + s.pairing.abs() + BUDGET_FLOOR;
        Ok((dphi + s.gradient_term - s.pairing) / scale)
    }
}

/// `d/dt ||u||^2/2 - (-||grad u||^2 + work)`, normalized by `||grad u||^2`.
pub fn energy_budget_residual(
    series: &[SimState],
    forcing: &ForcingSpec,
) -> Result<Vec<f64>, DiagnosticsError> {
    if series.len() < 3 {
        return Err(DiagnosticsError::SeriesTooShort {
            needed: 3,
            got: series.len(),
        });
    }
    let samples: Vec<BudgetSample> = series
        .iter()
        .map(|s| BudgetSample::from_state(s, forcing, 1))
        .collect();
    BudgetSample::energy_residuals(&samples)
}

/// Residual of `(1/2p) phi_{2p}' + (2p-1) int omega^{2p-2}|grad omega|^2 = int S omega^{2p-1}`.
pub fn enstrophy_budget_residual(
    series: &[SimState],
    forcing: &ForcingSpec,
    p: u32,
) -> Result<Vec<f64>, DiagnosticsError> {
    if p < 2 || p % 2 != 0 {
        return Err(DiagnosticsError::InvalidExponent(p as f64));
    }
    if series.len() < 3 {
        return Err(DiagnosticsError::SeriesTooShort {
            needed: 3,
            got: series.len(),
        });
    }
    let samples: Vec<BudgetSample> = series
        .iter()
        .map(|s| BudgetSample::from_state(s, forcing, p))
        .collect();
    BudgetSample::enstrophy_residuals(&samples)
}

/// Relative L2 residual of
/// `zeta_t - Lap zeta + u.grad zeta = [R, u.grad] rho - N rho` at the middle
/// record, with `zeta_t` from the three-point difference over `(prev, cur, next)`.
pub fn zeta_equation_residual(
    prev: &SimState,
    cur: &SimState,
    next: &SimState,
) -> Result<f64, DiagnosticsError> {
    zeta_equation_residual_with(&MultiplierSymbol::n(), prev, cur, next)
}

/// As [`zeta_equation_residual`] with a caller-supplied remainder symbol.
pub fn zeta_equation_residual_with(
    n_symbol: &MultiplierSymbol,
    prev: &SimState,
    cur: &SimState,
    next: &SimState,
) -> Result<f64, DiagnosticsError> {
    let ts = [prev.t, cur.t, next.t];
    let zs = [zeta(prev), zeta(cur), zeta(next)];
    let dzeta = derivative_of_fields(&ts, &[&zs[0], &zs[1], &zs[2]], 1, 2)?;

    let (u1h, u2h) = cur.velocity_hat();
    let (u1, u2) = (u1h.inverse_unchecked(), u2h.inverse_unchecked());
    let z = &zs[1];
    let linear = &(-&z.neg_laplacian()) - &advect(&u1, &u2, z);
    let forcing = &commutator_r_advection_hat(&u1h, &u2h, &cur.rho) - &n_symbol.apply(&cur.rho);
    let rhs = &linear + &forcing;
    let res = (&dzeta - &rhs).mean_square().sqrt();
    Ok(res / rhs.mean_square().sqrt().max(f64::MIN_POSITIVE))
}

/// Per-interval ratio `(d/dt log ||grad rho||^2) / ||grad u||_inf` along a series.
pub fn gronwall_ratios(series: &[SimState]) -> Result<Vec<f64>, DiagnosticsError> {
    if series.len() < 3 {
        return Err(DiagnosticsError::SeriesTooShort {
            needed: 3,
            got: series.len(),
        });
    }
    let ts: Vec<f64> = series.iter().map(|s| s.t).collect();
    let logs: Vec<f64> = series
        .iter()
        .map(|s| {
            let g = s.rho.derivative(Axis::X1).mean_square() + s.rho.derivative(Axis::X2).mean_square();
            g.max(f64::MIN_POSITIVE).ln()
        })
        .collect();
    let mut out = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let rate = time_derivative(&ts, &logs, i, 2)?;
        let grad_u = velocity_gradient_sup(s);
        out.push(if grad_u > 0.0 { rate / grad_u } else { 0.0 });
    }
    Ok(out)
}

/// `max_x |grad u(x)|` (Frobenius norm of the velocity gradient).
pub fn velocity_gradient_sup(state: &SimState) -> f64 {
    let (u1, u2) = state.velocity_hat();
    let parts: Vec<PhysicalField> = [&u1, &u2]
        .iter()
        .flat_map(|u| [u.derivative(Axis::X1), u.derivative(Axis::X2)])
        .map(|d| d.inverse_unchecked())
        .collect();
    (0..parts[0].samples().len())
        .map(|k| parts.iter().map(|p| p.samples()[k].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn fornberg_reproduces_classical_stencils() {
        let w = derivative_weights(0.0, &[-0.1, 0.0, 0.1]);
        assert!((w[0] + 5.0).abs() < 1e-12 && w[1].abs() < 1e-12 && (w[2] - 5.0).abs() < 1e-12);
        let w = derivative_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn nonuniform_derivative_is_exact_on_polynomials() {
        let ts: [f64; 6] = [0.0, 0.1, 0.25, 0.3, 0.55, 0.6];
        let ys: Vec<f64> = ts.iter().map(|t| 1.0 + 2.0 * t - t * t * t + 0.5 * t.powi(4)).collect();
        for i in 0..ts.len() {
            let t = ts[i];
            let d = time_derivative(&ts, &ys, i, 4).unwrap();
            assert!((d - (2.0 - 3.0 * t * t + 2.0 * t.powi(3))).abs() < 1e-10);
        }
        assert!(time_derivative(&ts[..2], &ys[..2], 0, 2).is_err());
    }

    fn decaying_mode(g: &Grid, t: f64) -> SimState {
        let a = (-4.0 * PI * PI * t).exp();
        let w = PhysicalField::from_fn(g, |x, _| a * (2.0 * PI * x).sin()).forward();
        let mut s = SimState::new(t, w, SpectralField::zeros(g));
        s.t = t;
        s
    }

    #[test]
    fn rest_state_residuals_vanish() {
        let g = Grid::new(16).unwrap();
        let series: Vec<SimState> = (0..3)
            .map(|i| {
                let mut s = SimState::zero(&g);
                s.t = i as f64 * 0.1;
                s
            })
            .collect();
        for r in energy_budget_residual(&series, &ForcingSpec::Boussinesq).unwrap() {
            assert_eq!(r, 0.0);
        }
        for r in enstrophy_budget_residual(&series, &ForcingSpec::Boussinesq, 2).unwrap() {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn single_decaying_mode_closes_the_l4_budget() {
        let g = Grid::new(32).unwrap();
        let h = 5e-7;
        let series: Vec<SimState> = (0..3).map(|i| decaying_mode(&g, 0.01 + i as f64 * h)).collect();
        let r = enstrophy_budget_residual(&series, &ForcingSpec::None, 2).unwrap();
        assert!(r[1].abs() < 1e-8, "residual {}", r[1]);
        let e = energy_budget_residual(&series, &ForcingSpec::None).unwrap();
        assert!(e[1].abs() < 1e-8, "energy residual {}", e[1]);
    }

    #[test]
    fn budget_rejects_odd_exponent_and_short_series() {
        let g = Grid::new(16).unwrap();
        let s = vec![SimState::zero(&g); 3];
        assert!(enstrophy_budget_residual(&s, &ForcingSpec::None, 3).is_err());
        assert!(energy_budget_residual(&s[..2], &ForcingSpec::None).is_err());
    }
}
