use crate::solver::{ForcingSpec, SimState};

use super::budget::BudgetSample;
use super::{gradient_lp_norm, lp_of_samples, resolution_monitor, sobolev_sq, zeta};

/// Exponent of the vorticity budget written to the `enstrophy_residual` column.
pub const RECORD_ENSTROPHY_EXPONENT: u32 = 2;

/// One row of monitored quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub h2_u: f64,
    pub l2_rho: f64,
    pub h1_rho: f64,
    /// `(p, ||omega||_Lp)` for the configured exponents.
    pub lp_omega: Vec<(f64, f64)>,
    pub linf_omega: f64,
    /// `(p, || |grad zeta| ||_Lp)` for the configured exponents.
    pub lp_grad_zeta: Vec<(f64, f64)>,
    pub energy_residual: f64,
    pub enstrophy_residual: f64,
    pub tail_fraction_rho: f64,
    pub dt_used: f64,
}

fn p_label(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

impl DiagnosticsRecord {
    /// Norms of a state; the residual columns are left at zero.
    pub fn from_state(state: &SimState, p_list: &[f64], dt_used: f64) -> Self {
        let (u1, u2) = state.velocity_hat();
        let h = |s: f64| (sobolev_sq(&u1, s) + sobolev_sq(&u2, s)).sqrt();
        let w = state.omega.inverse_unchecked();
        let z = zeta(state);
        DiagnosticsRecord {
            t: state.t,
            l2_u: h(0.0),
            h1_u: h(1.0),
            h2_u: h(2.0),
            l2_rho: sobolev_sq(&state.rho, 0.0).sqrt(),
            h1_rho: sobolev_sq(&state.rho, 1.0).sqrt(),
            lp_omega: p_list.iter().map(|&p| (p, lp_of_samples(w.samples(), p))).collect(),
            linf_omega: lp_of_samples(w.samples(), f64::INFINITY),
            lp_grad_zeta: p_list
                .iter()
                .map(|&p| (p, gradient_lp_norm(&z, p).unwrap_or(f64::NAN)))
                .collect(),
            energy_residual: 0.0,
            enstrophy_residual: 0.0,
            tail_fraction_rho: resolution_monitor(&state.rho),
            dt_used,
        }
    }

    pub fn header(p_list: &[f64]) -> Vec<String> {
        let mut h: Vec<String> = ["t", "l2_u", "h1_u", "h2_u", "l2_rho", "h1_rho"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(p_list.iter().map(|&p| format!("lp_omega_{}", p_label(p))));
        h.push("linf_omega".into());
        h.extend(p_list.iter().map(|&p| format!("lp_grad_zeta_{}", p_label(p))));
        for s in ["energy_residual", "enstrophy_residual", "tail_fraction_rho", "dt_used"] {
            h.push(s.into());
        }
        h
    }

    /// Values in [`DiagnosticsRecord::header`] order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.l2_u, self.h1_u, self.h2_u, self.l2_rho, self.h1_rho];
        v.extend(self.lp_omega.iter().map(|x| x.1));
        v.push(self.linf_omega);
        v.extend(self.lp_grad_zeta.iter().map(|x| x.1));
        v.extend([
            self.energy_residual,
            self.enstrophy_residual,
            self.tail_fraction_rho,
            self.dt_used,
        ]);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Turns a stream of states into records, filling the budget residuals
/// from neighbouring samples. Records are released two samples late so the
/// time derivatives are centred; [`RecordBuilder::finish`] flushes the rest
/// with one-sided stencils.
pub struct RecordBuilder {
    p_list: Vec<f64>,
    forcing: ForcingSpec,
    samples: Vec<BudgetSample>,
    /// global index of `samples[0]`
    offset: usize,
    pending: Vec<DiagnosticsRecord>,
    /// global index of `pending[0]`
    next: usize,
}

const LAG: usize = 2;
const STENCIL: usize = 2 * LAG + 1;

impl RecordBuilder {
    pub fn new(p_list: &[f64], forcing: ForcingSpec) -> Self {
        RecordBuilder {
            p_list: p_list.to_vec(),
            forcing,
            samples: Vec::new(),
            offset: 0,
            pending: Vec::new(),
            next: 0,
        }
    }

    pub fn push(&mut self, state: &SimState, dt_used: f64) -> Vec<DiagnosticsRecord> {
        self.samples
            .push(BudgetSample::from_state(state, &self.forcing, RECORD_ENSTROPHY_EXPONENT));
        self.pending
            .push(DiagnosticsRecord::from_state(state, &self.p_list, dt_used));
        let total = self.offset + self.samples.len();
        let mut out = Vec::new();
        while !self.pending.is_empty() && total >= STENCIL && self.next + LAG < total {
            out.push(self.release());
        }
        if self.samples.len() > 2 * STENCIL {
            let drop = self.samples.len() - STENCIL;
            self.samples.drain(..drop);
            self.offset += drop;
        }
        out
    }

    pub fn finish(mut self) -> Vec<DiagnosticsRecord> {
        let mut out = Vec::new();
        while !self.pending.is_empty() {
            out.push(self.release());
        }
        out
    }

    fn release(&mut self) -> DiagnosticsRecord {
        let mut rec = self.pending.remove(0);
        let i = self.next - self.offset;
        if self.samples.len() >= 3 {
            let ts: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
            let es: Vec<f64> = self.samples.iter().map(|s| s.energy).collect();
            let ps: Vec<f64> = self.samples.iter().map(|s| s.phi_term).collect();
            rec.energy_residual =
                BudgetSample::energy_residual_at(&self.samples, &ts, &es, i).unwrap_or(f64::NAN);
            rec.enstrophy_residual =
                BudgetSample::enstrophy_residual_at(&self.samples, &ts, &ps, i).unwrap_or(f64::NAN);
        }
        self.next += 1;
        rec
    }
}
