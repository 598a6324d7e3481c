//! Arithmetic of the bounding recursions behind the `L^p` iteration, with no
//! PDE solve involved.
//!
//! Sequences are kept as natural logarithms: `M^(2^k)` leaves the range of
//! `f64` around `k = 10`.

use std::f64::consts::LN_2;

use crate::error::OracleError;

/// Relative tolerance for comparing log-domain values.
pub const LOG_RTOL: f64 = 1e-9;
/// Absolute slack in the dominance comparison `log M_k <= log R_k`.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// Parameter set `(C0, C1, M, lambda)`; `mu = 2 + 2 lambda` is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionParams {
    c0: f64,
    c1: f64,
    m: f64,
    lambda: f64,
}

impl RecursionParams {
    pub fn new(c0: f64, c1: f64, m: f64, lambda: f64) -> Result<Self, OracleError> {
        let all_finite = [c0, c1, m, lambda].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(OracleError::InvalidParams("parameters must be finite".into()));
        }
        if c0 < 1.0 {
            return Err(OracleError::InvalidParams(format!("C0 = {c0} < 1")));
        }
        if c1 < c0 {
            return Err(OracleError::InvalidParams(format!("C1 = {c1} < C0 = {c0}")));
        }
        if m < 1.0 {
            return Err(OracleError::InvalidParams(format!("M = {m} < 1")));
        }
        if lambda < 0.0 {
            return Err(OracleError::InvalidParams(format!("lambda = {lambda} < 0")));
        }
        Ok(RecursionParams { c0, c1, m, lambda })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        2.0 + 2.0 * self.lambda
    }
}

/// Natural logs of a sequence indexed from `k = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSequence {
    pub values: Vec<f64>,
}

impl LogSequence {
    /// `log x_k`, `k >= 1`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `x_k` itself; overflows to infinity for large terms.
    pub fn exp(&self, k: usize) -> f64 {
        self.get(k).exp()
    }
}

fn check_kmax(kmax: usize) -> Result<(), OracleError> {
    if kmax == 0 {
        return Err(OracleError::InvalidArgument("kmax must be at least 1".into()));
    }
    Ok(())
}

/// `M_1 = C0 M^2`,
/// `M_{k+1} = C0 max{p_k M_k^2, p_k^{2(1+lambda)p_k/(p_k+1)} (M_k M)^{2p_k/(p_k+1)}}`, `p_k = 2^k`.
pub fn m_sequence(params: &RecursionParams, kmax: usize) -> Result<LogSequence, OracleError> {
    check_kmax(kmax)?;
    let ln_c0 = params.c0.ln();
    let ln_m = params.m.ln();
    let mut values = Vec::with_capacity(kmax);
    values.push(ln_c0 + 2.0 * ln_m);
    for k in 1..kmax {
        let prev = values[k - 1];
        let ln_p = k as f64 * LN_2;
        let p = 2f64.powi(k as i32);
        let e = 2.0 * p / (p + 1.0);
        let first = ln_p + 2.0 * prev;
        let second = (1.0 + params.lambda) * e * ln_p + e * (prev + ln_m);
        values.push(ln_c0 + first.max(second));
    }
    Ok(LogSequence { values })
}

/// `R_1 = C1 2^mu M^2`, `R_{k+1} = C1 p_k^mu R_k^2`.
pub fn r_sequence(params: &RecursionParams, kmax: usize) -> Result<LogSequence, OracleError> {
    check_kmax(kmax)?;
    let ln_c1 = params.c1.ln();
    let mu = params.mu();
    let mut values = Vec::with_capacity(kmax);
    values.push(ln_c1 + mu * LN_2 + 2.0 * params.m.ln());
    for k in 1..kmax {
        let prev = values[k - 1];
        values.push(ln_c1 + mu * k as f64 * LN_2 + 2.0 * prev);
    }
    Ok(LogSequence { values })
}

/// `log((2^mu C1)^(2^k - 1) M^(2^k))`, the closed form stated for `R_k`.
pub fn r_closed_form(params: &RecursionParams, k: usize) -> f64 {
    let two_k = 2f64.powi(k as i32);
    (two_k - 1.0) * (params.mu() * LN_2 + params.c1.ln()) + two_k * params.m.ln()
}

/// Exact solution of the `R_k` recursion: the power of two collects
/// `mu (3 2^(k-1) - k - 1)` instead of `mu (2^k - 1)`.
pub fn r_solved(params: &RecursionParams, k: usize) -> f64 {
    let two_k = 2f64.powi(k as i32);
    let e2 = 1.5 * two_k - k as f64 - 1.0;
    params.mu() * e2 * LN_2 + (two_k - 1.0) * params.c1.ln() + two_k * params.m.ln()
}

fn log_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LOG_RTOL * b.abs().max(1.0)
}

/// Comparison of a log sequence against a closed form, term by term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormCheck {
    pub agrees: bool,
    pub first_failure: Option<usize>,
    /// Largest `|a - b| / max(1, |b|)` over the checked range.
    pub max_relative_gap: f64,
}

/// Recursion against `closed(params, k)` for `k <= kmax`.
pub fn closed_form_check(
    params: &RecursionParams,
    kmax: usize,
    closed: fn(&RecursionParams, usize) -> f64,
) -> Result<ClosedFormCheck, OracleError> {
    let r = r_sequence(params, kmax)?;
    let mut first_failure = None;
    let mut max_gap: f64 = 0.0;
    for k in 1..=kmax {
        let b = closed(params, k);
        max_gap = max_gap.max((r.get(k) - b).abs() / b.abs().max(1.0));
        if first_failure.is_none() && !log_close(r.get(k), b) {
            first_failure = Some(k);
        }
    }
    Ok(ClosedFormCheck {
        agrees: first_failure.is_none(),
        first_failure,
        max_relative_gap: max_gap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dominance {
    pub holds: bool,
    pub first_failure: Option<usize>,
}

/// `log M_k <= log R_k + 1e-12` for every `k <= kmax`.
pub fn dominance_check(params: &RecursionParams, kmax: usize) -> Result<Dominance, OracleError> {
    let m = m_sequence(params, kmax)?;
    let r = r_sequence(params, kmax)?;
    let first_failure = (1..=kmax).find(|&k| m.get(k) > r.get(k) + DOMINANCE_SLACK);
    Ok(Dominance {
        holds: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformBound {
    /// `max_k (log M_k) / 2^k`
    pub extracted: f64,
    /// `log(2^mu C1 M)`
    pub bound: f64,
    pub holds: bool,
}

pub fn uniform_bound_extract(
    params: &RecursionParams,
    kmax: usize,
) -> Result<UniformBound, OracleError> {
    let m = m_sequence(params, kmax)?;
    let extracted = (1..=kmax)
        .map(|k| m.get(k) / 2f64.powi(k as i32))
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = params.mu() * LN_2 + params.c1.ln() + params.m.ln();
    Ok(UniformBound {
        extracted,
        bound,
        holds: extracted <= bound + DOMINANCE_SLACK,
    })
}

/// `prod_{j=1}^k (1 - 2^-j)`.
pub fn beta_partial(k: usize) -> Result<f64, OracleError> {
    if k == 0 {
        return Err(OracleError::InvalidArgument("k must be at least 1".into()));
    }
    Ok((1..=k).map(|j| 1.0 - 0.5f64.powi(j as i32)).product())
}

/// Infinite product, extended until a factor changes the partial product by less than `tol`.
pub fn beta_limit(tol: f64) -> Result<f64, OracleError> {
    if !(tol > 0.0) {
        return Err(OracleError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let mut beta = 0.5;
    let mut j = 1;
    loop {
        j += 1;
        let next = beta * (1.0 - 0.5f64.powi(j));
        let incr = beta - next;
        beta = next;
        if incr < tol || j > 1100 {
            return Ok(beta);
        }
    }
}

/// `sum_{k=1}^{kmax} C / 2^k`.
pub fn time_shift_sum(kmax: usize, c: f64) -> Result<f64, OracleError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("C must be positive, got {c}")));
    }
    Ok((1..=kmax).map(|k| c * 0.5f64.powi(k as i32)).sum())
}

/// Solution of `y' = a - y^2/a` started at `y0 > a`: `a coth(t + arccoth(y0/a))`.
pub fn riccati_closed_form(a: f64, y0: f64, t: f64) -> f64 {
    let s = t + (a / y0).atanh();
    a / s.tanh()
}

/// First time the closed-form solution reaches `2a`.
pub fn riccati_settling_closed_form(a: f64, y0: f64) -> f64 {
    if y0 <= 2.0 * a {
        return 0.0;
    }
    0.5f64.atanh() - (a / y0).atanh()
}

// Dormand-Prince 5(4) tableau
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step of an autonomous scalar ODE: (5th-order value, error estimate).
fn dp_step(f: &dyn Fn(f64) -> f64, y: f64, h: f64) -> (f64, f64) {
    let mut k = [0.0; 7];
    for i in 0..7 {
        let yi = y + h * (0..i).map(|j| DP_A[i][j] * k[j]).sum::<f64>();
        k[i] = f(yi);
    }
    let y5 = y + h * (0..6).map(|j| DP_A[6][j] * k[j]).sum::<f64>();
    let y4 = y + h * (0..7).map(|j| DP_B4[j] * k[j]).sum::<f64>();
    (y5, y5 - y4)
}

/// Local error target of the settling integrator (relative).
pub const RICCATI_RTOL: f64 = 1e-10;

/// Integrates `y' = a - y^2/a` from `y0` with adaptive Dormand-Prince steps
/// and returns the first time `y <= 2a` (zero if `y0 <= 2a`).
pub fn riccati_settling(a: f64, y0: f64) -> Result<f64, OracleError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("a must be positive, got {a}")));
    }
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("y0 must be non-negative, got {y0}")));
    }
    let target = 2.0 * a;
    if y0 <= target {
        return Ok(0.0);
    }
    let f = move |y: f64| a - y * y / a;
    let atol = 1e-14 * a;
    let mut t = 0.0;
    let mut y = y0;
    let mut h = 1e-3 * (y0 / f(y0)).abs();
    for _ in 0..1_000_000 {
        let (y_new, err) = dp_step(&f, y, h);
        let scale = atol + RICCATI_RTOL * y.abs().max(y_new.abs());
        let ratio = err.abs() / scale;
        if ratio <= 1.0 {
            if y_new <= target {
                return Ok(t + locate_crossing(&f, y, h, target));
            }
            t += h;
            y = y_new;
        }
        let factor = if ratio == 0.0 { 5.0 } else { 0.9 * ratio.powf(-0.2) };
        h *= factor.clamp(0.2, 5.0);
    }
    Err(OracleError::InvalidArgument("settling integrator did not converge".into()))
}

/// Step length `s` in `(0, h]` with `dp_step(y, s) = target`, by the Illinois variant of regula falsi.
fn locate_crossing(f: &dyn Fn(f64) -> f64, y: f64, h: f64, target: f64) -> f64 {
    let g = |s: f64| if s == 0.0 { y - target } else { dp_step(f, y, s).0 - target };
    let (mut lo, mut hi) = (0.0, h);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    let mut side = 0;
    for _ in 0..200 {
        let s = (lo * ghi - hi * glo) / (ghi - glo);
        let gs = g(s);
        if gs == 0.0 || (hi - lo) <= 1e-16 * hi {
            return s;
        }
        if gs > 0.0 {
            lo = s;
            glo = gs;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            ghi = gs;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}
