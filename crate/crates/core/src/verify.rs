//! Property suites behind `bsq verify`, at pinned desk-scale parameters.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    enstrophy_budget_residual, inequality_probe_gn, inequality_probe_nash,
    zeta_equation_residual, zeta_equation_residual_with,
};
use crate::error::HarnessError;
use crate::multiplier::{
    biot_savart, commutator_identity_residual, commutator_t_identity_residual, divergence_l2,
    MultiplierSymbol,
};
use crate::oracle::{
    beta_limit, beta_partial, closed_form_check, dominance_check, r_closed_form, r_solved,
    riccati_settling, riccati_settling_closed_form, time_shift_sum, uniform_bound_extract,
    RecursionParams,
};
use crate::solver::{
    integrate, random_bandlimited_field, CurlForcing, ForcingSpec, SimState, StepPolicy,
};
use crate::spectral::{Axis, Grid, PhysicalField, SpectralField};

/// One measured property with its verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: format!("< {limit:e}"),
            pass: measured < limit,
        }
    }

    pub fn above(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: format!("> {limit:e}"),
            pass: measured > limit,
        }
    }

    pub fn flag(name: &str, ok: bool, measured: f64, threshold: &str) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: threshold.into(),
            pass: ok,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Operators,
    Budgets,
    Recursion,
    NashLemma,
    All,
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "operators" => Ok(Suite::Operators),
            "budgets" => Ok(Suite::Budgets),
            "recursion" => Ok(Suite::Recursion),
            "nash-lemma" => Ok(Suite::NashLemma),
            "all" => Ok(Suite::All),
            other => Err(HarnessError::Usage(format!(
                "unknown suite '{other}' (expected operators, budgets, recursion, nash-lemma or all)"
            ))),
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Operators => operators_suite(64),
        Suite::Budgets => budgets_suite(),
        Suite::Recursion => recursion_suite(200, 30, 20240607),
        Suite::NashLemma => nash_lemma_suite(),
        Suite::All => [
            Suite::Operators,
            Suite::Budgets,
            Suite::Recursion,
            Suite::NashLemma,
        ]
        .into_iter()
        .flat_map(run_suite)
        .collect(),
    }
}

/// Divergence-free velocity and density, band-limited so every product in
/// the identities stays inside the dealiasing window.
pub fn operator_inputs(grid: &Grid, seed: u64) -> (SpectralField, SpectralField, SpectralField) {
    let kmax = grid.n() / 8;
    let omega = random_bandlimited_field(grid, kmax, seed);
    let rho = random_bandlimited_field(grid, kmax, seed ^ 0x5eed);
    let (u1, u2) = biot_savart(&omega).expect("mean-free vorticity");
    (u1, u2, rho)
}

pub fn operators_suite(n: usize) -> Vec<Check> {
    let grid = Grid::new(n).expect("valid grid");
    let mut worst_plain: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut worst_div: f64 = 0.0;
    let ts = [
        MultiplierSymbol::identity(),
        MultiplierSymbol::helmholtz_power(-1.0),
        MultiplierSymbol::derivative(Axis::X2),
        MultiplierSymbol::r(),
    ];
    for seed in 0..4 {
        let (u1, u2, rho) = operator_inputs(&grid, seed);
        worst_div = worst_div.max(divergence_l2(&u1, &u2));
        worst_plain = worst_plain.max(commutator_identity_residual(&u1, &u2, &rho));
        for t in &ts {
            worst_t = worst_t.max(commutator_t_identity_residual(t, &u1, &u2, &rho));
        }
    }
    let u1 = PhysicalField::from_fn(&grid, |x, _| (2.0 * PI * x).sin()).forward();
    let u2 = SpectralField::zeros(&grid);
    let rho = PhysicalField::from_fn(&grid, |x, y| (2.0 * PI * x).cos() + (2.0 * PI * y).sin()).forward();
    let control = commutator_identity_residual(&u1, &u2, &rho);

    // N = -d1 - Lap R on a generic field
    let f = random_bandlimited_field(&grid, n / 4, 99);
    let lap_r = MultiplierSymbol::r().apply(&f).neg_laplacian();
    let expect = &(-&f.derivative(Axis::X1)) + &lap_r;
    let n_defect = (&MultiplierSymbol::n().apply(&f) - &expect).max_abs_coeff() / expect.max_abs_coeff();

    vec![
        Check::below("biot-savart divergence", worst_div, 1e-12),
        Check::below("commutator identity residual", worst_plain, 1e-10),
        Check::below("commutator T-identity residual", worst_t, 1e-10),
        Check::above("non-divergence-free control residual", control, 1e-2),
        Check::below("N = -d1 - Lap R defect", n_defect, 1e-13),
    ]
}

fn decaying_mode(grid: &Grid, t: f64) -> SimState {
    let a = (-4.0 * PI * PI * t).exp();
    let w = PhysicalField::from_fn(grid, |x, _| a * (2.0 * PI * x).sin()).forward();
    SimState::new(t, w, SpectralField::zeros(grid))
}

/// Collects the states of a fixed-step run, every `cadence` steps.
pub fn sample_states(
    initial: SimState,
    forcing: &ForcingSpec,
    dt: f64,
    t_end: f64,
    cadence: usize,
) -> Vec<SimState> {
    let mut states = Vec::new();
    integrate(
        initial,
        forcing,
        &StepPolicy::fixed(dt, t_end),
        cadence,
        &[2.0],
        &mut |_| {},
        &mut |s| states.push(s.clone()),
    )
    .expect("valid fixed-step run");
    states
}

/// Max over interior records of the modified-vorticity residual for a given symbol.
pub fn zeta_residual_max(states: &[SimState], symbol: Option<&MultiplierSymbol>) -> f64 {
    states
        .windows(3)
        .map(|w| zeta_residual(symbol, &w[0], &w[1], &w[2]))
        .fold(0.0, f64::max)
}

fn zeta_residual(symbol: Option<&MultiplierSymbol>, a: &SimState, b: &SimState, c: &SimState) -> f64 {
    match symbol {
        Some(s) => zeta_equation_residual_with(s, a, b, c),
        None => zeta_equation_residual(a, b, c),
    }
    .expect("three records")
}

/// Max modified-vorticity residual of one fixed-step run, evaluated with
/// record spacing `c * dt` for each `c` in `cadences`.
pub fn zeta_residual_by_cadence(
    initial: SimState,
    forcing: &ForcingSpec,
    dt: f64,
    t_end: f64,
    cadences: &[usize],
    symbol: Option<&MultiplierSymbol>,
) -> Vec<f64> {
    let cmax = cadences.iter().copied().max().unwrap_or(1);
    let mut window: std::collections::VecDeque<SimState> = std::collections::VecDeque::new();
    let mut worst = vec![0.0f64; cadences.len()];
    let mut index = 0usize;
    integrate(
        initial,
        forcing,
        &StepPolicy::fixed(dt, t_end),
        1,
        &[2.0],
        &mut |_| {},
        &mut |s| {
            window.push_back(s.clone());
            if window.len() > 2 * cmax + 1 {
                window.pop_front();
            }
            let last = window.len() - 1;
            for (w, &c) in worst.iter_mut().zip(cadences) {
                if index % c == 0 && index >= 2 * c {
                    let r = zeta_residual(symbol, &window[last - 2 * c], &window[last - c], &window[last]);
                    *w = w.max(r);
                }
            }
            index += 1;
        },
    )
    .expect("valid fixed-step run");
    worst
}

pub fn budgets_suite() -> Vec<Check> {
    let grid = Grid::new(64).expect("valid grid");
    let tg = PhysicalField::from_fn(&grid, |x, y| {
        4.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
    })
    .forward();
    let mut energy_worst: f64 = 0.0;
    integrate(
        SimState::new(0.0, tg, SpectralField::zeros(&grid)),
        &ForcingSpec::None,
        &StepPolicy::fixed(1e-4, 0.01),
        1,
        &[2.0],
        &mut |r| energy_worst = energy_worst.max(r.energy_residual.abs()),
        &mut |_| {},
    )
    .expect("valid run");

    let h = 5e-7;
    let modes: Vec<SimState> = (0..3).map(|i| decaying_mode(&grid, 0.01 + i as f64 * h)).collect();
    let mode_res = enstrophy_budget_residual(&modes, &ForcingSpec::None, 2).expect("three states")[1].abs();

    let state = crate::solver::initial_data(
        crate::solver::Preset::RandomBandlimited,
        &grid,
        4,
        &crate::solver::PresetParams::default(),
    )
    .expect("preset");
    let b = ForcingSpec::Boussinesq;
    let r = zeta_residual_by_cadence(state.clone(), &b, 1e-4, 0.004, &[4, 2], None);
    let order = (r[0] / r[1]).log2();
    let literal =
        zeta_residual_by_cadence(state, &b, 1e-4, 0.004, &[2], Some(&MultiplierSymbol::n_literal()))[0];

    vec![
        Check::below("Taylor-Green energy budget residual", energy_worst, 1e-6),
        Check::below("decaying mode L4 budget residual", mode_res, 1e-8),
        Check::below("modified-vorticity residual (spacing 2e-4)", r[1], 2e-3),
        Check::above("modified-vorticity residual order", order, 1.8),
        Check::above("literal N residual (negative control)", literal, 1e-2),
    ]
}

/// Parameter draws `C0 in [1,10]`, `C1 in [C0,100]`, `M in [1,1e6]` (log-uniform), `lambda in [0,3]`.
pub fn sample_params(draws: usize, seed: u64) -> Vec<RecursionParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let c0 = rng.random_range(1.0..=10.0);
            let c1 = rng.random_range(c0..=100.0);
            let m = 10f64.powf(rng.random_range(0.0..=6.0));
            let lambda = rng.random_range(0.0..=3.0);
            RecursionParams::new(c0, c1, m, lambda).expect("inside the region")
        })
        .collect()
}

pub fn recursion_suite(draws: usize, kmax: usize, seed: u64) -> Vec<Check> {
    let params = sample_params(draws, seed);
    let dominance_failures = params
        .iter()
        .filter(|p| !dominance_check(p, kmax).expect("kmax >= 1").holds)
        .count();
    let mut stated_gap: f64 = 0.0;
    let mut stated_first = usize::MAX;
    let mut solved_gap: f64 = 0.0;
    let mut bound_margin = f64::INFINITY;
    for p in &params {
        let c = closed_form_check(p, kmax, r_closed_form).expect("kmax >= 1");
        stated_gap = stated_gap.max(c.max_relative_gap);
        stated_first = stated_first.min(c.first_failure.unwrap_or(usize::MAX));
        solved_gap = solved_gap.max(closed_form_check(p, kmax, r_solved).expect("kmax >= 1").max_relative_gap);
        let u = uniform_bound_extract(p, kmax).expect("kmax >= 1");
        bound_margin = bound_margin.min(u.bound - u.extracted);
    }
    let mut closed = Check::below("R_k recursion vs stated closed form (relative log gap)", stated_gap, 1e-9);
    if stated_first != usize::MAX {
        closed.threshold.push_str(&format!("; first mismatch at k = {stated_first}"));
    }

    let partial_exact = beta_partial(1).ok() == Some(0.5)
        && beta_partial(2).ok() == Some(0.375)
        && beta_partial(3).ok() == Some(21.0 / 64.0);
    let beta = beta_limit(1e-10).expect("positive tol");

    let mut riccati_worst: f64 = 0.0;
    let mut scale_worst: f64 = 0.0;
    for q in [2.0, 10.0, 1e3, 1e6] {
        let exact = riccati_settling_closed_form(1.0, q);
        let rel = |t: f64| if exact == 0.0 { t.abs() } else { (t - exact).abs() / exact };
        for a in [1e-2, 1.0, 1e2] {
            let t = riccati_settling(a, q * a).expect("valid arguments");
            riccati_worst = riccati_worst.max(rel(t));
            let t1 = riccati_settling(1.0, q).expect("valid arguments");
            scale_worst = scale_worst.max((t - t1).abs() / t1.max(f64::MIN_POSITIVE));
        }
    }
    let shift = time_shift_sum(60, 1.0).expect("positive C");

    vec![
        Check::flag(
            "dominance M_k <= R_k",
            dominance_failures == 0,
            dominance_failures as f64,
            &format!("failures among {draws} draws, k <= {kmax}"),
        ),
        closed,
        Check::below("R_k recursion vs solved form (relative log gap)", solved_gap, 1e-9),
        Check::flag(
            "uniform bound M_k^(1/2^k) <= 2^mu C1 M",
            bound_margin >= -1e-12,
            bound_margin,
            "min log margin >= 0",
        ),
        Check::flag("beta partial products 1/2, 3/8, 21/64", partial_exact, beta_partial(3).unwrap_or(0.0), "exact"),
        Check::flag(
            "beta limit truncates to 0.28878",
            (beta * 1e5).floor() == 28878.0,
            beta,
            "5 digits",
        ),
        Check::below("Riccati settling vs closed form (relative)", riccati_worst, 1e-6),
        Check::below("Riccati settling scale dependence (relative)", scale_worst, 1e-6),
        Check::below("time shifts sum to C", (shift - 1.0).abs(), 1e-15),
    ]
}

/// Maximum Nash and Gagliardo-Nirenberg ratios over seeded random band-limited fields.
pub fn probe_maxima(n: usize, kmax: usize, fields: usize, gn_exponents: &[f64]) -> (f64, Vec<f64>) {
    let grid = Grid::new(n).expect("valid grid");
    let mut nash: f64 = 0.0;
    let mut gn = vec![0.0f64; gn_exponents.len()];
    for seed in 0..fields as u64 {
        let v = random_bandlimited_field(&grid, kmax, seed).inverse_unchecked();
        nash = nash.max(inequality_probe_nash(&v).expect("nonzero field"));
        for (g, p) in gn.iter_mut().zip(gn_exponents) {
            *g = g.max(inequality_probe_gn(&v, *p).expect("nonzero field"));
        }
    }
    (nash, gn)
}

/// Sup of `||omega||_Lp` over records with `t` in `[t_a, t_b]`, plus the slope of `log ||omega||_inf` there.
pub struct ForcedPlateau {
    pub sup_lp: Vec<(f64, f64)>,
    pub linf_slope: f64,
    pub final_t: f64,
}

pub fn forced_plateau(
    n: usize,
    t_end: f64,
    window: (f64, f64),
    p_list: &[f64],
    dt_max: f64,
) -> Result<ForcedPlateau, HarnessError> {
    let grid = Grid::new(n)?;
    let forcing = ForcingSpec::CurlForced(CurlForcing::new(1.0, 0.5)?);
    let policy = StepPolicy {
        dt_max,
        t_end,
        ..StepPolicy::default()
    };
    let mut sup = vec![0.0f64; p_list.len()];
    let mut linf = Vec::new();
    let summary = integrate(
        SimState::zero(&grid),
        &forcing,
        &policy,
        10,
        p_list,
        &mut |r| {
            if r.t >= window.0 && r.t <= window.1 {
                for (s, (_, v)) in sup.iter_mut().zip(&r.lp_omega) {
                    *s = s.max(*v);
                }
                linf.push((r.t, r.linf_omega));
            }
        },
        &mut |_| {},
    )?;
    let fit = crate::diagnostics::growth_fit(&linf, window)?;
    Ok(ForcedPlateau {
        sup_lp: p_list.iter().copied().zip(sup).collect(),
        linf_slope: fit.linear_only_slope,
        final_t: summary.final_t,
    })
}

pub fn nash_lemma_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    match forced_plateau(32, 4.0, (2.0, 4.0), &[2.0, 4.0, 8.0], 1e-2) {
        Ok(p) => {
            checks.push(Check::below("forced run: |slope of log ||omega||_inf| on [2,4]", p.linf_slope.abs(), 0.01));
            let bounded = p.sup_lp.iter().all(|(_, v)| v.is_finite() && *v > 0.0);
            checks.push(Check::flag(
                "forced run: sup ||omega||_Lp finite",
                bounded,
                p.sup_lp.last().map(|x| x.1).unwrap_or(f64::NAN),
                "finite, positive",
            ));
        }
        Err(e) => checks.push(Check::flag(&format!("forced run: {e}"), false, f64::NAN, "completes")),
    }
    let (nash_a, gn_a) = probe_maxima(32, 5, 200, &[4.0, 8.0]);
    let (nash_b, gn_b) = probe_maxima(64, 5, 200, &[4.0, 8.0]);
    checks.push(Check::below("Nash ratio max refinement change", (nash_b / nash_a - 1.0).abs(), 0.05));
    for (i, p) in [4.0, 8.0].iter().enumerate() {
        checks.push(Check::below(
            &format!("GN p={p} ratio max refinement change"),
            (gn_b[i] / gn_a[i] - 1.0).abs(),
            0.05,
        ));
    }
    let c = PhysicalField::constant(&Grid::new(32).expect("valid grid"), 1.0);
    checks.push(Check::below("Nash ratio of a constant minus 1", (inequality_probe_nash(&c).unwrap_or(0.0) - 1.0).abs(), 1e-12));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("nash-lemma".parse::<Suite>().unwrap(), Suite::NashLemma);
        assert!(matches!("bogus".parse::<Suite>(), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn operators_suite_passes() {
        for c in operators_suite(32) {
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn parameter_draws_respect_region() {
        for p in sample_params(50, 1) {
            assert!(p.c0() >= 1.0 && p.c0() <= 10.0);
            assert!(p.c1() >= p.c0() && p.c1() <= 100.0);
            assert!(p.m() >= 1.0 && p.m() <= 1e6 * (1.0 + 1e-12));
            assert!(p.lambda() <= 3.0);
        }
    }

    #[test]
    fn check_display() {
        let c = Check::below("x", 0.5, 1.0);
        assert!(c.to_string().starts_with("PASS x"));
        assert!(!Check::above("y", 0.5, 1.0).pass);
    }
}
