use std::fmt;

use super::{choose_dt, initial_data, step, ForcingSpec, SimState, StepPolicy};
use crate::config::RunConfig;
use crate::diagnostics::{is_under_resolved, DiagnosticsRecord, RecordBuilder};
use crate::error::SolverError;
use crate::spectral::{Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    Completed,
    /// The density spectrum crossed the tail-fraction limit.
    UnderResolved,
    BlowUp { t: f64 },
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Completed => f.write_str("completed"),
            StopReason::UnderResolved => f.write_str("under_resolved"),
            StopReason::BlowUp { .. } => f.write_str("blow_up"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub final_t: f64,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub records: usize,
    /// Last state that passed the finiteness check.
    pub final_state: SimState,
}

/// Initial state of a configured run. Curl-forced runs start with `rho = 0`;
/// the density plays no role there.
pub fn initial_state(config: &RunConfig) -> Result<SimState, SolverError> {
    config.validate()?;
    let grid = Grid::new(config.grid_n)?;
    let mut state = initial_data(config.preset, &grid, config.seed, &config.preset_params)?;
    if matches!(config.forcing, ForcingSpec::CurlForced(_)) {
        state.rho = SpectralField::zeros(&grid);
    }
    if config.nonzero_mean {
        state = state.with_mean_velocity([0.0, 0.0]);
    }
    Ok(state)
}

/// Integrates a configured run, handing every record to `sink`.
pub fn run(
    config: &RunConfig,
    sink: &mut dyn FnMut(&DiagnosticsRecord),
) -> Result<RunSummary, SolverError> {
    let state = initial_state(config)?;
    integrate(
        state,
        &config.forcing,
        &config.policy,
        config.cadence,
        &config.p_list,
        sink,
        &mut |_| {},
    )
}

/// Integration loop behind [`run`]. `observer` sees every recorded state.
///
/// A record is produced for the initial state, every `cadence` steps, and
/// for the final state.
pub fn integrate(
    initial: SimState,
    forcing: &ForcingSpec,
    policy: &StepPolicy,
    cadence: usize,
    p_list: &[f64],
    sink: &mut dyn FnMut(&DiagnosticsRecord),
    observer: &mut dyn FnMut(&SimState),
) -> Result<RunSummary, SolverError> {
    policy.validate()?;
    if cadence == 0 {
        return Err(SolverError::InvalidPolicy("cadence must be at least 1".into()));
    }
    let mut builder = RecordBuilder::new(p_list, forcing.clone());
    let mut records = 0usize;
    let mut emit = |recs: Vec<DiagnosticsRecord>, records: &mut usize| {
        for r in &recs {
            sink(r);
        }
        *records += recs.len();
    };

    let mut state = initial;
    let mut steps = 0usize;
    let mut last_dt = 0.0;
    let mut last_recorded = true;
    observer(&state);
    emit(builder.push(&state, 0.0), &mut records);

    // tolerance on the end time absorbs round-off in accumulated t
    let t_slack = 1e-12 * policy.t_end.abs().max(1.0);
    let mut reason = if is_under_resolved(&state.rho) {
        StopReason::UnderResolved
    } else {
        StopReason::Completed
    };
    while reason == StopReason::Completed && state.t < policy.t_end - t_slack {
        let dt = choose_dt(&state, policy);
        match step(&state, dt, forcing) {
            Ok(next) => {
                state = next;
                steps += 1;
                last_dt = dt;
                last_recorded = false;
            }
            Err(SolverError::BlowUp { t }) => {
                reason = StopReason::BlowUp { t };
                break;
            }
            Err(e) => return Err(e),
        }
        if is_under_resolved(&state.rho) {
            reason = StopReason::UnderResolved;
        }
        if steps % cadence == 0 || reason != StopReason::Completed {
            observer(&state);
            emit(builder.push(&state, last_dt), &mut records);
            last_recorded = true;
        }
    }
    if !last_recorded {
        observer(&state);
        emit(builder.push(&state, last_dt), &mut records);
    }
    emit(builder.finish(), &mut records);

    Ok(RunSummary {
        final_t: state.t,
        stop_reason: reason,
        steps,
        records,
        final_state: state,
    })
}
