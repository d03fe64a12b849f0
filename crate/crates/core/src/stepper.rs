//! Coupled time integration: Newmark for the mechanical unknowns, implicit
//! mode updates for the damping field, one symmetric tridiagonal solve per
//! step, plus the run driver with its observer hooks.

use crate::analysis::{self, EnergyRecord};
use crate::assembly::{apply_operator_into, SpatialOperators};
use crate::fractional::{
    advance_modes, end_force_weights, half_force_weights, precompute_mode_coefficients,
    weighted_mode_sum, DiffusiveField, ModeCoefficients,
};
use crate::model::{
    initial_condition_example1, initial_condition_example2, load_tabulated_ic, validate,
    ForceEvaluation, IcKind, QuadratureGrid, SimConfig, SimState, SpatialGrid, TimeGrid,
    ValidationError,
};

/// Errors produced while building or advancing the scheme.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("system matrix is not positive definite (pivot {pivot} at row {row})")]
    SolveFailure { row: usize, pivot: f64 },
    #[error("non-finite state detected after step {step}")]
    NonFiniteState { step: usize },
}

/// Errors from a full run.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("initial condition: {0}")]
    InitialCondition(String),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagFactor {
    /// Factors the matrix given by its main and off diagonals. Fails with
    /// the offending row if a pivot is not strictly positive.
    pub fn factor(diag: &[f64], off: &[f64]) -> Result<Self, StepError> {
        let n = diag.len();
        assert_eq!(off.len() + 1, n, "off-diagonal length must be n-1");
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut prev = diag[0];
        for i in 0..n {
            if prev <= 0.0 || prev.is_nan() {
                return Err(StepError::SolveFailure { row: i, pivot: prev });
            }
            d[i] = prev;
            if i + 1 < n {
                l[i] = off[i] / prev;
                prev = diag[i + 1] - l[i] * off[i];
            }
        }
        Ok(TridiagFactor { d, l })
    }

    /// Solves A x = rhs in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.d.len();
        assert_eq!(rhs.len(), n, "rhs length does not match factor dimension");
        for i in 1..n {
            rhs[i] -= self.l[i - 1] * rhs[i - 1];
        }
        for (value, pivot) in rhs.iter_mut().zip(&self.d) {
            *value /= pivot;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.l[i] * rhs[i + 1];
        }
    }
}

/// The per-run constant pieces of the implicit solve: the factored system
/// matrix A = M + gamma*dt*c_half*I + beta*dt^2*K, the damping scalar, and
/// the precomputed force-aggregation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperator {
    factor: TridiagFactor,
    pub c_half: f64,
    pub time: TimeGrid,
    pub force_evaluation: ForceEvaluation,
    half_weights: Vec<f64>,
    end_weights: Vec<f64>,
}

/// Assembles and factors the step operator. The matrix is constant over the
/// whole run, so this happens exactly once.
pub fn build_step_operator(
    ops: &SpatialOperators,
    coeff: &ModeCoefficients,
    quad: &QuadratureGrid,
    time: &TimeGrid,
    force_evaluation: ForceEvaluation,
) -> Result<StepOperator, StepError> {
    let dt = time.dt;
    let beta_dt2 = time.newmark_beta * dt * dt;
    let shift = time.newmark_gamma * dt * coeff.c_half;
    let n = ops.mass.diag.len();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        diag.push(ops.mass.diag[i] + shift + beta_dt2 * ops.stiffness.diag[i]);
    }
    let off: Vec<f64> = ops.stiffness.off.iter().map(|&k| beta_dt2 * k).collect();
    Ok(StepOperator {
        factor: TridiagFactor::factor(&diag, &off)?,
        c_half: coeff.c_half,
        time: *time,
        force_evaluation,
        half_weights: half_force_weights(coeff, quad),
        end_weights: end_force_weights(coeff, quad),
    })
}

/// Newmark predictors:
/// `U_pred = U + dt*V + (1/2 - beta)*dt^2*A`, `V_pred = V + (1 - gamma)*dt*A`.
#[must_use]
pub fn newmark_predict(state: &SimState, time: &TimeGrid) -> (Vec<f64>, Vec<f64>) {
    let dt = time.dt;
    let cu = (0.5 - time.newmark_beta) * dt * dt;
    let cv = (1.0 - time.newmark_gamma) * dt;
    let u_pred = state
        .u
        .iter()
        .zip(&state.v)
        .zip(&state.a)
        .map(|((&u, &v), &a)| u + dt * v + cu * a)
        .collect();
    let v_pred = state
        .v
        .iter()
        .zip(&state.a)
        .map(|(&v, &a)| v + cv * a)
        .collect();
    (u_pred, v_pred)
}

/// A completed step: the new state and the dissipation spent during it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SimState,
    pub dissipation: f64,
}

/// Advances the coupled system by one step: solves the implicit equation for
/// the new acceleration, updates displacement and velocity through the
/// Newmark correctors, and moves the mode field with the half-step velocity.
pub fn step(
    state: &SimState,
    ops: &SpatialOperators,
    quad: &QuadratureGrid,
    coeff: &ModeCoefficients,
    sop: &StepOperator,
) -> Result<StepOutcome, StepError> {
    let time = &sop.time;
    let dt = time.dt;
    let n = state.u.len();
    let (u_pred, v_pred) = newmark_predict(state, time);

    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    match sop.force_evaluation {
        ForceEvaluation::HalfStep => {
            let cu = (0.5 - time.newmark_beta) * dt * dt;
            for (i, slot) in scratch.iter_mut().enumerate() {
                *slot = 2.0 * state.u[i] + dt * state.v[i] + cu * state.a[i];
            }
            apply_operator_into(&ops.stiffness, &scratch, &mut rhs);
            let g = weighted_mode_sum(&state.phi, &sop.half_weights);
            for i in 0..n {
                rhs[i] = -ops.mass.diag[i] * state.a[i]
                    - rhs[i]
                    - 2.0 * g[i]
                    - sop.c_half * (state.v[i] + v_pred[i]);
            }
        }
        ForceEvaluation::EndStep => {
            apply_operator_into(&ops.stiffness, &u_pred, &mut rhs);
            let g = weighted_mode_sum(&state.phi, &sop.end_weights);
            for i in 0..n {
                rhs[i] = -rhs[i] - g[i] - sop.c_half * (state.v[i] + v_pred[i]);
            }
        }
    }
    sop.factor.solve_in_place(&mut rhs);
    let accel = rhs;

    let gamma_dt = time.newmark_gamma * dt;
    let beta_dt2 = time.newmark_beta * dt * dt;
    let mut u_next = u_pred;
    let mut v_next = v_pred;
    let mut v_half = scratch;
    for i in 0..n {
        v_next[i] += gamma_dt * accel[i];
        u_next[i] += beta_dt2 * accel[i];
        v_half[i] = 0.5 * (state.v[i] + v_next[i]);
    }

    let mut phi = state.phi.clone();
    let dissipation = advance_modes(&mut phi, &v_half, coeff, quad, dt);

    let next_n = state.n + 1;
    let finite = u_next.iter().chain(&v_next).chain(&accel).all(|x| x.is_finite())
        && dissipation.is_finite();
    if !finite {
        return Err(StepError::NonFiniteState { step: next_n });
    }

    Ok(StepOutcome {
        state: SimState {
            u: u_next,
            v: v_next,
            a: accel,
            phi,
            t: next_n as f64 * dt,
            n: next_n,
        },
        dissipation,
    })
}

/// Builds the initial state: displacement and velocity from the configured
/// initial condition, acceleration from the motion equation at t = 0 (the
/// damping force vanishes with the zero mode field), zero modes.
pub fn build_initial_state(
    config: &SimConfig,
    ops: &SpatialOperators,
    grid: &SpatialGrid,
) -> Result<SimState, RunError> {
    let n = grid.node_count();
    let (u, v): (Vec<f64>, Vec<f64>) = match &config.ic.kind {
        IcKind::Example1 => (0..n)
            .map(|i| initial_condition_example1(grid.node_x(i), config.ic.epsilon))
            .unzip(),
        IcKind::Example2 => (0..n)
            .map(|i| initial_condition_example2(grid.node_x(i), config.ic.epsilon))
            .unzip(),
        IcKind::File(path) => {
            let tab = load_tabulated_ic(path, grid).map_err(RunError::InitialCondition)?;
            (tab.displacement, tab.velocity)
        }
        IcKind::Tabulated(tab) => (tab.displacement.clone(), tab.velocity.clone()),
    };
    let mut a = vec![0.0; n];
    apply_operator_into(&ops.stiffness, &u, &mut a);
    for (accel, mass) in a.iter_mut().zip(&ops.mass.diag) {
        *accel = -*accel / mass;
    }
    let modes = if config.fractional.damping_enabled {
        config.quad.mode_count
    } else {
        0
    };
    Ok(SimState {
        u,
        v,
        a,
        phi: DiffusiveField::zeros(n, modes),
        t: 0.0,
        n: 0,
    })
}

/// Callbacks a run invokes at the configured capture strides. Energy records
/// arrive once finalized, i.e. with the dissipation accumulated up to the
/// next capture and the identity residual filled in; the trailing record of
/// a run carries zeros there.
pub trait RunObserver {
    fn on_energy(&mut self, _record: &EnergyRecord) {}
    fn on_snapshot(&mut self, _state: &SimState) {}
}

/// Observer that ignores every callback.
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// Everything a completed run hands back: the final state and the captured
/// energy records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: SimState,
    pub energy: Vec<EnergyRecord>,
}

/// Validates the configuration, builds every operator once, executes all
/// steps, and captures energy records and snapshots at the configured
/// strides (always including the first and last step). Deterministic for a
/// fixed configuration.
pub fn run(config: &SimConfig, observer: &mut dyn RunObserver) -> Result<RunSummary, RunError> {
    if config.time.steps == 0 {
        return run_degenerate(config, observer);
    }
    validate(config)?;
    let grid = config.spatial_grid();
    let ops = SpatialOperators::build(&config.physical, &grid);
    let quad = config.quadrature_grid();
    let time = config.time_grid();
    let coeff = if config.fractional.damping_enabled {
        precompute_mode_coefficients(&quad, time.dt)
    } else {
        ModeCoefficients::disabled()
    };
    let sop = build_step_operator(&ops, &coeff, &quad, &time, config.force_evaluation)?;
    let mut state = build_initial_state(config, &ops, &grid)?;

    let energy_stride = config.output.energy_stride;
    let snapshot_stride = config.effective_snapshot_stride();
    let steps = config.time.steps;

    let make_record = |state: &SimState| {
        let (e_raw, e_phys) = analysis::energy(state, &ops, &quad, &grid);
        EnergyRecord {
            n: state.n,
            t: state.t,
            e_raw,
            e_phys,
            d: 0.0,
            residual: 0.0,
        }
    };

    let mut records = Vec::new();
    let mut pending = make_record(&state);
    observer.on_snapshot(&state);

    for n in 0..steps {
        let outcome = step(&state, &ops, &quad, &coeff, &sop)?;
        state = outcome.state;
        pending.d += outcome.dissipation;
        let m = n + 1;
        if m % energy_stride == 0 || m == steps {
            let next = make_record(&state);
            pending.residual = next.e_raw - pending.e_raw + pending.d;
            observer.on_energy(&pending);
            records.push(pending);
            pending = next;
        }
        if m % snapshot_stride == 0 || m == steps {
            observer.on_snapshot(&state);
        }
    }
    observer.on_energy(&pending);
    records.push(pending);

    Ok(RunSummary {
        final_state: state,
        energy: records,
    })
}

/// The zero-step run: emit the initial state and its single energy record
/// without ever forming a time step (dt would be undefined).
fn run_degenerate(
    config: &SimConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunSummary, RunError> {
    let mut surrogate = config.clone();
    surrogate.time.steps = 1;
    validate(&surrogate)?;
    let grid = config.spatial_grid();
    let ops = SpatialOperators::build(&config.physical, &grid);
    let quad = config.quadrature_grid();
    let state = build_initial_state(config, &ops, &grid)?;
    let (e_raw, e_phys) = analysis::energy(&state, &ops, &quad, &grid);
    let record = EnergyRecord {
        n: 0,
        t: 0.0,
        e_raw,
        e_phys,
        d: 0.0,
        residual: 0.0,
    };
    observer.on_snapshot(&state);
    observer.on_energy(&record);
    Ok(RunSummary {
        final_state: state,
        energy: vec![record],
    })
}
