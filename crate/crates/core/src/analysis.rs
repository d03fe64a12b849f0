//! Diagnostics over simulation output: the discrete energy and its
//! per-step identity residual, log-log decay-rate fitting, the interface
//! reflection measurement, and the CSV/report formats the CLI emits.

use std::fmt::Write as _;

use crate::assembly::{apply_operator, SpatialOperators};
use crate::model::{QuadratureGrid, SimState, SpatialGrid};

/// Energy bookkeeping captured at one step: the raw and length-scaled
/// energies, the dissipation accumulated until the next capture, and the
/// identity residual `E_next - E + D` (zero in exact arithmetic for the
/// default scheme; zero by convention on the final record).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub n: usize,
    pub t: f64,
    pub e_raw: f64,
    pub e_phys: f64,
    pub d: f64,
    pub residual: f64,
}

/// Least-squares power-law fit of an energy tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Time window the fit used.
    pub window: (f64, f64),
    /// Slope of log E against log t.
    pub slope: f64,
    /// Multiplier of the fitted power law E = C * t^slope.
    pub c: f64,
    /// Root-mean-square residual in log E.
    pub rms: f64,
    /// Number of records the fit used.
    pub points: usize,
}

impl DecayFit {
    /// One-line report in the fixed format
    /// `slope=..., C=..., rms=..., window=[lo, hi]`.
    #[must_use]
    pub fn report(&self) -> String {
        format!(
            "slope={:.6}, C={:.6e}, rms={:.6e}, window=[{}, {}]",
            self.slope, self.c, self.rms, self.window.0, self.window.1
        )
    }
}

/// Analysis failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("decay fit needs at least {needed} usable records, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("no pulse above amplitude threshold {threshold} found")]
    PulseNotFound { threshold: f64 },
}

/// Discrete energy of a state: kinetic + elastic + mode contributions,
/// `E_raw = V'MV/2 + U'KU/2 + (c/2) w sum |phi|^2`, and its length-scaled
/// companion `E_phys = dx * E_raw`. Euclidean node sums in fixed order.
#[must_use]
pub fn energy(
    state: &SimState,
    ops: &SpatialOperators,
    quad: &QuadratureGrid,
    grid: &SpatialGrid,
) -> (f64, f64) {
    let mut kinetic = 0.0;
    for (v, m) in state.v.iter().zip(&ops.mass.diag) {
        kinetic += m * v * v;
    }
    let ku = apply_operator(&ops.stiffness, &state.u);
    let mut elastic = 0.0;
    for (u, k) in state.u.iter().zip(&ku) {
        elastic += u * k;
    }
    let mut modes = 0.0;
    for phi in state.phi.as_slice() {
        modes += phi * phi;
    }
    let e_raw = 0.5 * kinetic + 0.5 * elastic + 0.5 * quad.frak_c * quad.w * modes;
    (e_raw, grid.dx * e_raw)
}

/// Default fit window: the last two decades of simulated time.
#[must_use]
pub fn default_fit_window(t_final: f64) -> (f64, f64) {
    (t_final / 100.0, t_final)
}

/// Ordinary least squares of log E against log t over the records with
/// positive time and energy inside the window. Requires ten usable points.
pub fn fit_decay(records: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit, AnalysisError> {
    const NEEDED: usize = 10;
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t > 0.0 && r.e_raw > 0.0 && r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t.ln(), r.e_raw.ln()))
        .collect();
    if points.len() < NEEDED {
        return Err(AnalysisError::InsufficientData {
            needed: NEEDED,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (x, y) in &points {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    Ok(DecayFit {
        window,
        slope,
        c: intercept.exp(),
        rms: (ss / n).sqrt(),
        points: points.len(),
    })
}

/// Maximum identity residual over a series, normalized by the initial
/// energy when it is positive.
#[must_use]
pub fn identity_residual(records: &[EnergyRecord]) -> f64 {
    let worst = records
        .iter()
        .map(|r| r.residual.abs())
        .fold(0.0f64, f64::max);
    match records.first() {
        Some(first) if first.e_raw > 0.0 => worst / first.e_raw,
        _ => worst,
    }
}

/// Amplitude threshold below which no incident pulse is recognized.
pub const PULSE_THRESHOLD: f64 = 1e-3;

/// Ratio of the reflected to the incident pulse amplitude, both measured as
/// the parabolic-refined signed extremum of the displacement over the nodes
/// strictly left of the interface. `early` must hold the pulse before it
/// reaches the interface, `late` after the interaction has cleared it. The
/// threshold applies to the incident pulse only, so a vanishing reflection
/// reports a ratio near zero rather than an error.
pub fn reflection_coefficient(
    early: &[f64],
    late: &[f64],
    half_count: usize,
) -> Result<f64, AnalysisError> {
    assert!(half_count <= early.len() && half_count <= late.len());
    let incident = refined_extremum(&early[..half_count]);
    if incident.abs() < PULSE_THRESHOLD {
        return Err(AnalysisError::PulseNotFound {
            threshold: PULSE_THRESHOLD,
        });
    }
    let reflected = refined_extremum(&late[..half_count]);
    Ok(reflected / incident)
}

/// Signed value of the largest-magnitude sample, refined by the vertex of
/// the parabola through it and its neighbors when it is interior.
fn refined_extremum(w: &[f64]) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    let mut m = 0;
    for (i, v) in w.iter().enumerate() {
        if v.abs() > w[m].abs() {
            m = i;
        }
    }
    if m == 0 || m + 1 == w.len() {
        return w[m];
    }
    let (y0, y1, y2) = (w[m - 1], w[m], w[m + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature.abs() < 1e-300 {
        return y1;
    }
    y1 - (y0 - y2) * (y0 - y2) / (8.0 * curvature)
}

/// Header of the energy CSV.
pub const ENERGY_CSV_HEADER: &str = "n,t,E_raw,E_phys,D,residual";

/// One energy CSV row with 17-significant-digit formatting.
#[must_use]
pub fn energy_csv_row(r: &EnergyRecord) -> String {
    format!(
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        r.n, r.t, r.e_raw, r.e_phys, r.d, r.residual
    )
}

/// Snapshot CSV (`t,x,w` with w the displacement) for one captured state.
#[must_use]
pub fn snapshot_csv(state: &SimState, grid: &SpatialGrid) -> String {
    let mut out = String::from("t,x,w\n");
    for (i, u) in state.u.iter().enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", state.t, grid.node_x(i), u);
    }
    out
}
