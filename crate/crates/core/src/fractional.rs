//! Diffusive realization of the generalized Caputo derivative: per-mode
//! Crank-Nicolson updates of the auxiliary field, aggregation into the
//! damping force, and an independent direct-convolution oracle used to
//! validate the representation.

use std::sync::OnceLock;

use crate::model::QuadratureGrid;

/// Auxiliary mode field, one row of M mode values per spatial node.
///
/// A simulation with damping disabled carries a field with zero modes; every
/// operation below degenerates to a no-op on it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusiveField {
    nodes: usize,
    modes: usize,
    data: Vec<f64>,
}

impl DiffusiveField {
    #[must_use]
    pub fn zeros(nodes: usize, modes: usize) -> Self {
        DiffusiveField {
            nodes,
            modes,
            data: vec![0.0; nodes * modes],
        }
    }

    #[must_use]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[must_use]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[must_use]
    pub fn row(&self, node: usize) -> &[f64] {
        &self.data[node * self.modes..(node + 1) * self.modes]
    }

    pub fn row_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.data[node * self.modes..(node + 1) * self.modes]
    }

    #[must_use]
    pub fn get(&self, node: usize, mode: usize) -> f64 {
        self.data[node * self.modes + mode]
    }

    pub fn set(&mut self, node: usize, mode: usize, value: f64) {
        self.data[node * self.modes + mode] = value;
    }

    /// Flat row-major view of all mode values.
    #[must_use]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Per-mode Crank-Nicolson update factors and the scalar damping
/// coefficient they induce in the implicit solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    /// Decay factor (2 - dt*d) / (2 + dt*d).
    pub a: Vec<f64>,
    /// Source factor 2*dt*mu / (2 + dt*d).
    pub b: Vec<f64>,
    /// Effective scalar damping coefficient (c/2) * sum w*mu*b.
    pub c_half: f64,
}

impl ModeCoefficients {
    /// Coefficient set for a run with damping disabled: no modes, zero
    /// damping coefficient.
    #[must_use]
    pub fn disabled() -> Self {
        ModeCoefficients {
            a: Vec::new(),
            b: Vec::new(),
            c_half: 0.0,
        }
    }
}

/// Errors from the history-dependent oracle.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractionalError {
    #[error("need at least two samples to form a derivative")]
    InsufficientHistory,
}

/// Builds the Crank-Nicolson mode coefficients for one time step size.
/// The c_half sum runs in ascending mode order so repeated builds are
/// bitwise identical.
#[must_use]
pub fn precompute_mode_coefficients(quad: &QuadratureGrid, dt: f64) -> ModeCoefficients {
    let m = quad.mode_count;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for l in 0..m {
        let den = 2.0 + dt * quad.d[l];
        a.push((2.0 - dt * quad.d[l]) / den);
        b.push(2.0 * dt * quad.mu[l] / den);
    }
    let mut c_half = 0.0;
    for (mu, bl) in quad.mu.iter().zip(&b) {
        c_half += quad.w * mu * bl;
    }
    c_half *= 0.5 * quad.frak_c;
    ModeCoefficients { a, b, c_half }
}

/// One Crank-Nicolson mode update driven by the half-step velocity:
/// `phi' = a*phi + b*v_half`, allocated fresh.
///
/// Panics if the field, velocity, and coefficient shapes disagree.
#[must_use]
pub fn phi_step(phi_n: &DiffusiveField, v_half: &[f64], coeff: &ModeCoefficients) -> DiffusiveField {
    let mut next = phi_n.clone();
    advance_modes_plain(&mut next, v_half, coeff);
    next
}

fn advance_modes_plain(phi: &mut DiffusiveField, v_half: &[f64], coeff: &ModeCoefficients) {
    assert_eq!(phi.nodes, v_half.len(), "velocity length does not match node count");
    assert_eq!(phi.modes, coeff.a.len(), "coefficient length does not match mode count");
    for (j, &vh) in v_half.iter().enumerate() {
        let row = phi.row_mut(j);
        for (l, value) in row.iter_mut().enumerate() {
            *value = coeff.a[l] * *value + coeff.b[l] * vh;
        }
    }
}

/// In-place mode update that also returns the step's dissipation increment
/// `dt * c * sum_l w * d_l * |phi_half_l|^2` (Euclidean over nodes), the
/// quantity the discrete energy identity balances against.
pub fn advance_modes(
    phi: &mut DiffusiveField,
    v_half: &[f64],
    coeff: &ModeCoefficients,
    quad: &QuadratureGrid,
    dt: f64,
) -> f64 {
    assert_eq!(phi.nodes, v_half.len(), "velocity length does not match node count");
    assert_eq!(phi.modes, coeff.a.len(), "coefficient length does not match mode count");
    let mut total = 0.0;
    for (j, &vh) in v_half.iter().enumerate() {
        let row = phi.row_mut(j);
        let mut node_sum = 0.0;
        for (l, value) in row.iter_mut().enumerate() {
            let old = *value;
            let new = coeff.a[l] * old + coeff.b[l] * vh;
            let mid = 0.5 * (old + new);
            node_sum += quad.d[l] * mid * mid;
            *value = new;
        }
        total += node_sum;
    }
    dt * quad.frak_c * quad.w * total
}

/// Quadrature of the damping force at the average of two mode fields:
/// `F[j] = c * sum_l w*mu_l*(phi_a[j][l]+phi_b[j][l])/2`, ascending-l sums.
/// Passing the same field twice gives the force at a single time level.
#[must_use]
pub fn damping_force(
    phi_a: &DiffusiveField,
    phi_b: &DiffusiveField,
    quad: &QuadratureGrid,
) -> Vec<f64> {
    assert_eq!(phi_a.nodes, phi_b.nodes, "node counts differ");
    assert_eq!(phi_a.modes, phi_b.modes, "mode counts differ");
    let weights: Vec<f64> = (0..phi_a.modes)
        .map(|l| 0.5 * quad.frak_c * quad.w * quad.mu[l])
        .collect();
    let mut f = vec![0.0; phi_a.nodes];
    for (j, slot) in f.iter_mut().enumerate() {
        let ra = phi_a.row(j);
        let rb = phi_b.row(j);
        let mut acc = 0.0;
        for (weight, (pa, pb)) in weights.iter().zip(ra.iter().zip(rb)) {
            acc += weight * (pa + pb);
        }
        *slot = acc;
    }
    f
}

/// Mode weights for the known part of the half-step force,
/// `c * w * mu_l * (1 + a_l) / 2`.
#[must_use]
pub fn half_force_weights(coeff: &ModeCoefficients, quad: &QuadratureGrid) -> Vec<f64> {
    (0..coeff.a.len())
        .map(|l| quad.frak_c * quad.w * quad.mu[l] * 0.5 * (1.0 + coeff.a[l]))
        .collect()
}

/// Mode weights for the known part of the end-of-step force,
/// `c * w * mu_l * a_l`.
#[must_use]
pub fn end_force_weights(coeff: &ModeCoefficients, quad: &QuadratureGrid) -> Vec<f64> {
    (0..coeff.a.len())
        .map(|l| quad.frak_c * quad.w * quad.mu[l] * coeff.a[l])
        .collect()
}

/// Per-node dot product of the mode rows with a fixed weight vector,
/// ascending-l summation.
#[must_use]
pub fn weighted_mode_sum(phi: &DiffusiveField, weights: &[f64]) -> Vec<f64> {
    assert_eq!(phi.modes, weights.len(), "weight length does not match mode count");
    let mut out = vec![0.0; phi.nodes];
    for (j, slot) in out.iter_mut().enumerate() {
        let row = phi.row(j);
        let mut acc = 0.0;
        for (weight, value) in weights.iter().zip(row) {
            acc += weight * value;
        }
        *slot = acc;
    }
    out
}

/// Direct-convolution evaluation of the generalized Caputo derivative at the
/// last sample time: f' is taken piecewise constant per interval and the
/// singular exponential kernel is integrated on each interval, exactly for
/// eta = 0 and by 32-point Gauss-Legendre after desingularization for
/// eta > 0. Quadratic cost in the sample count; testing oracle only.
pub fn caputo_convolution_oracle(
    samples: &[f64],
    alpha: f64,
    eta: f64,
    dt: f64,
) -> Result<f64, FractionalError> {
    if samples.len() < 2 {
        return Err(FractionalError::InsufficientHistory);
    }
    let n = samples.len() - 1;
    let mut acc = 0.0;
    for i in 0..n {
        let fprime = (samples[i + 1] - samples[i]) / dt;
        let tau_a = (n - 1 - i) as f64 * dt;
        let tau_b = (n - i) as f64 * dt;
        acc += fprime * kernel_integral(tau_a, tau_b, alpha, eta);
    }
    Ok(acc / libm::tgamma(1.0 - alpha))
}

/// Integral of e^(-eta*tau) * tau^(-alpha) over [tau_a, tau_b]. The
/// substitution q = tau^(1-alpha) removes the singularity, leaving
/// (1/(1-alpha)) * integral of e^(-eta*q^(1/(1-alpha))) dq.
fn kernel_integral(tau_a: f64, tau_b: f64, alpha: f64, eta: f64) -> f64 {
    let one_m_alpha = 1.0 - alpha;
    let q_a = tau_a.powf(one_m_alpha);
    let q_b = tau_b.powf(one_m_alpha);
    if eta == 0.0 {
        return (q_b - q_a) / one_m_alpha;
    }
    let inv = 1.0 / one_m_alpha;
    let (nodes, weights) = gauss_legendre_32();
    let center = 0.5 * (q_a + q_b);
    let halfwidth = 0.5 * (q_b - q_a);
    let mut acc = 0.0;
    for k in 0..32 {
        let q = center + halfwidth * nodes[k];
        acc += weights[k] * (-eta * q.powf(inv)).exp();
    }
    acc * halfwidth * inv
}

fn gauss_legendre_32() -> &'static ([f64; 32], [f64; 32]) {
    static TABLE: OnceLock<([f64; 32], [f64; 32])> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 32usize;
        let mut nodes = [0.0; 32];
        let mut weights = [0.0; 32];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..64 {
                let (p, dp) = legendre(n, x);
                let shift = p / dp;
                x -= shift;
                if shift.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Legendre polynomial P_n and its derivative at interior x via the
/// three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Runs the mode system on a single node driven by the supplied velocity
/// samples (taken at the uniform grid times) and returns the aggregated
/// force at each time level; entry 0 is the zero initial force. The
/// half-step drive is the average of consecutive samples.
#[must_use]
pub fn diffusive_scalar_driver(f_dot: &[f64], quad: &QuadratureGrid, dt: f64) -> Vec<f64> {
    let coeff = precompute_mode_coefficients(quad, dt);
    let mut phi = DiffusiveField::zeros(1, quad.mode_count);
    let force_weights: Vec<f64> = (0..quad.mode_count)
        .map(|l| quad.frak_c * quad.w * quad.mu[l])
        .collect();
    let mut out = Vec::with_capacity(f_dot.len());
    out.push(0.0);
    for n in 0..f_dot.len().saturating_sub(1) {
        let vh = [0.5 * (f_dot[n] + f_dot[n + 1])];
        advance_modes_plain(&mut phi, &vh, &coeff);
        out.push(weighted_mode_sum(&phi, &force_weights)[0]);
    }
    out
}
