//! Domain types, configuration, validation, initial-condition presets, and
//! the flat key-value config file format shared by all other modules.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::fractional::DiffusiveField;

/// Default width parameter of both initial-condition presets.
pub const DEFAULT_IC_EPSILON: f64 = 0.005;
/// Default Newmark beta (average-acceleration member).
pub const DEFAULT_NEWMARK_BETA: f64 = 0.25;
/// Default Newmark gamma (average-acceleration member).
pub const DEFAULT_NEWMARK_GAMMA: f64 = 0.5;

const EXAMPLE1_CENTER: f64 = -0.5;
const EXAMPLE2_CENTER: f64 = 0.5;

/// Material and geometry parameters of the two-medium string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Mass density of the left material, on (-L, 0).
    pub rho1: f64,
    /// Mass density of the right material, on (0, L).
    pub rho2: f64,
    /// Elastic constant of the left material.
    pub k1: f64,
    /// Elastic constant of the right material.
    pub k2: f64,
    /// Half-length L of the domain (-L, L).
    pub half_length: f64,
}

/// Parameters of the generalized Caputo damping term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    /// Fractional order, in (0, 1).
    pub alpha: f64,
    /// Exponential weight of the kernel, >= 0.
    pub eta: f64,
    /// When false the damping term is dropped and the system is conservative.
    pub damping_enabled: bool,
}

/// Spatial resolution: J control volumes per material half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceParams {
    /// Half node count J; unknowns live at nodes j = -J..J.
    pub half_count: usize,
}

/// Truncation and resolution of the diffusive-mode quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// Truncation radius R of the xi half-line.
    pub radius: f64,
    /// Number of quadrature modes M.
    pub mode_count: usize,
}

/// Time horizon and Newmark parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeParams {
    /// Final time T.
    pub t_final: f64,
    /// Number of time steps N; dt = T/N.
    pub steps: usize,
    /// Newmark beta, in [0, 1/2].
    pub newmark_beta: f64,
    /// Newmark gamma, in [0, 1].
    pub newmark_gamma: f64,
}

/// Output capture controls.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputParams {
    /// Energy records are captured every this many steps (plus step 0 and N).
    pub energy_stride: usize,
    /// Snapshot stride; `None` means first and last step only.
    pub snapshot_stride: Option<usize>,
    /// Output directory for CSV artifacts and the run manifest.
    pub dir: PathBuf,
}

/// Time level at which the damping force enters the implicit solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceEvaluation {
    /// Force evaluated at the half step average of the mode field. With the
    /// default Newmark parameters this makes the discrete energy identity
    /// exact.
    HalfStep,
    /// Force evaluated at the end-of-step mode field.
    EndStep,
}

impl ForceEvaluation {
    pub fn as_str(self) -> &'static str {
        match self {
            ForceEvaluation::HalfStep => "half_step",
            ForceEvaluation::EndStep => "end_step",
        }
    }
}

impl std::str::FromStr for ForceEvaluation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half_step" => Ok(ForceEvaluation::HalfStep),
            "end_step" => Ok(ForceEvaluation::EndStep),
            other => Err(format!(
                "unknown force evaluation '{other}' (expected half_step or end_step)"
            )),
        }
    }
}

/// Tabulated initial data over all 2J+1 nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedIc {
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Which initial condition a run starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum IcKind {
    /// Gaussian displacement bump in the left material, zero elsewhere.
    Example1,
    /// Antisymmetric pair of squared-sech bumps, one per material.
    Example2,
    /// Tabulated data loaded from a CSV file (`x,w0,w1` per node).
    File(PathBuf),
    /// Tabulated data supplied in memory.
    Tabulated(TabulatedIc),
}

/// Initial-condition selection plus the preset width override.
#[derive(Debug, Clone, PartialEq)]
pub struct IcSpec {
    pub kind: IcKind,
    /// Width parameter of the preset bumps; ignored for tabulated data.
    pub epsilon: f64,
}

/// Complete simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub physical: PhysicalParams,
    pub fractional: FractionalParams,
    pub space: SpaceParams,
    pub quad: QuadParams,
    pub time: TimeParams,
    pub ic: IcSpec,
    pub output: OutputParams,
    pub force_evaluation: ForceEvaluation,
}

impl SimConfig {
    /// Node grid derived from the validated parameters.
    #[must_use]
    pub fn spatial_grid(&self) -> SpatialGrid {
        SpatialGrid::new(self.space.half_count, self.physical.half_length)
    }

    /// Quadrature tables derived from the validated parameters.
    #[must_use]
    pub fn quadrature_grid(&self) -> QuadratureGrid {
        QuadratureGrid::build(
            self.quad.radius,
            self.quad.mode_count,
            self.fractional.alpha,
            self.fractional.eta,
        )
    }

    /// Time grid derived from the validated parameters.
    #[must_use]
    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid {
            t_final: self.time.t_final,
            steps: self.time.steps,
            dt: self.time.t_final / self.time.steps as f64,
            newmark_beta: self.time.newmark_beta,
            newmark_gamma: self.time.newmark_gamma,
        }
    }

    /// Snapshot stride with the `None` default resolved to "first and last".
    #[must_use]
    pub fn effective_snapshot_stride(&self) -> usize {
        self.output.snapshot_stride.unwrap_or(self.time.steps.max(1))
    }
}

/// Node placement: x_j = j*dx for j = -J..J, interface at x = 0, homogeneous
/// Dirichlet data entering through zero ghost values beyond j = +-J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    /// Half node count J.
    pub half_count: usize,
    /// Mesh width L/J.
    pub dx: f64,
}

impl SpatialGrid {
    #[must_use]
    pub fn new(half_count: usize, half_length: f64) -> Self {
        SpatialGrid {
            half_count,
            dx: half_length / half_count as f64,
        }
    }

    /// Total number of unknowns, 2J+1.
    #[must_use]
    pub fn node_count(&self) -> usize {
        2 * self.half_count + 1
    }

    /// Storage index of the interface node x = 0.
    #[must_use]
    pub fn interface_index(&self) -> usize {
        self.half_count
    }

    /// Physical position of storage index `idx` (0 maps to -L, 2J to L).
    #[must_use]
    pub fn node_x(&self, idx: usize) -> f64 {
        (idx as f64 - self.half_count as f64) * self.dx
    }

    /// All node positions in storage order.
    #[must_use]
    pub fn node_positions(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.node_x(i)).collect()
    }
}

/// Uniform quadrature grid on (0, R] for the diffusive-mode integral, with
/// parity-doubled rectangle weights so the aggregate approximates the
/// integral over the whole real line.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    /// Truncation radius R.
    pub radius: f64,
    /// Mode count M.
    pub mode_count: usize,
    /// Mode spacing R/M.
    pub dxi: f64,
    /// Mode positions xi_l = l * dxi, l = 1..M.
    pub xi: Vec<f64>,
    /// Quadrature weight 2*dxi, identical for every mode.
    pub w: f64,
    /// Kernel weights mu_l = xi_l^((2*alpha-1)/2).
    pub mu: Vec<f64>,
    /// Mode relaxation rates d_l = xi_l^2 + eta.
    pub d: Vec<f64>,
    /// Normalization constant sin(alpha*pi)/pi.
    pub frak_c: f64,
}

impl QuadratureGrid {
    #[must_use]
    pub fn build(radius: f64, mode_count: usize, alpha: f64, eta: f64) -> Self {
        let dxi = radius / mode_count as f64;
        let exponent = (2.0 * alpha - 1.0) / 2.0;
        let mut xi = Vec::with_capacity(mode_count);
        let mut mu = Vec::with_capacity(mode_count);
        let mut d = Vec::with_capacity(mode_count);
        for l in 1..=mode_count {
            let x = l as f64 * dxi;
            xi.push(x);
            mu.push(x.powf(exponent));
            d.push(x * x + eta);
        }
        QuadratureGrid {
            radius,
            mode_count,
            dxi,
            xi,
            w: 2.0 * dxi,
            mu,
            d,
            frak_c: (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI,
        }
    }
}

/// Uniform time grid with the Newmark parameters attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub newmark_beta: f64,
    pub newmark_gamma: f64,
}

/// Full integrator state.
///
/// Storage index i in 0..2J+1 corresponds to node j = i - J; entries left of
/// the interface hold the left-material displacement, entry J the shared
/// interface value, entries right of it the right-material displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Displacement vector.
    pub u: Vec<f64>,
    /// Velocity vector.
    pub v: Vec<f64>,
    /// Acceleration vector.
    pub a: Vec<f64>,
    /// Diffusive mode field, one row of modes per node.
    pub phi: DiffusiveField,
    /// Current time.
    pub t: f64,
    /// Step index.
    pub n: usize,
}

/// One constraint violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{name} = {value} violates: {constraint}")]
pub struct InvalidParameter {
    pub name: String,
    pub value: String,
    pub constraint: String,
}

/// The complete list of violations in a configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ValidationError {
    pub violations: Vec<InvalidParameter>,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} invalid parameter(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f,"  {v}")?;
        }
        Ok(())
    }
}

/// Checks every type invariant and returns the complete list of violations,
/// not just the first.
pub fn validate(config: &SimConfig) -> Result<(), ValidationError> {
    let mut violations = Vec::new();
    let mut check = |ok: bool, name: &str, value: String, constraint: &str| {
        if !ok {
            violations.push(InvalidParameter {
                name: name.to_string(),
                value,
                constraint: constraint.to_string(),
            });
        }
    };

    let p = &config.physical;
    check(p.rho1 > 0.0, "physical.rho1", p.rho1.to_string(), "rho1 > 0");
    check(p.rho2 > 0.0, "physical.rho2", p.rho2.to_string(), "rho2 > 0");
    check(p.k1 > 0.0, "physical.k1", p.k1.to_string(), "k1 > 0");
    check(p.k2 > 0.0, "physical.k2", p.k2.to_string(), "k2 > 0");
    check(
        p.half_length > 0.0,
        "physical.L",
        p.half_length.to_string(),
        "L > 0",
    );

    let fr = &config.fractional;
    check(
        fr.alpha > 0.0 && fr.alpha < 1.0,
        "fractional.alpha",
        fr.alpha.to_string(),
        "0 < alpha < 1",
    );
    check(fr.eta >= 0.0, "fractional.eta", fr.eta.to_string(), "eta >= 0");

    check(
        config.space.half_count >= 2,
        "space.J",
        config.space.half_count.to_string(),
        "J >= 2",
    );

    let q = &config.quad;
    check(q.radius > 0.0, "quad.R", q.radius.to_string(), "R > 0");
    check(q.mode_count >= 1, "quad.M", q.mode_count.to_string(), "M >= 1");

    let t = &config.time;
    check(t.t_final > 0.0, "time.T", t.t_final.to_string(), "T > 0");
    check(t.steps >= 1, "time.N", t.steps.to_string(), "N >= 1");
    check(
        (0.0..=0.5).contains(&t.newmark_beta),
        "time.newmark_beta",
        t.newmark_beta.to_string(),
        "0 <= beta <= 1/2",
    );
    check(
        (0.0..=1.0).contains(&t.newmark_gamma),
        "time.newmark_gamma",
        t.newmark_gamma.to_string(),
        "0 <= gamma <= 1",
    );

    check(
        config.ic.epsilon > 0.0,
        "ic.epsilon",
        config.ic.epsilon.to_string(),
        "epsilon > 0",
    );
    if let IcKind::Tabulated(tab) = &config.ic.kind {
        let expected = 2 * config.space.half_count + 1;
        check(
            tab.displacement.len() == expected && tab.velocity.len() == expected,
            "ic",
            format!("{}/{} values", tab.displacement.len(), tab.velocity.len()),
            "tabulated data must cover all 2J+1 nodes",
        );
    }

    let o = &config.output;
    check(
        o.energy_stride >= 1,
        "output.energy_stride",
        o.energy_stride.to_string(),
        "energy_stride >= 1",
    );
    if let Some(s) = o.snapshot_stride {
        check(
            s >= 1,
            "output.snapshot_stride",
            s.to_string(),
            "snapshot_stride >= 1",
        );
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationError { violations })
    }
}

/// Initial condition of the first experiment: a Gaussian displacement bump
/// centered at x = -1/2 in the left material, the right material at rest.
/// Returns (displacement, velocity) at `x`; the interface takes the left
/// trace.
#[must_use]
pub fn initial_condition_example1(x: f64, epsilon: f64) -> (f64, f64) {
    if x <= 0.0 {
        let r = x - EXAMPLE1_CENTER;
        ((-r * r / epsilon).exp(), 0.0)
    } else {
        (0.0, 0.0)
    }
}

/// Initial condition of the second experiment: squared-sech bumps of opposite
/// sign centered at x = -1/2 and x = +1/2. Returns (displacement, velocity)
/// at `x`; the interface takes the left trace, which vanishes to below the
/// double underflow threshold.
#[must_use]
pub fn initial_condition_example2(x: f64, epsilon: f64) -> (f64, f64) {
    if x <= 0.0 {
        let r = x + EXAMPLE2_CENTER;
        (sech_sq(-r * r / epsilon), 0.0)
    } else {
        let r = x - EXAMPLE2_CENTER;
        (-sech_sq(-r * r / epsilon), 0.0)
    }
}

fn sech_sq(z: f64) -> f64 {
    let s = 1.0 / z.cosh();
    s * s
}

/// Reads tabulated initial data (`x,w0,w1` CSV) and checks that it matches
/// the grid node-for-node.
pub fn load_tabulated_ic(path: &Path, grid: &SpatialGrid) -> Result<TabulatedIc, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read initial-condition file {}: {e}", path.display()))?;
    parse_tabulated_ic(&text, grid).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses tabulated initial data from CSV text with header `x,w0,w1`.
pub fn parse_tabulated_ic(text: &str, grid: &SpatialGrid) -> Result<TabulatedIc, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,w0,w1" => {}
        _ => return Err("expected header 'x,w0,w1'".to_string()),
    }
    let mut displacement = Vec::with_capacity(grid.node_count());
    let mut velocity = Vec::with_capacity(grid.node_count());
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format!("line {}: expected 3 fields", idx + 1));
        }
        let parse = |s: &str| -> Result<f64, String> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("line {}: {e}", idx + 1))
        };
        let x = parse(fields[0])?;
        let row = displacement.len();
        if row >= grid.node_count() {
            return Err(format!("more rows than the {} grid nodes", grid.node_count()));
        }
        let expected_x = grid.node_x(row);
        if (x - expected_x).abs() > 1e-9 * expected_x.abs().max(1.0) {
            return Err(format!(
                "line {}: x = {x} does not match grid node {row} at x = {expected_x}",
                idx + 1
            ));
        }
        displacement.push(parse(fields[1])?);
        velocity.push(parse(fields[2])?);
    }
    if displacement.len() != grid.node_count() {
        return Err(format!(
            "{} rows for {} grid nodes",
            displacement.len(),
            grid.node_count()
        ));
    }
    Ok(TabulatedIc {
        displacement,
        velocity,
    })
}

/// Serializes tabulated initial data in the `x,w0,w1` CSV format accepted by
/// [`parse_tabulated_ic`].
#[must_use]
pub fn tabulated_ic_to_csv(ic: &TabulatedIc, grid: &SpatialGrid) -> String {
    let mut out = String::from("x,w0,w1\n");
    for i in 0..grid.node_count() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            grid.node_x(i),
            ic.displacement[i],
            ic.velocity[i]
        );
    }
    out
}

/// Error produced while reading the flat key-value config format.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config parse error: {message}")]
pub struct ConfigParseError {
    pub message: String,
}

fn parse_err(message: impl Into<String>) -> ConfigParseError {
    ConfigParseError {
        message: message.into(),
    }
}

#[derive(Debug, Default)]
struct ConfigBuilder {
    rho1: Option<f64>,
    rho2: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    half_length: Option<f64>,
    alpha: Option<f64>,
    eta: Option<f64>,
    damping_enabled: Option<bool>,
    half_count: Option<usize>,
    radius: Option<f64>,
    mode_count: Option<usize>,
    t_final: Option<f64>,
    steps: Option<usize>,
    newmark_beta: Option<f64>,
    newmark_gamma: Option<f64>,
    ic_preset: Option<String>,
    ic_path: Option<PathBuf>,
    ic_epsilon: Option<f64>,
    energy_stride: Option<usize>,
    snapshot_stride: Option<usize>,
    dir: Option<PathBuf>,
    force_evaluation: Option<ForceEvaluation>,
}

impl ConfigBuilder {
    fn apply(&mut self, key: &str, value: &str, line_no: usize) -> Result<(), ConfigParseError> {
        fn num<T: std::str::FromStr>(
            key: &str,
            value: &str,
            line_no: usize,
        ) -> Result<T, ConfigParseError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse::<T>().map_err(|e| {
                parse_err(format!("line {line_no}: {key} = '{value}': {e}"))
            })
        }
        macro_rules! set {
            ($field:ident, $val:expr) => {{
                if self.$field.is_some() {
                    return Err(parse_err(format!("line {line_no}: duplicate key {key}")));
                }
                self.$field = Some($val);
            }};
        }
        match key {
            "physical.rho1" => set!(rho1, num(key, value, line_no)?),
            "physical.rho2" => set!(rho2, num(key, value, line_no)?),
            "physical.k1" => set!(k1, num(key, value, line_no)?),
            "physical.k2" => set!(k2, num(key, value, line_no)?),
            "physical.L" => set!(half_length, num(key, value, line_no)?),
            "fractional.alpha" => set!(alpha, num(key, value, line_no)?),
            "fractional.eta" => set!(eta, num(key, value, line_no)?),
            "fractional.damping_enabled" => set!(damping_enabled, num(key, value, line_no)?),
            "space.J" => set!(half_count, num(key, value, line_no)?),
            "quad.R" => set!(radius, num(key, value, line_no)?),
            "quad.M" => set!(mode_count, num(key, value, line_no)?),
            "time.T" => set!(t_final, num(key, value, line_no)?),
            "time.N" => set!(steps, num(key, value, line_no)?),
            "time.newmark_beta" => set!(newmark_beta, num(key, value, line_no)?),
            "time.newmark_gamma" => set!(newmark_gamma, num(key, value, line_no)?),
            "ic.preset" => set!(ic_preset, value.to_string()),
            "ic.path" => set!(ic_path, PathBuf::from(value)),
            "ic.epsilon" => set!(ic_epsilon, num(key, value, line_no)?),
            "output.energy_stride" => set!(energy_stride, num(key, value, line_no)?),
            "output.snapshot_stride" => set!(snapshot_stride, num(key, value, line_no)?),
            "output.dir" => set!(dir, PathBuf::from(value)),
            "stepper.force_evaluation" => {
                let fe = value
                    .parse::<ForceEvaluation>()
                    .map_err(|e| parse_err(format!("line {line_no}: {e}")))?;
                set!(force_evaluation, fe)
            }
            other => {
                return Err(parse_err(format!("line {line_no}: unknown key '{other}'")));
            }
        }
        Ok(())
    }

    fn finish(self, base_dir: Option<&Path>) -> Result<SimConfig, ConfigParseError> {
        let mut missing = Vec::new();
        macro_rules! require {
            ($field:ident, $key:expr) => {
                match self.$field {
                    Some(v) => v,
                    None => {
                        missing.push($key);
                        Default::default()
                    }
                }
            };
        }
        let rho1 = require!(rho1, "physical.rho1");
        let rho2 = require!(rho2, "physical.rho2");
        let k1 = require!(k1, "physical.k1");
        let k2 = require!(k2, "physical.k2");
        let half_length = require!(half_length, "physical.L");
        let alpha = require!(alpha, "fractional.alpha");
        let eta = require!(eta, "fractional.eta");
        let half_count = require!(half_count, "space.J");
        let radius = require!(radius, "quad.R");
        let mode_count = require!(mode_count, "quad.M");
        let t_final = require!(t_final, "time.T");
        let steps = require!(steps, "time.N");
        let preset = self.ic_preset.clone();
        let kind = match preset.as_deref() {
            Some("example1") => IcKind::Example1,
            Some("example2") => IcKind::Example2,
            Some("file") => match &self.ic_path {
                Some(p) => {
                    let resolved = match (p.is_relative(), base_dir) {
                        (true, Some(base)) => base.join(p),
                        _ => p.clone(),
                    };
                    IcKind::File(resolved)
                }
                None => {
                    return Err(parse_err("ic.preset = file requires ic.path"));
                }
            },
            Some(other) => {
                return Err(parse_err(format!(
                    "ic.preset = '{other}' (expected example1, example2, or file)"
                )));
            }
            None => {
                missing.push("ic.preset");
                IcKind::Example1
            }
        };
        if !missing.is_empty() {
            return Err(parse_err(format!("missing required keys: {}", missing.join(", "))));
        }
        Ok(SimConfig {
            physical: PhysicalParams {
                rho1,
                rho2,
                k1,
                k2,
                half_length,
            },
            fractional: FractionalParams {
                alpha,
                eta,
                damping_enabled: self.damping_enabled.unwrap_or(true),
            },
            space: SpaceParams { half_count },
            quad: QuadParams { radius, mode_count },
            time: TimeParams {
                t_final,
                steps,
                newmark_beta: self.newmark_beta.unwrap_or(DEFAULT_NEWMARK_BETA),
                newmark_gamma: self.newmark_gamma.unwrap_or(DEFAULT_NEWMARK_GAMMA),
            },
            ic: IcSpec {
                kind,
                epsilon: self.ic_epsilon.unwrap_or(DEFAULT_IC_EPSILON),
            },
            output: OutputParams {
                energy_stride: self.energy_stride.unwrap_or(1),
                snapshot_stride: self.snapshot_stride,
                dir: self.dir.unwrap_or_else(|| PathBuf::from("fracwave_out")),
            },
            force_evaluation: self.force_evaluation.unwrap_or(ForceEvaluation::HalfStep),
        })
    }
}

/// Parses the flat `section.key = value` config format. Lines starting with
/// `#` and trailing `#` comments are ignored. `base_dir`, when given,
/// resolves relative `ic.path` entries.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<SimConfig, ConfigParseError> {
    let mut builder = ConfigBuilder::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(format!(
                "line {line_no}: expected 'key = value', got '{line}'"
            )));
        };
        builder.apply(key.trim(), value.trim(), line_no)?;
    }
    builder.finish(base_dir)
}

/// Reads and parses a config file; relative `ic.path` entries resolve
/// against the file's directory.
pub fn read_config(path: &Path) -> Result<SimConfig, ConfigParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, path.parent())
}

/// Serializes a config in the format accepted by [`parse_config`]. Fails for
/// in-memory tabulated initial data, which has no file representation.
pub fn config_to_text(config: &SimConfig) -> Result<String, String> {
    let mut s = String::new();
    let p = &config.physical;
    let _ = writeln!(s, "physical.rho1 = {}", p.rho1);
    let _ = writeln!(s, "physical.rho2 = {}", p.rho2);
    let _ = writeln!(s, "physical.k1 = {}", p.k1);
    let _ = writeln!(s, "physical.k2 = {}", p.k2);
    let _ = writeln!(s, "physical.L = {}", p.half_length);
    let f = &config.fractional;
    let _ = writeln!(s, "fractional.alpha = {}", f.alpha);
    let _ = writeln!(s, "fractional.eta = {}", f.eta);
    let _ = writeln!(s, "fractional.damping_enabled = {}", f.damping_enabled);
    let _ = writeln!(s, "space.J = {}", config.space.half_count);
    let _ = writeln!(s, "quad.R = {}", config.quad.radius);
    let _ = writeln!(s, "quad.M = {}", config.quad.mode_count);
    let t = &config.time;
    let _ = writeln!(s, "time.T = {}", t.t_final);
    let _ = writeln!(s, "time.N = {}", t.steps);
    let _ = writeln!(s, "time.newmark_beta = {}", t.newmark_beta);
    let _ = writeln!(s, "time.newmark_gamma = {}", t.newmark_gamma);
    match &config.ic.kind {
        IcKind::Example1 => {
            let _ = writeln!(s, "ic.preset = example1");
        }
        IcKind::Example2 => {
            let _ = writeln!(s, "ic.preset = example2");
        }
        IcKind::File(path) => {
            let _ = writeln!(s, "ic.preset = file");
            let _ = writeln!(s, "ic.path = {}", path.display());
        }
        IcKind::Tabulated(_) => {
            return Err("in-memory tabulated initial data cannot be serialized".to_string());
        }
    }
    let _ = writeln!(s, "ic.epsilon = {}", config.ic.epsilon);
    let o = &config.output;
    let _ = writeln!(s, "output.energy_stride = {}", o.energy_stride);
    if let Some(stride) = o.snapshot_stride {
        let _ = writeln!(s, "output.snapshot_stride = {stride}");
    }
    let _ = writeln!(s, "output.dir = {}", o.dir.display());
    let _ = writeln!(
        s,
        "stepper.force_evaluation = {}",
        config.force_evaluation.as_str()
    );
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn valid_config() -> SimConfig {
        SimConfig {
            physical: PhysicalParams {
                rho1: 1.0,
                rho2: 1.0,
                k1: 10.0,
                k2: 2.0,
                half_length: 1.0,
            },
            fractional: FractionalParams {
                alpha: 0.5,
                eta: 1.0,
                damping_enabled: true,
            },
            space: SpaceParams { half_count: 100 },
            quad: QuadParams {
                radius: 10.0,
                mode_count: 200,
            },
            time: TimeParams {
                t_final: 1.0,
                steps: 1000,
                newmark_beta: DEFAULT_NEWMARK_BETA,
                newmark_gamma: DEFAULT_NEWMARK_GAMMA,
            },
            ic: IcSpec {
                kind: IcKind::Example1,
                epsilon: DEFAULT_IC_EPSILON,
            },
            output: OutputParams {
                energy_stride: 1,
                snapshot_stride: None,
                dir: PathBuf::from("out"),
            },
            force_evaluation: ForceEvaluation::HalfStep,
        }
    }

    #[test]
    fn validate_accepts_reference_parameters() {
        assert!(validate(&valid_config()).is_ok());
    }

    #[test]
    fn validate_rejects_alpha_boundary() {
        let mut c = valid_config();
        c.fractional.alpha = 1.0;
        let err = validate(&c).unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert_eq!(err.violations[0].name, "fractional.alpha");
        assert_eq!(err.violations[0].constraint, "0 < alpha < 1");
    }

    #[test]
    fn validate_rejects_degenerate_grid() {
        let mut c = valid_config();
        c.space.half_count = 0;
        let err = validate(&c).unwrap_err();
        assert_eq!(err.violations[0].constraint, "J >= 2");
    }

    #[test]
    fn validate_collects_every_violation() {
        let mut c = valid_config();
        c.fractional.alpha = 2.0;
        c.space.half_count = 0;
        c.physical.k1 = -1.0;
        c.time.steps = 0;
        let err = validate(&c).unwrap_err();
        let names: Vec<&str> = err.violations.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["physical.k1", "fractional.alpha", "space.J", "time.N"]
        );
    }

    #[test]
    fn validate_is_idempotent() {
        let c = valid_config();
        assert_eq!(validate(&c), validate(&c));
        let mut bad = valid_config();
        bad.fractional.alpha = 0.0;
        assert_eq!(validate(&bad), validate(&bad));
    }

    #[test]
    fn example1_matches_closed_forms() {
        let eps = DEFAULT_IC_EPSILON;
        assert_eq!(initial_condition_example1(-0.5, eps), (1.0, 0.0));
        assert_eq!(initial_condition_example1(0.25, eps), (0.0, 0.0));
        let (u, v) = initial_condition_example1(-0.4, eps);
        assert_relative_eq!(u, (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(u, 0.1353352832366127, max_relative = 1e-12);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn example2_matches_closed_forms() {
        let eps = DEFAULT_IC_EPSILON;
        assert_eq!(initial_condition_example2(-0.5, eps), (1.0, 0.0));
        assert_eq!(initial_condition_example2(0.5, eps), (-1.0, 0.0));
        let (u0, _) = initial_condition_example2(0.0, eps);
        assert!(u0.abs() < 1e-30);
    }

    #[test]
    fn example2_interface_traces_agree() {
        let eps = DEFAULT_IC_EPSILON;
        let left = sech_sq(-(0.0 + EXAMPLE2_CENTER).powi(2) / eps);
        let right = -sech_sq(-(0.0 - EXAMPLE2_CENTER).powi(2) / eps);
        assert!((left - right).abs() < 1e-30);
    }

    #[test]
    fn spatial_grid_places_interface_at_zero() {
        let g = SpatialGrid::new(4, 1.0);
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.interface_index(), 4);
        assert_eq!(g.node_x(4), 0.0);
        assert_relative_eq!(g.node_x(0), -1.0);
        assert_relative_eq!(g.node_x(8), 1.0);
        assert_relative_eq!(g.dx, 0.25);
    }

    #[test]
    fn quadrature_grid_tables() {
        let q = QuadratureGrid::build(10.0, 5, 0.5, 1.0);
        assert_relative_eq!(q.dxi, 2.0);
        assert_eq!(q.xi, vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(q.mu, vec![1.0; 5]);
        assert_eq!(q.d, vec![5.0, 17.0, 37.0, 65.0, 101.0]);
        assert_relative_eq!(q.w, 4.0);
        assert_relative_eq!(q.frak_c, std::f64::consts::FRAC_1_PI, max_relative = 1e-15);
        assert!(q.frak_c > 0.0 && q.frak_c <= 1.0 / std::f64::consts::PI + 1e-15);

        let q = QuadratureGrid::build(1.0, 2, 0.75, 0.0);
        assert_relative_eq!(q.mu[0], 0.5f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(q.mu[1], 1.0);
    }

    #[test]
    fn time_grid_spacing() {
        let mut c = valid_config();
        c.time.t_final = 2.0;
        c.time.steps = 8;
        let t = c.time_grid();
        assert_relative_eq!(t.dt, 0.25);
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut c = valid_config();
        c.output.snapshot_stride = Some(100);
        c.fractional.eta = 0.0003;
        let text = config_to_text(&c).unwrap();
        let parsed = parse_config(&text, None).unwrap();
        assert_eq!(parsed, c);
        let text2 = config_to_text(&parsed).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn parse_rejects_unknown_and_duplicate_keys() {
        let base = config_to_text(&valid_config()).unwrap();
        let err = parse_config(&format!("{base}bogus.key = 1\n"), None).unwrap_err();
        assert!(err.message.contains("unknown key"));
        let err = parse_config(&format!("{base}space.J = 5\n"), None).unwrap_err();
        assert!(err.message.contains("duplicate key"));
    }

    #[test]
    fn parse_reports_missing_keys() {
        let err = parse_config("physical.rho1 = 1\n", None).unwrap_err();
        assert!(err.message.contains("missing required keys"));
        assert!(err.message.contains("time.T"));
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let text = format!(
            "# leading comment\n\n{}  # trailing\n",
            config_to_text(&valid_config()).unwrap().trim_end()
        );
        assert!(parse_config(&text, None).is_ok());
    }

    #[test]
    fn parse_rejects_malformed_values() {
        let base = config_to_text(&valid_config()).unwrap();
        let bad = base.replace("fractional.alpha = 0.5", "fractional.alpha = half");
        let err = parse_config(&bad, None).unwrap_err();
        assert!(err.message.contains("fractional.alpha"));
    }

    #[test]
    fn tabulated_ic_round_trips() {
        let grid = SpatialGrid::new(3, 1.0);
        let ic = TabulatedIc {
            displacement: (0..7).map(|i| i as f64 * 0.1).collect(),
            velocity: (0..7).map(|i| -(i as f64)).collect(),
        };
        let csv = tabulated_ic_to_csv(&ic, &grid);
        let parsed = parse_tabulated_ic(&csv, &grid).unwrap();
        assert_eq!(parsed, ic);
    }

    #[test]
    fn tabulated_ic_rejects_grid_mismatch() {
        let grid = SpatialGrid::new(3, 1.0);
        let other = SpatialGrid::new(4, 1.0);
        let ic = TabulatedIc {
            displacement: vec![0.0; 7],
            velocity: vec![0.0; 7],
        };
        let csv = tabulated_ic_to_csv(&ic, &grid);
        assert!(parse_tabulated_ic(&csv, &other).is_err());
    }

    proptest! {
        #[test]
        fn presets_are_pure(x in -1.0f64..1.0) {
            prop_assert_eq!(
                initial_condition_example1(x, DEFAULT_IC_EPSILON),
                initial_condition_example1(x, DEFAULT_IC_EPSILON)
            );
            prop_assert_eq!(
                initial_condition_example2(x, DEFAULT_IC_EPSILON),
                initial_condition_example2(x, DEFAULT_IC_EPSILON)
            );
        }

        #[test]
        fn validate_verdict_is_stable(
            alpha in 0.0f64..1.5,
            eta in -0.5f64..1.5,
            j in 0usize..50,
        ) {
            let mut c = valid_config();
            c.fractional.alpha = alpha;
            c.fractional.eta = eta;
            c.space.half_count = j;
            prop_assert_eq!(validate(&c), validate(&c));
        }
    }
}
