//! Level systems, pulse schedules, error injection and scheme specifications.
//!
//! All times are in units of `1/Omega_bar` and all rates in units of `Omega_bar`; physical
//! units only appear at the command-line layer.

use crate::error::{NhqcError, Result};
use crate::numkit::{basis_state, c, cis, pauli, ComplexMatrix, StateVector, C64, I};
use crate::schemes::{PathParams, PathPart, PsDesign};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reference Rabi rate used for physical-unit conversion, `2 pi x 10 MHz` in rad/s.
pub const OMEGA_BAR_PHYSICAL: f64 = 2.0 * PI * 10.0e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Lambda3,
    Tripod4,
    ThreeQubit8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSystem {
    pub kind: SystemKind,
    pub dim: usize,
    /// Basis indices of logical `|0>` and `|1>`, in that order.
    pub computational_indices: Vec<usize>,
    /// Index of `|e>`; absent for the three-qubit register.
    pub excited_index: Option<usize>,
    /// Level whose population counts as "excited" in reports (`|e>` or the ancilla `|100>`).
    pub auxiliary_index: usize,
}

impl LevelSystem {
    /// Basis `{|0>, |1>, |e>}`.
    pub fn lambda3() -> Self {
        LevelSystem {
            kind: SystemKind::Lambda3,
            dim: 3,
            computational_indices: vec![0, 1],
            excited_index: Some(2),
            auxiliary_index: 2,
        }
    }

    /// Basis `{|0>, |1>, |2>, |e>}`; the qubit lives on `{|0>, |1>}`.
    pub fn tripod4() -> Self {
        LevelSystem {
            kind: SystemKind::Tripod4,
            dim: 4,
            computational_indices: vec![0, 1],
            excited_index: Some(3),
            auxiliary_index: 3,
        }
    }

    /// Three qubits with qubit 1 as the most significant bit. Logical states are
    /// `|010> = 2` and `|001> = 1`; the ancilla is `|100> = 4`.
    pub fn three_qubit8() -> Self {
        LevelSystem {
            kind: SystemKind::ThreeQubit8,
            dim: 8,
            computational_indices: vec![2, 1],
            excited_index: None,
            auxiliary_index: 4,
        }
    }

    /// Embeds a vector on the computational subspace into the full space.
    pub fn embed(&self, amplitudes: &[C64; 2]) -> StateVector {
        let mut v = StateVector::zeros(self.dim);
        for (k, &idx) in self.computational_indices.iter().enumerate() {
            v[idx] = amplitudes[k];
        }
        v
    }

    /// Embeds a 2x2 operator on the computational subspace; other levels map to zero.
    pub fn embed_operator(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for (a, &ia) in self.computational_indices.iter().enumerate() {
            for (b, &ib) in self.computational_indices.iter().enumerate() {
                m.set(ia, ib, op.get(a, b));
            }
        }
        m
    }

    pub fn auxiliary_state(&self) -> StateVector {
        basis_state(self.dim, self.auxiliary_index)
    }
}

/// Rotation angle `gamma` about the axis `n = (sin t cos p, sin t sin p, cos t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateAngles {
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
}

impl GateAngles {
    pub fn new(gamma: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0 * PI) {
            return Err(NhqcError::InvalidParameter(format!("gamma = {gamma} must lie in (0, 2pi)")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(NhqcError::InvalidParameter(format!("theta = {theta} must lie in [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(NhqcError::InvalidParameter(format!("phi = {phi} must lie in [0, 2pi)")));
        }
        Ok(GateAngles { gamma, theta, phi })
    }

    /// Phase gate `S = diag(1, i)`.
    pub fn s_gate() -> Self {
        GateAngles { gamma: PI / 2.0, theta: 0.0, phi: 0.0 }
    }

    /// `T = diag(1, e^{i pi/4})`.
    pub fn t_gate() -> Self {
        GateAngles { gamma: PI / 4.0, theta: 0.0, phi: 0.0 }
    }

    pub fn not_gate() -> Self {
        GateAngles { gamma: PI, theta: PI / 2.0, phi: 0.0 }
    }

    pub fn hadamard() -> Self {
        GateAngles { gamma: PI, theta: PI / 4.0, phi: 0.0 }
    }

    pub fn sqrt_hadamard() -> Self {
        GateAngles { gamma: PI / 2.0, theta: PI / 4.0, phi: 0.0 }
    }

    /// Ideal gate `exp(-i gamma/2 n.sigma)`.
    pub fn target(&self) -> ComplexMatrix {
        pauli::rotation(self.gamma, self.theta, self.phi)
    }
}

/// Bright and dark qubit states for the axis `(theta, phi)`:
/// `|b> = sin(t/2)|0> - cos(t/2) e^{i p}|1>`, `|d> = cos(t/2) e^{-i p}|0> + sin(t/2)|1>`.
pub fn bright_dark_basis(angles: &GateAngles) -> ([C64; 2], [C64; 2]) {
    bright_dark_amplitudes(angles.theta, angles.phi)
}

pub fn bright_dark_amplitudes(theta: f64, phi: f64) -> ([C64; 2], [C64; 2]) {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let bright = [c(s, 0.0), -cis(phi) * co];
    let dark = [cis(-phi) * co, c(s, 0.0)];
    (bright, dark)
}

/// Closed-form time profiles, evaluated in segment-local time.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `offset + slope t`
    Linear { offset: f64, slope: f64 },
    /// `amplitude sin^2(pi t / duration)`
    Sin2 { amplitude: f64, duration: f64 },
    /// Monotone `from -> to` over `duration` with sin^2 shoulders of width
    /// `shoulder * duration` at both ends, so the rate is continuous.
    Ramp { from: f64, to: f64, duration: f64, shoulder: f64 },
    /// One component of a circular-path inverse-engineered drive.
    Circle { path: PathParams, part: PathPart },
    /// One component of a pulse-shaped half loop, phases shifted by `phase_offset`.
    Shaped { shape: PsDesign, part: PathPart, phase_offset: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Linear { offset, slope } => offset + slope * t,
            Profile::Sin2 { amplitude, duration } => amplitude * (PI * t / duration).sin().powi(2),
            Profile::Ramp { from, to, duration, shoulder } => {
                from + (to - from) * ramp_fraction(t, *duration, *shoulder)
            }
            Profile::Circle { path, part } => path.component(*part, t),
            Profile::Shaped { shape, part, phase_offset } => match part {
                PathPart::Phase => shape.component(*part, t) + phase_offset,
                _ => shape.component(*part, t),
            },
        }
    }

    /// Time derivative; exact for the elementary shapes, central difference otherwise.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(_) => 0.0,
            Profile::Linear { slope, .. } => *slope,
            Profile::Sin2 { amplitude, duration } => {
                amplitude * PI / duration * (2.0 * PI * t / duration).sin()
            }
            Profile::Ramp { from, to, duration, shoulder } => {
                (to - from) * ramp_rate(t, *duration, *shoulder)
            }
            _ => {
                let h = 1e-6;
                (self.value(t + h) - self.value(t - h)) / (2.0 * h)
            }
        }
    }

    /// `int_0^t value(s) ds`; closed form for the elementary shapes.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(v) => v * t,
            Profile::Linear { offset, slope } => offset * t + 0.5 * slope * t * t,
            Profile::Sin2 { amplitude, duration } => {
                amplitude * (t / 2.0 - duration / (4.0 * PI) * (2.0 * PI * t / duration).sin())
            }
            _ => {
                if t <= 0.0 {
                    return 0.0;
                }
                match crate::numkit::TimeGrid::new(0.0, t, 4096) {
                    Ok(grid) => crate::numkit::quad_trapz_fn(|s| self.value(s), &grid).unwrap_or(f64::NAN),
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// `true` when the profile is constant in time, letting propagators treat the
    /// segment generator as time-independent.
    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant(_))
    }
}

fn ramp_shoulder_integral(s: f64, w: f64) -> f64 {
    s / 2.0 - w / (2.0 * PI) * (PI * s / w).sin()
}

/// Normalised position in `[0, 1]` of a C1 ramp with sin^2 shoulders.
pub fn ramp_fraction(t: f64, duration: f64, shoulder: f64) -> f64 {
    let w = shoulder * duration;
    let total = duration - w;
    let t = t.clamp(0.0, duration);
    let raw = if w <= 0.0 {
        t
    } else if t < w {
        ramp_shoulder_integral(t, w)
    } else if t <= duration - w {
        w / 2.0 + (t - w)
    } else {
        total - ramp_shoulder_integral(duration - t, w)
    };
    raw / total
}

/// Derivative of [`ramp_fraction`] with respect to time.
pub fn ramp_rate(t: f64, duration: f64, shoulder: f64) -> f64 {
    let w = shoulder * duration;
    let total = duration - w;
    if !(0.0..=duration).contains(&t) {
        return 0.0;
    }
    let r = if w <= 0.0 {
        1.0
    } else if t < w {
        (PI * t / (2.0 * w)).sin().powi(2)
    } else if t <= duration - w {
        1.0
    } else {
        (PI * (duration - t) / (2.0 * w)).sin().powi(2)
    };
    r / total
}

/// How a segment's envelope enters the Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub enum Coupling {
    /// `Omega(t) e^{-i phi0(t)} |c><e| + h.c.` with `|c>` given on the computational subspace.
    Lambda { coupled: [C64; 2] },
    /// Tripod dark-state drive along `(theta(t), phi(t))`, with the counter-diabatic term.
    Tripod { theta: Profile, phi: Profile },
    /// Three-qubit exchange `J(t) H_df`, where the envelope is `J(t)`.
    Exchange { phi: f64, generator: ComplexMatrix },
}

/// One piece of a piecewise-defined control.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSegment {
    pub duration: f64,
    pub envelope: Profile,
    pub phase: Profile,
    pub detuning: Profile,
    /// Axis `(theta, phi)` of the bright state this segment couples.
    pub bright_axis: (f64, f64),
    pub coupling: Coupling,
}

impl DriveSegment {
    pub fn lambda(
        duration: f64,
        envelope: Profile,
        phase: Profile,
        detuning: Profile,
        coupled: [C64; 2],
        bright_axis: (f64, f64),
    ) -> Self {
        DriveSegment {
            duration,
            envelope,
            phase,
            detuning,
            bright_axis,
            coupling: Coupling::Lambda { coupled },
        }
    }

    /// `true` if the Hamiltonian of this segment does not depend on time.
    pub fn is_time_independent(&self) -> bool {
        self.envelope.is_constant()
            && self.phase.is_constant()
            && self.detuning.is_constant()
            && !matches!(self.coupling, Coupling::Tripod { .. })
    }

    /// Off-diagonal drive terms at local time `t` (no detuning, no error scaling).
    pub fn drive(&self, system: &LevelSystem, t: f64) -> ComplexMatrix {
        let omega = self.envelope.value(t);
        match &self.coupling {
            Coupling::Lambda { coupled } => {
                let mut h = ComplexMatrix::zeros(system.dim);
                let e = system.excited_index.expect("lambda coupling needs an excited level");
                let g = cis(-self.phase.value(t)) * omega;
                for (k, &idx) in system.computational_indices.iter().enumerate() {
                    let v = g * coupled[k];
                    h.add_at(idx, e, v);
                    h.add_at(e, idx, v.conj());
                }
                h
            }
            Coupling::Tripod { theta, phi } => tripod_drive(omega, theta, phi, t),
            Coupling::Exchange { generator, .. } => generator.scale_real(omega),
        }
    }

    /// Full segment Hamiltonian at local time `t` with errors injected.
    pub fn hamiltonian(&self, system: &LevelSystem, t: f64, err: &ErrorModel) -> ComplexMatrix {
        let mut h = self.drive(system, t).scale_real(1.0 + err.epsilon);
        if let Some(e) = system.excited_index {
            let diag = self.detuning.value(t) + err.eta;
            h.add_at(e, e, c(diag, 0.0));
        }
        h
    }
}

/// `H_t0 + H_t1` on `{|0>, |1>, |2>, |e>}`:
/// `H_t0 = Omega |e>(-sin(t/2) e^{ip} <1| + cos(t/2) <2|) + h.c.` and
/// `H_t1 = i (dt/2) (e^{ip} |2><1| - e^{-ip} |1><2|)`.
fn tripod_drive(omega: f64, theta: &Profile, phi: &Profile, t: f64) -> ComplexMatrix {
    let th = theta.value(t);
    let ph = phi.value(t);
    let th_dot = theta.derivative(t);
    let mut h = ComplexMatrix::zeros(4);
    let e1 = cis(ph) * (-(th / 2.0).sin() * omega);
    let e2 = c((th / 2.0).cos() * omega, 0.0);
    h.set(3, 1, e1);
    h.set(1, 3, e1.conj());
    h.set(3, 2, e2);
    h.set(2, 3, e2.conj());
    let cd = I * (th_dot / 2.0) * cis(ph);
    h.add_at(2, 1, cd);
    h.add_at(1, 2, cd.conj());
    h
}

/// Systematic and decoherence error parameters, all rates in units of `Omega_bar`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub gamma_minus: f64,
    #[serde(default)]
    pub gamma_z: f64,
}

impl ErrorModel {
    pub fn ideal() -> Self {
        ErrorModel::default()
    }

    pub fn new(epsilon: f64, eta: f64, gamma_minus: f64, gamma_z: f64) -> Result<Self> {
        let m = ErrorModel { epsilon, eta, gamma_minus, gamma_z };
        m.validate()?;
        Ok(m)
    }

    pub fn rabi(epsilon: f64) -> Self {
        ErrorModel { epsilon, ..Default::default() }
    }

    pub fn detuning(eta: f64) -> Self {
        ErrorModel { eta, ..Default::default() }
    }

    pub fn decoherence(gamma: f64) -> Self {
        ErrorModel { gamma_minus: gamma, gamma_z: gamma, ..Default::default() }
    }

    /// Converts decay and dephasing rates given in rad/s into units of `omega_bar`.
    pub fn from_physical(epsilon: f64, eta: f64, gamma_minus: f64, gamma_z: f64, omega_bar: f64) -> Result<Self> {
        Self::new(epsilon, eta, gamma_minus / omega_bar, gamma_z / omega_bar)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_minus >= 0.0 && self.gamma_z >= 0.0) {
            return Err(NhqcError::InvalidParameter("decoherence rates must be non-negative".into()));
        }
        if !(self.epsilon.is_finite() && self.eta.is_finite()) {
            return Err(NhqcError::InvalidParameter("error fractions must be finite".into()));
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.gamma_minus == 0.0 && self.gamma_z == 0.0
    }
}

/// A complete control schedule together with its ideal two-level target.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pub system: LevelSystem,
    pub segments: Vec<DriveSegment>,
    pub target: ComplexMatrix,
    pub scheme_label: String,
}

impl PulseSchedule {
    pub fn new(system: LevelSystem, segments: Vec<DriveSegment>, target: ComplexMatrix, scheme_label: &str) -> Result<Self> {
        if segments.iter().any(|s| !(s.duration > 0.0)) {
            return Err(NhqcError::InvalidParameter("segment durations must be positive".into()));
        }
        if segments.is_empty() {
            return Err(NhqcError::InvalidParameter("schedule has no segments".into()));
        }
        if target.dim() != 2 || target.unitary_defect() > crate::numkit::UNITARY_TOL {
            return Err(NhqcError::InvalidParameter("target must be a 2x2 unitary".into()));
        }
        Ok(PulseSchedule {
            system,
            segments,
            target,
            scheme_label: scheme_label.to_string(),
        })
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start time of each segment.
    pub fn segment_starts(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = acc;
                acc += s.duration;
                start
            })
            .collect()
    }

    /// Segment index and local time for global time `t`; segment ends belong to the
    /// segment they close.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let total = self.total_duration();
        let tol = 1e-12 * total.max(1.0);
        if !(t >= -tol && t <= total + tol) {
            return Err(NhqcError::TimeOutOfRange { t, total });
        }
        let mut start = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            if t <= start + seg.duration || k + 1 == self.segments.len() {
                return Ok((k, (t - start).clamp(0.0, seg.duration)));
            }
            start += seg.duration;
        }
        unreachable!()
    }

    /// Distributes `samples` integration steps over segments in proportion to duration,
    /// with at least `min_per_segment` steps each.
    pub fn steps_per_segment(&self, samples: usize, min_per_segment: usize) -> Vec<usize> {
        let total = self.total_duration();
        self.segments
            .iter()
            .map(|s| ((samples as f64 * s.duration / total).round() as usize).max(min_per_segment))
            .collect()
    }
}

/// `H(t) = (1+eps) [drive] + Delta(t)|e><e| + eta |e><e|`.
pub fn hamiltonian_at(schedule: &PulseSchedule, t: f64, err: &ErrorModel) -> Result<ComplexMatrix> {
    let (k, local) = schedule.locate(t)?;
    Ok(schedule.segments[k].hamiltonian(&schedule.system, local, err))
}

/// Drive part only, without detuning or errors.
pub fn drive_at(schedule: &PulseSchedule, t: f64) -> Result<ComplexMatrix> {
    let (k, local) = schedule.locate(t)?;
    Ok(schedule.segments[k].drive(&schedule.system, local))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Sl,
    Ss,
    Ps,
    C,
    Dc,
    To,
    S,
    Cdd,
    Sta,
    Dfs3,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::Sl,
        SchemeKind::Ss,
        SchemeKind::Ps,
        SchemeKind::C,
        SchemeKind::Dc,
        SchemeKind::To,
        SchemeKind::S,
        SchemeKind::Cdd,
        SchemeKind::Sta,
        SchemeKind::Dfs3,
    ];

    /// The seven single-qubit schemes compared in the decoherence benchmark.
    pub const BENCHMARK: [SchemeKind; 7] = [
        SchemeKind::Sl,
        SchemeKind::Ps,
        SchemeKind::C,
        SchemeKind::Dc,
        SchemeKind::To,
        SchemeKind::S,
        SchemeKind::Cdd,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            SchemeKind::Sl => "sl",
            SchemeKind::Ss => "ss",
            SchemeKind::Ps => "ps",
            SchemeKind::C => "c",
            SchemeKind::Dc => "dc",
            SchemeKind::To => "to",
            SchemeKind::S => "s",
            SchemeKind::Cdd => "cdd",
            SchemeKind::Sta => "sta",
            SchemeKind::Dfs3 => "dfs3",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Sl => "SL-NHQC",
            SchemeKind::Ss => "SS-NHQC",
            SchemeKind::Ps => "PS-NHQC",
            SchemeKind::C => "C-NHQC",
            SchemeKind::Dc => "DC-NHQC",
            SchemeKind::To => "TO-UNHQC",
            SchemeKind::S => "S-NHQC",
            SchemeKind::Cdd => "CDD-NHQC",
            SchemeKind::Sta => "STA-HQC",
            SchemeKind::Dfs3 => "DFS-NHQC",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        let t = tag.trim().to_ascii_lowercase();
        SchemeKind::ALL
            .iter()
            .copied()
            .find(|k| k.tag() == t)
            .ok_or(NhqcError::UnknownScheme(tag.to_string()))
    }

    /// Conventional holonomic schemes, whose computational trajectories obey parallel transport.
    pub fn is_conventional(&self) -> bool {
        matches!(
            self,
            SchemeKind::Sl | SchemeKind::Ps | SchemeKind::C | SchemeKind::Dc | SchemeKind::S | SchemeKind::Cdd
        )
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Which of the two equivalent parameterisations of the shaped `chi(t)` profile to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiConvention {
    /// `chi = pi sin^2(pi t / (2 tau))` over a half loop of length `tau`.
    #[default]
    Table,
    /// `chi = pi sin^2(pi t / tau)` with `tau` the full gate time.
    Text,
}

/// Description of one gate realisation. Fields irrelevant to the chosen scheme are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: SchemeKind,
    pub angles: GateAngles,
    /// Reference Rabi rate in rad/s; only used to convert to physical units.
    #[serde(default = "default_omega_bar")]
    pub omega_bar: f64,
    /// Number of loops (composite) or path segments (CDD).
    #[serde(default = "default_loops")]
    pub loops: usize,
    #[serde(default = "default_varsigma")]
    pub varsigma: f64,
    #[serde(default)]
    pub beta0: f64,
    /// Detuning angle of the single-shot scheme; derived from `gamma` when absent.
    #[serde(default)]
    pub gamma_ss: Option<f64>,
    /// Azimuth span of the tripod path; `2 pi - gamma` when absent.
    #[serde(default)]
    pub phi1: Option<f64>,
    #[serde(default = "default_dfs_phi")]
    pub dfs_phi: f64,
    #[serde(default)]
    pub chi_convention: ChiConvention,
    /// Total tripod run time; `pi` when absent.
    #[serde(default)]
    pub sta_tau: Option<f64>,
}

fn default_omega_bar() -> f64 {
    OMEGA_BAR_PHYSICAL
}
fn default_loops() -> usize {
    2
}
fn default_varsigma() -> f64 {
    1.0
}
fn default_dfs_phi() -> f64 {
    PI / 2.0
}

impl SchemeSpec {
    pub fn new(scheme: SchemeKind, angles: GateAngles) -> Self {
        SchemeSpec {
            scheme,
            angles,
            omega_bar: default_omega_bar(),
            loops: default_loops(),
            varsigma: default_varsigma(),
            beta0: 0.0,
            gamma_ss: None,
            phi1: None,
            dfs_phi: default_dfs_phi(),
            chi_convention: ChiConvention::Table,
            sta_tau: None,
        }
    }

    pub fn with_loops(mut self, loops: usize) -> Self {
        self.loops = loops;
        self
    }

    pub fn with_varsigma(mut self, varsigma: f64) -> Self {
        self.varsigma = varsigma;
        self
    }

    pub fn with_beta0(mut self, beta0: f64) -> Self {
        self.beta0 = beta0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.loops == 0 {
            return Err(NhqcError::InvalidParameter("loops N must be at least 1".into()));
        }
        if !(self.varsigma >= 0.0) {
            return Err(NhqcError::InvalidParameter("varsigma must be non-negative".into()));
        }
        if !(self.omega_bar > 0.0) {
            return Err(NhqcError::InvalidParameter("omega_bar must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::build_schedule;

    fn sl() -> PulseSchedule {
        build_schedule(&SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())).unwrap()
    }

    #[test]
    fn bright_dark_examples() {
        let (b, d) = bright_dark_amplitudes(0.0, 0.0);
        assert!((b[0]).norm() < 1e-15 && (b[1] + 1.0).norm() < 1e-15);
        assert!((d[0] - 1.0).norm() < 1e-15 && d[1].norm() < 1e-15);
        let (b, _) = bright_dark_amplitudes(PI / 2.0, 0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b[0] - r).norm() < 1e-15 && (b[1] + r).norm() < 1e-15);
    }

    #[test]
    fn bright_dark_orthonormal_on_a_grid() {
        for i in 0..12 {
            for j in 0..12 {
                let (th, ph) = (PI * i as f64 / 11.0, 2.0 * PI * j as f64 / 12.0);
                let (b, d) = bright_dark_amplitudes(th, ph);
                let overlap = b[0].conj() * d[0] + b[1].conj() * d[1];
                assert!(overlap.norm() < 1e-14);
                assert!((b[0].norm_sqr() + b[1].norm_sqr() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sl_first_half_hamiltonian() {
        let s = sl();
        let h = hamiltonian_at(&s, 0.3, &ErrorModel::ideal()).unwrap();
        // theta = 0: |b> = -|1>, phase 0
        let mut want = ComplexMatrix::zeros(3);
        want.set(1, 2, c(-1.0, 0.0));
        want.set(2, 1, c(-1.0, 0.0));
        assert!(h.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn detuning_error_adds_excited_energy() {
        let s = sl();
        for &t in &[0.1, 1.0, 2.9] {
            let h0 = hamiltonian_at(&s, t, &ErrorModel::ideal()).unwrap();
            let h1 = hamiltonian_at(&s, t, &ErrorModel::detuning(0.1)).unwrap();
            let mut want = h0.clone();
            want.add_at(2, 2, c(0.1, 0.0));
            assert!(h1.max_abs_diff(&want) < 1e-15);
        }
    }

    #[test]
    fn zero_envelope_gives_zero_matrix() {
        let seg = DriveSegment::lambda(
            1.0,
            Profile::Constant(0.0),
            Profile::Constant(0.4),
            Profile::Constant(0.0),
            [c(0.0, 0.0), c(1.0, 0.0)],
            (0.0, 0.0),
        );
        let h = seg.hamiltonian(&LevelSystem::lambda3(), 0.5, &ErrorModel::ideal());
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn error_injection_is_linear() {
        for kind in [SchemeKind::Sl, SchemeKind::S, SchemeKind::Ss, SchemeKind::Sta] {
            let s = build_schedule(&SchemeSpec::new(kind, GateAngles::s_gate())).unwrap();
            let total = s.total_duration();
            for k in 0..7 {
                let t = total * (k as f64 + 0.3) / 7.0;
                let h0 = hamiltonian_at(&s, t, &ErrorModel::ideal()).unwrap();
                let err = ErrorModel { epsilon: 0.07, eta: -0.03, ..Default::default() };
                let h = hamiltonian_at(&s, t, &err).unwrap();
                let mut want = &h0 + &drive_at(&s, t).unwrap().scale_real(0.07);
                let e = s.system.excited_index.unwrap();
                want.add_at(e, e, c(-0.03, 0.0));
                assert!(h.max_abs_diff(&want) < 1e-14, "{kind:?}");
            }
        }
    }

    #[test]
    fn dark_state_is_decoupled() {
        for kind in [SchemeKind::Sl, SchemeKind::Ps, SchemeKind::C, SchemeKind::Dc] {
            for angles in [GateAngles::s_gate(), GateAngles::new(1.3, 0.9, 2.2).unwrap()] {
                let s = build_schedule(&SchemeSpec::new(kind, angles)).unwrap();
                let (_, d) = bright_dark_basis(&angles);
                let dv = s.system.embed(&d);
                let total = s.total_duration();
                for k in 0..=40 {
                    let t = total * k as f64 / 40.0;
                    let h = hamiltonian_at(&s, t, &ErrorModel::ideal()).unwrap();
                    assert!(h.apply(&dv).norm() < 1e-12, "{kind:?} t={t}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_time_rejected() {
        let s = sl();
        assert!(matches!(
            hamiltonian_at(&s, -0.1, &ErrorModel::ideal()),
            Err(NhqcError::TimeOutOfRange { .. })
        ));
        assert!(hamiltonian_at(&s, s.total_duration() + 0.1, &ErrorModel::ideal()).is_err());
    }

    #[test]
    fn ramp_is_c1_and_hits_endpoints() {
        let (d, w) = (2.0, 0.05);
        assert!(ramp_fraction(0.0, d, w).abs() < 1e-15);
        assert!((ramp_fraction(d, d, w) - 1.0).abs() < 1e-15);
        assert!(ramp_rate(0.0, d, w).abs() < 1e-15 && ramp_rate(d, d, w).abs() < 1e-15);
        for k in 1..200 {
            let t = d * k as f64 / 200.0;
            let h = 1e-6;
            let num = (ramp_fraction(t + h, d, w) - ramp_fraction(t - h, d, w)) / (2.0 * h);
            assert!((num - ramp_rate(t, d, w)).abs() < 1e-6);
        }
        let p = Profile::Ramp { from: 0.0, to: PI, duration: d, shoulder: w };
        assert!((p.value(d / 2.0) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_angles_rejected() {
        assert!(GateAngles::new(0.0, 0.0, 0.0).is_err());
        assert!(GateAngles::new(1.0, 4.0, 0.0).is_err());
        assert!(GateAngles::new(1.0, 1.0, 7.0).is_err());
        assert!(ErrorModel::new(0.0, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn scheme_tags_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(SchemeKind::from_tag(k.tag()).unwrap(), k);
        }
        assert!(matches!(SchemeKind::from_tag("xyz"), Err(NhqcError::UnknownScheme(_))));
    }
}
