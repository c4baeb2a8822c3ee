//! Builders that turn a [`SchemeSpec`] into a concrete [`PulseSchedule`].
//!
//! Every builder returns the schedule together with its ideal target
//! `exp(-i gamma/2 n.sigma)`. Envelopes are normalised so that their time average equals
//! `Omega_bar`; schemes therefore differ in duration rather than peak amplitude.
//!
//! Phase convention: the coupling is written `Omega e^{-i phi0} |c><e| + h.c.`.

use crate::error::{NhqcError, Result};
use crate::numkit::{c, cis, quad_trapz_fn, ComplexMatrix, TimeGrid, C64};
use crate::system::{
    bright_dark_amplitudes, bright_dark_basis, ChiConvention, Coupling, DriveSegment, GateAngles, LevelSystem,
    Profile, PulseSchedule, SchemeKind, SchemeSpec,
};
use std::f64::consts::PI;

/// Which component of a composite drive a [`Profile`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathPart {
    Envelope,
    Phase,
    Detuning,
}

/// Minimal evolution time `2 sqrt(pi^2 - (pi - gamma)^2) / omega0` of the time-optimal gate.
pub fn brachistochrone_tau(gamma: f64, omega0: f64) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(NhqcError::InvalidParameter(format!("omega0 = {omega0} must be positive")));
    }
    if !(gamma > 0.0 && gamma < 2.0 * PI) {
        return Err(NhqcError::InvalidParameter(format!("gamma = {gamma} must lie in (0, 2pi)")));
    }
    let d = PI - gamma;
    Ok(2.0 * (PI * PI - d * d).sqrt() / omega0)
}

/// Circular path on the `(alpha, beta)` sphere used by the shortest-path scheme:
/// `beta = beta0 + pi sin^2(pi t / (2 tau))`, `alpha = 2 atan(ell sin(beta - beta0))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathParams {
    pub gamma: f64,
    pub beta0: f64,
    pub tau: f64,
    pub ell: f64,
}

/// Builds the circular path enclosing geometric phase `gamma`.
pub fn circle_path_params(gamma: f64, beta0: f64, tau: f64) -> Result<PathParams> {
    if !(gamma > 0.0 && gamma < PI) {
        return Err(NhqcError::InvalidParameter(format!(
            "path rotation angle {gamma} must lie in (0, pi); the circle parameter diverges at pi \
             (use more CDD segments or a different scheme for larger angles)"
        )));
    }
    if !(tau > 0.0) {
        return Err(NhqcError::InvalidParameter("tau must be positive".into()));
    }
    let ell = (2.0 * PI * gamma - gamma * gamma).sqrt() / (PI - gamma);
    Ok(PathParams { gamma, beta0, tau, ell })
}

impl PathParams {
    /// Pulse area `int Omega_S dt` of the path; independent of `tau`.
    pub fn arc_area(gamma: f64) -> f64 {
        let d = PI - gamma;
        (PI * PI - d * d).sqrt()
    }

    fn u(&self, t: f64) -> f64 {
        PI * (PI * t / (2.0 * self.tau)).sin().powi(2)
    }

    fn u_dot(&self, t: f64) -> f64 {
        PI * PI / (2.0 * self.tau) * (PI * t / self.tau).sin()
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta0 + self.u(t)
    }

    pub fn beta_dot(&self, t: f64) -> f64 {
        self.u_dot(t)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        2.0 * (self.ell * self.u(t).sin()).atan()
    }

    pub fn alpha_dot(&self, t: f64) -> f64 {
        let u = self.u(t);
        let x = self.ell * u.sin();
        2.0 * self.ell * u.cos() * self.u_dot(t) / (1.0 + x * x)
    }

    /// `chi = atan2(alpha_dot, beta_dot sin alpha)`; at the isolated 0/0 endpoints the
    /// one-sided limits `+pi/2` (start) and `-pi/2` (end) are used.
    pub fn chi(&self, t: f64) -> f64 {
        let ad = self.alpha_dot(t);
        let bs = self.beta_dot(t) * self.alpha(t).sin();
        if ad.abs() + bs.abs() < 1e-300 {
            if self.u(t).cos() >= 0.0 {
                PI / 2.0
            } else {
                -PI / 2.0
            }
        } else {
            ad.atan2(bs)
        }
    }

    pub fn zeta_dot(&self, t: f64) -> f64 {
        self.beta_dot(t) * (3.0 + self.alpha(t).cos()) / 2.0
    }

    pub fn envelope(&self, t: f64) -> f64 {
        0.5 * (self.beta_dot(t) * self.alpha(t).sin()).hypot(self.alpha_dot(t))
    }

    pub fn detuning(&self, t: f64) -> f64 {
        -self.beta_dot(t) * (1.0 + self.alpha(t).cos())
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.beta(t) + self.chi(t)
    }

    pub fn component(&self, part: PathPart, t: f64) -> f64 {
        match part {
            PathPart::Envelope => self.envelope(t),
            PathPart::Phase => self.phase(t),
            PathPart::Detuning => self.detuning(t),
        }
    }

    /// `int_0^t beta_dot sin^2(alpha/2) dt` in closed form; equals `gamma` at `t = tau`.
    pub fn enclosed_phase(&self, t: f64) -> f64 {
        let u = self.u(t);
        let k = (1.0 + self.ell * self.ell).sqrt();
        u - (k * u.sin()).atan2(u.cos()) / k
    }

    /// `1/2 int beta_dot (1 - cos alpha) dt` over the full path by the trapezoid rule.
    pub fn geometric_phase_quadrature(&self, steps: usize) -> Result<f64> {
        let grid = TimeGrid::new(0.0, self.tau, steps)?;
        quad_trapz_fn(|t| 0.5 * self.beta_dot(t) * (1.0 - self.alpha(t).cos()), &grid)
    }
}

/// Pulse-shaped half loop. Time enters through the normalised coordinate
/// `s in [0, 1]` of one half loop, where `chi = pi sin^2(pi s / 2)`,
/// `f = varsigma (2 chi - sin 2 chi)` and `varphi = -pi/2 - (4 varsigma / 3) sin^3 chi`,
/// which solves `varphi_dot = -f_dot cos chi` with `varphi(0) = -pi/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsDesign {
    pub varsigma: f64,
    /// Design time as written in the chosen convention.
    pub tau: f64,
    pub convention: ChiConvention,
}

/// Pulse-shaping design for a half loop of the given convention and time scale.
pub fn ps_design(varsigma: f64, tau: f64, _angles: &GateAngles) -> Result<PsDesign> {
    PsDesign::new(varsigma, tau, ChiConvention::Table)
}

impl PsDesign {
    pub fn new(varsigma: f64, tau: f64, convention: ChiConvention) -> Result<Self> {
        if !(varsigma >= 0.0) {
            return Err(NhqcError::InvalidParameter("varsigma must be non-negative".into()));
        }
        if !(tau > 0.0) {
            return Err(NhqcError::InvalidParameter("tau must be positive".into()));
        }
        Ok(PsDesign { varsigma, tau, convention })
    }

    /// Design whose envelope has unit time average.
    pub fn normalized(varsigma: f64, convention: ChiConvention) -> Result<Self> {
        let half = Self::half_area(varsigma)?;
        let tau = match convention {
            ChiConvention::Table => half,
            ChiConvention::Text => 2.0 * half,
        };
        Self::new(varsigma, tau, convention)
    }

    /// Pulse area of one half loop: `1/2 int_0^pi sqrt(1 + 16 varsigma^2 sin^6 chi) dchi`.
    pub fn half_area(varsigma: f64) -> Result<f64> {
        let grid = TimeGrid::new(0.0, PI, 4096)?;
        let v = quad_trapz_fn(|x| 0.5 * (1.0 + 16.0 * varsigma * varsigma * x.sin().powi(6)).sqrt(), &grid)?;
        Ok(v)
    }

    /// Duration of one half loop.
    pub fn half_duration(&self) -> f64 {
        match self.convention {
            ChiConvention::Table => self.tau,
            ChiConvention::Text => self.tau / 2.0,
        }
    }

    /// `chi(t)` as literally written in the selected convention.
    pub fn chi(&self, t: f64) -> f64 {
        match self.convention {
            ChiConvention::Table => PI * (PI * t / (2.0 * self.tau)).sin().powi(2),
            ChiConvention::Text => PI * (PI * t / self.tau).sin().powi(2),
        }
    }

    pub fn chi_dot(&self, t: f64) -> f64 {
        match self.convention {
            ChiConvention::Table => PI * PI / (2.0 * self.tau) * (PI * t / self.tau).sin(),
            ChiConvention::Text => PI * PI / self.tau * (2.0 * PI * t / self.tau).sin(),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        let chi = self.chi(t);
        self.varsigma * (2.0 * chi - (2.0 * chi).sin())
    }

    pub fn f_dot(&self, t: f64) -> f64 {
        4.0 * self.varsigma * self.chi(t).sin().powi(2) * self.chi_dot(t)
    }

    pub fn varphi(&self, t: f64) -> f64 {
        -PI / 2.0 - 4.0 * self.varsigma / 3.0 * self.chi(t).sin().powi(3)
    }

    pub fn omega_r(&self, t: f64) -> f64 {
        let (chi, vp) = (self.chi(t), self.varphi(t));
        vp.cos() * chi.sin() * self.f_dot(t) - vp.sin() * self.chi_dot(t)
    }

    pub fn omega_i(&self, t: f64) -> f64 {
        let (chi, vp) = (self.chi(t), self.varphi(t));
        vp.sin() * chi.sin() * self.f_dot(t) + vp.cos() * self.chi_dot(t)
    }

    pub fn envelope(&self, t: f64) -> f64 {
        0.5 * self.omega_r(t).hypot(self.omega_i(t))
    }

    /// `phi0 = -atan2(Omega_I, Omega_R)` in the `e^{-i phi0}` convention; where both
    /// components vanish the limiting direction `(-sin varphi, cos varphi)` is used.
    pub fn phase(&self, t: f64) -> f64 {
        let (r, i) = (self.omega_r(t), self.omega_i(t));
        if r.abs() + i.abs() < 1e-300 {
            let vp = self.varphi(t);
            -(vp.cos()).atan2(-vp.sin())
        } else {
            -i.atan2(r)
        }
    }

    pub fn component(&self, part: PathPart, t: f64) -> f64 {
        match part {
            PathPart::Envelope => self.envelope(t),
            PathPart::Phase => self.phase(t),
            PathPart::Detuning => 0.0,
        }
    }

    /// Closed-form amplitudes `(x, y)` on `(|c>, |e>)` of the state evolved from `|c>`:
    /// `x = cos(chi/2) e^{iA}`, `y = sin(chi/2) e^{i(A - varphi - pi)}`, `A = (f + varphi + pi/2) / 2`.
    pub fn trajectory(&self, t: f64) -> (C64, C64) {
        let chi = self.chi(t);
        let vp = self.varphi(t);
        let a = 0.5 * (self.f(t) + vp + PI / 2.0);
        (cis(a) * (chi / 2.0).cos(), cis(a - vp - PI) * (chi / 2.0).sin())
    }
}

/// Coupling constants of the three-qubit exchange Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct DfsCouplings {
    pub phi: f64,
    pub j: Profile,
    pub duration: f64,
}

impl DfsCouplings {
    pub fn j12x(&self) -> f64 {
        (self.phi / 2.0).cos()
    }
    pub fn j13x(&self) -> f64 {
        -(self.phi / 2.0).cos()
    }
    pub fn j12y(&self) -> f64 {
        -(self.phi / 2.0).sin()
    }
    pub fn j13y(&self) -> f64 {
        -(self.phi / 2.0).sin()
    }

    pub fn area(&self) -> f64 {
        self.j.integral(self.duration)
    }
}

fn qubit_op(single: &ComplexMatrix, qubit: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let ops: Vec<&ComplexMatrix> = (0..3).map(|k| if k == qubit { single } else { &id }).collect();
    ops[0].kron(ops[1]).kron(ops[2])
}

/// `H_df / J = 1/2 sum_(1,k) [Jx (XX + YY) + Jy (XY - YX)]` for `k = 2, 3` on the 8-dim register.
pub fn dfs_generator(phi: f64) -> ComplexMatrix {
    use crate::numkit::pauli::{sigma_x, sigma_y};
    let cpl = DfsCouplings { phi, j: Profile::Constant(1.0), duration: 1.0 };
    let (x, y) = (sigma_x(), sigma_y());
    let mut h = ComplexMatrix::zeros(8);
    for (k, jx, jy) in [(1usize, cpl.j12x(), cpl.j12y()), (2usize, cpl.j13x(), cpl.j13y())] {
        let xx = &qubit_op(&x, 0) * &qubit_op(&x, k);
        let yy = &qubit_op(&y, 0) * &qubit_op(&y, k);
        let xy = &qubit_op(&x, 0) * &qubit_op(&y, k);
        let yx = &qubit_op(&y, 0) * &qubit_op(&x, k);
        h += &(&xx + &yy).scale_real(0.5 * jx);
        h += &(&xy - &yx).scale_real(0.5 * jy);
    }
    h
}

/// Required area of `J(t)` for a cyclic exchange loop.
pub const DFS_AREA: f64 = PI * std::f64::consts::FRAC_1_SQRT_2;

/// Default `J(t) = sqrt(2) sin^2(t)` over `[0, pi]`, of area `pi / sqrt(2)`.
pub fn default_dfs_pulse() -> (Profile, f64) {
    (Profile::Sin2 { amplitude: 2.0 * DFS_AREA / PI, duration: PI }, PI)
}

/// Three-qubit exchange schedule; `pulse_shape` must have area `pi / sqrt(2)` over `duration`.
pub fn dfs3_schedule(phi: f64, pulse_shape: Profile, duration: f64) -> Result<PulseSchedule> {
    let cpl = DfsCouplings { phi, j: pulse_shape.clone(), duration };
    let area = cpl.area();
    if !((area - DFS_AREA).abs() <= 1e-6) {
        return Err(NhqcError::InvalidParameter(format!(
            "exchange pulse area {area:.9} differs from pi/sqrt(2) = {DFS_AREA:.9} by more than 1e-6"
        )));
    }
    let system = LevelSystem::three_qubit8();
    let generator = dfs_generator(phi);
    let target = dfs_target(&generator, &system)?;
    let seg = DriveSegment {
        duration,
        envelope: pulse_shape,
        phase: Profile::Constant(0.0),
        detuning: Profile::Constant(0.0),
        bright_axis: (PI / 2.0, phi),
        coupling: Coupling::Exchange { phi, generator },
    };
    PulseSchedule::new(system, vec![seg], target, SchemeKind::Dfs3.label())
}

/// Logical bright state `|B> ~ sum_k <anc|H|k>^* |k>`, in computational coordinates.
pub fn dfs_bright_state(generator: &ComplexMatrix, system: &LevelSystem) -> Result<[C64; 2]> {
    let anc = system.auxiliary_index;
    let g: Vec<C64> = system.computational_indices.iter().map(|&k| generator.get(anc, k)).collect();
    let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(NhqcError::InvalidParameter("exchange couples no logical state".into()));
    }
    Ok([g[0].conj() / norm, g[1].conj() / norm])
}

/// `I - 2 |B><B|` on the logical pair.
fn dfs_target(generator: &ComplexMatrix, system: &LevelSystem) -> Result<ComplexMatrix> {
    let b = dfs_bright_state(generator, system)?;
    Ok(ComplexMatrix::from_fn(2, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        c(id, 0.0) - b[i] * b[j].conj() * 2.0
    }))
}

/// Three-step "orange slice" path of the tripod dark state
/// `D = cos(theta/2)|1> + sin(theta/2) e^{i phi}|2>`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaPath {
    pub phi1: f64,
    pub tau: f64,
    /// Width of the sin^2 shoulders as a fraction of each step.
    pub shoulder: f64,
}

impl StaPath {
    pub fn step_duration(&self) -> f64 {
        self.tau / 3.0
    }

    /// `(theta, phi)` profiles of the three steps in step-local time.
    pub fn steps(&self) -> [(Profile, Profile); 3] {
        let d = self.step_duration();
        let w = self.shoulder;
        [
            (Profile::Ramp { from: 0.0, to: PI, duration: d, shoulder: w }, Profile::Constant(0.0)),
            (Profile::Constant(PI), Profile::Ramp { from: 0.0, to: self.phi1, duration: d, shoulder: w }),
            (Profile::Ramp { from: PI, to: 0.0, duration: d, shoulder: w }, Profile::Constant(self.phi1)),
        ]
    }

    /// Expected phase `gamma1 = -phi1` acquired by `|1>` along the path.
    pub fn expected_phase(&self) -> f64 {
        -self.phi1
    }
}

/// Tripod phase gate `diag(1, e^{-i phi1})` on `{|0>, |1>}` via transitionless driving.
pub fn sta_schedule(phi1: f64, tau: f64) -> Result<PulseSchedule> {
    if !(0.0..2.0 * PI).contains(&phi1) {
        return Err(NhqcError::InvalidParameter(format!("phi1 = {phi1} must lie in [0, 2pi)")));
    }
    if !(tau > 0.0) {
        return Err(NhqcError::InvalidParameter("tau must be positive".into()));
    }
    let path = StaPath { phi1, tau, shoulder: 0.05 };
    let segments = path
        .steps()
        .into_iter()
        .map(|(theta, phi)| DriveSegment {
            duration: path.step_duration(),
            envelope: Profile::Constant(1.0),
            phase: Profile::Constant(0.0),
            detuning: Profile::Constant(0.0),
            bright_axis: (0.0, 0.0),
            coupling: Coupling::Tripod { theta, phi },
        })
        .collect();
    let target = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), cis(-phi1)]);
    PulseSchedule::new(LevelSystem::tripod4(), segments, target, SchemeKind::Sta.label())
}

fn constant_segment(duration: f64, phase: f64, coupled: [C64; 2], axis: (f64, f64)) -> DriveSegment {
    DriveSegment::lambda(
        duration,
        Profile::Constant(1.0),
        Profile::Constant(phase),
        Profile::Constant(0.0),
        coupled,
        axis,
    )
}

/// Two resonant pi pulses on the bright state with phases `0` and `pi - gamma`.
fn sl_segments(angles: &GateAngles) -> Vec<DriveSegment> {
    let (b, _) = bright_dark_basis(angles);
    let axis = (angles.theta, angles.phi);
    vec![
        constant_segment(PI / 2.0, 0.0, b, axis),
        constant_segment(PI / 2.0, PI - angles.gamma, b, axis),
    ]
}

fn dc_segments(angles: &GateAngles) -> Vec<DriveSegment> {
    let (b, _) = bright_dark_basis(angles);
    let axis = (angles.theta, angles.phi);
    let g = angles.gamma;
    [
        (PI / 4.0, 0.0),
        (PI / 2.0, PI / 2.0),
        (PI / 4.0, 0.0),
        (PI / 4.0, PI - g),
        (PI / 2.0, -g - PI / 2.0),
        (PI / 4.0, PI - g),
    ]
    .into_iter()
    .map(|(d, p)| constant_segment(d, p, b, axis))
    .collect()
}

fn ss_segments(angles: &GateAngles, gamma_s: f64) -> Vec<DriveSegment> {
    let (b, _) = bright_dark_basis(angles);
    let omega_ss = 1.0 / gamma_s.cos();
    vec![DriveSegment::lambda(
        PI / omega_ss,
        Profile::Constant(omega_ss * gamma_s.cos()),
        Profile::Constant(0.0),
        Profile::Constant(-2.0 * omega_ss * gamma_s.sin()),
        b,
        (angles.theta, angles.phi),
    )]
}

fn ps_segments(angles: &GateAngles, varsigma: f64, convention: ChiConvention) -> Result<Vec<DriveSegment>> {
    let design = PsDesign::normalized(varsigma, convention)?;
    let (b, _) = bright_dark_basis(angles);
    let axis = (angles.theta, angles.phi);
    let half = design.half_duration();
    let seg = |offset: f64| DriveSegment::lambda(
        half,
        Profile::Shaped { shape: design.clone(), part: PathPart::Envelope, phase_offset: 0.0 },
        Profile::Shaped { shape: design.clone(), part: PathPart::Phase, phase_offset: offset },
        Profile::Constant(0.0),
        b,
        axis,
    );
    Ok(vec![seg(0.0), seg(PI - angles.gamma)])
}

fn to_segments(angles: &GateAngles) -> Result<Vec<DriveSegment>> {
    let (b, _) = bright_dark_basis(angles);
    // coupling amplitude Omega_0 / 2 = Omega_bar
    let tau = brachistochrone_tau(angles.gamma, 2.0)?;
    Ok(vec![DriveSegment::lambda(
        tau,
        Profile::Constant(1.0),
        Profile::Linear { offset: 0.0, slope: 2.0 * (PI - angles.gamma) / tau },
        Profile::Constant(0.0),
        b,
        (angles.theta, angles.phi),
    )])
}

fn path_segment(path: PathParams, coupled: [C64; 2], axis: (f64, f64)) -> DriveSegment {
    DriveSegment::lambda(
        path.tau,
        Profile::Circle { path: path.clone(), part: PathPart::Envelope },
        Profile::Circle { path: path.clone(), part: PathPart::Phase },
        Profile::Circle { path, part: PathPart::Detuning },
        coupled,
        axis,
    )
}

/// Single-segment schedule driving `|n+> <-> |e>` along `path`. The coupled state is the
/// `+1` eigenvector of `n.sigma`, which picks up `e^{-i gamma}`.
pub fn inverse_engineer_hamiltonian(path: &PathParams, angles: &GateAngles) -> Result<PulseSchedule> {
    let (_, n_plus) = bright_dark_amplitudes(angles.theta, angles.phi);
    let target = GateAngles { gamma: path.gamma, ..*angles }.target();
    let seg = path_segment(path.clone(), n_plus, (angles.theta, angles.phi));
    PulseSchedule::new(LevelSystem::lambda3(), vec![seg], target, SchemeKind::S.label())
}

fn cdd_segments(angles: &GateAngles, loops: usize, beta0: f64) -> Result<Vec<DriveSegment>> {
    let gamma_n = angles.gamma / loops as f64;
    let tau = PathParams::arc_area(gamma_n);
    let (_, n_plus) = bright_dark_amplitudes(angles.theta, angles.phi);
    (0..loops)
        .map(|k| {
            let b0 = beta0 + if k % 2 == 1 { PI } else { 0.0 };
            let path = circle_path_params(gamma_n, b0, tau)?;
            Ok(path_segment(path, n_plus, (angles.theta, angles.phi)))
        })
        .collect()
}

/// Zero-envelope lambda schedule of the given duration; its target is the identity.
pub fn idle_schedule(duration: f64) -> Result<PulseSchedule> {
    let (b, _) = bright_dark_amplitudes(0.0, 0.0);
    let seg = DriveSegment::lambda(
        duration,
        Profile::Constant(0.0),
        Profile::Constant(0.0),
        Profile::Constant(0.0),
        b,
        (0.0, 0.0),
    );
    PulseSchedule::new(LevelSystem::lambda3(), vec![seg], ComplexMatrix::identity(2), "idle")
}

/// Detuning angle of the single-shot scheme: `sin gamma_s = gamma/pi - 1`.
pub fn single_shot_angle(gamma: f64) -> f64 {
    (gamma / PI - 1.0).asin()
}

/// Dispatches on the scheme tag and returns the schedule with its ideal target.
pub fn build_schedule(spec: &SchemeSpec) -> Result<PulseSchedule> {
    spec.validate()?;
    let a = spec.angles;
    GateAngles::new(a.gamma, a.theta, a.phi)?;
    let lambda = LevelSystem::lambda3();
    let label = spec.scheme.label();
    match spec.scheme {
        SchemeKind::Sl => PulseSchedule::new(lambda, sl_segments(&a), a.target(), label),
        SchemeKind::C => {
            let sub = GateAngles { gamma: a.gamma / spec.loops as f64, ..a };
            let segs = (0..spec.loops).flat_map(|_| sl_segments(&sub)).collect();
            PulseSchedule::new(lambda, segs, a.target(), label)
        }
        SchemeKind::Dc => PulseSchedule::new(lambda, dc_segments(&a), a.target(), label),
        SchemeKind::Ss => {
            let gamma_s = spec.gamma_ss.unwrap_or_else(|| single_shot_angle(a.gamma));
            if !(gamma_s.cos() > 1e-9) {
                return Err(NhqcError::InvalidParameter(format!(
                    "single-shot angle {gamma_s} must satisfy cos > 0"
                )));
            }
            let realised = PI + PI * gamma_s.sin();
            let target = GateAngles { gamma: realised, ..a }.target();
            PulseSchedule::new(lambda, ss_segments(&a, gamma_s), target, label)
        }
        SchemeKind::Ps => PulseSchedule::new(lambda, ps_segments(&a, spec.varsigma, spec.chi_convention)?, a.target(), label),
        SchemeKind::To => PulseSchedule::new(lambda, to_segments(&a)?, a.target(), label),
        SchemeKind::S => {
            let path = circle_path_params(a.gamma, spec.beta0, PathParams::arc_area(a.gamma))?;
            inverse_engineer_hamiltonian(&path, &a)
        }
        SchemeKind::Cdd => PulseSchedule::new(lambda, cdd_segments(&a, spec.loops, spec.beta0)?, a.target(), label),
        SchemeKind::Sta => {
            if a.theta != 0.0 {
                return Err(NhqcError::InvalidParameter(
                    "the tripod scheme realises phase gates only (theta = 0)".into(),
                ));
            }
            let phi1 = spec.phi1.unwrap_or(2.0 * PI - a.gamma);
            sta_schedule(phi1, spec.sta_tau.unwrap_or(PI))
        }
        SchemeKind::Dfs3 => {
            let (shape, duration) = default_dfs_pulse();
            dfs3_schedule(spec.dfs_phi, shape, duration)
        }
    }
}
