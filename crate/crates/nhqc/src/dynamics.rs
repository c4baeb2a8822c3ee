//! Closed- and open-system propagation of a [`PulseSchedule`].
//!
//! Both engines integrate segment by segment with RK4 so that the discontinuities of
//! piecewise controls always fall on grid nodes. Independent oracles built on the
//! fourth-order Magnus product are provided for cross-validation.

use crate::error::{NhqcError, Result};
use crate::numkit::{
    c, expm_hermitian, min_eigenvalue_hermitian, oracle_generator, oracle_unitary, rk4_propagate_observed,
    ComplexMatrix, StateVector, TimeGrid, C64, I,
};
use crate::system::{Coupling, ErrorModel, LevelSystem, Profile, PulseSchedule};

pub const DEFAULT_UNITARY_SAMPLES: usize = 2000;
pub const DEFAULT_LINDBLAD_SAMPLES: usize = 4000;
/// Lower bound on RK4 steps inside any single segment.
pub const MIN_STEPS_PER_SEGMENT: usize = 64;
/// Slices used by the oracle propagators.
pub const ORACLE_SLICES: usize = 100_000;

pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = -1e-9;
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;

/// Sample count from `NHQC_SAMPLES` when set to a positive integer, else `default`.
pub fn samples_from_env(default: usize) -> usize {
    std::env::var("NHQC_SAMPLES")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(default)
}

/// Time series of propagators (unitary runs) or density matrices (open runs).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub operators: Vec<ComplexMatrix>,
    /// For unitary runs: the largest excited-level population reachable from the
    /// computational subspace, `sum_k |U_{e,k}|^2`. For open runs: `<e|rho|e>`.
    pub excited_population: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_operator(&self) -> &ComplexMatrix {
        self.operators.last().expect("trajectory has at least one sample")
    }

    /// `|<e| U(t) |psi0>|^2` along a unitary trajectory.
    pub fn excited_population_from(&self, system: &LevelSystem, psi0: &StateVector) -> Vec<f64> {
        let e = leak_level(system);
        self.operators.iter().map(|u| u.apply(psi0)[e].norm_sqr()).collect()
    }

    /// `U(t) |psi0>` at every sample.
    pub fn states_from(&self, psi0: &StateVector) -> Vec<StateVector> {
        self.operators.iter().map(|u| u.apply(psi0)).collect()
    }
}

/// Level whose population signals departure from the computational subspace.
pub fn leak_level(system: &LevelSystem) -> usize {
    system.excited_index.unwrap_or(system.auxiliary_index)
}

fn check_closed(err: &ErrorModel) -> Result<()> {
    err.validate()?;
    if !err.is_closed() {
        return Err(NhqcError::InvalidParameter(
            "unitary propagation requires gamma_minus = gamma_z = 0".into(),
        ));
    }
    Ok(())
}

/// Walks the segments of `schedule`, integrating `y` with RK4 and recording every node.
fn integrate_segments<D, O>(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    samples: usize,
    y0: &ComplexMatrix,
    deriv: D,
    mut record: O,
) -> Result<ComplexMatrix>
where
    D: Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    O: FnMut(usize, f64, &ComplexMatrix) -> Result<()>,
{
    if samples == 0 {
        return Err(NhqcError::InvalidParameter("samples must be positive".into()));
    }
    let steps = schedule.steps_per_segment(samples, MIN_STEPS_PER_SEGMENT);
    let mut y = y0.clone();
    let mut offset = 0.0;
    let mut global_step = 0usize;
    for (k, seg) in schedule.segments.iter().enumerate() {
        seg.hamiltonian(&schedule.system, 0.0, err).ensure_hermitian()?;
        let grid = TimeGrid::new(0.0, seg.duration, steps[k])?;
        let system = &schedule.system;
        let base = global_step;
        y = rk4_propagate_observed(
            |t, m| deriv(&seg.hamiltonian(system, t, err), m),
            &y,
            &grid,
            |j, t, m| {
                if j == 0 && k > 0 {
                    return Ok(());
                }
                record(base + j, offset + t, m)
            },
        )
        .map_err(|e| match e {
            NhqcError::NonFinite { step, t } => NhqcError::NonFinite { step: base + step, t: offset + t },
            other => other,
        })?;
        global_step += steps[k];
        offset += seg.duration;
    }
    Ok(y)
}

/// `U(t)` over the whole schedule by RK4 on `dU/dt = -i H(t) U`.
pub fn propagate_unitary(schedule: &PulseSchedule, err: &ErrorModel, samples: usize) -> Result<Trajectory> {
    check_closed(err)?;
    let e = leak_level(&schedule.system);
    let comp = schedule.system.computational_indices.clone();
    let mut traj = Trajectory { times: vec![], operators: vec![], excited_population: vec![] };
    integrate_segments(
        schedule,
        err,
        samples,
        &ComplexMatrix::identity(schedule.system.dim),
        |h, u| (h * u).scale(-I),
        |_, t, u| {
            traj.times.push(t);
            traj.excited_population.push(comp.iter().map(|&k| u.get(e, k).norm_sqr()).sum());
            traj.operators.push(u.clone());
            Ok(())
        },
    )?;
    Ok(traj)
}

/// Final propagator only; avoids storing the trajectory.
pub fn final_unitary(schedule: &PulseSchedule, err: &ErrorModel, samples: usize) -> Result<ComplexMatrix> {
    check_closed(err)?;
    integrate_segments(
        schedule,
        err,
        samples,
        &ComplexMatrix::identity(schedule.system.dim),
        |h, u| (h * u).scale(-I),
        |_, _, _| Ok(()),
    )
}

/// Jump operators `sqrt(Gamma_j) A_j` paired with `A_j^dagger A_j`.
#[derive(Clone, Debug)]
struct Dissipator {
    channels: Vec<(f64, ComplexMatrix, ComplexMatrix, ComplexMatrix)>,
}

/// `sigma_- = sum_k |k><e|` and `sigma_z = |e><e| - sum_k |k><k|` over the computational levels.
pub fn jump_operators(system: &LevelSystem) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let e = system.excited_index?;
    let mut lower = ComplexMatrix::zeros(system.dim);
    let mut sz = ComplexMatrix::zeros(system.dim);
    sz.set(e, e, c(1.0, 0.0));
    for &k in &system.computational_indices {
        lower.set(k, e, c(1.0, 0.0));
        sz.set(k, k, c(-1.0, 0.0));
    }
    Some((lower, sz))
}

impl Dissipator {
    fn new(system: &LevelSystem, err: &ErrorModel) -> Result<Self> {
        let mut channels = vec![];
        if err.is_closed() {
            return Ok(Dissipator { channels });
        }
        let (lower, sz) = jump_operators(system).ok_or_else(|| {
            NhqcError::InvalidParameter("decoherence channels need a system with an excited level".into())
        })?;
        for (rate, a) in [(err.gamma_minus, lower), (err.gamma_z, sz)] {
            if rate > 0.0 {
                let ad = a.dagger();
                let ada = &ad * &a;
                channels.push((rate, a, ad, ada));
            }
        }
        Ok(Dissipator { channels })
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.dim());
        for (rate, a, ad, ada) in &self.channels {
            let jump = (&(a * rho) * ad).scale_real(2.0);
            let anti = &(ada * rho) + &(rho * ada);
            out += &(&jump - &anti).scale_real(0.5 * rate);
        }
        out
    }
}

/// Validates a density matrix: square of the system dimension, Hermitian, unit trace,
/// and no eigenvalue below the positivity tolerance.
pub fn validate_density(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(NhqcError::DimensionMismatch { expected: dim, got: rho.dim() });
    }
    if !rho.is_finite() {
        return Err(NhqcError::InvalidDensity("non-finite entries".into()));
    }
    let herm = rho.hermitian_defect();
    if herm > DENSITY_HERMITIAN_TOL {
        return Err(NhqcError::InvalidDensity(format!("not Hermitian (defect {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(NhqcError::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let min = min_eigenvalue_hermitian(&rho.hermitian_part());
    if min < POSITIVITY_TOL {
        return Err(NhqcError::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `rho(t)` by RK4 on `drho/dt = -i[H, rho] + 1/2 sum_j Gamma_j L(A_j) rho`.
///
/// Trace, Hermiticity and positivity are checked at every node; a violation aborts the run.
pub fn propagate_lindblad(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    rho0: &ComplexMatrix,
    samples: usize,
) -> Result<Trajectory> {
    let mut traj = Trajectory { times: vec![], operators: vec![], excited_population: vec![] };
    run_lindblad(schedule, err, rho0, samples, |t, rho, e| {
        traj.times.push(t);
        traj.excited_population.push(rho.get(e, e).re);
        traj.operators.push(rho.clone());
    })?;
    Ok(traj)
}

/// Final density matrix together with the peak excited population along the run.
pub fn final_density(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    rho0: &ComplexMatrix,
    samples: usize,
) -> Result<(ComplexMatrix, f64)> {
    let mut peak = 0.0f64;
    let rho = run_lindblad(schedule, err, rho0, samples, |_, rho, e| {
        peak = peak.max(rho.get(e, e).re);
    })?;
    Ok((rho, peak))
}

fn run_lindblad<O>(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    rho0: &ComplexMatrix,
    samples: usize,
    mut observe: O,
) -> Result<ComplexMatrix>
where
    O: FnMut(f64, &ComplexMatrix, usize),
{
    err.validate()?;
    validate_density(rho0, schedule.system.dim)?;
    let dissipator = Dissipator::new(&schedule.system, err)?;
    let e = leak_level(&schedule.system);
    integrate_segments(
        schedule,
        err,
        samples,
        rho0,
        |h, rho| {
            let mut d = h.commutator(rho).scale(-I);
            if !dissipator.channels.is_empty() {
                d += &dissipator.apply(rho);
            }
            d
        },
        |step, t, rho| {
            check_density_invariants(rho, step)?;
            observe(t, rho, e);
            Ok(())
        },
    )
}

fn check_density_invariants(rho: &ComplexMatrix, step: usize) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(NhqcError::InvalidDensity(format!("trace {tr} drifted at step {step}")));
    }
    let herm = rho.hermitian_defect();
    if herm > DENSITY_HERMITIAN_TOL {
        return Err(NhqcError::InvalidDensity(format!("Hermiticity defect {herm:.3e} at step {step}")));
    }
    let min = min_eigenvalue_hermitian(&rho.hermitian_part());
    if min < POSITIVITY_TOL {
        return Err(NhqcError::PositivityViolation { step, min_eigenvalue: min });
    }
    Ok(())
}

fn oracle_slices(schedule: &PulseSchedule, slices: usize) -> Vec<usize> {
    schedule.steps_per_segment(slices, 16)
}

/// Independent propagator: Magnus-4 exponential product with `slices` slices in total.
pub fn oracle_propagator(schedule: &PulseSchedule, err: &ErrorModel, slices: usize) -> Result<ComplexMatrix> {
    check_closed(err)?;
    let per = oracle_slices(schedule, slices);
    let mut u = ComplexMatrix::identity(schedule.system.dim);
    for (seg, n) in schedule.segments.iter().zip(per) {
        let step = if seg.is_time_independent() {
            expm_hermitian(&seg.hamiltonian(&schedule.system, 0.0, err), seg.duration)?
        } else {
            oracle_unitary(|t| seg.hamiltonian(&schedule.system, t, err), 0.0, seg.duration, n)?
        };
        u = &step * &u;
    }
    Ok(u)
}

/// Column-stacking superoperator of the Lindblad generator at a fixed Hamiltonian.
pub fn liouvillian(h: &ComplexMatrix, system: &LevelSystem, err: &ErrorModel) -> Result<ComplexMatrix> {
    let d = h.dim();
    let id = ComplexMatrix::identity(d);
    let transpose = |m: &ComplexMatrix| ComplexMatrix::from_fn(d, |i, j| m.get(j, i));
    let conj = |m: &ComplexMatrix| ComplexMatrix::from_fn(d, |i, j| m.get(i, j).conj());
    let mut l = (&id.kron(h) - &transpose(h).kron(&id)).scale(-I);
    if !err.is_closed() {
        let (lower, sz) = jump_operators(system).ok_or_else(|| {
            NhqcError::InvalidParameter("decoherence channels need a system with an excited level".into())
        })?;
        for (rate, a) in [(err.gamma_minus, lower), (err.gamma_z, sz)] {
            if rate == 0.0 {
                continue;
            }
            let ada = &a.dagger() * &a;
            let term = &(&conj(&a).kron(&a).scale_real(2.0) - &id.kron(&ada)) - &transpose(&ada).kron(&id);
            l += &term.scale_real(0.5 * rate);
        }
    }
    Ok(l)
}

fn vectorize(rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.dim();
    let mut v = ComplexMatrix::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v.set(j * d + i, 0, rho.get(i, j));
        }
    }
    v
}

fn unvectorize(v: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |i, j| v.get(j * d + i, 0))
}

/// Propagator superoperator of the Lindblad equation over the whole schedule, acting on
/// column-stacked density matrices; Magnus-4 product of Liouvillian exponentials.
pub fn oracle_lindblad_superoperator(schedule: &PulseSchedule, err: &ErrorModel, slices: usize) -> Result<ComplexMatrix> {
    err.validate()?;
    let d = schedule.system.dim;
    let per = oracle_slices(schedule, slices);
    let mut total = ComplexMatrix::identity(d * d);
    for (seg, n) in schedule.segments.iter().zip(per) {
        let gen = |t: f64| liouvillian(&seg.hamiltonian(&schedule.system, t, err), &schedule.system, err);
        gen(0.0)?;
        let prop = oracle_generator(|t| gen(t).expect("validated above"), 0.0, seg.duration, n)?;
        total = &prop * &total;
    }
    Ok(total)
}

/// Applies a column-stacking superoperator to a density matrix.
pub fn apply_superoperator(superop: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    unvectorize(&(superop * &vectorize(rho)), rho.dim())
}

/// Independent open-system oracle for a single initial state.
pub fn oracle_lindblad(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    rho0: &ComplexMatrix,
    slices: usize,
) -> Result<ComplexMatrix> {
    validate_density(rho0, schedule.system.dim)?;
    let superop = oracle_lindblad_superoperator(schedule, err, slices)?;
    Ok(apply_superoperator(&superop, rho0))
}

/// Largest entry-wise difference between the RK4 and oracle final propagators.
pub fn rk4_oracle_defect(schedule: &PulseSchedule, err: &ErrorModel, samples: usize, slices: usize) -> Result<f64> {
    let rk4 = final_unitary(schedule, err, samples)?;
    let oracle = oracle_propagator(schedule, err, slices)?;
    Ok(rk4.max_abs_diff(&oracle))
}

/// Rewrites every lambda segment with a linearly advancing phase `a + w t` in the frame
/// `W(t) = exp(i w t |e><e|)`, where it becomes a constant phase `a` with extra detuning `w`.
///
/// Within segment `k` the lab propagator is `W_k(t_local) U'(t)`.
pub fn corotating_schedule(schedule: &PulseSchedule) -> Result<PulseSchedule> {
    let mut segments = schedule.segments.clone();
    for seg in &mut segments {
        if let (Coupling::Lambda { .. }, Profile::Linear { offset, slope }) = (&seg.coupling, &seg.phase) {
            let (a, w) = (*offset, *slope);
            seg.detuning = match seg.detuning {
                Profile::Constant(d) => Profile::Constant(d + w),
                Profile::Linear { offset, slope } => Profile::Linear { offset: offset + w, slope },
                _ => {
                    return Err(NhqcError::InvalidParameter(
                        "co-rotating frame needs a constant or linear detuning".into(),
                    ))
                }
            };
            seg.phase = Profile::Constant(a);
        }
    }
    PulseSchedule::new(schedule.system.clone(), segments, schedule.target.clone(), &schedule.scheme_label)
}

/// Computational block `P U P` of a full-space operator.
pub fn computational_block(u: &ComplexMatrix, system: &LevelSystem) -> ComplexMatrix {
    u.submatrix(&system.computational_indices)
}

/// Pure-state density matrix `|psi><psi|`.
pub fn pure_density(psi: &StateVector) -> ComplexMatrix {
    ComplexMatrix::outer(psi, psi)
}

/// Six axial qubit states `|0>, |1>, |+x>, |-x>, |+y>, |-y>` as computational amplitudes.
pub fn axial_states() -> [[C64; 2]; 6] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(r, 0.0), c(r, 0.0)],
        [c(r, 0.0), c(-r, 0.0)],
        [c(r, 0.0), c(0.0, r)],
        [c(r, 0.0), c(0.0, -r)],
    ]
}
