//! Geometric verification: auxiliary frames, connection matrices `A = i<v_l|dv_m/dt>` and
//! `K = <v_l|H|v_m>`, the holonomy `T exp(i int (A - K) dt)`, and the cyclic and
//! parallel-transport residuals of a schedule.

use crate::dynamics::{propagate_unitary, DEFAULT_UNITARY_SAMPLES};
use crate::error::{NhqcError, Result};
use crate::numkit::{
    c, cis, expm_hermitian, phase_aligned_distance, ComplexMatrix, StateVector, TimeGrid, C64, I,
};
use crate::schemes::dfs_bright_state;
use crate::system::{Coupling, DriveSegment, ErrorModel, LevelSystem, Profile, PulseSchedule, SystemKind};
use std::f64::consts::PI;
use std::sync::Arc;

/// Orthonormality drift beyond which a frame is rejected.
pub const FRAME_TOL: f64 = 1e-8;
/// Accumulated non-unitarity beyond which a reconstruction is rejected.
pub const HOLONOMY_UNITARY_TOL: f64 = 1e-6;

type FrameFn = Arc<dyn Fn(f64) -> Vec<StateVector> + Send + Sync>;

/// `L + 1` state-vector functions on `[0, duration]`: `L` computational vectors followed
/// by one auxiliary vector.
#[derive(Clone)]
pub struct AuxiliaryFrame {
    pub dim: usize,
    pub rank: usize,
    pub duration: f64,
    /// Computational-level indices, used to express `v_k(0)` in computational coordinates.
    pub computational_indices: Vec<usize>,
    vectors: FrameFn,
}

impl std::fmt::Debug for AuxiliaryFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuxiliaryFrame")
            .field("dim", &self.dim)
            .field("rank", &self.rank)
            .field("duration", &self.duration)
            .finish()
    }
}

impl AuxiliaryFrame {
    pub fn new(
        dim: usize,
        rank: usize,
        duration: f64,
        computational_indices: Vec<usize>,
        vectors: impl Fn(f64) -> Vec<StateVector> + Send + Sync + 'static,
    ) -> Self {
        AuxiliaryFrame { dim, rank, duration, computational_indices, vectors: Arc::new(vectors) }
    }

    /// All `L + 1` vectors at time `t`.
    pub fn at(&self, t: f64) -> Vec<StateVector> {
        (self.vectors)(t)
    }

    /// Largest deviation of the Gram matrix from the identity at `t`.
    pub fn orthonormality_defect(&self, t: f64) -> f64 {
        let v = self.at(t);
        let mut worst = 0.0f64;
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dotc(b) - c(want, 0.0)).norm());
            }
        }
        worst
    }

    /// `max_k |v_k(duration) - v_k(0)|` over the computational vectors.
    pub fn boundary_defect(&self) -> f64 {
        let (a, b) = (self.at(0.0), self.at(self.duration));
        a.iter().zip(&b).take(self.rank).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// `F_{ik} = <comp_i | v_k(0)>`.
    pub fn initial_basis(&self) -> ComplexMatrix {
        let v = self.at(0.0);
        ComplexMatrix::from_fn(self.rank, |i, k| v[k][self.computational_indices[i]])
    }

    /// Frame with every vector fixed to the computational basis.
    pub fn static_frame(system: &LevelSystem, duration: f64) -> Self {
        let mut vecs: Vec<StateVector> =
            system.computational_indices.iter().map(|&k| crate::numkit::basis_state(system.dim, k)).collect();
        vecs.push(system.auxiliary_state());
        let rank = system.computational_indices.len();
        AuxiliaryFrame::new(system.dim, rank, duration, system.computational_indices.clone(), move |_| vecs.clone())
    }
}

/// Connection matrices sampled at the midpoints of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionPair {
    pub times: Vec<f64>,
    pub a: Vec<ComplexMatrix>,
    pub k: Vec<ComplexMatrix>,
    /// Largest Hermiticity defect of `A` before symmetrisation.
    pub a_defect: f64,
    /// Largest Hermiticity defect of `K` before symmetrisation.
    pub k_defect: f64,
}

/// `A` by centred differences over each grid cell and `K` from the ideal Hamiltonian,
/// both evaluated at the cell midpoint.
pub fn frame_connection(frame: &AuxiliaryFrame, schedule: &PulseSchedule, grid: &TimeGrid) -> Result<ConnectionPair> {
    if frame.dim != schedule.system.dim {
        return Err(NhqcError::DimensionMismatch { expected: schedule.system.dim, got: frame.dim });
    }
    let ideal = ErrorModel::ideal();
    let l = frame.rank;
    let h = grid.h();
    let mut pair = ConnectionPair { times: vec![], a: vec![], k: vec![], a_defect: 0.0, k_defect: 0.0 };
    let mut prev = frame.at(grid.t_start());
    for j in 0..grid.steps() {
        let t0 = grid.time(j);
        let defect = frame.orthonormality_defect(t0);
        if defect > FRAME_TOL {
            return Err(NhqcError::FrameDefect { defect, t: t0 });
        }
        let t1 = grid.time(j + 1);
        let tm = 0.5 * (t0 + t1);
        let next = frame.at(t1);
        let mid = frame.at(tm);
        let ham = crate::system::hamiltonian_at(schedule, tm, &ideal)?;
        let a = ComplexMatrix::from_fn(l, |p, q| I * mid[p].dotc(&((&next[q] - &prev[q]) / c(h, 0.0))));
        let k = ComplexMatrix::from_fn(l, |p, q| ham.matrix_element(&mid[p], &mid[q]));
        pair.a_defect = pair.a_defect.max(a.hermitian_defect());
        pair.k_defect = pair.k_defect.max(k.hermitian_defect());
        pair.times.push(tm);
        pair.a.push(a.hermitian_part());
        pair.k.push(k.hermitian_part());
        prev = next;
    }
    let defect = frame.orthonormality_defect(grid.t_end());
    if defect > FRAME_TOL {
        return Err(NhqcError::FrameDefect { defect, t: grid.t_end() });
    }
    Ok(pair)
}

/// `prod_j exp(i (A_j - K_j) h)`, later cells to the left.
pub fn holonomy_reconstruct(pair: &ConnectionPair, grid: &TimeGrid) -> Result<ComplexMatrix> {
    if pair.a.len() != grid.steps() {
        return Err(NhqcError::DimensionMismatch { expected: grid.steps(), got: pair.a.len() });
    }
    let l = pair.a.first().map(|m| m.dim()).unwrap_or(1);
    let mut u = ComplexMatrix::identity(l);
    for (a, k) in pair.a.iter().zip(&pair.k) {
        let step = expm_hermitian(&(k - a), grid.h())?;
        u = &step * &u;
    }
    let defect = u.unitary_defect();
    if defect > HOLONOMY_UNITARY_TOL {
        return Err(NhqcError::NonUnitaryHolonomy { defect });
    }
    Ok(u)
}

/// Holonomy expressed in the computational basis: `F C F^dagger`.
pub fn holonomy_in_computational_basis(frame: &AuxiliaryFrame, holonomy: &ComplexMatrix) -> ComplexMatrix {
    let f = frame.initial_basis();
    &(&f * holonomy) * &f.dagger()
}

/// Uniform grid over the full schedule.
pub fn schedule_grid(schedule: &PulseSchedule, steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(0.0, schedule.total_duration(), steps)
}

/// Phase-aligned distance between the reconstructed holonomy and the propagated
/// computational block.
pub fn reconstruction_defect(frame: &AuxiliaryFrame, schedule: &PulseSchedule, steps: usize) -> Result<f64> {
    let grid = schedule_grid(schedule, steps)?;
    let pair = frame_connection(frame, schedule, &grid)?;
    let hol = holonomy_in_computational_basis(frame, &holonomy_reconstruct(&pair, &grid)?);
    let traj = propagate_unitary(schedule, &ErrorModel::ideal(), DEFAULT_UNITARY_SAMPLES.max(steps))?;
    let block = traj.final_operator().submatrix(&schedule.system.computational_indices);
    Ok(phase_aligned_distance(&block, &hol))
}

/// Cyclic and parallel-transport residuals measured along the propagated computational states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionResiduals {
    /// `|| sum_k |phi_k(tau)><phi_k(tau)| - sum_k |phi_k(0)><phi_k(0)| ||_F`.
    pub cyclic: f64,
    /// `max_t max_{k,l} |<phi_k(t)|H(t)|phi_l(t)>|`.
    pub parallel: f64,
    /// `max_{k,l} |int_0^tau <phi_k|H|phi_l> dt|`, the accumulated dynamical phase.
    pub cumulative_dynamical: f64,
}

/// Residuals of the cyclic and parallel-transport conditions for `schedule` under `err`,
/// propagated on `grid.steps()` RK4 steps.
pub fn condition_residuals(schedule: &PulseSchedule, err: &ErrorModel, grid: &TimeGrid) -> Result<ConditionResiduals> {
    let traj = propagate_unitary(schedule, err, grid.steps())?;
    let sys = &schedule.system;
    let comp = &sys.computational_indices;
    let projector = |u: &ComplexMatrix| {
        let mut p = ComplexMatrix::zeros(sys.dim);
        for &k in comp {
            let col = u.apply(&crate::numkit::basis_state(sys.dim, k));
            p += &ComplexMatrix::outer(&col, &col);
        }
        p
    };
    let cyclic = (&projector(traj.final_operator()) - &projector(&traj.operators[0])).frobenius_norm();

    let starts = schedule.segment_starts();
    let l = comp.len();
    let k_at = |u: &ComplexMatrix, seg: &DriveSegment, local: f64| {
        let h = seg.hamiltonian(sys, local, err);
        let m = &(&u.dagger() * &h) * u;
        ComplexMatrix::from_fn(l, |p, q| m.get(comp[p], comp[q]))
    };
    let mut parallel = 0.0f64;
    let mut integral = ComplexMatrix::zeros(l);
    for j in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times[j], traj.times[j + 1]);
        let (seg_idx, _) = schedule.locate(0.5 * (t0 + t1))?;
        let seg = &schedule.segments[seg_idx];
        let s = starts[seg_idx];
        let k0 = k_at(&traj.operators[j], seg, (t0 - s).max(0.0));
        let k1 = k_at(&traj.operators[j + 1], seg, (t1 - s).min(seg.duration));
        parallel = parallel.max(k0.max_abs()).max(k1.max_abs());
        integral += &(&k0 + &k1).scale_real(0.5 * (t1 - t0));
    }
    Ok(ConditionResiduals { cyclic, parallel, cumulative_dynamical: integral.max_abs() })
}

/// Exact evolution of a state through one segment under the ideal Hamiltonian,
/// by the closed form appropriate to the segment's control shape.
fn segment_state_map(seg: &DriveSegment, system: &LevelSystem, coupled: &StateVector, t: f64, psi: &StateVector) -> Result<StateVector> {
    let ideal = ErrorModel::ideal();
    match (&seg.coupling, &seg.envelope, &seg.phase) {
        (Coupling::Exchange { generator, .. }, envelope, _) => {
            Ok(expm_hermitian(generator, envelope.integral(t))?.apply(psi))
        }
        (Coupling::Lambda { .. }, _, _) if seg.is_time_independent() => {
            Ok(expm_hermitian(&seg.hamiltonian(system, 0.0, &ideal), t)?.apply(psi))
        }
        (Coupling::Lambda { .. }, Profile::Constant(_), Profile::Linear { offset, slope })
            if seg.detuning.is_constant() =>
        {
            let mut rotating = seg.clone();
            rotating.phase = Profile::Constant(*offset);
            rotating.detuning = Profile::Constant(seg.detuning.value(0.0) + slope);
            let inner = expm_hermitian(&rotating.hamiltonian(system, 0.0, &ideal), t)?.apply(psi);
            let e = system.excited_index.expect("lambda system");
            let mut out = inner;
            out[e] *= cis(slope * t);
            Ok(out)
        }
        (Coupling::Lambda { .. }, Profile::Shaped { shape, .. }, Profile::Shaped { phase_offset, .. }) => {
            let e = system.excited_index.expect("lambda system");
            let (x, y) = shape.trajectory(t);
            let a = coupled.dotc(psi);
            let b = psi[e];
            let r = cis(*phase_offset);
            let mut out = psi - coupled * a;
            out[e] = c(0.0, 0.0);
            let out_c = x * a - (y.conj() * b) / r;
            let out_e = r * y * a + x.conj() * b;
            Ok(out + coupled * out_c + crate::numkit::basis_state(system.dim, e) * out_e)
        }
        (Coupling::Lambda { .. }, Profile::Circle { path, .. }, _) => {
            let e = system.excited_index.expect("lambda system");
            let kappa = coupled.dotc(psi);
            if (kappa.norm() - 1.0).abs() > 1e-9 {
                return Err(NhqcError::InvalidParameter(
                    "circular path segments need an incoming state along the coupled state".into(),
                ));
            }
            let phase = kappa * cis(-path.enclosed_phase(t));
            let (al, be) = (path.alpha(t), path.beta(t));
            Ok(coupled * (phase * (al / 2.0).cos())
                + crate::numkit::basis_state(system.dim, e) * (phase * cis(be) * (al / 2.0).sin()))
        }
        _ => Err(NhqcError::InvalidParameter(
            "no closed-form evolution for this segment shape".into(),
        )),
    }
}

fn coupled_state(seg: &DriveSegment, system: &LevelSystem) -> Result<[C64; 2]> {
    match &seg.coupling {
        Coupling::Lambda { coupled } => Ok(*coupled),
        Coupling::Exchange { generator, .. } => dfs_bright_state(generator, system),
        Coupling::Tripod { .. } => Err(NhqcError::InvalidParameter("tripod segments use the dark-state frame".into())),
    }
}

/// Frame built from the analytic trajectory of the coupled state, with a linear gauge
/// ramp that closes it: `v_1(t) = psi(t) e^{-i Phi t / tau}`, `v_2` the decoupled
/// computational state. Tripod schedules use `[|0>, D(theta, phi)]` instead.
pub fn natural_frame(schedule: &PulseSchedule) -> Result<AuxiliaryFrame> {
    if schedule.system.kind == SystemKind::Tripod4 {
        return tripod_frame(schedule);
    }
    let system = schedule.system.clone();
    let first = coupled_state(&schedule.segments[0], &system)?;
    for seg in &schedule.segments {
        let cs = coupled_state(seg, &system)?;
        let overlap = first[0].conj() * cs[0] + first[1].conj() * cs[1];
        if (overlap.norm() - 1.0).abs() > 1e-12 {
            return Err(NhqcError::InvalidParameter("segments must share one coupled state".into()));
        }
    }
    let coupled = system.embed(&first);
    let decoupled = system.embed(&[-first[1].conj(), first[0].conj()]);
    let aux_level = crate::dynamics::leak_level(&system);

    let starts = schedule.segment_starts();
    let mut psi_starts = vec![coupled.clone()];
    for seg in &schedule.segments {
        let last = psi_starts.last().expect("non-empty");
        psi_starts.push(segment_state_map(seg, &system, &coupled, seg.duration, last)?);
    }
    let tau = schedule.total_duration();
    let end = coupled.dotc(psi_starts.last().expect("non-empty"));
    if (end.norm() - 1.0).abs() > 1e-6 {
        return Err(NhqcError::FrameDefect { defect: (end.norm() - 1.0).abs(), t: tau });
    }
    let big_phi = end.arg();
    let segments = schedule.segments.clone();
    let sched = schedule.clone();
    let indices = system.computational_indices.clone();
    let dim = system.dim;
    Ok(AuxiliaryFrame::new(dim, 2, tau, indices, move |t| {
        let (k, local) = sched.locate(t.clamp(0.0, tau)).unwrap_or((segments.len() - 1, segments[segments.len() - 1].duration));
        let _ = starts[k];
        let psi = segment_state_map(&segments[k], &system, &coupled, local, &psi_starts[k])
            .expect("segment shapes validated at construction");
        let v1 = psi * cis(-big_phi * t / tau);
        let a = coupled.dotc(&v1);
        let b = v1[aux_level];
        let aux = &coupled * (-b.conj()) + crate::numkit::basis_state(dim, aux_level) * a.conj();
        vec![v1, decoupled.clone(), aux]
    }))
}

fn tripod_frame(schedule: &PulseSchedule) -> Result<AuxiliaryFrame> {
    let mut profiles = vec![];
    for seg in &schedule.segments {
        match &seg.coupling {
            Coupling::Tripod { theta, phi } => profiles.push((theta.clone(), phi.clone())),
            _ => return Err(NhqcError::InvalidParameter("mixed tripod schedule".into())),
        }
    }
    let sched = schedule.clone();
    let tau = schedule.total_duration();
    Ok(AuxiliaryFrame::new(4, 2, tau, schedule.system.computational_indices.clone(), move |t| {
        let (k, local) = sched.locate(t.clamp(0.0, tau)).expect("clamped");
        let (th, ph) = (profiles[k].0.value(local), profiles[k].1.value(local));
        let mut d = StateVector::zeros(4);
        d[1] = c((th / 2.0).cos(), 0.0);
        d[2] = cis(ph) * (th / 2.0).sin();
        let mut b = StateVector::zeros(4);
        b[1] = c(-(th / 2.0).sin(), 0.0);
        b[2] = cis(ph) * (th / 2.0).cos();
        vec![crate::numkit::basis_state(4, 0), d, b]
    }))
}

/// Frame of the circular-path schemes: `mu_2 = cos(alpha/2)|c> + sin(alpha/2) e^{i beta}|e>`
/// per segment, the decoupled state `mu_1`, and `mu_3` orthogonal to both in `{|c>, |e>}`.
pub fn mu_frame(schedule: &PulseSchedule) -> Result<AuxiliaryFrame> {
    let system = schedule.system.clone();
    let mut paths = vec![];
    let mut coupled_amp = None;
    for seg in &schedule.segments {
        match (&seg.coupling, &seg.envelope) {
            (Coupling::Lambda { coupled }, Profile::Circle { path, .. }) => {
                paths.push(path.clone());
                coupled_amp = Some(*coupled);
            }
            _ => return Err(NhqcError::InvalidParameter("mu frame needs circular-path segments".into())),
        }
    }
    let amp = coupled_amp.ok_or_else(|| NhqcError::InvalidParameter("empty schedule".into()))?;
    let coupled = system.embed(&amp);
    let decoupled = system.embed(&[-amp[1].conj(), amp[0].conj()]);
    let e = system.excited_index.expect("lambda system");
    let excited = crate::numkit::basis_state(system.dim, e);
    let sched = schedule.clone();
    let tau = schedule.total_duration();
    Ok(AuxiliaryFrame::new(system.dim, 2, tau, system.computational_indices.clone(), move |t| {
        let (k, local) = sched.locate(t.clamp(0.0, tau)).expect("clamped");
        let (al, be) = (paths[k].alpha(local), paths[k].beta(local));
        let mu2 = &coupled * c((al / 2.0).cos(), 0.0) + &excited * (cis(be) * (al / 2.0).sin());
        let mu3 = &coupled * c(-(al / 2.0).sin(), 0.0) + &excited * (cis(be) * (al / 2.0).cos());
        vec![mu2, decoupled.clone(), mu3]
    }))
}

/// Frame transformed by `V(t) = exp(i sin^2(pi t / tau) G)`, which is trivial at both ends.
pub fn gauge_transform(frame: &AuxiliaryFrame, generator: &ComplexMatrix) -> Result<AuxiliaryFrame> {
    generator.ensure_hermitian()?;
    if generator.dim() != frame.rank {
        return Err(NhqcError::DimensionMismatch { expected: frame.rank, got: generator.dim() });
    }
    let inner = frame.clone();
    let g = generator.clone();
    let tau = frame.duration;
    let rank = frame.rank;
    Ok(AuxiliaryFrame::new(frame.dim, rank, tau, frame.computational_indices.clone(), move |t| {
        let v = inner.at(t);
        let s = (PI * t / tau).sin().powi(2);
        let vm = crate::numkit::expm_hermitian_unchecked(&g, -s);
        let mut out: Vec<StateVector> = (0..rank)
            .map(|k| (0..rank).fold(StateVector::zeros(inner.dim), |acc, l| acc + &v[l] * vm.get(l, k)))
            .collect();
        out.extend(v.into_iter().skip(rank));
        out
    }))
}

/// Dynamical-to-geometric phase ratio of a linearly chirped (time-optimal) schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRatio {
    pub times: Vec<f64>,
    /// `int_0^t K / int_0^t A` at each sample after the first tenth of the run.
    pub ratio: Vec<f64>,
    pub final_ratio: f64,
    /// `max |ratio(t) - final_ratio| / |final_ratio|`.
    pub max_relative_deviation: f64,
    /// `int (A - K) dt`, the phase acquired by the coupled state.
    pub total_phase: f64,
}

/// Ratio `int K / int A` for the coupled state of a single linearly chirped segment,
/// evaluated in the frame `W(t) = e^{-i w t} P_comp + P_rest` that co-rotates with the
/// drive phase. The frame vector is built from the RK4-propagated state and closed by a
/// linear gauge ramp; `A` is obtained by centred differences.
pub fn to_phase_ratio(schedule: &PulseSchedule, samples: usize) -> Result<PhaseRatio> {
    if schedule.segments.len() != 1 {
        return Err(NhqcError::InvalidParameter("phase ratio expects a single chirped segment".into()));
    }
    let seg = &schedule.segments[0];
    let (w, amp) = match (&seg.coupling, &seg.phase) {
        (Coupling::Lambda { coupled }, Profile::Linear { slope, .. }) => (*slope, *coupled),
        _ => return Err(NhqcError::InvalidParameter("phase ratio expects a linear drive phase".into())),
    };
    let sys = &schedule.system;
    let coupled = sys.embed(&amp);
    let traj = propagate_unitary(schedule, &ErrorModel::ideal(), samples)?;
    let n = traj.len();
    let tau = schedule.total_duration();
    let h = tau / (n - 1) as f64;
    let comp = &sys.computational_indices;

    let rotate = |psi: &StateVector, t: f64| {
        let mut out = psi.clone();
        for &k in comp {
            out[k] *= cis(w * t);
        }
        out
    };
    let psi_rot: Vec<StateVector> =
        traj.times.iter().zip(&traj.operators).map(|(&t, u)| rotate(&u.apply(&coupled), t)).collect();
    let end = coupled.dotc(&psi_rot[n - 1]);
    if (end.norm() - 1.0).abs() > 1e-6 {
        return Err(NhqcError::FrameDefect { defect: (end.norm() - 1.0).abs(), t: tau });
    }
    let lambda = -end.arg() / tau;
    let nu: Vec<StateVector> = psi_rot.iter().zip(&traj.times).map(|(p, &t)| p * cis(lambda * t)).collect();

    let mut a_vals = vec![0.0; n];
    let mut k_vals = vec![0.0; n];
    let p_comp = ComplexMatrix::from_fn(sys.dim, |i, j| if i == j && comp.contains(&i) { c(1.0, 0.0) } else { c(0.0, 0.0) });
    for j in 0..n {
        let t = traj.times[j];
        let wmat = ComplexMatrix::from_fn(sys.dim, |i, k| {
            if i != k {
                c(0.0, 0.0)
            } else if comp.contains(&i) {
                cis(-w * t)
            } else {
                c(1.0, 0.0)
            }
        });
        let h_lab = seg.hamiltonian(sys, t, &ErrorModel::ideal());
        let h_rot = &(&(&wmat.dagger() * &h_lab) * &wmat) - &p_comp.scale_real(w);
        k_vals[j] = h_rot.matrix_element(&nu[j], &nu[j]).re;
        let deriv = if j == 0 {
            (&nu[1] - &nu[0]) / c(h, 0.0)
        } else if j == n - 1 {
            (&nu[n - 1] - &nu[n - 2]) / c(h, 0.0)
        } else {
            (&nu[j + 1] - &nu[j - 1]) / c(2.0 * h, 0.0)
        };
        a_vals[j] = (I * nu[j].dotc(&deriv)).re;
    }
    let mut cum_a = 0.0;
    let mut cum_k = 0.0;
    let mut times = vec![];
    let mut ratio = vec![];
    for j in 1..n {
        cum_a += 0.5 * h * (a_vals[j] + a_vals[j - 1]);
        cum_k += 0.5 * h * (k_vals[j] + k_vals[j - 1]);
        if traj.times[j] >= 0.1 * tau {
            times.push(traj.times[j]);
            ratio.push(cum_k / cum_a);
        }
    }
    let final_ratio = *ratio.last().expect("non-empty");
    let max_relative_deviation =
        ratio.iter().map(|r| (r - final_ratio).abs() / final_ratio.abs()).fold(0.0, f64::max);
    Ok(PhaseRatio { times, ratio, final_ratio, max_relative_deviation, total_phase: cum_a - cum_k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::build_schedule;
    use crate::system::{GateAngles, SchemeKind, SchemeSpec};

    fn schedule(kind: SchemeKind) -> PulseSchedule {
        let angles = if kind == SchemeKind::Sta || kind == SchemeKind::Dfs3 {
            GateAngles::s_gate()
        } else {
            GateAngles::new(1.3, 0.8, 2.2).unwrap()
        };
        build_schedule(&SchemeSpec::new(kind, angles)).unwrap()
    }

    #[test]
    fn static_frame_with_zero_hamiltonian_has_zero_connection() {
        let s = crate::schemes::idle_schedule(1.0).unwrap();
        let frame = AuxiliaryFrame::static_frame(&s.system, 1.0);
        let grid = schedule_grid(&s, 50).unwrap();
        let pair = frame_connection(&frame, &s, &grid).unwrap();
        assert!(pair.a.iter().chain(&pair.k).all(|m| m.max_abs() == 0.0));
        let hol = holonomy_reconstruct(&pair, &grid).unwrap();
        assert!(hol.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn abelian_constant_connection() {
        let grid = TimeGrid::new(0.0, 2.0, 40).unwrap();
        let a = ComplexMatrix::from_real_diagonal(&[0.3, -1.1]);
        let pair = ConnectionPair {
            times: grid.times()[..40].to_vec(),
            a: vec![a.clone(); 40],
            k: vec![ComplexMatrix::zeros(2); 40],
            a_defect: 0.0,
            k_defect: 0.0,
        };
        let hol = holonomy_reconstruct(&pair, &grid).unwrap();
        let want = ComplexMatrix::from_diagonal(&[cis(0.6), cis(-2.2)]);
        assert!(hol.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn natural_frames_are_orthonormal_and_closed() {
        for kind in crate::system::SchemeKind::ALL {
            let s = schedule(kind);
            let frame = natural_frame(&s).unwrap();
            assert!(frame.boundary_defect() < 1e-8, "{kind}: {}", frame.boundary_defect());
            for j in 0..=20 {
                let t = s.total_duration() * j as f64 / 20.0;
                assert!(frame.orthonormality_defect(t) < 1e-10, "{kind} t={t}");
            }
        }
    }

    #[test]
    fn natural_frames_track_the_propagated_state() {
        for kind in crate::system::SchemeKind::ALL {
            if kind == SchemeKind::Sta {
                continue;
            }
            let s = schedule(kind);
            let frame = natural_frame(&s).unwrap();
            let traj = propagate_unitary(&s, &ErrorModel::ideal(), 2000).unwrap();
            let v0 = frame.at(0.0)[0].clone();
            for j in (0..traj.len()).step_by(97) {
                let psi = traj.operators[j].apply(&v0);
                let v = &frame.at(traj.times[j])[0];
                assert!((psi.dotc(v).norm() - 1.0).abs() < 1e-8, "{kind} t={}", traj.times[j]);
            }
        }
    }

    #[test]
    fn reconstruction_matches_propagation() {
        for kind in crate::system::SchemeKind::ALL {
            let s = schedule(kind);
            let frame = natural_frame(&s).unwrap();
            let d = reconstruction_defect(&frame, &s, 4000).unwrap();
            assert!(d < 1e-5, "{kind}: {d}");
        }
    }

    #[test]
    fn mu_frame_is_parallel_for_shortest_path() {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::S, GateAngles::s_gate())).unwrap();
        let frame = mu_frame(&s).unwrap();
        let grid = schedule_grid(&s, 2000).unwrap();
        let pair = frame_connection(&frame, &s, &grid).unwrap();
        assert!(pair.k.iter().all(|k| k.max_abs() < 1e-6));
        assert!(reconstruction_defect(&frame, &s, 2000).unwrap() < 1e-5);
    }

    #[test]
    fn gauge_covariance() {
        let s = schedule(SchemeKind::Ps);
        let frame = natural_frame(&s).unwrap();
        let g = ComplexMatrix::from_row_slice(2, &[c(0.4, 0.0), c(0.3, -0.7), c(0.3, 0.7), c(-0.9, 0.0)]).unwrap();
        let moved = gauge_transform(&frame, &g).unwrap();
        assert!(moved.boundary_defect() < 1e-12);
        let grid = schedule_grid(&s, 3000).unwrap();
        let h0 = holonomy_reconstruct(&frame_connection(&frame, &s, &grid).unwrap(), &grid).unwrap();
        let h1 = holonomy_reconstruct(&frame_connection(&moved, &s, &grid).unwrap(), &grid).unwrap();
        assert!(phase_aligned_distance(&h0, &h1) < 1e-5);
    }

    #[test]
    fn finite_difference_order() {
        let s = schedule(SchemeKind::S);
        let frame = natural_frame(&s).unwrap();
        let d1 = reconstruction_defect(&frame, &s, 200).unwrap();
        let d2 = reconstruction_defect(&frame, &s, 400).unwrap();
        assert!(d1 / d2 >= 3.0, "{d1} {d2}");
    }

    #[test]
    fn sl_residuals() {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())).unwrap();
        let grid = schedule_grid(&s, 2000).unwrap();
        let ideal = condition_residuals(&s, &ErrorModel::ideal(), &grid).unwrap();
        assert!(ideal.cyclic < 1e-7 && ideal.parallel < 1e-6, "{ideal:?}");
        let rabi = condition_residuals(&s, &ErrorModel::rabi(0.1), &grid).unwrap();
        assert!(rabi.cyclic > ideal.cyclic && rabi.cyclic > 1e-2, "{rabi:?}");
    }

    #[test]
    fn time_optimal_ratio_is_constant() {
        let s = schedule(SchemeKind::To);
        let r = to_phase_ratio(&s, 4000).unwrap();
        assert!(r.max_relative_deviation < 1e-3, "{r:?}");
        assert!(r.final_ratio.abs() > 0.1);
    }
}
