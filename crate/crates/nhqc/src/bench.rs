//! Gate metrics, error sweeps, leading-order fits, the pulse-area table and golden files.

use crate::dynamics::{
    apply_superoperator, final_density, final_unitary, oracle_lindblad_superoperator, propagate_unitary, pure_density,
    samples_from_env, axial_states, DEFAULT_LINDBLAD_SAMPLES, DEFAULT_UNITARY_SAMPLES, ORACLE_SLICES,
};
use crate::error::{NhqcError, Result};
use crate::holonomy::{condition_residuals, schedule_grid};
use crate::numkit::{quad_trapz_fn, ComplexMatrix, TimeGrid, C64};
use crate::schemes::{brachistochrone_tau, build_schedule};
use crate::system::{ErrorModel, GateAngles, PulseSchedule, SchemeKind, SchemeSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Decoherence rate `2 pi x 3 kHz` in units of `Omega_bar = 2 pi x 10 MHz`.
pub const FIG13_GAMMA: f64 = 3.0e-4;
/// Upper end of the decoherence axis, `2 pi x 6 kHz`.
pub const FIG13_GAMMA_MAX: f64 = 6.0e-4;

/// How a propagated gate is scored against its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityMetric {
    /// `(Tr(M M^dagger) + |Tr M|^2) / 6` with `M = target^dagger P U P`.
    TwoDesign,
    /// `|Tr(target^dagger P U P)| / 2`.
    TraceOverlap,
    /// `1/6 sum_k <psi_k| T^dagger rho_k(tau) T |psi_k>` over the six axial states.
    AxialLindblad,
}

impl FidelityMetric {
    pub fn tag(&self) -> &'static str {
        match self {
            FidelityMetric::TwoDesign => "two-design",
            FidelityMetric::TraceOverlap => "trace-overlap",
            FidelityMetric::AxialLindblad => "axial-lindblad",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "two-design" => Ok(FidelityMetric::TwoDesign),
            "trace-overlap" => Ok(FidelityMetric::TraceOverlap),
            "axial-lindblad" => Ok(FidelityMetric::AxialLindblad),
            other => Err(NhqcError::InvalidParameter(format!(
                "unknown metric '{other}'; valid metrics: two-design, trace-overlap, axial-lindblad"
            ))),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            FidelityMetric::TwoDesign => "two-design average fidelity (Tr(MM^+) + |Tr M|^2)/6, M = T^+ P U P",
            FidelityMetric::TraceOverlap => "trace overlap |Tr(T^+ P U P)|/2",
            FidelityMetric::AxialLindblad => {
                "six-axial-state average <psi|T^+ rho(tau) T|psi> over |0>,|1>,|+-x>,|+-y>"
            }
        }
    }
}

/// `F = (Tr(M M^dagger) + |Tr M|^2) / 6` with `M = target^dagger P actual P`.
pub fn unitary_gate_fidelity(actual: &ComplexMatrix, target: &ComplexMatrix, comp_indices: &[usize]) -> f64 {
    let m = &target.dagger() * &actual.submatrix(comp_indices);
    let d = target.dim() as f64;
    ((&m * &m.dagger()).trace().re + m.trace().norm_sqr()) / (d * (d + 1.0))
}

/// `|Tr(target^dagger P actual P)| / d`.
pub fn trace_overlap_fidelity(actual: &ComplexMatrix, target: &ComplexMatrix, comp_indices: &[usize]) -> f64 {
    (&target.dagger() * &actual.submatrix(comp_indices)).trace().norm() / target.dim() as f64
}

fn axial_inputs(schedule: &PulseSchedule) -> Vec<(ComplexMatrix, crate::numkit::StateVector)> {
    let sys = &schedule.system;
    axial_states()
        .iter()
        .map(|amp| {
            let psi = sys.embed(amp);
            let t = &schedule.target;
            let out = [t.get(0, 0) * amp[0] + t.get(0, 1) * amp[1], t.get(1, 0) * amp[0] + t.get(1, 1) * amp[1]];
            (pure_density(&psi), sys.embed(&out))
        })
        .collect()
}

/// Six-axial-state fidelity and the largest excited population met along the six runs.
pub fn lindblad_fidelity_and_peak(schedule: &PulseSchedule, err: &ErrorModel, samples: usize) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut peak = 0.0f64;
    for (rho0, ideal_out) in axial_inputs(schedule) {
        let (rho, p) = final_density(schedule, err, &rho0, samples)?;
        total += rho.matrix_element(&ideal_out, &ideal_out).re;
        peak = peak.max(p);
    }
    Ok((total / 6.0, peak))
}

/// Six-axial-state average fidelity of the schedule's gate under `err`.
pub fn lindblad_gate_fidelity(schedule: &PulseSchedule, err: &ErrorModel, samples: usize) -> Result<f64> {
    Ok(lindblad_fidelity_and_peak(schedule, err, samples)?.0)
}

/// The same average computed with the Liouvillian oracle.
pub fn oracle_lindblad_fidelity(schedule: &PulseSchedule, err: &ErrorModel, slices: usize) -> Result<f64> {
    let superop = oracle_lindblad_superoperator(schedule, err, slices)?;
    let mut total = 0.0;
    for (rho0, ideal_out) in axial_inputs(schedule) {
        let rho = apply_superoperator(&superop, &rho0);
        total += rho.matrix_element(&ideal_out, &ideal_out).re;
    }
    Ok(total / 6.0)
}

/// `int Omega(t) dt / pi` summed over segments.
pub fn pulse_area(schedule: &PulseSchedule) -> Result<f64> {
    let mut area = 0.0;
    for seg in &schedule.segments {
        area += if seg.envelope.is_constant() {
            seg.envelope.value(0.0) * seg.duration
        } else {
            quad_trapz_fn(|t| seg.envelope.value(t), &TimeGrid::new(0.0, seg.duration, 20_000)?)?
        };
    }
    Ok(area / PI)
}

/// Area readings of the time-optimal gate in units of `pi`: the coupling integral
/// (`Omega_0 / 2 = Omega_bar`), the full `Omega_T` envelope, and half the coupling integral.
pub fn to_area_candidates(gamma: f64) -> Result<[(&'static str, f64); 3]> {
    let tau = brachistochrone_tau(gamma, 2.0)?;
    Ok([("coupling", tau / PI), ("omega_t", 2.0 * tau / PI), ("half_coupling", 0.5 * tau / PI)])
}

/// Peak excited population of a trajectory.
pub fn peak_excited_population(traj: &crate::dynamics::Trajectory) -> f64 {
    traj.excited_population.iter().copied().fold(0.0, f64::max)
}

/// Largest excited population over time, maximised over the six axial inputs (closed system).
pub fn peak_excited_population_axial(schedule: &PulseSchedule, err: &ErrorModel, samples: usize) -> Result<f64> {
    let traj = propagate_unitary(schedule, err, samples)?;
    let mut peak = 0.0f64;
    for amp in axial_states() {
        let psi = schedule.system.embed(&amp);
        peak = traj.excited_population_from(&schedule.system, &psi).into_iter().fold(peak, f64::max);
    }
    Ok(peak)
}

/// Sample counts and scoring rule used by report and sweep evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub metric: FidelityMetric,
    pub unitary_samples: usize,
    pub lindblad_samples: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            metric: FidelityMetric::AxialLindblad,
            unitary_samples: samples_from_env(DEFAULT_UNITARY_SAMPLES),
            lindblad_samples: samples_from_env(DEFAULT_LINDBLAD_SAMPLES),
        }
    }
}

impl EvalOptions {
    pub fn with_metric(mut self, metric: FidelityMetric) -> Self {
        self.metric = metric;
        self
    }
}

/// Summary of one scheme under one error model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub scheme_label: String,
    pub fidelity: f64,
    /// In multiples of `pi`.
    pub pulse_area: f64,
    pub peak_excited_population: f64,
    pub cyclic_residual: f64,
    pub parallel_residual: f64,
    pub duration: f64,
}

fn coherent_part(err: &ErrorModel) -> ErrorModel {
    ErrorModel { gamma_minus: 0.0, gamma_z: 0.0, ..*err }
}

/// Scores `schedule` under `err`. Residuals are measured under the coherent part of `err`.
pub fn evaluate_schedule(schedule: &PulseSchedule, err: &ErrorModel, opts: &EvalOptions) -> Result<GateReport> {
    err.validate()?;
    let comp = &schedule.system.computational_indices;
    let (fidelity, peak) = match opts.metric {
        FidelityMetric::AxialLindblad => lindblad_fidelity_and_peak(schedule, err, opts.lindblad_samples)?,
        metric => {
            if !err.is_closed() {
                return Err(NhqcError::InvalidParameter(format!(
                    "metric {} needs a closed system; use axial-lindblad with decoherence",
                    metric.tag()
                )));
            }
            let u = final_unitary(schedule, err, opts.unitary_samples)?;
            let f = if metric == FidelityMetric::TwoDesign {
                unitary_gate_fidelity(&u, &schedule.target, comp)
            } else {
                trace_overlap_fidelity(&u, &schedule.target, comp)
            };
            (f, peak_excited_population_axial(schedule, err, opts.unitary_samples)?)
        }
    };
    let residuals = condition_residuals(schedule, &coherent_part(err), &schedule_grid(schedule, opts.unitary_samples)?)?;
    let report = GateReport {
        scheme_label: schedule.scheme_label.clone(),
        fidelity,
        pulse_area: pulse_area(schedule)?,
        peak_excited_population: peak,
        cyclic_residual: residuals.cyclic,
        parallel_residual: residuals.parallel,
        duration: schedule.total_duration(),
    };
    let finite = [report.fidelity, report.pulse_area, report.peak_excited_population, report.cyclic_residual, report.parallel_residual, report.duration]
        .iter()
        .all(|x| x.is_finite());
    if !finite || report.fidelity > 1.0 + 1e-9 || report.fidelity < -1e-9 {
        return Err(NhqcError::NonFinite { step: 0, t: report.duration });
    }
    Ok(report)
}

/// Builds and scores a scheme.
pub fn evaluate(spec: &SchemeSpec, err: &ErrorModel, opts: &EvalOptions) -> Result<GateReport> {
    evaluate_schedule(&build_schedule(spec)?, err, opts)
}

/// Error parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Epsilon,
    Eta,
    /// `Gamma_- = Gamma_z = Gamma` with `epsilon = eta = 0`.
    Decoherence,
}

impl SweepAxis {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Eta => "eta",
            SweepAxis::Decoherence => "decoherence",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "epsilon" => Ok(SweepAxis::Epsilon),
            "eta" => Ok(SweepAxis::Eta),
            "decoherence" | "gamma" => Ok(SweepAxis::Decoherence),
            other => Err(NhqcError::InvalidParameter(format!(
                "unknown axis '{other}'; valid axes: epsilon, eta, decoherence"
            ))),
        }
    }

    /// Error model at grid value `x`, starting from `fixed`.
    pub fn error_at(&self, x: f64, fixed: &ErrorModel) -> ErrorModel {
        match self {
            SweepAxis::Epsilon => ErrorModel { epsilon: x, ..*fixed },
            SweepAxis::Eta => ErrorModel { eta: x, ..*fixed },
            SweepAxis::Decoherence => ErrorModel { epsilon: 0.0, eta: 0.0, gamma_minus: x, gamma_z: x },
        }
    }
}

/// Reports for every scheme at every grid point, indexed `[scheme][point]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub fixed: ErrorModel,
    pub options: EvalOptions,
    pub schemes: Vec<SchemeSpec>,
    pub reports: Vec<Vec<GateReport>>,
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Parses `a:b:n`.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || NhqcError::InvalidGrid(format!("range '{text}' must look like a:b:n with a < b and n >= 2"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a < b && n >= 2) {
        return Err(bad());
    }
    Ok(linspace(a, b, n))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(NhqcError::InvalidGrid("sweep grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NhqcError::InvalidGrid("sweep grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Evaluates every `(scheme, point)` pair in parallel; results are assembled in grid order.
pub fn sweep(
    schemes: &[SchemeSpec],
    axis: SweepAxis,
    grid: &[f64],
    fixed: &ErrorModel,
    opts: &EvalOptions,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let schedules: Vec<PulseSchedule> = schemes.iter().map(build_schedule).collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..schemes.len()).flat_map(|s| grid.iter().map(move |&x| (s, x))).collect();
    let flat: Vec<GateReport> = jobs
        .par_iter()
        .map(|&(s, x)| evaluate_schedule(&schedules[s], &axis.error_at(x, fixed), opts))
        .collect::<Result<_>>()?;
    let reports = flat.chunks(grid.len()).map(|c| c.to_vec()).collect();
    Ok(SweepResult { axis, grid: grid.to_vec(), fixed: *fixed, options: *opts, schemes: schemes.to_vec(), reports })
}

/// Least-squares coefficients of `1 - F = c2 x^2 + c4 x^4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrderFit {
    pub c2: f64,
    pub c4: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Fits `1 - F` against `x^2` and `x^4`.
pub fn fit_leading_order(x: &[f64], fidelity: &[f64]) -> Result<LeadingOrderFit> {
    if x.len() != fidelity.len() {
        return Err(NhqcError::DimensionMismatch { expected: x.len(), got: fidelity.len() });
    }
    let mut distinct: Vec<f64> = x.iter().map(|v| v.abs()).filter(|v| *v > 1e-12).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 2 {
        return Err(NhqcError::IllConditionedFit(format!(
            "need at least two distinct nonzero |x| values, got {}",
            distinct.len()
        )));
    }
    let xmax = distinct.last().copied().unwrap_or(0.0);
    let (mut s44, mut s48, mut s88, mut b4, mut b8) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &fi) in x.iter().zip(fidelity) {
        let u = (xi / xmax).powi(2);
        let v = u * u;
        let y = 1.0 - fi;
        s44 += u * u;
        s48 += u * v;
        s88 += v * v;
        b4 += u * y;
        b8 += v * y;
    }
    let det = s44 * s88 - s48 * s48;
    if det.abs() < 1e-10 * s44 * s88 {
        return Err(NhqcError::IllConditionedFit(format!("normal matrix is singular (det = {det:.3e})")));
    }
    let a2 = (b4 * s88 - b8 * s48) / det;
    let a4 = (s44 * b8 - s48 * b4) / det;
    let c2 = a2 / xmax.powi(2);
    let c4 = a4 / xmax.powi(4);
    let rms = (x
        .iter()
        .zip(fidelity)
        .map(|(&xi, &fi)| (1.0 - fi - c2 * xi.powi(2) - c4 * xi.powi(4)).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    Ok(LeadingOrderFit { c2, c4, rms })
}

/// Fit over one scheme of an epsilon sweep.
pub fn fit_sweep(result: &SweepResult, scheme: usize) -> Result<LeadingOrderFit> {
    if result.axis != SweepAxis::Epsilon {
        return Err(NhqcError::InvalidParameter("leading-order fits use the epsilon axis".into()));
    }
    let reports = result
        .reports
        .get(scheme)
        .ok_or_else(|| NhqcError::InvalidParameter(format!("scheme index {scheme} out of range")))?;
    let f: Vec<f64> = reports.iter().map(|r| r.fidelity).collect();
    fit_leading_order(&result.grid, &f)
}

/// `1 - P_e` after the first half loop of the pulse-shaped scheme under Rabi error `epsilon`,
/// starting from the coupled state; the ideal half loop transfers it fully to `|e>`.
pub fn ps_excitation_deficit(varsigma: f64, epsilon: f64, samples: usize) -> Result<f64> {
    let spec = SchemeSpec::new(SchemeKind::Ps, GateAngles::s_gate()).with_varsigma(varsigma);
    let mut schedule = build_schedule(&spec)?;
    schedule.segments.truncate(1);
    let u = final_unitary(&schedule, &ErrorModel::rabi(epsilon), samples)?;
    let (b, _) = crate::system::bright_dark_basis(&spec.angles);
    let psi = u.apply(&schedule.system.embed(&b));
    let e = schedule.system.excited_index.expect("lambda system");
    Ok(1.0 - psi[e].norm_sqr())
}

/// Scheme parameters of the seven benchmarked schemes for the given gate.
pub fn benchmark_specs(angles: GateAngles) -> Vec<SchemeSpec> {
    SchemeKind::BENCHMARK
        .iter()
        .map(|&k| {
            let spec = SchemeSpec::new(k, angles);
            match k {
                SchemeKind::C | SchemeKind::Cdd => spec.with_loops(2),
                SchemeKind::Ps => spec.with_varsigma(1.0),
                _ => spec,
            }
        })
        .collect()
}

/// Sweep panel of the decoherence/Rabi/detuning robustness comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig13Panel {
    A,
    B,
    C,
}

impl Fig13Panel {
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "a" => Ok(Fig13Panel::A),
            "b" => Ok(Fig13Panel::B),
            "c" => Ok(Fig13Panel::C),
            other => Err(NhqcError::InvalidParameter(format!("unknown panel '{other}'; valid panels: a, b, c"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Fig13Panel::A => "a",
            Fig13Panel::B => "b",
            Fig13Panel::C => "c",
        }
    }

    /// Axis, default grid, and fixed error model of the panel.
    pub fn setup(&self) -> (SweepAxis, Vec<f64>, ErrorModel) {
        let fixed = ErrorModel { epsilon: 0.0, eta: 0.0, gamma_minus: FIG13_GAMMA, gamma_z: FIG13_GAMMA };
        match self {
            Fig13Panel::A => (SweepAxis::Decoherence, linspace(0.0, FIG13_GAMMA_MAX, 13), ErrorModel::ideal()),
            Fig13Panel::B => (SweepAxis::Epsilon, linspace(-0.1, 0.1, 21), fixed),
            Fig13Panel::C => (SweepAxis::Eta, linspace(-0.1, 0.1, 21), fixed),
        }
    }
}

/// One row of the pulse-area table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaRow {
    pub label: String,
    pub area_pi: f64,
    pub reference_pi: Option<f64>,
    pub note: String,
}

/// Pulse areas of every catalog scheme at its tabulated parameters.
pub fn area_table() -> Result<Vec<AreaRow>> {
    let s = GateAngles::s_gate();
    let rows: Vec<(SchemeSpec, Option<f64>, String)> = vec![
        (SchemeSpec::new(SchemeKind::Sl, s), Some(1.00), String::new()),
        (SchemeSpec::new(SchemeKind::Ps, s).with_varsigma(1.0), Some(2.16), "varsigma=1".into()),
        (SchemeSpec::new(SchemeKind::C, s).with_loops(2), Some(2.00), "N=2".into()),
        (SchemeSpec::new(SchemeKind::Dc, s), Some(2.00), String::new()),
        (SchemeSpec::new(SchemeKind::To, s), Some(0.43), {
            let c = to_area_candidates(s.gamma)?;
            format!("gamma=pi/2; {}={:.3} {}={:.3} {}={:.3}", c[0].0, c[0].1, c[1].0, c[1].1, c[2].0, c[2].1)
        }),
        (SchemeSpec::new(SchemeKind::S, s), Some(0.87), "gamma=pi/2".into()),
        (SchemeSpec::new(SchemeKind::Cdd, s).with_loops(2), Some(1.32), "gamma=pi/4 per loop, N=2".into()),
        (SchemeSpec::new(SchemeKind::Ss, s), None, String::new()),
        (SchemeSpec::new(SchemeKind::Sta, s), None, "excludes the counter-diabatic term".into()),
        (SchemeSpec::new(SchemeKind::Dfs3, s), None, "area of J(t)".into()),
    ];
    rows.into_iter()
        .map(|(spec, reference_pi, note)| {
            let schedule = build_schedule(&spec)?;
            Ok(AreaRow { label: schedule.scheme_label.clone(), area_pi: pulse_area(&schedule)?, reference_pi, note })
        })
        .collect()
}

/// Golden data: `#`-prefixed `key=value` metadata followed by `scheme,x,fidelity` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Golden {
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<(String, f64, f64)>,
}

impl Golden {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("scheme,x,fidelity\n");
        for (s, x, f) in &self.rows {
            let _ = writeln!(out, "{s},{x:.6},{f:.15e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut rows = vec![];
        let mut seen_header = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !seen_header {
                if line != "scheme,x,fidelity" {
                    return Err(NhqcError::Golden(format!("line {}: expected column header", n + 1)));
                }
                seen_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|_| NhqcError::Golden(format!("line {}: bad number '{s}'", n + 1)));
            if cols.len() != 3 {
                return Err(NhqcError::Golden(format!("line {}: expected 3 columns", n + 1)));
            }
            rows.push((cols[0].to_string(), parse(cols[1])?, parse(cols[2])?));
        }
        Ok(Golden { meta, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Directory of the committed golden files.
pub fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens").join("v1")
}

pub const GOLDEN_SWEEP: &str = "sweep_epsilon_sl_ps_dc.csv";
pub const GOLDEN_SL_DECOHERENCE: &str = "lindblad_sl_s_gate.csv";

fn golden_meta(extra: &[(&str, String)], slices: usize) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("format".into(), "nhqc-golden-v1".into());
    meta.insert("metric".into(), FidelityMetric::AxialLindblad.describe().into());
    meta.insert("oracle".into(), "magnus4-liouvillian-product".into());
    meta.insert("oracle_slices".into(), slices.to_string());
    meta.insert("units".into(), "dimensionless (Omega_bar = 1)".into());
    meta.insert("gate".into(), "S (gamma=pi/2, theta=0, phi=0)".into());
    for (k, v) in extra {
        meta.insert((*k).into(), v.clone());
    }
    meta
}

/// Oracle values of the epsilon sweep `-0.1:0.1:41` for SL, PS and DC at `Gamma = FIG13_GAMMA`.
pub fn oracle_sweep_golden(slices: usize) -> Result<Golden> {
    let grid = linspace(-0.1, 0.1, 41);
    let specs = [
        SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate()),
        SchemeSpec::new(SchemeKind::Ps, GateAngles::s_gate()).with_varsigma(1.0),
        SchemeSpec::new(SchemeKind::Dc, GateAngles::s_gate()),
    ];
    let fixed = Fig13Panel::B.setup().2;
    let jobs: Vec<(usize, f64)> = (0..specs.len()).flat_map(|s| grid.iter().map(move |&x| (s, x))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(s, x)| {
            let schedule = build_schedule(&specs[s])?;
            let f = oracle_lindblad_fidelity(&schedule, &SweepAxis::Epsilon.error_at(x, &fixed), slices)?;
            Ok((specs[s].scheme.tag().to_string(), x, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = golden_meta(
        &[
            ("axis", "epsilon".into()),
            ("range", "-0.1:0.1:41".into()),
            ("gamma_minus", format!("{FIG13_GAMMA:e}")),
            ("gamma_z", format!("{FIG13_GAMMA:e}")),
            ("schemes", "sl,ps(varsigma=1),dc".into()),
        ],
        slices,
    );
    Ok(Golden { meta, rows })
}

/// Oracle value of the SL S gate at `Gamma_- = Gamma_z = FIG13_GAMMA`.
pub fn oracle_sl_decoherence_golden(slices: usize) -> Result<Golden> {
    let schedule = build_schedule(&SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate()))?;
    let f = oracle_lindblad_fidelity(&schedule, &ErrorModel::decoherence(FIG13_GAMMA), slices)?;
    let meta = golden_meta(&[("axis", "decoherence".into()), ("schemes", "sl".into())], slices);
    Ok(Golden { meta, rows: vec![("sl".into(), FIG13_GAMMA, f)] })
}

/// Recomputes every golden file with the oracle and writes them into `dir`.
pub fn regenerate_goldens(dir: &Path, slices: usize) -> Result<Vec<std::path::PathBuf>> {
    let mut written = vec![];
    for (name, golden) in [
        (GOLDEN_SL_DECOHERENCE, oracle_sl_decoherence_golden(slices)?),
        (GOLDEN_SWEEP, oracle_sweep_golden(slices)?),
    ] {
        let path = dir.join(name);
        golden.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Default oracle resolution for golden generation.
pub const GOLDEN_SLICES: usize = ORACLE_SLICES;

/// Complex helper for tests and bindings.
pub fn embed_target(schedule: &PulseSchedule) -> ComplexMatrix {
    let sys = &schedule.system;
    let mut m = ComplexMatrix::zeros(sys.dim);
    for (i, &a) in sys.computational_indices.iter().enumerate() {
        for (j, &b) in sys.computational_indices.iter().enumerate() {
            m.set(a, b, schedule.target.get(i, j));
        }
    }
    for k in 0..sys.dim {
        if !sys.computational_indices.contains(&k) {
            m.set(k, k, C64::new(1.0, 0.0));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::pauli;
    use crate::schemes::idle_schedule;

    #[test]
    fn two_design_examples() {
        let comp = [0usize, 1];
        let target = pauli::rotation(1.0, 0.4, 0.3);
        let mut u = ComplexMatrix::identity(3);
        for i in 0..2 {
            for j in 0..2 {
                u.set(i, j, target.get(i, j));
            }
        }
        assert!((unitary_gate_fidelity(&u, &target, &comp) - 1.0).abs() < 1e-14);
        let mut flip = ComplexMatrix::identity(3);
        let x = pauli::sigma_x();
        for i in 0..2 {
            for j in 0..2 {
                flip.set(i, j, x.get(i, j));
            }
        }
        assert!((unitary_gate_fidelity(&flip, &ComplexMatrix::identity(2), &comp) - 1.0 / 3.0).abs() < 1e-14);
        let mut leak = ComplexMatrix::zeros(3);
        leak.set(2, 0, C64::new(1.0, 0.0));
        leak.set(2, 1, C64::new(1.0, 0.0));
        assert_eq!(unitary_gate_fidelity(&leak, &ComplexMatrix::identity(2), &comp), 0.0);
    }

    #[test]
    fn idle_lindblad_fidelity_is_one() {
        let s = idle_schedule(1.0).unwrap();
        assert!((lindblad_gate_fidelity(&s, &ErrorModel::ideal(), 100).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn areas_of_constant_schemes() {
        let area = |spec: SchemeSpec| pulse_area(&build_schedule(&spec).unwrap()).unwrap();
        assert!((area(SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())) - 1.0).abs() < 1e-12);
        assert!((area(SchemeSpec::new(SchemeKind::Dc, GateAngles::s_gate())) - 2.0).abs() < 1e-12);
        let cdd = area(SchemeSpec::new(SchemeKind::Cdd, GateAngles::s_gate()).with_loops(2));
        assert!((cdd - 7f64.sqrt() / 2.0).abs() < 1e-6, "{cdd}");
    }

    #[test]
    fn to_candidates() {
        let c = to_area_candidates(PI / 2.0).unwrap();
        assert!((c[0].1 - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((c[2].1 - 0.433).abs() < 1e-3);
    }

    #[test]
    fn fit_recovers_polynomial() {
        let x = linspace(-0.05, 0.05, 11);
        let f: Vec<f64> = x.iter().map(|e| 1.0 - 1.5 * e * e - 7.0 * e.powi(4)).collect();
        let fit = fit_leading_order(&x, &f).unwrap();
        assert!((fit.c2 - 1.5).abs() < 1e-9 && (fit.c4 - 7.0).abs() < 1e-5, "{fit:?}");
        let flat = vec![1.0; 11];
        let fit = fit_leading_order(&x, &flat).unwrap();
        assert_eq!((fit.c2, fit.c4), (0.0, 0.0));
        assert!(matches!(fit_leading_order(&[0.0, 0.01], &[1.0, 1.0]), Err(NhqcError::IllConditionedFit(_))));
    }

    #[test]
    fn zero_envelope_fit_is_zero() {
        let s = idle_schedule(1.0).unwrap();
        let x = linspace(-0.05, 0.05, 5);
        let f: Vec<f64> = x
            .iter()
            .map(|&e| {
                let u = final_unitary(&s, &ErrorModel::rabi(e), 100).unwrap();
                trace_overlap_fidelity(&u, &s.target, &s.system.computational_indices)
            })
            .collect();
        let fit = fit_leading_order(&x, &f).unwrap();
        assert!(fit.c2.abs() < 1e-12 && fit.c4.abs() < 1e-8);
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("-0.1:0.1:41").unwrap().len(), 41);
        assert!(parse_range("0.1:-0.1:5").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:1").is_err());
        assert!(parse_range("a:1:3").is_err());
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let specs = [SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())];
        let opts = EvalOptions::default();
        assert!(sweep(&specs, SweepAxis::Epsilon, &[], &ErrorModel::ideal(), &opts).is_err());
        assert!(sweep(&specs, SweepAxis::Epsilon, &[0.1, 0.0], &ErrorModel::ideal(), &opts).is_err());
    }

    #[test]
    fn golden_round_trip() {
        let g = Golden {
            meta: golden_meta(&[("axis", "epsilon".into())], 10),
            rows: vec![("sl".into(), -0.1, 0.987654321012345), ("dc".into(), 0.05, 1.0)],
        };
        let back = Golden::parse(&g.to_csv()).unwrap();
        assert_eq!(back.meta, g.meta);
        assert_eq!(back.rows.len(), 2);
        assert!((back.rows[0].2 - 0.987654321012345).abs() < 1e-15);
        assert!(Golden::parse("scheme,x\n").is_err());
    }

    #[test]
    fn oracle_fidelity_matches_rk4() {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())).unwrap();
        let err = ErrorModel::new(0.05, 0.0, FIG13_GAMMA, FIG13_GAMMA).unwrap();
        let a = lindblad_gate_fidelity(&s, &err, 4000).unwrap();
        let b = oracle_lindblad_fidelity(&s, &err, 1000).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
}
