//! Acceptance report: prints one PASS/FAIL line per criterion.
//!
//! The process exits 0 once every criterion has been evaluated and reported. Set
//! `NHQC_ACCEPTANCE_STRICT=1` to turn any FAIL into a non-zero exit status.

use nhqc::bench::{
    area_table, benchmark_specs, fit_sweep, fit_leading_order, linspace, peak_excited_population_axial,
    ps_excitation_deficit, sweep, unitary_gate_fidelity, EvalOptions, Fig13Panel, FidelityMetric, SweepAxis,
    SweepResult,
};
use nhqc::cli::{sweep_csv, UnitMode};
use nhqc::dynamics::{final_unitary, oracle_propagator, propagate_unitary, rk4_oracle_defect, ORACLE_SLICES};
use nhqc::error::Result;
use nhqc::holonomy::{condition_residuals, gauge_transform, natural_frame, schedule_grid, to_phase_ratio};
use nhqc::holonomy::{frame_connection, holonomy_reconstruct};
use nhqc::numkit::{basis_state, c, cis, phase_aligned_distance, ComplexMatrix, StateVector};
use nhqc::schemes::{brachistochrone_tau, build_schedule, default_dfs_pulse, DFS_AREA};
use nhqc::system::{Coupling, ErrorModel, GateAngles, PulseSchedule, SchemeKind, SchemeSpec};
use std::f64::consts::PI;
use std::time::Instant;

const SAMPLES: usize = 2000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn catalog_specs() -> Vec<SchemeSpec> {
    let generic = GateAngles::new(1.2, 0.7, 2.0).unwrap();
    vec![
        SchemeSpec::new(SchemeKind::Sl, generic),
        SchemeSpec::new(SchemeKind::Ss, GateAngles::s_gate()),
        SchemeSpec::new(SchemeKind::Ps, generic).with_varsigma(1.0),
        SchemeSpec::new(SchemeKind::C, GateAngles::hadamard()).with_loops(2),
        SchemeSpec::new(SchemeKind::Dc, GateAngles::not_gate()),
        SchemeSpec::new(SchemeKind::To, GateAngles::new(2.0, 1.0, 0.5).unwrap()),
        SchemeSpec::new(SchemeKind::S, GateAngles::new(1.0, 0.4, 4.0).unwrap()),
        SchemeSpec::new(SchemeKind::Cdd, GateAngles::new(PI / 2.0, 0.3, 1.1).unwrap()).with_loops(2),
        SchemeSpec::new(SchemeKind::Sta, GateAngles::s_gate()),
        SchemeSpec::new(SchemeKind::Dfs3, GateAngles::s_gate()),
    ]
}

fn criterion_1() -> Result<Outcome> {
    let reference = [
        (SchemeKind::Sl, 1.00, 0.02),
        (SchemeKind::Ps, 2.16, 0.05),
        (SchemeKind::C, 2.00, 0.02),
        (SchemeKind::Dc, 2.00, 0.02),
        (SchemeKind::S, 0.87, 0.02),
        (SchemeKind::Cdd, 1.32, 0.02),
    ];
    let rows = area_table()?;
    let mut pass = true;
    let mut parts = vec![];
    for (kind, want, tol) in reference {
        let row = rows.iter().find(|r| r.label == kind.label()).expect("row present");
        let ok = (row.area_pi - want).abs() <= tol;
        pass &= ok;
        parts.push(format!("{}={:.3}pi", kind.tag(), row.area_pi));
    }
    let mut worst = 0.0f64;
    for gamma in [PI / 4.0, PI / 2.0, PI] {
        for omega0 in [1.0, 2.0] {
            let closed = 2.0 * (PI * PI - (PI - gamma).powi(2)).sqrt() / omega0;
            worst = worst.max((brachistochrone_tau(gamma, omega0)? - closed).abs());
        }
        let schedule = build_schedule(&SchemeSpec::new(SchemeKind::To, GateAngles::new(gamma, 0.0, 0.0)?))?;
        let closed = (PI * PI - (PI - gamma).powi(2)).sqrt();
        worst = worst.max((schedule.total_duration() - closed).abs());
        let u = final_unitary(&schedule, &ErrorModel::ideal(), SAMPLES)?;
        let inf = 1.0 - unitary_gate_fidelity(&u, &schedule.target, &schedule.system.computational_indices);
        pass &= inf < 1e-6;
    }
    pass &= worst < 1e-12;
    outcome(pass, format!("{}; TO tau closed-form max error {worst:.1e}", parts.join(" ")))
}

fn criterion_2() -> Result<Outcome> {
    let mut worst_rk4 = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut worst_name = String::new();
    for spec in catalog_specs() {
        let s = build_schedule(&spec)?;
        let comp = &s.system.computational_indices;
        let rk4 = 1.0 - unitary_gate_fidelity(&final_unitary(&s, &ErrorModel::ideal(), SAMPLES)?, &s.target, comp);
        let oracle = 1.0 - unitary_gate_fidelity(&oracle_propagator(&s, &ErrorModel::ideal(), ORACLE_SLICES)?, &s.target, comp);
        if rk4.max(oracle) > worst_rk4.max(worst_oracle) {
            worst_name = spec.scheme.tag().into();
        }
        worst_rk4 = worst_rk4.max(rk4);
        worst_oracle = worst_oracle.max(oracle);
    }
    outcome(
        worst_rk4 < 1e-6 && worst_oracle < 1e-6,
        format!("10 schemes; max infidelity rk4 {worst_rk4:.1e}, oracle {worst_oracle:.1e} (worst: {worst_name})"),
    )
}

fn criterion_3() -> Result<Outcome> {
    let ideal = ErrorModel::ideal();
    let mut pass = true;
    let mut reds = vec![];
    let mut worst_cyclic = 0.0f64;
    for spec in benchmark_specs(GateAngles::s_gate()) {
        if !spec.scheme.is_conventional() {
            continue;
        }
        let s = build_schedule(&spec)?;
        let r = condition_residuals(&s, &ideal, &schedule_grid(&s, SAMPLES)?)?;
        worst_cyclic = worst_cyclic.max(r.cyclic);
        pass &= r.cyclic < 1e-7;
        if r.parallel >= 1e-6 {
            pass = false;
            reds.push(format!(
                "{} parallel {:.2e} (cumulative dynamical phase {:.1e})",
                spec.scheme.tag(),
                r.parallel,
                r.cumulative_dynamical
            ));
        }
    }
    let to = build_schedule(&SchemeSpec::new(SchemeKind::To, GateAngles::s_gate()))?;
    let ratio = to_phase_ratio(&to, 4000)?;
    pass &= ratio.max_relative_deviation < 1e-3;

    let mut gauge = 0.0f64;
    for kind in [SchemeKind::Ps, SchemeKind::S] {
        let s = build_schedule(&SchemeSpec::new(kind, GateAngles::new(1.3, 0.8, 2.2)?))?;
        let frame = natural_frame(&s)?;
        let g = ComplexMatrix::from_row_slice(2, &[c(0.4, 0.0), c(0.3, -0.7), c(0.3, 0.7), c(-0.9, 0.0)])?;
        let moved = gauge_transform(&frame, &g)?;
        let grid = schedule_grid(&s, 3000)?;
        let h0 = holonomy_reconstruct(&frame_connection(&frame, &s, &grid)?, &grid)?;
        let h1 = holonomy_reconstruct(&frame_connection(&moved, &s, &grid)?, &grid)?;
        gauge = gauge.max(phase_aligned_distance(&h0, &h1));
    }
    pass &= gauge < 1e-5;

    let mut detail = format!(
        "cyclic max {worst_cyclic:.1e}; TO ratio {:.4} (deviation {:.1e}); gauge covariance {gauge:.1e}",
        ratio.final_ratio, ratio.max_relative_deviation
    );
    if !reds.is_empty() {
        detail.push_str(&format!(
            "; pointwise parallel transport violated: {}. PS as designed has <psi|H|psi> = -(f_dot/2) sin^2 chi on \
             the coupled trajectory, cancelling between the two halves; DC's inserted pi/2-phase segments \
             likewise carry a dynamical phase that cancels over the sequence, so only the integrated condition holds",
            reds.join(", ")
        ));
    }
    outcome(pass, detail)
}

fn criterion_4() -> Result<Outcome> {
    let specs = [
        SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate()),
        SchemeSpec::new(SchemeKind::Dc, GateAngles::s_gate()),
    ];
    let opts = EvalOptions::default().with_metric(FidelityMetric::TraceOverlap);
    let result = sweep(&specs, SweepAxis::Epsilon, &linspace(-0.05, 0.05, 21), &ErrorModel::ideal(), &opts)?;
    let sl = fit_sweep(&result, 0)?;
    let dc = fit_sweep(&result, 1)?;
    let pass = (sl.c2 - 1.2337).abs() <= 0.1 * 1.2337 && dc.c2.abs() < 0.05 && (dc.c4 - 3.044).abs() <= 0.15 * 3.044;
    outcome(pass, format!("SL c2={:.4}; DC c2={:.1e} c4={:.3} (trace-overlap metric)", sl.c2, dc.c2, dc.c4))
}

fn criterion_5() -> Result<Outcome> {
    let eps = linspace(-0.05, 0.05, 11);
    let coefficient = |varsigma: f64| -> Result<f64> {
        let f = eps.iter().map(|&e| ps_excitation_deficit(varsigma, e, SAMPLES).map(|d| 1.0 - d)).collect::<Result<Vec<_>>>()?;
        Ok(fit_leading_order(&eps, &f)?.c2)
    };
    let (one, two, fifth) = (coefficient(1.0)?, coefficient(2.0)?, coefficient(0.2)?);
    let pass = one.abs() < 0.02 && two.abs() < 0.02 && fifth > 0.02;
    outcome(pass, format!("eps^2 coefficient: varsigma=1 {one:.1e}, varsigma=2 {two:.1e}, varsigma=1/5 {fifth:.3}"))
}

fn fig13_panels() -> Result<Vec<(Fig13Panel, SweepResult)>> {
    let specs = benchmark_specs(GateAngles::s_gate());
    [Fig13Panel::A, Fig13Panel::B, Fig13Panel::C]
        .into_iter()
        .map(|p| {
            let (axis, grid, fixed) = p.setup();
            Ok((p, sweep(&specs, axis, &grid, &fixed, &EvalOptions::default())?))
        })
        .collect()
}

fn fidelities_at(result: &SweepResult, x: f64) -> Vec<(SchemeKind, f64)> {
    let j = result
        .grid
        .iter()
        .position(|g| (g - x).abs() < 1e-12)
        .expect("grid point present");
    result.schemes.iter().zip(&result.reports).map(|(s, r)| (s.scheme, r[j].fidelity)).collect()
}

fn criterion_6(panels: &[(Fig13Panel, SweepResult)]) -> Result<Outcome> {
    let get = |v: &[(SchemeKind, f64)], k: SchemeKind| v.iter().find(|(s, _)| *s == k).expect("scheme").1;
    let a = fidelities_at(&panels[0].1, 3.0e-4);
    let b = fidelities_at(&panels[1].1, 0.1);
    let cc = fidelities_at(&panels[2].1, 0.1);
    let sl = |v: &[(SchemeKind, f64)]| get(v, SchemeKind::Sl);
    let b_ok = [SchemeKind::Ps, SchemeKind::Dc, SchemeKind::C].iter().all(|&k| get(&b, k) > sl(&b));
    let cdd_max = cc.iter().all(|&(k, f)| k == SchemeKind::Cdd || f < get(&cc, SchemeKind::Cdd));
    let c_ok = get(&cc, SchemeKind::Cdd) > sl(&cc) && cdd_max;
    let a_ok = [SchemeKind::To, SchemeKind::S, SchemeKind::Cdd].iter().all(|&k| get(&a, k) > sl(&a));
    let fmt = |v: &[(SchemeKind, f64)]| v.iter().map(|(k, f)| format!("{}={f:.5}", k.tag())).collect::<Vec<_>>().join(" ");
    outcome(a_ok && b_ok && c_ok, format!("(a) {} | (b) {} | (c) {}", fmt(&a), fmt(&b), fmt(&cc)))
}

fn criterion_7() -> Result<Outcome> {
    let ideal = ErrorModel::ideal();
    let s = build_schedule(&SchemeSpec::new(SchemeKind::S, GateAngles::s_gate()))?;
    let cdd = build_schedule(&SchemeSpec::new(SchemeKind::Cdd, GateAngles::s_gate()).with_loops(2))?;
    let ps = peak_excited_population_axial(&s, &ideal, SAMPLES)?;
    let pc = peak_excited_population_axial(&cdd, &ideal, SAMPLES)?;
    outcome(pc < ps, format!("peak excited population CDD(N=2) {pc:.4} < S {ps:.4}"))
}

fn criterion_8() -> Result<Outcome> {
    let s = build_schedule(&SchemeSpec::new(SchemeKind::Dfs3, GateAngles::s_gate()))?;
    let (shape, duration) = default_dfs_pulse();
    let area_err = (shape.integral(duration) - DFS_AREA).abs();
    let u = final_unitary(&s, &ErrorModel::ideal(), SAMPLES)?;
    let comp = &s.system.computational_indices;
    let leakage = comp
        .iter()
        .map(|&j| 1.0 - comp.iter().map(|&i| u.get(i, j).norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let r = condition_residuals(&s, &ErrorModel::ideal(), &schedule_grid(&s, SAMPLES)?)?;
    let pass = area_err < 1e-6 && leakage < 1e-8 && r.cyclic < 1e-7 && r.parallel < 1e-8;
    outcome(
        pass,
        format!("area error {area_err:.1e}; leakage {leakage:.1e}; cyclic {:.1e}; parallel {:.1e}", r.cyclic, r.parallel),
    )
}

fn tripod_dark_state(schedule: &PulseSchedule, t: f64) -> Result<StateVector> {
    let (k, local) = schedule.locate(t)?;
    let Coupling::Tripod { theta, phi } = &schedule.segments[k].coupling else {
        unreachable!("tripod schedule")
    };
    let (th, ph) = (theta.value(local), phi.value(local));
    let mut d = StateVector::zeros(schedule.system.dim);
    d[1] = c((th / 2.0).cos(), 0.0);
    d[2] = cis(ph) * (th / 2.0).sin();
    Ok(d)
}

fn criterion_9() -> Result<Outcome> {
    let s = build_schedule(&SchemeSpec::new(SchemeKind::Sta, GateAngles::s_gate()))?;
    let traj = propagate_unitary(&s, &ErrorModel::ideal(), 4000)?;
    let one = basis_state(s.system.dim, 1);
    let mut min_overlap = 1.0f64;
    for (t, u) in traj.times.iter().zip(&traj.operators) {
        let d = tripod_dark_state(&s, *t)?;
        min_overlap = min_overlap.min(d.dotc(&u.apply(&one)).norm());
    }
    let u = traj.final_operator();
    let comp = &s.system.computational_indices;
    let leakage = comp
        .iter()
        .map(|&j| (0..s.system.dim).filter(|&i| i != j).map(|i| u.get(i, j).norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let phase_err = 1.0 - unitary_gate_fidelity(u, &s.target, comp);
    let pass = min_overlap > 0.999 && leakage < 1e-6 && phase_err < 1e-6;
    outcome(
        pass,
        format!(
            "tau={:.4}; min dark overlap {min_overlap:.6}; off-diagonal leakage {leakage:.1e}; gate infidelity {phase_err:.1e}",
            s.total_duration()
        ),
    )
}

fn criterion_10(panels: &[(Fig13Panel, SweepResult)]) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for spec in catalog_specs() {
        let s = build_schedule(&spec)?;
        worst = worst.max(rk4_oracle_defect(&s, &ErrorModel::ideal(), SAMPLES, ORACLE_SLICES)?);
    }
    let points: usize = panels.iter().map(|(_, r)| r.reports.iter().map(Vec::len).sum::<usize>()).sum();
    let bounded = panels.iter().all(|(_, r)| {
        r.reports.iter().flatten().all(|g| {
            (-1e-9..=1.0 + 1e-9).contains(&g.fidelity) && (0.0..=1.0 + 1e-9).contains(&g.peak_excited_population)
        })
    });
    let rerun = fig13_panels()?;
    let identical = panels
        .iter()
        .zip(&rerun)
        .all(|((_, a), (_, b))| sweep_csv(a, UnitMode::Physical) == sweep_csv(b, UnitMode::Physical));
    outcome(
        worst < 1e-7 && bounded && identical,
        format!(
            "rk4-oracle defect max {worst:.1e}; {points} Lindblad grid points x 6 inputs with trace/Hermiticity/positivity checked every step; reruns byte-identical: {identical}"
        ),
    )
}

fn report(n: usize, started: Instant, result: Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match result {
        Ok(o) => {
            println!("{} criterion {n}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("FAIL criterion {n}: error: {e} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut passed = 0;
    let mut run = |n: usize, f: &dyn Fn() -> Result<Outcome>| {
        let t = Instant::now();
        if report(n, t, f()) {
            passed += 1;
        }
    };
    run(1, &criterion_1);
    run(2, &criterion_2);
    run(3, &criterion_3);
    run(4, &criterion_4);
    run(5, &criterion_5);
    let t = Instant::now();
    let panels = fig13_panels();
    match &panels {
        Ok(p) => {
            run(6, &|| criterion_6(p));
            run(7, &criterion_7);
            run(8, &criterion_8);
            run(9, &criterion_9);
            run(10, &|| criterion_10(p));
        }
        Err(e) => {
            println!("FAIL criterion 6: benchmark sweep failed: {e} [{:.1}s]", t.elapsed().as_secs_f64());
            run(7, &criterion_7);
            run(8, &criterion_8);
            run(9, &criterion_9);
            println!("FAIL criterion 10: benchmark sweep failed: {e}");
        }
    }
    println!("acceptance: {passed}/10 criteria pass");
    let strict = std::env::var("NHQC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < 10 {
        std::process::exit(1);
    }
}
