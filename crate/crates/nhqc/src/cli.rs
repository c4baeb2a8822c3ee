//! Command-line front end.
//!
//! Every data file is a CSV table preceded by `#` metadata lines naming the fidelity
//! metric, the sample counts and the unit mode. Output is fully deterministic.

use crate::bench::{
    area_table, benchmark_specs, evaluate_schedule, golden_dir, parse_range, regenerate_goldens, sweep, EvalOptions,
    Fig13Panel, FidelityMetric, GateReport, SweepAxis, SweepResult, FIG13_GAMMA, GOLDEN_SLICES,
};
use crate::dynamics::{
    final_density, leak_level, propagate_lindblad, propagate_unitary, pure_density, rk4_oracle_defect,
    DEFAULT_LINDBLAD_SAMPLES, DEFAULT_UNITARY_SAMPLES, ORACLE_SLICES,
};
use crate::error::{NhqcError, Result};
use crate::holonomy::{condition_residuals, natural_frame, reconstruction_defect, schedule_grid, to_phase_ratio};
use crate::schemes::build_schedule;
use crate::system::{ErrorModel, GateAngles, SchemeKind, SchemeSpec, OMEGA_BAR_PHYSICAL};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const GATE_OPTIONS: &str = "S, T, sqrtH, NOT, H, custom:gamma,theta,phi";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    /// `Omega_bar = 1`: times in `1/Omega_bar`, rates in `Omega_bar`.
    #[default]
    Dimensionless,
    /// `Omega_bar = 2 pi x 10 MHz`: times in seconds, rates in rad/s.
    Physical,
}

impl UnitMode {
    fn describe(&self) -> &'static str {
        match self {
            UnitMode::Dimensionless => "dimensionless (Omega_bar = 1; time in 1/Omega_bar, rates in Omega_bar)",
            UnitMode::Physical => "physical (Omega_bar = 2pi x 10 MHz; time in s, rates in rad/s)",
        }
    }

    fn rate_in(&self, x: f64) -> f64 {
        match self {
            UnitMode::Dimensionless => x,
            UnitMode::Physical => x / OMEGA_BAR_PHYSICAL,
        }
    }

    fn rate_out(&self, x: f64) -> f64 {
        match self {
            UnitMode::Dimensionless => x,
            UnitMode::Physical => x * OMEGA_BAR_PHYSICAL,
        }
    }

    fn time_out(&self, t: f64) -> f64 {
        match self {
            UnitMode::Dimensionless => t,
            UnitMode::Physical => t / OMEGA_BAR_PHYSICAL,
        }
    }
}

/// Run configuration. Loaded from a JSON file and then overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Option<String>,
    pub schemes: Option<Vec<String>>,
    pub gate: Option<String>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub gamma_z: Option<f64>,
    pub axis: Option<String>,
    pub range: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub unitary_samples: Option<usize>,
    pub lindblad_samples: Option<usize>,
    pub metric: Option<String>,
    pub units: Option<UnitMode>,
    pub loops: Option<usize>,
    pub varsigma: Option<f64>,
    pub json: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| NhqcError::InvalidParameter(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merged(self, other: RunConfig) -> RunConfig {
        RunConfig {
            scheme: other.scheme.or(self.scheme),
            schemes: other.schemes.or(self.schemes),
            gate: other.gate.or(self.gate),
            epsilon: other.epsilon.or(self.epsilon),
            eta: other.eta.or(self.eta),
            gamma_minus: other.gamma_minus.or(self.gamma_minus),
            gamma_z: other.gamma_z.or(self.gamma_z),
            axis: other.axis.or(self.axis),
            range: other.range.or(self.range),
            out_dir: other.out_dir.or(self.out_dir),
            unitary_samples: other.unitary_samples.or(self.unitary_samples),
            lindblad_samples: other.lindblad_samples.or(self.lindblad_samples),
            metric: other.metric.or(self.metric),
            units: other.units.or(self.units),
            loops: other.loops.or(self.loops),
            varsigma: other.varsigma.or(self.varsigma),
            json: other.json.or(self.json),
        }
    }

    fn units(&self) -> UnitMode {
        self.units.unwrap_or_default()
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("nhqc-out"))
    }

    fn options(&self) -> Result<EvalOptions> {
        let mut opts = EvalOptions::default();
        if let Some(n) = self.unitary_samples {
            opts.unitary_samples = n;
        }
        if let Some(n) = self.lindblad_samples {
            opts.lindblad_samples = n;
        }
        if opts.unitary_samples == 0 || opts.lindblad_samples == 0 {
            return Err(NhqcError::InvalidParameter("sample counts must be positive".into()));
        }
        if let Some(m) = &self.metric {
            opts.metric = FidelityMetric::from_tag(m)?;
        }
        Ok(opts)
    }

    fn angles(&self) -> Result<GateAngles> {
        parse_gate(self.gate.as_deref().unwrap_or("S"))
    }

    fn spec_for(&self, tag: &str) -> Result<SchemeSpec> {
        let kind = SchemeKind::from_tag(tag.trim())?;
        let mut spec = SchemeSpec::new(kind, self.angles()?);
        if matches!(kind, SchemeKind::C | SchemeKind::Cdd) {
            spec = spec.with_loops(self.loops.unwrap_or(2));
        }
        if let Some(v) = self.varsigma {
            spec = spec.with_varsigma(v);
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Error model with rates converted from the selected unit mode.
    fn error_model(&self, default_gamma: f64) -> Result<ErrorModel> {
        let u = self.units();
        ErrorModel::new(
            self.epsilon.unwrap_or(0.0),
            u.rate_in(self.eta.unwrap_or(0.0)),
            self.gamma_minus.map(|g| u.rate_in(g)).unwrap_or(default_gamma),
            self.gamma_z.map(|g| u.rate_in(g)).unwrap_or(default_gamma),
        )
    }
}

/// Parses a gate name or `custom:gamma,theta,phi`.
pub fn parse_gate(text: &str) -> Result<GateAngles> {
    let bad = || NhqcError::InvalidParameter(format!("unknown gate '{text}'; valid gates: {GATE_OPTIONS}"));
    match text {
        "S" | "s" => Ok(GateAngles::s_gate()),
        "T" | "t" => Ok(GateAngles::t_gate()),
        "NOT" | "not" | "X" | "x" => Ok(GateAngles::not_gate()),
        "H" | "h" => Ok(GateAngles::hadamard()),
        "sqrtH" | "sqrth" => Ok(GateAngles::sqrt_hadamard()),
        other => {
            let body = other.strip_prefix("custom:").ok_or_else(bad)?;
            let vals: Vec<f64> = body
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if vals.len() != 3 {
                return Err(bad());
            }
            GateAngles::new(vals[0], vals[1], vals[2])
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nhqc", version, about = "Nonadiabatic holonomic gate simulator and robustness benchmark")]
pub struct Cli {
    /// JSON run configuration; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for data files
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Unit mode for inputs and outputs
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitMode>,

    /// RK4 steps for unitary runs (default 2000, or NHQC_SAMPLES)
    #[arg(long, global = true)]
    pub unitary_samples: Option<usize>,

    /// RK4 steps for Lindblad runs (default 4000, or NHQC_SAMPLES)
    #[arg(long, global = true)]
    pub lindblad_samples: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct ErrorArgs {
    /// Fractional Rabi-amplitude error
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Detuning error of the excited level
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Decay rate of the combined lowering channel
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_minus: Option<f64>,
    /// Dephasing rate
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_z: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Propagate one scheme and print its gate report
    Simulate {
        #[arg(long)]
        scheme: Option<String>,
        /// S, T, sqrtH, NOT, H or custom:gamma,theta,phi
        #[arg(long)]
        gate: Option<String>,
        #[command(flatten)]
        errors: ErrorArgs,
        /// two-design, trace-overlap or axial-lindblad
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        loops: Option<usize>,
        #[arg(long)]
        varsigma: Option<f64>,
        /// Print the report as JSON instead of key=value lines
        #[arg(long)]
        json: bool,
    },
    /// Sweep one error parameter over several schemes
    Sweep {
        /// epsilon, eta or decoherence
        #[arg(long)]
        axis: Option<String>,
        /// a:b:n
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        /// Comma-separated scheme tags
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long)]
        gate: Option<String>,
        #[command(flatten)]
        errors: ErrorArgs,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Pulse areas of every catalog scheme next to the tabulated values
    Table1,
    /// Robustness comparison data: a (decoherence), b (Rabi error), c (detuning error)
    Fig13 {
        panel: String,
    },
    /// Condition residuals, oracle defect and holonomy reconstruction for one scheme
    Check {
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        gate: Option<String>,
    },
    /// Recompute golden files with the oracle propagator
    Goldens {
        #[arg(long)]
        regenerate: bool,
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        slices: Option<usize>,
    },
}

fn exit_code(err: &NhqcError) -> i32 {
    match err {
        NhqcError::UnknownScheme(_) | NhqcError::InvalidParameter(_) | NhqcError::InvalidGrid(_) => EXIT_USAGE,
        NhqcError::Io(_) | NhqcError::Golden(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name) and runs the command, writing the
/// human-readable result to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(file.merged(RunConfig {
        out_dir: cli.out.clone(),
        units: cli.units,
        unitary_samples: cli.unitary_samples,
        lindblad_samples: cli.lindblad_samples,
        ..RunConfig::default()
    }))
}

fn with_errors(cfg: RunConfig, e: &ErrorArgs) -> RunConfig {
    cfg.merged(RunConfig {
        epsilon: e.epsilon,
        eta: e.eta,
        gamma_minus: e.gamma_minus,
        gamma_z: e.gamma_z,
        ..RunConfig::default()
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = base_config(&cli)?;
    match &cli.command {
        Command::Simulate { scheme, gate, errors, metric, loops, varsigma, json } => {
            let cfg = with_errors(cfg, errors).merged(RunConfig {
                scheme: scheme.clone(),
                gate: gate.clone(),
                metric: metric.clone(),
                loops: *loops,
                varsigma: *varsigma,
                json: if *json { Some(true) } else { None },
                ..RunConfig::default()
            });
            simulate(&cfg, out)
        }
        Command::Sweep { axis, range, schemes, gate, errors, metric } => {
            let cfg = with_errors(cfg, errors).merged(RunConfig {
                axis: axis.clone(),
                range: range.clone(),
                schemes: schemes.clone(),
                gate: gate.clone(),
                metric: metric.clone(),
                ..RunConfig::default()
            });
            run_sweep(&cfg, out)
        }
        Command::Table1 => table1(&cfg, out),
        Command::Fig13 { panel } => fig13(&cfg, Fig13Panel::from_tag(panel)?, out),
        Command::Check { scheme, gate } => {
            let cfg = cfg.merged(RunConfig { scheme: scheme.clone(), gate: gate.clone(), ..RunConfig::default() });
            check(&cfg, out)
        }
        Command::Goldens { regenerate, dir, slices } => {
            if !regenerate {
                return Err(NhqcError::InvalidParameter("goldens: pass --regenerate to rewrite the golden files".into()));
            }
            let dir = dir.clone().unwrap_or_else(golden_dir);
            for path in regenerate_goldens(&dir, slices.unwrap_or(GOLDEN_SLICES))? {
                writeln!(out, "wrote {}", path.display())?;
            }
            Ok(())
        }
    }
}

fn header(metric: &str, opts: &EvalOptions, units: UnitMode, extra: &[(&str, String)]) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# metric: {metric}");
    let _ = writeln!(h, "# samples: unitary={} lindblad={}", opts.unitary_samples, opts.lindblad_samples);
    let _ = writeln!(h, "# units: {}", units.describe());
    for (k, v) in extra {
        let _ = writeln!(h, "# {k}: {v}");
    }
    h
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    Ok(path)
}

fn format_error_model(err: &ErrorModel, units: UnitMode) -> String {
    format!(
        "epsilon={} eta={:e} gamma_minus={:e} gamma_z={:e}",
        err.epsilon,
        units.rate_out(err.eta),
        units.rate_out(err.gamma_minus),
        units.rate_out(err.gamma_z)
    )
}

fn report_lines(r: &GateReport, units: UnitMode) -> String {
    format!(
        "scheme={}\nfidelity={:.6}\npulse_area_pi={:.3}\npeak_excited_population={:.6}\ncyclic_residual={:.3e}\nparallel_residual={:.3e}\nduration={:.6e}\n",
        r.scheme_label,
        r.fidelity,
        r.pulse_area,
        r.peak_excited_population,
        r.cyclic_residual,
        r.parallel_residual,
        units.time_out(r.duration)
    )
}

fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let tag = cfg.scheme.clone().ok_or_else(|| NhqcError::InvalidParameter("simulate needs --scheme".into()))?;
    let spec = cfg.spec_for(&tag)?;
    let err = cfg.error_model(0.0)?;
    let mut opts = cfg.options()?;
    if cfg.metric.is_none() && err.is_closed() {
        opts.metric = FidelityMetric::TwoDesign;
    }
    let units = cfg.units();
    let schedule = build_schedule(&spec)?;
    let report = evaluate_schedule(&schedule, &err, &opts)?;

    let mut traj = String::new();
    let e = leak_level(&schedule.system);
    if err.is_closed() {
        let t = propagate_unitary(&schedule, &err, opts.unitary_samples)?;
        traj.push_str(&header(
            opts.metric.describe(),
            &opts,
            units,
            &[
                ("scheme", schedule.scheme_label.clone()),
                ("errors", format_error_model(&err, units)),
                ("columns", "excited_population is sum_k |U_(e,k)|^2 over computational k".into()),
            ],
        ));
        traj.push_str("t,excited_population\n");
        for (time, p) in t.times.iter().zip(&t.excited_population) {
            let _ = writeln!(traj, "{:.9e},{:.12e}", units.time_out(*time), p);
        }
    } else {
        let input = crate::dynamics::axial_states()[2];
        let rho0 = pure_density(&schedule.system.embed(&input));
        let t = propagate_lindblad(&schedule, &err, &rho0, opts.lindblad_samples)?;
        traj.push_str(&header(
            opts.metric.describe(),
            &opts,
            units,
            &[
                ("scheme", schedule.scheme_label.clone()),
                ("errors", format_error_model(&err, units)),
                ("columns", format!("excited_population is <{e}|rho|{e}> for input |+x>")),
            ],
        ));
        traj.push_str("t,excited_population,trace\n");
        for ((time, p), rho) in t.times.iter().zip(&t.excited_population).zip(&t.operators) {
            let _ = writeln!(traj, "{:.9e},{:.12e},{:.12e}", units.time_out(*time), p, rho.trace().re);
        }
    }
    let path = write_file(&cfg.out_dir(), &format!("trajectory_{}.csv", spec.scheme.tag()), &traj)?;

    if cfg.json.unwrap_or(false) {
        let v = serde_json::json!({
            "report": report,
            "metric": opts.metric.tag(),
            "units": units,
            "trajectory_file": path.display().to_string(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(|e| NhqcError::Io(e.to_string()))?)?;
    } else {
        write!(out, "{}", report_lines(&report, units))?;
        writeln!(out, "metric={}", opts.metric.tag())?;
        writeln!(out, "trajectory_file={}", path.display())?;
    }
    Ok(())
}

/// CSV body of a sweep: one row per `(scheme, grid point)`.
pub fn sweep_csv(result: &SweepResult, units: UnitMode) -> String {
    let axis_value = |x: f64| match result.axis {
        SweepAxis::Epsilon => x,
        _ => units.rate_out(x),
    };
    let mut s = header(
        result.options.metric.describe(),
        &result.options,
        units,
        &[
            ("axis", result.axis.tag().into()),
            ("fixed", format_error_model(&result.fixed, units)),
        ],
    );
    s.push_str("scheme,x,fidelity,peak_excited_population,pulse_area_pi,cyclic_residual,parallel_residual,duration\n");
    for (spec, reports) in result.schemes.iter().zip(&result.reports) {
        for (x, r) in result.grid.iter().zip(reports) {
            let _ = writeln!(
                s,
                "{},{:.6},{:.12},{:.9},{:.6},{:.3e},{:.3e},{:.9e}",
                spec.scheme.tag(),
                axis_value(*x),
                r.fidelity,
                r.peak_excited_population,
                r.pulse_area,
                r.cyclic_residual,
                r.parallel_residual,
                units.time_out(r.duration)
            );
        }
    }
    s
}

fn run_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let axis = SweepAxis::from_tag(cfg.axis.as_deref().ok_or_else(|| NhqcError::InvalidParameter("sweep needs --axis".into()))?)?;
    let grid = parse_range(cfg.range.as_deref().ok_or_else(|| NhqcError::InvalidParameter("sweep needs --range".into()))?)?;
    let grid: Vec<f64> = if axis == SweepAxis::Epsilon { grid } else { grid.into_iter().map(|x| cfg.units().rate_in(x)).collect() };
    let tags = cfg.schemes.clone().ok_or_else(|| NhqcError::InvalidParameter("sweep needs --schemes".into()))?;
    let specs: Vec<SchemeSpec> = tags.iter().map(|t| cfg.spec_for(t)).collect::<Result<_>>()?;
    let fixed = cfg.error_model(FIG13_GAMMA)?;
    let opts = cfg.options()?;
    let result = sweep(&specs, axis, &grid, &fixed, &opts)?;
    let path = write_file(&cfg.out_dir(), &format!("sweep_{}.csv", axis.tag()), &sweep_csv(&result, cfg.units()))?;
    writeln!(out, "rows={}", result.reports.iter().map(|r| r.len()).sum::<usize>())?;
    writeln!(out, "file={}", path.display())?;
    Ok(())
}

fn table1(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let rows = area_table()?;
    let mut csv = header(
        "none (pulse areas)",
        &cfg.options()?,
        cfg.units(),
        &[("area", "int Omega(t) dt in multiples of pi".into())],
    );
    csv.push_str("scheme,area_pi,reference,note\n");
    for r in &rows {
        let reference = r.reference_pi.map(|p| format!("{p:.2}")).unwrap_or_else(|| "-".into());
        writeln!(out, "{}, area_pi={:.3}, reference={}", r.label, r.area_pi, reference)?;
        let _ = writeln!(csv, "{},{:.6},{},\"{}\"", r.label, r.area_pi, reference, r.note);
    }
    write_file(&cfg.out_dir(), "table1.csv", &csv)?;
    Ok(())
}

fn fig13(cfg: &RunConfig, panel: Fig13Panel, out: &mut dyn Write) -> Result<()> {
    let (axis, grid, fixed) = panel.setup();
    let specs = benchmark_specs(cfg.angles()?);
    let result = sweep(&specs, axis, &grid, &fixed, &cfg.options()?)?;
    let path = write_file(&cfg.out_dir(), &format!("fig13_{}.csv", panel.tag()), &sweep_csv(&result, cfg.units()))?;
    writeln!(out, "rows={}", specs.len() * grid.len())?;
    writeln!(out, "file={}", path.display())?;
    Ok(())
}

fn check(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let tag = cfg.scheme.clone().ok_or_else(|| NhqcError::InvalidParameter("check needs --scheme".into()))?;
    let spec = cfg.spec_for(&tag)?;
    let opts = cfg.options()?;
    let schedule = build_schedule(&spec)?;
    let ideal = ErrorModel::ideal();
    let res = condition_residuals(&schedule, &ideal, &schedule_grid(&schedule, opts.unitary_samples)?)?;
    let oracle = rk4_oracle_defect(&schedule, &ideal, opts.unitary_samples, ORACLE_SLICES)?;
    let frame = natural_frame(&schedule)?;
    let holonomy = reconstruction_defect(&frame, &schedule, opts.unitary_samples.max(4000))?;
    writeln!(out, "scheme={}", schedule.scheme_label)?;
    writeln!(out, "cyclic_residual={:.3e}", res.cyclic)?;
    writeln!(out, "parallel_residual={:.3e}", res.parallel)?;
    writeln!(out, "cumulative_dynamical_phase={:.3e}", res.cumulative_dynamical)?;
    writeln!(out, "rk4_oracle_defect={oracle:.3e}")?;
    writeln!(out, "holonomy_reconstruction_defect={holonomy:.3e}")?;
    if spec.scheme == SchemeKind::To {
        let r = to_phase_ratio(&schedule, opts.unitary_samples)?;
        writeln!(out, "dynamical_geometric_ratio={:.6}", r.final_ratio)?;
        writeln!(out, "ratio_max_relative_deviation={:.3e}", r.max_relative_deviation)?;
    }
    Ok(())
}

/// Largest `<e|rho|e>` along a Lindblad run from the `|+x>` input; used by bindings.
pub fn excited_peak_from_plus_x(spec: &SchemeSpec, err: &ErrorModel) -> Result<f64> {
    let schedule = build_schedule(spec)?;
    let rho0 = pure_density(&schedule.system.embed(&crate::dynamics::axial_states()[2]));
    Ok(final_density(&schedule, err, &rho0, DEFAULT_LINDBLAD_SAMPLES)?.1)
}

/// Default sample counts, exposed for help text and bindings.
pub fn default_samples() -> (usize, usize) {
    (DEFAULT_UNITARY_SAMPLES, DEFAULT_LINDBLAD_SAMPLES)
}
