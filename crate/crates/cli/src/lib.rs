//! Subcommands of the `elastring` binary. Every run writes its reports into an
//! output directory and lists them in `manifest.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use elastring::classical::{
    compatibility_flags, compatibility_sweep, evaluate_series_solution, h_consistency_residual,
    solve_fd_coupled_with, CompatibilityFlags, CompatibilitySweep, FdOptions, InterfaceTrace,
    SeriesExpansion, TraceSampling,
};
use elastring::config::RunConfig;
use elastring::diagnostics::energy;
use elastring::field::{evaluate_solution, WaveField};
use elastring::galerkin::{modal_frequencies, propagate_exact, propagate_leapfrog, ModalSystem};
use elastring::io::{fmt_f64, to_json_string, write_csv_rows};
use elastring::model::{validate_initial_data, DiracConvention, ValidationReport};
use elastring::tension::{
    characteristic_frequencies, invert_tension, FrequencySpectrum, InversionOptions, KnownCable,
    TensionEstimate,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Relative tolerance of the frequency cross-check.
pub const CROSSCHECK_TOL: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] elastring::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        use elastring::Error as E;
        match self {
            CliError::Core(E::Config(_)) => 2,
            CliError::Core(E::Io(_)) | CliError::Output { .. } => 1,
            CliError::Core(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Simulate,
    Modes,
    InvertTension,
    Validate,
    Residuals,
    Crosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    GalerkinExact,
    GalerkinLeapfrog,
    FdCoupled,
}

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub role: String,
    pub sha256: String,
}

/// Record of one run: what was computed from which configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    /// SHA-256 of the resolved configuration rendered as JSON.
    pub config_digest: String,
    pub subcommand: Subcommand,
    pub outputs: Vec<OutputFile>,
}

/// Collects files written into one directory.
struct Emitter {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
}

impl Emitter {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.into(), source })?;
        Ok(Self { dir: dir.into(), outputs: Vec::new() })
    }

    fn emit(
        &mut self,
        name: &str,
        role: &str,
        write: impl FnOnce(&mut BufWriter<File>) -> elastring::Result<()>,
    ) -> CliResult<()> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Output { path: path.clone(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        write(&mut w)?;
        w.flush().map_err(io_err)?;
        drop(w);
        let bytes = fs::read(&path).map_err(io_err)?;
        self.outputs.push(OutputFile {
            path: name.into(),
            role: role.into(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, role: &str, value: &T) -> CliResult<()> {
        let text = to_json_string(value)?;
        self.emit(name, role, |w| Ok(writeln!(w, "{text}")?))
    }

    fn finish(self, cfg: &RunConfig, subcommand: Subcommand) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            config_digest: config_digest(cfg)?,
            subcommand,
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        let text = to_json_string(&manifest)?;
        fs::write(&path, format!("{text}\n")).map_err(|source| CliError::Output { path, source })?;
        Ok(manifest)
    }
}

pub fn config_digest(cfg: &RunConfig) -> CliResult<String> {
    Ok(format!("{:x}", Sha256::digest(to_json_string(cfg)?.as_bytes())))
}

fn solve(cfg: &RunConfig, solver: Solver) -> elastring::Result<(WaveField, Option<InterfaceTrace>)> {
    let init = cfg.initial_data()?;
    let probes = &cfg.output.probes;
    match solver {
        Solver::GalerkinExact | Solver::GalerkinLeapfrog => {
            let sys = ModalSystem::new(&cfg.cable, cfg.galerkin.m, &init)?;
            let field = if solver == Solver::GalerkinExact {
                propagate_exact(&sys, &cfg.grid, probes)?
            } else {
                propagate_leapfrog(&sys, &cfg.grid, probes)?
            };
            Ok((field, None))
        }
        Solver::FdCoupled => {
            let opts = FdOptions { cfl: cfg.fd.cfl, ..FdOptions::default() };
            let (field, trace) = solve_fd_coupled_with(&cfg.cable, &init, &cfg.grid, &opts)?;
            Ok((field, Some(trace)))
        }
    }
}

fn write_profiles<W: Write>(w: W, field: &WaveField, times: &[f64]) -> elastring::Result<()> {
    let nodes = field.grid().nodes(field.length());
    let mut rows = Vec::with_capacity(times.len() * nodes.len());
    for &t in times {
        for &x in &nodes {
            rows.push(vec![t, x, evaluate_solution(field, x, t)?.0]);
        }
    }
    write_csv_rows(w, &["t", "x", "u"], rows)
}

fn write_probes<W: Write>(w: W, field: &WaveField) -> elastring::Result<()> {
    let times = field.grid().times();
    let mut rows = Vec::new();
    for p in field.probes() {
        rows.extend(times.iter().enumerate().map(|(j, &t)| vec![p.x, t, p.u[j], p.ut[j]]));
    }
    write_csv_rows(w, &["x", "t", "u", "u_t"], rows)
}

/// Runs one solver and writes the field, its energy, profiles and probes.
pub fn run_simulate(cfg: &RunConfig, solver: Solver, out: &Path) -> CliResult<RunManifest> {
    let (field, trace) = solve(cfg, solver)?;
    let report = energy(&field, &cfg.cable);
    let mut em = Emitter::new(out)?;
    em.emit("field.csv", "wave-field-csv", |w| field.write_csv(w))?;
    em.emit("field.bin", "wave-field-binary", |w| field.write_binary(w))?;
    em.emit("energy.csv", "energy-series", |w| report.write_csv(w))?;
    em.emit_json("energy.json", "energy-report", &report)?;
    em.emit("profiles.csv", "time-slice-profiles", |w| {
        write_profiles(w, &field, &cfg.output.profile_times)
    })?;
    if !field.probes().is_empty() {
        em.emit("probes.csv", "probe-series", |w| write_probes(w, &field))?;
    }
    if let Some(trace) = trace {
        em.emit("interface.csv", "interface-trace", |w| trace.write_csv(w))?;
    }
    em.finish(cfg, Subcommand::Simulate)
}

#[derive(Debug, Serialize)]
struct ModesReport {
    galerkin_m: usize,
    galerkin: FrequencySpectrum,
    characteristic: Option<FrequencySpectrum>,
}

fn modes_report(cfg: &RunConfig) -> elastring::Result<ModesReport> {
    let count = cfg.galerkin.modes;
    let sys = ModalSystem::new(&cfg.cable, cfg.galerkin.m, &cfg.initial_data()?)?;
    let galerkin = modal_frequencies(&sys, count)?;
    let characteristic = if cfg.cable.supports().len() <= 1 {
        Some(characteristic_frequencies(&cfg.cable, count)?)
    } else {
        None
    };
    Ok(ModesReport { galerkin_m: cfg.galerkin.m, galerkin, characteristic })
}

/// Galerkin eigenfrequencies, plus characteristic roots for at most one support.
pub fn run_modes(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let report = modes_report(cfg)?;
    let mut em = Emitter::new(out)?;
    em.emit_json("modes.json", "frequency-spectra", &report)?;
    em.emit("modes.csv", "frequency-table", |w| {
        writeln!(w, "mode,galerkin_hz,characteristic_hz")?;
        for (i, f) in report.galerkin.frequencies_hz().iter().enumerate() {
            let c = report.characteristic.as_ref().map_or(String::new(), |s| fmt_f64(s.frequencies_hz()[i]));
            writeln!(w, "{},{},{c}", i + 1, fmt_f64(*f))?;
        }
        Ok(())
    })?;
    em.finish(cfg, Subcommand::Modes)
}

fn read_frequency_csv(path: &Path) -> elastring::Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| {
        elastring::Error::Config(format!("cannot read measured frequencies {}: {e}", path.display()))
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .filter(|(i, l)| !(*i == 0 && l.trim().parse::<f64>().is_err()))
        .map(|(i, l)| {
            let field = l.split(',').next().unwrap_or_default().trim();
            field.parse().map_err(|_| {
                elastring::Error::Config(format!("{}:{}: not a frequency: {l:?}", path.display(), i + 1))
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct InversionReport {
    measured_hz: Vec<f64>,
    mode_indices: Vec<usize>,
    bracket: [f64; 2],
    estimate: TensionEstimate,
}

/// Fits the tension to measured frequencies. `measured` overrides the config.
pub fn run_invert(cfg: &RunConfig, measured: Option<Vec<f64>>, out: &Path) -> CliResult<RunManifest> {
    let settings = cfg.inversion.clone().unwrap_or_default();
    let freqs = match (measured, &settings.measured_csv) {
        (Some(f), _) => f,
        (None, Some(path)) => read_frequency_csv(Path::new(path))?,
        (None, None) => settings.measured_hz.clone(),
    };
    if freqs.is_empty() {
        return Err(elastring::Error::Config(
            "inversion: no measured frequencies (use measured_hz, measured_csv or --measured)".into(),
        )
        .into());
    }
    let modes: Vec<usize> = if settings.mode_indices.is_empty() {
        (1..=freqs.len()).collect()
    } else {
        settings.mode_indices.clone()
    };
    let spectrum = FrequencySpectrum::measured(freqs.clone())
        .map_err(|e| elastring::Error::Config(format!("inversion: {e}")))?;
    let known = KnownCable::from_config(&cfg.cable);
    let mut opts = InversionOptions::taut_string(&spectrum, &modes, &known);
    if let Some([lo, hi]) = settings.bracket {
        opts.bracket = (lo, hi);
    }
    opts.galerkin_m = cfg.galerkin.m;
    let estimate = invert_tension(&spectrum, &known, &modes, &opts)?;
    let report = InversionReport {
        measured_hz: freqs,
        mode_indices: modes,
        bracket: [opts.bracket.0, opts.bracket.1],
        estimate,
    };
    let mut em = Emitter::new(out)?;
    em.emit_json("inversion.json", "tension-estimate", &report)?;
    em.finish(cfg, Subcommand::InvertTension)
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    initial_data: ValidationReport,
    compatibility: Option<CompatibilityFlags>,
}

/// Advisory checks on the initial data; never fails on incompatible data.
pub fn run_validate(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let init = cfg.initial_data()?;
    let compatibility = if cfg.cable.supports().len() == 1 {
        Some(compatibility_flags(&cfg.cable, &init, cfg.grid.dx(cfg.cable.length()))?)
    } else {
        None
    };
    let report = ValidateReport { initial_data: validate_initial_data(&cfg.cable, &init), compatibility };
    let mut em = Emitter::new(out)?;
    em.emit_json("validation.json", "validation-report", &report)?;
    em.finish(cfg, Subcommand::Validate)
}

#[derive(Debug, Serialize)]
struct ResidualPoint {
    t: f64,
    h: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct ResidualsReport {
    h0: f64,
    compatibility: CompatibilitySweep,
    h_consistency: Vec<ResidualPoint>,
    fd_jump_residual_max: f64,
}

/// Series residuals for one support, with `h(t)` taken from an FD solve.
pub fn run_residuals(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let init = cfg.initial_data()?;
    let support = cfg.cable.single_support().ok_or_else(|| {
        elastring::Error::Capability("residuals need exactly one support".into())
    })?;
    let h0 = init.phi.value(support.position());
    let compatibility = compatibility_sweep(&cfg.cable, &init, h0, &cfg.series.sweep)?;
    let opts = FdOptions { cfl: cfg.fd.cfl, trace: TraceSampling::EveryStep, ..FdOptions::default() };
    let (_, trace) = solve_fd_coupled_with(&cfg.cable, &init, &cfg.grid, &opts)?;
    let exp = SeriesExpansion::new(&cfg.cable, &init, &trace.u_at_support[0], trace.dt(), cfg.series.n_terms)?;
    let h_consistency = cfg
        .series
        .residual_times
        .iter()
        .filter(|&&t| t <= cfg.grid.horizon())
        .map(|&t| Ok(ResidualPoint { t, h: exp.h_at(t)?, residual: h_consistency_residual(&exp, t)? }))
        .collect::<elastring::Result<Vec<_>>>()?;
    let report = ResidualsReport {
        h0,
        compatibility,
        h_consistency,
        fd_jump_residual_max: trace.max_jump_residual(0, 0.0),
    };
    let mut em = Emitter::new(out)?;
    em.emit_json("residuals.json", "series-residuals", &report)?;
    em.emit("series_coefficients.csv", "series-coefficients", |w| exp.write_coefficients_csv(w))?;
    em.emit("interface.csv", "interface-trace", |w| trace.write_csv(w))?;
    em.finish(cfg, Subcommand::Residuals)
}

#[derive(Debug, Serialize)]
struct MethodRow {
    method: String,
    /// Whether the row takes part in the pass/fail decision.
    gated: bool,
    frequencies_hz: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct PairDifference {
    first: String,
    second: String,
    gated: bool,
    max_relative_difference: f64,
}

#[derive(Debug, Serialize)]
struct FieldComparison {
    first: String,
    second: String,
    relative_max_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct CrosscheckReport {
    modes: usize,
    tolerance: f64,
    methods: Vec<MethodRow>,
    pairwise: Vec<PairDifference>,
    fields: Vec<FieldComparison>,
    pub pass: bool,
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs() / y.abs()))
}

fn crosscheck_report(cfg: &RunConfig) -> elastring::Result<CrosscheckReport> {
    const MODES: usize = 8;
    let init = cfg.initial_data()?;
    let sys = ModalSystem::new(&cfg.cable, cfg.galerkin.m, &init)?;
    let label = |c: DiracConvention| match c {
        DiracConvention::DiracConsistent => "dirac",
        DiracConvention::PaperFactorL => "paper-L",
    };
    let own = cfg.cable.convention();
    let other = match own {
        DiracConvention::DiracConsistent => DiracConvention::PaperFactorL,
        DiracConvention::PaperFactorL => DiracConvention::DiracConsistent,
    };
    let alt = ModalSystem::new(&cfg.cable.with_convention(other), cfg.galerkin.m, &init)?;
    let mut methods = vec![
        MethodRow {
            method: format!("galerkin-m{}-{}", cfg.galerkin.m, label(own)),
            gated: true,
            frequencies_hz: modal_frequencies(&sys, MODES)?.frequencies_hz().to_vec(),
        },
        MethodRow {
            method: format!("galerkin-m{}-{}", cfg.galerkin.m, label(other)),
            gated: false,
            frequencies_hz: modal_frequencies(&alt, MODES)?.frequencies_hz().to_vec(),
        },
    ];
    if cfg.cable.supports().len() <= 1 {
        methods.push(MethodRow {
            method: "characteristic-root".into(),
            gated: true,
            frequencies_hz: characteristic_frequencies(&cfg.cable, MODES)?.frequencies_hz().to_vec(),
        });
    }
    let mut pairwise = Vec::new();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            pairwise.push(PairDifference {
                first: a.method.clone(),
                second: b.method.clone(),
                gated: a.gated && b.gated,
                max_relative_difference: relative_gap(&a.frequencies_hz, &b.frequencies_hz),
            });
        }
    }
    let pass = pairwise.iter().filter(|p| p.gated).all(|p| p.max_relative_difference <= CROSSCHECK_TOL);

    let galerkin = propagate_exact(&sys, &cfg.grid, &[])?;
    let opts = FdOptions { cfl: cfg.fd.cfl, trace: TraceSampling::EveryStep, ..FdOptions::default() };
    let (fd, trace) = solve_fd_coupled_with(&cfg.cable, &init, &cfg.grid, &opts)?;
    let mut fields = vec![FieldComparison {
        first: "fd-coupled".into(),
        second: "galerkin-exact".into(),
        relative_max_norm: relative_field_gap(&fd, &galerkin)?,
    }];
    if cfg.cable.supports().len() == 1 {
        let exp = SeriesExpansion::new(&cfg.cable, &init, &trace.u_at_support[0], trace.dt(), cfg.series.n_terms)?;
        let g = cfg.grid;
        let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
        for i in 1..=10 {
            let x = cfg.cable.length() * (i as f64 - 0.5) / 10.0;
            for j in 1..=10 {
                let t = g.horizon() * j as f64 / 10.0;
                let u = evaluate_solution(&fd, x, t)?.0;
                diff = diff.max((evaluate_series_solution(&exp, x, t)? - u).abs());
                scale = scale.max(u.abs());
            }
        }
        fields.push(FieldComparison {
            first: "series".into(),
            second: "fd-coupled".into(),
            relative_max_norm: if scale > 0.0 { diff / scale } else { diff },
        });
    }
    Ok(CrosscheckReport { modes: MODES, tolerance: CROSSCHECK_TOL, methods, pairwise, fields, pass })
}

fn relative_field_gap(a: &WaveField, b: &WaveField) -> elastring::Result<f64> {
    let diff = a.difference(b)?.max_abs();
    let scale = b.max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Compares frequencies across methods and fields.
///
/// Only the configured convention and the characteristic roots decide
/// pass/fail; the other convention and the field gaps are reported only.
pub fn run_crosscheck(cfg: &RunConfig, out: &Path) -> CliResult<(RunManifest, bool)> {
    let report = crosscheck_report(cfg)?;
    let mut em = Emitter::new(out)?;
    em.emit_json("crosscheck.json", "crosscheck-report", &report)?;
    em.emit("crosscheck.csv", "crosscheck-table", |w| {
        write!(w, "method")?;
        for k in 1..=report.modes {
            write!(w, ",f{k}")?;
        }
        writeln!(w)?;
        for row in &report.methods {
            write!(w, "{}", row.method)?;
            for f in &row.frequencies_hz {
                write!(w, ",{}", fmt_f64(*f))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    Ok((em.finish(cfg, Subcommand::Crosscheck)?, report.pass))
}
