use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use varsample::bounds::{self, BoundsReport, SweepKind};
use varsample::checks::{run_checks, CheckGroup, CheckOptions};
use varsample::injectivity::{admissibility_probe, certify, samplers, Method, SearchConfig};
use varsample::json::to_canonical_string;
use varsample::linalg::{elementary, MatrixJson};
use varsample::recovery::{self, RecoveryConfig, SweepSetting};
use varsample::reference::{eleven_matrix_ensemble, skew_corner};
use varsample::sampling::{self, SampleFile};
use varsample::{DenseMatrix, Field, MeasurementEnsemble, SampleVector, Shape, VarietyKind, VarietySpec};

#[derive(Parser)]
#[command(name = "varsample", version, about = "Sample counts, injectivity checks and recovery for signals on varieties")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restart budget for searches and solvers.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Feasibility / fit tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of a variety.
    Dims {
        kind: String,
        d: usize,
        param: Option<usize>,
        #[arg(long, default_value = "complex")]
        field: String,
    },
    /// Minimal sample counts for a setting.
    Bounds(BoundsArgs),
    /// Write a random measurement ensemble.
    Generate(GenerateArgs),
    /// Apply an ensemble to a signal file.
    Sample {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        signal: PathBuf,
    },
    /// Decide injectivity of an ensemble on a variety.
    Certify(CertifyArgs),
    /// Recover a signal from samples.
    Recover(RecoverArgs),
    /// Empirical success rate of recovery as the sample count grows.
    Sweep(SweepArgs),
    /// Re-run the reference checks.
    #[command(alias = "verify-paper")]
    VerifyReference {
        /// Run only these groups (data, minors, certify, threshold, bounds, admissibility).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Show that the skew corner functional vanishes on symmetric matrices.
    DemoAdmissibility {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8])]
        d: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// sparse, low_rank, real_pr, complex_pr, standard_pr or generic.
    setting_pos: Option<String>,
    /// Dimension, then the sparsity / rank (or dim W, then m for generic).
    values: Vec<usize>,
    #[arg(long)]
    setting: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, alias = "k")]
    r: Option<usize>,
    #[arg(long, default_value = "complex")]
    field: String,
    /// Range `a:b` of dimensions (phase retrieval settings).
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// gaussian (matrices), vectors, symmetric_rank, hermitian_rank or rank_one_lifts.
    #[arg(long, default_value = "gaussian")]
    kind: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "real")]
    field: String,
    /// Rank of each operator for the rank-constrained kinds.
    #[arg(long, default_value_t = 1)]
    rank: usize,
}

#[derive(Args)]
struct CertifyArgs {
    /// Ensemble file, or `reference11` for the compiled-in matrices.
    #[arg(long)]
    ensemble: Option<String>,
    /// `kind:d:param` (or `kind:param` with d taken from the ensemble).
    #[arg(long)]
    variety: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Skip exact routes and always run the witness search.
    #[arg(long)]
    search_only: bool,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    /// `sparse:k`, `low_rank:r`, `sym_low_rank:r` or `phase` (d from the ensemble).
    #[arg(long)]
    variety: String,
    /// Ground-truth signal file, for the equivalence distance.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// sparse, low_rank, real_pr or complex_pr.
    #[arg(long)]
    setting: String,
    #[arg(long)]
    d: usize,
    /// Sparsity or rank (ignored for phase retrieval).
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Range `a:b` of sample counts.
    #[arg(long)]
    m: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

fn field(s: &str) -> Result<Field> {
    Field::parse(s).ok_or_else(|| anyhow!("unknown field {s:?} (expected real or complex)"))
}

fn range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("expected a range a:b, got {s:?}"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a > b {
        bail!("empty range {s:?}");
    }
    Ok(a..=b)
}

fn emit(global: &Global, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &global.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(global: &Global, value: &T) -> Result<()> {
    emit(global, &to_canonical_string(value)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_ensemble(path: &Path) -> Result<MeasurementEnsemble> {
    MeasurementEnsemble::from_json(&read(path)?).with_context(|| format!("loading ensemble {}", path.display()))
}

/// Signals are `{re, im}` blocks; vectors may be given as one row or one column.
fn load_signal(path: &Path, shape: Shape) -> Result<DenseMatrix> {
    let m: MatrixJson = serde_json::from_str(&read(path)?)?;
    let x = m.to_matrix()?;
    Ok(match shape {
        Shape::Vector(d) if x.shape() == (1, d) => x.transpose(),
        _ => x,
    })
}

fn variety_for(text: &str, d: usize, fld: Field) -> Result<VarietySpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let kind = VarietyKind::parse(parts[0]).ok_or_else(|| anyhow!("unknown variety kind {:?}", parts[0]))?;
    Ok(match parts.len() {
        1 => VarietySpec::parse(&format!("{}:{d}", parts[0]), fld)?,
        2 if matches!(kind, VarietyKind::HermSig | VarietyKind::RankOneReal | VarietyKind::LiftedPhase) => {
            VarietySpec::parse(text, fld)?
        }
        2 => VarietySpec::parse(&format!("{}:{d}:{}", parts[0], parts[1]), fld)?,
        _ => VarietySpec::parse(text, fld)?,
    })
}

fn cmd_dims(global: &Global, kind: &str, d: usize, param: Option<usize>, fld: &str) -> Result<bool> {
    let text = match param {
        Some(p) => format!("{kind}:{d}:{p}"),
        None => format!("{kind}:{d}"),
    };
    let w = VarietySpec::parse(&text, field(fld)?)?;
    #[derive(Serialize)]
    struct Dims {
        variety: VarietySpec,
        dimension: usize,
        difference_dimension: usize,
    }
    let diff = varsample::varieties::difference_closure(&w);
    emit_json(global, &Dims { variety: w, dimension: w.dimension(), difference_dimension: diff.dimension() })?;
    Ok(true)
}

fn single_report(setting: &str, vals: &[usize], fld: Field) -> Result<BoundsReport> {
    let need = |i: usize, what: &str| vals.get(i).copied().ok_or_else(|| anyhow!("{setting} needs {what}"));
    Ok(match setting {
        "sparse" => bounds::sparse_minimal(need(0, "d")?, need(1, "k")?)?,
        "low_rank" => bounds::lowrank_minimal(need(0, "d")?, need(1, "r")?, fld)?,
        "real_pr" => bounds::real_pr_bounds(need(0, "d")?)?,
        "complex_pr" => bounds::complex_pr_bounds(need(0, "d")?)?,
        "standard_pr" => bounds::standard_pr_facts(need(0, "d")?)?,
        "generic" => bounds::generic_variety(need(0, "dim W")?, need(1, "m")?),
        other => bail!("unknown setting {other:?}"),
    })
}

fn cmd_bounds(global: &Global, a: &BoundsArgs) -> Result<bool> {
    let setting = a.setting.clone().or_else(|| a.setting_pos.clone()).ok_or_else(|| anyhow!("missing setting"))?;
    let fld = field(&a.field)?;
    let reports = match &a.sweep {
        Some(s) => {
            let kind = SweepKind::parse(&setting).ok_or_else(|| anyhow!("sweeps support real_pr, complex_pr, standard_pr"))?;
            bounds::bounds_sweep(kind, range(s)?)?
        }
        None => {
            let mut vals: Vec<usize> = a.d.into_iter().collect();
            vals.extend(&a.values);
            vals.extend(a.r);
            vec![single_report(&setting, &vals, fld)?]
        }
    };
    let consistent = reports.iter().all(BoundsReport::is_consistent);
    match (global.format, reports.as_slice()) {
        (Format::Csv, _) => emit(global, &bounds::sweep_to_csv(&reports))?,
        (Format::Json, [one]) if a.sweep.is_none() => emit_json(global, one)?,
        (Format::Json, _) => emit_json(global, &reports)?,
    }
    Ok(consistent)
}

fn cmd_generate(global: &Global, a: &GenerateArgs) -> Result<bool> {
    let fld = field(&a.field)?;
    let seed = global.seed;
    let e = match a.kind.as_str() {
        "gaussian" => sampling::gen_gaussian_matrices(a.d, a.m, fld, seed)?,
        "vectors" => sampling::gen_gaussian_vectors(a.d, a.m, fld, seed)?,
        "symmetric_rank" => sampling::gen_symmetric_rank(a.d, &vec![a.rank; a.m], seed)?,
        "hermitian_rank" => sampling::gen_hermitian_rank(a.d, &vec![a.rank; a.m], seed)?,
        "rank_one_lifts" => sampling::gen_rank_one_lifts(a.d, a.m, fld, seed)?,
        other => bail!("unknown ensemble kind {other:?}"),
    };
    eprintln!("generated {} {} ensemble, d = {}, m = {}", a.kind, a.field, a.d, a.m);
    emit(global, &e.to_json()?)?;
    Ok(true)
}

fn cmd_sample(global: &Global, ensemble: &Path, signal: &Path) -> Result<bool> {
    let e = load_ensemble(ensemble)?;
    let x = load_signal(signal, e.shape())?;
    let mut y = e.apply(&x)?;
    y.provenance = Some(format!("samples of {} by {}", signal.display(), ensemble.display()));
    emit_json(global, &y.to_file())?;
    Ok(true)
}

fn cmd_certify(global: &Global, a: &CertifyArgs) -> Result<bool> {
    let e = match a.ensemble.as_deref() {
        Some("reference11" | "paper11") => eleven_matrix_ensemble(),
        Some(path) => load_ensemble(Path::new(path))?,
        None => {
            let (d, m) = a.d.zip(a.m).ok_or_else(|| anyhow!("give --ensemble, or --d and --m"))?;
            let fld = field(a.field.as_deref().unwrap_or("complex"))?;
            sampling::gen_gaussian_matrices(d, m, fld, global.seed)?
        }
    };
    let fld = match &a.field {
        Some(f) => field(f)?,
        None => e.field(),
    };
    let w = match &a.variety {
        Some(v) => variety_for(v, e.d(), fld)?,
        None => VarietySpec::low_rank(e.d(), a.r.unwrap_or(1), fld)?,
    };
    let mut cfg = SearchConfig { seed: global.seed, max_iters: a.max_iters, ..Default::default() };
    if let Some(r) = global.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = global.tol {
        cfg.tol_feas = t;
    }
    if a.search_only {
        cfg.method = Method::WitnessSearch;
    }
    eprintln!("certifying {} on {} (d = {}, m = {})", e.field().name(), w.kind.name(), e.d(), e.m());
    let v = certify(&e, &w, &cfg)?;
    eprintln!("status: {:?}", v.status);
    emit_json(global, &v)?;
    Ok(true)
}

fn cmd_recover(global: &Global, a: &RecoverArgs) -> Result<bool> {
    let e = load_ensemble(&a.ensemble)?;
    let file: SampleFile = serde_json::from_str(&read(&a.samples)?)?;
    let y = SampleVector::from_file(&file)?;
    let mut cfg = RecoveryConfig { seed: global.seed, ..Default::default() };
    if let Some(r) = global.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = global.tol {
        cfg.tol_fit = t;
    }
    let (kind, param) = match a.variety.split_once(':') {
        Some((k, p)) => (k, Some(p.parse::<usize>().context("variety parameter")?)),
        None => (a.variety.as_str(), None),
    };
    let need = || param.ok_or_else(|| anyhow!("{kind} needs a parameter, e.g. {kind}:1"));
    let (out, truth_shape) = match kind {
        "sparse" => (recovery::recover_sparse(&e, &y, need()?, &cfg)?, e.shape()),
        "low_rank" => (recovery::recover_low_rank(&e, &y, need()?, &cfg)?, e.shape()),
        "sym_low_rank" => {
            let w = VarietySpec::sym_low_rank(e.d(), need()?, e.field())?;
            (recovery::recover_on_variety(&e, &y, &w, &cfg)?, e.shape())
        }
        "phase" | "lifted_phase" => (recovery::recover_phase(&e, &y, &cfg)?, Shape::Vector(e.d())),
        other => bail!("unknown variety {other:?}"),
    };
    let out = match &a.truth {
        Some(p) => out.with_truth(&load_signal(p, truth_shape)?, e.field()),
        None => out,
    };
    eprintln!("converged: {}, residual {:e}", out.converged, out.residual);
    emit_json(global, &out)?;
    Ok(true)
}

fn cmd_sweep(global: &Global, a: &SweepArgs) -> Result<bool> {
    let setting = SweepSetting::parse(&a.setting).ok_or_else(|| anyhow!("unknown sweep setting {:?}", a.setting))?;
    let mut cfg = RecoveryConfig::default();
    if let Some(r) = global.restarts {
        cfg.restarts = r;
    }
    let rows = recovery::phase_transition_sweep(setting, a.d, a.p, range(&a.m)?, a.trials, global.seed, &cfg)?;
    match global.format {
        Format::Csv => emit(global, &recovery::sweep_to_csv(&rows))?,
        Format::Json => emit_json(global, &rows)?,
    }
    Ok(true)
}

fn cmd_verify(global: &Global, only: &[String]) -> Result<bool> {
    let groups: Vec<CheckGroup> = if only.is_empty() {
        CheckGroup::ALL.to_vec()
    } else {
        only.iter()
            .map(|s| CheckGroup::parse(s).ok_or_else(|| anyhow!("unknown check group {s:?}")))
            .collect::<Result<_>>()?
    };
    let mut opts = CheckOptions { seed: global.seed, ..Default::default() };
    if let Some(r) = global.restarts {
        opts.restarts = r;
    }
    let report = run_checks(&groups, &opts);
    for c in &report.checks {
        eprintln!("{} [{}] {} ({:.2}s): {}", if c.passed { "PASS" } else { "FAIL" }, c.group.name(), c.name, c.seconds, c.detail);
    }
    emit_json(global, &report)?;
    Ok(report.all_passed)
}

fn cmd_demo_admissibility(global: &Global, ds: &[usize], samples: usize) -> Result<bool> {
    #[derive(Serialize)]
    struct Row {
        d: usize,
        functional: &'static str,
        outcome: varsample::injectivity::ProbeOutcome,
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for &d in ds {
        let skew = admissibility_probe(samplers::symmetric(d), &skew_corner(d)?, samples, global.seed)?;
        let e11 = admissibility_probe(samplers::symmetric(d), &elementary(d, 0, 0), samples, global.seed)?;
        eprintln!("d = {d}: skew corner vanishes: {}, E11 vanishes: {}", skew.vanishes(), e11.vanishes());
        ok &= skew.vanishes() && !e11.vanishes();
        rows.push(Row { d, functional: "skew_corner", outcome: skew });
        rows.push(Row { d, functional: "e11", outcome: e11 });
    }
    emit_json(global, &rows)?;
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Dims { kind, d, param, field } => cmd_dims(g, kind, *d, *param, field),
        Command::Bounds(a) => cmd_bounds(g, a),
        Command::Generate(a) => cmd_generate(g, a),
        Command::Sample { ensemble, signal } => cmd_sample(g, ensemble, signal),
        Command::Certify(a) => cmd_certify(g, a),
        Command::Recover(a) => cmd_recover(g, a),
        Command::Sweep(a) => cmd_sweep(g, a),
        Command::VerifyReference { only } => cmd_verify(g, only),
        Command::DemoAdmissibility { d, samples } => cmd_demo_admissibility(g, d, *samples),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
