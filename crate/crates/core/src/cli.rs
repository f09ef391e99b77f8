//! Command-line front end: `compute`, `verify` and `find-witness`.
//!
//! Exit codes: 0 success, 1 data or validation error, 2 a statistic's own
//! precondition failed (for example an asset that never pierces under GS1),
//! 3 the PSD check found the matrix not positive semidefinite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::GerberError;
use crate::gerber::{
    self, count_matrices, gerber_oracle, gs1_scaled_form, max_abs_difference, neutral_counts,
    oracle::pair_counts_from_returns, pair_counts, GerberReport, Variant,
};
use crate::indicators::IndicatorSet;
use crate::ingest::{load_returns, IngestOptions, ReturnMatrix};
use crate::psd::{
    self, check_psd, verify_series_construction, verify_squared_form, witness, PsdReport, Verdict,
};
use crate::Analysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    DataError = 1,
    Precondition = 2,
    NotPsd = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_error(err: &GerberError) -> Self {
        if err.is_precondition() {
            Exit::Precondition
        } else {
            Exit::DataError
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gerber",
    version,
    about = "Gerber co-movement statistics and PSD checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a Gerber matrix (and optionally its covariance and PSD report).
    Compute(ComputeArgs),
    /// Run every count identity, oracle comparison and PSD check on a file.
    Verify(VerifyArgs),
    /// Search random panels for an original-statistic matrix that is not PSD.
    FindWitness(WitnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Returns CSV, one column per asset.
    #[arg(long)]
    pub input: PathBuf,
    /// Threshold fraction: asset k pierces when |r| >= c * sigma_k.
    #[arg(long, default_value_t = crate::DEFAULT_FRACTION)]
    pub c: f64,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first row holds data rather than asset labels.
    #[arg(long)]
    pub no_header: bool,
    /// The first column holds period labels.
    #[arg(long)]
    pub period_column: bool,
}

impl InputArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
            period_column: self.period_column,
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Variant::Gs2)]
    pub variant: Variant,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub check_psd: bool,
    /// Also emit diag(sigma) G diag(sigma).
    #[arg(long)]
    pub covariance: bool,
    /// Dump U, D, F and P to the error stream as CSV.
    #[arg(long)]
    pub dump_indicators: bool,
    #[arg(long, default_value_t = psd::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = psd::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Periods per trial.
    #[arg(long, default_value_t = 20)]
    pub rows: usize,
    /// Assets per trial.
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    #[arg(long, default_value_t = crate::DEFAULT_FRACTION)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Witness CSV path; metadata goes next to it with a .json extension.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` and runs the selected subcommand.
pub fn run<W: Write, E: Write>(cli: Cli, out: &mut W, err: &mut E) -> Exit {
    match cli.command {
        Command::Compute(args) => run_compute(&args, out, err),
        Command::Verify(args) => run_verify(&args, out, err),
        Command::FindWitness(args) => run_find_witness(&args, out, err),
    }
}

fn report_error<E: Write>(err: &mut E, e: &GerberError) -> Exit {
    let _ = writeln!(err, "error: {e}");
    Exit::from_error(e)
}

fn load(input: &InputArgs) -> Result<ReturnMatrix, GerberError> {
    load_returns(&input.input, &input.options())
}

fn validate_tolerance(tolerance: f64) -> Result<(), GerberError> {
    if tolerance.is_finite() && tolerance > 0.0 {
        Ok(())
    } else {
        Err(GerberError::InvalidTolerance { tolerance })
    }
}

#[derive(Serialize)]
struct ComputeReport<'a> {
    #[serde(flatten)]
    gerber: GerberReport,
    sigma_denominator: &'static str,
    sigmas: &'a [f64],
    thresholds: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psd: Option<PsdReport>,
}

fn open_output(path: Option<&Path>) -> Result<Option<BufWriter<File>>, GerberError> {
    path.map(|p| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|source| GerberError::Io {
                path: p.to_path_buf(),
                source,
            })
    })
    .transpose()
}

fn io_error(path: Option<&Path>) -> impl FnOnce(io::Error) -> GerberError + '_ {
    move |source| GerberError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

pub fn run_compute<W: Write, E: Write>(args: &ComputeArgs, out: &mut W, err: &mut E) -> Exit {
    match compute(args, out, err) {
        Ok(exit) => exit,
        Err(e) => report_error(err, &e),
    }
}

fn compute<W: Write, E: Write>(
    args: &ComputeArgs,
    out: &mut W,
    err: &mut E,
) -> Result<Exit, GerberError> {
    validate_tolerance(args.tolerance)?;
    let returns = load(&args.input)?;
    let analysis = Analysis::new(&returns, args.input.c)?;
    if args.dump_indicators {
        dump_indicators(&analysis.indicators, err)?;
    }
    let g = analysis.gerber(args.variant)?;
    let covariance = args
        .covariance
        .then(|| gerber::covariance_from_gerber(&g, &analysis.sigmas))
        .transpose()?;
    let psd = args
        .check_psd
        .then(|| check_psd(&g.values, args.tolerance))
        .transpose()?;

    let mut file = open_output(args.output.as_deref())?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    match args.format {
        Format::Csv => {
            g.write_csv(&mut *sink)?;
            if let Some(cov) = &covariance {
                writeln!(sink).map_err(io_error(args.output.as_deref()))?;
                gerber::write_matrix_csv(cov, g.labels(), &mut *sink)?;
            }
        }
        Format::Json => {
            let report = ComputeReport {
                gerber: g.report(),
                sigma_denominator: "T-1",
                sigmas: &analysis.sigmas,
                thresholds: analysis.thresholds.levels(),
                covariance: covariance.as_ref().map(gerber::rows),
                psd: psd.clone(),
            };
            serde_json::to_writer_pretty(&mut *sink, &report)?;
            writeln!(sink).map_err(io_error(args.output.as_deref()))?;
        }
    }
    sink.flush().map_err(io_error(args.output.as_deref()))?;

    if !g.convention_cells.is_empty() {
        let _ = writeln!(
            err,
            "note: {} cell(s) had no joint piercings and were set by convention (0 off-diagonal, 1 diagonal)",
            g.convention_cells.len()
        );
    }
    if let Some(report) = psd {
        let _ = writeln!(err, "{}", describe_psd(&report));
        if report.verdict == Verdict::NotPsd {
            return Ok(Exit::NotPsd);
        }
    }
    Ok(Exit::Success)
}

fn describe_psd(r: &PsdReport) -> String {
    let verdict = match r.verdict {
        Verdict::Psd => "psd",
        Verdict::Borderline => "borderline",
        Verdict::NotPsd => "not_psd",
    };
    let shift = r
        .cholesky_shift
        .map_or_else(|| "failed".to_owned(), |s| format!("shift {s:e}"));
    format!(
        "psd: verdict={verdict} lambda_min={:e} lambda_max={:e} cholesky={shift} tolerance={:e}",
        r.lambda_min, r.lambda_max, r.tolerance
    )
}

fn dump_indicators<E: Write>(ind: &IndicatorSet, err: &mut E) -> Result<(), GerberError> {
    for (name, m) in [("U", &ind.u), ("D", &ind.d), ("F", &ind.f), ("P", &ind.p)] {
        writeln!(err, "# {name}").map_err(io_error(None))?;
        let mut w = csv::Writer::from_writer(&mut *err);
        let to_err = |e: csv::Error| GerberError::Csv {
            path: "<stderr>".into(),
            message: e.to_string(),
        };
        w.write_record(&ind.meta.asset_labels).map_err(to_err)?;
        for row in m.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(to_err)?;
        }
        w.flush().map_err(io_error(None))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckRow {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: detail.into(),
        }
    }

    fn skip(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Skip,
            detail: detail.into(),
        }
    }
}

/// Every identity and PSD check the crate knows about, run on one panel.
pub fn verification_table(
    returns: &ReturnMatrix,
    c: f64,
    tolerance: f64,
) -> Result<Vec<CheckRow>, GerberError> {
    validate_tolerance(tolerance)?;
    let analysis = Analysis::new(returns, c)?;
    let ind = &analysis.indicators;
    let cm = count_matrices(ind);
    let nn = neutral_counts(ind);
    let k = ind.assets();
    let periods = ind.periods() as u64;
    let mut rows = Vec::new();

    let mut grid_ok = true;
    let mut aggregate_ok = true;
    let mut neutral_ok = true;
    let mut routes_ok = true;
    for i in 0..k {
        for j in 0..k {
            let pc = pair_counts(ind, i, j)?;
            grid_ok &= pc.total() == periods;
            aggregate_ok &= cm.n_uu[[i, j]] as u64 == pc.n_uu
                && cm.n_dd[[i, j]] as u64 == pc.n_dd
                && cm.n_conc[[i, j]] as u64 == pc.concordant()
                && cm.n_disc[[i, j]] as u64 == pc.discordant();
            neutral_ok &= nn[[i, j]] as u64 == pc.n_nn;
            routes_ok &= pair_counts_from_returns(returns, &analysis.thresholds, i, j)? == pc;
        }
    }
    rows.push(CheckRow::new(
        "nine-region counts sum to T",
        grid_ok,
        format!("{} pairs", k * k),
    ));
    rows.push(CheckRow::new(
        "count matrices equal aggregated pair counts",
        aggregate_ok && routes_ok,
        "N_uu, N_dd, N_conc, N_disc",
    ));
    rows.push(CheckRow::new(
        "P'P equals jointly-neutral counts",
        neutral_ok,
        "exact",
    ));

    let f_gram = gerber::gram(ind.f.view());
    rows.push(CheckRow::new(
        "F'F = N_conc - N_disc",
        f_gram == cm.h,
        "exact integer equality",
    ));
    rows.push(CheckRow::new(
        "H = (U-D)'(U-D), x'Hx >= 0",
        verify_squared_form(ind, &cm),
        "exact integer arithmetic",
    ));

    let mut matrices = std::collections::HashMap::new();
    for variant in Variant::ALL {
        let name = format!("{variant}: matrix form equals oracle");
        let matrix = analysis.gerber(variant);
        let oracle = gerber_oracle(returns, &analysis.thresholds, variant);
        match (matrix, oracle) {
            (Ok(m), Ok(o)) => {
                let diff = max_abs_difference(&m.values, &o.values);
                let ok = diff <= 1e-12 && m.convention_cells == o.convention_cells;
                rows.push(CheckRow::new(name, ok, format!("max |diff| = {diff:e}")));
                matrices.insert(variant, m);
            }
            (Err(a), Err(b)) if a.is_precondition() && b.is_precondition() => {
                rows.push(CheckRow::skip(name, a.to_string()));
            }
            (m, o) => rows.push(CheckRow::new(
                name,
                false,
                format!(
                    "routes disagree: matrix {}, oracle {}",
                    m.map_or_else(|e| e.to_string(), |_| "ok".into()),
                    o.map_or_else(|e| e.to_string(), |_| "ok".into())
                ),
            )),
        }
    }

    match (matrices.get(&Variant::Gs1), gs1_scaled_form(&cm)) {
        (Some(g1), Ok(scaled)) => {
            let diff = max_abs_difference(&g1.values, &scaled);
            let diag = g1
                .values
                .diag()
                .iter()
                .map(|v| (v - 1.0).abs())
                .fold(0.0, f64::max);
            rows.push(CheckRow::new(
                "gs1: H/(hh') equals J'HJ, unit diagonal",
                diff <= 1e-12 && diag <= 1e-12,
                format!("max |diff| = {diff:e}, max |diag - 1| = {diag:e}"),
            ));
        }
        _ => rows.push(CheckRow::skip(
            "gs1: H/(hh') equals J'HJ, unit diagonal",
            "gs1 undefined",
        )),
    }

    for variant in [Variant::Gs1, Variant::Gs2] {
        let name = format!("{variant}: positive semidefinite");
        match matrices.get(&variant) {
            Some(g) => {
                let r = check_psd(&g.values, tolerance)?;
                rows.push(CheckRow::new(
                    name,
                    r.is_psd(),
                    format!("lambda_min = {:e}", r.lambda_min),
                ));
                let cov = gerber::covariance_from_gerber(g, &analysis.sigmas)?;
                let rc = check_psd(&cov, tolerance)?;
                rows.push(CheckRow::new(
                    format!("{variant}: covariance positive semidefinite"),
                    rc.is_psd(),
                    format!("lambda_min = {:e}", rc.lambda_min),
                ));
            }
            None => rows.push(CheckRow::skip(name, "statistic undefined for this input")),
        }
    }

    let series_name = "gs2: series construction converges with PSD partial sums";
    match matrices.get(&Variant::Gs2) {
        Some(g2) => match verify_series_construction(ind, g2, tolerance) {
            Ok(s) => rows.push(CheckRow::new(
                series_name,
                s.partial_sums_psd && s.terms_used <= s.term_bound,
                format!(
                    "terms_used = {}, bound = {}, x_max = {}, error = {:e}",
                    s.terms_used, s.term_bound, s.x_max, s.max_abs_error
                ),
            )),
            Err(e) if e.is_precondition() => rows.push(CheckRow::skip(series_name, e.to_string())),
            Err(e) => rows.push(CheckRow::new(series_name, false, e.to_string())),
        },
        None => rows.push(CheckRow::skip(series_name, "gs2 undefined")),
    }

    if let Some(g) = matrices.get(&Variant::Original) {
        let r = check_psd(&g.values, tolerance)?;
        let verdict = if r.is_psd() { "psd" } else { "not psd" };
        rows.push(CheckRow::skip(
            "original: positive semidefinite (informational)",
            format!("{verdict}, lambda_min = {:e}", r.lambda_min),
        ));
    }
    Ok(rows)
}

pub fn run_verify<W: Write, E: Write>(args: &VerifyArgs, out: &mut W, err: &mut E) -> Exit {
    let rows = match load(&args.input)
        .and_then(|r| verification_table(&r, args.input.c, args.tolerance))
    {
        Ok(rows) => rows,
        Err(e) => return report_error(err, &e),
    };
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = false;
    for row in &rows {
        let status = match row.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => {
                failed = true;
                "FAIL"
            }
            CheckStatus::Skip => "SKIP",
        };
        if writeln!(out, "{status}  {:width$}  {}", row.name, row.detail).is_err() {
            return Exit::DataError;
        }
    }
    if failed {
        Exit::DataError
    } else {
        Exit::Success
    }
}

pub fn run_find_witness<W: Write, E: Write>(args: &WitnessArgs, out: &mut W, err: &mut E) -> Exit {
    let outcome = match witness::find_non_psd_original(
        args.trials,
        args.rows,
        args.cols,
        args.c,
        args.seed,
    ) {
        Ok(o) => o,
        Err(e) => return report_error(err, &e),
    };
    let Some(w) = outcome.witness else {
        let _ = writeln!(err, "no witness in {} trials", outcome.trials_run);
        return Exit::Success;
    };
    let _ = writeln!(
        err,
        "witness at trial {} of seed {}: lambda_min = {:e}",
        w.meta.trial_index, w.meta.seed, w.meta.lambda_min
    );
    let result = match &args.output {
        Some(path) => witness::save_witness(&w, path).map(|meta| {
            let _ = writeln!(err, "wrote {} and {}", path.display(), meta.display());
        }),
        None => crate::ingest::write_returns(&w.returns, &mut *out).and_then(|()| {
            serde_json::to_writer(&mut *err, &w.meta)?;
            let _ = writeln!(err);
            Ok(())
        }),
    };
    match result {
        Ok(()) => Exit::Success,
        Err(e) => report_error(err, &e),
    }
}
