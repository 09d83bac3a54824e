use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ncortho::error::{Error, Result};
use ncortho::functional::MomentFunctional;
use ncortho::jacobi::{self, Hamburger, DEFAULT_HAMBURGER_TOL};
use ncortho::linalg::{self, CMat};
use ncortho::opeval::{self, KernelOptions, OperatorTuple, Region, SeparatingReport};
use ncortho::orthopoly::{self, determinant_formula, OrthoBasis};
use ncortho::recurrence::{self, FavardOptions, RecurrenceCoeffs};
use ncortho::report::{RunReport, Status};
use ncortho::sample;
use ncortho::words::Word;

#[derive(Parser)]
#[command(name = "ncortho", version, about = "Orthogonal polynomials in noncommuting variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orthonormalize the monomials under a moment functional.
    Orthopoly {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value_t = Method::Cholesky)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the three-term recurrence coefficients.
    Recurrence {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rebuild the moments from the coefficients and report the error.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Rebuild polynomials and moments from recurrence coefficients.
    Favard {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out_moments: Option<PathBuf>,
        #[arg(long)]
        out_basis: Option<PathBuf>,
        /// Reference moments to compare against.
        #[arg(long)]
        moments: Option<PathBuf>,
        #[arg(long, default_value_t = 1e8)]
        cond_bound: f64,
    },
    /// Build the truncated block Jacobi matrices.
    Jacobi {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        truncate: usize,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide positivity of Hankel moment data.
    Hamburger {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = DEFAULT_HAMBURGER_TOL)]
        tol: f64,
    },
    /// Domain geometry, Szegő kernels and kernel identities.
    Kernel(KernelArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cholesky,
    Determinant,
    Szego,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelOp {
    SzegoBall,
    SzegoSiegel,
    Cayley,
    Reproduce,
    CdInner,
    CdFull,
    Separate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Domain {
    Ball,
    Siegel,
}

#[derive(Args, Clone)]
struct KernelArgs {
    #[arg(long, value_enum)]
    op: KernelOp,
    /// First point (JSON point file); random when absent.
    #[arg(long)]
    point: Option<PathBuf>,
    /// Second point; random when absent.
    #[arg(long)]
    point2: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of matrices in random points (and letters for `separate`).
    #[arg(long)]
    generators: Option<usize>,
    /// Matrix size of random points.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// `‖(Z|Z)‖^{1/2}` of random ball points (before any Cayley transform).
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// For `cayley`: map Siegel → ball instead.
    #[arg(long)]
    inverse: bool,
    /// For `reproduce`.
    #[arg(long, value_enum, default_value_t = Domain::Ball)]
    domain: Domain,
    /// For `reproduce`: the matrix T as a one-matrix point file; random when absent.
    #[arg(long)]
    t: Option<PathBuf>,
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// For `separate`.
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value_t = 1)]
    unit_dim: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str, report: &mut RunReport) -> Result<()> {
    fs::write(path, text)?;
    report.artifact(&path.display().to_string());
    Ok(())
}

fn moments_detail(f: &MomentFunctional) -> BTreeMap<String, [f64; 2]> {
    f.moments()
        .iter()
        .map(|(w, z)| (w.to_string(), linalg::json::to_pair(*z)))
        .collect()
}

fn cmd_orthopoly(moments: &Path, level: usize, method: Method, out: Option<&Path>) -> Result<RunReport> {
    let mut report = RunReport::new("orthopoly");
    let f = MomentFunctional::from_json(&read(moments)?)?;
    let gram = f.gram(level)?;
    let min_eig = gram.positivity(0.0).min_eigenvalue();
    report.metric("min_eigenvalue", min_eig);
    let reference = orthopoly::orthogonalize(&f, level)?;
    let basis = match method {
        Method::Cholesky => reference.clone(),
        Method::Determinant => {
            let m = reference.size();
            let n = f.n_generators();
            let mut coeffs = CMat::zeros(m, m);
            for i in 0..m {
                let row = determinant_formula(&f, &Word::from_index(i, n))?;
                for (j, v) in row.iter().enumerate() {
                    coeffs[(i, j)] = *v;
                }
                coeffs[(i, i)].im = 0.0;
            }
            OrthoBasis::from_matrix(n, level, coeffs)?
        }
        Method::Szego => orthopoly::szego_recursion(&f, level)?.0,
    };
    let route_diff = linalg::max_abs(&(basis.matrix() - reference.matrix()))
        / linalg::max_abs(reference.matrix()).max(1.0);
    report.metric("route_difference", route_diff);
    let residual = basis.orthonormality_residual(&gram);
    report.metric("orthonormality_residual", residual);
    report.require(residual < 1e-8 && route_diff <= 1e-8);
    if let Some(path) = out {
        write(path, &basis.to_json()?, &mut report)?;
    }
    if basis.size() <= 64 {
        report.detail("basis", serde_json::from_str::<serde_json::Value>(&basis.to_json()?)?);
    }
    Ok(report)
}

fn cmd_recurrence(moments: &Path, levels: usize, out: Option<&Path>, roundtrip: bool) -> Result<RunReport> {
    let mut report = RunReport::new("recurrence");
    let f = MomentFunctional::from_json(&read(moments)?)?;
    let basis = orthopoly::orthogonalize(&f, levels)?;
    let coeffs = recurrence::extract(&f, &basis, levels)?;
    report.metric("max_residual", recurrence::residual_check(&basis, &coeffs)?);
    if roundtrip {
        let rebuilt = recurrence::favard(&coeffs, levels, FavardOptions::default())?;
        let err = rebuilt
            .functional
            .moments()
            .iter()
            .map(|(w, s)| f.moment(w).map(|t| (t - s).norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let basis_err = linalg::max_abs(&(rebuilt.basis.matrix() - basis.matrix()));
        report.metric("roundtrip_moment_error", err);
        report.metric("roundtrip_basis_error", basis_err);
        report.require(err < 1e-8 && basis_err < 1e-8);
    }
    let text = coeffs.to_json()?;
    if let Some(path) = out {
        write(path, &text, &mut report)?;
    }
    report.detail("coefficients", serde_json::from_str::<serde_json::Value>(&text)?);
    Ok(report)
}

fn cmd_favard(
    coeffs: &Path,
    levels: usize,
    out_moments: Option<&Path>,
    out_basis: Option<&Path>,
    reference: Option<&Path>,
    cond_bound: f64,
) -> Result<RunReport> {
    let mut report = RunReport::new("favard");
    let coeffs = RecurrenceCoeffs::from_json(&read(coeffs)?)?;
    let opts = FavardOptions {
        cond_bound,
        ..FavardOptions::default()
    };
    let out = recurrence::favard(&coeffs, levels, opts)?;
    report.metric("split_residual", out.split_residual);
    report.metric("definition_residual", out.definition_residual);
    report.metric("orthonormality_residual", out.orthonormality_residual);
    report.require(out.orthonormality_residual < 1e-8);
    if let Some(path) = reference {
        let f = MomentFunctional::from_json(&read(path)?)?;
        let err = out
            .functional
            .moments()
            .iter()
            .map(|(w, s)| f.moment(w).map(|t| (t - s).norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        report.metric("roundtrip_moment_error", err);
        report.require(err < 1e-8);
        let basis = orthopoly::orthogonalize(&f, levels)?;
        let again = recurrence::extract(&f, &basis, levels)?;
        let coeff_err = (0..levels)
            .flat_map(|n| (1..=coeffs.n_generators()).map(move |k| (n, k)))
            .map(|(n, k)| {
                linalg::max_abs(&(again.a(n, k) - coeffs.a(n, k)))
                    .max(linalg::max_abs(&(again.b(n, k) - coeffs.b(n, k))))
            })
            .fold(0.0, f64::max);
        report.metric("roundtrip_coefficient_error", coeff_err);
        report.require(coeff_err < 1e-8);
    }
    if let Some(path) = out_moments {
        write(path, &out.functional.to_json()?, &mut report)?;
    }
    if let Some(path) = out_basis {
        write(path, &out.basis.to_json()?, &mut report)?;
    }
    if out.functional.moments().len() <= 256 {
        report.detail("moments", moments_detail(&out.functional));
    }
    Ok(report)
}

fn cmd_jacobi(coeffs: &Path, truncate: usize, word: Option<&str>, out: Option<&Path>) -> Result<RunReport> {
    let mut report = RunReport::new("jacobi");
    let coeffs = RecurrenceCoeffs::from_json(&read(coeffs)?)?;
    let family = jacobi::build(&coeffs, truncate)?;
    let defect = family
        .iter()
        .map(|j| linalg::hermitian_defect(&j.matrix))
        .fold(0.0, f64::max);
    report.metric("hermitian_defect", defect);
    report.metric("order", family[0].matrix.nrows() as f64);
    report.require(defect == 0.0);
    if let Some(text) = word {
        let sigma = Word::parse_for(text, coeffs.n_generators())?;
        let m = jacobi::moment(&family, &sigma)?;
        report.metric("moment_re", m.value.re);
        report.metric("moment_im", m.value.im);
        report.detail("word", sigma.to_string());
        report.detail("moment", m);
    }
    if let Some(path) = out {
        write(path, &serde_json::to_string_pretty(&family)?, &mut report)?;
    }
    Ok(report)
}

fn cmd_hamburger(moments: &Path, level: usize, tol: f64) -> Result<RunReport> {
    let mut report = RunReport::new("hamburger");
    let f = MomentFunctional::from_json(&read(moments)?)?;
    let answer = jacobi::hamburger_check(&f, level, tol)?;
    report.metric("min_eigenvalue", answer.min_eigenvalue());
    match answer {
        Hamburger::Yes { witness, .. } => {
            report.detail("answer", "yes");
            if let Some(w) = witness {
                report.detail("witness", serde_json::from_str::<serde_json::Value>(&w.to_json()?)?);
            }
        }
        Hamburger::No { certificate, .. } => {
            report.detail("answer", "no");
            report.detail("certificate_word", certificate.dominant_word().to_string());
            report.detail("certificate", &certificate);
            report.require(false);
        }
    }
    Ok(report)
}

struct PointSource<'a> {
    args: &'a KernelArgs,
    rng: rand::rngs::StdRng,
}

impl PointSource<'_> {
    fn point(&mut self, path: Option<&PathBuf>, region: Region) -> Result<OperatorTuple> {
        if let Some(path) = path {
            let t = OperatorTuple::from_json(&read(path)?)?;
            return if t.region() == region {
                Ok(t)
            } else {
                t.tagged(region, opeval::DEFAULT_MARGIN)
            };
        }
        let n = self.args.generators.unwrap_or(2);
        if !(0.0..1.0).contains(&self.args.radius) {
            return Err(Error::InvalidInput("--radius must lie in [0, 1)".into()));
        }
        Ok(match region {
            Region::Siegel => sample::siegel_point(&mut self.rng, n, self.args.dim, self.args.radius),
            _ => sample::ball_point(&mut self.rng, n, self.args.dim, self.args.radius),
        })
    }

    fn pair(&mut self, region: Region) -> Result<(OperatorTuple, OperatorTuple)> {
        let a = self.point(self.args.point.as_ref(), region)?;
        let b = self.point(self.args.point2.as_ref(), region)?;
        Ok((a, b))
    }
}

fn tuple_detail(t: &OperatorTuple) -> serde_json::Value {
    serde_json::to_value(opeval::PointFile::from(t)).unwrap_or_default()
}

fn need<'a, T>(value: Option<&'a T>, flag: &str) -> Result<&'a T> {
    value.ok_or_else(|| Error::InvalidInput(format!("this operation needs --{flag}")))
}

fn cmd_kernel(args: &KernelArgs) -> Result<RunReport> {
    let op_name = args.op.to_possible_value().unwrap().get_name().to_string();
    let mut report = RunReport::new(&format!("kernel {op_name}"));
    let opts = KernelOptions {
        tol: args.tol,
        ..KernelOptions::default()
    };
    let mut src = PointSource {
        args,
        rng: sample::rng(args.seed),
    };
    report.metric("tol", args.tol);
    match args.op {
        KernelOp::SzegoBall | KernelOp::SzegoSiegel => {
            let ball = args.op == KernelOp::SzegoBall;
            let (a, b) = src.pair(if ball { Region::Ball } else { Region::Siegel })?;
            let res = if ball {
                opeval::szego_ball(&a, &b, opts)?
            } else {
                opeval::szego_siegel(&a, &b, opts)?
            };
            report.metric("tail_bound", res.tail_bound);
            report.metric("truncation_length", res.truncation_length as f64);
            report.detail("value", linalg::json::matrix_to_nested(&res.value));
        }
        KernelOp::Cayley => {
            let (from, to) = if args.inverse {
                (Region::Siegel, Region::Ball)
            } else {
                (Region::Ball, Region::Siegel)
            };
            let p = src.point(args.point.as_ref(), from)?;
            let image = if args.inverse {
                opeval::cayley_inverse(&p)?
            } else {
                opeval::cayley(&p)?
            };
            let back = if args.inverse {
                opeval::cayley(&image)?
            } else {
                opeval::cayley_inverse(&image)?
            };
            let err = p
                .mats()
                .iter()
                .zip(back.mats())
                .map(|(x, y)| linalg::spectral_norm(&(x - y)))
                .fold(0.0, f64::max);
            let lambda = image.membership(to, 0.0).lambda_min;
            report.metric("roundtrip_error", err);
            report.metric("target_lambda_min", lambda);
            report.require(err < 1e-10 && lambda > 0.0);
            if let Some(path) = &args.out {
                write(path, &image.to_json()?, &mut report)?;
            }
            report.detail("input", tuple_detail(&p));
            report.detail("image", tuple_detail(&image));
        }
        KernelOp::Reproduce => {
            let region = match args.domain {
                Domain::Ball => Region::Ball,
                Domain::Siegel => Region::Siegel,
            };
            let (a, b) = src.pair(region)?;
            let t = match &args.t {
                Some(path) => OperatorTuple::from_json(&read(path)?)?.mats()[0].clone(),
                None => sample::matrix(&mut src.rng, a.d()),
            };
            let r = match region {
                Region::Ball => opeval::reproduction_check_ball(&a, &b, &t, opts)?,
                _ => opeval::reproduction_check_siegel(&a, &b, &t, opts)?,
            };
            report.metric("residual", r.residual);
            report.metric("tail_bound", r.tail_bound);
            report.metric("truncation_length", r.truncation_length as f64);
            report.require(r.residual <= args.tol.max(r.tail_bound * (1.0 + 1e-6) + 1e-12));
        }
        KernelOp::CdInner | KernelOp::CdFull => {
            let basis = OrthoBasis::from_json(&read(need(args.basis.as_ref(), "basis")?)?)?;
            let coeffs = RecurrenceCoeffs::from_json(&read(need(args.coeffs.as_ref(), "coeffs")?)?)?;
            let n = *need(args.n.as_ref(), "n")?;
            if args.generators.is_some_and(|g| g != basis.n_generators()) {
                return Err(Error::InvalidInput("--generators disagrees with the basis".into()));
            }
            let fixed = KernelArgs {
                generators: Some(basis.n_generators()),
                ..args.clone()
            };
            src.args = &fixed;
            let (w, wp) = src.pair(Region::Siegel)?;
            if args.op == KernelOp::CdInner {
                let r = opeval::cd_inner_identity(&basis, &coeffs, n, &w, &wp)?;
                report.metric("residual", r.absolute);
                report.metric("relative_residual", r.relative);
                report.require(r.relative <= args.tol);
            } else {
                let r = opeval::cd_full_check(&basis, &coeffs, n, &w, &wp, opts)?;
                report.metric("residual", r.residual);
                report.metric("tail_bound", r.tail_bound);
                report.metric("truncation_length", r.truncation_length as f64);
                report.require(r.residual <= args.tol.max(1e-6));
            }
        }
        KernelOp::Separate => {
            let text = need(args.word.as_ref(), "word")?;
            let sigma: Word = text
                .parse()
                .map_err(|e: Error| Error::InvalidInput(format!("--word: {e}")))?;
            let n = args.generators.unwrap_or(sigma.max_letter().max(1) as usize);
            let tuples = opeval::separating_tuples(&sigma, n, args.unit_dim)?;
            let check = SeparatingReport::check(&sigma, n, args.unit_dim)?;
            report.metric("tuples", tuples.len() as f64);
            report.metric("isolation_error", check.isolation_error);
            report.metric("leakage", check.leakage);
            report.metric("min_ball_margin", check.min_ball_margin);
            report.metric("stacked_rank", check.stacked_rank as f64);
            report.metric("dimension", check.dimension as f64);
            report.detail("full_rank", check.stacked_rank == check.dimension);
            report.require(check.passes(args.tol.max(1e-14)));
            if let Some(path) = &args.out {
                let files: Vec<_> = tuples.iter().map(opeval::PointFile::from).collect();
                write(path, &serde_json::to_string_pretty(&files)?, &mut report)?;
            }
        }
    }
    Ok(report)
}

fn run(cli: &Cli) -> Result<RunReport> {
    match &cli.command {
        Command::Orthopoly {
            moments,
            level,
            method,
            out,
        } => cmd_orthopoly(moments, *level, *method, out.as_deref()),
        Command::Recurrence {
            moments,
            levels,
            out,
            roundtrip,
        } => cmd_recurrence(moments, *levels, out.as_deref(), *roundtrip),
        Command::Favard {
            coeffs,
            levels,
            out_moments,
            out_basis,
            moments,
            cond_bound,
        } => cmd_favard(
            coeffs,
            *levels,
            out_moments.as_deref(),
            out_basis.as_deref(),
            moments.as_deref(),
            *cond_bound,
        ),
        Command::Jacobi {
            coeffs,
            truncate,
            word,
            out,
        } => cmd_jacobi(coeffs, *truncate, word.as_deref(), out.as_deref()),
        Command::Hamburger { moments, level, tol } => cmd_hamburger(moments, *level, *tol),
        Command::Kernel(args) => cmd_kernel(args),
    }
}

fn command_name(cli: &Cli) -> &'static str {
    match cli.command {
        Command::Orthopoly { .. } => "orthopoly",
        Command::Recurrence { .. } => "recurrence",
        Command::Favard { .. } => "favard",
        Command::Jacobi { .. } => "jacobi",
        Command::Hamburger { .. } => "hamburger",
        Command::Kernel(_) => "kernel",
    }
}

/// Prints the report, tolerating a closed stdout.
fn emit(report: &RunReport) {
    let _ = writeln!(std::io::stdout(), "{}", report.to_json());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            emit(&report);
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            let mut report = RunReport::new(command_name(&cli));
            report.status = Status::Fail;
            report.detail("error", err.to_string());
            if let Error::NotPositive {
                min_eigenvalue,
                certificate,
            } = &err
            {
                report.metric("min_eigenvalue", *min_eigenvalue);
                report.detail("certificate_word", certificate.dominant_word().to_string());
                report.detail("certificate", certificate.as_ref());
            }
            emit(&report);
            eprintln!("error: {err}");
            ExitCode::from(if err.is_input_error() { 2 } else { 1 })
        }
    }
}
