use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vpdev::asymptotic::{corollary_eval, theorem_eval, thm1_transfer, AsymptoticOptions};
use vpdev::kernel::{kernel_eval, ResidualKernel, TailKernel, DEFAULT_TOL};
use vpdev::report::{
    parse_config, parse_exponents, parse_list, parse_omegas, run_convergence, run_verify, Check, ConfigMap,
    IndexRange, SweepSpec, VerifyOptions,
};
use vpdev::worstcase::{worstcase, Instance};
use vpdev::{ClassSpec, Error, Exponent, KernelSpec, ModulusOfContinuity, PsiSequence, TailKernelSpec, WorstCaseOptions};

#[derive(Parser)]
#[command(name = "vpdev", version, about = "Worst-case deviations of de la Vallée Poussin sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a kernel on a uniform grid.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Exact worst-case deviation for one instance, as JSON.
    Worstcase(WorstcaseArgs),
    /// Main term, remainder envelope and exact value, as JSON.
    Asymptotic(AsymptoticArgs),
    /// Parameter sweep producing a convergence table.
    Convergence(ConvergenceArgs),
    /// Batch of identity and invariant checks.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Emit `t,value` rows at t = 2πj/N.
    Eval(KernelArgs),
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    seq: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// With --p, sample the de la Vallée Poussin tail kernel instead of the full kernel.
    #[arg(long, requires = "p")]
    n: Option<u64>,
    #[arg(long, requires = "n")]
    p: Option<u64>,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Sample the residual against the geometric tail kernel (needs --n and --p).
    #[arg(long, requires = "n")]
    residual: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    seq: String,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// Exponent of the L_s ball (`inf` allowed).
    #[arg(long, conflicts_with = "omega", required_unless_present = "omega")]
    s: Option<Exponent>,
    /// Modulus of continuity: `power:alpha=0.5`, `log:beta=1`, `linear`, `zero`, with optional `scale=`.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    lp_grid: Option<usize>,
}

impl InstanceArgs {
    fn class(&self) -> vpdev::Result<ClassSpec> {
        match (&self.s, &self.omega) {
            (Some(s), _) => Ok(ClassSpec::Us(*s)),
            (None, Some(w)) => Ok(ClassSpec::Homega(ModulusOfContinuity::from_spec(w)?)),
            (None, None) => Err(Error::Parse("one of --s or --omega is required".into())),
        }
    }

    fn options(&self) -> WorstCaseOptions {
        WorstCaseOptions { tol: self.tol, grid: self.grid, lp_grid: self.lp_grid, ..WorstCaseOptions::default() }
    }
}

#[derive(Args)]
struct WorstcaseArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Cor1,
    Cor2,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    #[command(flatten)]
    inst: InstanceArgs,
    /// Skip the exact worst case (theorems 2, 3 and corollaries).
    #[arg(long)]
    no_exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Families separated by `;`, e.g. `geometric;neumann;polyharmonic:m=3`.
    #[arg(long)]
    seq: Option<String>,
    /// Values of q, comma separated.
    #[arg(long)]
    q: Option<String>,
    /// Values of p; lists `1,2,4` or ranges `lo..hi[:step]`.
    #[arg(long)]
    p: Option<String>,
    /// Values of n − p + 1.
    #[arg(long, conflicts_with = "n")]
    m: Option<String>,
    /// Values of n.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Exponents, comma separated.
    #[arg(long, conflicts_with = "omega")]
    s: Option<String>,
    /// Moduli separated by `;`.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    lp_grid: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the ratio plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma separated subset: elliptic, sigma, neumann-eps, vp.
    #[arg(long)]
    only: Option<String>,
    /// Relative perturbation of the quadrature value of K_{q,p}(1).
    #[arg(long, default_value_t = 0.0, hide = true)]
    perturb_kqp: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Serialize)]
struct WorstcaseJson {
    value: f64,
    normalized: f64,
    method: vpdev::Method,
    error_estimate: f64,
    lower_bound: Option<f64>,
    upper_bound: Option<f64>,
    lp_grid: Option<usize>,
    params: Instance,
}

enum Failure {
    Usage(String),
    Numeric(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Accuracy { .. } | Error::Convergence(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable value") + "\n"
}

fn kernel(a: KernelArgs) -> Result<(), Failure> {
    if a.grid == 0 {
        return Err(Failure::Usage("--grid must be positive".into()));
    }
    let seq = PsiSequence::from_spec(&a.seq)?;
    let ts: Vec<f64> = (0..a.grid).map(|j| 2.0 * PI * j as f64 / a.grid as f64).collect();
    let values: Vec<f64> = match (a.n, a.p) {
        (Some(n), Some(p)) => {
            let spec = TailKernelSpec::new(seq, n, p, a.beta)?;
            if a.residual {
                let r = ResidualKernel::new(&spec, a.tol)?;
                ts.iter().map(|&t| r.eval(t)).collect()
            } else {
                let k = TailKernel::new(&spec, a.tol)?;
                ts.iter().map(|&t| k.eval(t)).collect()
            }
        }
        _ => {
            let spec = KernelSpec::new(seq, a.beta);
            ts.iter().map(|&t| kernel_eval(&spec, t, a.tol)).collect::<vpdev::Result<_>>()?
        }
    };
    let mut text = String::from("t,value\n");
    for (t, v) in ts.iter().zip(values) {
        let _ = writeln!(text, "{t:.16e},{v:.16e}");
    }
    emit(&text, &a.out)
}

fn worstcase_cmd(a: WorstcaseArgs) -> Result<(), Failure> {
    let seq = PsiSequence::from_spec(&a.inst.seq)?;
    let r = worstcase(&seq, a.inst.n, a.inst.p, a.inst.beta, &a.inst.class()?, &a.inst.options())?;
    let out = WorstcaseJson {
        value: r.value,
        normalized: r.normalized,
        method: r.method,
        error_estimate: r.error_estimate,
        lower_bound: r.lower_bound,
        upper_bound: r.upper_bound,
        lp_grid: r.grid,
        params: r.instance,
    };
    emit(&json(&out), &a.out)
}

fn asymptotic_cmd(a: AsymptoticArgs) -> Result<(), Failure> {
    let i = &a.inst;
    let seq = PsiSequence::from_spec(&i.seq)?;
    let class = i.class()?;
    let opts = AsymptoticOptions { worst: i.options(), exact: !a.no_exact };
    let report = match a.theorem {
        Theorem::One => thm1_transfer(&seq, i.n, i.p, i.beta, &class, &opts.worst)?,
        Theorem::Two | Theorem::Three => {
            let want_us = matches!(a.theorem, Theorem::Two);
            if want_us != matches!(class, ClassSpec::Us(_)) {
                return Err(Failure::Usage(
                    "theorem 2 concerns --s classes and theorem 3 concerns --omega classes".into(),
                ));
            }
            theorem_eval(&seq, i.n, i.p, i.beta, &class, &opts)?
        }
        Theorem::Cor1 | Theorem::Cor2 => {
            let report = corollary_eval(&seq, i.n, i.p, i.beta, &class, &opts)?;
            let want = if matches!(a.theorem, Theorem::Cor1) { "cor1" } else { "cor2" };
            if report.theorem != want {
                return Err(Failure::Usage(format!("{want} does not apply to {seq}")));
            }
            report
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(&json(&report), &a.out)
}

/// Integer list with `lo..hi[:step]` ranges.
fn parse_indices(s: &str, what: &str) -> vpdev::Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let bad = || Error::Parse(format!("invalid {what} range '{part}'"));
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            let step: u64 = step.trim().parse().map_err(|_| bad())?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.extend(parse_list::<u64>(part, what)?);
        }
    }
    Ok(out)
}

fn sweep_from(a: &ConvergenceArgs, cfg: &ConfigMap) -> Result<(SweepSpec, Format), Failure> {
    let get = |flag: &Option<String>, key: &str| flag.clone().or_else(|| cfg.get(key).cloned());
    let need = |v: Option<String>, key: &str| v.ok_or_else(|| Failure::Usage(format!("--{key} is required")));

    let families: Vec<String> = need(get(&a.seq, "seq"), "seq")?
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let qs = parse_list::<f64>(&need(get(&a.q, "q"), "q")?, "q")?;
    let ps = parse_indices(&get(&a.p, "p").unwrap_or_else(|| "1".into()), "p")?;
    let index = match (&a.m, &a.n) {
        (Some(m), _) => IndexRange::FirstIndex(parse_indices(m, "m")?),
        (None, Some(n)) => IndexRange::N(parse_indices(n, "n")?),
        (None, None) => match (cfg.get("m"), cfg.get("n")) {
            (Some(m), _) => IndexRange::FirstIndex(parse_indices(m, "m")?),
            (None, Some(n)) => IndexRange::N(parse_indices(n, "n")?),
            _ => return Err(Failure::Usage("--m or --n is required".into())),
        },
    };
    let betas = parse_list::<f64>(&get(&a.beta, "beta").unwrap_or_else(|| "0".into()), "beta")?;
    let classes: Vec<ClassSpec> = match (&a.s, &a.omega) {
        (Some(s), _) => parse_exponents(s)?.into_iter().map(ClassSpec::Us).collect(),
        (None, Some(w)) => parse_omegas(w)?.into_iter().map(ClassSpec::Homega).collect(),
        (None, None) => match (cfg.get("s"), cfg.get("omega")) {
            (Some(s), _) => parse_exponents(s)?.into_iter().map(ClassSpec::Us).collect(),
            (None, Some(w)) => parse_omegas(w)?.into_iter().map(ClassSpec::Homega).collect(),
            _ => return Err(Failure::Usage("--s or --omega is required".into())),
        },
    };
    let num = |flag: Option<String>, key: &str| -> vpdev::Result<Option<String>> { Ok(flag.or_else(|| cfg.get(key).cloned())) };
    let parse_one = |v: Option<String>, key: &str| -> vpdev::Result<Option<usize>> {
        v.map(|x| x.parse().map_err(|_| Error::Parse(format!("invalid {key} '{x}'")))).transpose()
    };
    let mut options = WorstCaseOptions::default();
    if let Some(t) = a.tol.map(|t| t.to_string()).or_else(|| cfg.get("tol").cloned()) {
        options.tol = t.parse().map_err(|_| Error::Parse(format!("invalid tol '{t}'")))?;
    }
    options.grid = parse_one(num(a.grid.map(|g| g.to_string()), "grid")?, "grid")?;
    options.lp_grid = parse_one(num(a.lp_grid.map(|g| g.to_string()), "lp-grid")?, "lp-grid")?;
    let jobs = parse_one(num(a.jobs.map(|j| j.to_string()), "jobs")?, "jobs")?
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let format = match a.format {
        Some(f) => f,
        None => match cfg.get("format").map(String::as_str) {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some("svg") => Format::Svg,
            Some(other) => return Err(Failure::Usage(format!("unknown format '{other}'"))),
        },
    };
    let sweep = SweepSpec { families, qs, ps, index, betas, classes, options, jobs };
    Ok((sweep, format))
}

fn convergence_cmd(a: ConvergenceArgs) -> Result<(), Failure> {
    let cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ConfigMap::new(),
    };
    let (sweep, format) = sweep_from(&a, &cfg)?;
    let out = a.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    let svg = a.svg.clone().or_else(|| cfg.get("svg").map(PathBuf::from));
    let table = run_convergence(&sweep)?;
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => json(&table),
        Format::Svg => table.to_svg(),
    };
    emit(&text, &out)?;
    if let Some(path) = svg {
        emit(&table.to_svg(), &Some(path))?;
    }
    let failed = table.failures();
    if failed > 0 {
        eprintln!("{failed} of {} instances failed; see the status column", table.rows.len());
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<(), Failure> {
    let only = match &a.only {
        Some(s) => s.split(',').filter(|x| !x.trim().is_empty()).map(str::parse).collect::<vpdev::Result<Vec<Check>>>()?,
        None => Vec::new(),
    };
    let report = run_verify(&VerifyOptions { only, perturb_kqp: a.perturb_kqp })?;
    match a.format {
        Format::Json => print!("{}", json(&report)),
        _ => {
            for r in &report.results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.check, r.detail);
            }
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Kernel(KernelCmd::Eval(a)) => kernel(a),
        Command::Worstcase(a) => worstcase_cmd(a),
        Command::Asymptotic(a) => asymptotic_cmd(a),
        Command::Convergence(a) => convergence_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify) => ExitCode::from(3),
    }
}
