use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraclab_cli::{run_and_report, CliError, RawConfig, RunConfig, Source, Task};

#[derive(Parser, Debug)]
#[command(name = "fraclab", version, about = "Fractional Laplacian laboratory for the half space")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalization constants for (N, s).
    Constants,
    /// Principal-value evaluation of (-Δ)^s on a field.
    Eval,
    /// Green, Poisson and fundamental kernels.
    Kernel,
    /// Structural checks.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Convergence studies with rate fits.
    Converge,
    /// Walk-on-spheres estimate of the exterior problem.
    Wos,
    /// Runs the task named in the configuration file.
    Run,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Harmonic basis and annulus residuals.
    Poly,
    /// Distributional identities against a test function.
    Identity,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Configuration file with key=value lines and [section] headers.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "N", global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    eps: Option<String>,
    #[arg(long = "R", global = true)]
    r: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    walks: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    jobs: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    format: Option<String>,
    /// paper | probabilistic
    #[arg(long, global = true)]
    norm_mode: Option<String>,
    /// derived | paper | exact
    #[arg(long, global = true)]
    cs_mode: Option<String>,
    /// paper | exact
    #[arg(long, global = true)]
    ks_mode: Option<String>,
    /// paper | exact
    #[arg(long, global = true)]
    green_norm: Option<String>,
    /// cos:<xi> | poly:<expr> | rs | qs | ps | sep-rs:<expr> | sep-qs:<expr>
    #[arg(long, global = true, allow_hyphen_values = true)]
    field: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    y: Option<String>,
    /// pv | symmetrized | annulus
    #[arg(long, global = true)]
    mode: Option<String>,
    /// green-ball | green-half | poisson-ball | poisson-half | fundamental
    #[arg(long, global = true)]
    kind: Option<String>,
    #[arg(long, global = true)]
    m: Option<String>,
    #[arg(long, global = true)]
    random: Option<String>,
    /// ps | qs | rs | all
    #[arg(long, global = true)]
    which: Option<String>,
    /// exponential | polynomial
    #[arg(long, global = true)]
    bump: Option<String>,
    #[arg(long, global = true)]
    radius: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    /// green | poisson | mu | nu
    #[arg(long, global = true)]
    study: Option<String>,
    /// lo1,hi1,lo2,hi2,...
    #[arg(long = "box", global = true, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long, global = true)]
    expect_rate: Option<String>,
    #[arg(long, global = true)]
    rate_tol: Option<String>,
    /// one | const:<c> | box:<lo>;<hi>
    #[arg(long, global = true, allow_hyphen_values = true)]
    data: Option<String>,
    #[arg(long, global = true)]
    max_steps: Option<String>,
}

impl Flags {
    /// `(flag, key within the task section or top-level path, value)`.
    fn pairs(&self) -> Vec<(&'static str, Option<&'static str>, &str)> {
        let top: [(&str, &Option<String>); 4] = [("N", &self.n), ("s", &self.s), ("seed", &self.seed), ("jobs", &self.jobs)];
        let task: [(&str, &Option<String>); 24] = [
            ("eps", &self.eps),
            ("R", &self.r),
            ("grid", &self.grid),
            ("walks", &self.walks),
            ("norm_mode", &self.norm_mode),
            ("cs_mode", &self.cs_mode),
            ("ks_mode", &self.ks_mode),
            ("green_norm", &self.green_norm),
            ("field", &self.field),
            ("x", &self.x),
            ("y", &self.y),
            ("mode", &self.mode),
            ("kind", &self.kind),
            ("m", &self.m),
            ("random", &self.random),
            ("which", &self.which),
            ("bump", &self.bump),
            ("radius", &self.radius),
            ("tol", &self.tol),
            ("study", &self.study),
            ("box", &self.bbox),
            ("expect_rate", &self.expect_rate),
            ("rate_tol", &self.rate_tol),
            ("data", &self.data),
        ];
        let mut out = Vec::new();
        for (k, v) in top {
            if let Some(v) = v {
                out.push((k, None, v.as_str()));
            }
        }
        for (k, v) in task {
            if let Some(v) = v {
                out.push((k, Some(k), v.as_str()));
            }
        }
        if let Some(v) = &self.max_steps {
            out.push(("max_steps", Some("max_steps"), v.as_str()));
        }
        if let Some(v) = &self.out {
            out.push(("out", None, v.as_str()));
        }
        if let Some(v) = &self.format {
            out.push(("format", None, v.as_str()));
        }
        out
    }
}

fn task_of(cmd: &Command) -> Option<Task> {
    Some(match cmd {
        Command::Constants => Task::Constants,
        Command::Eval => Task::Eval,
        Command::Kernel => Task::Kernel,
        Command::Verify { what: Verify::Poly } => Task::VerifyPoly,
        Command::Verify { what: Verify::Identity } => Task::VerifyIdentity,
        Command::Converge => Task::Converge,
        Command::Wos => Task::Wos,
        Command::Run => return None,
    })
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = match &cli.flags.config {
        Some(path) => RawConfig::parse_document(&std::fs::read_to_string(path)?)?,
        None => RawConfig::default(),
    };
    if let Some(task) = task_of(&cli.command) {
        raw.set("task", task.name(), Source::Flag)?;
    }
    let task: Task = raw
        .get("task")
        .ok_or_else(|| CliError::Missing("task".into()))?
        .parse()
        .map_err(|m: String| CliError::Precondition { path: "task".into(), msg: m })?;
    for (flag, key, value) in cli.flags.pairs() {
        let path = match (flag, key) {
            ("out", _) => "output.path".to_string(),
            ("format", _) => "output.format".to_string(),
            (_, None) => flag.to_string(),
            (_, Some(k)) => format!("{}.{k}", task.section()),
        };
        raw.set(&path, value, Source::Flag)?;
    }
    if let Ok(seed) = std::env::var("FRACLAB_SEED") {
        raw.set("seed", seed.trim(), Source::Env)?;
    }
    RunConfig::from_raw(raw)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fraclab: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let report = match run_and_report(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fraclab: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("fraclab: cannot write {path}: {e}");
                return ExitCode::from(4);
            }
        }
        None => print!("{text}"),
    }
    for f in &report.failures {
        eprintln!("fraclab: check failed: {f}");
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
