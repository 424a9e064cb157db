use clap::{Args, Parser, Subcommand, ValueEnum};
use quadfold::foldability::{certify_all, certify_with, labels_from_angles, mv_assignment, CompatibilityReport};
use quadfold::io::{export_fold, export_fold_state, export_obj, export_svg, import_fold, round12, FoldFileDoc};
use quadfold::pattern::{count_dof, stitch, PlanSpec};
use quadfold::realization::sweep_with;
use quadfold::unit::{ff_alpha4, solve_ff_unit, validate_unit_with, FfMode, UnitSpec};
use quadfold::vertex::{fold_interval_at, solve_at_with};
use quadfold::{BranchId, Error, QuadPattern, Tolerances, Vertex4};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Like `println!`, but a closed pipe (`quadfold ... | head`) is not an error.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

/// Settings read from the file named by `QUADFOLD_CONFIG` or `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct CliConfig {
    tolerances: Tolerances,
    samples: usize,
    frames: usize,
    output_dir: Option<PathBuf>,
    angle_unit: AngleUnit,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            tolerances: Tolerances::default(),
            samples: 200,
            frames: 30,
            output_dir: None,
            angle_unit: AngleUnit::Degrees,
        }
    }
}

impl CliConfig {
    fn check(&self) -> Result<(), String> {
        let t = serde_json::to_value(self.tolerances).map_err(|e| e.to_string())?;
        if let Value::Object(m) = t {
            for (k, v) in m {
                if !v.as_f64().is_some_and(|x| x > 0.0) {
                    return Err(format!("tolerance {k} must be positive"));
                }
            }
        }
        if self.samples < 2 {
            return Err("samples must be at least 2".into());
        }
        Ok(())
    }

    fn to_rad(&self, x: f64) -> f64 {
        match self.angle_unit {
            AngleUnit::Degrees => x.to_radians(),
            AngleUnit::Radians => x,
        }
    }

    fn from_rad(&self, x: f64) -> f64 {
        match self.angle_unit {
            AngleUnit::Degrees => x.to_degrees(),
            AngleUnit::Radians => x,
        }
    }
}

#[derive(Parser)]
#[command(name = "quadfold", version, about = "Rigid folding of quadrilateral crease patterns")]
struct Cli {
    /// JSON config file; overrides QUADFOLD_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single degree-4 vertices.
    #[command(subcommand)]
    Vertex(VertexCmd),
    /// Two-vertex units.
    #[command(subcommand)]
    Unit(UnitCmd),
    /// Grid patterns.
    #[command(subcommand)]
    Pattern(PatternCmd),
}

#[derive(Args)]
struct VertexArgs {
    /// Four sector angles, comma separated.
    #[arg(long, value_parser = parse_list::<4>)]
    alphas: Vec4,
    /// `1`, `2` or `line`.
    #[arg(long, value_parser = parse_branch)]
    branch: BranchId,
}

#[derive(Subcommand)]
enum VertexCmd {
    /// Fold angles of all four creases given the first.
    Solve {
        #[command(flatten)]
        v: VertexArgs,
        /// Fold angle of crease 0.
        #[arg(long, allow_hyphen_values = true)]
        rho1: f64,
    },
    /// Range of the first fold angle on a branch.
    Interval {
        #[command(flatten)]
        v: VertexArgs,
    },
}

#[derive(Subcommand)]
enum UnitCmd {
    /// Completes a flat-foldable unit from three free angles.
    SolveFf {
        /// Sector angles alpha1, alpha2 of the top vertex and alpha3 of the bottom one.
        #[arg(long, value_parser = parse_list::<3>)]
        alphas: Vec3,
        /// `a-plus`, `a-minus`, `c-plus` or `c-minus`.
        #[arg(long, value_parser = parse_mode)]
        mode: FfMode,
    },
    /// Checks a unit file over its fold interval.
    Validate {
        file: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameFormat {
    Obj,
    Fold,
}

#[derive(Subcommand)]
enum PatternCmd {
    /// Stitches a plan into a crease pattern.
    Stitch {
        plan: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Samples the motion and compares both sides of every cut crease.
    Certify {
        /// A FOLD pattern, or a plan when `--branches all`.
        pattern: PathBuf,
        /// `stored`, `1`, `2`, a comma separated list per vertex, or `all` for a plan.
        #[arg(long, default_value = "stored")]
        branches: String,
        #[arg(long)]
        samples: Option<usize>,
        /// Also write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Degrees of freedom and branch count of a plan.
    Count { plan: PathBuf },
    /// Writes folded frames from the flat state onwards.
    Sweep {
        pattern: PathBuf,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "obj")]
        format: FrameFormat,
        #[arg(long, default_value = "stored")]
        branches: String,
        /// Part of the certified interval to cover.
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
    },
    /// Draws the crease pattern.
    Svg {
        pattern: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Driving angle for the labels; the file's fold angles otherwise.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(long, default_value = "stored")]
        branches: String,
    },
}

type Vec4 = [f64; 4];
type Vec3 = [f64; 3];

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma separated values, got {}", v.len()))
}

fn parse_branch(s: &str) -> Result<BranchId, String> {
    s.parse().map_err(|_| format!("expected 1, 2 or line, got '{s}'"))
}

fn parse_mode(s: &str) -> Result<FfMode, String> {
    s.parse().map_err(|_| format!("expected a-plus, a-minus, c-plus or c-minus, got '{s}'"))
}

/// Failure of a command, mapped to the exit code.
enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Serialization(_) => Failure::Usage(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Rounds every number to 12 significant digits.
fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => serde_json::json!(round12(n.as_f64().unwrap_or(0.0))),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        v => v,
    }
}

fn print_json<T: Serialize>(x: &T) -> Outcome {
    let v = serde_json::to_value(x).map_err(|e| Failure::Usage(e.to_string()))?;
    let s = serde_json::to_string_pretty(&rounded(v)).map_err(|e| Failure::Usage(e.to_string()))?;
    out!("{s}");
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_plan(path: &Path) -> Result<quadfold::StitchPlan, Failure> {
    let spec: PlanSpec =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(spec.to_plan()?)
}

fn load_fold(path: &Path) -> Result<quadfold::io::ImportedFold, Failure> {
    let doc = FoldFileDoc::from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(import_fold(&doc)?)
}

fn branch_choice(p: &QuadPattern, spec: &str) -> Result<Vec<BranchId>, Failure> {
    let n = p.vertices().len();
    let usage = |m: String| Failure::Usage(format!("--branches: {m}"));
    match spec.trim() {
        "stored" => Ok(p.branches().to_vec()),
        s if !s.contains(',') => Ok(vec![parse_branch(s).map_err(usage)?; n]),
        s => {
            let v = s
                .split(',')
                .map(parse_branch)
                .collect::<Result<Vec<_>, _>>()
                .map_err(usage)?;
            if v.len() != n {
                return Err(usage(format!("{} entries for {n} vertices", v.len())));
            }
            Ok(v)
        }
    }
}

fn config(path: Option<&Path>) -> Result<CliConfig, Failure> {
    let env = std::env::var_os("QUADFOLD_CONFIG").map(PathBuf::from);
    let Some(path) = path.map(Path::to_path_buf).or(env) else {
        return Ok(CliConfig::default());
    };
    let c: CliConfig = serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    c.check().map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    Ok(c)
}

fn vertex_cmd(cmd: VertexCmd, cfg: &CliConfig) -> Outcome {
    let tol = &cfg.tolerances;
    match cmd {
        VertexCmd::Solve { v, rho1 } => {
            let vx = Vertex4::with_tolerance(v.alphas.map(|a| cfg.to_rad(a)), tol.angle)?;
            let s = solve_at_with(&vx, 0, cfg.to_rad(rho1), v.branch, tol)?;
            print_json(&serde_json::json!({
                "branch": s.branch.to_string(),
                "class": vx.classify_with(tol),
                "rho": s.rho.map(|x| cfg.from_rad(x)),
                "rho_lifted": s.rho_lifted.map(|x| cfg.from_rad(x)),
                "xi": cfg.from_rad(s.xi),
            }))
        }
        VertexCmd::Interval { v } => {
            let vx = Vertex4::with_tolerance(v.alphas.map(|a| cfg.to_rad(a)), tol.angle)?;
            let iv = fold_interval_at(&vx, 0, v.branch, tol)?;
            print_json(&serde_json::json!({
                "branch": iv.branch.to_string(),
                "lo": cfg.from_rad(iv.lo),
                "hi": cfg.from_rad(iv.hi),
            }))
        }
    }
}

fn unit_cmd(cmd: UnitCmd, cfg: &CliConfig) -> Outcome {
    match cmd {
        UnitCmd::SolveFf { alphas, mode } => {
            let [a1, a2, a3] = alphas.map(|a| cfg.to_rad(a));
            let a4 = ff_alpha4(a1, a2, a3, mode);
            let u = solve_ff_unit(a1, a2, a3, mode)?;
            eprintln!("alpha4 = {}", round12(cfg.from_rad(a4)));
            print_json(&UnitSpec::from_unit(&u))
        }
        UnitCmd::Validate { file, samples } => {
            let spec: UnitSpec =
                serde_json::from_str(&read(&file)?).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let u = spec.to_unit()?;
            let n = samples.unwrap_or(cfg.samples);
            if n < 2 {
                return Err(Failure::Usage("--samples must be at least 2".into()));
            }
            let r = validate_unit_with(&u, n, &cfg.tolerances)?;
            print_json(&r)?;
            if r.valid {
                Ok(())
            } else {
                Err(Failure::Invalid(format!("side residual {:.3e}", r.max_residual)))
            }
        }
    }
}

fn report_outcome(r: &CompatibilityReport) -> Outcome {
    if r.is_rigid_foldable() {
        Ok(())
    } else {
        Err(Failure::Invalid(r.summary()))
    }
}

fn pattern_cmd(cmd: PatternCmd, cfg: &CliConfig) -> Outcome {
    let tol = &cfg.tolerances;
    match cmd {
        PatternCmd::Stitch { plan, output } => {
            let p = stitch(&load_plan(&plan)?)?;
            write(&output, &export_fold(&p, &vec![0.0; p.creases().len()])?.to_json()?)?;
            out!(
                "{} x {} vertices, {} creases, {} panels -> {}",
                p.rows(),
                p.cols(),
                p.creases().len(),
                p.faces().len(),
                output.display()
            );
            Ok(())
        }
        PatternCmd::Certify {
            pattern,
            branches,
            samples,
            report,
        } => {
            let n = samples.unwrap_or(cfg.samples);
            if n < 2 {
                return Err(Failure::Usage("--samples must be at least 2".into()));
            }
            let reports = if branches.trim() == "all" {
                certify_all(&load_plan(&pattern)?, n)?
            } else {
                let p = load_fold(&pattern)?.pattern;
                vec![certify_with(&p, &branch_choice(&p, &branches)?, n, tol)?]
            };
            for r in &reports {
                let b: Vec<String> = r.branches.iter().map(|b| b.to_string()).collect();
                out!("[{}] {}", b.join(","), r.summary());
            }
            if let Some(path) = report {
                let v = serde_json::to_value(&reports).map_err(|e| Failure::Usage(e.to_string()))?;
                let s = serde_json::to_string_pretty(&rounded(v)).map_err(|e| Failure::Usage(e.to_string()))?;
                write(&path, &(s + "\n"))?;
            }
            reports.iter().try_for_each(report_outcome)
        }
        PatternCmd::Count { plan } => {
            let r = count_dof(&load_plan(&plan)?)?;
            out!("{}; branches {}", r.terms, r.branch_count);
            out!("branches: {}", r.branch_terms);
            Ok(())
        }
        PatternCmd::Sweep {
            pattern,
            frames,
            out_dir,
            format,
            branches,
            fraction,
        } => {
            let p = load_fold(&pattern)?.pattern;
            let b = branch_choice(&p, &branches)?;
            let n = frames.unwrap_or(cfg.frames);
            if n == 0 {
                return Err(Failure::Usage("--frames must be at least 1".into()));
            }
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Failure::Usage("--out-dir is required".into()))?;
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            let s = sweep_with(&p, &b, n, fraction, cfg.samples, tol)?;
            let width = n.saturating_sub(1).to_string().len().max(3);
            for (k, f) in s.frames.iter().enumerate() {
                let (ext, text) = match format {
                    FrameFormat::Obj => ("obj", export_obj(&p, f)?),
                    FrameFormat::Fold => ("fold", export_fold_state(&p, f)?.to_json()?),
                };
                write(&dir.join(format!("frame_{k:0width$}.{ext}")), &text)?;
            }
            out!(
                "{} frames to {} deg, max rigidity residual {:.3e}, max closure residual {:.3e} -> {}",
                s.frames.len(),
                round12(s.frames.last().map_or(0.0, |f| f.driving_angle).to_degrees()),
                s.max_rigidity_residual,
                s.max_closure_residual,
                dir.display()
            );
            Ok(())
        }
        PatternCmd::Svg {
            pattern,
            output,
            rho,
            branches,
        } => {
            let f = load_fold(&pattern)?;
            let p = f.pattern;
            let labels = match rho {
                Some(x) => mv_assignment(&p, &branch_choice(&p, &branches)?, cfg.to_rad(x))?,
                None => labels_from_angles(&p, &f.crease_rho, tol),
            };
            write(&output, &export_svg(&p, &labels)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = config(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Vertex(c) => vertex_cmd(c, &cfg),
        Command::Unit(c) => unit_cmd(c, &cfg),
        Command::Pattern(c) => pattern_cmd(c, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("quadfold: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("quadfold: {m}");
            ExitCode::from(2)
        }
    }
}
