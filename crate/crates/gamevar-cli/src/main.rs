//! `gamevar`: variance decomposition of game outcomes from the command line.
//!
//! Exit codes: 0 success, 1 check failed, 2 input error, 3 enumeration cap
//! exceeded.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gamevar::builtins;
use gamevar::error::Error;
use gamevar::estimate::{
    self, EstimateMethod, PluginTables, RegressionKind, RegressionSpec,
};
use gamevar::exact::{self, DEFAULT_CHANCE_CAP};
use gamevar::game::{GameTree, PlayerRef};
use gamevar::oracle;
use gamevar::policy::{policy_for, PolicyProfile};
use gamevar::skillrps::{self, SweepGrid};
use gamevar::text;

use output::{Envelope, Format, Meta};

#[derive(Parser)]
#[command(name = "gamevar", version, about = "Variance decomposition for extensive-form games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose a player's outcome variance by a conditioning player's actions.
    Decompose(DecomposeArgs),
    /// Three-way skill/chance/remaining decomposition over a rated population.
    Threeway(ThreewayArgs),
    /// Estimate the explained component from sampled or imported playthroughs.
    Estimate(EstimateArgs),
    /// Write a CSV of analytic SkillRPS decompositions over a parameter grid.
    Sweep(SweepArgs),
    /// Cross-check the closed-form decomposition against the brute-force oracle.
    OracleCheck(OracleCheckArgs),
    /// Validate a game document and print diagnostics.
    Validate(ValidateArgs),
    /// Print a built-in game as a canonical document.
    Builtin(BuiltinArgs),
}

#[derive(Args)]
struct GameInput {
    /// Game document path, or `builtin:<name>` (see `gamevar builtin --help`).
    #[arg(long)]
    game: String,
    /// Policy documents, one per player; unlisted players play uniformly.
    #[arg(long = "policies", num_args = 0.., value_name = "PATH")]
    policies: Vec<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: GameInput,
    /// Player whose outcome is decomposed.
    #[arg(long)]
    target: usize,
    /// Conditioning player: a seat index or `chance`.
    #[arg(long)]
    conditioning: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ThreewayArgs {
    /// Game document path or `builtin:<name>`; requires --population.
    #[arg(long, conflicts_with = "skillrps")]
    game: Option<String>,
    /// SkillRPS parameters `N,C,ALPHA`; the canonical rated population is
    /// implied unless --population overrides it.
    #[arg(long)]
    skillrps: Option<String>,
    /// Rated population document.
    #[arg(long)]
    population: Option<PathBuf>,
    /// Seat whose outcome is decomposed.
    #[arg(long, default_value_t = 0)]
    target_seat: usize,
    /// Cap on the joint chance assignment count.
    #[arg(long, default_value_t = DEFAULT_CHANCE_CAP)]
    chance_cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Plugin,
    PluginEmpirical,
    Regression,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: GameInput,
    #[arg(long)]
    target: usize,
    #[arg(long)]
    conditioning: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Plugin)]
    method: MethodArg,
    /// Number of simulated playthroughs (ignored with --log).
    #[arg(long)]
    nu: Option<usize>,
    /// Master seed; required for reproducibility, never defaulted.
    #[arg(long)]
    seed: u64,
    /// Import a playthrough log instead of simulating.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Ridge for the regression normal equations.
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
    /// Bootstrap resamples behind the regression standard error.
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid as `n=1,2;c=0,1;alpha=0,0.5,1`; omitted axes use the default
    /// grid n=1,2,3,5 c=0,1,2,5 alpha=0,0.1,...,1.
    #[arg(long = "skillrps-grid")]
    grid: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[command(flatten)]
    input: GameInput,
    #[arg(long)]
    target: usize,
    #[arg(long)]
    conditioning: String,
    /// Cap on the joint assignment count.
    #[arg(long, default_value_t = oracle::DEFAULT_ASSIGNMENT_CAP)]
    cap: u64,
    /// Fault injection for self-tests: flips the sign of the closed-form
    /// value so the check must fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    game: String,
}

#[derive(Args)]
struct BuiltinArgs {
    /// One of: figure1, rps, chance-rps, kuhn, skill-rps:N,C,ALPHA.
    name: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::EnumerationTooLarge { .. } | Error::ChanceEnumerationTooLarge { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<text::ParseError> for Failure {
    fn from(e: text::ParseError) -> Failure {
        Failure::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Decompose(args) => cmd_decompose(args),
        Cmd::Threeway(args) => cmd_threeway(args),
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::OracleCheck(args) => cmd_oracle_check(args),
        Cmd::Validate(args) => cmd_validate(args),
        Cmd::Builtin(args) => cmd_builtin(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Loads a game from a path or a `builtin:` reference, returning the tree and
/// the bytes that feed the input digest.
fn load_game(spec: &str) -> Result<(GameTree, Vec<u8>), Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let tree = builtins::builtin(name)?;
        let bytes = text::serialize_game(&tree).into_bytes();
        return Ok((tree, bytes));
    }
    let bytes = std::fs::read(spec).map_err(|e| Failure::input(format!("{spec}: {e}")))?;
    let doc = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::input(format!("{spec}: not valid UTF-8")))?;
    let tree = text::parse_game(&doc).map_err(|e| Failure::input(format!("{spec}: {e}")))?;
    Ok((tree, bytes))
}

fn load_profile(
    tree: &GameTree,
    paths: &[PathBuf],
    digest_bytes: &mut Vec<u8>,
) -> Result<PolicyProfile, Failure> {
    let mut policies: Vec<Option<gamevar::BehavioralPolicy>> = vec![None; tree.player_count()];
    for path in paths {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        digest_bytes.extend_from_slice(&bytes);
        let doc = String::from_utf8(bytes)
            .map_err(|_| Failure::input(format!("{}: not valid UTF-8", path.display())))?;
        let policy = text::parse_policy(&doc, tree)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let PlayerRef::Player(i) = policy.owner() else {
            return Err(Failure::input("policy files declare seat players"));
        };
        if policies[i].replace(policy).is_some() {
            return Err(Failure::input(format!("two policy files for player {i}")));
        }
    }
    let policies = policies
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.unwrap_or_else(|| gamevar::BehavioralPolicy::uniform(tree, PlayerRef::Player(i))))
        .collect();
    PolicyProfile::new(tree, policies).map_err(Failure::from)
}

fn parse_conditioning(s: &str, tree: &GameTree) -> Result<PlayerRef, Failure> {
    let p = PlayerRef::parse(s).map_err(Failure::from)?;
    if let PlayerRef::Player(i) = p {
        if i >= tree.player_count() {
            return Err(Failure::input(format!("unknown player `{i}`")));
        }
    }
    Ok(p)
}

fn check_target(target: usize, tree: &GameTree) -> Result<(), Failure> {
    if target >= tree.player_count() {
        return Err(Failure::input(format!("unknown player `{target}`")));
    }
    Ok(())
}

fn cmd_decompose(args: DecomposeArgs) -> Result<(), Failure> {
    let (tree, mut digest_bytes) = load_game(&args.input.game)?;
    let profile = load_profile(&tree, &args.input.policies, &mut digest_bytes)?;
    check_target(args.target, &tree)?;
    let conditioning = parse_conditioning(&args.conditioning, &tree)?;
    let report = exact::explained_variance(&tree, &profile, args.target, conditioning)?;
    let envelope = Envelope {
        meta: Meta::new(None, &digest_bytes),
        report: output::decomposition(&tree, &report),
    };
    envelope.print(args.format);
    Ok(())
}

fn cmd_threeway(args: ThreewayArgs) -> Result<(), Failure> {
    let mut digest_bytes = Vec::new();
    let (tree, params) = match (&args.game, &args.skillrps) {
        (Some(game), None) => {
            let (tree, bytes) = load_game(game)?;
            digest_bytes = bytes;
            (tree, None)
        }
        (None, Some(spec)) => {
            let params = builtins::parse_skill_rps_spec(spec)?;
            let tree = builtins::build_skill_rps(&params);
            digest_bytes.extend_from_slice(text::serialize_game(&tree).as_bytes());
            (tree, Some(params))
        }
        _ => return Err(Failure::input("exactly one of --game or --skillrps is required")),
    };
    let population = match (&args.population, &params) {
        (Some(path), _) => {
            let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            digest_bytes.extend_from_slice(&bytes);
            let doc = String::from_utf8(bytes)
                .map_err(|_| Failure::input(format!("{}: not valid UTF-8", path.display())))?;
            text::parse_population(&doc, &tree)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        }
        (None, Some(p)) => builtins::skill_rps_population(p, &tree)?,
        (None, None) => {
            return Err(Failure::input("--population is required with --game"));
        }
    };
    if args.game.is_some() {
        eprintln!("note: leaf rewards verified to negate; full seat symmetry is not checked for external games");
    }
    let report = exact::threeway_decompose(&tree, &population, args.target_seat, args.chance_cap)?;
    let analytic = params.map(|p| skillrps::analytic_threeway(&p));
    let envelope = Envelope {
        meta: Meta::new(None, &digest_bytes),
        report: output::threeway(&report, analytic.as_ref()),
    };
    envelope.print(args.format);
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let (tree, mut digest_bytes) = load_game(&args.input.game)?;
    let profile = load_profile(&tree, &args.input.policies, &mut digest_bytes)?;
    check_target(args.target, &tree)?;
    let conditioning = parse_conditioning(&args.conditioning, &tree)?;

    let dataset = match &args.log {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            digest_bytes.extend_from_slice(&bytes);
            estimate::import_dataset(path, &tree, conditioning)?
        }
        None => {
            let nu = args
                .nu
                .ok_or_else(|| Failure::input("--nu is required unless --log is given"))?;
            estimate::simulate_dataset(&tree, &profile, conditioning, args.target, nu, args.seed)?
        }
    };

    let pi = policy_for(&tree, &profile, conditioning);
    let report = match args.method {
        MethodArg::Plugin => {
            let tables = PluginTables::exact(&tree, &profile, conditioning, args.target)?;
            estimate::plugin_estimate(&dataset, &tables, &pi, &tree)?
        }
        MethodArg::PluginEmpirical => {
            let (report, empirical) =
                estimate::plugin_estimate_empirical(&dataset, &tree, &profile, args.target)?;
            let nu = dataset.records.len() as f64;
            for (u, eta_hat) in &empirical.eta_hat {
                if eta_hat * nu < 10.0 {
                    eprintln!(
                        "warning: info state `{}` was visited {} times; its empirical visit probability is unreliable and biased upward",
                        tree.info_state(*u).name,
                        (eta_hat * nu).round() as u64
                    );
                }
            }
            report
        }
        MethodArg::Regression => {
            let spec = RegressionSpec {
                kind: RegressionKind::SaturatedTabular,
                ridge: args.ridge,
                bootstrap: args.bootstrap,
            };
            estimate::regression_estimate(&tree, &dataset, &spec, &pi, args.seed)?
        }
    };

    // Desk-size games admit the exact value; print it with a z-score.
    let exact_value = exact::explained_variance(&tree, &profile, args.target, conditioning)
        .ok()
        .map(|r| r.explained);
    let z_score = match (exact_value, report.standard_error) {
        (Some(e), se) if se > 0.0 => Some((report.estimate - e) / se),
        _ => None,
    };
    let method = match report.method {
        EstimateMethod::Plugin => "plugin",
        EstimateMethod::PluginEmpiricalEta => "plugin-empirical-eta",
        EstimateMethod::Regression => "regression",
    };
    let envelope = Envelope {
        meta: Meta::new(Some(args.seed), &digest_bytes),
        report: output::estimate(&report, method, exact_value, z_score),
    };
    envelope.print(args.format);
    Ok(())
}

fn parse_grid(spec: &str) -> Result<SweepGrid, Failure> {
    let mut grid = SweepGrid::default();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (axis, values) = part
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("grid axis `{part}` is not `<axis>=<v,...>`")))?;
        let split = || values.split(',').map(str::trim);
        match axis.trim() {
            "n" => {
                grid.n = split()
                    .map(|v| v.parse::<u32>().map_err(|_| Failure::input(format!("invalid n `{v}`"))))
                    .collect::<Result<_, _>>()?;
            }
            "c" => {
                grid.c = split()
                    .map(|v| v.parse::<u32>().map_err(|_| Failure::input(format!("invalid c `{v}`"))))
                    .collect::<Result<_, _>>()?;
            }
            "alpha" => {
                grid.alpha = split()
                    .map(|v| v.parse::<f64>().map_err(|_| Failure::input(format!("invalid alpha `{v}`"))))
                    .collect::<Result<_, _>>()?;
            }
            other => return Err(Failure::input(format!("unknown grid axis `{other}`"))),
        }
    }
    Ok(grid)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let grid = match &args.grid {
        Some(spec) => parse_grid(spec)?,
        None => SweepGrid::default(),
    };
    let rows = skillrps::sweep(&grid)?;
    let csv = skillrps::sweep_csv(&rows);
    std::fs::write(&args.out, csv)
        .map_err(|e| Failure::input(format!("{}: {e}", args.out.display())))?;
    Ok(())
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<(), Failure> {
    let (tree, mut digest_bytes) = load_game(&args.input.game)?;
    let profile = load_profile(&tree, &args.input.policies, &mut digest_bytes)?;
    check_target(args.target, &tree)?;
    let conditioning = parse_conditioning(&args.conditioning, &tree)?;
    let exact_report = exact::explained_variance(&tree, &profile, args.target, conditioning)?;
    let mut closed_form = exact_report.explained;
    if args.inject_fault {
        closed_form = -closed_form - 0.1;
    }
    let oracle_value =
        oracle::oracle_explained_variance(&tree, &profile, args.target, conditioning, args.cap)?;
    let tolerance = 1e-9 * exact_report.total_variance.max(1.0);
    let delta = (closed_form - oracle_value).abs();
    println!("closed_form = {closed_form}");
    println!("oracle = {oracle_value}");
    println!("delta = {delta}");
    println!("tolerance = {tolerance}");
    if delta <= tolerance {
        println!("oracle-check: OK");
        Ok(())
    } else {
        Err(Failure::check(format!(
            "closed form {closed_form} and oracle {oracle_value} disagree beyond {tolerance}"
        )))
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    // Parsing already rejects invalid documents; report its message as the
    // diagnostic. Builtins go through validate() directly.
    if let Some(name) = args.game.strip_prefix("builtin:") {
        let tree = builtins::builtin(name)?;
        let diags = tree.validate();
        if diags.is_empty() {
            println!("ok: {} is valid", tree.name());
            return Ok(());
        }
        for d in &diags {
            println!("{d}");
        }
        return Err(Failure::check(format!("{} diagnostics", diags.len())));
    }
    let bytes = std::fs::read(&args.game).map_err(|e| Failure::input(format!("{}: {e}", args.game)))?;
    let doc = String::from_utf8(bytes).map_err(|_| Failure::input("not valid UTF-8"))?;
    match text::parse_game(&doc) {
        Ok(tree) => {
            println!("ok: {} is valid", tree.name());
            Ok(())
        }
        Err(e) => {
            println!("{e}");
            Err(Failure::check("1 diagnostic".to_string()))
        }
    }
}

fn cmd_builtin(args: BuiltinArgs) -> Result<(), Failure> {
    let tree = builtins::builtin(&args.name)?;
    print!("{}", text::serialize_game(&tree));
    Ok(())
}
