mod commands;
mod error;
mod trajplot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;
use vg_core::guidance::GuidanceScheme;
use vg_core::planner::PlanMode;
use vg_core::policies::PolicyKind;

#[derive(Parser)]
#[command(name = "vg", version, about = "Urban navigation simulator with virtual guidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its result as JSON.
    Run(RunArgs),
    /// Evaluate a policy over a route set.
    Eval(EvalArgs),
    /// Plan a route and print it as JSON.
    Plan(PlanArgs),
    /// Render the observation frame at the start of an episode (or after N steps).
    RenderFrame(RenderArgs),
    /// Serve the environment over vgenv/1.
    Serve(ServeArgs),
    /// Turn detections and a mission prompt into guidance geometry.
    Mission(MissionArgs),
    /// Draw episode trajectories over the map as SVG.
    Trajplot(TrajplotArgs),
    /// Inspect or validate maps.
    #[command(subcommand)]
    Map(MapCommand),
}

fn parse_plan_mode(s: &str) -> Result<PlanMode, String> {
    PlanMode::parse(s).ok_or_else(|| format!("expected one-time, real-time or real-time:<period>, got `{s}`"))
}

#[derive(Args, Clone)]
struct EpisodeOpts {
    /// Map file, map name in VG_MAP_DIR, or bundled map name.
    #[arg(long, default_value = "city8")]
    map: String,
    /// Episode config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<GuidanceScheme>,
    #[arg(long, value_parser = parse_plan_mode)]
    plan: Option<PlanMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    pedestrians: Option<Toggle>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn on(self) -> bool {
        matches!(self, Toggle::On)
    }
}

#[derive(Args, Clone)]
struct RouteOpts {
    /// Start label; defaults to the config route, then the map's first named point.
    #[arg(long = "from")]
    from: Option<String>,
    /// Destination label.
    #[arg(long = "to")]
    to: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    episode: EpisodeOpts,
    #[command(flatten)]
    route: RouteOpts,
    #[arg(long, default_value = "pursuit")]
    policy: PolicyKind,
    /// Agent command for `--policy remote`; it talks vgenv/1 on stdin/stdout.
    #[arg(long)]
    agent_cmd: Option<String>,
    /// Drop the per-step log from the output.
    #[arg(long)]
    no_log: bool,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    episode: EpisodeOpts,
    /// Bundled set (seen, unseen, seen89) or a scenario JSON file.
    #[arg(long, default_value = "seen")]
    set: String,
    /// Comma-separated schemes; one report row per scheme and planning mode.
    #[arg(long = "schemes", value_delimiter = ',', default_value = "path")]
    schemes: Vec<GuidanceScheme>,
    #[arg(long = "plans", value_delimiter = ',', value_parser = parse_plan_mode, default_value = "one-time")]
    plans: Vec<PlanMode>,
    /// `auto` uses the oracle matching each scheme.
    #[arg(long, default_value = "auto")]
    policy: String,
    #[arg(long)]
    episodes: Option<usize>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory for report.json, table.txt and episodes.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, default_value = "city8")]
    map: String,
    #[arg(long = "from")]
    from: String,
    #[arg(long = "to")]
    to: String,
    /// Minimum distance kept from non-road cells, meters.
    #[arg(long, default_value_t = vg_core::episode::DEFAULT_PLAN_CLEARANCE)]
    clearance: f64,
    #[arg(long, default_value_t = vg_core::planner::DEFAULT_WAYPOINT_SPACING)]
    spacing: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameFormatArg {
    Raw,
    Ppm,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    episode: EpisodeOpts,
    #[command(flatten)]
    route: RouteOpts,
    /// Advance this many steps with the scheme's oracle first.
    #[arg(long, default_value_t = 0)]
    steps: u64,
    #[arg(long, value_enum, default_value = "ppm")]
    format: FrameFormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    episode: EpisodeOpts,
    #[command(flatten)]
    route: RouteOpts,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7447)]
    port: u16,
    /// Serve one session on standard input and output.
    #[arg(long)]
    stdio: bool,
}

#[derive(Args)]
struct MissionArgs {
    /// vgdet/1 detection file.
    #[arg(long)]
    detections: PathBuf,
    /// Labels joined by `&` (all, in order) or `|` (nearest one).
    #[arg(long)]
    prompt: String,
    #[arg(long, default_value = "path")]
    scheme: GuidanceScheme,
}

#[derive(Args)]
struct TrajplotArgs {
    #[arg(long, default_value = "city8")]
    map: String,
    /// Episode log (JSON lines) as written by `vg eval --out` or `vg run`.
    #[arg(long)]
    logs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum MapCommand {
    /// List bundled maps.
    List,
    /// Print size, class counts and named points.
    Info { map: String },
    /// Check a map file and report the first problem.
    Validate { path: PathBuf },
    /// Print a map as vgmap/1 JSON.
    Export { map: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Eval(a) => commands::eval(a),
        Command::Plan(a) => commands::plan(a),
        Command::RenderFrame(a) => commands::render_frame(a),
        Command::Serve(a) => commands::serve(a),
        Command::Mission(a) => commands::mission(a),
        Command::Trajplot(a) => commands::trajplot(a),
        Command::Map(m) => commands::map(m),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::new("Usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
