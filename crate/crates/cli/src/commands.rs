use crate::error::CliError;
use crate::{
    EpisodeOpts, EvalArgs, FrameFormatArg, MapCommand, MissionArgs, PlanArgs, RenderArgs, RouteOpts,
    RunArgs, ServeArgs, TrajplotArgs,
};
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command as Process, Stdio};
use std::sync::Arc;
use vg_core::detect::{
    compose_mission, detections_to_waypoints, DetectionFile, Mission, MissionTracker,
};
use vg_core::envserver::{serve_stream, serve_tcp, RemotePolicy};
use vg_core::episode::{run_episode, Episode, EpisodeConfig, EpisodeResult};
use vg_core::eval::{evaluate, format_table, RunSpec};
use vg_core::maps::{bundled_names, resolve_map, search_path_from_env};
use vg_core::planner::{extract_waypoints, Planner};
use vg_core::policies::PolicyKind;
use vg_core::scenario::ScenarioSet;
use vg_core::world::{load_map, CityMap, SemanticClass};

fn open_map(spec: &str) -> Result<CityMap, CliError> {
    Ok(resolve_map(spec, &search_path_from_env())?)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output serializes")
}

fn base_config(opts: &EpisodeOpts) -> Result<EpisodeConfig, CliError> {
    let mut config = match &opts.config {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::new("BadConfig", format!("{}: {e}", path.display())))?,
        None => EpisodeConfig::default(),
    };
    if let Some(s) = opts.scheme {
        config.scheme = s;
    }
    if let Some(p) = opts.plan {
        config.plan_mode = p;
    }
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if let Some(h) = opts.horizon {
        config.horizon = h;
    }
    if let Some(p) = opts.pedestrians {
        config.pedestrians = p.on();
    }
    Ok(config)
}

/// Fills in the route from flags, keeping the config's route, falling back
/// to the first two named points of the map.
fn apply_route(config: &mut EpisodeConfig, route: &RouteOpts, map: &CityMap) -> Result<(), CliError> {
    let mut names = map.named_points().keys();
    if config.route.0.is_empty() {
        config.route.0 = names.next().cloned().unwrap_or_default();
    }
    if config.route.1.is_empty() {
        config.route.1 = names
            .find(|n| **n != config.route.0)
            .cloned()
            .unwrap_or_default();
    }
    if let Some(f) = &route.from {
        config.route.0 = f.clone();
    }
    if let Some(t) = &route.to {
        config.route.1 = t.clone();
    }
    if config.route.0.is_empty() || config.route.1.is_empty() {
        return Err(CliError::new("NoRoute", "map has no named points; pass --from and --to"));
    }
    Ok(())
}

pub fn run(a: RunArgs) -> Result<(), CliError> {
    let map = open_map(&a.episode.map)?;
    let mut config = base_config(&a.episode)?;
    apply_route(&mut config, &a.route, &map)?;
    if a.no_log {
        config.record_steps = false;
    }
    let result = match a.policy {
        PolicyKind::Remote => run_remote(&map, &config, a.agent_cmd.as_deref())?,
        kind => {
            let mut policy = kind.build(config.seed).expect("local policy");
            run_episode(policy.as_mut(), &config, &map)?
        }
    };
    let line = to_json(&result) + "\n";
    match &a.out {
        Some(path) => write_file(path, line.as_bytes()),
        None => io::stdout()
            .write_all(line.as_bytes())
            .map_err(|e| CliError::io("stdout", e)),
    }
}

fn run_remote(map: &CityMap, config: &EpisodeConfig, cmd: Option<&str>) -> Result<EpisodeResult, CliError> {
    let cmd = cmd.ok_or_else(|| CliError::new("Usage", "--policy remote needs --agent-cmd"))?;
    let mut child = Process::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| CliError::io("agent command", e))?;
    let stdin = child.stdin.take().expect("piped");
    let stdout = BufReader::new(child.stdout.take().expect("piped"));
    let mut policy = RemotePolicy::new(stdout, stdin);
    let result = run_episode(&mut policy, config, map);
    drop(policy);
    let _ = child.kill();
    let _ = child.wait();
    Ok(result?)
}

pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    let map = open_map(&a.episode.map)?;
    let mut base = base_config(&a.episode)?;
    base.record_steps = false;
    let mut set = ScenarioSet::resolve(&a.set)?;
    if let Some(p) = a.episode.pedestrians {
        set.pedestrians = p.on();
    }
    if let Some(n) = a.episodes {
        set.episodes_per_route = n;
    }
    let policy = match a.policy.as_str() {
        "auto" => None,
        name => Some(
            name.parse::<PolicyKind>()
                .map_err(|e| CliError::new("Usage", e.to_string()))?,
        ),
    };
    let runs: Vec<RunSpec> = a
        .schemes
        .iter()
        .flat_map(|&scheme| {
            a.plans.iter().map(move |&plan_mode| RunSpec {
                scheme,
                plan_mode,
                policy,
            })
        })
        .collect();
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let seed = base.seed;

    let mut log = match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(&dir.display().to_string(), e))?;
            let path = dir.join("episodes.jsonl");
            let file = fs::File::create(&path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
            Some(BufWriter::new(file))
        }
        None => None,
    };
    let mut log_error = None;
    let report = evaluate(&map, &set, &base, &runs, seed, jobs, |_, result| {
        if let Some(w) = log.as_mut() {
            if let Err(e) = writeln!(w, "{}", to_json(result)) {
                log_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = log_error {
        return Err(CliError::io("episodes.jsonl", e));
    }
    if let Some(mut w) = log {
        w.flush().map_err(|e| CliError::io("episodes.jsonl", e))?;
    }
    let table = format_table(&report);
    let json = report.to_json();
    if let Some(dir) = &a.out {
        write_file(&dir.join("report.json"), json.as_bytes())?;
        write_file(&dir.join("table.txt"), table.as_bytes())?;
    }
    print!("{}", if a.json { json } else { table });
    Ok(())
}

pub fn plan(a: PlanArgs) -> Result<(), CliError> {
    let map = open_map(&a.map)?;
    let label = |l: &str| {
        map.named_point(l)
            .ok_or_else(|| CliError::new("UnknownLabel", format!("no named point {l:?} in map {}", map.name())))
    };
    let (from, to) = (label(&a.from)?, label(&a.to)?);
    let path = Planner::new(&map, a.clearance).plan(from, to)?;
    let waypoints = extract_waypoints(&path, a.spacing);
    let out = json!({
        "format": "vgplan/1",
        "map": map.name(),
        "from": a.from,
        "to": a.to,
        "clearance": a.clearance,
        "length": path.length,
        "cardinal_moves": path.cardinal_moves,
        "diagonal_moves": path.diagonal_moves,
        "points": path.points,
        "waypoints": waypoints.waypoints.iter().map(|w| w.point).collect::<Vec<_>>(),
    });
    println!("{}", to_json(&out));
    Ok(())
}

pub fn render_frame(a: RenderArgs) -> Result<(), CliError> {
    let map = open_map(&a.episode.map)?;
    let mut config = base_config(&a.episode)?;
    apply_route(&mut config, &a.route, &map)?;
    let mut episode = Episode::new(&map, config, true)?;
    let mut policy = PolicyKind::oracle_for(episode.config().scheme)
        .build(episode.config().seed)
        .expect("oracle");
    for _ in 0..a.steps {
        if episode.is_done() {
            break;
        }
        let action = policy
            .act(&episode.observation())
            .map_err(|e| CliError::new("PolicyError", e.to_string()))?;
        episode.step(action)?;
    }
    let frame = episode.render_current();
    let bytes = match a.format {
        FrameFormatArg::Raw => frame.as_bytes().to_vec(),
        FrameFormatArg::Ppm => frame.to_ppm(),
    };
    write_file(&a.out, &bytes)
}

pub fn serve(a: ServeArgs) -> Result<(), CliError> {
    let map = open_map(&a.episode.map)?;
    let mut config = base_config(&a.episode)?;
    apply_route(&mut config, &a.route, &map)?;
    // Fail before accepting clients if the base episode cannot start.
    Episode::new(&map, config.clone(), false)?;
    if a.stdio {
        let stdin = io::stdin();
        return serve_stream(&map, &config, stdin.lock(), io::stdout().lock())
            .map_err(|e| CliError::io("stdio session", e));
    }
    let addr = format!("{}:{}", a.host, a.port);
    let listener = TcpListener::bind(&addr).map_err(|e| CliError::new("BindFailed", format!("{addr}: {e}")))?;
    let local = listener.local_addr().map_err(|e| CliError::io("listener", e))?;
    eprintln!("vgenv/1 listening on {local}");
    serve_tcp(listener, Arc::new(map), config, None).map_err(|e| CliError::io("server", e))
}

pub fn mission(a: MissionArgs) -> Result<(), CliError> {
    let file = DetectionFile::from_json(&read_text(&a.detections)?)?;
    let mission = Mission::parse(&a.prompt)?;
    let resolved = detections_to_waypoints(&file.detections, &file.camera, &file.pose)?;
    let targets = compose_mission(&mission, &resolved, file.pose.position)?;
    let tracker = MissionTracker::new(targets);
    let out = json!({
        "mission": mission,
        "scheme": a.scheme,
        "targets": tracker.targets,
        "geometry": tracker.geometry(a.scheme, file.pose.position),
    });
    println!("{}", to_json(&out));
    Ok(())
}

pub fn trajplot(a: TrajplotArgs) -> Result<(), CliError> {
    let map = open_map(&a.map)?;
    let file = fs::File::open(&a.logs).map_err(|e| CliError::io(&a.logs.display().to_string(), e))?;
    let mut episodes = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(&a.logs.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let result: EpisodeResult = serde_json::from_str(&line)
            .map_err(|e| CliError::new("LogParse", format!("{} line {}: {e}", a.logs.display(), n + 1)))?;
        episodes.push(result);
    }
    let svg = crate::trajplot::render_svg(&map, &episodes)?;
    write_file(&a.out, svg.as_bytes())
}

pub fn map(cmd: MapCommand) -> Result<(), CliError> {
    match cmd {
        MapCommand::List => {
            for name in bundled_names() {
                println!("{name}");
            }
        }
        MapCommand::Info { map } => print!("{}", map_info(&open_map(&map)?)),
        MapCommand::Validate { path } => {
            let map = load_map(&path)?;
            println!("ok {} {}x{} cells", map.name(), map.width(), map.height());
        }
        MapCommand::Export { map } => println!("{}", open_map(&map)?.to_json()),
    }
    Ok(())
}

fn map_info(map: &CityMap) -> String {
    let b = map.bounds();
    let mut s = format!(
        "name {}\ncell_size {}\ngrid {}x{}\nbounds [{}, {}] x [{}, {}]\nintersections {}\npedestrians {}\n",
        map.name(),
        map.cell_size(),
        map.width(),
        map.height(),
        b.min.x,
        b.max.x,
        b.min.y,
        b.max.y,
        map.road_graph().intersection_count(),
        map.pedestrians().len(),
    );
    for class in SemanticClass::ALL {
        let n = map.classes().iter().filter(|&&c| c == class).count();
        if n > 0 {
            s += &format!("cells {} {}\n", class.name(), n);
        }
    }
    for (label, p) in map.named_points() {
        s += &format!("point {label} {} {}\n", p.x, p.y);
    }
    s
}
