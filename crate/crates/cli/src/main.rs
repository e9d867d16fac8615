mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use dess::channel::{fitts_bound, worst_case_reach, ChannelSpec};
use dess::experiment::{
    condition_schedule, expand_trials, Family, InputSource, ScheduleSettings, SpeedAgent, Variant, ZoneCenterAgent,
};
use dess::muscle::{force_trace, MuscleSpec};
use dess::nerve::{
    cost_sweep, grid_sweet_spot, linear_constraint, linspace, minimum_cost, sample_constraint, sweet_spot,
};
use dess::reach::{frontier, max_distance, sat_curve, two_muscle_frontier, FrictionSpec, FrontierPoint, ReachConfig};
use dess::transport::{best_uniform_time, plan_diverse, TransportMode};
use dess_service::{load_session_files, replay_session, ResultsBundle, SessionConfig, SessionStore};

use crate::config::Config;
use crate::output::{num, opt, BoxError, Output};

#[derive(Debug, Parser)]
#[command(
    name = "dess",
    version,
    about = "Speed-accuracy tradeoff simulations, analyses and the experiment server"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for schedule shuffling and target sides.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reaching-time bound T + F/R against the bisection controller's worst case.
    FittsBound {
        #[arg(long)]
        max_delay: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<u32>>,
        #[arg(long)]
        max_ratio_exponent: Option<u32>,
    },
    /// Delay/rate sweet spot under R = λT and the cost sweep under T = (R-1)/8.
    SweetSpot {
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        difficulty: Option<Vec<f64>>,
        #[arg(long)]
        sweep_difficulty: Option<f64>,
    },
    /// Motor-unit force traces for recruitment and release.
    MuscleTrace {
        #[arg(long, value_delimiter = ',')]
        strengths: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        release: Option<Vec<f64>>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Reach frontiers and speed-accuracy curves, uniform versus diverse units.
    Frontier {
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        two_muscles: bool,
    },
    /// Travel-time bounds with one or several modes of transport.
    Transport {
        #[arg(long)]
        distance: Option<f64>,
        #[arg(long)]
        switch_loss: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        tolerances: Option<Vec<f64>>,
    },
    /// Start the session server.
    Serve {
        #[arg(long)]
        addr: Option<String>,
        /// Directory holding one subdirectory per session.
        #[arg(long)]
        root: Option<PathBuf>,
    },
    /// Per-condition summaries and Fitts fits over stored session logs.
    Analyze {
        #[arg(long, required = true)]
        session: Vec<PathBuf>,
    },
    /// Re-run logged inputs and compare trial summaries.
    Replay {
        #[arg(long)]
        session: PathBuf,
    },
    /// Run a schedule with scripted subjects and store it as a session.
    Simulate {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Print the trial list a family expands to.
    Schedule {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), BoxError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.as_path();
    match cli.command {
        Command::FittsBound {
            max_delay,
            rates,
            max_ratio_exponent,
        } => {
            let c = &mut cfg.fitts_bound;
            c.max_delay = max_delay.unwrap_or(c.max_delay);
            c.rates = rates.unwrap_or(c.rates.clone());
            c.max_ratio_exponent = max_ratio_exponent.unwrap_or(c.max_ratio_exponent);
            fitts_bound_cmd(&cfg, out)
        }
        Command::SweetSpot {
            lambda,
            difficulty,
            sweep_difficulty,
        } => {
            let c = &mut cfg.sweet_spot;
            c.lambdas = lambda.unwrap_or(c.lambdas.clone());
            c.difficulties = difficulty.unwrap_or(c.difficulties.clone());
            c.sweep_difficulty = sweep_difficulty.unwrap_or(c.sweep_difficulty);
            sweet_spot_cmd(&cfg, out)
        }
        Command::MuscleTrace {
            strengths,
            release,
            dt,
            duration,
        } => {
            let c = &mut cfg.muscle_trace;
            c.strengths = strengths.unwrap_or(c.strengths.clone());
            c.release = release.unwrap_or(c.release.clone());
            c.dt = dt.unwrap_or(c.dt);
            c.duration = duration.unwrap_or(c.duration);
            muscle_trace_cmd(&cfg, out)
        }
        Command::Frontier { dt, two_muscles } => {
            let c = &mut cfg.frontier;
            c.dt = dt.unwrap_or(c.dt);
            c.two_muscles |= two_muscles;
            frontier_cmd(&cfg, out)
        }
        Command::Transport {
            distance,
            switch_loss,
            tolerances,
        } => {
            let c = &mut cfg.transport;
            c.distance = distance.unwrap_or(c.distance);
            c.switch_loss = switch_loss.unwrap_or(c.switch_loss);
            c.tolerances = tolerances.unwrap_or(c.tolerances.clone());
            transport_cmd(&cfg, out)
        }
        Command::Serve { addr, root } => {
            let c = &mut cfg.serve;
            c.addr = addr.unwrap_or(c.addr.clone());
            c.root = root.unwrap_or(c.root.clone());
            serve_cmd(&cfg)
        }
        Command::Analyze { session } => analyze_cmd(&session, out),
        Command::Replay { session } => replay_cmd(&session, out),
        Command::Simulate { family, trials } => {
            let c = &mut cfg.simulate;
            c.family = family.unwrap_or(c.family.clone());
            c.trials_per_condition = trials.unwrap_or(c.trials_per_condition);
            simulate_cmd(&cfg, out)
        }
        Command::Schedule { family, trials } => {
            let c = &mut cfg.simulate;
            c.family = family.unwrap_or(c.family.clone());
            c.trials_per_condition = trials.unwrap_or(c.trials_per_condition);
            schedule_cmd(&cfg, out)
        }
    }
}

fn fitts_bound_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let c = &cfg.fitts_bound;
    if c.rates.is_empty() || c.rates.contains(&0) {
        return Err("rates must be non-empty and >= 1".into());
    }
    let mut rows = Vec::new();
    for t in 0..=c.max_delay {
        for &r in &c.rates {
            let chan = ChannelSpec::ticks(t, r as f64)?;
            for k in 1..=c.max_ratio_exponent {
                let ratio = (k as f64).exp2();
                let f = ratio.log2();
                let worst = worst_case_reach(ratio / 2.0, 1.0, &chan)?;
                rows.push(vec![
                    t.to_string(),
                    r.to_string(),
                    num(ratio),
                    num(f),
                    num(fitts_bound(f, t as f64, r as f64)),
                    num(t as f64 + (f / r as f64).ceil()),
                    worst.map(|w| w.to_string()).unwrap_or_default(),
                ]);
            }
        }
    }
    let mut o = Output::new(out)?;
    o.csv(
        "fitts_bound.csv",
        &["T", "R", "ratio", "F", "bound", "integer_bound", "oracle_worst"],
        "reaching-time lower bound T + F/R and the worst case of the bisection controller, in ticks",
        rows,
    )?;
    o.finish("fitts-bound", &cfg.fitts_bound)
}

fn sweet_spot_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let c = &cfg.sweet_spot;
    let mut rows = Vec::new();
    for &lambda in &c.lambdas {
        for &f in &c.difficulties {
            let exact = sweet_spot(f, lambda)?;
            let grid = grid_sweet_spot(f, lambda, c.grid_max, c.grid_step)?;
            rows.push(vec![
                num(lambda),
                num(f),
                num(exact.delay),
                num(exact.rate),
                num(exact.total),
                num(grid.delay),
                num(grid.rate),
                num(grid.total),
            ]);
        }
    }
    let rates = linspace(c.rate_min, c.rate_max, c.rate_points);
    let sweep = cost_sweep(c.sweep_difficulty, &sample_constraint(rates, linear_constraint))?;
    let best = minimum_cost(&sweep).ok_or("empty rate grid")?;
    let mut o = Output::new(out)?;
    o.csv(
        "sweet_spot.csv",
        &["lambda", "F", "T", "R", "total", "grid_T", "grid_R", "grid_total"],
        "optimal delay and rate under R = lambda*T, closed form and grid search",
        rows,
    )?;
    o.csv(
        "cost_sweep.csv",
        &["R", "T", "delay_cost", "rate_cost", "total"],
        "delay cost, rate cost and total cost along the component tradeoff T = (R-1)/8",
        sweep.iter().map(|s| {
            vec![
                num(s.rate),
                num(linear_constraint(s.rate)),
                num(s.delay_cost),
                num(s.rate_cost),
                num(s.total),
            ]
        }),
    )?;
    o.csv(
        "cost_minimum.csv",
        &["F", "R", "T", "total"],
        "grid minimizer of the cost sweep",
        [vec![
            num(c.sweep_difficulty),
            num(best.rate),
            num(linear_constraint(best.rate)),
            num(best.total),
        ]],
    )?;
    o.finish("sweet-spot", &cfg.sweet_spot)
}

fn muscle_trace_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let c = &cfg.muscle_trace;
    let m = MuscleSpec::new(&c.strengths)?;
    let trace = force_trace(&m, &c.release, c.dt, c.duration, c.sample_every)?;
    let mut columns = vec!["time".to_string()];
    columns.extend((1..=m.len()).map(|i| format!("c{i}")));
    columns.push("total".into());
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut o = Output::new(out)?;
    o.csv(
        "muscle_trace.csv",
        &columns,
        "motor-unit forces (ascending strength) and their sum after recruitment at t=0 and release",
        trace.iter().map(|s| {
            let mut row = vec![num(s.time)];
            row.extend(s.forces.iter().map(|&f| num(f)));
            row.push(num(s.total));
            row
        }),
    )?;
    o.finish("muscle-trace", &cfg.muscle_trace)
}

fn plan_label(p: &FrontierPoint) -> String {
    p.plan
        .durations
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn frontier_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let c = &cfg.frontier;
    let friction = FrictionSpec::new(c.static_friction, c.kinetic_friction)?;
    let reach = ReachConfig {
        dt: c.dt,
        ..ReachConfig::default()
    };
    let grid: Vec<f64> = (0..c.grid_count)
        .map(|k| c.grid_start + c.grid_step * k as f64)
        .collect();
    let mut o = Output::new(out)?;
    let mut summary = Vec::new();
    let mut emit = |o: &mut Output, name: &str, what: &str, points: &[FrontierPoint]| -> Result<(), BoxError> {
        o.csv(
            &format!("frontier_{name}.csv"),
            &["plan", "distance", "time"],
            &format!("achievable (distance, stop time) pairs, {what}"),
            points
                .iter()
                .map(|p| vec![plan_label(p), num(p.distance), opt(p.stop_time)]),
        )?;
        o.csv(
            &format!("sat_{name}.csv"),
            &["D", "W", "ratio", "min_time"],
            &format!("fastest reach landing within W/2 of D, {what}"),
            sat_curve(points, &c.distances, &c.widths)
                .iter()
                .map(|s| vec![num(s.distance), num(s.width), num(s.ratio), opt(s.min_time)]),
        )?;
        summary.push(vec![
            name.to_string(),
            num(max_distance(points)),
            points.iter().filter(|p| p.moved()).count().to_string(),
            points.len().to_string(),
        ]);
        Ok(())
    };
    for (name, strengths) in [("uniform", &c.uniform), ("diverse", &c.diverse)] {
        let m = MuscleSpec::new(strengths)?;
        let points = frontier(&m, &grid, &friction, &reach)?;
        emit(&mut o, name, &format!("motor units {strengths:?}"), &points)?;
        if c.two_muscles {
            let muscles = strengths
                .iter()
                .map(|&s| MuscleSpec::new(&[s]))
                .collect::<Result<Vec<_>, _>>()?;
            let points = two_muscle_frontier(&muscles, &grid, &friction, &reach)?;
            emit(
                &mut o,
                &format!("muscles_{name}"),
                &format!("whole muscles {strengths:?}"),
                &points,
            )?;
        }
    }
    o.csv(
        "frontier_summary.csv",
        &["configuration", "max_distance", "moving_plans", "plans"],
        "farthest reach and number of plans that move the mass",
        summary,
    )?;
    o.finish("frontier", &cfg.frontier)
}

fn transport_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let c = &cfg.transport;
    let modes = c
        .modes
        .iter()
        .map(|[s, r]| TransportMode::new(*s, *r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &e in &c.tolerances {
        for (i, m) in modes.iter().enumerate() {
            let t = best_uniform_time(std::slice::from_ref(m), c.distance, e);
            rows.push(vec![format!("mode{}", i + 1), num(e), opt(t), opt(t)]);
        }
        let uniform = best_uniform_time(&modes, c.distance, e);
        rows.push(vec!["best-single".into(), num(e), opt(uniform), opt(uniform)]);
        let (lo, hi) = match plan_diverse(&modes, c.distance, e, c.switch_loss) {
            Ok(p) => (Some(p.lower), Some(p.upper)),
            Err(dess::Error::Infeasible(_)) => (None, None),
            Err(err) => return Err(err.into()),
        };
        rows.push(vec!["diverse".into(), num(e), opt(lo), opt(hi)]);
    }
    let mut o = Output::new(out)?;
    o.csv(
        "transport.csv",
        &["mode_set", "E", "lower", "upper"],
        "travel time per accuracy requirement: each single mode, best single mode, combined modes",
        rows,
    )?;
    o.finish("transport", &cfg.transport)
}

fn serve_cmd(cfg: &Config) -> Result<(), BoxError> {
    let addr: std::net::SocketAddr = cfg.serve.addr.parse()?;
    let store = Arc::new(SessionStore::open(&cfg.serve.root)?);
    let rt = tokio::runtime::Runtime::new()?;
    eprintln!("serving on {addr}, sessions under {}", cfg.serve.root.display());
    rt.block_on(dess_service::server::serve(addr, store))?;
    Ok(())
}

fn analyze_cmd(sessions: &[PathBuf], out: &Path) -> Result<(), BoxError> {
    let mut trials = Vec::new();
    for dir in sessions {
        let (_, logged) = load_session_files(dir)?;
        trials.extend(logged.into_iter().map(|t| t.summary));
    }
    if trials.is_empty() {
        return Err("no completed trials in the given sessions".into());
    }
    let bundle = ResultsBundle::from_trials(&trials);
    let mut o = Output::new(out)?;
    o.file(
        "results.csv",
        &dess_service::results::CSV_HEADER,
        "per-condition mean reaching time minus internal delay, with trial counts",
        &bundle.to_csv()?,
        bundle.rows.len(),
    )?;
    o.csv(
        "fits.csv",
        &["condition", "p", "r", "goodness", "internal_delay"],
        "least-squares line of mean reaching time against difficulty, per condition",
        bundle.fits.iter().map(|f| {
            vec![
                f.condition.clone(),
                opt(f.fit.map(|x| x.p)),
                opt(f.fit.map(|x| x.r)),
                opt(f.fit.map(|x| x.goodness)),
                num(bundle.internal_delay),
            ]
        }),
    )?;
    #[derive(serde::Serialize)]
    struct AnalyzeManifest<'a> {
        sessions: &'a [PathBuf],
        internal_delay: f64,
    }
    o.finish(
        "analyze",
        &AnalyzeManifest {
            sessions,
            internal_delay: bundle.internal_delay,
        },
    )
}

fn replay_cmd(session: &Path, out: &Path) -> Result<(), BoxError> {
    let replayed = replay_session(session)?;
    let mut o = Output::new(out)?;
    let logged: String = replayed.iter().map(|r| format!("{}\n", r.logged)).collect();
    let again: String = replayed.iter().map(|r| format!("{}\n", r.replayed)).collect();
    o.file(
        "summaries_logged.jsonl",
        &[],
        "trial summary lines as logged",
        &logged,
        replayed.len(),
    )?;
    o.file(
        "summaries_replayed.jsonl",
        &[],
        "trial summary lines recomputed from the logged inputs",
        &again,
        replayed.len(),
    )?;
    o.csv(
        "replay.csv",
        &["trial", "identical"],
        "whether each replayed trial summary matches the logged one byte for byte",
        replayed
            .iter()
            .map(|r| vec![r.trial.to_string(), r.matches().to_string()]),
    )?;
    o.finish("replay", &session)?;
    let bad = replayed.iter().filter(|r| !r.matches()).count();
    if bad > 0 {
        return Err(format!("{bad} of {} trials replayed differently", replayed.len()).into());
    }
    eprintln!("{} trials replayed identically", replayed.len());
    Ok(())
}

fn session_config(cfg: &Config) -> SessionConfig {
    let c = &cfg.simulate;
    SessionConfig {
        label: c.label.clone(),
        family: c.family.clone(),
        seed: cfg.seed,
        shuffle: true,
        schedule: ScheduleSettings {
            trials_per_condition: c.trials_per_condition,
            geometries: c.geometries.clone(),
        },
        engine: c.engine,
    }
}

fn simulate_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let store = SessionStore::open(out)?;
    let id = store.create(session_config(cfg))?;
    let shared = store.get(&id)?;
    let mut s = shared.lock().map_err(|_| "session lock poisoned")?;
    let mut zone = ZoneCenterAgent::default();
    let mut speed = SpeedAgent::new(cfg.simulate.speed_agent_lag);
    while !s.is_done() {
        let plan = s.plan()[s.trial_index()];
        let agent: &mut dyn InputSource = match plan.condition.variant {
            Variant::SpeedSet { .. } => &mut speed,
            _ => &mut zone,
        };
        s.play_scripted(agent)?;
    }
    println!("{}", out.join(&id).display());
    Ok(())
}

fn schedule_cmd(cfg: &Config, out: &Path) -> Result<(), BoxError> {
    let sc = session_config(cfg);
    let family: Family = sc.family.parse()?;
    let conditions = condition_schedule(family, &sc.schedule)?;
    let plans = expand_trials(&conditions, sc.seed, sc.shuffle)?;
    let mut o = Output::new(out)?;
    o.csv(
        "schedule.csv",
        &["trial", "condition", "D", "W", "F", "target"],
        "trial order and target side for a session with this seed",
        plans.iter().map(|p| {
            vec![
                p.trial.to_string(),
                p.condition.label(),
                num(p.condition.distance),
                num(p.condition.width),
                num(p.condition.difficulty()),
                num(p.target),
            ]
        }),
    )?;
    o.finish("schedule", &sc)
}
