use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use dess::experiment::{
    completed_trials, condition_schedule, encode_record, encode_summary, expand_trials, parse_log, DisplayFrame,
    EngineConfig, Family, InputSource, LoggedTrial, ScheduleSettings, TrialLoop, TrialOutcome, TrialPlan, TrialSummary,
};
use serde::{Deserialize, Serialize};

use crate::wire::{WireMessage, PROTOCOL_VERSION};
use crate::{Result, ServiceError};

pub const CONFIG_FILE: &str = "config.json";
pub const LOG_FILE: &str = "log.jsonl";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// Opaque session label, e.g. a subject code.
    pub label: String,
    pub family: String,
    pub seed: u64,
    pub shuffle: bool,
    pub schedule: ScheduleSettings,
    pub engine: EngineConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            label: "session".into(),
            family: "delay".into(),
            seed: 0,
            shuffle: true,
            schedule: ScheduleSettings::default(),
            engine: EngineConfig::default(),
        }
    }
}

impl SessionConfig {
    pub fn family(&self) -> Result<Family> {
        Ok(self.family.parse()?)
    }

    /// The trial list this config expands to.
    pub fn plan(&self) -> Result<Vec<TrialPlan>> {
        self.engine.validate()?;
        let conditions = condition_schedule(self.family()?, &self.schedule)?;
        Ok(expand_trials(&conditions, self.seed, self.shuffle)?)
    }
}

#[derive(Debug)]
struct ActiveTrial {
    lp: TrialLoop,
    angle: f64,
    jitter: Vec<f64>,
    client_ticks: Vec<Option<u64>>,
    pending_client_tick: Option<u64>,
}

/// Per-tick result of [`Session::drive_tick`].
#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    /// Frame for the new current tick. Stale when the trial has ended.
    pub display: WireMessage,
    /// Set on the tick that ended the trial.
    pub ended: Option<WireMessage>,
    /// Set when that trial was the last in the schedule.
    pub done: Option<WireMessage>,
}

/// One subject's run through a schedule.
#[derive(Debug)]
pub struct Session {
    id: String,
    config: SessionConfig,
    plan: Vec<TrialPlan>,
    completed: Vec<TrialSummary>,
    active: Option<ActiveTrial>,
    dir: Option<PathBuf>,
    device: Option<String>,
}

/// Create a session; with `dir`, persist its config there.
pub fn open_session(id: &str, config: SessionConfig, dir: Option<&Path>) -> Result<Session> {
    let plan = config.plan()?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let mut f = File::create(dir.join(CONFIG_FILE))?;
        f.write_all(serde_json::to_string_pretty(&config)?.as_bytes())?;
        f.sync_all()?;
    }
    Ok(Session {
        id: id.to_string(),
        config,
        plan,
        completed: Vec::new(),
        active: None,
        dir: dir.map(Path::to_path_buf),
        device: None,
    })
}

/// Config and completed trials of a persisted session.
pub fn load_session_files(dir: &Path) -> Result<(SessionConfig, Vec<LoggedTrial>)> {
    let config: SessionConfig = serde_json::from_str(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    let log = match fs::read_to_string(dir.join(LOG_FILE)) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    Ok((config, completed_trials(&parse_log(&log)?)))
}

impl Session {
    /// Reopen a persisted session after the last completed trial. A trial
    /// that was in flight when the process died is run again.
    pub fn resume(id: &str, dir: &Path) -> Result<Session> {
        let (config, trials) = load_session_files(dir)?;
        let plan = config.plan()?;
        if trials.len() > plan.len() {
            return Err(ServiceError::Config("log holds more trials than the schedule".into()));
        }
        Ok(Session {
            id: id.to_string(),
            config,
            plan,
            completed: trials.into_iter().map(|t| t.summary).collect(),
            active: None,
            dir: Some(dir.to_path_buf()),
            device: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn plan(&self) -> &[TrialPlan] {
        &self.plan
    }

    pub fn completed(&self) -> &[TrialSummary] {
        &self.completed
    }

    /// Index of the running trial, or of the next one to start.
    pub fn trial_index(&self) -> usize {
        self.completed.len()
    }

    pub fn is_active(&self) -> bool {
        self.active.is_some()
    }

    pub fn is_done(&self) -> bool {
        self.completed.len() >= self.plan.len()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn set_device(&mut self, device: Option<String>) {
        self.device = device;
    }

    pub fn config_message(&self) -> WireMessage {
        WireMessage::Config {
            version: PROTOCOL_VERSION,
            session: self.id.clone(),
            label: self.config.label.clone(),
            trials: self.plan.len(),
            completed: self.completed.len(),
            screen_width: self.config.engine.screen_width,
        }
    }

    /// Interval of the active or next trial.
    pub fn interval(&self) -> Option<f64> {
        match &self.active {
            Some(a) => Some(a.lp.condition().interval()),
            None => self.plan.get(self.trial_index()).map(|p| p.condition.interval()),
        }
    }

    /// Begin the next scheduled trial. Returns the trial-start message and
    /// the first display frame.
    pub fn start_trial(&mut self) -> Result<(WireMessage, WireMessage)> {
        if self.active.is_some() {
            return Err(ServiceError::TrialActive);
        }
        let plan = *self.plan.get(self.trial_index()).ok_or(ServiceError::ScheduleDone)?;
        let lp = TrialLoop::new(plan.trial, &plan.condition, plan.target, &self.config.engine)?;
        let c = plan.condition;
        let start = WireMessage::TrialStart {
            trial: plan.trial,
            hidden: c.target_hidden(),
            distance: c.distance,
            width: c.width,
            interval: c.interval(),
            condition: c.label(),
        };
        let active = ActiveTrial {
            lp,
            angle: 0.0,
            jitter: Vec::new(),
            client_ticks: Vec::new(),
            pending_client_tick: None,
        };
        let display = display_message(&active.lp);
        self.active = Some(active);
        Ok((start, display))
    }

    /// Latest client input. Within a tick the last one wins.
    pub fn input(&mut self, angle: f64, client_tick: u64) -> Result<()> {
        if !angle.is_finite() {
            return Err(ServiceError::Protocol("angle must be finite".into()));
        }
        let a = self.active.as_mut().ok_or(ServiceError::NoActiveTrial)?;
        a.angle = angle;
        a.pending_client_tick = Some(client_tick);
        Ok(())
    }

    /// Advance one tick using `input`, or the previous angle when `None`.
    pub fn drive_tick(&mut self, input: Option<f64>) -> Result<TickOutput> {
        self.drive_tick_timed(input, 0.0)
    }

    /// [`Session::drive_tick`] with the tick's measured lateness in seconds.
    pub fn drive_tick_timed(&mut self, input: Option<f64>, jitter: f64) -> Result<TickOutput> {
        let a = self.active.as_mut().ok_or(ServiceError::NoActiveTrial)?;
        if let Some(angle) = input {
            if !angle.is_finite() {
                return Err(ServiceError::Protocol("angle must be finite".into()));
            }
            a.angle = angle;
        }
        a.jitter.push(jitter);
        a.client_ticks.push(a.pending_client_tick.take());
        let outcome = a.lp.tick(a.angle);
        let display = display_message(&a.lp);
        let (ended, done) = match outcome {
            Some(_) => self.finish()?,
            None => (None, None),
        };
        Ok(TickOutput { display, ended, done })
    }

    /// Frame on screen in the running trial.
    pub fn display(&self) -> Option<DisplayFrame> {
        self.active.as_ref().map(|a| *a.lp.display())
    }

    /// Run the next trial with a scripted input source, one
    /// [`Session::drive_tick`] per tick. Returns the trial-end message.
    pub fn play_scripted(&mut self, agent: &mut dyn InputSource) -> Result<WireMessage> {
        let plan = *self.plan.get(self.trial_index()).ok_or(ServiceError::ScheduleDone)?;
        agent.begin(&plan.condition, &self.config.engine);
        self.start_trial()?;
        loop {
            let frame = self.display().expect("trial is active");
            let tick = self.active.as_ref().expect("trial is active").lp.current_tick();
            let Some(angle) = agent.angle(tick, &frame) else {
                let (end, _) = self.abort()?;
                return Ok(end.expect("abort ends the trial"));
            };
            if let Some(end) = self.drive_tick(Some(angle))?.ended {
                return Ok(end);
            }
        }
    }

    /// Abandon the running trial; it is logged as invalid.
    pub fn abort(&mut self) -> Result<(Option<WireMessage>, Option<WireMessage>)> {
        let a = self.active.as_mut().ok_or(ServiceError::NoActiveTrial)?;
        a.lp.invalidate();
        self.finish()
    }

    fn finish(&mut self) -> Result<(Option<WireMessage>, Option<WireMessage>)> {
        let a = self.active.take().expect("finish is called with an active trial");
        let record = a.lp.into_record(a.jitter);
        if let Some(dir) = &self.dir {
            append_synced(&dir.join(LOG_FILE), encode_record(&record).as_bytes())?;
            let diag = serde_json::json!({
                "trial": record.summary.trial,
                "device": self.device,
                "client_ticks": a.client_ticks,
                "jitter": record.jitter,
            });
            append_synced(&dir.join(DIAGNOSTICS_FILE), format!("{diag}\n").as_bytes())?;
        }
        let s = record.summary;
        let end = WireMessage::TrialEnd {
            trial: s.trial,
            reach_time: s.reach_time(),
            censored: s.is_censored(),
            invalid: matches!(s.outcome, TrialOutcome::Invalid { .. }),
        };
        self.completed.push(s);
        let done = self.is_done().then_some(WireMessage::ScheduleDone {
            trials: self.plan.len(),
        });
        Ok((Some(end), done))
    }
}

fn display_message(lp: &TrialLoop) -> WireMessage {
    let f = lp.display();
    let visible = f.shows_tick.is_some();
    WireMessage::Display {
        tick: lp.current_tick(),
        cursor: visible.then_some(f.cursor),
        zone: f.zone.map(|(lo, hi)| [lo, hi]),
    }
}

fn append_synced(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(bytes)?;
    f.sync_data()?;
    Ok(())
}

/// Original and replayed summary lines for one logged trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayedTrial {
    pub trial: u64,
    pub logged: String,
    pub replayed: String,
}

impl ReplayedTrial {
    pub fn matches(&self) -> bool {
        self.logged == self.replayed
    }
}

/// Feed each logged trial's angles back through a fresh, unpersisted
/// session's [`Session::drive_tick`].
pub fn replay_session(dir: &Path) -> Result<Vec<ReplayedTrial>> {
    let (config, trials) = load_session_files(dir)?;
    let mut session = open_session("replay", config, None)?;
    let mut out = Vec::with_capacity(trials.len());
    for t in &trials {
        session.start_trial()?;
        let mut ended = false;
        for angle in t.angles() {
            if session.drive_tick(Some(angle))?.ended.is_some() {
                ended = true;
                break;
            }
        }
        if !ended {
            session.abort()?;
        }
        let replayed = session.completed().last().expect("trial just finished");
        out.push(ReplayedTrial {
            trial: t.summary.trial,
            logged: encode_summary(&t.summary),
            replayed: encode_summary(replayed),
        });
    }
    Ok(out)
}
