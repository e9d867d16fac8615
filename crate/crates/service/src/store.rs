use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use crate::results::ResultsBundle;
use crate::session::{open_session, Session, SessionConfig, CONFIG_FILE};
use crate::{Result, ServiceError};

pub type SharedSession = Arc<Mutex<Session>>;

/// All sessions of one server. With a root directory each session lives in
/// `<root>/<id>/` and existing ones are picked up at startup.
#[derive(Debug, Default)]
pub struct SessionStore {
    root: Option<PathBuf>,
    sessions: Mutex<BTreeMap<String, SharedSession>>,
}

impl SessionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let mut sessions = BTreeMap::new();
        for entry in fs::read_dir(&root)? {
            let path = entry?.path();
            if !path.join(CONFIG_FILE).is_file() {
                continue;
            }
            let id = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            let s = Session::resume(&id, &path)?;
            sessions.insert(id, Arc::new(Mutex::new(s)));
        }
        Ok(Self {
            root: Some(root),
            sessions: Mutex::new(sessions),
        })
    }

    pub fn create(&self, config: SessionConfig) -> Result<String> {
        let mut sessions = self.sessions.lock().expect("store lock");
        let slug: String = config
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        let id = (1..)
            .map(|n| format!("{n:04}-{slug}"))
            .find(|id| !sessions.contains_key(id) && !self.root.as_ref().is_some_and(|r| r.join(id).exists()))
            .expect("ids are unbounded");
        let dir = self.root.as_ref().map(|r| r.join(&id));
        let s = open_session(&id, config, dir.as_deref())?;
        sessions.insert(id.clone(), Arc::new(Mutex::new(s)));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<SharedSession> {
        self.sessions
            .lock()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.lock().expect("store lock").keys().cloned().collect()
    }

    pub fn export_results(&self, id: &str) -> Result<ResultsBundle> {
        let s = self.get(id)?;
        let s = s.lock().expect("session lock");
        Ok(export_results(&s))
    }
}

/// Per-condition summary table and fits over a session's finished trials.
pub fn export_results(session: &Session) -> ResultsBundle {
    ResultsBundle::from_trials(session.completed())
}
