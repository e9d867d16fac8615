//! Messages exchanged over the session websocket, one JSON object per text
//! frame, discriminated by `type`. Field names are frozen per
//! [`PROTOCOL_VERSION`]; see `docs/protocol.md`.

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum WireMessage {
    // client -> server
    Hello {
        version: u32,
        /// Free-form device name, recorded in the diagnostics log.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        device: Option<String>,
    },
    Input {
        /// Degrees, signed.
        angle: f64,
        /// Client's own tick counter, logged for latency diagnostics only.
        client_tick: u64,
    },
    StartTrial,
    Abort,

    // server -> client
    Config {
        version: u32,
        session: String,
        label: String,
        trials: usize,
        completed: usize,
        screen_width: f64,
    },
    Display {
        /// Server tick this frame belongs to.
        tick: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cursor: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zone: Option<[f64; 2]>,
    },
    TrialStart {
        trial: u64,
        /// True when only the quantizer's uncertainty zone is shown.
        hidden: bool,
        distance: f64,
        width: f64,
        /// Seconds per tick.
        interval: f64,
        condition: String,
    },
    TrialEnd {
        trial: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reach_time: Option<f64>,
        censored: bool,
        invalid: bool,
    },
    ScheduleDone {
        trials: usize,
    },
    Error {
        message: String,
    },
}

impl WireMessage {
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }

    pub fn decode(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn from_client(&self) -> bool {
        matches!(
            self,
            WireMessage::Hello { .. } | WireMessage::Input { .. } | WireMessage::StartTrial | WireMessage::Abort
        )
    }
}
