use std::future::pending;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::time::{interval_at, Instant, Interval, MissedTickBehavior};

use crate::session::SessionConfig;
use crate::store::{SessionStore, SharedSession};
use crate::wire::WireMessage;
use crate::ServiceError;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::Io(_) | ServiceError::Csv(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        (status, self.to_string()).into_response()
    }
}

/// HTTP and websocket routes over a session store.
pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(session_info))
        .route("/sessions/{id}/results", get(results_json))
        .route("/sessions/{id}/results.csv", get(results_csv))
        .route("/sessions/{id}/ws", get(ws_upgrade))
        .with_state(store)
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    Json(config): Json<SessionConfig>,
) -> Result<impl IntoResponse, ServiceError> {
    let id = store.create(config)?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "id": id }))))
}

async fn list_sessions(State(store): State<Arc<SessionStore>>) -> Json<Vec<String>> {
    Json(store.ids())
}

async fn session_info(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<Json<WireMessage>, ServiceError> {
    let s = store.get(&id)?;
    let msg = s.lock().expect("session lock").config_message();
    Ok(Json(msg))
}

async fn results_json(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(store.export_results(&id)?))
}

async fn results_csv(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ServiceError> {
    let csv = store.export_results(&id)?.to_csv()?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv))
}

async fn ws_upgrade(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ServiceError> {
    let session = store.get(&id)?;
    Ok(ws.on_upgrade(move |socket| run_socket(socket, session)))
}

async fn next_tick(ticker: &mut Option<Interval>) -> Instant {
    match ticker {
        Some(t) => t.tick().await,
        None => pending().await,
    }
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<WireMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Text(m.encode().into())).await.is_err() {
            return false;
        }
    }
    true
}

/// Server-side tick loop for one connection. Input only updates the angle;
/// ticks are driven by the server's interval timer.
async fn run_socket(mut socket: WebSocket, session: SharedSession) {
    let hello = session.lock().expect("session lock").config_message();
    if !send_all(&mut socket, vec![hello]).await {
        return;
    }
    let mut ticker: Option<Interval> = None;
    loop {
        let out = tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                handle_client(&session, &text, &mut ticker)
            }
            due = next_tick(&mut ticker) => {
                let late = Instant::now().saturating_duration_since(due).as_secs_f64();
                let mut s = session.lock().expect("session lock");
                match s.drive_tick_timed(None, late) {
                    Ok(t) if t.ended.is_some() => {
                        ticker = None;
                        [t.ended, t.done].into_iter().flatten().collect()
                    }
                    Ok(t) => vec![t.display],
                    Err(e) => {
                        ticker = None;
                        vec![WireMessage::Error { message: e.to_string() }]
                    }
                }
            }
        };
        if !send_all(&mut socket, out).await {
            break;
        }
    }
    // A dropped connection ends the running trial as invalid.
    let mut s = session.lock().expect("session lock");
    if s.is_active() {
        let _ = s.abort();
    }
}

fn handle_client(session: &SharedSession, text: &str, ticker: &mut Option<Interval>) -> Vec<WireMessage> {
    let msg = match WireMessage::decode(text) {
        Ok(m) => m,
        Err(e) => {
            return vec![WireMessage::Error {
                message: format!("bad message: {e}"),
            }]
        }
    };
    let mut s = session.lock().expect("session lock");
    let result = match msg {
        WireMessage::Hello { device, .. } => {
            s.set_device(device);
            Ok(vec![s.config_message()])
        }
        WireMessage::Input { angle, client_tick } => s.input(angle, client_tick).map(|_| Vec::new()),
        WireMessage::StartTrial => s.start_trial().map(|(start, display)| {
            let period = Duration::from_secs_f64(s.interval().expect("trial is active"));
            let mut t = interval_at(Instant::now() + period, period);
            t.set_missed_tick_behavior(MissedTickBehavior::Burst);
            *ticker = Some(t);
            vec![start, display]
        }),
        WireMessage::Abort => {
            *ticker = None;
            s.abort().map(|(end, done)| [end, done].into_iter().flatten().collect())
        }
        other => Err(ServiceError::Protocol(format!("server-only message {other:?}"))),
    };
    result.unwrap_or_else(|e| vec![WireMessage::Error { message: e.to_string() }])
}
