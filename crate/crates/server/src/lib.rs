//! Session service: `POST /sessions` creates a session from a scene and robot
//! config, `GET /sessions/{id}/snapshot` reads its state, and
//! `GET /sessions/{id}/ws` attaches a viewer over WebSocket.
//!
//! Each session is owned by one executor task. Ticks, client frames and
//! snapshot reads all pass through its queue, so session state is never
//! shared. The first client to send a mutation holds control until another
//! sends `take_control`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot, RwLock};
use tumbler_core::session::{ClientMessage, ErrorCode, ServerMessage, Session, SessionOptions};
use tumbler_core::trace_io::{RobotConfigDoc, SceneDoc};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub scene: SceneDoc,
    #[serde(default)]
    pub robot: Option<RobotConfigDoc>,
    #[serde(default)]
    pub tick_ms: Option<u64>,
    #[serde(default)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub snapshot: ServerMessage,
}

#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    pub session: SessionOptions,
}

enum Command {
    Connect { conn: u64, out: mpsc::UnboundedSender<String> },
    Disconnect { conn: u64 },
    Text { conn: u64, text: String },
    Snapshot { reply: oneshot::Sender<ServerMessage> },
}

pub struct AppState {
    sessions: RwLock<HashMap<String, mpsc::UnboundedSender<Command>>>,
    next_session: AtomicU64,
    next_conn: AtomicU64,
    opts: ServerOptions,
}

pub fn app(opts: ServerOptions) -> Router {
    let state = Arc::new(AppState {
        sessions: RwLock::new(HashMap::new()),
        next_session: AtomicU64::new(1),
        next_conn: AtomicU64::new(1),
        opts,
    });
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/snapshot", get(snapshot))
        .route("/sessions/{id}/ws", get(attach))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, opts: ServerOptions) -> std::io::Result<()> {
    axum::serve(listener, app(opts)).await
}

/// Binds `addr` and serves in the background; returns the bound address.
pub async fn spawn(addr: SocketAddr, opts: ServerOptions) -> std::io::Result<SocketAddr> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    tokio::spawn(serve(listener, opts));
    Ok(bound)
}

fn failure(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn create(State(app): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: CreateSession = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return failure(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let setup = match req.robot.unwrap_or_default().build() {
        Ok(s) => s,
        Err(e) => return failure(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    let mut opts = app.opts.session.clone();
    if let Some(t) = req.tick_ms {
        opts.tick_ms = t;
    }
    if let Some(b) = req.budget {
        opts.budget = b;
    }
    let id = format!("s{}", app.next_session.fetch_add(1, Ordering::Relaxed));
    let session = match Session::new(id.clone(), &setup, &req.scene, &opts) {
        Ok(s) => s,
        Err(e) => return failure(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    let snapshot = session.peek_snapshot();
    let (tx, rx) = mpsc::unbounded_channel();
    tokio::spawn(execute(session, rx));
    app.sessions.write().await.insert(id.clone(), tx);
    (StatusCode::CREATED, Json(Created { id, snapshot })).into_response()
}

async fn lookup(app: &AppState, id: &str) -> Option<mpsc::UnboundedSender<Command>> {
    app.sessions.read().await.get(id).cloned()
}

async fn snapshot(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(tx) = lookup(&app, &id).await else {
        return failure(StatusCode::NOT_FOUND, format!("no session {id}"));
    };
    let (reply, rx) = oneshot::channel();
    if tx.send(Command::Snapshot { reply }).is_err() {
        return failure(StatusCode::GONE, "session stopped");
    }
    match rx.await {
        Ok(m) => Json(m).into_response(),
        Err(_) => failure(StatusCode::GONE, "session stopped"),
    }
}

async fn attach(State(app): State<Arc<AppState>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    let Some(tx) = lookup(&app, &id).await else {
        return failure(StatusCode::NOT_FOUND, format!("no session {id}"));
    };
    let conn = app.next_conn.fetch_add(1, Ordering::Relaxed);
    ws.on_upgrade(move |socket| connection(socket, conn, tx))
}

async fn connection(socket: WebSocket, conn: u64, tx: mpsc::UnboundedSender<Command>) {
    let (mut sink, mut stream) = socket.split();
    let (out, mut outbox) = mpsc::unbounded_channel::<String>();
    if tx.send(Command::Connect { conn, out }).is_err() {
        return;
    }
    let writer = tokio::spawn(async move {
        while let Some(text) = outbox.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        if tx.send(Command::Text { conn, text }).is_err() {
            break;
        }
    }
    let _ = tx.send(Command::Disconnect { conn });
    writer.abort();
}

struct Executor {
    session: Session,
    conns: BTreeMap<u64, mpsc::UnboundedSender<String>>,
    controller: Option<u64>,
}

impl Executor {
    fn deliver(&mut self, sender: Option<u64>, messages: Vec<ServerMessage>) {
        for m in messages {
            let text = m.to_json();
            if m.is_broadcast() {
                self.conns.retain(|_, out| out.send(text.clone()).is_ok());
            } else if let Some(out) = sender.and_then(|c| self.conns.get(&c)) {
                let _ = out.send(text);
            }
        }
    }

    fn on_text(&mut self, conn: u64, text: &str) {
        let msg = match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => m,
            Err(e) => {
                let err = self.session.error(ErrorCode::InvalidMessage, e.to_string());
                return self.deliver(Some(conn), vec![err]);
            }
        };
        match msg {
            ClientMessage::TakeControl {} => self.controller = Some(conn),
            _ if self.controller.is_none() => self.controller = Some(conn),
            _ if self.controller != Some(conn) => {
                let err = self.session.error(ErrorCode::NotController, "another client holds control");
                return self.deliver(Some(conn), vec![err]);
            }
            _ => {}
        }
        let out = self.session.apply_client_message(msg);
        self.deliver(Some(conn), out);
    }
}

async fn execute(session: Session, mut rx: mpsc::UnboundedReceiver<Command>) {
    let mut ticks = tokio::time::interval(Duration::from_millis(session.tick_ms()));
    ticks.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut ex = Executor {
        session,
        conns: BTreeMap::new(),
        controller: None,
    };
    loop {
        tokio::select! {
            cmd = rx.recv() => match cmd {
                None => break,
                Some(Command::Connect { conn, out }) => {
                    ex.conns.insert(conn, out);
                    let snap = ex.session.snapshot();
                    if let Some(out) = ex.conns.get(&conn) {
                        let _ = out.send(snap.to_json());
                    }
                }
                Some(Command::Disconnect { conn }) => {
                    ex.conns.remove(&conn);
                    if ex.controller == Some(conn) {
                        ex.controller = None;
                    }
                }
                Some(Command::Text { conn, text }) => ex.on_text(conn, &text),
                Some(Command::Snapshot { reply }) => {
                    let _ = reply.send(ex.session.peek_snapshot());
                }
            },
            _ = ticks.tick() => {
                if let Some(m) = ex.session.tick() {
                    ex.deliver(None, vec![m]);
                }
            }
        }
    }
}
