//! HTTP/WebSocket server: `/feed`, `/control` and `/textures/<id>`.

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use crate::broadcast::{Broadcaster, Lagged, Subscription};
use crate::control::ControlRequest;
use crate::wire::{parse_command, Reply};

pub const DEFAULT_FEED_PORT: u16 = 7402;

/// WebSocket close code sent to a subscriber that fell too far behind.
const CLOSE_POLICY: u16 = 1008;
const CLOSE_GOING_AWAY: u16 = 1001;

#[derive(Debug, Clone)]
pub struct ServiceState {
    pub broadcaster: Broadcaster,
    /// Commands are handed to the engine loop, which replies on the
    /// request's oneshot.
    pub control: mpsc::Sender<ControlRequest>,
    /// Directory served under `/textures`.
    pub texture_root: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    service: ServiceState,
    shutdown: watch::Receiver<bool>,
}

pub struct RunningService {
    pub local_addr: SocketAddr,
    shutdown: watch::Sender<bool>,
    task: JoinHandle<io::Result<()>>,
}

impl RunningService {
    /// Closes every socket and waits for the server to stop.
    pub async fn shutdown(self) -> io::Result<()> {
        let _ = self.shutdown.send(true);
        self.task.await.map_err(io::Error::other)?
    }
}

pub fn router(state: ServiceState, shutdown: watch::Receiver<bool>) -> Router {
    let textures = state.texture_root.clone();
    let mut app = Router::new().route("/feed", get(feed)).route("/control", get(control));
    if let Some(root) = textures {
        app = app.nest_service("/textures", ServeDir::new(root));
    }
    app.with_state(AppState { service: state, shutdown })
}

pub async fn serve(addr: SocketAddr, state: ServiceState) -> io::Result<RunningService> {
    let listener = TcpListener::bind(addr).await?;
    let local_addr = listener.local_addr()?;
    let (tx, rx) = watch::channel(false);
    let app = router(state, rx.clone());
    let mut stop = rx;
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async move {
                let _ = stop.wait_for(|s| *s).await;
            })
            .await
    });
    log::info!("feed on ws://{local_addr}/feed, control on ws://{local_addr}/control");
    Ok(RunningService { local_addr, shutdown: tx, task })
}

async fn feed(ws: WebSocketUpgrade, State(app): State<AppState>) -> Response {
    let sub = app.service.broadcaster.subscribe();
    ws.on_upgrade(move |socket| feed_session(socket, sub, app.shutdown))
}

async fn feed_session(mut socket: WebSocket, mut sub: Subscription, mut shutdown: watch::Receiver<bool>) {
    loop {
        tokio::select! {
            next = sub.next() => match next {
                Some(Ok(m)) => {
                    if socket.send(Message::Text(m.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                Some(Err(Lagged)) => {
                    log::warn!("feed subscriber exceeded its backlog; disconnecting");
                    close(&mut socket, CLOSE_POLICY, "backlog exceeded").await;
                    return;
                }
                None => {
                    close(&mut socket, CLOSE_GOING_AWAY, "engine stopped").await;
                    return;
                }
            },
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => return,
                Some(Ok(_)) => {}
            },
            _ = stopped(&mut shutdown) => {
                close(&mut socket, CLOSE_GOING_AWAY, "shutting down").await;
                return;
            }
        }
    }
}

async fn control(ws: WebSocketUpgrade, State(app): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| control_session(socket, app))
}

async fn control_session(mut socket: WebSocket, app: AppState) {
    let mut shutdown = app.shutdown.clone();
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let reply = match incoming {
                    Some(Ok(Message::Text(text))) => handle_command(&app.service, &text).await,
                    Some(Ok(Message::Binary(_))) => Reply::error("bad_command", "commands are JSON text messages"),
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                    Some(Ok(_)) => continue,
                };
                if socket.send(Message::Text(reply.to_json().into())).await.is_err() {
                    return;
                }
            }
            _ = stopped(&mut shutdown) => {
                close(&mut socket, CLOSE_GOING_AWAY, "shutting down").await;
                return;
            }
        }
    }
}

async fn handle_command(service: &ServiceState, text: &str) -> Reply {
    let command = match parse_command(text) {
        Ok(c) => c,
        Err(reply) => return reply,
    };
    let (tx, rx) = oneshot::channel();
    if service.control.send(ControlRequest { command, reply: tx }).await.is_err() {
        return Reply::error("engine_unavailable", "the engine loop has stopped");
    }
    rx.await.unwrap_or_else(|_| Reply::error("engine_unavailable", "the engine loop dropped the command"))
}

async fn close(socket: &mut WebSocket, code: u16, reason: &'static str) {
    let _ = socket.send(Message::Close(Some(CloseFrame { code, reason: reason.into() }))).await;
}

async fn stopped(rx: &mut watch::Receiver<bool>) {
    let _ = rx.wait_for(|s| *s).await;
}
