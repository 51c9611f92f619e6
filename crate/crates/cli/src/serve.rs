//! Live mode: the simulation advances against the wall clock while one
//! WebSocket client at a time flies it as the brain pilot.
//!
//! The simulation task and the session handlers share nothing but two
//! queues. Commands flow in over an unbounded mpsc channel; snapshots flow
//! out over a broadcast channel, so a slow client loses the oldest
//! telemetry (reported with a `gap` message) and never stalls the loop.

use crate::wire::{ChannelReport, ControlAction, TelemetrySnapshot, WireMessage};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use sharedpilot::bci::BciCommand;
use sharedpilot::experiment::{BrainSource, SimError, Simulation};
use sharedpilot::ExperimentConfig;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy)]
pub struct ServeOptions {
    /// Simulated seconds per wall-clock second.
    pub time_scale: f64,
    /// Publish every n-th step.
    pub decimation: u32,
    /// Snapshots buffered per client before the oldest are dropped.
    pub buffer: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            time_scale: 1.0,
            decimation: 5,
            buffer: 256,
        }
    }
}

#[derive(Debug)]
enum SimInput {
    Command(BciCommand),
    Control(ControlAction),
}

#[derive(Debug, Clone)]
enum ServerEvent {
    Telemetry(Arc<TelemetrySnapshot>),
    Notice(String),
}

#[derive(Clone)]
struct AppState {
    inputs: mpsc::UnboundedSender<SimInput>,
    events: broadcast::Sender<ServerEvent>,
    authority: Arc<Mutex<Option<u64>>>,
    next_conn: Arc<AtomicU64>,
}

pub async fn bind(port: u16) -> Result<TcpListener, ServeError> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(port),
        _ => ServeError::Io(e),
    })
}

/// Serves `/ws` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    cfg: ExperimentConfig,
    opts: ServeOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let sim = Simulation::new(cfg, BrainSource::Live)?;
    let (inputs, input_rx) = mpsc::unbounded_channel();
    let (events, _) = broadcast::channel(opts.buffer.max(1));
    let sim_task = tokio::spawn(sim_loop(sim, input_rx, events.clone(), opts));

    let state = AppState {
        inputs,
        events,
        authority: Arc::new(Mutex::new(None)),
        next_conn: Arc::new(AtomicU64::new(0)),
    };
    let app = Router::new().route("/ws", get(upgrade)).with_state(state);
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    sim_task.abort();
    result.map_err(ServeError::Io)
}

async fn sim_loop(
    mut sim: Simulation,
    mut inputs: mpsc::UnboundedReceiver<SimInput>,
    events: broadcast::Sender<ServerEvent>,
    opts: ServeOptions,
) {
    let dt = sim.config().dt;
    let scale = opts.time_scale;
    let period = Duration::from_secs_f64((dt / scale).clamp(0.001, 0.02));
    // At most this much simulated time per tick; beyond it the loop falls
    // behind real time instead of bursting.
    let max_steps = ((0.1 * scale / dt).ceil() as usize).max(1);
    let mut tick = tokio::time::interval(period);
    tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);

    let mut running = true;
    let mut pending: Vec<BciCommand> = Vec::new();
    let mut report = ChannelReport::default();
    let mut since_publish = 0u32;
    let mut budget = 0.0;
    let mut last = Instant::now();

    loop {
        tick.tick().await;
        loop {
            match inputs.try_recv() {
                Ok(SimInput::Command(c)) => pending.push(c),
                Ok(SimInput::Control(action)) => match action {
                    ControlAction::Start => running = true,
                    ControlAction::Pause => running = false,
                    ControlAction::SetMode { mode } => sim.set_mode(mode),
                    ControlAction::Reset => {
                        if let Err(e) = sim.reset() {
                            let _ = events.send(ServerEvent::Notice(e.to_string()));
                        }
                        pending.clear();
                        report = ChannelReport::default();
                        since_publish = 0;
                        budget = 0.0;
                    }
                },
                Err(mpsc::error::TryRecvError::Empty) => break,
                Err(mpsc::error::TryRecvError::Disconnected) => return,
            }
        }

        let now = Instant::now();
        let elapsed = now.duration_since(last).as_secs_f64();
        last = now;
        if !running {
            budget = 0.0;
            continue;
        }
        budget += elapsed * scale;
        let mut steps = 0;
        while budget >= dt && steps < max_steps {
            budget -= dt;
            steps += 1;
            let step = sim.step_index();
            match sim.step(&pending) {
                Ok(out) => {
                    pending.clear();
                    report.absorb(out.events);
                    since_publish += 1;
                    if since_publish >= opts.decimation.max(1) {
                        since_publish = 0;
                        let snapshot = TelemetrySnapshot {
                            step,
                            run_mode: sim.mode(),
                            row: out.row,
                            channel: std::mem::take(&mut report),
                        };
                        let _ = events.send(ServerEvent::Telemetry(Arc::new(snapshot)));
                    }
                }
                Err(e) => {
                    let _ = events.send(ServerEvent::Notice(format!("{e}; session reset and paused")));
                    let _ = sim.reset();
                    pending.clear();
                    running = false;
                    break;
                }
            }
        }
        if steps == max_steps {
            budget = budget.min(dt);
        }
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session(socket, state))
}

struct Outbound {
    seq: u64,
}

impl Outbound {
    fn next(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }
}

async fn send(
    sink: &mut futures_util::stream::SplitSink<WebSocket, Message>,
    msg: &WireMessage,
) -> bool {
    let text = serde_json::to_string(msg).expect("wire messages serialize");
    sink.send(Message::Text(text.into())).await.is_ok()
}

async fn session(socket: WebSocket, state: AppState) {
    let id = state.next_conn.fetch_add(1, Ordering::Relaxed);
    let commander = {
        let mut holder = state.authority.lock().unwrap();
        if holder.is_none() {
            *holder = Some(id);
        }
        *holder == Some(id)
    };
    let mut telemetry = state.events.subscribe();
    let (mut sink, mut stream) = socket.split();
    let mut out = Outbound { seq: 0 };
    let mut last_in: Option<u64> = None;

    let greeting = if commander {
        "connected with command authority"
    } else {
        "connected telemetry-only: another client holds command authority"
    };
    let hello = WireMessage::Ack {
        seq: out.next(),
        re: None,
        text: greeting.into(),
    };
    if send(&mut sink, &hello).await {
        loop {
            let reply = tokio::select! {
                ev = telemetry.recv() => match ev {
                    Ok(ServerEvent::Telemetry(s)) => WireMessage::Telemetry {
                        seq: out.next(),
                        snapshot: Box::new((*s).clone()),
                    },
                    Ok(ServerEvent::Notice(text)) => WireMessage::Error {
                        seq: out.next(),
                        re: None,
                        text,
                    },
                    Err(broadcast::error::RecvError::Lagged(n)) => WireMessage::Gap {
                        seq: out.next(),
                        dropped: n,
                    },
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                msg = stream.next() => match msg {
                    Some(Ok(Message::Text(text))) => {
                        handle_inbound(text.as_str(), commander, &mut last_in, &state, &mut out)
                    }
                    Some(Ok(Message::Binary(_))) => WireMessage::Error {
                        seq: out.next(),
                        re: None,
                        text: "malformed message: binary frames are not supported".into(),
                    },
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => continue,
                },
            };
            if !send(&mut sink, &reply).await {
                break;
            }
        }
    }

    let mut holder = state.authority.lock().unwrap();
    if *holder == Some(id) {
        *holder = None;
    }
}

fn handle_inbound(
    text: &str,
    commander: bool,
    last_in: &mut Option<u64>,
    state: &AppState,
    out: &mut Outbound,
) -> WireMessage {
    let error = |out: &mut Outbound, re: Option<u64>, text: String| WireMessage::Error {
        seq: out.next(),
        re,
        text,
    };
    let msg: WireMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => return error(out, None, format!("malformed message: {e}")),
    };
    let seq = msg.seq();
    if last_in.is_some_and(|prev| seq <= prev) {
        return error(
            out,
            Some(seq),
            format!("seq {seq} does not increase past {}", last_in.unwrap()),
        );
    }
    *last_in = Some(seq);
    let input = match msg {
        WireMessage::Command { command, .. } => SimInput::Command(command),
        WireMessage::Control { control, .. } => SimInput::Control(control),
        _ => return error(out, Some(seq), "unexpected message type from client".into()),
    };
    if !commander {
        return error(out, Some(seq), "telemetry-only connection: no command authority".into());
    }
    let text = match &input {
        SimInput::Command(c) => format!("command {c} queued"),
        SimInput::Control(a) => format!("control {a:?} applied"),
    };
    if state.inputs.send(input).is_err() {
        return error(out, Some(seq), "simulation stopped".into());
    }
    WireMessage::Ack {
        seq: out.next(),
        re: Some(seq),
        text,
    }
}
