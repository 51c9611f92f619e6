use futures_util::{SinkExt, StreamExt};
use sharedpilot::bci::BciCommand;
use sharedpilot::{ExperimentConfig, RunMode};
use sharedpilot_cli::serve::{self, ServeError, ServeOptions};
use sharedpilot_cli::wire::{ControlAction, WireMessage};
use std::time::Duration;
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

struct Server {
    url: String,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<Result<(), ServeError>>,
}

impl Server {
    async fn start(cfg: ExperimentConfig, opts: ServeOptions) -> Self {
        let listener = serve::bind(0).await.unwrap();
        let port = listener.local_addr().unwrap().port();
        let (stop, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(serve::serve(listener, cfg, opts, async {
            let _ = rx.await;
        }));
        Self {
            url: format!("ws://127.0.0.1:{port}/ws"),
            stop: Some(stop),
            task,
        }
    }

    async fn connect(&self) -> Ws {
        tokio_tungstenite::connect_async(&self.url).await.unwrap().0
    }

    async fn shutdown(mut self) {
        let _ = self.stop.take().unwrap().send(());
        let _ = timeout(Duration::from_secs(5), self.task).await;
    }
}

fn fast_perfect_channel(mode: RunMode) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.mode = mode;
    cfg.channel.accuracy = 1.0;
    cfg.channel.recognition_interval = 0.05;
    cfg.channel.latency = 0.0;
    cfg
}

async fn send(ws: &mut Ws, msg: &WireMessage) {
    ws.send(Message::Text(serde_json::to_string(msg).unwrap().into()))
        .await
        .unwrap();
}

async fn recv(ws: &mut Ws) -> WireMessage {
    loop {
        let msg = timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

fn command(seq: u64, command: BciCommand) -> WireMessage {
    WireMessage::Command {
        seq,
        command,
        client_time: None,
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn hover_commands_hold_position_and_sequence_increases() {
    let opts = ServeOptions {
        time_scale: 10.0,
        ..ServeOptions::default()
    };
    let server = Server::start(fast_perfect_channel(RunMode::Brain), opts).await;
    let mut ws = server.connect().await;
    match recv(&mut ws).await {
        WireMessage::Ack { text, .. } => assert!(text.contains("command authority"), "{text}"),
        other => panic!("expected greeting, got {other:?}"),
    }

    let mut acks = 0;
    let mut last_seq = 1;
    let mut last_step = None;
    let mut snapshots = Vec::new();
    for k in 1..=20u64 {
        send(&mut ws, &command(k, BciCommand::Hover)).await;
        // Drain until this command is acknowledged.
        loop {
            let msg = recv(&mut ws).await;
            assert!(msg.seq() > last_seq, "outbound seq must increase");
            last_seq = msg.seq();
            match msg {
                WireMessage::Ack { re: Some(r), .. } => {
                    assert_eq!(r, k);
                    acks += 1;
                    break;
                }
                WireMessage::Telemetry { snapshot, .. } => {
                    if let Some(prev) = last_step {
                        assert!(snapshot.step > prev);
                    }
                    last_step = Some(snapshot.step);
                    snapshots.push(snapshot);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    assert_eq!(acks, 20);

    // Let a few simulated seconds pass, then check the vehicle stayed put.
    while snapshots.last().is_none_or(|s| s.row.t < 5.0) {
        if let WireMessage::Telemetry { snapshot, .. } = recv(&mut ws).await {
            snapshots.push(snapshot);
        }
    }
    let last = snapshots.last().unwrap();
    assert_eq!(last.row.cmd, BciCommand::Hover);
    assert_eq!(last.row.alpha, 1.0);
    assert!(last.row.x.hypot(last.row.y) < 0.2, "{:?}", last.row);
    assert!((last.row.z - 5.0).abs() < 0.2);
    let decimation = snapshots.windows(2).map(|w| w[1].step - w[0].step).min().unwrap();
    assert_eq!(decimation, 5);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn malformed_and_unauthorized_messages_get_errors() {
    let server = Server::start(fast_perfect_channel(RunMode::Shared), ServeOptions::default()).await;
    let mut first = server.connect().await;
    assert!(matches!(recv(&mut first).await, WireMessage::Ack { .. }));
    let mut second = server.connect().await;
    match recv(&mut second).await {
        WireMessage::Ack { text, .. } => assert!(text.contains("telemetry-only"), "{text}"),
        other => panic!("{other:?}"),
    }

    first.send(Message::Text("{not json".into())).await.unwrap();
    let err = loop {
        match recv(&mut first).await {
            WireMessage::Error { text, .. } => break text,
            WireMessage::Telemetry { .. } => continue,
            other => panic!("{other:?}"),
        }
    };
    assert!(err.contains("malformed"), "{err}");

    send(&mut second, &command(1, BciCommand::Forward)).await;
    let err = loop {
        match recv(&mut second).await {
            WireMessage::Error { re, text, .. } => {
                assert_eq!(re, Some(1));
                break text;
            }
            WireMessage::Telemetry { .. } => continue,
            other => panic!("{other:?}"),
        }
    };
    assert!(err.contains("no command authority"), "{err}");

    // Session survives: a valid command and a mode switch still work, and a
    // stale seq is refused.
    send(&mut first, &command(5, BciCommand::Hover)).await;
    send(&mut first, &command(5, BciCommand::Hover)).await;
    send(
        &mut first,
        &WireMessage::Control {
            seq: 6,
            control: ControlAction::SetMode { mode: RunMode::Auto },
        },
    )
    .await;
    let mut replies = Vec::new();
    while replies.len() < 3 {
        match recv(&mut first).await {
            WireMessage::Telemetry { .. } => {}
            m => replies.push(m),
        }
    }
    assert!(matches!(replies[0], WireMessage::Ack { re: Some(5), .. }));
    assert!(matches!(replies[1], WireMessage::Error { re: Some(5), .. }));
    assert!(matches!(replies[2], WireMessage::Ack { re: Some(6), .. }));
    loop {
        if let WireMessage::Telemetry { snapshot, .. } = recv(&mut first).await {
            if snapshot.run_mode == RunMode::Auto {
                assert_eq!(snapshot.row.alpha, 0.0);
                break;
            }
        }
    }

    // The commander leaves; the next client to connect takes over.
    drop(first);
    tokio::time::sleep(Duration::from_millis(200)).await;
    let mut third = server.connect().await;
    match recv(&mut third).await {
        WireMessage::Ack { text, .. } => assert!(text.contains("with command authority"), "{text}"),
        other => panic!("{other:?}"),
    }
    server.shutdown().await;
}

#[tokio::test]
async fn second_bind_reports_port_in_use() {
    let a = serve::bind(0).await.unwrap();
    let port = a.local_addr().unwrap().port();
    assert!(matches!(serve::bind(port).await, Err(ServeError::PortInUse(p)) if p == port));
}

#[test]
fn wire_format_is_tagged_json() {
    let m: WireMessage =
        serde_json::from_str(r#"{"type":"command","seq":3,"command":"YAW_LEFT","client_time":1.5}"#).unwrap();
    assert_eq!(
        m,
        WireMessage::Command {
            seq: 3,
            command: BciCommand::YawLeft,
            client_time: Some(1.5)
        }
    );
    let c: WireMessage =
        serde_json::from_str(r#"{"type":"control","seq":4,"control":{"action":"set_mode","mode":"shared"}}"#)
            .unwrap();
    assert_eq!(
        c,
        WireMessage::Control {
            seq: 4,
            control: ControlAction::SetMode { mode: RunMode::Shared }
        }
    );
    let g = serde_json::to_string(&WireMessage::Gap { seq: 9, dropped: 2 }).unwrap();
    assert_eq!(g, r#"{"type":"gap","seq":9,"dropped":2}"#);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stalled_client_gets_gap_marker_and_loop_keeps_running() {
    let opts = ServeOptions {
        time_scale: 100.0,
        decimation: 1,
        buffer: 4,
    };
    let server = Server::start(fast_perfect_channel(RunMode::Shared), opts).await;
    let mut ws = server.connect().await;
    assert!(matches!(recv(&mut ws).await, WireMessage::Ack { .. }));
    // Stop reading; a four-slot buffer overflows within one tick.
    tokio::time::sleep(Duration::from_secs(3)).await;
    let mut last_seq = 1;
    let mut next_step = 0;
    let mut dropped = 0;
    for _ in 0..200_000 {
        let msg = recv(&mut ws).await;
        assert!(msg.seq() > last_seq);
        last_seq = msg.seq();
        match msg {
            WireMessage::Gap { dropped: n, .. } => {
                dropped = n;
                break;
            }
            WireMessage::Telemetry { snapshot, .. } => next_step = snapshot.step + 1,
            other => panic!("{other:?}"),
        }
    }
    assert!(dropped > 0, "no gap marker");
    // With decimation 1 the stream resumes exactly past the dropped steps.
    loop {
        if let WireMessage::Telemetry { snapshot, .. } = recv(&mut ws).await {
            assert_eq!(snapshot.step, next_step + dropped);
            break;
        }
    }
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn autopilot_takes_over_after_commander_leaves() {
    let opts = ServeOptions {
        time_scale: 50.0,
        ..ServeOptions::default()
    };
    let server = Server::start(fast_perfect_channel(RunMode::Shared), opts).await;
    let mut pilot = server.connect().await;
    assert!(matches!(recv(&mut pilot).await, WireMessage::Ack { .. }));
    let mut watcher = server.connect().await;
    assert!(matches!(recv(&mut watcher).await, WireMessage::Ack { .. }));
    // Steer off the track, then vanish with LEFT still held.
    send(&mut pilot, &command(1, BciCommand::Left)).await;
    drop(pilot);
    let mut took_over = false;
    loop {
        if let WireMessage::Telemetry { snapshot, .. } = recv(&mut watcher).await {
            if snapshot.row.alpha < 1.0 {
                took_over = true;
                break;
            }
            if snapshot.row.t > 60.0 {
                break;
            }
        }
    }
    assert!(took_over, "autopilot never gained authority");
    server.shutdown().await;
}
