use std::time::Duration;

use futures::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;
use tumbler_core::session::{ErrorCode, PlanStatus, ServerMessage};
use tumbler_server::{spawn, Created, ServerOptions};

const SCENE: &str = r#"{"arena": {"min": [-4, -4], "max": [6, 4]},
    "obstacles": [{"polygon": [[1.5,-0.6],[2.2,-0.6],[2.2,0.6],[1.5,0.6]]}],
    "start": {"x": 0, "y": 0, "alpha_deg": 0, "state": "HU"}, "target": {"x": 0, "y": 0}, "tolerance": 0.4}"#;

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start() -> (String, Created) {
    let addr = spawn("127.0.0.1:0".parse().unwrap(), ServerOptions::default()).await.unwrap();
    let base = format!("127.0.0.1:{}", addr.port());
    let body = format!(r#"{{"scene": {SCENE}, "tick_ms": 5}}"#);
    let resp = reqwest::Client::new()
        .post(format!("http://{base}/sessions"))
        .header("content-type", "application/json")
        .body(body)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 201);
    (base, resp.json().await.unwrap())
}

async fn connect(base: &str, id: &str) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{base}/sessions/{id}/ws")).await.unwrap().0
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = frame {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

async fn send(ws: &mut Ws, text: &str) {
    ws.send(Message::Text(text.into())).await.unwrap();
}

#[tokio::test]
async fn scripted_session_reaches_its_target() {
    let (base, created) = start().await;
    assert!(matches!(created.snapshot, ServerMessage::Snapshot { .. }));
    let mut ws = connect(&base, &created.id).await;
    let mut last = 0;
    let first = recv(&mut ws).await;
    assert!(matches!(first, ServerMessage::Snapshot { .. }));
    last = last.max(first.seq());
    send(&mut ws, r#"{"type":"set_target","x":4,"y":0}"#).await;
    let mut planned = None;
    let mut flips = 0;
    let mut reached = false;
    while !reached {
        let m = recv(&mut ws).await;
        assert!(m.seq() > last, "{m:?}");
        last = m.seq();
        match m {
            ServerMessage::PlanStatus { status, plan_len, .. } => {
                assert_eq!(status, PlanStatus::Ok);
                planned = Some(plan_len);
            }
            ServerMessage::Flip { to, .. } => {
                assert!(planned.is_some(), "flip before plan_status");
                flips += 1;
                reached = ((to.x - 4.0).powi(2) + to.y.powi(2)).sqrt() <= 0.4;
            }
            _ => {}
        }
    }
    assert_eq!(Some(flips), planned);

    let snap: ServerMessage = reqwest::get(format!("http://{base}/sessions/{}/snapshot", created.id))
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    match snap {
        ServerMessage::Snapshot { plan_len, seq, .. } => {
            assert_eq!(plan_len, 0);
            assert_eq!(seq, last);
        }
        m => panic!("{m:?}"),
    }
}

#[tokio::test]
async fn single_controller_with_takeover() {
    let (base, created) = start().await;
    let mut a = connect(&base, &created.id).await;
    let mut b = connect(&base, &created.id).await;
    recv(&mut a).await;
    recv(&mut b).await;
    send(&mut a, r#"{"type":"pause"}"#).await;
    assert!(matches!(recv(&mut a).await, ServerMessage::Snapshot { paused: true, .. }));
    assert!(matches!(recv(&mut b).await, ServerMessage::Snapshot { paused: true, .. }));
    send(&mut b, r#"{"type":"resume"}"#).await;
    assert!(matches!(
        recv(&mut b).await,
        ServerMessage::Error {
            code: ErrorCode::NotController,
            ..
        }
    ));
    send(&mut b, r#"{"type":"take_control"}"#).await;
    assert!(matches!(recv(&mut b).await, ServerMessage::Snapshot { .. }));
    send(&mut b, r#"{"type":"resume"}"#).await;
    assert!(matches!(recv(&mut b).await, ServerMessage::Snapshot { paused: false, .. }));
    send(&mut a, "not json").await;
    // `a` sees the take_control echo and the resume before its own error
    let mut seen_error = false;
    for _ in 0..3 {
        if let ServerMessage::Error { code, .. } = recv(&mut a).await {
            assert_eq!(code, ErrorCode::InvalidMessage);
            seen_error = true;
        }
    }
    assert!(seen_error);
}

#[tokio::test]
async fn http_errors() {
    let (base, _) = start().await;
    let client = reqwest::Client::new();
    let r = client.get(format!("http://{base}/sessions/nope/snapshot")).send().await.unwrap();
    assert_eq!(r.status(), 404);
    let r = client
        .post(format!("http://{base}/sessions"))
        .body(r#"{"scene": 1}"#)
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 400);
    let inside = SCENE.replace(r#""x": 0, "y": 0, "alpha_deg""#, r#""x": 1.8, "y": 0, "alpha_deg""#);
    let r = client
        .post(format!("http://{base}/sessions"))
        .body(format!(r#"{{"scene": {inside}}}"#))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 422);
}
