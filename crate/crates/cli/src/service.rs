//! Websocket teleoperation service.
//!
//! Each client session owns one [`TeleopState`] driven by its own control
//! loop at a fixed tick. The wire format is JSON text frames tagged by
//! `type`:
//!
//! - client: `{"type":"target","x":..,"y":..[,"z":..]}`, `{"type":"reset"}`
//! - server: `meta` once on connect, `state` every tick, `error` for bad input

use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use grr_core::chain::{Capsule, Joint, TaskPoint};
use grr_core::query::{teleop_step, QueryContext, TeleopParams, TeleopState, TeleopStatus};
use grr_core::robots::RobotModel;
use grr_core::taskgraph::ReachAnnulus;
use nalgebra::{Isometry3, Vector3};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

pub const DEFAULT_TICK_RATE: f64 = 50.0;

/// Frames queued per client before new states are dropped.
const OUTBOX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Target(Point),
    Reset,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoseMeta {
    pub translation: [f64; 3],
    /// `[w, x, y, z]`
    pub rotation: [f64; 4],
}

impl From<&Isometry3<f64>> for PoseMeta {
    fn from(p: &Isometry3<f64>) -> Self {
        let t = p.translation.vector;
        let q = p.rotation;
        PoseMeta {
            translation: [t.x, t.y, t.z],
            rotation: [q.w, q.i, q.j, q.k],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobotMeta {
    pub name: String,
    pub planar: bool,
    pub mode: String,
    pub base: PoseMeta,
    pub end_effector: PoseMeta,
    pub joints: Vec<Joint>,
    pub capsules: Vec<Capsule>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkspaceMeta {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReachMeta {
    pub center: Point,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Meta {
    pub robot: RobotMeta,
    pub workspace: WorkspaceMeta,
    pub reach: ReachMeta,
    pub grid_pitch: f64,
    pub tick_rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFrame {
    pub tick: u64,
    pub joints: Vec<f64>,
    pub ee: Point,
    pub status: TeleopStatus,
    pub target_effective: Point,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Meta(Meta),
    State(StateFrame),
    Error { msg: String },
}

impl ServerMessage {
    fn to_text(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Shared, immutable service data.
pub struct TeleopService {
    ctx: QueryContext,
    planar: bool,
    plane_z: f64,
    meta: Meta,
    initial: TeleopState,
    params: TeleopParams,
    period: Duration,
}

impl TeleopService {
    /// Sessions start at the assigned vertex nearest the workspace center.
    pub fn new(model: &RobotModel, ctx: QueryContext, tick_rate: f64) -> anyhow::Result<Self> {
        anyhow::ensure!(tick_rate > 0.0 && tick_rate.is_finite(), "tick rate must be positive");
        let grid = ctx
            .graph()
            .grid()
            .cloned()
            .ok_or_else(|| anyhow::anyhow!("roadmap has no grid"))?;
        let min = grid.origin.clone();
        let max: Vec<f64> = (0..grid.counts.len())
            .map(|a| grid.origin[a] + grid.cell[a] * grid.counts[a] as f64)
            .collect();
        let mut center = Vector3::new(0.0, 0.0, grid.plane_z);
        for a in 0..min.len() {
            center[a] = 0.5 * (min[a] + max[a]);
        }
        let v0 = ctx
            .nearest_assigned(&ctx.task_point(&TaskPoint::position(center)), None)
            .ok_or_else(|| anyhow::anyhow!("roadmap has no assigned vertices"))?;
        let initial = TeleopState::at_vertex(&ctx, v0).expect("vertex is assigned");
        let planar = model.chain.is_planar();
        let reach = ReachAnnulus::for_chain(&model.chain, model.orientation.as_ref());
        let meta = Meta {
            robot: RobotMeta {
                name: model.name.clone(),
                planar,
                mode: format!("{:?}", model.mode).to_lowercase(),
                base: model.chain.base().into(),
                end_effector: model.chain.end_effector().into(),
                joints: model.chain.joints().to_vec(),
                capsules: model.chain.capsules().to_vec(),
            },
            workspace: WorkspaceMeta { min, max },
            reach: ReachMeta {
                center: point(&reach.center, planar),
                min: reach.min,
                max: reach.max,
            },
            grid_pitch: grid.pitch(),
            tick_rate,
        };
        let params = TeleopParams::for_context(&ctx);
        Ok(TeleopService {
            planar,
            plane_z: grid.plane_z,
            meta,
            initial,
            params,
            period: Duration::from_secs_f64(1.0 / tick_rate),
            ctx,
        })
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn context(&self) -> &QueryContext {
        &self.ctx
    }

    fn target_point(&self, p: &Point) -> Result<TaskPoint, String> {
        let z = match (self.planar, p.z) {
            (true, _) => self.plane_z,
            (false, Some(z)) => z,
            (false, None) => return Err("spatial robot needs a z coordinate".into()),
        };
        let t = Vector3::new(p.x, p.y, z);
        if !t.iter().all(|v| v.is_finite()) {
            return Err("target coordinates must be finite".into());
        }
        Ok(self.ctx.task_point(&TaskPoint::position(t)))
    }

    fn frame(&self, tick: u64, state: &TeleopState) -> StateFrame {
        let ee = self.ctx.forward(&state.current).translation;
        StateFrame {
            tick,
            joints: state.current.values().to_vec(),
            ee: point(&ee, self.planar),
            status: state.status,
            target_effective: point(&state.target_effective.translation, self.planar),
        }
    }
}

fn point(t: &Vector3<f64>, planar: bool) -> Point {
    Point {
        x: t.x,
        y: t.y,
        z: (!planar).then_some(t.z),
    }
}

/// Latest client input, read by the control loop once per tick.
#[derive(Default)]
struct Inbox {
    target: Option<TaskPoint>,
    reset: bool,
}

pub fn router(service: Arc<TeleopService>) -> Router {
    Router::new()
        .route("/ws", get(upgrade))
        .route("/meta", get(meta_json))
        .with_state(service)
}

async fn meta_json(State(svc): State<Arc<TeleopService>>) -> impl IntoResponse {
    axum::Json(svc.meta.clone())
}

async fn upgrade(ws: WebSocketUpgrade, State(svc): State<Arc<TeleopService>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session(socket, svc))
}

/// Binds the listening socket; a busy port is reported here.
pub async fn bind(host: &str, port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind((host, port)).await
}

pub async fn serve(listener: TcpListener, service: Arc<TeleopService>) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}

async fn session(socket: WebSocket, svc: Arc<TeleopService>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::channel::<String>(OUTBOX);
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    if tx.send(ServerMessage::Meta(svc.meta.clone()).to_text()).await.is_err() {
        return;
    }
    let inbox = Arc::new(Mutex::new(Inbox::default()));
    let control = tokio::spawn(control_loop(svc.clone(), inbox.clone(), tx.clone()));
    while let Some(msg) = stream.next().await {
        let text = match msg {
            Ok(Message::Text(t)) => t,
            Ok(Message::Binary(_)) => {
                let _ = tx.send(error_text("binary frames are not supported")).await;
                continue;
            }
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        match serde_json::from_str::<ClientMessage>(text.as_str()) {
            Ok(ClientMessage::Target(p)) => match svc.target_point(&p) {
                Ok(p) => inbox.lock().expect("inbox lock").target = Some(p),
                Err(e) => {
                    let _ = tx.send(error_text(&e)).await;
                }
            },
            Ok(ClientMessage::Reset) => {
                let mut ib = inbox.lock().expect("inbox lock");
                ib.target = None;
                ib.reset = true;
            }
            Err(e) => {
                let _ = tx.send(error_text(&format!("malformed message: {e}"))).await;
            }
        }
    }
    control.abort();
    drop(tx);
    let _ = writer.await;
}

fn error_text(msg: &str) -> String {
    ServerMessage::Error { msg: msg.to_string() }.to_text()
}

async fn control_loop(svc: Arc<TeleopService>, inbox: Arc<Mutex<Inbox>>, tx: mpsc::Sender<String>) {
    let mut interval = tokio::time::interval(svc.period);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    let mut state = svc.initial.clone();
    let mut target: Option<TaskPoint> = None;
    let mut tick = 0u64;
    loop {
        interval.tick().await;
        {
            let mut ib = inbox.lock().expect("inbox lock");
            if ib.reset {
                ib.reset = false;
                state = svc.initial.clone();
                target = None;
            }
            if let Some(p) = ib.target.take() {
                target = Some(p);
            }
        }
        if let Some(p) = &target {
            teleop_step(&svc.ctx, &mut state, p, &svc.params);
        }
        let frame = ServerMessage::State(svc.frame(tick, &state)).to_text();
        match tx.try_send(frame) {
            Ok(()) | Err(mpsc::error::TrySendError::Full(_)) => {}
            Err(mpsc::error::TrySendError::Closed(_)) => break,
        }
        tick += 1;
    }
}
