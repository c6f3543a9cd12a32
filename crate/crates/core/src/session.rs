//! Interactive follow-the-target sessions: a state machine driven by client
//! messages and ticks. Transport lives elsewhere; everything here is
//! synchronous and deterministic.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::planner::{astar_plan, check_move, PlanError, PlanOptions, PlanStep, Scene};
use crate::reachability::{KeyMode, LocomotionMode};
use crate::robot::{revolve, world_footprint, Configuration, EdgeLabel, RobotGeometry, StableState, TransitionTable};
use crate::trace_io::{RobotSetup, SceneDoc, StartDoc};

pub const DEFAULT_TICK_MS: u64 = 250;
pub const DEFAULT_SESSION_BUDGET: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("start state {state} is not used by mode {mode}")]
    StartNotInMode { state: StableState, mode: LocomotionMode },
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    SetTarget { x: f64, y: f64 },
    Pause {},
    Resume {},
    Reset { config: StartDoc },
    SetMode { mode: LocomotionMode },
    /// Claims the controlling seat; the transport decides who holds it.
    TakeControl {},
}

impl ClientMessage {
    /// Whether the message changes session state (and so needs control).
    pub fn is_mutation(&self) -> bool {
        !matches!(self, ClientMessage::TakeControl {})
    }
}

/// Pose as it appears on the wire, angle in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseView {
    pub x: f64,
    pub y: f64,
    pub alpha_deg: f64,
    pub state: StableState,
    pub footprint: Vec<[f64; 2]>,
}

impl PoseView {
    pub fn of(geom: &RobotGeometry, c: &Configuration) -> Self {
        Self {
            x: c.centroid.x,
            y: c.centroid.y,
            alpha_deg: c.alpha().to_degrees(),
            state: c.state,
            footprint: world_footprint(geom, c).vertices().iter().map(|v| [v.x, v.y]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Ok,
    NoPath,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    InvalidMessage,
    InvalidReset,
    InvalidMode,
    NotController,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetView {
    pub x: f64,
    pub y: f64,
}

/// Server to client. Every message carries the session `seq` at emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServerMessage {
    Snapshot {
        config: PoseView,
        target: TargetView,
        plan_len: usize,
        paused: bool,
        mode: LocomotionMode,
        seq: u64,
    },
    Flip {
        from: PoseView,
        to: PoseView,
        pivot_edge: EdgeLabel,
        seq: u64,
    },
    PlanStatus {
        status: PlanStatus,
        expansions: usize,
        plan_len: usize,
        seq: u64,
    },
    Error {
        code: ErrorCode,
        message: String,
        seq: u64,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> u64 {
        match self {
            ServerMessage::Snapshot { seq, .. }
            | ServerMessage::Flip { seq, .. }
            | ServerMessage::PlanStatus { seq, .. }
            | ServerMessage::Error { seq, .. } => *seq,
        }
    }

    /// Errors go back to the sender only; everything else is broadcast.
    pub fn is_broadcast(&self) -> bool {
        !matches!(self, ServerMessage::Error { .. })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOptions {
    pub tick_ms: u64,
    /// Target movement that forces a replan; `None` means half the goal tolerance.
    pub replan_threshold: Option<f64>,
    pub budget: usize,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            tick_ms: DEFAULT_TICK_MS,
            replan_threshold: None,
            budget: DEFAULT_SESSION_BUDGET,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    geom: RobotGeometry,
    table: TransitionTable,
    keys: KeyMode,
    scene: Scene,
    mode: LocomotionMode,
    config: Configuration,
    plan: VecDeque<PlanStep>,
    /// Target the current plan (or last failed attempt) was computed for.
    planned_goal: Option<Vec2>,
    last_plan_failed: bool,
    paused: bool,
    seq: u64,
    tick_ms: u64,
    replan_threshold: f64,
    budget: usize,
}

impl Session {
    pub fn new(id: impl Into<String>, setup: &RobotSetup, doc: &SceneDoc, opts: &SessionOptions) -> Result<Self, SessionError> {
        let scene = doc.to_scene().map_err(|e| SessionError::InvalidScene(e.to_string()))?;
        scene
            .validate(&setup.geometry)
            .map_err(|e| SessionError::InvalidScene(e.to_string()))?;
        let mode = doc.mode.unwrap_or_default();
        if !mode.allows_state(scene.start.state) {
            return Err(SessionError::StartNotInMode {
                state: scene.start.state,
                mode,
            });
        }
        let replan_threshold = opts.replan_threshold.unwrap_or(scene.tolerance / 2.0);
        if !(opts.tick_ms > 0 && opts.budget > 0 && replan_threshold.is_finite() && replan_threshold >= 0.0) {
            return Err(SessionError::InvalidScene("tick, budget and replan threshold must be positive".into()));
        }
        Ok(Self {
            id: id.into(),
            geom: setup.geometry,
            table: setup.table.clone(),
            keys: setup.keys,
            config: scene.start,
            scene,
            mode,
            plan: VecDeque::new(),
            planned_goal: None,
            last_plan_failed: false,
            paused: false,
            seq: 0,
            tick_ms: opts.tick_ms,
            replan_threshold,
            budget: opts.budget,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn config(&self) -> Configuration {
        self.config
    }
    pub fn target(&self) -> Vec2 {
        self.scene.target
    }
    pub fn plan_len(&self) -> usize {
        self.plan.len()
    }
    pub fn mode(&self) -> LocomotionMode {
        self.mode
    }
    pub fn paused(&self) -> bool {
        self.paused
    }
    pub fn seq(&self) -> u64 {
        self.seq
    }
    pub fn tick_ms(&self) -> u64 {
        self.tick_ms
    }
    pub fn geometry(&self) -> &RobotGeometry {
        &self.geom
    }
    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn at_target(&self) -> bool {
        self.scene.is_goal(&self.config)
    }

    /// Current state without consuming a sequence number (read-only endpoint).
    pub fn peek_snapshot(&self) -> ServerMessage {
        self.snapshot_with(self.seq)
    }

    /// Fresh snapshot with its own sequence number, e.g. for a new subscriber.
    pub fn snapshot(&mut self) -> ServerMessage {
        let seq = self.next_seq();
        self.snapshot_with(seq)
    }

    fn snapshot_with(&self, seq: u64) -> ServerMessage {
        ServerMessage::Snapshot {
            config: PoseView::of(&self.geom, &self.config),
            target: TargetView {
                x: self.scene.target.x,
                y: self.scene.target.y,
            },
            plan_len: self.plan.len(),
            paused: self.paused,
            mode: self.mode,
            seq,
        }
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    pub fn error(&mut self, code: ErrorCode, message: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            code,
            message: message.into(),
            seq: self.next_seq(),
        }
    }

    /// Parses and applies one text frame; malformed input yields an error reply.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.apply_client_message(msg),
            Err(e) => vec![self.error(ErrorCode::InvalidMessage, e.to_string())],
        }
    }

    pub fn apply_client_message(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::SetTarget { x, y } => {
                let t = Vec2::new(x, y);
                if !t.is_finite() {
                    return vec![self.error(ErrorCode::InvalidMessage, "target must be finite")];
                }
                self.scene.target = t;
                let moved = self.planned_goal.is_none_or(|g| g.distance(t) > self.replan_threshold);
                let mut out = Vec::new();
                if moved && !self.at_target() {
                    out.push(self.replan());
                } else if self.at_target() {
                    self.plan.clear();
                }
                out.push(self.snapshot());
                out
            }
            ClientMessage::Pause {} => {
                self.paused = true;
                vec![self.snapshot()]
            }
            ClientMessage::Resume {} => {
                self.paused = false;
                vec![self.snapshot()]
            }
            ClientMessage::Reset { config } => {
                let vals = [config.x, config.y, config.alpha_deg];
                if !vals.iter().all(|v| v.is_finite()) {
                    return vec![self.error(ErrorCode::InvalidReset, "configuration must be finite")];
                }
                let c = Configuration::new(Vec2::new(config.x, config.y), config.state, config.alpha_deg.to_radians());
                if !self.mode.allows_state(c.state) {
                    return vec![self.error(
                        ErrorCode::InvalidReset,
                        format!("state {} is not used by mode {}", c.state, self.mode),
                    )];
                }
                if !check_move(&self.geom, &self.scene, &c, false) {
                    return vec![self.error(ErrorCode::InvalidReset, "configuration collides or leaves the arena")];
                }
                self.config = c;
                self.drop_plan();
                vec![self.snapshot()]
            }
            ClientMessage::SetMode { mode } => {
                if !mode.allows_state(self.config.state) {
                    return vec![self.error(
                        ErrorCode::InvalidMode,
                        format!("current state {} is not used by mode {mode}", self.config.state),
                    )];
                }
                self.mode = mode;
                self.drop_plan();
                vec![self.snapshot()]
            }
            ClientMessage::TakeControl {} => vec![self.snapshot()],
        }
    }

    fn drop_plan(&mut self) {
        self.plan.clear();
        self.planned_goal = None;
        self.last_plan_failed = false;
    }

    fn replan(&mut self) -> ServerMessage {
        let scene = Scene {
            start: self.config,
            ..self.scene.clone()
        };
        let opts = PlanOptions {
            mode: self.mode,
            budget: self.budget,
            keys: Some(self.keys),
            ..Default::default()
        };
        self.planned_goal = Some(self.scene.target);
        let (status, expansions) = match astar_plan(&self.geom, &self.table, &scene, &opts) {
            Ok(p) => {
                self.plan = p.steps.into();
                (PlanStatus::Ok, p.expansions)
            }
            Err(e) => {
                self.plan.clear();
                match e {
                    PlanError::NoPath { expansions } => (PlanStatus::NoPath, expansions),
                    PlanError::BudgetExhausted { expansions } => (PlanStatus::BudgetExhausted, expansions),
                    // the current configuration is kept valid, so this means the scene itself rejects it
                    PlanError::InvalidScene(_) => (PlanStatus::NoPath, 0),
                }
            }
        };
        self.last_plan_failed = status != PlanStatus::Ok;
        ServerMessage::PlanStatus {
            status,
            expansions,
            plan_len: self.plan.len(),
            seq: self.next_seq(),
        }
    }

    /// Advances one step: a flip if a plan step is pending, a plan attempt if
    /// the plan ran dry short of the target, nothing otherwise.
    pub fn tick(&mut self) -> Option<ServerMessage> {
        if self.paused {
            return None;
        }
        if self.at_target() {
            self.plan.clear();
            return None;
        }
        if let Some(step) = self.plan.pop_front() {
            let next = revolve(&self.geom, &self.table, &self.config, step.edge).ok().filter(|c| {
                self.mode.allows_state(c.state) && check_move(&self.geom, &self.scene, c, false)
            });
            return match next {
                Some(to) => {
                    let from = self.config;
                    self.config = to;
                    Some(ServerMessage::Flip {
                        from: PoseView::of(&self.geom, &from),
                        to: PoseView::of(&self.geom, &to),
                        pivot_edge: step.edge,
                        seq: self.next_seq(),
                    })
                }
                None => {
                    self.drop_plan();
                    Some(self.replan())
                }
            };
        }
        // a failed attempt is retried only once the target moves
        if self.last_plan_failed && self.planned_goal == Some(self.scene.target) {
            return None;
        }
        Some(self.replan())
    }
}
