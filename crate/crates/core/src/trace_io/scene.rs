use serde::{Deserialize, Serialize};

use super::{from_json, to_json_pretty, FormatError};
use crate::geometry::{Aabb, ConvexPolygon, Vec2};
use crate::planner::Scene;
use crate::reachability::LocomotionMode;
use crate::robot::{Configuration, StableState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arena: Option<ArenaDoc>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    pub start: StartDoc,
    pub target: TargetDoc,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_state: Option<StableState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<LocomotionMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaDoc {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartDoc {
    pub x: f64,
    pub y: f64,
    pub alpha_deg: f64,
    pub state: StableState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScene {
    pub doc: SceneDoc,
    pub scene: Scene,
    pub mode: Option<LocomotionMode>,
}

fn finite(path: &str, vals: &[f64]) -> Result<(), FormatError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FormatError::Schema {
            path: path.into(),
            message: "must be finite".into(),
        })
    }
}

impl SceneDoc {
    /// Validated planner scene; obstacle rings are normalized to counterclockwise.
    pub fn to_scene(&self) -> Result<Scene, FormatError> {
        finite("start", &[self.start.x, self.start.y, self.start.alpha_deg])?;
        finite("target", &[self.target.x, self.target.y])?;
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(FormatError::Schema {
                path: "tolerance".into(),
                message: format!("must be positive, got {}", self.tolerance),
            });
        }
        let arena = match self.arena {
            None => None,
            Some(a) => Some(
                Aabb::new(Vec2::new(a.min[0], a.min[1]), Vec2::new(a.max[0], a.max[1])).map_err(|e| {
                    FormatError::Schema {
                        path: "arena".into(),
                        message: e.to_string(),
                    }
                })?,
            ),
        };
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(index, o)| {
                ConvexPolygon::from_ring(o.polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect()).map_err(|e| {
                    FormatError::Geometry {
                        index,
                        reason: e.to_string(),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Scene {
            arena,
            obstacles,
            start: Configuration::new(
                Vec2::new(self.start.x, self.start.y),
                self.start.state,
                self.start.alpha_deg.to_radians(),
            ),
            target: Vec2::new(self.target.x, self.target.y),
            tolerance: self.tolerance,
            goal_state: self.goal_state,
        })
    }

    /// Document for `scene`; angles are converted to degrees.
    pub fn from_scene(scene: &Scene, mode: Option<LocomotionMode>) -> Self {
        Self {
            arena: scene.arena.map(|a| ArenaDoc {
                min: [a.min.x, a.min.y],
                max: [a.max.x, a.max.y],
            }),
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| ObstacleDoc {
                    polygon: o.vertices().iter().map(|v| [v.x, v.y]).collect(),
                })
                .collect(),
            start: StartDoc {
                x: scene.start.centroid.x,
                y: scene.start.centroid.y,
                alpha_deg: scene.start.alpha().to_degrees(),
                state: scene.start.state,
            },
            target: TargetDoc {
                x: scene.target.x,
                y: scene.target.y,
            },
            tolerance: scene.tolerance,
            goal_state: scene.goal_state,
            mode,
        }
    }
}

pub fn load_scene(bytes: &[u8]) -> Result<LoadedScene, FormatError> {
    let doc: SceneDoc = from_json(bytes)?;
    let scene = doc.to_scene()?;
    Ok(LoadedScene {
        mode: doc.mode,
        scene,
        doc,
    })
}

pub fn save_scene(doc: &SceneDoc) -> String {
    to_json_pretty(doc)
}
