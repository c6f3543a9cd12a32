use serde::{Deserialize, Serialize};

use super::{from_json, to_json_pretty, FormatError};
use crate::planner::DEFAULT_BUDGET;
use crate::reachability::KeyMode;
use crate::robot::{RobotGeometry, TransitionTable};
use crate::statics::{MassModel, MovableMass, Vec3, DEFAULT_GRAVITY};
use crate::tolerances::{KEY_ANGLE, KEY_POS_REL};

pub const DEFAULT_ROBOT_CONFIG: &str = include_str!("../../assets/robot.default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfigDoc {
    pub ell: f64,
    pub leg_len: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tri_side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect_width: Option<f64>,
    #[serde(default)]
    pub allow_sd_sd: bool,
    /// Omitted: four tetrahedral legs, see [`MassModel::default_for`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassDoc {
    pub body_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    pub movable: Vec<MovableDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovableDoc {
    pub mass: f64,
    /// Lift segment start and end, body frame.
    pub a: [f64; 3],
    pub b: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDoc {
    /// Visited-set position quantum, relative to the triangle side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_pos_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_budget: Option<usize>,
}

/// Everything a robot config resolves to.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSetup {
    pub geometry: RobotGeometry,
    pub table: TransitionTable,
    pub masses: MassModel,
    pub keys: KeyMode,
    pub budget: usize,
}

fn positive(name: &str, v: f64) -> Result<(), FormatError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FormatError::Schema {
            path: name.into(),
            message: format!("must be positive, got {v}"),
        })
    }
}

impl RobotConfigDoc {
    pub fn build(&self) -> Result<RobotSetup, FormatError> {
        positive("ell", self.ell)?;
        positive("leg_len", self.leg_len)?;
        if let Some(s) = self.tri_side {
            positive("tri_side", s)?;
        }
        if let Some(w) = self.rect_width {
            positive("rect_width", w)?;
        }
        let geometry = RobotGeometry::new(self.ell, self.leg_len, self.tri_side, self.rect_width)
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        let masses = match &self.mass {
            None => MassModel::default_for(&geometry),
            Some(m) => {
                let movable = m
                    .movable
                    .iter()
                    .map(|d| MovableMass {
                        mass: d.mass,
                        a: Vec3::from(d.a),
                        b: Vec3::from(d.b),
                    })
                    .collect();
                MassModel::new(m.body_mass, movable, m.gravity.unwrap_or(DEFAULT_GRAVITY))
                    .map_err(|e| FormatError::Schema {
                        path: "mass".into(),
                        message: e.to_string(),
                    })?
            }
        };
        let tol = self.tolerances.clone().unwrap_or(TolerancesDoc {
            key_pos_rel: None,
            key_angle_deg: None,
            plan_budget: None,
        });
        let eps_p = tol.key_pos_rel.unwrap_or(KEY_POS_REL);
        let eps_a = tol.key_angle_deg.map_or(KEY_ANGLE, f64::to_radians);
        positive("tolerances.key_pos_rel", eps_p)?;
        positive("tolerances.key_angle_deg", eps_a)?;
        let budget = tol.plan_budget.unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(FormatError::Schema {
                path: "tolerances.plan_budget".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(RobotSetup {
            keys: KeyMode::Quantized {
                eps_p: eps_p * geometry.tri_side(),
                eps_a,
            },
            geometry,
            table: TransitionTable::prism(self.allow_sd_sd),
            masses,
            budget,
        })
    }
}

pub fn load_robot_config(bytes: &[u8]) -> Result<(RobotConfigDoc, RobotSetup), FormatError> {
    let doc: RobotConfigDoc = from_json(bytes)?;
    let setup = doc.build()?;
    Ok((doc, setup))
}

pub fn save_robot_config(doc: &RobotConfigDoc) -> String {
    to_json_pretty(doc)
}

impl Default for RobotConfigDoc {
    fn default() -> Self {
        from_json(DEFAULT_ROBOT_CONFIG.as_bytes()).expect("embedded default config parses")
    }
}
