use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::autonomy::{AlignGains, AssistGains, CostmapParams, GovernorConfig, TrackerParams};
use crate::intent::IntentConfig;
use crate::sim::{Pose2, World};

/// Robot-side control parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    /// Room-mode input per speed tier step, capped at 1.
    pub input_unit: f64,
    pub assist: AssistGains,
    pub align: AlignGains,
    pub governor: GovernorConfig,
    pub tracker: TrackerParams,
    pub costmap: CostmapParams,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            input_unit: 0.25,
            assist: AssistGains::default(),
            align: AlignGains::default(),
            governor: GovernorConfig::default(),
            tracker: TrackerParams::default(),
            costmap: CostmapParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPaths {
    pub left: PathBuf,
    pub right: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsoleConfig {
    /// Newline-delimited JSON over plain TCP.
    pub tcp: Option<String>,
    /// The same messages as WebSocket text frames.
    pub websocket: Option<String>,
    /// Accept `keyboard_gesture` messages as label input.
    pub keyboard: bool,
}

impl Default for ConsoleConfig {
    fn default() -> Self {
        Self {
            tcp: Some("127.0.0.1:7700".into()),
            websocket: Some("127.0.0.1:7701".into()),
            keyboard: true,
        }
    }
}

/// Main config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub intent: IntentConfig,
    pub control: ControlConfig,
    pub models: Option<ModelPaths>,
    /// JSON map room name to `[x, y, theta]`, overriding world goals.
    pub room_goals: Option<PathBuf>,
    pub console: ConsoleConfig,
    /// UDP target for command datagrams.
    pub command_udp: Option<String>,
    /// EMG stream endpoint for live sessions.
    pub stream_endpoint: Option<String>,
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn load_room_goals(path: &Path) -> Result<BTreeMap<String, Pose2>, ServiceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
    let raw: BTreeMap<String, [f64; 3]> = serde_json::from_str(&text)
        .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
    Ok(raw
        .into_iter()
        .map(|(k, [x, y, t])| (k, Pose2::new(x, y, t)))
        .collect())
}

/// Replaces room goals; unknown rooms are an error.
pub fn apply_room_goals(
    world: &mut World,
    goals: &BTreeMap<String, Pose2>,
) -> Result<(), ServiceError> {
    for (name, goal) in goals {
        let room = world
            .map
            .rooms
            .iter_mut()
            .find(|r| r.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| ServiceError::Config(format!("room goals: unknown room `{name}`")))?;
        room.goal = *goal;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c: ServiceConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ServiceConfig::default());
        let partial: ServiceConfig =
            serde_json::from_str(r#"{"control": {"assist": {"k_v": 1.5}}}"#).unwrap();
        assert_eq!(partial.control.assist.k_v, 1.5);
        assert_eq!(partial.control.assist.k_w, 2.0);
    }

    #[test]
    fn room_goal_override() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rooms.json");
        std::fs::write(&p, r#"{"kitchen": [8.0, 3.0, 0.0]}"#).unwrap();
        let mut w = World::two_room();
        apply_room_goals(&mut w, &load_room_goals(&p).unwrap()).unwrap();
        assert_eq!(
            w.map.room("kitchen").unwrap().goal,
            Pose2::new(8.0, 3.0, 0.0)
        );
        let bad = [("attic".to_string(), Pose2::default())]
            .into_iter()
            .collect();
        assert!(apply_room_goals(&mut w, &bad).is_err());
    }
}
