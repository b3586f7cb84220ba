use std::path::Path;

use serde::{Deserialize, Serialize};

use super::expert::{ExpertStyle, ExpertTask};
use super::operator::ScriptStep;
use super::task::TaskSpec;
use super::ServiceError;
use crate::gesture::Arm;
use crate::sim::STEP_MS;
use crate::stream::GestureSchedule;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum OperatorSpec {
    #[default]
    Idle,
    Script {
        steps: Vec<ScriptStep>,
    },
    Expert {
        style: ExpertStyle,
        #[serde(default)]
        task: ExpertTask,
    },
    /// Synthetic EMG decoded by the configured models. `schedule` is in
    /// samples; `script` supplies texts and markers.
    Emg {
        schedule: GestureSchedule,
        #[serde(default)]
        script: Vec<ScriptStep>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Perturbation {
    /// Windows in `[from_ms, to_ms)` are lost; `arm: null` drops both.
    Dropout {
        #[serde(default)]
        arm: Option<Arm>,
        from_ms: u64,
        to_ms: u64,
    },
    MoveObject {
        at_ms: u64,
        object: String,
        position: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub duration_ms: u64,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub task: Option<TaskSpec>,
    /// End the session once the task result is known.
    #[serde(default)]
    pub stop_on_task: bool,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
        let s: Self = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Scenario(format!("{}: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.duration_ms == 0 || self.duration_ms % STEP_MS != 0 {
            return Err(ServiceError::Scenario(format!(
                "duration_ms must be a positive multiple of {STEP_MS}, got {}",
                self.duration_ms
            )));
        }
        for p in &self.perturbations {
            if let Perturbation::Dropout { from_ms, to_ms, .. } = p {
                if to_ms <= from_ms {
                    return Err(ServiceError::Scenario(format!(
                        "empty dropout [{from_ms}, {to_ms})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Fetch the cup from the kitchen and bring it to the bedroom.
    pub fn drink(style: ExpertStyle) -> Self {
        let name = match style {
            ExpertStyle::Teleop => "drink-teleop",
            ExpertStyle::Assisted => "drink-assisted",
        };
        Self {
            name: name.into(),
            duration_ms: 600_000,
            operator: OperatorSpec::Expert {
                style,
                task: ExpertTask::default(),
            },
            task: Some(TaskSpec::drink()),
            stop_on_task: true,
            perturbations: Vec::new(),
        }
    }

    /// Console-driven session with no task; ends after `duration_ms`.
    pub fn live(duration_ms: u64) -> Self {
        Self {
            name: "live".into(),
            ..Self::idle(duration_ms)
        }
    }

    pub fn idle(duration_ms: u64) -> Self {
        Self {
            name: "idle".into(),
            duration_ms,
            operator: OperatorSpec::Idle,
            task: None,
            stop_on_task: false,
            perturbations: Vec::new(),
        }
    }

    /// True when the window at `t_ms` is lost for `arm`.
    pub fn dropped(&self, arm: Arm, t_ms: u64) -> bool {
        self.perturbations.iter().any(|p| match p {
            Perturbation::Dropout {
                arm: a,
                from_ms,
                to_ms,
            } => a.is_none_or(|a| a == arm) && (*from_ms..*to_ms).contains(&t_ms),
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let s: Scenario = serde_json::from_str(
            r#"{
                "name": "demo",
                "duration_ms": 2000,
                "operator": {"type": "script", "steps": [
                    {"type": "text", "at_ms": 0, "text": "start gesture mode"},
                    {"type": "hold", "from_ms": 0, "to_ms": 1000, "left": "wrist_forward", "right": "rest"}
                ]},
                "perturbations": [{"type": "dropout", "arm": "left", "from_ms": 400, "to_ms": 800}]
            }"#,
        )
        .unwrap();
        s.validate().unwrap();
        assert!(s.dropped(Arm::Left, 400));
        assert!(!s.dropped(Arm::Right, 400));
        assert!(!s.dropped(Arm::Left, 800));
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_duration() {
        assert!(Scenario::idle(15).validate().is_err());
    }
}
