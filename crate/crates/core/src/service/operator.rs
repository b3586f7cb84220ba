use serde::{Deserialize, Serialize};

use super::robot::RobotSide;
use super::ServiceError;
use crate::dsp::{rms_heatmap, Heatmap, Preprocessor};
use crate::gesture::{Arm, Gesture};
use crate::intent::{ControlMode, LabelInput, LABEL_PERIOD_MS};
use crate::ml::{ArmModel, GestureClassifier};
use crate::stream::{
    default_profiles, GestureSchedule, NoiseSpec, SleeveLayout, SyntheticSource, FRAME_SAMPLES,
    SAMPLE_RATE_HZ,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMarker {
    Start,
    Finish,
}

/// What an operator does during one 10 ms step.
#[derive(Debug, Clone, Default)]
pub struct OperatorInput {
    /// Per-arm label input, present on window boundaries.
    pub window: Option<[LabelInput; 2]>,
    pub texts: Vec<String>,
    pub markers: Vec<TaskMarker>,
    /// Heatmaps behind `window`, when it came from EMG.
    pub heatmaps: Option<[Heatmap; 2]>,
    /// Stage faults to log as degradation events, `(stage, detail)`.
    pub degradations: Vec<(String, serde_json::Value)>,
}

/// Session state visible to an operator.
pub struct OperatorView<'a> {
    pub robot: &'a RobotSide,
    pub mode: ControlMode,
}

pub trait Operator: Send {
    fn poll(&mut self, t_ms: u64, view: &OperatorView) -> OperatorInput;
}

fn labels(l: Gesture, r: Gesture) -> Option<[LabelInput; 2]> {
    Some([LabelInput::Label(l), LabelInput::Label(r)])
}

/// Rest on both arms at the label rate and nothing else.
pub struct IdleOperator;

impl Operator for IdleOperator {
    fn poll(&mut self, t_ms: u64, _: &OperatorView) -> OperatorInput {
        OperatorInput {
            window: (t_ms % LABEL_PERIOD_MS == 0)
                .then(|| labels(Gesture::Rest, Gesture::Rest))
                .flatten(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ScriptStep {
    Text {
        at_ms: u64,
        text: String,
    },
    /// Label pair injected on every label tick in `[from_ms, to_ms)`.
    Hold {
        from_ms: u64,
        to_ms: u64,
        left: Gesture,
        right: Gesture,
    },
    Marker {
        at_ms: u64,
        marker: TaskMarker,
    },
}

/// Open-loop timeline of texts, label holds and markers.
pub struct ScriptOperator {
    steps: Vec<ScriptStep>,
}

impl ScriptOperator {
    pub fn new(steps: Vec<ScriptStep>) -> Self {
        Self { steps }
    }

    fn events(&self, t_ms: u64, out: &mut OperatorInput) {
        for s in &self.steps {
            match s {
                ScriptStep::Text { at_ms, text } if *at_ms == t_ms => out.texts.push(text.clone()),
                ScriptStep::Marker { at_ms, marker } if *at_ms == t_ms => out.markers.push(*marker),
                _ => {}
            }
        }
    }
}

impl Operator for ScriptOperator {
    fn poll(&mut self, t_ms: u64, _: &OperatorView) -> OperatorInput {
        let mut out = OperatorInput::default();
        self.events(t_ms, &mut out);
        if t_ms % LABEL_PERIOD_MS == 0 {
            let held = self.steps.iter().find_map(|s| match s {
                ScriptStep::Hold {
                    from_ms,
                    to_ms,
                    left,
                    right,
                } if (*from_ms..*to_ms).contains(&t_ms) => Some((*left, *right)),
                _ => None,
            });
            let (l, r) = held.unwrap_or((Gesture::Rest, Gesture::Rest));
            out.window = labels(l, r);
        }
        out
    }
}

/// Synthetic subject wearing both sleeves, decoded by trained classifiers.
/// The gesture timeline is in samples; texts and markers come from `script`.
pub struct EmgOperator {
    source: SyntheticSource,
    pre: Preprocessor,
    layout: SleeveLayout,
    models: [ArmModel; 2],
    script: ScriptOperator,
}

fn model_err(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Model {
        path: "<memory>".into(),
        reason: e.to_string(),
    }
}

impl EmgOperator {
    pub fn new(
        schedule: GestureSchedule,
        script: Vec<ScriptStep>,
        models: [ArmModel; 2],
        seed: u64,
        duration_ms: u64,
    ) -> Result<Self, ServiceError> {
        let samples = duration_ms * SAMPLE_RATE_HZ as u64 / 1000;
        let source = SyntheticSource::new(
            &default_profiles(),
            schedule,
            Vec::new(),
            NoiseSpec::default(),
            seed,
            1,
            samples,
        )
        .map_err(|e| ServiceError::Scenario(e.to_string()))?
        .with_frame_len(FRAME_SAMPLES);
        Ok(Self {
            source,
            pre: Preprocessor::default(),
            layout: SleeveLayout::default(),
            models,
            script: ScriptOperator::new(script),
        })
    }
}

/// Classifies one window on both arms. Invalid windows become `Missing`.
pub fn classify_window(
    window: &crate::dsp::Window,
    layout: &SleeveLayout,
    models: &[ArmModel; 2],
) -> Result<([LabelInput; 2], Option<[Heatmap; 2]>), ServiceError> {
    if !window.is_valid() {
        return Ok(([LabelInput::Missing, LabelInput::Missing], None));
    }
    let mut maps = Vec::with_capacity(2);
    let mut inputs = Vec::with_capacity(2);
    for arm in Arm::BOTH {
        let h = rms_heatmap(window, arm, layout).map_err(model_err)?;
        inputs.push(LabelInput::Probs(
            models[arm.index()].cnn.predict(&h).map_err(model_err)?,
        ));
        maps.push(h);
    }
    let [l, r]: [LabelInput; 2] = inputs.try_into().expect("two arms");
    let [hl, hr]: [Heatmap; 2] = maps.try_into().expect("two arms");
    Ok(([l, r], Some([hl, hr])))
}

impl Operator for EmgOperator {
    fn poll(&mut self, t_ms: u64, _: &OperatorView) -> OperatorInput {
        let mut out = OperatorInput::default();
        self.script.events(t_ms, &mut out);
        let Some(frame) = self.source.next() else {
            return out;
        };
        if let Some(w) = self.pre.push_frame(&frame).pop() {
            match classify_window(&w, &self.layout, &self.models) {
                Ok((inputs, maps)) => {
                    out.window = Some(inputs);
                    out.heatmaps = maps;
                }
                Err(e) => {
                    log::warn!("classification failed: {e}");
                    out.window = Some([LabelInput::Missing, LabelInput::Missing]);
                }
            }
        }
        out
    }
}
