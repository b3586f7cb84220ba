use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::heatmap::{percentile_nearest_rank, Heatmap};
use crate::gesture::{Arm, Gesture};
use crate::stream::CHANNELS_PER_ARM;

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("MVC recording for {arm} {gesture} is silent")]
    Silent { arm: Arm, gesture: Gesture },
    #[error("MVC recording for {arm} {gesture} has no valid windows")]
    Empty { arm: Arm, gesture: Gesture },
    #[error("calibration profile is incomplete: missing {arm} {gesture}")]
    Incomplete { arm: Arm, gesture: Gesture },
    #[error("calibration required: reference for {arm} {gesture} is zero")]
    ZeroReference { arm: Arm, gesture: Gesture },
}

/// Heatmaps of one maximum-effort attempt.
#[derive(Debug, Clone)]
pub struct MvcRecording {
    pub arm: Arm,
    pub gesture: Gesture,
    pub heatmaps: Vec<Heatmap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvcReference {
    pub arm: Arm,
    pub gesture: Gesture,
    pub reference_uv: f64,
}

/// Per-arm, per-gesture MVC references.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub references: Vec<MvcReference>,
}

impl CalibrationProfile {
    pub fn reference(&self, arm: Arm, gesture: Gesture) -> Option<f64> {
        self.references
            .iter()
            .find(|r| r.arm == arm && r.gesture == gesture)
            .map(|r| r.reference_uv)
    }
}

/// Activation summary of a heatmap: the 90th percentile of its cells.
pub fn activation_level(cells: &[f64]) -> f64 {
    percentile_nearest_rank(cells, 90.0)
}

/// Builds MVC references. Each channel's RMS is pooled over all windows of
/// the attempt, and the reference is the nearest-rank 90th percentile over
/// the 128 channels. Every `(arm, gesture)` in `required` must be present.
///
/// Rest carries no activity, so it is never required to be non-silent.
pub fn calibrate_mvc(
    recordings: &[MvcRecording],
    required: &[(Arm, Gesture)],
) -> Result<CalibrationProfile, CalibrationError> {
    let mut profile = CalibrationProfile::default();
    for rec in recordings {
        if rec.heatmaps.is_empty() {
            return Err(CalibrationError::Empty {
                arm: rec.arm,
                gesture: rec.gesture,
            });
        }
        let mut pooled = vec![0.0; CHANNELS_PER_ARM];
        for h in &rec.heatmaps {
            for (p, v) in pooled.iter_mut().zip(&h.cells) {
                *p += v * v;
            }
        }
        let n = rec.heatmaps.len() as f64;
        pooled.iter_mut().for_each(|p| *p = (*p / n).sqrt());
        let reference = activation_level(&pooled);
        if reference <= 0.0 {
            return Err(CalibrationError::Silent {
                arm: rec.arm,
                gesture: rec.gesture,
            });
        }
        profile
            .references
            .retain(|r| !(r.arm == rec.arm && r.gesture == rec.gesture));
        profile.references.push(MvcReference {
            arm: rec.arm,
            gesture: rec.gesture,
            reference_uv: reference,
        });
    }
    for &(arm, gesture) in required {
        if profile.reference(arm, gesture).is_none() {
            return Err(CalibrationError::Incomplete { arm, gesture });
        }
    }
    Ok(profile)
}

/// Current effort as a fraction of the gesture's MVC reference.
pub fn effort_fraction(
    heatmap: &Heatmap,
    profile: &CalibrationProfile,
    gesture: Gesture,
) -> Result<f64, CalibrationError> {
    let arm = heatmap.arm;
    let reference = profile
        .reference(arm, gesture)
        .ok_or(CalibrationError::Incomplete { arm, gesture })?;
    if reference <= 0.0 {
        return Err(CalibrationError::ZeroReference { arm, gesture });
    }
    Ok(activation_level(&heatmap.cells) / reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hm(cells: Vec<f64>) -> Heatmap {
        Heatmap::from_cells(Arm::Left, cells, 0)
    }

    #[test]
    fn reference_is_nearest_rank_p90() {
        let rec = MvcRecording {
            arm: Arm::Left,
            gesture: Gesture::WristBack,
            heatmaps: vec![hm((1..=128).map(|v| v as f64).collect())],
        };
        let p = calibrate_mvc(&[rec], &[(Arm::Left, Gesture::WristBack)]).unwrap();
        assert_eq!(p.reference(Arm::Left, Gesture::WristBack), Some(116.0));
    }

    #[test]
    fn equal_channels_give_that_value() {
        let rec = MvcRecording {
            arm: Arm::Left,
            gesture: Gesture::WristForward,
            heatmaps: vec![hm(vec![7.5; 128]), hm(vec![7.5; 128])],
        };
        let p = calibrate_mvc(&[rec], &[]).unwrap();
        assert_eq!(p.reference(Arm::Left, Gesture::WristForward), Some(7.5));
    }

    #[test]
    fn silent_and_missing_are_errors() {
        let silent = MvcRecording {
            arm: Arm::Right,
            gesture: Gesture::WristBack,
            heatmaps: vec![Heatmap::from_cells(Arm::Right, vec![0.0; 128], 0)],
        };
        assert_eq!(
            calibrate_mvc(&[silent], &[]),
            Err(CalibrationError::Silent {
                arm: Arm::Right,
                gesture: Gesture::WristBack
            })
        );
        assert_eq!(
            calibrate_mvc(&[], &[(Arm::Left, Gesture::WristPronation)]),
            Err(CalibrationError::Incomplete {
                arm: Arm::Left,
                gesture: Gesture::WristPronation
            })
        );
    }

    #[test]
    fn mvc_level_activity_is_unit_fraction() {
        let cells: Vec<f64> = (0..128).map(|v| (v % 17) as f64 * 3.0).collect();
        let rec = MvcRecording {
            arm: Arm::Left,
            gesture: Gesture::WristBack,
            heatmaps: vec![hm(cells.clone())],
        };
        let p = calibrate_mvc(&[rec], &[]).unwrap();
        let f = effort_fraction(&hm(cells), &p, Gesture::WristBack).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(matches!(
            effort_fraction(&hm(vec![1.0; 128]), &p, Gesture::WristForward),
            Err(CalibrationError::Incomplete { .. })
        ));
        let zero = CalibrationProfile {
            references: vec![MvcReference {
                arm: Arm::Left,
                gesture: Gesture::Rest,
                reference_uv: 0.0,
            }],
        };
        assert!(matches!(
            effort_fraction(&hm(vec![1.0; 128]), &zero, Gesture::Rest),
            Err(CalibrationError::ZeroReference { .. })
        ));
    }
}
