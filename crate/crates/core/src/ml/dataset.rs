use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{rms_heatmap, Heatmap, Preprocessor};
use crate::gesture::{Arm, Gesture};
use crate::stream::{
    default_profiles, EffortSegment, EmgFrame, GestureSchedule, GestureSegment, NoiseSpec,
    ScheduleError, SleeveLayout, SyntheticSource, SAMPLE_RATE_HZ,
};

const MS: u64 = SAMPLE_RATE_HZ as u64 / 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueTrial {
    pub gesture: Gesture,
    pub set: u32,
    pub rep: u32,
}

/// Cue-and-hold recording protocol. Trial `i` occupies
/// `[i * (cue + hold), (i + 1) * (cue + hold))` milliseconds: a cue period
/// at rest followed by the hold. Only the final `labeled_ms` of each hold is
/// used for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueSchedule {
    pub trials: Vec<CueTrial>,
    pub cue_ms: u64,
    pub hold_ms: u64,
    pub labeled_ms: u64,
    /// Target effort as a fraction of MVC, `[low, high]`.
    pub effort_band: (f64, f64),
}

impl CueSchedule {
    /// `sets` sets, each cycling `reps` times through `gestures`.
    pub fn standard(gestures: &[Gesture], sets: u32, reps: u32, effort_band: (f64, f64)) -> Self {
        let mut trials = Vec::new();
        for set in 0..sets {
            for rep in 0..reps {
                for &gesture in gestures {
                    trials.push(CueTrial { gesture, set, rep });
                }
            }
        }
        Self {
            trials,
            cue_ms: 3_000,
            hold_ms: 5_000,
            labeled_ms: 4_000,
            effort_band,
        }
    }

    /// Five sets of three repetitions over all five control gestures.
    pub fn default_session() -> Self {
        Self::standard(&Gesture::ALL, 5, 3, (0.15, 0.30))
    }

    pub fn trial_samples(&self) -> u64 {
        (self.cue_ms + self.hold_ms) * MS
    }

    pub fn duration_samples(&self) -> u64 {
        self.trials.len() as u64 * self.trial_samples()
    }

    /// Sample range of the hold of trial `i`.
    pub fn hold_range(&self, i: usize) -> (u64, u64) {
        let start = i as u64 * self.trial_samples() + self.cue_ms * MS;
        (start, start + self.hold_ms * MS)
    }

    /// Sample range of the labeled part of trial `i`'s hold.
    pub fn labeled_range(&self, i: usize) -> (u64, u64) {
        let (_, end) = self.hold_range(i);
        (end - self.labeled_ms * MS, end)
    }

    /// Effort for trial `i`, spread evenly over the band.
    pub fn trial_effort(&self, i: usize) -> f64 {
        let (lo, hi) = self.effort_band;
        let frac = (i as f64 * 0.618_033_988_75).fract();
        lo + (hi - lo) * frac
    }

    /// Ground-truth timeline for a subject following the cues on both arms.
    /// Activation starts 300 ms into the hold and ramps over 500 ms.
    pub fn gesture_schedule(&self) -> GestureSchedule {
        let mut segments = Vec::new();
        for (i, t) in self.trials.iter().enumerate() {
            let (hs, he) = self.hold_range(i);
            segments.push(GestureSegment {
                start: i as u64 * self.trial_samples(),
                end: hs,
                left: Gesture::Rest,
                right: Gesture::Rest,
                onset: 0,
                ramp: 0,
            });
            segments.push(GestureSegment {
                start: hs,
                end: he,
                left: t.gesture,
                right: t.gesture,
                onset: 300 * MS,
                ramp: 500 * MS,
            });
        }
        GestureSchedule { segments }
    }

    pub fn effort_schedule(&self) -> Vec<EffortSegment> {
        (0..self.trials.len())
            .map(|i| {
                let (start, end) = self.hold_range(i);
                let e = self.trial_effort(i);
                EffortSegment {
                    start,
                    end,
                    left: e,
                    right: e,
                }
            })
            .collect()
    }

    /// The default synthetic subject performing this protocol.
    pub fn synthetic_source(
        &self,
        seed: u64,
        session_id: u32,
    ) -> Result<SyntheticSource, ScheduleError> {
        SyntheticSource::new(
            &default_profiles(),
            self.gesture_schedule(),
            self.effort_schedule(),
            NoiseSpec::default(),
            seed,
            session_id,
            self.duration_samples(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialInfo {
    pub id: usize,
    pub gesture: Gesture,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub heatmap: Heatmap,
    pub label: Gesture,
    pub trial: usize,
}

/// Labeled heatmaps of one arm. Trials are numbered chronologically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub arm: Arm,
    pub trials: Vec<TrialInfo>,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error(
        "recording ends at sample {recorded} before trial {first} (missing trials {missing:?})"
    )]
    MissingTrials {
        first: usize,
        missing: Vec<usize>,
        recorded: u64,
    },
    #[error("gesture {gesture} has {trials} trials, at least {needed} are needed to split")]
    TooFewTrials {
        gesture: Gesture,
        trials: usize,
        needed: usize,
    },
    #[error("dataset has no samples")]
    Empty,
}

impl Dataset {
    pub fn new(arm: Arm) -> Self {
        Self {
            arm,
            trials: Vec::new(),
            samples: Vec::new(),
        }
    }

    /// Distinct labels in first-seen order.
    pub fn gestures(&self) -> Vec<Gesture> {
        let mut out = Vec::new();
        for t in &self.trials {
            if !out.contains(&t.gesture) {
                out.push(t.gesture);
            }
        }
        out
    }

    /// Keeps only trials of `vocabulary`, renumbering nothing.
    pub fn restrict(&self, vocabulary: &[Gesture]) -> Self {
        Self {
            arm: self.arm,
            trials: self
                .trials
                .iter()
                .filter(|t| vocabulary.contains(&t.gesture))
                .cloned()
                .collect(),
            samples: self
                .samples
                .iter()
                .filter(|s| vocabulary.contains(&s.label))
                .cloned()
                .collect(),
        }
    }

    pub fn split_of(&self, trial: usize) -> Option<Split> {
        self.trials
            .iter()
            .find(|t| t.id == trial)
            .and_then(|t| t.split)
    }

    /// Samples tagged `split`.
    pub fn in_split(&self, split: Split) -> Vec<&Sample> {
        let tags: std::collections::HashMap<usize, Option<Split>> =
            self.trials.iter().map(|t| (t.id, t.split)).collect();
        self.samples
            .iter()
            .filter(|s| tags.get(&s.trial).copied().flatten() == Some(split))
            .collect()
    }

    /// Mean heatmap per gesture, in `gestures()` order.
    pub fn mean_heatmaps(&self) -> Vec<(Gesture, Vec<f64>)> {
        self.gestures()
            .into_iter()
            .map(|g| {
                let mut acc = vec![0.0; crate::stream::CHANNELS_PER_ARM];
                let mut n = 0usize;
                for s in self.samples.iter().filter(|s| s.label == g) {
                    acc.iter_mut()
                        .zip(&s.heatmap.cells)
                        .for_each(|(a, v)| *a += v);
                    n += 1;
                }
                acc.iter_mut().for_each(|a| *a /= n.max(1) as f64);
                (g, acc)
            })
            .collect()
    }
}

/// Labels the windows lying fully inside each trial's labeled region of one
/// recording. Trial ids continue from those already in `left`/`right` so
/// several sessions can be pooled in chronological order.
pub fn build_dataset<I>(
    recording: I,
    cues: &CueSchedule,
    layout: &SleeveLayout,
) -> Result<[Dataset; 2], DatasetError>
where
    I: IntoIterator<Item = EmgFrame>,
{
    let mut out = [Dataset::new(Arm::Left), Dataset::new(Arm::Right)];
    append_session(&mut out, recording, cues, layout)?;
    Ok(out)
}

pub fn append_session<I>(
    datasets: &mut [Dataset; 2],
    recording: I,
    cues: &CueSchedule,
    layout: &SleeveLayout,
) -> Result<(), DatasetError>
where
    I: IntoIterator<Item = EmgFrame>,
{
    let base = datasets[0].trials.len();
    let ranges: Vec<(u64, u64)> = (0..cues.trials.len())
        .map(|i| cues.labeled_range(i))
        .collect();
    let mut pre = Preprocessor::default();
    let mut recorded = 0u64;
    let mut trial = 0usize;
    let mut new_samples: [Vec<Sample>; 2] = [Vec::new(), Vec::new()];
    for frame in recording {
        recorded = recorded.max(frame.end_index());
        for w in pre.push_frame(&frame) {
            while trial < ranges.len() && w.start_sample_index >= ranges[trial].1 {
                trial += 1;
            }
            if trial >= ranges.len() {
                break;
            }
            let (s, e) = ranges[trial];
            if !w.is_valid() || w.start_sample_index < s || w.end_sample_index() > e {
                continue;
            }
            for arm in Arm::BOTH {
                let heatmap = rms_heatmap(&w, arm, layout).expect("valid window");
                new_samples[arm.index()].push(Sample {
                    heatmap,
                    label: cues.trials[trial].gesture,
                    trial: base + trial,
                });
            }
        }
    }
    let missing: Vec<usize> = ranges
        .iter()
        .enumerate()
        .filter(|(_, r)| r.1 > recorded)
        .map(|(i, _)| i)
        .collect();
    if let Some(&first) = missing.first() {
        return Err(DatasetError::MissingTrials {
            first,
            missing,
            recorded,
        });
    }
    for (ds, samples) in datasets.iter_mut().zip(new_samples) {
        ds.trials
            .extend(cues.trials.iter().enumerate().map(|(i, t)| TrialInfo {
                id: base + i,
                gesture: t.gesture,
                split: None,
            }));
        ds.samples.extend(samples);
    }
    Ok(())
}

pub const MIN_TRIALS_PER_GESTURE: usize = 10;

/// Tags trials: per gesture the chronologically last `ceil(0.1 n)` trials
/// are test; the rest are shuffled by `seed` and the first
/// `max(1, floor(0.25 m))` of them become validation.
pub fn split(dataset: &Dataset, seed: u64) -> Result<Dataset, DatasetError> {
    if dataset.trials.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut out = dataset.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in dataset.gestures() {
        let mut ids: Vec<usize> = dataset
            .trials
            .iter()
            .filter(|t| t.gesture == g)
            .map(|t| t.id)
            .collect();
        ids.sort_unstable();
        let n = ids.len();
        if n < MIN_TRIALS_PER_GESTURE {
            return Err(DatasetError::TooFewTrials {
                gesture: g,
                trials: n,
                needed: MIN_TRIALS_PER_GESTURE,
            });
        }
        let n_test = n.div_ceil(10);
        let (rest, test) = ids.split_at(n - n_test);
        let mut rest = rest.to_vec();
        rest.shuffle(&mut rng);
        let n_val = (rest.len() / 4).max(1);
        let tag = |id: usize| {
            if test.contains(&id) {
                Split::Test
            } else if rest[..n_val].contains(&id) {
                Split::Val
            } else {
                Split::Train
            }
        };
        for t in out.trials.iter_mut().filter(|t| t.gesture == g) {
            t.split = Some(tag(t.id));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(trials_per_gesture: usize, gestures: &[Gesture]) -> Dataset {
        let mut ds = Dataset::new(Arm::Left);
        let mut id = 0;
        for _ in 0..trials_per_gesture {
            for &g in gestures {
                ds.trials.push(TrialInfo {
                    id,
                    gesture: g,
                    split: None,
                });
                id += 1;
            }
        }
        ds
    }

    #[test]
    fn default_protocol_shape() {
        let c = CueSchedule::default_session();
        assert_eq!(c.trials.len(), 75);
        assert_eq!(c.trial_samples(), 32_000);
        assert_eq!(c.labeled_range(0), (16_000, 32_000));
        assert_eq!(c.duration_samples(), 75 * 32_000);
        for i in 0..75 {
            let e = c.trial_effort(i);
            assert!((0.15..=0.30).contains(&e));
        }
    }

    #[test]
    fn fifteen_trials_split_two_ten_three() {
        let ds = split(&toy(15, &Gesture::ALL), 9).unwrap();
        for g in Gesture::ALL {
            let count = |s| {
                ds.trials
                    .iter()
                    .filter(|t| t.gesture == g && t.split == Some(s))
                    .count()
            };
            assert_eq!(
                (count(Split::Test), count(Split::Train), count(Split::Val)),
                (2, 10, 3)
            );
            let test_ids: Vec<usize> = ds
                .trials
                .iter()
                .filter(|t| t.gesture == g && t.split == Some(Split::Test))
                .map(|t| t.id)
                .collect();
            let max_other = ds
                .trials
                .iter()
                .filter(|t| t.gesture == g && t.split != Some(Split::Test))
                .map(|t| t.id)
                .max()
                .unwrap();
            assert!(test_ids.iter().all(|&id| id > max_other));
        }
    }

    #[test]
    fn split_is_seeded() {
        let ds = toy(15, &Gesture::ALL);
        assert_eq!(split(&ds, 1).unwrap(), split(&ds, 1).unwrap());
        assert_ne!(split(&ds, 1).unwrap(), split(&ds, 2).unwrap());
    }

    #[test]
    fn too_few_trials() {
        assert!(matches!(
            split(&toy(5, &Gesture::ALL), 0),
            Err(DatasetError::TooFewTrials { trials: 5, .. })
        ));
    }

    #[test]
    fn one_hold_gives_99_windows() {
        let cues = CueSchedule::standard(&[Gesture::WristBack], 1, 1, (0.2, 0.2));
        let src = cues.synthetic_source(1, 1).unwrap();
        let [left, right] = build_dataset(src, &cues, &SleeveLayout::default()).unwrap();
        assert_eq!(left.samples.len(), 99);
        assert_eq!(right.samples.len(), 99);
        assert!(left
            .samples
            .iter()
            .all(|s| s.label == Gesture::WristBack && s.trial == 0));
    }

    #[test]
    fn short_recording_names_first_missing_trial() {
        let cues = CueSchedule::standard(&[Gesture::Rest, Gesture::WristBack], 1, 2, (0.2, 0.2));
        let src = cues
            .synthetic_source(1, 1)
            .unwrap()
            .take(3 * 32_000 / 40 - 1);
        match build_dataset(src, &cues, &SleeveLayout::default()) {
            Err(DatasetError::MissingTrials { first, missing, .. }) => {
                assert_eq!(first, 2);
                assert_eq!(missing, vec![2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
