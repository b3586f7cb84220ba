//! Synthetic bimanual EMG source.
//!
//! Each channel carries band-limited (20-450 Hz) Gaussian noise scaled by
//! the active gesture's template cell and the scheduled effort, plus a
//! white measurement floor, mains interference and slow baseline drift.
//! Output is quantized to ADC counts exactly like recorded data.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frame::EmgFrame;
use super::layout::{CHANNELS_PER_ARM, GRID_COLS, GRID_ROWS, TOTAL_CHANNELS};
use super::{FRAME_SAMPLES, SAMPLE_RATE_HZ, UV_PER_LSB};
use crate::dsp::{Biquad, BiquadState};
use crate::gesture::{Arm, Gesture};

/// Activation map over the 8x16 grid, row-major, unit max (or all zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template(Vec<f64>);

impl Template {
    pub fn zero() -> Self {
        Self(vec![0.0; CHANNELS_PER_ARM])
    }

    /// Normalizes arbitrary nonnegative cells to unit max. Cells below 2% of
    /// the peak are cut to zero so activation regions have finite support.
    pub fn from_cells(cells: Vec<f64>) -> Self {
        assert_eq!(cells.len(), CHANNELS_PER_ARM);
        let max = cells.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Self::zero();
        }
        Self(
            cells
                .into_iter()
                .map(|v| {
                    let v = v.max(0.0) / max;
                    if v < 0.02 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect(),
        )
    }

    /// Sum of Gaussian blobs `(row, col, sigma_row, sigma_col, weight)`.
    /// Columns wrap around because the sleeve encircles the forearm.
    pub fn blobs(blobs: &[(f64, f64, f64, f64, f64)]) -> Self {
        let mut cells = vec![0.0; CHANNELS_PER_ARM];
        for r in 0..GRID_ROWS {
            for c in 0..GRID_COLS {
                let mut v = 0.0;
                for &(br, bc, sr, sc, w) in blobs {
                    let dr = r as f64 - br;
                    let raw = (c as f64 - bc).rem_euclid(GRID_COLS as f64);
                    let dc = raw.min(GRID_COLS as f64 - raw);
                    v += w * (-0.5 * (dr * dr / (sr * sr) + dc * dc / (sc * sc))).exp();
                }
                cells[r * GRID_COLS + c] = v;
            }
        }
        Self::from_cells(cells)
    }

    pub fn cells(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureProfile {
    pub gesture: Gesture,
    pub left_template: Template,
    pub right_template: Template,
    /// RMS amplitude of a unit template cell at full (MVC) effort.
    pub base_amplitude_uv: f64,
}

impl GestureProfile {
    pub fn template(&self, arm: Arm) -> &Template {
        match arm {
            Arm::Left => &self.left_template,
            Arm::Right => &self.right_template,
        }
    }
}

/// Default residual-activity model for the five control gestures.
///
/// Right-arm wrist forward and pronation deliberately overlap the wrist back
/// and supination regions, which makes them hard to separate on that arm.
pub fn default_profiles() -> Vec<GestureProfile> {
    let amp = 300.0;
    let p = |gesture, left: Template, right: Template| GestureProfile {
        gesture,
        left_template: left,
        right_template: right,
        base_amplitude_uv: amp,
    };
    vec![
        p(Gesture::Rest, Template::zero(), Template::zero()),
        p(
            Gesture::WristForward,
            Template::blobs(&[(3.0, 2.5, 1.6, 2.0, 1.0), (6.0, 4.0, 1.0, 1.5, 0.5)]),
            Template::blobs(&[(4.0, 10.0, 1.8, 2.2, 1.0), (3.0, 6.5, 1.5, 1.5, 0.6)]),
        ),
        p(
            Gesture::WristBack,
            Template::blobs(&[(4.0, 10.5, 1.6, 2.0, 1.0), (1.5, 13.0, 1.0, 1.2, 0.4)]),
            Template::blobs(&[(4.0, 10.5, 1.6, 2.0, 1.0), (1.5, 13.0, 1.0, 1.2, 0.4)]),
        ),
        p(
            Gesture::WristSupination,
            Template::blobs(&[(1.5, 6.5, 1.2, 1.8, 1.0), (5.0, 7.0, 1.0, 1.2, 0.5)]),
            Template::blobs(&[(2.0, 4.0, 1.4, 1.8, 1.0), (5.5, 2.0, 1.0, 1.4, 0.5)]),
        ),
        p(
            Gesture::WristPronation,
            Template::blobs(&[(5.5, 14.5, 1.3, 1.8, 1.0), (2.0, 0.5, 1.0, 1.2, 0.5)]),
            Template::blobs(&[(2.5, 4.5, 1.5, 2.0, 1.0), (5.0, 3.0, 1.2, 1.4, 0.7)]),
        ),
    ]
}

/// Scheduled gesture over `[start, end)` samples.
///
/// Activation begins `onset` samples after `start` (reaction delay) and
/// ramps up over `ramp` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureSegment {
    pub start: u64,
    pub end: u64,
    pub left: Gesture,
    pub right: Gesture,
    #[serde(default)]
    pub onset: u64,
    #[serde(default)]
    pub ramp: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GestureSchedule {
    pub segments: Vec<GestureSegment>,
}

impl GestureSchedule {
    /// One segment of the same gesture on both arms for `duration` samples.
    pub fn constant(gesture: Gesture, duration: u64) -> Self {
        Self::constant_pair(gesture, gesture, duration)
    }

    pub fn constant_pair(left: Gesture, right: Gesture, duration: u64) -> Self {
        Self {
            segments: vec![GestureSegment {
                start: 0,
                end: duration,
                left,
                right,
                onset: 0,
                ramp: 0,
            }],
        }
    }

    pub fn end(&self) -> u64 {
        self.segments.iter().map(|s| s.end).max().unwrap_or(0)
    }
}

/// Effort as a fraction of MVC over `[start, end)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortSegment {
    pub start: u64,
    pub end: u64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// White measurement noise RMS.
    pub floor_uv: f64,
    /// Mains interference amplitude (peak).
    pub mains_uv: f64,
    pub mains_hz: f64,
    /// Baseline drift amplitude (peak).
    pub drift_uv: f64,
    pub drift_hz: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    /// Relative slow fluctuation of effort within a hold.
    pub fluctuation: f64,
    /// Effort used where no effort segment applies.
    pub default_effort: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            floor_uv: 2.0,
            mains_uv: 50.0,
            mains_hz: 60.0,
            drift_uv: 30.0,
            drift_hz: 0.3,
            band_low_hz: 20.0,
            band_high_hz: 450.0,
            fluctuation: 0.1,
            default_effort: 0.25,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("schedule references gesture `{0}` with no profile")]
    UnknownGesture(Gesture),
    #[error("schedule does not cover sample {0}")]
    Uncovered(u64),
    #[error("segment [{start}, {end}) is empty or reversed")]
    BadSegment { start: u64, end: u64 },
}

struct ArmActivity {
    /// Per-channel amplitude at unit effort.
    amplitude: Vec<f64>,
    effort: f64,
    onset: u64,
    ramp: u64,
    fluct_phase: f64,
}

/// Deterministic frame iterator over a synthetic session.
pub struct SyntheticSource {
    profiles: HashMap<Gesture, GestureProfile>,
    schedule: GestureSchedule,
    efforts: Vec<EffortSegment>,
    noise: NoiseSpec,
    session_id: u32,
    total: u64,
    next: u64,
    frame_len: usize,
    rng: ChaCha8Rng,
    band: [Biquad; 2],
    band_gain: f64,
    band_state: Vec<[BiquadState; 2]>,
    mains_coef: Vec<(f64, f64)>,
    drift_coef: Vec<(f64, f64)>,
    segment: usize,
    active: [ArmActivity; 2],
}

impl SyntheticSource {
    pub fn new(
        profiles: &[GestureProfile],
        schedule: GestureSchedule,
        efforts: Vec<EffortSegment>,
        noise: NoiseSpec,
        seed: u64,
        session_id: u32,
        duration_samples: u64,
    ) -> Result<Self, ScheduleError> {
        let profiles: HashMap<Gesture, GestureProfile> =
            profiles.iter().map(|p| (p.gesture, p.clone())).collect();
        let mut segments = schedule.segments.clone();
        segments.sort_by_key(|s| s.start);
        let mut covered = 0u64;
        for s in &segments {
            if s.end <= s.start {
                return Err(ScheduleError::BadSegment {
                    start: s.start,
                    end: s.end,
                });
            }
            for g in [s.left, s.right] {
                if !profiles.contains_key(&g) {
                    return Err(ScheduleError::UnknownGesture(g));
                }
            }
            if s.start > covered && covered < duration_samples {
                return Err(ScheduleError::Uncovered(covered));
            }
            covered = covered.max(s.end);
        }
        if covered < duration_samples {
            return Err(ScheduleError::Uncovered(covered));
        }

        let fs = SAMPLE_RATE_HZ as f64;
        let band = [
            Biquad::highpass(fs, noise.band_low_hz, std::f64::consts::FRAC_1_SQRT_2),
            Biquad::lowpass(fs, noise.band_high_hz, std::f64::consts::FRAC_1_SQRT_2),
        ];
        let band_gain = 1.0 / noise_gain(&band);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef = |amp: f64, rng: &mut ChaCha8Rng| {
            let a = amp * (0.6 + 0.4 * rng.gen::<f64>());
            let phi = rng.gen::<f64>() * 2.0 * PI;
            (a * phi.cos(), a * phi.sin())
        };
        let mains_coef = (0..TOTAL_CHANNELS)
            .map(|_| coef(noise.mains_uv, &mut rng))
            .collect();
        let drift_coef = (0..TOTAL_CHANNELS)
            .map(|_| coef(noise.drift_uv, &mut rng))
            .collect();

        let idle = || ArmActivity {
            amplitude: vec![0.0; CHANNELS_PER_ARM],
            effort: 0.0,
            onset: 0,
            ramp: 0,
            fluct_phase: 0.0,
        };
        let mut src = Self {
            profiles,
            schedule: GestureSchedule { segments },
            efforts,
            noise,
            session_id,
            total: duration_samples,
            next: 0,
            frame_len: FRAME_SAMPLES,
            rng,
            band,
            band_gain,
            band_state: vec![[BiquadState::default(); 2]; TOTAL_CHANNELS],
            mains_coef,
            drift_coef,
            segment: usize::MAX,
            active: [idle(), idle()],
        };
        src.enter_segment_at(0);
        Ok(src)
    }

    /// Same stream, different frame length (samples per frame).
    pub fn with_frame_len(mut self, frame_len: usize) -> Self {
        self.frame_len = frame_len.max(1);
        self
    }

    pub fn duration_samples(&self) -> u64 {
        self.total
    }

    pub fn schedule(&self) -> &GestureSchedule {
        &self.schedule
    }

    fn effort_at(&self, sample: u64, arm: Arm) -> f64 {
        self.efforts
            .iter()
            .find(|e| e.start <= sample && sample < e.end)
            .map(|e| match arm {
                Arm::Left => e.left,
                Arm::Right => e.right,
            })
            .unwrap_or(self.noise.default_effort)
    }

    fn enter_segment_at(&mut self, sample: u64) {
        let idx = self
            .schedule
            .segments
            .iter()
            .rposition(|s| s.start <= sample && sample < s.end);
        let Some(idx) = idx else { return };
        if idx == self.segment {
            return;
        }
        self.segment = idx;
        let seg = self.schedule.segments[idx].clone();
        for arm in Arm::BOTH {
            let gesture = match arm {
                Arm::Left => seg.left,
                Arm::Right => seg.right,
            };
            let profile = &self.profiles[&gesture];
            let amplitude = profile
                .template(arm)
                .cells()
                .iter()
                .map(|t| t * profile.base_amplitude_uv)
                .collect();
            let effort = self.effort_at(seg.start + seg.onset, arm);
            let fluct_phase = self.rng.gen::<f64>() * 2.0 * PI;
            self.active[arm.index()] = ArmActivity {
                amplitude,
                effort,
                onset: seg.start + seg.onset,
                ramp: seg.ramp,
                fluct_phase,
            };
        }
    }

    fn envelope(&self, arm: Arm, sample: u64) -> f64 {
        let a = &self.active[arm.index()];
        if sample < a.onset || a.effort == 0.0 {
            return 0.0;
        }
        let since = sample - a.onset;
        let ramp = if a.ramp == 0 || since >= a.ramp {
            1.0
        } else {
            since as f64 / a.ramp as f64
        };
        let t = sample as f64 / SAMPLE_RATE_HZ as f64;
        a.effort
            * ramp
            * (1.0 + self.noise.fluctuation * (2.0 * PI * 0.7 * t + a.fluct_phase).sin())
    }

    fn next_frame(&mut self) -> EmgFrame {
        let start = self.next;
        let n = (self.total - start).min(self.frame_len as u64) as usize;
        let mut raw = Vec::with_capacity(n * TOTAL_CHANNELS);
        let fs = SAMPLE_RATE_HZ as f64;
        let [bp_hi, bp_lo] = self.band;
        for k in 0..n {
            let s = start + k as u64;
            self.enter_segment_at(s);
            let t = s as f64 / fs;
            let (ms, mc) = (2.0 * PI * self.noise.mains_hz * t).sin_cos();
            let (ds, dc) = (2.0 * PI * self.noise.drift_hz * t).sin_cos();
            let env = [self.envelope(Arm::Left, s), self.envelope(Arm::Right, s)];
            for ch in 0..TOTAL_CHANNELS {
                let arm = ch / CHANNELS_PER_ARM;
                let amp = self.active[arm].amplitude[ch % CHANNELS_PER_ARM] * env[arm];
                let mut v = 0.0;
                if amp > 0.0 {
                    let w: f64 = self.rng.sample(StandardNormal);
                    let st = &mut self.band_state[ch];
                    let hp = st[0].process(&bp_hi, w);
                    let y = st[1].process(&bp_lo, hp);
                    v += amp * y * self.band_gain;
                }
                let floor: f64 = self.rng.sample(StandardNormal);
                v += self.noise.floor_uv * floor;
                let (mcos, msin) = self.mains_coef[ch];
                v += mcos * ms + msin * mc;
                let (dcos, dsin) = self.drift_coef[ch];
                v += dcos * ds + dsin * dc;
                raw.push(
                    (v / UV_PER_LSB)
                        .round()
                        .clamp(i16::MIN as f64, i16::MAX as f64) as i16,
                );
            }
        }
        self.next += n as u64;
        EmgFrame::new(self.session_id, start, raw).expect("whole samples")
    }
}

impl Iterator for SyntheticSource {
    type Item = EmgFrame;

    fn next(&mut self) -> Option<EmgFrame> {
        (self.next < self.total).then(|| self.next_frame())
    }
}

/// RMS gain of a section cascade for unit white noise, from its impulse
/// response.
fn noise_gain(sections: &[Biquad]) -> f64 {
    let mut states = vec![BiquadState::default(); sections.len()];
    let mut energy = 0.0;
    for i in 0..40_000 {
        let mut y = if i == 0 { 1.0 } else { 0.0 };
        for (st, c) in states.iter_mut().zip(sections) {
            y = st.process(c, y);
        }
        energy += y * y;
    }
    energy.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(gesture: Gesture, seed: u64, n: u64) -> SyntheticSource {
        SyntheticSource::new(
            &default_profiles(),
            GestureSchedule::constant(gesture, n),
            vec![],
            NoiseSpec::default(),
            seed,
            1,
            n,
        )
        .unwrap()
    }

    #[test]
    fn templates_have_unit_max() {
        for p in default_profiles() {
            for arm in Arm::BOTH {
                let m = p.template(arm).max();
                if p.gesture.is_rest() {
                    assert_eq!(m, 0.0);
                } else {
                    assert!((m - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a: Vec<_> = short(Gesture::WristBack, 9, 400).collect();
        let b: Vec<_> = short(Gesture::WristBack, 9, 400).collect();
        let c: Vec<_> = short(Gesture::WristBack, 10, 400).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_count_is_conserved() {
        let frames: Vec<_> = short(Gesture::Rest, 1, 4_000).collect();
        assert_eq!(frames.len(), 100);
        assert_eq!(frames.iter().map(|f| f.n_samples()).sum::<usize>(), 4_000);
        for w in frames.windows(2) {
            assert_eq!(w[0].end_index(), w[1].sample_index);
        }
    }

    #[test]
    fn unknown_gesture_is_rejected() {
        let profiles: Vec<_> = default_profiles()
            .into_iter()
            .filter(|p| p.gesture != Gesture::WristPronation)
            .collect();
        let err = SyntheticSource::new(
            &profiles,
            GestureSchedule::constant(Gesture::WristPronation, 40),
            vec![],
            NoiseSpec::default(),
            0,
            0,
            40,
        )
        .err()
        .unwrap();
        assert_eq!(err, ScheduleError::UnknownGesture(Gesture::WristPronation));
    }

    #[test]
    fn schedule_must_cover_duration() {
        let err = SyntheticSource::new(
            &default_profiles(),
            GestureSchedule::constant(Gesture::Rest, 100),
            vec![],
            NoiseSpec::default(),
            0,
            0,
            200,
        )
        .err()
        .unwrap();
        assert_eq!(err, ScheduleError::Uncovered(100));
    }

    #[test]
    fn band_noise_is_unit_rms() {
        let fs = SAMPLE_RATE_HZ as f64;
        let band = [
            Biquad::highpass(fs, 20.0, std::f64::consts::FRAC_1_SQRT_2),
            Biquad::lowpass(fs, 450.0, std::f64::consts::FRAC_1_SQRT_2),
        ];
        let g = noise_gain(&band);
        // Two-pole bandpass passes roughly (450 - 20) / 2000 of white power.
        assert!(g > 0.4 && g < 0.5, "{g}");
    }
}
