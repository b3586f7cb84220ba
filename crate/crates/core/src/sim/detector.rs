use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::map::{wrap_angle, Pose2};
use super::scene::SceneObject;

/// Injected confusion: a query that sometimes resolves to the decoy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ambiguity {
    pub query: String,
    pub decoy: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub rate_hz: f64,
    pub fov_deg: f64,
    pub max_range: f64,
    pub base_confidence: f64,
    /// Confidence lost per meter beyond 1 m.
    pub distance_penalty: f64,
    pub confidence_sigma: f64,
    pub centroid_sigma: f64,
    pub min_confidence: f64,
    /// Query text to extra object labels it matches.
    pub aliases: BTreeMap<String, Vec<String>>,
    pub ambiguity: Vec<Ambiguity>,
}

impl Default for DetectorParams {
    fn default() -> Self {
        let aliases = [
            ("cup with lid", vec!["cup"]),
            ("mug", vec!["cup"]),
            ("energy drink", vec!["can"]),
            ("soda", vec!["can"]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
        .collect();
        Self {
            rate_hz: 1.5,
            fov_deg: 69.0,
            max_range: 4.0,
            base_confidence: 0.9,
            distance_penalty: 0.1,
            confidence_sigma: 0.02,
            centroid_sigma: 0.005,
            min_confidence: 0.3,
            aliases,
            ambiguity: Vec::new(),
        }
    }
}

impl DetectorParams {
    pub fn period_ms(&self) -> f64 {
        1000.0 / self.rate_hz
    }

    /// Object labels a query matches.
    pub fn matching_labels(&self, query: &str) -> Vec<String> {
        let q = normalize(query);
        let mut out = vec![q.clone()];
        if let Some(extra) = self.aliases.get(&q) {
            out.extend(extra.iter().map(|s| normalize(s)));
        }
        out
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub object_id: String,
    pub label: String,
    pub query: String,
    /// Robot frame, meters.
    pub centroid: [f64; 3],
    pub confidence: f64,
    pub t_ms: u64,
}

/// Detector surrogate. The head camera sits at the base center looking
/// along the arm axis (body -y).
#[derive(Debug, Clone)]
pub struct Detector {
    params: DetectorParams,
    rng: ChaCha8Rng,
    next_tick: u64,
}

pub const CAMERA_YAW: f64 = -FRAC_PI_2;

impl Detector {
    pub fn new(params: DetectorParams, seed: u64) -> Self {
        Self {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_tick: 0,
        }
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    /// True on the first call at or after each multiple of the period.
    pub fn due(&mut self, t_ms: u64) -> bool {
        let period = self.params.period_ms();
        if (t_ms as f64) < self.next_tick as f64 * period {
            return false;
        }
        while (t_ms as f64) >= self.next_tick as f64 * period {
            self.next_tick += 1;
        }
        true
    }

    pub fn in_view(&self, pose: &Pose2, position: [f64; 3]) -> Option<(f64, f64, f64)> {
        let (bx, by) = pose.to_body(position[0], position[1]);
        let dist = bx.hypot(by);
        let off = wrap_angle(by.atan2(bx) - CAMERA_YAW);
        (dist <= self.params.max_range && off.abs() <= 0.5 * self.params.fov_deg.to_radians())
            .then_some((bx, by, dist))
    }

    /// Runs one detector tick for `query`.
    pub fn detect(
        &mut self,
        objects: &[SceneObject],
        pose: &Pose2,
        query: &str,
        t_ms: u64,
    ) -> Vec<Detection> {
        let labels = self.params.matching_labels(query);
        let q = normalize(query);
        let decoy = self
            .params
            .ambiguity
            .iter()
            .find(|a| normalize(&a.query) == q)
            .cloned();
        let mut out = Vec::new();
        for obj in objects {
            if obj.grasped || !labels.contains(&normalize(&obj.label)) {
                continue;
            }
            let mut target = obj;
            if let Some(a) = &decoy {
                let roll: f64 = self.rng.gen();
                if roll < a.probability {
                    if let Some(d) = objects.iter().find(|o| o.id == a.decoy) {
                        target = d;
                    }
                }
            }
            let Some((bx, by, dist)) = self.in_view(pose, target.position) else {
                continue;
            };
            let noise: [f64; 4] = std::array::from_fn(|_| self.rng.sample(StandardNormal));
            let p = &self.params;
            let confidence = (p.base_confidence - p.distance_penalty * (dist - 1.0).max(0.0)
                + p.confidence_sigma * noise[0])
                .clamp(0.0, 1.0);
            if confidence < p.min_confidence {
                continue;
            }
            out.push(Detection {
                object_id: target.id.clone(),
                label: target.label.clone(),
                query: q.clone(),
                centroid: [
                    bx + p.centroid_sigma * noise[1],
                    by + p.centroid_sigma * noise[2],
                    target.position[2] + p.centroid_sigma * noise[3],
                ],
                confidence,
                t_ms,
            });
        }
        out.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.object_id.cmp(&b.object_id))
        });
        out
    }
}
