use std::collections::VecDeque;

use crate::gesture::Gesture;

pub const EMA_ALPHA: f64 = 0.5;
pub const GATE_THRESHOLD: f64 = 0.75;
pub const VOTE_LEN: usize = 11;
pub const VOTE_QUORUM: usize = 6;

/// `alpha * raw + (1 - alpha) * prev`, elementwise.
pub fn ema_update(prev: &[f64], raw: &[f64], alpha: f64) -> Vec<f64> {
    assert_eq!(prev.len(), raw.len());
    prev.iter()
        .zip(raw)
        .map(|(p, r)| alpha * r + (1.0 - alpha) * p)
        .collect()
}

/// Argmax label when its probability reaches `threshold`, otherwise Rest.
/// Ties go to the lower index.
pub fn gate(smoothed: &[f64], labels: &[Gesture], threshold: f64) -> Gesture {
    let (i, p) =
        smoothed.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |b, (i, &v)| if v > b.1 { (i, v) } else { b },
        );
    if p >= threshold {
        labels[i]
    } else {
        Gesture::Rest
    }
}

/// Ring of the most recent labels with a fixed quorum.
#[derive(Debug, Clone)]
pub struct VoteBuffer {
    ring: VecDeque<Gesture>,
    len: usize,
    quorum: usize,
}

impl Default for VoteBuffer {
    fn default() -> Self {
        Self::new(VOTE_LEN, VOTE_QUORUM)
    }
}

impl VoteBuffer {
    pub fn new(len: usize, quorum: usize) -> Self {
        assert!(2 * quorum > len, "quorum must be a strict majority");
        Self {
            ring: VecDeque::with_capacity(len),
            len,
            quorum,
        }
    }

    /// Buffer already full of `label`.
    pub fn filled(label: Gesture) -> Self {
        let mut b = Self::default();
        for _ in 0..b.len {
            b.push(label);
        }
        b
    }

    pub fn push(&mut self, label: Gesture) {
        if self.ring.len() == self.len {
            self.ring.pop_front();
        }
        self.ring.push_back(label);
    }

    pub fn is_full(&self) -> bool {
        self.ring.len() == self.len
    }

    pub fn labels(&self) -> impl Iterator<Item = Gesture> + '_ {
        self.ring.iter().copied()
    }

    pub fn count(&self, label: Gesture) -> usize {
        self.ring.iter().filter(|&&g| g == label).count()
    }

    /// The label holding a quorum of a full buffer, if any.
    pub fn vote(&self) -> Option<Gesture> {
        if !self.is_full() {
            return None;
        }
        self.ring
            .iter()
            .copied()
            .find(|&g| self.count(g) >= self.quorum)
    }
}

/// Output of one arm's filter for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStep {
    pub smoothed: Option<Vec<f64>>,
    pub gated: Gesture,
    pub voted: Option<Gesture>,
}

/// EMA, confidence gate and majority vote for one arm.
#[derive(Debug, Clone)]
pub struct ArmFilter {
    labels: Vec<Gesture>,
    alpha: f64,
    threshold: f64,
    ema: Option<Vec<f64>>,
    votes: VoteBuffer,
}

impl ArmFilter {
    /// The vote buffer starts full of Rest, as after a quiet warm-up.
    pub fn new(labels: Vec<Gesture>, alpha: f64, threshold: f64) -> Self {
        Self {
            labels,
            alpha,
            threshold,
            ema: None,
            votes: VoteBuffer::filled(Gesture::Rest),
        }
    }

    pub fn labels(&self) -> &[Gesture] {
        &self.labels
    }

    /// Full path for one classifier output.
    pub fn push_probs(&mut self, probs: &[f64]) -> ArmStep {
        let smoothed = match &self.ema {
            Some(prev) => ema_update(prev, probs, self.alpha),
            None => probs.to_vec(),
        };
        let gated = gate(&smoothed, &self.labels, self.threshold);
        self.ema = Some(smoothed.clone());
        self.votes.push(gated);
        ArmStep {
            smoothed: Some(smoothed),
            gated,
            voted: self.votes.vote(),
        }
    }

    /// Enters at the label stage (keyboard or scripted labels).
    pub fn push_label(&mut self, label: Gesture) -> ArmStep {
        self.votes.push(label);
        ArmStep {
            smoothed: None,
            gated: label,
            voted: self.votes.vote(),
        }
    }

    pub fn voted(&self) -> Option<Gesture> {
        self.votes.vote()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const L3: [Gesture; 3] = [Gesture::WristForward, Gesture::WristBack, Gesture::Rest];

    #[test]
    fn ema_examples() {
        let p = [0.2, 0.5, 0.3];
        assert_eq!(ema_update(&p, &p, EMA_ALPHA), p.to_vec());
        assert_eq!(
            ema_update(&[1.0, 0.0], &[0.0, 1.0], EMA_ALPHA),
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn gate_examples() {
        assert_eq!(
            gate(&[0.8, 0.1, 0.1], &L3, GATE_THRESHOLD),
            Gesture::WristForward
        );
        assert_eq!(gate(&[0.6, 0.3, 0.1], &L3, GATE_THRESHOLD), Gesture::Rest);
        assert_eq!(
            gate(&[0.75, 0.25, 0.0], &L3, GATE_THRESHOLD),
            Gesture::WristForward
        );
    }

    #[test]
    fn vote_examples() {
        use Gesture::*;
        let fill = |xs: &[Gesture]| {
            let mut b = VoteBuffer::default();
            xs.iter().for_each(|&g| b.push(g));
            b
        };
        assert_eq!(fill(&[WristBack; 11]).vote(), Some(WristBack));
        let mut six_five = vec![WristBack; 6];
        six_five.extend([WristForward; 5]);
        assert_eq!(fill(&six_five).vote(), Some(WristBack));
        let mut split = vec![WristBack; 5];
        split.extend([WristForward; 5]);
        split.push(Rest);
        assert_eq!(fill(&split).vote(), None);
        assert_eq!(fill(&[WristBack; 10]).vote(), None);
    }

    fn prob_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum::<f64>() + 1e-9;
            v.iter().map(|x| (x + 1e-9 / v.len() as f64) / s).collect()
        })
    }

    proptest! {
        #[test]
        fn ema_stays_a_probability_vector(a in prob_vec(5), b in prob_vec(5)) {
            let out = ema_update(&a, &b, EMA_ALPHA);
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for ((o, x), y) in out.iter().zip(&a).zip(&b) {
                prop_assert!(*o >= x.min(*y) && *o <= x.max(*y));
            }
        }

        #[test]
        fn ema_converges_geometrically(prev in prob_vec(4), p in prob_vec(4), k in 1usize..30) {
            let mut s = prev;
            for _ in 0..k {
                s = ema_update(&s, &p, EMA_ALPHA);
            }
            let err = s.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 0.5f64.powi(k as i32) + 1e-15);
        }
    }
}
