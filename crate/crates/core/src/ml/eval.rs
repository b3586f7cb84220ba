use serde::{Deserialize, Serialize};

use super::dataset::Sample;
use super::MlError;
use crate::dsp::Heatmap;
use crate::gesture::Gesture;

/// Anything that maps a heatmap to a probability vector over `labels()`.
pub trait GestureClassifier {
    fn labels(&self) -> &[Gesture];

    fn predict_batch(&self, heatmaps: &[&Heatmap]) -> Result<Vec<Vec<f64>>, MlError>;

    fn predict(&self, heatmap: &Heatmap) -> Result<Vec<f64>, MlError> {
        Ok(self.predict_batch(&[heatmap])?.remove(0))
    }
}

pub fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub labels: Vec<Gesture>,
    pub n: usize,
    pub accuracy: f64,
    /// `counts[true][predicted]`.
    pub counts: Vec<Vec<usize>>,
    /// Row-normalized `counts`; rows without samples are zero.
    pub confusion: Vec<Vec<f64>>,
}

pub fn evaluate<C: GestureClassifier + ?Sized>(
    model: &C,
    samples: &[&Sample],
) -> Result<Evaluation, MlError> {
    if samples.is_empty() {
        return Err(MlError::EmptySplit);
    }
    let labels = model.labels().to_vec();
    let k = labels.len();
    let truth: Vec<usize> = samples
        .iter()
        .map(|s| {
            labels
                .iter()
                .position(|&g| g == s.label)
                .ok_or(MlError::UnknownLabel(s.label))
        })
        .collect::<Result<_, _>>()?;
    let heatmaps: Vec<&Heatmap> = samples.iter().map(|s| &s.heatmap).collect();
    let probs = model.predict_batch(&heatmaps)?;
    let mut counts = vec![vec![0usize; k]; k];
    for (t, p) in truth.iter().zip(&probs) {
        counts[*t][argmax(p)] += 1;
    }
    let correct: usize = (0..k).map(|i| counts[i][i]).sum();
    let confusion = counts
        .iter()
        .map(|row| {
            let n: usize = row.iter().sum();
            row.iter()
                .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                .collect()
        })
        .collect();
    Ok(Evaluation {
        labels,
        n: samples.len(),
        accuracy: correct as f64 / samples.len() as f64,
        counts,
        confusion,
    })
}
