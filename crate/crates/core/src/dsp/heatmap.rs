use serde::{Deserialize, Serialize};

use super::window::{Window, WINDOW_LEN};
use super::DspError;
use crate::gesture::Arm;
use crate::stream::{SleeveLayout, CHANNELS_PER_ARM, GRID_COLS, GRID_ROWS};

/// Per-arm 8x16 grid of RMS magnitudes in microvolts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub arm: Arm,
    /// Row-major cells.
    pub cells: Vec<f64>,
    pub window_start_index: u64,
}

impl Heatmap {
    pub fn from_cells(arm: Arm, cells: Vec<f64>, window_start_index: u64) -> Self {
        assert_eq!(cells.len(), CHANNELS_PER_ARM);
        Self {
            arm,
            cells,
            window_start_index,
        }
    }

    pub fn zeros(arm: Arm) -> Self {
        Self::from_cells(arm, vec![0.0; CHANNELS_PER_ARM], 0)
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.cells[row * GRID_COLS + col]
    }

    /// Rows of cells, the console wire representation.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(GRID_COLS).map(|r| r.to_vec()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            cells: self.cells.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }
}

/// RMS over the window of every channel of `arm`, placed on its grid cell.
pub fn rms_heatmap(window: &Window, arm: Arm, layout: &SleeveLayout) -> Result<Heatmap, DspError> {
    if !window.is_valid() {
        return Err(DspError::InvalidWindow(window.start_sample_index));
    }
    let n = window.n_channels();
    let base = arm.index() * CHANNELS_PER_ARM;
    if base + CHANNELS_PER_ARM > n {
        return Err(DspError::MissingArm(arm));
    }
    let mut sumsq = vec![0.0f64; CHANNELS_PER_ARM];
    for sample in window.samples().chunks_exact(n) {
        for (acc, &v) in sumsq.iter_mut().zip(&sample[base..base + CHANNELS_PER_ARM]) {
            *acc += v * v;
        }
    }
    let mut cells = vec![0.0; CHANNELS_PER_ARM];
    for (ch, ss) in sumsq.into_iter().enumerate() {
        let (r, c) = layout.cell_of(ch);
        cells[r * GRID_COLS + c] = (ss / WINDOW_LEN as f64).sqrt();
    }
    debug_assert_eq!(cells.len(), GRID_ROWS * GRID_COLS);
    Ok(Heatmap::from_cells(arm, cells, window.start_sample_index))
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    v[rank.min(v.len()) - 1]
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
}
