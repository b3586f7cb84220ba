use serde::{Deserialize, Serialize};

use crate::gesture::Arm;

pub const GRID_ROWS: usize = 8;
pub const GRID_COLS: usize = 16;
pub const CHANNELS_PER_ARM: usize = GRID_ROWS * GRID_COLS;
pub const TOTAL_CHANNELS: usize = 2 * CHANNELS_PER_ARM;

/// Electrode placement of the two 8x16 sleeves.
///
/// The declared order is row-major: channel `c` of an arm sits at
/// `(c / 16, c % 16)`. Wire channels 0..128 belong to the left arm and
/// 128..256 to the right arm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SleeveLayout {
    channel_to_cell: Vec<(u8, u8)>,
    cell_to_channel: Vec<u8>,
}

impl Default for SleeveLayout {
    fn default() -> Self {
        let table = (0..CHANNELS_PER_ARM)
            .map(|c| ((c / GRID_COLS) as u8, (c % GRID_COLS) as u8))
            .collect();
        Self::from_table(table).expect("row-major table is a bijection")
    }
}

impl SleeveLayout {
    /// Builds a layout from an explicit channel table, rejecting anything
    /// that is not a bijection onto the grid.
    pub fn from_table(channel_to_cell: Vec<(u8, u8)>) -> Result<Self, String> {
        if channel_to_cell.len() != CHANNELS_PER_ARM {
            return Err(format!(
                "expected {CHANNELS_PER_ARM} channels, got {}",
                channel_to_cell.len()
            ));
        }
        let mut cell_to_channel = vec![u8::MAX; CHANNELS_PER_ARM];
        for (ch, &(r, c)) in channel_to_cell.iter().enumerate() {
            let (r, c) = (r as usize, c as usize);
            if r >= GRID_ROWS || c >= GRID_COLS {
                return Err(format!("channel {ch} maps outside the grid: ({r}, {c})"));
            }
            let slot = &mut cell_to_channel[r * GRID_COLS + c];
            if *slot != u8::MAX {
                return Err(format!(
                    "cell ({r}, {c}) assigned to channels {} and {ch}",
                    *slot
                ));
            }
            *slot = ch as u8;
        }
        Ok(Self {
            channel_to_cell,
            cell_to_channel,
        })
    }

    pub fn cell_of(&self, channel: usize) -> (usize, usize) {
        let (r, c) = self.channel_to_cell[channel];
        (r as usize, c as usize)
    }

    pub fn channel_at(&self, row: usize, col: usize) -> usize {
        self.cell_to_channel[row * GRID_COLS + col] as usize
    }

    /// Wire channel index of an arm-local channel.
    pub fn wire_channel(arm: Arm, channel: usize) -> usize {
        arm.index() * CHANNELS_PER_ARM + channel
    }
}
