use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SimError;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    /// Body-frame point to world frame.
    pub fn to_world(&self, bx: f64, by: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.x + c * bx - s * by, self.y + s * bx + c * by)
    }

    /// World-frame point to body frame.
    pub fn to_body(&self, wx: f64, wy: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (wx - self.x, wy - self.y);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (x - self.x).hypot(y - self.y)
    }
}

/// Grid cell as `(row, col)`. Row 0 is the lowest y.
pub type Cell = (usize, usize);

/// Boolean occupancy grid with square cells.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    rows: usize,
    cols: usize,
    resolution: f64,
    origin: (f64, f64),
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(rows: usize, cols: usize, resolution: f64, origin: (f64, f64)) -> Self {
        assert!(resolution > 0.0 && rows > 0 && cols > 0);
        Self {
            rows,
            cols,
            resolution,
            origin,
            occupied: vec![false; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn width_m(&self) -> f64 {
        self.cols as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.rows as f64 * self.resolution
    }

    pub fn occupied(&self, (r, c): Cell) -> bool {
        self.occupied[r * self.cols + c]
    }

    /// Occupancy with everything outside the grid treated as occupied.
    pub fn occupied_i(&self, r: i64, c: i64) -> bool {
        if r < 0 || c < 0 || r >= self.rows as i64 || c >= self.cols as i64 {
            return true;
        }
        self.occupied[r as usize * self.cols + c as usize]
    }

    pub fn set(&mut self, (r, c): Cell, occ: bool) {
        self.occupied[r * self.cols + c] = occ;
    }

    pub fn cells(&self) -> &[bool] {
        &self.occupied
    }

    /// Marks every cell whose center lies in the rectangle.
    pub fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (x, y) = self.cell_center((r, c));
                if x >= x0 && x <= x1 && y >= y0 && y <= y1 {
                    self.set((r, c), true);
                }
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (ox, oy) = self.origin;
        x >= ox && y >= oy && x < ox + self.width_m() && y < oy + self.height_m()
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        if !self.contains(x, y) {
            return None;
        }
        let c = ((x - self.origin.0) / self.resolution).floor() as usize;
        let r = ((y - self.origin.1) / self.resolution).floor() as usize;
        Some((r.min(self.rows - 1), c.min(self.cols - 1)))
    }

    pub fn cell_center(&self, (r, c): Cell) -> (f64, f64) {
        (
            self.origin.0 + (c as f64 + 0.5) * self.resolution,
            self.origin.1 + (r as f64 + 0.5) * self.resolution,
        )
    }

    /// Distance from a point to the square of cell `(r, c)`; zero inside.
    pub fn distance_to_cell(&self, x: f64, y: f64, r: i64, c: i64) -> f64 {
        let x0 = self.origin.0 + c as f64 * self.resolution;
        let y0 = self.origin.1 + r as f64 * self.resolution;
        let dx = (x0 - x).max(0.0).max(x - (x0 + self.resolution));
        let dy = (y0 - y).max(0.0).max(y - (y0 + self.resolution));
        dx.hypot(dy)
    }

    /// True when a disc of `radius` at `(x, y)` overlaps an occupied cell or
    /// leaves the grid.
    pub fn disc_collides(&self, x: f64, y: f64, radius: f64) -> bool {
        let (ox, oy) = self.origin;
        if x - radius < ox
            || y - radius < oy
            || x + radius > ox + self.width_m()
            || y + radius > oy + self.height_m()
        {
            return true;
        }
        let c0 = ((x - radius - ox) / self.resolution).floor() as i64;
        let c1 = ((x + radius - ox) / self.resolution).floor() as i64;
        let r0 = ((y - radius - oy) / self.resolution).floor() as i64;
        let r1 = ((y + radius - oy) / self.resolution).floor() as i64;
        for r in r0..=r1 {
            for c in c0..=c1 {
                if self.occupied_i(r, c) && self.distance_to_cell(x, y, r, c) < radius {
                    return true;
                }
            }
        }
        false
    }

    /// Clearance from a point to the nearest occupied cell, searched out to
    /// `max`; returns `max` when nothing is closer.
    pub fn clearance(&self, x: f64, y: f64, max: f64) -> f64 {
        let (ox, oy) = self.origin;
        let c0 = ((x - max - ox) / self.resolution).floor() as i64;
        let c1 = ((x + max - ox) / self.resolution).floor() as i64;
        let r0 = ((y - max - oy) / self.resolution).floor() as i64;
        let r1 = ((y + max - oy) / self.resolution).floor() as i64;
        let mut best = max;
        for r in r0..=r1 {
            for c in c0..=c1 {
                if self.occupied_i(r, c) {
                    best = best.min(self.distance_to_cell(x, y, r, c));
                }
            }
        }
        best
    }

    /// Rows as strings, top row (highest y) first; `#` occupied, `.` free.
    pub fn to_rows(&self) -> Vec<String> {
        (0..self.rows)
            .rev()
            .map(|r| {
                (0..self.cols)
                    .map(|c| if self.occupied((r, c)) { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }

    pub fn from_rows(
        rows: &[String],
        resolution: f64,
        origin: (f64, f64),
    ) -> Result<Self, SimError> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.chars().count());
        if n == 0 || cols == 0 {
            return Err(SimError::BadWorld("empty grid".into()));
        }
        let mut g = Self::new(n, cols, resolution, origin);
        for (i, line) in rows.iter().enumerate() {
            let r = n - 1 - i;
            if line.chars().count() != cols {
                return Err(SimError::BadWorld(format!(
                    "grid row {i} has {} cells, expected {cols}",
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => g.set((r, c), true),
                    '.' => {}
                    other => {
                        return Err(SimError::BadWorld(format!(
                            "grid row {i}: unexpected `{other}`"
                        )))
                    }
                }
            }
        }
        Ok(g)
    }

    /// True when every border cell is occupied.
    pub fn boundary_closed(&self) -> bool {
        (0..self.cols).all(|c| self.occupied((0, c)) && self.occupied((self.rows - 1, c)))
            && (0..self.rows).all(|r| self.occupied((r, 0)) && self.occupied((r, self.cols - 1)))
    }
}

/// Named axis-aligned region with a navigation goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub name: String,
    /// `[x0, y0, x1, y1]`.
    pub bounds: [f64; 4],
    pub goal: Pose2,
}

impl Room {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [x0, y0, x1, y1] = self.bounds;
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub grid: OccupancyGrid,
    pub rooms: Vec<Room>,
}

impl WorldMap {
    pub fn room(&self, name: &str) -> Option<&Room> {
        let key = name.trim().to_ascii_lowercase();
        self.rooms
            .iter()
            .find(|r| r.name.to_ascii_lowercase() == key)
    }

    pub fn room_at(&self, x: f64, y: f64) -> Option<&Room> {
        self.rooms.iter().find(|r| r.contains(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pose_frames_invert() {
        let p = Pose2::new(1.0, -2.0, 0.7);
        let (wx, wy) = p.to_world(0.3, -0.4);
        let (bx, by) = p.to_body(wx, wy);
        assert!((bx - 0.3).abs() < 1e-12 && (by + 0.4).abs() < 1e-12);
    }

    #[test]
    fn rows_round_trip_top_first() {
        let mut g = OccupancyGrid::new(3, 4, 0.5, (0.0, 0.0));
        g.set((2, 0), true);
        let rows = g.to_rows();
        assert_eq!(rows[0], "#...");
        assert_eq!(OccupancyGrid::from_rows(&rows, 0.5, (0.0, 0.0)).unwrap(), g);
        assert!(OccupancyGrid::from_rows(&["#.".into(), "#".into()], 0.5, (0.0, 0.0)).is_err());
    }

    #[test]
    fn disc_collision() {
        let mut g = OccupancyGrid::new(20, 20, 0.1, (0.0, 0.0));
        g.set((10, 15), true); // x in [1.5, 1.6]
        assert!(!g.disc_collides(1.0, 1.05, 0.45));
        assert!(g.disc_collides(1.0, 1.05, 0.55));
        assert!(g.disc_collides(0.1, 1.0, 0.2), "leaving the grid collides");
        assert!((g.clearance(1.0, 1.05, 2.0) - 0.5).abs() < 1e-12);
    }
}
