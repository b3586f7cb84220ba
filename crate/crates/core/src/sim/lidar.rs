use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::map::{OccupancyGrid, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarParams {
    pub beams: usize,
    pub max_range: f64,
}

impl Default for LidarParams {
    fn default() -> Self {
        Self {
            beams: 360,
            max_range: 8.0,
        }
    }
}

/// Planar scan in the robot frame. Beam `i` points at `i * increment`
/// radians from body +x, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub increment: f64,
    pub max_range: f64,
    pub ranges: Vec<f64>,
}

impl Scan {
    pub fn angle(&self, i: usize) -> f64 {
        i as f64 * self.increment
    }

    /// Body-frame hit points, skipping beams that returned nothing.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < self.max_range)
            .map(|(i, &r)| {
                let a = self.angle(i);
                (r * a.cos(), r * a.sin())
            })
    }
}

/// Distance along the ray to the first occupied cell, by grid traversal.
pub fn cast_ray(grid: &OccupancyGrid, x: f64, y: f64, angle: f64, max_range: f64) -> f64 {
    let res = grid.resolution();
    let (ox, oy) = grid.origin();
    let (dx, dy) = (angle.cos(), angle.sin());
    let fx = (x - ox) / res;
    let fy = (y - oy) / res;
    let (mut c, mut r) = (fx.floor() as i64, fy.floor() as i64);
    if grid.occupied_i(r, c) {
        return 0.0;
    }
    let step_c: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_r: i64 = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 {
        res / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dy != 0.0 {
        res / dy.abs()
    } else {
        f64::INFINITY
    };
    let mut t_max_x = if dx > 0.0 {
        (c as f64 + 1.0 - fx) * res / dx
    } else if dx < 0.0 {
        (fx - c as f64) * res / -dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy > 0.0 {
        (r as f64 + 1.0 - fy) * res / dy
    } else if dy < 0.0 {
        (fy - r as f64) * res / -dy
    } else {
        f64::INFINITY
    };
    loop {
        let t = if t_max_x < t_max_y {
            c += step_c;
            let t = t_max_x;
            t_max_x += t_delta_x;
            t
        } else {
            r += step_r;
            let t = t_max_y;
            t_max_y += t_delta_y;
            t
        };
        if t >= max_range {
            return max_range;
        }
        if grid.occupied_i(r, c) {
            return t;
        }
    }
}

/// Scan from the base center. A pose inside an obstacle or off the grid
/// reads zero on every beam.
pub fn lidar(grid: &OccupancyGrid, pose: &Pose2, params: &LidarParams) -> Scan {
    let increment = TAU / params.beams as f64;
    let inside = grid
        .cell_of(pose.x, pose.y)
        .map_or(true, |cell| grid.occupied(cell));
    let ranges = (0..params.beams)
        .map(|i| {
            if inside {
                0.0
            } else {
                cast_ray(
                    grid,
                    pose.x,
                    pose.y,
                    pose.theta + i as f64 * increment,
                    params.max_range,
                )
            }
        })
        .collect();
    Scan {
        increment,
        max_range: params.max_range,
        ranges,
    }
}
