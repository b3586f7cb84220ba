use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::AutonomyError;
use crate::sim::{Cell, OccupancyGrid, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostmapParams {
    /// Margin added to the robot radius to get the lethal inflation radius.
    pub inflation_margin: f64,
    /// Width of the decaying penalty band beyond the lethal radius.
    pub penalty_range: f64,
    /// Penalty right at the lethal radius.
    pub penalty_max: f64,
}

impl Default for CostmapParams {
    fn default() -> Self {
        Self {
            inflation_margin: 0.05,
            penalty_range: 0.3,
            penalty_max: 5.0,
        }
    }
}

/// Inflated grid: lethal cells plus a nonnegative traversal penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    rows: usize,
    cols: usize,
    resolution: f64,
    origin: (f64, f64),
    lethal: Vec<bool>,
    penalty: Vec<f64>,
}

impl Costmap {
    pub fn from_parts(
        rows: usize,
        cols: usize,
        resolution: f64,
        origin: (f64, f64),
        lethal: Vec<bool>,
        penalty: Vec<f64>,
    ) -> Self {
        assert_eq!(lethal.len(), rows * cols);
        assert_eq!(penalty.len(), rows * cols);
        assert!(penalty.iter().all(|p| *p >= 0.0));
        Self {
            rows,
            cols,
            resolution,
            origin,
            lethal,
            penalty,
        }
    }

    /// Inflates an occupancy grid for a disc robot.
    pub fn from_grid(grid: &OccupancyGrid, robot_radius: f64, params: &CostmapParams) -> Self {
        let inflation = robot_radius + params.inflation_margin;
        let reach = inflation + params.penalty_range;
        let (rows, cols) = (grid.rows(), grid.cols());
        let mut lethal = vec![false; rows * cols];
        let mut penalty = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let (x, y) = grid.cell_center((r, c));
                let d = grid.clearance(x, y, reach);
                let i = r * cols + c;
                if d < inflation {
                    lethal[i] = true;
                } else if d < reach {
                    penalty[i] =
                        params.penalty_max * (1.0 - (d - inflation) / params.penalty_range);
                }
            }
        }
        Self::from_parts(
            rows,
            cols,
            grid.resolution(),
            grid.origin(),
            lethal,
            penalty,
        )
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

    pub fn is_lethal(&self, (r, c): Cell) -> bool {
        self.lethal[r * self.cols + c]
    }

    pub fn penalty(&self, (r, c): Cell) -> f64 {
        self.penalty[r * self.cols + c]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let c = ((x - self.origin.0) / self.resolution).floor();
        let r = ((y - self.origin.1) / self.resolution).floor();
        (c >= 0.0 && r >= 0.0 && (c as usize) < self.cols && (r as usize) < self.rows)
            .then(|| (r as usize, c as usize))
    }

    pub fn cell_center(&self, (r, c): Cell) -> (f64, f64) {
        (
            self.origin.0 + (c as f64 + 0.5) * self.resolution,
            self.origin.1 + (r as f64 + 0.5) * self.resolution,
        )
    }

    /// `[x0, y0, x1, y1]`.
    pub fn extent(&self) -> [f64; 4] {
        [
            self.origin.0,
            self.origin.1,
            self.origin.0 + self.cols as f64 * self.resolution,
            self.origin.1 + self.rows as f64 * self.resolution,
        ]
    }

    /// 8-connected moves into non-lethal cells. Diagonals may not cut a
    /// lethal corner. Yields the neighbor and its edge cost.
    pub fn neighbors(&self, (r, c): Cell) -> impl Iterator<Item = (Cell, f64)> + '_ {
        const MOVES: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        let free = move |r: i64, c: i64| {
            r >= 0
                && c >= 0
                && (r as usize) < self.rows
                && (c as usize) < self.cols
                && !self.is_lethal((r as usize, c as usize))
        };
        MOVES.iter().filter_map(move |&(dr, dc)| {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if !free(nr, nc) {
                return None;
            }
            let diagonal = dr != 0 && dc != 0;
            if diagonal && !(free(r as i64 + dr, c as i64) && free(r as i64, c as i64 + dc)) {
                return None;
            }
            let step = if diagonal { SQRT_2 } else { 1.0 } * self.resolution;
            let to = (nr as usize, nc as usize);
            Some((to, step * (1.0 + self.penalty(to))))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostmapPlan {
    pub cells: Vec<Cell>,
    /// Cell centers, with the exact goal position appended.
    pub waypoints: Vec<(f64, f64)>,
    pub cost: f64,
    pub goal: Pose2,
    pub extent: [f64; 4],
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0
            .total_cmp(&o.0)
            .then(self.1.cmp(&o.1))
            .then(self.2.cmp(&o.2))
    }
}

/// Dijkstra over the costmap between two cells. Ties in the frontier are
/// broken by `(cost, row, col)`.
pub fn shortest_path(
    map: &Costmap,
    start: Cell,
    goal: Cell,
) -> Result<(Vec<Cell>, f64), AutonomyError> {
    if map.is_lethal(start) {
        return Err(AutonomyError::StartBlocked);
    }
    if map.is_lethal(goal) {
        return Err(AutonomyError::NoPath);
    }
    let n = map.rows * map.cols;
    let idx = |(r, c): Cell| r * map.cols + c;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[idx(start)] = 0.0;
    heap.push(Reverse(Key(0.0, start.0, start.1)));
    while let Some(Reverse(Key(d, r, c))) = heap.pop() {
        let i = idx((r, c));
        if done[i] {
            continue;
        }
        done[i] = true;
        if (r, c) == goal {
            break;
        }
        for (to, w) in map.neighbors((r, c)) {
            let j = idx(to);
            let nd = d + w;
            if !done[j] && nd < dist[j] {
                dist[j] = nd;
                prev[j] = i;
                heap.push(Reverse(Key(nd, to.0, to.1)));
            }
        }
    }
    let g = idx(goal);
    if !dist[g].is_finite() {
        return Err(AutonomyError::NoPath);
    }
    let mut cells = vec![goal];
    let mut k = g;
    while k != idx(start) {
        k = prev[k];
        cells.push((k / map.cols, k % map.cols));
    }
    cells.reverse();
    Ok((cells, dist[g]))
}

/// Global plan from a position to a goal pose.
pub fn plan_global(
    map: &Costmap,
    start: (f64, f64),
    goal: Pose2,
) -> Result<CostmapPlan, AutonomyError> {
    let s = map.cell_of(start.0, start.1).ok_or(AutonomyError::OffMap)?;
    let g = map.cell_of(goal.x, goal.y).ok_or(AutonomyError::NoPath)?;
    let (cells, cost) = shortest_path(map, s, g)?;
    let mut waypoints: Vec<(f64, f64)> = cells.iter().map(|&c| map.cell_center(c)).collect();
    waypoints.push((goal.x, goal.y));
    Ok(CostmapPlan {
        cells,
        waypoints,
        cost,
        goal,
        extent: map.extent(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::World;

    fn empty(n: usize) -> Costmap {
        Costmap::from_parts(n, n, 0.05, (0.0, 0.0), vec![false; n * n], vec![0.0; n * n])
    }

    #[test]
    fn start_is_goal() {
        let (cells, cost) = shortest_path(&empty(5), (2, 2), (2, 2)).unwrap();
        assert_eq!((cells, cost), (vec![(2, 2)], 0.0));
    }

    #[test]
    fn diagonal_corner_to_corner() {
        let (cells, cost) = shortest_path(&empty(10), (0, 0), (9, 9)).unwrap();
        assert!((cost - 9.0 * SQRT_2 * 0.05).abs() < 1e-12);
        assert_eq!(cells.len(), 10);
    }

    #[test]
    fn blocked_goal_and_corner_cutting() {
        let mut lethal = vec![false; 9];
        lethal[4] = true;
        let m = Costmap::from_parts(3, 3, 1.0, (0.0, 0.0), lethal, vec![0.0; 9]);
        assert_eq!(
            shortest_path(&m, (0, 0), (1, 1)),
            Err(AutonomyError::NoPath)
        );
        assert!(m.neighbors((0, 1)).all(|(c, _)| c != (1, 2) && c != (1, 0)));
        let (_, cost) = shortest_path(&m, (0, 0), (2, 2)).unwrap();
        assert_eq!(cost, 4.0);
    }

    #[test]
    fn inflation_marks_walls() {
        let w = World::two_room();
        let m = Costmap::from_grid(&w.map.grid, w.robot.radius, &CostmapParams::default());
        let cell = |x, y| m.cell_of(x, y).unwrap();
        assert!(m.is_lethal(cell(5.0, 2.2)));
        assert!(!m.is_lethal(cell(5.0, 2.5)));
        assert!(m.penalty(cell(5.0, 2.5)) > 0.0);
        assert_eq!(m.penalty(cell(2.0, 2.5)), 0.0);
    }

    #[test]
    fn two_room_plan_uses_hallway() {
        let w = World::two_room();
        let m = Costmap::from_grid(&w.map.grid, w.robot.radius, &CostmapParams::default());
        let goal = w.map.room("kitchen").unwrap().goal;
        let plan = plan_global(&m, (2.0, 2.5), goal).unwrap();
        assert!(plan
            .waypoints
            .iter()
            .any(|&(x, y)| (4.0..=6.0).contains(&x) && (2.0..=3.0).contains(&y)));
        for &c in &plan.cells {
            assert!(!m.is_lethal(c));
        }
        for w in plan.cells.windows(2) {
            let (dr, dc) = (w[0].0.abs_diff(w[1].0), w[0].1.abs_diff(w[1].1));
            assert!(dr <= 1 && dc <= 1 && dr + dc > 0);
        }
    }
}
