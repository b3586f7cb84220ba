use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::detector::DetectorParams;
use super::lidar::LidarParams;
use super::map::{OccupancyGrid, Pose2, Room, WorldMap};
use super::robot::RobotParams;
use super::scene::SceneObject;
use super::SimError;

/// On-disk world description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldFile {
    pub resolution: f64,
    pub origin: [f64; 2],
    /// Row strings, top row first; `#` occupied, `.` free.
    pub grid: Vec<String>,
    pub rooms: Vec<Room>,
    pub objects: Vec<SceneObject>,
    pub start: Pose2,
    #[serde(default)]
    pub robot: RobotParams,
    #[serde(default)]
    pub detector: DetectorParams,
    #[serde(default)]
    pub lidar: LidarParams,
}

/// Validated world.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub map: WorldMap,
    pub objects: Vec<SceneObject>,
    pub start: Pose2,
    pub robot: RobotParams,
    pub detector: DetectorParams,
    pub lidar: LidarParams,
}

impl World {
    pub fn from_file(f: WorldFile) -> Result<Self, SimError> {
        let grid = OccupancyGrid::from_rows(&f.grid, f.resolution, (f.origin[0], f.origin[1]))?;
        if !grid.boundary_closed() {
            return Err(SimError::BadWorld("outer boundary is not closed".into()));
        }
        for room in &f.rooms {
            if grid.disc_collides(room.goal.x, room.goal.y, f.robot.radius) {
                return Err(SimError::BadWorld(format!(
                    "goal of room `{}` is not free",
                    room.name
                )));
            }
        }
        if grid.disc_collides(f.start.x, f.start.y, f.robot.radius) {
            return Err(SimError::BadWorld("start pose is not free".into()));
        }
        Ok(Self {
            map: WorldMap {
                grid,
                rooms: f.rooms,
            },
            objects: f.objects,
            start: f.start,
            robot: f.robot,
            detector: f.detector,
            lidar: f.lidar,
        })
    }

    pub fn to_file(&self) -> WorldFile {
        let g = &self.map.grid;
        WorldFile {
            resolution: g.resolution(),
            origin: [g.origin().0, g.origin().1],
            grid: g.to_rows(),
            rooms: self.map.rooms.clone(),
            objects: self.objects.clone(),
            start: self.start,
            robot: self.robot.clone(),
            detector: self.detector.clone(),
            lidar: self.lidar,
        }
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        let f: WorldFile = serde_json::from_str(&text)
            .map_err(|e| SimError::BadWorld(format!("{}: {e}", path.display())))?;
        Self::from_file(f)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let text = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        std::fs::write(path, text).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_file()).expect("serializable");
        hex::encode(Sha256::digest(bytes))
    }

    /// Bedroom and kitchen joined by a narrow hallway.
    pub fn two_room() -> Self {
        let res = 0.05;
        let mut g = OccupancyGrid::new(100, 200, res, (0.0, 0.0));
        let t = 0.1;
        g.fill_rect(0.0, 0.0, 10.0, t);
        g.fill_rect(0.0, 5.0 - t, 10.0, 5.0);
        g.fill_rect(0.0, 0.0, t, 5.0);
        g.fill_rect(10.0 - t, 0.0, 10.0, 5.0);
        // hallway x in [4, 6], open for y in [2, 3]
        g.fill_rect(4.0, 0.0, 6.0, 2.0);
        g.fill_rect(4.0, 3.0, 6.0, 5.0);
        // bed, dresser
        g.fill_rect(0.2, 3.4, 1.6, 4.8);
        g.fill_rect(2.8, 0.2, 3.8, 0.7);
        // kitchen table, counter
        g.fill_rect(7.6, 4.0, 8.6, 4.9);
        g.fill_rect(9.3, 0.2, 9.8, 2.2);
        let rooms = vec![
            Room {
                name: "bedroom".into(),
                bounds: [0.0, 0.0, 4.0, 5.0],
                goal: Pose2::new(2.0, 2.5, 0.0),
            },
            Room {
                name: "hallway".into(),
                bounds: [4.0, 0.0, 6.0, 5.0],
                goal: Pose2::new(5.0, 2.5, 0.0),
            },
            Room {
                name: "kitchen".into(),
                bounds: [6.0, 0.0, 10.0, 5.0],
                goal: Pose2::new(8.3, 3.4, PI),
            },
        ];
        let obj = |id: &str, label: &str, p: [f64; 3], radius: f64| SceneObject {
            id: id.into(),
            label: label.into(),
            position: p,
            radius,
            grasped: false,
        };
        let objects = vec![
            obj("cup", "cup", [8.1, 4.05, 0.80], 0.04),
            obj("lid", "lid", [8.35, 4.25, 0.80], 0.045),
            obj("can", "can", [8.5, 4.6, 0.80], 0.033),
        ];
        World::from_file(WorldFile {
            resolution: res,
            origin: [0.0, 0.0],
            grid: g.to_rows(),
            rooms,
            objects,
            start: Pose2::new(1.5, 2.5, 0.0),
            robot: RobotParams::default(),
            detector: DetectorParams::default(),
            lidar: LidarParams::default(),
        })
        .expect("built-in world is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_world_is_valid() {
        let w = World::two_room();
        assert_eq!((w.map.grid.rows(), w.map.grid.cols()), (100, 200));
        assert!(w.map.grid.boundary_closed());
        assert_eq!(w.map.room_at(1.5, 2.5).unwrap().name, "bedroom");
        assert_eq!(w.map.room("Kitchen").unwrap().goal.theta, PI);
        // hallway is the only passage
        assert!(w.map.grid.disc_collides(5.0, 1.5, 0.18));
        assert!(!w.map.grid.disc_collides(5.0, 2.5, 0.18));
    }

    #[test]
    fn file_round_trip_keeps_hash() {
        let w = World::two_room();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("world.json");
        w.save(&path).unwrap();
        let back = World::load(&path).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.hash(), w.hash());
    }

    #[test]
    fn open_boundary_rejected() {
        let mut f = World::two_room().to_file();
        f.grid[50].replace_range(0..1, ".");
        assert!(matches!(World::from_file(f), Err(SimError::BadWorld(_))));
    }
}
