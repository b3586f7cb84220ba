use serde::{Deserialize, Serialize};

use crate::sim::Scan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GovernorConfig {
    /// Half the corridor width `w`.
    pub corridor_half_width: f64,
    /// LiDAR to chassis edge.
    pub d_offset: f64,
    pub d_slow: f64,
    pub zone_lateral: f64,
    pub zone_longitudinal: f64,
}

impl Default for GovernorConfig {
    fn default() -> Self {
        Self {
            corridor_half_width: 0.18 + 0.1,
            d_offset: 0.18,
            d_slow: 0.3,
            zone_lateral: 0.5,
            zone_longitudinal: 0.3,
        }
    }
}

/// Speed scale for obstacle distance `d`.
pub fn governor_scale(d: f64, d_offset: f64, d_slow: f64) -> f64 {
    ((d - d_offset) / d_slow).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GovernorOutput {
    pub v: f64,
    pub mu: f64,
    /// Closest corridor return in the direction of travel.
    pub d: Option<f64>,
    /// Returns inside the consideration zone around the chassis.
    pub nearby: usize,
    /// The scan had no returns at all.
    pub empty_scan: bool,
}

/// Scales forward (or reverse) speed by the closest return in the travel
/// corridor. Angular velocity is never scaled.
pub fn govern(scan: &Scan, v: f64, cfg: &GovernorConfig) -> GovernorOutput {
    let forward = v >= 0.0;
    let mut d: Option<f64> = None;
    let mut nearby = 0;
    let mut any = false;
    for (x, y) in scan.points() {
        any = true;
        let r = cfg.d_offset;
        if x.abs() <= r + cfg.zone_longitudinal && y.abs() <= r + cfg.zone_lateral {
            nearby += 1;
        }
        let ahead = if forward { x > 0.0 } else { x < 0.0 };
        if ahead && y.abs() <= cfg.corridor_half_width {
            let range = x.hypot(y);
            d = Some(d.map_or(range, |m: f64| m.min(range)));
        }
    }
    if !any {
        log::warn!("governor: empty scan, speed not limited");
    }
    let mu = d.map_or(1.0, |d| governor_scale(d, cfg.d_offset, cfg.d_slow));
    GovernorOutput {
        v: mu * v,
        mu,
        d,
        nearby,
        empty_scan: !any,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scan_with(hits: &[(usize, f64)]) -> Scan {
        let mut ranges = vec![8.0; 360];
        for &(i, r) in hits {
            ranges[i] = r;
        }
        Scan {
            increment: std::f64::consts::TAU / 360.0,
            max_range: 8.0,
            ranges,
        }
    }

    #[test]
    fn scale_examples() {
        assert_eq!(governor_scale(0.2, 0.2, 0.6), 0.0);
        assert_eq!(governor_scale(0.8, 0.2, 0.6), 1.0);
        assert!((governor_scale(0.5, 0.2, 0.6) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn direction_selects_corridor() {
        let cfg = GovernorConfig::default();
        let s = scan_with(&[(0, 0.33), (180, 0.8)]);
        let fwd = govern(&s, 0.2, &cfg);
        assert!((fwd.mu - 0.5).abs() < 1e-12);
        assert!((fwd.v - 0.1).abs() < 1e-12);
        let back = govern(&s, -0.2, &cfg);
        assert_eq!(back.mu, 1.0);
        // off to the side, outside the corridor
        let side = govern(&scan_with(&[(90, 0.3)]), 0.2, &cfg);
        assert_eq!((side.mu, side.d), (1.0, None));
        assert_eq!(side.nearby, 1);
    }

    #[test]
    fn empty_scan_is_unscaled() {
        let s = Scan {
            increment: 1.0,
            max_range: 8.0,
            ranges: vec![8.0; 4],
        };
        let out = govern(&s, 0.3, &GovernorConfig::default());
        assert!(out.empty_scan);
        assert_eq!(out.v, 0.3);
    }

    proptest! {
        #[test]
        fn mu_is_the_clamp(d in 0.0f64..3.0, off in 0.0f64..1.0, slow in 0.01f64..2.0) {
            let mu = governor_scale(d, off, slow);
            let want = if d <= off { 0.0 } else if d >= off + slow { 1.0 } else { (d - off) / slow };
            prop_assert!((mu - want).abs() < 1e-12);
        }
    }
}
