//! Gesture vocabulary and arm identifiers shared by every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Forearm a sleeve is worn on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn index(self) -> usize {
        match self {
            Arm::Left => 0,
            Arm::Right => 1,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Left => "left",
            Arm::Right => "right",
        })
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Arm::Left),
            "right" | "r" => Ok(Arm::Right),
            other => Err(format!("unknown arm `{other}`")),
        }
    }
}

/// Wrist gestures used for robot control.
///
/// Wrist forward is flexion and wrist back is extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gesture {
    Rest,
    WristForward,
    WristBack,
    WristSupination,
    WristPronation,
}

impl Gesture {
    pub const ALL: [Gesture; 5] = [
        Gesture::Rest,
        Gesture::WristForward,
        Gesture::WristBack,
        Gesture::WristSupination,
        Gesture::WristPronation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gesture::Rest => "rest",
            Gesture::WristForward => "wrist_forward",
            Gesture::WristBack => "wrist_back",
            Gesture::WristSupination => "wrist_supination",
            Gesture::WristPronation => "wrist_pronation",
        }
    }

    pub fn is_rest(self) -> bool {
        self == Gesture::Rest
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gesture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Gesture::ALL
            .into_iter()
            .find(|g| g.name() == norm)
            .or(match norm.as_str() {
                "wrist_flexion" | "forward" => Some(Gesture::WristForward),
                "wrist_extension" | "back" => Some(Gesture::WristBack),
                "supination" => Some(Gesture::WristSupination),
                "pronation" => Some(Gesture::WristPronation),
                _ => None,
            })
            .ok_or_else(|| format!("unknown gesture `{s}`"))
    }
}

/// Default per-arm control vocabularies: five gestures on the left hand, the
/// reduced three-gesture set on the right hand.
pub fn default_vocabulary(arm: Arm) -> Vec<Gesture> {
    match arm {
        Arm::Left => Gesture::ALL.to_vec(),
        Arm::Right => vec![Gesture::Rest, Gesture::WristBack, Gesture::WristSupination],
    }
}

/// Candidate gestures considered during screening. Only used as a label
/// vocabulary; the five control gestures are a subset.
pub const SCREENING_GESTURES: [&str; 23] = [
    "wrist adduction",
    "wrist abduction",
    "wrist flexion",
    "wrist extension",
    "finger extension",
    "power grip",
    "rest",
    "wrist pronation",
    "wrist supination",
    "tripod grip",
    "thumb-index-middle extension",
    "thumb-index extension",
    "thumb flexion",
    "thumb extension",
    "ring flexion",
    "ring extension",
    "pinky flexion",
    "pinky extension",
    "middle flexion",
    "middle extension",
    "index-middle extension",
    "index flexion",
    "index extension",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_aliases() {
        assert_eq!("wrist back".parse::<Gesture>().unwrap(), Gesture::WristBack);
        assert_eq!(
            "Wrist-Flexion".parse::<Gesture>().unwrap(),
            Gesture::WristForward
        );
        assert!("thumbs up".parse::<Gesture>().is_err());
    }

    #[test]
    fn serde_names_match_display() {
        for g in Gesture::ALL {
            let json = serde_json::to_string(&g).unwrap();
            assert_eq!(json, format!("\"{g}\""));
        }
    }

    #[test]
    fn control_gestures_are_screened() {
        for name in [
            "rest",
            "wrist flexion",
            "wrist extension",
            "wrist pronation",
            "wrist supination",
        ] {
            assert!(SCREENING_GESTURES.contains(&name));
        }
    }
}
