use serde::{Deserialize, Serialize};

/// Parsed text ("voice") command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "intent")]
pub enum Intent {
    StartGestureMode,
    StopGestureMode,
    NextMode,
    RoomMode,
    ExitRoomMode,
    GoTo { room: String },
    Align { query: String },
    Cancel,
    TakePhoto,
    Status,
    Unknown { text: String },
}

fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == ' ' {
                c.to_ascii_lowercase()
            } else {
                ' '
            }
        })
        .collect();
    let words: Vec<&str> = cleaned.split_whitespace().collect();
    let words = match words.as_slice() {
        ["hey", "robot", rest @ ..] => rest,
        ["robot", rest @ ..] => rest,
        w => w,
    };
    words.join(" ")
}

fn strip_article(s: &str) -> &str {
    s.strip_prefix("the ").unwrap_or(s).trim()
}

pub fn parse_text(text: &str) -> Intent {
    let t = normalize(text);
    match t.as_str() {
        "start gesture mode" | "start gestures" | "gesture mode on" => {
            return Intent::StartGestureMode
        }
        "stop gesture mode" | "stop gestures" | "gesture mode off" | "stop" => {
            return Intent::StopGestureMode
        }
        "next mode" | "switch mode" => return Intent::NextMode,
        "room mode" | "enter room mode" => return Intent::RoomMode,
        "exit room mode" | "leave room mode" => return Intent::ExitRoomMode,
        "cancel" | "cancel align" | "stop align" | "stop aligning" => return Intent::Cancel,
        "take photo" | "take a photo" | "take picture" | "take a picture" => {
            return Intent::TakePhoto
        }
        "status" | "what is the status" | "report status" => return Intent::Status,
        _ => {}
    }
    for prefix in ["go to ", "navigate to ", "drive to "] {
        if let Some(rest) = t.strip_prefix(prefix) {
            let room = strip_article(rest);
            if !room.is_empty() {
                return Intent::GoTo {
                    room: room.to_string(),
                };
            }
        }
    }
    for prefix in ["align with ", "align to ", "align "] {
        if let Some(rest) = t.strip_prefix(prefix) {
            let query = strip_article(rest);
            if !query.is_empty() {
                return Intent::Align {
                    query: query.to_string(),
                };
            }
        }
    }
    Intent::Unknown {
        text: text.trim().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse_text("Hey Robot, Next Mode"), Intent::NextMode);
        assert_eq!(
            parse_text("Go to the kitchen."),
            Intent::GoTo {
                room: "kitchen".into()
            }
        );
        assert_eq!(
            parse_text("align cup with lid"),
            Intent::Align {
                query: "cup with lid".into()
            }
        );
        assert_eq!(
            parse_text("align with the energy drink"),
            Intent::Align {
                query: "energy drink".into()
            }
        );
        assert_eq!(parse_text("start gesture mode"), Intent::StartGestureMode);
        assert_eq!(parse_text("STOP gesture mode!"), Intent::StopGestureMode);
        assert_eq!(parse_text("take a photo"), Intent::TakePhoto);
        assert_eq!(
            parse_text("make coffee"),
            Intent::Unknown {
                text: "make coffee".into()
            }
        );
        assert_eq!(
            parse_text("align"),
            Intent::Unknown {
                text: "align".into()
            }
        );
    }

    #[test]
    fn serde_shape() {
        let j = serde_json::to_value(Intent::GoTo {
            room: "kitchen".into(),
        })
        .unwrap();
        assert_eq!(j, serde_json::json!({"intent": "go_to", "room": "kitchen"}));
    }
}
