use serde::{Deserialize, Serialize};

/// Operator directional input for room navigation, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseInput {
    pub u_f: f64,
    pub u_l: f64,
    pub u_r: f64,
    pub u_b: f64,
}

impl BaseInput {
    pub fn is_zero(&self) -> bool {
        self.u_f == 0.0 && self.u_l == 0.0 && self.u_r == 0.0 && self.u_b == 0.0
    }

    pub fn is_valid(&self) -> bool {
        [self.u_f, self.u_l, self.u_r, self.u_b]
            .iter()
            .all(|u| (0.0..=1.0).contains(u))
    }
}

/// Velocity suggested by the local tracker.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlannerVelocity {
    pub v_nav: f64,
    pub w_nav: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssistGains {
    pub k_v: f64,
    pub k_w: f64,
}

impl Default for AssistGains {
    fn default() -> Self {
        Self { k_v: 2.0, k_w: 2.0 }
    }
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Forward scaling factor from the operator input.
pub fn forward_scale(u: &BaseInput) -> f64 {
    if u.u_f > 0.0 {
        u.u_f
    } else if u.u_l > 0.0 || u.u_r > 0.0 {
        0.3 * u.u_l.max(u.u_r)
    } else {
        0.0
    }
}

/// Room-navigation blend. Reverse overrides the planner; otherwise the
/// planner velocity is scaled by operator input and an opposing operator
/// turn replaces the planner's.
pub fn room_blend(u: &BaseInput, nav: &PlannerVelocity, gains: &AssistGains) -> (f64, f64) {
    if u.u_b > 0.0 {
        return (-u.u_b, 0.0);
    }
    let alpha = forward_scale(u);
    let v_out = gains.k_v * alpha * nav.v_nav;
    let w_user = u.u_l - u.u_r;
    let w_plan = gains.k_w * alpha * nav.w_nav;
    let w_out = if w_user != 0.0 && sgn(w_user) != sgn(w_plan) && sgn(w_plan) != 0.0 {
        w_user
    } else {
        w_plan + w_user
    };
    (v_out, w_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const UNIT: AssistGains = AssistGains { k_v: 1.0, k_w: 1.0 };

    fn bi(u_f: f64, u_l: f64, u_r: f64, u_b: f64) -> BaseInput {
        BaseInput { u_f, u_l, u_r, u_b }
    }

    fn nav(v_nav: f64, w_nav: f64) -> PlannerVelocity {
        PlannerVelocity { v_nav, w_nav }
    }

    #[test]
    fn examples() {
        assert_eq!(
            room_blend(&bi(0.7, 0.2, 0.9, 0.5), &nav(0.3, 0.4), &UNIT),
            (-0.5, 0.0)
        );
        assert_eq!(
            room_blend(&bi(1.0, 0.0, 0.0, 0.0), &nav(0.4, 0.2), &UNIT),
            (0.4, 0.2)
        );
        let (v, w) = room_blend(&bi(0.0, 1.0, 0.0, 0.0), &nav(0.3, -0.5), &UNIT);
        assert!((v - 0.3 * 0.3).abs() < 1e-15);
        assert_eq!(w, 1.0);
        let (_, w) = room_blend(&bi(1.0, 0.2, 0.0, 0.0), &nav(0.3, 0.1), &UNIT);
        assert!((w - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_plan_turn_sums() {
        let (_, w) = room_blend(&bi(0.0, 0.0, 0.5, 0.0), &nav(0.3, 0.0), &UNIT);
        assert_eq!(w, -0.5);
    }

    fn input() -> impl Strategy<Value = BaseInput> {
        (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0)
            .prop_map(|(a, b, c, d)| bi(a, b, c, d))
    }

    proptest! {
        #[test]
        fn reverse_dominates(u in input(), v in -0.3f64..0.3, w in -0.6f64..0.6, b in 1e-9f64..=1.0) {
            let u = BaseInput { u_b: b, ..u };
            prop_assert_eq!(room_blend(&u, &nav(v, w), &AssistGains::default()), (-b, 0.0));
        }

        #[test]
        fn no_input_no_motion(v in -0.3f64..0.3, w in -0.6f64..0.6) {
            let (vo, wo) = room_blend(&BaseInput::default(), &nav(v, w), &AssistGains::default());
            prop_assert_eq!(vo, 0.0);
            prop_assert_eq!(wo, 0.0);
        }
    }
}
