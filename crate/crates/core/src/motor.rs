//! Differential wheel commands.

use crate::params::Params;
use crate::recognizer::{BehaviorState, TurnDirection};

/// Wheel rim speeds in cm/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelPowers {
    pub p_r: f64,
    pub p_l: f64,
}

impl WheelPowers {
    pub fn linear_speed(&self) -> f64 {
        (self.p_r + self.p_l) / 2.0
    }

    /// Yaw rate in rad/s, positive when the robot turns to its right.
    pub fn yaw_rate(&self, track_width: f64) -> f64 {
        (self.p_l - self.p_r) / track_width
    }
}

/// Wheel powers for the current behavior.
///
/// Wandering and tracking steer with the smoothed turning response; an
/// avoidance maneuver spins in place at `avoid_turn_speed`.
pub fn motor_power(behavior: &BehaviorState, tr_prime: f64, params: &Params) -> WheelPowers {
    let limit = params.max_speed;
    match behavior {
        BehaviorState::Wandering | BehaviorState::Tracking => {
            let base = params.g_v * params.v_i;
            let steer = params.g_w * tr_prime;
            WheelPowers {
                p_r: (base - steer).clamp(-limit, limit),
                p_l: (base + steer).clamp(-limit, limit),
            }
        }
        BehaviorState::Avoiding { direction, .. } => {
            let s = params.avoid_turn_speed;
            match direction {
                TurnDirection::Left => WheelPowers { p_r: s, p_l: -s },
                TurnDirection::Right => WheelPowers { p_r: -s, p_l: s },
            }
        }
    }
}
