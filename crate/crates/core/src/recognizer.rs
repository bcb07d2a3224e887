//! Competition between the LGMD and DSN spike trains, collision
//! confirmation, turning response and the behavior state machine.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::neurons::NeuronFrameOutput;
use crate::params::Params;
use crate::retina::smoothing_alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionPattern {
    Irrelevant,
    Recession,
    PotentialLooming,
    LoomingConfirmed,
    TranslationRight,
    TranslationLeft,
}

impl MotionPattern {
    pub const ALL: [MotionPattern; 6] = [
        MotionPattern::Irrelevant,
        MotionPattern::Recession,
        MotionPattern::PotentialLooming,
        MotionPattern::LoomingConfirmed,
        MotionPattern::TranslationRight,
        MotionPattern::TranslationLeft,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MotionPattern::Irrelevant => "irrelevant",
            MotionPattern::Recession => "recession",
            MotionPattern::PotentialLooming => "potential_looming",
            MotionPattern::LoomingConfirmed => "looming_confirmed",
            MotionPattern::TranslationRight => "translation_right",
            MotionPattern::TranslationLeft => "translation_left",
        }
    }

    pub fn is_translation(self) -> bool {
        matches!(
            self,
            MotionPattern::TranslationRight | MotionPattern::TranslationLeft
        )
    }
}

impl fmt::Display for MotionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionPattern {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        MotionPattern::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| crate::error::Error::InvalidArgument(format!("unknown motion pattern `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BehaviorState {
    Wandering,
    Tracking,
    Avoiding {
        /// Radians turned so far.
        progress: f64,
        direction: TurnDirection,
    },
}

impl BehaviorState {
    pub fn as_str(&self) -> &'static str {
        match self {
            BehaviorState::Wandering => "wandering",
            BehaviorState::Tracking => "tracking",
            BehaviorState::Avoiding { .. } => "avoiding",
        }
    }

    pub fn is_avoiding(&self) -> bool {
        matches!(self, BehaviorState::Avoiding { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RecognizerState {
    lgmd_spike_window: VecDeque<u32>,
    tr_prime: f64,
}

impl RecognizerState {
    pub fn new(params: &Params) -> Self {
        Self {
            lgmd_spike_window: std::iter::repeat_n(0, params.n_t + 1).collect(),
            tr_prime: 0.0,
        }
    }

    pub fn tr_prime(&self) -> f64 {
        self.tr_prime
    }

    pub fn window(&self) -> impl Iterator<Item = u32> + '_ {
        self.lgmd_spike_window.iter().copied()
    }

    /// Forgets all collision evidence gathered so far.
    pub fn clear_window(&mut self) {
        self.lgmd_spike_window.iter_mut().for_each(|w| *w = 0);
    }

    fn push(&mut self, spikes: u32) {
        self.lgmd_spike_window.pop_front();
        self.lgmd_spike_window.push_back(spikes);
    }

    #[cfg(test)]
    fn with_window(params: &Params, window: &[u32]) -> Self {
        let mut s = Self::new(params);
        for &w in window {
            s.push(w);
        }
        s
    }
}

/// Decides this frame's motion pattern and updates the collision window.
///
/// The side with more spikes wins (ties go to the LGMDs); the losing side
/// contributes nothing to the window.
pub fn classify(out: &NeuronFrameOutput, state: &mut RecognizerState, params: &Params) -> MotionPattern {
    let lgmd = out.lgmd_spikes();
    let dsn = out.dsn_spikes();
    if lgmd == 0 && dsn == 0 {
        state.push(0);
        return MotionPattern::Irrelevant;
    }
    if out.spikes_lgmd1 > 0 && out.spikes_lgmd2 == 0 && dsn == 0 {
        state.push(0);
        return MotionPattern::Recession;
    }
    if lgmd >= dsn {
        state.push(lgmd);
        return if confirm_collision(state, params) {
            MotionPattern::LoomingConfirmed
        } else {
            MotionPattern::PotentialLooming
        };
    }
    state.push(0);
    if out.u_dsn > 0.0 {
        MotionPattern::TranslationRight
    } else {
        MotionPattern::TranslationLeft
    }
}

/// True when the window's spike total reaches `n_sp`.
pub fn confirm_collision(state: &RecognizerState, params: &Params) -> bool {
    state.lgmd_spike_window.iter().sum::<u32>() >= params.n_sp
}

/// Low-pass smoothed `sigma1 * u_dsn`.
pub fn turning_response(u_dsn: f64, state: &mut RecognizerState, dt_ms: f64, params: &Params) -> f64 {
    let target = params.sigma1 * u_dsn;
    state.tr_prime += smoothing_alpha(dt_ms, params.tau3) * (target - state.tr_prime);
    state.tr_prime
}

/// Behavior transition. An unfinished avoidance turn ignores the pattern.
pub fn step_behavior<R: Rng + ?Sized>(
    pattern: MotionPattern,
    current: BehaviorState,
    params: &Params,
    rng: &mut R,
) -> BehaviorState {
    if let BehaviorState::Avoiding { progress, .. } = current {
        if progress < params.avoid_turn_radians {
            return current;
        }
    }
    match pattern {
        MotionPattern::LoomingConfirmed => BehaviorState::Avoiding {
            progress: 0.0,
            direction: if rng.gen_bool(0.5) {
                TurnDirection::Left
            } else {
                TurnDirection::Right
            },
        },
        MotionPattern::TranslationRight | MotionPattern::TranslationLeft => BehaviorState::Tracking,
        MotionPattern::Irrelevant | MotionPattern::Recession | MotionPattern::PotentialLooming => {
            BehaviorState::Wandering
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spikes(l1: u32, l2: u32, r: u32, l: u32, u_dsn: f64) -> NeuronFrameOutput {
        NeuronFrameOutput {
            u_lgmd1: 0.5,
            u_lgmd2: 0.5,
            u_dsn,
            spikes_lgmd1: l1,
            spikes_lgmd2: l2,
            spikes_dsn_r: r,
            spikes_dsn_l: l,
        }
    }

    #[test]
    fn silent_frame_is_irrelevant() {
        let p = Params::default();
        let mut st = RecognizerState::new(&p);
        assert_eq!(classify(&spikes(0, 0, 0, 0, 0.0), &mut st, &p), MotionPattern::Irrelevant);
    }

    #[test]
    fn lgmd1_alone_is_recession() {
        let p = Params::default();
        let mut st = RecognizerState::new(&p);
        assert_eq!(classify(&spikes(3, 0, 0, 0, 0.0), &mut st, &p), MotionPattern::Recession);
        assert_eq!(st.window().sum::<u32>(), 0);
        // any DSN activity breaks the AND rule
        assert_eq!(
            classify(&spikes(3, 0, 1, 0, 0.3), &mut st, &p),
            MotionPattern::PotentialLooming
        );
    }

    #[test]
    fn lgmd_majority_is_potential_looming() {
        let p = Params::default();
        let mut st = RecognizerState::new(&p);
        assert_eq!(
            classify(&spikes(3, 2, 1, 0, 0.2), &mut st, &p),
            MotionPattern::PotentialLooming
        );
        assert_eq!(st.window().sum::<u32>(), 5);
        assert_eq!(
            classify(&spikes(1, 0, 0, 1, -0.3), &mut st, &p),
            MotionPattern::LoomingConfirmed,
            "tie goes to the LGMDs and the window reaches 6"
        );
    }

    #[test]
    fn dsn_majority_is_translation() {
        let p = Params::default();
        let mut st = RecognizerState::new(&p);
        assert_eq!(
            classify(&spikes(1, 0, 4, 0, 0.4), &mut st, &p),
            MotionPattern::TranslationRight
        );
        assert_eq!(
            classify(&spikes(0, 1, 0, 5, -0.5), &mut st, &p),
            MotionPattern::TranslationLeft
        );
        assert_eq!(st.window().sum::<u32>(), 0);
    }

    #[test]
    fn confirmation_windows() {
        let p = Params::default();
        assert!(confirm_collision(&RecognizerState::with_window(&p, &[2, 2, 1, 1, 1]), &p));
        assert!(!confirm_collision(&RecognizerState::with_window(&p, &[1, 1, 1, 1, 1]), &p));
        assert!(confirm_collision(&RecognizerState::with_window(&p, &[6, 0, 0, 0, 0]), &p));
        // frames older than n_t fall out
        assert!(!confirm_collision(&RecognizerState::with_window(&p, &[6, 0, 0, 0, 0, 0]), &p));
    }

    #[test]
    fn turning_response_smoothing() {
        let p = Params::default();
        let mut st = RecognizerState::new(&p);
        let tr = turning_response(0.5, &mut st, 33.3, &p);
        assert!((tr - 7.5 * 33.3 / 43.3).abs() < 1e-12);
        assert!((tr - 5.77).abs() < 0.01);
        for _ in 0..200 {
            turning_response(0.5, &mut st, 33.3, &p);
        }
        assert!((st.tr_prime() - 7.5).abs() < 1e-9);
        for _ in 0..200 {
            turning_response(0.0, &mut st, 33.3, &p);
        }
        assert!(st.tr_prime().abs() < 1e-9);
    }

    #[test]
    fn behavior_transitions() {
        let p = Params::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use BehaviorState::*;
        assert_eq!(
            step_behavior(MotionPattern::Recession, Wandering, &p, &mut rng),
            Wandering
        );
        assert!(step_behavior(MotionPattern::LoomingConfirmed, Wandering, &p, &mut rng).is_avoiding());
        assert_eq!(
            step_behavior(MotionPattern::PotentialLooming, Tracking, &p, &mut rng),
            Wandering
        );
        assert_eq!(
            step_behavior(MotionPattern::TranslationRight, Wandering, &p, &mut rng),
            Tracking
        );
        let busy = Avoiding {
            progress: 1.0,
            direction: TurnDirection::Left,
        };
        assert_eq!(
            step_behavior(MotionPattern::TranslationLeft, busy, &p, &mut rng),
            busy
        );
        let done = Avoiding {
            progress: 3.6,
            direction: TurnDirection::Left,
        };
        assert_eq!(
            step_behavior(MotionPattern::TranslationLeft, done, &p, &mut rng),
            Tracking
        );
    }

    #[test]
    fn turn_direction_comes_from_rng() {
        let p = Params::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [false; 2];
        for _ in 0..64 {
            if let BehaviorState::Avoiding { direction, .. } =
                step_behavior(MotionPattern::LoomingConfirmed, BehaviorState::Wandering, &p, &mut rng)
            {
                seen[(direction == TurnDirection::Left) as usize] = true;
            }
        }
        assert_eq!(seen, [true, true]);
    }

    fn frame_strategy() -> impl Strategy<Value = NeuronFrameOutput> {
        (0u32..5, 0u32..5, 0u32..8, -0.99f64..0.99).prop_map(|(l1, l2, dsn, u)| {
            let (r, l) = if u > 0.0 { (dsn, 0) } else { (0, dsn) };
            spikes(l1, l2, r, l, u)
        })
    }

    proptest! {
        #[test]
        fn translation_never_feeds_the_window(frames in proptest::collection::vec(frame_strategy(), 1..40)) {
            let p = Params::default();
            let mut st = RecognizerState::new(&p);
            for f in &frames {
                let pattern = classify(f, &mut st, &p);
                let newest = st.window().last().unwrap();
                if pattern.is_translation() {
                    prop_assert_eq!(newest, 0);
                }
            }
        }

        #[test]
        fn constant_stream_confirmation(c in 0u32..4) {
            let p = Params::default();
            let mut st = RecognizerState::new(&p);
            for _ in 0..10 {
                classify(&spikes(c, c.min(1), 0, 0, 0.0), &mut st, &p);
            }
            let per_frame = c + c.min(1);
            prop_assert_eq!(confirm_collision(&st, &p), per_frame as usize * (p.n_t + 1) >= p.n_sp as usize);
        }
    }
}
