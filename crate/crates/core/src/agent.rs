//! One robot's closed perception-action loop: frame in, wheel powers out.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::Frame;
use crate::motor::{motor_power, WheelPowers};
use crate::neurons::NeuronFrameOutput;
use crate::params::Params;
use crate::pipeline::{Model, Pipeline};
use crate::recognizer::{
    classify, step_behavior, turning_response, BehaviorState, MotionPattern, RecognizerState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentStep {
    pub neurons: NeuronFrameOutput,
    pub pattern: MotionPattern,
    pub behavior: BehaviorState,
    pub tr_prime: f64,
    pub powers: WheelPowers,
    /// An avoidance maneuver started on this frame.
    pub avoid_started: bool,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pipeline: Pipeline,
    recognizer: RecognizerState,
    behavior: BehaviorState,
    rng: ChaCha8Rng,
    /// Frames left in which collisions cannot be confirmed.
    refractory: usize,
}

impl Agent {
    pub fn new(params: &Params, model: Model, seed: u64) -> Self {
        Self {
            pipeline: Pipeline::new(params, model),
            recognizer: RecognizerState::new(params),
            behavior: BehaviorState::Wandering,
            rng: ChaCha8Rng::seed_from_u64(seed),
            refractory: 0,
        }
    }

    pub fn behavior(&self) -> BehaviorState {
        self.behavior
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    /// Starts an avoidance turn regardless of perception (stall recovery).
    pub fn force_avoidance(&mut self) {
        self.behavior = step_behavior(
            MotionPattern::LoomingConfirmed,
            BehaviorState::Wandering,
            self.pipeline.params(),
            &mut self.rng,
        );
    }

    pub fn step(&mut self, frame: &Frame) -> Result<AgentStep> {
        let neurons = self.pipeline.process(frame)?;
        let params = self.pipeline.params();
        if matches!(self.behavior, BehaviorState::Avoiding { progress, .. } if progress >= params.avoid_turn_radians) {
            self.refractory = (params.avoid_refractory_s * params.fps).round() as usize;
        }
        let mut pattern = classify(&neurons, &mut self.recognizer, params);
        if self.refractory > 0 {
            self.refractory -= 1;
            self.recognizer.clear_window();
            if pattern == MotionPattern::LoomingConfirmed {
                pattern = MotionPattern::PotentialLooming;
            }
        }
        // the DSN output only steers when the DSNs won the competition
        let steer_input = if pattern.is_translation() {
            neurons.u_dsn
        } else {
            0.0
        };
        let tr_prime = turning_response(steer_input, &mut self.recognizer, params.dt_ms(), params);
        let was_avoiding = self.behavior.is_avoiding();
        let mut behavior = step_behavior(pattern, self.behavior, params, &mut self.rng);
        let avoid_started = behavior.is_avoiding()
            && (!was_avoiding || matches!(self.behavior, BehaviorState::Avoiding { progress, .. } if progress >= params.avoid_turn_radians));
        let powers = motor_power(&behavior, tr_prime, params);
        if let BehaviorState::Avoiding { progress, .. } = &mut behavior {
            *progress += powers.yaw_rate(params.track_width).abs() * params.dt_s();
        }
        self.behavior = behavior;
        Ok(AgentStep {
            neurons,
            pattern,
            behavior,
            tr_prime,
            powers,
            avoid_started,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avoidance_completes_after_target_turn() {
        let p = Params::default();
        let mut agent = Agent::new(&p, Model::Full, 5);
        agent.force_avoidance();
        let frame = Frame::filled(p.frame_w, p.frame_h, 90);
        let mut turned = 0.0;
        let mut frames = 0;
        while agent.behavior().is_avoiding() {
            let s = agent.step(&frame).unwrap();
            if s.behavior.is_avoiding() {
                turned += s.powers.yaw_rate(p.track_width).abs() * p.dt_s();
            }
            frames += 1;
            assert!(frames < 100);
        }
        assert!(turned >= p.avoid_turn_radians);
        assert!(turned < p.avoid_turn_radians + 2.0 * p.avoid_turn_speed / p.track_width * p.dt_s());
    }

    /// Dark squares that grow by one pixel per frame from the image centre.
    fn expanding(p: &Params, k: usize) -> Frame {
        let mut f = Frame::filled(p.frame_w, p.frame_h, 250);
        let (cx, cy) = (p.frame_w / 2, p.frame_h / 2);
        let r = 4 + 2 * k;
        for y in cy.saturating_sub(r)..(cy + r).min(p.frame_h) {
            for x in cx.saturating_sub(r)..(cx + r).min(p.frame_w) {
                f.set(x, y, 0);
            }
        }
        f
    }

    fn first_avoidance(agent: &mut Agent, p: &Params, frames: usize) -> Option<usize> {
        (0..frames).find(|&k| agent.step(&expanding(p, k)).unwrap().avoid_started)
    }

    #[test]
    fn refractory_period_follows_a_turn() {
        let p = Params {
            avoid_refractory_s: 1.0,
            ..Params::default()
        };
        let window = (p.avoid_refractory_s * p.fps).round() as usize;
        let fresh = first_avoidance(&mut Agent::new(&p, Model::Full, 2), &p, 40).expect("looming triggers");
        assert!(fresh < window, "stimulus too weak to test: {fresh}");

        let mut agent = Agent::new(&p, Model::Full, 2);
        agent.force_avoidance();
        let still = Frame::filled(p.frame_w, p.frame_h, 250);
        while agent.behavior().is_avoiding() {
            agent.step(&still).unwrap();
        }
        // the frame that ended the turn used one refractory frame
        assert_eq!(first_avoidance(&mut agent, &p, window - 1), None);
    }
}
