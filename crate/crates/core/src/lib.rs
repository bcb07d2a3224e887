//! Spiking motion perception for small ground robots.
//!
//! Four neurons share a retina/lamina front end: two looming detectors
//! (LGMD1 responds to any approaching edge, LGMD2 only to darkening ones)
//! and a pair of horizontal direction-selective neurons. Their spikes
//! compete to classify each frame as looming, recession, translation or
//! irrelevant motion, which selects a wandering, tracking or avoidance
//! behavior for a differential-drive robot. The [`arena`] module closes
//! the loop in a 2D world with a synthetic camera.

pub mod agent;
pub mod arena;
pub mod error;
pub mod field;
pub mod motor;
pub mod neurons;
pub mod params;
pub mod pgm;
pub mod pipeline;
pub mod recognizer;
pub mod retina;
pub mod stimulus;
pub mod telemetry;

pub use agent::{Agent, AgentStep};
pub use error::{Error, Result};
pub use field::{Frame, Kernel, OnOffField, SignalField};
pub use motor::WheelPowers;
pub use neurons::NeuronFrameOutput;
pub use params::{load_params, Params};
pub use pipeline::{Model, Pipeline};
pub use recognizer::{BehaviorState, MotionPattern};
pub use telemetry::{run_bench, run_openloop, SpikeSummary, Telemetry, TelemetryRow};
