//! Deterministic multi-robot arena.

mod encounters;
mod render;
mod run;
mod world;

pub use encounters::{
    classify_encounters, read_event_log, wall_time_to_contact, write_event_log, ArenaMetrics,
    EncounterTracker, EventKind, EventRecord, StimulusType, TickRecord, EVENT_LOG_HEADER,
};
pub use render::render_pov;
pub use run::{
    arena_capacity, place_robots, run_arena, run_arena_with, write_trajectory, ArenaOptions,
    ArenaRun, TrajectoryRow, TRAJECTORY_HEADER,
};
pub use world::{step_kinematics, wrap_angle, ArenaWorld, Contact, ContactTracker, RobotPose, WallTexture};
