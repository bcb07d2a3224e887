//! Closed-loop multi-robot runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::{Agent, AgentStep};
use crate::error::{Error, Result};
use crate::field::Frame;
use crate::params::Params;
use crate::pipeline::Model;

use super::encounters::{ArenaMetrics, EncounterTracker, EventRecord, TickRecord};
use super::render::render_pov;
use super::world::{step_kinematics, ArenaWorld, ContactTracker, RobotPose};

/// Spacing of the start grid, in robot diameters.
const START_CELL_DIAMETERS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ArenaOptions {
    pub n_robots: usize,
    pub duration_s: f64,
    pub model: Model,
    pub record_trajectory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub time_s: f64,
    pub pose: RobotPose,
}

#[derive(Debug, Clone)]
pub struct ArenaRun {
    pub metrics: ArenaMetrics,
    pub events: Vec<EventRecord>,
    pub trajectory: Vec<TrajectoryRow>,
    pub ticks: usize,
}

/// Number of start cells available; more robots than this are rejected.
pub fn arena_capacity(params: &Params) -> usize {
    let cell = START_CELL_DIAMETERS * params.robot_diameter;
    let cols = (params.arena_w / cell).floor() as usize;
    let rows = (params.arena_h / cell).floor() as usize;
    cols * rows
}

/// Seeded start poses: distinct grid cells, jittered inside the cell, with
/// random headings. Robots never overlap each other or the walls.
pub fn place_robots(params: &Params, n: usize, rng: &mut impl Rng) -> Result<Vec<RobotPose>> {
    let capacity = arena_capacity(params);
    if n > capacity {
        return Err(Error::InvalidArgument(format!(
            "{n} robots do not fit the {}x{} cm arena (capacity {capacity})",
            params.arena_w, params.arena_h
        )));
    }
    let cell = START_CELL_DIAMETERS * params.robot_diameter;
    let cols = (params.arena_w / cell).floor() as usize;
    let rows = (params.arena_h / cell).floor() as usize;
    // centre the grid
    let x0 = (params.arena_w - cols as f64 * cell) / 2.0;
    let y0 = (params.arena_h - rows as f64 * cell) / 2.0;
    let slack = (cell - params.robot_diameter) / 2.0;

    let mut cells: Vec<usize> = (0..cols * rows).collect();
    cells.shuffle(rng);
    Ok(cells[..n]
        .iter()
        .enumerate()
        .map(|(id, &c)| {
            let cx = x0 + ((c % cols) as f64 + 0.5) * cell;
            let cy = y0 + ((c / cols) as f64 + 0.5) * cell;
            let jx = rng.gen_range(-slack..=slack) * 0.9;
            let jy = rng.gen_range(-slack..=slack) * 0.9;
            let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            RobotPose::new(id, cx + jx, cy + jy, heading)
        })
        .collect())
}

pub fn run_arena(params: &Params, n_robots: usize, duration_s: f64, model: Model) -> Result<ArenaRun> {
    run_arena_with(
        params,
        &ArenaOptions {
            n_robots,
            duration_s,
            model,
            record_trajectory: false,
        },
    )
}

/// Lockstep simulation: every tick renders all views, runs all agents,
/// then moves all robots. Robots stuck against an obstacle for
/// `stall_timeout_s` are turned away by a forced avoidance maneuver.
pub fn run_arena_with(params: &Params, opts: &ArenaOptions) -> Result<ArenaRun> {
    params.validate()?;
    if !(opts.duration_s >= 0.0 && opts.duration_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "run duration must be a non-negative number of seconds, got {}",
            opts.duration_s
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let robots = place_robots(params, opts.n_robots, &mut rng)?;
    let mut world = ArenaWorld::with_robots(params, robots);
    world.wall_texture.phase = rng.gen_range(0.0..params.texture_period);
    let mut agents: Vec<Agent> = (0..opts.n_robots)
        .map(|id| Agent::new(params, opts.model, agent_seed(params.rng_seed, id)))
        .collect();

    let dt = params.dt_s();
    let ticks = (opts.duration_s * params.fps).round() as usize;
    let mut contacts = ContactTracker::default();
    let mut encounters = EncounterTracker::new();
    let mut stalled = vec![0.0; opts.n_robots];
    let mut trajectory = Vec::new();

    for _ in 0..ticks {
        let frames: Vec<Frame> = world
            .robots
            .par_iter()
            .map(|r| render_pov(&world, r, params))
            .collect();
        let steps: Vec<AgentStep> = agents
            .par_iter_mut()
            .zip(frames.par_iter())
            .map(|(agent, frame)| agent.step(frame))
            .collect::<Result<_>>()?;

        let powers: Vec<_> = steps.iter().map(|s| s.powers).collect();
        let started = step_kinematics(&mut world, &powers, dt, params, &mut contacts);

        for (i, agent) in agents.iter_mut().enumerate() {
            let id = world.robots[i].id;
            let blocked = contacts.touching_wall(id) || contacts.touching_robot(id);
            if blocked && !agent.behavior().is_avoiding() {
                stalled[i] += dt;
                if stalled[i] >= params.stall_timeout_s {
                    agent.force_avoidance();
                    stalled[i] = 0.0;
                }
            } else {
                stalled[i] = 0.0;
            }
        }

        let tick = TickRecord {
            time_s: world.time_s,
            dt_s: dt,
            poses: world.robots.clone(),
            speeds: powers.iter().map(|p| p.linear_speed()).collect(),
            avoid_started: steps
                .iter()
                .zip(&world.robots)
                .filter(|(s, _)| s.avoid_started)
                .map(|(_, r)| r.id)
                .collect(),
            contacts: started,
        };
        encounters.observe(&tick, world.width, world.height, params);
        if opts.record_trajectory {
            trajectory.extend(world.robots.iter().map(|&pose| TrajectoryRow {
                time_s: world.time_s,
                pose,
            }));
        }
    }
    encounters.finish(world.time_s);
    let events = encounters.into_events();
    Ok(ArenaRun {
        metrics: ArenaMetrics::from_events(&events),
        events,
        trajectory,
        ticks,
    })
}

fn agent_seed(base: u64, id: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id as u64 + 1)
}

pub const TRAJECTORY_HEADER: [&str; 5] = ["time_s", "id", "x", "y", "heading"];

pub fn write_trajectory<W: std::io::Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:.4}", r.time_s),
            r.pose.id.to_string(),
            format!("{:.4}", r.pose.x),
            format!("{:.4}", r.pose.y),
            format!("{:.5}", r.pose.heading),
        ])?;
    }
    w.flush()?;
    Ok(())
}
