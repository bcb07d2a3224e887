//! Encounter bookkeeping and the success-rate metrics built on it.
//!
//! Each robot watches every other robot and the walls. A robot encounter
//! opens when another robot comes within the proximity disc inside the
//! viewer's field of view; its stimulus type (looming or translating) is
//! fixed at that moment. A wall encounter opens when the time to reach the
//! wall along the current heading drops below a threshold. Every opened
//! encounter closes exactly once: as a collision on contact, or as an
//! avoidance when the viewer starts an avoidance turn, the other robot
//! leaves the disc, or the wall is no longer ahead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::Params;

use super::world::{wrap_angle, ArenaWorld, Contact, RobotPose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    /// Collision with another robot.
    CwR,
    /// Collision with the arena periphery.
    CwP,
    /// Looming robot encounter closed without contact.
    ALR,
    /// Translating robot encounter closed without contact.
    ATR,
    /// Wall approach closed without contact.
    AP,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::CwR,
        EventKind::CwP,
        EventKind::ALR,
        EventKind::ATR,
        EventKind::AP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::CwR => "CwR",
            EventKind::CwP => "CwP",
            EventKind::ALR => "ALR",
            EventKind::ATR => "ATR",
            EventKind::AP => "AP",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown event kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub kind: EventKind,
    pub time_s: f64,
    pub robot_id: usize,
    pub other_id: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StimulusType {
    Looming,
    Translating,
}

/// Everything the classifier needs from one simulation tick, observed after
/// the robots have moved.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub time_s: f64,
    pub dt_s: f64,
    pub poses: Vec<RobotPose>,
    /// Forward speed per robot, cm/s, same order as `poses`.
    pub speeds: Vec<f64>,
    /// Robots whose perception started an avoidance turn this tick.
    pub avoid_started: Vec<usize>,
    /// Contact episodes that began this tick.
    pub contacts: Vec<Contact>,
}

/// Incremental encounter classifier. Feed it one [`TickRecord`] per tick,
/// then call [`EncounterTracker::finish`].
#[derive(Debug, Clone, Default)]
pub struct EncounterTracker {
    open_robot: BTreeMap<(usize, usize), StimulusType>,
    /// Pairs that closed and have not yet left the disc.
    spent_robot: BTreeSet<(usize, usize)>,
    open_wall: BTreeSet<usize>,
    spent_wall: BTreeSet<usize>,
    last_distance: BTreeMap<(usize, usize), f64>,
    events: Vec<EventRecord>,
}

impl EncounterTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn open_count(&self) -> usize {
        self.open_robot.len() + self.open_wall.len()
    }

    pub fn observe(&mut self, tick: &TickRecord, width: f64, height: f64, params: &Params) {
        let t = tick.time_s;
        // Contacts first: an avoidance turn that starts on the same tick
        // came too late.
        for contact in &tick.contacts {
            match *contact {
                Contact::Wall(id) => {
                    self.open_wall.remove(&id);
                    self.spent_wall.insert(id);
                    self.push(EventKind::CwP, t, id, None);
                }
                Contact::Robots(a, b) => {
                    for (viewer, other) in [(a, b), (b, a)] {
                        let key = (viewer, other);
                        let was_open = self.open_robot.remove(&key).is_some();
                        let visible = match (pose_of(&tick.poses, viewer), pose_of(&tick.poses, other)) {
                            (Some(v), Some(o)) => in_fov(v, o, params),
                            _ => false,
                        };
                        if was_open || visible {
                            self.spent_robot.insert(key);
                            self.push(EventKind::CwR, t, viewer, Some(other));
                        }
                    }
                }
            }
        }

        for &id in &tick.avoid_started {
            let keys: Vec<_> = self.open_robot.range((id, 0)..=(id, usize::MAX)).map(|(k, s)| (*k, *s)).collect();
            for (key, stimulus) in keys {
                self.open_robot.remove(&key);
                self.spent_robot.insert(key);
                self.push(avoid_kind(stimulus), t, id, Some(key.1));
            }
            if self.open_wall.remove(&id) {
                self.spent_wall.insert(id);
                self.push(EventKind::AP, t, id, None);
            }
        }

        let radius = params.encounter_radius;
        let frontal = params.frontal_cone_deg.to_radians();
        for (vi, viewer) in tick.poses.iter().enumerate() {
            for other in &tick.poses {
                if other.id == viewer.id {
                    continue;
                }
                let key = (viewer.id, other.id);
                let dist = viewer.distance_to(other);
                let previous = self.last_distance.insert(key, dist);
                let range_rate = previous.map_or(0.0, |p| (dist - p) / tick.dt_s);
                if dist > radius {
                    self.spent_robot.remove(&key);
                    if let Some(stimulus) = self.open_robot.remove(&key) {
                        self.push(avoid_kind(stimulus), t, viewer.id, Some(other.id));
                    }
                    continue;
                }
                if self.open_robot.contains_key(&key) || self.spent_robot.contains(&key) {
                    continue;
                }
                if in_fov(viewer, other, params) {
                    let bearing = viewer.bearing_to(other).abs();
                    let stimulus = if range_rate < -params.range_rate_threshold && bearing <= frontal {
                        StimulusType::Looming
                    } else {
                        StimulusType::Translating
                    };
                    self.open_robot.insert(key, stimulus);
                }
            }

            let speed = tick.speeds.get(vi).copied().unwrap_or(0.0);
            let approaching = wall_time_to_contact(viewer, speed, width, height, params.robot_radius())
                .is_some_and(|ttc| ttc < params.wall_ttc_s);
            if approaching {
                if !self.open_wall.contains(&viewer.id) && !self.spent_wall.contains(&viewer.id) {
                    self.open_wall.insert(viewer.id);
                }
            } else {
                self.spent_wall.remove(&viewer.id);
                if self.open_wall.remove(&viewer.id) {
                    self.push(EventKind::AP, t, viewer.id, None);
                }
            }
        }
    }

    /// Closes whatever is still open at the end of a run as non-collisions.
    pub fn finish(&mut self, time_s: f64) {
        for (key, stimulus) in std::mem::take(&mut self.open_robot) {
            self.push(avoid_kind(stimulus), time_s, key.0, Some(key.1));
        }
        for id in std::mem::take(&mut self.open_wall) {
            self.push(EventKind::AP, time_s, id, None);
        }
    }

    pub fn into_events(self) -> Vec<EventRecord> {
        self.events
    }

    fn push(&mut self, kind: EventKind, time_s: f64, robot_id: usize, other_id: Option<usize>) {
        self.events.push(EventRecord {
            kind,
            time_s,
            robot_id,
            other_id,
        });
    }
}

fn avoid_kind(stimulus: StimulusType) -> EventKind {
    match stimulus {
        StimulusType::Looming => EventKind::ALR,
        StimulusType::Translating => EventKind::ATR,
    }
}

fn pose_of(poses: &[RobotPose], id: usize) -> Option<&RobotPose> {
    poses.iter().find(|p| p.id == id)
}

fn in_fov(viewer: &RobotPose, other: &RobotPose, params: &Params) -> bool {
    wrap_angle(viewer.bearing_to(other)).abs() <= params.fov_deg.to_radians() / 2.0
}

/// Seconds until the robot rim reaches a wall along its heading, if it is
/// moving forward.
pub fn wall_time_to_contact(pose: &RobotPose, speed: f64, width: f64, height: f64, radius: f64) -> Option<f64> {
    if speed <= 0.0 {
        return None;
    }
    let (dx, dy) = (pose.heading.cos(), pose.heading.sin());
    let mut dist = f64::INFINITY;
    if dx > 1e-12 {
        dist = dist.min((width - radius - pose.x) / dx);
    } else if dx < -1e-12 {
        dist = dist.min((radius - pose.x) / dx);
    }
    if dy > 1e-12 {
        dist = dist.min((height - radius - pose.y) / dy);
    } else if dy < -1e-12 {
        dist = dist.min((radius - pose.y) / dy);
    }
    dist.is_finite().then(|| dist.max(0.0) / speed)
}

/// Replays a recorded run through a fresh tracker.
pub fn classify_encounters(history: &[TickRecord], world: &ArenaWorld, params: &Params) -> Vec<EventRecord> {
    let mut tracker = EncounterTracker::new();
    for tick in history {
        tracker.observe(tick, world.width, world.height, params);
    }
    if let Some(last) = history.last() {
        tracker.finish(last.time_s);
    }
    tracker.into_events()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArenaMetrics {
    pub counts: BTreeMap<EventKind, usize>,
    /// `AP / (AP + CwP)` in percent; `None` when there were no wall events.
    pub sr1: Option<f64>,
    /// `ALR / (ALR + ATR + CwR)` in percent; `None` without robot events.
    pub sr2: Option<f64>,
}

impl ArenaMetrics {
    pub fn from_events(events: &[EventRecord]) -> Self {
        let mut counts: BTreeMap<EventKind, usize> = EventKind::ALL.iter().map(|&k| (k, 0)).collect();
        for e in events {
            *counts.entry(e.kind).or_default() += 1;
        }
        let c = |k| counts[&k] as f64;
        let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den * 100.0);
        let sr1 = ratio(c(EventKind::AP), c(EventKind::AP) + c(EventKind::CwP));
        let sr2 = ratio(
            c(EventKind::ALR),
            c(EventKind::ALR) + c(EventKind::ATR) + c(EventKind::CwR),
        );
        Self { counts, sr1, sr2 }
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    /// `key,value` lines; absent ratios are written as empty values.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for k in EventKind::ALL {
            out.push_str(&format!("{},{}\n", k, self.count(k)));
        }
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_default();
        out.push_str(&format!("SR1,{}\nSR2,{}\n", fmt(self.sr1), fmt(self.sr2)));
        out
    }
}

pub const EVENT_LOG_HEADER: [&str; 4] = ["time_s", "robot_id", "other_id", "kind"];

pub fn write_event_log<W: std::io::Write>(events: &[EventRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_LOG_HEADER)?;
    for e in events {
        w.write_record([
            format!("{:.4}", e.time_s),
            e.robot_id.to_string(),
            e.other_id.map(|o| o.to_string()).unwrap_or_default(),
            e.kind.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_event_log<R: std::io::Read>(input: R) -> Result<Vec<EventRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut events = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::Parse {
            line: line + 2,
            message: format!("bad {what} in event log"),
        };
        let field = |i: usize| record.get(i).unwrap_or("");
        events.push(EventRecord {
            time_s: field(0).parse().map_err(|_| bad("time"))?,
            robot_id: field(1).parse().map_err(|_| bad("robot id"))?,
            other_id: match field(2) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("other id"))?),
            },
            kind: field(3).parse().map_err(|_| bad("kind"))?,
        });
    }
    Ok(events)
}
