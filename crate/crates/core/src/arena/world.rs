//! Arena geometry and differential-drive kinematics.
//!
//! World coordinates are centimetres with the origin at one arena corner.
//! A heading of 0 points along +x and headings grow toward +y, so a
//! positive yaw rate is a turn to the robot's right and the camera image
//! runs left-to-right with increasing bearing.

use crate::motor::WheelPowers;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotPose {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl RobotPose {
    pub fn new(id: usize, x: f64, y: f64, heading: f64) -> Self {
        Self { id, x, y, heading }
    }

    pub fn distance_to(&self, other: &RobotPose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing of `other` relative to this robot's heading, in `(-pi, pi]`,
    /// positive to the right.
    pub fn bearing_to(&self, other: &RobotPose) -> f64 {
        wrap_angle((other.y - self.y).atan2(other.x - self.x) - self.heading)
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Stripe pattern painted along the arena perimeter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallTexture {
    /// Length of one dark + light pair in cm.
    pub period: f64,
    pub dark: u8,
    pub light: u8,
    /// Arc-length offset in cm.
    pub phase: f64,
}

impl WallTexture {
    pub fn luminance_at(&self, arc: f64) -> u8 {
        let half = self.period / 2.0;
        if ((arc + self.phase) / half).floor().rem_euclid(2.0) == 0.0 {
            self.light
        } else {
            self.dark
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArenaWorld {
    pub width: f64,
    pub height: f64,
    pub wall_texture: WallTexture,
    pub floor_luminance: u8,
    pub ceiling_luminance: u8,
    pub robots: Vec<RobotPose>,
    pub time_s: f64,
}

impl ArenaWorld {
    pub fn new(params: &Params) -> Self {
        Self {
            width: params.arena_w,
            height: params.arena_h,
            wall_texture: WallTexture {
                period: params.texture_period,
                dark: params.wall_dark,
                light: params.wall_light,
                phase: 0.0,
            },
            floor_luminance: params.floor_luminance,
            ceiling_luminance: params.ceiling_luminance,
            robots: Vec::new(),
            time_s: 0.0,
        }
    }

    pub fn with_robots(params: &Params, robots: Vec<RobotPose>) -> Self {
        Self {
            robots,
            ..Self::new(params)
        }
    }

    pub fn robot(&self, id: usize) -> Option<&RobotPose> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Perimeter arc length of a point on the wall, walking
    /// bottom, right, top, left.
    pub fn wall_arc(&self, x: f64, y: f64) -> f64 {
        let (w, h) = (self.width, self.height);
        let eps = 1e-9;
        if y <= eps {
            x
        } else if x >= w - eps {
            w + y
        } else if y >= h - eps {
            w + h + (w - x)
        } else {
            2.0 * w + h + (h - y)
        }
    }

    /// Distance from `(x, y)` along `(dx, dy)` to the first wall, with the hit point.
    pub fn ray_to_wall(&self, x: f64, y: f64, dx: f64, dy: f64) -> (f64, f64, f64) {
        let mut t = f64::INFINITY;
        if dx > 0.0 {
            t = t.min((self.width - x) / dx);
        } else if dx < 0.0 {
            t = t.min(-x / dx);
        }
        if dy > 0.0 {
            t = t.min((self.height - y) / dy);
        } else if dy < 0.0 {
            t = t.min(-y / dy);
        }
        let t = t.max(0.0);
        (
            t,
            (x + t * dx).clamp(0.0, self.width),
            (y + t * dy).clamp(0.0, self.height),
        )
    }
}

/// A contact that began during a kinematics step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contact {
    Robots(usize, usize),
    Wall(usize),
}

/// Contact state carried between steps so each episode is reported once.
#[derive(Debug, Clone, Default)]
pub struct ContactTracker {
    robot_pairs: std::collections::BTreeSet<(usize, usize)>,
    walls: std::collections::BTreeSet<usize>,
}

impl ContactTracker {
    pub fn touching_wall(&self, id: usize) -> bool {
        self.walls.contains(&id)
    }

    pub fn touching_robot(&self, id: usize) -> bool {
        self.robot_pairs.iter().any(|&(a, b)| a == id || b == id)
    }
}

const CONTACT_SLACK: f64 = 0.05;

/// Integrates every robot for `dt_s` seconds.
///
/// Robots move in id order; each move stops at first contact with a wall or
/// another robot, so discs never overlap. New contact episodes are returned.
pub fn step_kinematics(
    world: &mut ArenaWorld,
    powers: &[WheelPowers],
    dt_s: f64,
    params: &Params,
    contacts: &mut ContactTracker,
) -> Vec<Contact> {
    assert_eq!(powers.len(), world.robots.len(), "one command per robot");
    let radius = params.robot_radius();
    let mut order: Vec<usize> = (0..world.robots.len()).collect();
    order.sort_by_key(|&i| world.robots[i].id);

    for &i in &order {
        let cmd = powers[i];
        let v = cmd.linear_speed();
        let omega = cmd.yaw_rate(params.track_width);
        let pose = world.robots[i];
        // midpoint heading integration
        let mid = pose.heading + 0.5 * omega * dt_s;
        let mut dx = v * mid.cos() * dt_s;
        let mut dy = v * mid.sin() * dt_s;

        // walls: clip each axis at the boundary
        let (lo_x, hi_x) = (radius, world.width - radius);
        let (lo_y, hi_y) = (radius, world.height - radius);
        let mut frac: f64 = 1.0;
        if pose.x + dx > hi_x {
            frac = frac.min(((hi_x - pose.x) / dx).max(0.0));
        } else if pose.x + dx < lo_x {
            frac = frac.min(((lo_x - pose.x) / dx).max(0.0));
        }
        if pose.y + dy > hi_y {
            frac = frac.min(((hi_y - pose.y) / dy).max(0.0));
        } else if pose.y + dy < lo_y {
            frac = frac.min(((lo_y - pose.y) / dy).max(0.0));
        }

        for (j, other) in world.robots.iter().enumerate() {
            if j == i {
                continue;
            }
            frac = frac.min(free_fraction(&pose, dx, dy, other, 2.0 * radius));
        }
        dx *= frac;
        dy *= frac;

        let r = &mut world.robots[i];
        r.x = (r.x + dx).clamp(lo_x, hi_x);
        r.y = (r.y + dy).clamp(lo_y, hi_y);
        r.heading = wrap_angle(r.heading + omega * dt_s);
    }
    world.time_s += dt_s;

    let mut started = Vec::new();
    for &i in &order {
        let r = world.robots[i];
        let at_wall = r.x - radius < CONTACT_SLACK
            || world.width - radius - r.x < CONTACT_SLACK
            || r.y - radius < CONTACT_SLACK
            || world.height - radius - r.y < CONTACT_SLACK;
        if at_wall {
            if contacts.walls.insert(r.id) {
                started.push(Contact::Wall(r.id));
            }
        } else {
            contacts.walls.remove(&r.id);
        }
    }
    for (a_idx, &a) in order.iter().enumerate() {
        for &b in &order[a_idx + 1..] {
            let (ra, rb) = (world.robots[a], world.robots[b]);
            let key = (ra.id.min(rb.id), ra.id.max(rb.id));
            if ra.distance_to(&rb) < 2.0 * radius + CONTACT_SLACK {
                if contacts.robot_pairs.insert(key) {
                    started.push(Contact::Robots(key.0, key.1));
                }
            } else {
                contacts.robot_pairs.remove(&key);
            }
        }
    }
    started
}

/// Largest fraction of the move `(dx, dy)` that keeps the centres at least
/// `min_dist` apart. Moves that increase the separation are never blocked.
fn free_fraction(pose: &RobotPose, dx: f64, dy: f64, other: &RobotPose, min_dist: f64) -> f64 {
    let (rx, ry) = (pose.x - other.x, pose.y - other.y);
    let a = dx * dx + dy * dy;
    if a == 0.0 {
        return 1.0;
    }
    let b = rx * dx + ry * dy;
    if b >= 0.0 {
        return 1.0;
    }
    let c = rx * rx + ry * ry - min_dist * min_dist;
    if c <= 0.0 {
        // already touching and moving closer
        return 0.0;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return 1.0;
    }
    let s = (-b - disc.sqrt()) / a;
    if s >= 1.0 {
        1.0
    } else {
        s.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn world_with(robots: Vec<RobotPose>) -> ArenaWorld {
        ArenaWorld::with_robots(&Params::default(), robots)
    }

    #[test]
    fn straight_line_motion() {
        let p = Params::default();
        let mut w = world_with(vec![RobotPose::new(0, 20.0, 20.0, 0.3)]);
        let mut c = ContactTracker::default();
        let events = step_kinematics(&mut w, &[WheelPowers { p_r: 10.0, p_l: 10.0 }], 0.1, &p, &mut c);
        assert!(events.is_empty());
        let r = w.robots[0];
        assert!((r.x - (20.0 + 0.3f64.cos())).abs() < 1e-12);
        assert!((r.y - (20.0 + 0.3f64.sin())).abs() < 1e-12);
        assert_eq!(r.heading, 0.3);
    }

    #[test]
    fn spin_in_place() {
        let p = Params::default();
        let mut w = world_with(vec![RobotPose::new(0, 20.0, 20.0, 0.0)]);
        let mut c = ContactTracker::default();
        step_kinematics(&mut w, &[WheelPowers { p_r: -5.0, p_l: 5.0 }], 0.1, &p, &mut c);
        let r = w.robots[0];
        assert_eq!((r.x, r.y), (20.0, 20.0));
        assert!((r.heading - 10.0 / p.track_width * 0.1).abs() < 1e-12);
    }

    #[test]
    fn wall_contact_is_clamped_and_reported_once() {
        let p = Params::default();
        // 1 cm from the right wall surface, heading into it
        let mut w = world_with(vec![RobotPose::new(3, p.arena_w - 3.0, 20.0, 0.0)]);
        let mut c = ContactTracker::default();
        let drive = [WheelPowers { p_r: 10.0, p_l: 10.0 }];
        let mut walls = 0;
        for _ in 0..20 {
            for e in step_kinematics(&mut w, &drive, 1.0 / 30.0, &p, &mut c) {
                assert_eq!(e, Contact::Wall(3));
                walls += 1;
            }
        }
        assert_eq!(walls, 1);
        // analytic contact: centre exactly one radius from the wall
        assert!((w.robots[0].x - (p.arena_w - p.robot_radius())).abs() < 1e-9);
        // back away, then hit again: a second episode
        let reverse = [WheelPowers { p_r: -10.0, p_l: -10.0 }];
        for _ in 0..10 {
            step_kinematics(&mut w, &reverse, 1.0 / 30.0, &p, &mut c);
        }
        let mut again = 0;
        for _ in 0..20 {
            again += step_kinematics(&mut w, &drive, 1.0 / 30.0, &p, &mut c).len();
        }
        assert_eq!(again, 1);
    }

    #[test]
    fn robots_stop_at_contact() {
        let p = Params::default();
        let mut w = world_with(vec![
            RobotPose::new(0, 20.0, 20.0, 0.0),
            RobotPose::new(1, 30.0, 20.0, std::f64::consts::PI),
        ]);
        let mut c = ContactTracker::default();
        let cmd = [WheelPowers { p_r: 10.0, p_l: 10.0 }; 2];
        let mut hits = Vec::new();
        for _ in 0..30 {
            hits.extend(step_kinematics(&mut w, &cmd, 1.0 / 30.0, &p, &mut c));
            assert!(w.robots[0].distance_to(&w.robots[1]) >= p.robot_diameter - 1e-9);
        }
        assert_eq!(hits, vec![Contact::Robots(0, 1)]);
        assert!((w.robots[0].distance_to(&w.robots[1]) - p.robot_diameter).abs() < 1e-9);
    }

    #[test]
    fn bearings_are_positive_to_the_right() {
        let a = RobotPose::new(0, 10.0, 10.0, 0.0);
        let right = RobotPose::new(1, 10.0, 20.0, 0.0);
        assert!((a.bearing_to(&right) - FRAC_PI_2).abs() < 1e-12);
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn perimeter_arc_is_continuous() {
        let w = world_with(vec![]);
        assert_eq!(w.wall_arc(10.0, 0.0), 10.0);
        assert_eq!(w.wall_arc(w.width, 5.0), w.width + 5.0);
        assert_eq!(w.wall_arc(w.width, w.height), w.width + w.height);
        assert_eq!(w.wall_arc(0.0, 1.0), 2.0 * w.width + 2.0 * w.height - 1.0);
    }
}
