//! Scripted open-loop stimulus courses: a single dark robot moving in
//! front of a stationary viewer against the textured arena wall.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::arena::{render_pov, ArenaWorld, RobotPose};
use crate::error::{Error, Result};
use crate::field::Frame;
use crate::params::Params;
use crate::pgm;

/// Default speed grid for the statistical battery, cm/s.
pub const SPEED_GRID: [f64; 4] = [3.0, 6.0, 8.0, 12.0];
/// Repetitions per course in the statistical battery.
pub const REPETITIONS: usize = 10;

/// Viewer position: looking along +x across the arena from this x, centred in y.
const VIEWER_X: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CourseKind {
    Looming,
    Recession,
    TransR,
    TransL,
    /// Straight approach inclined by this many degrees; positive comes from
    /// the viewer's left.
    Angular(f64),
}

impl fmt::Display for CourseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CourseKind::Looming => f.write_str("looming"),
            CourseKind::Recession => f.write_str("recession"),
            CourseKind::TransR => f.write_str("trans-r"),
            CourseKind::TransL => f.write_str("trans-l"),
            CourseKind::Angular(a) => write!(f, "angular:{a}"),
        }
    }
}

impl FromStr for CourseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "looming" => Ok(CourseKind::Looming),
            "recession" => Ok(CourseKind::Recession),
            "trans-r" => Ok(CourseKind::TransR),
            "trans-l" => Ok(CourseKind::TransL),
            other => match other.strip_prefix("angular:") {
                Some(angle) => angle.parse().map(CourseKind::Angular).map_err(|_| {
                    Error::InvalidArgument(format!("bad angle in course kind `{other}`"))
                }),
                None => Err(Error::InvalidArgument(format!(
                    "unknown course `{other}` (looming, recession, trans-r, trans-l, angular:<deg>)"
                ))),
            },
        }
    }
}

/// A generated course with its metadata.
#[derive(Debug, Clone)]
pub struct Course {
    pub kind: CourseKind,
    pub speed_cm_s: f64,
    pub fps: f64,
    pub seed: u64,
    pub frames: Vec<Frame>,
    /// Target centre distance from the viewer per frame.
    pub distances: Vec<f64>,
}

/// Straight-line target path, start to end.
fn path(kind: CourseKind, params: &Params) -> Result<((f64, f64), (f64, f64))> {
    let cy = params.arena_h / 2.0;
    let contact = params.robot_diameter;
    let margin = params.robot_radius();
    let (start, end) = match kind {
        CourseKind::Looming | CourseKind::Recession => (
            (VIEWER_X + params.loom_start_distance, cy),
            (VIEWER_X + contact, cy),
        ),
        CourseKind::TransR | CourseKind::TransL => {
            let range = params.trans_range;
            let half_fov = (params.fov_deg / 2.0).to_radians();
            let lateral = range * half_fov.tan() + params.robot_diameter;
            // viewer's left is -y
            ((VIEWER_X + range, cy - lateral), (VIEWER_X + range, cy + lateral))
        }
        CourseKind::Angular(deg) => {
            if deg.abs() > params.fov_deg / 2.0 {
                return Err(Error::InvalidArgument(format!(
                    "approach angle {deg} lies outside the {} degree field of view",
                    params.fov_deg
                )));
            }
            let a = deg.to_radians();
            let len = params.loom_start_distance;
            let end = (VIEWER_X + contact, cy);
            ((end.0 + len * a.cos(), end.1 - len * a.sin()), end)
        }
    };
    for (x, y) in [start, end] {
        if x - VIEWER_X < contact - 1e-9 {
            return Err(Error::InvalidArgument(
                "course starts behind or inside the viewer".into(),
            ));
        }
        if x < margin || x > params.arena_w - margin || y < margin || y > params.arena_h - margin {
            return Err(Error::InvalidArgument(format!(
                "course leaves the arena at ({x:.1}, {y:.1})"
            )));
        }
    }
    Ok((start, end))
}

/// Renders one course. `repetition` shifts the wall texture phase by a
/// seeded offset so repeated trials differ.
pub fn gen_course(kind: CourseKind, speed_cm_s: f64, params: &Params) -> Result<Course> {
    gen_course_rep(kind, speed_cm_s, params, 0)
}

pub fn gen_course_rep(kind: CourseKind, speed_cm_s: f64, params: &Params, repetition: u64) -> Result<Course> {
    if !(speed_cm_s > 0.0 && speed_cm_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "course speed must be positive, got {speed_cm_s}"
        )));
    }
    match kind {
        CourseKind::Recession => {
            let mut course = gen_course_rep(CourseKind::Looming, speed_cm_s, params, repetition)?;
            course.kind = kind;
            course.frames.reverse();
            course.distances.reverse();
            Ok(course)
        }
        CourseKind::TransL => {
            let mut course = gen_course_rep(CourseKind::TransR, speed_cm_s, params, repetition)?;
            course.kind = kind;
            for f in &mut course.frames {
                *f = f.mirrored();
            }
            Ok(course)
        }
        _ => render_course(kind, speed_cm_s, params, repetition),
    }
}

fn render_course(kind: CourseKind, speed: f64, params: &Params, repetition: u64) -> Result<Course> {
    let (start, end) = path(kind, params)?;
    let length = (end.0 - start.0).hypot(end.1 - start.1);
    let duration = length / speed;
    let count = ((duration * params.fps).round() as usize).max(2);
    let seed = params.rng_seed.wrapping_add(repetition);

    let mut world = ArenaWorld::new(params);
    world.wall_texture.phase = texture_phase(seed, params.texture_period);
    let viewer = RobotPose::new(0, VIEWER_X, params.arena_h / 2.0, 0.0);
    let mut frames = Vec::with_capacity(count);
    let mut distances = Vec::with_capacity(count);
    for k in 0..count {
        let travelled = (k as f64 / params.fps * speed).min(length);
        let s = travelled / length;
        let target = RobotPose::new(
            1,
            start.0 + s * (end.0 - start.0),
            start.1 + s * (end.1 - start.1),
            0.0,
        );
        world.robots = vec![viewer, target];
        world.time_s = k as f64 / params.fps;
        distances.push(viewer.distance_to(&target));
        frames.push(render_pov(&world, &viewer, params));
    }
    Ok(Course {
        kind,
        speed_cm_s: speed,
        fps: params.fps,
        seed,
        frames,
        distances,
    })
}

/// Seed 0 keeps the unshifted texture.
fn texture_phase(seed: u64, period: f64) -> f64 {
    use rand::{Rng, SeedableRng};
    if seed == 0 {
        return 0.0;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.gen_range(0.0..period)
}

impl Course {
    /// Writes `frame_00000.pgm`, ... plus `manifest.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (i, frame) in self.frames.iter().enumerate() {
            pgm::write_pgm(&dir.join(pgm::frame_file_name(i)), frame)?;
        }
        let manifest = format!(
            "kind={}\nspeed_cm_s={}\nfps={}\nframe_count={}\nseed={}\n",
            self.kind,
            self.speed_cm_s,
            self.fps,
            self.frames.len(),
            self.seed
        );
        std::fs::write(dir.join("manifest.txt"), manifest)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_area(frame: &Frame, params: &Params) -> usize {
        frame
            .pixels()
            .iter()
            .filter(|&&p| p < (params.robot_luminance + params.wall_dark) / 2)
            .count()
    }

    #[test]
    fn recession_reverses_looming() {
        let p = Params::default();
        let loom = gen_course(CourseKind::Looming, 12.0, &p).unwrap();
        let rec = gen_course(CourseKind::Recession, 12.0, &p).unwrap();
        let mut reversed = loom.frames.clone();
        reversed.reverse();
        assert_eq!(rec.frames, reversed);
    }

    #[test]
    fn trans_l_mirrors_trans_r() {
        let p = Params::default();
        let r = gen_course(CourseKind::TransR, 12.0, &p).unwrap();
        let l = gen_course(CourseKind::TransL, 12.0, &p).unwrap();
        assert_eq!(r.frames.len(), l.frames.len());
        for (a, b) in r.frames.iter().zip(&l.frames) {
            assert_eq!(&a.mirrored(), b);
        }
    }

    #[test]
    fn frame_count_matches_duration() {
        let p = Params::default();
        let c = gen_course(CourseKind::Looming, 6.0, &p).unwrap();
        let length = p.loom_start_distance - p.robot_diameter;
        assert_eq!(c.frames.len(), (length / 6.0 * p.fps).round() as usize);
    }

    #[test]
    fn looming_area_grows() {
        let p = Params::default();
        let c = gen_course(CourseKind::Looming, 8.0, &p).unwrap();
        let areas: Vec<_> = c.frames.iter().map(|f| dark_area(f, &p)).collect();
        assert!(areas.windows(2).all(|w| w[0] <= w[1]), "{areas:?}");
        assert!(areas.last() > areas.first());
    }

    #[test]
    fn rejects_bad_requests() {
        let p = Params::default();
        assert!(gen_course(CourseKind::Looming, 0.0, &p).is_err());
        assert!(gen_course(CourseKind::Angular(50.0), 6.0, &p).is_err());
        let far = Params {
            loom_start_distance: 200.0,
            ..Params::default()
        };
        assert!(gen_course(CourseKind::Looming, 6.0, &far).is_err());
    }

    #[test]
    fn kind_names_parse() {
        for k in [
            CourseKind::Looming,
            CourseKind::Recession,
            CourseKind::TransR,
            CourseKind::TransL,
            CourseKind::Angular(15.0),
        ] {
            assert_eq!(k.to_string().parse::<CourseKind>().unwrap(), k);
        }
    }

    #[test]
    fn repetitions_shift_texture() {
        let p = Params::default();
        let a = gen_course_rep(CourseKind::TransR, 12.0, &p, 0).unwrap();
        let b = gen_course_rep(CourseKind::TransR, 12.0, &p, 1).unwrap();
        assert_ne!(a.frames[0], b.frames[0]);
        assert_ne!(a.seed, b.seed);
    }
}
