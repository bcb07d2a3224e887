//! Robot point-of-view renderer.
//!
//! Each image column is sampled by a few rays spread across its angular
//! footprint. A ray records the wall hit and every robot it passes; each
//! hit is projected with a pinhole model to a vertical extent centred on
//! the horizon, and partial pixel coverage is blended so edges move
//! smoothly between frames.

use crate::field::Frame;
use crate::params::Params;

use super::world::{ArenaWorld, RobotPose};

#[derive(Debug, Clone, Copy)]
struct Hit {
    depth: f64,
    half_height: f64,
    luminance: f64,
}

/// Renders what `viewer` sees. Robots other than the viewer appear as dark
/// cylinders; walls carry the perimeter stripe texture.
pub fn render_pov(world: &ArenaWorld, viewer: &RobotPose, params: &Params) -> Frame {
    let (w, h) = (params.frame_w, params.frame_h);
    let focal = params.focal_px();
    let samples = params.render_samples.max(1);
    let radius = params.robot_radius();
    let others: Vec<&RobotPose> = world.robots.iter().filter(|r| r.id != viewer.id).collect();

    let mut accum = vec![0.0f64; w * h];
    let mut hits: Vec<Hit> = Vec::with_capacity(others.len() + 1);
    let horizon = h as f64 / 2.0;
    let (cx, cy) = (
        viewer.x + params.camera_offset * viewer.heading.cos(),
        viewer.y + params.camera_offset * viewer.heading.sin(),
    );

    for col in 0..w {
        for s in 0..samples {
            let offset = col as f64 + (s as f64 + 0.5) / samples as f64 - w as f64 / 2.0;
            let rel = (offset / focal).atan();
            let angle = viewer.heading + rel;
            let (dx, dy) = (angle.cos(), angle.sin());
            // perpendicular depth factor for the pinhole projection
            let cos_rel = rel.cos();

            hits.clear();
            let (t_wall, hx, hy) = world.ray_to_wall(cx, cy, dx, dy);
            let arc = world.wall_arc(hx, hy);
            hits.push(Hit {
                depth: t_wall * cos_rel,
                half_height: 0.0,
                luminance: world.wall_texture.luminance_at(arc) as f64,
            });
            let wall_height = params.wall_height;
            hits[0].half_height = focal * wall_height / 2.0 / hits[0].depth.max(1e-6);

            for other in &others {
                if let Some(t) = ray_circle(cx, cy, dx, dy, other.x, other.y, radius) {
                    if t < t_wall {
                        let depth = t * cos_rel;
                        hits.push(Hit {
                            depth,
                            half_height: focal * params.robot_height / 2.0 / depth.max(1e-6),
                            luminance: params.robot_luminance as f64,
                        });
                    }
                }
            }
            hits.sort_by(|a, b| a.depth.total_cmp(&b.depth));

            for row in 0..h {
                // row spans [top, bottom] in image-plane units relative to the horizon
                let top = row as f64 - horizon;
                let bottom = top + 1.0;
                let mut covered = 0.0;
                let mut lum = 0.0;
                for hit in &hits {
                    let c = interval_overlap(top, bottom, -hit.half_height, hit.half_height);
                    if c > covered {
                        lum += hit.luminance * (c - covered);
                        covered = c;
                    }
                    if covered >= 1.0 {
                        break;
                    }
                }
                if covered < 1.0 {
                    // ceiling above the horizon, floor below
                    let ceiling = interval_overlap(top, bottom, f64::NEG_INFINITY, 0.0);
                    let floor = 1.0 - ceiling;
                    let bg = ceiling * world.ceiling_luminance as f64 + floor * world.floor_luminance as f64;
                    lum += bg * (1.0 - covered);
                }
                accum[row * w + col] += lum;
            }
        }
    }

    let pixels = accum
        .into_iter()
        .map(|v| (v / samples as f64).round().clamp(0.0, 255.0) as u8)
        .collect();
    Frame::new(w, h, pixels).expect("renderer output matches frame size")
}

fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0) / (a1 - a0)
}

/// Distance along a unit ray to the first intersection with a circle.
fn ray_circle(ox: f64, oy: f64, dx: f64, dy: f64, cx: f64, cy: f64, r: f64) -> Option<f64> {
    let (lx, ly) = (cx - ox, cy - oy);
    let c = lx * lx + ly * ly - r * r;
    if c <= 0.0 {
        // camera touching or inside the body: it fills the view
        return Some(0.0);
    }
    let b = lx * dx + ly * dy;
    if b <= 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = b - disc.sqrt();
    Some(t)
}
