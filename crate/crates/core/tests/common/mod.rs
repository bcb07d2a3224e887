//! Shared helpers: plain nested-loop re-evaluations of the medulla layers
//! and seeded random inputs.

#![allow(dead_code)]

use motion_vision::field::{OnOffField, SignalField};
use motion_vision::Params;
use rand::Rng;

/// Random non-negative field on a 1/16 grid, so sums and products of a
/// few terms are exact in floating point regardless of order.
pub fn dyadic_field(rng: &mut impl Rng, w: usize, h: usize) -> SignalField {
    let values = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0..64) as f64 / 16.0
            }
        })
        .collect();
    SignalField::from_values(w, h, values).unwrap()
}

pub fn dyadic_pair(rng: &mut impl Rng, w: usize, h: usize) -> OnOffField {
    OnOffField {
        on: dyadic_field(rng, w, h),
        off: dyadic_field(rng, w, h),
    }
}

pub fn small_params(w: usize, h: usize) -> Params {
    Params {
        frame_w: w,
        frame_h: h,
        ..Params::default()
    }
}

/// `sum_{dx,dy} W(dx,dy) * X(x-dx, y-dy)` with edge cells repeated.
fn lateral(x: &SignalField, p: &Params, cx: usize, cy: usize) -> f64 {
    let r = p.w_l.radius() as i64;
    let (w, h) = (x.width() as i64, x.height() as i64);
    let mut acc = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let sx = (cx as i64 - dx).max(0).min(w - 1);
            let sy = (cy as i64 - dy).max(0).min(h - 1);
            acc += p.w_l.tap(dx as isize, dy as isize) * x.get(sx as usize, sy as usize);
        }
    }
    acc
}

/// LGMD summation layer, evaluated cell by cell.
pub fn lgmd_medulla_oracle(f: &OnOffField, dp: &OnOffField, p: &Params) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (f.on.width(), f.on.height());
    let mut on = vec![0.0; w * h];
    let mut off = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let e_on = f.on.get(x, y) - p.w1 * lateral(&dp.on, p, x, y);
            let e_off = lateral(&dp.off, p, x, y) - p.w2 * f.off.get(x, y);
            on[y * w + x] = if e_on > 0.0 { e_on } else { 0.0 };
            off[y * w + x] = if e_off > 0.0 { e_off } else { 0.0 };
        }
    }
    (on, off)
}

/// Reichardt ensemble: each cell pairs with the cells `d, 2d, .., n_c*d`
/// to its right inside the row.
pub fn dsn_medulla_oracle(f: &OnOffField, dp: &OnOffField, p: &Params) -> Vec<f64> {
    let (w, h) = (f.on.width(), f.on.height());
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for k in 1..=p.n_c {
                let xr = x + k * p.d;
                if xr < w {
                    s += dp.on.get(x, y) * f.on.get(xr, y) - dp.on.get(xr, y) * f.on.get(x, y);
                    s += dp.off.get(x, y) * f.off.get(xr, y) - dp.off.get(xr, y) * f.off.get(x, y);
                }
            }
            out[y * w + x] = s;
        }
    }
    out
}
