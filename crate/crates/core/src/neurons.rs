//! Medulla and lobula layers plus the spike encoder.
//!
//! The LGMDs combine ON excitation with laterally spread, delayed
//! inhibition (and the mirrored arrangement for OFF); the DSNs correlate
//! delayed and current signals between horizontally separated cells.
//! The lobula sums each field over the whole image and squashes it into a
//! membrane potential, which is converted to an integer spike count.

use crate::field::{OnOffField, SignalField};
use crate::params::{Params, Theta};
use crate::retina::smoothing_alpha;

/// Delayed copies of the adapted ON/OFF signals.
#[derive(Debug, Clone)]
pub struct MedullaState {
    pub dprime_on: SignalField,
    pub dprime_off: SignalField,
}

impl MedullaState {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            dprime_on: SignalField::zeros(width, height),
            dprime_off: SignalField::zeros(width, height),
        }
    }
}

/// Per-frame neuron readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronFrameOutput {
    pub u_lgmd1: f64,
    pub u_lgmd2: f64,
    pub u_dsn: f64,
    pub spikes_lgmd1: u32,
    pub spikes_lgmd2: u32,
    pub spikes_dsn_r: u32,
    pub spikes_dsn_l: u32,
}

impl NeuronFrameOutput {
    /// Resting output: no excitation anywhere.
    pub const BASELINE: Self = Self {
        u_lgmd1: 0.5,
        u_lgmd2: 0.5,
        u_dsn: 0.0,
        spikes_lgmd1: 0,
        spikes_lgmd2: 0,
        spikes_dsn_r: 0,
        spikes_dsn_l: 0,
    };

    pub fn lgmd_spikes(&self) -> u32 {
        self.spikes_lgmd1 + self.spikes_lgmd2
    }

    pub fn dsn_spikes(&self) -> u32 {
        self.spikes_dsn_r + self.spikes_dsn_l
    }
}

/// Advances the delayed fields toward `f` and returns them.
pub fn delay_fields(f: &OnOffField, state: &mut MedullaState, dt_ms: f64, tau_s: f64) -> OnOffField {
    let alpha = smoothing_alpha(dt_ms, tau_s);
    for (d, &x) in state.dprime_on.values_mut().iter_mut().zip(f.on.values()) {
        *d += alpha * (x - *d);
    }
    for (d, &x) in state.dprime_off.values_mut().iter_mut().zip(f.off.values()) {
        *d += alpha * (x - *d);
    }
    OnOffField {
        on: state.dprime_on.clone(),
        off: state.dprime_off.clone(),
    }
}

/// LGMD summation cells, both clamped at zero:
///
/// `S_on = F_on - w1 * (D'_on * W_l)` and `S_off = (D'_off * W_l) - w2 * F_off`.
pub fn lgmd_medulla(f: &OnOffField, dprime: &OnOffField, params: &Params) -> OnOffField {
    let mut s_on = params.w_l.convolve(&dprime.on);
    for (s, &fv) in s_on.values_mut().iter_mut().zip(f.on.values()) {
        *s = (fv - params.w1 * *s).max(0.0);
    }
    let mut s_off = params.w_l.convolve(&dprime.off);
    for (s, &fv) in s_off.values_mut().iter_mut().zip(f.off.values()) {
        *s = (*s - params.w2 * fv).max(0.0);
    }
    OnOffField {
        on: s_on,
        off: s_off,
    }
}

/// `S = theta1 * S_on + theta2 * S_off + theta3 * S_on * S_off`.
pub fn lgmd_combine(s: &OnOffField, theta: Theta) -> SignalField {
    let mut out = SignalField::zeros(s.width(), s.height());
    for ((o, &on), &off) in out
        .values_mut()
        .iter_mut()
        .zip(s.on.values())
        .zip(s.off.values())
    {
        *o = theta.on * on + theta.off * off + theta.product * on * off;
    }
    out
}

/// Signed horizontal motion energy from ON and OFF Reichardt ensembles.
///
/// Each cell correlates with partners `d, 2d, .., n_c*d` cells to its
/// right; partners past the right edge are skipped. Positive output means
/// rightward motion.
pub fn dsn_medulla(f: &OnOffField, dprime: &OnOffField, params: &Params) -> SignalField {
    let (w, h) = (f.width(), f.height());
    let mut out = SignalField::zeros(w, h);
    let channels = [
        (f.on.values(), dprime.on.values()),
        (f.off.values(), dprime.off.values()),
    ];
    let dst = out.values_mut();
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let mut acc = 0.0;
            for (fv, dv) in channels {
                for k in 1..=params.n_c {
                    let xi = x + k * params.d;
                    if xi >= w {
                        break;
                    }
                    acc += dv[row + x] * fv[row + xi] - dv[row + xi] * fv[row + x];
                }
            }
            dst[row + x] = acc;
        }
    }
    out
}

/// Lobula sigmoid of the field's spatial sum.
///
/// Unsigned mode returns `1/(1+exp(-|x|/(n*k_sig))) - delta_c`; signed mode
/// returns the odd extension rescaled to `(-1, 1)`.
pub fn lobula_activate(field: &SignalField, n: usize, k_sig: f64, delta_c: f64, signed: bool) -> f64 {
    activate_sum(field.sum(), n, k_sig, delta_c, signed)
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn activate_sum(x: f64, n: usize, k_sig: f64, delta_c: f64, signed: bool) -> f64 {
    // saturates to exactly 1.0 in floating point for large |x|; keep the open bound
    let logistic = (1.0 / (1.0 + (-x.abs() / (n as f64 * k_sig)).exp())).min(BELOW_ONE);
    if signed {
        if x == 0.0 {
            0.0
        } else {
            x.signum() * 2.0 * (logistic - 0.5)
        }
    } else {
        logistic - delta_c
    }
}

/// `floor(exp(k_sp * (u - t_sp)))`.
pub fn spike_encode(u: f64, k_sp: f64, t_sp: f64) -> u32 {
    let v = (k_sp * (u - t_sp)).exp().floor();
    if v.is_finite() {
        v.max(0.0) as u32
    } else {
        0
    }
}
