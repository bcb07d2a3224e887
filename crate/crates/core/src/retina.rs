//! Retina and lamina layers, shared by all four neurons.
//!
//! Photoreceptors high-pass the luminance stream with a short decaying
//! residual, the lamina band-passes each frame spatially, splits it into ON
//! and OFF channels and removes sustained signal with a fast-onset,
//! slow-decay adaptation state.

use std::collections::VecDeque;

use crate::error::Result;
use crate::field::{Frame, OnOffField, SignalField};
use crate::params::Params;

/// Residual coefficient `a_i = 1 / (1 + e^(u*i))`, `i` starting at 1.
pub fn residual_coefficient(u: f64, i: usize) -> f64 {
    1.0 / (1.0 + (u * i as f64).exp())
}

/// First-order smoothing weight for a time constant.
#[inline]
pub fn smoothing_alpha(dt_ms: f64, tau_ms: f64) -> f64 {
    dt_ms / (tau_ms + dt_ms)
}

#[derive(Debug, Clone)]
pub struct LaminaState {
    width: usize,
    height: usize,
    /// Most recent first.
    p_history: VecDeque<SignalField>,
    prev_luminance: Option<Frame>,
    pub d_on: SignalField,
    pub d_off: SignalField,
    a_coeffs: Vec<f64>,
}

impl LaminaState {
    pub fn new(params: &Params) -> Self {
        let (w, h) = (params.frame_w, params.frame_h);
        Self {
            width: w,
            height: h,
            p_history: (0..params.n_i).map(|_| SignalField::zeros(w, h)).collect(),
            prev_luminance: None,
            d_on: SignalField::zeros(w, h),
            d_off: SignalField::zeros(w, h),
            a_coeffs: (1..=params.n_i)
                .map(|i| residual_coefficient(params.u, i))
                .collect(),
        }
    }

    pub fn a_coeffs(&self) -> &[f64] {
        &self.a_coeffs
    }

    pub fn history_len(&self) -> usize {
        self.p_history.len()
    }
}

/// Temporal high-pass: `P(t) = L(t) - L(t-1) + sum_i a_i * P(t-i)`.
///
/// The first frame seen by a state has no predecessor and is treated as
/// its own previous frame.
pub fn retina_highpass(frame: &Frame, state: &mut LaminaState) -> Result<SignalField> {
    frame.check_dims(state.width, state.height)?;
    let prev = state.prev_luminance.get_or_insert_with(|| frame.clone());
    let mut p = SignalField::zeros(state.width, state.height);
    let out = p.values_mut();
    for ((o, &now), &before) in out.iter_mut().zip(frame.pixels()).zip(prev.pixels()) {
        *o = now as f64 - before as f64;
    }
    for (a, past) in state.a_coeffs.iter().zip(&state.p_history) {
        for (o, &v) in out.iter_mut().zip(past.values()) {
            *o += a * v;
        }
    }
    if let Some(mut oldest) = state.p_history.pop_back() {
        oldest.values_mut().copy_from_slice(p.values());
        state.p_history.push_front(oldest);
    }
    prev.pixels_mut().copy_from_slice(frame.pixels());
    Ok(p)
}

/// Spatial band-pass `P' = P * W_e - P * W_i`.
pub fn lamina_bandpass(p: &SignalField, params: &Params) -> SignalField {
    let mut excite = params.w_e.convolve(p);
    let inhibit = params.w_i.convolve(p);
    for (e, i) in excite.values_mut().iter_mut().zip(inhibit.values()) {
        *e -= i;
    }
    excite
}

/// Half-wave rectification into ON (positive part) and OFF (magnitude of
/// the negative part) channels.
pub fn rectify_split(p_prime: &SignalField) -> OnOffField {
    let (w, h) = (p_prime.width(), p_prime.height());
    let mut out = OnOffField::zeros(w, h);
    let on = out.on.values_mut();
    for (o, &v) in on.iter_mut().zip(p_prime.values()) {
        *o = v.max(0.0);
    }
    let off = out.off.values_mut();
    for (o, &v) in off.iter_mut().zip(p_prime.values()) {
        *o = (-v).max(0.0);
    }
    out
}

/// Fast-onset / slow-decay adaptation applied per channel.
///
/// Each cell's state `D` moves toward the input `X` with time constant
/// `tau1` while `X >= D` (rising) and `tau2` otherwise; the output is
/// `max(X - D, 0)`.
pub fn fdsr_adapt(
    rectified: &OnOffField,
    state: &mut LaminaState,
    dt_ms: f64,
    params: &Params,
) -> OnOffField {
    let rise = smoothing_alpha(dt_ms, params.tau1);
    let fall = smoothing_alpha(dt_ms, params.tau2);
    OnOffField {
        on: adapt_channel(&rectified.on, &mut state.d_on, rise, fall),
        off: adapt_channel(&rectified.off, &mut state.d_off, rise, fall),
    }
}

fn adapt_channel(x: &SignalField, d: &mut SignalField, rise: f64, fall: f64) -> SignalField {
    let mut f = SignalField::zeros(x.width(), x.height());
    for ((out, &xv), dv) in f
        .values_mut()
        .iter_mut()
        .zip(x.values())
        .zip(d.values_mut())
    {
        let alpha = if xv >= *dv { rise } else { fall };
        *dv += alpha * (xv - *dv);
        *out = (xv - *dv).max(0.0);
    }
    f
}
