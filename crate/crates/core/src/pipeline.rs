//! Frame-to-spikes pipeline chaining the retina, lamina, medulla and
//! lobula layers for all four neurons.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Frame;
use crate::neurons::{
    activate_sum, delay_fields, dsn_medulla, lgmd_combine, lgmd_medulla, spike_encode,
    MedullaState, NeuronFrameOutput,
};
use crate::params::Params;
use crate::retina::{fdsr_adapt, lamina_bandpass, rectify_split, retina_highpass, LaminaState};

/// Which neurons take part in recognition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Lgmd2Only,
    Lgmds,
    Full,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Lgmd2Only, Model::Lgmds, Model::Full];

    pub fn lgmd1_enabled(self) -> bool {
        !matches!(self, Model::Lgmd2Only)
    }

    pub fn dsn_enabled(self) -> bool {
        matches!(self, Model::Full)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Lgmd2Only => "lgmd2",
            Model::Lgmds => "lgmds",
            Model::Full => "full",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lgmd2" => Ok(Model::Lgmd2Only),
            "lgmds" => Ok(Model::Lgmds),
            "full" => Ok(Model::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown model `{other}` (expected lgmd2, lgmds or full)"
            ))),
        }
    }
}

/// Raw spatial sums feeding the lobula sigmoids of the last frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LobulaSums {
    pub lgmd1: f64,
    pub lgmd2: f64,
    pub dsn: f64,
}

/// Per-robot perception state. Layers 1-2 are always computed in full; the
/// model selector only masks neuron outputs.
#[derive(Debug, Clone)]
pub struct Pipeline {
    params: Params,
    model: Model,
    lamina: LaminaState,
    medulla: MedullaState,
    last_sums: LobulaSums,
}

impl Pipeline {
    pub fn new(params: &Params, model: Model) -> Self {
        Self {
            params: params.clone(),
            model,
            lamina: LaminaState::new(params),
            medulla: MedullaState::new(params.frame_w, params.frame_h),
            last_sums: LobulaSums::default(),
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn last_sums(&self) -> LobulaSums {
        self.last_sums
    }

    pub fn process(&mut self, frame: &Frame) -> Result<NeuronFrameOutput> {
        let p = &self.params;
        let dt = p.dt_ms();

        let photo = retina_highpass(frame, &mut self.lamina)?;
        let band = lamina_bandpass(&photo, p);
        let rectified = rectify_split(&band);
        let adapted = fdsr_adapt(&rectified, &mut self.lamina, dt, p);
        let delayed = delay_fields(&adapted, &mut self.medulla, dt, p.tau_s);

        let summation = lgmd_medulla(&adapted, &delayed, p);
        let lgmd1 = lgmd_combine(&summation, p.lgmd1_theta).sum();
        let lgmd2 = lgmd_combine(&summation, p.lgmd2_theta).sum();
        let dsn = dsn_medulla(&adapted, &delayed, p).sum();
        self.last_sums = LobulaSums { lgmd1, lgmd2, dsn };

        let n = p.pixel_count();
        let mut out = NeuronFrameOutput::BASELINE;
        if self.model.lgmd1_enabled() {
            out.u_lgmd1 = activate_sum(lgmd1, n, p.k_sig, p.delta_c, false);
            out.spikes_lgmd1 = spike_encode(out.u_lgmd1, p.k_sp, p.t_sp_lgmd);
        }
        out.u_lgmd2 = activate_sum(lgmd2, n, p.k_sig, p.delta_c, false);
        out.spikes_lgmd2 = spike_encode(out.u_lgmd2, p.k_sp, p.t_sp_lgmd);
        if self.model.dsn_enabled() {
            out.u_dsn = activate_sum(dsn, n, p.k_sig, 0.0, true);
            let spikes = spike_encode(out.u_dsn.abs(), p.k_sp, p.t_sp_dsn);
            if out.u_dsn > 0.0 {
                out.spikes_dsn_r = spikes;
            } else if out.u_dsn < 0.0 {
                out.spikes_dsn_l = spikes;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.as_str().parse::<Model>().unwrap(), m);
        }
        assert!("both".parse::<Model>().is_err());
    }

    #[test]
    fn static_scene_stays_at_baseline() {
        let p = Params::default();
        let mut pipe = Pipeline::new(&p, Model::Full);
        let frame = Frame::filled(p.frame_w, p.frame_h, 128);
        for _ in 0..5 {
            assert_eq!(pipe.process(&frame).unwrap(), NeuronFrameOutput::BASELINE);
        }
    }

    #[test]
    fn disabled_neurons_report_baseline() {
        let p = Params::default();
        let mut pipe = Pipeline::new(&p, Model::Lgmd2Only);
        let mut a = Frame::filled(p.frame_w, p.frame_h, 200);
        pipe.process(&a).unwrap();
        for x in 30..60 {
            for y in 20..50 {
                a.set(x, y, 20);
            }
        }
        let out = pipe.process(&a).unwrap();
        assert_eq!(out.u_lgmd1, 0.5);
        assert_eq!(out.u_dsn, 0.0);
        assert_eq!(out.dsn_spikes() + out.spikes_lgmd1, 0);
        assert!(out.u_lgmd2 > 0.5);
    }
}
