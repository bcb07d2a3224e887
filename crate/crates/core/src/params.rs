//! Model parameters and simulation constants.
//!
//! Parameters load from a flat `key=value` document. Blank lines and
//! `#` comments are ignored, omitted keys keep their defaults and unknown
//! keys are rejected. Kernels are written as comma-separated row-major
//! weight lists whose length is an odd square.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Kernel;

/// ON/OFF combination coefficients of one LGMD neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub on: f64,
    pub off: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    // retina / lamina
    pub n_i: usize,
    pub u: f64,
    pub w_e: Kernel,
    pub w_i: Kernel,
    pub tau1: f64,
    pub tau2: f64,

    // medulla / lobula
    pub w_l: Kernel,
    pub w1: f64,
    pub w2: f64,
    pub tau_s: f64,
    pub lgmd1_theta: Theta,
    pub lgmd2_theta: Theta,
    pub d: usize,
    pub n_c: usize,
    pub k_sig: f64,
    pub delta_c: f64,
    pub k_sp: f64,
    pub t_sp_lgmd: f64,
    pub t_sp_dsn: f64,

    // recognition / control
    pub n_sp: u32,
    pub n_t: usize,
    pub sigma1: f64,
    pub tau3: f64,
    pub g_v: f64,
    pub g_w: f64,
    pub v_i: f64,
    pub avoid_turn_radians: f64,
    pub avoid_turn_speed: f64,
    /// After a turn ends, collision evidence is discarded for this long so
    /// the turn's own image motion cannot trigger another one.
    pub avoid_refractory_s: f64,

    // camera
    pub frame_w: usize,
    pub frame_h: usize,
    pub fps: f64,
    pub fov_deg: f64,

    // world
    pub arena_w: f64,
    pub arena_h: f64,
    pub robot_diameter: f64,
    pub robot_height: f64,
    /// Camera position ahead of the robot centre, cm.
    pub camera_offset: f64,
    pub track_width: f64,
    pub max_speed: f64,
    pub wall_height: f64,
    pub texture_period: f64,
    pub wall_dark: u8,
    pub wall_light: u8,
    pub robot_luminance: u8,
    pub floor_luminance: u8,
    pub ceiling_luminance: u8,
    pub render_samples: usize,
    pub stall_timeout_s: f64,
    pub rng_seed: u64,

    // encounter bookkeeping
    pub encounter_radius: f64,
    pub frontal_cone_deg: f64,
    pub range_rate_threshold: f64,
    pub wall_ttc_s: f64,

    // open-loop stimulus courses
    pub loom_start_distance: f64,
    pub trans_range: f64,
}

impl Default for Params {
    fn default() -> Self {
        let bp_e = [0.25, 0.5, 0.25];
        // flat surround: a tapered one leaves too little contrast energy
        let bp_i = [1.0 / 7.0; 7];
        Self {
            n_i: 2,
            u: 1.0,
            w_e: Kernel::outer(&bp_e, &bp_e).expect("static kernel"),
            w_i: Kernel::outer(&bp_i, &bp_i).expect("static kernel"),
            tau1: 1.0,
            tau2: 100.0,

            w_l: Kernel::new(
                3,
                vec![0.125, 0.25, 0.125, 0.25, 0.0, 0.25, 0.125, 0.25, 0.125],
            )
            .expect("static kernel"),
            w1: 0.3,
            w2: 0.6,
            tau_s: 150.0,
            lgmd1_theta: Theta {
                on: 1.0,
                off: 0.5,
                product: 0.0,
            },
            lgmd2_theta: Theta {
                on: 0.0,
                off: 1.0,
                product: 0.0,
            },
            d: 3,
            n_c: 4,
            k_sig: 0.118,
            delta_c: 0.0,
            k_sp: 6.0,
            t_sp_lgmd: 0.7,
            t_sp_dsn: 0.2,

            n_sp: 6,
            n_t: 4,
            sigma1: 15.0,
            tau3: 10.0,
            g_v: 1.0,
            g_w: 10.0,
            v_i: 10.0,
            avoid_turn_radians: 3.5,
            avoid_turn_speed: 35.0,
            avoid_refractory_s: 0.3,

            frame_w: 99,
            frame_h: 72,
            fps: 30.0,
            fov_deg: 70.0,

            arena_w: 70.0,
            arena_h: 55.0,
            robot_diameter: 4.0,
            robot_height: 3.0,
            camera_offset: 0.0,
            track_width: 4.0,
            max_speed: 35.0,
            wall_height: 6.0,
            texture_period: 1.0,
            wall_dark: 80,
            wall_light: 255,
            robot_luminance: 0,
            floor_luminance: 255,
            ceiling_luminance: 255,
            render_samples: 4,
            stall_timeout_s: 1.0,
            rng_seed: 1,

            encounter_radius: 15.0,
            frontal_cone_deg: 25.0,
            range_rate_threshold: 1.0,
            wall_ttc_s: 1.5,

            loom_start_distance: 40.0,
            trans_range: 5.0,
        }
    }
}

/// Parses a `key=value` config document on top of the defaults.
pub fn load_params(config_text: &str) -> Result<Params> {
    let mut params = Params::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in config_text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
        params.set(key, value).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                line: idx + 1,
                message,
            },
            other => other,
        })?;
    }
    params.validate()?;
    Ok(params)
}

impl Params {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        load_params(&std::fs::read_to_string(path)?)
    }

    /// Frame period in milliseconds.
    pub fn dt_ms(&self) -> f64 {
        1000.0 / self.fps
    }

    pub fn dt_s(&self) -> f64 {
        1.0 / self.fps
    }

    pub fn pixel_count(&self) -> usize {
        self.frame_w * self.frame_h
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_diameter / 2.0
    }

    /// Pinhole focal length in pixels for the horizontal field of view.
    pub fn focal_px(&self) -> f64 {
        (self.frame_w as f64 / 2.0) / (self.fov_deg.to_radians() / 2.0).tan()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_i" => self.n_i = parse(key, value)?,
            "u" => self.u = parse(key, value)?,
            "w_e" => self.w_e = parse_kernel(key, value)?,
            "w_i" => self.w_i = parse_kernel(key, value)?,
            "tau1" => self.tau1 = parse(key, value)?,
            "tau2" => self.tau2 = parse(key, value)?,
            "w_l" => self.w_l = parse_kernel(key, value)?,
            "w1" => self.w1 = parse(key, value)?,
            "w2" => self.w2 = parse(key, value)?,
            "tau_s" => self.tau_s = parse(key, value)?,
            "lgmd1_theta1" => self.lgmd1_theta.on = parse(key, value)?,
            "lgmd1_theta2" => self.lgmd1_theta.off = parse(key, value)?,
            "lgmd1_theta3" => self.lgmd1_theta.product = parse(key, value)?,
            "lgmd2_theta1" => self.lgmd2_theta.on = parse(key, value)?,
            "lgmd2_theta2" => self.lgmd2_theta.off = parse(key, value)?,
            "lgmd2_theta3" => self.lgmd2_theta.product = parse(key, value)?,
            "d" => self.d = parse(key, value)?,
            "n_c" => self.n_c = parse(key, value)?,
            "k_sig" => self.k_sig = parse(key, value)?,
            "delta_c" => self.delta_c = parse(key, value)?,
            "k_sp" => self.k_sp = parse(key, value)?,
            "t_sp_lgmd" => self.t_sp_lgmd = parse(key, value)?,
            "t_sp_dsn" => self.t_sp_dsn = parse(key, value)?,
            "n_sp" => self.n_sp = parse(key, value)?,
            "n_t" => self.n_t = parse(key, value)?,
            "sigma1" => self.sigma1 = parse(key, value)?,
            "tau3" => self.tau3 = parse(key, value)?,
            "g_v" => self.g_v = parse(key, value)?,
            "g_w" => self.g_w = parse(key, value)?,
            "v_i" => self.v_i = parse(key, value)?,
            "avoid_turn_radians" => self.avoid_turn_radians = parse(key, value)?,
            "avoid_turn_speed" => self.avoid_turn_speed = parse(key, value)?,
            "avoid_refractory_s" => self.avoid_refractory_s = parse(key, value)?,
            "frame_w" => self.frame_w = parse(key, value)?,
            "frame_h" => self.frame_h = parse(key, value)?,
            "fps" => self.fps = parse(key, value)?,
            "fov_deg" => self.fov_deg = parse(key, value)?,
            "arena_w" => self.arena_w = parse(key, value)?,
            "arena_h" => self.arena_h = parse(key, value)?,
            "robot_diameter" => self.robot_diameter = parse(key, value)?,
            "robot_height" => self.robot_height = parse(key, value)?,
            "camera_offset" => self.camera_offset = parse(key, value)?,
            "track_width" => self.track_width = parse(key, value)?,
            "max_speed" => self.max_speed = parse(key, value)?,
            "wall_height" => self.wall_height = parse(key, value)?,
            "texture_period" => self.texture_period = parse(key, value)?,
            "wall_dark" => self.wall_dark = parse(key, value)?,
            "wall_light" => self.wall_light = parse(key, value)?,
            "robot_luminance" => self.robot_luminance = parse(key, value)?,
            "floor_luminance" => self.floor_luminance = parse(key, value)?,
            "ceiling_luminance" => self.ceiling_luminance = parse(key, value)?,
            "render_samples" => self.render_samples = parse(key, value)?,
            "stall_timeout_s" => self.stall_timeout_s = parse(key, value)?,
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "encounter_radius" => self.encounter_radius = parse(key, value)?,
            "frontal_cone_deg" => self.frontal_cone_deg = parse(key, value)?,
            "range_rate_threshold" => self.range_rate_threshold = parse(key, value)?,
            "wall_ttc_s" => self.wall_ttc_s = parse(key, value)?,
            "loom_start_distance" => self.loom_start_distance = parse(key, value)?,
            "trans_range" => self.trans_range = parse(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Serializes every key; [`load_params`] reproduces the same value.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let kernel = |k: &Kernel| {
            k.weights()
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key}={value}");
        };
        put("n_i", self.n_i.to_string());
        put("u", self.u.to_string());
        put("w_e", kernel(&self.w_e));
        put("w_i", kernel(&self.w_i));
        put("tau1", self.tau1.to_string());
        put("tau2", self.tau2.to_string());
        put("w_l", kernel(&self.w_l));
        put("w1", self.w1.to_string());
        put("w2", self.w2.to_string());
        put("tau_s", self.tau_s.to_string());
        put("lgmd1_theta1", self.lgmd1_theta.on.to_string());
        put("lgmd1_theta2", self.lgmd1_theta.off.to_string());
        put("lgmd1_theta3", self.lgmd1_theta.product.to_string());
        put("lgmd2_theta1", self.lgmd2_theta.on.to_string());
        put("lgmd2_theta2", self.lgmd2_theta.off.to_string());
        put("lgmd2_theta3", self.lgmd2_theta.product.to_string());
        put("d", self.d.to_string());
        put("n_c", self.n_c.to_string());
        put("k_sig", self.k_sig.to_string());
        put("delta_c", self.delta_c.to_string());
        put("k_sp", self.k_sp.to_string());
        put("t_sp_lgmd", self.t_sp_lgmd.to_string());
        put("t_sp_dsn", self.t_sp_dsn.to_string());
        put("n_sp", self.n_sp.to_string());
        put("n_t", self.n_t.to_string());
        put("sigma1", self.sigma1.to_string());
        put("tau3", self.tau3.to_string());
        put("g_v", self.g_v.to_string());
        put("g_w", self.g_w.to_string());
        put("v_i", self.v_i.to_string());
        put("avoid_turn_radians", self.avoid_turn_radians.to_string());
        put("avoid_turn_speed", self.avoid_turn_speed.to_string());
        put("avoid_refractory_s", self.avoid_refractory_s.to_string());
        put("frame_w", self.frame_w.to_string());
        put("frame_h", self.frame_h.to_string());
        put("fps", self.fps.to_string());
        put("fov_deg", self.fov_deg.to_string());
        put("arena_w", self.arena_w.to_string());
        put("arena_h", self.arena_h.to_string());
        put("robot_diameter", self.robot_diameter.to_string());
        put("robot_height", self.robot_height.to_string());
        put("camera_offset", self.camera_offset.to_string());
        put("track_width", self.track_width.to_string());
        put("max_speed", self.max_speed.to_string());
        put("wall_height", self.wall_height.to_string());
        put("texture_period", self.texture_period.to_string());
        put("wall_dark", self.wall_dark.to_string());
        put("wall_light", self.wall_light.to_string());
        put("robot_luminance", self.robot_luminance.to_string());
        put("floor_luminance", self.floor_luminance.to_string());
        put("ceiling_luminance", self.ceiling_luminance.to_string());
        put("render_samples", self.render_samples.to_string());
        put("stall_timeout_s", self.stall_timeout_s.to_string());
        put("rng_seed", self.rng_seed.to_string());
        put("encounter_radius", self.encounter_radius.to_string());
        put("frontal_cone_deg", self.frontal_cone_deg.to_string());
        put("range_rate_threshold", self.range_rate_threshold.to_string());
        put("wall_ttc_s", self.wall_ttc_s.to_string());
        put("loom_start_distance", self.loom_start_distance.to_string());
        put("trans_range", self.trans_range.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        check(self.n_i >= 1, "n_i", "must be at least 1")?;
        check(self.u.is_finite(), "u", "must be finite")?;
        check(self.tau1 > 0.0, "tau1", "must be positive")?;
        check(
            self.tau1 < self.tau2,
            "tau1",
            format!("must be below tau2 ({} >= {})", self.tau1, self.tau2),
        )?;
        check_range("tau_s", self.tau_s, 10.0, 200.0)?;
        check_band_pass("w_e", &self.w_e)?;
        check_band_pass("w_i", &self.w_i)?;
        check(
            self.w_i.size() == 2 * self.w_e.size() + 1,
            "w_i",
            format!(
                "side must be twice the w_e side plus the centre ({} vs {})",
                self.w_i.size(),
                self.w_e.size()
            ),
        )?;
        check(
            self.w_l.weights().iter().all(|&w| w == 0.0 || (0.125..=0.25).contains(&w)),
            "w_l",
            "each tap must be 0 or within [1/8, 1/4]",
        )?;
        check_range("w1", self.w1, 0.0, 1.0)?;
        check_range("w2", self.w2, 0.0, 1.0)?;
        for (key, v) in [
            ("lgmd1_theta1", self.lgmd1_theta.on),
            ("lgmd1_theta2", self.lgmd1_theta.off),
            ("lgmd1_theta3", self.lgmd1_theta.product),
            ("lgmd2_theta1", self.lgmd2_theta.on),
            ("lgmd2_theta2", self.lgmd2_theta.off),
            ("lgmd2_theta3", self.lgmd2_theta.product),
        ] {
            check_range(key, v, 0.0, 1.0)?;
        }
        check((2..=4).contains(&self.d), "d", "must be within 2..=4")?;
        check((2..=4).contains(&self.n_c), "n_c", "must be within 2..=4")?;
        check_range("k_sig", self.k_sig, 0.1, 0.6)?;
        check_range("delta_c", self.delta_c, 0.0, 1.0)?;
        check_range("k_sp", self.k_sp, 1.0, 6.0)?;
        check_range("t_sp_lgmd", self.t_sp_lgmd, 0.0, 1.0)?;
        check_range("t_sp_dsn", self.t_sp_dsn, 0.0, 1.0)?;
        check(
            self.t_sp_dsn < self.t_sp_lgmd,
            "t_sp_dsn",
            "must be below t_sp_lgmd",
        )?;
        check(self.n_sp > 0, "n_sp", "must be positive")?;
        check(self.n_t > 0, "n_t", "must be positive")?;
        check(self.sigma1.is_finite(), "sigma1", "must be finite")?;
        check(self.tau3 > 0.0, "tau3", "must be positive")?;
        check(self.g_v.is_finite(), "g_v", "must be finite")?;
        check(self.g_w.is_finite(), "g_w", "must be finite")?;
        check(self.max_speed > 0.0, "max_speed", "must be positive")?;
        check_range("v_i", self.v_i, 0.0, self.max_speed)?;
        check(
            self.avoid_turn_radians > std::f64::consts::PI,
            "avoid_turn_radians",
            "must exceed pi",
        )?;
        check(
            self.avoid_turn_speed > 0.0 && self.avoid_turn_speed <= self.max_speed,
            "avoid_turn_speed",
            "must be within (0, max_speed]",
        )?;
        check(
            self.avoid_refractory_s >= 0.0 && self.avoid_refractory_s.is_finite(),
            "avoid_refractory_s",
            "must be a non-negative number of seconds",
        )?;
        check(self.frame_w >= 3, "frame_w", "must be at least 3")?;
        check(self.frame_h >= 3, "frame_h", "must be at least 3")?;
        check(self.fps > 0.0, "fps", "must be positive")?;
        check(
            self.fov_deg > 0.0 && self.fov_deg < 180.0,
            "fov_deg",
            "must be within (0, 180)",
        )?;
        check(self.robot_diameter > 0.0, "robot_diameter", "must be positive")?;
        check(self.robot_height > 0.0, "robot_height", "must be positive")?;
        check(
            (0.0..=self.robot_radius()).contains(&self.camera_offset),
            "camera_offset",
            "must lie between the robot centre and its rim",
        )?;
        check(self.track_width > 0.0, "track_width", "must be positive")?;
        check(
            self.arena_w > 2.0 * self.robot_diameter,
            "arena_w",
            "must fit at least two robot diameters",
        )?;
        check(
            self.arena_h > 2.0 * self.robot_diameter,
            "arena_h",
            "must fit at least two robot diameters",
        )?;
        check(self.wall_height > 0.0, "wall_height", "must be positive")?;
        check(self.texture_period > 0.0, "texture_period", "must be positive")?;
        check(
            self.robot_luminance < self.wall_dark && self.robot_luminance < self.floor_luminance,
            "robot_luminance",
            "robots must render darker than walls and floor",
        )?;
        check(self.render_samples >= 1, "render_samples", "must be at least 1")?;
        check(self.stall_timeout_s > 0.0, "stall_timeout_s", "must be positive")?;
        check(
            self.encounter_radius > self.robot_diameter,
            "encounter_radius",
            "must exceed the robot diameter",
        )?;
        check_range("frontal_cone_deg", self.frontal_cone_deg, 0.0, self.fov_deg / 2.0)?;
        check(
            self.range_rate_threshold >= 0.0,
            "range_rate_threshold",
            "must be non-negative",
        )?;
        check(self.wall_ttc_s > 0.0, "wall_ttc_s", "must be positive")?;
        check(
            self.loom_start_distance > self.robot_diameter,
            "loom_start_distance",
            "must exceed the contact distance",
        )?;
        check(
            self.trans_range > self.robot_diameter,
            "trans_range",
            "must exceed the contact distance",
        )?;
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse {
        line: 0,
        message: format!("`{key}`: cannot parse `{value}`: {e}"),
    })
}

fn parse_kernel(key: &str, value: &str) -> Result<Kernel> {
    let weights = value
        .split(',')
        .map(|w| parse::<f64>(key, w.trim()))
        .collect::<Result<Vec<_>>>()?;
    Kernel::from_weights(weights).map_err(|e| Error::Parse {
        line: 0,
        message: format!("`{key}`: {e}"),
    })
}

fn check(ok: bool, key: &'static str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            key,
            message: message.into(),
        })
    }
}

fn check_range(key: &'static str, v: f64, lo: f64, hi: f64) -> Result<()> {
    check(
        v.is_finite() && v >= lo && v <= hi,
        key,
        format!("{v} is outside [{lo}, {hi}]"),
    )
}

fn check_band_pass(key: &'static str, k: &Kernel) -> Result<()> {
    check(
        (k.sum() - 1.0).abs() <= 1e-9,
        key,
        format!("weights must sum to 1, got {}", k.sum()),
    )?;
    check(
        k.weights()
            .iter()
            .all(|&w| (1.0 / 128.0..=0.25).contains(&w)),
        key,
        "each weight must lie within [1/128, 1/4]",
    )
}
