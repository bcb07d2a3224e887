//! Open-loop runs over frame sequences, per-frame CSV telemetry and the
//! throughput benchmark.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::field::Frame;
use crate::neurons::NeuronFrameOutput;
use crate::params::Params;
use crate::pipeline::Model;
use crate::recognizer::MotionPattern;

/// First line of every telemetry file. Bump the version when columns change.
pub const TELEMETRY_SCHEMA: &str = "# schema=telemetry/1";

pub const TELEMETRY_HEADER: [&str; 13] = [
    "frame",
    "u_lgmd1",
    "u_lgmd2",
    "u_dsn",
    "spikes_lgmd1",
    "spikes_lgmd2",
    "spikes_dsn_r",
    "spikes_dsn_l",
    "pattern",
    "behavior",
    "tr_prime",
    "p_r",
    "p_l",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRow {
    pub frame: usize,
    pub neurons: NeuronFrameOutput,
    pub pattern: MotionPattern,
    pub behavior: String,
    pub tr_prime: f64,
    pub p_r: f64,
    pub p_l: f64,
}

/// Spike totals and pattern counts over one sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeSummary {
    pub frames: usize,
    pub lgmd1: u64,
    pub lgmd2: u64,
    pub dsn_r: u64,
    pub dsn_l: u64,
    pub patterns: BTreeMap<&'static str, usize>,
}

impl SpikeSummary {
    pub fn from_rows(rows: &[TelemetryRow]) -> Self {
        let mut s = SpikeSummary {
            frames: rows.len(),
            patterns: MotionPattern::ALL.iter().map(|p| (p.as_str(), 0)).collect(),
            ..Default::default()
        };
        for r in rows {
            s.lgmd1 += r.neurons.spikes_lgmd1 as u64;
            s.lgmd2 += r.neurons.spikes_lgmd2 as u64;
            s.dsn_r += r.neurons.spikes_dsn_r as u64;
            s.dsn_l += r.neurons.spikes_dsn_l as u64;
            *s.patterns.entry(r.pattern.as_str()).or_default() += 1;
        }
        s
    }

    pub fn lgmd(&self) -> u64 {
        self.lgmd1 + self.lgmd2
    }

    pub fn dsn(&self) -> u64 {
        self.dsn_r + self.dsn_l
    }

    pub fn pattern_count(&self, p: MotionPattern) -> usize {
        self.patterns.get(p.as_str()).copied().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value"])?;
        w.write_record(["frames", &self.frames.to_string()])?;
        w.write_record(["spikes_lgmd1", &self.lgmd1.to_string()])?;
        w.write_record(["spikes_lgmd2", &self.lgmd2.to_string()])?;
        w.write_record(["spikes_dsn_r", &self.dsn_r.to_string()])?;
        w.write_record(["spikes_dsn_l", &self.dsn_l.to_string()])?;
        for (name, n) in &self.patterns {
            w.write_record([format!("pattern_{name}"), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Telemetry {
    pub rows: Vec<TelemetryRow>,
    pub summary: SpikeSummary,
}

/// Feeds `frames` through one agent. The agent never moves, so behavior
/// and wheel powers are what the controller would command.
pub fn run_openloop(frames: &[Frame], params: &Params, model: Model) -> Result<Telemetry> {
    params.validate()?;
    let mut agent = Agent::new(params, model, params.rng_seed);
    let mut rows = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let step = agent.step(frame)?;
        rows.push(TelemetryRow {
            frame: i,
            neurons: step.neurons,
            pattern: step.pattern,
            behavior: step.behavior.as_str().to_string(),
            tr_prime: step.tr_prime,
            p_r: step.powers.p_r,
            p_l: step.powers.p_l,
        });
    }
    let summary = SpikeSummary::from_rows(&rows);
    Ok(Telemetry { rows, summary })
}

pub fn write_telemetry<W: Write>(rows: &[TelemetryRow], mut out: W) -> Result<()> {
    writeln!(out, "{TELEMETRY_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TELEMETRY_HEADER)?;
    for r in rows {
        let n = &r.neurons;
        w.write_record([
            r.frame.to_string(),
            n.u_lgmd1.to_string(),
            n.u_lgmd2.to_string(),
            n.u_dsn.to_string(),
            n.spikes_lgmd1.to_string(),
            n.spikes_lgmd2.to_string(),
            n.spikes_dsn_r.to_string(),
            n.spikes_dsn_l.to_string(),
            r.pattern.as_str().to_string(),
            r.behavior.clone(),
            r.tr_prime.to_string(),
            r.p_r.to_string(),
            r.p_l.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_telemetry<R: BufRead>(mut input: R) -> Result<Vec<TelemetryRow>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim_end() != TELEMETRY_SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "expected `{TELEMETRY_SCHEMA}` on the first line, got `{}`",
            first.trim_end()
        )));
    }
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?;
    if header.iter().ne(TELEMETRY_HEADER) {
        return Err(Error::InvalidArgument(format!("unexpected telemetry header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record?;
        let bad = |col: usize| Error::InvalidArgument(format!("bad {} value `{}`", TELEMETRY_HEADER[col], &rec[col]));
        let f = |col: usize| rec[col].parse::<f64>().map_err(|_| bad(col));
        let u = |col: usize| rec[col].parse::<u32>().map_err(|_| bad(col));
        rows.push(TelemetryRow {
            frame: rec[0].parse().map_err(|_| bad(0))?,
            neurons: NeuronFrameOutput {
                u_lgmd1: f(1)?,
                u_lgmd2: f(2)?,
                u_dsn: f(3)?,
                spikes_lgmd1: u(4)?,
                spikes_lgmd2: u(5)?,
                spikes_dsn_r: u(6)?,
                spikes_dsn_l: u(7)?,
            },
            pattern: rec[8].parse()?,
            behavior: rec[9].to_string(),
            tr_prime: f(10)?,
            p_r: f(11)?,
            p_l: f(12)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub elapsed: Duration,
    pub fps: f64,
}

/// Number of distinct synthetic frames cycled through by the benchmark.
const BENCH_LOOP: usize = 64;

/// Runs the full model plus recognizer and motor controller on synthetic
/// frames for at least `seconds` of wall time.
pub fn run_bench(params: &Params, seconds: f64) -> Result<BenchReport> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "benchmark duration must be positive, got {seconds}"
        )));
    }
    params.validate()?;
    let frames: Vec<Frame> = (0..BENCH_LOOP)
        .map(|k| synthetic_frame(params.frame_w, params.frame_h, k))
        .collect();
    let mut agent = Agent::new(params, Model::Full, params.rng_seed);
    let budget = Duration::from_secs_f64(seconds);
    let start = Instant::now();
    let mut count = 0;
    loop {
        agent.step(&frames[count % BENCH_LOOP])?;
        count += 1;
        if start.elapsed() >= budget {
            break;
        }
    }
    let elapsed = start.elapsed();
    Ok(BenchReport {
        width: params.frame_w,
        height: params.frame_h,
        frames: count,
        elapsed,
        fps: count as f64 / elapsed.as_secs_f64(),
    })
}

/// Drifting stripes with a dark disc that grows and shrinks, so every
/// stage of the pipeline has work to do.
pub fn synthetic_frame(width: usize, height: usize, k: usize) -> Frame {
    let phase = k as f64 * 1.7;
    let t = (k % BENCH_LOOP) as f64 / BENCH_LOOP as f64;
    let radius = (0.1 + 0.3 * (std::f64::consts::PI * t).sin()) * height as f64;
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let v = if dx * dx + dy * dy < radius * radius {
                20.0
            } else {
                160.0 + 80.0 * ((x as f64 + phase) * 0.4).sin()
            };
            pixels.push(v as u8);
        }
    }
    Frame::new(width, height, pixels).expect("synthetic frame matches its size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_frames_stay_at_baseline() {
        let p = Params::default();
        let frames = vec![Frame::filled(p.frame_w, p.frame_h, 123); 10];
        let t = run_openloop(&frames, &p, Model::Full).unwrap();
        for r in &t.rows {
            assert_eq!(r.neurons, NeuronFrameOutput::BASELINE);
            assert_eq!(r.pattern, MotionPattern::Irrelevant);
        }
        assert_eq!(t.summary.pattern_count(MotionPattern::Irrelevant), 10);
    }

    #[test]
    fn csv_round_trip() {
        let p = Params::default();
        let frames: Vec<_> = (0..20).map(|k| synthetic_frame(p.frame_w, p.frame_h, k)).collect();
        let t = run_openloop(&frames, &p, Model::Full).unwrap();
        let mut buf = Vec::new();
        write_telemetry(&t.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(TELEMETRY_SCHEMA));
        let back = read_telemetry(buf.as_slice()).unwrap();
        assert_eq!(back, t.rows);
        assert_eq!(SpikeSummary::from_rows(&back), t.summary);
    }

    #[test]
    fn rejects_wrong_schema() {
        let text = "frame,u\n0,1\n";
        assert!(read_telemetry(text.as_bytes()).is_err());
    }

    #[test]
    fn wrong_frame_size_is_an_error() {
        let p = Params::default();
        let frames = vec![Frame::filled(10, 10, 0)];
        assert!(matches!(
            run_openloop(&frames, &p, Model::Full),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bench_rejects_zero_duration() {
        assert!(run_bench(&Params::default(), 0.0).is_err());
        assert!(run_bench(&Params::default(), -1.0).is_err());
    }
}
