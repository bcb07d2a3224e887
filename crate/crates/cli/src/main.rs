use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use motion_vision::arena::{run_arena_with, write_event_log, write_trajectory, ArenaOptions};
use motion_vision::pgm::read_dir_frames;
use motion_vision::stimulus::{gen_course_rep, CourseKind};
use motion_vision::telemetry::{run_bench, run_openloop, write_telemetry};
use motion_vision::{Model, Params};

#[derive(Parser)]
#[command(name = "motion-vision", version, about = "Spiking motion perception for micro-robots")]
struct Cli {
    /// Parameter file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `rng_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Where output files go; created if missing.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = ModelArg::Full)]
    model: ModelArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lgmd2,
    Lgmds,
    Full,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Lgmd2 => Model::Lgmd2Only,
            ModelArg::Lgmds => Model::Lgmds,
            ModelArg::Full => Model::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a stimulus course to numbered PGM frames plus a manifest.
    Gen(CourseArgs),
    /// Run the pipeline over a frame directory or a generated course.
    Openloop(OpenloopArgs),
    /// Closed-loop multi-robot arena run.
    Arena(ArenaArgs),
    /// Measure pipeline throughput on synthetic frames.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CourseArgs {
    /// looming, recession, trans-r, trans-l or angular:<deg>
    #[arg(long)]
    kind: String,
    /// Target speed, cm/s.
    #[arg(long, default_value_t = 8.0)]
    speed: f64,
    /// Repetition index; shifts the wall texture.
    #[arg(long, default_value_t = 0)]
    repetition: u64,
}

#[derive(Args)]
struct OpenloopArgs {
    /// Directory of numbered PGM frames.
    #[arg(long, conflicts_with = "kind")]
    frames: Option<PathBuf>,
    /// Generate this course instead of reading frames.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long, default_value_t = 8.0)]
    speed: f64,
    #[arg(long, default_value_t = 0)]
    repetition: u64,
}

#[derive(Args)]
struct ArenaArgs {
    #[arg(long, default_value_t = 4)]
    robots: usize,
    /// Simulated duration in seconds.
    #[arg(long, default_value_t = 60.0)]
    seconds: f64,
    /// Also write every robot pose per tick.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10.0)]
    seconds: f64,
    /// Multiplies the frame width and height.
    #[arg(long, default_value_t = 1)]
    scale: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut params = match &cli.config {
        Some(path) => Params::from_file(path).with_context(|| format!("loading {}", path.display()))?,
        None => Params::default(),
    };
    if let Some(seed) = cli.seed {
        params.rng_seed = seed;
    }
    params.validate()?;
    let model = Model::from(cli.model);
    let out = cli.out_dir.as_path();

    match cli.command {
        Command::Gen(args) => {
            let kind: CourseKind = args.kind.parse()?;
            let course = gen_course_rep(kind, args.speed, &params, args.repetition)?;
            course.write_dir(out)?;
            println!("wrote {} frames of {kind} to {}", course.frames.len(), out.display());
        }
        Command::Openloop(args) => {
            let frames = match (&args.frames, &args.kind) {
                (Some(dir), None) => {
                    let frames = read_dir_frames(dir)?;
                    if frames.is_empty() {
                        bail!("no frame_*.pgm files in {}", dir.display());
                    }
                    frames
                }
                (None, Some(kind)) => gen_course_rep(kind.parse()?, args.speed, &params, args.repetition)?.frames,
                _ => bail!("give either --frames <dir> or --kind <course>"),
            };
            let t = run_openloop(&frames, &params, model)?;
            std::fs::create_dir_all(out)?;
            write_telemetry(&t.rows, create(&out.join("telemetry.csv"))?)?;
            t.summary.write_csv(create(&out.join("summary.csv"))?)?;
            let s = &t.summary;
            println!(
                "{} frames: lgmd1={} lgmd2={} dsn_r={} dsn_l={}",
                s.frames, s.lgmd1, s.lgmd2, s.dsn_r, s.dsn_l
            );
        }
        Command::Arena(args) => {
            let run = run_arena_with(
                &params,
                &ArenaOptions {
                    n_robots: args.robots,
                    duration_s: args.seconds,
                    model,
                    record_trajectory: args.trajectory,
                },
            )?;
            std::fs::create_dir_all(out)?;
            write_event_log(&run.events, create(&out.join("events.csv"))?)?;
            std::fs::write(out.join("metrics.csv"), run.metrics.summary_csv())?;
            std::fs::write(out.join("params.txt"), params.to_config_text())?;
            if args.trajectory {
                write_trajectory(&run.trajectory, create(&out.join("trajectory.csv"))?)?;
            }
            let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.1}%"));
            println!(
                "{model}: {} events over {} ticks, SR1 {} SR2 {}",
                run.events.len(),
                run.ticks,
                pct(run.metrics.sr1),
                pct(run.metrics.sr2)
            );
        }
        Command::Bench(args) => {
            if args.scale == 0 {
                bail!("--scale must be at least 1");
            }
            params.frame_w *= args.scale;
            params.frame_h *= args.scale;
            let report = run_bench(&params, args.seconds)?;
            println!(
                "{}x{}: {} frames in {:.2} s, {:.1} fps",
                report.width,
                report.height,
                report.frames,
                report.elapsed.as_secs_f64(),
                report.fps
            );
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}
