use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vfr_core::avatar::{GarmentSpec, UserSpec};
use vfr_core::io::{
    export_multiview, load_user_spec, resolve_garment, run_to_directory, write_anchor,
};
use vfr_core::metrics::{evaluate_protocol, score_video, GptEndpoint, Scores};
use vfr_core::motion::parse_motion_track;
use vfr_core::pipeline::{run_in_memory, GenerationRequest, MotionSource, Task, VariantFlags};
use vfr_core::GenerationConfig;

#[derive(Parser)]
#[command(
    name = "vfr",
    version,
    about = "Long try-on video generation and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the 360° anchor clip (Task 1) at base rate, with its digest.
    Anchor {
        #[command(flatten)]
        subject: Subject,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a video for a task or a motion track file.
    Generate(GenerateArgs),
    /// Score a generated video directory.
    Evaluate {
        #[arg(long)]
        video: PathBuf,
        #[arg(long, value_parser = parse_task)]
        task: Task,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// `stub:a,b,c,d,e` or an http(s) URL; falls back to VFR_GPT_ENDPOINT.
        #[arg(long)]
        gpt_endpoint: Option<String>,
    },
    /// Run all five variants over several seeds and tabulate the scores.
    Ablate {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        subject: Subject,
        /// Directory for ablation.md and ablation.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Copy an anchor's frames next to a camera file for reconstruction tools.
    ExportMultiview {
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Subject {
    /// User spec file (TOML); the default user when omitted.
    #[arg(long)]
    user: Option<PathBuf>,
    /// Built-in garment name (top, bottoms, dress) or a garment spec file.
    #[arg(long, default_value = "top")]
    garment: String,
    /// Config file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    subject: Subject,
    /// Motion track file.
    #[arg(long, conflicts_with = "task", required_unless_present = "task")]
    motion: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    variant: VariantFlags,
    /// Length in seconds, for tasks with a variable duration.
    #[arg(long, requires = "task")]
    duration: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    let id: u8 = s
        .parse()
        .map_err(|_| format!("'{s}' is not a task number"))?;
    Task::from_id(id).map_err(|e| e.to_string())
}

fn parse_variant(s: &str) -> std::result::Result<VariantFlags, String> {
    VariantFlags::from_name(s).map_err(|e| e.to_string())
}

/// An argument problem found after parsing; exits like a clap error.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

impl Subject {
    fn load(&self) -> Result<(UserSpec, GarmentSpec, GenerationConfig)> {
        let user = match &self.user {
            Some(p) => load_user_spec(p).with_context(|| format!("user spec {}", p.display()))?,
            None => UserSpec::default(),
        };
        let garment =
            resolve_garment(&self.garment).with_context(|| format!("garment {}", self.garment))?;
        let mut config = match &self.config {
            Some(p) => {
                GenerationConfig::load(p).with_context(|| format!("config {}", p.display()))?
            }
            None => GenerationConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok((user, garment, config))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Anchor { subject, out } => {
            let (user, garment, config) = subject.load()?;
            let request = GenerationRequest::new(
                user,
                garment,
                MotionSource::Task {
                    task: Task::Anchor360,
                    seconds: None,
                },
                VariantFlags::FULL,
                config,
            );
            let m = write_anchor(&request, &out)?;
            println!("{} anchor frames in {}", m.frame_count, out.display());
        }
        Command::Generate(args) => generate(args)?,
        Command::Evaluate {
            video,
            task,
            report,
            gpt_endpoint,
        } => {
            let endpoint = match gpt_endpoint {
                Some(s) => Some(GptEndpoint::parse(&s).map_err(|e| Usage(e.to_string()))?),
                None => GptEndpoint::from_env()?,
            };
            let r = evaluate_protocol(&video, task, endpoint.as_ref())?;
            for w in &r.warnings {
                log::warn!("{w}");
            }
            match report {
                Some(p) => {
                    fs::write(&p, r.to_json()).with_context(|| format!("write {}", p.display()))?
                }
                None => println!("{}", r.to_json()),
            }
        }
        Command::Ablate {
            task,
            seeds,
            subject,
            out,
        } => ablate(task, seeds, &subject, out.as_deref())?,
        Command::ExportMultiview { anchor, out } => {
            let export = export_multiview(&anchor, &out)?;
            println!("{} views written to {}", export.frames.len(), out.display());
        }
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (user, garment, config) = args.subject.load()?;
    let motion = match (&args.motion, args.task) {
        (Some(path), _) => {
            let file = fs::File::open(path).with_context(|| format!("open {}", path.display()))?;
            MotionSource::Track(
                parse_motion_track(BufReader::new(file))
                    .with_context(|| format!("motion track {}", path.display()))?,
            )
        }
        (None, Some(task)) => {
            if let Some(d) = args.duration {
                let (lo, hi) = task.duration_range();
                if !(lo..=hi).contains(&d) {
                    bail!(Usage(format!(
                        "--duration {d} is outside task {} range {lo}..={hi}",
                        task.id()
                    )));
                }
            }
            MotionSource::Task {
                task,
                seconds: args.duration,
            }
        }
        (None, None) => unreachable!("clap requires --motion or --task"),
    };
    let request = GenerationRequest::new(user, garment, motion, args.variant, config);
    let m = run_to_directory(&request, &args.out)?;
    println!(
        "{} frames at {} FPS ({:.1} s) in {}",
        m.frame_count,
        m.fps,
        m.duration_s(),
        args.out.display()
    );
    Ok(())
}

fn ablate(task: Task, seeds: u64, subject: &Subject, out: Option<&Path>) -> Result<()> {
    if seeds == 0 {
        bail!(Usage("--seeds must be at least 1".into()));
    }
    let (user, garment, config) = subject.load()?;
    let first = config.seed;
    let mut rows = Vec::new();
    for (name, flags) in VariantFlags::ALL {
        let mut per_seed = Vec::new();
        for seed in first..first + seeds {
            let request = GenerationRequest::new(
                user.clone(),
                garment.clone(),
                MotionSource::Task {
                    task,
                    seconds: None,
                },
                flags,
                GenerationConfig {
                    seed,
                    ..config.clone()
                },
            );
            let (video, _) =
                run_in_memory(&request).with_context(|| format!("{name} seed {seed}"))?;
            per_seed.push(score_video(&video)?);
            log::info!("{name} seed {seed} done");
        }
        rows.push((name, per_seed));
    }
    let table = table(task, &rows);
    print!("{table}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("create {}", dir.display()))?;
        fs::write(dir.join("ablation.md"), &table)?;
        let json: Vec<serde_json::Value> = rows
            .iter()
            .map(|(name, s)| {
                serde_json::json!({
                    "variant": name,
                    "mean": mean(s),
                    "per_seed": s,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "task": task.id(),
            "seeds": (first..first + seeds).collect::<Vec<_>>(),
            "rows": json,
        });
        fs::write(
            dir.join("ablation.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
    }
    Ok(())
}

fn mean(scores: &[Scores]) -> Scores {
    let n = scores.len() as f64;
    Scores {
        subject_consistency: scores.iter().map(|s| s.subject_consistency).sum::<f64>() / n,
        background_consistency: scores.iter().map(|s| s.background_consistency).sum::<f64>() / n,
        motion_smoothness: scores.iter().map(|s| s.motion_smoothness).sum::<f64>() / n,
    }
}

fn display_name(variant: &str) -> &str {
    match variant {
        "full" => "Full",
        "np" => "NP (no prefix)",
        "na" => "NA (no anchor)",
        "dnd" => "D&D",
        "nr" => "NR (no refiner)",
        other => other,
    }
}

fn table(task: Task, rows: &[(&str, Vec<Scores>)]) -> String {
    let seeds = rows.first().map_or(0, |(_, s)| s.len());
    let mut t = format!("Task {}, mean over {seeds} seeds\n\n", task.id());
    t.push_str("| Variant | Subject Consistency | Background Consistency | Motion Smoothness |\n");
    t.push_str("|---|---:|---:|---:|\n");
    for (name, s) in rows {
        let m = mean(s);
        let _ = writeln!(
            t,
            "| {} | {:.2} | {:.2} | {:.2} |",
            display_name(name),
            m.subject_consistency,
            m.background_consistency,
            m.motion_smoothness
        );
    }
    t
}
