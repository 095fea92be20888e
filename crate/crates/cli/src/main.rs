use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use zoolog_core::dataset::{load_rule_program, load_sets, Dataset, DatasetAskError, DatasetConfig};
use zoolog_core::grounding::{ground, DetectionFormat, DEFAULT_THRESHOLD};
use zoolog_core::overlay::{render_overlay, ImageRef};
use zoolog_core::query::TaskLabel;
use zoolog_core::reasoner::{Answer, AskError, Payload};
use zoolog_service::Store;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "zoolog", version, about = "Answer counting, existence and location questions about animals in detected images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground a detection file and print one logic program per image.
    Ingest {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value = "json")]
        format: DetectionFormat,
        #[arg(long)]
        images: PathBuf,
        /// Class names file, one label per line (YOLO input).
        #[arg(long)]
        names: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Rule file; defaults to the built-in existence rule.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Write `<id>.pl` files here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer one question about one image and print the answer as JSON.
    Ask {
        #[arg(long)]
        image: String,
        #[arg(long)]
        question: String,
        /// Write an SVG overlay here when the question asks for locations.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Inline the image into the overlay instead of linking it.
        #[arg(long)]
        embed_image: bool,
        #[arg(long, env = "ZOOLOG_DATASET", default_value = "zoolog.toml")]
        dataset: PathBuf,
    },
    /// Interactive question loop.
    Repl {
        #[arg(long, env = "ZOOLOG_DATASET", default_value = "zoolog.toml")]
        dataset: PathBuf,
    },
    /// Check answers against a fixture file of expected answers.
    Eval {
        #[arg(long, env = "ZOOLOG_DATASET", default_value = "zoolog.toml")]
        dataset: PathBuf,
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `bind` address.
        #[arg(long)]
        bind: Option<String>,
    },
}

/// An error message paired with the exit code it maps to.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<(u8, E)> for Failure {
    fn from((code, e): (u8, E)) -> Self {
        Failure(code, e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure(EXIT_USAGE, e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest {
            detections,
            format,
            images,
            names,
            threshold,
            rules,
            out,
        } => {
            let mut cfg = DatasetConfig::new(detections, format);
            cfg.images = Some(images);
            cfg.names = names;
            cfg.threshold = threshold;
            cfg.rules = rules;
            ingest(&cfg, out.as_deref())
        }
        Command::Ask {
            image,
            question,
            overlay,
            embed_image,
            dataset,
        } => ask(&dataset, &image, &question, overlay.as_deref(), embed_image),
        Command::Repl { dataset } => repl(&dataset),
        Command::Eval { dataset, fixtures } => eval(&dataset, &fixtures),
        Command::Serve { config, bind } => serve(&config, bind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            ExitCode::from(code)
        }
    }
}

fn ingest(cfg: &DatasetConfig, out: Option<&Path>) -> Result<(), Failure> {
    if cfg.format == DetectionFormat::Yolo && cfg.names.is_none() {
        return Err(usage("--names is required for yolo input"));
    }
    if !(0.0..=1.0).contains(&cfg.threshold) {
        return Err(usage(format!("threshold {} outside [0, 1]", cfg.threshold)));
    }
    let rules = load_rule_program(cfg).map_err(usage)?;
    let sets = load_sets(cfg).map_err(usage)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    let mut stdout = io::stdout().lock();
    for set in &sets {
        let kb = ground(set, &rules).map_err(usage)?;
        let text = kb.program.to_string();
        match out {
            Some(dir) => {
                let path = dir.join(format!("{}.pl", set.image.id));
                fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            None => {
                let _ = writeln!(stdout, "% image {}\n{text}", set.image.id);
            }
        }
    }
    Ok(())
}

fn ask_failure(e: DatasetAskError) -> Failure {
    match &e {
        DatasetAskError::Ask(a) if a.is_parse_failure() => Failure(EXIT_PARSE, format!("{}: {e}", a.code())),
        DatasetAskError::Ask(AskError::Query(_)) => Failure(EXIT_PARSE, e.to_string()),
        _ => usage(e),
    }
}

fn ask(
    dataset: &Path,
    image: &str,
    question: &str,
    overlay: Option<&Path>,
    embed: bool,
) -> Result<(), Failure> {
    let ds = Dataset::load(dataset).map_err(usage)?;
    let ans = ds.ask(image, question).map_err(ask_failure)?;
    println!("{}", ans.to_json());
    if let Some(path) = overlay {
        if ans.task == TaskLabel::Location {
            let kb = ds.kb(image).expect("answered above");
            let mode = if embed { ImageRef::Embed } else { ImageRef::Link };
            let svg = render_overlay(&kb.image, &ans, mode).map_err(usage)?;
            fs::write(path, svg).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        } else {
            eprintln!("note: no overlay written for a {} question", ans.task);
        }
    }
    Ok(())
}

fn summary(ans: &Answer) -> String {
    let parts: Vec<String> = ans
        .entities
        .iter()
        .map(|e| match &ans.results[e] {
            Payload::Count(n) => format!("{e}: {n}"),
            Payload::Present(p) => format!("{e}: {}", if *p { "yes" } else { "no" }),
            Payload::Boxes(bs) => {
                let boxes: Vec<String> = bs
                    .iter()
                    .map(|b| format!("({}, {}, {}, {})", b.x1, b.y1, b.x2, b.y2))
                    .collect();
                format!("{e}: [{}]", boxes.join(", "))
            }
        })
        .collect();
    format!("{}: {}", ans.task, parts.join("; "))
}

fn repl(dataset: &Path) -> Result<(), Failure> {
    let ds = Dataset::load(dataset).map_err(usage)?;
    let interactive = io::stdin().is_terminal();
    let mut image: Option<String> = ds.kbs().next().map(|kb| kb.image.id.clone());
    let mut trace = false;
    let mut out = io::stdout().lock();
    let mut lines = io::stdin().lock().lines();
    loop {
        if interactive {
            let _ = write!(out, "{}> ", image.as_deref().unwrap_or("-"));
            let _ = out.flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            let mut words = cmd.split_whitespace();
            match (words.next(), words.next()) {
                (Some("quit" | "q" | "exit"), _) => break,
                (Some("image"), Some(id)) => {
                    if ds.kb(id).is_some() {
                        image = Some(id.to_string());
                        let _ = writeln!(out, "image {id}");
                    } else {
                        let _ = writeln!(out, "unknown image `{id}`");
                    }
                }
                (Some("images"), _) => {
                    for kb in ds.kbs() {
                        let counts: Vec<String> =
                            kb.class_counts.iter().map(|(c, n)| format!("{c}={n}")).collect();
                        let _ = writeln!(out, "{} {}x{} {}", kb.image.id, kb.image.width, kb.image.height, counts.join(" "));
                    }
                }
                (Some("trace"), Some(v @ ("on" | "off"))) => {
                    trace = v == "on";
                    let _ = writeln!(out, "trace {v}");
                }
                _ => {
                    let _ = writeln!(out, "commands: :image <id>, :images, :trace on|off, :quit");
                }
            }
            continue;
        }
        let Some(id) = image.as_deref() else {
            let _ = writeln!(out, "no image selected; use :image <id>");
            continue;
        };
        match ds.ask(id, line) {
            Ok(ans) => {
                let _ = writeln!(out, "{}", summary(&ans));
                if trace {
                    for step in &ans.trace {
                        let _ = writeln!(out, "  {} -> {}  [{}]", step.goal, step.outcome, step.clause);
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct FixtureLine {
    image_id: String,
    question: String,
    expected: Answer,
}

fn eval(dataset: &Path, fixtures: &Path) -> Result<(), Failure> {
    let ds = Dataset::load(dataset).map_err(usage)?;
    let text = fs::read_to_string(fixtures).map_err(|e| usage(format!("{}: {e}", fixtures.display())))?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: FixtureLine = serde_json::from_str(line)
            .map_err(|e| usage(format!("{} line {}: {e}", fixtures.display(), i + 1)))?;
        items.push((i + 1, item));
    }
    if items.is_empty() {
        return Err(usage(format!("{}: no fixtures", fixtures.display())));
    }

    let mut tally: BTreeMap<TaskLabel, (usize, usize)> = TaskLabel::ALL.into_iter().map(|t| (t, (0, 0))).collect();
    let mut failures = Vec::new();
    for (line, item) in &items {
        let entry = tally.get_mut(&item.expected.task).expect("every task is tallied");
        entry.1 += 1;
        match ds.ask(&item.image_id, &item.question) {
            Ok(ans) if ans.same_result(&item.expected) => entry.0 += 1,
            Ok(ans) => failures.push(format!(
                "line {line}: {} / {:?}\n  expected {}\n  got      {}",
                item.image_id,
                item.question,
                item.expected.to_json(),
                ans.to_json()
            )),
            Err(e) => failures.push(format!("line {line}: {} / {:?}\n  error {e}", item.image_id, item.question)),
        }
    }
    for (task, (ok, total)) in &tally {
        let pct = if *total == 0 { 100.0 } else { 100.0 * *ok as f64 / *total as f64 };
        println!("{task}: {ok}/{total} ({pct:.1}%)");
    }
    if failures.is_empty() {
        return Ok(());
    }
    println!("{} mismatch(es):", failures.len());
    for f in &failures {
        println!("{f}");
    }
    Err(Failure(EXIT_MISMATCH, String::new()))
}

fn serve(config: &Path, bind: Option<String>) -> Result<(), Failure> {
    let store = Store::from_config(config).map_err(usage)?;
    let addr = bind.unwrap_or_else(|| store.snapshot().config.bind.clone());
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| usage(format!("cannot bind {addr}: {e}")))?;
        eprintln!("listening on {}", listener.local_addr().map_err(usage)?);
        zoolog_service::serve(listener, Arc::new(store)).await.map_err(usage)
    })
}
