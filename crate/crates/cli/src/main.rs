use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, ValueEnum};
use nnport::codegen::{EmitOptions, EmitTarget};
use nnport::frontend::{Framework, Style};
use nnport::migrate::{self, Migration, Request, SourceSpec};
use nnport::pivot::{serialize_to_string, Span, TensorShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FromFramework {
    Tf,
    Pt,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FromStyle {
    Seq,
    Subc,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ToFramework {
    Tf,
    Pt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ToStyle {
    Seq,
    Subc,
}

/// Migrate neural network definitions between the channel-last (tf) and
/// channel-first (pt) frameworks and between sequential and subclassing style.
#[derive(Debug, Parser)]
#[command(name = "nnport", version)]
struct Cli {
    /// Python sources or `.nn.json` pivot documents.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long = "from", value_enum, default_value = "auto")]
    from: FromFramework,
    #[arg(long = "from-style", value_enum, default_value = "auto")]
    from_style: FromStyle,
    #[arg(long = "to", value_enum)]
    to: ToFramework,
    #[arg(long = "to-style", value_enum)]
    to_style: ToStyle,
    /// Channel-last input shape without the batch dimension, e.g. `32,32,3`.
    #[arg(long = "input-shape", value_name = "CSV")]
    input_shape: Option<String>,
    /// Emit the dataset table and training scaffold.
    #[arg(long = "emit-training")]
    emit_training: bool,
    /// Also write the pivot document next to each output.
    #[arg(long = "dump-pivot")]
    dump_pivot: bool,
    /// Treat warnings as failures (exit status 1).
    #[arg(long)]
    strict: bool,
    /// Output file; a directory when several inputs are given.
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Severity {
    Warning,
    Error,
}

struct Report {
    lines: Vec<String>,
    worst: Option<Severity>,
}

impl Report {
    fn new() -> Self {
        Report {
            lines: Vec::new(),
            worst: None,
        }
    }

    fn push(&mut self, severity: Severity, file: &Path, span: Option<Span>, code: &str, message: &str) {
        let at = match span {
            Some(s) => format!("{}:{}:{}", file.display(), s.line, s.column),
            None => file.display().to_string(),
        };
        let label = match severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        self.lines.push(format!("{at}: {label}[{code}]: {message}"));
        self.worst = self.worst.max(Some(severity));
    }
}

fn parse_shape(csv: &str) -> Option<TensorShape> {
    let dims: Vec<u64> = csv
        .split(',')
        .map(|d| d.trim().parse().ok().filter(|&n| n >= 1))
        .collect::<Option<_>>()?;
    (!dims.is_empty()).then(|| TensorShape::batched(&dims))
}

fn target(cli: &Cli) -> EmitTarget {
    let framework = match cli.to {
        ToFramework::Tf => Framework::ChannelLast,
        ToFramework::Pt => Framework::ChannelFirst,
    };
    let style = match cli.to_style {
        ToStyle::Seq => Style::Sequential,
        ToStyle::Subc => Style::Subclassing,
    };
    EmitTarget::new(framework, style)
}

fn source(cli: &Cli) -> SourceSpec {
    SourceSpec {
        framework: match cli.from {
            FromFramework::Tf => Some(Framework::ChannelLast),
            FromFramework::Pt => Some(Framework::ChannelFirst),
            FromFramework::Auto => None,
        },
        style: match cli.from_style {
            FromStyle::Seq => Some(Style::Sequential),
            FromStyle::Subc => Some(Style::Subclassing),
            FromStyle::Auto => None,
        },
    }
}

fn is_pivot_document(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.strip_suffix(".nn.json")
        .or_else(|| name.strip_suffix(".py"))
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name)
        .to_string()
}

fn output_path(cli: &Cli, input: &Path) -> PathBuf {
    let t = target(cli);
    let default_name = format!("{}_{}_{}.py", stem(input), t.framework.as_str(), t.style.as_str());
    match &cli.output {
        Some(o) if cli.inputs.len() == 1 => o.clone(),
        Some(dir) => dir.join(default_name),
        None => input.with_file_name(default_name),
    }
}

fn pivot_path(output: &Path) -> PathBuf {
    output.with_file_name(format!("{}.nn.json", stem(output)))
}

/// Writes `contents` to a temporary file beside `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn migrate_one(cli: &Cli, input: &Path, shape: Option<&TensorShape>) -> Report {
    let mut report = Report::new();
    let bytes = match fs::read(input) {
        Ok(b) => b,
        Err(e) => {
            report.push(Severity::Error, input, None, "E001", &format!("cannot read input: {e}"));
            return report;
        }
    };
    let mut req = Request::new(target(cli));
    req.source = source(cli);
    req.input_shape = shape.cloned();
    req.emit = EmitOptions {
        emit_training: cli.emit_training,
        ..EmitOptions::default()
    };
    let result = if is_pivot_document(input) {
        migrate::migrate_document(&bytes, &req)
    } else {
        match String::from_utf8(bytes) {
            Ok(text) => migrate::migrate_source(&text, &req),
            Err(_) => {
                report.push(Severity::Error, input, None, "E001", "input is not valid UTF-8");
                return report;
            }
        }
    };
    let migration: Migration = match result {
        Ok(m) => m,
        Err(f) => {
            let message = format!("{} ({})", f.error, f.error.name());
            report.push(Severity::Error, input, f.span, f.code(), &message);
            return report;
        }
    };
    for w in &migration.warnings {
        report.push(Severity::Warning, input, w.span, w.code, &w.message);
    }
    if cli.strict && report.worst.is_some() {
        return report;
    }
    let out = output_path(cli, input);
    let mut artifacts = vec![(out.clone(), migration.code.clone())];
    if cli.dump_pivot {
        match serialize_to_string(&migration.pivot) {
            Ok(doc) => artifacts.push((pivot_path(&out), doc)),
            Err(e) => {
                report.push(Severity::Error, input, None, "E030", &e.to_string());
                return report;
            }
        }
    }
    for (path, contents) in artifacts {
        if let Err(e) = write_atomic(&path, &contents) {
            report.push(Severity::Error, &path, None, "E002", &format!("cannot write output: {e}"));
            return report;
        }
    }
    report
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let shape = match cli.input_shape.as_deref().map(|s| (s, parse_shape(s))) {
        Some((raw, None)) => {
            eprintln!("nnport: error[E003]: invalid --input-shape {raw:?}: expected positive integers separated by commas");
            return ExitCode::from(2);
        }
        Some((_, parsed)) => parsed,
        None => None,
    };
    let reports: Vec<Report> = thread::scope(|s| {
        let handles: Vec<_> = cli
            .inputs
            .iter()
            .map(|input| s.spawn(|| migrate_one(&cli, input, shape.as_ref())))
            .collect();
        handles.into_iter().map(|h| h.join().expect("migration thread panicked")).collect()
    });
    let mut worst = None;
    for r in &reports {
        for line in &r.lines {
            eprintln!("{line}");
        }
        worst = worst.max(r.worst);
    }
    match worst {
        Some(Severity::Error) => ExitCode::from(2),
        Some(Severity::Warning) if cli.strict => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
