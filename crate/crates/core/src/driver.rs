//! Running single files and directories of instances.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::ast_eval::eval_script;
use crate::formula::model::format_model;
use crate::formula::{parse_smt2, Script};
use crate::scoreboard::SortedVecStore;
use crate::search::{Answer, Search, SearchParams, Stats};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Human,
    Csv,
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub params: SearchParams,
    /// Re-evaluate sat models over the parsed assertions.
    pub verify: bool,
    pub trace: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Sat,
    Unknown,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub answer: Outcome,
    pub time_s: f64,
    pub steps: u64,
    pub minor_restarts: u64,
    pub major_restarts: u64,
    pub relaxations: u64,
    pub verified: bool,
}

pub const CSV_COLUMNS: [&str; 8] = [
    "instance",
    "answer",
    "time_s",
    "steps",
    "minor_restarts",
    "major_restarts",
    "relaxations",
    "verified",
];

/// Result of [`run_file`]: the record, the text to print and the exit code.
#[derive(Clone, Debug)]
pub struct FileRun {
    pub record: RunRecord,
    pub output: String,
    pub exit_code: i32,
    pub stats: Stats,
}

fn instance_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn error_run(name: String, msg: String) -> FileRun {
    FileRun {
        record: RunRecord {
            instance: name,
            answer: Outcome::Error,
            time_s: 0.0,
            steps: 0,
            minor_restarts: 0,
            major_restarts: 0,
            relaxations: 0,
            verified: false,
        },
        output: format!("error: {msg}\n"),
        exit_code: 2,
        stats: Stats::default(),
    }
}

/// Parses, solves and reports one file. Exit code 0 on sat, 1 on unknown,
/// 2 on unreadable or unsupported input.
pub fn run_file(path: &Path, config: &RunConfig) -> FileRun {
    let name = instance_name(path);
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return error_run(name, format!("{}: {e}", path.display())),
    };
    let script = match parse_smt2(&text) {
        Ok(s) => s,
        Err(e) => return error_run(name, e.to_string()),
    };
    let trace = match &config.trace {
        Some(p) => match File::create(p) {
            Ok(f) => Some(Box::new(BufWriter::new(f)) as Box<dyn Write + Send>),
            Err(e) => return error_run(name, format!("{}: {e}", p.display())),
        },
        None => None,
    };
    run_script(name, &script, config, trace)
}

/// Solves an already parsed script.
pub fn run_script(
    name: String,
    script: &Script,
    config: &RunConfig,
    trace: Option<Box<dyn Write + Send>>,
) -> FileRun {
    let start = Instant::now();
    let mut record = RunRecord {
        instance: name,
        answer: Outcome::Unknown,
        time_s: 0.0,
        steps: 0,
        minor_restarts: 0,
        major_restarts: 0,
        relaxations: 0,
        verified: false,
    };
    let mut search = match Search::<SortedVecStore>::new(&script.problem, config.params.clone()) {
        Ok(s) => s,
        Err(_) => {
            record.time_s = start.elapsed().as_secs_f64();
            return FileRun {
                record,
                output: "unknown\n".into(),
                exit_code: 1,
                stats: Stats::default(),
            };
        }
    };
    if let Some(t) = trace {
        search.set_trace(t);
    }
    let result = search.run();
    record.time_s = start.elapsed().as_secs_f64();
    let s = &result.stats;
    record.steps = s.steps;
    record.minor_restarts = s.minor_restarts;
    record.major_restarts = s.major_restarts;
    record.relaxations = s.relaxations;
    let mut output = String::from("unknown\n");
    if let (Answer::Sat, Some(model)) = (result.answer, &result.model) {
        let agrees = !config.verify || eval_script(script, model).unwrap_or(false);
        if agrees {
            record.answer = Outcome::Sat;
            record.verified = true;
            output = format!("sat\n{}", format_model(&script.problem, model));
        }
    }
    let exit_code = if record.answer == Outcome::Sat { 0 } else { 1 };
    FileRun {
        record,
        output,
        exit_code,
        stats: result.stats,
    }
}

/// FNV-1a over the instance name followed by the seed.
pub fn instance_seed(name: &str, seed: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes().chain(seed.to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// The `.smt2` files of `dir`, sorted by name.
pub fn suite_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "smt2"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every instance of `dir` in parallel, each with its own derived seed.
/// Traces are not written for suites.
pub fn run_suite(dir: &Path, config: &RunConfig) -> io::Result<Vec<RunRecord>> {
    let files = suite_files(dir)?;
    let base = RunConfig {
        trace: None,
        ..config.clone()
    };
    Ok(files
        .par_iter()
        .map(|p| {
            let mut cfg = base.clone();
            cfg.params.seed = instance_seed(&instance_name(p), config.params.seed);
            run_file(p, &cfg).record
        })
        .collect())
}

/// Writes the header, one row per record and, unless there are no
/// records, a `# solved k/n` line.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    if !records.is_empty() {
        let solved = records.iter().filter(|r| r.answer == Outcome::Sat).count();
        writeln!(out, "# solved {solved}/{}", records.len())?;
    }
    Ok(())
}

/// Reads back the rows written by [`write_csv`].
pub fn read_csv(text: &str) -> csv::Result<Vec<RunRecord>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
