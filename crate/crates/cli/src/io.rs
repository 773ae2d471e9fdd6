//! Reading inputs and writing artifacts.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gemlogic::abduction::parse_list;
use gemlogic::model::has_errors;
use gemlogic::{parse_native, parse_sbml, validate, MetabolicModel, SbmlOptions, Severity};

use crate::args::{Format, ModelArgs};
use crate::failure::{Classify, ExitCode, Failure, Outcome};

pub fn read(path: &Path) -> Outcome<Vec<u8>> {
    fs::read(path).code_with(ExitCode::Io, || format!("cannot read {}", path.display()))
}

pub fn read_text(path: &Path) -> Outcome<String> {
    String::from_utf8(read(path)?).code_with(ExitCode::Parse, || format!("{} is not UTF-8", path.display()))
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("xml" | "sbml") => Format::Sbml,
        _ => Format::Native,
    }
}

/// Parses a model file without validating it.
pub fn parse_model(path: &Path, format: Option<Format>, goal: Option<&[String]>) -> Outcome<MetabolicModel> {
    let bytes = read(path)?;
    let context = || format!("cannot parse {}", path.display());
    let mut model = match format.unwrap_or_else(|| guess_format(path)) {
        Format::Native => parse_native(&bytes).code_with(ExitCode::Parse, context)?,
        Format::Sbml => {
            let options = SbmlOptions {
                goal: goal.map(|g| g.iter().map(|s| s.as_str().into()).collect()),
                ..SbmlOptions::default()
            };
            let import = parse_sbml(&bytes, &options).code_with(ExitCode::Parse, context)?;
            for d in &import.diagnostics {
                log::info!("{}: {d}", path.display());
            }
            import.model
        }
    };
    if let Some(goal) = goal {
        model.biomass_goal = goal.iter().map(|s| s.as_str().into()).collect();
    }
    Ok(model)
}

/// Parses and validates the model; validation errors are fatal, warnings are
/// logged.
pub fn load_model(args: &ModelArgs) -> Outcome<MetabolicModel> {
    let model = parse_model(&args.model, args.format, args.goal.as_deref())?;
    let diagnostics = validate(&model);
    for d in diagnostics.iter().filter(|d| d.severity != Severity::Error) {
        log::warn!("{d}");
    }
    if has_errors(&diagnostics) {
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return Err(Failure::new(
            ExitCode::Validation,
            anyhow::anyhow!("{} is not a valid model", args.model.display()),
        ));
    }
    Ok(model)
}

/// A medium file lists one species id per line; blank lines and lines
/// starting with `#` are ignored. Without a file the medium is every exchange
/// species of the model.
pub fn load_medium(path: Option<&Path>, model: &MetabolicModel) -> Outcome<BTreeSet<gemlogic::SpeciesId>> {
    let Some(path) = path else { return Ok(model.exchange_species.clone()) };
    let text = read_text(path)?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(|l| l.into()).collect())
}

pub fn id_set<T: From<String> + Ord>(items: &[String]) -> BTreeSet<T> {
    parse_list(&items.join(","))
}

/// Where artifacts go: files in `--out`, or standard output.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Outcome<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).code_with(ExitCode::Io, || format!("cannot create {}", d.display()))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf) })
    }

    /// The main artifact: written to `name` in the output directory, or
    /// printed.
    pub fn primary(&self, name: &str, contents: &[u8]) -> Outcome<()> {
        match &self.dir {
            Some(d) => write_atomic(&d.join(name), contents),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(contents)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    /// A secondary artifact, only written when there is an output directory.
    pub fn extra(&self, name: &str, contents: &[u8]) -> Outcome<()> {
        match &self.dir {
            Some(d) => write_atomic(&d.join(name), contents),
            None => Ok(()),
        }
    }
}

/// Writes through a temporary file in the same directory and renames it over
/// the target, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Outcome<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| -> io::Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.code_with(ExitCode::Io, || format!("cannot write {}", path.display()))
}

/// One JSON document per line.
pub fn json_lines<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).expect("values serialize");
        out.push(b'\n');
    }
    out
}

pub fn json_pretty<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("values serialize");
    out.push(b'\n');
    out
}
