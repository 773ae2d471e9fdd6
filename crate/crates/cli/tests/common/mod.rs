//! Helpers shared by the CLI integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

/// Runs the binary with `dir` as working directory.
pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gemlogic"))
        .args(args)
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn code(output: &Output) -> i32 {
    output.status.code().expect("exited normally")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

/// One invocation of every command, writing relative to the working
/// directory. Ledger commands build on each other, so order matters.
pub fn script() -> Vec<Vec<String>> {
    let toy5 = data("toy5.json");
    let without_r2 = data("toy5_without_r2.json");
    let medium = data("medium_A.txt");
    let toy5_with_bounds_json = data("toy5_with_bounds.json");
    let chain3_json = data("chain3.json");
    let observations_tsv = data("observations.tsv");
    let observed_essentiality_tsv = data("observed_essentiality.tsv");
    let toy5_xml = data("toy5.xml");
    let r0889_xml = data("r0889.xml");
    let lines: Vec<Vec<&str>> = vec![
        vec!["compile", "--model", &toy5, "--out", "compile"],
        vec!["compile", "--model", &r0889_xml, "--goal", "s0394", "--out", "compile_sbml"],
        vec!["compile", "--model", &toy5_xml, "--goal", "BIOMASS_c"],
        vec!["validate", "--model", &toy5],
        vec!["growth", "--model", &toy5, "--medium", &medium, "--ko", "g1,g2", "--out", "growth"],
        vec!["growth", "--model", &toy5, "--medium", &medium],
        vec![
            "essentiality",
            "--model",
            &toy5,
            "--medium",
            &medium,
            "--observed",
            &observed_essentiality_tsv,
            "--out",
            "screen",
        ],
        vec![
            "abduce",
            "--model",
            &without_r2,
            "--medium",
            &medium,
            "--kinds",
            "metabolite-source,gene-function",
            "--max-card",
            "2",
        ],
        vec![
            "abduce",
            "--model",
            &without_r2,
            "--medium",
            &medium,
            "--kinds",
            "reaction-exists,metabolite-source",
            "--candidates",
            &toy5,
            "--observations",
            &observations_tsv,
            "--out",
            "abduce",
        ],
        vec!["fba", "--model", &chain3_json, "--out", "fba_chain3"],
        vec![
            "fba",
            "--model",
            &toy5_with_bounds_json,
            "--medium",
            &medium,
            "--ko",
            "g3",
            "--logic",
            "--out",
            "fba_toy5",
        ],
        vec!["revise", "record", "--ledger", "ledger", "--model", &without_r2, "--description", "initial import"],
        vec![
            "abduce",
            "--model",
            &without_r2,
            "--medium",
            &medium,
            "--kinds",
            "reaction-exists",
            "--candidates",
            &toy5,
            "--observations",
            &observations_tsv,
            "--record",
            "--ledger",
            "ledger",
            "--out",
            "abduce_record",
        ],
        vec!["revise", "history", "--ledger", "ledger", "--model-id", "toy5", "--out", "history"],
        vec!["revise", "changelog", "--ledger", "ledger", "--model-id", "toy5"],
        vec!["revise", "replay", "--ledger", "ledger", "--model-id", "toy5", "--out", "replay"],
        vec!["revise", "diff", "--model", &toy5, "--target", "replay/model.json", "--out", "diff"],
        vec!["revise", "diff", "--model", &without_r2, "--target", &toy5],
    ];
    lines.into_iter().map(|l| l.into_iter().map(String::from).collect()).collect()
}

/// Runs the whole script in a fresh directory and returns every produced
/// byte: files by relative path, plus each command's exit code and streams.
pub fn run_script(extra: &[&str]) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = BTreeMap::new();
    for (i, args) in script().iter().enumerate() {
        let mut full: Vec<&str> = extra.to_vec();
        full.extend(args.iter().map(String::as_str));
        let out = run(dir.path(), &full);
        if code(&out) != 0 {
            return Err(format!("{full:?} exited {}: {}", code(&out), String::from_utf8_lossy(&out.stderr)));
        }
        outputs.insert(format!("#{i:02} stdout"), out.stdout);
        outputs.insert(format!("#{i:02} stderr"), out.stderr);
    }
    collect_files(dir.path(), dir.path(), &mut outputs);
    Ok(outputs)
}

fn collect_files(root: &Path, dir: &Path, into: &mut BTreeMap<String, Vec<u8>>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(root, &path, into);
        } else {
            let name = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            into.insert(name, fs::read(&path).unwrap());
        }
    }
}

/// Names of entries that differ between two runs.
pub fn differences(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}
