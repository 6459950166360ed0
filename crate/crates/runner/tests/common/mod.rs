#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use consensus_runner::config::{RunConfig, Task};
use consensus_runner::gateway::{EndpointSpec, SimProfile, SimScript};

pub fn multiset(answers: &[&str]) -> SimScript {
    SimScript::Multiset(answers.iter().map(|s| s.to_string()).collect())
}

/// `n` questions `q000..` whose gold answer is `gold-{i}`.
pub fn write_questions(dir: &Path, n: usize) -> PathBuf {
    let mut text = String::new();
    for i in 0..n {
        writeln!(text, r#"{{"id":"q{i:03}","question":"Which one is number {i}?","answer":"gold {i}"}}"#).unwrap();
    }
    fs::create_dir_all(dir).unwrap();
    let path = dir.join("questions.jsonl");
    fs::write(&path, text).unwrap();
    path
}

/// A primary whose agreement cycles through 5/5, 3/5 and 1/5 and a
/// secondary that is right on even questions.
pub fn mixed_profiles(n: usize) -> (SimProfile, SimProfile) {
    let mut primary = SimProfile::default();
    let mut secondary = SimProfile::default();
    for i in 0..n {
        let id = format!("q{i:03}");
        let script = match i % 3 {
            0 => multiset(&["@gold"; 5]),
            1 => multiset(&["@gold", "@gold", "@gold", "other", "else"]),
            _ => multiset(&["@gold", "a1", "a2", "a3", "a4"]),
        };
        primary = primary.with_question(&id, script);
        secondary = secondary.with_question(&id, multiset(&[if i % 2 == 0 { "@gold" } else { "wrong" }]));
    }
    (primary, secondary)
}

pub fn sim_config(task: Task, dir: &Path, n: usize) -> RunConfig {
    let (p, s) = mixed_profiles(n);
    let mut c = RunConfig::new(task);
    c.endpoints = vec![EndpointSpec::simulated("primary", p), EndpointSpec::simulated("secondary", s)];
    c.dataset_path = Some(write_questions(dir, n));
    c.output_dir = dir.join("out");
    c.bootstrap.iterations = 200;
    c
}

/// The newest timestamped `{task}-*.{ext}` report in `dir`.
pub fn report_file(dir: &Path, task: Task, ext: &str) -> PathBuf {
    let prefix = format!("{task}-");
    let mut found: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.extension().is_some_and(|e| e == ext)
                && p.file_name().unwrap().to_string_lossy().starts_with(&prefix)
        })
        .collect();
    found.sort();
    found.pop().unwrap_or_else(|| panic!("no .{ext} report in {}", dir.display()))
}
