//! CLI-level integration tests: subcommand chaining over a shared cache
//! directory, exit codes, sweeps and manifest-based reproduction.

mod common;

use std::path::Path;
use std::process::Command;

use common::{group_corpus, write_corpus_files};
use tempfile::TempDir;

fn hmff(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hmff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &std::process::Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

struct Setup {
    _dir: TempDir,
    input: String,
    truth: String,
    out: String,
}

fn setup() -> Setup {
    let dir = TempDir::new().unwrap();
    let corpus = group_corpus(42, 3, 8, 15, 10, 20);
    let (input, truth) = write_corpus_files(dir.path(), &corpus);
    let out = dir.path().join("out");
    Setup {
        input: input.display().to_string(),
        truth: truth.display().to_string(),
        out: out.display().to_string(),
        _dir: dir,
    }
}

#[test]
fn stagewise_equals_run() {
    let s = setup();
    let base = |cmd: &str| -> Vec<String> {
        vec![
            cmd.into(),
            "--input".into(),
            s.input.clone(),
            "--topics".into(),
            "3".into(),
            "--clusters".into(),
            "3".into(),
            "--truth".into(),
            s.truth.clone(),
            "--out".into(),
            s.out.clone(),
        ]
    };
    for cmd in ["preprocess", "features", "similarity", "fuse", "cluster", "evaluate"] {
        let args = base(cmd);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let output = hmff(&refs);
        assert!(
            output.status.success(),
            "{cmd} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let staged_report = std::fs::read(Path::new(&s.out).join("report.json")).unwrap();

    // a fresh full run in another directory must produce the same report
    let dir2 = TempDir::new().unwrap();
    let out2 = dir2.path().join("out");
    let args: Vec<String> = vec![
        "run".into(),
        "--input".into(),
        s.input.clone(),
        "--topics".into(),
        "3".into(),
        "--clusters".into(),
        "3".into(),
        "--truth".into(),
        s.truth.clone(),
        "--out".into(),
        out2.display().to_string(),
    ];
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = hmff(&refs);
    assert!(output.status.success());
    let run_report = std::fs::read(out2.join("report.json")).unwrap();
    assert_eq!(staged_report, run_report);
    assert!(out2.join("run_manifest.json").exists());
}

#[test]
fn exit_code_2_on_config_error() {
    let s = setup();
    // unknown source name
    let output = hmff(&[
        "run", "--input", &s.input, "--sources", "vsm,bogus", "--out", &s.out,
    ]);
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));

    // auto topics without a grid
    let output = hmff(&[
        "run", "--input", &s.input, "--topics", "auto", "--out", &s.out,
    ]);
    assert_eq!(output.status.code(), Some(2));

    // clap usage error (missing required --input)
    let output = hmff(&["run", "--out", &s.out]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn exit_code_3_on_data_error() {
    let s = setup();
    let output = hmff(&[
        "run", "--input", "/nonexistent/corpus.txt", "--out", &s.out,
    ]);
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));

    // truth file that does not cover the corpus
    let dir = TempDir::new().unwrap();
    let partial_truth = dir.path().join("partial.csv");
    std::fs::write(&partial_truth, "1,classx\n").unwrap();
    let output = hmff(&[
        "run",
        "--input",
        &s.input,
        "--topics",
        "2",
        "--clusters",
        "2",
        "--truth",
        partial_truth.to_str().unwrap(),
        "--out",
        &s.out,
    ]);
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn exit_code_4_on_numeric_error() {
    let s = setup();
    // more clusters than documents
    let output = hmff(&[
        "run", "--input", &s.input, "--topics", "2", "--clusters", "9999", "--out", &s.out,
    ]);
    assert_eq!(output.status.code(), Some(4), "{}", String::from_utf8_lossy(&output.stderr));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("stage cluster"), "stderr: {stderr}");
}

#[test]
fn sweep_topics_and_sweep_k() {
    let s = setup();
    let output = hmff(&[
        "sweep-topics",
        "--input",
        &s.input,
        "--topics",
        "auto",
        "--topic-grid",
        "2:4",
        "--out",
        &s.out,
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout_of(&output);
    assert!(text.contains("chosen topic count"), "{text}");
    assert!(Path::new(&s.out).join("topic_sweep.csv").exists());

    let output = hmff(&[
        "sweep-k",
        "--input",
        &s.input,
        "--topics",
        "3",
        "--cluster-range",
        "2:5",
        "--out",
        &s.out,
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout_of(&output);
    assert_eq!(text.matches("silhouette").count(), 5, "{text}"); // 4 rows + best line
    assert!(Path::new(&s.out).join("cluster_sweep.csv").exists());

    // sweep-k without a range is a config error
    let output = hmff(&["sweep-k", "--input", &s.input, "--out", &s.out]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn manifest_reproduces_run() {
    let s = setup();
    let output = hmff(&[
        "run", "--input", &s.input, "--topics", "3", "--clusters", "3", "--truth", &s.truth,
        "--out", &s.out,
    ]);
    assert!(output.status.success());

    let manifest =
        hmff::pipeline::RunManifest::load(&Path::new(&s.out).join("run_manifest.json")).unwrap();
    let replay_dir = TempDir::new().unwrap();
    let mut config = manifest.config.clone();
    config.out_dir = replay_dir.path().to_path_buf();
    hmff::pipeline::run_pipeline(config).unwrap();

    let mut names: Vec<String> = std::fs::read_dir(&s.out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        if name == "run_manifest.json" {
            continue; // wall times differ
        }
        let original = std::fs::read(Path::new(&s.out).join(&name)).unwrap();
        let replayed = std::fs::read(replay_dir.path().join(&name)).unwrap();
        assert_eq!(original, replayed, "{name} differs under manifest replay");
    }
}

#[test]
fn disabling_a_source_shrinks_fusion_by_k() {
    let s = setup();
    let run_with_sources = |sources: &str, out: &str| -> hmff::fusion::FusedFeatures {
        let output = hmff(&[
            "fuse", "--input", &s.input, "--topics", "3", "--sources", sources, "--out", out,
        ]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        hmff::cache::read_fused(&Path::new(out).join("fused.csv")).unwrap()
    };
    let dir_all = TempDir::new().unwrap();
    let dir_two = TempDir::new().unwrap();
    let all = run_with_sources("vsm,topic,embed", dir_all.path().to_str().unwrap());
    let two = run_with_sources("vsm,embed", dir_two.path().to_str().unwrap());

    assert_eq!(all.h(), 9);
    assert_eq!(two.h(), 6);
    // vsm block: columns 0..3 in both; embed block: 6..9 vs 3..6
    for i in 0..all.n() {
        for j in 0..3 {
            assert_eq!(all.matrix[[i, j]], two.matrix[[i, j]], "vsm col {j}");
            assert_eq!(all.matrix[[i, j + 6]], two.matrix[[i, j + 3]], "embed col {j}");
        }
    }
}

#[test]
fn raw_format_with_stopword_file() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("raw.txt");
    std::fs::write(
        &input,
        "The cats are chasing dogs!\nDogs sleep soundly.\nzz zz zz\n",
    )
    .unwrap();
    let stopwords = dir.path().join("stops.txt");
    std::fs::write(&stopwords, "the\nare\nzz\n").unwrap();
    let out = dir.path().join("out");
    let output = hmff(&[
        "preprocess",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "raw",
        "--stopwords",
        stopwords.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    // doc 3 filters to nothing and is dropped
    let text = stdout_of(&output);
    assert!(text.contains("2 documents"), "{text}");
    let corpus = hmff::cache::read_corpus(&out.join("corpus.csv")).unwrap();
    assert_eq!(corpus.doc_tokens(0), vec!["cat", "chase", "dog"]);
    assert_eq!(corpus.doc_tokens(1), vec!["dog", "sleep", "soundli"]);
}
