use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sentask(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentask"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sentask(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn toy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen-toy", "--out", "."]);
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

/// Span notes of a tagged file, one line per sentence.
fn span_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| l.starts_with("# spans"))
        .map(str::to_string)
        .collect()
}

fn train_args<'a>(out: &'a str, seed: &'a str) -> Vec<&'a str> {
    vec![
        "train-tagger",
        "--config",
        "tagger.conf",
        "--train",
        "tagger_train.tsv",
        "--embeddings",
        "embeddings.txt",
        "--seed",
        seed,
        "--out",
        out,
    ]
}

#[test]
fn same_seed_gives_identical_models() {
    let dir = toy();
    let d = dir.path();
    ok(d, &train_args("a.model", "4"));
    ok(d, &train_args("b.model", "4"));
    ok(d, &train_args("c.model", "5"));
    assert_eq!(read(d, "a.model"), read(d, "b.model"));
    assert_ne!(read(d, "a.model"), read(d, "c.model"));
}

#[test]
fn zero_epochs_leaves_the_initial_model() {
    let dir = toy();
    let d = dir.path();
    let mut a = train_args("zero.model", "9");
    a.extend(["--epochs", "0"]);
    assert!(!ok(d, &a).contains("epoch="));
    let mut b = train_args("zero2.model", "9");
    b.extend(["--epochs", "0", "--learning-rate", "0.7"]);
    ok(d, &b);
    assert_eq!(read(d, "zero.model"), read(d, "zero2.model"));
}

#[test]
fn trained_tagger_scores_perfectly_on_toy_test() {
    let dir = toy();
    let d = dir.path();
    ok(d, &train_args("m", "1"));
    ok(
        d,
        &[
            "tag",
            "--model",
            "m",
            "--embeddings",
            "embeddings.txt",
            "--input",
            "tagger_test.tsv",
            "--out",
            "pred.tsv",
        ],
    );
    let report = ok(
        d,
        &[
            "eval-aspect",
            "--gold",
            "tagger_test.tsv",
            "--pred",
            "pred.tsv",
        ],
    );
    assert!(report.contains("aspects.f1=1.000000"), "{report}");
}

#[test]
fn rules_find_the_example_aspects() {
    let dir = toy();
    let d = dir.path();
    let tagged = ok(d, &["tag", "--mode", "lp", "--input", "rules.tsv"]);
    let lines = span_lines(&tagged);
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().any(|l| l.contains(":camera")), "{lines:?}");
    assert!(
        lines.iter().any(|l| l.contains(":battery_life")),
        "{lines:?}"
    );

    let without_compounds = ok(
        d,
        &[
            "tag",
            "--mode",
            "lp",
            "--rules",
            "1,2.1,2.2,3,5",
            "--input",
            "rules.tsv",
        ],
    );
    assert!(!without_compounds.contains("battery_life"));
    let none = ok(
        d,
        &[
            "tag",
            "--mode",
            "lp",
            "--rules",
            "none",
            "--input",
            "rules.tsv",
        ],
    );
    assert!(span_lines(&none).iter().all(|l| l == "# spans"), "{none}");
}

/// Every span either component marks lies inside some span of the joint output.
#[test]
fn joint_mode_covers_both_components() {
    let dir = toy();
    let d = dir.path();
    ok(d, &train_args("m", "2"));
    let cnn_args = ["--model", "m", "--embeddings", "embeddings.txt", "--input"];
    for input in ["rules.tsv", "tagger_test.tsv"] {
        let run = |mode: &str| {
            let mut a = vec!["tag", "--mode", mode];
            a.extend(cnn_args);
            a.push(input);
            span_lines(&ok(d, &a))
        };
        let (cnn, lp, joint) = (run("cnn"), run("lp"), run("cnn+lp"));
        for i in 0..joint.len() {
            let ranges = |l: &str| -> Vec<(usize, usize)> {
                l.split_whitespace()
                    .skip(2)
                    .map(|s| {
                        let (r, _) = s.split_once(':').unwrap();
                        let (a, b) = r.split_once('-').unwrap();
                        (a.parse().unwrap(), b.parse().unwrap())
                    })
                    .collect()
            };
            let j = ranges(&joint[i]);
            for (a, b) in ranges(&cnn[i]).into_iter().chain(ranges(&lp[i])) {
                assert!(
                    j.iter().any(|&(x, y)| x <= a && b <= y),
                    "{input} sentence {i}: {} / {} / {}",
                    cnn[i],
                    lp[i],
                    joint[i]
                );
            }
        }
    }
}

#[test]
fn evaluation_bounds() {
    let dir = toy();
    let d = dir.path();
    let same = ok(
        d,
        &[
            "eval-aspect",
            "--gold",
            "tagger_test.tsv",
            "--pred",
            "tagger_test.tsv",
        ],
    );
    assert!(same.contains("aspects.f1=1.000000"));

    let blank: String = read(d, "tagger_test.tsv")
        .lines()
        .map(|l| match l.rsplit_once('\t') {
            Some((head, _)) if !l.starts_with('#') => format!("{head}\tO\n"),
            _ => format!("{l}\n"),
        })
        .collect();
    fs::write(d.join("blank.tsv"), blank).unwrap();
    let empty = ok(
        d,
        &[
            "eval-aspect",
            "--gold",
            "tagger_test.tsv",
            "--pred",
            "blank.tsv",
            "--out",
            "r.txt",
        ],
    );
    assert!(
        empty.contains("aspects.f1=0.000000") && empty.contains("aspects.tp=0"),
        "{empty}"
    );
    assert_eq!(read(d, "r.txt"), empty);

    let phrases = ok(
        d,
        &[
            "eval-aspect",
            "--gold",
            "iob2_example.tsv",
            "--pred",
            "iob2_example.tsv",
            "--phrases-only",
        ],
    );
    assert!(phrases.contains("phrases.tp=1"), "{phrases}");
}

#[test]
fn subjectivity_cross_validation_on_toy_data() {
    let dir = toy();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "train-subj",
            "--config",
            "subj.conf",
            "--corpus",
            "subj.txt",
            "--clues",
            "clues.txt",
            "--folds",
            "10",
            "--seed",
            "7",
            "--out",
            "s",
        ],
    );
    assert!(out.contains("cv.mean_accuracy=1.000000"), "{out}");
    for f in ["s", "s.gbn", "s.motifs"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let report = ok(
        d,
        &[
            "classify-subj",
            "--model",
            "s",
            "--input",
            "subj.txt",
            "--out",
            "labels.tsv",
        ],
    );
    assert!(report.contains("subj.accuracy=1.000000"), "{report}");
    assert_eq!(read(d, "labels.tsv").lines().count(), 40);

    let plain: String = read(d, "subj.txt")
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(_, s)| format!("{s}\n"))
        .collect();
    fs::write(d.join("plain.txt"), plain).unwrap();
    let unlabeled = ok(
        d,
        &["classify-subj", "--model", "s", "--input", "plain.txt"],
    );
    assert_eq!(unlabeled.lines().count(), 40);
}

#[test]
fn skipping_pretraining_matches_an_empty_motif_set() {
    let dir = toy();
    let d = dir.path();
    let common = [
        "--config",
        "subj.conf",
        "--corpus",
        "subj.txt",
        "--seed",
        "3",
        "--epochs",
        "5",
    ];
    let mut skip = vec!["train-subj", "--skip-pretrain", "--out", "skip"];
    skip.extend(common);
    let out = ok(d, &skip);
    assert!(out.contains("pretrain.sentences=0"));
    assert!(!d.join("skip.motifs").exists());

    // A threshold no motif can reach leaves the pipeline with nothing to pre-train on.
    let mut strict = vec![
        "train-subj",
        "--clues",
        "clues.txt",
        "--tau",
        "1e300",
        "--out",
        "strict",
    ];
    strict.extend(common);
    ok(d, &strict);
    assert_eq!(read(d, "skip"), read(d, "strict"));
}

#[test]
fn gbn_learning_writes_network_and_motifs() {
    let dir = toy();
    let d = dir.path();
    let out = ok(
        d,
        &[
            "learn-gbn",
            "--corpus",
            "subj.txt",
            "--clues",
            "clues.txt",
            "--clue-words",
            "6",
            "--out",
            "net",
            "--motifs",
            "m",
        ],
    );
    assert!(out.contains("nodes=6"), "{out}");
    assert!(!read(d, "net").is_empty() && !read(d, "m").is_empty());
}

#[test]
fn failures_are_single_line_errors() {
    let dir = toy();
    let d = dir.path();
    fs::write(d.join("broken.tsv"), "the\tdet\n").unwrap();
    fs::write(d.join("typo.conf"), "epoch = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["tag", "--mode", "lp", "--input", "broken.tsv"],
        vec!["tag", "--mode", "cnn", "--input", "rules.tsv"],
        vec!["tag", "--mode", "lp", "--input", "missing.tsv"],
        vec![
            "train-tagger",
            "--config",
            "typo.conf",
            "--train",
            "tagger_train.tsv",
            "--out",
            "x",
        ],
        vec!["train-subj", "--corpus", "subj.txt", "--out", "x"],
        vec![
            "eval-aspect",
            "--gold",
            "tagger_test.tsv",
            "--pred",
            "rules.tsv",
        ],
        vec![
            "classify-subj",
            "--model",
            "tagger.conf",
            "--input",
            "subj.txt",
        ],
    ];
    for args in cases {
        let out = sentask(d, &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("sentask: error: "), "{err}");
    }
}
