use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wordsem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wordsem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Chain {
    dir: TempDir,
}

impl Chain {
    fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }

    /// Mines, renders and trains on the three-word fixture.
    fn build() -> Chain {
        let dir = TempDir::new().unwrap();
        let c = Chain { dir };
        fs::write(c.path("words.txt"), "cat\ndinosaur\njeep\n").unwrap();
        let mine = wordsem(&[
            "mine",
            "--builtin-taxonomy",
            "fig3",
            "--words",
            p(&c.path("words.txt")),
            "--level",
            "8",
            "--topk",
            "2",
            "--out",
            p(&c.path("vocab.json")),
        ]);
        assert_eq!(code(&mine), 0, "{}", String::from_utf8_lossy(&mine.stderr));
        let synth = wordsem(&[
            "synth",
            "--vocab",
            p(&c.path("vocab.json")),
            "--per-word",
            "4",
            "--val-replicas",
            "2",
            "--out",
            p(&c.path("data")),
        ]);
        assert_eq!(code(&synth), 0, "{}", String::from_utf8_lossy(&synth.stderr));
        let train = wordsem(&[
            "train",
            "--vocab",
            p(&c.path("vocab.json")),
            "--data",
            p(&c.path("data")),
            "--epochs",
            "2",
            "--out",
            p(&c.path("run")),
        ]);
        assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));
        c
    }

    fn query(&self, extra: &[&str]) -> Output {
        let mut args = vec![
            "query",
            "--checkpoint",
            self.dir.path().join("run/net.bin").to_str().unwrap(),
            "--vocab",
            self.dir.path().join("vocab.json").to_str().unwrap(),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        args.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        wordsem(&refs)
    }
}

#[test]
fn mine_synth_train_eval_chain() {
    let c = Chain::build();
    let vocab: serde_json::Value = serde_json::from_str(&fs::read_to_string(c.path("vocab.json")).unwrap()).unwrap();
    let labels: Vec<&str> = vocab["concepts"].as_array().unwrap().iter().map(|x| x["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["vertebrate", "wheeled_vehicle"]);
    assert!(c.path("run/net.bin").is_file());
    assert!(c.path("run/report.json").is_file());

    let eval = wordsem(&[
        "eval",
        "--checkpoint",
        p(&c.path("run/net.bin")),
        "--vocab",
        p(&c.path("vocab.json")),
        "--data",
        p(&c.path("data")),
        "--out",
        p(&c.path("eval")),
    ]);
    assert_eq!(code(&eval), 0, "{}", String::from_utf8_lossy(&eval.stderr));
    let stdout = String::from_utf8(eval.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap().split('\t').next(), Some("task"));
    let tasks: Vec<&str> = lines.map(|l| l.split('\t').next().unwrap()).collect();
    assert!(tasks.contains(&"image-to-concept") && tasks.contains(&"concept-to-image"));
    assert!(c.path("eval/embeddings.lwemb").is_file());
    assert!(c.path("eval/metrics.csv").is_file());
    let stderr = String::from_utf8(eval.stderr).unwrap();
    assert!(stderr.contains("\"image_queries\":200"), "resolved config echoed: {stderr}");

    let q = c.query(&["--task", "concept-to-image", "--data", p(&c.path("data")), "--expr", "vertebrate", "--top", "3"]);
    assert_eq!(code(&q), 0);
    assert_eq!(String::from_utf8(q.stdout).unwrap().lines().count(), 4);

    let q = c.query(&["--image", p(&c.path("data/images.lwimg")), "--index", "1"]);
    assert_eq!(code(&q), 0, "{}", String::from_utf8_lossy(&q.stderr));
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let c = Chain::build();

    let missing_flag = wordsem(&["synth", "--out", p(&c.path("nothing"))]);
    assert_eq!(code(&missing_flag), 1);
    assert!(!c.path("nothing").exists());

    let missing_file = wordsem(&["synth", "--vocab", p(&c.path("absent.json")), "--out", p(&c.path("d2"))]);
    assert_eq!(code(&missing_file), 2);
    assert!(!c.path("d2").exists());

    let data = c.path("data");
    let duplicate = c.query(&["--task", "concept-to-image", "--data", p(&data), "--expr", "vertebrate + vertebrate"]);
    assert_eq!(code(&duplicate), 1, "{}", String::from_utf8_lossy(&duplicate.stderr));

    let unknown = c.query(&["--task", "concept-to-image", "--data", p(&data), "--expr", "mammal"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8(unknown.stderr).unwrap().contains("mammal"));

    let bad_task = wordsem(&[
        "eval",
        "--checkpoint",
        p(&c.path("run/net.bin")),
        "--vocab",
        p(&c.path("vocab.json")),
        "--data",
        p(&data),
        "--tasks",
        "image-to-nothing",
        "--out",
        p(&c.path("e2")),
    ]);
    assert_eq!(code(&bad_task), 1);

    assert_eq!(code(&wordsem(&["--help"])), 0);
}

#[test]
fn existing_outputs_need_force() {
    let c = Chain::build();
    let args = |force: bool| {
        let mut a = vec![
            "train".to_string(),
            "--vocab".into(),
            p(&c.path("vocab.json")).into(),
            "--data".into(),
            p(&c.path("data")).into(),
            "--epochs".into(),
            "1".into(),
            "--out".into(),
            p(&c.path("run")).into(),
        ];
        if force {
            a.push("--force".into());
        }
        a
    };
    let before = fs::read(c.path("run/net.bin")).unwrap();
    let refused = wordsem(&args(false).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_eq!(code(&refused), 1);
    assert_eq!(fs::read(c.path("run/net.bin")).unwrap(), before);

    let forced = wordsem(&args(true).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_eq!(code(&forced), 0);
    assert_ne!(fs::read(c.path("run/net.bin")).unwrap(), before);
}
