use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use afg_core::ingest::{serialize_rct, AnswerKey, HumanMarks, Submission};
use afg_core::synth::{rct_corpus, scored_corpus, to_tsv, Family};
use serde_json::{json, Value};
use tempfile::TempDir;

const RSC: &str = "A. Lator, S. Gaillard, A. Poater and J.-L. Renaud, Organic Letters, 2018, 20, 5985–5990.";
const ACS: &str = "Lator, A.; Gaillard, S.; Poater, A.; Renaud, J.-L. Well-Defined Phosphine-Free Iron-Catalyzed N-Ethylation and N-Methylation of Amines with Ethanol and Methanol. Organic Letters 2018, 20 (19), 5985–5990.";

const SENTENCES: [(&str, &str); 7] = [
    ("To combat the issues of toxic chemicals and by-products, noble and precious metal catalysts, and expensive phosphorus ligands, a new method of alkylation of amines was devised.", "BACKGROUND"),
    ("N-ethylation and N-methylation of a broad range of aliphatic and aromatic compounds were demonstrated using a (cyclopentadienone) iron tricarbonyl complex under basic conditions.", "BACKGROUND"),
    ("These compounds were ethylated or methylated using ethanol or methanol.", "TECHNIQUE"),
    ("The use of methanol was more energetically demanding due to its higher enthalpy of dehydrogenation.", "OBSERVATION"),
    ("Consequently, a change in hydrogen pressure was required for selective dehydration over dehydrogenation to methylate some compounds.", "OBSERVATION"),
    ("The method shown produced mono- or dialkylated compounds in high yields.", "OBSERVATION"),
    ("DFT calculations revealed potential pathways for the reaction and highlighted the role of hydrogen pressure in driving the equilibrium towards one intermediate and hence the reduction of imines.", "OBSERVATION"),
];

fn submission(id: &str, human: Option<u8>) -> Submission {
    Submission {
        submission_id: id.into(),
        paper_id: "lator-2018".into(),
        impact_factor: 6.005,
        ref_rsc: RSC.into(),
        ref_acs: ACS.into(),
        times_cited: 10,
        abstract_text: SENTENCES.map(|(s, _)| s).join(" "),
        human_marks: human.map(|m| HumanMarks {
            q1_impact: 1.0,
            q2_rsc: 1.0,
            q3_acs: 1.0,
            q4_cited: 0.0,
            abstract_mark: m,
        }),
    }
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn write_json(&self, name: &str, value: &impl serde::Serialize) -> PathBuf {
        self.write(name, serde_json::to_string(value).unwrap())
    }

    /// Writes `afg.toml` with a tiny model so training runs in seconds.
    fn config(&self, paths: &str) -> PathBuf {
        self.write(
            "afg.toml",
            format!(
                "seed = 5\nout = \"out\"\n\n[paths]\n{paths}\n\n[tsv.ranges]\nA = [0, 12]\nB = [1, 6]\n\n\
                 [model]\nembed_dim = 6\nhidden_dim = 5\nattention_dim = 4\nmax_vocab = 300\nmin_frequency = 1\n\n\
                 [train]\nepochs = 1\nbatch_size = 16\n\n[finetune]\nepochs = 1\nbatch_size = 8\n"
            ),
        )
    }

    fn grading_fixture(&self) -> PathBuf {
        self.write_json("submissions.json", &[submission("alkylation", None)]);
        self.write_json(
            "keys.json",
            &[AnswerKey {
                paper_id: "lator-2018".into(),
                impact_factor: 6.005,
                ref_rsc: RSC.into(),
                ref_acs: ACS.into(),
                times_cited: 42,
            }],
        );
        self.write_json("scores.json", &json!({ "alkylation": 0.5 }));
        let labels: serde_json::Map<String, Value> = SENTENCES.iter().map(|(s, l)| (s.to_string(), json!(l))).collect();
        self.write_json("labels.json", &labels);
        self.config(
            "submissions = \"submissions.json\"\nkeys = \"keys.json\"\n\
             oracle_scores = \"scores.json\"\noracle_labels = \"labels.json\"",
        )
    }

    fn afg(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_afg"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("AFG_CONFIG")
            .output()
            .unwrap()
    }

    fn read_json(&self, rel: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(rel)).unwrap()).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn config_arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn grade_worked_submission() {
    let ws = Workspace::new();
    let cfg = ws.grading_fixture();
    let out = ws.afg(&["--config", &config_arg(&cfg), "--no-color", "grade", "--format", "markdown"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let marks = ws.read_json("out/marks.json");
    let sheet = &marks[0];
    let values: Vec<f64> = ["q1_impact", "q2_rsc", "q3_acs", "q4_cited"]
        .iter()
        .map(|q| sheet[q]["value"].as_f64().unwrap())
        .collect();
    assert_eq!(values, [1.0, 1.0, 1.0, 0.0]);
    assert_eq!(sheet["abstract_mark"], 3);

    let report = fs::read_to_string(ws.path("out/reports/alkylation.md")).unwrap();
    for line in [
        "Number of times Cited: 0 marks, the correct answer is 42, you gave 10",
        "A more balanced discussion of the background of the paper, the techniques of the paper and the observations and conclusions the paper made might improve your work.",
        "It might be worth outlining the methods of the paper in greater detail.",
        "The abstract contains discussion of each aspect of the paper in a logical order.",
    ] {
        assert!(report.contains(line), "missing {line:?}");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[T] These compounds were ethylated"));
    assert_eq!(ws.read_json("out/run.json")["command"], "grade");
}

#[test]
fn grade_json_output_and_derived_keys() {
    let ws = Workspace::new();
    let cfg = ws.grading_fixture();
    fs::remove_file(ws.path("keys.json")).unwrap();
    let text = fs::read_to_string(&cfg).unwrap().replace("keys = \"keys.json\"\n", "");
    fs::write(&cfg, text).unwrap();
    let out = ws.afg(&["--config", &config_arg(&cfg), "--json", "grade"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let marks: Value = serde_json::from_slice(&out.stdout).unwrap();
    // The only submission is its own key, so every answer is correct.
    assert_eq!(marks[0]["total"], 7.0);
    assert!(ws.path("out/reports/alkylation.html").exists());
}

#[test]
fn grading_is_deterministic() {
    let ws = Workspace::new();
    let cfg = ws.grading_fixture();
    let run = |out: &str| {
        let o = ws.afg(&["--config", &config_arg(&cfg), "--out", out, "grade"]);
        assert_eq!(code(&o), 0);
        (
            fs::read(ws.path(&format!("{out}/reports.json"))).unwrap(),
            fs::read(ws.path(&format!("{out}/reports/alkylation.html"))).unwrap(),
        )
    };
    assert_eq!(run("first"), run("second"));
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let cfg = ws.config("");
    assert_eq!(code(&ws.afg(&["--config", &config_arg(&cfg), "grade"])), 2);
    assert_eq!(code(&ws.afg(&["--config", "missing.toml", "grade"])), 2);

    let bad = ws.write("bad.toml", "[paths]\nsubmission = \"x\"\n");
    assert_eq!(code(&ws.afg(&["--config", &config_arg(&bad), "grade"])), 2);

    ws.write("empty.json", "[]");
    let cfg = ws.config("submissions = \"empty.json\"\noracle_scores = \"empty.json\"");
    assert_eq!(code(&ws.afg(&["--config", &config_arg(&cfg), "grade"])), 3);

    ws.write("broken.json", "{ not json");
    let cfg = ws.config("submissions = \"broken.json\"");
    assert_eq!(code(&ws.afg(&["--config", &config_arg(&cfg), "grade"])), 3);
}

#[test]
fn divergence_exit_code() {
    let ws = Workspace::new();
    ws.write("a.tsv", to_tsv(&scored_corpus(Family::A, 40, 3)));
    let cfg = ws.config("corpora = [\"a.tsv\"]");
    let text = fs::read_to_string(&cfg).unwrap().replace("epochs = 1\nbatch_size = 16", "epochs = 1\nbatch_size = 16\nlearning_rate = 1e300");
    fs::write(&cfg, text).unwrap();
    let out = ws.afg(&["--config", &config_arg(&cfg), "pretrain"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pretrain_finetune_and_eval() {
    let ws = Workspace::new();
    ws.write("a.tsv", to_tsv(&scored_corpus(Family::A, 120, 1)));
    ws.write("b.tsv", to_tsv(&scored_corpus(Family::B, 40, 1)));
    let cfg = ws.config("corpora = [\"a.tsv\"]\nfinetune_corpus = \"b.tsv\"\nbase_model = \"out/pretrained\"");
    let cfg = config_arg(&cfg);

    let out = ws.afg(&["--config", &cfg, "pretrain"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(ws.path("out/pretrained.afgm")).unwrap();
    assert!(ws.path("out/pretrained.vocab.txt").exists());
    assert_eq!(ws.read_json("out/pretrain_log.json")["seed"], 5);

    assert_eq!(code(&ws.afg(&["--config", &cfg, "--out", "again", "pretrain"])), 0);
    assert_eq!(first, fs::read(ws.path("again/pretrained.afgm")).unwrap());
    assert_eq!(code(&ws.afg(&["--config", &cfg, "--seed", "6", "--out", "other", "pretrain"])), 0);
    assert_ne!(first, fs::read(ws.path("other/pretrained.afgm")).unwrap());

    let out = ws.afg(&["--config", &cfg, "finetune"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let eval = ws.read_json("out/finetune_eval.json");
    assert_eq!(eval["n_eval"], 8);
    assert!(eval["finetuned"]["mae"].is_f64());

    // Every submission with human marks is scored by the fine-tuned model.
    let subs: Vec<Submission> = (0..4).map(|i| submission(&format!("s{i}"), Some(i))).collect();
    ws.write_json("marked.json", &subs);
    let cfg = ws.config("submissions = \"marked.json\"");
    let out = ws.afg(&["--config", &config_arg(&cfg), "eval", "--model", "out/finetuned"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(ws.read_json("out/eval.json")["n"], 4);
}

#[test]
fn eval_perfect_agreement() {
    let ws = Workspace::new();
    let subs: Vec<Submission> = (0..=6u8).map(|m| submission(&format!("s{m}"), Some(m))).collect();
    ws.write_json("marked.json", &subs);
    let scores: serde_json::Map<String, Value> =
        (0..=6u8).map(|m| (format!("s{m}"), json!(f64::from(m) / 6.0))).collect();
    ws.write_json("scores.json", &scores);
    let cfg = ws.config("submissions = \"marked.json\"\noracle_scores = \"scores.json\"");
    let out = ws.afg(&["--config", &config_arg(&cfg), "--json", "eval"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["exact_agreement"], 1.0);
    assert_eq!(report["abstract_marks"]["r2_standard"], 1.0);
    assert_eq!(report["confusion"]["labels"][6], "6");
    assert_eq!(report["confusion"]["counts"][6][6], 1);
}

#[test]
fn train_classifier_reports_accuracy() {
    let ws = Workspace::new();
    ws.write("rct.txt", serialize_rct(&rct_corpus(40, 0.0, 2)));
    let cfg = ws.config("rct = \"rct.txt\"");
    let out = ws.afg(&["--config", &config_arg(&cfg), "train-classifier", "--five-class"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = ws.read_json("out/classifier_eval.json");
    assert_eq!(report["five_class_training"], true);
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(ws.path("out/classifier.afgm").exists());
}
