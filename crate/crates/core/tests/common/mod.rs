//! Fixtures, brute-force oracles and property checks shared by the
//! integration test targets.
#![allow(dead_code)]

pub mod oracles;
pub mod props;

use std::path::PathBuf;

use afg_core::feedback::{CommentTable, FeedbackReport, Grader, RuleSet};
use afg_core::ingest::{AnswerKey, Submission};
use afg_core::scoring::FixedScores;
use afg_core::structure::{FixedLabels, Label3};
use afg_core::textproc::Segmenter;

use Label3::{Background as B, Observation as O, Technique as T};

/// Six-sentence nitration abstract with its reference labelling.
pub const NITRATION: [(&str, Label3); 6] = [
    ("Nitro-anilides are compounds essential for manufacturing a variety of chemical compounds, including pharmaceuticals, dyes and explosives.", B),
    ("Traditional methods use concentrated sulfuric and nitric acids, where reaction conditions are harsh and have low tolerance for other functional groups.", B),
    ("They were replaced by using nitrate salt reagents, which can be difficult to prepare and, from the resultant metal oxides, have a low atom economy.", T),
    ("More recent methods use AgNO2 to selectively nitrate arenes, but this method uses high quantities of rare metals, which is unsustainable.", B),
    ("This reaction uses NaNO2 and K2S2O8 in CH3CN, using catalytic AgNO2, to selectively nitrate the ortho positions on a variety of arenes, displaying high regioselectivity and chemoselectivity as well as moderate to high yields with a selection of substitutions on the starting anilide.", O),
    ("The mechanism proceeds through silver chelation and a subsequent radical mechanism, and the silver catalyst is regenerated by the K2S2O8 oxidant.", B),
];

pub const NITRATION_COMMENTS: [&str; 3] = [
    "Your discussion of the paper’s background has a good amount of detail.",
    "It might be useful to outline the Techniques the model uses in a bit more detail.",
    "It may be worth making sure that the discussion of the conclusions of the paper are clearer.",
];

/// Seven-sentence alkylation abstract from the complete worked submission.
pub const ALKYLATION: [(&str, Label3); 7] = [
    ("To combat the issues of toxic chemicals and by-products, noble and precious metal catalysts, and expensive phosphorus ligands, a new method of alkylation of amines was devised.", B),
    ("N-ethylation and N-methylation of a broad range of aliphatic and aromatic compounds were demonstrated using a (cyclopentadienone) iron tricarbonyl complex under basic conditions.", B),
    ("These compounds were ethylated or methylated using ethanol or methanol.", T),
    ("The use of methanol was more energetically demanding due to its higher enthalpy of dehydrogenation.", O),
    ("Consequently, a change in hydrogen pressure was required for selective dehydration over dehydrogenation to methylate some compounds.", O),
    ("The method shown produced mono- or dialkylated compounds in high yields.", O),
    ("DFT calculations revealed potential pathways for the reaction and highlighted the role of hydrogen pressure in driving the equilibrium towards one intermediate and hence the reduction of imines.", O),
];

pub const ALKYLATION_COMMENTS: [&str; 3] = [
    "A more balanced discussion of the background of the paper, the techniques of the paper and the observations and conclusions the paper made might improve your work.",
    "It might be worth outlining the methods of the paper in greater detail.",
    "The abstract contains discussion of each aspect of the paper in a logical order.",
];

pub const ALKYLATION_RSC: &str =
    "A. Lator, S. Gaillard, A. Poater and J.-L. Renaud, Organic Letters, 2018, 20, 5985–5990.";
pub const ALKYLATION_ACS: &str = "Lator, A.; Gaillard, S.; Poater, A.; Renaud, J.-L. Well-Defined Phosphine-Free Iron-Catalyzed N-Ethylation and N-Methylation of Amines with Ethanol and Methanol. Organic Letters 2018, 20 (19), 5985–5990.";
/// The ACS reference with every author replaced.
pub const WRONG_AUTHORS_ACS: &str = "Smith, B.; Jones, C.; Brown, D.; White, E. Well-Defined Phosphine-Free Iron-Catalyzed N-Ethylation and N-Methylation of Amines with Ethanol and Methanol. Organic Letters 2018, 20 (19), 5985–5990.";

pub fn join(sentences: &[(&str, Label3)]) -> String {
    sentences.iter().map(|(s, _)| *s).collect::<Vec<_>>().join(" ")
}

pub fn labels(sentences: &[(&str, Label3)]) -> Vec<Label3> {
    sentences.iter().map(|(_, l)| *l).collect()
}

pub fn submission(id: &str, abstract_text: String) -> Submission {
    Submission {
        submission_id: id.into(),
        paper_id: "lator-2018".into(),
        impact_factor: 6.005,
        ref_rsc: ALKYLATION_RSC.into(),
        ref_acs: ALKYLATION_ACS.into(),
        times_cited: 10,
        abstract_text,
        human_marks: None,
    }
}

pub fn alkylation_submission() -> Submission {
    submission("alkylation", join(&ALKYLATION))
}

pub fn nitration_submission() -> Submission {
    submission("nitration", join(&NITRATION))
}

pub fn answer_key() -> AnswerKey {
    AnswerKey {
        paper_id: "lator-2018".into(),
        impact_factor: 6.005,
        ref_rsc: ALKYLATION_RSC.into(),
        ref_acs: ALKYLATION_ACS.into(),
        times_cited: 42,
    }
}

pub fn oracle_labels() -> FixedLabels {
    FixedLabels::from_pairs(NITRATION.iter().chain(&ALKYLATION).copied())
}

/// Abstract score 0.5, i.e. 3 of 6 marks, for both worked submissions.
pub fn oracle_scores() -> FixedScores {
    FixedScores(
        [("alkylation".to_string(), 0.5), ("nitration".to_string(), 0.5)]
            .into_iter()
            .collect(),
    )
}

/// Feedback reports for both worked submissions under the default rules.
pub fn worked_reports() -> Vec<FeedbackReport> {
    let (scores, labels) = (oracle_scores(), oracle_labels());
    let (segmenter, rules, comments) = (Segmenter::default(), RuleSet::default(), CommentTable::default());
    let grader = Grader {
        scorer: &scores,
        classifier: &labels,
        segmenter: &segmenter,
        rules: &rules,
        comments: &comments,
    };
    grader
        .reports(&[alkylation_submission(), nitration_submission()], &[answer_key()])
        .expect("worked submissions grade")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares `actual` with `tests/golden/<name>`; rewrites the file instead
/// when `AFG_UPDATE_GOLDEN=1`.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var("AFG_UPDATE_GOLDEN").as_deref() == Ok("1") {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{name} differs from golden file"))
    }
}
