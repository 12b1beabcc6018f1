use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::comments::{correction_suffix, Question};
use super::FeedbackReport;
use crate::scoring::MarkSheet;
use crate::structure::Label3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReportFormat {
    Terminal { color: bool },
    Html,
    Markdown,
}

fn hex_color(l: Label3) -> &'static str {
    match l {
        Label3::Background => "#FFFF00",
        Label3::Technique => "#90EE90",
        Label3::Observation => "#FFC0CB",
    }
}

fn color_name(l: Label3) -> &'static str {
    match l {
        Label3::Background => "yellow",
        Label3::Technique => "green",
        Label3::Observation => "pink",
    }
}

/// ANSI background: yellow, green, magenta.
fn ansi_background(l: Label3) -> u8 {
    match l {
        Label3::Background => 43,
        Label3::Technique => 42,
        Label3::Observation => 45,
    }
}

fn mark_phrase(value: f64) -> String {
    if value == 1.0 {
        "1 mark".to_string()
    } else {
        format!("{value} marks")
    }
}

/// The marks block: four question lines, a blank line, the abstract line.
pub fn marks_block(marks: &MarkSheet) -> Vec<String> {
    let mut lines: Vec<String> = Question::ALL
        .into_iter()
        .zip(marks.questions())
        .map(|(q, m)| {
            let suffix = correction_suffix(m).unwrap_or_default();
            format!("{}: {}{suffix}", q.title(), mark_phrase(m.value))
        })
        .collect();
    lines.push(String::new());
    lines.push(format!("Abstract: {}", mark_phrase(f64::from(marks.abstract_mark))));
    lines
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn terminal(r: &FeedbackReport, color: bool) -> String {
    let paint = |l: Label3, text: &str| {
        if color {
            format!("\x1b[30;{}m{text}\x1b[0m", ansi_background(l))
        } else {
            format!("[{}] {text}", l.tag())
        }
    };
    let mut out = String::new();
    writeln!(out, "Submission {}", r.submission_id).unwrap();
    writeln!(out, "\nMarks\n").unwrap();
    for line in marks_block(&r.marks) {
        writeln!(out, "{line}").unwrap();
    }
    writeln!(out, "\nFeedback\n").unwrap();
    let body: Vec<String> = r.labeled_abstract.sentences.iter().map(|s| paint(s.label, &s.text)).collect();
    writeln!(out, "{}\n", body.join(" ")).unwrap();
    let legend: Vec<String> = Label3::ALL.iter().map(|&l| paint(l, l.as_str())).collect();
    writeln!(out, "{}\n", legend.join(" ")).unwrap();
    for c in &r.abstract_comments {
        writeln!(out, "{c}").unwrap();
    }
    writeln!(out, "\nQuestion feedback\n").unwrap();
    for (q, c) in r.question_comments.iter() {
        writeln!(out, "{}: {c}", q.title()).unwrap();
    }
    out
}

fn html(r: &FeedbackReport) -> String {
    let id = escape_html(&r.submission_id);
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    writeln!(out, "<title>Feedback for {id}</title>").unwrap();
    out.push_str("</head>\n<body style=\"font-family:sans-serif;max-width:48em;margin:2em auto;line-height:1.5\">\n");
    writeln!(out, "<h1>Feedback for {id}</h1>").unwrap();
    out.push_str("<h2>Marks</h2>\n<p>\n");
    let lines = marks_block(&r.marks);
    let (questions, abstract_line) = lines.split_at(4);
    writeln!(out, "{}", questions.iter().map(|l| escape_html(l)).collect::<Vec<_>>().join("<br>\n")).unwrap();
    writeln!(out, "</p>\n<p>{}</p>", escape_html(&abstract_line[1])).unwrap();
    out.push_str("<h2>Feedback</h2>\n<p>\n");
    for s in &r.labeled_abstract.sentences {
        writeln!(
            out,
            "<span class=\"sentence\" data-label=\"{}\" style=\"background-color:{}\">{}</span>",
            s.label,
            hex_color(s.label),
            escape_html(&s.text)
        )
        .unwrap();
    }
    out.push_str("</p>\n<ul style=\"list-style:none;padding:0\">\n");
    for l in Label3::ALL {
        writeln!(
            out,
            "<li style=\"display:inline-block;margin-right:1em;background-color:{}\">{l}</li>",
            hex_color(l)
        )
        .unwrap();
    }
    out.push_str("</ul>\n<ul>\n");
    for c in &r.abstract_comments {
        writeln!(out, "<li>{}</li>", escape_html(c)).unwrap();
    }
    out.push_str("</ul>\n<h2>Question feedback</h2>\n<ul>\n");
    for (q, c) in r.question_comments.iter() {
        writeln!(out, "<li>{}: {}</li>", escape_html(q.title()), escape_html(c)).unwrap();
    }
    out.push_str("</ul>\n</body>\n</html>\n");
    out
}

fn markdown(r: &FeedbackReport) -> String {
    let mut out = String::new();
    writeln!(out, "# Feedback for {}\n\n## Marks\n", r.submission_id).unwrap();
    let lines = marks_block(&r.marks);
    for l in &lines[..4] {
        writeln!(out, "- {l}").unwrap();
    }
    writeln!(out, "\n{}\n\n## Feedback\n", lines[5]).unwrap();
    for s in &r.labeled_abstract.sentences {
        writeln!(out, "- **{}** {}", s.label, s.text).unwrap();
    }
    let legend: Vec<String> = Label3::ALL.iter().map(|&l| format!("**{l}** ({})", color_name(l))).collect();
    writeln!(out, "\nLegend: {}\n", legend.join(", ")).unwrap();
    for c in &r.abstract_comments {
        writeln!(out, "> {c}").unwrap();
    }
    out.push_str("\n## Question feedback\n\n");
    for (q, c) in r.question_comments.iter() {
        writeln!(out, "- {}: {c}", q.title()).unwrap();
    }
    out
}

pub fn render_report(report: &FeedbackReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Terminal { color } => terminal(report, color),
        ReportFormat::Html => html(report),
        ReportFormat::Markdown => markdown(report),
    }
}
