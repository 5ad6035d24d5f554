//! Learned-weight tables: one row per rule, heaviest first.

use serde::Serialize;

use crate::weights::WeightFile;

/// Body predicates too generic to characterise a rule.
const BACKGROUND: [&str; 2] = ["type", "visible"];
/// Proximity tests shared by most rules; shown only when nothing else is left.
const PROXIMITY: [&str; 3] = ["closeby", "notcloseby", "closest"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InspectRow {
    pub rule: String,
    pub primary_condition: String,
    pub weight: f64,
}

fn head_name(clause: &str) -> &str {
    clause.split('(').next().unwrap_or(clause).trim()
}

fn body_predicates(clause: &str) -> Vec<&str> {
    let Some((_, body)) = clause.split_once(":-") else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => {
                if depth == 0 {
                    let name = body[start..i].trim().trim_start_matches(',').trim();
                    if !out.contains(&name) {
                        out.push(name);
                    }
                }
                depth += 1;
            }
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => start = i + 1,
            _ => {}
        }
    }
    out
}

/// The body predicates that set a rule apart from its siblings.
pub fn primary_condition(clause: &str) -> String {
    let preds: Vec<&str> = body_predicates(clause)
        .into_iter()
        .filter(|p| !BACKGROUND.contains(p))
        .collect();
    let specific: Vec<&str> = preds.iter().copied().filter(|p| !PROXIMITY.contains(p)).collect();
    if specific.is_empty() {
        preds.join(" + ")
    } else {
        specific.join(" + ")
    }
}

/// Rows sorted by descending weight; equal weights keep file order.
pub fn rows(file: &WeightFile) -> Vec<InspectRow> {
    let mut rows: Vec<InspectRow> = file
        .entries
        .iter()
        .map(|(clause, w)| InspectRow {
            rule: head_name(clause).to_string(),
            primary_condition: primary_condition(clause),
            weight: *w,
        })
        .collect();
    rows.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    rows
}

pub fn render(rows: &[InspectRow]) -> String {
    let headers = ["Rule", "Primary condition", "Weight"];
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|r| [r.rule.clone(), r.primary_condition.clone(), format!("{:.4}", r.weight)])
        .collect();
    let mut width = headers.map(str::len);
    for c in &cells {
        for k in 0..3 {
            width[k] = width[k].max(c[k].chars().count());
        }
    }
    let line = |c: [&str; 3]| {
        format!(
            "{:<w0$} | {:<w1$} | {:>w2$}\n",
            c[0],
            c[1],
            c[2],
            w0 = width[0],
            w1 = width[1],
            w2 = width[2]
        )
    };
    let mut out = line(headers);
    out.push_str(&format!(
        "{}-+-{}-+-{}\n",
        "-".repeat(width[0]),
        "-".repeat(width[1]),
        "-".repeat(width[2])
    ));
    for c in &cells {
        out.push_str(&line([&c[0], &c[1], &c[2]]));
    }
    out
}
