//! Result tables: one JSON object per row for machines, an aligned
//! `mean ± std` rendering for people.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub env: String,
    pub train_objects: usize,
    pub eval_objects: usize,
    pub fraction: f64,
    pub train_seed: u64,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
    /// Greedy-action agreement with held-out expert steps, when measured.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

/// `mean ± std` with two decimals.
pub fn mean_pm_std(mean: f64, std: f64) -> String {
    format!("{mean:.2} ± {std:.2}")
}

impl ResultsTable {
    pub fn to_jsonl(&self) -> Result<String, serde_json::Error> {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(ResultsTable { rows })
    }

    /// Tab-separated columns for plotting tools.
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("method\tenv\ttrain_objects\teval_objects\tfraction\ttrain_seed\tmean\tstd\tn_seeds\taccuracy\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.method,
                r.env,
                r.train_objects,
                r.eval_objects,
                r.fraction,
                r.train_seed,
                r.mean,
                r.std,
                r.n_seeds,
                r.accuracy.map(|a| a.to_string()).unwrap_or_default()
            ));
        }
        out
    }

    pub fn render(&self) -> String {
        let headers = ["Method", "Env", "Train obj", "Eval obj", "Fraction", "Seed", "Score", "Seeds", "Accuracy"];
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.method.clone(),
                    r.env.clone(),
                    r.train_objects.to_string(),
                    r.eval_objects.to_string(),
                    format!("{:.2}", r.fraction),
                    r.train_seed.to_string(),
                    mean_pm_std(r.mean, r.std),
                    r.n_seeds.to_string(),
                    r.accuracy.map(|a| format!("{:.4}", a)).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: Vec<&str>| {
            let parts: Vec<String> = row
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(k, (c, &w))| {
                    let pad = w - c.chars().count();
                    if k < 2 {
                        format!("{c}{}", " ".repeat(pad))
                    } else {
                        format!("{}{c}", " ".repeat(pad))
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(headers.to_vec());
        for row in &cells {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}
