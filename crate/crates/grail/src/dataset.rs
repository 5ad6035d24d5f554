//! Demonstration datasets on disk: one JSON record per step in
//! `data.jsonl`, plus a `stats.json` sidecar holding the environment
//! configuration, the dataset statistics and per-episode summaries.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use grail_core::envs::{
    dataset_stats, generate_dataset, DatasetStats, EnvConfig, EnvKind, EpisodeSummary, Expert,
    GenerateOptions, StepRecord,
};
use grail_core::grounding::{Layout, ObjectState, Orientation, SoftPredicateParams};
use grail_core::{Fixation, FixationList, LogicState, RuleBase};
use serde::{Deserialize, Serialize};

use crate::Error;

pub const RECORDS_FILE: &str = "data.jsonl";
pub const STATS_FILE: &str = "stats.json";

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub config: EnvConfig,
    pub records: Vec<StepRecord>,
    pub episodes: Vec<EpisodeSummary>,
    pub stats: DatasetStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub slot: usize,
    #[serde(rename = "type")]
    pub ty: String,
    pub present: bool,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub orient: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLine {
    pub episode_id: u64,
    pub t: usize,
    pub env: String,
    pub objects: Vec<ObjectRecord>,
    pub action: String,
    pub fixations: Vec<[f64; 2]>,
    pub fired_rule: Option<usize>,
    pub score_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub env: String,
    pub samples: usize,
    pub trajectories: usize,
    pub max_object_count: usize,
    pub config: EnvConfig,
    pub episodes: Vec<EpisodeSummary>,
}

/// Rolls the scripted expert. The decoy slot, if any, is invisible to it.
pub fn generate(cfg: &EnvConfig, rb: &RuleBase, episodes: usize, seed: u64) -> Result<Dataset, Error> {
    let ignore: Vec<usize> = cfg.decoy_slot().into_iter().collect();
    let expert = Expert::new(rb, &cfg.inventory(), &SoftPredicateParams::default(), &ignore)?;
    let (records, episodes, stats) = generate_dataset(
        cfg,
        &expert,
        &GenerateOptions {
            n_episodes: episodes,
            seed,
        },
    )?;
    Ok(Dataset {
        config: cfg.clone(),
        records,
        episodes,
        stats,
    })
}

pub fn to_line(rec: &StepRecord, cfg: &EnvConfig) -> StepLine {
    let inv = cfg.inventory();
    StepLine {
        episode_id: rec.episode_id,
        t: rec.t,
        env: cfg.kind.name().to_string(),
        objects: rec
            .state
            .objects
            .iter()
            .enumerate()
            .map(|(slot, o)| ObjectRecord {
                slot,
                ty: inv.types[o.type_id].clone(),
                present: o.present,
                x: o.x,
                y: o.y,
                w: o.w,
                h: o.h,
                orient: o.orientation.map(|d| match d {
                    Orientation::Left => "left".to_string(),
                    Orientation::Right => "right".to_string(),
                }),
            })
            .collect(),
        action: cfg.kind.actions()[rec.action].to_string(),
        fixations: rec.fixations.0.iter().map(|f| [f.x, f.y]).collect(),
        fired_rule: rec.fired_rule,
        score_delta: rec.score_delta,
    }
}

pub fn from_line(line: &StepLine, cfg: &EnvConfig) -> Result<StepRecord, Error> {
    let inv = cfg.inventory();
    let bad = |what: String| Error::Format(format!("episode {} step {}: {what}", line.episode_id, line.t));
    if line.env != cfg.kind.name() {
        return Err(bad(format!("environment {} does not match {}", line.env, cfg.kind.name())));
    }
    let action = cfg
        .kind
        .actions()
        .iter()
        .position(|a| *a == line.action)
        .ok_or_else(|| bad(format!("unknown action {}", line.action)))?;
    let objects = line
        .objects
        .iter()
        .map(|o| {
            let type_id = inv.type_id(&o.ty).ok_or_else(|| bad(format!("unknown type {}", o.ty)))?;
            let orientation = match o.orient.as_deref() {
                None => None,
                Some("left") => Some(Orientation::Left),
                Some("right") => Some(Orientation::Right),
                Some(other) => return Err(bad(format!("unknown orientation {other}"))),
            };
            Ok(ObjectState {
                present: o.present,
                type_id,
                x: o.x,
                y: o.y,
                w: o.w,
                h: o.h,
                orientation,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let state = LogicState {
        layout: layout_of(cfg.kind),
        frame_w: cfg.frame_w,
        frame_h: cfg.frame_h,
        objects,
    };
    state.validate(&inv).map_err(|e| bad(e.to_string()))?;
    Ok(StepRecord {
        episode_id: line.episode_id,
        t: line.t,
        state,
        action,
        fixations: FixationList(line.fixations.iter().map(|p| Fixation::at(p[0], p[1])).collect()),
        fired_rule: line.fired_rule,
        score_delta: line.score_delta,
    })
}

fn layout_of(kind: EnvKind) -> Layout {
    match kind {
        EnvKind::Seaquest => Layout::Seaquest,
        EnvKind::Asterix | EnvKind::Freeway => Layout::Asterix,
    }
}

pub fn write(dir: &Path, data: &Dataset) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(File::create(dir.join(RECORDS_FILE))?);
    for rec in &data.records {
        serde_json::to_writer(&mut out, &to_line(rec, &data.config))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let stats = StatsFile {
        env: data.config.kind.name().to_string(),
        samples: data.stats.samples,
        trajectories: data.stats.trajectories,
        max_object_count: data.stats.max_object_count,
        config: data.config.clone(),
        episodes: data.episodes.clone(),
    };
    fs::write(dir.join(STATS_FILE), serde_json::to_string_pretty(&stats)? + "\n")?;
    Ok(())
}

pub fn read(dir: &Path) -> Result<Dataset, Error> {
    let stats_path = dir.join(STATS_FILE);
    let stats: StatsFile = serde_json::from_str(
        &fs::read_to_string(&stats_path).map_err(|e| Error::Path(stats_path.clone(), e))?,
    )?;
    let path = dir.join(RECORDS_FILE);
    let file = File::open(&path).map_err(|e| Error::Path(path.clone(), e))?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(from_line(&serde_json::from_str(&line)?, &stats.config)?);
    }
    let computed = dataset_stats(&records, &stats.config);
    if computed.samples != stats.samples || computed.trajectories != stats.trajectories {
        return Err(Error::Format(format!(
            "{} lists {} samples in {} trajectories but {} holds {} in {}",
            STATS_FILE, stats.samples, stats.trajectories, RECORDS_FILE, computed.samples, computed.trajectories
        )));
    }
    Ok(Dataset {
        config: stats.config,
        records,
        episodes: stats.episodes,
        stats: computed,
    })
}
