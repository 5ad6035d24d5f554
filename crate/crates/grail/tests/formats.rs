use grail::dataset;
use grail::inspect;
use grail::results::{ResultRow, ResultsTable};
use grail::weights::{PolicyConfig, WeightFile};
use grail::{parse_rules, ASTERIX_RULES};
use grail_core::envs::{DecoyMode, EnvConfig, EnvKind};
use grail_core::{ClauseWeights, ReasonerConfig};

fn policy_config() -> PolicyConfig {
    PolicyConfig {
        env: "asterix-mini".into(),
        objects_per_type: 1,
        use_gaze: true,
        reasoner: ReasonerConfig::default(),
        predicates: Default::default(),
        gaze_model: None,
    }
}

fn asterix_file(weights: Vec<f64>) -> WeightFile {
    let rb = parse_rules(EnvKind::Asterix, ASTERIX_RULES, "asterix").unwrap();
    WeightFile::new(ASTERIX_RULES, &rb, &ClauseWeights(weights), policy_config()).unwrap()
}

#[test]
fn dataset_round_trips_through_disk() {
    let rb = parse_rules(EnvKind::Asterix, ASTERIX_RULES, "asterix").unwrap();
    let mut cfg = EnvConfig::asterix().with_objects(2);
    cfg.decoy = Some(DecoyMode::Correlated);
    let data = dataset::generate(&cfg, &rb, 3, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    dataset::write(dir.path(), &data).unwrap();
    let back = dataset::read(dir.path()).unwrap();
    assert_eq!(back.records, data.records);
    assert_eq!(back.config, data.config);
    assert_eq!(back.stats, data.stats);
    assert_eq!(back.stats.samples, data.records.len());
}

#[test]
fn regeneration_is_byte_identical() {
    let rb = parse_rules(EnvKind::Asterix, ASTERIX_RULES, "asterix").unwrap();
    let cfg = EnvConfig::asterix();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    dataset::write(a.path(), &dataset::generate(&cfg, &rb, 4, 9).unwrap()).unwrap();
    dataset::write(b.path(), &dataset::generate(&cfg, &rb, 4, 9).unwrap()).unwrap();
    for f in [dataset::RECORDS_FILE, dataset::STATS_FILE] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn corrupt_dataset_line_is_rejected() {
    let rb = parse_rules(EnvKind::Asterix, ASTERIX_RULES, "asterix").unwrap();
    let data = dataset::generate(&EnvConfig::asterix(), &rb, 1, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    dataset::write(dir.path(), &data).unwrap();
    let path = dir.path().join(dataset::RECORDS_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"action\":\"", "\"action\":\"x", 1)).unwrap();
    assert!(dataset::read(dir.path()).is_err());
}

#[test]
fn weight_file_round_trips_exactly() {
    let w: Vec<f64> = (0..12).map(|i| (i as f64 * 0.0837 + 1.0 / 3.0) % 1.0).collect();
    let file = asterix_file(w.clone());
    let back = WeightFile::parse(&file.render().unwrap()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.weights().0, w);
    back.check_rules(ASTERIX_RULES).unwrap();
}

#[test]
fn rule_hash_mismatch_is_explicit() {
    let file = asterix_file(vec![0.5; 12]);
    let edited = format!("{ASTERIX_RULES}\n% edited\n");
    let err = file.check_rules(&edited).unwrap_err();
    assert!(matches!(err, grail::Error::HashMismatch { .. }), "{err}");
}

#[test]
fn malformed_weight_files_are_rejected() {
    let good = asterix_file(vec![0.5; 12]).render().unwrap();
    assert!(WeightFile::parse(&good.replacen("0.5\t", "1.5\t", 1)).is_err());
    assert!(WeightFile::parse(&good.replacen("# clauses 12", "# clauses 13", 1)).is_err());
    assert!(WeightFile::parse(&good.replacen("v1", "v9", 1)).is_err());
    assert!(WeightFile::parse("").is_err());
}

#[test]
fn inspect_puts_heaviest_rule_first() {
    let mut w = vec![0.25; 12];
    w[11] = 0.8180;
    let rows = inspect::rows(&asterix_file(w));
    assert_eq!(rows[0].rule, "left_bonus");
    let table = inspect::render(&rows);
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("Rule"));
    assert!(header.contains("Primary condition") && header.ends_with("Weight"));
    lines.next();
    let top = lines.next().unwrap();
    assert!(top.starts_with("left_bonus"));
    assert!(top.ends_with("0.8180"));
}

#[test]
fn inspect_keeps_file_order_on_ties() {
    let rows = inspect::rows(&asterix_file(vec![0.5; 12]));
    assert_eq!(rows[0].rule, "noop_far_enemy");
    assert_eq!(rows[11].rule, "left_bonus");
}

#[test]
fn empty_weight_file_gives_header_only_table() {
    let rb = parse_rules(EnvKind::Asterix, "", "empty").unwrap();
    let file = WeightFile::new("", &rb, &ClauseWeights(vec![]), policy_config()).unwrap();
    let back = WeightFile::parse(&file.render().unwrap()).unwrap();
    let table = inspect::render(&inspect::rows(&back));
    assert_eq!(table.lines().count(), 2);
    assert!(table.starts_with("Rule"));
}

#[test]
fn primary_condition_skips_generic_predicates() {
    assert_eq!(
        inspect::primary_condition("left_bonus(X):-type(O1,player),type(O2,bonus),closeby(O1,O2),on_right(O1,O2)."),
        "on_right"
    );
    assert_eq!(
        inspect::primary_condition("noop(X):-type(O1,player),type(O2,enemy),notcloseby(O1,O2)."),
        "notcloseby"
    );
}

#[test]
fn results_round_trip_and_render() {
    let row = ResultRow {
        method: "GRAIL".into(),
        env: "asterix-mini".into(),
        train_objects: 1,
        eval_objects: 3,
        fraction: 0.25,
        train_seed: 4,
        mean: 12.5,
        std: 3.25,
        n_seeds: 50,
        accuracy: Some(0.9),
    };
    let table = ResultsTable {
        rows: vec![row.clone(), ResultRow { accuracy: None, ..row }],
    };
    assert_eq!(ResultsTable::from_jsonl(&table.to_jsonl().unwrap()).unwrap(), table);
    let text = table.render();
    assert!(text.contains("12.50 ± 3.25"));
    assert_eq!(text.lines().count(), 3);
    assert_eq!(table.to_tsv().lines().count(), 3);
}
