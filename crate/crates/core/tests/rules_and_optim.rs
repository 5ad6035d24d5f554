use grail_core::logic::{
    asterix_signatures, clause_to_string, parse_rulebase, pretty_print, seaquest_signatures, validate_rulebase,
    DiagnosticKind, Severity,
};
use grail_core::optim::{adam_step, clip_gradient, project_unit_box, Adam};
use proptest::prelude::*;

const ASTERIX: &str = include_str!("../../../rules/asterix.rules");
const SEAQUEST: &str = include_str!("../../../rules/seaquest.rules");

#[test]
fn shipped_rule_files_round_trip() {
    for (text, sigs) in [(ASTERIX, asterix_signatures()), (SEAQUEST, seaquest_signatures())] {
        let rb = parse_rulebase(text, &sigs).unwrap();
        let again = parse_rulebase(&pretty_print(&rb), &sigs).unwrap();
        assert!(rb.same_structure(&again));
        assert_eq!(pretty_print(&again), pretty_print(&rb));
    }
}

#[test]
fn shipped_rule_files_have_no_errors() {
    let a = parse_rulebase(ASTERIX, &asterix_signatures()).unwrap();
    assert!(validate_rulebase(&a).iter().all(|d| d.severity == Severity::Warning));
    let s = parse_rulebase(SEAQUEST, &seaquest_signatures()).unwrap();
    assert!(validate_rulebase(&s).iter().all(|d| d.severity == Severity::Warning));
}

#[test]
fn weight_slots_are_a_permutation() {
    for (text, sigs) in [(ASTERIX, asterix_signatures()), (SEAQUEST, seaquest_signatures())] {
        let rb = parse_rulebase(text, &sigs).unwrap();
        let mut slots: Vec<usize> = rb.clauses.iter().map(|c| c.weight_slot).collect();
        slots.sort_unstable();
        assert_eq!(slots, (0..rb.len()).collect::<Vec<_>>());
    }
}

#[test]
fn parsing_is_deterministic() {
    let a = parse_rulebase(SEAQUEST, &seaquest_signatures()).unwrap();
    let b = parse_rulebase(SEAQUEST, &seaquest_signatures()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn repeated_clause_draws_a_duplicate_warning() {
    let sigs = asterix_signatures();
    let rb = parse_rulebase(ASTERIX, &sigs).unwrap();
    let line = clause_to_string(&rb.clauses[0], &sigs);
    let text = format!("{line}\n{line}\n");
    let rb = parse_rulebase(&text, &asterix_signatures()).unwrap();
    let d = validate_rulebase(&rb);
    assert!(d.iter().all(|d| d.severity == Severity::Warning));
    let dups: Vec<_> = d.iter().filter(|d| matches!(d.kind, DiagnosticKind::DuplicateClause { .. })).collect();
    assert_eq!(dups.len(), 1);
    assert_eq!(dups[0].clause, Some(1));
}

#[test]
fn adam_matches_reference_trajectory() {
    // Reference values from an independent scalar implementation.
    let expected = [
        [0.4000000049999997, -0.20000000099999998, 0.0],
        [0.3067820470153658, -0.17336629737090314, -0.07441368200599646],
        [0.32741774895547493, -0.1527783673314505, -0.14919126013384193],
    ];
    let grads = [[0.2, -1.0, 0.0], [0.1, 0.5, 3.0], [-0.4, 0.0, 1.0]];
    let mut p = vec![0.5, -0.3, 0.0];
    let mut adam = Adam::new(3);
    for (g, want) in grads.iter().zip(expected) {
        adam.step(&mut p, g, 0.1);
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn clipped_norm_never_exceeds_limit(g in prop::collection::vec(-100.0..100.0f64, 1..20), c in 0.01..5.0f64) {
        let out = clip_gradient(&g, c);
        let n: f64 = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(n <= c + 1e-12);
        let orig: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if orig <= c {
            prop_assert_eq!(out, g);
        }
    }

    #[test]
    fn projected_steps_stay_in_unit_box(
        w in prop::collection::vec(0.0..=1.0f64, 1..10),
        g in prop::collection::vec(-10.0..10.0f64, 10),
        lr in 0.001..2.0f64,
    ) {
        let mut w = w;
        let g = &g[..w.len()];
        let mut adam = Adam::new(w.len());
        for _ in 0..5 {
            adam_step(&mut w, g, &mut adam, lr);
            prop_assert!(w.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        let mut z = w.clone();
        project_unit_box(&mut z);
        prop_assert_eq!(z, w);
    }
}
