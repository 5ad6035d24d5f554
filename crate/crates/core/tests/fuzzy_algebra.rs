
use grail_core::gaze::{
    aggregate_entity_scores, gaze_mass, kl_divergence, modulate_state, render_heatmap,
    BoundingBox, Fixation, FixationList, GazeHeatmap,
};
use grail_core::grounding::{build_atom_index, ground_valuation};
use grail_core::logic::{asterix_signatures, parse_rulebase};
use grail_core::reasoner::{forward_chain, softor, GroundClause, InferenceGraph, ReasonerConfig};
use grail_core::envs::{Env, EnvConfig};
use proptest::prelude::*;

const ASTERIX: &str = include_str!("../../../rules/asterix.rules");

fn unit_vec(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn softor_lies_between_max_and_max_plus_slack(v in unit_vec(12), gamma in 1e-4..0.5f64) {
        let m = v.iter().copied().fold(0.0, f64::max);
        let s = softor(&v, gamma);
        prop_assert!(s >= m - 1e-12);
        prop_assert!(s <= (m + gamma * (v.len() as f64).ln()).min(1.0) + 1e-12);
    }

    #[test]
    fn softor_treats_zero_as_identity(v in unit_vec(8), zeros in 0usize..5) {
        let mut padded = v.clone();
        padded.extend(std::iter::repeat(0.0).take(zeros));
        prop_assert!((softor(&padded, 0.01) - softor(&v, 0.01)).abs() < 1e-12);
    }

    #[test]
    fn product_body_never_exceeds_weakest_atom(body in unit_vec(8), w in 0.0..=1.0f64) {
        let n = body.len();
        let g = InferenceGraph::new(
            n + 1,
            1,
            vec!["a".into()],
            vec![GroundClause { clause: 0, weight_slot: 0, head: n, body: (0..n).collect(), substitution: None }],
            &[(n, 0)],
        ).unwrap();
        let mut v = body.clone();
        v.push(0.0);
        let cfg = ReasonerConfig { t_max: 1, ..ReasonerConfig::default() };
        let out = forward_chain(&v, &[w], &g, &cfg);
        let min = body.iter().copied().fold(1.0, f64::min);
        prop_assert!(out[n] <= min + 1e-12);
        prop_assert!((out[n] - w * body.iter().product::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_commutative(mut s in unit_vec(8), seed in any::<u64>()) {
        let a = aggregate_entity_scores(&s);
        let k = (seed as usize) % s.len();
        s.rotate_left(k);
        s.reverse();
        prop_assert!((a - aggregate_entity_scores(&s)).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_monotone(s in unit_vec(8), i in any::<prop::sample::Index>(), bump in 0.0..=1.0f64) {
        let j = i.index(s.len());
        let mut up = s.clone();
        up[j] = (up[j] + bump).min(1.0);
        prop_assert!(aggregate_entity_scores(&up) >= aggregate_entity_scores(&s) - 1e-12);
    }

    #[test]
    fn aggregation_is_bounded_and_absorbing(s in unit_vec(8), i in any::<prop::sample::Index>()) {
        let a = aggregate_entity_scores(&s);
        let m = s.iter().copied().fold(0.0, f64::max);
        prop_assert!(a >= m - 1e-12 && a <= 1.0);
        let mut one = s.clone();
        one[i.index(s.len())] = 1.0;
        prop_assert_eq!(aggregate_entity_scores(&one), 1.0);
    }

    #[test]
    fn heatmaps_are_normalized(
        pts in prop::collection::vec((0.0..160.0f64, 0.0..210.0f64, 0.01..5.0f64), 0..6),
        sigma in 0.3..8.0f64,
    ) {
        let fx = FixationList(pts.iter().map(|&(x, y, weight)| Fixation { x, y, weight }).collect());
        let g = render_heatmap(&fx, sigma, (210, 160)).unwrap();
        prop_assert!((g.total() - 1.0).abs() < 1e-9);
        prop_assert!(g.as_slice().iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn raw_cells_normalize(cells in prop::collection::vec(0.0..10.0f64, 48), bump in 0usize..48) {
        let mut cells = cells;
        cells[bump] += 1.0;
        let g = GazeHeatmap::from_cells(6, 8, cells).unwrap();
        prop_assert!((g.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaze_mass_is_additive_over_a_partition(
        cells in prop::collection::vec(0.0..1.0f64, 20 * 16),
        xs in prop::collection::btree_set(1u32..16, 0..5),
        ys in prop::collection::btree_set(1u32..20, 0..5),
    ) {
        let mut cells = cells;
        cells[0] += 1e-3;
        let g = GazeHeatmap::from_cells(20, 16, cells).unwrap();
        let cuts = |set: &std::collections::BTreeSet<u32>, end: f64| {
            let mut c = vec![0.0];
            c.extend(set.iter().map(|&v| v as f64));
            c.push(end);
            c
        };
        let (cx, cy) = (cuts(&xs, 16.0), cuts(&ys, 20.0));
        let mut total = 0.0;
        for wx in cx.windows(2) {
            for wy in cy.windows(2) {
                // Half-open boxes: the upper edge stops just short of the next cut.
                total += gaze_mass(&g, &BoundingBox::new(wx[0], wy[0], wx[1] - 1e-9, wy[1] - 1e-9));
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self(
        a in prop::collection::vec(0.0..1.0f64, 30),
        b in prop::collection::vec(0.0..1.0f64, 30),
    ) {
        let (mut a, mut b) = (a, b);
        a[0] += 0.1;
        b[0] += 0.1;
        let g = GazeHeatmap::from_cells(5, 6, a).unwrap();
        let h = GazeHeatmap::from_cells(5, 6, b).unwrap();
        prop_assert!(kl_divergence(&g, &h).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&g, &g).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modulation_only_attenuates(
        seed in 0u64..10_000,
        pts in prop::collection::vec((0.0..160.0f64, 0.0..210.0f64), 0..4),
        sigma in 0.5..6.0f64,
    ) {
        let cfg = EnvConfig::asterix();
        let rb = parse_rulebase(ASTERIX, &asterix_signatures()).unwrap();
        let idx = build_atom_index(&rb, &cfg.inventory()).unwrap();
        let s = Env::reset(&cfg, seed).unwrap().state();
        let v0 = ground_valuation(&s, &Default::default(), &idx).unwrap();
        let fx = FixationList(pts.iter().map(|&(x, y)| Fixation::at(x, y)).collect());
        let g = render_heatmap(&fx, sigma, (s.frame_h as usize, s.frame_w as usize)).unwrap();
        let vg = modulate_state(&v0, &g, &idx, &s).unwrap();
        for (a, b) in vg.0.iter().zip(&v0.0) {
            prop_assert!(*a >= 0.0 && *a <= *b + 1e-15);
        }
    }
}
