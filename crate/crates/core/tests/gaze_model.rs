use grail_core::envs::{Env, EnvConfig};
use grail_core::gaze::{
    fit_gaze_model, mean_kl, predict_heatmap, render_heatmap, GazeFitConfig, GazeModelParams,
};
use grail_core::{Fixation, FixationList, GazeHeatmap, LogicState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Box-Muller standard normal.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn states(n: usize) -> Vec<LogicState> {
    let cfg = EnvConfig::asterix().with_objects(2);
    (0..n as u64).map(|s| Env::reset(&cfg, s).unwrap().state()).collect()
}

fn dims(s: &LogicState) -> (usize, usize) {
    (s.frame_h as usize, s.frame_w as usize)
}

/// Fixations drawn from the model itself: pick an object by saliency, then
/// jitter around it by the bandwidth.
fn sample_gaze(s: &LogicState, phi: &GazeModelParams, rng: &mut ChaCha8Rng, k: usize) -> GazeHeatmap {
    let present: Vec<_> = s.objects.iter().filter(|o| o.present).collect();
    let weights: Vec<f64> = present.iter().map(|o| phi.type_logits[o.type_id].exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut fx = Vec::new();
    for _ in 0..k {
        let (x, y) = if rng.gen::<f64>() < phi.background {
            (rng.gen_range(0.0..s.frame_w), rng.gen_range(0.0..s.frame_h))
        } else {
            let mut u = rng.gen::<f64>() * z;
            let mut pick = present[0];
            for (o, w) in present.iter().zip(&weights) {
                pick = o;
                if u < *w {
                    break;
                }
                u -= w;
            }
            (pick.x + phi.bandwidth * normal(rng), pick.y + phi.bandwidth * normal(rng))
        };
        fx.push(Fixation::at(x, y));
    }
    render_heatmap(&FixationList(fx), 2.0, dims(s)).unwrap()
}

#[test]
fn fit_is_close_to_the_generating_model() {
    let truth = GazeModelParams { type_logits: vec![1.5, 0.0, -1.0], bandwidth: 5.0, background: 0.05 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<_> = states(30)
        .into_iter()
        .map(|s| {
            let g = sample_gaze(&s, &truth, &mut rng, 40);
            (s, g)
        })
        .collect();
    let init = GazeModelParams::new(3);
    let r = fit_gaze_model(&data, &init, &GazeFitConfig { steps: 150, learning_rate: 0.05 }).unwrap();
    let reference = mean_kl(&data, &truth);
    assert!(r.final_kl <= r.initial_kl);
    assert!(r.final_kl <= 1.1 * reference, "fit {} vs truth {}", r.final_kl, reference);
}

#[test]
fn gaze_on_one_type_makes_its_logit_dominant() {
    let data: Vec<_> = states(20)
        .into_iter()
        .map(|s| {
            let fx: Vec<_> = s
                .objects
                .iter()
                .filter(|o| o.present && o.type_id == 2)
                .map(|o| Fixation::at(o.x, o.y))
                .collect();
            let g = render_heatmap(&FixationList(fx), 2.0, dims(&s)).unwrap();
            (s, g)
        })
        .collect();
    let r = fit_gaze_model(&data, &GazeModelParams::new(3), &GazeFitConfig::default()).unwrap();
    let l = &r.params.type_logits;
    assert!(l[2] > l[0] && l[2] > l[1], "{l:?}");
}

#[test]
fn prediction_is_a_distribution() {
    let phi = GazeModelParams { type_logits: vec![0.3, -0.2, 1.0], bandwidth: 3.0, background: 0.2 };
    for s in states(5) {
        let g = predict_heatmap(&s, &phi, dims(&s));
        assert!((g.total() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn no_steps_returns_the_initial_model() {
    let s = states(2);
    let data: Vec<_> = s.iter().map(|s| (s.clone(), GazeHeatmap::uniform(84, 84))).collect();
    let init = GazeModelParams { type_logits: vec![0.1, 0.2, 0.3], bandwidth: 7.0, background: 0.3 };
    let r = fit_gaze_model(&data, &init, &GazeFitConfig { steps: 0, learning_rate: 0.1 }).unwrap();
    assert_eq!(r.params, init);
}
