//! Parametric gaze model: a softmax-weighted mixture of Gaussians centered on
//! the present objects, blended with a uniform background.

use alloc::vec::Vec;

use crate::grounding::LogicState;
use crate::math::{exp, ln, sigmoid};
use crate::optim::Adam;

use super::{gaussian_cells, kl_divergence, GazeError, GazeHeatmap, KL_FLOOR};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeModelParams {
    /// Saliency logit per object type id.
    pub type_logits: Vec<f64>,
    /// Shared Gaussian width in pixels.
    pub bandwidth: f64,
    /// Mass given to the uniform background.
    pub background: f64,
}

impl GazeModelParams {
    pub fn new(n_types: usize) -> Self {
        GazeModelParams {
            type_logits: alloc::vec![0.0; n_types],
            bandwidth: 4.0,
            background: 0.1,
        }
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut v = self.type_logits.clone();
        v.push(ln(self.bandwidth));
        let b = self.background.clamp(1e-6, 1.0 - 1e-6);
        v.push(ln(b / (1.0 - b)));
        v
    }

    fn from_flat(v: &[f64]) -> Self {
        let k = v.len() - 2;
        GazeModelParams {
            type_logits: v[..k].to_vec(),
            bandwidth: exp(v[k]),
            background: sigmoid(v[k + 1]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeFitConfig {
    pub steps: usize,
    pub learning_rate: f64,
}

impl Default for GazeFitConfig {
    fn default() -> Self {
        GazeFitConfig {
            steps: 100,
            learning_rate: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeFitReport {
    pub params: GazeModelParams,
    pub initial_kl: f64,
    pub final_kl: f64,
    pub steps: usize,
}

struct Part {
    slot: usize,
    ty: usize,
    pi: f64,
    kern: Vec<f64>,
}

struct Components {
    /// Mixture weight and normalized kernel of each present object.
    parts: Vec<Part>,
}

fn components(s: &LogicState, phi: &GazeModelParams, h: usize, w: usize) -> Components {
    let present: Vec<(usize, usize)> = s
        .objects
        .iter()
        .enumerate()
        .filter(|(_, o)| o.present)
        .map(|(i, o)| (i, o.type_id))
        .collect();
    let logit = |t: usize| phi.type_logits.get(t).copied().unwrap_or(0.0);
    let max = present
        .iter()
        .map(|&(_, t)| logit(t))
        .fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = present.iter().map(|&(_, t)| exp(logit(t) - max)).sum();
    let parts = present
        .iter()
        .map(|&(i, t)| {
            let o = &s.objects[i];
            Part {
                slot: i,
                ty: t,
                pi: exp(logit(t) - max) / z,
                kern: gaussian_cells(o.x, o.y, phi.bandwidth, h, w),
            }
        })
        .collect();
    Components { parts }
}

fn mix(c: &Components, background: f64, n: usize) -> Vec<f64> {
    if c.parts.is_empty() {
        return alloc::vec![1.0 / n as f64; n];
    }
    let mut out = alloc::vec![background / n as f64; n];
    for p in &c.parts {
        for (o, g) in out.iter_mut().zip(&p.kern) {
            *o += (1.0 - background) * p.pi * g;
        }
    }
    out
}

/// The model's heatmap for a state.
pub fn predict_heatmap(s: &LogicState, phi: &GazeModelParams, dims: (usize, usize)) -> GazeHeatmap {
    let (h, w) = dims;
    let cells = mix(&components(s, phi, h, w), phi.background, h * w);
    GazeHeatmap::from_cells(h, w, cells).unwrap_or_else(|_| GazeHeatmap::uniform(h, w))
}

/// Mean KL and its gradient in flat coordinates
/// `(type logits…, ln bandwidth, logit background)`.
fn kl_and_grad(frames: &[(LogicState, GazeHeatmap)], phi: &GazeModelParams) -> (f64, Vec<f64>) {
    let k = phi.type_logits.len();
    let mut grad = alloc::vec![0.0; k + 2];
    let mut total = 0.0;
    let bw2 = phi.bandwidth * phi.bandwidth;
    for (s, g) in frames {
        let (h, w) = g.dims();
        let n = h * w;
        let comps = components(s, phi, h, w);
        let pred = mix(&comps, phi.background, n);
        let ghat = GazeHeatmap::from_cells(h, w, pred.clone()).unwrap_or_else(|_| GazeHeatmap::uniform(h, w));
        total += kl_divergence(g, &ghat).unwrap_or(f64::INFINITY);
        if comps.parts.is_empty() {
            continue;
        }
        // dKL/dĜ_c = −G_c/Ĝ_c
        let r: Vec<f64> = g
            .as_slice()
            .iter()
            .zip(&pred)
            .map(|(p, q)| -p / q.max(KL_FLOOR))
            .collect();
        let bg = phi.background;
        // Background: dĜ/dβ = bg(1−bg)(U − M).
        let mut d_bg = 0.0;
        for c in 0..n {
            let m = (pred[c] - bg / n as f64) / (1.0 - bg);
            d_bg += r[c] * bg * (1.0 - bg) * (1.0 / n as f64 - m);
        }
        grad[k + 1] += d_bg;

        let mut type_mass = alloc::vec![0.0; k];
        for p in &comps.parts {
            if p.ty < k {
                type_mass[p.ty] += p.pi;
            }
        }
        for p in &comps.parts {
            let (pi, kern) = (p.pi, &p.kern);
            let dot: f64 = r.iter().zip(kern).map(|(a, b)| a * b).sum();
            let base = (1.0 - bg) * pi * dot;
            // Softmax logits: dM/dl_j = Σ_o π_o([t_o = j] − P_j) N_o.
            for j in 0..k {
                let ind = if p.ty == j { 1.0 } else { 0.0 };
                grad[j] += base * (ind - type_mass[j]);
            }
            // Bandwidth: dN_c/dρ = N_c(d_c²/b² − E_N[d²/b²]).
            let o = &s.objects[p.slot];
            let mut mean = 0.0;
            let mut acc = 0.0;
            for row in 0..h {
                let dy = row as f64 + 0.5 - o.y;
                for col in 0..w {
                    let dx = col as f64 + 0.5 - o.x;
                    let d = (dx * dx + dy * dy) / bw2;
                    let c = row * w + col;
                    mean += kern[c] * d;
                    acc += r[c] * kern[c] * d;
                }
            }
            grad[k] += (1.0 - bg) * pi * (acc - mean * dot);
        }
    }
    let n = frames.len() as f64;
    for g in &mut grad {
        *g /= n;
    }
    (total / n, grad)
}

/// Mean `KL(G ‖ g_φ(s))` over a dataset.
pub fn mean_kl(frames: &[(LogicState, GazeHeatmap)], phi: &GazeModelParams) -> f64 {
    if frames.is_empty() {
        return 0.0;
    }
    let total: f64 = frames
        .iter()
        .map(|(s, g)| kl_divergence(g, &predict_heatmap(s, phi, g.dims())).unwrap_or(f64::INFINITY))
        .sum();
    total / frames.len() as f64
}

/// Minimizes the mean KL from the data heatmaps to the model by full-batch
/// Adam. The best parameters seen are returned.
pub fn fit_gaze_model(
    frames: &[(LogicState, GazeHeatmap)],
    init: &GazeModelParams,
    cfg: &GazeFitConfig,
) -> Result<GazeFitReport, GazeError> {
    if frames.is_empty() {
        return Err(GazeError::EmptyDataset);
    }
    let initial_kl = mean_kl(frames, init);
    let mut best = (initial_kl, init.clone());
    let mut flat = init.to_flat();
    let mut adam = Adam::new(flat.len());
    for step in 0..cfg.steps {
        let phi = GazeModelParams::from_flat(&flat);
        let (kl, grad) = kl_and_grad(frames, &phi);
        if !kl.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(GazeError::Diverged { step });
        }
        if kl < best.0 {
            best = (kl, phi);
        }
        adam.step(&mut flat, &grad, cfg.learning_rate);
        let k = flat.len() - 2;
        flat[k] = flat[k].clamp(ln(0.25), ln(64.0));
        flat[k + 1] = flat[k + 1].clamp(-12.0, 12.0);
    }
    if cfg.steps > 0 {
        let phi = GazeModelParams::from_flat(&flat);
        let kl = mean_kl(frames, &phi);
        if kl < best.0 {
            best = (kl, phi);
        }
    }
    Ok(GazeFitReport {
        params: best.1,
        initial_kl,
        final_kl: best.0,
        steps: cfg.steps,
    })
}
