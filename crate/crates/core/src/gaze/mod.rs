//! Gaze heatmaps and gaze-modulated valuations.
//!
//! A heatmap is a normalized distribution over the frame's pixel grid. The
//! gaze mass inside an object's bounding box scores that object; an atom's
//! score aggregates the scores of the objects it mentions with the product
//! t-conorm, and modulation multiplies each atom's value by its score.

mod model;

use alloc::vec::Vec;

use crate::grounding::{AtomIndex, Layout, LogicState, ValuationVector};
use crate::math::{exp, ln};

pub use model::{fit_gaze_model, mean_kl, predict_heatmap, GazeFitConfig, GazeFitReport, GazeModelParams};

/// Probability floor applied to predicted heatmaps inside the KL divergence.
pub const KL_FLOOR: f64 = 1e-9;

/// Default Gaussian width, in pixels, for rendering fixations.
pub const DEFAULT_SIGMA: f64 = 2.0;

/// Side of the square box drawn around objects that carry no size.
pub const DEFAULT_BOX_SIDE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GazeError {
    #[error("heatmap dimensions differ: {0:?} vs {1:?}")]
    DimMismatch((usize, usize), (usize, usize)),
    #[error("heatmap has {found} cells, expected {expected}")]
    CellCount { expected: usize, found: usize },
    #[error("heatmap entries must be finite and nonnegative with positive total")]
    InvalidEntries,
    #[error("sigma must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("no bounding box for present object slot {slot}")]
    MissingBox { slot: usize },
    #[error("valuation has {found} entries, atom index has {expected}")]
    ValuationLength { expected: usize, found: usize },
    #[error("gaze model fitting needs a nonempty dataset")]
    EmptyDataset,
    #[error("gaze model loss became non-finite at step {step}")]
    Diverged { step: usize },
}

/// A normalized nonnegative distribution over an `h × w` grid, row-major.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeHeatmap {
    h: usize,
    w: usize,
    cells: Vec<f64>,
}

impl GazeHeatmap {
    /// Normalizes `cells` (row-major, `h·w` entries) into a heatmap.
    pub fn from_cells(h: usize, w: usize, cells: Vec<f64>) -> Result<Self, GazeError> {
        if cells.len() != h * w {
            return Err(GazeError::CellCount {
                expected: h * w,
                found: cells.len(),
            });
        }
        if cells.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(GazeError::InvalidEntries);
        }
        let total: f64 = cells.iter().sum();
        if !(total > 0.0) {
            return Err(GazeError::InvalidEntries);
        }
        let mut cells = cells;
        for c in &mut cells {
            *c /= total;
        }
        Ok(GazeHeatmap { h, w, cells })
    }

    pub fn uniform(h: usize, w: usize) -> Self {
        let n = (h * w).max(1);
        GazeHeatmap {
            h,
            w,
            cells: alloc::vec![1.0 / n as f64; h * w],
        }
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.h, self.w)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.w + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cells
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// `(row, col)` of the first maximal cell.
    pub fn argmax(&self) -> (usize, usize) {
        let i = crate::math::argmax(&self.cells).unwrap_or(0);
        (i / self.w.max(1), i % self.w.max(1))
    }
}

/// A gaze fixation at pixel coordinates, weighted by its duration.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fixation {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

impl Fixation {
    pub fn at(x: f64, y: f64) -> Self {
        Fixation { x, y, weight: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixationList(pub Vec<Fixation>);

impl FixationList {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// Axis-aligned box in pixel coordinates, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Box of size `w × h` centered on `(x, y)`, clipped to the frame.
    pub fn centered(x: f64, y: f64, w: f64, h: f64, frame_w: f64, frame_h: f64) -> Self {
        BoundingBox {
            x_min: (x - w / 2.0).max(0.0),
            y_min: (y - h / 2.0).max(0.0),
            x_max: (x + w / 2.0).min(frame_w),
            y_max: (y + h / 2.0).min(frame_h),
        }
    }

    pub fn full_frame(frame_w: f64, frame_h: f64) -> Self {
        BoundingBox::new(0.0, 0.0, frame_w, frame_h)
    }
}

/// Per-slot boxes of a state's present objects: `8 × 8` pixels for the
/// Asterix layout, the object's own size for the Seaquest layout.
pub fn entity_boxes(s: &LogicState) -> Vec<Option<BoundingBox>> {
    s.objects
        .iter()
        .map(|o| {
            if !o.present {
                return None;
            }
            let (w, h) = match s.layout {
                Layout::Asterix => (DEFAULT_BOX_SIDE, DEFAULT_BOX_SIDE),
                Layout::Seaquest => (
                    if o.w > 0.0 { o.w } else { DEFAULT_BOX_SIDE },
                    if o.h > 0.0 { o.h } else { DEFAULT_BOX_SIDE },
                ),
            };
            Some(BoundingBox::centered(o.x, o.y, w, h, s.frame_w, s.frame_h))
        })
        .collect()
}

/// Isotropic Gaussian centered at `(x, y)`, sampled at cell centers and
/// normalized over the grid. Evaluated relative to the nearest cell so that
/// narrow kernels never underflow to an all-zero grid.
pub(crate) fn gaussian_cells(x: f64, y: f64, sigma: f64, h: usize, w: usize) -> Vec<f64> {
    let mut d2 = Vec::with_capacity(h * w);
    let mut min = f64::INFINITY;
    for r in 0..h {
        let dy = r as f64 + 0.5 - y;
        for c in 0..w {
            let dx = c as f64 + 0.5 - x;
            let d = dx * dx + dy * dy;
            min = min.min(d);
            d2.push(d);
        }
    }
    let k = 1.0 / (2.0 * sigma * sigma);
    let mut total = 0.0;
    for d in &mut d2 {
        *d = exp(-(*d - min) * k);
        total += *d;
    }
    for d in &mut d2 {
        *d /= total;
    }
    d2
}

/// Renders fixations as a weighted mixture of Gaussians of width `sigma`
/// pixels. An empty list (or all-zero weights) gives the uniform heatmap.
pub fn render_heatmap(
    fx: &FixationList,
    sigma: f64,
    dims: (usize, usize),
) -> Result<GazeHeatmap, GazeError> {
    if !(sigma > 0.0) {
        return Err(GazeError::InvalidSigma(sigma));
    }
    let (h, w) = dims;
    let total_w: f64 = fx.0.iter().map(|f| f.weight.max(0.0)).sum();
    if fx.is_empty() || !(total_w > 0.0) {
        return Ok(GazeHeatmap::uniform(h, w));
    }
    let mut cells = alloc::vec![0.0; h * w];
    for f in &fx.0 {
        let wt = f.weight.max(0.0) / total_w;
        if wt == 0.0 {
            continue;
        }
        for (c, g) in cells.iter_mut().zip(gaussian_cells(f.x, f.y, sigma, h, w)) {
            *c += wt * g;
        }
    }
    GazeHeatmap::from_cells(h, w, cells)
}

/// `KL(G ‖ Ĝ)` with `Ĝ` floored at [`KL_FLOOR`] and renormalized.
pub fn kl_divergence(g: &GazeHeatmap, ghat: &GazeHeatmap) -> Result<f64, GazeError> {
    if g.dims() != ghat.dims() {
        return Err(GazeError::DimMismatch(g.dims(), ghat.dims()));
    }
    let z: f64 = ghat.cells.iter().map(|q| q.max(KL_FLOOR)).sum();
    let mut kl = 0.0;
    for (&p, &q) in g.cells.iter().zip(&ghat.cells) {
        if p > 0.0 {
            kl += p * (ln(p) - ln(q.max(KL_FLOOR) / z));
        }
    }
    Ok(kl.max(0.0))
}

/// Heatmap mass of the cells whose centers lie inside `b`.
pub fn gaze_mass(ghat: &GazeHeatmap, b: &BoundingBox) -> f64 {
    let (h, w) = ghat.dims();
    let first = |lo: f64| libm::ceil(lo - 0.5).max(0.0) as usize;
    let last = |hi: f64, n: usize| {
        let v = libm::floor(hi - 0.5);
        if v < 0.0 {
            None
        } else {
            Some((v as usize).min(n.saturating_sub(1)))
        }
    };
    let (Some(c1), Some(r1)) = (last(b.x_max, w), last(b.y_max, h)) else {
        return 0.0;
    };
    let (c0, r0) = (first(b.x_min), first(b.y_min));
    let mut s = 0.0;
    for r in r0..=r1 {
        for c in c0..=c1 {
            s += ghat.get(r, c);
        }
    }
    s.clamp(0.0, 1.0)
}

/// Product t-conorm `1 − Π(1 − sⱼ)`; the empty list scores 1.
pub fn aggregate_entity_scores(scores: &[f64]) -> f64 {
    match scores {
        [] => 1.0,
        [s] => *s,
        _ => 1.0 - scores.iter().map(|s| 1.0 - s).product::<f64>(),
    }
}

/// Gaze score of every atom of `idx`. Atoms without entity references score
/// 1; absent objects contribute 0.
pub fn atom_gaze_scores(
    ghat: &GazeHeatmap,
    idx: &AtomIndex,
    boxes: &[Option<BoundingBox>],
    present: &[bool],
) -> Result<Vec<f64>, GazeError> {
    let mut slot_mass: Vec<Option<f64>> = alloc::vec![None; present.len()];
    let mut out = Vec::with_capacity(idx.len());
    let mut buf = Vec::new();
    for refs in &idx.entity_refs {
        buf.clear();
        for &o in refs {
            let m = match slot_mass.get(o).copied().flatten() {
                Some(m) => m,
                None => {
                    let m = if !present.get(o).copied().unwrap_or(false) {
                        0.0
                    } else {
                        let b = boxes
                            .get(o)
                            .copied()
                            .flatten()
                            .ok_or(GazeError::MissingBox { slot: o })?;
                        gaze_mass(ghat, &b)
                    };
                    if o < slot_mass.len() {
                        slot_mass[o] = Some(m);
                    }
                    m
                }
            };
            buf.push(m);
        }
        out.push(aggregate_entity_scores(&buf));
    }
    Ok(out)
}

/// Gaze-modulated valuation `v⁽ᵍ⁾ᵢ = v⁽⁰⁾ᵢ · sᵢ`.
pub fn modulate_valuation(
    v0: &ValuationVector,
    ghat: &GazeHeatmap,
    idx: &AtomIndex,
    boxes: &[Option<BoundingBox>],
    present: &[bool],
) -> Result<ValuationVector, GazeError> {
    if v0.len() != idx.len() {
        return Err(GazeError::ValuationLength {
            expected: idx.len(),
            found: v0.len(),
        });
    }
    let s = atom_gaze_scores(ghat, idx, boxes, present)?;
    Ok(ValuationVector(
        v0.0.iter().zip(&s).map(|(v, s)| v * s).collect(),
    ))
}

/// Modulates a state's valuation using its own object boxes.
pub fn modulate_state(
    v0: &ValuationVector,
    ghat: &GazeHeatmap,
    idx: &AtomIndex,
    s: &LogicState,
) -> Result<ValuationVector, GazeError> {
    let present: Vec<bool> = s.objects.iter().map(|o| o.present).collect();
    modulate_valuation(v0, ghat, idx, &entity_boxes(s), &present)
}
