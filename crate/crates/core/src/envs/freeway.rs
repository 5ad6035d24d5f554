//! Freeway-mini: cross the road from the bottom row to the top one. Cars push
//! the player back a lane instead of ending the episode.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{row_dir, EnvConfig, Mover, TerminalReason};
use crate::grounding::{Layout, LogicState, ObjectState};

pub const CROSSING_REWARD: f64 = 1.0;

/// Number of car lanes: every row except the top (goal) and bottom (start).
pub(crate) fn lanes(cfg: &EnvConfig) -> usize {
    cfg.rows - 2
}

#[derive(Clone, Debug)]
pub(crate) struct Freeway {
    player: (i32, i32),
    cars: Vec<Mover>,
}

/// Steps between moves for a lane; lanes alternate between three speeds.
fn period(row: i32) -> usize {
    1 + (row as usize % 3)
}

impl Freeway {
    pub fn reset(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut cars = Vec::new();
        for lane in 0..lanes(cfg) as i32 {
            let row = lane + 1;
            for _ in 0..cfg.objects_per_type {
                cars.push(Mover {
                    col: rng.gen_range(0..cfg.cols as i32),
                    row,
                    dir: row_dir(row),
                    present: true,
                });
            }
        }
        Freeway {
            player: (cfg.cols as i32 / 2, cfg.rows as i32 - 1),
            cars,
        }
    }

    pub fn step(
        &mut self,
        cfg: &EnvConfig,
        _rng: &mut ChaCha8Rng,
        action: usize,
        t: usize,
    ) -> (f64, Option<TerminalReason>) {
        let bottom = cfg.rows as i32 - 1;
        let dr = match action {
            1 => -1,
            2 => 1,
            _ => 0,
        };
        let old = self.player;
        let mut p = (old.0, (old.1 + dr).clamp(0, bottom));
        let cols = cfg.cols as i32;
        let mut hit = false;
        for c in &mut self.cars {
            if t % period(c.row) != 0 {
                if (c.col, c.row) == p {
                    hit = true;
                }
                continue;
            }
            let from = (c.col, c.row);
            c.col = (c.col + c.dir).rem_euclid(cols);
            if (c.col, c.row) == p || (from == p && (c.col, c.row) == old) {
                hit = true;
            }
        }
        if hit {
            p.1 = (p.1 + 1).min(bottom);
        }
        let mut delta = 0.0;
        if p.1 == 0 {
            delta = CROSSING_REWARD;
            p.1 = bottom;
        }
        self.player = p;
        (delta, None)
    }

    pub fn state(&self, cfg: &EnvConfig) -> LogicState {
        let (px, py) = cfg.cell_center(self.player.0, self.player.1);
        let mut objects = alloc::vec![ObjectState {
            present: true,
            type_id: 0,
            x: px,
            y: py,
            w: 0.0,
            h: 0.0,
            orientation: None,
        }];
        for c in &self.cars {
            let (x, y) = cfg.cell_center(c.col, c.row);
            objects.push(ObjectState {
                present: true,
                type_id: 1,
                x,
                y,
                w: 0.0,
                h: 0.0,
                orientation: None,
            });
        }
        LogicState {
            layout: Layout::Asterix,
            frame_w: cfg.frame_w,
            frame_h: cfg.frame_h,
            objects,
        }
    }
}
