//! Asterix-mini: enemies and bonuses sweep along rows; touching an enemy ends
//! the episode, touching a bonus scores 50.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_row, row_dir, EnvConfig, Mover, TerminalReason};
use crate::grounding::{Layout, LogicState, ObjectState};

pub const BONUS_REWARD: f64 = 50.0;

const PLAYER: usize = 0;
const ENEMY: usize = 1;
const BONUS: usize = 2;

#[derive(Clone, Debug)]
pub(crate) struct Asterix {
    player: (i32, i32),
    enemies: Vec<Mover>,
    bonuses: Vec<Mover>,
    decoy: Option<(i32, i32)>,
}

fn spawn_anywhere(cfg: &EnvConfig, rng: &mut ChaCha8Rng, player: (i32, i32)) -> Mover {
    loop {
        let row = random_row(rng, 0, cfg.rows as i32, player.1);
        let col = rng.gen_range(0..cfg.cols as i32);
        if (col - player.0).abs() + (row - player.1).abs() > 2 {
            return Mover {
                col,
                row,
                dir: row_dir(row),
                present: true,
            };
        }
    }
}

/// Re-enters at the upstream edge of a random row.
fn respawn(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Mover {
    let row = rng.gen_range(0..cfg.rows as i32);
    let dir = row_dir(row);
    Mover {
        col: if dir > 0 { 0 } else { cfg.cols as i32 - 1 },
        row,
        dir,
        present: true,
    }
}

fn in_grid(cfg: &EnvConfig, col: i32, row: i32) -> bool {
    (0..cfg.cols as i32).contains(&col) && (0..cfg.rows as i32).contains(&row)
}

impl Asterix {
    pub fn reset(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Self {
        let player = (cfg.cols as i32 / 2, cfg.rows as i32 / 2);
        let n = cfg.objects_per_type;
        let enemies = (0..n).map(|_| spawn_anywhere(cfg, rng, player)).collect();
        let bonuses = (0..n).map(|_| spawn_anywhere(cfg, rng, player)).collect();
        let mut g = Asterix {
            player,
            enemies,
            bonuses,
            decoy: None,
        };
        if cfg.decoy.is_some() {
            g.decoy = Some(g.random_cell(cfg, rng));
        }
        g
    }

    fn random_cell(&self, cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> (i32, i32) {
        (
            rng.gen_range(0..cfg.cols as i32),
            rng.gen_range(0..cfg.rows as i32),
        )
    }

    /// Cells next to the player where a bonus makes one of the bonus rules
    /// fire: the two row neighbours and, off the player's row, the four
    /// diagonals.
    fn bonus_trigger_cells(&self, cfg: &EnvConfig) -> Vec<(i32, i32)> {
        let (c, r) = self.player;
        [(-1, 0), (1, 0), (-1, -1), (1, -1), (-1, 1), (1, 1)]
            .iter()
            .map(|&(dc, dr)| (c + dc, r + dr))
            .filter(|&(cc, rr)| in_grid(cfg, cc, rr))
            .collect()
    }

    pub fn place_decoy(&mut self, cfg: &EnvConfig, rng: &mut ChaCha8Rng, expert_action: Option<usize>) {
        let Some(mode) = cfg.decoy else { return };
        let correlated = mode == super::DecoyMode::Correlated && expert_action == Some(0);
        self.decoy = Some(if correlated {
            let cells = self.bonus_trigger_cells(cfg);
            cells[rng.gen_range(0..cells.len())]
        } else {
            self.random_cell(cfg, rng)
        });
    }

    pub fn step(
        &mut self,
        cfg: &EnvConfig,
        rng: &mut ChaCha8Rng,
        action: usize,
        t: usize,
    ) -> (f64, Option<TerminalReason>) {
        let old = self.player;
        let (dc, dr) = match action {
            1 => (0, -1),
            2 => (1, 0),
            3 => (-1, 0),
            4 => (0, 1),
            _ => (0, 0),
        };
        let p = (
            (old.0 + dc).clamp(0, cfg.cols as i32 - 1),
            (old.1 + dr).clamp(0, cfg.rows as i32 - 1),
        );
        self.player = p;

        // Contact: same cell afterwards, or the two swapped cells.
        let touches = |from: (i32, i32), to: (i32, i32)| to == p || (from == p && to == old);

        let mut terminal = None;
        for e in &mut self.enemies {
            for _ in 0..cfg.enemy_speed {
                let from = (e.col, e.row);
                e.col += e.dir;
                if touches(from, (e.col, e.row)) {
                    terminal = Some(TerminalReason::Collision);
                }
                if !in_grid(cfg, e.col, e.row) {
                    *e = respawn(cfg, rng);
                    break;
                }
            }
        }

        let mut delta = 0.0;
        let moves = t % cfg.slow_period == 0;
        for b in &mut self.bonuses {
            let from = (b.col, b.row);
            if moves {
                b.col += b.dir;
            }
            if touches(from, (b.col, b.row)) {
                delta += BONUS_REWARD;
                *b = respawn(cfg, rng);
            } else if !in_grid(cfg, b.col, b.row) {
                *b = respawn(cfg, rng);
            }
        }
        (delta, terminal)
    }

    pub fn state(&self, cfg: &EnvConfig) -> LogicState {
        let obj = |type_id: usize, col: i32, row: i32, present: bool| {
            if !present {
                return ObjectState::absent(type_id);
            }
            let (x, y) = cfg.cell_center(col, row);
            ObjectState {
                present: true,
                type_id,
                x,
                y,
                w: 0.0,
                h: 0.0,
                orientation: None,
            }
        };
        let mut objects = Vec::with_capacity(2 + 2 * self.enemies.len());
        objects.push(obj(PLAYER, self.player.0, self.player.1, true));
        objects.extend(self.enemies.iter().map(|e| obj(ENEMY, e.col, e.row, e.present)));
        objects.extend(self.bonuses.iter().map(|b| obj(BONUS, b.col, b.row, b.present)));
        if let Some((c, r)) = self.decoy {
            objects.push(obj(BONUS, c, r, true));
        }
        LogicState {
            layout: Layout::Asterix,
            frame_w: cfg.frame_w,
            frame_h: cfg.frame_h,
            objects,
        }
    }
}
