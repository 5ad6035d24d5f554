//! Seaquest-mini: a submarine shoots sharks and enemy submarines, dodges
//! their missiles, rescues divers and surfaces for air.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_row, row_dir, EnvConfig, Mover, TerminalReason};
use crate::grounding::{Layout, LogicState, ObjectState, Orientation};

pub const DIVER_CAPACITY: usize = 6;
pub const KILL_REWARD: f64 = 20.0;
pub const DIVER_REWARD: f64 = 50.0;
/// Oxygen lost per step under water; a full tank lasts this many steps.
pub const OXYGEN_STEPS: f64 = 80.0;
/// Chance per step that a submarine launches a missile.
pub const MISSILE_CHANCE: f64 = 0.05;

// Type ids in inventory order.
const PLAYER: usize = 0;
const SHARK: usize = 1;
const SUBMARINE: usize = 2;
const ENEMY_MISSILE: usize = 3;
const DIVER: usize = 4;
const PLAYER_MISSILE: usize = 5;
const OXYGEN_BAR: usize = 6;
const COLLECTED_DIVER: usize = 7;

/// First row enemies and divers may occupy; row 0 is the surface.
const FIRST_DEEP_ROW: i32 = 2;

#[derive(Clone, Debug)]
pub(crate) struct Seaquest {
    player: (i32, i32),
    facing: Orientation,
    missile: Option<Mover>,
    sharks: Vec<Mover>,
    subs: Vec<Mover>,
    enemy_missiles: Vec<Mover>,
    divers: Vec<Mover>,
    oxygen: f64,
    collected: usize,
}

fn spawn(cfg: &EnvConfig, rng: &mut ChaCha8Rng, avoid_row: i32, anywhere: bool) -> Mover {
    let row = random_row(rng, FIRST_DEEP_ROW, cfg.rows as i32, avoid_row);
    let dir = row_dir(row);
    let col = if anywhere {
        rng.gen_range(0..cfg.cols as i32)
    } else if dir > 0 {
        0
    } else {
        cfg.cols as i32 - 1
    };
    Mover {
        col,
        row,
        dir,
        present: true,
    }
}

fn absent() -> Mover {
    Mover {
        col: 0,
        row: 0,
        dir: 1,
        present: false,
    }
}

impl Seaquest {
    pub fn reset(cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Self {
        let n = cfg.objects_per_type;
        let player = (cfg.cols as i32 / 2, 0);
        let sharks = (0..n).map(|_| spawn(cfg, rng, -1, true)).collect();
        let subs = (0..n).map(|_| spawn(cfg, rng, -1, true)).collect();
        let divers = (0..n).map(|_| spawn(cfg, rng, -1, true)).collect();
        Seaquest {
            player,
            facing: Orientation::Right,
            missile: None,
            sharks,
            subs,
            enemy_missiles: alloc::vec![absent(); n],
            divers,
            oxygen: 1.0,
            collected: 0,
        }
    }

    pub fn step(
        &mut self,
        cfg: &EnvConfig,
        rng: &mut ChaCha8Rng,
        action: usize,
        t: usize,
    ) -> (f64, Option<TerminalReason>) {
        let cols = cfg.cols as i32;
        let rows = cfg.rows as i32;
        let in_grid = |c: i32, r: i32| (0..cols).contains(&c) && (0..rows).contains(&r);
        let old = self.player;
        let (dc, dr) = match action {
            2 => (0, -1),
            3 => (1, 0),
            4 => (-1, 0),
            5 => (0, 1),
            _ => (0, 0),
        };
        match action {
            3 => self.facing = Orientation::Right,
            4 => self.facing = Orientation::Left,
            _ => {}
        }
        let p = ((old.0 + dc).clamp(0, cols - 1), (old.1 + dr).clamp(0, rows - 1));
        self.player = p;
        if action == 1 && self.missile.is_none() {
            self.missile = Some(Mover {
                col: p.0,
                row: p.1,
                dir: if self.facing == Orientation::Right { 1 } else { -1 },
                present: true,
            });
        }

        let mut delta = 0.0;
        let touches = |from: (i32, i32), to: (i32, i32)| to == p || (from == p && to == old);

        // Player missile: two cells per step, hits the first enemy it meets.
        if let Some(m) = &mut self.missile {
            let mut alive = true;
            for _ in 0..2 {
                m.col += m.dir;
                if !in_grid(m.col, m.row) {
                    alive = false;
                    break;
                }
                let hit = self
                    .sharks
                    .iter_mut()
                    .chain(self.subs.iter_mut())
                    .find(|e| e.present && e.col == m.col && e.row == m.row);
                if let Some(e) = hit {
                    *e = spawn(cfg, rng, p.1, false);
                    delta += KILL_REWARD;
                    alive = false;
                    break;
                }
            }
            if !alive {
                self.missile = None;
            }
        }

        let mut terminal = None;
        let slow = t % cfg.slow_period == 0;
        for (k, e) in self.sharks.iter_mut().chain(self.subs.iter_mut()).enumerate() {
            let is_sub = k >= cfg.objects_per_type;
            let steps = if is_sub && !slow { 0 } else { cfg.enemy_speed };
            for _ in 0..steps {
                let from = (e.col, e.row);
                e.col += e.dir;
                if touches(from, (e.col, e.row)) {
                    terminal = Some(TerminalReason::Collision);
                }
                if !in_grid(e.col, e.row) {
                    *e = spawn(cfg, rng, p.1, false);
                    break;
                }
            }
            if steps == 0 && (e.col, e.row) == p {
                terminal = Some(TerminalReason::Collision);
            }
        }

        for m in self.enemy_missiles.iter_mut().filter(|m| m.present) {
            for _ in 0..2 {
                let from = (m.col, m.row);
                m.col += m.dir;
                if touches(from, (m.col, m.row)) {
                    terminal = Some(TerminalReason::Collision);
                }
                if !in_grid(m.col, m.row) {
                    m.present = false;
                    break;
                }
            }
        }
        for sub in &self.subs {
            if rng.gen::<f64>() < MISSILE_CHANCE {
                if let Some(slot) = self.enemy_missiles.iter_mut().find(|m| !m.present) {
                    *slot = Mover {
                        col: sub.col + sub.dir,
                        row: sub.row,
                        dir: sub.dir,
                        present: in_grid(sub.col + sub.dir, sub.row),
                    };
                }
            }
        }

        for d in &mut self.divers {
            let from = (d.col, d.row);
            if slow {
                d.col += d.dir;
            }
            if touches(from, (d.col, d.row)) {
                self.collected = (self.collected + 1).min(DIVER_CAPACITY);
                *d = spawn(cfg, rng, p.1, false);
            } else if !in_grid(d.col, d.row) {
                *d = spawn(cfg, rng, p.1, false);
            }
        }

        if p.1 == 0 {
            self.oxygen = 1.0;
            delta += DIVER_REWARD * self.collected as f64;
            self.collected = 0;
        } else {
            self.oxygen -= 1.0 / OXYGEN_STEPS;
            if self.oxygen <= 1e-12 {
                self.oxygen = 0.0;
                terminal = terminal.or(Some(TerminalReason::OutOfOxygen));
            }
        }
        (delta, terminal)
    }

    pub fn state(&self, cfg: &EnvConfig) -> LogicState {
        let cw = cfg.cell_w();
        let ch = cfg.cell_h();
        let orient = |dir: i32| {
            Some(if dir > 0 {
                Orientation::Right
            } else {
                Orientation::Left
            })
        };
        let mover = |type_id: usize, m: &Mover, w: f64, h: f64| {
            if !m.present {
                return ObjectState::absent(type_id);
            }
            let (x, y) = cfg.cell_center(m.col, m.row);
            ObjectState {
                present: true,
                type_id,
                x,
                y,
                w,
                h,
                orientation: orient(m.dir),
            }
        };
        let mut objects = Vec::new();
        let (px, py) = cfg.cell_center(self.player.0, self.player.1);
        objects.push(ObjectState {
            present: true,
            type_id: PLAYER,
            x: px,
            y: py,
            w: cw,
            h: ch,
            orientation: Some(self.facing),
        });
        objects.extend(self.sharks.iter().map(|m| mover(SHARK, m, cw, ch)));
        objects.extend(self.subs.iter().map(|m| mover(SUBMARINE, m, cw, ch)));
        objects.extend(
            self.enemy_missiles
                .iter()
                .map(|m| mover(ENEMY_MISSILE, m, cw * 0.5, ch * 0.3)),
        );
        objects.extend(self.divers.iter().map(|m| mover(DIVER, m, cw, ch)));
        objects.push(match &self.missile {
            Some(m) => mover(PLAYER_MISSILE, m, cw * 0.5, ch * 0.3),
            None => ObjectState::absent(PLAYER_MISSILE),
        });
        // The oxygen bar is anchored at the left edge and spans the frame when full.
        let bar_w = self.oxygen * cfg.frame_w;
        objects.push(ObjectState {
            present: true,
            type_id: OXYGEN_BAR,
            x: bar_w / 2.0,
            y: cfg.frame_h - 0.2 * ch,
            w: bar_w,
            h: 0.3 * ch,
            orientation: None,
        });
        for k in 0..DIVER_CAPACITY {
            if k < self.collected {
                objects.push(ObjectState {
                    present: true,
                    type_id: COLLECTED_DIVER,
                    x: (k as f64 + 0.5) * cw,
                    y: cfg.frame_h - 0.6 * ch,
                    w: 0.6 * cw,
                    h: 0.3 * ch,
                    orientation: None,
                });
            } else {
                objects.push(ObjectState::absent(COLLECTED_DIVER));
            }
        }
        LogicState {
            layout: Layout::Seaquest,
            frame_w: cfg.frame_w,
            frame_h: cfg.frame_h,
            objects,
        }
    }
}
