//! Soft predicate library.
//!
//! Every soft predicate is a sigmoid `σ(u)` of a margin `u = (c·threshold + b)/τ`
//! computed from normalized coordinates, optionally complemented (`1 − σ(u)`).
//! Its crisp counterpart is the `τ → 0` limit: `[u > 0]`, complemented the same
//! way. Crisp predicates (types, lane parity, orientation, presence, counters)
//! have no parameters.

use crate::math::{sigmoid, sqrt};

use super::{LogicState, Orientation};

/// Evaluation semantics of a predicate, shared by every predicate name that
/// maps onto it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Closeby,
    NotCloseby,
    SameRow,
    OnLeft,
    OnRight,
    AboveRow,
    BelowRow,
    AtTop,
    AtBottom,
    AboveWater,
    BelowWater,
    Closest,
    OxygenLow,
    OnEven,
    OnOdd,
    FacingLeft,
    FacingRight,
    Visible,
    TypeIs,
    DiversFull,
}

/// Maps a predicate name onto its semantics. Typed variants such as
/// `close_by_enemy` or `left_of_diver` share the generic relation.
pub fn relation_for(name: &str) -> Option<Relation> {
    use Relation::*;
    let exact = match name {
        "closeby" => Some(Closeby),
        "notcloseby" => Some(NotCloseby),
        "same_row" => Some(SameRow),
        "on_left" => Some(OnLeft),
        "on_right" => Some(OnRight),
        "above_row" => Some(AboveRow),
        "below_row" => Some(BelowRow),
        "at_top" => Some(AtTop),
        "at_bottom" => Some(AtBottom),
        "above_water" => Some(AboveWater),
        "below_water" => Some(BelowWater),
        "closest" => Some(Closest),
        "oxygen_low" => Some(OxygenLow),
        "on_even" => Some(OnEven),
        "on_odd" => Some(OnOdd),
        "facing_left" => Some(FacingLeft),
        "facing_right" => Some(FacingRight),
        "visible" => Some(Visible),
        "type" => Some(TypeIs),
        "divers_collected_full" => Some(DiversFull),
        _ => None,
    };
    if exact.is_some() {
        return exact;
    }
    const PREFIXES: [(&str, Relation); 8] = [
        ("not_close_by_", NotCloseby),
        ("close_by_", Closeby),
        ("same_depth_", SameRow),
        ("left_of_", OnLeft),
        ("right_of_", OnRight),
        ("higher_than_", AboveRow),
        ("deeper_than_", BelowRow),
        ("visible_", Visible),
    ];
    PREFIXES
        .iter()
        .find(|(p, _)| name.starts_with(p))
        .map(|&(_, r)| r)
}

impl Relation {
    pub fn arity(self) -> usize {
        use Relation::*;
        match self {
            Closeby | NotCloseby | SameRow | OnLeft | OnRight | AboveRow | BelowRow | Closest
            | TypeIs => 2,
            _ => 1,
        }
    }

    /// Whether the second argument is a type constant rather than an object.
    pub fn takes_type_constant(self) -> bool {
        self == Relation::TypeIs
    }

    pub fn is_soft(self) -> bool {
        self.group().is_some()
    }

    pub fn group(self) -> Option<ParamGroup> {
        use Relation::*;
        Some(match self {
            Closeby | NotCloseby => ParamGroup::Closeby,
            SameRow | AboveRow | BelowRow => ParamGroup::Row,
            OnLeft | OnRight => ParamGroup::Horizontal,
            AtTop | AtBottom => ParamGroup::Edge,
            AboveWater | BelowWater => ParamGroup::Water,
            Closest => ParamGroup::Closest,
            OxygenLow => ParamGroup::Oxygen,
            _ => return None,
        })
    }
}

/// A threshold in normalized screen units and a sigmoid temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoftParam {
    pub threshold: f64,
    pub temperature: f64,
}

impl SoftParam {
    pub const fn new(threshold: f64, temperature: f64) -> Self {
        SoftParam {
            threshold,
            temperature,
        }
    }
}

/// Groups of predicates sharing one threshold/temperature pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamGroup {
    Closeby,
    Row,
    Horizontal,
    Edge,
    Water,
    Closest,
    Oxygen,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 7] = [
        ParamGroup::Closeby,
        ParamGroup::Row,
        ParamGroup::Horizontal,
        ParamGroup::Edge,
        ParamGroup::Water,
        ParamGroup::Closest,
        ParamGroup::Oxygen,
    ];

    /// Groups whose threshold is fixed at zero (pure sign tests).
    pub fn has_threshold(self) -> bool {
        !matches!(self, ParamGroup::Horizontal | ParamGroup::Closest)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Parameters of the soft predicate library.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoftPredicateParams {
    /// `closeby`: Euclidean distance threshold.
    pub closeby: SoftParam,
    /// `same_row`, `above_row`, `below_row`: row tolerance.
    pub row: SoftParam,
    /// `on_left`, `on_right`: threshold unused.
    pub horizontal: SoftParam,
    /// `at_top`, `at_bottom`: dividing line.
    pub edge: SoftParam,
    /// `above_water`, `below_water`: water surface.
    pub water: SoftParam,
    /// `closest`: threshold unused.
    pub closest: SoftParam,
    /// `oxygen_low`: oxygen fraction threshold.
    pub oxygen: SoftParam,
    /// Number of horizontal lanes used by the parity predicates.
    pub lanes: usize,
    /// Divers needed for `divers_collected_full`.
    pub diver_capacity: usize,
}

impl Default for SoftPredicateParams {
    fn default() -> Self {
        SoftPredicateParams {
            closeby: SoftParam::new(0.15, 0.02),
            row: SoftParam::new(0.04, 0.02),
            horizontal: SoftParam::new(0.0, 0.02),
            edge: SoftParam::new(0.5, 0.02),
            water: SoftParam::new(1.0 / 12.0, 0.02),
            closest: SoftParam::new(0.0, 0.02),
            oxygen: SoftParam::new(0.3, 0.02),
            lanes: 12,
            diver_capacity: 6,
        }
    }
}

impl SoftPredicateParams {
    pub fn get(&self, g: ParamGroup) -> SoftParam {
        match g {
            ParamGroup::Closeby => self.closeby,
            ParamGroup::Row => self.row,
            ParamGroup::Horizontal => self.horizontal,
            ParamGroup::Edge => self.edge,
            ParamGroup::Water => self.water,
            ParamGroup::Closest => self.closest,
            ParamGroup::Oxygen => self.oxygen,
        }
    }

    pub fn get_mut(&mut self, g: ParamGroup) -> &mut SoftParam {
        match g {
            ParamGroup::Closeby => &mut self.closeby,
            ParamGroup::Row => &mut self.row,
            ParamGroup::Horizontal => &mut self.horizontal,
            ParamGroup::Edge => &mut self.edge,
            ParamGroup::Water => &mut self.water,
            ParamGroup::Closest => &mut self.closest,
            ParamGroup::Oxygen => &mut self.oxygen,
        }
    }

    /// Same thresholds with every temperature replaced by `tau`.
    pub fn with_temperature(&self, tau: f64) -> Self {
        let mut p = self.clone();
        for g in ParamGroup::ALL {
            p.get_mut(g).temperature = tau;
        }
        p
    }

    pub fn is_valid(&self) -> bool {
        ParamGroup::ALL.iter().all(|&g| {
            let p = self.get(g);
            p.temperature > 0.0 && (!g.has_threshold() || (p.threshold > 0.0 && p.threshold < 1.0))
        })
    }
}

/// Sigmoid margin of a soft atom before presence masking.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Margin {
    /// `u = (thr_coef·threshold + offset) / τ`
    pub u: f64,
    pub thr_coef: f64,
    pub group: ParamGroup,
    pub complement: bool,
}

impl Margin {
    pub fn value(&self) -> f64 {
        let s = sigmoid(self.u);
        if self.complement {
            1.0 - s
        } else {
            s
        }
    }

    pub fn crisp(&self) -> f64 {
        let on = self.u > 0.0;
        if on != self.complement {
            1.0
        } else {
            0.0
        }
    }
}

pub(crate) enum Eval {
    Crisp(f64),
    Soft(Margin),
}

fn margin(group: ParamGroup, params: &SoftPredicateParams, thr_coef: f64, offset: f64) -> Margin {
    let p = params.get(group);
    Margin {
        u: (thr_coef * p.threshold + offset) / p.temperature,
        thr_coef,
        group,
        complement: false,
    }
}

fn dist(s: &LogicState, a: usize, b: usize) -> f64 {
    let dx = s.nx(b) - s.nx(a);
    let dy = s.ny(b) - s.ny(a);
    sqrt(dx * dx + dy * dy)
}

fn lane(s: &LogicState, slot: usize, lanes: usize) -> usize {
    let l = (s.ny(slot) * lanes as f64) as usize;
    l.min(lanes.saturating_sub(1))
}

fn crisp(b: bool) -> Eval {
    Eval::Crisp(if b { 1.0 } else { 0.0 })
}

/// Evaluates a relation on object slots `a` (and `b` for binary relations),
/// ignoring presence. `type_const` is the type id for `TypeIs`;
/// `diver_type`/`collected_type` are needed by `DiversFull`.
pub(crate) fn evaluate(
    rel: Relation,
    s: &LogicState,
    a: usize,
    b: usize,
    aux: &EvalAux,
    params: &SoftPredicateParams,
) -> Eval {
    use Relation::*;
    match rel {
        Closeby | NotCloseby => {
            let mut m = margin(ParamGroup::Closeby, params, 1.0, -dist(s, a, b));
            m.complement = rel == NotCloseby;
            Eval::Soft(m)
        }
        SameRow => Eval::Soft(margin(
            ParamGroup::Row,
            params,
            1.0,
            -(s.ny(b) - s.ny(a)).abs(),
        )),
        OnLeft => Eval::Soft(margin(ParamGroup::Horizontal, params, 0.0, s.nx(b) - s.nx(a))),
        OnRight => Eval::Soft(margin(ParamGroup::Horizontal, params, 0.0, s.nx(a) - s.nx(b))),
        AboveRow => Eval::Soft(margin(ParamGroup::Row, params, -1.0, s.ny(b) - s.ny(a))),
        BelowRow => Eval::Soft(margin(ParamGroup::Row, params, -1.0, s.ny(a) - s.ny(b))),
        AtTop => Eval::Soft(margin(ParamGroup::Edge, params, 1.0, -s.ny(a))),
        AtBottom => Eval::Soft(margin(ParamGroup::Edge, params, -1.0, s.ny(a))),
        AboveWater => Eval::Soft(margin(ParamGroup::Water, params, 1.0, -s.ny(a))),
        BelowWater => Eval::Soft(margin(ParamGroup::Water, params, -1.0, s.ny(a))),
        Closest => {
            let d = dist(s, a, b);
            let tb = s.objects[b].type_id;
            let rival = s
                .objects
                .iter()
                .enumerate()
                .filter(|&(i, o)| i != a && i != b && o.present && o.type_id == tb)
                .map(|(i, _)| dist(s, a, i))
                .fold(f64::INFINITY, f64::min);
            if rival.is_infinite() {
                Eval::Crisp(1.0)
            } else {
                Eval::Soft(margin(ParamGroup::Closest, params, 0.0, rival - d))
            }
        }
        OxygenLow => {
            let level = s.objects[a].w / s.frame_w;
            Eval::Soft(margin(ParamGroup::Oxygen, params, 1.0, -level))
        }
        OnEven => crisp(lane(s, a, params.lanes) % 2 == 0),
        OnOdd => crisp(lane(s, a, params.lanes) % 2 == 1),
        FacingLeft => crisp(s.objects[a].orientation == Some(Orientation::Left)),
        FacingRight => crisp(s.objects[a].orientation == Some(Orientation::Right)),
        Visible => crisp(true),
        TypeIs => crisp(Some(s.objects[a].type_id) == aux.type_const),
        DiversFull => {
            let collected = match aux.collected_type {
                Some(t) => s.objects.iter().filter(|o| o.present && o.type_id == t).count(),
                None => 0,
            };
            crisp(collected >= params.diver_capacity)
        }
    }
}

/// Per-atom context resolved when the index is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct EvalAux {
    pub type_const: Option<usize>,
    pub collected_type: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_names_share_generic_semantics() {
        assert_eq!(relation_for("close_by_enemy"), Some(Relation::Closeby));
        assert_eq!(relation_for("not_close_by_enemy"), Some(Relation::NotCloseby));
        assert_eq!(relation_for("same_depth_missile"), Some(Relation::SameRow));
        assert_eq!(relation_for("right_of_diver"), Some(Relation::OnRight));
        assert_eq!(relation_for("higher_than_enemy"), Some(Relation::AboveRow));
        assert_eq!(relation_for("deeper_than_diver"), Some(Relation::BelowRow));
        assert_eq!(relation_for("visible_missile"), Some(Relation::Visible));
        assert_eq!(relation_for("dance"), None);
    }

    #[test]
    fn defaults_are_valid() {
        let p = SoftPredicateParams::default();
        assert!(p.is_valid());
        assert_eq!(p.closeby, SoftParam::new(0.15, 0.02));
        assert_eq!(p.row, SoftParam::new(0.04, 0.02));
        assert_eq!(p.oxygen.threshold, 0.3);
        let mut bad = p.clone();
        bad.row.temperature = 0.0;
        assert!(!bad.is_valid());
    }
}
