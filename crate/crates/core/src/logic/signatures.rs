//! Built-in signature sets for the shipped environments.

use super::{PredicateKind::*, SignatureSet, Sort};

fn must(r: Result<impl Sized, super::SignatureError>) {
    if let Err(e) = r {
        panic!("built-in signature set is inconsistent: {e}");
    }
}

/// Vocabulary of the Asterix rule base. Actions follow the Atari ordering
/// restricted to the moves the game uses: noop, up, right, left, down.
pub fn asterix_signatures() -> SignatureSet {
    let mut s = SignatureSet::new(&["noop", "up", "right", "left", "down"]);
    must(s.add_sort(Sort::objects("object", &[])));
    must(s.add_sort(Sort::objects("player", &["player"])));
    must(s.add_sort(Sort::symbols("type", &["player", "enemy", "bonus"])));

    for p in ["closest", "closeby", "notcloseby", "on_left", "on_right"] {
        must(s.add_predicate(p, &["object", "object"], BodySoft));
    }
    for p in ["same_row", "above_row", "below_row"] {
        must(s.add_predicate(p, &["object", "object"], BodySoft));
    }
    must(s.add_predicate("at_top", &["object"], BodySoft));
    must(s.add_predicate("at_bottom", &["object"], BodySoft));
    must(s.add_predicate("type", &["object", "type"], BodyCrisp));
    for p in ["visible", "on_odd", "on_even"] {
        must(s.add_predicate(p, &["object"], BodyCrisp));
    }

    for h in [
        "noop_far_enemy",
        "noop_no_bonus",
        "up_dodge_left",
        "up_dodge_right",
        "down_dodge_left",
        "down_dodge_right",
        "up_bonus_left",
        "up_bonus_right",
        "down_bonus_left",
        "down_bonus_right",
        "right_bonus",
        "left_bonus",
    ] {
        must(s.add_predicate(h, &["player"], ActionHead));
    }
    s
}

/// Vocabulary of the Seaquest rule base. Predicates are typed by sort rather
/// than by explicit `type/2` tests.
pub fn seaquest_signatures() -> SignatureSet {
    let mut s = SignatureSet::new(&["noop", "fire", "up", "right", "left", "down"]);
    must(s.add_sort(Sort::objects("object", &[])));
    must(s.add_sort(Sort::objects("player", &["player"])));
    must(s.add_sort(Sort::objects("enemy", &["shark", "submarine"])));
    must(s.add_sort(Sort::objects("missile", &["enemy_missile"])));
    must(s.add_sort(Sort::objects("diver", &["diver"])));
    must(s.add_sort(Sort::objects("oxygen", &["oxygen_bar"])));

    must(s.add_predicate("oxygen_low", &["oxygen"], BodySoft));
    for p in ["facing_left", "facing_right"] {
        must(s.add_predicate(p, &["player"], BodyCrisp));
    }
    for p in ["above_water", "below_water"] {
        must(s.add_predicate(p, &["player"], BodySoft));
    }
    for (kind, sort) in [("enemy", "enemy"), ("missile", "missile"), ("diver", "diver")] {
        must(s.add_predicate(&alloc::format!("visible_{kind}"), &[sort], BodyCrisp));
        for rel in [
            "same_depth",
            "close_by",
            "not_close_by",
            "right_of",
            "left_of",
            "higher_than",
            "deeper_than",
        ] {
            must(s.add_predicate(&alloc::format!("{rel}_{kind}"), &["player", sort], BodySoft));
        }
    }
    must(s.add_predicate("divers_collected_full", &["diver"], BodyCrisp));

    for h in [
        "up_air",
        "fire_left",
        "fire_right",
        "left_aim",
        "right_aim",
        "down_aim",
        "up_aim",
        "up_evade",
        "down_evade",
        "left_to_diver",
        "right_to_diver",
        "up_to_diver",
        "down_to_diver",
        "noop_divers_full",
        "up_return_divers",
        "noop_evade",
    ] {
        must(s.add_predicate(h, &["player"], ActionHead));
    }
    s
}

/// Vocabulary for Freeway. No rule base ships for it; the set exists so user
/// rules can be parsed against the preset.
pub fn freeway_signatures() -> SignatureSet {
    let mut s = SignatureSet::new(&["noop", "up", "down"]);
    must(s.add_sort(Sort::objects("object", &[])));
    must(s.add_sort(Sort::objects("player", &["player"])));
    must(s.add_sort(Sort::symbols("type", &["player", "car"])));
    for p in [
        "closeby",
        "notcloseby",
        "on_left",
        "on_right",
        "same_row",
        "above_row",
        "below_row",
    ] {
        must(s.add_predicate(p, &["object", "object"], BodySoft));
    }
    must(s.add_predicate("type", &["object", "type"], BodyCrisp));
    must(s.add_predicate("visible", &["object"], BodyCrisp));
    for h in ["up_cross", "noop_wait", "down_retreat"] {
        must(s.add_predicate(h, &["player"], ActionHead));
    }
    s
}
