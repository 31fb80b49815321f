//! Generated property texts.

/// Spacing rule: every object placed by the bot keeps a Chebyshev distance
/// of at least `min_distance` from every object still on the floor. With a
/// distance of 1 this only forbids sharing a cell.
pub fn spacing_property(min_distance: u32) -> String {
    let d = min_distance;
    format!(
        r#"// Objects keep a Chebyshev distance of at least {d} from each other.
//
// Generated for minimum distance {d}. Each placement opens a guard that
// every later placement must clear, on at least one axis, until the placed
// object is removed.

type placed(id, x, y) matches {{ sender: "bot", slots: {{ object_id: id, horizontal: x, vertical: y }} }};
type placement matches {{ sender: "bot", slots: {{ horizontal: _, vertical: _ }} }};
type removed(id) matches {{ last_action: "utter_remove_object", slots: {{ object_id: id }} }};
type far_left(x) matches {{ slots: {{ horizontal: <= x - {d} }} }};
type far_right(x) matches {{ slots: {{ horizontal: >= x + {d} }} }};
type far_behind(y) matches {{ slots: {{ vertical: <= y - {d} }} }};
type far_front(y) matches {{ slots: {{ vertical: >= y + {d} }} }};
type any matches {{}};

Spacing =
    let id, x, y {{
        placed(id, x, y)
        ((((!placement /\ !removed(id)) \/ (placement /\ (far_left(x) \/ far_right(x) \/ far_behind(y) \/ far_front(y))))*
          removed(id) any*)
         /\ Spacing)
    }}
    \/ !placement Spacing;
"#
    )
}
