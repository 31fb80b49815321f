//! The factory floor: a grid of cells, each holding at most one object.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::decide::BotAction;
use super::nlu::split_object_id;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorObject {
    pub id: String,
    #[serde(rename = "type")]
    pub object_type: String,
    pub x: i64,
    pub y: i64,
}

/// Wire form of the floor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Floor {
    pub width: i64,
    pub height: i64,
    pub objects: Vec<FloorObject>,
}

impl Floor {
    pub fn at(&self, x: i64, y: i64) -> Option<&FloorObject> {
        self.objects.iter().find(|o| o.x == x && o.y == y)
    }
}

/// Origin is the top-left cell; `x` grows to the right and `y` towards the
/// front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoryState {
    width: i64,
    height: i64,
    cells: BTreeMap<(i64, i64), String>,
    objects: BTreeMap<String, FloorObject>,
    counters: BTreeMap<String, u32>,
    bases: BTreeMap<String, u32>,
    default_base: u32,
}

impl FactoryState {
    pub fn new(width: i64, height: i64) -> FactoryState {
        FactoryState {
            width,
            height,
            cells: BTreeMap::new(),
            objects: BTreeMap::new(),
            counters: BTreeMap::new(),
            bases: BTreeMap::new(),
            default_base: 0,
        }
    }

    /// First index used for every type without its own base.
    pub fn with_counter_base(mut self, base: u32) -> Self {
        self.default_base = base;
        self
    }

    pub fn with_type_base(mut self, object_type: impl Into<String>, base: u32) -> Self {
        self.bases.insert(object_type.into(), base);
        self
    }

    pub fn width(&self) -> i64 {
        self.width
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        (0..self.width).contains(&x) && (0..self.height).contains(&y)
    }

    pub fn at(&self, x: i64, y: i64) -> Option<&FloorObject> {
        self.cells.get(&(x, y)).and_then(|id| self.objects.get(id))
    }

    pub fn is_free(&self, x: i64, y: i64) -> bool {
        self.contains(x, y) && !self.cells.contains_key(&(x, y))
    }

    pub fn object(&self, id: &str) -> Option<&FloorObject> {
        self.objects.get(id)
    }

    pub fn objects(&self) -> impl Iterator<Item = &FloorObject> {
        self.objects.values()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    fn base(&self, object_type: &str) -> u32 {
        self.bases
            .get(object_type)
            .copied()
            .unwrap_or(self.default_base)
    }

    /// Id the next object of `object_type` will get.
    pub fn next_id(&self, object_type: &str) -> String {
        let n = self
            .counters
            .get(object_type)
            .copied()
            .unwrap_or_else(|| self.base(object_type));
        format!("{object_type}{n}")
    }

    /// Applies the floor change an action describes. Returns whether the
    /// floor changed; actions that do not fit the floor are ignored.
    pub fn apply(&mut self, action: &BotAction) -> bool {
        match action {
            BotAction::AddObject {
                id,
                object_type,
                x,
                y,
            }
            | BotAction::AddRelative {
                id,
                object_type,
                x,
                y,
                ..
            } => {
                if !self.is_free(*x, *y)
                    || self.objects.contains_key(id)
                    || *id != self.next_id(object_type)
                {
                    return false;
                }
                let next = self
                    .counters
                    .get(object_type)
                    .copied()
                    .unwrap_or_else(|| self.base(object_type))
                    + 1;
                self.counters.insert(object_type.clone(), next);
                self.cells.insert((*x, *y), id.clone());
                self.objects.insert(
                    id.clone(),
                    FloorObject {
                        id: id.clone(),
                        object_type: object_type.clone(),
                        x: *x,
                        y: *y,
                    },
                );
                true
            }
            BotAction::RemoveObject { id, .. } => match self.objects.remove(id) {
                Some(o) => {
                    self.cells.remove(&(o.x, o.y));
                    true
                }
                None => false,
            },
            BotAction::Error { .. } | BotAction::Listen => false,
        }
    }

    /// Cells and objects agree one to one, every object is on the grid and
    /// every id was issued by its type's counter.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.cells.len() != self.objects.len() {
            return Err(format!(
                "{} cells for {} objects",
                self.cells.len(),
                self.objects.len()
            ));
        }
        for ((x, y), id) in &self.cells {
            match self.objects.get(id) {
                Some(o) if o.x == *x && o.y == *y => {}
                _ => return Err(format!("cell ({x},{y}) points at {id} which is elsewhere")),
            }
        }
        for o in self.objects.values() {
            if !self.contains(o.x, o.y) {
                return Err(format!("{} is off the grid at ({},{})", o.id, o.x, o.y));
            }
            let Some((ty, idx)) = split_object_id(&o.id) else {
                return Err(format!("malformed id {}", o.id));
            };
            let issued = self
                .counters
                .get(ty)
                .copied()
                .unwrap_or_else(|| self.base(ty));
            if ty != o.object_type || idx < self.base(ty) || idx >= issued {
                return Err(format!("{} was not issued by the {ty} counter", o.id));
            }
        }
        Ok(())
    }

    pub fn floor(&self) -> Floor {
        let mut objects: Vec<FloorObject> = self.objects.values().cloned().collect();
        objects.sort_by_key(|o| (o.y, o.x));
        Floor {
            width: self.width,
            height: self.height,
            objects,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add(state: &FactoryState, ty: &str, x: i64, y: i64) -> BotAction {
        BotAction::AddObject {
            id: state.next_id(ty),
            object_type: ty.into(),
            x,
            y,
        }
    }

    #[test]
    fn counters_are_per_type() {
        let mut s = FactoryState::new(4, 4).with_type_base("table", 1);
        assert!(s.apply(&add(&s, "table", 0, 0)));
        assert!(s.apply(&add(&s, "box", 1, 0)));
        assert!(s.apply(&add(&s, "table", 2, 0)));
        let ids: Vec<_> = s.objects().map(|o| o.id.as_str()).collect();
        assert_eq!(ids, ["box0", "table1", "table2"]);
        s.check_invariants().unwrap();
    }

    #[test]
    fn occupied_and_off_grid_adds_are_ignored() {
        let mut s = FactoryState::new(2, 2);
        assert!(s.apply(&add(&s, "box", 0, 0)));
        assert!(!s.apply(&add(&s, "box", 0, 0)));
        assert!(!s.apply(&add(&s, "box", 2, 0)));
        assert_eq!(s.len(), 1);
        s.check_invariants().unwrap();
    }

    #[test]
    fn removal_frees_the_cell_but_not_the_name() {
        let mut s = FactoryState::new(2, 2);
        s.apply(&add(&s, "box", 0, 0));
        let rm = BotAction::RemoveObject {
            id: "box0".into(),
            object_type: "box".into(),
            x: 0,
            y: 0,
        };
        assert!(s.apply(&rm));
        assert!(!s.apply(&rm));
        assert!(s.is_free(0, 0));
        assert_eq!(s.next_id("box"), "box1");
    }

    #[test]
    fn floor_is_sorted_row_major() {
        let mut s = FactoryState::new(3, 3);
        s.apply(&add(&s, "a", 2, 0));
        s.apply(&add(&s, "b", 0, 1));
        s.apply(&add(&s, "c", 1, 0));
        let f = s.floor();
        let ids: Vec<_> = f.objects.iter().map(|o| o.id.as_str()).collect();
        assert_eq!(ids, ["c0", "a0", "b0"]);
        assert_eq!(f.at(0, 1).unwrap().id, "b0");
    }
}
