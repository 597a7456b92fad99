use std::sync::Arc;

use super::{Geodesics, PathError, WreathPath};
use crate::group::{Group, GroupElement};

/// Shared groups and geodesic models for compiling paths in `H ≀ G`.
pub(crate) struct Compiler<'a> {
    pub group: &'a Arc<Group>,
    pub lamp: &'a Arc<Group>,
    pub base: &'a Arc<Group>,
    pub base_geo: &'a Geodesics,
    pub lamp_geo: &'a Geodesics,
    /// Pure toggles `(e, δ_e ↦ h_j)` and pure walks `(s_j, ∅)`.
    toggles: Vec<GroupElement>,
    walks: Vec<GroupElement>,
}

impl<'a> Compiler<'a> {
    pub fn new(
        group: &'a Arc<Group>,
        base_geo: &'a Geodesics,
        lamp_geo: &'a Geodesics,
    ) -> Result<Self, PathError> {
        let (lamp, base) = group
            .components()
            .filter(|_| group.is_wreath())
            .ok_or_else(|| PathError::NotWreath(group.name().to_string()))?;
        let toggles = lamp
            .generators()
            .iter()
            .map(|h| group.wreath_element(base.identity(), [(base.identity(), h.clone())]))
            .collect::<Result<_, _>>()
            .map_err(|e| PathError::Geometry(e.to_string()))?;
        let walks = base
            .generators()
            .iter()
            .map(|s| group.wreath_element(s.clone(), []))
            .collect::<Result<_, _>>()
            .map_err(|e| PathError::Geometry(e.to_string()))?;
        Ok(Compiler {
            group,
            lamp,
            base,
            base_geo,
            lamp_geo,
            toggles,
            walks,
        })
    }

    /// Base distance between two positions.
    pub fn distance(&self, from: &GroupElement, to: &GroupElement) -> Result<u32, PathError> {
        let d = self.base.multiply_unchecked(&self.base.invert_unchecked(from), to);
        self.base_geo.length(&d)
    }
}

/// Incremental word builder. A lamp switch at the current position is folded into
/// the previous letter's second switch when that slot is free, otherwise it waits
/// to become the first switch of the next step. A switch still waiting when a
/// high-level step ends is flushed by a two-letter detour.
pub(crate) struct Builder<'c, 'a> {
    c: &'c Compiler<'a>,
    start: GroupElement,
    current: GroupElement,
    word: Vec<usize>,
    steps: Vec<u8>,
    pending: Option<usize>,
    step: u8,
}

impl<'c, 'a> Builder<'c, 'a> {
    pub fn new(c: &'c Compiler<'a>, start: GroupElement) -> Self {
        Builder {
            c,
            current: start.clone(),
            start,
            word: Vec::new(),
            steps: Vec::new(),
            pending: None,
            step: 0,
        }
    }

    pub fn begin(&mut self, step: u8) {
        self.flush();
        self.step = step;
    }

    pub fn position(&self) -> &GroupElement {
        &self.current.as_wreath().expect("wreath element").position
    }

    pub fn current(&self) -> &GroupElement {
        &self.current
    }

    pub fn lamp_at(&self, key: &GroupElement) -> GroupElement {
        self.current
            .as_wreath()
            .and_then(|w| w.lamp(key).cloned())
            .unwrap_or_else(|| self.c.lamp.identity())
    }

    fn push(&mut self, letter: usize) {
        self.word.push(letter);
        self.steps.push(self.step);
    }

    pub fn walk(&mut self, j: usize) {
        let letter = self.c.group.wreath_generator_index(j, self.pending.take(), None);
        self.push(letter);
        self.current = self.c.group.multiply_unchecked(&self.current, &self.c.walks[j]);
    }

    pub fn toggle(&mut self, j: usize) {
        if self.pending.is_some() {
            self.flush();
        }
        let mergeable = self
            .word
            .last()
            .map(|&l| self.c.group.wreath_generator_parts(l))
            .filter(|&(_, _, s2)| s2.is_none());
        match mergeable {
            Some((w, s1, None)) => {
                let letter = self.c.group.wreath_generator_index(w, s1, Some(j));
                *self.word.last_mut().unwrap() = letter;
            }
            _ => self.pending = Some(j),
        }
        self.current = self.c.group.multiply_unchecked(&self.current, &self.c.toggles[j]);
    }

    fn flush(&mut self) {
        if let Some(j) = self.pending.take() {
            let there = self.c.group.wreath_generator_index(0, Some(j), None);
            let back = self.c.group.wreath_generator_index(self.c.base.inverse_generator(0), None, None);
            self.push(there);
            self.push(back);
        }
    }

    pub fn follow(&mut self, word: &[usize]) {
        for &j in word {
            self.walk(j);
        }
    }

    pub fn move_to(&mut self, target: &GroupElement) -> Result<(), PathError> {
        let base = self.c.base;
        let d = base.multiply_unchecked(&base.invert_unchecked(self.position()), target);
        let w = self.c.base_geo.word(&d)?;
        self.follow(&w);
        Ok(())
    }

    /// Walk to `key` and switch its lamp to `value`.
    pub fn set_lamp(&mut self, key: &GroupElement, value: &GroupElement) -> Result<(), PathError> {
        let current = self.lamp_at(key);
        if &current == value {
            return Ok(());
        }
        self.move_to(key)?;
        let lamp = self.c.lamp;
        let delta = lamp.multiply_unchecked(&lamp.invert_unchecked(&current), value);
        for j in self.c.lamp_geo.word(&delta)? {
            self.toggle(j);
        }
        Ok(())
    }

    /// Set every listed lamp. On a base ℤ the changed interval is swept from
    /// whichever end is closer; elsewhere the nearest remaining lamp is visited next.
    pub fn sweep(&mut self, targets: &[(GroupElement, GroupElement)]) -> Result<(), PathError> {
        let mut todo: Vec<(GroupElement, GroupElement)> = targets
            .iter()
            .filter(|(k, v)| &self.lamp_at(k) != v)
            .cloned()
            .collect();
        if todo.is_empty() {
            return Ok(());
        }
        if matches!(self.c.base_geo, Geodesics::Lattice(1)) {
            let coord = |e: &GroupElement| e.as_lattice().expect("lattice position")[0];
            todo.sort_by_key(|(k, _)| coord(k));
            let p = coord(self.position());
            let (lo, hi) = (coord(&todo[0].0), coord(&todo[todo.len() - 1].0));
            if (p - hi).abs() < (p - lo).abs() {
                todo.reverse();
            }
            for (k, v) in &todo {
                self.set_lamp(k, v)?;
            }
            return Ok(());
        }
        while !todo.is_empty() {
            let mut best = None;
            for (i, (k, _)) in todo.iter().enumerate() {
                let key = (self.c.distance(self.position(), k)?, self.c.base.encode(k));
                if best.as_ref().is_none_or(|(b, _)| &key < b) {
                    best = Some((key, i));
                }
            }
            let (k, v) = todo.swap_remove(best.unwrap().1);
            self.set_lamp(&k, &v)?;
        }
        Ok(())
    }

    pub fn finish(mut self, end: &GroupElement) -> Result<WreathPath, PathError> {
        self.flush();
        let path = WreathPath::compile(self.c.group, self.start, self.word, self.steps);
        if path.vertices.last() != Some(end) || &self.current != end {
            return Err(PathError::Endpoint {
                expected: end.to_string(),
                reached: path.vertices.last().map(|v| v.to_string()).unwrap_or_default(),
            });
        }
        Ok(path)
    }
}
