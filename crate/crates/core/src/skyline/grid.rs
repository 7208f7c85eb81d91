use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::measures::MeasureSet;

/// Guards the floor against `ln` rounding when a value sits exactly on a
/// cell boundary.
const FLOOR_SLACK: f64 = 1e-9;

/// Cell coordinates over the non-decisive measures, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridPosition(pub Vec<u32>);

#[derive(Debug, Clone, PartialEq)]
pub struct Occupant {
    pub bitmap: StateBitmap,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Submission {
    Inserted,
    /// The previous occupant that was displaced.
    Replaced(StateBitmap),
    Rejected,
}

/// ε-discretized archive holding at most one state per cell.
#[derive(Debug, Clone)]
pub struct SkylineGrid {
    eps: f64,
    measures: MeasureSet,
    log_base: f64,
    cells: BTreeMap<GridPosition, Occupant>,
    below_lower: Vec<StateBitmap>,
}

impl SkylineGrid {
    pub fn new(eps: f64, measures: MeasureSet) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        Ok(SkylineGrid {
            eps,
            log_base: (1.0 + eps).ln(),
            measures,
            cells: BTreeMap::new(),
            below_lower: Vec::new(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn measures(&self) -> &MeasureSet {
        &self.measures
    }

    fn coord(&self, v: f64, pl: f64) -> u32 {
        ((v / pl).ln() / self.log_base + FLOOR_SLACK).floor().max(0.0) as u32
    }

    fn graded(&self) -> impl Iterator<Item = usize> + '_ {
        let d = self.measures.decisive();
        (0..self.measures.len()).filter(move |&i| i != d)
    }

    /// Floor-log coordinates of `values`. Values under a lower bound are
    /// refused.
    pub fn grid_pos(&self, values: &[f64]) -> Result<GridPosition> {
        let specs = self.measures.specs();
        let mut coords = Vec::with_capacity(specs.len().saturating_sub(1));
        for i in self.graded() {
            if values[i] < specs[i].pl {
                return Err(Error::BoundViolation {
                    measure: specs[i].name.clone(),
                    value: values[i],
                    lower: specs[i].pl,
                });
            }
            coords.push(self.coord(values[i], specs[i].pl));
        }
        Ok(GridPosition(coords))
    }

    /// Like `grid_pos`, but coordinates under a lower bound become 0. The flag
    /// reports whether any value was below its lower bound.
    fn clamped_pos(&self, values: &[f64]) -> (GridPosition, bool) {
        let specs = self.measures.specs();
        let below = values.iter().zip(specs).any(|(v, s)| *v < s.pl);
        let coords = self
            .graded()
            .map(|i| if values[i] < specs[i].pl { 0 } else { self.coord(values[i], specs[i].pl) })
            .collect();
        (GridPosition(coords), below)
    }

    /// Rejects vectors above any upper bound; otherwise takes an empty cell,
    /// or displaces the occupant when the decisive value is strictly lower.
    pub fn upareto(&mut self, bitmap: &StateBitmap, values: &[f64]) -> Submission {
        if !self.measures.within_upper(values) {
            return Submission::Rejected;
        }
        let (pos, below) = self.clamped_pos(values);
        let d = self.measures.decisive();
        let outcome = match self.cells.get(&pos) {
            None => Submission::Inserted,
            Some(cur) if values[d] < cur.values[d] => Submission::Replaced(cur.bitmap.clone()),
            Some(_) => return Submission::Rejected,
        };
        if below && !self.below_lower.contains(bitmap) {
            self.below_lower.push(bitmap.clone());
        }
        self.cells.insert(
            pos,
            Occupant {
                bitmap: bitmap.clone(),
                values: values.to_vec(),
            },
        );
        outcome
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Occupants in cell order.
    pub fn cells(&self) -> impl Iterator<Item = (&GridPosition, &Occupant)> {
        self.cells.iter()
    }

    pub fn occupants(&self) -> impl Iterator<Item = &Occupant> {
        self.cells.values()
    }

    /// Occupants that no other occupant dominates, in cell order. Dropping
    /// the rest keeps every ε-cover the grid provides.
    pub fn front(&self) -> Vec<&Occupant> {
        let occ: Vec<&Occupant> = self.cells.values().collect();
        let values: Vec<Vec<f64>> = occ.iter().map(|o| o.values.clone()).collect();
        super::exact_pareto(&values).into_iter().map(|i| occ[i]).collect()
    }

    pub fn position_of(&self, bitmap: &StateBitmap) -> Option<&GridPosition> {
        self.cells.iter().find(|(_, o)| &o.bitmap == bitmap).map(|(p, _)| p)
    }

    /// Accepted states with some value under its lower bound; they are kept
    /// but flagged.
    pub fn below_lower(&self) -> &[StateBitmap] {
        &self.below_lower
    }

    /// Drops a cell's occupant. Only meant for exercising verification.
    pub fn evict(&mut self, pos: &GridPosition) -> Option<Occupant> {
        self.cells.remove(pos)
    }

    /// Product over graded measures of the number of cells per axis.
    pub fn capacity_bound(&self) -> u128 {
        let specs = self.measures.specs();
        self.graded()
            .map(|i| self.coord(specs[i].pu, specs[i].pl) as u128 + 1)
            .product()
    }
}
