use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};

/// A valuated test: normalized and raw measure values for one bitmap.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub bitmap: StateBitmap,
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
}

impl LogEntry {
    pub fn support(&self) -> usize {
        self.bitmap.count_ones()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Append-only set of valuated tests, at most one per bitmap.
///
/// Alongside the entries it keeps, per measure and for the support count, a
/// sorted index used to bracket values of unvaluated states.
#[derive(Debug)]
pub struct TestLog {
    measures: usize,
    entries: Vec<LogEntry>,
    index: HashMap<StateBitmap, usize>,
    sorted: Vec<BTreeMap<Key, Vec<usize>>>,
    diameter: Mutex<(usize, f64)>,
}

impl Clone for TestLog {
    fn clone(&self) -> Self {
        TestLog {
            measures: self.measures,
            entries: self.entries.clone(),
            index: self.index.clone(),
            sorted: self.sorted.clone(),
            diameter: Mutex::new(*self.diameter.lock().unwrap()),
        }
    }
}

impl TestLog {
    pub fn new(measures: usize) -> Self {
        TestLog {
            measures,
            entries: Vec::new(),
            index: HashMap::new(),
            sorted: vec![BTreeMap::new(); measures + 1],
            diameter: Mutex::new((0, 0.0)),
        }
    }

    pub fn measure_count(&self) -> usize {
        self.measures
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn get(&self, b: &StateBitmap) -> Option<&LogEntry> {
        self.index.get(b).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, b: &StateBitmap) -> bool {
        self.index.contains_key(b)
    }

    pub fn append(&mut self, entry: LogEntry) -> Result<()> {
        if entry.values.len() != self.measures || entry.raw.len() != self.measures {
            return Err(Error::Argument(format!(
                "log entry has {} values, log holds {} measures",
                entry.values.len(),
                self.measures
            )));
        }
        if self.index.contains_key(&entry.bitmap) {
            return Err(Error::Argument(format!("bitmap {} already logged", entry.bitmap)));
        }
        let id = self.entries.len();
        for (node, v) in entry.values.iter().enumerate() {
            self.sorted[node].entry(Key(*v)).or_default().push(id);
        }
        self.sorted[self.measures]
            .entry(Key(entry.support() as f64))
            .or_default()
            .push(id);
        self.index.insert(entry.bitmap.clone(), id);
        self.entries.push(entry);
        Ok(())
    }

    /// Value of node `node` for entry `id`: a measure, or the support count
    /// when `node` equals the measure count.
    pub fn node_value(&self, id: usize, node: usize) -> f64 {
        if node == self.measures {
            self.entries[id].support() as f64
        } else {
            self.entries[id].values[node]
        }
    }

    /// Entries at the largest node value `<= x` and at the smallest `>= x`.
    pub fn bracket(&self, node: usize, x: f64) -> Option<(&[usize], &[usize])> {
        let map = &self.sorted[node];
        let below = map.range(..=Key(x)).next_back()?;
        let above = map.range(Key(x)..).next()?;
        Some((below.1.as_slice(), above.1.as_slice()))
    }

    /// Largest Euclidean distance between two logged vectors, extended
    /// incrementally as entries arrive. `None` below two entries.
    pub fn diameter(&self) -> Option<f64> {
        if self.entries.len() < 2 {
            return None;
        }
        let mut d = self.diameter.lock().unwrap();
        let (done, mut best) = *d;
        for i in done.max(1)..self.entries.len() {
            for j in 0..i {
                best = best.max(euclid(&self.entries[i].values, &self.entries[j].values));
            }
        }
        *d = (self.entries.len(), best);
        Some(best)
    }
}

/// Euclidean distance between two vectors of equal length.
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
