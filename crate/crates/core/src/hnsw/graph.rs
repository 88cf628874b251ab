use rand::Rng;

use crate::error::{Error, Result};

/// Multi-level adjacency structure.
///
/// Level 0 holds every node in a flat array with `m0` slots per node. Upper
/// levels are sparse, so each node keeps its own short lists for levels
/// `1..=node_level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnswGraph {
    m: usize,
    m0: usize,
    levels: Vec<u8>,
    entry_point: Option<u32>,
    max_level: usize,
    level0: Vec<u32>,
    level0_len: Vec<u32>,
    upper: Vec<Vec<Vec<u32>>>,
}

impl HnswGraph {
    pub(crate) fn new(m: usize, m0: usize) -> Self {
        HnswGraph {
            m,
            m0,
            levels: Vec::new(),
            entry_point: None,
            max_level: 0,
            level0: Vec::new(),
            level0_len: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn entry_point(&self) -> Option<u32> {
        self.entry_point
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn node_level(&self, id: u32) -> usize {
        self.levels[id as usize] as usize
    }

    pub fn node_levels(&self) -> &[u8] {
        &self.levels
    }

    /// Neighbor capacity at `level`.
    pub fn capacity(&self, level: usize) -> usize {
        if level == 0 {
            self.m0
        } else {
            self.m
        }
    }

    #[inline]
    pub fn neighbors(&self, id: u32, level: usize) -> &[u32] {
        let id = id as usize;
        if level == 0 {
            let start = id * self.m0;
            &self.level0[start..start + self.level0_len[id] as usize]
        } else {
            &self.upper[id][level - 1]
        }
    }

    pub(crate) fn add_node(&mut self, level: usize) -> u32 {
        let id = self.levels.len() as u32;
        self.levels.push(level as u8);
        self.level0.resize(self.level0.len() + self.m0, 0);
        self.level0_len.push(0);
        self.upper.push(vec![Vec::new(); level]);
        id
    }

    pub(crate) fn set_entry(&mut self, id: u32, level: usize) {
        self.entry_point = Some(id);
        self.max_level = level;
    }

    pub(crate) fn set_neighbors(&mut self, id: u32, level: usize, ids: &[u32]) {
        debug_assert!(ids.len() <= self.capacity(level));
        let idx = id as usize;
        if level == 0 {
            let start = idx * self.m0;
            self.level0[start..start + ids.len()].copy_from_slice(ids);
            self.level0_len[idx] = ids.len() as u32;
        } else {
            let list = &mut self.upper[idx][level - 1];
            list.clear();
            list.extend_from_slice(ids);
        }
    }

    /// Appends `nb` to the list of `id` if there is room. Returns `false`
    /// when the list is already full.
    pub(crate) fn try_push_neighbor(&mut self, id: u32, level: usize, nb: u32) -> bool {
        let idx = id as usize;
        if level == 0 {
            let len = self.level0_len[idx] as usize;
            if len == self.m0 {
                return false;
            }
            self.level0[idx * self.m0 + len] = nb;
            self.level0_len[idx] += 1;
            true
        } else {
            let list = &mut self.upper[idx][level - 1];
            if list.len() == self.m {
                return false;
            }
            list.push(nb);
            true
        }
    }

    /// Checks every structural invariant in O(edges).
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let bad = |msg: String| Err(Error::invalid(msg));
        match self.entry_point {
            None if n > 0 => return bad("non-empty graph without an entry point".into()),
            Some(ep) if ep as usize >= n => return bad(format!("entry point {ep} out of range")),
            Some(ep) if self.node_level(ep) != self.max_level => {
                return bad(format!("entry point {ep} is not on the top level"))
            }
            _ => {}
        }
        if let Some(top) = self.levels.iter().max() {
            if *top as usize != self.max_level {
                return bad("max level disagrees with node levels".into());
            }
        }
        let mut seen = vec![u64::MAX; n];
        for id in 0..n as u32 {
            for level in 0..=self.node_level(id) {
                let list = self.neighbors(id, level);
                if list.len() > self.capacity(level) {
                    return bad(format!("node {id} level {level} exceeds capacity"));
                }
                for &nb in list {
                    if nb as usize >= n {
                        return bad(format!("node {id} links to missing node {nb}"));
                    }
                    if nb == id {
                        return bad(format!("node {id} links to itself"));
                    }
                    if self.node_level(nb) < level {
                        return bad(format!("node {id} links to {nb} above its level"));
                    }
                    let stamp = id as u64 * 256 + level as u64;
                    if seen[nb as usize] == stamp {
                        return bad(format!("node {id} level {level} repeats neighbor {nb}"));
                    }
                    seen[nb as usize] = stamp;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        m: usize,
        m0: usize,
        levels: Vec<u8>,
        entry_point: Option<u32>,
        adjacency: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        let mut g = HnswGraph::new(m, m0);
        for &l in &levels {
            g.add_node(l as usize);
        }
        g.max_level = levels.iter().copied().max().unwrap_or(0) as usize;
        g.entry_point = entry_point;
        for (id, per_level) in adjacency.into_iter().enumerate() {
            for (level, list) in per_level.into_iter().enumerate() {
                if list.len() > g.capacity(level) {
                    return Err(Error::invalid(format!(
                        "node {id} level {level} exceeds capacity"
                    )));
                }
                g.set_neighbors(id as u32, level, &list);
            }
        }
        g.validate()?;
        Ok(g)
    }
}

/// `floor(-ln(u) * ml)` for `u` in `(0, 1]`.
pub fn level_from_uniform(u: f64, ml: f64) -> usize {
    debug_assert!(u > 0.0 && u <= 1.0);
    let level = (-u.ln() * ml).floor();
    // keep levels in a byte; reaching this needs u < 1e-100 for sane ml
    level.clamp(0.0, 255.0) as usize
}

/// Draws a level from the geometric distribution controlled by `ml`.
pub fn assign_level<R: Rng + ?Sized>(rng: &mut R, ml: f64) -> usize {
    // random::<f64>() is in [0, 1); flip it into (0, 1]
    let u = 1.0 - rng.random::<f64>();
    level_from_uniform(u, ml)
}
