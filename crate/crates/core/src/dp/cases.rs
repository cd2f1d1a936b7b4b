//! Names for the composition recurrences and their mirror images.
//!
//! Every internal node of a decomposition tree combines its children by one
//! recurrence, fixed by the node kind and by where the source and sink sit
//! relative to the join vertex and the two children. The canonical
//! orientation of each recurrence is the one documented on the variant; a
//! [`Mirror`] records whether the node is the left/right image, the
//! source/sink image, or both.

use std::collections::BTreeMap;
use std::fmt;

use crate::decompose::{DecompTree, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Recurrence {
    /// Series, no special vertex inside:
    /// `DP(G1,(ra,-ra)) + DP(G2,(ra,rb))`.
    SeriesPlain,
    /// Parallel, no special vertex inside:
    /// `min_r DP(G1,(r,-r)) + DP(G2,(ra-r,rb+r))`.
    ParallelPlain,
    /// Series whose join vertex is the source:
    /// `DP(G1,(ra,-ra)) + DP(G2,(ra+rs,rb))`.
    SeriesJoinSpecial,
    /// Series with the source inside the left child:
    /// `DP(G1,(ra,rs,-ra-rs)) + DP(G2,(ra+rs,rb))`.
    SeriesOneSide,
    /// Parallel with the source inside the first child:
    /// `min_r DP(G1,(r,rs,-r-rs)) + DP(G2,(ra-r,rb+r+rs))`.
    ParallelOneSide,
    /// Series with the source inside the left child and the sink at the join:
    /// `DP(G1,(ra,rs,-ra-rs)) + DP(G2,(rt+ra+rs,rb))`.
    SeriesJoinAndSide,
    /// Series with the source in the left child and the sink in the right:
    /// `DP(G1,(ra,rs,-ra-rs)) + DP(G2,(ra+rs,rt,rb))`.
    SeriesSplit,
    /// Series with both special vertices inside the right child:
    /// `DP(G1,(ra,-ra)) + DP(G2,(ra,rs,rt,rb))`.
    SeriesSameSide,
    /// Parallel with both special vertices inside the second child:
    /// `min_r DP(G1,(r,-r)) + DP(G2,(ra-r,rs,rt,rb+r))`.
    ParallelSameBranch,
    /// Parallel with the source in the first child and the sink in the second:
    /// `min_r DP(G1,(r,rs,-r-rs)) + DP(G2,(ra-r,rt,rb+rs+r))`.
    ParallelSplit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mirror {
    pub children_swapped: bool,
    pub specials_swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseKey {
    pub recurrence: Recurrence,
    pub mirror: Mirror,
}

impl CaseKey {
    fn new(recurrence: Recurrence, children_swapped: bool, specials_swapped: bool) -> Self {
        CaseKey { recurrence, mirror: Mirror { children_swapped, specials_swapped } }
    }

    /// Every recurrence together with each of its distinct mirror images.
    pub fn all() -> Vec<CaseKey> {
        use Recurrence::*;
        let mut out = vec![CaseKey::new(SeriesPlain, false, false), CaseKey::new(ParallelPlain, false, false)];
        for sw in [false, true] {
            out.push(CaseKey::new(SeriesJoinSpecial, false, sw));
            out.push(CaseKey::new(SeriesSplit, false, sw));
            out.push(CaseKey::new(ParallelSplit, false, sw));
            out.push(CaseKey::new(SeriesSameSide, sw, false));
            out.push(CaseKey::new(ParallelSameBranch, sw, false));
            for cs in [false, true] {
                out.push(CaseKey::new(SeriesOneSide, cs, sw));
                out.push(CaseKey::new(ParallelOneSide, cs, sw));
                out.push(CaseKey::new(SeriesJoinAndSide, cs, sw));
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for CaseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.recurrence)?;
        if self.mirror.children_swapped {
            f.write_str("+swap-children")?;
        }
        if self.mirror.specials_swapped {
            f.write_str("+swap-st")?;
        }
        Ok(())
    }
}

/// The recurrence an internal node uses; `None` for leaves.
pub fn classify(tree: &DecompTree, id: NodeId) -> Option<CaseKey> {
    use Recurrence::*;
    let node = tree.node(id);
    let (s, t) = (tree.source(), tree.sink());
    match node.kind {
        NodeKind::Leaf { .. } => None,
        NodeKind::Series { join, left, right } => {
            let (l, r) = (tree.node(left).specials, tree.node(right).specials);
            Some(match node.specials.count() {
                0 => CaseKey::new(SeriesPlain, false, false),
                1 if join == s || join == t => CaseKey::new(SeriesJoinSpecial, false, join == t),
                1 => CaseKey::new(SeriesOneSide, r.s || r.t, node.specials.t),
                _ if join == s || join == t => {
                    // the special not at the join sits in one child
                    let other_right = if join == t { r.s } else { r.t };
                    CaseKey::new(SeriesJoinAndSide, other_right, join == s)
                }
                _ if (l.s && r.t) || (l.t && r.s) => CaseKey::new(SeriesSplit, false, l.t),
                _ => CaseKey::new(SeriesSameSide, l.s && l.t, false),
            })
        }
        NodeKind::Parallel { left, right } => {
            let (l, r) = (tree.node(left).specials, tree.node(right).specials);
            Some(match node.specials.count() {
                0 => CaseKey::new(ParallelPlain, false, false),
                1 => CaseKey::new(ParallelOneSide, r.s || r.t, node.specials.t),
                _ if (l.s && l.t) || (r.s && r.t) => CaseKey::new(ParallelSameBranch, l.s && l.t, false),
                _ => CaseKey::new(ParallelSplit, false, l.t),
            })
        }
    }
}

/// How many node evaluations used each recurrence variant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseCounts {
    counts: BTreeMap<CaseKey, u64>,
}

impl CaseCounts {
    pub fn add(&mut self, key: CaseKey) {
        *self.counts.entry(key).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &CaseCounts) {
        for (&k, &n) in &other.counts {
            *self.counts.entry(k).or_insert(0) += n;
        }
    }

    pub fn get(&self, key: CaseKey) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Variants from [`CaseKey::all`] that never fired.
    pub fn missing(&self) -> Vec<CaseKey> {
        CaseKey::all().into_iter().filter(|k| self.get(*k) == 0).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CaseKey, u64)> + '_ {
        self.counts.iter().map(|(&k, &n)| (k, n))
    }
}
