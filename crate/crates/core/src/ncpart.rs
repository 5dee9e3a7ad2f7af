//! Non-crossing partitions of a cyclically ordered ground set, their
//! Kreweras-type duals, and probability vectors over them.
//!
//! Index convention: the ground set of a partition is `0..k` in cyclic order,
//! and "edge" `j` of the underlying polygon sits between vertex `j` and vertex
//! `j + 1 (mod k)`. The dual of a partition lives on the edges, so with this
//! convention `dual(dual(p)) == p.rotate(-1)`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harris::FinitePoset;

/// Largest ground set accepted by [`enumerate_nc`]. Catalan(12) = 208012.
pub const MAX_ENUMERATION_K: usize = 12;
/// Largest ground set accepted by [`ProbabilityVector::dominates`].
pub const MAX_DOMINATION_K: usize = 6;
/// Tolerance for the sum-to-one check on probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A non-crossing partition of `{0, .., k-1}`, kept in canonical form: each
/// block sorted ascending, blocks sorted by their minimum.
///
/// The `Ord` impl sorts by `k`, then by decreasing number of blocks, then
/// lexicographically, so within one `k` it is a linear extension of the
/// refinement order (bottom first, top last).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NCPartition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl Ord for NCPartition {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.k, Reverse(self.blocks.len()), &self.blocks).cmp(&(
            other.k,
            Reverse(other.blocks.len()),
            &other.blocks,
        ))
    }
}

impl PartialOrd for NCPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Block label of every index, or an error if `blocks` is not a set partition
/// of `0..k`.
fn block_labels(k: usize, blocks: &[Vec<usize>]) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::invalid("partition ground set must be non-empty"));
    }
    let mut labels = vec![usize::MAX; k];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::invalid("partition contains an empty block"));
        }
        for &x in block {
            if x >= k {
                return Err(Error::invalid(format!("index {x} outside ground set of size {k}")));
            }
            if labels[x] != usize::MAX {
                return Err(Error::invalid(format!("index {x} appears in two blocks")));
            }
            labels[x] = b;
        }
    }
    if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(Error::invalid(format!("index {missing} is not covered")));
    }
    Ok(labels)
}

/// Two distinct blocks interlace iff, restricted to their union, the cyclic
/// sequence of labels changes more than twice.
fn labels_noncrossing(labels: &[usize]) -> bool {
    let nblocks = labels.iter().max().map_or(0, |m| m + 1);
    for x in 0..nblocks {
        for y in x + 1..nblocks {
            let seq: Vec<usize> = labels.iter().copied().filter(|&l| l == x || l == y).collect();
            let changes = (0..seq.len())
                .filter(|&i| seq[i] != seq[(i + 1) % seq.len()])
                .count();
            if changes > 2 {
                return false;
            }
        }
    }
    true
}

fn canonical_from_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = by_label.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// True iff `blocks` (a set partition of `0..k`) has no two interlacing blocks.
pub fn is_noncrossing(k: usize, blocks: &[Vec<usize>]) -> Result<bool> {
    let labels = block_labels(k, blocks)?;
    Ok(labels_noncrossing(&labels))
}

impl NCPartition {
    /// Validates and canonicalizes.
    pub fn new(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let labels = block_labels(k, &blocks)?;
        if !labels_noncrossing(&labels) {
            return Err(Error::invalid(format!("partition {blocks:?} is crossing")));
        }
        Ok(NCPartition { k, blocks: canonical_from_labels(&labels) })
    }

    /// Builds from a per-index block label (any label values).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("partition ground set must be non-empty"));
        }
        let blocks = canonical_from_labels(labels);
        if !labels_noncrossing(&relabel_dense(labels)) {
            return Err(Error::invalid(format!("partition {blocks:?} is crossing")));
        }
        Ok(NCPartition { k: labels.len(), blocks })
    }

    pub fn top(k: usize) -> Self {
        assert!(k > 0, "partition ground set must be non-empty");
        NCPartition { k, blocks: vec![(0..k).collect()] }
    }

    pub fn bottom(k: usize) -> Self {
        assert!(k > 0, "partition ground set must be non-empty");
        NCPartition { k, blocks: (0..k).map(|i| vec![i]).collect() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_top(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_bottom(&self) -> bool {
        self.blocks.len() == self.k
    }

    /// Block index (in canonical order) of every ground-set element.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.k];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[x] = b;
            }
        }
        labels
    }

    /// Union-find style pairs `(first, other)` whose union reproduces the blocks.
    pub fn merge_pairs(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .flat_map(|b| b[1..].iter().map(move |&x| (b[0], x)))
            .collect()
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.blocks.iter().any(|blk| blk.contains(&a) && blk.contains(&b))
    }

    /// True iff every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &NCPartition) -> Result<bool> {
        if self.k != other.k {
            return Err(Error::invalid(format!(
                "cannot compare partitions of sizes {} and {}",
                self.k, other.k
            )));
        }
        let theirs = other.labels();
        Ok(self.blocks.iter().all(|b| b.iter().all(|&x| theirs[x] == theirs[b[0]])))
    }

    /// Image under the index map `j -> j + shift (mod k)`.
    pub fn rotate(&self, shift: isize) -> NCPartition {
        let k = self.k as isize;
        let mut labels = vec![0; self.k];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[(x as isize + shift).rem_euclid(k) as usize] = b;
            }
        }
        NCPartition { k: self.k, blocks: canonical_from_labels(&labels) }
    }

    /// Image under the reflection `j -> -j (mod k)`.
    pub fn reflect(&self) -> NCPartition {
        let k = self.k;
        let mut labels = vec![0; k];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[(k - x) % k] = b;
            }
        }
        NCPartition { k, blocks: canonical_from_labels(&labels) }
    }

    /// Dual partition on the edges: edges `e` and `f` share a block iff no
    /// block of `self` has vertices on both arcs cut out by `e` and `f`.
    pub fn dual(&self) -> NCPartition {
        let k = self.k;
        let labels = self.labels();
        let mut totals = vec![0usize; self.blocks.len()];
        for &l in &labels {
            totals[l] += 1;
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in 0..k {
            // Vertices e+1 ..= f lie on one side of the chord (e, f).
            let mut inside = vec![0usize; self.blocks.len()];
            let mut split = 0usize;
            for f in e + 1..k {
                let l = labels[f];
                if inside[l] == 0 && totals[l] > 1 {
                    split += 1;
                }
                inside[l] += 1;
                if inside[l] == totals[l] && totals[l] > 1 {
                    split -= 1;
                }
                if split == 0 {
                    let (ra, rb) = (find(&mut parent, e), find(&mut parent, f));
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let roots: Vec<usize> = (0..k).map(|x| find(&mut parent, x)).collect();
        NCPartition { k, blocks: canonical_from_labels(&roots) }
    }

    /// Results of every joining operation: for each non-trivial block of the
    /// dual, merge all blocks adjacent to it. Deduplicated, sorted.
    pub fn joinings(&self) -> Vec<NCPartition> {
        let k = self.k;
        let labels = self.labels();
        let mut out = BTreeSet::new();
        for dual_block in self.dual().blocks.iter().filter(|b| b.len() >= 2) {
            let adjacent: BTreeSet<usize> = dual_block
                .iter()
                .flat_map(|&e| [labels[e], labels[(e + 1) % k]])
                .collect();
            let target = *adjacent.iter().next().expect("dual block is non-empty");
            let merged: Vec<usize> = labels
                .iter()
                .map(|l| if adjacent.contains(l) { target } else { *l })
                .collect();
            out.insert(NCPartition { k, blocks: canonical_from_labels(&merged) });
        }
        out.into_iter().collect()
    }

    /// Compact letter notation: non-trivial blocks joined by `|`, `∅` for the
    /// bottom partition. Uppercase for vertices, lowercase for edges.
    pub fn letters(&self, lowercase: bool) -> String {
        let nontrivial: Vec<String> = self
            .blocks
            .iter()
            .filter(|b| b.len() > 1)
            .map(|b| {
                let mut s: Vec<char> = b.iter().map(|&x| index_letter(x, lowercase)).collect();
                s.sort_unstable();
                s.into_iter().collect()
            })
            .collect();
        if nontrivial.is_empty() {
            "∅".to_string()
        } else {
            let mut nontrivial = nontrivial;
            nontrivial.sort();
            nontrivial.join("|")
        }
    }

    /// Letter notation of a dual (edge) partition of a triangle, naming each
    /// edge after the vertex it is opposite to: edge `j` (between vertices `j`
    /// and `j+1`) is opposite vertex `j+2`.
    pub fn triangle_edge_letters(&self) -> Option<String> {
        if self.k != 3 {
            return None;
        }
        // relabel edge j as the letter of vertex j+2
        Some(self.rotate(2).letters(true))
    }
}

fn index_letter(x: usize, lowercase: bool) -> char {
    let base = if lowercase { b'a' } else { b'A' };
    if x < 26 {
        (base + x as u8) as char
    } else {
        '?'
    }
}

fn relabel_dense(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

impl fmt::Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{{{}}}", parts.join("|"))
    }
}

/// All non-crossing partitions of `0..k`, in canonical order. The count is the
/// Catalan number `C_k`.
pub fn enumerate_nc(k: usize) -> Result<Vec<NCPartition>> {
    if k == 0 || k > MAX_ENUMERATION_K {
        return Err(Error::capacity(format!(
            "enumerate_nc supports 1 <= k <= {MAX_ENUMERATION_K}, got {k}"
        )));
    }
    // table[n] = non-crossing partitions of 0..n as raw block lists.
    // Decomposition: the block of 0 has largest element j; {1..j} is an
    // arbitrary non-crossing partition with 0 joined to j's block, and
    // {j+1..n} is independent.
    let mut table: Vec<Vec<Vec<Vec<usize>>>> = vec![vec![vec![]]];
    for n in 1..=k {
        let mut all = Vec::new();
        for j in 0..n {
            let tail = n - 1 - j;
            for inner in &table[j] {
                // inner partitions 0..j, shifted to 1..=j
                let mut head: Vec<Vec<usize>> = inner
                    .iter()
                    .map(|b| b.iter().map(|x| x + 1).collect())
                    .collect();
                if j == 0 {
                    head.push(vec![0]);
                } else {
                    let blk = head
                        .iter_mut()
                        .find(|b| b.contains(&j))
                        .expect("j is covered");
                    blk.push(0);
                }
                for rest in &table[tail] {
                    let mut blocks = head.clone();
                    blocks.extend(rest.iter().map(|b| b.iter().map(|x| x + j + 1).collect()));
                    all.push(blocks);
                }
            }
        }
        table.push(all);
    }
    let mut out: Vec<NCPartition> = table
        .pop()
        .expect("table has k+1 rows")
        .into_iter()
        .map(|mut blocks| {
            for b in &mut blocks {
                b.sort_unstable();
            }
            blocks.sort_by_key(|b| b[0]);
            NCPartition { k, blocks }
        })
        .collect();
    out.sort();
    Ok(out)
}

/// A probability distribution over the non-crossing partitions of a `k`-set.
/// Partitions absent from the map have probability zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct ProbabilityVector {
    k: usize,
    entries: BTreeMap<NCPartition, f64>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    blocks: Vec<Vec<usize>>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    k: usize,
    entries: Vec<RawEntry>,
}

impl TryFrom<RawVector> for ProbabilityVector {
    type Error = Error;

    fn try_from(raw: RawVector) -> Result<Self> {
        let entries = raw
            .entries
            .into_iter()
            .map(|e| NCPartition::new(raw.k, e.blocks).map(|pi| (pi, e.p)))
            .collect::<Result<Vec<_>>>()?;
        ProbabilityVector::new(raw.k, entries)
    }
}

impl From<ProbabilityVector> for RawVector {
    fn from(v: ProbabilityVector) -> Self {
        RawVector {
            k: v.k,
            entries: v
                .entries
                .into_iter()
                .map(|(pi, p)| RawEntry { blocks: pi.blocks, p })
                .collect(),
        }
    }
}

/// Reads either one vector or a JSON array of vectors indexed by orbit slot.
pub fn vectors_from_json(text: &str) -> Result<Vec<ProbabilityVector>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    Ok(match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<std::result::Result<_, _>>()?,
        single => vec![serde_json::from_value(single)?],
    })
}

impl ProbabilityVector {
    pub fn new(k: usize, entries: impl IntoIterator<Item = (NCPartition, f64)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("probability vector needs k >= 1"));
        }
        let mut map = BTreeMap::new();
        for (pi, p) in entries {
            if pi.k != k {
                return Err(Error::invalid(format!(
                    "entry {pi} has size {} but vector has k = {k}",
                    pi.k
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} of {pi} outside [0, 1]")));
            }
            if map.insert(pi.clone(), p).is_some() {
                return Err(Error::invalid(format!("duplicate entry for {pi}")));
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("entries sum to {total}, expected 1")));
        }
        Ok(ProbabilityVector { k, entries: map })
    }

    pub fn point_mass(pi: NCPartition) -> Self {
        ProbabilityVector { k: pi.k, entries: BTreeMap::from([(pi, 1.0)]) }
    }

    /// Uniform over all of NC(k).
    pub fn uniform(k: usize) -> Result<Self> {
        let all = enumerate_nc(k)?;
        let p = 1.0 / all.len() as f64;
        let entries = all.into_iter().map(|pi| (pi, p)).collect();
        Ok(ProbabilityVector { k, entries })
    }

    /// Three-vertex vector with vertices `A = 0`, `B = 1`, `C = 2`.
    pub fn three_uniform(empty: f64, ab: f64, ac: f64, bc: f64, abc: f64) -> Result<Self> {
        let pi = |blocks: Vec<Vec<usize>>| NCPartition::new(3, blocks).expect("valid 3-partition");
        ProbabilityVector::new(
            3,
            [
                (NCPartition::bottom(3), empty),
                (pi(vec![vec![0, 1], vec![2]]), ab),
                (pi(vec![vec![0, 2], vec![1]]), ac),
                (pi(vec![vec![0], vec![1, 2]]), bc),
                (NCPartition::top(3), abc),
            ],
        )
    }

    /// Triangle "competition" model: no bond with probability `(1-p)^3`, all
    /// three with `p^3`, and each single bond with `p(1-p)`.
    pub fn competition(p: f64) -> Result<Self> {
        let q = 1.0 - p;
        let single = p * q;
        ProbabilityVector::three_uniform(q * q * q, single, single, single, p * p * p)
    }

    /// Two-vertex bond: connected with probability `p`.
    pub fn bond(p: f64) -> Result<Self> {
        ProbabilityVector::new(2, [(NCPartition::bottom(2), 1.0 - p), (NCPartition::top(2), p)])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prob(&self, pi: &NCPartition) -> f64 {
        self.entries.get(pi).copied().unwrap_or(0.0)
    }

    /// Entries in canonical (linear-extension) order.
    pub fn iter(&self) -> impl Iterator<Item = (&NCPartition, f64)> {
        self.entries.iter().map(|(pi, &p)| (pi, p))
    }

    pub fn dual_vector(&self) -> ProbabilityVector {
        ProbabilityVector {
            k: self.k,
            entries: self.entries.iter().map(|(pi, &p)| (pi.dual(), p)).collect(),
        }
    }

    /// Relabels every entry by `j -> j + shift (mod k)`.
    pub fn rotate(&self, shift: isize) -> ProbabilityVector {
        ProbabilityVector {
            k: self.k,
            entries: self.entries.iter().map(|(pi, &p)| (pi.rotate(shift), p)).collect(),
        }
    }

    /// Total mass of an up-closed set of partitions.
    pub fn upset_prob(&self, upset: &[NCPartition]) -> Result<f64> {
        let members: BTreeSet<&NCPartition> = upset.iter().collect();
        if let Some(bad) = upset.iter().find(|pi| pi.k != self.k) {
            return Err(Error::invalid(format!("upset member {bad} has wrong size")));
        }
        let all = enumerate_nc(self.k)?;
        for pi in upset {
            for sigma in &all {
                if pi.refines(sigma)? && !members.contains(sigma) {
                    return Err(Error::invalid(format!(
                        "set is not up-closed: contains {pi} but not {sigma}"
                    )));
                }
            }
        }
        Ok(members.iter().map(|pi| self.prob(pi)).sum())
    }

    /// Whether `self` dominates `other`: at least as much mass on every upset
    /// of NC(k) (strictly more on every non-trivial upset when `strict`).
    ///
    /// Decided by a maximum-weight-closure computation on the NC(k) poset
    /// rather than by listing upsets.
    pub fn dominates(&self, other: &ProbabilityVector, strict: bool) -> Result<bool> {
        if self.k != other.k {
            return Err(Error::invalid("domination needs vectors of equal k"));
        }
        if self.k > MAX_DOMINATION_K {
            return Err(Error::capacity(format!(
                "domination supports k <= {MAX_DOMINATION_K}, got {}",
                self.k
            )));
        }
        let (poset, parts) = FinitePoset::noncrossing(self.k)?;
        let weights: Vec<f64> = parts.iter().map(|pi| other.prob(pi) - self.prob(pi)).collect();
        let top = parts.len() - 1;
        if strict {
            if parts.len() == 1 {
                return Ok(true);
            }
            // Non-trivial upsets are exactly those holding top but not bottom.
            let (worst, _) = poset
                .max_weight_upset(&weights, &[top], &[0])
                .expect("top is not below bottom");
            Ok(worst < -SUM_TOLERANCE)
        } else {
            let (worst, _) = poset.max_weight_upset(&weights, &[], &[]).expect("unconstrained");
            Ok(worst <= SUM_TOLERANCE)
        }
    }

    /// Positive mass on both the top and the bottom partition.
    pub fn is_nondegenerate(&self) -> bool {
        self.prob(&NCPartition::top(self.k)) > 0.0 && self.prob(&NCPartition::bottom(self.k)) > 0.0
    }

    /// Non-degenerate, and the support is closed under joinings.
    pub fn is_malleable(&self) -> bool {
        self.is_nondegenerate()
            && self
                .entries
                .iter()
                .filter(|(_, &p)| p > 0.0)
                .all(|(pi, _)| pi.joinings().iter().all(|j| self.prob(j) > 0.0))
    }

    /// Largest absolute entry difference after matching partitions.
    pub fn max_abs_diff(&self, other: &ProbabilityVector) -> f64 {
        let keys: BTreeSet<&NCPartition> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .map(|pi| (self.prob(pi) - other.prob(pi)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3(blocks: Vec<Vec<usize>>) -> NCPartition {
        NCPartition::new(3, blocks).unwrap()
    }

    #[test]
    fn noncrossing_examples() {
        assert!(is_noncrossing(3, &[vec![0, 2], vec![1]]).unwrap());
        assert!(!is_noncrossing(4, &[vec![0, 2], vec![1, 3]]).unwrap());
        assert!(is_noncrossing(4, &[vec![0, 1, 2, 3]]).unwrap());
    }

    #[test]
    fn malformed_partitions_rejected() {
        assert!(matches!(is_noncrossing(3, &[vec![0, 1]]), Err(Error::InvalidInput(_))));
        assert!(matches!(
            is_noncrossing(3, &[vec![0, 1], vec![1, 2]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(is_noncrossing(2, &[vec![0, 5]]), Err(Error::InvalidInput(_))));
        assert!(NCPartition::new(4, vec![vec![0, 2], vec![1, 3]]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=6).map(|k| enumerate_nc(k).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 14, 42, 132]);
        assert!(matches!(enumerate_nc(0), Err(Error::Capacity(_))));
        assert!(matches!(enumerate_nc(13), Err(Error::Capacity(_))));
    }

    #[test]
    fn enumeration_is_sorted_linear_extension() {
        let all = enumerate_nc(4).unwrap();
        assert!(all[0].is_bottom());
        assert!(all.last().unwrap().is_top());
        for (i, a) in all.iter().enumerate() {
            for b in &all[..i] {
                assert!(!(a.refines(b).unwrap() && a != b), "{a} listed after {b} but below it");
            }
        }
    }

    #[test]
    fn top_and_bottom() {
        assert_eq!(NCPartition::top(1), NCPartition::bottom(1));
        assert_eq!(NCPartition::top(3).blocks(), &[vec![0, 1, 2]]);
        assert_eq!(NCPartition::bottom(4).num_blocks(), 4);
    }

    #[test]
    fn triangle_dual_table() {
        let rows: Vec<(String, String)> = enumerate_nc(3)
            .unwrap()
            .into_iter()
            .map(|pi| (pi.letters(false), pi.dual().triangle_edge_letters().unwrap()))
            .collect();
        let lookup = |v: &str| rows.iter().find(|(a, _)| a == v).unwrap().1.clone();
        assert_eq!(lookup("∅"), "abc");
        assert_eq!(lookup("AB"), "ab");
        assert_eq!(lookup("AC"), "ac");
        assert_eq!(lookup("BC"), "bc");
        assert_eq!(lookup("ABC"), "∅");
    }

    #[test]
    fn dual_of_pair_in_index_space() {
        let ab = p3(vec![vec![0, 1], vec![2]]);
        assert_eq!(ab.dual(), p3(vec![vec![0], vec![1, 2]]));
    }

    #[test]
    fn refines_examples() {
        let ab = p3(vec![vec![0, 1], vec![2]]);
        let bc = p3(vec![vec![0], vec![1, 2]]);
        assert!(NCPartition::bottom(3).refines(&ab).unwrap());
        assert!(ab.refines(&NCPartition::top(3)).unwrap());
        assert!(!ab.refines(&bc).unwrap());
        assert!(ab.refines(&NCPartition::top(4)).is_err());
    }

    #[test]
    fn joining_examples() {
        assert_eq!(NCPartition::bottom(3).joinings(), vec![NCPartition::top(3)]);
        assert!(NCPartition::top(3).joinings().is_empty());
        assert_eq!(NCPartition::bottom(4).joinings(), vec![NCPartition::top(4)]);
        // {0,1}{2}{3}: dual is {0}{1,2,3}; its only non-trivial block touches all
        let pi = NCPartition::new(4, vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        assert_eq!(pi.joinings(), vec![NCPartition::top(4)]);
    }

    #[test]
    fn joining_of_two_pairs() {
        // {0,1}{2,3}: dual {0}{1,3}{2}; edges 1 and 3 touch both blocks
        let pi = NCPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(pi.dual(), NCPartition::new(4, vec![vec![0], vec![1, 3], vec![2]]).unwrap());
        assert_eq!(pi.joinings(), vec![NCPartition::top(4)]);
        // {0}{1}{2,3}{4}{5}: dual has the block of edges {3,4,5,0,1} plus {2}
        let pi = NCPartition::new(6, vec![vec![0], vec![1], vec![2, 3], vec![4], vec![5]]).unwrap();
        assert_eq!(pi.joinings(), vec![NCPartition::top(6)]);
    }

    #[test]
    fn dual_vector_examples() {
        let v = ProbabilityVector::competition(0.3).unwrap();
        let expected = ProbabilityVector::competition(0.7).unwrap();
        assert!(v.dual_vector().max_abs_diff(&expected) < 1e-15);

        let top = ProbabilityVector::point_mass(NCPartition::top(3));
        assert_eq!(top.dual_vector(), ProbabilityVector::point_mass(NCPartition::bottom(3)));

        let u = ProbabilityVector::uniform(4).unwrap();
        assert!(u.dual_vector().max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn upset_prob_examples() {
        let v = ProbabilityVector::competition(0.5).unwrap();
        let all = enumerate_nc(3).unwrap();
        assert!((v.upset_prob(&[NCPartition::top(3)]).unwrap() - 0.125).abs() < 1e-15);
        assert!((v.upset_prob(&all).unwrap() - 1.0).abs() < 1e-15);
        let no_bottom: Vec<NCPartition> = all[1..].to_vec();
        assert!((v.upset_prob(&no_bottom).unwrap() - 0.875).abs() < 1e-15);
        assert!(matches!(
            v.upset_prob(&[NCPartition::bottom(3)]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn domination_examples() {
        let top = ProbabilityVector::point_mass(NCPartition::top(3));
        let v5 = ProbabilityVector::competition(0.5).unwrap();
        let v6 = ProbabilityVector::competition(0.6).unwrap();
        assert!(top.dominates(&v5, false).unwrap());
        assert!(v6.dominates(&v5, true).unwrap());
        assert!(!v5.dominates(&v6, false).unwrap());
        assert!(v5.dominates(&v5, false).unwrap());
        assert!(!v5.dominates(&v5, true).unwrap());
        let big = ProbabilityVector::uniform(7).unwrap();
        assert!(matches!(big.dominates(&big, false), Err(Error::Capacity(_))));
    }

    #[test]
    fn degeneracy_and_malleability() {
        for p in [0.1, 0.5, 0.9] {
            let v = ProbabilityVector::competition(p).unwrap();
            assert!(v.is_nondegenerate() && v.is_malleable());
        }
        for k in 1..=6 {
            let v = ProbabilityVector::new(k, [(NCPartition::top(k), 0.4), (NCPartition::bottom(k), 0.6)]);
            let v = if k == 1 {
                ProbabilityVector::point_mass(NCPartition::top(1))
            } else {
                v.unwrap()
            };
            assert!(v.is_malleable(), "k = {k}");
        }
        let no_bottom = ProbabilityVector::three_uniform(0.0, 0.25, 0.25, 0.25, 0.25).unwrap();
        assert!(!no_bottom.is_nondegenerate());
        // bottom and a pair only: joining the bottom gives the top, which has no mass
        let v = ProbabilityVector::new(
            4,
            [
                (NCPartition::bottom(4), 0.5),
                (NCPartition::new(4, vec![vec![0, 1], vec![2], vec![3]]).unwrap(), 0.25),
                (NCPartition::top(4), 0.25),
            ],
        )
        .unwrap();
        assert!(v.is_malleable());
        let v = ProbabilityVector::new(
            4,
            [
                (NCPartition::bottom(4), 0.5),
                (NCPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap(), 0.25),
                (NCPartition::new(4, vec![vec![0, 1, 2], vec![3]]).unwrap(), 0.25),
            ],
        );
        assert!(!v.unwrap().is_malleable());
    }

    #[test]
    fn vector_validation() {
        assert!(ProbabilityVector::three_uniform(0.5, 0.1, 0.1, 0.1, 0.1).is_err());
        assert!(ProbabilityVector::three_uniform(-0.1, 0.3, 0.3, 0.3, 0.2).is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"k": 3, "entries": [{"blocks": [[0,1],[2]], "p": 0.25}, {"blocks": [[0],[1],[2]], "p": 0.75}]}"#;
        let v: ProbabilityVector = serde_json::from_str(text).unwrap();
        assert_eq!(v.prob(&p3(vec![vec![2], vec![0, 1]])), 0.25);
        assert_eq!(v.prob(&NCPartition::top(3)), 0.0);
        let back: ProbabilityVector = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        let bad = r#"{"k": 3, "entries": [{"blocks": [[0,1],[2]], "p": 0.5}]}"#;
        assert!(serde_json::from_str::<ProbabilityVector>(bad).is_err());
    }
}
