//! Finite posets, product measures on their powers, and numerical checks of
//! the Harris-type correlation bound `Pr(A ∩ B) >= (Pr(A) Pr(B))^C` with
//! `C = ceil(2 / p0)`, together with the δ-chains built from it.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ncpart::{enumerate_nc, NCPartition, SUM_TOLERANCE};

/// Largest poset accepted by [`FinitePoset::enumerate_upsets`].
pub const MAX_UPSET_ENUMERATION: usize = 16;
/// Largest product space `|P|^n` iterated exhaustively.
pub const MAX_PRODUCT_TUPLES: usize = 10_000_000;

/// A partial order on `0..n`, stored as a dense `le` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    n: usize,
    le: Vec<bool>,
    greatest: Option<usize>,
    least: Option<usize>,
}

impl FinitePoset {
    /// `le[a][b]` means `a <= b`. Checked to be a partial order.
    pub fn new(le: Vec<Vec<bool>>) -> Result<Self> {
        let n = le.len();
        if n == 0 {
            return Err(Error::invalid("poset must have at least one element"));
        }
        if le.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("order matrix must be square"));
        }
        let flat: Vec<bool> = le.into_iter().flatten().collect();
        let at = |a: usize, b: usize| flat[a * n + b];
        for a in 0..n {
            if !at(a, a) {
                return Err(Error::invalid(format!("relation is not reflexive at {a}")));
            }
            for b in 0..n {
                if a != b && at(a, b) && at(b, a) {
                    return Err(Error::invalid(format!("relation is not antisymmetric at ({a}, {b})")));
                }
                for c in 0..n {
                    if at(a, b) && at(b, c) && !at(a, c) {
                        return Err(Error::invalid(format!(
                            "relation is not transitive at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self::from_flat(n, flat))
    }

    fn from_flat(n: usize, le: Vec<bool>) -> Self {
        let greatest = (0..n).find(|&g| (0..n).all(|x| le[x * n + g]));
        let least = (0..n).find(|&l| (0..n).all(|x| le[l * n + x]));
        FinitePoset { n, le, greatest, least }
    }

    /// Reflexive-transitive closure of the given `a <= b` pairs.
    pub fn from_relations(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("poset must have at least one element"));
        }
        let mut le = vec![false; n * n];
        for i in 0..n {
            le[i * n + i] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("relation ({a}, {b}) out of range")));
            }
            le[a * n + b] = true;
        }
        for m in 0..n {
            for a in 0..n {
                if le[a * n + m] {
                    for b in 0..n {
                        if le[m * n + b] {
                            le[a * n + b] = true;
                        }
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && le[a * n + b] && le[b * n + a] {
                    return Err(Error::invalid(format!("relations contain a cycle through {a}, {b}")));
                }
            }
        }
        Ok(Self::from_flat(n, le))
    }

    /// The refinement order on NC(k), elements in canonical order.
    pub fn noncrossing(k: usize) -> Result<(FinitePoset, Vec<NCPartition>)> {
        let parts = enumerate_nc(k)?;
        let n = parts.len();
        let mut le = vec![false; n * n];
        for (a, pa) in parts.iter().enumerate() {
            for (b, pb) in parts.iter().enumerate().skip(a) {
                le[a * n + b] = pa.refines(pb)?;
            }
        }
        Ok((Self::from_flat(n, le), parts))
    }

    /// Element 0 greatest, elements `1..=m` pairwise incomparable below it.
    pub fn fan(m: usize) -> FinitePoset {
        let pairs: Vec<(usize, usize)> = (1..=m).map(|i| (i, 0)).collect();
        Self::from_relations(m + 1, &pairs).expect("fan is a valid poset")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a * self.n + b]
    }

    pub fn greatest(&self) -> Option<usize> {
        self.greatest
    }

    pub fn least(&self) -> Option<usize> {
        self.least
    }

    /// Same elements, order reversed. Downsets of `self` are upsets of this.
    pub fn reversed(&self) -> FinitePoset {
        let n = self.n;
        let mut le = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                le[a * n + b] = self.le(b, a);
            }
        }
        Self::from_flat(n, le)
    }

    pub fn is_upset(&self, members: &[bool]) -> bool {
        members.len() == self.n
            && (0..self.n).all(|a| !members[a] || (0..self.n).all(|b| !self.le(a, b) || members[b]))
    }

    /// Smallest upset containing `seeds`.
    pub fn up_closure(&self, seeds: &[usize]) -> Vec<bool> {
        let mut members = vec![false; self.n];
        for &s in seeds {
            for b in 0..self.n {
                if self.le(s, b) {
                    members[b] = true;
                }
            }
        }
        members
    }

    /// Every upset, from ∅ to the whole poset, each as a membership vector.
    ///
    /// Elements are decided from the top down: an element may join only if
    /// everything strictly above it already has.
    pub fn enumerate_upsets(&self) -> Result<Vec<Vec<bool>>> {
        if self.n > MAX_UPSET_ENUMERATION {
            return Err(Error::capacity(format!(
                "upset enumeration supports at most {MAX_UPSET_ENUMERATION} elements, got {}",
                self.n
            )));
        }
        // order: elements with more elements above them come later
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&a| (0..self.n).filter(|&b| self.le(a, b)).count());
        let mut out = Vec::new();
        let mut members = vec![false; self.n];
        self.upsets_from(&order, 0, &mut members, &mut out);
        Ok(out)
    }

    fn upsets_from(&self, order: &[usize], idx: usize, members: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if idx == order.len() {
            out.push(members.clone());
            return;
        }
        let a = order[idx];
        self.upsets_from(order, idx + 1, members, out);
        if (0..self.n).all(|b| b == a || !self.le(a, b) || members[b]) {
            members[a] = true;
            self.upsets_from(order, idx + 1, members, out);
            members[a] = false;
        }
    }

    /// Maximum of `Σ weights` over upsets containing every `must_in` element
    /// and no `must_out` element, with a maximizing upset. `None` if the
    /// constraints are contradictory.
    ///
    /// Maximum-weight closure: a min cut on the network with source edges of
    /// capacity `w > 0`, sink edges of capacity `-w` for `w < 0`, and infinite
    /// edges `a -> b` for `a <= b`.
    pub fn max_weight_upset(
        &self,
        weights: &[f64],
        must_in: &[usize],
        must_out: &[usize],
    ) -> Option<(f64, Vec<bool>)> {
        let n = self.n;
        assert_eq!(weights.len(), n, "one weight per element");
        let forced_in = self.up_closure(must_in);
        let mut forced_out = vec![false; n];
        for &o in must_out {
            for a in 0..n {
                if self.le(a, o) {
                    forced_out[a] = true;
                }
            }
        }
        if (0..n).any(|a| forced_in[a] && forced_out[a]) {
            return None;
        }
        let free: Vec<usize> = (0..n).filter(|&a| !forced_in[a] && !forced_out[a]).collect();
        let base: f64 = (0..n).filter(|&a| forced_in[a]).map(|a| weights[a]).sum();
        // Free elements form a convex piece; closure constraints among them only.
        let source = free.len();
        let sink = free.len() + 1;
        let mut net = FlowNetwork::new(free.len() + 2);
        let mut positive = 0.0;
        for (i, &a) in free.iter().enumerate() {
            let w = weights[a];
            if w > 0.0 {
                net.add_edge(source, i, w);
                positive += w;
            } else if w < 0.0 {
                net.add_edge(i, sink, -w);
            }
            for (j, &b) in free.iter().enumerate() {
                if i != j && self.le(a, b) {
                    net.add_edge(i, j, f64::INFINITY);
                }
            }
        }
        let cut = net.max_flow(source, sink);
        let reach = net.residual_reachable(source);
        let mut members = forced_in;
        for (i, &a) in free.iter().enumerate() {
            if reach[i] {
                members[a] = true;
            }
        }
        Some((base + positive - cut, members))
    }
}

struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

const FLOW_EPS: f64 = 1e-15;

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    /// Edmonds-Karp.
    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e] > FLOW_EPS {
                        seen[v] = true;
                        via[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.cap[e] > FLOW_EPS {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// A probability measure on the elements of a finite poset.
#[derive(Clone, Debug)]
pub struct PosetMeasure {
    poset: FinitePoset,
    probs: Vec<f64>,
}

impl PosetMeasure {
    pub fn new(poset: FinitePoset, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != poset.len() {
            return Err(Error::invalid("one probability per poset element is required"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid("probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(PosetMeasure { poset, probs })
    }

    pub fn uniform(poset: FinitePoset) -> Self {
        let n = poset.len();
        PosetMeasure { poset, probs: vec![1.0 / n as f64; n] }
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn reversed(&self) -> PosetMeasure {
        PosetMeasure { poset: self.poset.reversed(), probs: self.probs.clone() }
    }

    /// Probability of the greatest element, if the poset has one.
    pub fn greatest_mass(&self) -> Option<f64> {
        self.poset.greatest().map(|g| self.probs[g])
    }

    pub fn least_mass(&self) -> Option<f64> {
        self.poset.least().map(|l| self.probs[l])
    }
}

type TuplePredicate = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// An upset of the product order on `P^n`: either an explicit membership
/// table indexed by mixed-radix tuple code, or a predicate.
#[derive(Clone)]
pub enum ProductUpset {
    Explicit { n: usize, members: Vec<bool> },
    Predicate { n: usize, pred: TuplePredicate },
}

impl std::fmt::Debug for ProductUpset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProductUpset::Explicit { n, members } => f
                .debug_struct("Explicit")
                .field("n", n)
                .field("size", &members.iter().filter(|&&m| m).count())
                .finish(),
            ProductUpset::Predicate { n, .. } => f.debug_struct("Predicate").field("n", n).finish(),
        }
    }
}

fn tuple_count(size: usize, n: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(size)
            .filter(|&t| t <= MAX_PRODUCT_TUPLES)
            .ok_or_else(|| Error::capacity(format!("|P|^n exceeds {MAX_PRODUCT_TUPLES} tuples")))?;
    }
    Ok(total)
}

fn decode(code: usize, size: usize, tuple: &mut [usize]) {
    let mut c = code;
    for slot in tuple.iter_mut() {
        *slot = c % size;
        c /= size;
    }
}

impl ProductUpset {
    pub fn power(&self) -> usize {
        match self {
            ProductUpset::Explicit { n, .. } | ProductUpset::Predicate { n, .. } => *n,
        }
    }

    /// Explicit membership table; checked to be up-closed.
    pub fn explicit(poset: &FinitePoset, n: usize, members: Vec<bool>) -> Result<Self> {
        let total = tuple_count(poset.len(), n)?;
        if members.len() != total {
            return Err(Error::invalid(format!("expected {total} membership flags, got {}", members.len())));
        }
        // Up-closure only needs checking along single-coordinate covers.
        let size = poset.len();
        let mut tuple = vec![0; n];
        for code in 0..total {
            if !members[code] {
                continue;
            }
            decode(code, size, &mut tuple);
            let mut stride = 1;
            for &x in tuple.iter() {
                for y in 0..size {
                    if y != x && poset.le(x, y) {
                        let other = code - x * stride + y * stride;
                        if !members[other] {
                            return Err(Error::invalid("membership table is not up-closed"));
                        }
                    }
                }
                stride *= size;
            }
        }
        Ok(ProductUpset::Explicit { n, members })
    }

    pub fn predicate(n: usize, pred: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        ProductUpset::Predicate { n, pred: Arc::new(pred) }
    }

    /// `U_1 × ... × U_n` for single-factor upsets `U_i`.
    pub fn product(poset: &FinitePoset, factors: &[Vec<bool>]) -> Result<Self> {
        if factors.iter().any(|f| !poset.is_upset(f)) {
            return Err(Error::invalid("every factor must be an upset"));
        }
        let n = factors.len();
        let size = poset.len();
        let total = tuple_count(size, n)?;
        let mut tuple = vec![0; n];
        let members = (0..total)
            .map(|code| {
                decode(code, size, &mut tuple);
                tuple.iter().zip(factors).all(|(&x, f)| f[x])
            })
            .collect();
        Ok(ProductUpset::Explicit { n, members })
    }

    /// Up-closure of a set of generating tuples.
    pub fn generated(poset: &FinitePoset, n: usize, generators: &[Vec<usize>]) -> Result<Self> {
        let size = poset.len();
        let total = tuple_count(size, n)?;
        let mut tuple = vec![0; n];
        let members = (0..total)
            .map(|code| {
                decode(code, size, &mut tuple);
                generators
                    .iter()
                    .any(|g| g.iter().zip(&tuple).all(|(&gi, &ti)| poset.le(gi, ti)))
            })
            .collect();
        Ok(ProductUpset::Explicit { n, members })
    }

    pub fn full(poset: &FinitePoset, n: usize) -> Result<Self> {
        Ok(ProductUpset::Explicit { n, members: vec![true; tuple_count(poset.len(), n)?] })
    }

    fn contains(&self, code: usize, tuple: &[usize]) -> bool {
        match self {
            ProductUpset::Explicit { members, .. } => members[code],
            ProductUpset::Predicate { pred, .. } => pred(tuple),
        }
    }
}

/// `Pr(A_1 ∩ ... ∩ A_m)` under the n-fold product measure, by exhaustive
/// tuple iteration.
pub fn product_prob_all(measure: &PosetMeasure, n: usize, sets: &[&ProductUpset]) -> Result<f64> {
    if let Some(bad) = sets.iter().find(|s| s.power() != n) {
        return Err(Error::invalid(format!("upset has power {} but n = {n}", bad.power())));
    }
    let size = measure.poset.len();
    let total = tuple_count(size, n)?;
    let mut tuple = vec![0; n];
    let mut sum = 0.0;
    for code in 0..total {
        decode(code, size, &mut tuple);
        if sets.iter().all(|s| s.contains(code, &tuple)) {
            sum += tuple.iter().map(|&x| measure.probs[x]).product::<f64>();
        }
    }
    Ok(sum)
}

pub fn product_prob(measure: &PosetMeasure, n: usize, set: &ProductUpset) -> Result<f64> {
    product_prob_all(measure, n, &[set])
}

/// `ceil(2 / p0)`, guarded against `2 / p0` landing a hair above an integer.
pub fn harris_exponent(p0: f64) -> u32 {
    (2.0 / p0 - 1e-9).ceil().max(1.0) as u32
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarrisReport {
    pub pr_a: f64,
    pub pr_b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub exponent: u32,
    pub holds: bool,
}

fn greatest_mass_checked(measure: &PosetMeasure) -> Result<f64> {
    let p0 = measure
        .greatest_mass()
        .ok_or_else(|| Error::invalid("poset has no greatest element"))?;
    if p0 <= 0.0 {
        return Err(Error::invalid("greatest element has probability zero"));
    }
    Ok(p0)
}

/// Evaluates `Pr(A ∩ B) >= (Pr(A) Pr(B))^C` with `C = ceil(2 / p0)`.
pub fn harris_check(measure: &PosetMeasure, n: usize, a: &ProductUpset, b: &ProductUpset) -> Result<HarrisReport> {
    let p0 = greatest_mass_checked(measure)?;
    harris_check_with_exponent(measure, n, a, b, harris_exponent(p0))
}

/// As [`harris_check`] with a caller-chosen exponent (e.g. `1` for the
/// classical Harris bound).
pub fn harris_check_with_exponent(
    measure: &PosetMeasure,
    n: usize,
    a: &ProductUpset,
    b: &ProductUpset,
    exponent: u32,
) -> Result<HarrisReport> {
    greatest_mass_checked(measure)?;
    let pr_a = product_prob(measure, n, a)?;
    let pr_b = product_prob(measure, n, b)?;
    let lhs = product_prob_all(measure, n, &[a, b])?;
    let rhs = (pr_a * pr_b).powi(exponent as i32);
    Ok(HarrisReport { pr_a, pr_b, lhs, rhs, exponent, holds: lhs >= rhs - 1e-12 })
}

/// The correlation function `F(a, b) = (ab)^C` used by the δ-chains.
pub fn correlation_bound(a: f64, b: f64, exponent: u32) -> f64 {
    (a * b).powi(exponent as i32)
}

fn check_unit_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// δ such that `k` upsets whose union has probability `>= 1 - δ` include one
/// of probability `>= 1 - eps`. Uses the least element's mass for `C`.
pub fn csr_delta(measure: &PosetMeasure, k: usize, eps: f64) -> Result<f64> {
    let p0 = measure
        .least_mass()
        .ok_or_else(|| Error::invalid("poset has no least element"))?;
    if p0 <= 0.0 {
        return Err(Error::invalid("least element has probability zero"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    check_unit_open("eps", eps)?;
    let c = harris_exponent(p0);
    let mut delta = eps;
    for _ in 2..=k {
        delta = correlation_bound(delta, eps, c);
    }
    Ok(delta / 2.0)
}

/// δ such that, when every upset has probability `<= 1 - eps` and their
/// union `>= 1 - δ`, at least `count` of them hold with probability `>= 1 - eps`.
pub fn manyhold_delta(p0: f64, count: usize, eps: f64) -> Result<f64> {
    check_unit_open("p0", p0)?;
    check_unit_open("eps", eps)?;
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let c = harris_exponent(p0);
    let step = eps / count as f64;
    let eps_prime = correlation_bound(step, eps, c);
    let mut delta = step;
    for _ in 2..=count {
        delta = correlation_bound(eps_prime, delta, c);
    }
    Ok(delta)
}

fn random_upset(poset: &FinitePoset, n: usize, rng: &mut ChaCha8Rng) -> Result<ProductUpset> {
    let gens: Vec<Vec<usize>> = (0..rng.random_range(1..=3))
        .map(|_| (0..n).map(|_| rng.random_range(0..poset.len())).collect())
        .collect();
    ProductUpset::generated(poset, n, &gens)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarrisStressReport {
    pub pairs: usize,
    pub exponent: u32,
    pub failures: usize,
    pub min_margin: f64,
}

/// Harris checks on `trials` random pairs of generated upsets in `P^n`.
pub fn harris_stress(measure: &PosetMeasure, n: usize, trials: usize, seed: u64) -> Result<HarrisStressReport> {
    let c = harris_exponent(greatest_mass_checked(measure)?);
    let poset = measure.poset();
    let margins = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let a = random_upset(poset, n, &mut rng)?;
            let b = random_upset(poset, n, &mut rng)?;
            let r = harris_check_with_exponent(measure, n, &a, &b, c)?;
            Ok(r.lhs - r.rhs)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HarrisStressReport {
        pairs: trials,
        exponent: c,
        failures: margins.iter().filter(|&&m| m < -1e-12).count(),
        min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressReport {
    pub families: usize,
    pub premise_met: usize,
    pub violations: usize,
    pub delta: f64,
}

/// Randomized check of the square-root trick: whenever `k` random upsets in
/// `P^n` have union probability `>= 1 - δ`, one of them has `>= 1 - eps`.
pub fn sqrt_trick_stress(
    measure: &PosetMeasure,
    n: usize,
    k: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<StressReport> {
    let delta = csr_delta(measure, k, eps)?;
    let poset = measure.poset();
    let size = poset.len();
    let total = tuple_count(size, n)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let family = (0..k)
                .map(|_| random_upset(poset, n, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let union: Vec<bool> = (0..total)
                .map(|code| family.iter().any(|u| matches!(u, ProductUpset::Explicit { members, .. } if members[code])))
                .collect();
            let union = ProductUpset::Explicit { n, members: union };
            let pu = product_prob(measure, n, &union)?;
            if pu < 1.0 - delta {
                return Ok((false, false));
            }
            let best = family
                .iter()
                .map(|u| product_prob(measure, n, u))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((true, best < 1.0 - eps - 1e-12))
        })
        .collect::<Result<Vec<(bool, bool)>>>()?;
    Ok(StressReport {
        families: trials,
        premise_met: outcomes.iter().filter(|o| o.0).count(),
        violations: outcomes.iter().filter(|o| o.1).count(),
        delta,
    })
}

/// The three-element counterexample to the classical (`C = 1`) bound:
/// greatest element with mass `p0`, two incomparable elements sharing the
/// rest, `A = {x0, x1}` and `B = {x0, x2}`.
pub fn counterexample(p0: f64) -> Result<(PosetMeasure, ProductUpset, ProductUpset)> {
    check_unit_open("p0", p0)?;
    let poset = FinitePoset::fan(2);
    let rest = (1.0 - p0) / 2.0;
    let a = ProductUpset::explicit(&poset, 1, vec![true, true, false])?;
    let b = ProductUpset::explicit(&poset, 1, vec![true, false, true])?;
    Ok((PosetMeasure::new(poset, vec![p0, rest, rest])?, a, b))
}
