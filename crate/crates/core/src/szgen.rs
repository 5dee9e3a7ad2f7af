//! Generators: small planar graphs with distinguished terminals whose
//! terminal-connectivity law gives a hyperedge probability vector.
//!
//! Connection vectors are computed exactly over rational polynomials in one
//! parameter `p`; floating point is only used for root finding.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypermap::NodeKey;
use crate::ncpart::{NCPartition, ProbabilityVector};

/// Largest number of independently random items (bonds or internal sites).
pub const MAX_RANDOM_ITEMS: usize = 24;

/// Absolute tolerance of root bisection.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Dense polynomial with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

fn rational_from_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::invalid(format!("cannot read '{text}' as a rational number"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    /// The identity polynomial `p`.
    pub fn p() -> Self {
        Poly::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// Coefficients given as decimal or `a/b` strings, read exactly.
    pub fn parse(coeffs: &[String]) -> Result<Self> {
        Ok(Poly::new(coeffs.iter().map(|c| rational_from_decimal(c.trim())).collect::<Result<_>>()?))
    }

    /// Coefficients given as `f64`, read through their shortest decimal form
    /// so that `0.1` means one tenth.
    pub fn from_f64(coeffs: &[f64]) -> Result<Self> {
        let mut out = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            if !c.is_finite() {
                return Err(Error::invalid("polynomial coefficient is not finite"));
            }
            out.push(rational_from_decimal(&format!("{c:e}"))?);
        }
        Ok(Poly::new(out))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn one_minus(&self) -> Self {
        &Poly::one() - self
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Poly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs_f64().iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Coefficients as strings, exact (`"-3"`, `"1/2"`).
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => f.write_str("p")?,
                _ => write!(f, "p^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorMode {
    /// Bonds open independently; all vertices open.
    #[default]
    Bond,
    /// Internal vertices open independently; terminals and bonds always open.
    Site,
}

/// A coefficient in a generator file: a JSON number or an exact string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Num(f64),
    Text(String),
}

fn read_poly(coeffs: &[Coefficient]) -> Result<Poly> {
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        out.push(match c {
            Coefficient::Num(x) => Poly::from_f64(&[*x])?.coeffs.pop().unwrap_or_default(),
            Coefficient::Text(s) => rational_from_decimal(s.trim())?,
        });
    }
    Ok(Poly::new(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexEntry {
    Id(NodeKey),
    Full {
        id: NodeKey,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<Coefficient>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondEntry {
    pub u: NodeKey,
    pub v: NodeKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Coefficient>>,
}

/// Generator file contents. Missing probabilities default to `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub terminals: Vec<NodeKey>,
    pub vertices: Vec<VertexEntry>,
    pub bonds: Vec<BondEntry>,
    #[serde(default)]
    pub mode: GeneratorMode,
}

/// A finite graph with terminals listed in cyclic outer-face order.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    ids: Vec<NodeKey>,
    terminals: Vec<usize>,
    bonds: Vec<(usize, usize)>,
    bond_probs: Vec<Poly>,
    site_probs: Vec<Poly>,
    mode: GeneratorMode,
}

impl Generator {
    pub fn new(
        vertex_count: usize,
        terminals: Vec<usize>,
        bonds: Vec<(usize, usize)>,
        probs: Vec<Poly>,
        mode: GeneratorMode,
    ) -> Result<Self> {
        let ids = (0..vertex_count as i64).map(NodeKey::Num).collect();
        let (bond_probs, site_probs) = match mode {
            GeneratorMode::Bond => (probs, vec![Poly::one(); vertex_count]),
            GeneratorMode::Site => (vec![Poly::one(); bonds.len()], probs),
        };
        let g = Generator { ids, terminals, bonds, bond_probs, site_probs, mode };
        g.validate()?;
        Ok(g)
    }

    /// Three terminals joined pairwise by bonds of probability `p`.
    pub fn triangle() -> Self {
        Generator::new(3, vec![0, 1, 2], vec![(0, 1), (1, 2), (2, 0)], vec![Poly::p(); 3], GeneratorMode::Bond)
            .expect("triangle is valid")
    }

    /// Three terminals joined to a central vertex by bonds of probability `p`.
    pub fn star() -> Self {
        Generator::new(4, vec![0, 1, 2], vec![(3, 0), (3, 1), (3, 2)], vec![Poly::p(); 3], GeneratorMode::Bond)
            .expect("star is valid")
    }

    /// Two terminals and one bond.
    pub fn single_bond() -> Self {
        Generator::new(2, vec![0, 1], vec![(0, 1)], vec![Poly::p()], GeneratorMode::Bond).expect("bond is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeneratorFile = serde_json::from_str(text)?;
        Generator::from_file(&file)
    }

    pub fn from_file(file: &GeneratorFile) -> Result<Self> {
        let mut index = HashMap::new();
        let mut ids = Vec::new();
        let mut site_probs = Vec::new();
        for entry in &file.vertices {
            let (id, p) = match entry {
                VertexEntry::Id(id) => (id.clone(), None),
                VertexEntry::Full { id, p, .. } => (id.clone(), p.as_ref()),
            };
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::invalid(format!("duplicate generator vertex {id}")));
            }
            ids.push(id);
            site_probs.push(match p {
                Some(c) if file.mode == GeneratorMode::Site => read_poly(c)?,
                Some(_) => return Err(Error::invalid("vertex probabilities are only used in site mode")),
                None if file.mode == GeneratorMode::Site => Poly::p(),
                None => Poly::one(),
            });
        }
        let lookup = |k: &NodeKey| -> Result<usize> {
            index.get(k).copied().ok_or_else(|| Error::invalid(format!("unknown generator vertex {k}")))
        };
        let terminals = file.terminals.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let mut bonds = Vec::new();
        let mut bond_probs = Vec::new();
        for b in &file.bonds {
            bonds.push((lookup(&b.u)?, lookup(&b.v)?));
            bond_probs.push(match (&b.p, file.mode) {
                (Some(c), GeneratorMode::Bond) => read_poly(c)?,
                (Some(_), GeneratorMode::Site) => return Err(Error::invalid("bond probabilities are not used in site mode")),
                (None, GeneratorMode::Bond) => Poly::p(),
                (None, GeneratorMode::Site) => Poly::one(),
            });
        }
        for &t in &terminals {
            site_probs[t] = Poly::one();
        }
        let g = Generator { ids, terminals, bonds, bond_probs, site_probs, mode: file.mode };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.terminals.is_empty() {
            return Err(Error::invalid("generator needs at least one terminal"));
        }
        let mut seen = vec![false; n];
        for &t in &self.terminals {
            if t >= n || std::mem::replace(&mut seen[t], true) {
                return Err(Error::invalid("terminals must be distinct generator vertices"));
            }
        }
        if self.bond_probs.len() != self.bonds.len() || self.site_probs.len() != n {
            return Err(Error::invalid("one probability per random item is required"));
        }
        for &(u, v) in &self.bonds {
            if u >= n || v >= n {
                return Err(Error::invalid("bond endpoint out of range"));
            }
            if u == v {
                return Err(Error::invalid("generator bonds must join distinct vertices"));
            }
        }
        // connected ground graph
        let mut uf = UnionFind::new(n);
        for &(u, v) in &self.bonds {
            uf.union(u, v);
        }
        if n > 0 && (0..n).any(|x| uf.find(x) != uf.find(0)) {
            return Err(Error::invalid("generator graph is disconnected"));
        }
        let random = self.random_items();
        if random > MAX_RANDOM_ITEMS {
            return Err(Error::capacity(format!(
                "{random} random items exceed the enumeration bound of {MAX_RANDOM_ITEMS}"
            )));
        }
        let polys: Vec<&Poly> = match self.mode {
            GeneratorMode::Bond => self.bond_probs.iter().collect(),
            GeneratorMode::Site => self.site_probs.iter().collect(),
        };
        for poly in polys {
            for i in 0..=100 {
                let x = poly.eval(i as f64 / 100.0);
                if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                    return Err(Error::invalid(format!("probability {poly} leaves [0, 1] at p = {}", i as f64 / 100.0)));
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> GeneratorMode {
        self.mode
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn bond_probs(&self) -> &[Poly] {
        &self.bond_probs
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[NodeKey] {
        &self.ids
    }

    fn internal(&self) -> Vec<usize> {
        (0..self.ids.len()).filter(|v| !self.terminals.contains(v)).collect()
    }

    fn random_items(&self) -> usize {
        match self.mode {
            GeneratorMode::Bond => self.bonds.len(),
            GeneratorMode::Site => self.internal().len(),
        }
    }

    /// Barycentric coordinates of every vertex relative to the first three
    /// terminals: terminals are pinned to the corners and every other vertex
    /// sits at the average of its neighbours.
    pub fn barycentric_layout(&self) -> Result<Vec<[f64; 3]>> {
        if self.terminals.len() != 3 {
            return Err(Error::invalid("layout needs exactly three terminals"));
        }
        let n = self.ids.len();
        let internal = self.internal();
        let slot: HashMap<usize, usize> = internal.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = internal.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut rhs = vec![[0.0; 3]; m];
        for &(u, v) in &self.bonds {
            for (x, y) in [(u, v), (v, u)] {
                if let Some(&i) = slot.get(&x) {
                    a[i][i] += 1.0;
                    match slot.get(&y) {
                        Some(&j) => a[i][j] -= 1.0,
                        None => {
                            let t = self.terminals.iter().position(|&t| t == y).expect("non-internal is terminal");
                            rhs[i][t] += 1.0;
                        }
                    }
                }
            }
        }
        // Gaussian elimination with partial pivoting
        for col in 0..m {
            let pivot = (col..m)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
                .expect("non-empty range");
            if a[pivot][col].abs() < 1e-12 {
                return Err(Error::invalid("generator layout is singular"));
            }
            a.swap(col, pivot);
            rhs.swap(col, pivot);
            for row in 0..m {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    if f != 0.0 {
                        for c in col..m {
                            a[row][c] -= f * a[col][c];
                        }
                        for t in 0..3 {
                            rhs[row][t] -= f * rhs[col][t];
                        }
                    }
                }
            }
        }
        let mut out = vec![[0.0; 3]; n];
        for (t, &v) in self.terminals.iter().enumerate() {
            out[v][t] = 1.0;
        }
        for (i, &v) in internal.iter().enumerate() {
            for t in 0..3 {
                out[v][t] = rhs[i][t] / a[i][i];
            }
        }
        Ok(out)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Exact terminal-connection law of a generator: partition of the terminal
/// indices (blocks of `0..k`) to its probability polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionVector {
    k: usize,
    entries: BTreeMap<Vec<Vec<usize>>, Poly>,
}

impl ConnectionVector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &BTreeMap<Vec<Vec<usize>>, Poly> {
        &self.entries
    }

    /// Polynomial of a partition; zero if it never occurs.
    pub fn get(&self, pi: &NCPartition) -> Poly {
        self.entries.get(pi.blocks()).cloned().unwrap_or_default()
    }

    /// Sum of all entries (exactly one for a valid generator).
    pub fn total(&self) -> Poly {
        self.entries.values().fold(Poly::zero(), |acc, p| &acc + p)
    }

    /// Whether every partition with a non-zero polynomial is non-crossing.
    pub fn is_noncrossing(&self) -> bool {
        self.entries.keys().all(|b| NCPartition::new(self.k, b.clone()).is_ok())
    }

    pub fn evaluate(&self, p: f64) -> Result<ProbabilityVector> {
        let mut out = Vec::new();
        for (blocks, poly) in &self.entries {
            let value = poly.eval(p).clamp(0.0, 1.0);
            let pi = NCPartition::new(self.k, blocks.clone()).map_err(|_| {
                Error::invalid(format!("terminal partition {blocks:?} is crossing; is the generator planar?"))
            })?;
            out.push((pi, value));
        }
        ProbabilityVector::new(self.k, out)
    }
}

fn terminal_blocks(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (t, &l) in labels.iter().enumerate() {
        map.entry(l).or_default().push(t);
    }
    let mut blocks: Vec<Vec<usize>> = map.into_values().collect();
    blocks.sort();
    blocks
}

/// Exact connection vector by enumerating every state of the random items.
pub fn connection_vector(g: &Generator) -> Result<ConnectionVector> {
    let m = g.random_items();
    if m > MAX_RANDOM_ITEMS {
        return Err(Error::capacity(format!("{m} random items exceed the enumeration bound")));
    }
    let internal = g.internal();
    let item_polys: Vec<&Poly> = match g.mode {
        GeneratorMode::Bond => g.bond_probs.iter().collect(),
        GeneratorMode::Site => internal.iter().map(|&v| &g.site_probs[v]).collect(),
    };
    // group items with identical polynomials so the tally stays small
    let mut classes: Vec<&Poly> = Vec::new();
    let item_class: Vec<usize> = item_polys
        .iter()
        .map(|p| match classes.iter().position(|q| q == p) {
            Some(i) => i,
            None => {
                classes.push(p);
                classes.len() - 1
            }
        })
        .collect();
    let class_sizes: Vec<usize> =
        (0..classes.len()).map(|c| item_class.iter().filter(|&&x| x == c).count()).collect();
    let n = g.ids.len();
    let total: u64 = 1 << m;
    let chunk = 1u64 << m.saturating_sub(6).min(16);
    let tally = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut local: HashMap<(Vec<Vec<usize>>, Vec<u8>), u64> = HashMap::new();
            let mut uf = UnionFind::new(n);
            for state in c * chunk..((c + 1) * chunk).min(total) {
                uf.parent.iter_mut().enumerate().for_each(|(i, p)| *p = i);
                let open = |i: usize| state >> i & 1 == 1;
                let mut counts = vec![0u8; classes.len()];
                for i in 0..m {
                    if open(i) {
                        counts[item_class[i]] += 1;
                    }
                }
                match g.mode {
                    GeneratorMode::Bond => {
                        for (i, &(u, v)) in g.bonds.iter().enumerate() {
                            if open(i) {
                                uf.union(u, v);
                            }
                        }
                    }
                    GeneratorMode::Site => {
                        let mut site_open = vec![true; n];
                        for (i, &v) in internal.iter().enumerate() {
                            site_open[v] = open(i);
                        }
                        for &(u, v) in &g.bonds {
                            if site_open[u] && site_open[v] {
                                uf.union(u, v);
                            }
                        }
                    }
                }
                let labels: Vec<usize> = g.terminals.iter().map(|&t| uf.find(t)).collect();
                *local.entry((terminal_blocks(&labels), counts)).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (key, v) in b {
                *a.entry(key).or_insert(0) += v;
            }
            a
        });

    let mut powers: HashMap<(usize, usize, usize), Poly> = HashMap::new();
    let mut term = |class: usize, open: usize| -> Poly {
        powers
            .entry((class, open, class_sizes[class]))
            .or_insert_with(|| &classes[class].pow(open) * &classes[class].one_minus().pow(class_sizes[class] - open))
            .clone()
    };
    let mut entries: BTreeMap<Vec<Vec<usize>>, Poly> = BTreeMap::new();
    let mut keys: Vec<_> = tally.into_iter().collect();
    keys.sort();
    for ((blocks, counts), times) in keys {
        let mut poly = Poly::constant(BigRational::from_integer(BigInt::from(times)));
        for (class, &open) in counts.iter().enumerate() {
            poly = &poly * &term(class, open as usize);
        }
        let slot = entries.entry(blocks).or_default();
        *slot = &*slot + &poly;
    }
    entries.retain(|_, p| !p.is_zero());
    Ok(ConnectionVector { k: g.terminals.len(), entries })
}

/// Self-duality condition(s) of a generator, as polynomials that must vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfDualSystem {
    /// `(label, lhs - rhs)` pairs.
    pub equations: Vec<(String, Poly)>,
    /// Set when the equations depend on how dual terminals are labelled.
    pub convention_dependent: bool,
}

/// For up to three terminals the single equation `p_top - p_bottom`. For
/// more terminals, one equation `p_π - p_κ(π)` per unordered pair, where
/// `κ` is the Kreweras dual with dual terminal `j` placed between terminals
/// `j` and `j + 1`; this labelling is a convention.
pub fn selfdual_equation(cv: &ConnectionVector) -> Result<SelfDualSystem> {
    let k = cv.k;
    if k <= 3 {
        let top = cv.get(&NCPartition::top(k));
        let bottom = cv.get(&NCPartition::bottom(k));
        let name = format!("{} - {}", NCPartition::top(k).letters(false), "0");
        return Ok(SelfDualSystem { equations: vec![(name, &top - &bottom)], convention_dependent: false });
    }
    let mut equations = Vec::new();
    for pi in crate::ncpart::enumerate_nc(k)? {
        let image = pi.dual();
        if image <= pi {
            continue;
        }
        let diff = &cv.get(&pi) - &cv.get(&image);
        if !diff.is_zero() {
            equations.push((format!("{pi} - {image}*"), diff));
        }
    }
    Ok(SelfDualSystem { equations, convention_dependent: true })
}

/// Result of root finding on `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalReport {
    pub polynomial: Vec<String>,
    pub brackets: Vec<(f64, f64)>,
    pub roots: Vec<f64>,
    pub identically_zero: bool,
}

impl CriticalReport {
    pub fn root(&self) -> Option<f64> {
        self.roots.first().copied()
    }
}

const GRID: usize = 4096;

/// All sign changes of `f` on `(0, 1)`, each refined by bisection to
/// [`ROOT_TOLERANCE`] and polished with Newton steps kept inside the bracket.
pub fn find_roots(f: &Poly) -> CriticalReport {
    let polynomial = f.coeff_strings();
    if f.is_zero() {
        return CriticalReport { polynomial, brackets: vec![], roots: vec![], identically_zero: true };
    }
    let df = f.derivative();
    let mut brackets = Vec::new();
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    for i in 0..GRID {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 && i > 0 {
            brackets.push((a, a));
            roots.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, flo) = (a, b, fa);
        while hi - lo > ROOT_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            let fm = f.eval(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..3 {
            let d = df.eval(x);
            if d == 0.0 {
                break;
            }
            let next = x - f.eval(x) / d;
            if next < a || next > b || f.eval(next).abs() > f.eval(x).abs() {
                break;
            }
            x = next;
        }
        brackets.push((a, b));
        roots.push(x);
    }
    CriticalReport { polynomial, brackets, roots, identically_zero: false }
}

/// Critical parameter of a generator with two or three terminals.
pub fn critical_point(g: &Generator) -> Result<CriticalReport> {
    let cv = connection_vector(g)?;
    if cv.k > 3 {
        return Err(Error::invalid("critical_point needs a generator with at most three terminals"));
    }
    let system = selfdual_equation(&cv)?;
    Ok(find_roots(&system.equations[0].1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Necessary conditions for a 3-terminal vector to come from independent
/// bond or site percolation on a generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizabilityReport {
    pub checks: Vec<InequalityCheck>,
    /// False when some inequality fails: a certificate of non-realizability.
    pub consistent: bool,
}

pub fn realizability_check(v: &ProbabilityVector) -> Result<RealizabilityReport> {
    if v.k() != 3 {
        return Err(Error::invalid("realizability check is defined for k = 3"));
    }
    let part = |blocks: Vec<Vec<usize>>| v.prob(&NCPartition::new(3, blocks).expect("valid k=3 partition"));
    let abc = part(vec![vec![0, 1, 2]]);
    let empty = part(vec![vec![0], vec![1], vec![2]]);
    let pair = |a: usize, b: usize| {
        let c = 3 - a - b;
        let mut blocks = vec![vec![a.min(b), a.max(b)], vec![c]];
        blocks.sort();
        part(blocks)
    };
    let name = |a: usize, b: usize| {
        let l = ['A', 'B', 'C'];
        format!("{}{}", l[a.min(b)], l[a.max(b)])
    };
    let mut checks = Vec::new();
    let tol = 1e-12;
    // positive correlation of two pair-connection events sharing a terminal
    for (x, y) in [((0, 1), (1, 2)), ((0, 1), (0, 2)), ((0, 2), (1, 2))] {
        let lhs = abc;
        let rhs = (abc + pair(x.0, x.1)) * (abc + pair(y.0, y.1));
        checks.push(InequalityCheck {
            name: format!("p_ABC >= (p_ABC + p_{})(p_ABC + p_{})", name(x.0, x.1), name(y.0, y.1)),
            lhs,
            rhs,
            holds: lhs >= rhs - tol,
        });
    }
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let c = 3 - a - b;
        let lhs = abc * empty;
        let rhs = pair(a, b) * (pair(b, c) + pair(a, c));
        checks.push(InequalityCheck {
            name: format!(
                "p_ABC p_0 >= p_{}(p_{} + p_{})",
                name(a, b),
                name(b, c),
                name(a, c)
            ),
            lhs,
            rhs,
            holds: lhs >= rhs - tol,
        });
    }
    let consistent = checks.iter().all(|c| c.holds);
    Ok(RealizabilityReport { checks, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn poly_arithmetic() {
        let p = Poly::p();
        let x = &p.one_minus().pow(3) + &p.pow(3);
        assert_eq!(x, Poly::from_integers(&[1, -3, 3]));
        assert_eq!(x.derivative(), Poly::from_integers(&[-3, 6]));
        assert_eq!((&x - &x).degree(), None);
        assert_eq!(Poly::parse(&["0.1".into(), "1/3".into()]).unwrap().coeffs(), &[q(1, 10), q(1, 3)]);
        assert_eq!(Poly::from_f64(&[0.1, 2.5e-1]).unwrap().coeffs(), &[q(1, 10), q(1, 4)]);
        assert_eq!(Poly::from_integers(&[1, -3, 0, 1]).to_string(), "p^3 - 3p + 1");
        assert!((x.eval(0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangle_vector() {
        let cv = connection_vector(&Generator::triangle()).unwrap();
        assert_eq!(cv.total(), Poly::one());
        assert_eq!(cv.get(&NCPartition::top(3)), Poly::from_integers(&[0, 0, 3, -2]));
        assert_eq!(cv.get(&NCPartition::bottom(3)), Poly::from_integers(&[1, -3, 3, -1]));
        let eq = selfdual_equation(&cv).unwrap();
        assert_eq!(eq.equations[0].1, Poly::from_integers(&[-1, 3, 0, -1]));
    }

    #[test]
    fn star_vector() {
        let cv = connection_vector(&Generator::star()).unwrap();
        assert_eq!(cv.get(&NCPartition::top(3)), Poly::from_integers(&[0, 0, 0, 1]));
        let f = selfdual_equation(&cv).unwrap().equations.remove(0).1;
        let p = Poly::p();
        let expected = &(&p.pow(3) - &p.one_minus().pow(3)) - &(&p * &p.one_minus().pow(2)).scale(&q(3, 1));
        assert_eq!(f, expected);
    }

    #[test]
    fn roots() {
        let t = critical_point(&Generator::triangle()).unwrap();
        let s = critical_point(&Generator::star()).unwrap();
        let exact = 2.0 * (std::f64::consts::PI / 18.0).sin();
        assert_eq!(t.roots.len(), 1);
        assert!((t.root().unwrap() - exact).abs() < 1e-12);
        assert!((s.root().unwrap() - (1.0 - exact)).abs() < 1e-12);
        let b = critical_point(&Generator::single_bond()).unwrap();
        assert!((b.root().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_root_and_zero() {
        // bond probability fixed at 1/3: f is the non-zero constant 1/9 - 4/9
        let g = Generator::new(3, vec![0, 1, 2], vec![(0, 1), (1, 2)], vec![Poly::constant(q(1, 3)); 2], GeneratorMode::Bond)
            .unwrap();
        let r = critical_point(&g).unwrap();
        assert!(r.roots.is_empty() && !r.identically_zero);
        let r = find_roots(&Poly::zero());
        assert!(r.identically_zero && r.roots.is_empty());
    }

    #[test]
    fn site_mode() {
        // star with an open-with-probability-p centre
        let file = r#"{"terminals":[0,1,2],"vertices":[0,1,2,{"id":3,"p":[0,1]}],
            "bonds":[{"u":3,"v":0},{"u":3,"v":1},{"u":3,"v":2}],"mode":"site"}"#;
        let g = Generator::from_json(file).unwrap();
        let cv = connection_vector(&g).unwrap();
        assert_eq!(cv.get(&NCPartition::top(3)), Poly::p());
        assert_eq!(cv.get(&NCPartition::bottom(3)), Poly::p().one_minus());
        assert!((critical_point(&g).unwrap().root().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn file_validation() {
        assert!(Generator::from_json(r#"{"terminals":[0,0],"vertices":[0,1],"bonds":[{"u":0,"v":1}]}"#).is_err());
        assert!(Generator::from_json(r#"{"terminals":[0,1],"vertices":[0,1,2],"bonds":[{"u":0,"v":1}]}"#).is_err());
        assert!(Generator::from_json(r#"{"terminals":[0,1],"vertices":[0,1],"bonds":[{"u":0,"v":1,"p":[0,2]}]}"#).is_err());
        let many: Vec<String> = (0..25).map(|i| format!(r#"{{"u":0,"v":1,"p":[{}]}}"#, i % 2)).collect();
        let text = format!(r#"{{"terminals":[0,1],"vertices":[0,1],"bonds":[{}]}}"#, many.join(","));
        assert!(matches!(Generator::from_json(&text), Err(Error::Capacity(_))));
    }

    #[test]
    fn realizability() {
        let ex = ProbabilityVector::competition(0.5).unwrap();
        let r = realizability_check(&ex).unwrap();
        assert!(!r.consistent);
        let failing = &r.checks[0];
        assert!((failing.lhs - 0.125).abs() < 1e-15 && (failing.rhs - 0.140625).abs() < 1e-15);
        let top = ProbabilityVector::point_mass(NCPartition::top(3));
        assert!(realizability_check(&top).unwrap().consistent);
        for g in [Generator::triangle(), Generator::star()] {
            let cv = connection_vector(&g).unwrap();
            for p in [0.3, 0.5, 0.7] {
                assert!(realizability_check(&cv.evaluate(p).unwrap()).unwrap().consistent);
            }
        }
    }

    #[test]
    fn layout() {
        let b = Generator::star().barycentric_layout().unwrap();
        for t in 0..3 {
            assert!((b[3][t] - 1.0 / 3.0).abs() < 1e-12);
        }
    }
}
