//! Hopfield storage, the energy orientation of the hypercube, and its
//! behaviour under hypercube isometries.
//!
//! States are bit masks: bit `i` set means unit `i` is `+1`. Weights and
//! energies are integers, so every comparison is exact.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, derive_seed, Rng};

pub type State = u32;

pub const ORIENTATION_CAP: usize = 14;
pub const EXHAUSTIVE_PAIR_CAP: usize = 4;
pub const CSV_CAP: usize = 8;

fn spin(x: State, i: usize) -> i64 {
    if x >> i & 1 == 1 {
        1
    } else {
        -1
    }
}

pub fn to_state(v: &[i8]) -> Result<State> {
    if v.len() > 31 {
        return Err(Error::AboveCap {
            what: "state length".into(),
            cap: 31,
        });
    }
    let mut x = 0;
    for (i, &s) in v.iter().enumerate() {
        match s {
            1 => x |= 1 << i,
            -1 => {}
            other => return Err(Error::InvalidArgument(format!("memory entry {other} is not ±1"))),
        }
    }
    Ok(x)
}

pub fn from_state(x: State, n: usize) -> Vec<i8> {
    (0..n).map(|i| spin(x, i) as i8).collect()
}

/// Symmetric rule `F = alpha O_i O_j + beta (O_i + O_j) + gamma`, applied
/// once per memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleCoeffs {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl RuleCoeffs {
    pub const HEBB: RuleCoeffs = RuleCoeffs {
        alpha: 1,
        beta: 0,
        gamma: 0,
    };

    pub fn new(alpha: i64, beta: i64, gamma: i64) -> Self {
        RuleCoeffs { alpha, beta, gamma }
    }

    fn increment(&self, oi: i64, oj: i64) -> i64 {
        self.alpha * oi * oj + self.beta * (oi + oj) + self.gamma
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopfieldNet {
    pub n: usize,
    /// Row-major `n x n`, symmetric with zero diagonal.
    pub weights: Vec<i64>,
}

impl HopfieldNet {
    pub fn zeros(n: usize) -> Self {
        HopfieldNet {
            n,
            weights: vec![0; n * n],
        }
    }

    pub fn w(&self, i: usize, j: usize) -> i64 {
        self.weights[i * self.n + j]
    }

    /// `E = -1/2 sum_ij w_ij O_i O_j`.
    pub fn energy(&self, x: State) -> i64 {
        let mut e = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                e -= self.w(i, j) * spin(x, i) * spin(x, j);
            }
        }
        e
    }

    pub fn energy_of(&self, v: &[i8]) -> Result<i64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(self.energy(to_state(v)?))
    }

    /// Flip randomly chosen units that strictly lower the energy until none
    /// does; returns the final state.
    pub fn descend(&self, mut x: State, r: &mut Rng) -> State {
        let mut order: Vec<usize> = (0..self.n).collect();
        loop {
            order.shuffle(r);
            let e = self.energy(x);
            match order.iter().find(|&&i| self.energy(x ^ 1 << i) < e) {
                Some(&i) => x ^= 1 << i,
                None => return x,
            }
        }
    }
}

fn check_memories(memories: &[Vec<i8>]) -> Result<(usize, Vec<State>)> {
    let n = memories.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
    let mut states = Vec::with_capacity(memories.len());
    for m in memories {
        if m.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.len() });
        }
        states.push(to_state(m)?);
    }
    Ok((n, states))
}

/// Simple Hebb storage `w_ij = sum_k M_i M_j`.
pub fn store(memories: &[Vec<i8>]) -> Result<HopfieldNet> {
    store_with_rule(memories, RuleCoeffs::HEBB)
}

pub fn store_with_rule(memories: &[Vec<i8>], rule: RuleCoeffs) -> Result<HopfieldNet> {
    let (n, states) = check_memories(memories)?;
    Ok(store_states(n, &states, rule))
}

pub fn store_states(n: usize, states: &[State], rule: RuleCoeffs) -> HopfieldNet {
    let mut net = HopfieldNet::zeros(n);
    for &m in states {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    net.weights[i * n + j] += rule.increment(spin(m, i), spin(m, j));
                }
            }
        }
    }
    net
}

/// A hypercube isometry: unit `i` goes to position `permutation[i]` and is
/// negated when `sign_flips[i] == -1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Isometry {
    pub permutation: Vec<usize>,
    pub sign_flips: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Swap(usize, usize),
    Flip(usize),
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Isometry {
            permutation: (0..n).collect(),
            sign_flips: vec![1; n],
        }
    }

    pub fn new(permutation: Vec<usize>, sign_flips: Vec<i8>) -> Result<Self> {
        let n = permutation.len();
        if sign_flips.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: sign_flips.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        if sign_flips.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidArgument("sign flips must be ±1".into()));
        }
        Ok(Isometry { permutation, sign_flips })
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    /// Product of generators, applied left to right.
    pub fn from_generators(n: usize, gens: &[Generator]) -> Result<Self> {
        let mut h = Isometry::identity(n);
        for g in gens {
            let step = match *g {
                Generator::Swap(a, b) => {
                    let mut p: Vec<usize> = (0..n).collect();
                    if a >= n || b >= n {
                        return Err(Error::InvalidArgument(format!("swap ({a},{b}) outside 0..{n}")));
                    }
                    p.swap(a, b);
                    Isometry::new(p, vec![1; n])?
                }
                Generator::Flip(a) => {
                    if a >= n {
                        return Err(Error::InvalidArgument(format!("flip {a} outside 0..{n}")));
                    }
                    let mut s = vec![1; n];
                    s[a] = -1;
                    Isometry::new((0..n).collect(), s)?
                }
            };
            h = step.compose(&h);
        }
        Ok(h)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let n = self.n();
        let mut permutation = vec![0; n];
        let mut sign_flips = vec![1; n];
        for i in 0..n {
            let mid = other.permutation[i];
            permutation[i] = self.permutation[mid];
            sign_flips[i] = other.sign_flips[i] * self.sign_flips[mid];
        }
        Isometry { permutation, sign_flips }
    }

    pub fn apply(&self, x: State) -> State {
        let mut y = 0;
        for (i, (&p, &s)) in self.permutation.iter().zip(&self.sign_flips).enumerate() {
            let bit = (x >> i & 1) ^ u32::from(s == -1);
            y |= bit << p;
        }
        y
    }

    pub fn apply_vec(&self, v: &[i8]) -> Result<Vec<i8>> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(from_state(self.apply(to_state(v)?), self.n()))
    }

    /// All `n! 2^n` isometries.
    pub fn all(n: usize) -> Vec<Isometry> {
        let mut perms = Vec::new();
        permutations(&mut (0..n).collect(), 0, &mut perms);
        let mut out = Vec::with_capacity(perms.len() << n);
        for p in perms {
            for mask in 0..1u32 << n {
                let s = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                out.push(Isometry {
                    permutation: p.clone(),
                    sign_flips: s,
                });
            }
        }
        out
    }

    pub fn random(n: usize, r: &mut Rng) -> Isometry {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(r);
        let s = (0..n).map(|_| if r.random_bool(0.5) { -1 } else { 1 }).collect();
        Isometry {
            permutation: p,
            sign_flips: s,
        }
    }
}

fn permutations(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permutations(cur, k + 1, out);
        cur.swap(k, i);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDir {
    /// Energy falls from the state with the bit clear to the one with it set.
    Up,
    /// Energy falls the other way.
    Down,
    Tie,
}

impl EdgeDir {
    fn reversed(self) -> EdgeDir {
        match self {
            EdgeDir::Up => EdgeDir::Down,
            EdgeDir::Down => EdgeDir::Up,
            EdgeDir::Tie => EdgeDir::Tie,
        }
    }
}

/// Direction of every hypercube edge `(x, x | 1 << k)`, `x` with bit `k`
/// clear, stored at `x * n + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercubeOrientation {
    pub n: usize,
    edges: Vec<EdgeDir>,
}

fn compare(e_low: i64, e_high: i64) -> EdgeDir {
    match e_low.cmp(&e_high) {
        std::cmp::Ordering::Greater => EdgeDir::Up,
        std::cmp::Ordering::Less => EdgeDir::Down,
        std::cmp::Ordering::Equal => EdgeDir::Tie,
    }
}

pub fn orientation(net: &HopfieldNet) -> Result<HypercubeOrientation> {
    orientation_capped(net, ORIENTATION_CAP)
}

pub fn orientation_capped(net: &HopfieldNet, cap: usize) -> Result<HypercubeOrientation> {
    let n = net.n;
    if n > cap || n > 24 {
        return Err(Error::AboveCap {
            what: "orientation size".into(),
            cap: cap.min(24),
        });
    }
    let energies: Vec<i64> = (0..1u32 << n).into_par_iter().map(|x| net.energy(x)).collect();
    let mut edges = vec![EdgeDir::Tie; n << n];
    edges.par_chunks_mut(n.max(1)).enumerate().for_each(|(x, row)| {
        let x = x as State;
        for (k, e) in row.iter_mut().enumerate().take(n) {
            if x >> k & 1 == 0 {
                *e = compare(energies[x as usize], energies[(x | 1 << k) as usize]);
            }
        }
    });
    Ok(HypercubeOrientation { n, edges })
}

impl HypercubeOrientation {
    /// Direction of the edge across `k` at `x`, read from the endpoint with
    /// bit `k` clear.
    pub fn edge(&self, x: State, k: usize) -> EdgeDir {
        let low = x & !(1 << k);
        self.edges[low as usize * self.n + k]
    }

    /// Edge from `x` to its neighbour across `k`: `Up` means it points away
    /// from `x`.
    fn out_of(&self, x: State, k: usize) -> EdgeDir {
        let d = self.edge(x, k);
        if x >> k & 1 == 0 {
            d
        } else {
            d.reversed()
        }
    }

    pub fn edge_count(&self) -> usize {
        self.n << self.n.saturating_sub(1)
    }

    pub fn tie_count(&self) -> usize {
        self.iter_edges().filter(|e| e.2 == EdgeDir::Tie).count()
    }

    pub fn all_tie(&self) -> bool {
        self.tie_count() == self.edge_count()
    }

    fn iter_edges(&self) -> impl Iterator<Item = (State, usize, EdgeDir)> + '_ {
        let n = self.n;
        (0..1u32 << n).flat_map(move |x| (0..n).filter(move |k| x >> k & 1 == 0).map(move |k| (x, k, self.edges[x as usize * n + k])))
    }

    /// Every incident edge points into `x`.
    pub fn is_sink(&self, x: State) -> bool {
        (0..self.n).all(|k| self.out_of(x, k) == EdgeDir::Down)
    }

    /// No incident edge points out of `x`.
    pub fn is_terminal(&self, x: State) -> bool {
        (0..self.n).all(|k| self.out_of(x, k) != EdgeDir::Up)
    }

    /// Kahn's algorithm on the non-tie digraph.
    pub fn is_acyclic(&self) -> bool {
        let n = self.n;
        let size = 1usize << n;
        let mut indeg = vec![0u32; size];
        for x in 0..size as State {
            indeg[x as usize] = (0..n).filter(|&k| self.out_of(x, k) == EdgeDir::Down).count() as u32;
        }
        let mut queue: Vec<State> = (0..size as State).filter(|&x| indeg[x as usize] == 0).collect();
        let mut seen = 0;
        while let Some(x) = queue.pop() {
            seen += 1;
            for k in 0..n {
                if self.out_of(x, k) == EdgeDir::Up {
                    let y = (x ^ 1 << k) as usize;
                    indeg[y] -= 1;
                    if indeg[y] == 0 {
                        queue.push(y as State);
                    }
                }
            }
        }
        seen == size
    }

    /// Carry every edge along `h`.
    pub fn transport(&self, h: &Isometry) -> Result<HypercubeOrientation> {
        if h.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: h.n(),
            });
        }
        let n = self.n;
        let mut edges = vec![EdgeDir::Tie; n << n];
        for (x, k, d) in self.iter_edges() {
            let (a, b) = (h.apply(x), h.apply(x | 1 << k));
            let k2 = (a ^ b).trailing_zeros() as usize;
            let low = a.min(b);
            edges[low as usize * n + k2] = if a == low { d } else { d.reversed() };
        }
        Ok(HypercubeOrientation { n, edges })
    }

    /// Edge list `state_a,state_b,orientation` with states written as `+`
    /// and `-` strings and `state_a` the one with the bit clear.
    pub fn to_csv(&self) -> Result<String> {
        if self.n > CSV_CAP {
            return Err(Error::AboveCap {
                what: "edge-list export".into(),
                cap: CSV_CAP,
            });
        }
        let word = |x: State| -> String { (0..self.n).map(|i| if x >> i & 1 == 1 { '+' } else { '-' }).collect() };
        let mut out = String::from("state_a,state_b,orientation\n");
        for (x, k, d) in self.iter_edges() {
            let label = match d {
                EdgeDir::Up => "a_to_b",
                EdgeDir::Down => "b_to_a",
                EdgeDir::Tie => "tie",
            };
            out.push_str(&format!("{},{},{}\n", word(x), word(x | 1 << k), label));
        }
        Ok(out)
    }
}

/// `h(O(S)) == O(h(S))` for storage with `rule`, tie edges included.
pub fn commutes(memories: &[Vec<i8>], h: &Isometry, rule: RuleCoeffs) -> Result<bool> {
    let (n, states) = check_memories(memories)?;
    if h.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.n() });
    }
    let before = orientation(&store_states(n, &states, rule))?.transport(h)?;
    let moved: Vec<State> = states.iter().map(|&s| h.apply(s)).collect();
    let after = orientation(&store_states(n, &moved, rule))?;
    Ok(before == after)
}

/// Precomputed per-state weight increments and spin products, so that the
/// energy landscape of any memory set is a few integer sums.
struct Cube {
    n: usize,
    pairs: usize,
    contrib: Vec<i64>,
    prod: Vec<i64>,
}

impl Cube {
    fn new(n: usize, rule: RuleCoeffs) -> Self {
        let pair_list: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let size = 1usize << n;
        let mut contrib = Vec::with_capacity(size * pair_list.len());
        let mut prod = Vec::with_capacity(size * pair_list.len());
        for x in 0..size as State {
            for &(i, j) in &pair_list {
                contrib.push(rule.increment(spin(x, i), spin(x, j)));
                prod.push(spin(x, i) * spin(x, j));
            }
        }
        Cube {
            n,
            pairs: pair_list.len(),
            contrib,
            prod,
        }
    }

    fn energies(&self, states: impl Iterator<Item = State>, w: &mut [i64], out: &mut [i64]) {
        let p = self.pairs;
        w.fill(0);
        for s in states {
            for (a, c) in w.iter_mut().zip(&self.contrib[s as usize * p..(s as usize + 1) * p]) {
                *a += c;
            }
        }
        for (y, e) in out.iter_mut().enumerate() {
            *e = -w.iter().zip(&self.prod[y * p..(y + 1) * p]).map(|(a, b)| a * b).sum::<i64>();
        }
    }

    /// Every edge `(x, y)` compares like `(h x, h y)` under the moved set.
    fn same_orientation(&self, e_s: &[i64], e_hs: &[i64], map: &[State]) -> bool {
        for x in 0..1usize << self.n {
            for k in 0..self.n {
                if x >> k & 1 == 0 {
                    let y = x | 1 << k;
                    if e_s[x].cmp(&e_s[y]) != e_hs[map[x] as usize].cmp(&e_hs[map[y] as usize]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn lookup(h: &Isometry) -> Vec<State> {
    (0..1u32 << h.n()).map(|x| h.apply(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub memories: Vec<Vec<i8>>,
    pub isometry: Isometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub rule: RuleCoeffs,
    pub n: usize,
    pub exhaustive: bool,
    /// (memory set, isometry) pairs examined.
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
    /// Memory sets examined whose orientation has no oriented edge at all.
    pub all_tie_sets: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    /// Largest `n` for which every (memory set, isometry) pair is checked.
    pub exhaustive_cap: usize,
    /// Random pairs above the cap.
    pub trials: u64,
    /// Memories per random set are drawn from `1..=max_memories`.
    pub max_memories: usize,
    pub seed: u64,
    /// Keep going after the first violation and count every pair.
    pub exhaust: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            exhaustive_cap: EXHAUSTIVE_PAIR_CAP,
            trials: 1000,
            max_memories: 4,
            seed: 0,
            exhaust: false,
        }
    }
}

struct SetResult {
    checked: u64,
    violation: Option<Counterexample>,
    all_tie: bool,
}

/// Look for a memory set and isometry that break commutation. At or below
/// the exhaustive cap every non-empty subset of states is paired with every
/// isometry; above it random sets and isometries are drawn.
pub fn uniqueness_search(n: usize, rule: RuleCoeffs, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if n == 0 || n > ORIENTATION_CAP {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..={ORIENTATION_CAP}")));
    }
    let size = 1usize << n;
    let cube = Cube::new(n, rule);
    let examine = |states: &[State], isos: &[(Isometry, Vec<State>)], stop: bool| -> SetResult {
        let mut w = vec![0i64; cube.pairs];
        let mut e_s = vec![0i64; size];
        let mut e_hs = vec![0i64; size];
        cube.energies(states.iter().copied(), &mut w, &mut e_s);
        let all_tie = (0..size).all(|x| (0..n).all(|k| x >> k & 1 == 1 || e_s[x] == e_s[x | 1 << k]));
        let mut res = SetResult {
            checked: 0,
            violation: None,
            all_tie,
        };
        for (h, map) in isos {
            res.checked += 1;
            cube.energies(states.iter().map(|&s| map[s as usize]), &mut w, &mut e_hs);
            if res.violation.is_none() && !cube.same_orientation(&e_s, &e_hs, map) {
                res.violation = Some(Counterexample {
                    memories: states.iter().map(|&s| from_state(s, n)).collect(),
                    isometry: h.clone(),
                });
                if stop {
                    break;
                }
            }
        }
        res
    };
    let exhaustive = n <= cfg.exhaustive_cap && n <= 5;
    let results: Vec<SetResult> = if exhaustive {
        let isos: Vec<(Isometry, Vec<State>)> = Isometry::all(n)
            .into_iter()
            .map(|h| {
                let m = lookup(&h);
                (h, m)
            })
            .collect();
        let sets: u64 = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        let run = |mask: u64| {
            let states: Vec<State> = (0..size as State).filter(|&x| mask >> x & 1 == 1).collect();
            examine(&states, &isos, !cfg.exhaust)
        };
        if cfg.exhaust {
            (1..=sets).into_par_iter().map(run).collect()
        } else {
            let mut out = Vec::new();
            for mask in 1..=sets {
                let r = run(mask);
                let stop = r.violation.is_some();
                out.push(r);
                if stop {
                    break;
                }
            }
            out
        }
    } else {
        let mut per_trial: Vec<SetResult> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::seeded(derive_seed(cfg.seed, t));
                let m = r.random_range(1..=cfg.max_memories.max(1));
                let states: Vec<State> = (0..m).map(|_| r.random_range(0..size as State)).collect();
                let h = Isometry::random(n, &mut r);
                let map = lookup(&h);
                examine(&states, &[(h, map)], true)
            })
            .collect();
        if !cfg.exhaust {
            if let Some(i) = per_trial.iter().position(|r| r.violation.is_some()) {
                per_trial.truncate(i + 1);
            }
        }
        per_trial
    };
    Ok(SearchOutcome {
        rule,
        n,
        exhaustive,
        checked: results.iter().map(|r| r.checked).sum(),
        all_tie_sets: results.iter().filter(|r| r.all_tie).count() as u64,
        counterexample: results.into_iter().find_map(|r| r.violation),
    })
}

/// Random `(memory set, isometry)` commutation checks; returns the number
/// of violations.
pub fn random_commutation_violations(n: usize, rule: RuleCoeffs, trials: u64, max_memories: usize, seed: u64) -> Result<u64> {
    let cfg = SearchConfig {
        exhaustive_cap: 0,
        trials,
        max_memories,
        seed,
        exhaust: true,
    };
    let size = 1usize << n;
    if n == 0 || n > ORIENTATION_CAP {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..={ORIENTATION_CAP}")));
    }
    let cube = Cube::new(n, rule);
    Ok((0..cfg.trials)
        .into_par_iter()
        .filter(|&t| {
            let mut r = rng::seeded(derive_seed(cfg.seed, t));
            let m = r.random_range(1..=cfg.max_memories.max(1));
            let states: Vec<State> = (0..m).map(|_| r.random_range(0..size as State)).collect();
            let h = Isometry::random(n, &mut r);
            let map = lookup(&h);
            let mut w = vec![0i64; cube.pairs];
            let mut e_s = vec![0i64; size];
            let mut e_hs = vec![0i64; size];
            cube.energies(states.iter().copied(), &mut w, &mut e_s);
            cube.energies(states.iter().map(|&s| map[s as usize]), &mut w, &mut e_hs);
            !cube.same_orientation(&e_s, &e_hs, &map)
        })
        .count() as u64)
}
