//! Finite rooted transitive irreflexive Kripke models and forcing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{box_n, Formula};

pub type WorldId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("invalid model file: {0}")]
    Format(String),
}

/// A finite model with a designated root.
///
/// Nothing about the frame is enforced at construction; see
/// [`KripkeModel::validate_frame`]. Variables missing from the valuation of
/// a world are false there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KripkeModel {
    worlds: BTreeSet<WorldId>,
    rel: BTreeSet<(WorldId, WorldId)>,
    root: WorldId,
    val: BTreeMap<WorldId, BTreeSet<String>>,
}

/// One violated GL-frame condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameViolation {
    NoWorlds,
    RootMissing { root: WorldId },
    /// A relation or valuation entry mentions a world outside `worlds`.
    DanglingWorld { world: WorldId },
    Reflexive { world: WorldId },
    /// `(a, b)` and `(b, c)` are present but `(a, c)` is not.
    NotTransitive { a: WorldId, b: WorldId, c: WorldId },
    /// The transitive closure relates `world` to itself.
    CyclicClosure { world: WorldId },
    Unreachable { world: WorldId },
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::NoWorlds => write!(f, "the model has no worlds"),
            FrameViolation::RootMissing { root } => write!(f, "root {root} is not a world"),
            FrameViolation::DanglingWorld { world } => write!(f, "{world} is used but not declared"),
            FrameViolation::Reflexive { world } => write!(f, "({world},{world}) violates irreflexivity"),
            FrameViolation::NotTransitive { a, b, c } => {
                write!(f, "({a},{b}) and ({b},{c}) present but ({a},{c}) missing")
            }
            FrameViolation::CyclicClosure { world } => {
                write!(f, "transitive closure contains ({world},{world})")
            }
            FrameViolation::Unreachable { world } => write!(f, "world {world} is not above the root"),
        }
    }
}

/// Transitive closure of a relation, by Warshall's algorithm.
pub fn transitive_closure(rel: &BTreeSet<(WorldId, WorldId)>) -> BTreeSet<(WorldId, WorldId)> {
    let nodes: Vec<WorldId> = rel
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx: BTreeMap<WorldId, usize> = nodes.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let n = nodes.len();
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in rel {
        m[idx[&a]][idx[&b]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                out.insert((nodes[i], nodes[j]));
            }
        }
    }
    out
}

impl KripkeModel {
    /// `val` lists, per world, the variables true there.
    pub fn new(
        worlds: impl IntoIterator<Item = WorldId>,
        rel: impl IntoIterator<Item = (WorldId, WorldId)>,
        root: WorldId,
        val: BTreeMap<WorldId, BTreeSet<String>>,
    ) -> Self {
        KripkeModel {
            worlds: worlds.into_iter().collect(),
            rel: rel.into_iter().collect(),
            root,
            val: val.into_iter().filter(|(_, s)| !s.is_empty()).collect(),
        }
    }

    /// A single world with no successors.
    pub fn dead_end<S: AsRef<str>>(true_vars: &[S]) -> Self {
        let mut val = BTreeMap::new();
        val.insert(0, true_vars.iter().map(|s| s.as_ref().to_string()).collect());
        KripkeModel::new([0], [], 0, val)
    }

    /// A linear chain `0 ⊏ 1 ⊏ … ⊏ n-1` (transitively closed);
    /// `true_vars[i]` lists the variables true at world `i`.
    pub fn chain<S: AsRef<str>>(true_vars: &[&[S]]) -> Self {
        let n = true_vars.len() as WorldId;
        let rel = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        let val = true_vars
            .iter()
            .enumerate()
            .map(|(i, vs)| (i as WorldId, vs.iter().map(|s| s.as_ref().to_string()).collect()))
            .collect();
        KripkeModel::new(0..n, rel, 0, val)
    }

    pub fn worlds(&self) -> &BTreeSet<WorldId> {
        &self.worlds
    }

    pub fn rel(&self) -> &BTreeSet<(WorldId, WorldId)> {
        &self.rel
    }

    pub fn root(&self) -> WorldId {
        self.root
    }

    pub fn valuation(&self) -> &BTreeMap<WorldId, BTreeSet<String>> {
        &self.val
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn holds_var(&self, w: WorldId, var: &str) -> bool {
        self.val.get(&w).is_some_and(|s| s.contains(var))
    }

    pub fn successors(&self, w: WorldId) -> impl Iterator<Item = WorldId> + '_ {
        self.rel.range((w, WorldId::MIN)..=(w, WorldId::MAX)).map(|&(_, b)| b)
    }

    pub fn relates(&self, a: WorldId, b: WorldId) -> bool {
        self.rel.contains(&(a, b))
    }

    /// Every violated GL-frame condition; empty when the frame is valid.
    pub fn validate_frame(&self) -> Vec<FrameViolation> {
        let mut out = Vec::new();
        if self.worlds.is_empty() {
            out.push(FrameViolation::NoWorlds);
        }
        if !self.worlds.contains(&self.root) {
            out.push(FrameViolation::RootMissing { root: self.root });
        }
        let dangling: BTreeSet<WorldId> = self
            .rel
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.val.keys().copied())
            .filter(|w| !self.worlds.contains(w))
            .collect();
        out.extend(dangling.into_iter().map(|world| FrameViolation::DanglingWorld { world }));
        for &(a, b) in &self.rel {
            if a == b {
                out.push(FrameViolation::Reflexive { world: a });
            }
        }
        for &(a, b) in &self.rel {
            for c in self.successors(b) {
                if !self.rel.contains(&(a, c)) {
                    out.push(FrameViolation::NotTransitive { a, b, c });
                }
            }
        }
        for (a, b) in transitive_closure(&self.rel) {
            if a == b && !self.rel.contains(&(a, a)) {
                out.push(FrameViolation::CyclicClosure { world: a });
            }
        }
        if self.worlds.contains(&self.root) {
            for &w in &self.worlds {
                if w != self.root && !self.rel.contains(&(self.root, w)) {
                    out.push(FrameViolation::Unreachable { world: w });
                }
            }
        }
        out
    }

    pub fn is_valid_frame(&self) -> bool {
        self.validate_frame().is_empty()
    }

    /// Truth value of `f` at every world, in `worlds()` order.
    pub fn truth_set(&self, f: &Formula) -> BTreeMap<WorldId, bool> {
        let order: Vec<WorldId> = self.worlds.iter().copied().collect();
        let index: BTreeMap<WorldId, usize> = order.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let succ: Vec<Vec<usize>> = order
            .iter()
            .map(|&w| self.successors(w).filter_map(|b| index.get(&b).copied()).collect())
            .collect();
        let values = self.eval_dense(f, &order, &succ);
        order.into_iter().zip(values).collect()
    }

    fn eval_dense(&self, f: &Formula, order: &[WorldId], succ: &[Vec<usize>]) -> Vec<bool> {
        match f {
            Formula::Var(v) => order.iter().map(|&w| self.holds_var(w, v)).collect(),
            Formula::Top => vec![true; order.len()],
            Formula::Bot => vec![false; order.len()],
            Formula::Neg(g) => self.eval_dense(g, order, succ).into_iter().map(|b| !b).collect(),
            Formula::Binary(c, l, r) => {
                let lv = self.eval_dense(l, order, succ);
                let rv = self.eval_dense(r, order, succ);
                lv.into_iter().zip(rv).map(|(a, b)| c.apply(a, b)).collect()
            }
            Formula::Box(g) => {
                let inner = self.eval_dense(g, order, succ);
                succ.iter().map(|s| s.iter().all(|&j| inner[j])).collect()
            }
        }
    }

    /// `w ⊩ f`. Assumes a valid frame.
    pub fn forces(&self, w: WorldId, f: &Formula) -> Result<bool, KripkeError> {
        if !self.worlds.contains(&w) {
            return Err(KripkeError::UnknownWorld(w));
        }
        Ok(self.forces_at(w, f))
    }

    fn forces_at(&self, w: WorldId, f: &Formula) -> bool {
        match f {
            Formula::Var(v) => self.holds_var(w, v),
            Formula::Top => true,
            Formula::Bot => false,
            Formula::Neg(g) => !self.forces_at(w, g),
            Formula::Binary(c, l, r) => c.apply(self.forces_at(w, l), self.forces_at(w, r)),
            Formula::Box(g) => self.successors(w).all(|b| self.forces_at(b, g)),
        }
    }

    pub fn forces_at_root(&self, f: &Formula) -> Result<bool, KripkeError> {
        self.forces(self.root, f)
    }

    /// Whether `f` holds at every world.
    pub fn valid(&self, f: &Formula) -> bool {
        self.truth_set(f).values().all(|&b| b)
    }

    /// Length of the longest `⊏`-path starting at `w`.
    pub fn height(&self, w: WorldId) -> usize {
        self.successors(w).map(|b| 1 + self.height(b)).max().unwrap_or(0)
    }

    /// The least `k` with `root ⊩ []^k #f`; equals the root height plus one.
    pub fn least_box_bot_depth(&self) -> usize {
        (0..=self.worlds.len() + 1)
            .find(|&k| self.forces_at(self.root, &box_n(k, Formula::Bot)))
            .unwrap_or(self.worlds.len() + 1)
    }

    /// Same model with world `w` renamed to `rename(w)`; `rename` must be
    /// injective on the worlds.
    pub fn relabel(&self, rename: impl Fn(WorldId) -> WorldId) -> KripkeModel {
        KripkeModel {
            worlds: self.worlds.iter().map(|&w| rename(w)).collect(),
            rel: self.rel.iter().map(|&(a, b)| (rename(a), rename(b))).collect(),
            root: rename(self.root),
            val: self.val.iter().map(|(&w, s)| (rename(w), s.clone())).collect(),
        }
    }

    /// Worlds in root-first order: root, then the rest ascending.
    pub fn root_first_order(&self) -> Vec<WorldId> {
        std::iter::once(self.root)
            .chain(self.worlds.iter().copied().filter(|&w| w != self.root))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, KripkeError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| KripkeError::Format(e.to_string()))?;
        KripkeModel::try_from(file)
    }
}

/// On-disk shape: `{"worlds":[…],"rel":[[a,b],…],"root":r,"val":{"w":{"p":1}}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: Vec<WorldId>,
    pub rel: Vec<[WorldId; 2]>,
    pub root: WorldId,
    #[serde(default)]
    pub val: BTreeMap<WorldId, BTreeMap<String, u8>>,
}

impl From<&KripkeModel> for ModelFile {
    fn from(m: &KripkeModel) -> Self {
        ModelFile {
            worlds: m.worlds.iter().copied().collect(),
            rel: m.rel.iter().map(|&(a, b)| [a, b]).collect(),
            root: m.root,
            val: m
                .val
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(&w, s)| (w, s.iter().map(|v| (v.clone(), 1u8)).collect()))
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for KripkeModel {
    type Error = KripkeError;

    fn try_from(file: ModelFile) -> Result<Self, Self::Error> {
        let mut val = BTreeMap::new();
        for (w, vars) in file.val {
            let mut set = BTreeSet::new();
            for (var, bit) in vars {
                match bit {
                    0 => {}
                    1 => {
                        set.insert(var);
                    }
                    other => {
                        return Err(KripkeError::Format(format!(
                            "valuation of `{var}` at world {w} is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
            val.insert(w, set);
        }
        Ok(KripkeModel::new(
            file.worlds,
            file.rel.into_iter().map(|[a, b]| (a, b)),
            file.root,
            val,
        ))
    }
}

impl Serialize for KripkeModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for KripkeModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let file = ModelFile::deserialize(d)?;
        KripkeModel::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Every rooted transitive irreflexive model with at most `max_worlds`
/// worlds over `vars`, once per isomorphism class.
///
/// Worlds are labelled `0..n` with root `0` and `a ⊏ b` only when `a < b`;
/// among isomorphic labelled models the lexicographically least
/// encoding is kept. Practical up to four worlds and a few variables.
pub fn enumerate_models<S: AsRef<str>>(max_worlds: usize, vars: &[S]) -> Vec<KripkeModel> {
    let vars: Vec<String> = {
        let set: BTreeSet<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        set.into_iter().collect()
    };
    let mut out = Vec::new();
    for n in 1..=max_worlds {
        let mut seen = BTreeSet::new();
        for frame in rooted_frames(n) {
            let perms = frame_automorphisms(n, &frame);
            let labels = 1u64 << vars.len();
            let total = labels.pow(n as u32);
            for code in 0..total {
                let mut val = vec![0u64; n];
                let mut c = code;
                for slot in val.iter_mut() {
                    *slot = c % labels;
                    c /= labels;
                }
                let canonical = perms
                    .iter()
                    .map(|p| {
                        let mut permuted = vec![0u64; n];
                        for (i, &pi) in p.iter().enumerate() {
                            permuted[pi] = val[i];
                        }
                        permuted
                    })
                    .min()
                    .expect("identity is always an automorphism");
                if canonical != val || !seen.insert((frame.clone(), canonical)) {
                    continue;
                }
                let valuation = (0..n)
                    .map(|w| {
                        let set = vars
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| (val[w] >> k) & 1 == 1)
                            .map(|(_, v)| v.clone())
                            .collect();
                        (w as WorldId, set)
                    })
                    .collect();
                out.push(KripkeModel::new(
                    0..n as WorldId,
                    frame.iter().map(|&(a, b)| (a as WorldId, b as WorldId)),
                    0,
                    valuation,
                ));
            }
        }
    }
    out
}

type Frame = BTreeSet<(usize, usize)>;

/// Rooted strict partial orders on `0..n` with root 0 and a topological
/// labelling, one per isomorphism class.
fn rooted_frames(n: usize) -> Vec<Frame> {
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut classes: BTreeSet<Frame> = BTreeSet::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut rel: Frame = (1..n).map(|b| (0, b)).collect();
        for (i, &p) in pairs.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                rel.insert(p);
            }
        }
        let transitive = rel
            .iter()
            .all(|&(a, b)| rel.iter().filter(|&&(x, _)| x == b).all(|&(_, c)| rel.contains(&(a, c))));
        if !transitive {
            continue;
        }
        classes.insert(canonical_frame(n, &rel));
    }
    classes.into_iter().collect()
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in permutations(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Permutations of `0..n` fixing 0.
fn root_fixing_permutations(n: usize) -> Vec<Vec<usize>> {
    permutations((1..n).collect())
        .into_iter()
        .map(|mut p| {
            p.insert(0, 0);
            p
        })
        .collect()
}

fn apply_perm(rel: &Frame, p: &[usize]) -> Frame {
    rel.iter().map(|&(a, b)| (p[a], p[b])).collect()
}

fn canonical_frame(n: usize, rel: &Frame) -> Frame {
    root_fixing_permutations(n)
        .iter()
        .map(|p| apply_perm(rel, p))
        .filter(|r| r.iter().all(|&(a, b)| a < b))
        .min()
        .expect("a topological relabelling always exists")
}

fn frame_automorphisms(n: usize, rel: &Frame) -> Vec<Vec<usize>> {
    root_fixing_permutations(n)
        .into_iter()
        .filter(|p| apply_perm(rel, p) == *rel)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{diamond_n, parse_formula};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn two_chain_p_on_top() -> KripkeModel {
        KripkeModel::chain(&[&[] as &[&str], &["p"]])
    }

    #[test]
    fn frame_validation_examples() {
        assert!(KripkeModel::dead_end::<&str>(&[]).validate_frame().is_empty());

        let cyclic = KripkeModel::new([0, 1], [(0, 1), (1, 0)], 0, BTreeMap::new());
        let v = cyclic.validate_frame();
        assert!(v.contains(&FrameViolation::CyclicClosure { world: 0 }), "{v:?}");

        let broken = KripkeModel::new([0, 1, 2], [(0, 1), (1, 2)], 0, BTreeMap::new());
        let v = broken.validate_frame();
        assert!(v.contains(&FrameViolation::NotTransitive { a: 0, b: 1, c: 2 }), "{v:?}");
        assert!(v.contains(&FrameViolation::Unreachable { world: 2 }));

        let reflexive = KripkeModel::new([0], [(0, 0)], 0, BTreeMap::new());
        assert!(reflexive.validate_frame().contains(&FrameViolation::Reflexive { world: 0 }));

        let rootless = KripkeModel::new([1], [], 0, BTreeMap::new());
        assert!(rootless.validate_frame().contains(&FrameViolation::RootMissing { root: 0 }));
    }

    #[test]
    fn forcing_examples() {
        let dead = KripkeModel::dead_end::<&str>(&[]);
        assert!(dead.forces(0, &f("[]#f")).unwrap());
        for k in 1..5 {
            assert!(dead.forces_at_root(&box_n(k, Formula::Bot)).unwrap());
        }

        let m = two_chain_p_on_top();
        assert!(m.forces(0, &f("[]p")).unwrap());
        assert!(!m.forces(0, &f("p")).unwrap());
        assert!(m.forces(0, &f("<>#t")).unwrap());
        assert!(m.forces_at_root(&f("[][]#f")).unwrap());
        assert!(!m.forces_at_root(&f("<><>#t")).unwrap());
        assert_eq!(m.forces(7, &f("p")), Err(KripkeError::UnknownWorld(7)));
    }

    #[test]
    fn truth_set_agrees_with_forces() {
        let m = KripkeModel::chain(&[&["q"] as &[&str], &["p"], &["p", "q"]]);
        for src in ["[]p", "<>q", "[](p -> q)", "[]([]p -> p) -> []p", "p <-> <>#t"] {
            let g = f(src);
            for (w, v) in m.truth_set(&g) {
                assert_eq!(m.forces(w, &g).unwrap(), v, "{src} at {w}");
            }
        }
    }

    #[test]
    fn heights_and_depth() {
        let m = KripkeModel::chain(&[&[] as &[&str], &[], &[]]);
        assert_eq!(m.height(0), 2);
        assert_eq!(m.least_box_bot_depth(), 3);
        assert!(m.forces_at_root(&diamond_n(2, Formula::Top)).unwrap());
        assert_eq!(KripkeModel::dead_end::<&str>(&[]).least_box_bot_depth(), 1);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_models::<&str>(1, &[]).len(), 1);
        assert_eq!(enumerate_models(1, &["p"]).len(), 2);
        // one world, or a two-chain: the only rooted two-world frame
        assert_eq!(enumerate_models::<&str>(2, &[]).len(), 2);
        // frames: 1 + 1 + 2 (three-chain, fork) + 5 (rooted posets over 3)
        assert_eq!(enumerate_models::<&str>(4, &[]).len(), 9);
    }

    #[test]
    fn enumerated_models_are_valid_and_distinct() {
        let ms = enumerate_models(3, &["p"]);
        let set: BTreeSet<_> = ms.iter().cloned().collect();
        assert_eq!(set.len(), ms.len());
        for m in &ms {
            assert!(m.is_valid_frame(), "{m:?}");
        }
        // one world: 2; two-chain: 4; three-chain: 8; fork with swap symmetry: 2*3 = 6
        assert_eq!(ms.len(), 2 + 4 + 8 + 6);
    }

    #[test]
    fn lob_holds_on_enumerated_models() {
        let lob = f("[]([]p -> p) -> []p");
        for m in enumerate_models(4, &["p"]) {
            assert!(m.forces_at_root(&lob).unwrap());
        }
    }

    #[test]
    fn json_round_trip_and_format() {
        let m = two_chain_p_on_top();
        let text = m.to_json();
        assert_eq!(text, r#"{"worlds":[0,1],"rel":[[0,1]],"root":0,"val":{"1":{"p":1}}}"#);
        assert_eq!(KripkeModel::from_json(&text).unwrap(), m);
        let zero = r#"{"worlds":[0],"rel":[],"root":0,"val":{"0":{"p":0}}}"#;
        assert!(!KripkeModel::from_json(zero).unwrap().holds_var(0, "p"));
        let bad = r#"{"worlds":[0],"rel":[],"root":0,"val":{"0":{"p":2}}}"#;
        assert!(KripkeModel::from_json(bad).is_err());
    }

    #[test]
    fn closure_helper() {
        let rel: BTreeSet<_> = [(0, 1), (1, 2), (2, 3)].into_iter().collect();
        let c = transitive_closure(&rel);
        assert_eq!(c.len(), 6);
        assert!(c.contains(&(0, 3)));
    }
}
