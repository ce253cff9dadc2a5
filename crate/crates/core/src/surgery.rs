//! Model merges used in the nontrifling and main-theorem proofs, with
//! every asserted forcing fact re-checked in the merged model.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::formula::{box_n, diamond_n, Formula};
use crate::kripke::{transitive_closure, FrameViolation, KripkeModel, WorldId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurgeryError {
    #[error("precondition failed: {0}")]
    PreconditionFail(String),
    #[error("claim failed at world {world}: {formula} expected {expected}, got {actual}")]
    ClaimFail {
        world: WorldId,
        formula: Formula,
        expected: bool,
        actual: bool,
    },
    #[error("input model `{which}` is not a GL model: {violations:?}")]
    InvalidModel {
        which: String,
        violations: Vec<FrameViolation>,
    },
    #[error("root height {height} already exceeds the target {target}")]
    ImpossibleExtension { height: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub world: WorldId,
    pub formula: Formula,
    pub expected: bool,
    pub actual: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeCertificate {
    pub model: KripkeModel,
    pub checked_claims: Vec<Claim>,
    /// Named worlds of the construction, e.g. `r*`, `r_0`, `<1,1>`.
    pub landmarks: BTreeMap<String, WorldId>,
}

impl MergeCertificate {
    pub fn all_pass(&self) -> bool {
        self.checked_claims.iter().all(|c| c.expected == c.actual)
    }

    pub fn landmark(&self, name: &str) -> WorldId {
        self.landmarks[name]
    }
}

struct Checker<'a> {
    model: &'a KripkeModel,
    claims: Vec<Claim>,
}

impl Checker<'_> {
    fn check(&mut self, world: WorldId, formula: Formula, expected: bool) -> Result<(), SurgeryError> {
        let actual = self.model.forces(world, &formula).expect("landmark is a world");
        if actual != expected {
            return Err(SurgeryError::ClaimFail {
                world,
                formula,
                expected,
                actual,
            });
        }
        self.claims.push(Claim {
            world,
            formula,
            expected,
            actual,
        });
        Ok(())
    }
}

fn require_valid(which: &str, m: &KripkeModel) -> Result<(), SurgeryError> {
    let violations = m.validate_frame();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SurgeryError::InvalidModel {
            which: which.to_string(),
            violations,
        })
    }
}

fn require_root(which: &str, m: &KripkeModel, f: &Formula) -> Result<(), SurgeryError> {
    if m.forces_at_root(f).expect("valid model has its root") {
        Ok(())
    } else {
        Err(SurgeryError::PreconditionFail(format!("root of {which} does not force {f}")))
    }
}

fn rf_conj(f: &Formula) -> Formula {
    Formula::conjunction(f.rf())
}

/// Copies `m` into `rel`/`val` with world `w` renamed to `rename[w]`.
fn embed(
    m: &KripkeModel,
    rename: &BTreeMap<WorldId, WorldId>,
    rel: &mut BTreeSet<(WorldId, WorldId)>,
    val: &mut BTreeMap<WorldId, BTreeSet<String>>,
) {
    for &(a, b) in m.rel() {
        rel.insert((rename[&a], rename[&b]));
    }
    for &w in m.worlds() {
        val.insert(rename[&w], m.valuation().get(&w).cloned().unwrap_or_default());
    }
}

/// The model `M*`: a new root `r*` below both `m`'s root `r` and a chain
/// `r_L ⊏ … ⊏ r_1 ⊏ r_0`, where `r_0` is `m0`'s root. The infinite chain is
/// cut at `chain_len`.
///
/// Worlds: `r* = 0`, `r_i = i` for `1 ≤ i ≤ chain_len`, then `m`'s worlds,
/// then `m0`'s, each root first.
pub fn merge_nontrifling(
    m: &KripkeModel,
    m0: &KripkeModel,
    a: &Formula,
    chain_len: usize,
) -> Result<MergeCertificate, SurgeryError> {
    require_valid("M", m)?;
    require_valid("M_0", m0)?;
    let boxed = Formula::boxed(a.clone());
    let m_root = Formula::and(boxed.clone(), Formula::neg(a.clone()));
    let m0_root = Formula::and(rf_conj(&boxed), boxed.clone());
    require_root("M", m, &m_root)?;
    require_root("M_0", m0, &m0_root)?;

    let len = chain_len as WorldId;
    let mut next = len + 1;
    let mut rename = |model: &KripkeModel| -> BTreeMap<WorldId, WorldId> {
        model
            .root_first_order()
            .into_iter()
            .map(|w| {
                let id = next;
                next += 1;
                (w, id)
            })
            .collect()
    };
    let rm = rename(m);
    let rm0 = rename(m0);
    let r = rm[&m.root()];
    let r0 = rm0[&m0.root()];

    let mut rel = BTreeSet::new();
    let mut val = BTreeMap::new();
    embed(m, &rm, &mut rel, &mut val);
    embed(m0, &rm0, &mut rel, &mut val);
    // chain[i] is r_i
    let chain: Vec<WorldId> = std::iter::once(r0).chain(1..=len).collect();
    for i in 0..chain.len() {
        for j in 0..i {
            rel.insert((chain[i], chain[j]));
        }
        rel.insert((0, chain[i]));
    }
    rel.insert((0, r));
    let copied = val.get(&r0).cloned().unwrap_or_default();
    for w in std::iter::once(0).chain(1..=len) {
        val.insert(w, copied.clone());
    }
    let worlds: Vec<WorldId> = (0..next).collect();
    let model = KripkeModel::new(worlds, transitive_closure(&rel), 0, val);
    require_valid("M*", &model)?;

    let mut ck = Checker {
        model: &model,
        claims: Vec::new(),
    };
    ck.check(r, m_root, true)?;
    ck.check(r0, m0_root, true)?;
    let subs = boxed.subformulas();
    for &ri in &chain[1..] {
        for b in &subs {
            let expected = model.forces(r0, b).expect("r_0 is a world");
            ck.check(ri, b.clone(), expected)?;
        }
    }
    ck.check(0, Formula::boxed(boxed.clone()), true)?;
    ck.check(0, boxed.clone(), false)?;
    ck.check(0, diamond_n(chain_len, Formula::Top), true)?;
    ck.check(0, Formula::implies(Formula::boxed(boxed.clone()), boxed), false)?;
    let claims = ck.claims;

    let mut landmarks = BTreeMap::new();
    landmarks.insert("r*".to_string(), 0);
    landmarks.insert("r".to_string(), r);
    for (i, &w) in chain.iter().enumerate() {
        landmarks.insert(format!("r_{i}"), w);
    }
    Ok(MergeCertificate {
        model,
        checked_claims: claims,
        landmarks,
    })
}

/// Id of the pair `<i,j>`; 0 is left for the root.
pub fn pair_id(i: u32, j: u32) -> WorldId {
    1 + i + 2 * j
}

/// Inverse of [`pair_id`]; `None` for the root 0.
pub fn unpair(w: WorldId) -> Option<(u32, u32)> {
    if w == 0 {
        None
    } else {
        Some(((w - 1) % 2, (w - 1) / 2))
    }
}

/// The `M'` shape: root 0 below `<0,0>` and `<1,0>`, which sit below the
/// copies `<i,1>, …, <i,n_i>` of `m_i` (root first). Every variable holds
/// at 0; `<i,0>` copies `<i,1>`.
pub fn build_m_prime(m0: &KripkeModel, m1: &KripkeModel, extra_vars: &BTreeSet<String>) -> KripkeModel {
    let mut rel = BTreeSet::new();
    let mut val = BTreeMap::new();
    let mut all_vars = extra_vars.clone();
    let mut worlds = vec![0, pair_id(0, 0), pair_id(1, 0)];
    for (i, m) in [m0, m1].into_iter().enumerate() {
        let i = i as u32;
        let rename: BTreeMap<WorldId, WorldId> = m
            .root_first_order()
            .into_iter()
            .enumerate()
            .map(|(k, w)| (w, pair_id(i, k as u32 + 1)))
            .collect();
        embed(m, &rename, &mut rel, &mut val);
        for s in m.valuation().values() {
            all_vars.extend(s.iter().cloned());
        }
        for &w in rename.values() {
            rel.insert((pair_id(i, 0), w));
            worlds.push(w);
        }
        let root_val = val.get(&pair_id(i, 1)).cloned().unwrap_or_default();
        val.insert(pair_id(i, 0), root_val);
    }
    for &w in &worlds[1..] {
        rel.insert((0, w));
    }
    val.insert(0, all_vars);
    KripkeModel::new(worlds, transitive_closure(&rel), 0, val)
}

fn pair_landmarks() -> BTreeMap<String, WorldId> {
    let mut landmarks = BTreeMap::new();
    landmarks.insert("0".to_string(), 0);
    for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        landmarks.insert(format!("<{i},{j}>"), pair_id(i, j));
    }
    landmarks
}

/// Main-theorem merge. Requires `m0`'s root to force
/// `[]^(cx(a)+1) #f & !a` and `m1`'s root to force `⋀Rf([]a) & []a`.
pub fn merge_mt(m0: &KripkeModel, m1: &KripkeModel, a: &Formula) -> Result<MergeCertificate, SurgeryError> {
    require_valid("M_0", m0)?;
    require_valid("M_1", m1)?;
    let boxed = Formula::boxed(a.clone());
    let left = Formula::and(box_n(a.cx() + 1, Formula::Bot), Formula::neg(a.clone()));
    let right_pre = Formula::and(rf_conj(&boxed), boxed.clone());
    require_root("M_0", m0, &left)?;
    require_root("M_1", m1, &right_pre)?;

    let model = build_m_prime(m0, m1, &a.vars());
    require_valid("M'", &model)?;
    let mut ck = Checker {
        model: &model,
        claims: Vec::new(),
    };
    ck.check(pair_id(0, 1), left, true)?;
    let negboxed = Formula::neg(boxed.clone());
    ck.check(pair_id(1, 1), Formula::and(rf_conj(&negboxed), boxed), true)?;
    let claims = ck.claims;
    Ok(MergeCertificate {
        model,
        checked_claims: claims,
        landmarks: pair_landmarks(),
    })
}

/// Height-`s` variant: both roots must force `[]^(s+1) #f & <>^s #t`, with
/// `![]a` at `m0` and `[]a` at `m1`.
pub fn merge_mt4(
    m0: &KripkeModel,
    m1: &KripkeModel,
    a: &Formula,
    s: usize,
) -> Result<MergeCertificate, SurgeryError> {
    require_valid("M_0", m0)?;
    require_valid("M_1", m1)?;
    let boxed = Formula::boxed(a.clone());
    let height = Formula::and(box_n(s + 1, Formula::Bot), diamond_n(s, Formula::Top));
    let left = Formula::and(height.clone(), Formula::neg(boxed.clone()));
    let right = Formula::and(height, boxed);
    require_root("M_0", m0, &left)?;
    require_root("M_1", m1, &right)?;

    let model = build_m_prime(m0, m1, &a.vars());
    require_valid("M'", &model)?;
    let mut ck = Checker {
        model: &model,
        claims: Vec::new(),
    };
    ck.check(pair_id(0, 1), left, true)?;
    ck.check(pair_id(1, 1), right, true)?;
    let claims = ck.claims;
    Ok(MergeCertificate {
        model,
        checked_claims: claims,
        landmarks: pair_landmarks(),
    })
}

/// Puts a chain of fresh worlds below the root so that the new root
/// forces `[]^(s+1) #f & <>^s #t`. New worlds copy the old root's
/// valuation and take ids above the existing ones.
pub fn chain_extend(m: &KripkeModel, target_s: usize) -> Result<KripkeModel, SurgeryError> {
    require_valid("M", m)?;
    let height = m.height(m.root());
    if height > target_s {
        return Err(SurgeryError::ImpossibleExtension {
            height,
            target: target_s,
        });
    }
    let extra = (target_s - height) as WorldId;
    let base = m.worlds().iter().max().copied().unwrap_or(0) + 1;
    // new worlds base..base+extra, the last one being the new root
    let new: Vec<WorldId> = (base..base + extra).collect();
    let mut rel: BTreeSet<(WorldId, WorldId)> = m.rel().clone();
    let mut val = m.valuation().clone();
    let root_val = val.get(&m.root()).cloned().unwrap_or_default();
    for (k, &w) in new.iter().enumerate() {
        for &v in m.worlds() {
            rel.insert((w, v));
        }
        for &below in &new[..k] {
            rel.insert((w, below));
        }
        val.insert(w, root_val.clone());
    }
    let root = new.last().copied().unwrap_or(m.root());
    let worlds = m.worlds().iter().copied().chain(new.iter().copied());
    let out = KripkeModel::new(worlds, rel, root, val);
    require_valid("extended model", &out)?;
    let want = Formula::and(box_n(target_s + 1, Formula::Bot), diamond_n(target_s, Formula::Top));
    let actual = out.forces_at_root(&want).expect("root exists");
    if !actual {
        return Err(SurgeryError::ClaimFail {
            world: root,
            formula: want,
            expected: true,
            actual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn two_chain(top: &[&str]) -> KripkeModel {
        KripkeModel::chain(&[&[], top])
    }

    #[test]
    fn pair_coding() {
        assert_eq!(pair_id(0, 0), 1);
        assert_eq!(pair_id(1, 0), 2);
        assert_eq!(pair_id(0, 1), 3);
        assert_eq!(pair_id(1, 1), 4);
        for w in 1..50 {
            let (i, j) = unpair(w).unwrap();
            assert_eq!(pair_id(i, j), w);
        }
        assert_eq!(unpair(0), None);
    }

    #[test]
    fn nontrifling_merge_witness() {
        let a = f("[]p -> p");
        let m = two_chain(&["p"]);
        let m0 = KripkeModel::dead_end(&["p"]);
        for len in 0..=5 {
            let cert = merge_nontrifling(&m, &m0, &a, len).unwrap();
            assert!(cert.all_pass());
            assert!(cert.model.is_valid_frame());
            assert_eq!(cert.model.len(), 1 + len + 2 + 1);
            assert!(cert.landmarks.contains_key(&format!("r_{len}")));
        }
    }

    #[test]
    fn nontrifling_merge_rejects_theorem() {
        let m = KripkeModel::dead_end::<&str>(&[]);
        let err = merge_nontrifling(&m, &m, &Formula::Top, 2).unwrap_err();
        assert!(matches!(err, SurgeryError::PreconditionFail(_)));
    }

    #[test]
    fn mt_merge_witness() {
        let a = f("[]p -> p");
        let m0 = two_chain(&["p"]);
        let m1 = KripkeModel::dead_end(&["p"]);
        let cert = merge_mt(&m0, &m1, &a).unwrap();
        assert!(cert.all_pass());
        assert_eq!(cert.model.len(), 6);
        assert!(cert.model.holds_var(0, "p"));
        assert!(cert.model.relates(pair_id(0, 0), pair_id(0, 2)));
        assert!(!cert.model.relates(pair_id(0, 0), pair_id(1, 1)));
        // <1,0> copies <1,1>
        assert!(cert.model.holds_var(pair_id(1, 0), "p"));
    }

    #[test]
    fn mt_merge_precondition() {
        let a = f("[]p -> p");
        let m1 = KripkeModel::dead_end(&["p"]);
        let err = merge_mt(&m1, &m1, &a).unwrap_err();
        assert!(matches!(err, SurgeryError::PreconditionFail(_)));
    }

    #[test]
    fn mt4_examples() {
        let a = f("p");
        let m0 = two_chain(&[]);
        let m1 = two_chain(&["p"]);
        assert!(merge_mt4(&m0, &m1, &a, 1).unwrap().all_pass());
        let single = KripkeModel::dead_end::<&str>(&[]);
        assert!(matches!(
            merge_mt4(&single, &m1, &a, 0),
            Err(SurgeryError::PreconditionFail(_))
        ));
        assert!(matches!(merge_mt4(&m0, &m1, &a, 2), Err(SurgeryError::PreconditionFail(_))));
    }

    #[test]
    fn chain_extension() {
        let dead = KripkeModel::dead_end(&["q"]);
        let ext = chain_extend(&dead, 2).unwrap();
        assert_eq!(ext.len(), 3);
        assert!(ext.forces_at_root(&f("[][][]#f & <><>#t")).unwrap());
        assert!(ext.holds_var(ext.root(), "q"));
        assert_eq!(chain_extend(&dead, 0).unwrap(), dead);
        assert_eq!(
            chain_extend(&two_chain(&[]), 0),
            Err(SurgeryError::ImpossibleExtension { height: 1, target: 0 })
        );
    }

    #[test]
    fn invalid_input_is_reported() {
        let bad = KripkeModel::new([0, 1], [(0, 1), (1, 0)], 0, BTreeMap::new());
        let ok = KripkeModel::dead_end(&["p"]);
        assert!(matches!(
            merge_mt(&bad, &ok, &f("p")),
            Err(SurgeryError::InvalidModel { .. })
        ));
    }
}
