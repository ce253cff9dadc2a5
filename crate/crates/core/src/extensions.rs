//! GLS, the `[]A` / `![]A` fragments of GL_ω and GL + {!F_s}, each decided
//! by reduction to GL; and the nontrifling classifier.

use serde::Serialize;

use crate::formula::{diamond_n, f_s, Formula};
use crate::glprover::{gl_proves_with_budget, ProverError, DEFAULT_NODE_BUDGET};

/// Prover settings shared by every reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deciders {
    pub budget: u64,
}

impl Default for Deciders {
    fn default() -> Self {
        Deciders {
            budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "k", rename_all = "snake_case")]
pub enum BoundedProof {
    /// Least `k` with `GL ⊢ <>^k #t -> b`.
    Proved(usize),
    /// No `k ≤ k_max` worked; not a disproof.
    Unknown(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoxPair {
    pub boxed: bool,
    pub negboxed: bool,
}

impl BoxPair {
    /// Neither `[]a` nor `![]a` is provable.
    pub fn undecided(self) -> bool {
        !self.boxed && !self.negboxed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HeightPair {
    pub s_used: usize,
    pub boxed: bool,
    pub negboxed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GlPair {
    /// `GL ⊢ a`.
    pub gl_a: bool,
    /// `GL ⊢ ⋀Rf([]a) -> ![]a`.
    pub gl_rf_negbox: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NontriflingReport {
    pub formula: Formula,
    pub verdict: bool,
    /// GL_ω proves `[]a` / `![]a`.
    pub char2: BoxPair,
    /// GLS proves `[]a` / `![]a`.
    pub char3: BoxPair,
    /// GL + {!F_s} proves `[]a` / `![]a`.
    pub char4: HeightPair,
    pub char5: GlPair,
    pub char1_bounded: BoundedProof,
}

impl NontriflingReport {
    /// Whether the four decidable characterizations give the same verdict.
    pub fn characterizations_agree(&self) -> bool {
        let v = [
            self.char2.undecided(),
            self.char3.undecided(),
            !self.char4.boxed && !self.char4.negboxed,
            !self.char5.gl_a && !self.char5.gl_rf_negbox,
        ];
        v.iter().all(|&x| x == self.verdict)
    }

    /// A bounded GL_ω proof of `[][]a -> []a` must not coexist with a
    /// nontrifling verdict.
    pub fn probe_consistent(&self) -> bool {
        !(self.verdict && matches!(self.char1_bounded, BoundedProof::Proved(_)))
    }
}

impl Deciders {
    pub fn gl(&self, f: &Formula) -> Result<bool, ProverError> {
        Ok(gl_proves_with_budget(f, self.budget)?.is_proved())
    }

    /// `GLS ⊢ f` iff `GL ⊢ ⋀Rf(f) -> f`.
    pub fn gls_proves(&self, f: &Formula) -> Result<bool, ProverError> {
        let reflection = Formula::conjunction(f.rf());
        self.gl(&Formula::implies(reflection, f.clone()))
    }

    /// `GL_ω ⊢ []a` iff `GL ⊢ a`.
    pub fn glw_proves_box(&self, a: &Formula) -> Result<bool, ProverError> {
        self.gl(a)
    }

    /// `GL_ω ⊢ ![]a` iff `GL ⊢ <>^(cx(a)+1) #t -> ![]a`.
    pub fn glw_proves_negbox(&self, a: &Formula) -> Result<bool, ProverError> {
        let ante = diamond_n(a.cx() + 1, Formula::Top);
        self.gl(&Formula::implies(ante, Formula::neg(Formula::boxed(a.clone()))))
    }

    /// `GL + {!F_s} ⊢ b` iff `GL ⊢ !F_s -> b`.
    pub fn glnfs_proves(&self, s: usize, b: &Formula) -> Result<bool, ProverError> {
        self.gl(&Formula::implies(Formula::neg(f_s(s)), b.clone()))
    }

    /// Searches `k = 0..=k_max` for `GL ⊢ <>^k #t -> b`.
    pub fn glw_proves_bounded(&self, b: &Formula, k_max: usize) -> Result<BoundedProof, ProverError> {
        for k in 0..=k_max {
            let f = if k == 0 {
                b.clone()
            } else {
                Formula::implies(diamond_n(k, Formula::Top), b.clone())
            };
            if self.gl(&f)? {
                return Ok(BoundedProof::Proved(k));
            }
        }
        Ok(BoundedProof::Unknown(k_max))
    }

    pub fn nontrifling(&self, a: &Formula) -> Result<NontriflingReport, ProverError> {
        let boxed = Formula::boxed(a.clone());
        let negboxed = Formula::neg(boxed.clone());
        let char2 = BoxPair {
            boxed: self.glw_proves_box(a)?,
            negboxed: self.glw_proves_negbox(a)?,
        };
        let char3 = BoxPair {
            boxed: self.gls_proves(&boxed)?,
            negboxed: self.gls_proves(&negboxed)?,
        };
        let s = a.cx() + 1;
        let char4 = HeightPair {
            s_used: s,
            boxed: self.glnfs_proves(s, &boxed)?,
            negboxed: self.glnfs_proves(s, &negboxed)?,
        };
        let rf_box = Formula::conjunction(boxed.rf());
        let char5 = GlPair {
            gl_a: self.gl(a)?,
            gl_rf_negbox: self.gl(&Formula::implies(rf_box, negboxed.clone()))?,
        };
        let probe = Formula::implies(Formula::boxed(boxed.clone()), boxed);
        let char1_bounded = self.glw_proves_bounded(&probe, a.cx() + 2)?;
        Ok(NontriflingReport {
            formula: a.clone(),
            verdict: char2.undecided(),
            char2,
            char3,
            char4,
            char5,
            char1_bounded,
        })
    }
}

pub fn gls_proves(f: &Formula) -> Result<bool, ProverError> {
    Deciders::default().gls_proves(f)
}

pub fn glw_proves_box(a: &Formula) -> Result<bool, ProverError> {
    Deciders::default().glw_proves_box(a)
}

pub fn glw_proves_negbox(a: &Formula) -> Result<bool, ProverError> {
    Deciders::default().glw_proves_negbox(a)
}

pub fn glnfs_proves(s: usize, b: &Formula) -> Result<bool, ProverError> {
    Deciders::default().glnfs_proves(s, b)
}

pub fn glw_proves_bounded(b: &Formula, k_max: usize) -> Result<BoundedProof, ProverError> {
    Deciders::default().glw_proves_bounded(b, k_max)
}

pub fn nontrifling(a: &Formula) -> Result<NontriflingReport, ProverError> {
    Deciders::default().nontrifling(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn gls_examples() {
        assert!(gls_proves(&f("[]p -> p")).unwrap());
        assert!(gls_proves(&f("![]#f")).unwrap());
        assert!(!gls_proves(&f("p")).unwrap());
        assert!(gls_proves(&f("#t")).unwrap());
    }

    #[test]
    fn glw_box_examples() {
        assert!(glw_proves_box(&f("#t")).unwrap());
        assert!(glw_proves_box(&f("[]([]p -> p) -> []p")).unwrap());
        assert!(!glw_proves_box(&f("p")).unwrap());
    }

    #[test]
    fn glw_negbox_examples() {
        assert!(glw_proves_negbox(&f("#f")).unwrap());
        assert!(!glw_proves_negbox(&f("#t")).unwrap());
        assert!(glw_proves_negbox(&f("[]#f")).unwrap());
        assert!(!glw_proves_negbox(&f("p")).unwrap());
    }

    #[test]
    fn glnfs_examples() {
        // !F_1 = [][]#f & ![]#f, which contradicts ![][]#f
        assert!(!glnfs_proves(1, &f("![][]#f")).unwrap());
        assert!(glnfs_proves(1, &f("[][]#f")).unwrap());
        for s in 0..4 {
            assert!(glnfs_proves(s, &f("#t")).unwrap());
        }
        assert!(glnfs_proves(0, &f("[]#f")).unwrap());
    }

    #[test]
    fn bounded_examples() {
        assert_eq!(glw_proves_bounded(&f("![]#f"), 3).unwrap(), BoundedProof::Proved(1));
        assert_eq!(glw_proves_bounded(&f("#t"), 3).unwrap(), BoundedProof::Proved(0));
        assert_eq!(glw_proves_bounded(&f("p"), 3).unwrap(), BoundedProof::Unknown(3));
    }

    #[test]
    fn nontrifling_examples() {
        for (src, expected) in [("p", true), ("#t", false), ("[]p -> p", true), ("#f", false), ("[]#f", false)] {
            let r = nontrifling(&f(src)).unwrap();
            assert_eq!(r.verdict, expected, "{src}");
            assert!(r.characterizations_agree(), "{r:?}");
            assert!(r.probe_consistent(), "{r:?}");
        }
        let r = nontrifling(&f("p")).unwrap();
        assert_eq!(r.char4.s_used, 1);
        assert_eq!(r.char1_bounded, BoundedProof::Unknown(2));
    }

    #[test]
    fn trifling_formula_has_bounded_witness() {
        let r = nontrifling(&f("#t")).unwrap();
        assert_eq!(r.char1_bounded, BoundedProof::Proved(0));
    }

    #[test]
    fn report_serializes_all_clauses() {
        let r = nontrifling(&f("p")).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["verdict", "char1_bounded", "char2", "char3", "char4", "char5"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["char1_bounded"]["status"], "unknown");
    }
}
