//! Truth-table semantics for box-free formulas and the two synthesizers
//! that turn a contingent formula `A` into substitution instances `B_i(r)`
//! with `⊨ r <-> A(B_1(r), …, B_n(r))`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Connective, Formula, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("formula is not box-free: {0}")]
    NotBoxFree(Formula),
    #[error("assignment does not cover variable `{0}`")]
    MissingVariable(String),
    #[error("variable `{0}` occurs in the formula and cannot serve as the fresh variable")]
    VariableNotFresh(String),
    #[error("variable `{0}` does not occur in the formula")]
    UnknownVariable(String),
    #[error("formula is {0}, not contingent")]
    NotContingent(Classification),
    #[error("specialization {0} is not contingent")]
    ConditionFails(Assignment),
    #[error("synthesized substitution failed its own verification")]
    VerificationFailed,
}

/// A truth assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<String, bool>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: impl Into<String>, value: bool) {
        self.0.insert(var.into(), value);
    }

    pub fn get(&self, var: &str) -> Option<bool> {
        self.0.get(var).copied()
    }

    /// The assignment at `index` in the lexicographic order over `vars`,
    /// first variable most significant, `false < true`.
    pub fn from_index(vars: &[String], index: u64) -> Self {
        let n = vars.len();
        let mut a = Assignment::new();
        for (k, v) in vars.iter().enumerate() {
            a.set(v.clone(), (index >> (n - 1 - k)) & 1 == 1);
        }
        a
    }
}

impl<const N: usize> From<[(&str, bool); N]> for Assignment {
    fn from(items: [(&str, bool); N]) -> Self {
        Assignment(items.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:{}", u8::from(*v))?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Tautology,
    Unsatisfiable,
    Contingent,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Tautology => "a tautology",
            Classification::Unsatisfiable => "unsatisfiable",
            Classification::Contingent => "contingent",
        })
    }
}

fn require_box_free(f: &Formula) -> Result<(), ClassicalError> {
    if f.is_box_free() {
        Ok(())
    } else {
        Err(ClassicalError::NotBoxFree(f.clone()))
    }
}

/// Classical truth value of a box-free formula.
pub fn evaluate(f: &Formula, a: &Assignment) -> Result<bool, ClassicalError> {
    match f {
        Formula::Var(v) => a
            .get(v)
            .ok_or_else(|| ClassicalError::MissingVariable(v.clone())),
        Formula::Top => Ok(true),
        Formula::Bot => Ok(false),
        Formula::Neg(g) => Ok(!evaluate(g, a)?),
        Formula::Binary(c, l, r) => Ok(c.apply(evaluate(l, a)?, evaluate(r, a)?)),
        Formula::Box(_) => Err(ClassicalError::NotBoxFree(f.clone())),
    }
}

/// Bit-parallel truth table: bit `i` is the value under
/// `Assignment::from_index(vars, i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    vars: Vec<String>,
    rows: u64,
    words: Vec<u64>,
}

impl TruthTable {
    /// Tabulates `f` over `vars`, which must include every variable of `f`.
    pub fn build(f: &Formula, vars: &[String]) -> Result<Self, ClassicalError> {
        require_box_free(f)?;
        assert!(vars.len() < 32, "truth tables are limited to 31 variables");
        let rows = 1u64 << vars.len();
        let nwords = rows.div_ceil(64) as usize;
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let words = tabulate(f, vars.len(), rows, nwords, &index)?;
        Ok(TruthTable {
            vars: vars.to_vec(),
            rows,
            words,
        })
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn value(&self, row: u64) -> bool {
        (self.words[(row / 64) as usize] >> (row % 64)) & 1 == 1
    }

    pub fn first_row(&self, value: bool) -> Option<u64> {
        (0..self.rows).find(|&i| self.value(i) == value)
    }

    pub fn classification(&self) -> Classification {
        match (self.first_row(true), self.first_row(false)) {
            (Some(_), None) => Classification::Tautology,
            (None, Some(_)) => Classification::Unsatisfiable,
            _ => Classification::Contingent,
        }
    }

    pub fn assignment(&self, row: u64) -> Assignment {
        Assignment::from_index(&self.vars, row)
    }
}

fn tabulate(
    f: &Formula,
    n: usize,
    rows: u64,
    nwords: usize,
    index: &BTreeMap<&str, usize>,
) -> Result<Vec<u64>, ClassicalError> {
    let mask_tail = |mut w: Vec<u64>| {
        if rows < 64 {
            w[0] &= (1u64 << rows) - 1;
        }
        w
    };
    Ok(match f {
        Formula::Top => mask_tail(vec![u64::MAX; nwords]),
        Formula::Bot => vec![0; nwords],
        Formula::Var(v) => {
            let k = *index
                .get(v.as_str())
                .ok_or_else(|| ClassicalError::MissingVariable(v.clone()))?;
            let shift = n - 1 - k;
            let mut w = vec![0u64; nwords];
            for row in 0..rows {
                if (row >> shift) & 1 == 1 {
                    w[(row / 64) as usize] |= 1 << (row % 64);
                }
            }
            w
        }
        Formula::Neg(g) => mask_tail(tabulate(g, n, rows, nwords, index)?.into_iter().map(|x| !x).collect()),
        Formula::Binary(c, l, r) => {
            let lw = tabulate(l, n, rows, nwords, index)?;
            let rw = tabulate(r, n, rows, nwords, index)?;
            let out = lw
                .iter()
                .zip(&rw)
                .map(|(&a, &b)| match c {
                    Connective::And => a & b,
                    Connective::Or => a | b,
                    Connective::Implies => !a | b,
                    Connective::Iff => !(a ^ b),
                })
                .collect();
            mask_tail(out)
        }
        Formula::Box(_) => return Err(ClassicalError::NotBoxFree(f.clone())),
    })
}

fn sorted_vars(f: &Formula) -> Vec<String> {
    f.vars().into_iter().collect()
}

/// Tautology, unsatisfiable or contingent, by exhaustive truth table.
pub fn classify(f: &Formula) -> Result<Classification, ClassicalError> {
    Ok(TruthTable::build(f, &sorted_vars(f))?.classification())
}

pub fn is_tautology(f: &Formula) -> Result<bool, ClassicalError> {
    Ok(classify(f)? == Classification::Tautology)
}

/// Output of [`lemma1_synthesize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma1Synthesis {
    pub fresh: String,
    /// Least satisfying assignment, the `f` of the construction.
    pub satisfying: Assignment,
    /// Least falsifying assignment, the `g` of the construction.
    pub falsifying: Assignment,
    /// `(p_i, B_i(r))` in variable-name order.
    pub substitution: Vec<(String, Formula)>,
    pub verified: bool,
}

impl Lemma1Synthesis {
    pub fn as_map(&self) -> BTreeMap<String, Formula> {
        self.substitution.iter().cloned().collect()
    }
}

/// `⊤` for 1, `⊥` for 0.
fn truth_constant(bit: bool) -> Formula {
    Formula::constant(bit)
}

fn synthesize_over(a: &Formula, vars: &[String], fresh: &str) -> Result<Lemma1Synthesis, ClassicalError> {
    let table = TruthTable::build(a, vars)?;
    let (sat, unsat) = match (table.first_row(true), table.first_row(false)) {
        (Some(s), Some(u)) => (s, u),
        _ => return Err(ClassicalError::NotContingent(table.classification())),
    };
    let f = table.assignment(sat);
    let g = table.assignment(unsat);
    let r = Formula::var(fresh);
    let substitution = vars
        .iter()
        .map(|v| {
            let when_r = Formula::and(r.clone(), truth_constant(f.get(v).unwrap_or(false)));
            let when_not_r = Formula::and(Formula::neg(r.clone()), truth_constant(g.get(v).unwrap_or(false)));
            (v.clone(), Formula::or(when_r, when_not_r))
        })
        .collect::<Vec<_>>();
    let out = Lemma1Synthesis {
        fresh: fresh.to_string(),
        satisfying: f,
        falsifying: g,
        substitution,
        verified: false,
    };
    let map = out.as_map();
    if !is_tautology(&Formula::iff(r, a.substitute(&map)))? {
        return Err(ClassicalError::VerificationFailed);
    }
    Ok(Lemma1Synthesis { verified: true, ..out })
}

fn check_fresh(a: &Formula, fresh: &str) -> Result<(), ClassicalError> {
    if a.vars().contains(fresh) {
        Err(ClassicalError::VariableNotFresh(fresh.to_string()))
    } else {
        Ok(())
    }
}

/// Builds `B_i(r) = (r ∧ ⊤^{f(i)}) ∨ (¬r ∧ ⊤^{g(i)})` for a contingent `a`,
/// where `f`/`g` are the lexicographically least satisfying/falsifying
/// assignments. The result is re-verified before it is returned.
pub fn lemma1_synthesize(a: &Formula, fresh: &str) -> Result<Lemma1Synthesis, ClassicalError> {
    require_box_free(a)?;
    check_fresh(a, fresh)?;
    synthesize_over(a, &sorted_vars(a), fresh)
}

/// Result of [`theorem2_condition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionOutcome {
    Holds,
    /// The first `g` (lexicographically, over the q-variables in the given
    /// order) whose specialization is not contingent.
    Fails(Assignment),
}

impl ConditionOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionOutcome::Holds)
    }
}

fn dedup_in_order(vars: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    vars.iter().filter(|v| seen.insert((*v).clone())).cloned().collect()
}

fn specialize(a: &Formula, g: &Assignment) -> Formula {
    let subst = g.0.iter().map(|(k, v)| (k.clone(), truth_constant(*v))).collect();
    a.substitute(&subst)
}

fn split_vars(a: &Formula, q_vars: &[String]) -> Result<(Vec<String>, Vec<String>), ClassicalError> {
    require_box_free(a)?;
    let all = a.vars();
    let q = dedup_in_order(q_vars);
    if let Some(missing) = q.iter().find(|v| !all.contains(*v)) {
        return Err(ClassicalError::UnknownVariable(missing.clone()));
    }
    let p = all.into_iter().filter(|v| !q.contains(v)).collect();
    Ok((p, q))
}

/// Whether every specialization `A(p⃗, ⊤^{g(1)}, …, ⊤^{g(m)})` is contingent.
pub fn theorem2_condition(a: &Formula, q_vars: &[String]) -> Result<ConditionOutcome, ClassicalError> {
    let (p, q) = split_vars(a, q_vars)?;
    for idx in 0..(1u64 << q.len()) {
        let g = Assignment::from_index(&q, idx);
        let table = TruthTable::build(&specialize(a, &g), &p)?;
        if table.classification() != Classification::Contingent {
            return Ok(ConditionOutcome::Fails(g));
        }
    }
    Ok(ConditionOutcome::Holds)
}

/// Output of [`lemma2_synthesize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma2Synthesis {
    pub fresh: String,
    pub p_vars: Vec<String>,
    pub q_vars: Vec<String>,
    /// `(p_i, B_i(r, q⃗))` in variable-name order.
    pub substitution: Vec<(String, Formula)>,
    pub verified: bool,
}

impl Lemma2Synthesis {
    pub fn as_map(&self) -> BTreeMap<String, Formula> {
        self.substitution.iter().cloned().collect()
    }
}

/// Builds `B_i(r, q⃗) = ⋁_g (C_i^g(r) ∧ Q^g(q⃗))` where `C^g` is the
/// [`lemma1_synthesize`] output for the `g`-specialization and
/// `Q^g = q_1^{g(1)} ∧ … ∧ q_m^{g(m)}`. With no q-variables this is
/// exactly the lemma-1 substitution.
pub fn lemma2_synthesize(a: &Formula, q_vars: &[String], fresh: &str) -> Result<Lemma2Synthesis, ClassicalError> {
    let (p, q) = split_vars(a, q_vars)?;
    check_fresh(a, fresh)?;

    let mut per_g = Vec::new();
    for idx in 0..(1u64 << q.len()) {
        let g = Assignment::from_index(&q, idx);
        let c = match synthesize_over(&specialize(a, &g), &p, fresh) {
            Ok(c) => c.as_map(),
            Err(ClassicalError::NotContingent(_)) => return Err(ClassicalError::ConditionFails(g)),
            Err(e) => return Err(e),
        };
        let q_conj = Formula::conjunction(
            q.iter()
                .map(|v| Polarity(g.get(v).unwrap_or(false)).apply(Formula::var(v.clone()))),
        );
        per_g.push((c, q_conj));
    }

    let substitution: Vec<(String, Formula)> = p
        .iter()
        .map(|v| {
            let disjuncts = per_g.iter().map(|(c, q_conj)| {
                let ci = c[v].clone();
                if q.is_empty() {
                    ci
                } else {
                    Formula::and(ci, q_conj.clone())
                }
            });
            (v.clone(), Formula::disjunction(disjuncts))
        })
        .collect();

    let out = Lemma2Synthesis {
        fresh: fresh.to_string(),
        p_vars: p,
        q_vars: q,
        substitution,
        verified: false,
    };
    let target = Formula::iff(Formula::var(fresh), a.substitute(&out.as_map()));
    if !is_tautology(&target)? {
        return Err(ClassicalError::VerificationFailed);
    }
    Ok(Lemma2Synthesis { verified: true, ..out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn q_vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn evaluate_examples() {
        let a = Assignment::from([("p", true), ("q", false)]);
        assert!(evaluate(&p("p & !q"), &a).unwrap());
        assert!(evaluate(&Formula::Top, &Assignment::new()).unwrap());
        assert!(matches!(
            evaluate(&p("[]p"), &a),
            Err(ClassicalError::NotBoxFree(_))
        ));
        assert_eq!(
            evaluate(&p("p & r"), &a),
            Err(ClassicalError::MissingVariable("r".into()))
        );
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&p("p | !p")).unwrap(), Classification::Tautology);
        assert_eq!(classify(&p("p & !p")).unwrap(), Classification::Unsatisfiable);
        assert_eq!(classify(&p("p <-> q")).unwrap(), Classification::Contingent);
        assert_eq!(classify(&Formula::Top).unwrap(), Classification::Tautology);
        assert!(classify(&p("[]p")).is_err());
    }

    #[test]
    fn truth_table_beyond_one_word() {
        let vars: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
        let f = Formula::conjunction(vars.iter().map(Formula::var));
        let t = TruthTable::build(&f, &vars).unwrap();
        assert_eq!(t.rows(), 256);
        assert_eq!(t.first_row(true), Some(255));
        assert_eq!(t.classification(), Classification::Contingent);
        assert_eq!(
            TruthTable::build(&Formula::neg(Formula::Bot), &vars).unwrap().classification(),
            Classification::Tautology
        );
    }

    #[test]
    fn lemma1_single_variable() {
        let s = lemma1_synthesize(&p("p"), "r").unwrap();
        assert_eq!(s.substitution, vec![("p".to_string(), p("(r & #t) | (!r & #f)"))]);
        assert!(s.verified);
        assert!(is_tautology(&Formula::iff(p("r"), p("p").substitute(&s.as_map()))).unwrap());
    }

    #[test]
    fn lemma1_two_variables_uses_least_witnesses() {
        let s = lemma1_synthesize(&p("p & !q"), "r").unwrap();
        assert_eq!(s.satisfying, Assignment::from([("p", true), ("q", false)]));
        assert_eq!(s.falsifying, Assignment::from([("p", false), ("q", false)]));
        assert_eq!(
            s.substitution,
            vec![
                ("p".to_string(), p("(r & #t) | (!r & #f)")),
                ("q".to_string(), p("(r & #f) | (!r & #f)")),
            ]
        );
    }

    #[test]
    fn lemma1_rejects_non_contingent() {
        assert_eq!(
            lemma1_synthesize(&p("p | !p"), "r"),
            Err(ClassicalError::NotContingent(Classification::Tautology))
        );
        assert_eq!(
            lemma1_synthesize(&p("p & !p"), "r"),
            Err(ClassicalError::NotContingent(Classification::Unsatisfiable))
        );
        assert_eq!(
            lemma1_synthesize(&p("p & r"), "r"),
            Err(ClassicalError::VariableNotFresh("r".into()))
        );
    }

    #[test]
    fn theorem2_condition_examples() {
        assert!(theorem2_condition(&p("p <-> q"), &q_vars(&["q"])).unwrap().holds());
        assert_eq!(
            theorem2_condition(&p("p & q"), &q_vars(&["q"])).unwrap(),
            ConditionOutcome::Fails(Assignment::from([("q", false)]))
        );
        assert!(theorem2_condition(&p("p"), &[]).unwrap().holds());
        assert_eq!(
            theorem2_condition(&p("p"), &q_vars(&["z"])),
            Err(ClassicalError::UnknownVariable("z".into()))
        );
    }

    #[test]
    fn lemma2_iff_example() {
        let s = lemma2_synthesize(&p("p <-> q"), &q_vars(&["q"]), "r").unwrap();
        assert!(s.verified);
        // g = {q:0}: p <-> #f is satisfied by p=0, falsified by p=1
        // g = {q:1}: p <-> #t is satisfied by p=1, falsified by p=0
        let expected = p("((r & #f) | (!r & #t)) & !q | ((r & #t) | (!r & #f)) & q");
        assert_eq!(s.substitution, vec![("p".to_string(), expected)]);
        let check = Formula::iff(p("r"), p("p <-> q").substitute(&s.as_map()));
        assert!(is_tautology(&check).unwrap());
    }

    #[test]
    fn lemma2_reports_failing_specialization() {
        assert_eq!(
            lemma2_synthesize(&p("p & q"), &q_vars(&["q"]), "r"),
            Err(ClassicalError::ConditionFails(Assignment::from([("q", false)])))
        );
    }

    #[test]
    fn lemma2_without_q_matches_lemma1() {
        for src in ["p", "p & !q", "p <-> q", "(p | q) & !s"] {
            let a = p(src);
            let l1 = lemma1_synthesize(&a, "r").unwrap();
            let l2 = lemma2_synthesize(&a, &[], "r").unwrap();
            assert_eq!(l1.substitution, l2.substitution, "{src}");
        }
    }
}
