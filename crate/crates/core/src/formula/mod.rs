//! Classical and modal propositional formulas.
//!
//! One AST serves both the box-free fragment handled by [`crate::classical`]
//! and the modal language of the provability-logic modules. `<>A` has no
//! constructor of its own: it is desugared to `![]!A` when parsed.

mod enumerate;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use enumerate::{FormulaEnumerator, EnumerationAtoms};
pub use parser::{parse_formula, ParseError};
pub use printer::print_formula;

/// Binary connectives, ordered by decreasing binding strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    pub const ALL: [Connective; 4] = [
        Connective::And,
        Connective::Or,
        Connective::Implies,
        Connective::Iff,
    ];

    pub fn apply(self, left: bool, right: bool) -> bool {
        match self {
            Connective::And => left && right,
            Connective::Or => left || right,
            Connective::Implies => !left || right,
            Connective::Iff => left == right,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "->",
            Connective::Iff => "<->",
        }
    }
}

/// A propositional formula, optionally containing `[]`.
///
/// The derived `Ord` is the fixed total order used wherever a deterministic
/// iteration order over formulas is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    Neg(Box<Formula>),
    Binary(Connective, Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn binary(c: Connective, l: Formula, r: Formula) -> Formula {
        Formula::Binary(c, Box::new(l), Box::new(r))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::binary(Connective::And, l, r)
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::binary(Connective::Or, l, r)
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::binary(Connective::Implies, l, r)
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::binary(Connective::Iff, l, r)
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    /// `<>f`, i.e. `![]!f`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::neg(Formula::boxed(Formula::neg(f)))
    }

    /// `⊤` for `true`, `⊥` for `false`.
    pub fn constant(value: bool) -> Formula {
        if value {
            Formula::Top
        } else {
            Formula::Bot
        }
    }

    /// Left-nested conjunction; the empty conjunction is `⊤` and a
    /// singleton is returned unchanged.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; the empty disjunction is `⊥`.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bot)
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => 1,
            Formula::Neg(f) | Formula::Box(f) => 1 + f.size(),
            Formula::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Maximum nesting depth of `[]`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => 0,
            Formula::Neg(f) => f.modal_depth(),
            Formula::Box(f) => 1 + f.modal_depth(),
            Formula::Binary(_, l, r) => l.modal_depth().max(r.modal_depth()),
        }
    }

    pub fn is_box_free(&self) -> bool {
        self.modal_depth() == 0
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Top | Formula::Bot => {}
            Formula::Neg(f) | Formula::Box(f) => f.collect_vars(out),
            Formula::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// All subformulas, `self` included, identified up to structural equality.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.contains(self) {
            return;
        }
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => {}
            Formula::Neg(f) | Formula::Box(f) => f.collect_subformulas(out),
            Formula::Binary(_, l, r) => {
                l.collect_subformulas(out);
                r.collect_subformulas(out);
            }
        }
        out.insert(self.clone());
    }

    /// The distinct subformulas of the form `[]C`.
    pub fn boxed_subformulas(&self) -> BTreeSet<Formula> {
        self.subformulas()
            .into_iter()
            .filter(|f| matches!(f, Formula::Box(_)))
            .collect()
    }

    /// Number of distinct boxed subformulas.
    pub fn cx(&self) -> usize {
        self.boxed_subformulas().len()
    }

    /// Reflection instances `[]B -> B`, one per boxed subformula `[]B`.
    pub fn rf(&self) -> BTreeSet<Formula> {
        self.boxed_subformulas()
            .into_iter()
            .map(|b| match &b {
                Formula::Box(inner) => {
                    let inner = (**inner).clone();
                    Formula::implies(b, inner)
                }
                _ => unreachable!("boxed_subformulas yields only boxes"),
            })
            .collect()
    }

    /// Simultaneous substitution. Variables outside `subst` are kept.
    pub fn substitute(&self, subst: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Formula::Top | Formula::Bot => self.clone(),
            Formula::Neg(f) => Formula::neg(f.substitute(subst)),
            Formula::Box(f) => Formula::boxed(f.substitute(subst)),
            Formula::Binary(c, l, r) => Formula::binary(*c, l.substitute(subst), r.substitute(subst)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Serialized as its printed form.
impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

/// `A^1 = A`, `A^0 = ¬A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polarity(pub bool);

impl Polarity {
    pub fn apply(self, f: Formula) -> Formula {
        if self.0 {
            f
        } else {
            Formula::neg(f)
        }
    }
}

/// `[]^n f`.
pub fn box_n(n: usize, f: Formula) -> Formula {
    (0..n).fold(f, |acc, _| Formula::boxed(acc))
}

/// `<>^n f`, spelled out as `!([]^n !f)`; `diamond_n(0, f)` is `!!f`.
pub fn diamond_n(n: usize, f: Formula) -> Formula {
    Formula::neg(box_n(n, Formula::neg(f)))
}

/// The height marker `[]^(s+1) #f -> []^s #f`.
pub fn f_s(s: usize) -> Formula {
    Formula::implies(box_n(s + 1, Formula::Bot), box_n(s, Formula::Bot))
}
