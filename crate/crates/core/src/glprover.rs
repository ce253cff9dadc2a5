//! Decision procedure for GL by a diamond-expansion tableau with tree
//! countermodel extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::formula::{box_n, Formula};
use crate::kripke::{enumerate_models, transitive_closure, KripkeModel, WorldId};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("node budget of {0} expansions exceeded")]
    BudgetExceeded(u64),
    /// The extracted countermodel failed its own re-check. Indicates a bug.
    #[error("countermodel re-check failed: {0}")]
    Internal(String),
}

/// Bookkeeping from a successful proof search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofTrace {
    /// Propositional case splits and world creations performed.
    pub expansions: u64,
    /// Distinct world seeds shown unsatisfiable.
    pub closed_seeds: usize,
    /// Size of the closure set searched.
    pub closure_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Proved(ProofTrace),
    Refuted(KripkeModel),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn countermodel(&self) -> Option<&KripkeModel> {
        match self {
            Verdict::Refuted(m) => Some(m),
            Verdict::Proved(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Var(usize),
    Top,
    Bot,
    Neg(usize),
    Bin(crate::formula::Connective, usize, usize),
    Box(usize),
}

/// Closure set with children indexed before parents.
struct Closure {
    formulas: Vec<Formula>,
    nodes: Vec<Node>,
    /// Indices of variables and boxed formulas, in closure order.
    atoms: Vec<usize>,
    /// For each closure index, its position in `atoms` if it is an atom.
    atom_slot: Vec<Option<usize>>,
    var_names: Vec<String>,
}

impl Closure {
    fn new(root: &Formula) -> Self {
        let mut formulas: Vec<Formula> = root.subformulas().into_iter().collect();
        formulas.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        let index: HashMap<&Formula, usize> = formulas.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut var_names = Vec::new();
        let nodes: Vec<Node> = formulas
            .iter()
            .map(|f| match f {
                Formula::Var(v) => {
                    var_names.push(v.clone());
                    Node::Var(var_names.len() - 1)
                }
                Formula::Top => Node::Top,
                Formula::Bot => Node::Bot,
                Formula::Neg(g) => Node::Neg(index[g.as_ref()]),
                Formula::Binary(c, l, r) => Node::Bin(*c, index[l.as_ref()], index[r.as_ref()]),
                Formula::Box(g) => Node::Box(index[g.as_ref()]),
            })
            .collect();
        let atoms: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::Var(_) | Node::Box(_)))
            .map(|(i, _)| i)
            .collect();
        let mut atom_slot = vec![None; nodes.len()];
        for (slot, &i) in atoms.iter().enumerate() {
            atom_slot[i] = Some(slot);
        }
        Closure {
            formulas,
            nodes,
            atoms,
            atom_slot,
            var_names,
        }
    }

    fn index_of(&self, f: &Formula) -> usize {
        self.formulas.iter().position(|g| g == f).expect("formula in closure")
    }

    /// Three-valued evaluation of every closure formula under a partial
    /// atom assignment.
    fn eval3(&self, assign: &[Option<bool>]) -> Vec<Option<bool>> {
        let mut v: Vec<Option<bool>> = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let x = match *n {
                Node::Var(_) | Node::Box(_) => assign[self.atom_slot[i].expect("atom")],
                Node::Top => Some(true),
                Node::Bot => Some(false),
                Node::Neg(a) => v[a].map(|b| !b),
                Node::Bin(c, l, r) => bin3(c, v[l], v[r]),
            };
            v.push(x);
        }
        v
    }
}

fn bin3(c: crate::formula::Connective, l: Option<bool>, r: Option<bool>) -> Option<bool> {
    use crate::formula::Connective::*;
    match (c, l, r) {
        (_, Some(a), Some(b)) => Some(c.apply(a, b)),
        (And, Some(false), _) | (And, _, Some(false)) => Some(false),
        (Or, Some(true), _) | (Or, _, Some(true)) => Some(true),
        (Implies, Some(false), _) | (Implies, _, Some(true)) => Some(true),
        _ => None,
    }
}

/// Signed closure formulas a world must satisfy.
type Seed = BTreeSet<(usize, bool)>;

#[derive(Debug, Clone)]
struct Tree {
    true_vars: BTreeSet<usize>,
    children: Vec<Tree>,
    /// Closure values at this world.
    vals: Vec<Option<bool>>,
}

struct Search<'a> {
    cl: &'a Closure,
    budget: u64,
    used: u64,
    memo: HashMap<Seed, Option<Tree>>,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), ProverError> {
        self.used += 1;
        if self.used > self.budget {
            Err(ProverError::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn satisfy(&mut self, seed: &Seed) -> Result<Option<Tree>, ProverError> {
        if let Some(hit) = self.memo.get(seed) {
            return Ok(hit.clone());
        }
        self.tick()?;
        let mut assign = vec![None; self.cl.atoms.len()];
        let out = self.assign_from(seed, &mut assign, 0)?;
        self.memo.insert(seed.clone(), out.clone());
        Ok(out)
    }

    /// Case-splits atoms `k..` in closure order; box atoms try true first,
    /// variables false first.
    fn assign_from(
        &mut self,
        seed: &Seed,
        assign: &mut Vec<Option<bool>>,
        k: usize,
    ) -> Result<Option<Tree>, ProverError> {
        let vals = self.cl.eval3(assign);
        if seed.iter().any(|&(i, want)| vals[i] == Some(!want)) {
            return Ok(None);
        }
        if k == assign.len() {
            return self.expand(assign);
        }
        let atom = self.cl.atoms[k];
        let order = match self.cl.nodes[atom] {
            Node::Box(_) => [true, false],
            _ => [false, true],
        };
        for b in order {
            self.tick()?;
            assign[k] = Some(b);
            if let Some(t) = self.assign_from(seed, assign, k + 1)? {
                assign[k] = None;
                return Ok(Some(t));
            }
        }
        assign[k] = None;
        Ok(None)
    }

    /// Builds successors for every false box under a total assignment.
    fn expand(&mut self, assign: &[Option<bool>]) -> Result<Option<Tree>, ProverError> {
        let cl = self.cl;
        let boxed_true: Vec<usize> = cl
            .atoms
            .iter()
            .enumerate()
            .filter(|&(slot, &i)| matches!(cl.nodes[i], Node::Box(_)) && assign[slot] == Some(true))
            .map(|(_, &i)| i)
            .collect();
        let mut base: Seed = BTreeSet::new();
        for &i in &boxed_true {
            let Node::Box(c) = cl.nodes[i] else { unreachable!() };
            base.insert((i, true));
            base.insert((c, true));
        }
        let mut children: Vec<Tree> = Vec::new();
        let mut child_vals: Vec<Vec<Option<bool>>> = Vec::new();
        for (slot, &i) in cl.atoms.iter().enumerate() {
            let Node::Box(b) = cl.nodes[i] else { continue };
            if assign[slot] != Some(false) {
                continue;
            }
            // an earlier successor may already refute b
            if child_vals.iter().any(|v| v[b] == Some(false)) {
                continue;
            }
            self.tick()?;
            let mut seed = base.clone();
            seed.insert((b, false));
            seed.insert((i, true));
            match self.satisfy(&seed)? {
                Some(t) => {
                    child_vals.push(t.vals.clone());
                    children.push(t);
                }
                None => return Ok(None),
            }
        }
        let true_vars = cl
            .atoms
            .iter()
            .enumerate()
            .filter_map(|(slot, &i)| match cl.nodes[i] {
                Node::Var(v) if assign[slot] == Some(true) => Some(v),
                _ => None,
            })
            .collect();
        Ok(Some(Tree {
            true_vars,
            children,
            vals: cl.eval3(assign),
        }))
    }
}

fn tree_to_model(t: &Tree, cl: &Closure) -> KripkeModel {
    let mut edges = BTreeSet::new();
    let mut val = BTreeMap::new();
    let mut next: WorldId = 0;
    fn walk(
        t: &Tree,
        cl: &Closure,
        next: &mut WorldId,
        edges: &mut BTreeSet<(WorldId, WorldId)>,
        val: &mut BTreeMap<WorldId, BTreeSet<String>>,
    ) -> WorldId {
        let id = *next;
        *next += 1;
        val.insert(id, t.true_vars.iter().map(|&v| cl.var_names[v].clone()).collect());
        for c in &t.children {
            let cid = walk(c, cl, next, edges, val);
            edges.insert((id, cid));
        }
        id
    }
    walk(t, cl, &mut next, &mut edges, &mut val);
    let rel = transitive_closure(&edges);
    KripkeModel::new(0..next, rel, 0, val)
}

/// Decides `GL ⊢ f` with the default node budget.
pub fn gl_proves(f: &Formula) -> Result<Verdict, ProverError> {
    gl_proves_with_budget(f, DEFAULT_NODE_BUDGET)
}

/// Decides `GL ⊢ f`. A refutation carries a tree countermodel whose root
/// forces `!f` and `[]^(cx+1) #f`; both are re-checked before returning.
pub fn gl_proves_with_budget(f: &Formula, budget: u64) -> Result<Verdict, ProverError> {
    let cl = Closure::new(f);
    let mut search = Search {
        cl: &cl,
        budget,
        used: 0,
        memo: HashMap::new(),
    };
    let mut seed = Seed::new();
    seed.insert((cl.index_of(f), false));
    match search.satisfy(&seed)? {
        None => Ok(Verdict::Proved(ProofTrace {
            expansions: search.used,
            closed_seeds: search.memo.values().filter(|v| v.is_none()).count(),
            closure_size: cl.formulas.len(),
        })),
        Some(tree) => {
            let m = tree_to_model(&tree, &cl);
            check_countermodel(&m, f).map_err(ProverError::Internal)?;
            Ok(Verdict::Refuted(m))
        }
    }
}

/// Checks the two countermodel invariants: valid frame, root refutes `f`,
/// root forces `[]^(cx+1) #f`.
pub fn check_countermodel(m: &KripkeModel, f: &Formula) -> Result<(), String> {
    let violations = m.validate_frame();
    if !violations.is_empty() {
        return Err(format!("invalid frame: {violations:?}"));
    }
    if m.forces_at_root(f).map_err(|e| e.to_string())? {
        return Err(format!("root forces {f}"));
    }
    let bound = box_n(f.cx() + 1, Formula::Bot);
    if !m.forces_at_root(&bound).map_err(|e| e.to_string())? {
        return Err(format!("root does not force {bound}"));
    }
    Ok(())
}

/// Whether `f` holds at the root of every model with at most `max_worlds`
/// worlds over the variables of `f`.
///
/// Sound as a refuter; agrees with [`gl_proves`] whenever a countermodel, if
/// one exists, fits within `max_worlds`.
pub fn gl_proves_brute(f: &Formula, max_worlds: usize) -> bool {
    let vars: Vec<String> = f.vars().into_iter().collect();
    enumerate_models(max_worlds, &vars)
        .iter()
        .all(|m| m.forces_at_root(f).expect("root exists"))
}

/// As [`gl_proves_brute`], over a pre-enumerated model list.
pub fn gl_proves_on(models: &[KripkeModel], f: &Formula) -> bool {
    models.iter().all(|m| m.forces_at_root(f).expect("root exists"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn refuted(s: &str) -> KripkeModel {
        match gl_proves(&f(s)).unwrap() {
            Verdict::Refuted(m) => m,
            Verdict::Proved(_) => panic!("{s} unexpectedly proved"),
        }
    }

    #[test]
    fn theorems() {
        for s in [
            "[]([]p -> p) -> []p",
            "#t",
            "[]p -> [][]p",
            "[](p -> q) -> []p -> []q",
            "[]#f -> []#f",
            "<>#t -> !<>#t -> #f",
            "[](<>#t) -> []#f",
            "[]([]#f -> #f) -> []#f",
        ] {
            assert!(gl_proves(&f(s)).unwrap().is_proved(), "{s}");
        }
    }

    #[test]
    fn reflection_countermodels() {
        let g = f("[]p -> p");
        let m = refuted("[]p -> p");
        // the tableau never opens a successor for a true box
        assert_eq!(m.len(), 1);
        assert!(!m.holds_var(0, "p"));
        assert!(m.forces_at_root(&f("[][]#f")).unwrap());
        let chain = KripkeModel::chain(&[&[] as &[&str], &["p"]]);
        check_countermodel(&chain, &g).unwrap();
    }

    #[test]
    fn consistency_refuted_by_dead_end() {
        let m = refuted("<>#t");
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn non_theorems_have_honest_countermodels() {
        for s in ["p", "[]p -> p", "<>#t", "[][]#f -> []#f", "[]p | []!p", "<>p -> <>(p & []!p) -> #f"] {
            let g = f(s);
            let m = refuted(s);
            check_countermodel(&m, &g).unwrap();
        }
    }

    #[test]
    fn budget_is_a_distinct_outcome() {
        let g = f("[]([]p -> p) -> []p");
        assert_eq!(gl_proves_with_budget(&g, 1), Err(ProverError::BudgetExceeded(1)));
    }

    #[test]
    fn brute_examples() {
        assert!(gl_proves_brute(&f("[]#f -> []#f"), 3));
        assert!(!gl_proves_brute(&f("p"), 1));
        assert!(gl_proves_brute(&f("[]([]p -> p) -> []p"), 4));
        assert!(!gl_proves_brute(&f("[]p -> p"), 2));
    }

    #[test]
    fn deep_chain_needs_depth() {
        // ◇◇◇⊤ needs a root of height 3; its negation is refuted there
        let m = refuted("!<><><>#t");
        assert_eq!(m.height(m.root()), 3);
    }
}
