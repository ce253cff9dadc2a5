use super::{Connective, Formula};

/// Which leaves the enumerator may use.
#[derive(Debug, Clone)]
pub struct EnumerationAtoms {
    pub vars: Vec<String>,
    pub constants: bool,
}

impl EnumerationAtoms {
    pub fn vars<S: AsRef<str>>(names: &[S]) -> Self {
        EnumerationAtoms {
            vars: names.iter().map(|s| s.as_ref().to_string()).collect(),
            constants: false,
        }
    }

    pub fn with_constants(mut self) -> Self {
        self.constants = true;
        self
    }

    fn leaves(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = self.vars.iter().map(Formula::var).collect();
        if self.constants {
            out.push(Formula::Top);
            out.push(Formula::Bot);
        }
        out
    }
}

/// Exhaustive enumeration of formulas by node count.
///
/// Every formula over the given leaves with at most `max_modal_depth`
/// nested boxes is produced exactly once, ordered by size and then by
/// construction order.
#[derive(Debug, Clone)]
pub struct FormulaEnumerator {
    atoms: EnumerationAtoms,
    max_modal_depth: usize,
    // layers[n] holds every formula of size n (index 0 unused)
    layers: Vec<Vec<Formula>>,
}

impl FormulaEnumerator {
    pub fn classical(atoms: EnumerationAtoms) -> Self {
        Self::modal(atoms, 0)
    }

    pub fn modal(atoms: EnumerationAtoms, max_modal_depth: usize) -> Self {
        FormulaEnumerator {
            atoms,
            max_modal_depth,
            layers: vec![Vec::new()],
        }
    }

    fn extend_to(&mut self, size: usize) {
        while self.layers.len() <= size {
            let n = self.layers.len();
            let mut layer = Vec::new();
            if n == 1 {
                layer = self.atoms.leaves();
            } else {
                for f in &self.layers[n - 1] {
                    layer.push(Formula::neg(f.clone()));
                    if f.modal_depth() < self.max_modal_depth {
                        layer.push(Formula::boxed(f.clone()));
                    }
                }
                for c in Connective::ALL {
                    for left_size in 1..n - 1 {
                        let right_size = n - 1 - left_size;
                        for l in &self.layers[left_size] {
                            for r in &self.layers[right_size] {
                                layer.push(Formula::binary(c, l.clone(), r.clone()));
                            }
                        }
                    }
                }
            }
            self.layers.push(layer);
        }
    }

    pub fn of_size(&mut self, size: usize) -> &[Formula] {
        if size == 0 {
            return &[];
        }
        self.extend_to(size);
        &self.layers[size]
    }

    pub fn up_to(&mut self, max_size: usize) -> Vec<Formula> {
        self.extend_to(max_size);
        self.layers[1..=max_size].iter().flatten().cloned().collect()
    }

    /// Counts formulas of each size without materializing the formulas
    /// themselves beyond what the recurrence needs. Only valid for the
    /// box-free case, where every formula of size n-1 admits a negation.
    pub fn classical_counts(leaves: usize, max_size: usize) -> Vec<u64> {
        let mut counts = vec![0u64; max_size + 1];
        if max_size >= 1 {
            counts[1] = leaves as u64;
        }
        for n in 2..=max_size {
            let mut c = counts[n - 1];
            for l in 1..n - 1 {
                c += 4 * counts[l] * counts[n - 1 - l];
            }
            counts[n] = c;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn counts_match_recurrence() {
        let mut e = FormulaEnumerator::classical(EnumerationAtoms::vars(&["p", "q"]));
        let expected = FormulaEnumerator::classical_counts(2, 6);
        for n in 1..=6 {
            assert_eq!(e.of_size(n).len() as u64, expected[n], "size {n}");
        }
    }

    #[test]
    fn no_duplicates_and_sizes_correct() {
        let mut e = FormulaEnumerator::modal(EnumerationAtoms::vars(&["p"]).with_constants(), 2);
        let all = e.up_to(5);
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for f in &all {
            assert!(f.size() <= 5);
            assert!(f.modal_depth() <= 2);
        }
        assert!(all.contains(&Formula::boxed(Formula::boxed(Formula::var("p")))));
        assert!(!all.iter().any(|f| f.modal_depth() > 2));
    }

    #[test]
    fn small_layers_by_hand() {
        let mut e = FormulaEnumerator::modal(EnumerationAtoms::vars(&["p"]), 1);
        assert_eq!(e.of_size(1), &[Formula::var("p")]);
        // !p, []p
        assert_eq!(e.of_size(2).len(), 2);
        // !!p, ![]p, []!p, and four binaries p∘p
        assert_eq!(e.of_size(3).len(), 7);
    }
}
