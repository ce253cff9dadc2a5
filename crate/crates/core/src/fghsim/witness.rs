/// Least witness stage of a Σ1 event; `None` is never.
pub type Pos = Option<u64>;

/// `φ ⪯ ψ`: φ has a witness no later than any witness of ψ.
pub fn wc_preceq(phi: Pos, psi: Pos) -> bool {
    match (phi, psi) {
        (Some(_), None) => true,
        (Some(a), Some(b)) => a <= b,
        (None, _) => false,
    }
}

/// `φ ≺ ψ`: φ has a witness strictly before any witness of ψ.
pub fn wc_prec(phi: Pos, psi: Pos) -> bool {
    match (phi, psi) {
        (Some(_), None) => true,
        (Some(a), Some(b)) => a < b,
        (None, _) => false,
    }
}

/// The position as seen by a run that has inspected stages `0..=horizon`.
pub fn visible_at(pos: Pos, horizon: u64) -> Pos {
    pos.filter(|&p| p <= horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(wc_preceq(Some(3), Some(5)) && wc_prec(Some(3), Some(5)));
        assert!(wc_preceq(Some(3), Some(3)));
        assert!(!wc_prec(Some(3), Some(3)));
        assert!(!wc_preceq(None, Some(2)) && !wc_prec(None, Some(2)));
        assert!(wc_preceq(Some(0), None));
        assert!(!wc_preceq(None, None));
    }

    #[test]
    fn visibility() {
        assert_eq!(visible_at(Some(4), 3), None);
        assert_eq!(visible_at(Some(4), 4), Some(4));
        assert_eq!(visible_at(None, 9), None);
    }
}
