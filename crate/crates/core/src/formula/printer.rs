use super::{Connective, Formula};

fn level(c: Connective) -> u8 {
    match c {
        Connective::Iff => 1,
        Connective::Implies => 2,
        Connective::Or => 3,
        Connective::And => 4,
    }
}

/// Renders `f` in the ASCII syntax accepted by [`super::parse_formula`],
/// with the fewest parentheses that still parse back to the same tree.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::Var(v) => out.push_str(v),
        Formula::Top => out.push_str("#t"),
        Formula::Bot => out.push_str("#f"),
        Formula::Neg(inner) => {
            out.push('!');
            write_operand(inner, out);
        }
        Formula::Box(inner) => {
            out.push_str("[]");
            write_operand(inner, out);
        }
        Formula::Binary(c, l, r) => {
            let lv = level(*c);
            let right_assoc = *c == Connective::Implies;
            write_side(l, lv, right_assoc, out);
            out.push(' ');
            out.push_str(c.symbol());
            out.push(' ');
            write_side(r, lv, !right_assoc, out);
        }
    }
}

fn write_operand(f: &Formula, out: &mut String) {
    if matches!(f, Formula::Binary(..)) {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

/// `tie_needs_parens`: whether a child at the same level must be wrapped
/// on this side.
fn write_side(child: &Formula, parent: u8, tie_needs_parens: bool, out: &mut String) {
    let wrap = match child {
        Formula::Binary(c, ..) => {
            let cl = level(*c);
            cl < parent || (cl == parent && tie_needs_parens)
        }
        _ => false,
    };
    if wrap {
        out.push('(');
        write(child, out);
        out.push(')');
    } else {
        write(child, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn renders_examples() {
        assert_eq!(print_formula(&Formula::boxed(Formula::var("p"))), "[]p");
        assert_eq!(
            print_formula(&Formula::implies(Formula::boxed(Formula::Bot), Formula::Bot)),
            "[]#f -> #f"
        );
        assert_eq!(
            print_formula(&Formula::neg(Formula::neg(Formula::var("p")))),
            "!!p"
        );
    }

    #[test]
    fn parenthesizes_only_when_needed() {
        for (src, shown) in [
            ("p -> (q -> r)", "p -> q -> r"),
            ("(p -> q) -> r", "(p -> q) -> r"),
            ("(p & q) & r", "p & q & r"),
            ("p & (q & r)", "p & (q & r)"),
            ("!(p & q)", "!(p & q)"),
            ("[](p | q) <-> p", "[](p | q) <-> p"),
            ("p | q & r", "p | q & r"),
            ("(p | q) & r", "(p | q) & r"),
        ] {
            let f = parse_formula(src).unwrap();
            assert_eq!(print_formula(&f), shown);
            assert_eq!(parse_formula(shown).unwrap(), f);
        }
    }
}
