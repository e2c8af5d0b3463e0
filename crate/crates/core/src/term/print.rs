use std::fmt;

use super::{Env, EnvItem, Expr};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(a) => write!(f, "{a}"),
            Expr::Susp(p, v) if p.is_identity() => write!(f, "{v}"),
            Expr::Susp(p, v) => write!(f, "({p} . {v})"),
            Expr::Lam(a, e) => write!(f, "(lam {a} {e})"),
            Expr::App(s, args) => {
                write!(f, "({s}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Expr::Letrec(env, e) => {
                f.write_str("(letrec")?;
                for item in env.items() {
                    write!(f, " {item}")?;
                }
                write!(f, " in {e})")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for EnvItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvItem::Bind(a, e) => write!(f, "({a} {e})"),
            EnvItem::Var(p, v) if p.is_identity() => write!(f, "{v}"),
            EnvItem::Var(p, v) => write!(f, "({p} . {v})"),
        }
    }
}

/// Environment items separated by spaces, in the binding syntax of `letrec`.
pub fn format_env(env: &Env) -> String {
    env.items().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expression, ArityTable};
    use crate::oracle::{enum_ground, GroundEnumConfig};
    use proptest::prelude::*;

    #[test]
    fn prints_all_constructors() {
        for s in [
            "a",
            "X",
            "(((a b)) . X)",
            "(lam a (f a b))",
            "(letrec (a (pair a b)) Env1 (((a b)) . Env2) in (True))",
            "(letrec in a)",
        ] {
            let e = parse_expression(s, &mut ArityTable::new()).unwrap();
            assert_eq!(e.to_string(), s);
        }
    }

    #[test]
    fn enumerated_terms_roundtrip() {
        let pair = GroundEnumConfig::small(&["a", "b"], &[("f", 1), ("g", 2)], 2, 1);
        for e in enum_ground(&pair).take(5000) {
            let back = parse_expression(&e.to_string(), &mut ArityTable::new()).unwrap();
            assert_eq!(back, e);
        }
    }

    proptest! {
        #[test]
        fn random_terms_roundtrip(e in crate::testing::arb_expr(3)) {
            let back = parse_expression(&e.to_string(), &mut ArityTable::new()).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
