//! Printing formulas, proto-formulas and theories back to the surface syntax.
//!
//! The printer emits minimal parentheses and agrees with the parser: for
//! every formula `f`, parsing `formula_to_string(f, annotate)` yields `f`
//! back (structurally, not just up to α). Sort annotations are emitted on
//! binders and free-variable occurrences when `annotate` is true; one-sorted
//! contexts print bare names.

use super::{Formula, ProtoFormula, Theory, Var, DEFAULT_SORT};
use std::fmt::Write;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        // Quantifiers are handled via the rightmost flag, atoms never need
        // parentheses.
        _ => 6,
    }
}

struct Printer {
    annotate: bool,
    bound: Vec<String>,
    out: String,
}

impl Printer {
    fn var(&mut self, v: &Var) {
        if self.annotate && !self.bound.iter().any(|b| b == &v.name) {
            let _ = write!(self.out, "{}:{}", v.name, v.sort);
        } else {
            self.out.push_str(&v.name);
        }
    }

    fn binder(&mut self, v: &Var) {
        if self.annotate {
            let _ = write!(self.out, "{}:{}", v.name, v.sort);
        } else {
            self.out.push_str(&v.name);
        }
    }

    /// `min_prec` is the lowest precedence printable without parentheses;
    /// `rightmost` says whether this subformula extends to the end of the
    /// enclosing parenthesized unit (where a quantifier may print bare).
    fn go(&mut self, f: &Formula, min_prec: u8, rightmost: bool) {
        match f {
            Formula::True => self.out.push_str("true"),
            Formula::False => self.out.push_str("false"),
            Formula::Atom { pred, args } => {
                self.out.push_str(pred);
                self.out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.var(a);
                }
                self.out.push(')');
            }
            Formula::Eq(a, b) => {
                self.var(a);
                self.out.push_str(" = ");
                self.var(b);
            }
            Formula::Not(a) => {
                if prec(f) < min_prec {
                    self.out.push('(');
                    self.out.push('~');
                    self.go(a, 5, true);
                    self.out.push(')');
                } else {
                    self.out.push('~');
                    self.go(a, 5, rightmost);
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let k = prec(f);
                let op = match f {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    Formula::Implies(..) => " -> ",
                    _ => " <-> ",
                };
                if k < min_prec {
                    self.out.push('(');
                    self.go(a, k + 1, false);
                    self.out.push_str(op);
                    self.go(b, k, true);
                    self.out.push(')');
                } else {
                    self.go(a, k + 1, false);
                    self.out.push_str(op);
                    self.go(b, k, rightmost);
                }
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let q = if matches!(f, Formula::Forall(..)) { "all " } else { "ex " };
                if !rightmost {
                    self.out.push('(');
                }
                self.out.push_str(q);
                self.binder(v);
                self.out.push_str(". ");
                self.bound.push(v.name.clone());
                self.go(a, 0, true);
                self.bound.pop();
                if !rightmost {
                    self.out.push(')');
                }
            }
        }
    }
}

/// Print a formula in the surface syntax.
pub fn formula_to_string(f: &Formula, annotate: bool) -> String {
    let mut p = Printer { annotate, bound: Vec::new(), out: String::new() };
    p.go(f, 0, true);
    p.out
}

/// Print a proto-formula as `[params] body`.
pub fn proto_to_string(p: &ProtoFormula, annotate: bool) -> String {
    let mut out = String::from("[");
    for (i, v) in p.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if annotate {
            let _ = write!(out, "{}:{}", v.name, v.sort);
        } else {
            out.push_str(&v.name);
        }
    }
    out.push_str("] ");
    // Parameters act as binders: occurrences print bare.
    let mut pr = Printer {
        annotate,
        bound: p.params.iter().map(|v| v.name.clone()).collect(),
        out: String::new(),
    };
    pr.go(&p.body, 0, true);
    out.push_str(&pr.out);
    out
}

/// Print a theory file. Axioms are printed with macros already expanded; the
/// macro table is printed as `def` lines over the expanded bodies so the file
/// re-parses to an alpha-equal theory.
pub fn theory_to_string(th: &Theory) -> String {
    let sig = &th.signature;
    let annotate = !sig.is_one_sorted();
    let mut out = String::new();
    let _ = writeln!(out, "theory {}", sig.name);
    if sig.sorts != [DEFAULT_SORT.to_string()] {
        let _ = writeln!(out, "sort {}", sig.sorts.join(" "));
    }
    for p in &sig.preds {
        if annotate || p.profile.iter().any(|s| s != DEFAULT_SORT) {
            let _ = writeln!(out, "pred {}/{} : {}", p.name, p.profile.len(), p.profile.join(", "));
        } else {
            let _ = writeln!(out, "pred {}/{}", p.name, p.profile.len());
        }
    }
    for (name, proto) in th.macros.iter() {
        let params: Vec<String> = proto
            .params
            .iter()
            .map(|v| {
                if annotate {
                    format!("{}:{}", v.name, v.sort)
                } else {
                    v.name.clone()
                }
            })
            .collect();
        let mut pr = Printer {
            annotate,
            bound: proto.params.iter().map(|v| v.name.clone()).collect(),
            out: String::new(),
        };
        pr.go(&proto.body, 0, true);
        let _ = writeln!(out, "def {}({}) = {}", name, params.join(", "), pr.out);
    }
    for (label, ax) in &th.axioms {
        let _ = writeln!(out, "axiom {}: {}", label, formula_to_string(ax, annotate));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse_formula, parse_theory, MacroTable};
    use crate::syntax::{PredDecl, Signature};

    fn v(n: &str) -> Var {
        Var::new(n, "o")
    }

    fn sig3() -> Signature {
        Signature::new(
            "S",
            vec!["o".into()],
            vec![
                PredDecl { name: "p".into(), profile: vec!["o".into()] },
                PredDecl { name: "q".into(), profile: vec!["o".into()] },
                PredDecl { name: "in".into(), profile: vec!["o".into(), "o".into()] },
            ],
        )
        .unwrap()
    }

    fn roundtrip(f: &Formula, sig: &Signature) {
        let text = formula_to_string(f, false);
        let free = f.free_vars();
        let g = parse_formula(sig, &MacroTable::default(), &text, &free)
            .unwrap_or_else(|e| panic!("reparse of {:?} failed: {}", text, e));
        assert_eq!(&g, f, "text was {}", text);
    }

    #[test]
    fn parens_are_minimal_and_correct() {
        let sig = sig3();
        let p = Formula::atom("p", vec![v("x")]);
        let q = Formula::atom("q", vec![v("x")]);
        let cases = vec![
            Formula::and(Formula::or(p.clone(), q.clone()), q.clone()),
            Formula::or(p.clone(), Formula::and(q.clone(), p.clone())),
            Formula::implies(Formula::implies(p.clone(), q.clone()), p.clone()),
            Formula::implies(p.clone(), Formula::implies(q.clone(), p.clone())),
            Formula::iff(Formula::iff(p.clone(), q.clone()), p.clone()),
            Formula::not(Formula::and(p.clone(), q.clone())),
            Formula::and(Formula::not(p.clone()), q.clone()),
            Formula::and(Formula::forall(v("x"), p.clone()), q.clone()),
            Formula::and(q.clone(), Formula::forall(v("x"), p.clone())),
            Formula::not(Formula::forall(v("x"), p.clone())),
            Formula::forall(v("x"), Formula::implies(p.clone(), q.clone())),
            Formula::exists(v("x"), Formula::and(p.clone(), Formula::exists(v("y"), q.clone()))),
        ];
        for f in &cases {
            roundtrip(f, &sig);
        }
        // Spot-check two shapes.
        assert_eq!(
            formula_to_string(&cases[0], false),
            "(p(x) | q(x)) & q(x)"
        );
        assert_eq!(
            formula_to_string(&cases[8], false),
            "q(x) & all x. p(x)"
        );
    }

    #[test]
    fn annotated_printing_reparses_in_many_sorted_sig() {
        let text = "\
theory AC
sort o c
pred in/2 : o, c
axiom ac_ext: all y:c. all z:c. (all u:o. (in(u,y) <-> in(u,z))) -> y = z
";
        let th = parse_theory(text).unwrap();
        let printed = theory_to_string(&th);
        let th2 = parse_theory(&printed).unwrap();
        assert!(th.alpha_eq(&th2), "printed:\n{}", printed);
    }

    #[test]
    fn theory_with_macros_roundtrips() {
        let text = "\
theory T
pred in/2
def empty(x) = ~ ex w. in(w,x)
axiom a1: ex x. empty(x)
";
        let th = parse_theory(text).unwrap();
        let printed = theory_to_string(&th);
        let th2 = parse_theory(&printed).unwrap();
        assert!(th.alpha_eq(&th2), "printed:\n{}", printed);
        assert!(th2.macros.get("empty").is_some());
    }
}
