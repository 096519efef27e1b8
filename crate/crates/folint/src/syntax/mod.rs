//! Core syntax: sorts, signatures, variables, formulas, proto-formulas and
//! theories, together with the operations everything else is built on:
//! α-equivalence, capture-avoiding substitution, well-formedness checking and
//! canonical forms.
//!
//! The logic is relational (no function symbols) and many-sorted with a
//! default sort `o` for one-sorted theories. Equality is per sort and built
//! in. Atoms apply predicates to variables only; functional notation in the
//! surface grammar is eliminated at parse time (see [`parse`]).

pub mod parse;
pub mod print;

use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// A sorted variable occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Var { name: name.into(), sort: sort.into() }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

/// First-order formulas over a relational signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// Predicate applied to variables.
    Atom { pred: String, args: Vec<Var> },
    /// Per-sort equality; both sides must share a sort.
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Var>) -> Self {
        Formula::Atom { pred: pred.into(), args }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, f: Formula) -> Self {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: Var, f: Formula) -> Self {
        Formula::Exists(v, Box::new(f))
    }

    /// Right-nested conjunction of `fs`; `true` when empty, the formula
    /// itself when singleton.
    pub fn conj(fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter().rev();
        match it.next() {
            None => Formula::True,
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Right-nested disjunction of `fs`; `false` when empty.
    pub fn disj(fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter().rev();
        match it.next() {
            None => Formula::False,
            Some(last) => it.fold(last, |acc, f| Formula::or(f, acc)),
        }
    }

    pub fn forall_many(vars: &[Var], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn exists_many(vars: &[Var], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// Free variables in first-occurrence order (no duplicates).
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound: Vec<String> = Vec::new();
        self.walk_free(&mut bound, &mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    fn walk_free(&self, bound: &mut Vec<String>, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => {
                for v in args {
                    if !bound.iter().any(|b| b == &v.name) {
                        f(v);
                    }
                }
            }
            Formula::Eq(a, b) => {
                for v in [a, b] {
                    if !bound.iter().any(|b2| b2 == &v.name) {
                        f(v);
                    }
                }
            }
            Formula::Not(a) => a.walk_free(bound, f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.walk_free(bound, f);
                b.walk_free(bound, f);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                bound.push(v.name.clone());
                a.walk_free(bound, f);
                bound.pop();
            }
        }
    }

    /// All variable names occurring anywhere (free or bound).
    pub fn all_var_names(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.walk_all(&mut |v| {
            out.insert(v.name.clone());
        });
        out
    }

    fn walk_all(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|v| f(v)),
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(a) => a.walk_all(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.walk_all(f);
                b.walk_all(f);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                f(v);
                a.walk_all(f);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// α-equivalence: equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn lookup(env: &[(String, usize)], name: &str) -> Option<usize> {
            env.iter().rev().find(|(n, _)| n == name).map(|(_, i)| *i)
        }
        fn var_eq(
            a: &Var,
            b: &Var,
            ea: &[(String, usize)],
            eb: &[(String, usize)],
        ) -> bool {
            if a.sort != b.sort {
                return false;
            }
            match (lookup(ea, &a.name), lookup(eb, &b.name)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => a.name == b.name,
                _ => false,
            }
        }
        fn go(
            a: &Formula,
            b: &Formula,
            ea: &mut Vec<(String, usize)>,
            eb: &mut Vec<(String, usize)>,
            depth: usize,
        ) -> bool {
            match (a, b) {
                (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
                (
                    Formula::Atom { pred: p, args: xs },
                    Formula::Atom { pred: q, args: ys },
                ) => {
                    p == q
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| var_eq(x, y, ea, eb))
                }
                (Formula::Eq(x1, x2), Formula::Eq(y1, y2)) => {
                    var_eq(x1, y1, ea, eb) && var_eq(x2, y2, ea, eb)
                }
                (Formula::Not(x), Formula::Not(y)) => go(x, y, ea, eb, depth),
                (Formula::And(x1, x2), Formula::And(y1, y2))
                | (Formula::Or(x1, x2), Formula::Or(y1, y2))
                | (Formula::Implies(x1, x2), Formula::Implies(y1, y2))
                | (Formula::Iff(x1, x2), Formula::Iff(y1, y2)) => {
                    go(x1, y1, ea, eb, depth) && go(x2, y2, ea, eb, depth)
                }
                (Formula::Forall(v, x), Formula::Forall(w, y))
                | (Formula::Exists(v, x), Formula::Exists(w, y)) => {
                    if v.sort != w.sort {
                        return false;
                    }
                    ea.push((v.name.clone(), depth));
                    eb.push((w.name.clone(), depth));
                    let r = go(x, y, ea, eb, depth + 1);
                    ea.pop();
                    eb.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new(), 0)
    }

    /// Capture-avoiding simultaneous renaming of free variables.
    ///
    /// `map` sends variable names to replacement variables; binders are
    /// renamed when they would capture a replacement.
    pub fn substitute(&self, map: &HashMap<String, Var>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let mut avoid: HashSet<String> = self.all_var_names();
        for v in map.values() {
            avoid.insert(v.name.clone());
        }
        self.subst_inner(map, &mut avoid)
    }

    fn subst_inner(&self, map: &HashMap<String, Var>, avoid: &mut HashSet<String>) -> Formula {
        let sub = |v: &Var, map: &HashMap<String, Var>| -> Var {
            map.get(&v.name).cloned().unwrap_or_else(|| v.clone())
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|v| sub(v, map)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(sub(a, map), sub(b, map)),
            Formula::Not(a) => Formula::not(a.subst_inner(map, avoid)),
            Formula::And(a, b) => {
                Formula::and(a.subst_inner(map, avoid), b.subst_inner(map, avoid))
            }
            Formula::Or(a, b) => {
                Formula::or(a.subst_inner(map, avoid), b.subst_inner(map, avoid))
            }
            Formula::Implies(a, b) => {
                Formula::implies(a.subst_inner(map, avoid), b.subst_inner(map, avoid))
            }
            Formula::Iff(a, b) => {
                Formula::iff(a.subst_inner(map, avoid), b.subst_inner(map, avoid))
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let mut inner = map.clone();
                inner.remove(&v.name);
                // Rename the binder when a replacement would be captured.
                let captured = inner
                    .iter()
                    .any(|(name, w)| w.name == v.name && a.has_free_name(name));
                let (v2, body) = if captured {
                    let fresh = fresh_name(&v.name, avoid);
                    avoid.insert(fresh.clone());
                    let v2 = Var::new(fresh.clone(), v.sort.clone());
                    let mut ren = HashMap::new();
                    ren.insert(v.name.clone(), v2.clone());
                    (v2, a.subst_inner(&ren, avoid).subst_inner(&inner, avoid))
                } else {
                    (v.clone(), a.subst_inner(&inner, avoid))
                };
                match self {
                    Formula::Forall(..) => Formula::forall(v2, body),
                    _ => Formula::exists(v2, body),
                }
            }
        }
    }

    fn has_free_name(&self, name: &str) -> bool {
        let mut found = false;
        let mut bound = Vec::new();
        self.walk_free(&mut bound, &mut |v| {
            if v.name == name {
                found = true;
            }
        });
        found
    }

    /// Canonical printed form with bound variables renamed positionally and
    /// the given free variables renamed to `%0`, `%1`, ... in order. Two
    /// formulas are α-equivalent iff their canonical strings (under
    /// corresponding free orders) coincide.
    pub fn canon_string(&self, free_order: &[Var]) -> String {
        let mut out = String::new();
        let free_idx: HashMap<&str, usize> = free_order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let mut bound: Vec<String> = Vec::new();
        self.canon_inner(&free_idx, &mut bound, &mut out);
        out
    }

    fn canon_inner(
        &self,
        free_idx: &HashMap<&str, usize>,
        bound: &mut Vec<String>,
        out: &mut String,
    ) {
        use std::fmt::Write;
        let var = |v: &Var, bound: &Vec<String>, out: &mut String| {
            if let Some(pos) = bound.iter().rposition(|b| b == &v.name) {
                let _ = write!(out, "!{}:{}", pos, v.sort);
            } else if let Some(i) = free_idx.get(v.name.as_str()) {
                let _ = write!(out, "%{}:{}", i, v.sort);
            } else {
                let _ = write!(out, "?{}:{}", v.name, v.sort);
            }
        };
        match self {
            Formula::True => out.push('T'),
            Formula::False => out.push('F'),
            Formula::Atom { pred, args } => {
                let _ = write!(out, "({}", pred);
                for a in args {
                    out.push(' ');
                    var(a, bound, out);
                }
                out.push(')');
            }
            Formula::Eq(a, b) => {
                out.push_str("(= ");
                var(a, bound, out);
                out.push(' ');
                var(b, bound, out);
                out.push(')');
            }
            Formula::Not(a) => {
                out.push_str("(~ ");
                a.canon_inner(free_idx, bound, out);
                out.push(')');
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let op = match self {
                    Formula::And(..) => "&",
                    Formula::Or(..) => "|",
                    Formula::Implies(..) => "->",
                    _ => "<->",
                };
                let _ = write!(out, "({} ", op);
                a.canon_inner(free_idx, bound, out);
                out.push(' ');
                b.canon_inner(free_idx, bound, out);
                out.push(')');
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                let q = if matches!(self, Formula::Forall(..)) { "all" } else { "ex" };
                let _ = write!(out, "({} {} ", q, v.sort);
                bound.push(v.name.clone());
                a.canon_inner(free_idx, bound, out);
                bound.pop();
                out.push(')');
            }
        }
    }

    /// Well-formedness over `sig` with the given free variables permitted.
    pub fn well_formed(&self, sig: &Signature, free: &[Var]) -> Result<()> {
        let mut env: Vec<Var> = free.to_vec();
        for v in free {
            if !sig.has_sort(&v.sort) {
                return Err(Error::IllFormed(format!(
                    "free variable {} has unknown sort {}",
                    v.name, v.sort
                )));
            }
        }
        self.wf_inner(sig, &mut env)
    }

    fn wf_inner(&self, sig: &Signature, env: &mut Vec<Var>) -> Result<()> {
        let resolve = |v: &Var, env: &Vec<Var>| -> Result<()> {
            match env.iter().rev().find(|w| w.name == v.name) {
                None => Err(Error::IllFormed(format!("unbound variable {}", v.name))),
                Some(w) if w.sort != v.sort => Err(Error::IllFormed(format!(
                    "variable {} used at sort {} but bound at sort {}",
                    v.name, v.sort, w.sort
                ))),
                _ => Ok(()),
            }
        };
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom { pred, args } => {
                let decl = sig.pred(pred).ok_or_else(|| {
                    Error::IllFormed(format!("unknown predicate {}", pred))
                })?;
                if decl.profile.len() != args.len() {
                    return Err(Error::IllFormed(format!(
                        "predicate {} has arity {}, applied to {} arguments",
                        pred,
                        decl.profile.len(),
                        args.len()
                    )));
                }
                for (v, s) in args.iter().zip(&decl.profile) {
                    if &v.sort != s {
                        return Err(Error::IllFormed(format!(
                            "argument {} of {} has sort {}, expected {}",
                            v.name, pred, v.sort, s
                        )));
                    }
                    resolve(v, env)?;
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                if a.sort != b.sort {
                    return Err(Error::IllFormed(format!(
                        "equality between sorts {} and {}",
                        a.sort, b.sort
                    )));
                }
                resolve(a, env)?;
                resolve(b, env)
            }
            Formula::Not(a) => a.wf_inner(sig, env),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.wf_inner(sig, env)?;
                b.wf_inner(sig, env)
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                if !sig.has_sort(&v.sort) {
                    return Err(Error::IllFormed(format!(
                        "quantifier binds {} at unknown sort {}",
                        v.name, v.sort
                    )));
                }
                env.push(v.clone());
                let r = a.wf_inner(sig, env);
                env.pop();
                r
            }
        }
    }

    /// Node count, used by generators and resource guards.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 1,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// A fresh name based on `base` avoiding `used`.
pub fn fresh_name(base: &str, used: &HashSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    for k in 1.. {
        let cand = format!("{}_{}", base, k);
        if !used.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// λ-abstracted formula: a body together with an ordered parameter list that
/// contains every free variable of the body. Compared modulo α-conversion
/// (parameters are positional).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoFormula {
    pub params: Vec<Var>,
    pub body: Formula,
}

impl ProtoFormula {
    pub fn new(params: Vec<Var>, body: Formula) -> Result<Self> {
        let pf = ProtoFormula { params, body };
        pf.validate()?;
        Ok(pf)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in &self.params {
            if !seen.insert(p.name.clone()) {
                return Err(Error::IllFormed(format!(
                    "duplicate parameter {} in proto-formula",
                    p.name
                )));
            }
        }
        for v in self.body.free_vars() {
            match self.params.iter().find(|p| p.name == v.name) {
                None => {
                    return Err(Error::IllFormed(format!(
                        "proto-formula body has free variable {} outside its parameters",
                        v.name
                    )))
                }
                Some(p) if p.sort != v.sort => {
                    return Err(Error::IllFormed(format!(
                        "parameter {} has sort {} but occurs at sort {}",
                        p.name, p.sort, v.sort
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// α-equivalence of proto-formulas: parameters correspond positionally.
    pub fn alpha_eq(&self, other: &ProtoFormula) -> bool {
        if self.params.len() != other.params.len() {
            return false;
        }
        if self
            .params
            .iter()
            .zip(&other.params)
            .any(|(a, b)| a.sort != b.sort)
        {
            return false;
        }
        self.body.canon_string(&self.params) == other.body.canon_string(&other.params)
    }

    /// Instantiate the parameters at the given variables (capture-avoiding).
    pub fn apply(&self, args: &[Var]) -> Result<Formula> {
        if args.len() != self.params.len() {
            return Err(Error::IllFormed(format!(
                "proto-formula of arity {} applied to {} arguments",
                self.params.len(),
                args.len()
            )));
        }
        for (p, a) in self.params.iter().zip(args) {
            if p.sort != a.sort {
                return Err(Error::IllFormed(format!(
                    "proto-formula parameter {} has sort {}, argument {} has sort {}",
                    p.name, p.sort, a.name, a.sort
                )));
            }
        }
        let map: HashMap<String, Var> = self
            .params
            .iter()
            .zip(args)
            .map(|(p, a)| (p.name.clone(), a.clone()))
            .collect();
        Ok(self.body.substitute(&map))
    }

    /// The proto-formula `λx0..x{n-1}. x0=x0 ∧ ... ∧ x{n-1}=x{n-1}` — the
    /// trivial ("whole domain") guard at the given sorts.
    pub fn trivial(params: Vec<Var>) -> Self {
        let body = Formula::conj(
            params
                .iter()
                .map(|v| Formula::Eq(v.clone(), v.clone()))
                .collect(),
        );
        ProtoFormula { params, body }
    }

    /// Is this α-equal to [`ProtoFormula::trivial`] of the same parameters?
    pub fn is_trivial(&self) -> bool {
        self.alpha_eq(&ProtoFormula::trivial(self.params.clone()))
    }
}

/// Declaration of a relation symbol: name and sort profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub profile: Vec<String>,
}

/// A relational many-sorted signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub sorts: Vec<String>,
    pub preds: Vec<PredDecl>,
}

/// The default sort of one-sorted signatures.
pub const DEFAULT_SORT: &str = "o";

impl Signature {
    pub fn new(name: impl Into<String>, sorts: Vec<String>, preds: Vec<PredDecl>) -> Result<Self> {
        let sig = Signature { name: name.into(), sorts, preds };
        if sig.sorts.is_empty() {
            return Err(Error::IllFormed("signature with no sorts".into()));
        }
        let mut seen = HashSet::new();
        for s in &sig.sorts {
            if !seen.insert(s.clone()) {
                return Err(Error::IllFormed(format!("duplicate sort {}", s)));
            }
        }
        let mut seen = HashSet::new();
        for p in &sig.preds {
            if !seen.insert(p.name.clone()) {
                return Err(Error::IllFormed(format!("duplicate predicate {}", p.name)));
            }
            for s in &p.profile {
                if !sig.has_sort(s) {
                    return Err(Error::IllFormed(format!(
                        "predicate {} uses unknown sort {}",
                        p.name, s
                    )));
                }
            }
        }
        Ok(sig)
    }

    pub fn has_sort(&self, s: &str) -> bool {
        self.sorts.iter().any(|t| t == s)
    }

    pub fn pred(&self, name: &str) -> Option<&PredDecl> {
        self.preds.iter().find(|p| p.name == name)
    }

    pub fn is_one_sorted(&self) -> bool {
        self.sorts.len() == 1
    }

    /// The unique sort of a one-sorted signature.
    pub fn only_sort(&self) -> Result<&str> {
        if self.sorts.len() == 1 {
            Ok(&self.sorts[0])
        } else {
            Err(Error::Precondition(format!(
                "signature {} is not one-sorted",
                self.name
            )))
        }
    }
}

/// A finitely axiomatized theory: signature, labeled axiom list (sentences),
/// and the macro table its source file declared (kept so that derived
/// formulas can be written against the same abbreviations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub signature: Signature,
    pub axioms: Vec<(String, Formula)>,
    pub macros: parse::MacroTable,
}

impl Theory {
    pub fn new(signature: Signature, axioms: Vec<(String, Formula)>) -> Result<Self> {
        let th = Theory { signature, axioms, macros: parse::MacroTable::default() };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (label, ax) in &self.axioms {
            if !seen.insert(label.clone()) {
                return Err(Error::IllFormed(format!("duplicate axiom label {}", label)));
            }
            ax.well_formed(&self.signature, &[])?;
            if !ax.is_closed() {
                return Err(Error::IllFormed(format!("axiom {} is not a sentence", label)));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.signature.name
    }

    /// Structural equality up to α-conversion of axiom bodies.
    pub fn alpha_eq(&self, other: &Theory) -> bool {
        self.signature == other.signature
            && self.axioms.len() == other.axioms.len()
            && self
                .axioms
                .iter()
                .zip(&other.axioms)
                .all(|((l1, a1), (l2, a2))| l1 == l2 && a1.alpha_eq(a2))
    }
}

/// Deterministic block of fresh variable names for multi-dimensional
/// translation application: `base` when `dim == 1`, else `base_0 .. base_{m-1}`,
/// bumped past collisions with `used`.
pub fn block_names(base: &str, dim: usize, used: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(dim);
    if dim == 1 {
        let n = fresh_name(base, used);
        used.insert(n.clone());
        out.push(n);
    } else {
        for j in 0..dim {
            let n = fresh_name(&format!("{}_{}", base, j), used);
            used.insert(n.clone());
            out.push(n);
        }
    }
    out
}

/// Ordered set of sort names occurring in a profile, used by translation
/// validation.
pub fn profile_sorts(profile: &[String]) -> BTreeSet<String> {
    profile.iter().cloned().collect()
}
