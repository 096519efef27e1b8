//! Parsing: formula ASCII syntax, proto-formulas, and theory files.
//!
//! Formula syntax: atoms `P(x,y)`; equality `x = y`; `true`; `false`; `~A`;
//! `A & B`; `A | B`; `A -> B`; `A <-> B`; `all x[:sort]. A`; `ex x[:sort]. A`.
//! Precedence `~` > `&` > `|` > `->` > `<->`; the binary connectives associate
//! to the right and a quantifier's scope extends maximally to the right.
//!
//! Files may declare macros (`def NAME(args) = FORMULA`). A macro body is
//! elaborated when declared; a use site is replaced by the instantiated body.
//! A relation or macro of arity k+1 may additionally be used as a k-ary
//! *function term* inside an atom or equality; such terms are eliminated by
//! existential graph expansion: `pi1(x) = pi1(y)` becomes
//! `ex u. ex v. (pi1(x,u) & pi1(y,v) & u = v)`, with witnesses hoisted in
//! left-to-right, innermost-first order.
//!
//! Variable sorts are resolved from binder annotations, predicate profiles and
//! equalities; in a one-sorted signature unannotated variables default to the
//! unique sort.

use super::{Formula, PredDecl, ProtoFormula, Signature, Theory, Var};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet};

/// Named macro definitions, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MacroTable {
    entries: Vec<(String, ProtoFormula)>,
}

impl MacroTable {
    pub fn get(&self, name: &str) -> Option<&ProtoFormula> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p)
    }

    pub fn insert(&mut self, name: String, proto: ProtoFormula) -> Result<()> {
        if self.get(&name).is_some() {
            return Err(Error::IllFormed(format!("macro {} defined twice", name)));
        }
        self.entries.push((name, proto));
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, ProtoFormula)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    All,
    Ex,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Semi,
    Equal,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    Iff,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Id(s) => format!("identifier {}", s),
            Tok::All => "all".into(),
            Tok::Ex => "ex".into(),
            Tok::True => "true".into(),
            Tok::False => "false".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
            Tok::Colon => ":".into(),
            Tok::Semi => ";".into(),
            Tok::Equal => "=".into(),
            Tok::Tilde => "~".into(),
            Tok::Amp => "&".into(),
            Tok::Pipe => "|".into(),
            Tok::Arrow => "->".into(),
            Tok::Iff => "<->".into(),
        }
    }
}

fn lex(text: &str, line: usize) -> Result<Vec<Tok>> {
    let err = |msg: String| Error::Parse { line, msg };
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(match s.as_str() {
                    "all" => Tok::All,
                    "ex" => Tok::Ex,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Id(s),
                });
            }
            '(' => {
                it.next();
                out.push(Tok::LParen);
            }
            ')' => {
                it.next();
                out.push(Tok::RParen);
            }
            '[' => {
                it.next();
                out.push(Tok::LBracket);
            }
            ']' => {
                it.next();
                out.push(Tok::RBracket);
            }
            ',' => {
                it.next();
                out.push(Tok::Comma);
            }
            '.' => {
                it.next();
                out.push(Tok::Dot);
            }
            ':' => {
                it.next();
                out.push(Tok::Colon);
            }
            ';' => {
                it.next();
                out.push(Tok::Semi);
            }
            '=' => {
                it.next();
                out.push(Tok::Equal);
            }
            '~' => {
                it.next();
                out.push(Tok::Tilde);
            }
            '&' => {
                it.next();
                out.push(Tok::Amp);
            }
            '|' => {
                it.next();
                out.push(Tok::Pipe);
            }
            '-' => {
                it.next();
                match it.next() {
                    Some('>') => out.push(Tok::Arrow),
                    _ => return Err(err("expected -> after -".into())),
                }
            }
            '<' => {
                it.next();
                match (it.next(), it.next()) {
                    (Some('-'), Some('>')) => out.push(Tok::Iff),
                    _ => return Err(err("expected <-> after <".into())),
                }
            }
            other => return Err(err(format!("unexpected character {:?}", other))),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Surface AST
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum STerm {
    Var { name: String, ann: Option<String> },
    App { name: String, args: Vec<STerm> },
}

#[derive(Debug, Clone)]
enum SFormula {
    True,
    False,
    Atom { name: String, args: Vec<STerm> },
    Eq(STerm, STerm),
    Not(Box<SFormula>),
    And(Box<SFormula>, Box<SFormula>),
    Or(Box<SFormula>, Box<SFormula>),
    Implies(Box<SFormula>, Box<SFormula>),
    Iff(Box<SFormula>, Box<SFormula>),
    Forall { id: usize, name: String, ann: Option<String>, body: Box<SFormula> },
    Exists { id: usize, name: String, ann: Option<String>, body: Box<SFormula> },
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    next_id: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok) -> Result<()> {
        match self.next() {
            Some(ref got) if got == t => Ok(()),
            Some(got) => Err(self.err(format!(
                "expected {}, found {}",
                t.describe(),
                got.describe()
            ))),
            None => Err(self.err(format!("expected {}, found end of input", t.describe()))),
        }
    }

    fn expect_id(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            Some(got) => Err(self.err(format!("expected identifier, found {}", got.describe()))),
            None => Err(self.err("expected identifier, found end of input")),
        }
    }

    fn fresh_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn formula(&mut self) -> Result<SFormula> {
        self.iff()
    }

    fn iff(&mut self) -> Result<SFormula> {
        let lhs = self.implies()?;
        if matches!(self.peek(), Some(Tok::Iff)) {
            self.next();
            let rhs = self.iff()?;
            Ok(SFormula::Iff(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<SFormula> {
        let lhs = self.or()?;
        if matches!(self.peek(), Some(Tok::Arrow)) {
            self.next();
            let rhs = self.implies()?;
            Ok(SFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<SFormula> {
        let lhs = self.and()?;
        if matches!(self.peek(), Some(Tok::Pipe)) {
            self.next();
            let rhs = self.or()?;
            Ok(SFormula::Or(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn and(&mut self) -> Result<SFormula> {
        let lhs = self.unary()?;
        if matches!(self.peek(), Some(Tok::Amp)) {
            self.next();
            let rhs = self.and()?;
            Ok(SFormula::And(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<SFormula> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.next();
                Ok(SFormula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::All) | Some(Tok::Ex) => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<SFormula> {
        let univ = matches!(self.next(), Some(Tok::All));
        let name = self.expect_id()?;
        let ann = if matches!(self.peek(), Some(Tok::Colon)) {
            self.next();
            Some(self.expect_id()?)
        } else {
            None
        };
        self.expect(&Tok::Dot)?;
        let body = Box::new(self.formula()?);
        let id = self.fresh_id();
        Ok(if univ {
            SFormula::Forall { id, name, ann, body }
        } else {
            SFormula::Exists { id, name, ann, body }
        })
    }

    fn primary(&mut self) -> Result<SFormula> {
        match self.peek() {
            Some(Tok::True) => {
                self.next();
                Ok(SFormula::True)
            }
            Some(Tok::False) => {
                self.next();
                Ok(SFormula::False)
            }
            Some(Tok::LParen) => {
                self.next();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Id(_)) => {
                let t = self.term()?;
                if matches!(self.peek(), Some(Tok::Equal)) {
                    self.next();
                    let u = self.term()?;
                    Ok(SFormula::Eq(t, u))
                } else {
                    match t {
                        STerm::App { name, args } => Ok(SFormula::Atom { name, args }),
                        STerm::Var { name, .. } => Err(self.err(format!(
                            "bare variable {} is not a formula (expected atom or equality)",
                            name
                        ))),
                    }
                }
            }
            Some(t) => {
                let d = t.describe();
                Err(self.err(format!("expected formula, found {}", d)))
            }
            None => Err(self.err("expected formula, found end of input")),
        }
    }

    fn term(&mut self) -> Result<STerm> {
        let name = self.expect_id()?;
        if matches!(self.peek(), Some(Tok::LParen)) {
            self.next();
            let mut args = Vec::new();
            if !matches!(self.peek(), Some(Tok::RParen)) {
                loop {
                    args.push(self.term()?);
                    if matches!(self.peek(), Some(Tok::Comma)) {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(&Tok::RParen)?;
            Ok(STerm::App { name, args })
        } else if matches!(self.peek(), Some(Tok::Colon)) {
            self.next();
            let ann = self.expect_id()?;
            Ok(STerm::Var { name, ann: Some(ann) })
        } else {
            Ok(STerm::Var { name, ann: None })
        }
    }

    /// `name[:sort]` items separated by commas; used for parameter lists.
    fn param_list(&mut self, terminator: &Tok) -> Result<Vec<(String, Option<String>)>> {
        let mut out = Vec::new();
        if self.peek() == Some(terminator) {
            self.next();
            return Ok(out);
        }
        loop {
            let name = self.expect_id()?;
            let ann = if matches!(self.peek(), Some(Tok::Colon)) {
                self.next();
                Some(self.expect_id()?)
            } else {
                None
            };
            out.push((name, ann));
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(ref t) if t == terminator => break,
                Some(t) => {
                    return Err(self.err(format!(
                        "expected , or {}, found {}",
                        terminator.describe(),
                        t.describe()
                    )))
                }
                None => return Err(self.err("unterminated parameter list")),
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Functional-term elimination
// ---------------------------------------------------------------------------

fn collect_names(sf: &SFormula, out: &mut HashSet<String>) {
    fn term(t: &STerm, out: &mut HashSet<String>) {
        match t {
            STerm::Var { name, .. } => {
                out.insert(name.clone());
            }
            STerm::App { args, .. } => args.iter().for_each(|a| term(a, out)),
        }
    }
    match sf {
        SFormula::True | SFormula::False => {}
        SFormula::Atom { args, .. } => args.iter().for_each(|a| term(a, out)),
        SFormula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        SFormula::Not(a) => collect_names(a, out),
        SFormula::And(a, b)
        | SFormula::Or(a, b)
        | SFormula::Implies(a, b)
        | SFormula::Iff(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        SFormula::Forall { name, body, .. } | SFormula::Exists { name, body, .. } => {
            out.insert(name.clone());
            collect_names(body, out);
        }
    }
}

struct Eliminator<'a> {
    arity_of: &'a dyn Fn(&str) -> Option<usize>,
    used: HashSet<String>,
    line: usize,
    next_id: usize,
}

impl<'a> Eliminator<'a> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { line: self.line, msg }
    }

    fn fresh_witness(&mut self) -> String {
        let name = super::fresh_name("w", &self.used);
        self.used.insert(name.clone());
        name
    }

    /// Flatten a term to a variable, pushing (witness, graph-atom) pairs.
    fn flatten(&mut self, t: STerm, pre: &mut Vec<(String, SFormula)>) -> Result<STerm> {
        match t {
            STerm::Var { .. } => Ok(t),
            STerm::App { name, args } => {
                let mut flat = Vec::with_capacity(args.len() + 1);
                for a in args {
                    flat.push(self.flatten(a, pre)?);
                }
                let k = (self.arity_of)(&name).ok_or_else(|| {
                    self.err(format!("unknown relation or macro {} used as a function", name))
                })?;
                if flat.len() + 1 != k {
                    return Err(self.err(format!(
                        "{} has arity {}; functional use needs {} arguments, found {}",
                        name,
                        k,
                        k - 1,
                        flat.len()
                    )));
                }
                let w = self.fresh_witness();
                flat.push(STerm::Var { name: w.clone(), ann: None });
                pre.push((w.clone(), SFormula::Atom { name, args: flat }));
                Ok(STerm::Var { name: w, ann: None })
            }
        }
    }

    fn wrap(&mut self, pre: Vec<(String, SFormula)>, atom: SFormula) -> SFormula {
        let mut body = atom;
        let graphs: Vec<SFormula> = pre.iter().map(|(_, g)| g.clone()).collect();
        for g in graphs.into_iter().rev() {
            body = SFormula::And(Box::new(g), Box::new(body));
        }
        for (w, _) in pre.into_iter().rev() {
            let id = self.next_id;
            self.next_id += 1;
            body = SFormula::Exists { id, name: w, ann: None, body: Box::new(body) };
        }
        body
    }

    fn eliminate(&mut self, sf: SFormula) -> Result<SFormula> {
        Ok(match sf {
            SFormula::True | SFormula::False => sf,
            SFormula::Atom { name, args } => {
                let mut pre = Vec::new();
                let mut flat = Vec::with_capacity(args.len());
                for a in args {
                    flat.push(self.flatten(a, &mut pre)?);
                }
                let atom = SFormula::Atom { name, args: flat };
                if pre.is_empty() {
                    atom
                } else {
                    self.wrap(pre, atom)
                }
            }
            SFormula::Eq(a, b) => {
                let mut pre = Vec::new();
                let a = self.flatten(a, &mut pre)?;
                let b = self.flatten(b, &mut pre)?;
                let atom = SFormula::Eq(a, b);
                if pre.is_empty() {
                    atom
                } else {
                    self.wrap(pre, atom)
                }
            }
            SFormula::Not(a) => SFormula::Not(Box::new(self.eliminate(*a)?)),
            SFormula::And(a, b) => SFormula::And(
                Box::new(self.eliminate(*a)?),
                Box::new(self.eliminate(*b)?),
            ),
            SFormula::Or(a, b) => SFormula::Or(
                Box::new(self.eliminate(*a)?),
                Box::new(self.eliminate(*b)?),
            ),
            SFormula::Implies(a, b) => SFormula::Implies(
                Box::new(self.eliminate(*a)?),
                Box::new(self.eliminate(*b)?),
            ),
            SFormula::Iff(a, b) => SFormula::Iff(
                Box::new(self.eliminate(*a)?),
                Box::new(self.eliminate(*b)?),
            ),
            SFormula::Forall { id, name, ann, body } => SFormula::Forall {
                id,
                name,
                ann,
                body: Box::new(self.eliminate(*body)?),
            },
            SFormula::Exists { id, name, ann, body } => SFormula::Exists {
                id,
                name,
                ann,
                body: Box::new(self.eliminate(*body)?),
            },
        })
    }
}

// ---------------------------------------------------------------------------
// Sort resolution and lowering
// ---------------------------------------------------------------------------

struct Resolver<'a> {
    sig: &'a Signature,
    macros: &'a MacroTable,
    line: usize,
    binder_sorts: HashMap<usize, Option<String>>,
    /// Free variables in first-occurrence order.
    free_sorts: Vec<(String, Option<String>)>,
    changed: bool,
}

enum Slot {
    Binder(usize),
    Free(usize),
}

impl<'a> Resolver<'a> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { line: self.line, msg }
    }

    fn profile_of(&self, name: &str, arity: usize) -> Result<Vec<String>> {
        if let Some(p) = self.sig.pred(name) {
            if p.profile.len() != arity {
                return Err(self.err(format!(
                    "predicate {} has arity {}, applied to {} arguments",
                    name,
                    p.profile.len(),
                    arity
                )));
            }
            return Ok(p.profile.clone());
        }
        if let Some(m) = self.macros.get(name) {
            if m.arity() != arity {
                return Err(self.err(format!(
                    "macro {} has arity {}, applied to {} arguments",
                    name,
                    m.arity(),
                    arity
                )));
            }
            return Ok(m.params.iter().map(|v| v.sort.clone()).collect());
        }
        Err(self.err(format!("unknown predicate or macro {}", name)))
    }

    fn slot_of(&mut self, name: &str, scope: &[(usize, String)]) -> Slot {
        if let Some((id, _)) = scope.iter().rev().find(|(_, n)| n == name) {
            return Slot::Binder(*id);
        }
        if let Some(i) = self.free_sorts.iter().position(|(n, _)| n == name) {
            return Slot::Free(i);
        }
        self.free_sorts.push((name.to_string(), None));
        Slot::Free(self.free_sorts.len() - 1)
    }

    fn slot_value(&self, slot: &Slot) -> Option<String> {
        match slot {
            Slot::Binder(id) => self.binder_sorts.get(id).cloned().flatten(),
            Slot::Free(i) => self.free_sorts[*i].1.clone(),
        }
    }

    fn constrain_slot(&mut self, name: &str, slot: &Slot, sort: &str) -> Result<()> {
        let cur = match slot {
            Slot::Binder(id) => self.binder_sorts.entry(*id).or_insert(None),
            Slot::Free(i) => &mut self.free_sorts[*i].1,
        };
        match cur {
            None => {
                *cur = Some(sort.to_string());
                self.changed = true;
                Ok(())
            }
            Some(s) if s == sort => Ok(()),
            Some(s) => Err(Error::Parse {
                line: self.line,
                msg: format!("variable {} used at both sort {} and sort {}", name, s, sort),
            }),
        }
    }

    fn constrain_var(
        &mut self,
        t: &STerm,
        expected: Option<&str>,
        scope: &[(usize, String)],
    ) -> Result<()> {
        let STerm::Var { name, ann } = t else {
            return Err(self.err("internal: unexpected function term after elimination".into()));
        };
        let slot = self.slot_of(name, scope);
        if let Some(a) = ann {
            let a = a.clone();
            self.constrain_slot(name, &slot, &a)?;
        }
        if let Some(e) = expected {
            self.constrain_slot(name, &slot, e)?;
        }
        Ok(())
    }

    fn pass(&mut self, sf: &SFormula, scope: &mut Vec<(usize, String)>) -> Result<()> {
        match sf {
            SFormula::True | SFormula::False => Ok(()),
            SFormula::Atom { name, args } => {
                let profile = self.profile_of(name, args.len())?;
                for (a, s) in args.iter().zip(profile) {
                    self.constrain_var(a, Some(&s), scope)?;
                }
                Ok(())
            }
            SFormula::Eq(a, b) => {
                self.constrain_var(a, None, scope)?;
                self.constrain_var(b, None, scope)?;
                // Propagate a known sort across the equality.
                let sa = {
                    let STerm::Var { name, .. } = a else { unreachable!() };
                    let slot = self.slot_of(name, scope);
                    self.slot_value(&slot)
                };
                let sb = {
                    let STerm::Var { name, .. } = b else { unreachable!() };
                    let slot = self.slot_of(name, scope);
                    self.slot_value(&slot)
                };
                match (sa, sb) {
                    (Some(s), None) => self.constrain_var(b, Some(&s), scope),
                    (None, Some(s)) => self.constrain_var(a, Some(&s), scope),
                    _ => Ok(()),
                }
            }
            SFormula::Not(a) => self.pass(a, scope),
            SFormula::And(a, b)
            | SFormula::Or(a, b)
            | SFormula::Implies(a, b)
            | SFormula::Iff(a, b) => {
                self.pass(a, scope)?;
                self.pass(b, scope)
            }
            SFormula::Forall { id, name, ann, body }
            | SFormula::Exists { id, name, ann, body } => {
                if let Some(a) = ann {
                    let a = a.clone();
                    self.constrain_slot(name, &Slot::Binder(*id), &a)?;
                } else {
                    self.binder_sorts.entry(*id).or_insert(None);
                }
                scope.push((*id, name.clone()));
                let r = self.pass(body, scope);
                scope.pop();
                r
            }
        }
    }

    fn finalize(&mut self) -> Result<()> {
        let default = if self.sig.is_one_sorted() {
            Some(self.sig.sorts[0].clone())
        } else {
            None
        };
        for v in self.binder_sorts.values_mut() {
            if v.is_none() {
                match &default {
                    Some(d) => *v = Some(d.clone()),
                    None => {
                        return Err(Error::Parse {
                            line: self.line,
                            msg: "cannot infer the sort of a bound variable; add a :sort annotation"
                                .into(),
                        })
                    }
                }
            }
        }
        for (name, v) in self.free_sorts.iter_mut() {
            if v.is_none() {
                match &default {
                    Some(d) => *v = Some(d.clone()),
                    None => {
                        return Err(Error::Parse {
                            line: self.line,
                            msg: format!(
                                "cannot infer the sort of free variable {}; add a :sort annotation",
                                name
                            ),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    fn build(&self, sf: &SFormula, scope: &mut Vec<(usize, String)>) -> Result<Formula> {
        let var = |r: &Self, t: &STerm, scope: &[(usize, String)]| -> Result<Var> {
            let STerm::Var { name, .. } = t else {
                return Err(r.err("internal: function term survived elimination".into()));
            };
            let sort = if let Some((id, _)) = scope.iter().rev().find(|(_, n)| n == name) {
                self.binder_sorts[id].clone().unwrap()
            } else {
                self.free_sorts
                    .iter()
                    .find(|(n, _)| n == name)
                    .and_then(|(_, s)| s.clone())
                    .ok_or_else(|| r.err(format!("internal: unresolved variable {}", name)))?
            };
            Ok(Var::new(name.clone(), sort))
        };
        Ok(match sf {
            SFormula::True => Formula::True,
            SFormula::False => Formula::False,
            SFormula::Atom { name, args } => {
                let vars: Vec<Var> = args
                    .iter()
                    .map(|a| var(self, a, scope))
                    .collect::<Result<_>>()?;
                if self.sig.pred(name).is_some() {
                    Formula::Atom { pred: name.clone(), args: vars }
                } else if let Some(m) = self.macros.get(name) {
                    m.apply(&vars)?
                } else {
                    return Err(self.err(format!("unknown predicate or macro {}", name)));
                }
            }
            SFormula::Eq(a, b) => {
                let va = var(self, a, scope)?;
                let vb = var(self, b, scope)?;
                if va.sort != vb.sort {
                    return Err(self.err(format!(
                        "equality between sorts {} and {}",
                        va.sort, vb.sort
                    )));
                }
                Formula::Eq(va, vb)
            }
            SFormula::Not(a) => Formula::not(self.build(a, scope)?),
            SFormula::And(a, b) => {
                Formula::and(self.build(a, scope)?, self.build(b, scope)?)
            }
            SFormula::Or(a, b) => Formula::or(self.build(a, scope)?, self.build(b, scope)?),
            SFormula::Implies(a, b) => {
                Formula::implies(self.build(a, scope)?, self.build(b, scope)?)
            }
            SFormula::Iff(a, b) => {
                Formula::iff(self.build(a, scope)?, self.build(b, scope)?)
            }
            SFormula::Forall { id, name, body, .. } | SFormula::Exists { id, name, body, .. } => {
                let sort = self.binder_sorts[id].clone().unwrap();
                let v = Var::new(name.clone(), sort);
                scope.push((*id, name.clone()));
                let inner = self.build(body, scope)?;
                scope.pop();
                match sf {
                    SFormula::Forall { .. } => Formula::forall(v, inner),
                    _ => Formula::exists(v, inner),
                }
            }
        })
    }
}

fn elaborate(
    sig: &Signature,
    macros: &MacroTable,
    surface: SFormula,
    declared_free: &[Var],
    next_id: usize,
    line: usize,
) -> Result<(Formula, Vec<Var>)> {
    // 1. Eliminate function terms.
    let mut used = HashSet::new();
    collect_names(&surface, &mut used);
    for v in declared_free {
        used.insert(v.name.clone());
    }
    let arity_of = |name: &str| -> Option<usize> {
        sig.pred(name)
            .map(|p| p.profile.len())
            .or_else(|| macros.get(name).map(|m| m.arity()))
    };
    let mut elim = Eliminator { arity_of: &arity_of, used, line, next_id };
    let surface = elim.eliminate(surface)?;

    // 2. Resolve sorts to a fixpoint.
    let mut res = Resolver {
        sig,
        macros,
        line,
        binder_sorts: HashMap::new(),
        free_sorts: declared_free
            .iter()
            .map(|v| (v.name.clone(), Some(v.sort.clone())))
            .collect(),
        changed: true,
    };
    let mut rounds = 0usize;
    while res.changed {
        res.changed = false;
        res.pass(&surface, &mut Vec::new())?;
        rounds += 1;
        if rounds > 1000 {
            return Err(Error::Parse { line, msg: "sort resolution did not converge".into() });
        }
    }
    res.finalize()?;

    // 3. Lower to the core language and check well-formedness.
    let formula = res.build(&surface, &mut Vec::new())?;
    let free: Vec<Var> = res
        .free_sorts
        .iter()
        .map(|(n, s)| Var::new(n.clone(), s.clone().unwrap()))
        .collect();
    formula.well_formed(sig, &free).map_err(|e| Error::Parse {
        line,
        msg: format!("elaborated formula ill-formed: {}", e),
    })?;
    Ok((formula, free))
}

/// Parse a formula whose free variables must come from `free`.
pub fn parse_formula(
    sig: &Signature,
    macros: &MacroTable,
    text: &str,
    free: &[Var],
) -> Result<Formula> {
    parse_formula_at(sig, macros, text, free, 0)
}

pub fn parse_formula_at(
    sig: &Signature,
    macros: &MacroTable,
    text: &str,
    free: &[Var],
    line: usize,
) -> Result<Formula> {
    let toks = lex(text, line)?;
    let mut p = Parser { toks, pos: 0, line, next_id: 0 };
    let sf = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(p.err(format!("unexpected {} after formula", t.describe())));
    }
    let next_id = p.next_id;
    let (f, occurring) = elaborate(sig, macros, sf, free, next_id, line)?;
    for v in &occurring {
        if !free.iter().any(|w| w.name == v.name) {
            return Err(Error::Parse {
                line,
                msg: format!("unexpected free variable {}", v.name),
            });
        }
    }
    Ok(f)
}

/// Parse a formula, returning its free variables in first-occurrence order.
pub fn parse_formula_open(
    sig: &Signature,
    macros: &MacroTable,
    text: &str,
) -> Result<(Formula, Vec<Var>)> {
    let toks = lex(text, 0)?;
    let mut p = Parser { toks, pos: 0, line: 0, next_id: 0 };
    let sf = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(p.err(format!("unexpected {} after formula", t.describe())));
    }
    let next_id = p.next_id;
    elaborate(sig, macros, sf, &[], next_id, 0)
}

/// Parse a proto-formula `[x, y:sort, ...] FORMULA`.
pub fn parse_proto(sig: &Signature, macros: &MacroTable, text: &str) -> Result<ProtoFormula> {
    parse_proto_at(sig, macros, text, 0)
}

pub fn parse_proto_at(
    sig: &Signature,
    macros: &MacroTable,
    text: &str,
    line: usize,
) -> Result<ProtoFormula> {
    let toks = lex(text, line)?;
    let mut p = Parser { toks, pos: 0, line, next_id: 0 };
    p.expect(&Tok::LBracket)?;
    let params = p.param_list(&Tok::RBracket)?;
    let sf = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(p.err(format!("unexpected {} after formula", t.describe())));
    }
    let next_id = p.next_id;
    finish_proto(sig, macros, params, sf, next_id, line)
}

/// Elaborate a parameterized body into a proto-formula, inferring parameter
/// sorts not given by annotations.
fn finish_proto(
    sig: &Signature,
    macros: &MacroTable,
    params: Vec<(String, Option<String>)>,
    sf: SFormula,
    next_id: usize,
    line: usize,
) -> Result<ProtoFormula> {
    let declared: Vec<Var> = params
        .iter()
        .filter_map(|(n, a)| a.as_ref().map(|s| Var::new(n.clone(), s.clone())))
        .collect();
    let (body, free) = elaborate(sig, macros, sf, &declared, next_id, line)?;
    let default = if sig.is_one_sorted() { Some(sig.sorts[0].clone()) } else { None };
    let mut vars = Vec::with_capacity(params.len());
    let mut seen = HashSet::new();
    for (n, a) in &params {
        if !seen.insert(n.clone()) {
            return Err(Error::Parse { line, msg: format!("duplicate parameter {}", n) });
        }
        let sort = a
            .clone()
            .or_else(|| free.iter().find(|v| &v.name == n).map(|v| v.sort.clone()))
            .or_else(|| default.clone())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("cannot infer the sort of parameter {}; add a :sort annotation", n),
            })?;
        vars.push(Var::new(n.clone(), sort));
    }
    for v in &free {
        if !vars.iter().any(|p| p.name == v.name) {
            return Err(Error::Parse {
                line,
                msg: format!("free variable {} is not among the declared parameters", v.name),
            });
        }
    }
    ProtoFormula::new(vars, body).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

// ---------------------------------------------------------------------------
// Declaration splitting for line-oriented files
// ---------------------------------------------------------------------------

/// Split a line-oriented file into declarations. A declaration starts at a
/// line whose first token satisfies `is_start`; following lines are folded in
/// (multi-line formulas). `#` starts a comment.
pub fn split_decls(text: &str, is_start: &dyn Fn(&str) -> bool) -> Result<Vec<(usize, String)>> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let first = trimmed.split_whitespace().next().unwrap();
        if is_start(first) {
            out.push((i + 1, trimmed.to_string()));
        } else {
            match out.last_mut() {
                Some((_, acc)) => {
                    acc.push(' ');
                    acc.push_str(trimmed);
                }
                None => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("unexpected content before the first declaration: {}", trimmed),
                    })
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Theory files
// ---------------------------------------------------------------------------

const THEORY_KEYWORDS: [&str; 5] = ["theory", "sort", "pred", "def", "axiom"];

/// Parse a theory file.
///
/// Grammar (line-oriented, `#` comments):
/// `theory NAME` / `sort NAME...` (optional; default one sort `o`) /
/// `pred NAME/ARITY [: SORT,...,SORT]` / `def NAME(args) = FORMULA` /
/// `axiom LABEL: FORMULA`.
pub fn parse_theory(text: &str) -> Result<Theory> {
    let decls = split_decls(text, &|w| THEORY_KEYWORDS.contains(&w))?;
    if decls.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty theory file".into() });
    }
    let (first_line, first) = &decls[0];
    let mut words = first.split_whitespace();
    if words.next() != Some("theory") {
        return Err(Error::Parse {
            line: *first_line,
            msg: "theory file must start with: theory NAME".into(),
        });
    }
    let name = words
        .next()
        .ok_or_else(|| Error::Parse { line: *first_line, msg: "missing theory name".into() })?
        .to_string();
    if words.next().is_some() {
        return Err(Error::Parse {
            line: *first_line,
            msg: "unexpected tokens after theory name".into(),
        });
    }

    // Sorts and predicates first (order-independent), then defs/axioms in
    // file order.
    let mut sorts: Vec<String> = Vec::new();
    let mut preds: Vec<PredDecl> = Vec::new();
    for (line, decl) in decls.iter().skip(1) {
        let kw = decl.split_whitespace().next().unwrap();
        match kw {
            "sort" => {
                for s in decl.split_whitespace().skip(1) {
                    sorts.push(s.to_string());
                }
            }
            "pred" => preds.push(parse_pred_decl(decl, *line)?),
            "theory" => {
                return Err(Error::Parse {
                    line: *line,
                    msg: "duplicate theory declaration".into(),
                })
            }
            _ => {}
        }
    }
    if sorts.is_empty() {
        sorts.push(super::DEFAULT_SORT.to_string());
    }
    // An unannotated predicate profile defaults to the unique sort.
    let sig = Signature::new(name, sorts, preds)?;

    let mut macros = MacroTable::default();
    let mut axioms: Vec<(String, Formula)> = Vec::new();
    for (line, decl) in decls.iter().skip(1) {
        let kw = decl.split_whitespace().next().unwrap();
        match kw {
            "def" => {
                let rest = decl["def".len()..].trim();
                let (mname, proto) = parse_def(&sig, &macros, rest, *line)?;
                if sig.pred(&mname).is_some() {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("macro {} collides with a predicate", mname),
                    });
                }
                macros
                    .insert(mname, proto)
                    .map_err(|e| Error::Parse { line: *line, msg: e.to_string() })?;
            }
            "axiom" => {
                let rest = decl["axiom".len()..].trim();
                let Some(colon) = rest.find(':') else {
                    return Err(Error::Parse {
                        line: *line,
                        msg: "expected: axiom LABEL: FORMULA".into(),
                    });
                };
                let label = rest[..colon].trim().to_string();
                if label.is_empty() || label.split_whitespace().count() != 1 {
                    return Err(Error::Parse {
                        line: *line,
                        msg: "axiom label must be a single identifier".into(),
                    });
                }
                let f = parse_formula_at(&sig, &macros, rest[colon + 1..].trim(), &[], *line)?;
                if !f.is_closed() {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("axiom {} is not a sentence", label),
                    });
                }
                axioms.push((label, f));
            }
            _ => {}
        }
    }

    let mut th = Theory::new(sig, axioms)?;
    th.macros = macros;
    Ok(th)
}

fn parse_pred_decl(decl: &str, line: usize) -> Result<PredDecl> {
    // pred NAME/ARITY [: SORT,...,SORT]
    let rest = decl["pred".len()..].trim();
    let (head, sorts_part) = match rest.find(':') {
        Some(p) => (rest[..p].trim(), Some(rest[p + 1..].trim())),
        None => (rest, None),
    };
    let Some(slash) = head.find('/') else {
        return Err(Error::Parse { line, msg: "expected: pred NAME/ARITY".into() });
    };
    let name = head[..slash].trim().to_string();
    let arity: usize = head[slash + 1..].trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad arity in predicate declaration for {}", name),
    })?;
    let profile: Vec<String> = match sorts_part {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect(),
        // Placeholder profile; rewritten below for the one-sorted default.
        None => vec![super::DEFAULT_SORT.to_string(); arity],
    };
    if profile.len() != arity {
        return Err(Error::Parse {
            line,
            msg: format!(
                "predicate {} declares arity {} but lists {} sorts",
                name,
                arity,
                profile.len()
            ),
        });
    }
    Ok(PredDecl { name, profile })
}

/// Parse the tail of a `def` declaration: `NAME(args) = FORMULA`.
pub fn parse_def(
    sig: &Signature,
    macros: &MacroTable,
    rest: &str,
    line: usize,
) -> Result<(String, ProtoFormula)> {
    // NAME(args) = FORMULA
    let Some(eq) = rest.find('=') else {
        return Err(Error::Parse { line, msg: "expected: def NAME(args) = FORMULA".into() });
    };
    let head = rest[..eq].trim();
    let body_text = rest[eq + 1..].trim();
    let toks = lex(head, line)?;
    let mut p = Parser { toks, pos: 0, line, next_id: 0 };
    let name = p.expect_id()?;
    p.expect(&Tok::LParen)?;
    let params = p.param_list(&Tok::RParen)?;
    if p.peek().is_some() {
        return Err(p.err("unexpected tokens after macro parameter list"));
    }

    let toks = lex(body_text, line)?;
    let mut bp = Parser { toks, pos: 0, line, next_id: 0 };
    let sf = bp.formula()?;
    if let Some(t) = bp.peek() {
        return Err(bp.err(format!("unexpected {} after formula", t.describe())));
    }
    let next_id = bp.next_id;
    let proto = finish_proto(sig, macros, params, sf, next_id, line)?;
    Ok((name, proto))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::DEFAULT_SORT;

    fn sig_as() -> Signature {
        Signature::new(
            "AS",
            vec![DEFAULT_SORT.to_string()],
            vec![PredDecl { name: "in".into(), profile: vec!["o".into(), "o".into()] }],
        )
        .unwrap()
    }

    fn v(n: &str) -> Var {
        Var::new(n, "o")
    }

    #[test]
    fn parses_quantified_sentence() {
        let sig = sig_as();
        let f = parse_formula(&sig, &MacroTable::default(), "ex x. all y. ~ in(y,x)", &[])
            .unwrap();
        let want = Formula::exists(
            v("x"),
            Formula::forall(v("y"), Formula::not(Formula::atom("in", vec![v("y"), v("x")]))),
        );
        assert!(f.alpha_eq(&want));
        assert!(f.is_closed());
    }

    #[test]
    fn precedence_and_associativity() {
        let sig = Signature::new(
            "P",
            vec!["o".into()],
            vec![
                PredDecl { name: "p".into(), profile: vec!["o".into()] },
                PredDecl { name: "q".into(), profile: vec!["o".into()] },
                PredDecl { name: "r".into(), profile: vec!["o".into()] },
            ],
        )
        .unwrap();
        let m = MacroTable::default();
        let x = &[v("x")][..];
        let f = parse_formula(&sig, &m, "~p(x) & q(x) | r(x) -> p(x) -> q(x)", x).unwrap();
        let want = Formula::implies(
            Formula::or(
                Formula::and(
                    Formula::not(Formula::atom("p", vec![v("x")])),
                    Formula::atom("q", vec![v("x")]),
                ),
                Formula::atom("r", vec![v("x")]),
            ),
            Formula::implies(
                Formula::atom("p", vec![v("x")]),
                Formula::atom("q", vec![v("x")]),
            ),
        );
        assert!(f.alpha_eq(&want));
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let sig = sig_as();
        let m = MacroTable::default();
        let f = parse_formula(&sig, &m, "all x. in(x,x) -> in(x,x)", &[]).unwrap();
        let inner = Formula::implies(
            Formula::atom("in", vec![v("x"), v("x")]),
            Formula::atom("in", vec![v("x"), v("x")]),
        );
        assert!(f.alpha_eq(&Formula::forall(v("x"), inner)));
    }

    #[test]
    fn functional_term_expansion_matches_graph_reading() {
        let sig = sig_as();
        let mut macros = MacroTable::default();
        // pi1(x, u): fake graph macro for the test.
        let proto = ProtoFormula::new(
            vec![v("x"), v("u")],
            Formula::atom("in", vec![v("u"), v("x")]),
        )
        .unwrap();
        macros.insert("pi1".into(), proto).unwrap();
        let f = parse_formula(
            &sig,
            &macros,
            "in(pi1(x), pi1(y))",
            &[v("x"), v("y")],
        )
        .unwrap();
        let want = Formula::exists(
            v("u"),
            Formula::exists(
                v("vv"),
                Formula::and(
                    Formula::atom("in", vec![v("u"), v("x")]),
                    Formula::and(
                        Formula::atom("in", vec![v("vv"), v("y")]),
                        Formula::atom("in", vec![v("u"), v("vv")]),
                    ),
                ),
            ),
        );
        assert!(f.alpha_eq(&want), "got {:?}", f);
    }

    #[test]
    fn functional_equality_expansion() {
        let sig = sig_as();
        let mut macros = MacroTable::default();
        let proto = ProtoFormula::new(
            vec![v("x"), v("u")],
            Formula::atom("in", vec![v("u"), v("x")]),
        )
        .unwrap();
        macros.insert("f".into(), proto).unwrap();
        let f = parse_formula(&sig, &macros, "f(x) = y", &[v("x"), v("y")]).unwrap();
        let want = Formula::exists(
            v("w"),
            Formula::and(
                Formula::atom("in", vec![v("w"), v("x")]),
                Formula::Eq(v("w"), v("y")),
            ),
        );
        assert!(f.alpha_eq(&want));
    }

    #[test]
    fn theory_file_roundtrip_basics() {
        let text = "\
# adjunctive set theory
theory AS
pred in/2
axiom as1: ex x. all y. ~ in(y,x)
axiom as2: all x. all y. ex z. all u.
  (in(u,z) <-> (in(u,x) | u = y))
";
        let th = parse_theory(text).unwrap();
        assert_eq!(th.name(), "AS");
        assert_eq!(th.axioms.len(), 2);
        assert_eq!(th.axioms[0].0, "as1");
        assert!(th.axioms[1].1.is_closed());
    }

    #[test]
    fn theory_macros_expand() {
        let text = "\
theory T
pred in/2
def empty(x) = ~ ex w. in(w,x)
axiom a1: ex x. empty(x)
";
        let th = parse_theory(text).unwrap();
        let want = Formula::exists(
            v("x"),
            Formula::not(Formula::exists(v("w"), Formula::atom("in", vec![v("w"), v("x")]))),
        );
        assert!(th.axioms[0].1.alpha_eq(&want));
    }

    #[test]
    fn arity_error_reported() {
        let text = "\
theory T
pred p/1
axiom bad: all x. all y. p(x,y)
";
        let e = parse_theory(text).unwrap_err();
        assert!(e.to_string().contains("arity"), "{}", e);
    }

    #[test]
    fn two_sorted_annotations() {
        let text = "\
theory AC
sort o c
pred in/2 : o, c
axiom ac1: all x:o. all y:o. ex z:c. all u:o. (in(u,z) <-> (u = x | u = y))
";
        let th = parse_theory(text).unwrap();
        assert_eq!(th.signature.sorts, vec!["o".to_string(), "c".to_string()]);
        // Sort inference propagates through the profile.
        let f = parse_formula(
            &th.signature,
            &th.macros,
            "all z:c. ex u. in(u,z)",
            &[],
        )
        .unwrap();
        if let Formula::Forall(zv, body) = &f {
            assert_eq!(zv.sort, "c");
            if let Formula::Exists(uv, _) = body.as_ref() {
                assert_eq!(uv.sort, "o");
            } else {
                panic!("shape");
            }
        } else {
            panic!("shape");
        }
    }

    #[test]
    fn unannotated_many_sorted_equality_fails() {
        let sig = Signature::new("S", vec!["a".into(), "b".into()], vec![]).unwrap();
        let e = parse_formula_open(&sig, &MacroTable::default(), "all x. all y. x = y");
        assert!(e.is_err());
    }

    #[test]
    fn proto_parse_and_alpha() {
        let sig = sig_as();
        let m = MacroTable::default();
        let p1 = parse_proto(&sig, &m, "[x, y] in(x,y)").unwrap();
        let p2 = parse_proto(&sig, &m, "[u, v] in(u,v)").unwrap();
        let p3 = parse_proto(&sig, &m, "[u, v] in(v,u)").unwrap();
        assert!(p1.alpha_eq(&p2));
        assert!(!p1.alpha_eq(&p3));
    }

    #[test]
    fn substitution_capture_avoidance_via_macro() {
        // Macro with a bound y, applied to argument y.
        let sig = sig_as();
        let mut macros = MacroTable::default();
        let proto = ProtoFormula::new(
            vec![v("x")],
            Formula::forall(v("y"), Formula::atom("in", vec![v("x"), v("y")])),
        )
        .unwrap();
        macros.insert("m".into(), proto).unwrap();
        let f = parse_formula(&sig, &macros, "m(y)", &[v("y")]).unwrap();
        let want = Formula::forall(v("z"), Formula::atom("in", vec![v("y"), v("z")]));
        assert!(f.alpha_eq(&want));
        // The free y must still be free.
        assert_eq!(f.free_vars(), vec![v("y")]);
    }
}
