//! An opt-in fast evaluator for large one-sorted structures.
//!
//! Relations (including the denotations of derived formulas such as pairing
//! or coded membership) are registered as explicit extensions with
//! per-position indexes. Formulas are compiled into plans: any subformula
//! that is alpha-equivalent to a registered pattern — up to renaming and
//! permutation of its free variables — evaluates by direct lookup, and
//! existential quantifiers harvest their candidate sets from an indexed
//! conjunct instead of scanning the carrier. Universal quantifiers can be
//! restricted to a designated subset of the carrier while existential
//! witnesses still range over everything, which is how properties are
//! asserted on a truncation with a margin.
//!
//! Every registered extension is the caller's claim about what its pattern
//! means; the unit tests cross-check compiled evaluation against the plain
//! recursive evaluator on small carriers.

use crate::syntax::{Formula, ProtoFormula, Var};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Patterns with more parameters than this are not matched modulo
/// permutation (the factorial blow-up is not worth it).
const PERM_LIMIT: usize = 6;

struct NativeRel {
    name: String,
    arity: usize,
    extension: Vec<Vec<u32>>,
    contains: HashSet<Vec<u32>>,
    /// Per position: value → rows of `extension` holding it there.
    index: Vec<HashMap<u32, Vec<usize>>>,
}

pub struct Registry {
    sort: String,
    carrier_len: usize,
    rels: Vec<NativeRel>,
    by_name: HashMap<String, usize>,
    /// Canonical body string → (relation, permutation sending argument
    /// positions of the occurrence to parameter positions of the pattern).
    patterns: HashMap<String, (usize, Vec<usize>)>,
}

/// Where an argument value comes from at evaluation time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Index into the bound-variable stack, absolute from the bottom.
    Bound(usize),
    /// Index into the caller-supplied free-variable values.
    Free(usize),
}

/// How an existential quantifier obtains its candidate witnesses.
pub struct Harvest {
    rel: usize,
    args: Vec<Slot>,
    /// The argument position holding the quantified variable.
    pos: usize,
}

pub enum Plan {
    True,
    False,
    Native { rel: usize, args: Vec<Slot> },
    Eq(Slot, Slot),
    Not(Box<Plan>),
    And(Box<Plan>, Box<Plan>),
    Or(Box<Plan>, Box<Plan>),
    Implies(Box<Plan>, Box<Plan>),
    Iff(Box<Plan>, Box<Plan>),
    Forall(Box<Plan>),
    /// All harvestable conjuncts are kept; the cheapest is picked per
    /// evaluation, since cardinalities depend on the bound values.
    Exists(Box<Plan>, Vec<Harvest>),
}

/// Evaluation options: when `universal_filter` is set, universal quantifiers
/// range only over carrier indexes marked true; existential quantifiers
/// always range over the whole carrier.
#[derive(Default)]
pub struct EvalOpts {
    pub universal_filter: Option<Vec<bool>>,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for v in 0..k {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

impl Registry {
    pub fn new(sort: impl Into<String>, carrier_len: usize) -> Self {
        Registry {
            sort: sort.into(),
            carrier_len,
            rels: Vec::new(),
            by_name: HashMap::new(),
            patterns: HashMap::new(),
        }
    }

    pub fn carrier_len(&self) -> usize {
        self.carrier_len
    }

    /// Register `extension` as the denotation of `proto`. The name doubles
    /// as an atom matcher: atoms `name(…)` compile to this relation even
    /// when their arguments repeat variables.
    pub fn register(
        &mut self,
        name: impl Into<String>,
        proto: &ProtoFormula,
        extension: Vec<Vec<u32>>,
    ) -> Result<()> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::IllFormed(format!(
                "native relation {} registered twice",
                name
            )));
        }
        let k = proto.arity();
        for p in &proto.params {
            if p.sort != self.sort {
                return Err(Error::IllFormed(format!(
                    "native {} parameter {} has sort {}, registry uses {}",
                    name, p.name, p.sort, self.sort
                )));
            }
        }
        let mut contains = HashSet::new();
        let mut index = vec![HashMap::<u32, Vec<usize>>::new(); k];
        for (row, t) in extension.iter().enumerate() {
            if t.len() != k {
                return Err(Error::IllFormed(format!(
                    "native {} tuple of length {}, expected {}",
                    name,
                    t.len(),
                    k
                )));
            }
            for (pos, &v) in t.iter().enumerate() {
                if v as usize >= self.carrier_len {
                    return Err(Error::IllFormed(format!(
                        "native {} references element {} outside the carrier",
                        name, v
                    )));
                }
                index[pos].entry(v).or_default().push(row);
            }
            contains.insert(t.clone());
        }
        let rel = self.rels.len();
        if k <= PERM_LIMIT {
            for perm in permutations(k) {
                // Occurrence argument i plays pattern parameter perm[i].
                let ordered: Vec<Var> = perm.iter().map(|&j| proto.params[j].clone()).collect();
                let canon = proto.body.canon_string(&ordered);
                match self.patterns.get(&canon) {
                    Some(&(other, _)) if other != rel => {
                        return Err(Error::IllFormed(format!(
                            "pattern of native {} collides with {}",
                            name, self.rels[other].name
                        )));
                    }
                    Some(_) => {}
                    None => {
                        self.patterns.insert(canon, (rel, perm));
                    }
                }
            }
        }
        self.by_name.insert(name.clone(), rel);
        self.rels.push(NativeRel {
            name,
            arity: k,
            extension,
            contains,
            index,
        });
        Ok(())
    }

    /// Compile a sentence.
    pub fn compile(&self, f: &Formula) -> Result<Plan> {
        self.compile_open(f, &[])
    }

    /// Compile a formula whose free variables are exactly `free`, resolved
    /// positionally against the values supplied at evaluation time.
    pub fn compile_open(&self, f: &Formula, free: &[Var]) -> Result<Plan> {
        for v in f.free_vars() {
            if !free.contains(&v) {
                return Err(Error::Precondition(format!(
                    "variable {} is free but not declared for compilation",
                    v.name
                )));
            }
        }
        let mut bound: Vec<Var> = Vec::new();
        self.go(f, free, &mut bound)
    }

    fn slot_of(&self, v: &Var, free: &[Var], bound: &[Var]) -> Result<Slot> {
        if let Some(i) = bound.iter().rposition(|b| b.name == v.name) {
            return Ok(Slot::Bound(i));
        }
        if let Some(i) = free.iter().position(|b| b.name == v.name) {
            return Ok(Slot::Free(i));
        }
        Err(Error::IllFormed(format!("unresolved variable {}", v.name)))
    }

    fn try_match(&self, f: &Formula, free: &[Var], bound: &[Var]) -> Result<Option<Plan>> {
        let fv = f.free_vars();
        if fv.len() > PERM_LIMIT {
            return Ok(None);
        }
        let canon = f.canon_string(&fv);
        let Some((rel, perm)) = self.patterns.get(&canon) else {
            return Ok(None);
        };
        // Occurrence free variable i plays pattern parameter perm[i]; the
        // argument vector is therefore fv reordered by the inverse.
        let mut args = vec![Slot::Bound(0); fv.len()];
        for (i, &j) in perm.iter().enumerate() {
            args[j] = self.slot_of(&fv[i], free, bound)?;
        }
        if args.len() != self.rels[*rel].arity {
            return Ok(None);
        }
        Ok(Some(Plan::Native { rel: *rel, args }))
    }

    fn go(&self, f: &Formula, free: &[Var], bound: &mut Vec<Var>) -> Result<Plan> {
        if let Some(plan) = self.try_match(f, free, bound)? {
            return Ok(plan);
        }
        Ok(match f {
            Formula::True => Plan::True,
            Formula::False => Plan::False,
            Formula::Atom { pred, args } => {
                let Some(&rel) = self.by_name.get(pred) else {
                    return Err(Error::Unknown(format!(
                        "no native relation for predicate {}",
                        pred
                    )));
                };
                if self.rels[rel].arity != args.len() {
                    return Err(Error::IllFormed(format!(
                        "predicate {} used with {} arguments, native has {}",
                        pred,
                        args.len(),
                        self.rels[rel].arity
                    )));
                }
                let slots = args
                    .iter()
                    .map(|v| self.slot_of(v, free, bound))
                    .collect::<Result<Vec<_>>>()?;
                Plan::Native { rel, args: slots }
            }
            Formula::Eq(a, b) => Plan::Eq(
                self.slot_of(a, free, bound)?,
                self.slot_of(b, free, bound)?,
            ),
            Formula::Not(a) => Plan::Not(Box::new(self.go(a, free, bound)?)),
            Formula::And(a, b) => Plan::And(
                Box::new(self.go(a, free, bound)?),
                Box::new(self.go(b, free, bound)?),
            ),
            Formula::Or(a, b) => Plan::Or(
                Box::new(self.go(a, free, bound)?),
                Box::new(self.go(b, free, bound)?),
            ),
            Formula::Implies(a, b) => Plan::Implies(
                Box::new(self.go(a, free, bound)?),
                Box::new(self.go(b, free, bound)?),
            ),
            Formula::Iff(a, b) => Plan::Iff(
                Box::new(self.go(a, free, bound)?),
                Box::new(self.go(b, free, bound)?),
            ),
            Formula::Forall(v, body) => {
                self.check_sort(v)?;
                bound.push(v.clone());
                let body = self.go(body, free, bound)?;
                bound.pop();
                Plan::Forall(Box::new(body))
            }
            Formula::Exists(v, body) => {
                self.check_sort(v)?;
                bound.push(v.clone());
                let depth = bound.len() - 1;
                let body = self.go(body, free, bound)?;
                bound.pop();
                let harvest = find_harvest(&body, depth);
                Plan::Exists(Box::new(body), harvest)
            }
        })
    }

    fn check_sort(&self, v: &Var) -> Result<()> {
        if v.sort != self.sort {
            return Err(Error::Precondition(format!(
                "quantifier over sort {}, registry carries sort {}",
                v.sort, self.sort
            )));
        }
        Ok(())
    }

    fn value(&self, s: Slot, env: &[u32], free: &[u32]) -> u32 {
        match s {
            Slot::Bound(i) => env[i],
            Slot::Free(i) => free[i],
        }
    }

    /// Row set a harvest would have to filter, used both to pick the cheapest
    /// harvest for the current environment and to enumerate its witnesses.
    fn harvest_rows(&self, h: &Harvest, env: &[u32], free: &[u32]) -> Vec<usize> {
        let rel = &self.rels[h.rel];
        // Pick the first fully-determined argument position to seed the row
        // set; the remaining determined positions are filtered afterwards.
        let seed = h.args.iter().enumerate().find(|(p, _)| *p != h.pos);
        match seed {
            Some((p, &slot)) => {
                let v = self.value(slot, env, free);
                rel.index[p].get(&v).cloned().unwrap_or_default()
            }
            None => (0..rel.extension.len()).collect(),
        }
    }

    /// Candidate witnesses for a harvested existential, deduplicated and in
    /// ascending order for determinism.
    fn candidates(&self, h: &Harvest, rows: Vec<usize>, env: &[u32], free: &[u32]) -> Vec<u32> {
        let rel = &self.rels[h.rel];
        let mut out = BTreeSet::new();
        'rows: for r in rows {
            let t = &rel.extension[r];
            for (p, &slot) in h.args.iter().enumerate() {
                if p != h.pos && t[p] != self.value(slot, env, free) {
                    continue 'rows;
                }
            }
            out.insert(t[h.pos]);
        }
        out.into_iter().collect()
    }

    /// Evaluate a compiled sentence.
    pub fn eval(&self, plan: &Plan, opts: &EvalOpts) -> bool {
        let mut env = Vec::new();
        self.eval_env(plan, &mut env, &[], opts)
    }

    /// Evaluate with explicit bound-variable stack and free-variable values
    /// (positional against the `free` list given at compilation).
    pub fn eval_env(
        &self,
        plan: &Plan,
        env: &mut Vec<u32>,
        free: &[u32],
        opts: &EvalOpts,
    ) -> bool {
        match plan {
            Plan::True => true,
            Plan::False => false,
            Plan::Native { rel, args } => {
                let t: Vec<u32> = args.iter().map(|&s| self.value(s, env, free)).collect();
                self.rels[*rel].contains.contains(&t)
            }
            Plan::Eq(a, b) => self.value(*a, env, free) == self.value(*b, env, free),
            Plan::Not(a) => !self.eval_env(a, env, free, opts),
            Plan::And(a, b) => {
                self.eval_env(a, env, free, opts) && self.eval_env(b, env, free, opts)
            }
            Plan::Or(a, b) => {
                self.eval_env(a, env, free, opts) || self.eval_env(b, env, free, opts)
            }
            Plan::Implies(a, b) => {
                !self.eval_env(a, env, free, opts) || self.eval_env(b, env, free, opts)
            }
            Plan::Iff(a, b) => {
                self.eval_env(a, env, free, opts) == self.eval_env(b, env, free, opts)
            }
            Plan::Forall(body) => {
                for i in 0..self.carrier_len as u32 {
                    if let Some(filter) = &opts.universal_filter {
                        if !filter[i as usize] {
                            continue;
                        }
                    }
                    env.push(i);
                    let ok = self.eval_env(body, env, free, opts);
                    env.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
            Plan::Exists(body, harvests) => {
                // Cardinalities depend on the bound values, so the cheapest
                // harvest is chosen per evaluation rather than at compile time.
                let best = harvests
                    .iter()
                    .map(|h| (h, self.harvest_rows(h, env, free)))
                    .min_by_key(|(_, rows)| rows.len());
                let candidates: Vec<u32> = match best {
                    Some((h, rows)) => self.candidates(h, rows, env, free),
                    None => (0..self.carrier_len as u32).collect(),
                };
                for i in candidates {
                    env.push(i);
                    let ok = self.eval_env(body, env, free, opts);
                    env.pop();
                    if ok {
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Collect the indexed conjuncts that determine the variable bound at
/// `depth`: native atoms on the conjunct spine holding that variable at one
/// position, all other arguments already determined. The spine descends into
/// nested existential bodies — their conjuncts are entailed too, and any
/// conjunct depending on the inner variable is rejected by the depth guard —
/// which is what makes chains of eliminated function terms
/// (`∃w₁∃w₂ (g₁ ∧ g₂ ∧ …)`) harvestable at every level.
fn find_harvest(body: &Plan, depth: usize) -> Vec<Harvest> {
    let mut spine: Vec<&Plan> = Vec::new();
    collect_spine(body, &mut spine);
    let mut found = Vec::new();
    for p in spine {
        if let Plan::Native { rel, args } = p {
            let mut pos = None;
            let mut ok = true;
            for (i, s) in args.iter().enumerate() {
                match s {
                    Slot::Bound(d) if *d == depth => {
                        if pos.is_some() {
                            ok = false; // variable repeats; skip this conjunct
                            break;
                        }
                        pos = Some(i);
                    }
                    Slot::Bound(d) if *d > depth => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
            if ok {
                if let Some(pos) = pos {
                    found.push(Harvest {
                        rel: *rel,
                        args: args.clone(),
                        pos,
                    });
                }
            }
        }
    }
    found
}

fn collect_spine<'a>(p: &'a Plan, out: &mut Vec<&'a Plan>) {
    match p {
        Plan::And(a, b) => {
            collect_spine(a, out);
            collect_spine(b, out);
        }
        Plan::Exists(body, _) => collect_spine(body, out),
        other => out.push(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::countermodel::{countermodel_universe, Countermodel};
    use crate::model::FiniteStructure;
    use crate::syntax::parse::{parse_formula_open, MacroTable};
    use crate::syntax::{Signature, DEFAULT_SORT};

    fn sentence(sig: &Signature, text: &str) -> Formula {
        let (f, free) = parse_formula_open(sig, &MacroTable::default(), text).unwrap();
        assert!(free.is_empty(), "{} is not a sentence", text);
        f
    }

    fn membership_natives(cm: &Countermodel) -> Registry {
        let n = cm.elems.len();
        let mut reg = Registry::new(DEFAULT_SORT, n);
        let in_ext: Vec<Vec<u32>> = cm.structure.relations["in"]
            .iter()
            .cloned()
            .collect();
        let macros = MacroTable::default();
        let (in_body, in_params) =
            parse_formula_open(&cm.structure.signature, &macros, "in(x,y)").unwrap();
        let in_proto = crate::syntax::ProtoFormula::new(in_params, in_body).unwrap();
        reg.register("in", &in_proto, in_ext).unwrap();
        // sing(x,y): y's members are exactly {x} — computed from the data.
        let mut sing = Vec::new();
        for (j, e) in cm.elems.iter().enumerate() {
            if e.members.len() == 1 {
                let m = e.members.iter().next().unwrap();
                let i = cm.elems.iter().position(|f| f == m).unwrap();
                sing.push(vec![i as u32, j as u32]);
            }
        }
        let (sing_body, sing_free) = parse_formula_open(
            &cm.structure.signature,
            &macros,
            "all w. (in(w,y) <-> w = x)",
        )
        .unwrap();
        // Free-occurrence order is (y, x); the parameter order is (x, y).
        let mut sing_params = sing_free;
        sing_params.reverse();
        let sing_proto = crate::syntax::ProtoFormula::new(sing_params, sing_body).unwrap();
        reg.register("sing", &sing_proto, sing).unwrap();
        reg
    }

    fn plain_sig() -> Signature {
        membership_sig_with_sing()
    }

    fn membership_sig_with_sing() -> Signature {
        Signature::new(
            "T",
            vec![DEFAULT_SORT.to_string()],
            vec![
                crate::syntax::PredDecl {
                    name: "in".into(),
                    profile: vec![DEFAULT_SORT.into(), DEFAULT_SORT.into()],
                },
                crate::syntax::PredDecl {
                    name: "sing".into(),
                    profile: vec![DEFAULT_SORT.into(), DEFAULT_SORT.into()],
                },
            ],
        )
        .unwrap()
    }

    /// The same structure with `sing` materialized, for the plain evaluator.
    fn plain_structure(cm: &Countermodel) -> FiniteStructure {
        let mut s = FiniteStructure::new("plain", plain_sig());
        for e in &cm.elems {
            s.add_elem(DEFAULT_SORT, e.to_string()).unwrap();
        }
        for t in &cm.structure.relations["in"] {
            s.add_tuple("in", t.clone()).unwrap();
        }
        for (j, e) in cm.elems.iter().enumerate() {
            if e.members.len() == 1 {
                let m = e.members.iter().next().unwrap();
                let i = cm.elems.iter().position(|f| f == m).unwrap();
                s.add_tuple("sing", vec![i as u32, j as u32]).unwrap();
            }
        }
        s
    }

    #[test]
    fn compiled_evaluation_agrees_with_plain_evaluation() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let plain = plain_structure(&cm);
        let sentences = [
            "ex x. all y. ~ in(y,x)",
            "all x. ex y. in(x,y)",
            "all x. all y. ex z. all u. (in(u,z) <-> (in(u,x) | u = y))",
            "all x. (ex y. sing(x,y)) -> ex y. in(x,y)",
            "ex x. ex y. (in(x,y) & in(y,x))",
            "all x. all y. (sing(x,y) -> in(x,y))",
            "all x. all y. ((all w. (in(w,x) <-> in(w,y))) -> (sing(x,x) <-> sing(y,y)))",
        ];
        for text in sentences {
            let f = sentence(&plain.signature, text);
            let plan = reg.compile(&f).unwrap();
            assert_eq!(
                reg.eval(&plan, &EvalOpts::default()),
                plain.eval_sentence(&f).unwrap(),
                "disagreement on {}",
                text
            );
        }
    }

    #[test]
    fn registered_patterns_replace_their_defining_subformulas() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let plain = plain_structure(&cm);
        // The defining formula of sing, inlined — and with swapped argument
        // roles, exercising the permutation matcher.
        for text in [
            "all x. all y. ((all w. (in(w,y) <-> w = x)) -> in(x,y))",
            "all y. all x. ((all w. (in(w,x) <-> w = y)) -> in(y,x))",
            "ex y. all w. (in(w,y) <-> w = y)",
        ] {
            let f = sentence(&plain.signature, text);
            let plan = reg.compile(&f).unwrap();
            assert_eq!(
                reg.eval(&plan, &EvalOpts::default()),
                plain.eval_sentence(&f).unwrap(),
                "disagreement on {}",
                text
            );
        }
    }

    #[test]
    fn harvesting_finds_the_same_witnesses_as_scanning() {
        let cm = countermodel_universe(2, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let plain = plain_structure(&cm);
        // ∃z with an indexed conjunct on z, plus a side condition.
        let f = sentence(
            &plain.signature,
            "all x. all y. (in(x,y) -> ex z. (in(x,z) & in(z,y) -> in(x,y)))",
        );
        let plan = reg.compile(&f).unwrap();
        assert_eq!(
            reg.eval(&plan, &EvalOpts::default()),
            plain.eval_sentence(&f).unwrap()
        );
        // A sentence whose truth depends on finding a harvested witness.
        let g = sentence(
            &plain.signature,
            "all y. ((ex x. in(x,y)) | sing(y,y) | all u. ~ in(u,y))",
        );
        let plan_g = reg.compile(&g).unwrap();
        assert_eq!(
            reg.eval(&plan_g, &EvalOpts::default()),
            plain.eval_sentence(&g).unwrap()
        );
        // Functional notation produces a quantifier prefix ∃u∃v(g₁ ∧ g₂ ∧ …);
        // the outer variable is determined by a conjunct one level down.
        let h = sentence(
            &plain.signature,
            "all x. all y. (in(sing(x), sing(y)) -> in(x,y))",
        );
        let plan_h = reg.compile(&h).unwrap();
        assert_eq!(
            reg.eval(&plan_h, &EvalOpts::default()),
            plain.eval_sentence(&h).unwrap()
        );
    }

    #[test]
    fn universal_filter_restricts_only_universals() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let plain = plain_structure(&cm);
        // Restrict universals to rank 0 elements.
        let filter: Vec<bool> = cm.elems.iter().map(|e| e.rank() == 0).collect();
        let opts = EvalOpts {
            universal_filter: Some(filter),
        };
        // Every rank-0 element is a member of something — with witnesses of
        // higher rank, so the existential must range over the full carrier.
        let f = sentence(&plain.signature, "all x. ex y. in(x,y)");
        let plan = reg.compile(&f).unwrap();
        assert!(reg.eval(&plan, &opts));
        // Unfiltered the same sentence is false: maximal-rank elements are
        // in nothing at this truncation.
        assert!(!reg.eval(&plan, &EvalOpts::default()));
        assert!(!plain.eval_sentence(&f).unwrap());
    }

    #[test]
    fn open_compilation_binds_free_variables_positionally() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let plain = plain_structure(&cm);
        let (f, free) = parse_formula_open(
            &plain.signature,
            &MacroTable::default(),
            "ex y. (in(x,y) & sing(x,y))",
        )
        .unwrap();
        assert_eq!(free.len(), 1);
        let plan = reg.compile_open(&f, &free).unwrap();
        for i in 0..cm.elems.len() as u32 {
            let mut env = Vec::new();
            let fast = reg.eval_env(&plan, &mut env, &[i], &EvalOpts::default());
            let mut penv = vec![(free[0].name.clone(), i)];
            let slow = plain.eval_env(&f, &mut penv).unwrap();
            assert_eq!(fast, slow, "disagreement at element {}", i);
        }
    }

    #[test]
    fn unknown_predicates_are_rejected() {
        let cm = countermodel_universe(0, Some(2)).unwrap();
        let reg = membership_natives(&cm);
        let sig = Signature::new(
            "T",
            vec![DEFAULT_SORT.to_string()],
            vec![crate::syntax::PredDecl {
                name: "mystery".into(),
                profile: vec![DEFAULT_SORT.into()],
            }],
        )
        .unwrap();
        let f = sentence(&sig, "all x. mystery(x)");
        assert!(reg.compile(&f).is_err());
    }
}
