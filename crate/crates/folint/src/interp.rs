//! Interpretations of one theory in another, and the first-order proof
//! obligations that certify them.
//!
//! An interpretation packages a translation with its source and target
//! theories. The artifact has no theorem prover, so interpretation-hood is
//! operationalized two ways: obligations can be evaluated on finite models
//! (a necessary condition) or exported in TPTP FOF syntax for external
//! provers.

use crate::model::FiniteStructure;
use crate::syntax::{block_names, Formula, ProtoFormula, Theory, Var};
use crate::translation::Translation;
use crate::{Error, Result};
use std::collections::HashSet;
use std::fmt::Write as _;

/// A theory-level interpretation: source theory, translation, target theory.
#[derive(Debug, Clone)]
pub struct Interpretation {
    pub name: String,
    pub source: Theory,
    pub translation: Translation,
    pub target: Theory,
}

impl Interpretation {
    pub fn new(
        name: impl Into<String>,
        source: Theory,
        translation: Translation,
        target: Theory,
    ) -> Result<Self> {
        if translation.source != source.signature {
            return Err(Error::Precondition(format!(
                "translation {} reads signature {}, not the source theory's {}",
                translation.name, translation.source.name, source.signature.name
            )));
        }
        if translation.target != target.signature {
            return Err(Error::Precondition(format!(
                "translation {} writes signature {}, not the target theory's {}",
                translation.name, translation.target.name, target.signature.name
            )));
        }
        Ok(Interpretation {
            name: name.into(),
            source,
            translation,
            target,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObligationKind {
    AxiomTranslation,
    DeltaInhabited,
    EqualityScheme,
    Int0Eq,
    IMap,
    IIso,
}

/// A labeled closed formula over the target signature that must be provable
/// in the target theory.
#[derive(Debug, Clone)]
pub struct Obligation {
    pub label: String,
    pub kind: ObligationKind,
    pub sentence: Formula,
}

fn obligation(label: String, kind: ObligationKind, sentence: Formula) -> Obligation {
    Obligation {
        label,
        kind,
        sentence,
    }
}

/// A variable-block factory handing out pairwise fresh blocks of the target
/// sort.
struct Blocks {
    sort: String,
    used: HashSet<String>,
}

impl Blocks {
    fn new(sort: &str) -> Self {
        Blocks {
            sort: sort.to_string(),
            used: HashSet::new(),
        }
    }

    fn take(&mut self, base: &str, dim: usize) -> Vec<Var> {
        block_names(base, dim, &mut self.used)
            .into_iter()
            .map(|n| Var::new(n, self.sort.clone()))
            .collect()
    }
}

fn concat(blocks: &[&[Var]]) -> Vec<Var> {
    blocks.iter().flat_map(|b| b.iter().cloned()).collect()
}

/// The obligations certifying that an interpretation is one: the translation
/// of every source axiom, inhabitedness of every domain, and — when the
/// translation does not read equality as equality — the equivalence-relation
/// and congruence schemes for the translated identity.
pub fn interpretation_obligations(k: &Interpretation) -> Result<Vec<Obligation>> {
    let tau = &k.translation;
    let mut out = Vec::new();
    for (label, a) in &k.source.axioms {
        out.push(obligation(
            format!("{}.{}", k.name, label),
            ObligationKind::AxiomTranslation,
            tau.apply(a)?,
        ));
    }
    for sort in &k.source.signature.sorts {
        let delta = tau.domain(sort);
        out.push(obligation(
            format!("{}.delta_inhab.{}", k.name, sort),
            ObligationKind::DeltaInhabited,
            Formula::exists_many(&delta.params, delta.body.clone()),
        ));
    }
    if !tau.classify().identity_preserving {
        out.extend(equality_schemes(k)?);
    }
    Ok(out)
}

fn equality_schemes(k: &Interpretation) -> Result<Vec<Obligation>> {
    let tau = &k.translation;
    let tsort = tau.target_sort();
    let mut out = Vec::new();
    for sort in &k.source.signature.sorts {
        if tau.eq_is_componentwise(sort) {
            continue;
        }
        let m = tau.dim(sort);
        let delta = tau.domain(sort);
        let eq = &tau.eqmap[sort];
        let mut b = Blocks::new(tsort);
        let (x, y, z) = (b.take("x", m), b.take("y", m), b.take("z", m));
        let dx = delta.apply(&x)?;
        let dy = delta.apply(&y)?;
        let dz = delta.apply(&z)?;
        let e = |a: &[Var], c: &[Var]| eq.apply(&concat(&[a, c]));
        out.push(obligation(
            format!("{}.eq_refl.{}", k.name, sort),
            ObligationKind::EqualityScheme,
            Formula::forall_many(&x, Formula::implies(dx.clone(), e(&x, &x)?)),
        ));
        out.push(obligation(
            format!("{}.eq_sym.{}", k.name, sort),
            ObligationKind::EqualityScheme,
            Formula::forall_many(
                &concat(&[&x, &y]),
                Formula::implies(
                    Formula::conj(vec![dx.clone(), dy.clone(), e(&x, &y)?]),
                    e(&y, &x)?,
                ),
            ),
        ));
        out.push(obligation(
            format!("{}.eq_trans.{}", k.name, sort),
            ObligationKind::EqualityScheme,
            Formula::forall_many(
                &concat(&[&x, &y, &z]),
                Formula::implies(
                    Formula::conj(vec![dx, dy, dz, e(&x, &y)?, e(&y, &z)?]),
                    e(&x, &z)?,
                ),
            ),
        ));
    }
    // One congruence obligation per source predicate: related arguments
    // cannot separate the translated relation.
    for p in &k.source.signature.preds {
        let mut b = Blocks::new(tsort);
        let mut xs: Vec<Vec<Var>> = Vec::new();
        let mut ys: Vec<Vec<Var>> = Vec::new();
        for (i, s) in p.profile.iter().enumerate() {
            xs.push(b.take(&format!("x{}", i), tau.dim(s)));
            ys.push(b.take(&format!("y{}", i), tau.dim(s)));
        }
        let mut hyp = Vec::new();
        for (i, s) in p.profile.iter().enumerate() {
            hyp.push(tau.domain(s).apply(&xs[i])?);
            hyp.push(tau.domain(s).apply(&ys[i])?);
            hyp.push(tau.eqmap[s].apply(&concat(&[&xs[i], &ys[i]]))?);
        }
        let px = tau.predmap[&p.name].apply(&concat(&xs.iter().map(|b| &b[..]).collect::<Vec<_>>()))?;
        let py = tau.predmap[&p.name].apply(&concat(&ys.iter().map(|b| &b[..]).collect::<Vec<_>>()))?;
        hyp.push(px);
        let all: Vec<Var> = xs.iter().chain(ys.iter()).flatten().cloned().collect();
        out.push(obligation(
            format!("{}.eq_cong.{}", k.name, p.name),
            ObligationKind::EqualityScheme,
            Formula::forall_many(&all, Formula::implies(Formula::conj(hyp), py)),
        ));
    }
    Ok(out)
}

/// The obligations making two interpretations equal in the strictest sense:
/// the target proves their domains and predicate readings coincide.
pub fn int0_eq_obligations(k: &Interpretation, k2: &Interpretation) -> Result<Vec<Obligation>> {
    if k.source.signature != k2.source.signature || k.target.signature != k2.target.signature {
        return Err(Error::Precondition(format!(
            "{} and {} do not share source and target",
            k.name, k2.name
        )));
    }
    for sort in &k.source.signature.sorts {
        if k.translation.dim(sort) != k2.translation.dim(sort) {
            return Err(Error::Precondition(format!(
                "{} and {} disagree on the dimension of sort {}",
                k.name, k2.name, sort
            )));
        }
    }
    let tsort = k.translation.target_sort();
    let mut out = Vec::new();
    for sort in &k.source.signature.sorts {
        let mut b = Blocks::new(tsort);
        let x = b.take("x", k.translation.dim(sort));
        out.push(obligation(
            format!("{}_vs_{}.delta.{}", k.name, k2.name, sort),
            ObligationKind::Int0Eq,
            Formula::forall_many(
                &x,
                Formula::iff(
                    k.translation.domain(sort).apply(&x)?,
                    k2.translation.domain(sort).apply(&x)?,
                ),
            ),
        ));
    }
    for p in &k.source.signature.preds {
        let mut b = Blocks::new(tsort);
        let mut xs: Vec<Vec<Var>> = Vec::new();
        let mut guards = Vec::new();
        for (i, s) in p.profile.iter().enumerate() {
            let block = b.take(&format!("x{}", i), k.translation.dim(s));
            guards.push(k.translation.domain(s).apply(&block)?);
            xs.push(block);
        }
        let flat: Vec<Var> = xs.iter().flatten().cloned().collect();
        let args: Vec<&[Var]> = xs.iter().map(|b| &b[..]).collect();
        out.push(obligation(
            format!("{}_vs_{}.pred.{}", k.name, k2.name, p.name),
            ObligationKind::Int0Eq,
            Formula::forall_many(
                &flat,
                Formula::implies(
                    Formula::conj(guards),
                    Formula::iff(
                        k.translation.predmap[&p.name].apply(&concat(&args))?,
                        k2.translation.predmap[&p.name].apply(&concat(&args))?,
                    ),
                ),
            ),
        ));
    }
    Ok(out)
}

/// A candidate morphism between two interpretations of the same one-sorted
/// source theory in the same target: a graph proto-formula relating
/// `from`-tuples to `to`-tuples.
#[derive(Debug, Clone)]
pub struct IMap {
    pub name: String,
    pub from: Interpretation,
    pub to: Interpretation,
    pub graph: ProtoFormula,
}

impl IMap {
    pub fn new(
        name: impl Into<String>,
        from: Interpretation,
        to: Interpretation,
        graph: ProtoFormula,
    ) -> Result<Self> {
        let name = name.into();
        if !from.source.alpha_eq(&to.source) || !from.target.alpha_eq(&to.target) {
            return Err(Error::Precondition(format!(
                "morphism {} does not connect parallel interpretations",
                name
            )));
        }
        if !from.source.signature.is_one_sorted() {
            return Err(Error::Precondition(format!(
                "morphism {}: the source theory must be one-sorted",
                name
            )));
        }
        let sort = from.source.signature.only_sort()?.to_string();
        let m = from.translation.dim(&sort);
        let k = to.translation.dim(&sort);
        if graph.arity() != m + k {
            return Err(Error::Precondition(format!(
                "morphism {} graph has arity {}, expected {}+{}",
                name,
                graph.arity(),
                m,
                k
            )));
        }
        let tsort = from.translation.target_sort();
        if graph.params.iter().any(|p| p.sort != tsort) {
            return Err(Error::Precondition(format!(
                "morphism {} graph parameters must have the target sort {}",
                name, tsort
            )));
        }
        graph.body.well_formed(&from.target.signature, &graph.params)?;
        Ok(IMap {
            name,
            from,
            to,
            graph,
        })
    }

    fn sort(&self) -> &str {
        // Validated one-sorted at construction.
        &self.from.source.signature.sorts[0]
    }

    fn apply_graph(&self, x: &[Var], y: &[Var]) -> Result<Formula> {
        self.graph.apply(&concat(&[x, y]))
    }
}

/// The morphism conditions: typing, respect for the translated equalities,
/// totality, functionality, and preservation of each source relation.
pub fn imap_obligations(f: &IMap) -> Result<Vec<Obligation>> {
    let sort = f.sort().to_string();
    let tsort = f.from.translation.target_sort();
    let m = f.from.translation.dim(&sort);
    let k = f.to.translation.dim(&sort);
    let dk = f.from.translation.domain(&sort);
    let dm = f.to.translation.domain(&sort);
    let eqk = &f.from.translation.eqmap[&sort];
    let eqm = &f.to.translation.eqmap[&sort];
    let mut out = Vec::new();

    {
        let mut b = Blocks::new(tsort);
        let (x, y) = (b.take("x", m), b.take("y", k));
        out.push(obligation(
            format!("{}.typing", f.name),
            ObligationKind::IMap,
            Formula::forall_many(
                &concat(&[&x, &y]),
                Formula::implies(
                    f.apply_graph(&x, &y)?,
                    Formula::and(dk.apply(&x)?, dm.apply(&y)?),
                ),
            ),
        ));
    }
    {
        let mut b = Blocks::new(tsort);
        let (x, u, v, y) = (
            b.take("x", m),
            b.take("u", m),
            b.take("v", k),
            b.take("y", k),
        );
        out.push(obligation(
            format!("{}.eq_respect", f.name),
            ObligationKind::IMap,
            Formula::forall_many(
                &concat(&[&x, &u, &v, &y]),
                Formula::implies(
                    Formula::conj(vec![
                        eqk.apply(&concat(&[&x, &u]))?,
                        f.apply_graph(&u, &v)?,
                        eqm.apply(&concat(&[&v, &y]))?,
                    ]),
                    f.apply_graph(&x, &y)?,
                ),
            ),
        ));
    }
    {
        let mut b = Blocks::new(tsort);
        let (x, y) = (b.take("x", m), b.take("y", k));
        out.push(obligation(
            format!("{}.totality", f.name),
            ObligationKind::IMap,
            Formula::forall_many(
                &x,
                Formula::implies(
                    dk.apply(&x)?,
                    Formula::exists_many(
                        &y,
                        Formula::and(dm.apply(&y)?, f.apply_graph(&x, &y)?),
                    ),
                ),
            ),
        ));
    }
    {
        let mut b = Blocks::new(tsort);
        let (x, y, z) = (b.take("x", m), b.take("y", k), b.take("z", k));
        out.push(obligation(
            format!("{}.functionality", f.name),
            ObligationKind::IMap,
            Formula::forall_many(
                &concat(&[&x, &y, &z]),
                Formula::implies(
                    Formula::and(f.apply_graph(&x, &y)?, f.apply_graph(&x, &z)?),
                    eqm.apply(&concat(&[&y, &z]))?,
                ),
            ),
        ));
    }
    for p in &f.from.source.signature.preds {
        let n = p.profile.len();
        let mut b = Blocks::new(tsort);
        let xs: Vec<Vec<Var>> = (0..n).map(|i| b.take(&format!("x{}", i), m)).collect();
        let ys: Vec<Vec<Var>> = (0..n).map(|i| b.take(&format!("y{}", i), k)).collect();
        let mut hyp = Vec::new();
        for i in 0..n {
            hyp.push(f.apply_graph(&xs[i], &ys[i])?);
        }
        let xflat: Vec<&[Var]> = xs.iter().map(|v| &v[..]).collect();
        let yflat: Vec<&[Var]> = ys.iter().map(|v| &v[..]).collect();
        hyp.push(f.from.translation.predmap[&p.name].apply(&concat(&xflat))?);
        let conc = f.to.translation.predmap[&p.name].apply(&concat(&yflat))?;
        let all: Vec<Var> = xs.iter().chain(ys.iter()).flatten().cloned().collect();
        out.push(obligation(
            format!("{}.preserves.{}", f.name, p.name),
            ObligationKind::IMap,
            Formula::forall_many(&all, Formula::implies(Formula::conj(hyp), conc)),
        ));
    }
    Ok(out)
}

/// The isomorphism conditions: the morphism conditions plus surjectivity,
/// injectivity, and reflection of each source relation.
pub fn iiso_obligations(f: &IMap) -> Result<Vec<Obligation>> {
    let sort = f.sort().to_string();
    let tsort = f.from.translation.target_sort();
    let m = f.from.translation.dim(&sort);
    let k = f.to.translation.dim(&sort);
    let dk = f.from.translation.domain(&sort);
    let dm = f.to.translation.domain(&sort);
    let eqk = &f.from.translation.eqmap[&sort];
    let mut out = imap_obligations(f)?;

    {
        let mut b = Blocks::new(tsort);
        let (x, y) = (b.take("x", m), b.take("y", k));
        out.push(obligation(
            format!("{}.surjective", f.name),
            ObligationKind::IIso,
            Formula::forall_many(
                &y,
                Formula::implies(
                    dm.apply(&y)?,
                    Formula::exists_many(
                        &x,
                        Formula::and(dk.apply(&x)?, f.apply_graph(&x, &y)?),
                    ),
                ),
            ),
        ));
    }
    {
        let mut b = Blocks::new(tsort);
        let (x, z, y) = (b.take("x", m), b.take("z", m), b.take("y", k));
        out.push(obligation(
            format!("{}.injective", f.name),
            ObligationKind::IIso,
            Formula::forall_many(
                &concat(&[&x, &z, &y]),
                Formula::implies(
                    Formula::and(f.apply_graph(&x, &y)?, f.apply_graph(&z, &y)?),
                    eqk.apply(&concat(&[&x, &z]))?,
                ),
            ),
        ));
    }
    for p in &f.from.source.signature.preds {
        let n = p.profile.len();
        let mut b = Blocks::new(tsort);
        let xs: Vec<Vec<Var>> = (0..n).map(|i| b.take(&format!("x{}", i), m)).collect();
        let ys: Vec<Vec<Var>> = (0..n).map(|i| b.take(&format!("y{}", i), k)).collect();
        let mut hyp = Vec::new();
        for i in 0..n {
            hyp.push(f.apply_graph(&xs[i], &ys[i])?);
        }
        let xflat: Vec<&[Var]> = xs.iter().map(|v| &v[..]).collect();
        let yflat: Vec<&[Var]> = ys.iter().map(|v| &v[..]).collect();
        hyp.push(f.to.translation.predmap[&p.name].apply(&concat(&yflat))?);
        let conc = f.from.translation.predmap[&p.name].apply(&concat(&xflat))?;
        let all: Vec<Var> = xs.iter().chain(ys.iter()).flatten().cloned().collect();
        out.push(obligation(
            format!("{}.reflects.{}", f.name, p.name),
            ObligationKind::IIso,
            Formula::forall_many(&all, Formula::implies(Formula::conj(hyp), conc)),
        ));
    }
    Ok(out)
}

/// Evaluate the isomorphism conditions on a finite structure. Returns the
/// label of the first failing condition, or `None` when all hold.
pub fn check_defined_iso(f: &IMap, s: &FiniteStructure) -> Result<Option<String>> {
    for ob in iiso_obligations(f)? {
        if !s.eval_sentence(&ob.sentence)? {
            return Ok(Some(ob.label));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// TPTP export
// ---------------------------------------------------------------------------

/// Sanitize an identifier into a TPTP lower-word.
fn tptp_word(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.extend(c.to_lowercase());
        } else {
            out.push('_');
        }
    }
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert(0, 'p');
    }
    out
}

fn tptp_formula(f: &Formula, bound: &mut Vec<(String, String)>, out: &mut String) {
    let var = |name: &str, bound: &[(String, String)]| -> String {
        bound
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| format!("FREE_{}", tptp_word(name).to_uppercase()))
    };
    match f {
        Formula::True => out.push_str("$true"),
        Formula::False => out.push_str("$false"),
        Formula::Atom { pred, args } => {
            out.push_str(&tptp_word(pred));
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&var(&a.name, bound));
                }
                out.push(')');
            }
        }
        Formula::Eq(a, b) => {
            let _ = write!(out, "{} = {}", var(&a.name, bound), var(&b.name, bound));
        }
        Formula::Not(a) => {
            out.push_str("~(");
            tptp_formula(a, bound, out);
            out.push(')');
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let op = match f {
                Formula::And(..) => "&",
                Formula::Or(..) => "|",
                Formula::Implies(..) => "=>",
                _ => "<=>",
            };
            out.push('(');
            tptp_formula(a, bound, out);
            let _ = write!(out, " {} ", op);
            tptp_formula(b, bound, out);
            out.push(')');
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let q = if matches!(f, Formula::Forall(..)) { '!' } else { '?' };
            let fresh = format!("V{}", bound.len());
            let _ = write!(out, "{}[{}]: (", q, fresh);
            bound.push((v.name.clone(), fresh));
            tptp_formula(body, bound, out);
            bound.pop();
            out.push(')');
        }
    }
}

/// Render obligations as a TPTP FOF problem: the background theory's axioms
/// as axioms, the obligations as conjectures. Requires a one-sorted
/// background (FOF is unsorted).
pub fn export_tptp(obligations: &[Obligation], background: &Theory) -> Result<String> {
    if !background.signature.is_one_sorted() {
        return Err(Error::Precondition(
            "TPTP export requires a one-sorted background theory".into(),
        ));
    }
    let mut out = String::new();
    let _ = writeln!(out, "% problem: {}", tptp_word(&background.signature.name));
    for (i, (label, a)) in background.axioms.iter().enumerate() {
        let mut body = String::new();
        tptp_formula(a, &mut Vec::new(), &mut body);
        let _ = writeln!(out, "fof(ax_{}_{}, axiom, {}).", i, tptp_word(label), body);
    }
    for (i, ob) in obligations.iter().enumerate() {
        let mut body = String::new();
        tptp_formula(&ob.sentence, &mut Vec::new(), &mut body);
        let _ = writeln!(
            out,
            "fof(c_{}_{}, conjecture, {}).",
            i,
            tptp_word(&ob.label),
            body
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse_formula_open, parse_theory, MacroTable};
    use crate::syntax::print::formula_to_string;

    fn toy() -> Theory {
        parse_theory(
            "theory T3\n\
             pred p/1\n\
             pred q/2\n\
             axiom a1: all x. (p(x) -> ex y. q(x,y))\n\
             axiom a2: ex x. p(x)\n\
             axiom a3: all x. ~ q(x,x)\n",
        )
        .unwrap()
    }

    fn identity_interp(th: &Theory) -> Interpretation {
        let tau = Translation::identity(&th.signature).unwrap();
        Interpretation::new("id", th.clone(), tau, th.clone()).unwrap()
    }

    #[test]
    fn identity_obligations_are_the_axioms_plus_inhabitedness() {
        let th = toy();
        let k = identity_interp(&th);
        let obs = interpretation_obligations(&k).unwrap();
        assert_eq!(obs.len(), 4);
        for (ob, (label, a)) in obs.iter().zip(&th.axioms) {
            assert_eq!(ob.label, format!("id.{}", label));
            assert!(ob.sentence.alpha_eq(a));
        }
        assert_eq!(obs[3].kind, ObligationKind::DeltaInhabited);
        assert!(obs[3].sentence.is_closed());
        // All obligations are well-formed target sentences.
        for ob in &obs {
            ob.sentence.well_formed(&th.signature, &[]).unwrap();
        }
    }

    #[test]
    fn int0_against_self_yields_p_plus_one_valid_sentences() {
        let th = toy();
        let k = identity_interp(&th);
        let obs = int0_eq_obligations(&k, &k).unwrap();
        assert_eq!(obs.len(), th.signature.preds.len() + 1);
        // Evaluate on a small structure: reflexive equivalences are valid.
        let mut s = FiniteStructure::new("s", th.signature.clone());
        s.add_elem("o", "a").unwrap();
        s.add_elem("o", "b").unwrap();
        s.add_tuple_ids("p", &["a"]).unwrap();
        s.add_tuple_ids("q", &["a", "b"]).unwrap();
        for ob in &obs {
            assert!(s.eval_sentence(&ob.sentence).unwrap(), "{}", ob.label);
        }
    }

    #[test]
    fn identity_imap_passes_all_eight_conditions() {
        let th = toy();
        let k = identity_interp(&th);
        // Componentwise equality as the graph of the identity morphism.
        let (body, params) =
            parse_formula_open(&th.signature, &MacroTable::default(), "x = y").unwrap();
        let graph = ProtoFormula::new(params, body).unwrap();
        let f = IMap::new("idmap", k.clone(), k.clone(), graph).unwrap();
        let imap = imap_obligations(&f).unwrap();
        let iiso = iiso_obligations(&f).unwrap();
        assert_eq!(imap.len(), 4 + th.signature.preds.len());
        assert_eq!(iiso.len(), 6 + 2 * th.signature.preds.len());
        for (a, b) in imap.iter().zip(&iiso) {
            assert_eq!(a.label, b.label);
            assert!(a.sentence.alpha_eq(&b.sentence));
        }
        let mut s = FiniteStructure::new("s", th.signature.clone());
        for id in ["a", "b", "c"] {
            s.add_elem("o", id).unwrap();
        }
        s.add_tuple_ids("p", &["a"]).unwrap();
        s.add_tuple_ids("q", &["a", "b"]).unwrap();
        assert_eq!(check_defined_iso(&f, &s).unwrap(), None);
        // A graph that misses an element fails totality.
        let (body2, params2) =
            parse_formula_open(&th.signature, &MacroTable::default(), "x = y & p(x)").unwrap();
        let partial = IMap::new(
            "partial",
            k.clone(),
            k,
            ProtoFormula::new(params2, body2).unwrap(),
        )
        .unwrap();
        assert_eq!(
            check_defined_iso(&partial, &s).unwrap(),
            Some("partial.totality".to_string())
        );
    }

    #[test]
    fn equality_schemes_appear_exactly_when_equality_is_reinterpreted() {
        // Source: one binary predicate. Target: same plus an equivalence.
        let src = parse_theory("theory U\npred r/2\n").unwrap();
        let tgt = parse_theory("theory V\npred r/2\npred e/2\n").unwrap();
        let text = "translation t : U -> V\n\
                    map r (x; y) = r(x,y)\n\
                    eq o (x; y) = e(x,y)\n";
        let tau = crate::translation::parse_translation(text, &|name| match name {
            "U" => Some((src.signature.clone(), MacroTable::default())),
            "V" => Some((tgt.signature.clone(), MacroTable::default())),
            _ => None,
        })
        .unwrap();
        let k = Interpretation::new("t", src.clone(), tau, tgt.clone()).unwrap();
        let obs = interpretation_obligations(&k).unwrap();
        // 0 axioms + 1 inhabitedness + refl/sym/trans + 1 congruence.
        assert_eq!(obs.len(), 5);
        let schemes: Vec<&str> = obs
            .iter()
            .filter(|o| o.kind == ObligationKind::EqualityScheme)
            .map(|o| o.label.as_str())
            .collect();
        assert_eq!(
            schemes,
            vec!["t.eq_refl.o", "t.eq_sym.o", "t.eq_trans.o", "t.eq_cong.r"]
        );
        // On a structure where e is a genuine congruence for r, all hold.
        let mut s = FiniteStructure::new("s", tgt.signature.clone());
        for id in ["a", "b"] {
            s.add_elem("o", id).unwrap();
        }
        for (x, y) in [("a", "a"), ("b", "b")] {
            s.add_tuple_ids("e", &[x, y]).unwrap();
        }
        s.add_tuple_ids("r", &["a", "b"]).unwrap();
        for ob in &obs {
            assert!(s.eval_sentence(&ob.sentence).unwrap(), "{}", ob.label);
        }
        // Make e coarser without r following it: congruence fails.
        s.add_tuple_ids("e", &["a", "b"]).unwrap();
        s.add_tuple_ids("e", &["b", "a"]).unwrap();
        let cong = obs.iter().find(|o| o.label == "t.eq_cong.r").unwrap();
        assert!(!s.eval_sentence(&cong.sentence).unwrap());
    }

    #[test]
    fn tptp_export_counts_lines_and_is_deterministic() {
        let th = parse_theory(
            "theory T2\n\
             pred p/1\n\
             axiom a1: ex x. p(x)\n\
             axiom a2: all x. all y. (p(x) & p(y) -> x = y)\n",
        )
        .unwrap();
        let k = identity_interp(&th);
        let obs: Vec<Obligation> = interpretation_obligations(&k)
            .unwrap()
            .into_iter()
            .take(1)
            .collect();
        let text = export_tptp(&obs, &th).unwrap();
        let axioms = text.lines().filter(|l| l.starts_with("fof(ax_")).count();
        let conjectures = text.lines().filter(|l| l.starts_with("fof(c_")).count();
        assert_eq!(axioms, 2);
        assert_eq!(conjectures, 1);
        assert_eq!(text, export_tptp(&obs, &th).unwrap());
        assert!(text.contains("![V0]:"));
        assert!(text.contains("?[V0]:"));
        // Bound variables are uppercased and predicates lowercased.
        assert!(text.contains("p(V0)"));
    }

    #[test]
    fn obligation_sentences_print_and_reparse() {
        let th = toy();
        let k = identity_interp(&th);
        for ob in interpretation_obligations(&k).unwrap() {
            let printed = formula_to_string(&ob.sentence, false);
            let (back, free) =
                parse_formula_open(&th.signature, &MacroTable::default(), &printed).unwrap();
            assert!(free.is_empty());
            assert!(back.alpha_eq(&ob.sentence), "{}", printed);
        }
    }
}
