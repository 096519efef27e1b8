//! Interpretation rewrites that produce synonymy witnesses.
//!
//! `make_direct` replaces an interpretation `K : U → V` by a definably
//! isomorphic direct one when a direct `M : V → U` and an isomorphism
//! `F : K∘M → id_V` are available. `sb_directify` does the same without a
//! given isomorphism: it manufactures the bijection between the full domain
//! and `δ_K` through the switch construction (so it needs a class
//! interpretation in `V` to quantify over), then rewrites predicate-wise.
//! `transport_sequentiality` moves a sequentiality witness along a retract.
//!
//! All three emit their correctness conditions as labeled [`Obligation`]s;
//! nothing here claims provability. The [`testbed`] submodule provides small
//! finitely axiomatized theories with easy finite models so the rewrites can
//! be exercised end to end.

use crate::interp::{iiso_obligations, int0_eq_obligations, IMap, Interpretation, Obligation};
use crate::sb::build_h_formula;
use crate::syntax::{block_names, Formula, ProtoFormula, Theory, Var};
use crate::translation::Translation;
use crate::{Error, Result};
use std::collections::{BTreeMap, HashSet};

/// A mutual pair of interpretations with definable isomorphisms witnessing
/// that both compositions are isomorphic to identities: `fv : K∘M → id_V`
/// and `gu : M∘K → id_U`.
#[derive(Debug, Clone)]
pub struct BiInterpretation {
    /// `K : U → V`.
    pub k: Interpretation,
    /// `M : V → U`.
    pub m: Interpretation,
    /// Graph of the isomorphism `K∘M → id_V`, over `V`.
    pub fv: ProtoFormula,
    /// Graph of the isomorphism `M∘K → id_U`, over `U`.
    pub gu: ProtoFormula,
}

/// The outcome of a directification: a direct `K′` forming, with `M`, a
/// candidate synonymy, plus the obligations that certify it.
#[derive(Debug, Clone)]
pub struct SynonymyWitness {
    pub k_prime: Interpretation,
    pub m: Interpretation,
    pub obligations: Vec<Obligation>,
    /// Precondition downgrades recorded when running with `force`.
    pub warnings: Vec<String>,
}

/// The identity interpretation of a one-sorted theory in itself.
pub fn identity_interpretation(th: &Theory) -> Result<Interpretation> {
    let tau = Translation::identity(&th.signature)?;
    Interpretation::new(tau.name.clone(), th.clone(), tau, th.clone())
}

fn composite(first: &Interpretation, second: &Interpretation) -> Result<Interpretation> {
    let tau = first.translation.compose(&second.translation)?;
    Interpretation::new(
        tau.name.clone(),
        first.source.clone(),
        tau,
        second.target.clone(),
    )
}

impl BiInterpretation {
    pub fn new(
        k: Interpretation,
        m: Interpretation,
        fv: ProtoFormula,
        gu: ProtoFormula,
    ) -> Result<Self> {
        if k.target.signature != m.source.signature || k.source.signature != m.target.signature {
            return Err(Error::Precondition(format!(
                "{} and {} are not a mutual pair",
                k.name, m.name
            )));
        }
        let b = BiInterpretation { k, m, fv, gu };
        // Validate arities, sorts, and well-formedness of both graphs.
        b.fv_map()?;
        b.gu_map()?;
        Ok(b)
    }

    /// `K∘M : V → V` (apply `M` first, then `K`).
    pub fn km(&self) -> Result<Interpretation> {
        composite(&self.m, &self.k)
    }

    /// `M∘K : U → U` (apply `K` first, then `M`).
    pub fn mk(&self) -> Result<Interpretation> {
        composite(&self.k, &self.m)
    }

    /// `fv` packaged as a morphism `K∘M → id_V`.
    pub fn fv_map(&self) -> Result<IMap> {
        let km = self.km()?;
        let idv = identity_interpretation(&self.m.source)?;
        let name = format!("fv_{}", km.name);
        IMap::new(name, km, idv, self.fv.clone())
    }

    /// `gu` packaged as a morphism `M∘K → id_U`.
    pub fn gu_map(&self) -> Result<IMap> {
        let mk = self.mk()?;
        let idu = identity_interpretation(&self.k.source)?;
        let name = format!("gu_{}", mk.name);
        IMap::new(name, mk, idu, self.gu.clone())
    }

    /// Both isomorphism bundles: what must be proved for this pair to be a
    /// bi-interpretation.
    pub fn obligations(&self) -> Result<Vec<Obligation>> {
        let mut out = iiso_obligations(&self.fv_map()?)?;
        out.extend(iiso_obligations(&self.gu_map()?)?);
        Ok(out)
    }
}

/// Predicate-wise rewrite: for each source predicate `P` of arity `n`,
///
/// `P′(v_0,…,v_{n-1}) :⟺ ∃u⃗_0∈δ,…,∃u⃗_{n-1}∈δ (⋀_i graph_i ∧ P_K(u⃗_0,…,u⃗_{n-1}))`
///
/// where `graph_i` is `graph(u⃗_i, v_i)` when `block_first`, else
/// `graph(v_i, u⃗_i)`.
fn displayed_predmap(
    k_tau: &Translation,
    usort: &str,
    graph: &ProtoFormula,
    block_first: bool,
) -> Result<BTreeMap<String, ProtoFormula>> {
    let tsort = k_tau.target_sort().to_string();
    let mdim = k_tau.dim(usort);
    let delta = k_tau.domain(usort);
    let mut out = BTreeMap::new();
    for pd in &k_tau.source.preds {
        let n = pd.profile.len();
        let mut used: HashSet<String> = HashSet::new();
        let params: Vec<Var> = (0..n)
            .map(|i| Var::new(block_names(&format!("v{}", i), 1, &mut used).remove(0), &tsort))
            .collect();
        let blocks: Vec<Vec<Var>> = (0..n)
            .map(|i| {
                block_names(&format!("u{}", i), mdim, &mut used)
                    .into_iter()
                    .map(|nm| Var::new(nm, &tsort))
                    .collect()
            })
            .collect();
        let mut conjs: Vec<Formula> = Vec::new();
        for i in 0..n {
            let args: Vec<Var> = if block_first {
                blocks[i].iter().cloned().chain([params[i].clone()]).collect()
            } else {
                [params[i].clone()].into_iter().chain(blocks[i].iter().cloned()).collect()
            };
            conjs.push(graph.apply(&args)?);
        }
        let all_blocks: Vec<Var> = blocks.iter().flatten().cloned().collect();
        conjs.push(k_tau.predmap[&pd.name].apply(&all_blocks)?);
        let mut body = Formula::conj(conjs);
        for b in blocks.iter().rev() {
            let inner = if delta.is_trivial() {
                body
            } else {
                Formula::and(delta.apply(b)?, body)
            };
            body = Formula::exists_many(b, inner);
        }
        out.insert(pd.name.clone(), ProtoFormula::new(params, body)?);
    }
    Ok(out)
}

fn direct_rewrite(
    k: &Interpretation,
    suffix: &str,
    usort: &str,
    graph: &ProtoFormula,
    block_first: bool,
) -> Result<Interpretation> {
    let predmap = displayed_predmap(&k.translation, usort, graph, block_first)?;
    let tau = Translation::new(
        format!("{}{}", k.translation.name, suffix),
        k.translation.source.clone(),
        k.translation.target.clone(),
        BTreeMap::new(),
        BTreeMap::new(),
        predmap,
        BTreeMap::new(),
    )?;
    debug_assert!(tau.classify().direct);
    Interpretation::new(
        format!("{}{}", k.name, suffix),
        k.source.clone(),
        tau,
        k.target.clone(),
    )
}

/// Obligations stating `left = right` in the equational sense (domains and
/// predicates provably equivalent), for two parallel interpretations.
fn int0_bundle(left: &Interpretation, right: &Interpretation) -> Result<Vec<Obligation>> {
    int0_eq_obligations(left, right)
}

/// Replace `K : U → V` by a definably isomorphic direct interpretation.
///
/// Requires a direct `M : V → U` and the graph `f` of an isomorphism
/// `K∘M → id_V` (arity `dim(K) + 1`, over `V`). Returns the direct `K′`,
/// the same graph re-read as a morphism `K → K′` (the codomain reading
/// changes, the formula does not), and the obligation bundle: the morphism
/// conditions for `f : K → K′` and the equations `K′∘M = id_V`.
pub fn make_direct(
    k: &Interpretation,
    m: &Interpretation,
    f: &ProtoFormula,
) -> Result<(Interpretation, ProtoFormula, Vec<Obligation>)> {
    if k.target.signature != m.source.signature || k.source.signature != m.target.signature {
        return Err(Error::Precondition(format!(
            "{} and {} are not a mutual pair",
            k.name, m.name
        )));
    }
    if !m.translation.classify().direct {
        return Err(Error::Precondition(format!(
            "{} must be direct to rewrite {}",
            m.name, k.name
        )));
    }
    let usort = k.source.signature.only_sort()?.to_string();
    let mdim = k.translation.dim(&usort);
    if f.arity() != mdim + 1 {
        return Err(Error::Precondition(format!(
            "isomorphism graph has arity {}, expected {}",
            f.arity(),
            mdim + 1
        )));
    }
    let tsort = k.translation.target_sort();
    if f.params.iter().any(|p| p.sort != tsort) {
        return Err(Error::Precondition(format!(
            "isomorphism graph parameters must have sort {}",
            tsort
        )));
    }
    f.body.well_formed(&k.target.signature, &f.params)?;

    let kp = direct_rewrite(k, "_direct", &usort, f, true)?;
    let f_prime = f.clone();

    let iso = IMap::new(
        format!("{}_to_{}", k.name, kp.name),
        k.clone(),
        kp.clone(),
        f_prime.clone(),
    )?;
    let mut obligations = iiso_obligations(&iso)?;
    let kpm = composite(m, &kp)?;
    obligations.extend(int0_bundle(&kpm, &identity_interpretation(&m.source)?)?);
    Ok((kp, f_prime, obligations))
}

fn eq_graph(x: &str, y: &str, sort: &str) -> ProtoFormula {
    let a = Var::new(x, sort);
    let b = Var::new(y, sort);
    ProtoFormula {
        params: vec![a.clone(), b.clone()],
        body: Formula::Eq(a, b),
    }
}

/// Directify `K` with no isomorphism in hand, by building one.
///
/// `δ_K` embeds in the full domain of `V` identically, and the inverse of
/// `fv` injects the full domain into `δ_{K∘M} ⊆ δ_K`; the switch
/// construction (through the class interpretation `iota`, which must read
/// the object sort identically) turns the two injections into a definable
/// bijection `G` from the full domain onto `δ_K`. Rewriting `K` along `G`
/// predicate-wise yields the direct `K′`.
///
/// Strict preconditions: `K` and `M` one-dimensional and identity-preserving.
/// With `force`, failures of the identity-preservation checks are downgraded
/// to warnings (recorded in the witness); dimension and `iota` requirements
/// always hold hard.
pub fn sb_directify(
    b: &BiInterpretation,
    iota: &Translation,
    force: bool,
) -> Result<SynonymyWitness> {
    let usort = b.k.source.signature.only_sort()?.to_string();
    let vsort = b.k.target.signature.only_sort()?.to_string();
    if b.k.translation.dim(&usort) != 1 || b.m.translation.dim(&vsort) != 1 {
        return Err(Error::Precondition(
            "both interpretations must be one-dimensional".into(),
        ));
    }
    let mut warnings = Vec::new();
    for (role, interp) in [("K", &b.k), ("M", &b.m)] {
        if !interp.translation.classify().identity_preserving {
            let msg = format!("{} ({}) is not identity-preserving", role, interp.name);
            if force {
                warnings.push(format!("{}; proceeding anyway", msg));
            } else {
                return Err(Error::Precondition(msg));
            }
        }
    }
    if iota.target != b.k.target.signature {
        return Err(Error::Precondition(format!(
            "class interpretation {} does not target the signature of {}",
            iota.name,
            b.k.target.name()
        )));
    }
    if iota.classify().o_direct != Some(true) {
        return Err(Error::Precondition(format!(
            "class interpretation {} must read the object sort identically",
            iota.name
        )));
    }

    let tsort = b.k.translation.target_sort().to_string();
    // The two injections: the full domain maps into δ_K by the inverse of
    // fv, and δ_K embeds identically.
    let a_class = ProtoFormula::trivial(vec![Var::new("x", &tsort)]);
    let b_class = b.k.translation.domain(&usort).clone();
    let eq = eq_graph("x", "y", &tsort);
    let f_inj = {
        let x = Var::new("x", &tsort);
        let w = Var::new("w", &tsort);
        ProtoFormula {
            params: vec![x.clone(), w.clone()],
            body: b.fv.apply(&[w, x])?,
        }
    };
    let g_inj = eq_graph("w", "x", &tsort);
    let g_formula = build_h_formula(iota, &a_class, &b_class, &eq, &eq, &f_inj, &g_inj)?;

    let kp = direct_rewrite(&b.k, "_sb", &usort, &g_formula, false)?;

    // The isomorphism K → K′ induced by G: a δ_K-element w corresponds to
    // the full-domain element v with v G w.
    let iso_graph = {
        let w = Var::new("w", &tsort);
        let v = Var::new("v", &tsort);
        ProtoFormula {
            params: vec![w.clone(), v.clone()],
            body: g_formula.apply(&[v, w])?,
        }
    };
    let iso = IMap::new(
        format!("{}_to_{}", b.k.name, kp.name),
        b.k.clone(),
        kp.clone(),
        iso_graph,
    )?;
    let mut obligations = iiso_obligations(&iso)?;
    let kpm = composite(&b.m, &kp)?;
    obligations.extend(int0_bundle(&kpm, &identity_interpretation(&b.m.source)?)?);
    let mkp = composite(&kp, &b.m)?;
    obligations.extend(int0_bundle(&mkp, &identity_interpretation(&b.k.source)?)?);

    Ok(SynonymyWitness {
        k_prime: kp,
        m: b.m.clone(),
        obligations,
        warnings,
    })
}

/// Transport a sequentiality witness backwards along a one-dimensional
/// retract: given `K : U → V`, `M : V → U`, the graph `f` of an isomorphism
/// `M∘K → id_U`, and a candidate membership formula `in_star` over `V`,
/// build the membership formula over `U`:
///
/// `x ∈ʹ y :⟺ δ_M(y) ∧ ∃z (f(z, x) ∧ (z ∈⋆ y)^M)`.
pub fn transport_sequentiality(
    k: &Interpretation,
    m: &Interpretation,
    f: &ProtoFormula,
    in_star: &ProtoFormula,
) -> Result<ProtoFormula> {
    if k.target.signature != m.source.signature || k.source.signature != m.target.signature {
        return Err(Error::Precondition(format!(
            "{} and {} are not a mutual pair",
            k.name, m.name
        )));
    }
    let usort = k.source.signature.only_sort()?.to_string();
    let vsort = m.source.signature.only_sort()?.to_string();
    if k.translation.dim(&usort) != 1 || m.translation.dim(&vsort) != 1 {
        return Err(Error::Precondition(
            "both interpretations must be one-dimensional".into(),
        ));
    }
    let tsort = m.translation.target_sort().to_string();
    if in_star.arity() != 2 {
        return Err(Error::Precondition(format!(
            "the membership formula must be binary, has arity {}",
            in_star.arity()
        )));
    }
    in_star.body.well_formed(&m.source.signature, &in_star.params)?;
    if f.arity() != 2 {
        return Err(Error::Precondition(format!(
            "the isomorphism graph must be binary, has arity {}",
            f.arity()
        )));
    }
    if f.params.iter().any(|p| p.sort != tsort) {
        return Err(Error::Precondition(format!(
            "isomorphism graph parameters must have sort {}",
            tsort
        )));
    }
    f.body.well_formed(&m.target.signature, &f.params)?;

    let star_m = m.translation.apply_proto(in_star)?;
    let mut used: HashSet<String> = HashSet::new();
    let mut take = |base: &str| -> Var {
        Var::new(block_names(base, 1, &mut used).remove(0), &tsort)
    };
    let x = take("x");
    let y = take("y");
    let z = take("z");
    let inner = Formula::exists(
        z.clone(),
        Formula::and(
            f.apply(&[z.clone(), x.clone()])?,
            star_m.apply(&[z.clone(), y.clone()])?,
        ),
    );
    let delta_m = m.translation.domain(&vsort);
    let body = if delta_m.is_trivial() {
        inner
    } else {
        Formula::and(delta_m.apply(std::slice::from_ref(&y))?, inner)
    };
    ProtoFormula::new(vec![x, y], body)
}

/// Small finitely axiomatized theories with easy finite models, used to
/// exercise the rewrites end to end (in tests, the acceptance suite, and
/// demos). The flat class theory pins its models to an object set plus the
/// full powerset of classes, which is exactly what the switch construction
/// needs to quantify over.
pub mod testbed {
    use super::*;
    use crate::model::FiniteStructure;
    use crate::syntax::parse::{parse_theory, MacroTable};
    use crate::syntax::Signature;
    use crate::translation::parse_translation;

    /// Flat class theory: objects and classes in one sort, membership typed,
    /// the empty class, adjunction of objects to classes, extensionality.
    /// Finite models are object sets with the full powerset as classes.
    pub fn acl_theory() -> Theory {
        parse_theory(
            "theory ACL\n\
             pred ob/1\n\
             pred cl/1\n\
             pred in/2\n\
             axiom cover: all x. (ob(x) | cl(x))\n\
             axiom disjoint: all x. ~ (ob(x) & cl(x))\n\
             axiom typing: all x. all y. (in(x,y) -> (ob(x) & cl(y)))\n\
             axiom empty: ex y. (cl(y) & all x. ~ in(x,y))\n\
             axiom adjoin: all y. all z. ((cl(y) & ob(z)) ->\n\
               ex w. (cl(w) & all x. (in(x,w) <-> (in(x,y) | x = z))))\n\
             axiom ext: all y. all w. ((cl(y) & cl(w) & (all x. (in(x,y) <-> in(x,w)))) -> y = w)\n",
        )
        .expect("the built-in class theory parses")
    }

    /// A disjoint renamed copy of [`acl_theory`].
    pub fn acle_theory() -> Theory {
        parse_theory(
            "theory ACLe\n\
             pred obe/1\n\
             pred cle/1\n\
             pred ine/2\n\
             axiom cover: all x. (obe(x) | cle(x))\n\
             axiom disjoint: all x. ~ (obe(x) & cle(x))\n\
             axiom typing: all x. all y. (ine(x,y) -> (obe(x) & cle(y)))\n\
             axiom empty: ex y. (cle(y) & all x. ~ ine(x,y))\n\
             axiom adjoin: all y. all z. ((cle(y) & obe(z)) ->\n\
               ex w. (cle(w) & all x. (ine(x,w) <-> (ine(x,y) | x = z))))\n\
             axiom ext: all y. all w. ((cle(y) & cle(w) & (all x. (ine(x,y) <-> ine(x,w)))) -> y = w)\n",
        )
        .expect("the built-in class theory copy parses")
    }

    /// The two-sorted object/class signature read by class interpretations.
    pub fn class_signature() -> Signature {
        parse_theory("theory ac\nsort o c\npred in/2 : o, c\n")
            .expect("the class signature parses")
            .signature
    }

    fn resolver<'a>(
        theories: &'a [&'a Theory],
    ) -> impl Fn(&str) -> Option<(Signature, MacroTable)> + 'a {
        move |name: &str| {
            theories
                .iter()
                .find(|t| t.name() == name)
                .map(|t| (t.signature.clone(), t.macros.clone()))
        }
    }

    /// The standard testbed pair: `K : ACLe → ACL` with the provably full
    /// but syntactically nontrivial domain `ob(x) ∨ cl(x)` (so `K` is not
    /// direct), `M : ACL → ACLe` the direct renaming back, and equality
    /// graphs as the witnessing isomorphisms. Returns the pair and a class
    /// interpretation of the object/class signature in `ACL`.
    pub fn toy_bi_interpretation() -> Result<(BiInterpretation, Translation)> {
        let v = acl_theory();
        let u = acle_theory();
        let ac = parse_theory("theory ac\nsort o c\npred in/2 : o, c\n")?;
        let (k_tau, m_tau, iota) = {
            let ths = [&v, &u, &ac];
            let resolve = resolver(&ths);
            let k_tau = parse_translation(
                "translation Ktoy : ACLe -> ACL\n\
                 delta o (x) = ob(x) | cl(x)\n\
                 map obe(x) = ob(x)\n\
                 map cle(x) = cl(x)\n\
                 map ine(x ; y) = in(x,y)\n",
                &resolve,
            )?;
            let m_tau = parse_translation(
                "translation Mtoy : ACL -> ACLe\n\
                 map ob(x) = obe(x)\n\
                 map cl(x) = cle(x)\n\
                 map in(x ; y) = ine(x,y)\n",
                &resolve,
            )?;
            let iota = parse_translation(
                "translation itoy : ac -> ACL\n\
                 delta c (z) = cl(z)\n\
                 map in(x ; z) = in(x,z)\n",
                &resolve,
            )?;
            (k_tau, m_tau, iota)
        };
        let k = Interpretation::new("Ktoy", u.clone(), k_tau, v.clone())?;
        let m = Interpretation::new("Mtoy", v, m_tau, u)?;
        let fv = eq_graph("z", "v", "o");
        let gu = eq_graph("z", "u", "o");
        let bi = BiInterpretation::new(k, m, fv, gu)?;
        Ok((bi, iota))
    }

    /// A standard model of the flat class theory: `n` objects `o0…`, one
    /// class element per subset of the objects.
    pub fn acl_model(n: usize) -> Result<FiniteStructure> {
        class_model(&acl_theory(), n, "ob", "cl", "in")
    }

    /// The renamed copy of [`acl_model`], a model of `ACLe`.
    pub fn acle_model(n: usize) -> Result<FiniteStructure> {
        class_model(&acle_theory(), n, "obe", "cle", "ine")
    }

    fn class_model(
        th: &Theory,
        n: usize,
        ob: &str,
        cl: &str,
        mem: &str,
    ) -> Result<FiniteStructure> {
        assert!(n <= 8, "testbed models stay small");
        let mut s = FiniteStructure::new(format!("{}{}", th.name(), n), th.signature.clone());
        let objs: Vec<String> = (0..n).map(|i| format!("o{}", i)).collect();
        for id in &objs {
            s.add_elem("o", id.clone())?;
            s.add_tuple_ids(ob, &[id])?;
        }
        for mask in 0u32..(1 << n) {
            let id = format!("c{}", mask);
            s.add_elem("o", id.clone())?;
            s.add_tuple_ids(cl, &[&id])?;
            for (i, obj) in objs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s.add_tuple_ids(mem, &[obj, &id])?;
                }
            }
        }
        Ok(s)
    }

    /// A one-predicate theory with no axioms; every structure is a model.
    pub fn part_theory(name: &str, pred: &str) -> Theory {
        parse_theory(&format!("theory {}\npred {}/1\n", name, pred))
            .expect("the one-predicate theory parses")
    }

    /// Renaming pair over the one-predicate theories, with equality graphs:
    /// a bi-interpretation whose obligations hold on arbitrary structures.
    pub fn part_bi_interpretation() -> Result<BiInterpretation> {
        let v = part_theory("PART", "p");
        let u = part_theory("PARTe", "pe");
        let (k_tau, m_tau) = {
            let ths = [&v, &u];
            let resolve = resolver(&ths);
            let k_tau = parse_translation(
                "translation Kpart : PARTe -> PART\nmap pe(x) = p(x)\n",
                &resolve,
            )?;
            let m_tau = parse_translation(
                "translation Mpart : PART -> PARTe\nmap p(x) = pe(x)\n",
                &resolve,
            )?;
            (k_tau, m_tau)
        };
        let k = Interpretation::new("Kpart", u.clone(), k_tau, v.clone())?;
        let m = Interpretation::new("Mpart", v, m_tau, u)?;
        BiInterpretation::new(k, m, eq_graph("z", "v", "o"), eq_graph("z", "u", "o"))
    }

    /// All `2^n` structures over an `n`-element carrier for a one-predicate
    /// theory — pairwise distinct structures, not relabelings of one.
    pub fn part_models(th: &Theory, pred: &str, n: usize) -> Result<Vec<FiniteStructure>> {
        assert!(n <= 8, "testbed models stay small");
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let mut s =
                FiniteStructure::new(format!("{}_{}", th.name(), mask), th.signature.clone());
            for i in 0..n {
                let id = format!("e{}", i);
                s.add_elem("o", id.clone())?;
                if mask & (1 << i) != 0 {
                    s.add_tuple_ids(pred, &[&id])?;
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::testbed::*;
    use super::*;
    use crate::model::FiniteStructure;
    use crate::syntax::parse::{parse_proto, MacroTable};

    fn assert_all_hold(obls: &[Obligation], s: &FiniteStructure, sig_name: &str) {
        let mut checked = 0;
        for o in obls {
            if o.sentence.well_formed(&s.signature, &[]).is_err() {
                continue; // obligation over the other signature
            }
            checked += 1;
            assert!(
                s.eval_sentence(&o.sentence).unwrap(),
                "{} fails on {} ({})",
                o.label,
                s.name,
                sig_name
            );
        }
        assert!(checked > 0, "no obligations were checkable on {}", sig_name);
    }

    #[test]
    fn toy_models_satisfy_their_theories() {
        for n in 0..3 {
            let mv = acl_model(n).unwrap();
            assert_eq!(mv.satisfies(&acl_theory()).unwrap(), None, "ACL model {}", n);
            let mu = acle_model(n).unwrap();
            assert_eq!(mu.satisfies(&acle_theory()).unwrap(), None, "ACLe model {}", n);
        }
    }

    #[test]
    fn toy_pair_classifies_as_claimed_and_its_obligations_hold() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        let ck = bi.k.translation.classify();
        assert!(ck.identity_preserving && !ck.unrelativized && !ck.direct);
        assert!(bi.m.translation.classify().direct);
        let obls = bi.obligations().unwrap();
        assert!(!obls.is_empty());
        assert_all_hold(&obls, &acl_model(2).unwrap(), "ACL");
        assert_all_hold(&obls, &acle_model(2).unwrap(), "ACLe");
    }

    #[test]
    fn make_direct_produces_a_direct_interpretation_with_true_obligations() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        let (kp, fp, obls) = make_direct(&bi.k, &bi.m, &bi.fv).unwrap();
        assert!(kp.translation.classify().direct);
        assert!(fp.alpha_eq(&bi.fv));
        for n in 0..3 {
            assert_all_hold(&obls, &acl_model(n).unwrap(), "ACL");
        }
        // The composition of two directs is direct.
        let kpm = bi.m.translation.compose(&kp.translation).unwrap();
        assert!(kpm.classify().direct);
    }

    #[test]
    fn make_direct_image_matches_the_rewrite_shape() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        let (kp, _, _) = make_direct(&bi.k, &bi.m, &bi.fv).unwrap();
        // For the unary predicate: ∃u∈δ (u = v ∧ obe-image(u)).
        let macros = MacroTable::default();
        let expected = parse_proto(
            &bi.k.target.signature,
            &macros,
            "[v] ex u. ((ob(u) | cl(u)) & (u = v & ((ob(u) | cl(u)) & ob(u))))",
        )
        .unwrap();
        assert!(
            kp.translation.predmap["obe"].alpha_eq(&expected),
            "got {:?}",
            kp.translation.predmap["obe"]
        );
    }

    #[test]
    fn make_direct_rejects_bad_inputs() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        // K itself is not direct, so it cannot play the role of M.
        assert!(make_direct(&bi.m, &bi.k, &bi.gu).is_err());
        // Wrong graph arity.
        let bad = ProtoFormula::trivial(vec![Var::new("x", "o")]);
        assert!(make_direct(&bi.k, &bi.m, &bad).is_err());
    }

    #[test]
    fn make_direct_identity_rewrite_on_the_renaming_pair() {
        let bi = part_bi_interpretation().unwrap();
        let (kp, _, obls) = make_direct(&bi.k, &bi.m, &bi.fv).unwrap();
        assert!(kp.translation.classify().direct);
        let against_k = int0_eq_obligations(&kp, &bi.k).unwrap();
        for s in part_models(&part_theory("PART", "p"), "p", 4).unwrap() {
            assert_all_hold(&obls, &s, "PART");
            assert_all_hold(&against_k, &s, "PART");
        }
        // The defined map relates the internal models on every test model.
        let iso = IMap::new("idgraph", bi.k.clone(), kp, bi.fv.clone()).unwrap();
        for s in part_models(&part_theory("PART", "p"), "p", 3).unwrap() {
            assert_eq!(crate::interp::check_defined_iso(&iso, &s).unwrap(), None);
        }
    }

    #[test]
    fn sb_directify_builds_a_direct_interpretation_via_the_switch_bijection() {
        let (bi, iota) = toy_bi_interpretation().unwrap();
        let w = sb_directify(&bi, &iota, false).unwrap();
        assert!(w.warnings.is_empty());
        assert!(w.k_prime.translation.classify().direct);

        // The image of each predicate embeds the bijection formula literally:
        // ∃w∈δ_K (G(v, w) ∧ …) with G the switch-construction output.
        let tsort = bi.k.translation.target_sort().to_string();
        let a_class = ProtoFormula::trivial(vec![Var::new("x", &tsort)]);
        let b_class = bi.k.translation.domain("o").clone();
        let eq = eq_graph("x", "y", &tsort);
        let f_inj = ProtoFormula {
            params: vec![Var::new("x", &tsort), Var::new("w", &tsort)],
            body: bi
                .fv
                .apply(&[Var::new("w", &tsort), Var::new("x", &tsort)])
                .unwrap(),
        };
        let g_inj = eq_graph("w", "x", &tsort);
        let g = build_h_formula(&iota, &a_class, &b_class, &eq, &eq, &f_inj, &g_inj).unwrap();
        let image = &w.k_prime.translation.predmap["obe"];
        let Formula::Exists(_, inner) = &image.body else {
            panic!("image is not an existential: {:?}", image.body);
        };
        let Formula::And(_, rest) = &**inner else {
            panic!("missing domain guard: {:?}", inner);
        };
        let Formula::And(gapp, _) = &**rest else {
            panic!("missing graph conjunct: {:?}", rest);
        };
        let expected = ProtoFormula {
            params: image.params.clone(),
            body: (**gapp).clone(),
        };
        // The graph conjunct is α-equal to G(v0, w0) for the bound w0.
        let Formula::Exists(w0, _) = &image.body else {
            unreachable!()
        };
        let wanted = ProtoFormula {
            params: image.params.clone(),
            body: g
                .apply(&[image.params[0].clone(), w0.clone()])
                .unwrap(),
        };
        // Compare under the same free-variable order (param plus the bound
        // name, which canon_string treats positionally).
        assert_eq!(
            expected.body.canon_string(&[image.params[0].clone(), w0.clone()]),
            wanted.body.canon_string(&[image.params[0].clone(), w0.clone()])
        );

        // Rerunning is deterministic.
        let w2 = sb_directify(&bi, &iota, false).unwrap();
        assert_eq!(
            crate::translation::print_translation(&w.k_prime.translation),
            crate::translation::print_translation(&w2.k_prime.translation)
        );
    }

    #[test]
    fn sb_directify_obligations_hold_on_the_toy_models() {
        let (bi, iota) = toy_bi_interpretation().unwrap();
        let w = sb_directify(&bi, &iota, false).unwrap();
        assert_all_hold(&w.obligations, &acl_model(1).unwrap(), "ACL");
        assert_all_hold(&w.obligations, &acle_model(1).unwrap(), "ACLe");
    }

    #[test]
    fn sb_directify_force_downgrades_the_classify_precondition() {
        let (bi, iota) = toy_bi_interpretation().unwrap();
        // Corrupt K's equality reading: still an equivalence relation, but
        // not componentwise identity.
        let mut k_tau = bi.k.translation.clone();
        let x = Var::new("x", "o");
        let y = Var::new("y", "o");
        k_tau.eqmap.insert(
            "o".into(),
            ProtoFormula {
                params: vec![x.clone(), y.clone()],
                body: Formula::and(
                    Formula::Eq(x.clone(), y.clone()),
                    Formula::Eq(y.clone(), x.clone()),
                ),
            },
        );
        let k_tau = Translation::new(
            k_tau.name.clone(),
            k_tau.source.clone(),
            k_tau.target.clone(),
            k_tau.dims.clone(),
            k_tau.domains.clone(),
            k_tau.predmap.clone(),
            k_tau.eqmap.clone(),
        )
        .unwrap();
        assert!(!k_tau.classify().identity_preserving);
        let k = Interpretation::new("Kodd", bi.k.source.clone(), k_tau, bi.k.target.clone())
            .unwrap();
        let odd = BiInterpretation::new(k, bi.m.clone(), bi.fv.clone(), bi.gu.clone()).unwrap();
        assert!(sb_directify(&odd, &iota, false).is_err());
        let w = sb_directify(&odd, &iota, true).unwrap();
        assert_eq!(w.warnings.len(), 1);
        assert!(w.k_prime.translation.classify().direct);
    }

    #[test]
    fn transport_keeps_the_displayed_shape_and_meaning() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        // Identity transport: K = M = id over the class theory, equality
        // graph, native membership.
        let v = acl_theory();
        let idv = identity_interpretation(&v).unwrap();
        let star = {
            let macros = MacroTable::default();
            parse_proto(&v.signature, &macros, "[x,y] in(x,y)").unwrap()
        };
        let f = eq_graph("z", "x", "o");
        let t = transport_sequentiality(&idv, &idv, &f, &star).unwrap();
        let s = acl_model(2).unwrap();
        for a in 0..s.size("o") as u32 {
            for b in 0..s.size("o") as u32 {
                let lhs = {
                    let formula = t
                        .apply(&[
                            Var::new(s.elem_id("o", a), "o"),
                            Var::new(s.elem_id("o", b), "o"),
                        ])
                        .unwrap();
                    let _ = formula;
                    let mut env = vec![
                        (t.params[0].name.clone(), a),
                        (t.params[1].name.clone(), b),
                    ];
                    s.eval_env(&t.body, &mut env).unwrap()
                };
                assert_eq!(lhs, s.holds("in", &[a, b]));
            }
        }

        // Through the toy pair, with U = ACL and V = ACLe: the domain guard
        // of the non-direct side appears, and the meaning is preserved.
        let star_e = {
            let macros = MacroTable::default();
            parse_proto(&bi.m.target.signature, &macros, "[x,y] ine(x,y)").unwrap()
        };
        let t2 = transport_sequentiality(&bi.m, &bi.k, &bi.fv, &star_e).unwrap();
        // Shape: δ_K(y) ∧ ∃z (fv(z,x) ∧ ine-image(z,y)).
        assert!(matches!(t2.body, Formula::And(_, _)));
        for a in 0..s.size("o") as u32 {
            for b in 0..s.size("o") as u32 {
                let mut env = vec![
                    (t2.params[0].name.clone(), a),
                    (t2.params[1].name.clone(), b),
                ];
                assert_eq!(
                    s.eval_env(&t2.body, &mut env).unwrap(),
                    s.holds("in", &[a, b])
                );
            }
        }

        // Arity violations are rejected.
        let bad = ProtoFormula::trivial(vec![Var::new("x", "o")]);
        assert!(transport_sequentiality(&bi.m, &bi.k, &bad, &star_e).is_err());
        assert!(transport_sequentiality(&bi.m, &bi.k, &bi.fv, &bad).is_err());
    }

    #[test]
    fn bi_interpretation_rejects_mismatched_pairs() {
        let (bi, _) = toy_bi_interpretation().unwrap();
        let err = BiInterpretation::new(
            bi.k.clone(),
            bi.k.clone(),
            bi.fv.clone(),
            bi.gu.clone(),
        );
        assert!(err.is_err());
        // Wrong graph arity is caught by the morphism packaging.
        let bad = BiInterpretation::new(
            bi.k.clone(),
            bi.m.clone(),
            ProtoFormula::trivial(vec![Var::new("x", "o")]),
            bi.gu.clone(),
        );
        assert!(bad.is_err());
    }
}
