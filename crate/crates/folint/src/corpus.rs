//! Built-in corpus: a small library of theories, translations and
//! isomorphism graphs, together with two executable demonstrations that run
//! on truncated hereditarily finite universes:
//!
//! * [`appendixc_check`] verifies, display by display, that the composite
//!   translations `M = K;L` (over `AS`) and `N = L;K` (over `ACFb`) agree
//!   with their closed-form descriptions, and that the projection graph
//!   `pi1` and the two-branch graph `G` define isomorphisms onto restricted
//!   identity interpretations.
//! * [`countermodel_demo`] builds the tagged-set structure together with the
//!   swap involution fixing a chosen finite seed, and reports its order,
//!   automorphism status and fixed points.
//!
//! Both demonstrations evaluate formulas over an explicit finite carrier, so
//! every verdict is a concrete model-theoretic fact about that carrier.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::interp::{iiso_obligations, IMap, Interpretation};
use crate::model::countermodel::{
    build_involution, check_automorphism, countermodel_universe, parse_hf, universe, HfElem,
    CARRIER_LIMIT,
};
use crate::model::registry::{EvalOpts, Plan, Registry};
use crate::model::FiniteStructure;
use crate::report::{CheckItem, RunReport};
use crate::synonymy::{identity_interpretation, testbed, BiInterpretation};
use crate::syntax::parse::{parse_proto, parse_theory, MacroTable};
use crate::syntax::{Formula, PredDecl, ProtoFormula, Signature, Theory, Var, DEFAULT_SORT};
use crate::translation::{parse_translation, Translation};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Raw corpus files
// ---------------------------------------------------------------------------

/// The bundled theory and translation sources, by file name.
pub const FILES: &[(&str, &str)] = &[
    ("eq.thy", include_str!("../corpus/eq.thy")),
    ("as.thy", include_str!("../corpus/as.thy")),
    ("ac.thy", include_str!("../corpus/ac.thy")),
    ("sbth.thy", include_str!("../corpus/sbth.thy")),
    ("acfb.thy", include_str!("../corpus/acfb.thy")),
    ("l.tr", include_str!("../corpus/l.tr")),
    ("k.tr", include_str!("../corpus/k.tr")),
];

/// Raw text of a bundled corpus file.
pub fn file(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Names accepted by [`theory`].
pub const THEORY_NAMES: &[&str] = &["EQ", "AS", "ac", "SBth", "ACFb", "ACL", "ACLe"];

/// Names accepted by [`translation`].
pub const TRANSLATION_NAMES: &[&str] = &["L", "K", "M", "N"];

/// Names accepted by [`interpretation`].
pub const INTERPRETATION_NAMES: &[&str] = &["L", "K", "M", "N"];

/// Names accepted by [`iso`].
pub const ISO_NAMES: &[&str] = &["pi1", "G"];

fn parse_corpus_theory(name: &str) -> Theory {
    parse_theory(file(name).expect("bundled corpus file")).expect("bundled corpus theory parses")
}

/// A bundled theory by name.
pub fn theory(name: &str) -> Option<Theory> {
    match name {
        "EQ" => Some(parse_corpus_theory("eq.thy")),
        "AS" => Some(parse_corpus_theory("as.thy")),
        "ac" => Some(parse_corpus_theory("ac.thy")),
        "SBth" => Some(parse_corpus_theory("sbth.thy")),
        "ACFb" => Some(parse_corpus_theory("acfb.thy")),
        "ACL" => Some(testbed::acl_theory()),
        "ACLe" => Some(testbed::acle_theory()),
        _ => None,
    }
}

fn resolve_theory(name: &str) -> Option<(Signature, MacroTable)> {
    theory(name).map(|t| (t.signature, t.macros))
}

fn parse_corpus_translation(text: &str) -> Result<Translation> {
    parse_translation(text, &resolve_theory)
}

/// A bundled translation by name. `L` and `K` are parsed from their corpus
/// files; `M` applies `K` then `L` (an `AS`-to-`AS` translation) and `N`
/// applies `L` then `K` (an `ACFb`-to-`ACFb` translation).
pub fn translation(name: &str) -> Option<Translation> {
    match name {
        "L" => Some(parse_corpus_translation(file("l.tr")?).expect("bundled translation parses")),
        "K" => Some(parse_corpus_translation(file("k.tr")?).expect("bundled translation parses")),
        "M" => {
            let k = translation("K")?;
            let l = translation("L")?;
            let mut m = k.compose(&l).expect("K composes with L");
            m.name = "M".into();
            Some(m)
        }
        "N" => {
            let k = translation("K")?;
            let l = translation("L")?;
            let mut n = l.compose(&k).expect("L composes with K");
            n.name = "N".into();
            Some(n)
        }
        _ => None,
    }
}

/// A bundled interpretation by name (same names as [`translation`]).
pub fn interpretation(name: &str) -> Option<Interpretation> {
    let (tau, src, tgt) = match name {
        "K" => (translation("K")?, "AS", "ACFb"),
        "L" => (translation("L")?, "ACFb", "AS"),
        "M" => (translation("M")?, "AS", "AS"),
        "N" => (translation("N")?, "ACFb", "ACFb"),
        _ => return None,
    };
    Some(
        Interpretation::new(name, theory(src)?, tau, theory(tgt)?)
            .expect("bundled interpretation is well-typed"),
    )
}

// ---------------------------------------------------------------------------
// Isomorphism graphs
// ---------------------------------------------------------------------------

/// Graph of the second-projection map out of `M`, over the `AS` signature.
const PI1_GRAPH: &str = "[z, y] Pair(z) & empty(pi0(z)) & pi1(z, y)";

/// Graph of the two-branch map out of `N`, over the `ACFb` signature:
/// object codes project to their second component, class codes continue on
/// to its `F`-value.
const G_GRAPH: &str =
    "[x, y] (obN(x) & ob(y) & pi1K(x) = y) | (clN(x) & cl(y) & F(pi1K(x)) = y)";

/// The coding macros of `AS` that get transported through `K`.
const CODE_MACROS: &[&str] = &["pair", "Pair", "pi0", "pi1", "empty", "inhab", "approx"];

/// Macro table over the `ACFb` signature with the `K`-images of the `AS`
/// coding macros (named `pairK`, `Pair K`, ... with a `K` suffix), the derived
/// discriminators `obN`/`clN`, and `K`'s membership map as `inK`.
fn k_code_macros(k_tau: &Translation) -> Result<MacroTable> {
    let as_th = theory("AS").expect("bundled theory");
    let acfb = theory("ACFb").expect("bundled theory");
    let mut table = MacroTable::default();
    for name in CODE_MACROS {
        let proto = as_th.macros.get(name).expect("AS defines the coding macros");
        table.insert(format!("{name}K"), k_tau.apply_proto(proto)?)?;
    }
    let obn = parse_proto(&acfb.signature, &table, "[x] emptyK(pi0K(x))")?;
    table.insert("obN".into(), obn)?;
    let cln = parse_proto(&acfb.signature, &table, "[x] inhabK(pi0K(x))")?;
    table.insert("clN".into(), cln)?;
    let ink = k_tau.predmap.get("in").expect("K maps membership").clone();
    table.insert("inK".into(), ink)?;
    Ok(table)
}

fn pi1_graph_from(text: &str) -> Result<ProtoFormula> {
    let as_th = theory("AS").expect("bundled theory");
    parse_proto(&as_th.signature, &as_th.macros, text)
}

fn g_graph_from(text: &str, k_tau: &Translation) -> Result<ProtoFormula> {
    let acfb = theory("ACFb").expect("bundled theory");
    parse_proto(&acfb.signature, &k_code_macros(k_tau)?, text)
}

/// Graph of the projection isomorphism `M -> id` over `AS`.
pub fn pi1_graph() -> ProtoFormula {
    pi1_graph_from(PI1_GRAPH).expect("bundled graph parses")
}

/// Graph of the two-branch isomorphism `N -> id` over `ACFb`.
pub fn g_graph() -> ProtoFormula {
    let k = translation("K").expect("bundled translation");
    g_graph_from(G_GRAPH, &k).expect("bundled graph parses")
}

/// A bundled defined map by name: `pi1` (from `M` to the identity over `AS`)
/// or `G` (from `N` to the identity over `ACFb`).
pub fn iso(name: &str) -> Option<IMap> {
    match name {
        "pi1" => {
            let from = interpretation("M")?;
            let to = identity_interpretation(&theory("AS")?).ok()?;
            Some(IMap::new("pi1", from, to, pi1_graph()).expect("bundled map is well-typed"))
        }
        "G" => {
            let from = interpretation("N")?;
            let to = identity_interpretation(&theory("ACFb")?).ok()?;
            Some(IMap::new("G", from, to, g_graph()).expect("bundled map is well-typed"))
        }
        _ => None,
    }
}

/// The bundled bi-interpretation between `AS` and `ACFb`: `K` forward, `L`
/// backward, with `G` and `pi1` as the two comparison graphs.
pub fn as_acfb_pair() -> BiInterpretation {
    let k = interpretation("K").expect("bundled interpretation");
    let l = interpretation("L").expect("bundled interpretation");
    BiInterpretation::new(k, l, g_graph(), pi1_graph())
        .expect("the bundled pair forms a bi-interpretation")
}

// ---------------------------------------------------------------------------
// Single-site corruptions
// ---------------------------------------------------------------------------

/// A documented single-site corruption of the corpus sources. `from` occurs
/// exactly once across the `L`/`K` sources and the two graph templates;
/// replacing it with `to` yields a syntactically valid but wrong artifact.
/// `expect` names a report item of [`appendixc_check`] that fails under the
/// corruption at the default parameters (4, 2, 2).
pub struct MutationSite {
    pub name: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    pub expect: &'static str,
    pub doc: &'static str,
}

pub const MUTATION_SITES: &[MutationSite] = &[
    MutationSite {
        name: "l.ob.to_cl",
        from: "map ob (x) = obL(x)",
        to: "map ob (x) = clL(x)",
        expect: "m.delta",
        doc: "L sends the object discriminator to the class coding, so the \
              composite domain of M no longer matches its display",
    },
    MutationSite {
        name: "l.eq.swap_projections",
        from: "obL(y) & pi1(x) = pi1(y)",
        to: "obL(y) & pi0(x) = pi0(y)",
        expect: "m.eq",
        doc: "the object branch of L's equality map compares first instead of \
              second projections",
    },
    MutationSite {
        name: "l.cl.to_ob",
        from: "map cl (x) = clL(x)",
        to: "map cl (x) = obL(x)",
        expect: "n.cl",
        doc: "L sends the class discriminator to the object coding, so the \
              class predicate of N disagrees with its display",
    },
    MutationSite {
        name: "k.delta.ob_to_cl",
        from: "delta o (x) = ob(x)",
        to: "delta o (x) = cl(x)",
        expect: "k.delta",
        doc: "K relativizes to classes instead of objects",
    },
    MutationSite {
        name: "k.eq.to_frege_equality",
        from: "eq o (x ; y) = ob(x) & ob(y) & x = y",
        to: "eq o (x ; y) = ob(x) & ob(y) & F(x) = F(y)",
        expect: "k.eq",
        doc: "K's equality map identifies objects with the same F-value, \
              collapsing co-extensional objects into one",
    },
    MutationSite {
        name: "k.elem.frege_first_arg",
        from: "F(y, z)",
        to: "F(x, z)",
        expect: "k.elem",
        doc: "K's membership map asks for the F-value of the member instead \
              of the container, collapsing membership to self-membership",
    },
    MutationSite {
        name: "k.elem.member_to_frege",
        from: "in(x, z) & F(y, z)",
        to: "F(x, z) & F(y, z)",
        expect: "k.elem",
        doc: "K's membership map degenerates into extensional equality of \
              F-values",
    },
    MutationSite {
        name: "iso.pi1_to_pi0",
        from: "pi1(z, y)",
        to: "pi0(z, y)",
        expect: "pi1.display",
        doc: "the projection graph returns first components, which breaks \
              injectivity across codes that share them",
    },
    MutationSite {
        name: "iso.g_swap_branches",
        from: "pi1K(x) = y) | (clN(x) & cl(y) & F(pi1K(x)) = y",
        to: "F(pi1K(x)) = y) | (clN(x) & cl(y) & pi1K(x) = y",
        expect: "g.display",
        doc: "the two branches of G swap their targets, sending object codes \
              to F-values and class codes to raw projections",
    },
];

struct Sources {
    l: String,
    k: String,
    pi1: String,
    g: String,
}

fn corpus_sources(site: Option<&MutationSite>) -> Result<Sources> {
    let mut texts = Sources {
        l: file("l.tr").expect("bundled file").to_string(),
        k: file("k.tr").expect("bundled file").to_string(),
        pi1: PI1_GRAPH.to_string(),
        g: G_GRAPH.to_string(),
    };
    if let Some(site) = site {
        let slots = [&mut texts.l, &mut texts.k, &mut texts.pi1, &mut texts.g];
        let hits: usize = slots.iter().map(|t| t.matches(site.from).count()).sum();
        if hits != 1 {
            return Err(Error::IllFormed(format!(
                "mutation site {} matches {} locations, expected exactly one",
                site.name, hits
            )));
        }
        for t in slots {
            *t = t.replace(site.from, site.to);
        }
    }
    Ok(texts)
}

// ---------------------------------------------------------------------------
// Truncated pairing hierarchy
// ---------------------------------------------------------------------------

/// A truncated tagged-set universe closed under Kuratowski pair coding of
/// its inner zone, with the structural data both demonstrations read off:
/// ranks, member lists, pair decodings, and the extensional classes.
struct Hierarchy {
    depth: usize,
    margin: usize,
    elems: Vec<HfElem>,
    /// Sorted member indexes per element.
    ext: Vec<Vec<u32>>,
    rank: Vec<usize>,
    /// Kuratowski decoding: `z = {{a},{a,b}}` (any tags) yields `(a, b)`.
    decode: Vec<Option<(u32, u32)>>,
    /// Rank at most `depth - margin`.
    zone: Vec<bool>,
    /// Distinct member sets, in lexicographic order of their index lists.
    class_ext: Vec<Vec<u32>>,
    /// Class index of each element's member set.
    fclass: Vec<u32>,
    /// Rank of each class as a set: 0 if empty, else max member rank + 1.
    class_rank: Vec<usize>,
}

/// Decode a Kuratowski pair: `z` codes `(x, y)` exactly when its member set
/// is `{u, v}` with `u = {x}` and `v = {x, y}` for some tags. The decoding
/// is unique when it exists.
fn kuratowski(e: &HfElem) -> Option<(&HfElem, &HfElem)> {
    let ms: Vec<&HfElem> = e.members.iter().collect();
    let orders: &[(usize, usize)] = match ms.len() {
        1 => &[(0, 0)],
        2 => &[(0, 1), (1, 0)],
        _ => return None,
    };
    let mut found: Option<(&HfElem, &HfElem)> = None;
    for &(ui, vi) in orders {
        let (u, v) = (ms[ui], ms[vi]);
        if u.members.len() != 1 {
            continue;
        }
        let x = u.members.iter().next().expect("singleton");
        if v.members.is_empty() || v.members.len() > 2 || !v.members.contains(x) {
            continue;
        }
        let y = v.members.iter().find(|m| *m != x).unwrap_or(x);
        match found {
            Some((fx, fy)) => debug_assert!(fx == x && fy == y, "ambiguous pair code"),
            None => found = Some((x, y)),
        }
    }
    found
}

fn hierarchy(depth: usize, width: usize, margin: usize) -> Result<Hierarchy> {
    if depth < margin + 2 {
        return Err(Error::Precondition(format!(
            "the appendix check needs depth >= margin + 2, got depth {depth}, margin {margin}"
        )));
    }
    let zone_elems = universe(depth - margin, Some(width))?;
    let budget = CARRIER_LIMIT as usize;
    let mut set: BTreeSet<HfElem> = zone_elems.iter().cloned().collect();
    for a in &zone_elems {
        for b in &zone_elems {
            for ut in 0..2u8 {
                let u = HfElem::new(ut, BTreeSet::from([a.clone()]));
                for vt in 0..2u8 {
                    let v = HfElem::new(vt, BTreeSet::from([a.clone(), b.clone()]));
                    for zt in 0..2u8 {
                        set.insert(HfElem::new(zt, BTreeSet::from([u.clone(), v.clone()])));
                    }
                    set.insert(v);
                }
                set.insert(u);
            }
        }
        if set.len() > budget {
            return Err(Error::Resource(format!(
                "pair-code closure exceeds {budget} elements at depth {depth}, margin {margin}"
            )));
        }
    }
    let elems: Vec<HfElem> = set.into_iter().collect();
    let mut index: HashMap<&HfElem, u32> = HashMap::with_capacity(elems.len());
    for (i, e) in elems.iter().enumerate() {
        index.insert(e, i as u32);
    }
    let mut ext = Vec::with_capacity(elems.len());
    let mut rank = Vec::with_capacity(elems.len());
    let mut decode = Vec::with_capacity(elems.len());
    let mut zone = Vec::with_capacity(elems.len());
    for e in &elems {
        let mut members = Vec::with_capacity(e.members.len());
        for m in &e.members {
            members.push(*index.get(m).ok_or_else(|| {
                Error::IllFormed("pair-code closure is not transitively closed".into())
            })?);
        }
        members.sort_unstable();
        ext.push(members);
        rank.push(e.rank());
        decode.push(kuratowski(e).map(|(a, b)| (index[a], index[b])));
        zone.push(e.rank() <= depth - margin);
    }
    let mut class_of: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    for m in &ext {
        let next = class_of.len() as u32;
        class_of.entry(m.clone()).or_insert(next);
    }
    // Re-index classes in lexicographic order of their member lists.
    let class_ext: Vec<Vec<u32>> = class_of.keys().cloned().collect();
    for (j, m) in class_ext.iter().enumerate() {
        class_of.insert(m.clone(), j as u32);
    }
    let fclass: Vec<u32> = ext.iter().map(|m| class_of[m]).collect();
    let class_rank: Vec<usize> = class_ext
        .iter()
        .map(|m| {
            m.iter()
                .map(|&i| rank[i as usize] + 1)
                .max()
                .unwrap_or(0)
        })
        .collect();
    Ok(Hierarchy {
        depth,
        margin,
        elems,
        ext,
        rank,
        decode,
        zone,
        class_ext,
        fclass,
        class_rank,
    })
}

impl Hierarchy {
    fn n(&self) -> usize {
        self.elems.len()
    }

    fn low_rank(&self) -> usize {
        self.depth - self.margin - 2
    }

    fn zone_indexes(&self) -> Vec<u32> {
        (0..self.n() as u32).filter(|&i| self.zone[i as usize]).collect()
    }

    /// Decodable zone elements (the candidate codes).
    fn zone_codes(&self) -> Vec<u32> {
        self.zone_indexes()
            .into_iter()
            .filter(|&i| self.decode[i as usize].is_some())
            .collect()
    }

    /// Codes whose first component is empty (the object codes of `M`).
    fn is_object_code(&self, i: u32) -> bool {
        self.zone[i as usize]
            && matches!(self.decode[i as usize], Some((a, _)) if self.ext[a as usize].is_empty())
    }

    fn object_codes(&self) -> Vec<u32> {
        (0..self.n() as u32).filter(|&i| self.is_object_code(i)).collect()
    }

    fn id(&self, i: u32) -> String {
        self.elems[i as usize].to_string()
    }

    fn class_id(&self, j: u32) -> String {
        let members: Vec<String> = self.class_ext[j as usize]
            .iter()
            .map(|&i| self.id(i))
            .collect();
        format!("{{{}}}", members.join(","))
    }
}

// ---------------------------------------------------------------------------
// Evaluation sides
// ---------------------------------------------------------------------------

struct Side {
    reg: Registry,
    opts: EvalOpts,
}

impl Side {
    fn eval(&self, plan: &Plan, args: &[u32]) -> bool {
        self.reg.eval_env(plan, &mut Vec::new(), args, &self.opts)
    }

    fn compile(&self, proto: &ProtoFormula) -> Result<Plan> {
        self.reg.compile_open(&proto.body, &proto.params)
    }
}

/// The membership side: carrier = the whole hierarchy, native membership,
/// the coding relations tabulated from the structural decoding, and the live
/// `L`-maps tabulated by evaluation so that they stay harvestable.
fn as_side(h: &Hierarchy, as_th: &Theory, l_tau: &Translation) -> Result<Side> {
    let n = h.n();
    let sig = &as_th.signature;
    let mac = &as_th.macros;
    let mut reg = Registry::new(DEFAULT_SORT, n);
    // Universal quantifiers range over ranks the compared displays can reach:
    // members of any projection value have rank at most depth - 2.
    let filter: Vec<bool> = h.rank.iter().map(|&r| r <= h.depth - 2).collect();
    let opts = EvalOpts { universal_filter: Some(filter) };

    let mut in_rows = Vec::new();
    for (b, members) in h.ext.iter().enumerate() {
        for &a in members {
            in_rows.push(vec![a, b as u32]);
        }
    }
    reg.register("in", &parse_proto(sig, mac, "[x, y] in(x, y)")?, in_rows)?;

    let mut pair_rows = Vec::new();
    let mut code_rows = Vec::new();
    let mut pi0_rows = Vec::new();
    let mut pi1_rows = Vec::new();
    for z in 0..n as u32 {
        if let Some((a, b)) = h.decode[z as usize] {
            pair_rows.push(vec![a, b, z]);
            code_rows.push(vec![z]);
            pi0_rows.push(vec![z, a]);
            pi1_rows.push(vec![z, b]);
        }
    }
    let proto = |name: &str| mac.get(name).expect("AS coding macro").clone();
    reg.register("pair", &proto("pair"), pair_rows)?;
    reg.register("Pair", &proto("Pair"), code_rows)?;
    reg.register("pi0", &proto("pi0"), pi0_rows)?;
    reg.register("pi1", &proto("pi1"), pi1_rows)?;
    let empty_rows: Vec<Vec<u32>> = (0..n as u32)
        .filter(|&i| h.ext[i as usize].is_empty())
        .map(|i| vec![i])
        .collect();
    let inhab_rows: Vec<Vec<u32>> = (0..n as u32)
        .filter(|&i| !h.ext[i as usize].is_empty())
        .map(|i| vec![i])
        .collect();
    reg.register("empty", &proto("empty"), empty_rows)?;
    reg.register("inhab", &proto("inhab"), inhab_rows)?;

    // Extensional agreement holds only between elements of equal rank, so
    // tabulating pairs whose (shared) rank is low covers every occurrence:
    // all approx arguments here are projection values of zone codes.
    let mut by_class: HashMap<u32, Vec<u32>> = HashMap::new();
    for i in 0..n as u32 {
        by_class.entry(h.fclass[i as usize]).or_default().push(i);
    }
    let mut approx_rows = Vec::new();
    for i in 0..n as u32 {
        if h.rank[i as usize] > h.low_rank() {
            continue;
        }
        for &j in &by_class[&h.fclass[i as usize]] {
            approx_rows.push(vec![i, j]);
        }
    }
    reg.register("approx", &proto("approx"), approx_rows)?;

    // The live discriminators and the F-map of L, tabulated by evaluating
    // their current bodies. Registering them keeps composite membership
    // harvestable: its witness search is indexed by the F-map rows.
    let mut seen_bodies = HashSet::new();
    for (key, name) in [("ob", "obL"), ("cl", "clL")] {
        let p = l_tau.predmap.get(key).expect("L maps the discriminators");
        if !seen_bodies.insert(p.body.canon_string(&p.params)) {
            continue; // a corruption aliased the two maps; one pattern serves both
        }
        let plan = reg.compile_open(&p.body, &p.params)?;
        let rows: Vec<Vec<u32>> = (0..n as u32)
            .filter(|&i| reg.eval_env(&plan, &mut Vec::new(), &[i], &opts))
            .map(|i| vec![i])
            .collect();
        reg.register(name, p, rows)?;
    }
    let fmap = l_tau.predmap.get("F").expect("L maps F");
    let plan = reg.compile_open(&fmap.body, &fmap.params)?;
    let mut f_rows = Vec::new();
    for a in h.zone_indexes() {
        for b in 0..n as u32 {
            if reg.eval_env(&plan, &mut Vec::new(), &[a, b], &opts) {
                f_rows.push(vec![a, b]);
            }
        }
    }
    reg.register("FL", fmap, f_rows)?;

    Ok(Side { reg, opts })
}

/// The object/class side: carrier = hierarchy elements (as objects) followed
/// by their extensional classes; native `ob`/`cl`/`in`/`F`, plus the
/// `K`-images of the coding relations tabulated structurally. Those images
/// are tabulated on object arguments only, which is sound here because every
/// occurrence applies them to projection witnesses.
fn acfb_side(h: &Hierarchy, acfb_th: &Theory, k_tau: &Translation) -> Result<Side> {
    let n = h.n();
    let c = h.class_ext.len();
    let as_th = theory("AS").expect("bundled theory");
    let mut reg = Registry::new(DEFAULT_SORT, n + c);
    let mut filter = vec![false; n + c];
    for i in 0..n {
        filter[i] = h.zone[i];
    }
    for j in 0..c {
        filter[n + j] = h.class_rank[j] <= h.depth - h.margin;
    }
    let opts = EvalOpts { universal_filter: Some(filter) };

    let sig = &acfb_th.signature;
    let mac = &acfb_th.macros;
    let ob_rows: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i]).collect();
    let cl_rows: Vec<Vec<u32>> = (0..c as u32).map(|j| vec![n as u32 + j]).collect();
    reg.register("ob", &parse_proto(sig, mac, "[x] ob(x)")?, ob_rows)?;
    reg.register("cl", &parse_proto(sig, mac, "[x] cl(x)")?, cl_rows)?;
    let mut in_rows = Vec::new();
    for (j, members) in h.class_ext.iter().enumerate() {
        for &a in members {
            in_rows.push(vec![a, (n + j) as u32]);
        }
    }
    reg.register("in", &parse_proto(sig, mac, "[x, y] in(x, y)")?, in_rows)?;
    let f_rows: Vec<Vec<u32>> = (0..n as u32)
        .map(|i| vec![i, n as u32 + h.fclass[i as usize]])
        .collect();
    reg.register("F", &parse_proto(sig, mac, "[x, y] F(x, y)")?, f_rows)?;

    let mut pair_rows = Vec::new();
    let mut code_rows = Vec::new();
    let mut pi0_rows = Vec::new();
    let mut pi1_rows = Vec::new();
    for z in 0..n as u32 {
        if let Some((a, b)) = h.decode[z as usize] {
            pair_rows.push(vec![a, b, z]);
            code_rows.push(vec![z]);
            pi0_rows.push(vec![z, a]);
            pi1_rows.push(vec![z, b]);
        }
    }
    let kproto = |name: &str| -> Result<ProtoFormula> {
        k_tau.apply_proto(as_th.macros.get(name).expect("AS coding macro"))
    };
    reg.register("pairK", &kproto("pair")?, pair_rows)?;
    reg.register("PairK", &kproto("Pair")?, code_rows)?;
    reg.register("pi0K", &kproto("pi0")?, pi0_rows)?;
    reg.register("pi1K", &kproto("pi1")?, pi1_rows)?;
    let empty_rows: Vec<Vec<u32>> = (0..n as u32)
        .filter(|&i| h.ext[i as usize].is_empty())
        .map(|i| vec![i])
        .collect();
    let inhab_rows: Vec<Vec<u32>> = (0..n as u32)
        .filter(|&i| !h.ext[i as usize].is_empty())
        .map(|i| vec![i])
        .collect();
    reg.register("emptyK", &kproto("empty")?, empty_rows)?;
    reg.register("inhabK", &kproto("inhab")?, inhab_rows)?;

    Ok(Side { reg, opts })
}

// ---------------------------------------------------------------------------
// Report items
// ---------------------------------------------------------------------------

fn equiv1(
    side: &Side,
    label: &str,
    grid: &[u32],
    left: &Plan,
    right: &Plan,
    id: &dyn Fn(u32) -> String,
) -> CheckItem {
    for &x in grid {
        let l = side.eval(left, &[x]);
        let r = side.eval(right, &[x]);
        if l != r {
            return CheckItem::fail(label, format!("x={} (left={l}, right={r})", id(x)));
        }
    }
    CheckItem::pass(label)
}

fn equiv2(
    side: &Side,
    label: &str,
    gx: &[u32],
    gy: &[u32],
    left: &Plan,
    right: &Plan,
    id: &dyn Fn(u32) -> String,
) -> CheckItem {
    for &x in gx {
        for &y in gy {
            let l = side.eval(left, &[x, y]);
            let r = side.eval(right, &[x, y]);
            if l != r {
                return CheckItem::fail(
                    label,
                    format!("x={}, y={} (left={l}, right={r})", id(x), id(y)),
                );
            }
        }
    }
    CheckItem::pass(label)
}

fn against1(
    side: &Side,
    label: &str,
    grid: &[u32],
    left: &Plan,
    right: &dyn Fn(u32) -> bool,
    id: &dyn Fn(u32) -> String,
) -> CheckItem {
    for &x in grid {
        let l = side.eval(left, &[x]);
        let r = right(x);
        if l != r {
            return CheckItem::fail(label, format!("x={} (left={l}, right={r})", id(x)));
        }
    }
    CheckItem::pass(label)
}

fn against2(
    side: &Side,
    label: &str,
    gx: &[u32],
    gy: &[u32],
    left: &Plan,
    right: &dyn Fn(u32, u32) -> bool,
    id: &dyn Fn(u32) -> String,
) -> CheckItem {
    for &x in gx {
        for &y in gy {
            let l = side.eval(left, &[x, y]);
            let r = right(x, y);
            if l != r {
                return CheckItem::fail(
                    label,
                    format!("x={}, y={} (left={l}, right={r})", id(x), id(y)),
                );
            }
        }
    }
    CheckItem::pass(label)
}

// ---------------------------------------------------------------------------
// Defined-isomorphism checks on margin-restricted zones
// ---------------------------------------------------------------------------

fn zone_signature(name: &str, preds: &[(&str, usize)]) -> Signature {
    Signature::new(
        name,
        vec![DEFAULT_SORT.to_string()],
        preds
            .iter()
            .map(|(p, k)| PredDecl {
                name: p.to_string(),
                profile: vec![DEFAULT_SORT.to_string(); *k],
            })
            .collect(),
    )
    .expect("zone signature is well-formed")
}

fn zone_translation(
    name: &str,
    source: &Signature,
    target: &Signature,
    delta: &str,
    preds: &[(&str, &str)],
    eq: &str,
) -> Result<Translation> {
    let none = MacroTable::default();
    let mut dims = BTreeMap::new();
    let mut domains = BTreeMap::new();
    let mut eqmap = BTreeMap::new();
    for s in &source.sorts {
        dims.insert(s.clone(), 1);
        domains.insert(s.clone(), parse_proto(target, &none, delta)?);
        eqmap.insert(s.clone(), parse_proto(target, &none, eq)?);
    }
    let mut predmap = BTreeMap::new();
    for (p, body) in preds {
        predmap.insert(p.to_string(), parse_proto(target, &none, body)?);
    }
    Translation::new(name, source.clone(), target.clone(), dims, domains, predmap, eqmap)
}

/// Every relation of the structure as a native registry relation.
fn registry_of(s: &FiniteStructure) -> Result<Registry> {
    let mut reg = Registry::new(DEFAULT_SORT, s.total_size());
    for pred in &s.signature.preds {
        let params: Vec<Var> = (0..pred.profile.len())
            .map(|i| Var::new(format!("x{i}"), DEFAULT_SORT))
            .collect();
        let proto = ProtoFormula::new(params.clone(), Formula::atom(&pred.name, params))?;
        let rows: Vec<Vec<u32>> = s.relations[&pred.name].iter().cloned().collect();
        reg.register(&pred.name, &proto, rows)?;
    }
    Ok(reg)
}

/// Check that `graph` defines an isomorphism from the from-interpretation to
/// the identity restricted to `low`, over the given zone structure. The
/// defined-isomorphism sentences are evaluated through the indexed registry
/// (every zone predicate is a stored relation), which keeps their four-variable
/// quantifier blocks tractable.
fn zone_iso_item(
    label: &str,
    source_th: &Theory,
    structure: FiniteStructure,
    from_tau: Translation,
    to_tau: Translation,
    graph: ProtoFormula,
) -> Result<CheckItem> {
    let zone_th = Theory::new(structure.signature.clone(), Vec::new())?;
    let from = Interpretation::new(
        format!("{label}.from"),
        source_th.clone(),
        from_tau,
        zone_th.clone(),
    )?;
    let to = Interpretation::new(format!("{label}.to"), source_th.clone(), to_tau, zone_th)?;
    let imap = IMap::new(label, from, to, graph)?;
    let reg = registry_of(&structure)?;
    for ob in iiso_obligations(&imap)? {
        let plan = reg.compile(&ob.sentence)?;
        if !reg.eval(&plan, &EvalOpts::default()) {
            return Ok(CheckItem::fail(label, ob.label));
        }
    }
    Ok(CheckItem::pass(label))
}

fn pi1_zone_item(h: &Hierarchy, as_th: &Theory, pi1_text: &str) -> Result<CheckItem> {
    let sig = zone_signature(
        "ASZ",
        &[
            ("in", 2),
            ("Pair", 1),
            ("empty", 1),
            ("pi0", 2),
            ("pi1", 2),
            ("eqM", 2),
            ("inM", 2),
            ("low", 1),
        ],
    );
    let mut carrier: Vec<u32> = h.zone_codes();
    for i in 0..h.n() as u32 {
        if h.rank[i as usize] <= h.low_rank() && !carrier.contains(&i) {
            carrier.push(i);
        }
    }
    carrier.sort_unstable();
    let mut s = FiniteStructure::new("pi1-zone", sig.clone());
    let mut at: HashMap<u32, u32> = HashMap::new();
    for &i in &carrier {
        at.insert(i, s.add_elem(DEFAULT_SORT, h.id(i))?);
    }
    let is_dm = |i: u32| h.is_object_code(i);
    let proj = |i: u32| h.decode[i as usize].expect("code");
    for &i in &carrier {
        if h.ext[i as usize].is_empty() {
            s.add_tuple("empty", vec![at[&i]])?;
        }
        if h.rank[i as usize] <= h.low_rank() {
            s.add_tuple("low", vec![at[&i]])?;
        }
        if let Some((a, b)) = h.decode[i as usize] {
            s.add_tuple("Pair", vec![at[&i]])?;
            s.add_tuple("pi0", vec![at[&i], at[&a]])?;
            s.add_tuple("pi1", vec![at[&i], at[&b]])?;
        }
        for &j in &carrier {
            if h.ext[j as usize].binary_search(&i).is_ok() {
                s.add_tuple("in", vec![at[&i], at[&j]])?;
            }
            if is_dm(i) && is_dm(j) {
                if proj(i).1 == proj(j).1 {
                    s.add_tuple("eqM", vec![at[&i], at[&j]])?;
                }
                if h.ext[proj(j).1 as usize].binary_search(&proj(i).1).is_ok() {
                    s.add_tuple("inM", vec![at[&i], at[&j]])?;
                }
            }
        }
    }
    let from = zone_translation(
        "Mzone",
        &as_th.signature,
        &sig,
        "[x] Pair(x) & empty(pi0(x))",
        &[("in", "[x, y] inM(x, y)")],
        "[x, y] eqM(x, y)",
    )?;
    let to = zone_translation(
        "idzone",
        &as_th.signature,
        &sig,
        "[x] low(x)",
        &[("in", "[x, y] in(x, y)")],
        "[x, y] x = y",
    )?;
    let graph = parse_proto(&sig, &MacroTable::default(), pi1_text)?;
    zone_iso_item("pi1.iso", as_th, s, from, to, graph)
}

fn g_zone_item(h: &Hierarchy, acfb_th: &Theory, g_text: &str) -> Result<CheckItem> {
    let sig = zone_signature(
        "ACFZ",
        &[
            ("ob", 1),
            ("cl", 1),
            ("in", 2),
            ("F", 2),
            ("deltaN", 1),
            ("obN", 1),
            ("clN", 1),
            ("eqN", 2),
            ("inN", 2),
            ("fregeN", 2),
            ("pi1K", 2),
            ("low", 1),
        ],
    );
    let n = h.n() as u32;
    let mut objects: Vec<u32> = h.zone_codes();
    for i in 0..n {
        if h.rank[i as usize] <= h.low_rank() && !objects.contains(&i) {
            objects.push(i);
        }
    }
    objects.sort_unstable();
    // A class is reachable from the code zone only when its witness code
    // ⟨t, {…nonempty first component…}⟩ fits under the zone rank: that code
    // climbs max(1, class rank) + 2 ranks, so classes join the restricted
    // identity domain only when the low cutoff admits rank-1 components.
    let classes: Vec<u32> = if h.low_rank() >= 1 {
        (0..h.class_ext.len() as u32)
            .filter(|&j| h.class_rank[j as usize] <= h.low_rank())
            .collect()
    } else {
        Vec::new()
    };
    let mut s = FiniteStructure::new("g-zone", sig.clone());
    let mut at: HashMap<u32, u32> = HashMap::new();
    for &i in &objects {
        at.insert(i, s.add_elem(DEFAULT_SORT, h.id(i))?);
    }
    let mut class_at: HashMap<u32, u32> = HashMap::new();
    for &j in &classes {
        class_at.insert(j, s.add_elem(DEFAULT_SORT, h.class_id(j))?);
    }
    let is_dn = |i: u32| h.zone[i as usize] && h.decode[i as usize].is_some();
    let is_obn = |i: u32| h.is_object_code(i);
    let is_cln = |i: u32| is_dn(i) && !is_obn(i);
    let proj1 = |i: u32| h.decode[i as usize].expect("code").1;
    for &i in &objects {
        s.add_tuple("ob", vec![at[&i]])?;
        if h.rank[i as usize] <= h.low_rank() {
            s.add_tuple("low", vec![at[&i]])?;
        }
        if is_dn(i) {
            s.add_tuple("deltaN", vec![at[&i]])?;
            s.add_tuple("pi1K", vec![at[&i], at[&proj1(i)]])?;
            if is_obn(i) {
                s.add_tuple("obN", vec![at[&i]])?;
            } else {
                s.add_tuple("clN", vec![at[&i]])?;
            }
        }
        if let Some(&jc) = class_at.get(&h.fclass[i as usize]) {
            s.add_tuple("F", vec![at[&i], jc])?;
        }
        for &j in &objects {
            if !(is_dn(i) && is_dn(j)) {
                continue;
            }
            let (pi, pj) = (proj1(i), proj1(j));
            let same_ext = h.fclass[pi as usize] == h.fclass[pj as usize];
            if (is_obn(i) && is_obn(j) && pi == pj) || (is_cln(i) && is_cln(j) && same_ext) {
                s.add_tuple("eqN", vec![at[&i], at[&j]])?;
            }
            if is_obn(i) && is_cln(j) {
                if h.ext[pj as usize].binary_search(&pi).is_ok() {
                    s.add_tuple("inN", vec![at[&i], at[&j]])?;
                }
                if same_ext {
                    s.add_tuple("fregeN", vec![at[&i], at[&j]])?;
                }
            }
        }
    }
    for &j in &classes {
        s.add_tuple("cl", vec![class_at[&j]])?;
        s.add_tuple("low", vec![class_at[&j]])?;
        for &a in &h.class_ext[j as usize] {
            if let Some(&ia) = at.get(&a) {
                s.add_tuple("in", vec![ia, class_at[&j]])?;
            }
        }
    }
    let from = zone_translation(
        "Nzone",
        &acfb_th.signature,
        &sig,
        "[x] deltaN(x)",
        &[
            ("ob", "[x] obN(x)"),
            ("cl", "[x] clN(x)"),
            ("in", "[x, y] inN(x, y)"),
            ("F", "[x, y] fregeN(x, y)"),
        ],
        "[x, y] eqN(x, y)",
    )?;
    let to = zone_translation(
        "idzone",
        &acfb_th.signature,
        &sig,
        "[x] low(x)",
        &[
            ("ob", "[x] ob(x)"),
            ("cl", "[x] cl(x)"),
            ("in", "[x, y] in(x, y)"),
            ("F", "[x, y] F(x, y)"),
        ],
        "[x, y] x = y",
    )?;
    let graph = parse_proto(&sig, &MacroTable::default(), g_text)?;
    zone_iso_item("g.iso", acfb_th, s, from, to, graph)
}

// ---------------------------------------------------------------------------
// The appendix check
// ---------------------------------------------------------------------------

fn push_timed(report: &mut RunReport, item: impl FnOnce() -> Result<CheckItem>) -> Result<()> {
    let t = std::time::Instant::now();
    let item = item()?;
    report.push(item.timed(t.elapsed()));
    Ok(())
}

fn run_check(h: &Hierarchy, texts: &Sources, title: String) -> Result<RunReport> {
    let as_th = theory("AS").expect("bundled theory");
    let acfb_th = theory("ACFb").expect("bundled theory");
    let l_tau = parse_corpus_translation(&texts.l)?;
    let k_tau = parse_corpus_translation(&texts.k)?;
    let m_tau = k_tau.compose(&l_tau)?;
    let n_tau = l_tau.compose(&k_tau)?;

    let mut report = RunReport::new(title);
    let n = h.n() as u32;

    // -- membership side -----------------------------------------------------
    let aside = as_side(h, &as_th, &l_tau)?;
    let amac = &as_th.macros;
    let asig = &as_th.signature;
    let display = |text: &str| -> Result<Plan> {
        aside.compile(&parse_proto(asig, amac, text)?)
    };
    let zone = h.zone_indexes();
    let codes = h.object_codes();
    let aid = |i: u32| h.id(i);

    let left = aside.compile(m_tau.domain(DEFAULT_SORT))?;
    let right = display("[x] Pair(x) & empty(pi0(x))")?;
    push_timed(&mut report, || Ok(equiv1(&aside, "m.delta", &zone, &left, &right, &aid)))?;

    let left = aside.compile(m_tau.eqmap.get(DEFAULT_SORT).expect("eq map"))?;
    let right = display("[x, y] pi1(x) = pi1(y)")?;
    push_timed(&mut report, || Ok(equiv2(&aside, "m.eq", &codes, &codes, &left, &right, &aid)))?;

    let left = aside.compile(m_tau.predmap.get("in").expect("membership map"))?;
    let right = display("[x, y] in(pi1(x), pi1(y))")?;
    push_timed(&mut report, || Ok(equiv2(&aside, "m.elem", &codes, &codes, &left, &right, &aid)))?;

    let graph_plan = aside.compile(&parse_proto(asig, amac, &texts.pi1)?)?;
    let pi1_edge = |x: u32, y: u32| {
        h.is_object_code(x) && h.decode[x as usize].expect("code").1 == y
    };
    push_timed(&mut report, || Ok(against2(&aside, "pi1.display", &zone, &zone, &graph_plan, &pi1_edge, &aid)))?;

    push_timed(&mut report, || pi1_zone_item(h, &as_th, &texts.pi1))?;

    // -- object/class side ---------------------------------------------------
    let bside = acfb_side(h, &acfb_th, &k_tau)?;
    let kmac = k_code_macros(&k_tau)?;
    let bsig = &acfb_th.signature;
    let kdisplay = |text: &str| -> Result<Plan> {
        bside.compile(&parse_proto(bsig, &kmac, text)?)
    };
    let mut small: Vec<u32> = zone.clone();
    for j in 0..h.class_ext.len() as u32 {
        if h.class_rank[j as usize] <= h.depth - h.margin {
            small.push(n + j);
        }
    }
    let bid = |i: u32| {
        if i < n {
            h.id(i)
        } else {
            h.class_id(i - n)
        }
    };

    let left = bside.compile(k_tau.domain(DEFAULT_SORT))?;
    let is_obj = |x: u32| x < n;
    push_timed(&mut report, || Ok(against1(&bside, "k.delta", &small, &left, &is_obj, &bid)))?;

    let left = bside.compile(k_tau.eqmap.get(DEFAULT_SORT).expect("eq map"))?;
    let keq = |x: u32, y: u32| x < n && y < n && x == y;
    push_timed(&mut report, || Ok(against2(&bside, "k.eq", &small, &small, &left, &keq, &bid)))?;

    let left = bside.compile(k_tau.predmap.get("in").expect("membership map"))?;
    let kin = |x: u32, y: u32| {
        x < n && y < n && h.ext[y as usize].binary_search(&x).is_ok()
    };
    push_timed(&mut report, || Ok(against2(&bside, "k.elem", &small, &small, &left, &kin, &bid)))?;

    let left = bside.compile(n_tau.domain(DEFAULT_SORT))?;
    let right = kdisplay("[x] ob(x) & PairK(x)")?;
    push_timed(&mut report, || Ok(equiv1(&bside, "n.delta", &small, &left, &right, &bid)))?;

    let left = bside.compile(n_tau.predmap.get("ob").expect("ob map"))?;
    let right = kdisplay("[x] emptyK(pi0K(x))")?;
    push_timed(&mut report, || Ok(equiv1(&bside, "n.ob", &small, &left, &right, &bid)))?;

    let left = bside.compile(n_tau.predmap.get("cl").expect("cl map"))?;
    let right = kdisplay("[x] inhabK(pi0K(x))")?;
    push_timed(&mut report, || Ok(equiv1(&bside, "n.cl", &small, &left, &right, &bid)))?;

    let left = bside.compile(n_tau.eqmap.get(DEFAULT_SORT).expect("eq map"))?;
    let right = kdisplay(
        "[x, y] (obN(x) & obN(y) & pi1K(x) = pi1K(y)) \
         | (clN(x) & clN(y) & F(pi1K(x)) = F(pi1K(y)))",
    )?;
    push_timed(&mut report, || Ok(equiv2(&bside, "n.eq", &small, &small, &left, &right, &bid)))?;

    let left = bside.compile(n_tau.predmap.get("in").expect("membership map"))?;
    let right = kdisplay("[x, y] obN(x) & clN(y) & inK(pi1K(x), pi1K(y))")?;
    push_timed(&mut report, || Ok(equiv2(&bside, "n.elem", &small, &small, &left, &right, &bid)))?;

    let left = bside.compile(n_tau.predmap.get("F").expect("F map"))?;
    let right = kdisplay("[x, y] obN(x) & clN(y) & F(pi1K(x)) = F(pi1K(y))")?;
    push_timed(&mut report, || Ok(equiv2(&bside, "n.frege", &small, &small, &left, &right, &bid)))?;

    let left = kdisplay("[u, v] approxK(u, v)")?;
    let right = kdisplay("[u, v] F(u) = F(v)")?;
    push_timed(&mut report, || Ok(equiv2(&bside, "frege_classes", &zone, &zone, &left, &right, &bid)))?;

    let graph_plan = bside.compile(&parse_proto(bsig, &kmac, &texts.g)?)?;
    let g_edge = |x: u32, y: u32| {
        if x >= n || !h.zone[x as usize] {
            return false;
        }
        match h.decode[x as usize] {
            Some((a, b)) => {
                if h.ext[a as usize].is_empty() {
                    y == b
                } else {
                    y == n + h.fclass[b as usize]
                }
            }
            None => false,
        }
    };
    push_timed(&mut report, || Ok(against2(&bside, "g.display", &small, &small, &graph_plan, &g_edge, &bid)))?;

    push_timed(&mut report, || g_zone_item(h, &acfb_th, &texts.g))?;

    Ok(report)
}

/// Verify the composite translations `M = K;L` and `N = L;K` against their
/// closed-form displays, and the graphs `pi1` and `G` against margin-restricted
/// identity interpretations, over the truncated pairing hierarchy of the given
/// depth and width. Displays are compared on all elements of rank at most
/// `depth - margin`; the margin leaves room for the pair codes the composite
/// maps quantify over.
pub fn appendixc_check(depth: usize, width: usize, margin: usize) -> Result<RunReport> {
    let h = hierarchy(depth, width, margin)?;
    let texts = corpus_sources(None)?;
    run_check(
        &h,
        &texts,
        format!("appendix-c depth={depth} width={width} margin={margin}"),
    )
}

/// Run [`appendixc_check`] with one documented corruption applied.
pub fn appendixc_check_mutated(
    depth: usize,
    width: usize,
    margin: usize,
    site: &str,
) -> Result<RunReport> {
    let site = MUTATION_SITES
        .iter()
        .find(|s| s.name == site)
        .ok_or_else(|| Error::Unknown(format!("mutation site {site}")))?;
    let h = hierarchy(depth, width, margin)?;
    let texts = corpus_sources(Some(site))?;
    run_check(
        &h,
        &texts,
        format!("appendix-c depth={depth} width={width} margin={margin} [corrupted: {}]", site.name),
    )
}

/// Run the baseline check once, then every documented corruption, sharing the
/// hierarchy. Returns `(site name, report)` pairs; the baseline is keyed "".
pub fn appendixc_mutation_sweep(
    depth: usize,
    width: usize,
    margin: usize,
) -> Result<Vec<(&'static str, RunReport)>> {
    let h = hierarchy(depth, width, margin)?;
    let mut out = Vec::new();
    let texts = corpus_sources(None)?;
    out.push((
        "",
        run_check(&h, &texts, format!("appendix-c depth={depth} width={width} margin={margin}"))?,
    ));
    for site in MUTATION_SITES {
        let texts = corpus_sources(Some(site))?;
        out.push((
            site.name,
            run_check(
                &h,
                &texts,
                format!(
                    "appendix-c depth={depth} width={width} margin={margin} [corrupted: {}]",
                    site.name
                ),
            )?,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Countermodel demonstration
// ---------------------------------------------------------------------------

/// Result of [`countermodel_demo`]: the verdict report, the identities of the
/// fixed points of the swap involution, and the number of unordered orbit
/// classes `{p, sigma(p)}` among the top-rank elements.
pub struct CountermodelDemo {
    pub report: RunReport,
    pub fixed: Vec<String>,
    pub top_pair_classes: usize,
}

/// Build the truncated tagged-set structure, the swap involution fixing the
/// transitive closure of the seed `x0`, and report: that the map has order
/// two, that it is an automorphism of the membership structure, and that the
/// seed is fixed. Also counts the orbit classes at top rank.
pub fn countermodel_demo(depth: usize, width: usize, x0: &[&str]) -> Result<CountermodelDemo> {
    let cm = countermodel_universe(depth, Some(width))?;
    let mut seeds = Vec::new();
    for id in x0 {
        let e = parse_hf(id)?;
        if !cm.elems.contains(&e) {
            return Err(Error::Precondition(format!(
                "{id} is outside the depth-{depth} width-{width} universe"
            )));
        }
        seeds.push(e);
    }
    let sigma = build_involution(&seeds, &cm)?;
    let mut report = RunReport::new(format!("countermodel depth={depth} width={width}"));
    report.push(CheckItem::from_result(
        "sigma.involution",
        if sigma.is_order_two() {
            None
        } else {
            Some("sigma composed with itself is not the identity".into())
        },
    ));
    report.push(CheckItem::from_result(
        "sigma.automorphism",
        check_automorphism(&sigma.perm, &cm.structure)?,
    ));
    let mut unfixed = None;
    for e in &seeds {
        let i = cm.elems.iter().position(|x| x == e).expect("seed is in the carrier") as u32;
        if sigma.perm[i as usize] != i {
            unfixed = Some(e.to_string());
            break;
        }
    }
    report.push(CheckItem::from_result("x0.fixed", unfixed));
    let fixed: Vec<String> = sigma
        .fixed_points()
        .into_iter()
        .map(|i| cm.elems[i as usize].to_string())
        .collect();
    let mut reps = BTreeSet::new();
    for (i, e) in cm.elems.iter().enumerate() {
        if e.rank() == depth {
            let j = sigma.perm[i] as usize;
            reps.insert(i.min(j));
        }
    }
    Ok(CountermodelDemo { report, fixed, top_pair_classes: reps.len() })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theories_parse_with_expected_shape() {
        let counts = [("EQ", 0), ("AS", 2), ("ac", 3), ("SBth", 21), ("ACFb", 10)];
        for (name, axioms) in counts {
            let th = theory(name).expect("bundled theory");
            assert_eq!(th.axioms.len(), axioms, "axiom count of {name}");
            assert_eq!(th.signature.name, name);
        }
        assert_eq!(theory("ac").unwrap().signature.sorts, vec!["o", "c"]);
        assert_eq!(theory("ACFb").unwrap().signature.sorts, vec![DEFAULT_SORT]);
        assert!(theory("ACL").is_some());
        assert!(theory("ACLe").is_some());
        assert!(theory("nope").is_none());
    }

    #[test]
    fn translations_parse_and_classify() {
        let k = translation("K").expect("bundled translation");
        let l = translation("L").expect("bundled translation");
        assert!(k.classify().identity_preserving, "K preserves equality");
        assert!(!l.classify().identity_preserving, "L redefines equality");
        assert!(!k.classify().unrelativized);
        let m = translation("M").expect("composite");
        assert_eq!(m.source.name, "AS");
        assert_eq!(m.target.name, "AS");
        let nt = translation("N").expect("composite");
        assert_eq!(nt.source.name, "ACFb");
        assert_eq!(nt.target.name, "ACFb");
    }

    #[test]
    fn interpretations_and_isos_build() {
        for name in INTERPRETATION_NAMES {
            assert!(interpretation(name).is_some(), "interpretation {name}");
        }
        assert!(iso("pi1").is_some());
        assert!(iso("G").is_some());
        let pair = as_acfb_pair();
        assert!(!pair.obligations().expect("obligations").is_empty());
    }

    #[test]
    fn hierarchy_is_closed_and_decodes_pairs() {
        let h = hierarchy(4, 2, 2).expect("hierarchy");
        assert_eq!(h.zone_indexes().len(), 74);
        // transitive closure: every member list resolved (constructor checks),
        // and decoding inverts coding on a sample of zone pairs
        let idx = |e: &HfElem| h.elems.iter().position(|x| x == e).unwrap() as u32;
        for a in h.elems.iter().filter(|e| h.zone[idx(e) as usize]).take(5) {
            for b in h.elems.iter().filter(|e| h.zone[idx(e) as usize]).take(5) {
                let u = HfElem::new(0, BTreeSet::from([a.clone()]));
                let v = HfElem::new(1, BTreeSet::from([a.clone(), b.clone()]));
                let z = HfElem::new(0, BTreeSet::from([u, v]));
                let zi = idx(&z);
                assert_eq!(h.decode[zi as usize], Some((idx(a), idx(b))));
            }
        }
        // object codes of the default zone: pair codes over the two empty
        // sets — 6 diagonal codes per component choice, 8 per ordered
        // off-diagonal pair (tag collapse makes the diagonal thinner)
        assert_eq!(h.object_codes().len(), 28);
    }

    #[test]
    fn appendixc_baseline_passes() {
        let report = appendixc_check(4, 2, 2).expect("check runs");
        let labels: Vec<&str> = report.items.iter().map(|i| i.label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "m.delta",
                "m.eq",
                "m.elem",
                "pi1.display",
                "pi1.iso",
                "k.delta",
                "k.eq",
                "k.elem",
                "n.delta",
                "n.ob",
                "n.cl",
                "n.eq",
                "n.elem",
                "n.frege",
                "frege_classes",
                "g.display",
                "g.iso",
            ]
        );
        assert!(report.passed(), "baseline failures:\n{}", report.render());
    }

    #[test]
    fn appendixc_rejects_degenerate_margin() {
        assert!(matches!(appendixc_check(2, 2, 2), Err(Error::Precondition(_))));
        assert!(matches!(appendixc_check(3, 2, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn appendixc_detects_a_corruption() {
        let report = appendixc_check_mutated(4, 2, 2, "k.delta.ob_to_cl").expect("check runs");
        assert!(!report.passed());
        assert!(report
            .items
            .iter()
            .any(|i| i.label == "k.delta" && !i.pass));
    }

    #[test]
    fn countermodel_demo_counts_fixed_points() {
        let none = countermodel_demo(2, 2, &[]).expect("demo runs");
        assert!(none.report.passed(), "{}", none.report.render());
        assert!(none.fixed.is_empty());
        assert_eq!(none.top_pair_classes, 33);

        let seeded = countermodel_demo(2, 2, &["0{}"]).expect("demo runs");
        assert!(seeded.report.passed(), "{}", seeded.report.render());
        assert_eq!(seeded.fixed, vec!["0{}", "1{}"]);
        assert_eq!(seeded.top_pair_classes, 33);

        assert!(matches!(
            countermodel_demo(2, 2, &["0{0{0{0{}}}}"]),
            Err(Error::Precondition(_))
        ));
    }
}
