//! Truncated hereditarily-finite universes with tagged elements, and the
//! order-2 automorphisms used to separate theories that look alike.
//!
//! An element is a pair ⟨i, X⟩ of a tag i ∈ {0, 1} and a finite set X of
//! elements. The universe of depth d and width w holds every element of rank
//! ≤ d whose member-sets hereditarily have size ≤ w. Membership ⟨i, X⟩ ∈★
//! ⟨j, Y⟩ holds iff ⟨i, X⟩ ∈ Y; the tag of the container is ignored, so each
//! set of members is represented twice, once per tag.

use super::FiniteStructure;
use crate::syntax::{PredDecl, Signature, DEFAULT_SORT};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Hard cap on carrier sizes produced by `universe`.
pub const CARRIER_LIMIT: u128 = 1_000_000;

/// A tagged hereditarily finite set ⟨tag, members⟩.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfElem {
    pub tag: u8,
    pub members: BTreeSet<HfElem>,
}

impl HfElem {
    pub fn new(tag: u8, members: BTreeSet<HfElem>) -> Self {
        assert!(tag <= 1, "tag must be 0 or 1");
        HfElem { tag, members }
    }

    pub fn empty(tag: u8) -> Self {
        HfElem::new(tag, BTreeSet::new())
    }

    /// Rank: 0 for ⟨i, ∅⟩, else 1 + max member rank.
    pub fn rank(&self) -> usize {
        self.members.iter().map(|m| m.rank() + 1).max().unwrap_or(0)
    }

    /// The other-tagged element with the same members.
    pub fn partner(&self) -> Self {
        HfElem::new(1 - self.tag, self.members.clone())
    }
}

impl fmt::Display for HfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.tag)?;
        for (k, m) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m)?;
        }
        write!(f, "}}")
    }
}

/// Parse the canonical serialization `TAG{member,member,…}`.
pub fn parse_hf(text: &str) -> Result<HfElem> {
    let bytes = text.trim().as_bytes();
    let (e, used) = parse_hf_at(bytes, 0)?;
    if used != bytes.len() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("trailing input after element: {}", text),
        });
    }
    Ok(e)
}

fn parse_hf_at(bytes: &[u8], at: usize) -> Result<(HfElem, usize)> {
    let bad = |msg: &str| Error::Parse {
        line: 0,
        msg: format!("invalid element serialization: {}", msg),
    };
    let tag = match bytes.get(at) {
        Some(b'0') => 0u8,
        Some(b'1') => 1u8,
        _ => return Err(bad("expected tag 0 or 1")),
    };
    if bytes.get(at + 1) != Some(&b'{') {
        return Err(bad("expected '{' after tag"));
    }
    let mut pos = at + 2;
    let mut members = BTreeSet::new();
    loop {
        match bytes.get(pos) {
            Some(b'}') => return Ok((HfElem::new(tag, members), pos + 1)),
            None => return Err(bad("unterminated '{'")),
            Some(b',') if !members.is_empty() => pos += 1,
            _ => {}
        }
        let (m, next) = parse_hf_at(bytes, pos)?;
        members.insert(m);
        pos = next;
    }
}

fn binom(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.checked_mul(n.checked_sub(j)?)?;
        acc /= j + 1;
    }
    Some(acc)
}

/// Predicted cumulative carrier size at each depth, or None on overflow.
fn predicted_count(depth: usize, width: Option<usize>) -> Option<u128> {
    let mut n: u128 = 0;
    for _ in 0..=depth {
        let next = match width {
            Some(w) => {
                let mut sum: u128 = 0;
                for j in 0..=(w as u128).min(n) {
                    sum = sum.checked_add(binom(n, j)?)?;
                }
                sum
            }
            None => 1u128.checked_shl(u32::try_from(n).ok()?)?,
        };
        n = next.checked_mul(2)?;
        if n > CARRIER_LIMIT {
            return Some(n);
        }
    }
    Some(n)
}

/// All subsets of `items` of size ≤ `width` (None = no bound).
fn bounded_subsets(items: &[HfElem], width: Option<usize>) -> Vec<BTreeSet<HfElem>> {
    let w = width.unwrap_or(items.len()).min(items.len());
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..w {
        let mut next = Vec::new();
        for combo in &frontier {
            let start = combo.last().map(|i| i + 1).unwrap_or(0);
            for i in start..items.len() {
                let mut c = combo.clone();
                c.push(i);
                next.push(c);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter()
        .map(|combo| combo.into_iter().map(|i| items[i].clone()).collect())
        .collect()
}

/// The cumulative universe of elements of rank ≤ `depth`, member-sets of
/// hereditary size ≤ `width`, in canonical order.
pub fn universe(depth: usize, width: Option<usize>) -> Result<Vec<HfElem>> {
    if width.is_none() && depth >= 3 {
        return Err(Error::Precondition(
            "a width bound is required for depth >= 3".into(),
        ));
    }
    match predicted_count(depth, width) {
        Some(n) if n <= CARRIER_LIMIT => {}
        Some(n) => {
            return Err(Error::Resource(format!(
                "universe(depth={}, width={:?}) would have {} elements (limit {})",
                depth, width, n, CARRIER_LIMIT
            )))
        }
        None => {
            return Err(Error::Resource(format!(
                "universe(depth={}, width={:?}) overflows the size counter",
                depth, width
            )))
        }
    }
    let mut elems: BTreeSet<HfElem> = BTreeSet::new();
    elems.insert(HfElem::empty(0));
    elems.insert(HfElem::empty(1));
    for _ in 0..depth {
        let current: Vec<HfElem> = elems.iter().cloned().collect();
        for members in bounded_subsets(&current, width) {
            elems.insert(HfElem::new(0, members.clone()));
            elems.insert(HfElem::new(1, members));
        }
    }
    Ok(elems.into_iter().collect())
}

/// Signature with a single binary membership relation over the default sort.
pub fn membership_signature() -> Signature {
    Signature::new(
        "AS",
        vec![DEFAULT_SORT.to_string()],
        vec![PredDecl {
            name: "in".into(),
            profile: vec![DEFAULT_SORT.into(), DEFAULT_SORT.into()],
        }],
    )
    .expect("fixed signature is valid")
}

/// A truncated universe packaged as a finite structure, keeping the elements
/// aligned with the carrier order.
pub struct Countermodel {
    pub structure: FiniteStructure,
    pub elems: Vec<HfElem>,
}

/// Build the membership structure of the depth/width universe. Carrier ids
/// are the canonical serializations; `in` holds the ∈★ pairs.
pub fn countermodel_universe(depth: usize, width: Option<usize>) -> Result<Countermodel> {
    let elems = universe(depth, width)?;
    let mut s = FiniteStructure::new(
        format!("universe_d{}_w{}", depth, width.map_or("all".into(), |w| w.to_string())),
        membership_signature(),
    );
    for e in &elems {
        s.add_elem(DEFAULT_SORT, e.to_string())?;
    }
    let index: HashMap<&HfElem, u32> = elems
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i as u32))
        .collect();
    for (j, container) in elems.iter().enumerate() {
        for m in &container.members {
            let i = *index
                .get(m)
                .ok_or_else(|| Error::IllFormed(format!("member {} escapes the carrier", m)))?;
            s.add_tuple("in", vec![i, j as u32])?;
        }
    }
    Ok(Countermodel {
        structure: s,
        elems,
    })
}

/// The least transitive superset of `seed`: the seed elements together with
/// all hereditary members.
pub fn transitive_closure(seed: &[HfElem]) -> BTreeSet<HfElem> {
    let mut out: BTreeSet<HfElem> = BTreeSet::new();
    let mut stack: Vec<HfElem> = seed.to_vec();
    while let Some(e) = stack.pop() {
        if out.insert(e.clone()) {
            stack.extend(e.members.iter().cloned());
        }
    }
    out
}

/// A permutation of a countermodel carrier, indexed like its carrier.
pub struct Involution {
    pub perm: Vec<u32>,
}

impl Involution {
    pub fn is_order_two(&self) -> bool {
        self.perm
            .iter()
            .enumerate()
            .all(|(i, &j)| (j as usize) < self.perm.len() && self.perm[j as usize] == i as u32)
    }

    pub fn fixed_points(&self) -> Vec<u32> {
        self.perm
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i as u32 == j)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// Build the order-2 map that fixes the transitive closure T of `x0` (and
/// the tag-partners of T) and flips the tag everywhere else:
/// σ⟨i, X⟩ = ⟨i, σ[X]⟩ when some tagging of X lies in T, else ⟨1−i, σ[X]⟩.
pub fn build_involution(x0: &[HfElem], cm: &Countermodel) -> Result<Involution> {
    let index: HashMap<&HfElem, u32> = cm
        .elems
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i as u32))
        .collect();
    for e in x0 {
        if !index.contains_key(e) {
            return Err(Error::Precondition(format!(
                "fixed element {} is not in the carrier",
                e
            )));
        }
    }
    let t = transitive_closure(x0);
    let mut memo: HashMap<HfElem, HfElem> = HashMap::new();
    let mut perm = Vec::with_capacity(cm.elems.len());
    for e in &cm.elems {
        let img = sigma(e, &t, &mut memo);
        let j = *index.get(&img).ok_or_else(|| {
            Error::IllFormed(format!("involution image {} escapes the carrier", img))
        })?;
        perm.push(j);
    }
    Ok(Involution { perm })
}

fn sigma(e: &HfElem, t: &BTreeSet<HfElem>, memo: &mut HashMap<HfElem, HfElem>) -> HfElem {
    if let Some(img) = memo.get(e) {
        return img.clone();
    }
    let members: BTreeSet<HfElem> = e.members.iter().map(|m| sigma(m, t, memo)).collect();
    let keep = t.contains(&HfElem::new(0, e.members.clone()))
        || t.contains(&HfElem::new(1, e.members.clone()));
    let tag = if keep { e.tag } else { 1 - e.tag };
    let img = HfElem::new(tag, members);
    memo.insert(e.clone(), img.clone());
    img
}

/// Check that `perm` is a relation-preserving bijection of the (one-sorted)
/// structure `s`, in both directions. Returns a counterexample description
/// when it is not.
pub fn check_automorphism(perm: &[u32], s: &FiniteStructure) -> Result<Option<String>> {
    if s.signature.sorts.len() != 1 {
        return Err(Error::Precondition(
            "automorphism check requires a one-sorted structure".into(),
        ));
    }
    let sort = &s.signature.sorts[0];
    let n = s.size(sort);
    if perm.len() != n {
        return Err(Error::Precondition(format!(
            "permutation has length {}, carrier has {}",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        let j = j as usize;
        if j >= n || seen[j] {
            return Ok(Some(format!("not a bijection: image index {} repeats or overflows", j)));
        }
        seen[j] = true;
    }
    let mut inverse = vec![0u32; n];
    for (i, &j) in perm.iter().enumerate() {
        inverse[j as usize] = i as u32;
    }
    for (name, rel) in &s.relations {
        for tuple in rel {
            for (label, map) in [("forward", perm), ("backward", &inverse[..])] {
                let image: Vec<u32> = tuple.iter().map(|&i| map[i as usize]).collect();
                if !rel.contains(&image) {
                    let ids: Vec<&str> = tuple.iter().map(|&i| s.elem_id(sort, i)).collect();
                    return Ok(Some(format!(
                        "{} image of {}({}) is missing",
                        label,
                        name,
                        ids.join(",")
                    )));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_counts_match_the_counting_recurrence() {
        assert_eq!(universe(0, Some(2)).unwrap().len(), 2);
        assert_eq!(universe(1, Some(2)).unwrap().len(), 8);
        assert_eq!(universe(2, Some(2)).unwrap().len(), 74);
        assert_eq!(universe(3, Some(2)).unwrap().len(), 5552);
        // Unbounded width is fine at low depth: 2, 8, 512.
        assert_eq!(universe(2, None).unwrap().len(), 512);
    }

    #[test]
    fn oversized_universes_are_rejected() {
        match universe(4, Some(2)) {
            Err(Error::Resource(msg)) => assert!(msg.contains("30830258"), "{}", msg),
            other => panic!("expected resource error, got {:?}", other.map(|v| v.len())),
        }
        assert!(matches!(universe(3, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn serialization_roundtrips_canonically() {
        let zero = HfElem::empty(0);
        let one = HfElem::empty(1);
        assert_eq!(zero.to_string(), "0{}");
        let pair = HfElem::new(1, [zero.clone(), one.clone()].into_iter().collect());
        assert_eq!(pair.to_string(), "1{0{},1{}}");
        for e in universe(2, Some(2)).unwrap() {
            assert_eq!(parse_hf(&e.to_string()).unwrap(), e);
        }
        assert!(parse_hf("2{}").is_err());
        assert!(parse_hf("0{0{}").is_err());
    }

    #[test]
    fn membership_structure_has_the_right_degree_profile() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        assert_eq!(cm.structure.size(DEFAULT_SORT), 8);
        // Each member-set is shared by the two tags of its container, and
        // there are 1+2+1 member-sets of sizes 0,1,2 over the base pair:
        // total membership pairs = 2 · (0·1 + 1·2 + 2·1) = 8.
        assert_eq!(cm.structure.relations["in"].len(), 8);
    }

    #[test]
    fn empty_seed_gives_the_global_tag_flip() {
        let cm = countermodel_universe(2, Some(2)).unwrap();
        let inv = build_involution(&[], &cm).unwrap();
        assert!(inv.is_order_two());
        assert_eq!(inv.fixed_points().len(), 0);
        assert_eq!(check_automorphism(&inv.perm, &cm.structure).unwrap(), None);
        // ⟨0,∅⟩ ↔ ⟨1,∅⟩ under the flip.
        let i0 = cm.elems.iter().position(|e| *e == HfElem::empty(0)).unwrap();
        let i1 = cm.elems.iter().position(|e| *e == HfElem::empty(1)).unwrap();
        assert_eq!(inv.perm[i0] as usize, i1);
    }

    #[test]
    fn singleton_seed_fixes_exactly_the_closure_and_partners() {
        let cm = countermodel_universe(2, Some(2)).unwrap();
        let seed = vec![HfElem::empty(0)];
        let inv = build_involution(&seed, &cm).unwrap();
        assert!(inv.is_order_two());
        assert_eq!(check_automorphism(&inv.perm, &cm.structure).unwrap(), None);
        let fixed: Vec<String> = inv
            .fixed_points()
            .iter()
            .map(|&i| cm.elems[i as usize].to_string())
            .collect();
        assert_eq!(fixed, vec!["0{}".to_string(), "1{}".to_string()]);
    }

    #[test]
    fn deeper_seed_fixes_closure_and_partners_exactly() {
        let cm = countermodel_universe(2, Some(2)).unwrap();
        let zero = HfElem::empty(0);
        let one = HfElem::empty(1);
        let pair = HfElem::new(0, [zero.clone(), one.clone()].into_iter().collect());
        let inv = build_involution(std::slice::from_ref(&pair), &cm).unwrap();
        assert!(inv.is_order_two());
        assert_eq!(check_automorphism(&inv.perm, &cm.structure).unwrap(), None);
        let expected: BTreeSet<String> = transitive_closure(std::slice::from_ref(&pair))
            .iter()
            .flat_map(|e| [e.to_string(), e.partner().to_string()])
            .collect();
        let fixed: BTreeSet<String> = inv
            .fixed_points()
            .iter()
            .map(|&i| cm.elems[i as usize].to_string())
            .collect();
        assert_eq!(fixed, expected);
        // T = {pair, 0{}, 1{}}; 0{} and 1{} are each other's partners, so
        // the only addition is the pair's partner.
        assert_eq!(fixed.len(), 4);
    }

    #[test]
    fn transpositions_of_unequal_elements_fail_the_check() {
        let cm = countermodel_universe(1, Some(2)).unwrap();
        // Swap ⟨0,∅⟩ with ⟨0,{⟨0,∅⟩}⟩: different member-sets.
        let a = cm.elems.iter().position(|e| e.to_string() == "0{}").unwrap();
        let b = cm
            .elems
            .iter()
            .position(|e| e.to_string() == "0{0{}}")
            .unwrap();
        let mut perm: Vec<u32> = (0..cm.elems.len() as u32).collect();
        perm.swap(a, b);
        assert!(check_automorphism(&perm, &cm.structure)
            .unwrap()
            .is_some());
        // The identity always passes.
        let id: Vec<u32> = (0..cm.elems.len() as u32).collect();
        assert_eq!(check_automorphism(&id, &cm.structure).unwrap(), None);
    }

    #[test]
    fn truncated_adjunction_holds_with_margin_one() {
        // For x, y of rank ≤ d−1 (width permitting), some z of rank ≤ d has
        // exactly x's members plus y among elements of rank ≤ d−1.
        let (d, w) = (2usize, 2usize);
        let cm = countermodel_universe(d, Some(w)).unwrap();
        let low: Vec<&HfElem> = cm.elems.iter().filter(|e| e.rank() + 1 <= d).collect();
        for x in &low {
            for y in &low {
                let mut want = x.members.clone();
                want.insert((*y).clone());
                if want.len() > w {
                    continue; // width does not permit the adjunction
                }
                let z = HfElem::new(0, want.clone());
                assert!(
                    cm.elems.contains(&z),
                    "no adjunction witness for x={}, y={}",
                    x,
                    y
                );
                for u in &low {
                    let in_z = z.members.contains(*u);
                    let in_x_or_eq = x.members.contains(*u) || u == y;
                    assert_eq!(in_z, in_x_or_eq);
                }
            }
        }
    }
}
