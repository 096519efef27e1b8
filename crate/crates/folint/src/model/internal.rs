//! Internal models: the structure a translation induces inside a model of
//! its target theory.
//!
//! For a translation τ with per-sort dimension m and domains δ, the internal
//! model of a target structure S has, at each source sort, the m-tuples of
//! S-elements satisfying δ, with source relations induced by the predicate
//! map. The construction is partial: it is undefined (returns `None`) when
//! some domain is empty in S. Quotients are never taken — when τ translates
//! equality to something other than componentwise equality, the induced
//! congruence is carried as an explicit extra relation.

use super::FiniteStructure;
use crate::syntax::{fresh_name, PredDecl, Signature};
use crate::translation::Translation;
use crate::{Error, Result};
use std::collections::HashSet;

/// All length-`k` index tuples over `0..n`.
fn tuples(n: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i as u32);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn tuple_id(s: &FiniteStructure, sort: &str, t: &[u32]) -> String {
    if t.len() == 1 {
        s.elem_id(sort, t[0]).to_string()
    } else {
        let parts: Vec<&str> = t.iter().map(|i| s.elem_id(sort, *i)).collect();
        format!("({})", parts.join(","))
    }
}

/// Check that `s` can serve as a model of `sig`: same sorts, and every
/// predicate of `sig` present with the same profile (extra relations in `s`
/// are allowed — internal models carry congruences as extra relations).
fn compatible(s: &FiniteStructure, sig: &Signature) -> Result<()> {
    if s.signature.sorts != sig.sorts {
        return Err(Error::Precondition(format!(
            "structure {} has sorts {:?}, expected {:?}",
            s.name, s.signature.sorts, sig.sorts
        )));
    }
    for p in &sig.preds {
        match s.signature.pred(&p.name) {
            Some(q) if q.profile == p.profile => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "structure {} does not realize predicate {}",
                    s.name, p.name
                )))
            }
        }
    }
    Ok(())
}

/// Build the internal model of `s` under `tau`. Returns `Ok(None)` when some
/// domain is empty in `s` (the construction is undefined there).
pub fn internal_model(tau: &Translation, s: &FiniteStructure) -> Result<Option<FiniteStructure>> {
    compatible(s, &tau.target)?;
    let tsort = tau.target_sort();
    let n = s.size(tsort);

    // Per source sort: the δ-satisfying tuples.
    let mut carriers: Vec<(String, Vec<Vec<u32>>)> = Vec::new();
    for sort in &tau.source.sorts {
        let m = tau.dim(sort);
        let delta = tau.domain(sort);
        let mut keep = Vec::new();
        for t in tuples(n, m) {
            let mut env: Vec<(String, u32)> = delta
                .params
                .iter()
                .zip(&t)
                .map(|(p, i)| (p.name.clone(), *i))
                .collect();
            if s.eval_env(&delta.body, &mut env)? {
                keep.push(t);
            }
        }
        if keep.is_empty() {
            return Ok(None);
        }
        carriers.push((sort.clone(), keep));
    }

    // Extended signature: congruence relations for sorts with a non-trivial
    // equality image.
    let mut preds = tau.source.preds.clone();
    let mut cong: Vec<(String, String)> = Vec::new(); // (sort, relation name)
    let mut used: HashSet<String> = preds.iter().map(|p| p.name.clone()).collect();
    for sort in &tau.source.sorts {
        if !tau.eq_is_componentwise(sort) {
            let name = fresh_name(&format!("eqrel_{}", sort), &used);
            used.insert(name.clone());
            preds.push(PredDecl {
                name: name.clone(),
                profile: vec![sort.clone(), sort.clone()],
            });
            cong.push((sort.clone(), name));
        }
    }
    let sig = Signature::new(tau.source.name.clone(), tau.source.sorts.clone(), preds)?;

    let mut out = FiniteStructure::new(format!("Mod_{}({})", tau.name, s.name), sig);
    for (sort, keep) in &carriers {
        for t in keep {
            out.add_elem(sort, tuple_id(s, tsort, t))?;
        }
    }

    let carrier_of = |sort: &str| -> &Vec<Vec<u32>> {
        &carriers.iter().find(|(s2, _)| s2 == sort).unwrap().1
    };

    // Source relations through the predicate map.
    for p in &tau.source.preds {
        let proto = &tau.predmap[&p.name];
        let lists: Vec<&Vec<Vec<u32>>> = p.profile.iter().map(|s2| carrier_of(s2)).collect();
        let mut index = vec![0usize; lists.len()];
        'outer: loop {
            // Assemble the flattened environment for this argument choice.
            let mut flat: Vec<u32> = Vec::new();
            for (k, l) in lists.iter().enumerate() {
                flat.extend(&l[index[k]]);
            }
            let mut env: Vec<(String, u32)> = proto
                .params
                .iter()
                .zip(&flat)
                .map(|(pv, i)| (pv.name.clone(), *i))
                .collect();
            if s.eval_env(&proto.body, &mut env)? {
                let tuple: Vec<u32> = index.iter().map(|i| *i as u32).collect();
                out.add_tuple(&p.name, tuple)?;
            }
            // Advance the product counter.
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < lists[k].len() {
                    continue 'outer;
                }
                index[k] = 0;
                if k == 0 {
                    break 'outer;
                }
            }
            if index.is_empty() {
                break;
            }
        }
    }

    // Congruence relations from the equality image.
    for (sort, rel) in &cong {
        let proto = &tau.eqmap[sort];
        let list = carrier_of(sort);
        for (i, a) in list.iter().enumerate() {
            for (j, b) in list.iter().enumerate() {
                let mut flat: Vec<u32> = a.clone();
                flat.extend(b);
                let mut env: Vec<(String, u32)> = proto
                    .params
                    .iter()
                    .zip(&flat)
                    .map(|(pv, ix)| (pv.name.clone(), *ix))
                    .collect();
                if s.eval_env(&proto.body, &mut env)? {
                    out.add_tuple(rel, vec![i as u32, j as u32])?;
                }
            }
        }
    }

    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::structures_equal_mod_tupling;
    use crate::syntax::parse::parse_theory;
    use crate::syntax::{Formula, ProtoFormula, Var};
    use std::collections::BTreeMap;

    fn v(n: &str) -> Var {
        Var::new(n, "o")
    }

    #[test]
    fn identity_internal_model_is_the_structure() {
        let th = parse_theory("theory AS\npred in/2\n").unwrap();
        let mut s = FiniteStructure::new("s", th.signature.clone());
        for id in ["a", "b", "c"] {
            s.add_elem("o", id).unwrap();
        }
        s.add_tuple_ids("in", &["a", "b"]).unwrap();
        s.add_tuple_ids("in", &["b", "c"]).unwrap();
        let id = Translation::identity(&th.signature).unwrap();
        let m = internal_model(&id, &s).unwrap().unwrap();
        assert!(structures_equal_mod_tupling(&m, &s));
    }

    #[test]
    fn empty_domain_is_undefined() {
        let th = parse_theory("theory AS\npred in/2\n").unwrap();
        let mut s = FiniteStructure::new("s", th.signature.clone());
        s.add_elem("o", "a").unwrap();
        let mut t = Translation::identity(&th.signature).unwrap();
        // δ := λx. false
        let mut domains = BTreeMap::new();
        domains.insert(
            "o".to_string(),
            ProtoFormula::new(vec![v("x")], Formula::False).unwrap(),
        );
        t = Translation::new(
            "f",
            t.source.clone(),
            t.target.clone(),
            t.dims.clone(),
            domains,
            t.predmap.clone(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(internal_model(&t, &s).unwrap().is_none());
    }

    #[test]
    fn relativized_domain_restricts_carrier() {
        let th = parse_theory("theory T\npred ob/1\npred in/2\n").unwrap();
        let mut s = FiniteStructure::new("s", th.signature.clone());
        for id in ["a", "b", "c"] {
            s.add_elem("o", id).unwrap();
        }
        s.add_tuple_ids("ob", &["a"]).unwrap();
        s.add_tuple_ids("ob", &["b"]).unwrap();
        s.add_tuple_ids("in", &["a", "b"]).unwrap();
        s.add_tuple_ids("in", &["a", "c"]).unwrap();

        let src = parse_theory("theory U\npred r/2\n").unwrap();
        let mut domains = BTreeMap::new();
        domains.insert(
            "o".to_string(),
            ProtoFormula::new(vec![v("x")], Formula::atom("ob", vec![v("x")])).unwrap(),
        );
        let mut predmap = BTreeMap::new();
        predmap.insert(
            "r".to_string(),
            ProtoFormula::new(
                vec![v("x"), v("y")],
                Formula::atom("in", vec![v("x"), v("y")]),
            )
            .unwrap(),
        );
        let tau = Translation::new(
            "tau",
            src.signature.clone(),
            th.signature.clone(),
            BTreeMap::new(),
            domains,
            predmap,
            BTreeMap::new(),
        )
        .unwrap();
        let m = internal_model(&tau, &s).unwrap().unwrap();
        assert_eq!(m.carrier["o"], vec!["a".to_string(), "b".to_string()]);
        // (a,b) survives; (a,c) dropped since c ∉ δ.
        assert_eq!(m.relations["r"].len(), 1);
        assert!(m.holds("r", &[0, 1]));
    }
}
