//! The type-based oracle against plain model enumeration on KBs small enough
//! for the latter.

mod common;

use std::collections::BTreeSet;

use ratcl_core::oracle::canonical::CanonicalOracle;
use ratcl_core::oracle::{enumerate_models, minimally_entails, Method, OracleOptions, Verdict};
use ratcl_core::*;

fn tiny() -> Vec<KnowledgeBase> {
    let atoms = ["A", "B"];
    let lits: Vec<Concept> = atoms.iter().flat_map(|a| [Concept::atom(*a), Concept::not(Concept::atom(*a))]).collect();
    let mut out = Vec::new();
    for (i, x) in lits.iter().enumerate() {
        for y in &lits[i + 1..] {
            for strict in [None, Some((Concept::atom("B"), Concept::atom("A")))] {
                let mut tbox = vec![Inclusion::defeasible(Concept::atom("A"), x.clone()).unwrap()];
                tbox.push(Inclusion::defeasible(Concept::atom("B"), y.clone()).unwrap());
                if let Some((l, r)) = &strict {
                    tbox.push(Inclusion::strict(l.clone(), r.clone()).unwrap());
                }
                out.push(KnowledgeBase::new(tbox, Vec::new()));
            }
        }
    }
    out.push(parse_kb("tbox: T(A) <= exists r. B  B <= ~A").unwrap());
    out.push(parse_kb("tbox: T(A) <= B  T(A) <= ~B").unwrap());
    out
}

fn queries(k: &KnowledgeBase) -> Vec<Query> {
    let s = closure_set(k, None);
    let mut out = Vec::new();
    for c in s.iter().filter(|c| c.is_literal()) {
        for d in s.iter().filter(|d| *d != c) {
            out.push(Query::Inclusion(Inclusion::defeasible(c.clone(), d.clone()).unwrap()));
        }
    }
    out
}

#[test]
fn canonical_oracle_matches_filtered_enumeration() {
    let mut compared = 0;
    for k in tiny() {
        for q in queries(&k) {
            let Ok(oracle) = CanonicalOracle::new(&k, Some(&q)) else { continue };
            let bound = oracle.needed_domain();
            if bound > 5 {
                continue;
            }
            let rank_bound = oracle.needed_rank() + 1;
            let by_types = minimally_entails(
                &k,
                &q,
                &OracleOptions { domain_bound: bound, rank_bound, method: Method::Canonical },
            );
            let by_models = minimally_entails(
                &k,
                &q,
                &OracleOptions { domain_bound: bound, rank_bound, method: Method::Enumeration { canonical: true } },
            );
            let holds = |v: &Verdict| matches!(v, Verdict::Holds);
            assert_eq!(holds(&by_types), holds(&by_models), "{q} over {}", serialize_kb(&k));
            compared += 1;
        }
    }
    assert!(compared > 50, "only {compared} queries were small enough");
}

#[test]
fn realizable_types_are_those_of_some_model() {
    let mut compared = 0;
    for k in tiny() {
        let Ok(oracle) = CanonicalOracle::new(&k, None) else { continue };
        let gm = oracle.greatest();
        if gm.len() > 4 {
            continue;
        }
        let members = gm.members().to_vec();
        let realized: BTreeSet<Vec<bool>> = enumerate_models(&k, None, gm.len(), gm.len() as u32)
            .iter()
            .flat_map(|m| {
                let ext: Vec<BTreeSet<usize>> = members.iter().map(|c| ratcl_core::oracle::eval_concept(m, c)).collect();
                m.domain().map(move |x| ext.iter().map(|e| e.contains(&x)).collect::<Vec<bool>>()).collect::<Vec<_>>()
            })
            .collect();
        let of_t_star: BTreeSet<Vec<bool>> = (0..gm.len())
            .map(|i| {
                let inside: BTreeSet<&Concept> = gm.type_members(i).into_iter().collect();
                members.iter().map(|c| inside.contains(c)).collect()
            })
            .collect();
        assert_eq!(realized, of_t_star, "{}", serialize_kb(&k));
        compared += 1;
    }
    assert!(compared >= 10, "only {compared} KBs were small enough");
}
