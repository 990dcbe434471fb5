mod common;

use proptest::prelude::*;
use ratcl_core::*;

fn concept() -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["A", "B", "C"]).prop_map(Concept::atom),
        Just(Concept::Top),
        Just(Concept::Bottom),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Concept::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::or(a, b)),
            inner.clone().prop_map(|c| Concept::exists("r", c)),
            inner.prop_map(|c| Concept::forall("r", c)),
        ]
    })
}

fn tbox_kb() -> impl Strategy<Value = KnowledgeBase> {
    any::<u64>().prop_map(|seed| common::random(seed, 1).remove(0))
}

fn kb_with_abox() -> impl Strategy<Value = KnowledgeBase> {
    any::<u64>().prop_map(|seed| {
        let k = common::random(seed, 1).remove(0);
        let atoms: Vec<String> = k.signature().atoms.iter().cloned().collect();
        let atoms: Vec<&str> = atoms.iter().map(String::as_str).collect();
        let abox = common::random_abox(&mut common::rng(seed), &atoms, 3, true);
        k.with_abox(abox)
    })
}

fn equivalent(a: &Concept, b: &Concept) -> bool {
    entails_inclusion(&[], a, b).unwrap() && entails_inclusion(&[], b, a).unwrap()
}

fn defeasible(c: &Concept, d: &Concept) -> Inclusion {
    Inclusion::defeasible(c.clone(), d.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nnf_is_idempotent_and_equivalent(c in concept()) {
        let n = nnf(&c).unwrap();
        prop_assert_eq!(nnf(&n).unwrap(), n.clone());
        prop_assert!(equivalent(&c, &n));
    }

    #[test]
    fn concepts_survive_printing(c in concept()) {
        prop_assert_eq!(parse_concept(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn knowledge_bases_survive_serialization(k in kb_with_abox()) {
        let back = parse_kb(&serialize_kb(&k)).unwrap();
        prop_assert_eq!(back.tbox(), k.tbox());
        prop_assert_eq!(back.abox(), k.abox());
    }

    #[test]
    fn closure_set_is_closed_under_complement(k in kb_with_abox()) {
        let s = closure_set(&k, None);
        for c in s.iter() {
            prop_assert!(s.contains(&c.complement()), "{} lacks the complement of {}", s.len(), c);
        }
    }

    #[test]
    fn closure_set_grows_with_the_kb(k in tbox_kb(), c in concept(), d in concept()) {
        let small = closure_set(&k, None);
        let mut tbox = k.tbox().to_vec();
        tbox.push(defeasible(&c, &d));
        let big = closure_set(&k.with_tbox(tbox), None);
        prop_assert!(small.iter().all(|x| big.contains(x)));
    }

    #[test]
    fn rank_does_not_drop_under_specialization(k in tbox_kb(), c in concept(), d in concept()) {
        let r = exceptionality_sequence(&k).unwrap();
        let general = concept_rank(&c, &r).unwrap();
        let specific = concept_rank(&Concept::and(c, d), &r).unwrap();
        prop_assert!(specific >= general);
    }

    #[test]
    fn typical_instances_satisfy_the_strict_part(k in tbox_kb(), c in concept(), d in concept()) {
        let r = exceptionality_sequence(&k).unwrap();
        let strict = in_tbox_closure(&Inclusion::strict(c.clone(), d.clone()).unwrap(), &r, ClassicalBase::default()).unwrap();
        if strict {
            prop_assert!(in_tbox_closure(&defeasible(&c, &d), &r, ClassicalBase::default()).unwrap());
        }
    }

    #[test]
    fn closure_satisfies_cut_and_cautious_monotony(k in tbox_kb(), c in concept(), d in concept(), e in concept()) {
        let r = exceptionality_sequence(&k).unwrap();
        let holds = |x: &Concept, y: &Concept| in_tbox_closure(&defeasible(x, y), &r, ClassicalBase::default()).unwrap();
        let cd = Concept::and(c.clone(), d.clone());
        if holds(&c, &d) {
            prop_assert_eq!(holds(&cd, &e), holds(&c, &e));
        }
    }

    #[test]
    fn closure_satisfies_rational_monotony(k in tbox_kb(), c in concept(), d in concept(), e in concept()) {
        let r = exceptionality_sequence(&k).unwrap();
        let holds = |x: &Concept, y: &Concept| in_tbox_closure(&defeasible(x, y), &r, ClassicalBase::default()).unwrap();
        if holds(&c, &e) && !holds(&c, &Concept::not(d.clone())) {
            prop_assert!(holds(&Concept::and(c, d), &e));
        }
    }

    #[test]
    fn lower_assignments_carry_more_defaults(k in kb_with_abox()) {
        let r = exceptionality_sequence(&k).unwrap();
        let ab = AboxReasoner::new(&k, &r, closure_set(&k, None), ClassicalBase::default()).unwrap();
        let all = ab.enumerate_rank_assignments();
        for a in all.iter().take(12) {
            for b in all.iter().filter(|b| a.pointwise_le(b)).take(12) {
                let (mu_a, mu_b) = (ab.mu_set(a).unwrap(), ab.mu_set(b).unwrap());
                for x in mu_b.assertions() {
                    if let Assertion::Concept { concept, individual } = x {
                        prop_assert!(mu_a.contains(concept, individual));
                    }
                }
                if ab.assignment_consistent(a).unwrap() {
                    prop_assert!(ab.assignment_consistent(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn classical_instance_checks_are_monotone(k in kb_with_abox(), c in concept(), extra in concept()) {
        let strict = strict_part(&k);
        let ind = k.individuals()[0].clone();
        let before = instance_check(&strict, k.abox(), &c, &ind).unwrap();
        let mut abox = k.abox().to_vec();
        abox.push(Assertion::concept(extra, ind.clone()).unwrap());
        if before {
            prop_assert!(instance_check(&strict, &abox, &c, &ind).unwrap());
        }
    }

    #[test]
    fn strict_entailment_is_transitive(k in tbox_kb(), c in concept(), d in concept(), e in concept()) {
        let strict = strict_part(&k);
        if entails_inclusion(&strict, &c, &d).unwrap() && entails_inclusion(&strict, &d, &e).unwrap() {
            prop_assert!(entails_inclusion(&strict, &c, &e).unwrap());
        }
    }
}
