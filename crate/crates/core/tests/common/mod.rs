//! Knowledge-base corpora shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratcl_core::{Assertion, Concept, Inclusion, KnowledgeBase};

fn atom(s: &str) -> Concept {
    Concept::atom(s)
}

fn literals(atoms: &[&str]) -> Vec<Concept> {
    atoms.iter().flat_map(|a| [atom(a), Concept::not(atom(a))]).collect()
}

fn subsets<T: Clone>(pool: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    fn go<T: Clone>(pool: &[T], start: usize, max: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == max {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i].clone());
            out.push(cur.clone());
            go(pool, i + 1, max, cur, out);
            cur.pop();
        }
    }
    go(pool, 0, max, &mut Vec::new(), &mut out);
    out
}

fn rename(c: &Concept, map: &[(&str, &str)]) -> Concept {
    match c {
        Concept::Atom(a) => atom(map.iter().find(|(from, _)| from == a).map_or(a.as_str(), |(_, to)| to)),
        Concept::Top | Concept::Bottom => c.clone(),
        Concept::Not(d) => Concept::not(rename(d, map)),
        Concept::And(a, b) => Concept::and(rename(a, map), rename(b, map)),
        Concept::Or(a, b) => Concept::or(rename(a, map), rename(b, map)),
        Concept::Exists(r, d) => Concept::exists(r.clone(), rename(d, map)),
        Concept::Forall(r, d) => Concept::forall(r.clone(), rename(d, map)),
        Concept::Typ(d) => Concept::typ(rename(d, map)),
    }
}

fn permutations_of<'a>(atoms: &[&'a str]) -> Vec<Vec<&'a str>> {
    if atoms.len() <= 1 {
        return vec![atoms.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..atoms.len() {
        let mut rest = atoms.to_vec();
        let x = rest.remove(i);
        for mut p in permutations_of(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Smallest rendering of the TBox over all renamings of `atoms`.
fn canonical_key(tbox: &[Inclusion], atoms: &[&str]) -> String {
    permutations_of(atoms)
        .into_iter()
        .map(|perm| {
            let map: Vec<(&str, &str)> = atoms.iter().copied().zip(perm).collect();
            let mut lines: Vec<String> = tbox
                .iter()
                .map(|i| Inclusion::new(rename(i.lhs(), &map), rename(i.rhs(), &map)).unwrap().to_string())
                .collect();
            lines.sort();
            lines.join(";")
        })
        .min()
        .unwrap()
}

fn build(defeasible: &[(Concept, Concept)], strict: &[(Concept, Concept)], atoms: &[&str]) -> Vec<KnowledgeBase> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in subsets(defeasible, 3) {
        for s in subsets(strict, 2) {
            let tbox: Vec<Inclusion> = d
                .iter()
                .map(|(l, r)| Inclusion::defeasible(l.clone(), r.clone()).unwrap())
                .chain(s.iter().map(|(l, r)| Inclusion::strict(l.clone(), r.clone()).unwrap()))
                .collect();
            if seen.insert(canonical_key(&tbox, atoms)) {
                out.push(KnowledgeBase::new(tbox, Vec::new()));
            }
        }
    }
    out
}

/// Every TBox over atoms `A`, `B`, `C` with at most three defeasible and two
/// strict inclusions of the form `atom ⊑ literal`, up to renaming atoms.
pub fn propositional() -> Vec<KnowledgeBase> {
    let atoms = ["A", "B", "C"];
    let pairs: Vec<(Concept, Concept)> = atoms
        .iter()
        .flat_map(|a| literals(&atoms).into_iter().filter(move |l| *l != atom(a)).map(move |l| (atom(a), l)))
        .collect();
    build(&pairs, &pairs, &atoms)
}

/// Role fillers used by [`with_roles`]: literals, `∃r.L` and `∀r.L`.
fn role_pool(atoms: &[&str]) -> Vec<Concept> {
    let lits = literals(atoms);
    lits.iter()
        .cloned()
        .chain(lits.iter().map(|l| Concept::exists("r", l.clone())))
        .chain(lits.iter().map(|l| Concept::forall("r", l.clone())))
        .collect()
}

/// Every TBox over atoms `A`, `B` and role `r` with at most three defeasible
/// inclusions `T(atom) ⊑ X` and at most one strict inclusion `atom ⊑ X`, where
/// `X` is a literal, `∃r.L` or `∀r.L`, up to swapping the atoms.
pub fn with_roles() -> Vec<KnowledgeBase> {
    let atoms = ["A", "B"];
    let pool = role_pool(&atoms);
    let pairs: Vec<(Concept, Concept)> = atoms
        .iter()
        .flat_map(|a| pool.iter().filter(|x| **x != atom(a)).map(move |x| (atom(a), x.clone())))
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in subsets(&pairs, 3) {
        for s in subsets(&pairs, 1) {
            let tbox: Vec<Inclusion> = d
                .iter()
                .map(|(l, r)| Inclusion::defeasible(l.clone(), r.clone()).unwrap())
                .chain(s.iter().map(|(l, r)| Inclusion::strict(l.clone(), r.clone()).unwrap()))
                .collect();
            if seen.insert(canonical_key(&tbox, &atoms)) {
                out.push(KnowledgeBase::new(tbox, Vec::new()));
            }
        }
    }
    out
}

fn random_concept(rng: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> Concept {
    let leaf = depth == 0 || rng.gen_bool(0.45);
    if leaf {
        let a = atom(atoms.choose(rng).unwrap());
        return if rng.gen_bool(0.35) { Concept::not(a) } else { a };
    }
    let sub = |rng: &mut ChaCha8Rng| random_concept(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Concept::and(sub(rng), sub(rng)),
        1 => Concept::or(sub(rng), sub(rng)),
        2 => Concept::not(sub(rng)),
        3 => Concept::exists("r", sub(rng)),
        _ => Concept::forall("r", sub(rng)),
    }
}

/// Seeded TBoxes over up to four atoms and one role: one to three defeasible
/// and up to two strict inclusions, antecedents of depth at most one.
pub fn random(seed: u64, count: usize) -> Vec<KnowledgeBase> {
    let all = ["A", "B", "C", "D"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let atoms = &all[..n];
            let mut tbox = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let l = random_concept(&mut rng, atoms, 1);
                let r = random_concept(&mut rng, atoms, 2);
                tbox.push(Inclusion::defeasible(l, r).unwrap());
            }
            for _ in 0..rng.gen_range(0..=2) {
                let l = random_concept(&mut rng, atoms, 1);
                let r = random_concept(&mut rng, atoms, 1);
                tbox.push(Inclusion::strict(l, r).unwrap());
            }
            KnowledgeBase::new(tbox, Vec::new())
        })
        .collect()
}

/// Small ABoxes over individuals `a`, `b`, `c` using the given atoms, with
/// role edges when `role` is set.
pub fn abox_templates(atoms: &[&str], role: bool) -> Vec<Vec<Assertion>> {
    let lit = |c: Concept, i: &str| Assertion::concept(c, i).unwrap();
    let (x, y) = (atom(atoms[0]), atom(atoms[1 % atoms.len()]));
    let mut out = vec![
        vec![lit(x.clone(), "a")],
        vec![lit(x.clone(), "a"), lit(y.clone(), "b")],
        vec![lit(x.clone(), "a"), lit(Concept::not(y.clone()), "a")],
        vec![lit(x.clone(), "a"), lit(Concept::not(x.clone()), "b"), lit(y.clone(), "c")],
        vec![lit(Concept::and(x.clone(), y.clone()), "a"), lit(x.clone(), "b")],
        vec![lit(Concept::or(x.clone(), y.clone()), "a"), lit(Concept::not(x.clone()), "b")],
    ];
    if role {
        out.extend([
            vec![lit(x.clone(), "a"), Assertion::role("r", "a", "b")],
            vec![lit(x.clone(), "a"), lit(y.clone(), "b"), Assertion::role("r", "a", "b")],
            vec![
                lit(x.clone(), "a"),
                Assertion::role("r", "a", "b"),
                Assertion::role("r", "c", "b"),
                lit(y.clone(), "c"),
            ],
            vec![lit(x.clone(), "a"), Assertion::role("r", "a", "a")],
        ]);
    }
    out
}

/// Random ABoxes over up to `max_individuals` individuals.
pub fn random_abox(rng: &mut ChaCha8Rng, atoms: &[&str], max_individuals: usize, role: bool) -> Vec<Assertion> {
    let names = ["a", "b", "c", "d", "e", "f"];
    let n = rng.gen_range(1..=max_individuals);
    let mut out = Vec::new();
    for name in &names[..n] {
        let c = random_concept(rng, atoms, 1);
        out.push(Assertion::concept(c, *name).unwrap());
    }
    if role && n > 1 {
        for _ in 0..rng.gen_range(0..=2) {
            let s = names[rng.gen_range(0..n)];
            let o = names[rng.gen_range(0..n)];
            out.push(Assertion::role("r", s, o));
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
