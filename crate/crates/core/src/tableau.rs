//! Classical ALC tableau: satisfiability, subsumption, ABox consistency and
//! instance checking with respect to a strict TBox.
//!
//! The TBox is internalized: every node carries `nnf(¬C ⊔ D)` for each
//! `C ⊑ D`. Anonymous nodes are subset-blocked by anonymous ancestors. Named
//! individuals are never merged. Rules run in a fixed order (conjunction and
//! universal propagation, then disjunctions left-first, then one existential at
//! a time, nodes in creation order and existentials in role-name order).

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::kb::{nnf, Assertion, Concept, Inclusion};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the ALC engine only accepts typicality-free concepts")]
    Typicality,
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
}

type Cid = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Top,
    Bot,
    Atom(usize),
    NegAtom(usize),
    And(Cid, Cid),
    Or(Cid, Cid),
    Exists(usize, Cid),
    Forall(usize, Cid),
}

#[derive(Default)]
struct Arena {
    kinds: Vec<Kind>,
    index: HashMap<Concept, Cid>,
    atoms: HashMap<String, usize>,
    roles: Vec<String>,
    role_index: HashMap<String, usize>,
    // complement of each literal, indexed by cid
    complement: HashMap<Cid, Cid>,
}

impl Arena {
    fn atom_id(&mut self, a: &str) -> usize {
        let next = self.atoms.len();
        *self.atoms.entry(a.to_string()).or_insert(next)
    }

    fn role_id(&mut self, r: &str) -> usize {
        if let Some(&id) = self.role_index.get(r) {
            return id;
        }
        let id = self.roles.len();
        self.roles.push(r.to_string());
        self.role_index.insert(r.to_string(), id);
        id
    }

    fn push(&mut self, c: &Concept, kind: Kind) -> Cid {
        let id = self.kinds.len();
        self.kinds.push(kind);
        self.index.insert(c.clone(), id);
        id
    }

    /// Interns a concept already in negation normal form.
    fn intern(&mut self, c: &Concept) -> Cid {
        if let Some(&id) = self.index.get(c) {
            return id;
        }
        match c {
            Concept::Top => self.push(c, Kind::Top),
            Concept::Bottom => self.push(c, Kind::Bot),
            Concept::Not(inner) if matches!(**inner, Concept::Atom(_)) => {
                let Concept::Atom(a) = &**inner else { unreachable!() };
                self.intern(&Concept::Atom(a.clone()));
                self.index[c]
            }
            Concept::Atom(a) => {
                let sym = self.atom_id(a);
                let pos = Concept::Atom(a.clone());
                let neg = Concept::not(pos.clone());
                let p = self.push(&pos, Kind::Atom(sym));
                let n = self.push(&neg, Kind::NegAtom(sym));
                self.complement.insert(p, n);
                self.complement.insert(n, p);
                p
            }
            Concept::And(a, b) => {
                let (x, y) = (self.intern(a), self.intern(b));
                self.push(c, Kind::And(x, y))
            }
            Concept::Or(a, b) => {
                let (x, y) = (self.intern(a), self.intern(b));
                self.push(c, Kind::Or(x, y))
            }
            Concept::Exists(r, d) => {
                let (role, x) = (self.role_id(r), self.intern(d));
                self.push(c, Kind::Exists(role, x))
            }
            Concept::Forall(r, d) => {
                let (role, x) = (self.role_id(r), self.intern(d));
                self.push(c, Kind::Forall(role, x))
            }
            Concept::Not(_) | Concept::Typ(_) => unreachable!("input is in negation normal form"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns true if the bit was newly set.
    fn set(&mut self, i: usize) -> bool {
        let was = self.get(i);
        self.0[i / 64] |= 1 << (i % 64);
        !was
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    label: Bits,
    members: Vec<Cid>,
    edges: Vec<(usize, usize)>,
    parent: Option<usize>,
    named: bool,
}

#[derive(Debug, Clone)]
struct Graph {
    nodes: Vec<Node>,
    queue: Vec<(usize, Cid)>,
}

struct Engine {
    arena: Arena,
    tbox: Vec<Cid>,
    // existential cids sorted by (role name, cid) for deterministic expansion
    exists_order: Vec<Cid>,
}

enum Step {
    Clash,
    Branch(Cid, Cid, usize),
    Done,
}

impl Engine {
    fn new(strict: &[Inclusion], extra: &[&Concept]) -> Result<(Self, Vec<Cid>), EngineError> {
        let mut arena = Arena::default();
        let mut tbox = Vec::new();
        for inc in strict {
            if !inc.lhs().is_typ_free() {
                return Err(EngineError::Typicality);
            }
            let m = nnf(&Concept::or(Concept::not(inc.lhs().clone()), inc.rhs().clone()))
                .map_err(|_| EngineError::Typicality)?;
            let id = arena.intern(&m);
            if !tbox.contains(&id) {
                tbox.push(id);
            }
        }
        let mut ids = Vec::new();
        for c in extra {
            let n = nnf(c).map_err(|_| EngineError::Typicality)?;
            ids.push(arena.intern(&n));
        }
        let mut exists_order: Vec<Cid> = (0..arena.kinds.len())
            .filter(|&i| matches!(arena.kinds[i], Kind::Exists(..)))
            .collect();
        exists_order.sort_by(|&a, &b| {
            let role = |i: Cid| match arena.kinds[i] {
                Kind::Exists(r, _) => arena.roles[r].clone(),
                _ => unreachable!(),
            };
            (role(a), a).cmp(&(role(b), b))
        });
        Ok((Engine { arena, tbox, exists_order }, ids))
    }

    fn new_node(&self, g: &mut Graph, parent: Option<usize>, named: bool) -> usize {
        let id = g.nodes.len();
        g.nodes.push(Node {
            label: Bits::new(self.arena.kinds.len()),
            members: Vec::new(),
            edges: Vec::new(),
            parent,
            named,
        });
        for &t in &self.tbox {
            self.add(g, id, t);
        }
        id
    }

    fn add(&self, g: &mut Graph, node: usize, c: Cid) {
        let n = &mut g.nodes[node];
        if n.label.set(c) {
            n.members.push(c);
            g.queue.push((node, c));
        }
    }

    fn add_edge(&self, g: &mut Graph, from: usize, role: usize, to: usize) {
        if g.nodes[from].edges.contains(&(role, to)) {
            return;
        }
        g.nodes[from].edges.push((role, to));
        let foralls: Vec<Cid> = g.nodes[from]
            .members
            .iter()
            .filter_map(|&m| match self.arena.kinds[m] {
                Kind::Forall(r, d) if r == role => Some(d),
                _ => None,
            })
            .collect();
        for d in foralls {
            self.add(g, to, d);
        }
    }

    fn dead(&self, label: &Bits, c: Cid) -> bool {
        match self.arena.kinds[c] {
            Kind::Bot => true,
            Kind::Atom(_) | Kind::NegAtom(_) => label.get(self.arena.complement[&c]),
            _ => false,
        }
    }

    /// Applies deterministic rules to a fixpoint; reports a clash or the first
    /// disjunction that needs a genuine choice.
    fn saturate(&self, g: &mut Graph) -> Step {
        loop {
            while let Some((node, c)) = g.queue.pop() {
                match self.arena.kinds[c] {
                    Kind::Bot => return Step::Clash,
                    Kind::Atom(_) | Kind::NegAtom(_) => {
                        if g.nodes[node].label.get(self.arena.complement[&c]) {
                            return Step::Clash;
                        }
                    }
                    Kind::And(a, b) => {
                        self.add(g, node, a);
                        self.add(g, node, b);
                    }
                    Kind::Forall(r, d) => {
                        let targets: Vec<usize> = g.nodes[node]
                            .edges
                            .iter()
                            .filter(|(role, _)| *role == r)
                            .map(|&(_, t)| t)
                            .collect();
                        for t in targets {
                            self.add(g, t, d);
                        }
                    }
                    Kind::Top | Kind::Or(..) | Kind::Exists(..) => {}
                }
            }
            let mut branch = None;
            let mut unit = None;
            'nodes: for (id, node) in g.nodes.iter().enumerate() {
                for &m in &node.members {
                    let Kind::Or(a, b) = self.arena.kinds[m] else { continue };
                    if node.label.get(a) || node.label.get(b) {
                        continue;
                    }
                    match (self.dead(&node.label, a), self.dead(&node.label, b)) {
                        (true, true) => return Step::Clash,
                        (true, false) => {
                            unit = Some((id, b));
                            break 'nodes;
                        }
                        (false, true) => {
                            unit = Some((id, a));
                            break 'nodes;
                        }
                        (false, false) => {
                            if branch.is_none() {
                                branch = Some((a, b, id));
                            }
                        }
                    }
                }
            }
            if let Some((node, c)) = unit {
                self.add(g, node, c);
                continue;
            }
            return match branch {
                Some((a, b, node)) => Step::Branch(a, b, node),
                None => Step::Done,
            };
        }
    }

    fn blocked(&self, g: &Graph, node: usize) -> bool {
        let n = &g.nodes[node];
        if n.named {
            return false;
        }
        let mut cur = n.parent;
        while let Some(p) = cur {
            let anc = &g.nodes[p];
            if anc.named {
                return false;
            }
            if n.label.is_subset(&anc.label) {
                return true;
            }
            cur = anc.parent;
        }
        false
    }

    /// Creates one missing successor; false when every existential is met.
    fn expand_exists(&self, g: &mut Graph) -> bool {
        for id in 0..g.nodes.len() {
            if self.blocked(g, id) {
                continue;
            }
            for &e in &self.exists_order {
                if !g.nodes[id].label.get(e) {
                    continue;
                }
                let Kind::Exists(r, c) = self.arena.kinds[e] else { unreachable!() };
                let met = g.nodes[id]
                    .edges
                    .iter()
                    .any(|&(role, t)| role == r && g.nodes[t].label.get(c));
                if met {
                    continue;
                }
                let succ = self.new_node(g, Some(id), false);
                self.add(g, succ, c);
                self.add_edge(g, id, r, succ);
                return true;
            }
        }
        false
    }

    fn solve(&self, mut g: Graph) -> bool {
        loop {
            match self.saturate(&mut g) {
                Step::Clash => return false,
                Step::Branch(a, b, node) => {
                    let mut left = g.clone();
                    self.add(&mut left, node, a);
                    if self.solve(left) {
                        return true;
                    }
                    self.add(&mut g, node, b);
                    if let Some(&not_a) = self.arena.complement.get(&a) {
                        self.add(&mut g, node, not_a);
                    }
                }
                Step::Done => {
                    if !self.expand_exists(&mut g) {
                        return true;
                    }
                }
            }
        }
    }
}

/// True iff some model of `strict` gives `c` a non-empty extension.
pub fn is_satisfiable(c: &Concept, strict: &[Inclusion]) -> Result<bool, EngineError> {
    let (engine, ids) = Engine::new(strict, &[c])?;
    let mut g = Graph { nodes: Vec::new(), queue: Vec::new() };
    let root = engine.new_node(&mut g, None, false);
    engine.add(&mut g, root, ids[0]);
    Ok(engine.solve(g))
}

/// `strict ⊨ c ⊑ d`.
pub fn entails_inclusion(strict: &[Inclusion], c: &Concept, d: &Concept) -> Result<bool, EngineError> {
    Ok(!is_satisfiable(&Concept::and(c.clone(), Concept::not(d.clone())), strict)?)
}

/// True iff some model of `strict` satisfies every assertion, with distinct
/// individuals denoting distinct elements.
pub fn abox_consistent(strict: &[Inclusion], assertions: &[Assertion]) -> Result<bool, EngineError> {
    let concepts: Vec<&Concept> = assertions
        .iter()
        .filter_map(|a| match a {
            Assertion::Concept { concept, .. } => Some(concept),
            Assertion::Role { .. } => None,
        })
        .collect();
    let (mut engine, ids) = Engine::new(strict, &concepts)?;
    let mut individuals = BTreeSet::new();
    for a in assertions {
        for i in a.individuals() {
            individuals.insert(i.to_string());
        }
    }
    let mut g = Graph { nodes: Vec::new(), queue: Vec::new() };
    let mut node_of = HashMap::new();
    for i in &individuals {
        node_of.insert(i.clone(), engine.new_node(&mut g, None, true));
    }
    let mut ids = ids.into_iter();
    for a in assertions {
        match a {
            Assertion::Concept { individual, .. } => {
                let c = ids.next().expect("one id per concept assertion");
                engine.add(&mut g, node_of[individual], c);
            }
            Assertion::Role { role, subject, object } => {
                let r = engine.arena.role_id(role);
                engine.add_edge(&mut g, node_of[subject], r, node_of[object]);
            }
        }
    }
    Ok(engine.solve(g))
}

/// `strict ∪ assertions ⊨ c(a)`. Fails with `UnknownIndividual` when `a` does
/// not occur in `assertions`.
pub fn instance_check(
    strict: &[Inclusion],
    assertions: &[Assertion],
    c: &Concept,
    a: &str,
) -> Result<bool, EngineError> {
    if !c.is_typ_free() {
        return Err(EngineError::Typicality);
    }
    if !assertions.iter().any(|x| x.individuals().contains(&a)) {
        return Err(EngineError::UnknownIndividual(a.to_string()));
    }
    let mut extended = assertions.to_vec();
    extended.push(Assertion::Concept { concept: Concept::not(c.clone()), individual: a.to_string() });
    Ok(!abox_consistent(strict, &extended)?)
}
