use std::collections::{BTreeMap, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;

use crate::diag::{Diagnostic, Diagnostics};
use crate::model::{Program, RuleKind};

/// Strata of the deductive and output rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stratification {
    /// Stratum per rule index; `None` for inductive and input rules.
    pub stratum: Vec<Option<usize>>,
    /// Deductive rule indices grouped by ascending stratum, program order within.
    pub deductive: Vec<Vec<usize>>,
    /// Stratum of every predicate that appears in a deductive or output rule.
    pub predicate_stratum: BTreeMap<String, usize>,
}

/// Stratifies negation over deductive and output rules. Requires rule kinds.
pub fn stratify(p: &Program) -> Result<Stratification, Diagnostics> {
    let mut g: DiGraph<&str, bool> = DiGraph::new();
    let mut nodes: HashMap<&str, NodeIndex> = HashMap::new();
    fn ensure<'a>(g: &mut DiGraph<&'a str, bool>, nodes: &mut HashMap<&'a str, NodeIndex>, name: &'a str) -> NodeIndex {
        *nodes.entry(name).or_insert_with(|| g.add_node(name))
    }
    // `neg_sites` remembers where each negative edge came from, for diagnostics.
    let mut neg_sites = HashMap::new();
    for (ri, r) in p.rules.iter().enumerate() {
        let kind = r.kind.expect("rules are classified before stratification");
        if !matches!(kind, RuleKind::Deductive | RuleKind::Output) {
            continue;
        }
        for l in r.literals().filter(|l| !l.is_io) {
            ensure(&mut g, &mut nodes, l.predicate.as_str());
        }
        if kind != RuleKind::Deductive {
            continue;
        }
        let head = ensure(&mut g, &mut nodes, r.head.predicate.as_str());
        for l in r.literals().filter(|l| !l.is_io) {
            let from = nodes[l.predicate.as_str()];
            g.add_edge(from, head, l.negated);
            if l.negated {
                neg_sites.entry((from, head)).or_insert((ri, l.pos));
            }
        }
    }

    // tarjan_scc yields components in reverse topological order.
    let mut sccs = tarjan_scc(&g);
    sccs.reverse();
    let mut comp_of = vec![0usize; g.node_count()];
    for (ci, comp) in sccs.iter().enumerate() {
        for n in comp {
            comp_of[n.index()] = ci;
        }
    }

    let mut errors = Vec::new();
    for e in g.edge_references() {
        if *e.weight() && comp_of[e.source().index()] == comp_of[e.target().index()] {
            let (_, pos) = neg_sites[&(e.source(), e.target())];
            let cycle = describe_cycle(&g, e.source(), e.target(), &comp_of);
            errors.push(Diagnostic::error(
                pos,
                format!("negation is not stratified: {cycle}"),
            ));
        }
    }
    if !errors.is_empty() {
        errors.dedup();
        return Err(Diagnostics(errors));
    }

    let mut comp_stratum = vec![0usize; sccs.len()];
    for (ci, comp) in sccs.iter().enumerate() {
        let mut s = 0;
        for n in comp {
            for e in g.edges_directed(*n, petgraph::Direction::Incoming) {
                let src = comp_of[e.source().index()];
                if src != ci {
                    s = s.max(comp_stratum[src] + usize::from(*e.weight()));
                }
            }
        }
        comp_stratum[ci] = s;
    }
    let pred_stratum = |name: &str| nodes.get(name).map_or(0, |n| comp_stratum[comp_of[n.index()]]);

    let mut out = Stratification {
        stratum: vec![None; p.rules.len()],
        ..Default::default()
    };
    for (name, n) in &nodes {
        out.predicate_stratum
            .insert(name.to_string(), comp_stratum[comp_of[n.index()]]);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (ri, r) in p.rules.iter().enumerate() {
        match r.kind {
            Some(RuleKind::Deductive) => {
                let s = pred_stratum(&r.head.predicate);
                out.stratum[ri] = Some(s);
                groups.entry(s).or_default().push(ri);
            }
            Some(RuleKind::Output) => {
                let s = r
                    .literals()
                    .filter(|l| !l.is_io)
                    .map(|l| pred_stratum(&l.predicate) + usize::from(l.negated))
                    .max()
                    .unwrap_or(0);
                out.stratum[ri] = Some(s);
            }
            _ => {}
        }
    }
    out.deductive = groups.into_values().collect();
    Ok(out)
}

/// Describes the cycle closed by the negative edge `neg_from -> neg_to`.
fn describe_cycle(
    g: &DiGraph<&str, bool>,
    neg_from: NodeIndex,
    neg_to: NodeIndex,
    comp_of: &[usize],
) -> String {
    let comp = comp_of[neg_to.index()];
    let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = VecDeque::from([neg_to]);
    while let Some(n) = queue.pop_front() {
        if n == neg_from {
            break;
        }
        for m in g.neighbors(n) {
            if comp_of[m.index()] == comp && m != neg_to && !prev.contains_key(&m) {
                prev.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    let mut path = vec![neg_from];
    while *path.last().unwrap() != neg_to {
        path.push(prev[path.last().unwrap()]);
    }
    path.reverse();

    let mut parts = vec![format!("`{}` depends on `!{}`", g[neg_to], g[neg_from])];
    for w in path.windows(2) {
        let (body, head) = (w[0], w[1]);
        let bang = if g.edges_connecting(body, head).all(|e| *e.weight()) {
            "!"
        } else {
            ""
        };
        parts.push(format!("`{}` depends on `{bang}{}`", g[head], g[body]));
    }
    parts.join(", ")
}
