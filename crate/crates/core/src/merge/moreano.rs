//! Clique-based actor correspondence over a compatibility graph.
//!
//! Candidate nodes are mappings between edges of the two networks
//! (plus bare vertex pairings for actors no edge covers). Two nodes
//! are compatible when their implied vertex assignments can coexist in
//! an injective correspondence. A maximum-weight clique over this
//! graph maximizes the sharing score `w_v * |shared actors| +
//! w_e * |shared channels|`; exact search is exponential, so a
//! deterministic greedy takes its place and small instances are
//! cross-checked against exhaustive search in the tests.

use std::collections::BTreeMap;

use crate::ir::{Actor, DataflowNetwork, Endpoint};

const EDGE_WEIGHT: f64 = 1.0;

/// An injective, type-consistent correspondence between two networks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Correspondence {
    /// Pairs `(actor of a, actor of b)`.
    pub vertex_pairs: Vec<(String, String)>,
    /// Pairs of channel sink keys `(channel of a, channel of b)`.
    pub edge_pairs: Vec<(String, String)>,
    pub score: f64,
}

impl Correspondence {
    pub fn vertex_map_b_to_a(&self) -> BTreeMap<String, String> {
        self.vertex_pairs
            .iter()
            .map(|(a, b)| (b.clone(), a.clone()))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_pairs.is_empty() && self.edge_pairs.is_empty()
    }
}

/// Greedy maximum-weight-clique correspondence. `vertex_weights` maps
/// component types to their area annotation (`w_v`); unannotated types
/// weigh 1.
pub fn build_moreano_mapping(
    a: &DataflowNetwork,
    b: &DataflowNetwork,
    vertex_weights: Option<&BTreeMap<String, f64>>,
) -> Correspondence {
    let nodes = compatibility_nodes(a, b, vertex_weights);

    let mut picked: Vec<&Node> = Vec::new();
    let mut state = MapState::default();
    for node in &nodes {
        if state.admits(node) {
            state.commit(node);
            picked.push(node);
        }
    }

    let mut vertex_pairs: Vec<(String, String)> = state
        .a_to_b
        .iter()
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect();
    vertex_pairs.sort();
    let mut edge_pairs: Vec<(String, String)> = picked
        .iter()
        .filter_map(|n| n.edge.clone())
        .collect();
    edge_pairs.sort();

    let w = |actor: &str| vertex_weight(a, actor, vertex_weights);
    let score = vertex_pairs.iter().map(|(va, _)| w(va)).sum::<f64>()
        + EDGE_WEIGHT * edge_pairs.len() as f64;
    Correspondence { vertex_pairs, edge_pairs, score }
}

fn vertex_weight(
    net: &DataflowNetwork,
    actor: &str,
    weights: Option<&BTreeMap<String, f64>>,
) -> f64 {
    net.actor(actor)
        .and_then(|a| weights.and_then(|w| w.get(&a.component_type)))
        .copied()
        .unwrap_or(1.0)
}

#[derive(Debug)]
struct Node {
    /// `(sink key in a, sink key in b)` when this node maps an edge.
    edge: Option<(String, String)>,
    /// Vertex assignments this node implies (0..=2 pairs).
    implied: Vec<(String, String)>,
    weight: f64,
    tie: String,
}

#[derive(Default)]
struct MapState {
    a_to_b: BTreeMap<String, String>,
    b_to_a: BTreeMap<String, String>,
    edges_a: BTreeMap<String, String>,
    edges_b: BTreeMap<String, String>,
}

impl MapState {
    fn admits(&self, node: &Node) -> bool {
        for (va, vb) in &node.implied {
            if self.a_to_b.get(va).is_some_and(|m| m != vb) {
                return false;
            }
            if self.b_to_a.get(vb).is_some_and(|m| m != va) {
                return false;
            }
        }
        if let Some((ea, eb)) = &node.edge {
            if self.edges_a.contains_key(ea) || self.edges_b.contains_key(eb) {
                return false;
            }
        }
        true
    }

    fn commit(&mut self, node: &Node) {
        for (va, vb) in &node.implied {
            self.a_to_b.insert(va.clone(), vb.clone());
            self.b_to_a.insert(vb.clone(), va.clone());
        }
        if let Some((ea, eb)) = &node.edge {
            self.edges_a.insert(ea.clone(), eb.clone());
            self.edges_b.insert(eb.clone(), ea.clone());
        }
    }
}

fn interchangeable(x: &Actor, y: &Actor) -> bool {
    !x.kind.is_sbox()
        && !y.kind.is_sbox()
        && x.component_type == y.component_type
        && x.port_signature() == y.port_signature()
}

/// All candidate nodes, ordered by descending weight then key; the
/// greedy scan consumes them in this order.
fn compatibility_nodes(
    a: &DataflowNetwork,
    b: &DataflowNetwork,
    weights: Option<&BTreeMap<String, f64>>,
) -> Vec<Node> {
    let mut nodes = Vec::new();

    // Endpoint compatibility: same-named network ports, or ports of
    // interchangeable actors with the same port name.
    let endpoint_pair = |ea: &Endpoint, eb: &Endpoint| -> Option<Option<(String, String)>> {
        match (ea, eb) {
            (Endpoint::NetworkPort { port: pa }, Endpoint::NetworkPort { port: pb }) => {
                (pa == pb).then_some(None)
            }
            (
                Endpoint::ActorPort { actor: aa, port: pa },
                Endpoint::ActorPort { actor: ab, port: pb },
            ) => {
                if pa != pb {
                    return None;
                }
                let (x, y) = (a.actor(aa)?, b.actor(ab)?);
                interchangeable(x, y).then_some(Some((aa.clone(), ab.clone())))
            }
            _ => None,
        }
    };

    for ca in &a.channels {
        for cb in &b.channels {
            let Some(src) = endpoint_pair(&ca.source, &cb.source) else { continue };
            let Some(snk) = endpoint_pair(&ca.sink, &cb.sink) else { continue };
            let mut implied: Vec<(String, String)> = src.into_iter().chain(snk).collect();
            implied.sort();
            implied.dedup();
            let weight = EDGE_WEIGHT
                + implied
                    .iter()
                    .map(|(va, _)| vertex_weight(a, va, weights))
                    .sum::<f64>();
            let key = format!("{}>{}", ca.sink.key(), cb.sink.key());
            nodes.push(Node {
                edge: Some((ca.sink.key(), cb.sink.key())),
                implied,
                weight,
                tie: key,
            });
        }
    }

    for x in &a.actors {
        for y in &b.actors {
            if interchangeable(x, y) {
                nodes.push(Node {
                    edge: None,
                    implied: vec![(x.instance_name.clone(), y.instance_name.clone())],
                    weight: vertex_weight(a, &x.instance_name, weights),
                    tie: format!("v:{}>{}", x.instance_name, y.instance_name),
                });
            }
        }
    }

    nodes.sort_by(|m, n| {
        n.weight
            .partial_cmp(&m.weight)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| m.tie.cmp(&n.tie))
    });
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ActorPort, Channel, NetworkPort, PortDirection};

    fn port(dir: PortDirection, name: &str) -> ActorPort {
        ActorPort { direction: dir, name: name.into(), width: 32, open: false }
    }

    fn io(dir: PortDirection, name: &str) -> NetworkPort {
        NetworkPort { direction: dir, name: name.into(), width: 32 }
    }

    fn unit(name: &str, ty: &str) -> Actor {
        Actor::atomic(name, ty, vec![port(PortDirection::In, "in"), port(PortDirection::Out, "out")])
    }

    fn chan(src: Endpoint, sink: Endpoint) -> Channel {
        Channel { source: src, sink, fifo_depth: 1 }
    }

    /// in -> t0 -> t1 -> ... -> out with the given component types.
    fn chain(name: &str, types: &[&str]) -> DataflowNetwork {
        let mut n = DataflowNetwork::new(name);
        n.io_ports = vec![io(PortDirection::In, "in"), io(PortDirection::Out, "out")];
        for (i, ty) in types.iter().enumerate() {
            n.actors.push(unit(&format!("{name}{i}"), ty));
        }
        let mut prev = Endpoint::network("in");
        for i in 0..types.len() {
            let cur = &n.actors[i].instance_name.clone();
            n.channels.push(chan(prev.clone(), Endpoint::actor(cur, "in")));
            prev = Endpoint::actor(cur, "out");
        }
        n.channels.push(chan(prev, Endpoint::network("out")));
        n
    }

    /// Exhaustive maximum-weight consistent subset; exponential, only
    /// for cross-checking the greedy on small instances.
    fn exhaustive_best_score(a: &DataflowNetwork, b: &DataflowNetwork) -> f64 {
        let nodes = compatibility_nodes(a, b, None);
        fn go(nodes: &[Node], idx: usize, state: &mut MapState, score_v: f64, edges: f64, best: &mut f64) {
            let total = score_v + edges;
            if total > *best {
                *best = total;
            }
            if idx == nodes.len() {
                return;
            }
            // skip
            go(nodes, idx + 1, state, score_v, edges, best);
            // take if consistent
            let node = &nodes[idx];
            if state.admits(node) {
                let added_v: f64 = node
                    .implied
                    .iter()
                    .filter(|(va, _)| !state.a_to_b.contains_key(va))
                    .count() as f64;
                let saved = state.clone_snapshot();
                state.commit(node);
                let added_e = if node.edge.is_some() { EDGE_WEIGHT } else { 0.0 };
                go(nodes, idx + 1, state, score_v + added_v, edges + added_e, best);
                state.restore(saved);
            }
        }
        impl MapState {
            fn clone_snapshot(&self) -> (BTreeMap<String, String>, BTreeMap<String, String>, BTreeMap<String, String>, BTreeMap<String, String>) {
                (self.a_to_b.clone(), self.b_to_a.clone(), self.edges_a.clone(), self.edges_b.clone())
            }
            fn restore(&mut self, s: (BTreeMap<String, String>, BTreeMap<String, String>, BTreeMap<String, String>, BTreeMap<String, String>)) {
                self.a_to_b = s.0;
                self.b_to_a = s.1;
                self.edges_a = s.2;
                self.edges_b = s.3;
            }
        }
        let mut best = 0.0;
        go(&nodes, 0, &mut MapState::default(), 0.0, 0.0, &mut best);
        best
    }

    #[test]
    fn disjoint_component_types_yield_empty_correspondence() {
        let a = chain("a", &["t0", "t1"]);
        let b = chain("b", &["u0", "u1"]);
        let c = build_moreano_mapping(&a, &b, None);
        assert!(c.is_empty());
        assert_eq!(c.score, 0.0);
    }

    #[test]
    fn identical_graphs_reach_the_self_match_upper_bound() {
        let a = chain("a", &["t0", "t1", "t2"]);
        let b = {
            let mut n = chain("x", &["t0", "t1", "t2"]);
            n.name = "b".into();
            n
        };
        let c = build_moreano_mapping(&a, &b, None);
        // score = |V| * w_v + |E| * w_e with unit weights.
        let expected = a.actors.len() as f64 + a.channels.len() as f64;
        assert_eq!(c.score, expected);
        assert_eq!(c.vertex_pairs.len(), a.actors.len());
        assert_eq!(c.edge_pairs.len(), a.channels.len());
    }

    #[test]
    fn shared_middle_segment_is_covered_exactly() {
        // a: in -> p -> s0 -> s1 -> q -> out
        // b: in -> r -> s0 -> s1 -> w -> out   (shared middle s0-s1)
        let a = chain("a", &["pa", "seg0", "seg1", "qa"]);
        let b = chain("b", &["rb", "seg0", "seg1", "wb"]);
        let c = build_moreano_mapping(&a, &b, None);
        let pairs: Vec<(&str, &str)> = c
            .vertex_pairs
            .iter()
            .map(|(x, y)| (x.as_str(), y.as_str()))
            .collect();
        assert_eq!(pairs, vec![("a1", "b1"), ("a2", "b2")]);
        // Exactly the middle channel a1.out -> a2.in maps.
        assert_eq!(c.edge_pairs.len(), 1);

        // Greedy matches the exhaustive optimum on this instance.
        assert_eq!(c.score, exhaustive_best_score(&a, &b));
    }

    #[test]
    fn greedy_matches_exhaustive_on_small_instances() {
        let cases = [
            (chain("a", &["t", "t"]), chain("b", &["t", "t"])),
            (chain("a", &["t", "u", "t"]), chain("b", &["u", "t", "u"])),
            (chain("a", &["m", "n"]), chain("b", &["n", "m"])),
        ];
        for (a, b) in &cases {
            let greedy = build_moreano_mapping(a, b, None).score;
            let best = exhaustive_best_score(a, b);
            assert!(
                greedy <= best,
                "greedy {greedy} cannot exceed exhaustive {best}"
            );
            assert_eq!(greedy, best, "greedy fell short on {} vs {}", a.name, b.name);
        }
    }

    #[test]
    fn vertex_weights_bias_the_score() {
        let a = chain("a", &["big", "small"]);
        let b = chain("b", &["big", "small"]);
        let mut w = BTreeMap::new();
        w.insert("big".to_string(), 10.0);
        w.insert("small".to_string(), 0.5);
        let c = build_moreano_mapping(&a, &b, Some(&w));
        assert_eq!(c.score, 10.0 + 0.5 + 3.0);
    }
}
