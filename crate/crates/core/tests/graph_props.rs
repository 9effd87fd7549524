use cfe_core::graph::{parse_graph, write_graph, PortGraph};
use proptest::prelude::*;

proptest! {
    #[test]
    fn text_format_round_trips(k in 3usize..9, seed in any::<u64>()) {
        let g = PortGraph::random(k, seed).unwrap();
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(write_graph(&back), write_graph(&g));
    }

    #[test]
    fn ports_are_consistent(k in 3usize..9, seed in any::<u64>()) {
        let g = PortGraph::random(k, seed).unwrap();
        for u in 0..g.node_count() {
            for (p, l) in g.links(u).iter().enumerate() {
                let there = g.link(l.node, l.back_port).unwrap();
                prop_assert_eq!((there.node, there.back_port), (u, p));
            }
        }
        prop_assert!(g.distances_from(0).iter().all(|&d| d < k));
    }
}
