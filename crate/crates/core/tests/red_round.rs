use cfe_core::graph::PortGraph;
use cfe_core::sequences::bundled;
use cfe_core::sim::{run, Scenario, TraceEvent};
use cfe_core::verify::{check_trace, Property};

fn red_rounds(g: PortGraph, starts: [usize; 2]) -> [u64; 2] {
    let s = Scenario::new(g, starts, [0, 0], bundled(6).unwrap());
    let trace = run(&s).unwrap();
    let outcome = check_trace(&trace, &s);
    assert!(outcome.passed(), "{:?}", outcome.first_failure());
    let mut red = [None, None];
    for (r, e) in trace.events() {
        if let TraceEvent::RedRound { agent, .. } = e {
            red[*agent].get_or_insert(r);
        }
    }
    red.map(|r| r.expect("red round"))
}

// Both agents woken at t = 0.

#[test]
fn no_common_neighbour_and_no_leaf_agrees_on_t_plus_4() {
    assert_eq!(red_rounds(PortGraph::path(6).unwrap(), [2, 3]), [4, 4]);
}

#[test]
fn leaf_start_agrees_on_t_plus_6() {
    assert_eq!(red_rounds(PortGraph::path(4).unwrap(), [0, 1]), [6, 6]);
    assert_eq!(red_rounds(PortGraph::path(4).unwrap(), [1, 0]), [6, 6]);
}

#[test]
fn waiting_side_without_common_neighbour_agrees_on_t_plus_5() {
    assert_eq!(red_rounds(PortGraph::path(3).unwrap(), [0, 2]), [5, 5]);
}

#[test]
fn red_round_property_is_checked() {
    assert!(Property::ALL.contains(&Property::RedRound));
}
