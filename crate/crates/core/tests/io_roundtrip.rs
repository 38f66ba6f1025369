use proptest::prelude::*;

use wdnd_core::io::{write_instance, write_solution};
use wdnd_core::{parse_instance, synth, Network, Solution};

fn arb_synthetic() -> impl Strategy<Value = Network> {
    let head = 30.0..90.0f64;
    let len = 50.0..500.0f64;
    let demand = 0.0..0.004f64;
    prop_oneof![
        (head.clone(), 3usize..8, len.clone(), demand.clone()).prop_map(|(h, n, l, q)| synth::ring(h, n, l, q)),
        (head.clone(), 1usize..4, 2usize..4, len.clone(), demand.clone())
            .prop_map(|(h, r, c, l, q)| synth::grid(h, r, c, l, q)),
        (head, prop::collection::vec((len.clone(), 0.0..5.0f64, demand), 1..6)).prop_map(|(h, rows)| {
            let lengths: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let elevations: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let demands: Vec<f64> = rows.iter().map(|r| r.2).collect();
            synth::diurnal_path(h, &lengths, &elevations, &demands)
        }),
    ]
}

/// Nodes by label, pipes with endpoint labels: ids follow file order, which
/// a writer is free to change.
fn same_network(a: &Network, b: &Network) -> Result<(), TestCaseError> {
    let nodes = |n: &Network| {
        let mut v: Vec<_> = n.nodes().to_vec();
        v.sort_by(|x, y| x.label.cmp(&y.label));
        v
    };
    let pipes = |n: &Network| {
        n.pipes()
            .iter()
            .map(|p| {
                (
                    p.label.clone(),
                    n.node(p.from).label.clone(),
                    n.node(p.to).label.clone(),
                    p.length,
                )
            })
            .collect::<Vec<_>>()
    };
    prop_assert_eq!(nodes(a), nodes(b));
    prop_assert_eq!(pipes(a), pipes(b));
    prop_assert_eq!(a.demand_model(), b.demand_model());
    for j in a.junctions() {
        let k = b.node_id(&a.node(j).label).unwrap();
        for period in 1..=a.period_count() {
            prop_assert_eq!(a.demand_at(j, period).unwrap(), b.demand_at(k, period).unwrap());
        }
    }
    Ok(())
}

fn written(net: &Network) -> String {
    let mut buf = Vec::new();
    write_instance(net, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instances_survive_a_round_trip(net in arb_synthetic()) {
        let text = written(&net);
        let back = parse_instance(&text).unwrap();
        same_network(&net, &back)?;
        prop_assert_eq!(written(&back), text);
    }

    #[test]
    fn solutions_survive_a_round_trip(net in arb_synthetic(), seed in prop::collection::vec(1usize..17, 64)) {
        let sol = Solution::new(seed[..net.pipe_count()].to_vec());
        let mut buf = Vec::new();
        write_solution(&sol, &net, &mut buf).unwrap();
        let back = wdnd_core::io::parse_solution(std::str::from_utf8(&buf).unwrap(), &net).unwrap();
        prop_assert_eq!(back, sol);
    }

    #[test]
    fn damaged_text_never_panics(
        net in arb_synthetic(),
        cuts in prop::collection::vec((any::<prop::sample::Index>(), 0usize..40, "[ -~\n]{0,12}"), 1..5),
    ) {
        let mut text = written(&net).into_bytes();
        for (at, span, insert) in cuts {
            let start = at.index(text.len() + 1);
            let end = (start + span).min(text.len());
            text.splice(start..end, insert.into_bytes());
        }
        let _ = parse_instance(&String::from_utf8_lossy(&text));
    }
}

#[test]
fn oracle_fixtures_round_trip() {
    for (name, net) in synth::oracle_fixtures() {
        let back = parse_instance(&written(&net)).unwrap();
        same_network(&net, &back).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
