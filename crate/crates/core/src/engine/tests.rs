use super::*;
use crate::fixtures;
use crate::spec::{decentralized_run, random_monitorable_specification, RandomSpecConfig};
use crate::synthesis::{parse_ltl, random_ltl};
use crate::traces::{generate, Distribution, TraceGenConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ab_system() -> System {
    System::complete([("a".to_string(), "A".to_string()), ("b".to_string(), "B".to_string())].into())
}

fn run_with(alg: Algorithm, input: &SpecInput, sys: &System, tr: &DecentralizedTrace) -> SimRun {
    simulate(&SimConfig::new(alg), input, sys, tr).unwrap()
}

fn oracle(spec: &Specification, tr: &DecentralizedTrace) -> Verdict {
    spec.verdict(spec.run(&tr.reconstruct_global().unwrap()))
}

fn random_trace(components: usize, length: u32, seed: u64) -> DecentralizedTrace {
    let cfg = TraceGenConfig {
        components,
        aps_per_component: 1,
        length,
        distribution: Distribution::Binomial { n: 100, p: 0.3 },
        seed,
    };
    generate(&cfg).unwrap()
}

#[test]
fn setup_shapes() {
    let own: BTreeMap<String, String> =
        [("a0", "A"), ("b0", "B"), ("c0", "C"), ("d0", "D")].iter().map(|(a, c)| (a.to_string(), c.to_string())).collect();
    let spec = SpecInput::Automaton(fixtures::eventually_or());
    let three = System::complete(own.iter().take(3).map(|(a, c)| (a.clone(), c.clone())).collect());
    let s = setup(&SimConfig::new(Algorithm::Orch), &spec, &three).unwrap();
    assert_eq!(s.monitor_names().count(), 3);
    assert_eq!(s.network.graph.edges.len(), 2);
    assert!(s.network.graph.edges.iter().all(|(_, to)| to == "A"));

    let four = System::complete(own.clone());
    let s = setup(&SimConfig::new(Algorithm::Migr), &spec, &four).unwrap();
    assert_eq!(s.network.graph, Graph::complete(["A", "B", "C", "D"]));
    assert_eq!(s.active().len(), 1);

    let f = SpecInput::Formula(parse_ltl("G (a0 U X a0)").unwrap());
    let s = setup(&SimConfig::new(Algorithm::Chor), &f, &four).unwrap();
    assert_eq!(s.monitor_names().count(), 1);
    assert!(s.network.graph.edges.is_empty());

    assert!(matches!(setup(&SimConfig::new(Algorithm::Chor), &spec, &four), Err(EngineError::NeedsFormula)));
    let mut chain = four.clone();
    chain.graph = Graph::with_nodes(["A", "B", "C", "D"]);
    chain.graph.add_edge("A", "B");
    assert!(matches!(setup(&SimConfig::new(Algorithm::Migr), &spec, &chain), Err(EngineError::IncompatiblePlacement)));
    let mut cfg = SimConfig::new(Algorithm::Orch);
    cfg.comm_delay = 0;
    assert!(matches!(setup(&cfg, &spec, &four), Err(EngineError::InvalidConfig(_))));
}

#[test]
fn orchestration_hand_run() {
    // a holds at round 1 on A; the main monitor decides once B's round-1
    // observation arrives.
    let r = run_with(Algorithm::Orch, &SpecInput::Automaton(fixtures::eventually_or()), &ab_system(), &fixtures::two_round_trace());
    assert_eq!(r.verdict, Verdict::Top);
    assert_eq!(r.stop_round, 2);
    assert_eq!(r.metrics.messages_per_round(), vec![1, 1]);
    assert_eq!(r.report.s_crit, 0.0);
    // B forwards `<t,b>` each round.
    assert_eq!(r.metrics.total_bytes(), 12);
}

#[test]
fn trivially_true_at_first_round() {
    let spec = Specification::build(&[("q0", Verdict::Top)], "q0", &[("q0", "q0", "true")]).unwrap();
    for alg in [Algorithm::Orch, Algorithm::Migr, Algorithm::Migrr] {
        let r = run_with(alg, &SpecInput::Automaton(spec.clone()), &ab_system(), &fixtures::two_round_trace());
        assert_eq!((r.verdict, r.stop_round), (Verdict::Top, 1), "{alg}");
    }
    let r = run_with(Algorithm::Chor, &SpecInput::Formula(parse_ltl("a || true").unwrap()), &ab_system(), &fixtures::two_round_trace());
    assert_eq!(r.verdict, Verdict::Top);
}

#[test]
fn undecided_runs_time_out() {
    let tr = fixtures::two_round_trace();
    for alg in [Algorithm::Orch, Algorithm::Migr, Algorithm::Migrr] {
        let r = run_with(alg, &SpecInput::Automaton(fixtures::never_decides()), &ab_system(), &tr);
        assert_eq!((r.verdict, r.stop_round), (Verdict::Unknown, 7), "{alg}");
    }
    let r = run_with(Algorithm::Chor, &SpecInput::Formula(parse_ltl("G F a").unwrap()), &ab_system(), &tr);
    assert_eq!((r.verdict, r.stop_round), (Verdict::Unknown, 7));
    let empty = DecentralizedTrace::new(0);
    let r = run_with(Algorithm::Orch, &SpecInput::Automaton(fixtures::eventually_or()), &ab_system(), &empty);
    assert_eq!((r.verdict, r.stop_round), (Verdict::Unknown, 5));
}

#[test]
fn migration_follows_the_obligation() {
    // `F b` with b on B: the encoding starts on B and never leaves.
    let f = SpecInput::Formula(parse_ltl("F b").unwrap());
    let tr = fixtures::trace(&[(1, "A", "a", true), (1, "B", "b", false), (2, "A", "a", true), (2, "B", "b", true)]);
    let r = run_with(Algorithm::Migr, &f, &ab_system(), &tr);
    assert_eq!((r.verdict, r.stop_round), (Verdict::Top, 2));
    assert_eq!(r.metrics.total_messages(), 0);
    let r = run_with(Algorithm::Migrr, &f, &ab_system(), &tr);
    assert_eq!(r.verdict, Verdict::Top);
    assert!(r.metrics.total_messages() > 0);
    assert!(r.metrics.active.iter().all(|n| *n <= 1));
}

#[test]
fn choreography_two_monitors() {
    let own: BTreeMap<String, String> = [("a0", "c0"), ("b0", "c1")].iter().map(|(a, c)| (a.to_string(), c.to_string())).collect();
    let sys = System::complete(own);
    let f = SpecInput::Formula(parse_ltl("F (a0 || b0)").unwrap());
    let tr = fixtures::delegated_trace();
    let r = run_with(Algorithm::Chor, &f, &sys, &tr);
    assert_eq!(r.verdict, Verdict::Top);
    // b0 holds at round 2; the child reports at 2 and the root reads it at 3.
    assert_eq!(r.stop_round, 3);
    assert_eq!(r.metrics.message_sizes["verdict"].len(), 1);
}

#[test]
fn runs_are_deterministic() {
    let tr = random_trace(3, 20, 4);
    let sys = System::from_trace(&tr).unwrap();
    let f = SpecInput::Formula(parse_ltl("F (a0 && X b0) || G c0").unwrap());
    for alg in Algorithm::ALL {
        let a = run_with(alg, &f, &sys, &tr);
        let b = run_with(alg, &f, &sys, &tr);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn several_active_monitors() {
    let tr = random_trace(4, 15, 9);
    let sys = System::from_trace(&tr).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cfg = RandomSpecConfig::new(5, &["a0", "b0", "c0", "d0"]);
    cfg.absorbing_finals = true;
    let spec = random_monitorable_specification(&mut rng, &cfg);
    let mut sim = SimConfig::new(Algorithm::Migr);
    sim.initial_active = 2;
    let r = simulate(&sim, &SpecInput::Automaton(spec.clone()), &sys, &tr).unwrap();
    assert!(r.metrics.active.iter().all(|n| *n <= 2));
    if r.verdict.is_final() {
        assert_eq!(r.verdict, oracle(&spec, &tr));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centralized_algorithms_agree(seed in any::<u64>(), comps in 2usize..4, len in 1u32..12, states in 2usize..6) {
        let tr = random_trace(comps, len, seed);
        let sys = System::from_trace(&tr).unwrap();
        let aps: Vec<String> = sys.ap_owner.keys().cloned().collect();
        let aps: Vec<&str> = aps.iter().map(String::as_str).collect();
        let mut cfg = RandomSpecConfig::new(states, &aps);
        cfg.absorbing_finals = true;
        let spec = random_monitorable_specification(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), &cfg);
        let want = oracle(&spec, &tr);
        for alg in [Algorithm::Orch, Algorithm::Migr, Algorithm::Migrr] {
            let r = run_with(alg, &SpecInput::Automaton(spec.clone()), &sys, &tr);
            prop_assert_eq!(r.verdict, want, "{}", alg);
            for s in &r.metrics.rebases {
                prop_assert!(s.pending_entries <= s.delay as usize * s.states);
            }
        }
    }

    #[test]
    fn choreography_agrees(seed in any::<u64>(), comps in 2usize..4, len in 1u32..10, ops in 1usize..4) {
        let tr = random_trace(comps, len, seed);
        let sys = System::from_trace(&tr).unwrap();
        let aps: Vec<String> = sys.ap_owner.keys().cloned().collect();
        let f = random_ltl(&mut ChaCha8Rng::seed_from_u64(seed), &aps, ops);
        let (_, d) = choreography(&f, &sys.ap_owner).unwrap();
        let want = decentralized_run(&d, &tr).unwrap();
        let r = run_with(Algorithm::Chor, &SpecInput::Formula(f.clone()), &sys, &tr);
        prop_assert_eq!(r.verdict, want, "{}", f);
    }
}

