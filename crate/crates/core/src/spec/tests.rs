use super::*;
use crate::fixtures;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ev(items: &[(&str, bool)]) -> Event {
    let mut e = Event::new();
    for (a, v) in items {
        e.observe(*a, *v).unwrap();
    }
    e
}

#[test]
fn validate_examples() {
    assert!(fixtures::eventually_or().validate().unwrap().is_valid());
    let overlap = Specification::build(
        &[("q0", Verdict::Unknown), ("q1", Verdict::Top), ("q2", Verdict::Bottom)],
        "q0",
        &[("q0", "q1", "a"), ("q0", "q2", "a && b"), ("q0", "q0", "!a"), ("q1", "q1", "true"), ("q2", "q2", "true")],
    )
    .unwrap();
    let r = overlap.validate().unwrap();
    assert_eq!(r.determinism, vec![(0, 1)]);
    assert!(r.completeness.is_empty());

    let partial = Specification::build(&[("q0", Verdict::Unknown)], "q0", &[("q0", "q0", "a")]).unwrap();
    let r = partial.validate().unwrap();
    assert_eq!(r.completeness, vec![0]);
    assert!(r.determinism.is_empty());
}

#[test]
fn validate_threshold() {
    let label = (0..30).map(|i| format!("x{i}")).collect::<Vec<_>>().join(" || ");
    let s = Specification::build(&[("q0", Verdict::Unknown)], "q0", &[("q0", "q0", &label)]).unwrap();
    assert!(matches!(s.validate(), Err(SpecError::Expr(ExprError::ThresholdExceeded { .. }))));
}

#[test]
fn normalize_examples() {
    let s = Specification::build(
        &[("q0", Verdict::Unknown), ("q1", Verdict::Top)],
        "q0",
        &[("q0", "q1", "a"), ("q0", "q1", "b"), ("q0", "q0", "!a && !b"), ("q1", "q1", "true"), ("q1", "q1", "true")],
    )
    .unwrap();
    let n = s.normalize();
    assert_eq!(n.transitions().len(), 3);
    let t = n.outgoing(0).find(|t| t.to == 1).unwrap();
    assert!(equivalent(&t.label, &expr::parse_expr("a || b").unwrap()).unwrap());
    assert!(n.validate().unwrap().is_valid());

    let f = fixtures::eventually_or();
    assert_eq!(f.normalize(), f);
}

#[test]
fn step_and_run_examples() {
    let f = fixtures::eventually_or();
    assert_eq!(f.step(0, &ev(&[("a", true), ("b", false)])), Step { state: 1, stuck: false });
    assert_eq!(f.step(1, &Event::new()), Step { state: 1, stuck: false });
    assert_eq!(f.step(0, &ev(&[("a", false), ("b", false)])).state, 0);
    // A projection that cannot settle any label waits in place.
    assert_eq!(f.step(0, &ev(&[("a", false)])), Step { state: 0, stuck: true });

    assert_eq!(f.run(&[]), f.initial());
    assert_eq!(f.run(&[ev(&[("a", true), ("b", false)])]), 1);
    let g = fixtures::eventually_and();
    assert_eq!(g.run(&[ev(&[("a", true), ("b", false)])]), 0);
}

#[test]
fn reconstruct_examples() {
    let tr = fixtures::two_round_trace();
    let global = tr.reconstruct_global().unwrap();
    assert_eq!(global, vec![ev(&[("a", true), ("b", true)]), ev(&[("a", true), ("b", false)])]);
    assert!(DecentralizedTrace::new(0).reconstruct_global().unwrap().is_empty());

    let solo = fixtures::trace(&[(1, "A", "a", true), (2, "A", "a", false)]);
    assert_eq!(solo.reconstruct_global().unwrap(), vec![ev(&[("a", true)]), ev(&[("a", false)])]);

    let clash = fixtures::trace(&[(1, "A", "a", true), (2, "B", "a", true)]);
    assert!(matches!(clash.reconstruct_global(), Err(ReplicatedError::ConflictingObservation { .. })));
}

#[test]
fn delegated_example() {
    let d = fixtures::delegated_eventually();
    assert_eq!(decentralized_run(&d, &fixtures::delegated_trace()).unwrap(), Verdict::Top);
    assert_eq!(decentralized_run(&d, &DecentralizedTrace::new(0)).unwrap(), Verdict::Unknown);
    // b0 false in round 1 and a0 never true: m1 settles on ⊥ from round 1,
    // so m0 only learns ⊤ when the round-2 instance of m1 reports.
    let one = fixtures::trace(&[(1, "c0", "a0", false), (1, "c1", "b0", false)]);
    assert_eq!(decentralized_run(&d, &one).unwrap(), Verdict::Unknown);
}

#[test]
fn decentralized_rejects_bad_ownership() {
    let mut file = fixtures::delegated_eventually().to_file();
    file.ap_owner.insert("a0".into(), "c1".into());
    assert!(matches!(DecentralizedSpec::from_file(&file), Err(SpecError::InvalidMonitor { .. })));

    let mut file = fixtures::delegated_eventually().to_file();
    file.ap_owner.insert("m1".into(), "c1".into());
    assert!(matches!(DecentralizedSpec::from_file(&file), Err(SpecError::NameCollision(_))));

    let mut file = fixtures::delegated_eventually().to_file();
    file.root = "nope".into();
    assert!(matches!(DecentralizedSpec::from_file(&file), Err(SpecError::UnknownMonitor(_))));
}

#[test]
fn cyclic_reference_is_reported() {
    let text = r#"{
      "monitors": {
        "m0": {"states":["q0","q1"],"initial":"q0","verdicts":{"q1":"top"},
               "transitions":[{"from":"q0","to":"q1","label":"m1"},{"from":"q0","to":"q0","label":"!m1"},
                              {"from":"q1","to":"q1","label":"true"}]},
        "m1": {"states":["q0","q1"],"initial":"q0","verdicts":{"q1":"top"},
               "transitions":[{"from":"q0","to":"q1","label":"m0"},{"from":"q0","to":"q0","label":"!m0"},
                              {"from":"q1","to":"q1","label":"true"}]}
      },
      "components": ["c0"],
      "attach": {"m0":"c0","m1":"c0"},
      "root": "m0",
      "ap_owner": {"x":"c0"}
    }"#;
    let d = DecentralizedSpec::from_json(text).unwrap();
    let tr = fixtures::trace(&[(1, "c0", "x", true)]);
    assert!(matches!(decentralized_run(&d, &tr), Err(SpecError::RoundBudgetExceeded(_))));
}

#[test]
fn json_round_trip() {
    let f = fixtures::eventually_or();
    assert_eq!(Specification::from_json(&f.to_json()).unwrap(), f);
    let d = fixtures::delegated_eventually();
    let text = serde_json::to_string(&d.to_file()).unwrap();
    assert_eq!(DecentralizedSpec::from_json(&text).unwrap(), d);
    assert!(matches!(Specification::from_json("{"), Err(SpecError::Json(_))));
    let bad = r#"{"states":["q0"],"initial":"q0","transitions":[{"from":"q0","to":"q0","label":"a &&"}]}"#;
    assert!(matches!(Specification::from_json(bad), Err(SpecError::Label { .. })));
}

#[test]
fn centralized_case_on_examples() {
    let f = fixtures::eventually_or();
    let d = DecentralizedSpec::centralized(f.clone(), "A").unwrap();
    let traces = enumerate_traces(&[("A".to_string(), vec!["a".to_string(), "b".to_string()])].into(), 3);
    assert_eq!(traces.len(), 4 + 16 + 64);
    for tr in &traces {
        let want = f.verdict(f.run(&tr.reconstruct_global().unwrap()));
        assert_eq!(decentralized_run(&d, tr).unwrap(), want);
    }
}

#[test]
fn disagreement_oracle() {
    let or = DecentralizedSpec::centralized(fixtures::eventually_or(), "A").unwrap();
    let and = DecentralizedSpec::centralized(fixtures::eventually_and(), "A").unwrap();
    let traces = enumerate_traces(&[("A".to_string(), vec!["a".to_string(), "b".to_string()])].into(), 2);
    let tr = first_disagreement(&or, &and, &traces).unwrap().unwrap();
    assert_eq!(tr.len(), 1);
    assert!(first_disagreement(&or, &or, &traces).unwrap().is_none());
}

#[test]
fn random_specs_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..8 {
        let cfg = RandomSpecConfig::new(n, &["a", "b", "c"]);
        let s = random_specification(&mut rng, &cfg);
        assert_eq!(s.num_states(), n);
        assert!(s.validate().unwrap().is_valid(), "{s:?}");
    }
}

fn arb_spec() -> impl Strategy<Value = Specification> {
    (1usize..6, 0usize..4, any::<u64>()).prop_map(|(n, k, seed)| {
        let aps: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
        let aps: Vec<&str> = aps.iter().map(String::as_str).collect();
        random_specification(&mut ChaCha8Rng::seed_from_u64(seed), &RandomSpecConfig::new(n, &aps))
    })
}

proptest! {
    #[test]
    fn step_selects_at_most_one_label(s in arb_spec(), bits in any::<u8>()) {
        let aps: Vec<Atom> = s.label_atoms().into_iter().collect();
        let evt = Event::from_observations(
            aps.iter().enumerate().map(|(i, a)| (a.name().to_string(), Verdict::from_bool(bits >> i & 1 == 1))),
        )
        .unwrap();
        let m = mem_from_event(&evt, Encoder::Identity);
        for q in s.states() {
            let hits: BTreeSet<StateId> =
                s.outgoing(q).filter(|t| eval(&t.label, &m) == Verdict::Top).map(|t| t.to).collect();
            prop_assert!(hits.len() <= 1);
            if !evt.is_empty() {
                prop_assert_eq!(hits.len(), 1);
                prop_assert!(!s.step(q, &evt).stuck);
            }
        }
    }

    #[test]
    fn centralized_special_case(s in arb_spec(), len in 0u32..6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aps: Vec<String> = s.label_atoms().iter().map(|a| a.name().to_string()).collect();
        let mut tr = DecentralizedTrace::new(len);
        for t in 1..=len {
            let evt = Event::from_observations(aps.iter().map(|a| (a.clone(), Verdict::from_bool(rng.random())))).unwrap();
            tr.set(t, "A", evt);
        }
        let want = s.verdict(s.run(&tr.reconstruct_global().unwrap()));
        let d = DecentralizedSpec::centralized(s, "A").unwrap();
        prop_assert_eq!(decentralized_run(&d, &tr).unwrap(), want);
    }
}
