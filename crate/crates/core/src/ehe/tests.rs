use super::*;
use crate::expr::{parse_expr, Atom};
use crate::fixtures;
use crate::replicated::{mem_from_event, Event};
use crate::spec::{random_specification, RandomSpecConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn tmem(items: &[(u32, &str, bool)]) -> Memory {
    items.iter().map(|(t, a, v)| (Atom::timed(*t, a), Verdict::from_bool(*v))).collect()
}

// Timed atoms in test expressions are written as `a1` for `<1,a>`.
fn timed(e: &Expr) -> Expr {
    crate::expr::parse_expr_with(&e.to_string(), &|n| {
        let (ap, t) = n.split_at(n.find(|c: char| c.is_ascii_digit()).unwrap());
        Atom::timed(t.parse().unwrap(), ap)
    })
    .unwrap()
}

fn assert_timed(e: &Expr, want: &str) {
    let want = timed(&p(want));
    assert!(equivalent(e, &want).unwrap(), "{e} is not {want}");
}

#[test]
fn init_and_next() {
    let f = Arc::new(fixtures::eventually_or());
    let p0 = Ehe::init(f.clone());
    assert_eq!(p0.len(), 1);
    assert_eq!(p0.get(0, 0), Some(&Expr::top()));
    assert_eq!(p0.next(0).unwrap(), [0, 1].into());
    assert_eq!(p0.next(3), Err(EheError::UndefinedRound(3)));

    let g = Arc::new(fixtures::eventually_and());
    assert_eq!(Ehe::init(g).next(0).unwrap(), [0, 1].into());
    let absorbing = Ehe::anchored(f, 4, 1);
    assert_eq!(absorbing.next(4).unwrap(), [1].into());
}

#[test]
fn to_examples() {
    let f = Arc::new(fixtures::eventually_or());
    let p0 = Ehe::init(f);
    assert_timed(&p0.to(0, 1, Encoder::Timestamp(1)).unwrap(), "a1 || b1");
    assert_timed(&p0.to(0, 0, Encoder::Timestamp(1)).unwrap(), "!a1 && !b1");
    // Predecessors known to be unreachable contribute nothing.
    let mut dead = p0.clone();
    dead.entries.insert((0, 1), Expr::bottom());
    assert_timed(&dead.to(0, 1, Encoder::Timestamp(1)).unwrap(), "a1 || b1");
}

#[test]
fn table_of_two_rounds() {
    let f = Arc::new(fixtures::eventually_or());
    let p2 = Ehe::init(f).mov(0, 2).unwrap();
    assert_eq!(p2.len(), 5);
    assert_eq!(p2.get(0, 0), Some(&Expr::top()));
    assert_timed(p2.get(1, 0).unwrap(), "!a1 && !b1");
    assert_timed(p2.get(1, 1).unwrap(), "a1 || b1");
    assert_timed(p2.get(2, 0).unwrap(), "(!a1 && !b1) && (!a2 && !b2)");
    assert_timed(p2.get(2, 1).unwrap(), "(a1 || b1) || ((!a1 && !b1) && (a2 || b2))");
    assert_eq!(p2.mov(2, 2).unwrap(), p2);
    assert_eq!(p2.mov(5, 6).unwrap_err(), EheError::UndefinedRound(5));
}

#[test]
fn resolution_examples() {
    let f = Arc::new(fixtures::eventually_or());
    let p2 = Ehe::init(f).mov(0, 2).unwrap();
    let m = tmem(&[(1, "a", true), (1, "b", false)]);
    assert_eq!(p2.sreach(&m, 1).unwrap(), Some(1));
    assert_eq!(p2.verdict_at(&m, 1).unwrap(), Verdict::Top);
    assert_eq!(p2.sreach(&Memory::new(), 0).unwrap(), Some(0));
    assert_eq!(p2.sreach(&Memory::new(), 1).unwrap(), None);
    assert_eq!(p2.verdict_at(&Memory::new(), 1).unwrap(), Verdict::Unknown);
    assert_eq!(p2.verdict_at(&m, 0).unwrap(), Verdict::Unknown);
}

#[test]
fn reconciling_two_views() {
    let g = Arc::new(fixtures::eventually_and());
    let shared = Ehe::init(g).mov(0, 1).unwrap();
    assert_timed(shared.get(1, 0).unwrap(), "!a1 || !b1");
    assert_timed(shared.get(1, 1).unwrap(), "a1 && b1");

    let m0 = tmem(&[(1, "a", true)]);
    let m1 = tmem(&[(1, "b", false)]);
    let p0 = shared.inc(&m0);
    let p1 = shared.inc(&m1);
    assert_timed(p0.get(1, 0).unwrap(), "!b1");
    assert_timed(p0.get(1, 1).unwrap(), "b1");
    assert_eq!(p1.get(1, 0), Some(&Expr::top()));
    assert_eq!(p1.get(1, 1), Some(&Expr::bottom()));
    let both = p0.merge(&p1).unwrap();
    assert_eq!(both.sreach(&Memory::new(), 1).unwrap(), Some(0));
    assert_eq!(p0.sreach(&Memory::new(), 1).unwrap(), None);
    assert_eq!(p1.sreach(&Memory::new(), 1).unwrap(), Some(0));
}

#[test]
fn merge_examples() {
    let f = Arc::new(fixtures::eventually_or());
    let p2 = Ehe::init(f.clone()).mov(0, 2).unwrap();
    assert!(p2.merge(&p2).unwrap().equivalent_to(&p2).unwrap());
    let u = p2.merge(&Ehe::init(f)).unwrap();
    assert!(u.equivalent_to(&p2).unwrap());
    let other = Ehe::init(Arc::new(fixtures::never_decides()));
    assert_eq!(p2.merge(&other).unwrap_err(), EheError::AutomatonMismatch);
}

#[test]
fn inc_examples() {
    let f = Arc::new(fixtures::eventually_or());
    let p2 = Ehe::init(f).mov(0, 2).unwrap();
    assert!(p2.inc(&Memory::new()).equivalent_to(&p2).unwrap());
    let m = tmem(&[(1, "a", false), (2, "b", true)]);
    let once = p2.inc(&m);
    assert!(once.inc(&m).equivalent_to(&once).unwrap());
}

#[test]
fn drop_resolved_examples() {
    let f = Arc::new(fixtures::eventually_or());
    let mut p2 = Ehe::init(f.clone()).mov(0, 2).unwrap();
    let m = tmem(&[(1, "a", true), (1, "b", false)]);
    // Round 2 resolves too (q1 is absorbing), so everything collapses.
    assert_eq!(p2.drop_resolved(&m), Some(2));
    assert_eq!(p2.dump(), vec![(2, "q1".to_string(), "true".to_string())]);

    let mut p2 = Ehe::init(f.clone()).mov(0, 2).unwrap();
    let m = tmem(&[(1, "a", false), (1, "b", false)]);
    assert_eq!(p2.drop_resolved(&m), Some(1));
    assert_eq!(p2.rounds(), [1, 2].into());
    assert_eq!(p2.get(1, 0), Some(&Expr::top()));
    assert_eq!(p2.get(1, 1), None);
    assert_timed(p2.get(2, 1).unwrap(), "a2 || b2");

    let mut p2 = Ehe::init(f).mov(0, 2).unwrap();
    let before = p2.clone();
    let m = tmem(&[(1, "a", false)]);
    // Round 0 is always resolvable: nothing earlier to drop.
    assert_eq!(p2.drop_resolved(&m), Some(0));
    assert!(p2.equivalent_to(&before.inc(&m)).unwrap());
}

#[test]
fn scan_stops_at_first_final() {
    let f = Arc::new(fixtures::eventually_or());
    let p3 = Ehe::init(f).mov(0, 3).unwrap();
    let m = tmem(&[(1, "a", false), (1, "b", false), (2, "a", true)]);
    let mut w = Work::default();
    let s = p3.scan(&m, 0, Resolution::Exact, &mut w);
    assert_eq!(s.first_final, Some((2, 1, Verdict::Top)));
    assert_eq!(s.resolved, Some((2, 1)));
    assert!(w.evaluations > 0);
    let s = p3.scan(&Memory::new(), 1, Resolution::Exact, &mut w);
    assert_eq!(s, Scan::default());
}

#[test]
fn contiguous_scan_waits_for_gaps() {
    let f = Arc::new(fixtures::eventually_or());
    let p2 = Ehe::init(f).mov(0, 2).unwrap();
    // Round 1 is unknown, but `a` at round 2 settles round 2 on either path.
    let m = tmem(&[(2, "a", true)]);
    let mut w = Work::default();
    assert_eq!(p2.scan(&m, 0, Resolution::Exact, &mut w).first_final, Some((2, 1, Verdict::Top)));
    let s = p2.scan_contiguous(&m, 0, Resolution::Exact, &mut w);
    assert_eq!(s, Scan { first_final: None, resolved: Some((0, 0)) });
}

#[test]
fn stutter_copies_the_last_round() {
    let f = Arc::new(fixtures::eventually_or());
    let mut p1 = Ehe::init(f).mov(0, 1).unwrap();
    assert_eq!(p1.stutter(0), Err(EheError::UndefinedRound(1)));
    assert_eq!(p1.stutter(4), Err(EheError::UndefinedRound(4)));
    p1.stutter(1).unwrap();
    assert_eq!(p1.end(), Some(2));
    assert_eq!(p1.at(2).collect::<Vec<_>>(), p1.at(1).collect::<Vec<_>>());
    let m = tmem(&[(1, "a", false), (1, "b", true)]);
    assert_eq!(p1.sreach(&m, 2).unwrap(), Some(1));
}

#[test]
fn lookup_resolution_is_weaker() {
    let f = Arc::new(fixtures::eventually_or());
    let p1 = Ehe::init(f).mov_with(0, 1, Reduction::Fold, &mut Work::default()).unwrap();
    let m = tmem(&[(1, "a", true)]);
    let mut w = Work::default();
    assert_eq!(p1.sreach_with(&m, 1, Resolution::Lookup, &mut w).unwrap(), Some(1));
    assert_eq!(w.simplifications, 0);
    let full = tmem(&[(1, "a", false), (1, "b", false)]);
    assert_eq!(p1.sreach_with(&full, 1, Resolution::Lookup, &mut w).unwrap(), Some(0));
    assert_eq!(w.simplifications, 0);
}

/// Random spec, a random complete trace over its propositions, and the
/// per-round timestamped memories merged into one.
fn instance(seed: u64, states: usize, aps: usize, len: u32) -> (Arc<Specification>, Vec<Event>, Memory) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..aps).map(|i| format!("p{i}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let spec = Arc::new(random_specification(&mut rng, &RandomSpecConfig::new(states, &names)));
    let mut global = Vec::new();
    let mut m = Memory::new();
    for t in 1..=len {
        let e = Event::from_observations(names.iter().map(|a| (*a, Verdict::from_bool(rng.random())))).unwrap();
        m = m.merge(&mem_from_event(&e, Encoder::Timestamp(t)));
        global.push(e);
    }
    (spec, global, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_tracks_the_run(seed in any::<u64>(), states in 1usize..6, aps in 1usize..4, len in 0u32..8) {
        let (spec, global, m) = instance(seed, states, aps, len);
        let p = Ehe::init(spec.clone()).mov(0, len).unwrap();
        for k in 0..=len {
            prop_assert_eq!(p.reached(&m, k), vec![spec.run(&global[..k as usize])]);
        }
    }

    #[test]
    fn rebased_encoding_tracks_the_run(seed in any::<u64>(), states in 1usize..6, len in 1u32..8) {
        let (spec, global, m) = instance(seed, states, 2, len);
        let mut p = Ehe::init(spec.clone());
        for t in 1..=len {
            p.extend_to(t, Reduction::Bounded, &mut Work::default());
            let k = p.drop_resolved(&m).unwrap();
            prop_assert_eq!(k, t);
            prop_assert_eq!(p.len(), 1);
            prop_assert_eq!(p.sreach(&Memory::new(), t).unwrap(), Some(spec.run(&global[..t as usize])));
        }
    }

    #[test]
    fn inc_makes_memory_obsolete(seed in any::<u64>(), states in 1usize..6, len in 0u32..5, keep in any::<u32>()) {
        let (spec, _, m) = instance(seed, states, 3, len);
        let partial: Memory = m.iter().enumerate().filter(|(i, _)| keep >> (i % 32) & 1 == 1).map(|(_, (a, v))| (a.clone(), *v)).collect();
        let p = Ehe::init(spec).mov(0, len).unwrap();
        let q = p.inc(&partial);
        for ((t, s, e), (_, _, f)) in p.entries().zip(q.entries()) {
            prop_assert_eq!(crate::expr::eval(e, &partial), crate::expr::eval(f, &Memory::new()), "entry ({}, {})", t, s);
        }
    }
}
