//! Round-based simulation of decentralized monitoring.
//!
//! Every round, messages sent `comm_delay` rounds earlier are delivered, each
//! monitor reads its component's event and runs its round function, and the
//! outgoing messages are queued. Monitors only interact through messages.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{compatible, Assignment, Graph};
use crate::ehe::{Ehe, Reduction, Resolution};
use crate::expr::{atoms_of, encode, eval, Atom, Encoder, Verdict, Work};
use crate::metrics::{summarize, MetricsRecord, Payload, RebaseSample, Report, RoundStats, SizeModel};
use crate::replicated::{mem_from_event, Event, Memory, ReplicatedError};
use crate::spec::{DecentralizedSpec, DecentralizedTrace, Specification, StateId};
use crate::synthesis::{decentralize, net_chor, synthesize, Ltl, MonitorTree, SynthesisError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("monitor network cannot be placed on the system graph")]
    IncompatiblePlacement,
    #[error("choreography needs a formula")]
    NeedsFormula,
    #[error("the system has no components")]
    NoComponents,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Trace(#[from] ReplicatedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Orch,
    Migr,
    /// Migration that always moves on to the next component.
    Migrr,
    Chor,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Orch, Algorithm::Migr, Algorithm::Migrr, Algorithm::Chor];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Orch => "ORCH",
            Algorithm::Migr => "MIGR",
            Algorithm::Migrr => "MIGRR",
            Algorithm::Chor => "CHOR",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "ORCH" => Ok(Algorithm::Orch),
            "MIGR" => Ok(Algorithm::Migr),
            "MIGRR" => Ok(Algorithm::Migrr),
            "CHOR" => Ok(Algorithm::Chor),
            _ => Err(format!("unknown algorithm {s:?} (expected ORCH, MIGR, MIGRR or CHOR)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub algorithm: Algorithm,
    #[serde(default = "one")]
    pub comm_delay: u32,
    #[serde(default = "one_usize")]
    pub initial_active: usize,
    #[serde(default = "five")]
    pub timeout_slack: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub size: SizeModel,
}

fn one() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

fn five() -> u32 {
    5
}

impl SimConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SimConfig { algorithm, comm_delay: 1, initial_active: 1, timeout_slack: 5, seed: 0, size: SizeModel::default() }
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.comm_delay == 0 {
            return Err(EngineError::InvalidConfig("comm_delay must be at least 1".into()));
        }
        if self.initial_active == 0 {
            return Err(EngineError::InvalidConfig("initial_active must be at least 1".into()));
        }
        Ok(())
    }
}

/// What is monitored: an automaton over the system's propositions, or a
/// formula (synthesized centrally, or split for choreography).
#[derive(Debug, Clone)]
pub enum SpecInput {
    Automaton(Specification),
    Formula(Ltl),
}

/// Components, their communication graph and who observes what.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub graph: Graph,
    pub ap_owner: BTreeMap<String, String>,
}

impl System {
    /// Fully connected system over the owners' components.
    pub fn complete(ap_owner: BTreeMap<String, String>) -> System {
        System { graph: Graph::complete(ap_owner.values().cloned()), ap_owner }
    }

    pub fn from_trace(tr: &DecentralizedTrace) -> Result<System, EngineError> {
        Ok(System::complete(tr.ap_owner()?))
    }

    pub fn components(&self) -> impl Iterator<Item = &String> {
        self.graph.nodes.iter()
    }
}

/// A message in flight.
#[derive(Debug, Clone)]
pub struct Message {
    pub from: String,
    pub to: String,
    pub sent_at: u32,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub graph: Graph,
    pub placement: Assignment,
}

#[derive(Debug, Clone)]
struct MainState {
    t_kn: u32,
    mem: Memory,
    ehe: Ehe,
    /// Own observations, released after the same delay as forwarded ones.
    own: VecDeque<(u32, Memory)>,
}

#[derive(Debug, Clone)]
struct MigrState {
    mem: Memory,
    ehe: Option<Ehe>,
    round_robin: bool,
}

#[derive(Debug, Clone)]
struct ChorState {
    spec: Arc<Specification>,
    refs: BTreeSet<String>,
    corefs: BTreeSet<String>,
    t_mon: u32,
    mem: Memory,
    ehe: Ehe,
    kill: BTreeSet<String>,
    /// References whose instance ended the trace without a final verdict.
    settled: BTreeSet<(u32, String)>,
    respawn: bool,
    root: bool,
    done: bool,
}

#[derive(Debug, Clone)]
enum Role {
    Main(MainState),
    Forwarder { main: String },
    Migration(MigrState),
    Choreography(ChorState),
}

#[derive(Debug, Clone)]
struct Monitor {
    component: String,
    role: Role,
}

impl Monitor {
    fn holds_encoding(&self) -> bool {
        match &self.role {
            Role::Main(_) => true,
            Role::Forwarder { .. } => false,
            Role::Migration(s) => s.ehe.is_some(),
            Role::Choreography(s) => !s.done,
        }
    }
}

/// Monitors, where they run and how they are connected.
#[derive(Debug, Clone)]
pub struct Setup {
    pub network: Network,
    /// The split formula and its decentralized specification (choreography).
    pub choreography: Option<(MonitorTree, DecentralizedSpec)>,
    monitors: BTreeMap<String, Monitor>,
}

impl Setup {
    pub fn monitor_names(&self) -> impl Iterator<Item = &String> {
        self.monitors.keys()
    }

    /// Monitors holding an encoding, i.e. able to emit a verdict.
    pub fn active(&self) -> BTreeSet<String> {
        self.monitors.iter().filter(|(_, m)| m.holds_encoding()).map(|(n, _)| n.clone()).collect()
    }
}

/// Splits the formula over the components and synthesizes one automaton per
/// part.
pub fn choreography(f: &Ltl, owner: &BTreeMap<String, String>) -> Result<(MonitorTree, DecentralizedSpec), EngineError> {
    let tree = net_chor(f, owner)?;
    let d = decentralize(&tree, owner)?;
    Ok((tree, d))
}

fn centralized(input: &SpecInput) -> Result<Arc<Specification>, EngineError> {
    Ok(Arc::new(match input {
        SpecInput::Automaton(s) => s.clone(),
        SpecInput::Formula(f) => synthesize(f)?,
    }))
}

/// Components in order of the earliest pending atom they observe, after one
/// step from the initial state; the rest follow by name.
fn activation_order(spec: &Arc<Specification>, system: &System) -> Vec<String> {
    let p = Ehe::init(spec.clone()).mov(0, 1).expect("round 0 is encoded");
    let mut atoms: BTreeSet<Atom> = BTreeSet::new();
    for (_, _, e) in p.entries() {
        atoms.extend(atoms_of(e));
    }
    let mut order: Vec<String> = Vec::new();
    for a in atoms {
        if let Some(c) = system.ap_owner.get(a.name()) {
            if system.graph.nodes.contains(c) && !order.contains(c) {
                order.push(c.clone());
            }
        }
    }
    for c in system.components() {
        if !order.contains(c) {
            order.push(c.clone());
        }
    }
    order
}

pub fn setup(cfg: &SimConfig, input: &SpecInput, system: &System) -> Result<Setup, EngineError> {
    cfg.check()?;
    let comps: Vec<String> = system.components().cloned().collect();
    if comps.is_empty() {
        return Err(EngineError::NoComponents);
    }
    let mut monitors = BTreeMap::new();
    let mut graph = Graph::with_nodes(comps.iter().cloned());
    let mut placement: Assignment = comps.iter().map(|c| (c.clone(), c.clone())).collect();
    let mut chor = None;
    match cfg.algorithm {
        Algorithm::Orch => {
            let spec = centralized(input)?;
            let main = comps[0].clone();
            for c in &comps {
                let role = if *c == main {
                    Role::Main(MainState { t_kn: 0, mem: Memory::new(), ehe: Ehe::init(spec.clone()), own: VecDeque::new() })
                } else {
                    graph.add_edge(c, &main);
                    Role::Forwarder { main: main.clone() }
                };
                monitors.insert(c.clone(), Monitor { component: c.clone(), role });
            }
        }
        Algorithm::Migr | Algorithm::Migrr => {
            let spec = centralized(input)?;
            graph = Graph::complete(comps.iter().cloned());
            let first: BTreeSet<String> = activation_order(&spec, system).into_iter().take(cfg.initial_active).collect();
            for c in &comps {
                let ehe = first.contains(c).then(|| Ehe::init(spec.clone()));
                let role = Role::Migration(MigrState {
                    mem: Memory::new(),
                    ehe,
                    round_robin: cfg.algorithm == Algorithm::Migrr,
                });
                monitors.insert(c.clone(), Monitor { component: c.clone(), role });
            }
        }
        Algorithm::Chor => {
            let SpecInput::Formula(f) = input else {
                return Err(EngineError::NeedsFormula);
            };
            let (tree, d) = choreography(f, &system.ap_owner)?;
            graph = tree.network();
            placement = tree.placement();
            for m in tree.monitors() {
                let spec = Arc::new(d.monitor(&m.id).expect("one automaton per node").clone());
                let root = m.id == tree.root.id;
                let q0 = spec.initial();
                let role = Role::Choreography(ChorState {
                    ehe: Ehe::anchored(spec.clone(), 0, q0),
                    spec,
                    refs: tree.refs(&m.id),
                    corefs: tree.corefs(&m.id),
                    t_mon: 1,
                    mem: Memory::new(),
                    kill: BTreeSet::new(),
                    settled: BTreeSet::new(),
                    respawn: !root,
                    root,
                    done: false,
                });
                monitors.insert(m.id.clone(), Monitor { component: m.component.clone(), role });
            }
            chor = Some((tree, d));
        }
    }
    if !compatible(&graph, &system.graph, &placement).0 {
        return Err(EngineError::IncompatiblePlacement);
    }
    Ok(Setup { network: Network { graph, placement }, choreography: chor, monitors })
}

/// Which rounds make automata move.
struct Clock {
    /// Last round of the trace.
    end: u32,
    /// Rounds in which some component observed something.
    global: BTreeSet<u32>,
    local: BTreeMap<String, BTreeSet<u32>>,
}

impl Clock {
    fn new(tr: &DecentralizedTrace) -> Clock {
        let mut global = BTreeSet::new();
        let mut local: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
        for (t, c, _) in tr.events() {
            global.insert(t);
            local.entry(c.to_string()).or_default().insert(t);
        }
        Clock { end: tr.len(), global, local }
    }

    fn moves_globally(&self, t: u32) -> bool {
        self.global.contains(&t)
    }

    fn moves_locally(&self, c: &str, t: u32) -> bool {
        self.local.get(c).is_some_and(|s| s.contains(&t))
    }
}

/// Extends the encoding to round `t`, one round at a time; rounds in which
/// nothing was observed leave the automaton where it is.
fn advance(p: &mut Ehe, t: u32, moves: &dyn Fn(u32) -> bool, reduce: Reduction, work: &mut Work) {
    while let Some(end) = p.end() {
        if end >= t {
            break;
        }
        if moves(end + 1) {
            *p = p.mov_with(end, end + 1, reduce, work).expect("last round is encoded");
        } else {
            p.stutter(end).expect("last round is encoded");
        }
    }
}

#[derive(Default)]
struct Outcome {
    out: Vec<(String, Payload)>,
    verdict: Option<Verdict>,
    rebases: Vec<RebaseSample>,
}

fn rebase(p: &mut Ehe, r: u32, q: StateId, m: &Memory, t: u32, reduce: Reduction, work: &mut Work, o: &mut Outcome) {
    p.rebase(r, q, m, reduce, work);
    o.rebases.push(RebaseSample {
        round: t,
        delay: t - r,
        pending_entries: p.entries().filter(|(x, _, _)| *x > r).count(),
        states: p.spec().num_states(),
    });
}

fn lowest(p: &Ehe) -> u32 {
    p.bounds().expect("encoding is never empty").0
}

struct RoundCtx<'a> {
    t: u32,
    name: &'a str,
    component: &'a str,
    obs: &'a Event,
    inbox: Vec<Message>,
    comm_delay: u32,
    clock: &'a Clock,
    /// Components in name order.
    components: &'a [String],
    ap_owner: &'a BTreeMap<String, String>,
}

fn main_round(s: &mut MainState, cx: RoundCtx, work: &mut Work) -> Outcome {
    let mut o = Outcome::default();
    s.own.push_back((cx.t + cx.comm_delay, mem_from_event(cx.obs, Encoder::Timestamp(cx.t))));
    while s.own.front().is_some_and(|(at, _)| *at <= cx.t) {
        let (_, m) = s.own.pop_front().unwrap();
        s.mem.absorb(&m);
    }
    for msg in cx.inbox {
        if let Payload::Mem(m) = msg.payload {
            s.mem.absorb(&m);
        }
    }
    let clock = cx.clock;
    advance(&mut s.ehe, cx.t, &|r| clock.moves_globally(r), Reduction::Fold, work);
    let scan = s.ehe.scan(&s.mem, s.t_kn, Resolution::Lookup, work);
    if let Some((_, _, v)) = scan.first_final {
        o.verdict = Some(v);
        return o;
    }
    if let Some((r, q)) = scan.resolved {
        if r > s.t_kn {
            rebase(&mut s.ehe, r, q, &s.mem, cx.t, Reduction::Fold, work, &mut o);
            s.t_kn = r;
            s.mem.retain(|a, _| a.round().is_none_or(|x| x > r));
        }
    }
    o
}

/// Owner of the smallest pending atom (timestamp, then proposition, then
/// component), if any.
fn earliest_obligation(p: &Ehe, owner: &BTreeMap<String, String>) -> Option<String> {
    let mut best: Option<(u32, &str, &String)> = None;
    for (_, _, e) in p.entries() {
        for a in atoms_of(e) {
            let Atom::Timed { t, ap } = &a else { continue };
            let Some((name, c)) = owner.get_key_value(ap.as_ref()) else { continue };
            let cand = (*t, name.as_str(), c);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best.map(|(_, _, c)| c.clone())
}

fn next_component(components: &[String], me: &str) -> String {
    let i = components.iter().position(|c| c == me).unwrap_or(0);
    components[(i + 1) % components.len()].clone()
}

fn migration_round(s: &mut MigrState, cx: RoundCtx, work: &mut Work) -> Outcome {
    let mut o = Outcome::default();
    s.mem.absorb(&mem_from_event(cx.obs, Encoder::Timestamp(cx.t)));
    for msg in cx.inbox {
        if let Payload::Ehe(p) = msg.payload {
            s.ehe = Some(match s.ehe.take() {
                None => p,
                Some(mine) => mine.merge(&p).expect("one automaton"),
            });
        }
    }
    let Some(p) = s.ehe.as_mut() else {
        return o;
    };
    let clock = cx.clock;
    advance(p, cx.t, &|r| clock.moves_globally(r), Reduction::Bounded, work);
    let lo = lowest(p);
    let scan = p.scan(&s.mem, lo, Resolution::Exact, work);
    if let Some((_, _, v)) = scan.first_final {
        o.verdict = Some(v);
        return o;
    }
    match scan.resolved {
        Some((r, q)) if r > lo => rebase(p, r, q, &s.mem, cx.t, Reduction::Bounded, work, &mut o),
        _ => *p = p.inc_with(&s.mem, Reduction::Fold, work),
    }
    let target = if s.round_robin {
        next_component(cx.components, cx.component)
    } else {
        earliest_obligation(p, cx.ap_owner).unwrap_or_else(|| cx.component.to_string())
    };
    if target != cx.component {
        let p = s.ehe.take().unwrap();
        o.out.push((target, Payload::Ehe(p)));
    }
    o
}

fn choreography_round(s: &mut ChorState, cx: RoundCtx, work: &mut Work) -> Outcome {
    let mut o = Outcome::default();
    if s.done {
        return o;
    }
    s.mem.absorb(&mem_from_event(cx.obs, Encoder::Timestamp(cx.t)));
    for msg in cx.inbox {
        match msg.payload {
            Payload::Kill { id } => {
                s.kill.insert(id);
            }
            Payload::Verdict { id, round, verdict: Verdict::Unknown } => {
                s.settled.insert((round, id));
            }
            Payload::Verdict { id, round, verdict } => s.mem.record(Atom::monref(round, &id), verdict),
            _ => {}
        }
    }
    let kill_children = |o: &mut Outcome, s: &ChorState| {
        for c in &s.corefs {
            o.out.push((c.clone(), Payload::Kill { id: cx.name.to_string() }));
        }
    };
    if !s.refs.is_empty() && s.kill == s.refs {
        kill_children(&mut o, s);
        s.done = true;
        return o;
    }
    let clock = cx.clock;
    let comp = cx.component;
    loop {
        advance(&mut s.ehe, cx.t, &|r| clock.moves_locally(comp, r), Reduction::Bounded, work);
        let lo = lowest(&s.ehe);
        let scan = s.ehe.scan_contiguous(&s.mem, lo, Resolution::Exact, work);
        if let Some((_, _, v)) = scan.first_final {
            if s.root {
                o.verdict = Some(v);
                kill_children(&mut o, s);
                s.done = true;
                return o;
            }
            for r in s.refs.difference(&s.kill) {
                o.out.push((r.clone(), Payload::Verdict { id: cx.name.to_string(), round: s.t_mon, verdict: v }));
            }
            if !s.respawn {
                kill_children(&mut o, s);
                s.done = true;
                return o;
            }
            respawn(s);
            if s.t_mon > cx.t {
                break;
            }
            continue;
        }
        let ended = cx.t > clock.end;
        if ended && !s.root && s.t_mon <= clock.end && scan.resolved.is_some_and(|(r, _)| r >= clock.end) {
            // The instance keeps its undecided state for good.
            for r in s.refs.difference(&s.kill) {
                o.out.push((r.clone(), Payload::Verdict { id: cx.name.to_string(), round: s.t_mon, verdict: Verdict::Unknown }));
            }
            respawn(s);
            continue;
        }
        if let Some((r, q)) = scan.resolved {
            if r > lo {
                rebase(&mut s.ehe, r, q, &s.mem, cx.t, Reduction::Bounded, work, &mut o);
            }
        }
        if let Some((r, q)) = forced_step(s, cx.t) {
            s.ehe = Ehe::anchored(s.spec.clone(), r, q);
            continue;
        }
        break;
    }
    o
}

fn respawn(s: &mut ChorState) {
    s.t_mon += 1;
    s.ehe = Ehe::anchored(s.spec.clone(), s.t_mon - 1, s.spec.initial());
    let from = s.t_mon;
    s.mem.retain(|a, _| a.round().is_none_or(|x| x >= from));
    s.settled.retain(|(r, _)| *r >= from);
    s.kill.clear();
}

/// Takes the transition after the lowest (known) round directly when a
/// reference it needs ended undecided: no label holds, so the automaton
/// stays. Returns the new anchor.
fn forced_step(s: &ChorState, t: u32) -> Option<(u32, StateId)> {
    let lo = lowest(&s.ehe);
    if lo >= t {
        return None;
    }
    let mut at = s.ehe.at(lo);
    let (q, e) = at.next()?;
    if at.next().is_some() || e.as_const() != Some(true) {
        return None;
    }
    let r = lo + 1;
    let mut refs_settled = false;
    for tr in s.spec.outgoing(q) {
        for a in atoms_of(&tr.label) {
            if let Atom::Monitor(id) = &a {
                if s.settled.contains(&(r, id.to_string())) {
                    refs_settled = true;
                } else if s.mem.get(&Atom::monref(r, id)).is_none() {
                    return None;
                }
            }
        }
    }
    if !refs_settled {
        return None;
    }
    let enc = Encoder::Timestamp(r);
    let next = s
        .spec
        .outgoing(q)
        .find(|tr| eval(&encode(&tr.label, enc), &s.mem) == Verdict::Top)
        .map_or(q, |tr| tr.to);
    Some((r, next))
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    pub algorithm: Algorithm,
    pub verdict: Verdict,
    /// Round of the verdict, or the timeout round.
    pub stop_round: u32,
    pub trace_length: u32,
    pub report: Report,
    pub metrics: MetricsRecord,
}

pub fn simulate(cfg: &SimConfig, input: &SpecInput, system: &System, tr: &DecentralizedTrace) -> Result<SimRun, EngineError> {
    let setup = setup(cfg, input, system)?;
    Ok(run(cfg, setup, system, tr))
}

/// Runs a prepared setup to a verdict or the timeout.
pub fn run(cfg: &SimConfig, mut setup: Setup, system: &System, tr: &DecentralizedTrace) -> SimRun {
    let clock = Clock::new(tr);
    let components: Vec<String> = system.components().cloned().collect();
    let horizon = (tr.len() + cfg.timeout_slack).max(1);
    let mut rec = MetricsRecord::new(components.clone(), setup.network.placement.clone());
    let mut queue: BTreeMap<u32, Vec<Message>> = BTreeMap::new();
    let mut verdict = Verdict::Unknown;
    let mut stop = horizon;
    for t in 1..=horizon {
        let mut inboxes: BTreeMap<String, Vec<Message>> = BTreeMap::new();
        for m in queue.remove(&t).unwrap_or_default() {
            inboxes.entry(m.to.clone()).or_default().push(m);
        }
        let mut sent: Vec<Message> = Vec::new();
        rec.round_mut(t);
        for (name, mon) in setup.monitors.iter_mut() {
            let mut inbox = inboxes.remove(name).unwrap_or_default();
            // Stable: keeps each sender's order.
            inbox.sort_by(|a, b| a.from.cmp(&b.from));
            let obs = tr.event(t, &mon.component);
            let cx = RoundCtx {
                t,
                name,
                component: &mon.component,
                obs: &obs,
                inbox,
                comm_delay: cfg.comm_delay,
                clock: &clock,
                components: &components,
                ap_owner: &system.ap_owner,
            };
            let mut work = Work::default();
            let o = match &mut mon.role {
                Role::Main(s) => main_round(s, cx, &mut work),
                Role::Forwarder { main } => Outcome {
                    out: vec![(main.clone(), Payload::Mem(mem_from_event(&obs, Encoder::Timestamp(t))))],
                    ..Default::default()
                },
                Role::Migration(s) => migration_round(s, cx, &mut work),
                Role::Choreography(s) => choreography_round(s, cx, &mut work),
            };
            let stats = rec.round_mut(t).entry(name.clone()).or_insert_with(RoundStats::default);
            stats.simplifications += work.simplifications;
            stats.evaluations += work.evaluations;
            for (to, payload) in o.out {
                rec.note_message(t, name, payload.kind(), cfg.size.payload(&payload));
                sent.push(Message { from: name.clone(), to, sent_at: t, payload });
            }
            rec.delays.extend(o.rebases.iter().map(|r| r.delay));
            rec.rebases.extend(o.rebases);
            if let Some(v) = o.verdict {
                if !verdict.is_final() {
                    verdict = v;
                }
            }
        }
        for m in sent {
            queue.entry(m.sent_at + cfg.comm_delay).or_default().push(m);
        }
        rec.active.push(setup.monitors.values().filter(|m| m.holds_encoding()).count());
        if verdict.is_final() {
            stop = t;
            break;
        }
    }
    rec.run_length = stop;
    rec.verdict = verdict;
    SimRun { algorithm: cfg.algorithm, verdict, stop_round: stop, trace_length: tr.len(), report: summarize(&rec), metrics: rec }
}

#[cfg(test)]
mod tests;
