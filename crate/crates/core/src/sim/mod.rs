// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic scenario runner. Events execute in order of their virtual
//! time on a single thread; the bank runs in-process behind a channel that
//! carries the real frame encoding.

pub mod adversary;
pub mod metrics;
pub mod scenario;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use adversary::CompromisedWallet;
pub use metrics::{MetricsReport, PropertyCheck, Status, Timings};
pub use scenario::{Action, ActorSpec, Event, Scenario, ScenarioError, Workload};

use crate::bank::{BankConfig, CentralBank, Clock};
use crate::crypto::{Commitment, SigningKey};
use crate::field::FieldElement;
use crate::proof::ProofBackend;
use crate::protocol::{BankRequest, BankResponse, HistoryElement, LedgerEntry};
use crate::transport::{BankChannel, ChannelError, ChannelStats, Message};
use crate::wallet::{ReconnectOutcome, Wallet, WalletConfig, WalletError};
use metrics::{BankTotals, DisclosureRecord, HistorySample, PaymentRecord, ReconnectRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: usize,
    pub at: u64,
    pub epoch: u32,
    pub action: String,
    pub actors: Vec<String>,
    pub outcome: String,
}

/// A request body as seen by the bank, kept for the privacy scan.
#[derive(Debug, Clone)]
pub struct Observed {
    /// Harness-side attribution; the bank never sees it.
    pub actor: usize,
    pub kind: &'static str,
    pub payload: Vec<u8>,
}

/// Channel from the actors to the bank. Online state and attribution are
/// harness-side only: the bank is handed the decoded request and nothing
/// else.
struct Tap {
    bank: Arc<CentralBank>,
    online: bool,
    actor: usize,
    stats: ChannelStats,
    signature_requests: u64,
    queries: u64,
    observed: Vec<Observed>,
    jitter_secs: u64,
    rng: ChaCha20Rng,
}

impl BankChannel for Tap {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        if !self.online {
            return Err(ChannelError::Offline);
        }
        let kind = match &req {
            BankRequest::Signature(_) => {
                self.signature_requests += 1;
                if self.jitter_secs > 0 {
                    let wait = self.rng.gen_range(0..=self.jitter_secs);
                    self.bank.clock().advance(wait);
                }
                "signature"
            }
            BankRequest::QueryLedger(_) => {
                self.queries += 1;
                "query"
            }
            BankRequest::GetEpochChallenge => "challenge",
            BankRequest::Enroll(_) => "enroll",
            BankRequest::Sync(_) => "sync",
            BankRequest::Recover(_) => "recover",
        };
        let up = Message::Request(req).encode();
        let Message::Request(req) = Message::decode(&up)? else { return Err(ChannelError::Unexpected) };
        self.observed.push(Observed {
            actor: self.actor,
            kind,
            payload: up[crate::transport::frame::HEADER_BYTES..].to_vec(),
        });
        let down = Message::Response(self.bank.handle(req)).encode();
        self.stats.requests += 1;
        self.stats.bytes_up += up.len() as u64;
        self.stats.bytes_down += down.len() as u64;
        match Message::decode(&down)? {
            Message::Response(r) => Ok(r),
            _ => Err(ChannelError::Unexpected),
        }
    }
}

struct Actor {
    spec: ActorSpec,
    wallet: Wallet,
    online: bool,
    marks: HashMap<String, Commitment>,
    /// Balances and values this actor's requests must not reveal.
    private_values: HashSet<u64>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceEvent>,
    pub metrics: MetricsReport,
    pub properties: Vec<PropertyCheck>,
    pub timings: Timings,
    pub ledger: Vec<LedgerEntry>,
}

impl RunOutput {
    pub fn all_properties_hold(&self) -> bool {
        self.properties.iter().all(PropertyCheck::passed)
    }

    /// Trace as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&serde_json::to_string(e).expect("trace serialises"));
            out.push('\n');
        }
        out
    }
}

/// Bank configuration a scenario implies.
pub fn bank_config(s: &Scenario) -> BankConfig {
    BankConfig {
        epoch_seconds: s.epoch_seconds,
        delta_sync: s.delta_sync,
        max_holding_limit: s.actors.iter().map(|a| a.holding_limit).max().unwrap_or(0),
        ..BankConfig::default()
    }
}

/// The in-memory bank a scenario runs against.
pub fn scenario_bank(s: &Scenario, backend: Arc<dyn ProofBackend>) -> Arc<CentralBank> {
    let key = SigningKey::from_seed(&s.seed.to_be_bytes());
    Arc::new(CentralBank::new(bank_config(s), key, backend, Clock::virtual_at(0), s.seed))
}

pub fn run_scenario(s: &Scenario, backend: Arc<dyn ProofBackend>) -> Result<RunOutput, ScenarioError> {
    let bank = scenario_bank(s, backend.clone());
    let mut sim = Simulation::new(s, backend, bank)?;
    for ev in sim.events() {
        sim.step(&ev);
    }
    Ok(sim.finish())
}

/// A scenario in progress. Exposed so callers can interleave their own
/// actions, for instance restarting the bank half-way.
pub struct Simulation {
    scenario: Scenario,
    tap: Tap,
    actors: Vec<Actor>,
    index: HashMap<String, usize>,
    trace: Vec<TraceEvent>,
    metrics: MetricsReport,
    timings: Timings,
    outage_until: u64,
    holding_violations: Vec<String>,
    adversarial_limit_refusals: usize,
    burned: u128,
}

impl Simulation {
    /// Validates the scenario and sets up actors: funded actors get a
    /// minted genesis state, the rest enroll. Setup is not traced.
    pub fn new(s: &Scenario, backend: Arc<dyn ProofBackend>, bank: Arc<CentralBank>) -> Result<Self, ScenarioError> {
        s.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(s.seed);
        let config = WalletConfig { bank_key: bank.verifying_key(), delta_sync: s.delta_sync };
        let mut tap = Tap {
            bank: bank.clone(),
            online: true,
            actor: 0,
            stats: ChannelStats::default(),
            signature_requests: 0,
            queries: 0,
            observed: Vec::new(),
            jitter_secs: s.reconnect_jitter_secs,
            rng: ChaCha20Rng::seed_from_u64(rng.next_u64()),
        };
        let mut actors = Vec::new();
        let mut index = HashMap::new();
        for (i, spec) in s.actors.iter().enumerate() {
            let mut wallet = Wallet::new(backend.clone(), config, rng.next_u64());
            if spec.funds > 0 {
                let opening = wallet.genesis_opening(spec.holding_limit, spec.funds, bank.current_epoch());
                let sig = bank.mint(&opening).map_err(|e| ScenarioError::Funds(format!("{}: {e}", spec.name)))?;
                wallet.install_genesis(opening, sig).expect("bank-signed genesis");
            } else {
                tap.actor = i;
                wallet.enroll(&mut tap, spec.holding_limit).expect("enrollment within policy");
            }
            let private_values = [spec.funds].into_iter().collect();
            index.insert(spec.name.clone(), i);
            actors.push(Actor { spec: spec.clone(), wallet, online: true, marks: HashMap::new(), private_values });
        }
        tap.stats = ChannelStats::default();
        tap.signature_requests = 0;
        tap.queries = 0;
        tap.observed.clear();
        Ok(Self {
            scenario: s.clone(),
            tap,
            actors,
            index,
            trace: Vec::new(),
            metrics: MetricsReport::default(),
            timings: Timings::default(),
            outage_until: 0,
            holding_violations: Vec::new(),
            adversarial_limit_refusals: 0,
            burned: 0,
        })
    }

    /// Events in execution order (stable by time).
    pub fn events(&self) -> Vec<Event> {
        let mut ev = self.scenario.events.clone();
        ev.sort_by_key(|e| e.at);
        ev
    }

    pub fn bank(&self) -> &Arc<CentralBank> {
        &self.tap.bank
    }

    /// Points the actors at another bank instance, e.g. after a restart.
    pub fn replace_bank(&mut self, bank: Arc<CentralBank>) {
        self.tap.bank = bank;
    }

    pub fn wallet(&self, name: &str) -> Option<&Wallet> {
        self.index.get(name).map(|&i| &self.actors[i].wallet)
    }

    fn set_time(&mut self, at: u64) {
        let clock = self.tap.bank.clock();
        if clock.now_secs() < at {
            clock.set(at);
        }
        let epoch = self.tap.bank.current_epoch();
        for a in &mut self.actors {
            a.wallet.observe_epoch(epoch);
        }
    }

    fn connect(&mut self, i: usize, at: u64) {
        self.tap.actor = i;
        self.tap.online = self.actors[i].online && at >= self.outage_until;
    }

    pub fn step(&mut self, ev: &Event) {
        self.set_time(ev.at);
        let outcome = match &ev.action {
            Action::Pay { from, to, value, omit_history, skip_checks } => {
                self.pay(ev.at, from, to, *value, *omit_history, *skip_checks)
            }
            Action::Mark { actor, label } => {
                let a = &mut self.actors[self.index[actor]];
                match a.wallet.current() {
                    Some(c) => {
                        a.marks.insert(label.clone(), c);
                        format!("marked {}", c.short())
                    }
                    None => "no state".into(),
                }
            }
            Action::Rewind { actor, label } => {
                let a = &mut self.actors[self.index[actor]];
                match a.marks.get(label).copied() {
                    Some(c) => match CompromisedWallet::new(&mut a.wallet).replay(&c) {
                        Ok(()) => format!("rewound to {}", c.short()),
                        Err(e) => format!("error: {e}"),
                    },
                    None => format!("unknown label {label}"),
                }
            }
            Action::Reconnect { actor } => self.reconnect(ev.at, actor, false),
            Action::Recover { actor } => self.reconnect(ev.at, actor, true),
            Action::Sync { actor } => {
                let i = self.index[actor];
                self.connect(i, ev.at);
                let t = Instant::now();
                let r = self.actors[i].wallet.synchronize(&mut self.tap);
                self.timings.record("sync", t.elapsed());
                match r {
                    Ok(_) => format!("synchronized to epoch {}", self.actors[i].wallet.state().map_or(0, |s| s.epoch)),
                    Err(e) => format!("error: {e}"),
                }
            }
            Action::GoOffline { actor } => {
                self.actors[self.index[actor]].online = false;
                "offline".into()
            }
            Action::GoOnline { actor } => {
                self.actors[self.index[actor]].online = true;
                "online".into()
            }
            Action::Outage { duration } => {
                self.outage_until = ev.at.saturating_add(*duration);
                format!("bank unreachable until t={}", self.outage_until)
            }
        };
        self.check_holding_limits(ev.at);
        self.trace.push(TraceEvent {
            seq: self.trace.len(),
            at: ev.at,
            epoch: self.tap.bank.current_epoch(),
            action: ev.action.name().into(),
            actors: ev.action.actors().into_iter().map(String::from).collect(),
            outcome,
        });
    }

    fn two_mut(&mut self, a: usize, b: usize) -> (&mut Actor, &mut Actor) {
        assert_ne!(a, b);
        if a < b {
            let (l, r) = self.actors.split_at_mut(b);
            (&mut l[a], &mut r[0])
        } else {
            let (l, r) = self.actors.split_at_mut(a);
            (&mut r[0], &mut l[b])
        }
    }

    fn pay(&mut self, at: u64, from: &str, to: &str, value: u64, omit: bool, skip_checks: bool) -> String {
        let (fi, ti) = (self.index[from], self.index[to]);
        if fi == ti {
            return "error: payment to self".into();
        }
        let proximity = self.scenario.proximity;
        let mut timings = std::mem::take(&mut self.timings);
        let (sender, recipient) = self.two_mut(fi, ti);
        let req = match recipient.wallet.request_payment(value) {
            Ok(r) => r,
            Err(e) => {
                self.timings = timings;
                return format!("no request: {e}");
            }
        };
        let t = Instant::now();
        let created = if omit {
            CompromisedWallet::new(&mut sender.wallet).pay_omitting_history(&req)
        } else {
            sender.wallet.create_payment(&req)
        };
        timings.record("create_payment", t.elapsed());
        let (hist, msg) = match created {
            Ok(x) => x,
            Err(e) => {
                self.timings = timings;
                return format!("not sent: {e}");
            }
        };
        sender.private_values.insert(value);
        sender.private_values.insert(sender.wallet.balance());
        let history_elements = hist.len();
        let unsigned_elements = hist.values().filter(|e| !e.is_signed()).count();
        let request_bytes = Message::PaymentRequest(req).encode().len();
        let message_bytes = Message::Payment { hist_rel: hist.clone(), message: msg.clone() }.encode().len();
        let transfer_s = proximity.transfer_time(request_bytes) + proximity.transfer_time(message_bytes);

        let t = Instant::now();
        let accepted = recipient.wallet.accept_payment(&hist, &msg);
        timings.record("accept_payment", t.elapsed());
        let mut adversarial_refusal = false;
        let outcome = match accepted {
            Err(reason) => format!("rejected: {reason}"),
            Ok(()) => {
                let t = Instant::now();
                let r = if skip_checks {
                    CompromisedWallet::new(&mut recipient.wallet).complete_unchecked(&hist, &msg)
                } else {
                    recipient.wallet.complete_payment(&hist, &msg)
                };
                timings.record("complete_payment", t.elapsed());
                match r {
                    Ok(_) => {
                        recipient.private_values.insert(value);
                        recipient.private_values.insert(recipient.wallet.balance());
                        "accepted".to_string()
                    }
                    Err(e) => {
                        adversarial_refusal = skip_checks && matches!(e, WalletError::Prove(_));
                        format!("refused: {e}")
                    }
                }
            }
        };
        let sender_unsigned = unsigned_history(&sender.wallet);
        self.timings = timings;
        if outcome != "accepted" {
            self.burned += value as u128;
        }
        if adversarial_refusal {
            self.adversarial_limit_refusals += 1;
        }
        self.metrics.history_samples.push(HistorySample { at, actor: from.into(), unsigned: sender_unsigned });
        self.metrics.payments.push(PaymentRecord {
            at,
            from: from.into(),
            to: to.into(),
            value,
            outcome: outcome.clone(),
            history_elements,
            unsigned_elements,
            request_bytes,
            message_bytes,
            transfer_s,
        });
        format!("{outcome}; value={value} history={history_elements} bytes={message_bytes}")
    }

    fn reconnect(&mut self, at: u64, actor: &str, recover: bool) -> String {
        let i = self.index[actor];
        self.connect(i, at);
        let before = (self.tap.stats, self.tap.signature_requests, self.tap.queries);
        let t = Instant::now();
        let wallet = &mut self.actors[i].wallet;
        let outcome = if recover {
            wallet.reconnect_and_recover(&mut self.tap).map(|r| {
                let head = outcome_name(r.outcome);
                if r.recovered.is_empty() { head } else { format!("{head} after {} recovery", r.recovered.len()) }
            })
        } else {
            wallet.reconnect(&mut self.tap).map(outcome_name)
        };
        self.timings.record(if recover { "recover" } else { "reconnect" }, t.elapsed());
        let outcome = outcome.unwrap_or_else(|e| format!("error: {e}"));
        self.metrics.reconnects.push(ReconnectRecord {
            at,
            actor: actor.into(),
            outcome: outcome.clone(),
            signature_requests: self.tap.signature_requests - before.1,
            ledger_queries: self.tap.queries - before.2,
            bytes_up: self.tap.stats.bytes_up - before.0.bytes_up,
            bytes_down: self.tap.stats.bytes_down - before.0.bytes_down,
        });
        outcome
    }

    fn check_holding_limits(&mut self, at: u64) {
        for a in self.actors.iter().filter(|a| !a.spec.compromised) {
            for (scm, e) in a.wallet.internal() {
                if e.opening.balance > e.opening.holding_limit {
                    self.holding_violations.push(format!("t={at} {} state {}", a.spec.name, scm.short()));
                }
            }
        }
    }

    pub fn finish(mut self) -> RunOutput {
        let bank = self.tap.bank.clone();
        let names: HashMap<FieldElement, String> =
            self.actors.iter().map(|a| (a.wallet.id(), a.spec.name.clone())).collect();
        let name_of = |id: &FieldElement| names.get(id).cloned().unwrap_or_else(|| format!("unknown {}", id.to_hex()));
        let ledger = bank.ledger_entries();
        let spenders = bank.identify_double_spenders();
        let audit = bank.audit_log();
        let mut conflicting = HashMap::<FieldElement, usize>::new();
        for e in &ledger {
            if let Some(sn) = e.sn {
                *conflicting.entry(sn).or_default() += 1;
            }
        }
        self.metrics.events = self.trace.len();
        self.metrics.final_unsigned_history =
            self.actors.iter().map(|a| (a.spec.name.clone(), unsigned_history(&a.wallet))).collect();
        self.metrics.bank = BankTotals {
            requests: self.tap.stats.requests,
            bytes_up: self.tap.stats.bytes_up,
            bytes_down: self.tap.stats.bytes_down,
            ledger_rows: ledger.len(),
            conflicting_serials: conflicting.values().filter(|&&n| n > 1).count(),
            double_spenders: spenders.iter().map(name_of).collect(),
            disclosures: audit.iter().map(|d| DisclosureRecord { actor: name_of(&d.id), value: d.value }).collect(),
        };

        let mut properties = Vec::new();
        properties.push(PropertyCheck {
            name: "holding limit",
            status: if self.holding_violations.is_empty() { Status::Pass } else { Status::Fail },
            detail: if self.holding_violations.is_empty() {
                format!(
                    "no honest state above its limit; {} adversarial completions refused",
                    self.adversarial_limit_refusals
                )
            } else {
                self.holding_violations.join("; ")
            },
        });
        properties.push(self.privacy_scan());
        let compromised: HashSet<FieldElement> =
            self.actors.iter().filter(|a| a.spec.compromised).map(|a| a.wallet.id()).collect();
        let framed: Vec<String> = spenders.iter().filter(|id| !compromised.contains(id)).map(name_of).collect();
        properties.push(PropertyCheck {
            name: "double-spender identification",
            status: if !framed.is_empty() {
                Status::Fail
            } else if self.metrics.bank.conflicting_serials == 0 {
                Status::NotApplicable
            } else if spenders.is_empty() {
                Status::Fail
            } else {
                Status::Pass
            },
            detail: if framed.is_empty() {
                format!("identified: {}", join(&self.metrics.bank.double_spenders))
            } else {
                format!("honest actors identified: {}", framed.join(", "))
            },
        });
        if compromised.is_empty() {
            let held: u128 = self.actors.iter().map(|a| a.wallet.balance() as u128).sum();
            let issued = bank.total_issued();
            properties.push(PropertyCheck {
                name: "conservation",
                status: if held + self.burned == issued { Status::Pass } else { Status::Fail },
                detail: format!("held {held} + lost in refused payments {} vs issued {issued}", self.burned),
            });
        } else {
            properties.push(PropertyCheck {
                name: "conservation",
                status: Status::NotApplicable,
                detail: "compromised actors can create money".into(),
            });
        }
        if self.metrics.bank.conflicting_serials > 0 {
            let expired = self
                .actors
                .iter()
                .filter(|a| !a.spec.compromised && a.wallet.is_expired())
                .map(|a| a.spec.name.clone())
                .collect::<Vec<_>>();
            let ok = !audit.is_empty() || !expired.is_empty();
            properties.push(PropertyCheck {
                name: "counterfeit accountability",
                status: if ok { Status::Pass } else { Status::Fail },
                detail: format!("{} recoveries, expired: {}", audit.len(), join(&expired)),
            });
        } else {
            properties.push(PropertyCheck {
                name: "counterfeit accountability",
                status: Status::NotApplicable,
                detail: "no counterfeit on the ledger".into(),
            });
        }

        RunOutput { trace: self.trace, metrics: self.metrics, properties, timings: self.timings, ledger }
    }

    /// Signature requests of honest actors must not contain, as a 32-byte
    /// field encoding, the actor's identity, a balance it held or a value it
    /// paid or received. Values that coincide with public constants of the
    /// requests (zero, the sync tolerance) are excluded.
    fn privacy_scan(&self) -> PropertyCheck {
        let excluded: HashSet<u64> = [0, self.scenario.delta_sync as u64].into_iter().collect();
        let mut hits = Vec::new();
        let mut scanned = 0usize;
        for (i, a) in self.actors.iter().enumerate() {
            if a.spec.compromised {
                continue;
            }
            let mut needles: HashSet<[u8; 32]> = HashSet::new();
            needles.insert(a.wallet.id().to_bytes());
            for v in a.private_values.iter().filter(|v| !excluded.contains(v)) {
                needles.insert(FieldElement::from_u64(*v).to_bytes());
            }
            for e in a.wallet.internal().values() {
                if !excluded.contains(&e.opening.balance) {
                    needles.insert(FieldElement::from_u64(e.opening.balance).to_bytes());
                }
            }
            for o in self.tap.observed.iter().filter(|o| o.actor == i && o.kind == "signature") {
                scanned += 1;
                if o.payload.windows(32).any(|w| needles.contains(w)) {
                    hits.push(a.spec.name.clone());
                    break;
                }
            }
        }
        PropertyCheck {
            name: "bank view privacy scan",
            status: if hits.is_empty() { Status::Pass } else { Status::Fail },
            detail: if hits.is_empty() {
                format!("{scanned} signature requests scanned, no identity, balance or value found")
            } else {
                format!("found in requests of {}", hits.join(", "))
            },
        }
    }
}

fn join(v: &[String]) -> String {
    if v.is_empty() { "none".into() } else { v.join(", ") }
}

fn outcome_name(o: ReconnectOutcome) -> String {
    match o {
        ReconnectOutcome::Signed => "signed".into(),
        ReconnectOutcome::RecoveryNeeded(s) => format!("recovery needed for {}", s.short()),
        ReconnectOutcome::Refused => "refused".into(),
    }
}

/// Non-signed elements in the related history of the current state.
pub fn unsigned_history(w: &Wallet) -> usize {
    let Some(cur) = w.current() else { return 0 };
    w.get_related_history(&cur)
        .map(|h| h.values().filter(|e| !matches!(e, HistoryElement::SignedLeaf { .. })).count())
        .unwrap_or(0)
}

/// Per-actor view for reports.
pub fn actor_balances(sim: &Simulation) -> BTreeMap<String, u64> {
    sim.actors.iter().map(|a| (a.spec.name.clone(), a.wallet.balance())).collect()
}
