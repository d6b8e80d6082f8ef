// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files and built-in scenario generators.
//!
//! A scenario is TOML:
//!
//! ```toml
//! seed = 7
//! epoch_seconds = 86400
//! delta_sync = 30
//!
//! [[actors]]
//! name = "alice"
//! compromised = true
//! holding_limit = 5000
//! funds = 1200          # minted genesis state; 0 means plain enrollment
//!
//! [[events]]
//! at = 60               # virtual seconds since the start
//! action = "pay"
//! from = "alice"
//! to = "bob"
//! value = 1000
//! ```
//!
//! Actions: `pay`, `mark`, `rewind`, `reconnect`, `recover`, `sync`,
//! `go_offline`, `go_online`, `outage`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::transport::ChannelModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epoch_seconds")]
    pub epoch_seconds: u64,
    #[serde(default = "default_delta_sync")]
    pub delta_sync: u32,
    /// Offline channel used to estimate payment transfer times.
    #[serde(default = "ChannelModel::proximity")]
    pub proximity: ChannelModel,
    /// Random pause (virtual seconds, up to this bound) between the
    /// signature requests of one reconnect. Off by default.
    #[serde(default)]
    pub reconnect_jitter_secs: u64,
    #[serde(default)]
    pub actors: Vec<ActorSpec>,
    #[serde(default)]
    pub events: Vec<Event>,
}

fn default_epoch_seconds() -> u64 {
    86_400
}

fn default_delta_sync() -> u32 {
    30
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub name: String,
    #[serde(default)]
    pub compromised: bool,
    #[serde(default = "default_holding_limit")]
    pub holding_limit: u64,
    #[serde(default)]
    pub funds: u64,
}

fn default_holding_limit() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    #[serde(default)]
    pub at: u64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Pay {
        from: String,
        to: String,
        value: u64,
        /// Compromised sender: ship only the new state, dropping the rest
        /// of the related history.
        #[serde(default)]
        omit_history: bool,
        /// Compromised recipient: skip the local holding-limit check.
        #[serde(default)]
        skip_checks: bool,
    },
    /// Remembers the actor's current state under `label`.
    Mark {
        actor: String,
        label: String,
    },
    /// Compromised actor: makes a marked state current again.
    Rewind {
        actor: String,
        label: String,
    },
    Reconnect {
        actor: String,
    },
    /// Reconnect, recovering own completions when needed.
    Recover {
        actor: String,
    },
    Sync {
        actor: String,
    },
    GoOffline {
        actor: String,
    },
    GoOnline {
        actor: String,
    },
    /// The bank is unreachable for `duration` seconds.
    Outage {
        duration: u64,
    },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Pay { .. } => "pay",
            Self::Mark { .. } => "mark",
            Self::Rewind { .. } => "rewind",
            Self::Reconnect { .. } => "reconnect",
            Self::Recover { .. } => "recover",
            Self::Sync { .. } => "sync",
            Self::GoOffline { .. } => "go_offline",
            Self::GoOnline { .. } => "go_online",
            Self::Outage { .. } => "outage",
        }
    }

    pub fn actors(&self) -> Vec<&str> {
        match self {
            Self::Pay { from, to, .. } => vec![from, to],
            Self::Mark { actor, .. }
            | Self::Rewind { actor, .. }
            | Self::Reconnect { actor }
            | Self::Recover { actor }
            | Self::Sync { actor }
            | Self::GoOffline { actor }
            | Self::GoOnline { actor } => vec![actor],
            Self::Outage { .. } => vec![],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("duplicate actor '{0}'")]
    DuplicateActor(String),
    #[error("event {index}: unknown actor '{name}'")]
    UnknownActor { index: usize, name: String },
    #[error("event {index}: '{action}' needs a compromised actor, '{name}' is honest")]
    HonestActor { index: usize, action: &'static str, name: String },
    #[error("event {index}: rewind to unknown label '{label}'")]
    UnknownLabel { index: usize, label: String },
    #[error("epoch_seconds must be positive")]
    EpochLength,
    #[error("actor '{0}': funds exceed the holding limit")]
    Funds(String),
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Self = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialises")
    }

    /// Checks the script before anything runs.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.epoch_seconds == 0 {
            return Err(ScenarioError::EpochLength);
        }
        let mut names = HashSet::new();
        for a in &self.actors {
            if !names.insert(a.name.as_str()) {
                return Err(ScenarioError::DuplicateActor(a.name.clone()));
            }
            if a.funds > a.holding_limit {
                return Err(ScenarioError::Funds(a.name.clone()));
            }
        }
        let compromised: HashSet<&str> =
            self.actors.iter().filter(|a| a.compromised).map(|a| a.name.as_str()).collect();
        let mut labels: HashSet<(&str, &str)> = HashSet::new();
        for (index, ev) in self.events.iter().enumerate() {
            for name in ev.action.actors() {
                if !names.contains(name) {
                    return Err(ScenarioError::UnknownActor { index, name: name.to_string() });
                }
            }
            let needs = |name: &str, action| {
                if compromised.contains(name) {
                    Ok(())
                } else {
                    Err(ScenarioError::HonestActor { index, action, name: name.to_string() })
                }
            };
            match &ev.action {
                Action::Pay { from, to, omit_history, skip_checks, .. } => {
                    if *omit_history {
                        needs(from, "omit_history")?;
                    }
                    if *skip_checks {
                        needs(to, "skip_checks")?;
                    }
                }
                Action::Mark { actor, label } => {
                    labels.insert((actor, label));
                }
                Action::Rewind { actor, label } => {
                    needs(actor, "rewind")?;
                    if !labels.contains(&(actor.as_str(), label.as_str())) {
                        return Err(ScenarioError::UnknownLabel { index, label: label.clone() });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn ev(at: u64, action: Action) -> Event {
    Event { at, action }
}

fn pay(at: u64, from: &str, to: &str, value: u64) -> Event {
    ev(at, Action::Pay { from: from.into(), to: to.into(), value, omit_history: false, skip_checks: false })
}

fn actor(name: &str, compromised: bool, funds: u64) -> ActorSpec {
    ActorSpec { name: name.into(), compromised, holding_limit: 5000, funds }
}

/// Alice double spends 1000 three times from a balance of 1200.
pub fn double_spend_example() -> Scenario {
    let who = |s: &str| s.to_string();
    let events = vec![
        ev(0, Action::Mark { actor: who("alice"), label: who("start") }),
        pay(60, "alice", "carol", 1000),
        ev(120, Action::Rewind { actor: who("alice"), label: who("start") }),
        pay(180, "alice", "bob", 1000),
        ev(240, Action::Reconnect { actor: who("bob") }),
        pay(300, "carol", "david", 500),
        ev(360, Action::Recover { actor: who("david") }),
        ev(420, Action::Recover { actor: who("carol") }),
        ev(480, Action::Rewind { actor: who("alice"), label: who("start") }),
        pay(540, "alice", "eve", 1000),
        pay(600, "eve", "fred", 400),
        ev(660, Action::Recover { actor: who("eve") }),
        ev(720, Action::Reconnect { actor: who("fred") }),
    ];
    Scenario {
        seed: 2,
        epoch_seconds: 86_400,
        delta_sync: 30,
        proximity: ChannelModel::proximity(),
        reconnect_jitter_secs: 0,
        actors: vec![
            actor("alice", true, 1200),
            actor("bob", false, 0),
            actor("carol", false, 0),
            actor("david", false, 0),
            actor("eve", false, 0),
            actor("fred", false, 0),
        ],
        events,
    }
}

/// The offline-consumer workloads: how long consumers stay offline and how
/// often they receive a payment meanwhile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Workload {
    /// About one day offline, one payment received.
    OutageDay,
    /// A week offline, one payment received per day.
    Week,
    /// A month offline, one payment received that month.
    Month,
    /// Six months offline, nothing received.
    HalfYear,
}

impl Workload {
    pub const ALL: [Workload; 4] = [Self::OutageDay, Self::Week, Self::Month, Self::HalfYear];

    pub fn name(self) -> &'static str {
        match self {
            Self::OutageDay => "outage-day",
            Self::Week => "week",
            Self::Month => "month",
            Self::HalfYear => "half-year",
        }
    }

    pub fn days(self) -> u64 {
        match self {
            Self::OutageDay => 1,
            Self::Week => 7,
            Self::Month => 30,
            Self::HalfYear => 180,
        }
    }

    /// Received payments over the offline period.
    pub fn receipts(self) -> u64 {
        match self {
            Self::OutageDay => 1,
            Self::Week => 7,
            Self::Month => 1,
            Self::HalfYear => 0,
        }
    }

    /// Reference figures reported for this workload: mean unsigned history
    /// size and final payment time in seconds.
    pub fn reference(self) -> (f64, f64) {
        match self {
            Self::OutageDay => (3.9, 0.340),
            Self::Week => (54.8, 1.31),
            Self::Month => (60.3, 1.43),
            Self::HalfYear => (237.1, 5.0),
        }
    }
}

/// Consumers stay offline for the workload's period, paying merchants at
/// `payments_per_day` (exponential inter-arrival times) and receiving
/// payments from users with fully signed histories. Merchants reconnect
/// daily.
pub fn consumer_workload(w: Workload, consumers: usize, payments_per_day: f64, seed: u64) -> Scenario {
    const DAY: u64 = 86_400;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_0fc0);
    let days = w.days();
    let horizon = days * DAY;
    let merchants = 3usize;
    let mut actors = Vec::new();
    let mut events = Vec::new();
    for m in 0..merchants {
        actors.push(ActorSpec {
            name: format!("merchant{m}"),
            compromised: false,
            holding_limit: u64::MAX / 4,
            funds: 0,
        });
    }
    for c in 0..consumers {
        let name = format!("consumer{c}");
        actors.push(ActorSpec { name: name.clone(), compromised: false, holding_limit: 10_000_000, funds: 1_000_000 });
        let mut t = 0f64;
        loop {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            t += -u.ln() / payments_per_day * DAY as f64;
            if t >= horizon as f64 {
                break;
            }
            let m = rng.gen_range(0..merchants);
            events.push(pay(t as u64, &name, &format!("merchant{m}"), 1));
        }
        let receipts = w.receipts();
        for r in 0..receipts {
            let payer = format!("payer{c}_{r}");
            actors.push(ActorSpec { name: payer.clone(), compromised: false, holding_limit: 1_000_000, funds: 1000 });
            let at = horizon * r / receipts.max(1) + rng.gen_range(0..horizon / receipts.max(1));
            events.push(pay(at, &payer, &name, 5));
        }
    }
    for d in 1..=days {
        for m in 0..merchants {
            events.push(ev(d * DAY - 1, Action::Reconnect { actor: format!("merchant{m}") }));
        }
    }
    events.sort_by_key(|e| e.at);
    Scenario {
        seed,
        epoch_seconds: DAY,
        delta_sync: days as u32 + 2,
        proximity: ChannelModel::proximity(),
        reconnect_jitter_secs: 0,
        actors,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_and_validation() {
        let s = double_spend_example();
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);

        let bad = "[[actors]]\nname = \"a\"\n[[events]]\naction = \"sync\"\nactor = \"b\"\n";
        assert!(matches!(Scenario::from_toml(bad), Err(ScenarioError::UnknownActor { index: 0, .. })));
        let honest = "[[actors]]\nname = \"a\"\n[[events]]\naction = \"mark\"\nactor = \"a\"\nlabel = \"x\"\n\
                      [[events]]\naction = \"rewind\"\nactor = \"a\"\nlabel = \"x\"\n";
        assert!(matches!(Scenario::from_toml(honest), Err(ScenarioError::HonestActor { index: 1, .. })));
    }

    #[test]
    fn workload_generation_is_seeded() {
        let a = consumer_workload(Workload::Week, 2, 1.3, 5);
        assert_eq!(a, consumer_workload(Workload::Week, 2, 1.3, 5));
        assert_ne!(a, consumer_workload(Workload::Week, 2, 1.3, 6));
        a.validate().unwrap();
        let receipts = a
            .events
            .iter()
            .filter(|e| matches!(&e.action, Action::Pay { to, .. } if to.starts_with("consumer")))
            .count();
        assert_eq!(receipts, 14);
    }
}
