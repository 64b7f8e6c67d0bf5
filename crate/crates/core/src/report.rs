use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// How many failing instances a report lists verbatim.
pub const MAX_LISTED_FAILURES: usize = 20;

/// Outcome of an exhaustive check over a declared bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub bound: BTreeMap<String, usize>,
    pub instances: u64,
    pub failure_count: u64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(suite: impl Into<String>, bound: &[(&str, usize)]) -> Self {
        CheckReport {
            suite: suite.into(),
            bound: bound.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            instances: 0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn absorb(&mut self, tally: Tally) {
        self.instances += tally.instances;
        self.failure_count += tally.failure_count;
        for f in tally.failures {
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(f);
            }
        }
    }

    pub fn absorb_all(mut self, tallies: impl IntoIterator<Item = Tally>) -> Self {
        for t in tallies {
            self.absorb(t);
        }
        self
    }
}

/// Partial counts from one slice of a check, merged in a fixed order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub instances: u64,
    pub failure_count: u64,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.fail(describe());
        }
    }

    /// Count a failure without counting a new instance.
    pub fn fail(&mut self, description: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(description);
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(f);
            }
        }
        self
    }
}
