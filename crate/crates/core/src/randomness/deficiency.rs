use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{Engine, KValue};
use crate::toyvm::Oracle;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeficiencyRecord {
    pub sigma: BitString,
    pub stage: u64,
    /// `max over n of n - K_s(sigma|n)`. A prefix above the cap enters with
    /// its upper bound `n - cap - 1`, so the value never understates.
    pub value: i64,
    pub above_cap: usize,
}

impl DeficiencyRecord {
    /// `K_s(sigma|n) >= n - k` on every prefix.
    pub fn looks_random(&self, k: i64) -> bool {
        self.value <= k
    }
}

pub fn deficiency(engine: &Engine, sigma: &BitString, s: u64, oracle: Option<&Oracle>) -> DeficiencyRecord {
    let mut value = i64::MIN;
    let mut above_cap = 0;
    for n in 0..=sigma.len() {
        match engine.k_stage(&sigma.prefix(n), s, oracle).value {
            KValue::Bits(k) => value = value.max(n as i64 - k as i64),
            KValue::AboveCap => {
                above_cap += 1;
                value = value.max(n as i64 - engine.cap() as i64 - 1);
            }
        }
    }
    DeficiencyRecord {
        sigma: sigma.clone(),
        stage: s,
        value,
        above_cap,
    }
}
