use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// A co-enumerable tree given stage by stage: strings listed at stage `s`
/// are forbidden from then on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruningSchedule {
    /// Cumulative forbidden sets, by stage.
    stages: BTreeMap<u64, BTreeSet<BitString>>,
    depth: usize,
}

#[derive(Serialize, Deserialize)]
struct StageJson {
    s: u64,
    forbid: Vec<BitString>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleJson {
    stages: Vec<StageJson>,
    depth: usize,
}

impl PruningSchedule {
    pub fn new(depth: usize) -> Self {
        Self {
            stages: BTreeMap::new(),
            depth,
        }
    }

    /// Forbids `strings` from stage `s` on.
    pub fn forbid(mut self, s: u64, strings: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let add: BTreeSet<BitString> = strings.into_iter().collect();
        if let Some(w) = add.iter().find(|w| w.len() > self.depth) {
            return Err(Error::DepthViolation {
                needed: w.len(),
                depth: self.depth,
            });
        }
        let mut current = self.forbidden_at(s);
        current.extend(add);
        // later stages inherit everything
        for set in self.stages.range_mut(s + 1..).map(|(_, v)| v) {
            set.extend(current.iter().cloned());
        }
        self.stages.insert(s, current);
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn forbidden_at(&self, s: u64) -> BTreeSet<BitString> {
        self.stages
            .range(..=s)
            .next_back()
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }

    /// Longest forbidden string at any stage.
    pub fn max_forbidden_len(&self) -> usize {
        self.stages
            .values()
            .flat_map(|v| v.iter().map(BitString::len))
            .max()
            .unwrap_or(0)
    }

    /// No string forbidden at stage `s` is a prefix of `x`.
    pub fn admits(&self, x: &BitString, s: u64) -> bool {
        !self.forbidden_at(s).iter().any(|w| w.is_prefix_of(x))
    }

    pub fn members_at_stage(&self, d: usize, s: u64) -> Result<Vec<BitString>> {
        if d > self.depth {
            return Err(Error::DepthViolation {
                needed: d,
                depth: self.depth,
            });
        }
        let forbidden = self.forbidden_at(s);
        Ok(BitString::all_of_length(d)
            .filter(|x| !forbidden.iter().any(|w| w.is_prefix_of(x)))
            .collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScheduleJson = serde_json::from_str(text)?;
        let mut sched = Self::new(raw.depth);
        let mut last = None;
        for st in raw.stages {
            if last.is_some_and(|l| st.s <= l) {
                return Err(Error::Parse("schedule stages must increase".into()));
            }
            last = Some(st.s);
            sched = sched.forbid(st.s, st.forbid)?;
        }
        Ok(sched)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Lists the strings new at each stage.
    pub fn to_json(&self) -> String {
        let mut prev = BTreeSet::new();
        let stages = self
            .stages
            .iter()
            .map(|(s, set)| {
                let forbid = set.difference(&prev).cloned().collect();
                prev = set.clone();
                StageJson { s: *s, forbid }
            })
            .collect();
        serde_json::to_string(&ScheduleJson {
            stages,
            depth: self.depth,
        })
        .expect("schedule serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn empty_schedule_admits_all() {
        let c = PruningSchedule::new(4);
        assert_eq!(c.members_at_stage(3, 10).unwrap().len(), 8);
    }

    #[test]
    fn forbidding_one() {
        let c = PruningSchedule::new(4).forbid(0, [bs("1")]).unwrap();
        let m = c.members_at_stage(4, 0).unwrap();
        assert_eq!(m.len(), 8);
        assert!(m.iter().all(|x| !x.bit(0)));
    }

    #[test]
    fn antichain_leaves_single_path() {
        let c = PruningSchedule::new(4)
            .forbid(0, [bs("1"), bs("01")])
            .unwrap()
            .forbid(3, [bs("001"), bs("0001")])
            .unwrap();
        assert_eq!(c.members_at_stage(4, 2).unwrap().len(), 4);
        assert_eq!(c.members_at_stage(4, 3).unwrap(), vec![bs("0000")]);
    }

    #[test]
    fn monotone_in_stage() {
        let c = PruningSchedule::new(3)
            .forbid(5, [bs("11")])
            .unwrap()
            .forbid(2, [bs("0")])
            .unwrap();
        assert!(c.forbidden_at(5).contains(&bs("0")));
        let mut last = usize::MAX;
        for s in 0..8 {
            let n = c.members_at_stage(3, s).unwrap().len();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn json_round_trip() {
        let c = PruningSchedule::new(4)
            .forbid(0, [bs("1")])
            .unwrap()
            .forbid(2, [bs("001")])
            .unwrap();
        assert_eq!(PruningSchedule::from_json(&c.to_json()).unwrap(), c);
        assert!(PruningSchedule::from_json(r#"{"stages":[{"s":0,"forbid":["10101"]}],"depth":3}"#).is_err());
    }
}
