use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const REWARD_CSV_HEADER: &str = "episode,steps,total_reward,epsilon,ms";

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub epsilon: f64,
    pub ms: f64,
}

/// Per-episode training record, in episode order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewardLog {
    records: Vec<EpisodeRecord>,
}

impl RewardLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; episode indices must strictly increase.
    pub fn push(&mut self, record: EpisodeRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.episode > last.episode,
                "episode indices must strictly increase"
            );
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &[EpisodeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_steps(&self) -> usize {
        self.records.iter().map(|r| r.steps).sum()
    }

    /// Mean total reward over the last `n` episodes (all of them if fewer).
    pub fn mean_last(&self, n: usize) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        let tail = &self.records[self.records.len().saturating_sub(n)..];
        Some(tail.iter().map(|r| r.total_reward).sum::<f64>() / tail.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REWARD_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                r.episode, r.steps, r.total_reward, r.epsilon, r.ms
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == REWARD_CSV_HEADER => {}
            other => {
                return Err(Error::config(format!(
                    "reward csv header must be `{REWARD_CSV_HEADER}`, got {other:?}"
                )))
            }
        }
        let mut log = RewardLog::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::config(format!("malformed reward csv row {}: {line:?}", i + 2));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(bad());
            }
            let record = EpisodeRecord {
                episode: fields[0].trim().parse().map_err(|_| bad())?,
                steps: fields[1].trim().parse().map_err(|_| bad())?,
                total_reward: fields[2].trim().parse().map_err(|_| bad())?,
                epsilon: fields[3].trim().parse().map_err(|_| bad())?,
                ms: fields[4].trim().parse().map_err(|_| bad())?,
            };
            if log
                .records
                .last()
                .is_some_and(|l| l.episode >= record.episode)
            {
                return Err(bad());
            }
            log.records.push(record);
        }
        Ok(log)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(episode: usize, total_reward: f64) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            steps: 3,
            total_reward,
            epsilon: 0.5,
            ms: 0.0,
        }
    }

    #[test]
    fn csv_format() {
        let mut log = RewardLog::new();
        log.push(rec(0, 1.0));
        log.push(rec(1, -0.25));
        assert_eq!(
            log.to_csv(),
            "episode,steps,total_reward,epsilon,ms\n\
             0,3,1.000000,0.500000,0.000000\n\
             1,3,-0.250000,0.500000,0.000000\n"
        );
        assert_eq!(RewardLog::from_csv(&log.to_csv()).unwrap(), log);
    }

    #[test]
    fn mean_last() {
        let mut log = RewardLog::new();
        assert_eq!(log.mean_last(50), None);
        for i in 0..60 {
            log.push(rec(i, i as f64));
        }
        assert_eq!(
            log.mean_last(50),
            Some((10..60).sum::<usize>() as f64 / 50.0)
        );
        assert_eq!(log.mean_last(100), Some(29.5));
    }

    #[test]
    fn malformed_csv() {
        assert!(RewardLog::from_csv("a,b\n").is_err());
        assert!(RewardLog::from_csv("episode,steps,total_reward,epsilon,ms\n0,1,x,0,0\n").is_err());
        assert!(RewardLog::from_csv(
            "episode,steps,total_reward,epsilon,ms\n1,1,1,0,0\n1,1,1,0,0\n"
        )
        .is_err());
    }

    #[test]
    #[should_panic(expected = "strictly increase")]
    fn non_increasing_episode_panics() {
        let mut log = RewardLog::new();
        log.push(rec(2, 0.0));
        log.push(rec(2, 0.0));
    }
}
