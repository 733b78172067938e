use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::domain::{HeartRateSample, ParticipantId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HrPoint {
    pub timestamp: DateTime<Utc>,
    pub hr_bpm: u16,
}

/// Heart-rate samples grouped by participant, each series sorted by time with
/// at most one sample per timestamp once normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeartRateLog {
    series: BTreeMap<ParticipantId, Vec<HrPoint>>,
}

impl HeartRateLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push_point(&mut self, participant: &ParticipantId, point: HrPoint) {
        match self.series.get_mut(participant) {
            Some(series) => series.push(point),
            None => {
                self.series.insert(participant.clone(), vec![point]);
            }
        }
    }

    pub fn push(&mut self, sample: HeartRateSample) {
        self.push_point(
            &sample.participant_id,
            HrPoint {
                timestamp: sample.timestamp,
                hr_bpm: sample.hr_bpm,
            },
        );
    }

    /// Sorts every series and drops repeated timestamps, keeping the first
    /// occurrence in insertion order. Returns the number dropped.
    pub fn normalize(&mut self) -> u64 {
        let mut dropped = 0;
        for series in self.series.values_mut() {
            series.sort_by_key(|p| p.timestamp);
            let before = series.len();
            series.dedup_by_key(|p| p.timestamp);
            dropped += (before - series.len()) as u64;
        }
        dropped
    }

    /// Merges a normalized log into this normalized log. Points whose
    /// timestamp is already present are kept from `self`. Returns
    /// `(added, duplicates)`.
    pub fn merge(&mut self, other: HeartRateLog) -> (u64, u64) {
        let (mut added, mut dups) = (0u64, 0u64);
        for (participant, incoming) in other.series {
            let existing = self.series.entry(participant).or_default();
            if existing.is_empty() {
                added += incoming.len() as u64;
                *existing = incoming;
                continue;
            }
            let old = std::mem::take(existing);
            let mut merged = Vec::with_capacity(old.len() + incoming.len());
            let (mut i, mut j) = (0, 0);
            while i < old.len() && j < incoming.len() {
                match old[i].timestamp.cmp(&incoming[j].timestamp) {
                    std::cmp::Ordering::Less => {
                        merged.push(old[i]);
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        merged.push(incoming[j]);
                        added += 1;
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        merged.push(old[i]);
                        dups += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            merged.extend_from_slice(&old[i..]);
            added += (incoming.len() - j) as u64;
            merged.extend_from_slice(&incoming[j..]);
            *existing = merged;
        }
        (added, dups)
    }

    pub fn series(&self, participant: &ParticipantId) -> &[HrPoint] {
        self.series.get(participant).map_or(&[], Vec::as_slice)
    }

    pub fn participants(&self) -> impl Iterator<Item = &ParticipantId> {
        self.series.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParticipantId, &[HrPoint])> {
        self.series.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn samples(&self) -> impl Iterator<Item = HeartRateSample> + '_ {
        self.series.iter().flat_map(|(id, points)| {
            points.iter().map(move |p| HeartRateSample {
                participant_id: id.clone(),
                timestamp: p.timestamp,
                hr_bpm: p.hr_bpm,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.series.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.series.values().all(Vec::is_empty)
    }
}

impl FromIterator<HeartRateSample> for HeartRateLog {
    fn from_iter<I: IntoIterator<Item = HeartRateSample>>(iter: I) -> Self {
        let mut log = HeartRateLog::new();
        for s in iter {
            log.push(s);
        }
        log.normalize();
        log
    }
}
