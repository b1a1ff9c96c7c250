//! Brute-force percentile machinery over explicit citation lists.
//!
//! Given the citation counts of every world paper, the top-x% set is
//! the most-cited fraction x, counted from the most cited downward.
//! Papers tied at the cut value are assigned fractionally so the
//! world's own share of its top-x% set is exactly x; this mirrors the
//! fractional-assignment convention of the ranking data the rest of
//! the crate consumes. These routines are the ground-truth oracle the
//! analytic model is validated against.

use thiserror::Error;

use crate::citation_model::PercentileObservation;

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("level {value} outside the open interval (0, 1)")]
    LevelOutOfRange { value: f64 },
    #[error("world citation list is empty")]
    EmptyWorld,
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset position {position} out of bounds for world of {len} papers")]
    PositionOutOfBounds { position: usize, len: usize },
}

/// Citation counts per paper, one entry per publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationList {
    citations: Vec<u64>,
}

impl CitationList {
    pub fn new(citations: Vec<u64>) -> Self {
        Self { citations }
    }

    pub fn len(&self) -> usize {
        self.citations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.citations.is_empty()
    }

    pub fn citations(&self) -> &[u64] {
        &self.citations
    }

    /// Locates the top-`level` cut of the world list.
    ///
    /// Returns the smallest citation value `c` such that papers cited
    /// strictly more than `c` number at most `level * len`, together
    /// with the strict count and the fractional quota of the papers
    /// tied at `c` that belongs to the top set.
    pub fn top_set_threshold(&self, level: f64) -> Result<TopSetCut, RankingError> {
        if !(level > 0.0 && level < 1.0) {
            return Err(RankingError::LevelOutOfRange { value: level });
        }
        if self.citations.is_empty() {
            return Err(RankingError::EmptyWorld);
        }
        let target = level * self.citations.len() as f64;
        let mut sorted = self.citations.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        // Walk distinct values downward; `idx` papers lie strictly above
        // the current value. Terminates because target < len.
        let mut idx = 0;
        loop {
            let value = sorted[idx];
            let tied_end = idx + sorted[idx..].iter().take_while(|&&c| c == value).count();
            if tied_end as f64 > target {
                return Ok(TopSetCut {
                    threshold: value,
                    strict_count: idx,
                    tied_count: tied_end - idx,
                    tie_quota: target - idx as f64,
                });
            }
            idx = tied_end;
        }
    }

    /// Share of the subset (given as positions into the world list)
    /// that falls inside the world top-`level` set, with papers tied at
    /// the cut counted fractionally.
    pub fn membership_proportion(
        &self,
        subset: &[usize],
        level: f64,
    ) -> Result<PercentileObservation, RankingError> {
        if subset.is_empty() {
            return Err(RankingError::EmptySubset);
        }
        for &pos in subset {
            if pos >= self.citations.len() {
                return Err(RankingError::PositionOutOfBounds {
                    position: pos,
                    len: self.citations.len(),
                });
            }
        }
        let cut = self.top_set_threshold(level)?;
        let mut above = 0usize;
        let mut tied = 0usize;
        for &pos in subset {
            let c = self.citations[pos];
            if c > cut.threshold {
                above += 1;
            } else if c == cut.threshold {
                tied += 1;
            }
        }
        let tie_share = if tied > 0 {
            cut.tie_quota * tied as f64 / cut.tied_count as f64
        } else {
            0.0
        };
        let proportion = ((above as f64 + tie_share) / subset.len() as f64).clamp(0.0, 1.0);
        Ok(PercentileObservation::new(level, proportion)
            .expect("level and proportion already validated"))
    }
}

/// The top-x% cut of a world list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopSetCut {
    /// Smallest citation count at the cut; papers above it are wholly in
    /// the top set.
    pub threshold: u64,
    /// Number of papers cited strictly more than the threshold.
    pub strict_count: usize,
    /// Number of papers tied exactly at the threshold.
    pub tied_count: usize,
    /// Fraction of the tied papers belonging to the top set;
    /// `strict_count + tie_quota = level * len` exactly.
    pub tie_quota: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_cut_without_ties() {
        let world = CitationList::new(vec![5, 4, 3, 2, 1]);
        let cut = world.top_set_threshold(0.4).unwrap();
        assert_eq!(cut.threshold, 3);
        assert_eq!(cut.strict_count, 2);
        assert_eq!(cut.tie_quota, 0.0);
    }

    #[test]
    fn fully_tied_world() {
        let world = CitationList::new(vec![3, 3, 3, 3]);
        let cut = world.top_set_threshold(0.25).unwrap();
        assert_eq!(cut.threshold, 3);
        assert_eq!(cut.strict_count, 0);
        assert_eq!(cut.tied_count, 4);
        assert!((cut.tie_quota - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wide_level_cuts_into_the_bottom_value() {
        let world = CitationList::new(vec![5, 4, 3, 2, 1]);
        let cut = world.top_set_threshold(0.9).unwrap();
        assert_eq!(cut.threshold, 1);
        assert_eq!(cut.strict_count, 4);
        assert!((cut.tie_quota - 0.5).abs() < 1e-12);
    }

    #[test]
    fn self_membership_equals_level() {
        let world = CitationList::new(vec![9, 9, 7, 7, 7, 3, 2, 2, 1, 0]);
        let all: Vec<usize> = (0..world.len()).collect();
        for level in [0.05, 0.1, 0.25, 0.5, 0.75] {
            let obs = world.membership_proportion(&all, level).unwrap();
            assert!(
                (obs.proportion() - level).abs() < 1e-12,
                "level {level} gave {}",
                obs.proportion()
            );
        }
    }

    #[test]
    fn two_paper_subset_half_in_top() {
        let world = CitationList::new(vec![9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
        let obs = world.membership_proportion(&[0, 9], 0.2).unwrap();
        assert!((obs.proportion() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn level_and_subset_validation() {
        let world = CitationList::new(vec![1, 2, 3]);
        assert_eq!(
            world.top_set_threshold(0.0),
            Err(RankingError::LevelOutOfRange { value: 0.0 })
        );
        assert_eq!(
            world.membership_proportion(&[], 0.5),
            Err(RankingError::EmptySubset)
        );
        assert_eq!(
            world.membership_proportion(&[7], 0.5),
            Err(RankingError::PositionOutOfBounds { position: 7, len: 3 })
        );
        let empty = CitationList::new(vec![]);
        assert_eq!(empty.top_set_threshold(0.5), Err(RankingError::EmptyWorld));
    }
}
