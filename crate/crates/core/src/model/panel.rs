//! Longitudinal rating observations and the per-period transition counts
//! the likelihood depends on.

use std::collections::BTreeMap;

use crate::error::{CmcError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub company: String,
    /// Sector, 1-based.
    pub sector: usize,
    pub period: i64,
    /// Rating class, 1-based; `M + 1` is default.
    pub rating: usize,
}

/// One observed move between two consecutive periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition<'a> {
    pub company: &'a str,
    pub sector: usize,
    /// Period the move starts from.
    pub period: i64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct History {
    sector: usize,
    /// Sorted by period.
    ratings: Vec<(i64, usize)>,
}

/// Rating panel over `M` non-default classes, grouped by company.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingPanel {
    classes: usize,
    companies: BTreeMap<String, History>,
    len: usize,
}

impl RatingPanel {
    pub fn new(observations: Vec<Observation>, classes: usize) -> Result<Self> {
        let mut companies: BTreeMap<String, History> = BTreeMap::new();
        let len = observations.len();
        let default = classes + 1;
        for o in observations {
            if o.sector == 0 {
                return Err(CmcError::InvalidPanel(format!(
                    "company {}: sectors are 1-based",
                    o.company
                )));
            }
            if o.rating == 0 || o.rating > default {
                return Err(CmcError::InvalidPanel(format!(
                    "company {}: rating {} outside 1..={default}",
                    o.company, o.rating
                )));
            }
            let h = companies.entry(o.company.clone()).or_insert_with(|| History {
                sector: o.sector,
                ratings: Vec::new(),
            });
            if h.sector != o.sector {
                return Err(CmcError::InvalidPanel(format!(
                    "company {} changes sector",
                    o.company
                )));
            }
            h.ratings.push((o.period, o.rating));
        }
        for (name, h) in companies.iter_mut() {
            h.ratings.sort_unstable();
            for w in h.ratings.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(CmcError::InvalidPanel(format!(
                        "company {name} observed twice in period {}",
                        w[0].0
                    )));
                }
                if w[0].1 == default && w[1].1 < default {
                    return Err(CmcError::InvalidPanel(format!(
                        "company {name} leaves the default class in period {}",
                        w[1].0
                    )));
                }
            }
        }
        Ok(RatingPanel { classes, companies, len })
    }

    /// Number of non-default classes `M`.
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn company_count(&self) -> usize {
        self.companies.len()
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.companies.iter().flat_map(|(name, h)| {
            h.ratings.iter().map(move |&(period, rating)| Observation {
                company: name.clone(),
                sector: h.sector,
                period,
                rating,
            })
        })
    }

    /// Moves between consecutive observed periods; gaps produce none.
    pub fn transitions(&self) -> impl Iterator<Item = Transition<'_>> + '_ {
        self.companies.iter().flat_map(|(name, h)| {
            h.ratings.windows(2).filter_map(move |w| {
                (w[1].0 == w[0].0 + 1).then_some(Transition {
                    company: name.as_str(),
                    sector: h.sector,
                    period: w[0].0,
                    from: w[0].1,
                    to: w[1].1,
                })
            })
        })
    }

    /// Inclusive period range covered by the panel.
    pub fn period_range(&self) -> Option<(i64, i64)> {
        let mut it = self.companies.values().flat_map(|h| h.ratings.iter().map(|r| r.0));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.min(p), hi.max(p))))
    }

    pub fn max_sector(&self) -> usize {
        self.companies.values().map(|h| h.sector).max().unwrap_or(0)
    }

    /// Last observation of each company as (company, sector, rating).
    pub fn latest(&self) -> Vec<(String, usize, usize)> {
        self.companies
            .iter()
            .filter_map(|(name, h)| h.ratings.last().map(|&(_, r)| (name.clone(), h.sector, r)))
            .collect()
    }
}

/// Transition counts `I^t(m1, m2, s)` with shape `steps x S x M x (M+1)`.
///
/// Indices are zero-based: step `t` covers the move from the `t`-th to the
/// `(t+1)`-th period of the configured range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTensor {
    steps: usize,
    sectors: usize,
    classes: usize,
    counts: Vec<u64>,
}

impl CountTensor {
    pub fn zeros(steps: usize, sectors: usize, classes: usize) -> Self {
        CountTensor {
            steps,
            sectors,
            classes,
            counts: vec![0; steps * sectors * classes * (classes + 1)],
        }
    }

    pub fn from_raw(steps: usize, sectors: usize, classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != steps * sectors * classes * (classes + 1) {
            return Err(CmcError::InvalidPanel(format!(
                "count tensor length {} does not match shape {steps}x{sectors}x{classes}x{}",
                counts.len(),
                classes + 1
            )));
        }
        Ok(CountTensor { steps, sectors, classes, counts })
    }

    /// Counts over the panel's own period range.
    pub fn from_panel(panel: &RatingPanel, sectors: usize) -> Result<Self> {
        match panel.period_range() {
            Some((first, last)) => Self::from_panel_periods(panel, sectors, first, last),
            None => Ok(Self::zeros(0, sectors, panel.classes())),
        }
    }

    /// Counts over the inclusive period range `first..=last`. Transitions
    /// out of the default class are excluded.
    pub fn from_panel_periods(
        panel: &RatingPanel,
        sectors: usize,
        first: i64,
        last: i64,
    ) -> Result<Self> {
        let classes = panel.classes();
        if last < first {
            return Err(CmcError::InvalidPanel(format!("empty period range {first}..={last}")));
        }
        let steps = (last - first) as usize;
        let mut out = Self::zeros(steps, sectors, classes);
        for o in panel.observations() {
            if o.sector > sectors {
                return Err(CmcError::InvalidPanel(format!(
                    "company {}: sector {} outside 1..={sectors}",
                    o.company, o.sector
                )));
            }
            if o.period < first || o.period > last {
                return Err(CmcError::InvalidPanel(format!(
                    "company {}: period {} outside {first}..={last}",
                    o.company, o.period
                )));
            }
        }
        for tr in panel.transitions() {
            if tr.from == classes + 1 {
                continue;
            }
            let t = (tr.period - first) as usize;
            let idx = out.index(t, tr.sector - 1, tr.from - 1, tr.to - 1);
            out.counts[idx] += 1;
        }
        Ok(out)
    }

    #[inline]
    fn index(&self, t: usize, s: usize, from: usize, to: usize) -> usize {
        ((t * self.sectors + s) * self.classes + from) * (self.classes + 1) + to
    }

    /// Count for step `t`, sector `s`, classes `from -> to` (all zero-based).
    #[inline]
    pub fn get(&self, t: usize, s: usize, from: usize, to: usize) -> u64 {
        self.counts[self.index(t, s, from, to)]
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn scaled(&self, k: u64) -> Self {
        CountTensor {
            counts: self.counts.iter().map(|c| c * k).collect(),
            ..self.clone()
        }
    }

    /// Number of companies in step `t`, sector `s`, class `from` that moved to
    /// a class `<= from` and to a class `> from`, respectively.
    pub(crate) fn split(&self, t: usize, s: usize, from: usize) -> (u64, u64) {
        let base = self.index(t, s, from, 0);
        let row = &self.counts[base..base + self.classes + 1];
        let stay: u64 = row[..=from].iter().sum();
        let down: u64 = row[from + 1..].iter().sum();
        (stay, down)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(c: &str, sector: usize, period: i64, rating: usize) -> Observation {
        Observation { company: c.into(), sector, period, rating }
    }

    #[test]
    fn empty_panel_gives_zero_tensor() {
        let panel = RatingPanel::new(vec![], 3).unwrap();
        let t = CountTensor::from_panel_periods(&panel, 2, 1, 4).unwrap();
        assert_eq!(t.steps(), 3);
        assert_eq!(t.total(), 0);
    }

    #[test]
    fn single_transition() {
        let panel = RatingPanel::new(vec![obs("x", 1, 1, 2), obs("x", 1, 2, 3)], 3).unwrap();
        let t = CountTensor::from_panel(&panel, 1).unwrap();
        assert_eq!(t.total(), 1);
        assert_eq!(t.get(0, 0, 1, 2), 1);
    }

    #[test]
    fn hand_enumerated_three_companies() {
        // M = 2, S = 2, periods 1..=3
        let panel = RatingPanel::new(vec![
            obs("a", 1, 1, 1),
            obs("a", 1, 2, 1),
            obs("a", 1, 3, 2),
            obs("b", 2, 1, 2),
            obs("b", 2, 2, 3),
            obs("b", 2, 3, 3),
            obs("c", 1, 1, 1),
            obs("c", 1, 3, 1),
        ], 2)
        .unwrap();
        let t = CountTensor::from_panel(&panel, 2).unwrap();
        let mut expected = CountTensor::zeros(2, 2, 2);
        // a: 1->1 at step 0, 1->2 at step 1; b: 2->3 at step 0, 3->3 excluded;
        // c: gap, nothing
        for (step, s, f, to) in [(0, 0, 0, 0), (1, 0, 0, 1), (0, 1, 1, 2)] {
            let i = expected.index(step, s, f, to);
            expected.counts[i] += 1;
        }
        assert_eq!(t, expected);
    }

    #[test]
    fn out_of_range_rating_is_rejected() {
        assert!(RatingPanel::new(vec![obs("a", 1, 1, 5), obs("a", 1, 2, 5)], 2).is_err());
        let panel = RatingPanel::new(vec![obs("a", 3, 1, 1)], 2).unwrap();
        assert!(CountTensor::from_panel(&panel, 2).is_err());
    }

    #[test]
    fn panel_invariants() {
        assert!(RatingPanel::new(vec![obs("a", 1, 1, 1), obs("a", 1, 1, 2)], 2).is_err());
        assert!(RatingPanel::new(vec![obs("a", 1, 1, 1), obs("a", 2, 2, 1)], 2).is_err());
        assert!(RatingPanel::new(vec![obs("a", 1, 1, 3), obs("a", 1, 2, 1)], 2).is_err());
        // class 3 is not default when M = 3
        assert!(RatingPanel::new(vec![obs("a", 1, 1, 3), obs("a", 1, 2, 1)], 3).is_ok());
    }
}
