//! Dataset-level aggregation of rank tables: per-category distribution,
//! salient co-occurrence counts, and pairwise precedence probabilities.
//!
//! Aggregation is a pure fold with an associative [`merge`](CategoryDistribution::merge),
//! so partial results computed in parallel combine to the same totals in any
//! order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::LabelMask;
use crate::ranking::{rank_ties, RankTable};

/// Counters for one category across a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    /// Images in which the category appears in the semantic map.
    pub overall: usize,
    /// Images in which the category is ranked (appears as salient).
    pub salient: usize,
    /// Images in which the category is salient and no other foreground
    /// category is present in the semantic map.
    pub salient_alone: usize,
    /// Images in which the category holds rank 1, 2, 3.
    pub rank_counts: [usize; 3],
}

impl CategoryCounts {
    /// Fraction of appearances that are salient.
    pub fn distrib(&self) -> f64 {
        ratio(self.salient, self.overall)
    }

    /// Rank-k count as a fraction of salient appearances (k is 1-based).
    pub fn rank_frac_of_salient(&self, k: usize) -> f64 {
        ratio(self.rank_counts[k - 1], self.salient)
    }

    /// Rank-k count as a fraction of overall appearances (k is 1-based).
    pub fn rank_frac_of_overall(&self, k: usize) -> f64 {
        ratio(self.rank_counts[k - 1], self.overall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-category distribution statistics over a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    /// Indexed by foreground category − 1.
    pub per_category: Vec<CategoryCounts>,
    pub num_images: usize,
}

impl CategoryDistribution {
    pub fn empty(num_categories: usize) -> Self {
        CategoryDistribution {
            per_category: vec![CategoryCounts::default(); num_categories],
            num_images: 0,
        }
    }

    pub fn num_categories(&self) -> usize {
        self.per_category.len()
    }

    pub fn counts(&self, category: u8) -> &CategoryCounts {
        &self.per_category[category as usize - 1]
    }

    /// Folds one image into the distribution.
    pub fn accumulate(&mut self, table: &RankTable, sem: &LabelMask) {
        let present = sem.present_categories();
        for &c in &present {
            if (c as usize) <= self.per_category.len() {
                self.per_category[c as usize - 1].overall += 1;
            }
        }
        for e in table.ranked() {
            if (e.category as usize) > self.per_category.len() {
                continue;
            }
            let counts = &mut self.per_category[e.category as usize - 1];
            counts.salient += 1;
            if present.len() == 1 && present[0] == e.category {
                counts.salient_alone += 1;
            }
            if let Some(pos) = e.rank_position {
                if (1..=3).contains(&pos) {
                    counts.rank_counts[pos - 1] += 1;
                }
            }
        }
        self.num_images += 1;
    }

    /// Order-independent combination of partial aggregates.
    pub fn merge(&mut self, other: &CategoryDistribution) {
        assert_eq!(self.per_category.len(), other.per_category.len());
        for (a, b) in self.per_category.iter_mut().zip(other.per_category.iter()) {
            a.overall += b.overall;
            a.salient += b.salient;
            a.salient_alone += b.salient_alone;
            for k in 0..3 {
                a.rank_counts[k] += b.rank_counts[k];
            }
        }
        self.num_images += other.num_images;
    }
}

/// Aggregates distribution statistics over aligned (table, semantic map) pairs.
pub fn distribution(
    tables: &[RankTable],
    sems: &[LabelMask],
    num_categories: usize,
) -> Result<CategoryDistribution> {
    if tables.len() != sems.len() {
        return Err(Error::domain(format!(
            "{} rank tables but {} semantic maps; inputs must pair one-to-one",
            tables.len(),
            sems.len()
        )));
    }
    let mut dist = CategoryDistribution::empty(num_categories);
    for (t, s) in tables.iter().zip(sems.iter()) {
        dist.accumulate(t, s);
    }
    Ok(dist)
}

/// Pairwise salient co-occurrence and precedence counters.
///
/// `counts` is symmetric with a zero diagonal. Precedence excludes tied pairs
/// from both directions, so `p(a over b) + p(b over a) <= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    num_categories: usize,
    /// Images where both categories are salient.
    counts: Vec<usize>,
    /// Images where the row category is ranked strictly higher (and not tied).
    wins: Vec<usize>,
    /// Images where the pair is tied (symmetric).
    ties: Vec<usize>,
    pub num_images: usize,
}

impl CooccurrenceMatrix {
    pub fn empty(num_categories: usize) -> Self {
        let n = num_categories * num_categories;
        CooccurrenceMatrix {
            num_categories,
            counts: vec![0; n],
            wins: vec![0; n],
            ties: vec![0; n],
            num_images: 0,
        }
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    fn idx(&self, a: u8, b: u8) -> usize {
        (a as usize - 1) * self.num_categories + (b as usize - 1)
    }

    pub fn count(&self, a: u8, b: u8) -> usize {
        self.counts[self.idx(a, b)]
    }

    pub fn wins(&self, a: u8, b: u8) -> usize {
        self.wins[self.idx(a, b)]
    }

    pub fn tie_count(&self, a: u8, b: u8) -> usize {
        self.ties[self.idx(a, b)]
    }

    /// Probability that `a` is ranked strictly higher than `b` across their
    /// co-occurrences; `NaN` where the pair never co-occurs.
    pub fn precedence(&self, a: u8, b: u8) -> f64 {
        let c = self.count(a, b);
        if c == 0 {
            f64::NAN
        } else {
            self.wins(a, b) as f64 / c as f64
        }
    }

    /// Folds one image into the matrix. Pairs tied per [`rank_ties`] count
    /// toward neither precedence direction.
    pub fn accumulate(&mut self, table: &RankTable, tie_epsilon: f64) {
        let groups = rank_ties(table, tie_epsilon);
        // group id per entry index, for tie lookup
        let mut group_of = vec![usize::MAX; table.entries.len()];
        for (gi, g) in groups.iter().enumerate() {
            for &ei in g {
                group_of[ei] = gi;
            }
        }
        let ranked: Vec<(usize, &crate::ranking::RankEntry)> = table
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_ranked() && (e.category as usize) <= self.num_categories)
            .collect();
        for i in 0..ranked.len() {
            for j in (i + 1)..ranked.len() {
                let (ei, a) = ranked[i];
                let (ej, b) = ranked[j];
                let ab = self.idx(a.category, b.category);
                let ba = self.idx(b.category, a.category);
                self.counts[ab] += 1;
                self.counts[ba] += 1;
                if group_of[ei] == group_of[ej] {
                    self.ties[ab] += 1;
                    self.ties[ba] += 1;
                } else if a.rank_position.unwrap() < b.rank_position.unwrap() {
                    self.wins[ab] += 1;
                } else {
                    self.wins[ba] += 1;
                }
            }
        }
        self.num_images += 1;
    }

    /// Order-independent combination of partial aggregates.
    pub fn merge(&mut self, other: &CooccurrenceMatrix) {
        assert_eq!(self.num_categories, other.num_categories);
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.wins[i] += other.wins[i];
            self.ties[i] += other.ties[i];
        }
        self.num_images += other.num_images;
    }
}

/// Aggregates salient co-occurrence statistics over a dataset.
pub fn cooccurrence(
    tables: &[RankTable],
    num_categories: usize,
    tie_epsilon: f64,
) -> CooccurrenceMatrix {
    let mut m = CooccurrenceMatrix::empty(num_categories);
    for t in tables {
        m.accumulate(t, tie_epsilon);
    }
    m
}

/// One co-occurring category in a [`CaseStudy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyRow {
    pub category: u8,
    pub cooccurrences: usize,
    /// P(focus ranked strictly higher than this category).
    pub p_focus_higher: f64,
    /// P(this category ranked strictly higher than focus).
    pub p_other_higher: f64,
}

/// Precedence report focused on one category's strongest co-occurrences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudy {
    pub focus: u8,
    pub rows: Vec<CaseStudyRow>,
}

/// The `k` categories that co-occur most often with `focus`, with both
/// precedence directions, ordered by co-occurrence count descending.
/// `k` larger than the number of available categories truncates.
pub fn case_study(matrix: &CooccurrenceMatrix, focus: u8, k: usize) -> Result<CaseStudy> {
    if focus == 0 || focus as usize > matrix.num_categories() {
        return Err(Error::domain(format!(
            "focus category {} out of range 1..={}",
            focus,
            matrix.num_categories()
        )));
    }
    let mut others: Vec<(u8, usize)> = (1..=matrix.num_categories() as u8)
        .filter(|&c| c != focus)
        .map(|c| (c, matrix.count(focus, c)))
        .filter(|&(_, n)| n > 0)
        .collect();
    others.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    others.truncate(k);
    let rows = others
        .into_iter()
        .map(|(c, n)| CaseStudyRow {
            category: c,
            cooccurrences: n,
            p_focus_higher: matrix.precedence(focus, c),
            p_other_higher: matrix.precedence(c, focus),
        })
        .collect();
    Ok(CaseStudy { focus, rows })
}
