//! Exact pair counting for the uncensored estimators.
//!
//! A direct scan over ordered pairs is O(n^2 K); the counts here are
//! computed in O(n log n) per event type with a rank-indexed Fenwick tree,
//! sweeping subjects in time order. All tallies are exact (integers, plus
//! halves under tie credit), so the result is identical to the pair scan.

use crate::numeric::{dense_ranks, Fenwick};

/// Tallies accumulated for one event type `d` over ordered pairs (i, j):
/// `i` ranges over subjects with event `d` no later than the horizon,
/// `j` over comparable partners (`T_i < T_j` or `D_j != d`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct EventTallies {
    /// Comparable pairs.
    pub den_all: f64,
    /// Comparable pairs with `risk_i > risk_j` (ties per tie credit).
    pub num_all: f64,
    /// Comparable pairs whose `i` is correctly type-predicted.
    pub den_correct: f64,
    /// Comparable, correctly predicted, and risk-ordered.
    pub num_correct: f64,
}

impl EventTallies {
    pub(crate) fn add(&mut self, other: &EventTallies) {
        self.den_all += other.den_all;
        self.num_all += other.num_all;
        self.den_correct += other.den_correct;
        self.num_correct += other.num_correct;
    }
}

/// Count pairs for event type `d` on uncensored data.
///
/// For subject `i` with event `d` at `T_i <= horizon`, the comparable
/// partners are everyone except the type-`d` subjects with `T_j <= T_i`
/// (which is exactly `T_i < T_j or D_j != d` on uncensored data, with `i`
/// itself excluded). Concordant partners additionally have a strictly
/// smaller risk score for event `d`; equal scores earn `tie_credit`.
pub(crate) fn uncensored_event_tallies(
    times: &[f64],
    event_codes: &[u32],
    risk_col: &[f64],
    correct: &[bool],
    horizon: f64,
    d: u32,
    tie_credit: f64,
) -> EventTallies {
    let n = times.len();
    let (ranks, n_ranks) = dense_ranks(risk_col);

    // global rank census over all subjects
    let mut rank_count = vec![0u64; n_ranks];
    for &r in &ranks {
        rank_count[r] += 1;
    }
    let mut less_prefix = vec![0u64; n_ranks];
    let mut acc = 0u64;
    for r in 0..n_ranks {
        less_prefix[r] = acc;
        acc += rank_count[r];
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut tallies = EventTallies::default();
    let mut seen_d = Fenwick::new(n_ranks);
    let mut n_d_through = 0u64; // type-d subjects with time <= current group

    let mut pos = 0usize;
    while pos < n {
        let group_time = times[order[pos]];
        if group_time > horizon {
            break; // no further i can qualify; later j only matter globally
        }
        let mut end = pos;
        while end < n && times[order[end]] == group_time {
            end += 1;
        }
        // partners with T_j <= T_i include the whole tie group
        for &idx in &order[pos..end] {
            if event_codes[idx] == d {
                seen_d.insert(ranks[idx]);
                n_d_through += 1;
            }
        }
        for &idx in &order[pos..end] {
            if event_codes[idx] != d {
                continue;
            }
            let den = (n as u64 - n_d_through) as f64;
            let r = ranks[idx];
            let less_restricted = seen_d.count_below(r);
            let eq_restricted_excl_self = seen_d.count_through(r) - less_restricted - 1;
            let strict = less_prefix[r] - less_restricted;
            let tied = (rank_count[r] - 1) - eq_restricted_excl_self;
            let num = strict as f64 + tie_credit * tied as f64;
            tallies.den_all += den;
            tallies.num_all += num;
            if correct[idx] {
                tallies.den_correct += den;
                tallies.num_correct += num;
            }
        }
        pos = end;
    }
    tallies
}
