//! Exhaustive ground truth for small games.
//!
//! Reachability search over game configurations `(pebbled bitmask,
//! erasures used, target ever pebbled)` decides winnability exactly for
//! games up to 64 nodes. Moves are generated from the same rules the
//! game module enforces, with erase edges from every pebbled node while
//! budget remains.

use std::collections::HashMap;
use std::thread;

use thiserror::Error;

use crate::game::{GameParams, Move, Schedule};

/// Visited-state cap used when none is configured.
pub const DEFAULT_STATE_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub game_length: u64,
    pub pebble_budget: u64,
    pub erasure_budget: u64,
    /// Abort once more than this many distinct states have been visited.
    pub state_limit: u64,
    /// Keep predecessor links and return a winning schedule.
    pub want_witness: bool,
    /// Worker threads for frontier expansion. Results are identical for
    /// any value; 1 avoids thread spawning entirely.
    pub threads: usize,
}

impl SearchConfig {
    pub fn new(game_length: u64, pebble_budget: u64, erasure_budget: u64) -> Self {
        SearchConfig {
            game_length,
            pebble_budget,
            erasure_budget,
            state_limit: DEFAULT_STATE_LIMIT,
            want_witness: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverResult {
    pub winnable: bool,
    pub states_visited: u64,
    /// Present iff winnable and requested; replays to a win in strict
    /// mode under the queried budgets.
    pub witness: Option<Schedule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("game_length {game_length} not in 1..=64")]
    GameTooLong { game_length: u64 },
    #[error("pebble_budget must be at least 1")]
    ZeroPebbleBudget,
    #[error("erasure_budget {erasure_budget} too large for the state encoding")]
    ErasureBudgetTooLarge { erasure_budget: u64 },
    #[error("state limit exceeded after visiting {states_visited} states; result unknown")]
    StateLimitExceeded { states_visited: u64 },
}

/// Packed search state: board mask in bits 0..64, erasures used in bits
/// 64..96, target-ever-pebbled flag in bit 96.
type State = u128;

const ERASURE_SHIFT: u32 = 64;
const TARGET_BIT: u32 = 96;

fn encode(mask: u64, erasures: u32, target: bool) -> State {
    mask as u128 | (erasures as u128) << ERASURE_SHIFT | (target as u128) << TARGET_BIT
}

fn mask_of(state: State) -> u64 {
    state as u64
}

fn erasures_of(state: State) -> u32 {
    (state >> ERASURE_SHIFT) as u32
}

fn target_of(state: State) -> bool {
    state >> TARGET_BIT & 1 == 1
}

struct Rules {
    length_mask: u64,
    last_bit: u64,
    pebble_budget: u32,
    erasure_budget: u32,
}

impl Rules {
    /// Successors in canonical move order: places by ascending node, then
    /// removes, then erases. The order fixes which witness the search
    /// reconstructs.
    fn successors(&self, state: State, out: &mut Vec<(State, Move)>) {
        let mask = mask_of(state);
        let erasures = erasures_of(state);
        let target = target_of(state);

        // A node is reachable if it is node 1 or its predecessor is pebbled.
        let reachable = (mask << 1 | 1) & self.length_mask;

        if mask.count_ones() < self.pebble_budget {
            let mut placeable = reachable & !mask;
            while placeable != 0 {
                let bit = placeable & placeable.wrapping_neg();
                let node = bit.trailing_zeros() as u64 + 1;
                let reached = target || bit == self.last_bit;
                out.push((encode(mask | bit, erasures, reached), Move::place(node)));
                placeable &= placeable - 1;
            }
        }

        let mut removable = reachable & mask;
        while removable != 0 {
            let bit = removable & removable.wrapping_neg();
            let node = bit.trailing_zeros() as u64 + 1;
            out.push((encode(mask & !bit, erasures, target), Move::remove(node)));
            removable &= removable - 1;
        }

        if erasures < self.erasure_budget {
            let mut erasable = mask;
            while erasable != 0 {
                let bit = erasable & erasable.wrapping_neg();
                let node = bit.trailing_zeros() as u64 + 1;
                out.push((encode(mask & !bit, erasures + 1, target), Move::erase(node)));
                erasable &= erasable - 1;
            }
        }
    }
}

fn is_goal(state: State) -> bool {
    mask_of(state) == 0 && target_of(state)
}

fn validate(config: &SearchConfig) -> Result<(), SolverError> {
    if config.game_length < 1 || config.game_length > 64 {
        return Err(SolverError::GameTooLong { game_length: config.game_length });
    }
    if config.pebble_budget == 0 {
        return Err(SolverError::ZeroPebbleBudget);
    }
    if config.erasure_budget > u32::MAX as u64 {
        return Err(SolverError::ErasureBudgetTooLarge { erasure_budget: config.erasure_budget });
    }
    Ok(())
}

/// Decide whether the configured game is winnable at all.
///
/// Breadth-first reachability from the empty board; the goal is any
/// state with a clear board whose target flag is set. Deterministic:
/// the same config yields the same result, visit count, and witness
/// regardless of `threads`.
pub fn winnable(config: &SearchConfig) -> Result<SolverResult, SolverError> {
    validate(config)?;
    let rules = Rules {
        length_mask: if config.game_length == 64 { u64::MAX } else { (1u64 << config.game_length) - 1 },
        last_bit: 1u64 << (config.game_length - 1),
        pebble_budget: config.pebble_budget.min(64) as u32,
        erasure_budget: config.erasure_budget.min(u32::MAX as u64) as u32,
    };
    let threads = config.threads.max(1);

    let start = encode(0, 0, false);
    // Parent links double as the visited set; without a witness request
    // the value is dropped at insert time via a unit placeholder map.
    let mut visited: HashMap<State, Option<(State, Move)>> = HashMap::new();
    visited.insert(start, None);
    let mut states_visited: u64 = 1;
    let mut frontier = vec![start];
    let mut scratch: Vec<(State, Move)> = Vec::new();

    while !frontier.is_empty() {
        let batches: Vec<Vec<(State, State, Move)>> = if threads == 1 || frontier.len() < 1024 {
            let mut batch = Vec::new();
            for &state in &frontier {
                scratch.clear();
                rules.successors(state, &mut scratch);
                batch.extend(scratch.iter().map(|&(child, mv)| (child, state, mv)));
            }
            vec![batch]
        } else {
            let chunk_size = frontier.len().div_ceil(threads);
            thread::scope(|scope| {
                let handles: Vec<_> = frontier
                    .chunks(chunk_size)
                    .map(|chunk| {
                        let rules = &rules;
                        scope.spawn(move || {
                            let mut batch = Vec::new();
                            let mut local = Vec::new();
                            for &state in chunk {
                                local.clear();
                                rules.successors(state, &mut local);
                                batch.extend(local.iter().map(|&(child, mv)| (child, state, mv)));
                            }
                            batch
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("solver worker panicked")).collect()
            })
        };

        let mut next = Vec::new();
        for (child, parent, mv) in batches.into_iter().flatten() {
            if visited.contains_key(&child) {
                continue;
            }
            visited.insert(child, config.want_witness.then_some((parent, mv)));
            states_visited += 1;
            if states_visited > config.state_limit {
                return Err(SolverError::StateLimitExceeded { states_visited });
            }
            if is_goal(child) {
                let witness = config.want_witness.then(|| {
                    let mut moves = Vec::new();
                    let mut cursor = child;
                    while let Some(&Some((parent, mv))) = visited.get(&cursor) {
                        moves.push(mv);
                        cursor = parent;
                    }
                    moves.reverse();
                    Schedule::new(
                        GameParams {
                            game_length: config.game_length,
                            pebble_budget: config.pebble_budget,
                            erasure_budget: config.erasure_budget,
                        },
                        moves,
                    )
                });
                return Ok(SolverResult { winnable: true, states_visited, witness });
            }
            next.push(child);
        }
        frontier = next;
    }

    Ok(SolverResult { winnable: false, states_visited, witness: None })
}

/// Largest game length up to `length_cap` that is winnable under the
/// template's budgets. Winnability is monotone in the length (any
/// winning play restricted to a shorter board still wins), so a binary
/// search over the length suffices.
pub fn max_winnable(template: &SearchConfig, length_cap: u64) -> Result<u64, SolverError> {
    if length_cap < 1 || length_cap > 64 {
        return Err(SolverError::GameTooLong { game_length: length_cap });
    }
    let probe = |game_length: u64| -> Result<bool, SolverError> {
        let config = SearchConfig {
            game_length,
            want_witness: false,
            ..*template
        };
        Ok(winnable(&config)?.winnable)
    };
    if !probe(1)? {
        // Unreachable with a validated pebble budget; kept for safety.
        return Ok(0);
    }
    let mut lo = 1u64;
    let mut hi = length_cap;
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::run_schedule;
    use crate::strategies::{bennett_schedule, erasure_schedule};
    use std::collections::HashSet;

    fn solve(game_length: u64, pebbles: u64, erasures: u64) -> SolverResult {
        winnable(&SearchConfig::new(game_length, pebbles, erasures)).unwrap()
    }

    #[test]
    fn one_pebble_cannot_win_length_two() {
        assert!(!solve(2, 1, 0).winnable);
    }

    #[test]
    fn two_pebbles_win_length_three_but_not_four() {
        assert!(solve(3, 2, 0).winnable);
        assert!(!solve(4, 2, 0).winnable);
    }

    #[test]
    fn erasures_extend_two_pebbles_to_length_four() {
        assert!(solve(4, 2, 3).winnable);
    }

    #[test]
    fn single_node_is_winnable() {
        assert!(solve(1, 1, 0).winnable);
    }

    #[test]
    fn max_winnable_matches_powers_of_two() {
        for n in 1..=4u64 {
            let template = SearchConfig::new(1, n, 0);
            let max = max_winnable(&template, 20).unwrap();
            assert_eq!(max, (1 << n) - 1, "n={n}");
        }
    }

    #[test]
    fn bennett_witnesses_the_frontier() {
        for n in 1..=4u32 {
            let schedule = bennett_schedule(n).unwrap();
            let template = SearchConfig::new(1, n as u64, 0);
            let max = max_winnable(&template, 20).unwrap();
            assert_eq!(schedule.params.game_length, max);
            assert!(run_schedule(&schedule, true).unwrap().metrics.won);
        }
    }

    #[test]
    fn witness_replays_to_win_under_queried_budgets() {
        let mut config = SearchConfig::new(4, 2, 3);
        config.want_witness = true;
        let result = winnable(&config).unwrap();
        assert!(result.winnable);
        let witness = result.witness.unwrap();
        assert_eq!(witness.params.game_length, 4);
        assert_eq!(witness.params.pebble_budget, 2);
        assert_eq!(witness.params.erasure_budget, 3);
        let replay = run_schedule(&witness, true).unwrap();
        assert!(replay.metrics.won);
        assert!(replay.metrics.peak_pebbles <= 2);
        assert!(replay.metrics.erasures <= 3);
    }

    #[test]
    fn witness_is_deterministic() {
        let mut config = SearchConfig::new(6, 3, 1);
        config.want_witness = true;
        let a = winnable(&config).unwrap();
        let b = winnable(&config).unwrap();
        assert_eq!(a, b);
        config.threads = 4;
        let c = winnable(&config).unwrap();
        assert_eq!(a.winnable, c.winnable);
        assert_eq!(a.states_visited, c.states_visited);
        assert_eq!(a.witness, c.witness);
    }

    #[test]
    fn erasure_generator_agrees_with_search() {
        for n in 2..=4u32 {
            for m in 1..=3u64 {
                let game_length = m << (n - 1);
                let result = solve(game_length, n as u64, 2 * m - 1);
                assert!(result.winnable, "n={n} m={m}");
                let schedule = erasure_schedule(n, m).unwrap();
                assert!(run_schedule(&schedule, true).unwrap().metrics.won);
            }
        }
    }

    #[test]
    fn max_winnable_is_monotone_in_both_budgets() {
        let mut table = Vec::new();
        for pebbles in 1..=4u64 {
            for erasures in 0..=3u64 {
                let template = SearchConfig::new(1, pebbles, erasures);
                table.push((pebbles, erasures, max_winnable(&template, 24).unwrap()));
            }
        }
        for &(p, e, max) in &table {
            for &(p2, e2, max2) in &table {
                if p2 >= p && e2 >= e {
                    assert!(max2 >= max, "({p2},{e2}) vs ({p},{e})");
                }
            }
        }
    }

    #[test]
    fn state_limit_aborts_search() {
        let mut config = SearchConfig::new(16, 8, 0);
        config.state_limit = 10;
        assert!(matches!(
            winnable(&config),
            Err(SolverError::StateLimitExceeded { states_visited }) if states_visited > 10
        ));
    }

    #[test]
    fn rejects_out_of_range_configs() {
        assert!(matches!(
            winnable(&SearchConfig::new(65, 2, 0)),
            Err(SolverError::GameTooLong { .. })
        ));
        assert!(matches!(
            winnable(&SearchConfig::new(0, 2, 0)),
            Err(SolverError::GameTooLong { .. })
        ));
        assert!(matches!(
            winnable(&SearchConfig::new(4, 0, 0)),
            Err(SolverError::ZeroPebbleBudget)
        ));
    }

    /// Independent transcription of the move rules on a plain set,
    /// compared against the bitmask successor generator.
    fn reference_successors(
        game_length: u64,
        pebble_budget: u64,
        erasure_budget: u64,
        pebbled: &HashSet<u64>,
        erasures: u64,
        target: bool,
    ) -> Vec<(Vec<u64>, u64, bool, Move)> {
        let mut out = Vec::new();
        let sorted = |s: &HashSet<u64>| {
            let mut v: Vec<u64> = s.iter().copied().collect();
            v.sort_unstable();
            v
        };
        for node in 1..=game_length {
            let reachable = node == 1 || pebbled.contains(&(node - 1));
            if !pebbled.contains(&node) && reachable && (pebbled.len() as u64) < pebble_budget {
                let mut next = pebbled.clone();
                next.insert(node);
                out.push((sorted(&next), erasures, target || node == game_length, Move::place(node)));
            }
        }
        for node in 1..=game_length {
            let reachable = node == 1 || pebbled.contains(&(node - 1));
            if pebbled.contains(&node) && reachable {
                let mut next = pebbled.clone();
                next.remove(&node);
                out.push((sorted(&next), erasures, target, Move::remove(node)));
            }
        }
        for node in 1..=game_length {
            if pebbled.contains(&node) && erasures < erasure_budget {
                let mut next = pebbled.clone();
                next.remove(&node);
                out.push((sorted(&next), erasures + 1, target, Move::erase(node)));
            }
        }
        out
    }

    #[test]
    fn bitmask_successors_match_reference_rules() {
        let game_length = 5u64;
        let pebble_budget = 3u64;
        let erasure_budget = 2u64;
        let rules = Rules {
            length_mask: (1 << game_length) - 1,
            last_bit: 1 << (game_length - 1),
            pebble_budget: pebble_budget as u32,
            erasure_budget: erasure_budget as u32,
        };
        for mask in 0u64..(1 << game_length) {
            if mask.count_ones() as u64 > pebble_budget {
                continue;
            }
            for erasures in 0..=erasure_budget {
                for target in [false, true] {
                    let mut got = Vec::new();
                    rules.successors(encode(mask, erasures as u32, target), &mut got);
                    let got: Vec<(Vec<u64>, u64, bool, Move)> = got
                        .into_iter()
                        .map(|(s, mv)| {
                            let m = mask_of(s);
                            let nodes: Vec<u64> =
                                (1..=game_length).filter(|&n| m >> (n - 1) & 1 == 1).collect();
                            (nodes, erasures_of(s) as u64, target_of(s), mv)
                        })
                        .collect();
                    let pebbled: HashSet<u64> =
                        (1..=game_length).filter(|&n| mask >> (n - 1) & 1 == 1).collect();
                    let expected = reference_successors(
                        game_length,
                        pebble_budget,
                        erasure_budget,
                        &pebbled,
                        erasures,
                        target,
                    );
                    assert_eq!(got, expected, "mask={mask:b} erasures={erasures} target={target}");
                }
            }
        }
    }
}
