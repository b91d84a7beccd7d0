//! Deterministic schedule generators.
//!
//! All generators are pure: the same inputs yield byte-identical canonical
//! schedules. Every generated schedule replays to a win in strict mode
//! within the budgets stated in its parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameParams, Move, Node, Schedule};

/// Generators refuse to build anything longer than this.
pub const MAX_SCHEDULE_MOVES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("{param} must be at least {min}, got {got}")]
    ParamTooSmall { param: &'static str, min: u64, got: u64 },
    #[error("schedule would need {moves} moves, over the {MAX_SCHEDULE_MOVES} cap")]
    TooManyMoves { moves: u128 },
    #[error("game length overflows for the requested parameters")]
    LengthOverflow,
}

fn check_move_count(moves: u128) -> Result<(), StrategyError> {
    if moves > MAX_SCHEDULE_MOVES as u128 {
        return Err(StrategyError::TooManyMoves { moves });
    }
    Ok(())
}

/// Full-history play: place every node left to right, then remove them
/// right to left. Space cost equals the game length; no erasures.
pub fn naive_schedule(game_length: u64) -> Result<Schedule, StrategyError> {
    if game_length < 1 {
        return Err(StrategyError::ParamTooSmall { param: "game_length", min: 1, got: game_length });
    }
    check_move_count(2 * game_length as u128)?;
    let mut moves = Vec::with_capacity(2 * game_length as usize);
    moves.extend((1..=game_length).map(Move::place));
    moves.extend((1..=game_length).rev().map(Move::remove));
    let params = GameParams { game_length, pebble_budget: game_length, erasure_budget: 0 };
    Ok(Schedule::new(params, moves))
}

/// Emit the recursive advance over an interval of length `2^k - 1`
/// starting at `start`. Precondition: the node before `start` is pebbled
/// (or `start` is node 1) and the interval is clear; postcondition: `k`
/// pebbles sit on the interval, one of them on its last node.
///
/// The interval splits as `B i B' i' ... b last` with sub-block sizes
/// halving left to right: advance a sub-block, pebble the node after it,
/// retract the sub-block, and continue from that new node.
fn emit_advance(k: u32, start: Node, out: &mut Vec<Move>) {
    let mut block_start = start;
    for i in 1..=k {
        let j = k - i;
        let block_len = (1u64 << j) - 1;
        emit_advance(j, block_start, out);
        out.push(Move::place(block_start + block_len));
        emit_retract(j, block_start, out);
        block_start += block_len + 1;
    }
}

/// Exact move-wise inverse of [`emit_advance`]: same moves in reverse
/// order with place and remove swapped.
fn emit_retract(k: u32, start: Node, out: &mut Vec<Move>) {
    let mut forward = Vec::new();
    emit_advance(k, start, &mut forward);
    out.extend(forward.into_iter().rev().map(Move::inverse));
}

/// Recursive checkpointing play: wins length `2^n - 1` with `n` pebbles
/// and no erasures in `3^n - 1` moves. The second half is the exact
/// move-wise inverse of the first.
pub fn bennett_schedule(n: u32) -> Result<Schedule, StrategyError> {
    if n < 1 {
        return Err(StrategyError::ParamTooSmall { param: "n", min: 1, got: n as u64 });
    }
    let total = 3u128.pow(n) - 1;
    check_move_count(total)?;
    let game_length = (1u64 << n) - 1;
    let mut moves = Vec::with_capacity(total as usize);
    emit_advance(n, 1, &mut moves);
    let forward: Vec<Move> = moves.clone();
    moves.extend(forward.into_iter().rev().map(Move::inverse));
    let params = GameParams { game_length, pebble_budget: n as u64, erasure_budget: 0 };
    Ok(Schedule::new(params, moves))
}

/// Retract an advanced block whose entry node has already been erased.
///
/// After [`emit_advance`] the block holds pebbles on its midpoint and on
/// the advance configuration of its right half. The right half retracts
/// normally against the midpoint; the midpoint itself is then stranded
/// (everything to its left is clear and unreachable) and must be erased.
fn emit_strand_retract(k: u32, start: Node, out: &mut Vec<Move>) {
    debug_assert!(k >= 1);
    let half = 1u64 << (k - 1);
    if k > 1 {
        emit_retract(k - 1, start + half, out);
    }
    out.push(Move::erase(start + half - 1));
}

/// Erasure-assisted play: wins length `m * 2^(n-1)` with `n` pebbles and
/// exactly `2m - 1` erasures.
///
/// The board splits into `m` blocks of length `2^(n-1) - 1`, each followed
/// by an anchor node. Each block is advanced with `n - 1` pebbles against
/// the previous anchor, the spent anchor is erased to free a pebble, the
/// next anchor is pebbled, and the block is retracted. From the second
/// block on the retraction strands one pebble, which costs a second
/// erasure; the final anchor is erased to clear the board.
pub fn erasure_schedule(n: u32, m: u64) -> Result<Schedule, StrategyError> {
    if n < 2 {
        return Err(StrategyError::ParamTooSmall { param: "n", min: 2, got: n as u64 });
    }
    if m < 1 {
        return Err(StrategyError::ParamTooSmall { param: "m", min: 1, got: m });
    }
    let k = n - 1;
    let block_len = (1u64 << k) - 1;
    let game_length = m
        .checked_mul(block_len + 1)
        .ok_or(StrategyError::LengthOverflow)?;
    let total = 3u128.pow(k) + (m as u128 - 1) * (2 * 3u128.pow(k - 1) + 2) + 1;
    check_move_count(total)?;

    let mut moves = Vec::with_capacity(total as usize);
    for i in 1..=m {
        let block_start = (i - 1) * (block_len + 1) + 1;
        let anchor = block_start + block_len;
        emit_advance(k, block_start, &mut moves);
        if i > 1 {
            moves.push(Move::erase(anchor - block_len - 1));
        }
        moves.push(Move::place(anchor));
        if i == 1 {
            emit_retract(k, block_start, &mut moves);
        } else {
            emit_strand_retract(k, block_start, &mut moves);
        }
    }
    moves.push(Move::erase(game_length));

    let params = GameParams {
        game_length,
        pebble_budget: n as u64,
        erasure_budget: 2 * m - 1,
    };
    Ok(Schedule::new(params, moves))
}

/// Emit the k-ary advance over an interval of length `arity^level`
/// starting at `start`. Precondition: the node before `start` is pebbled
/// (or `start` is node 1); postcondition: one net new pebble on the
/// interval's last node.
fn emit_kary(arity: u64, level: u32, start: Node, out: &mut Vec<Move>) {
    if level == 0 {
        out.push(Move::place(start));
        return;
    }
    let sub = arity.pow(level - 1);
    for i in 0..arity {
        emit_kary(arity, level - 1, start + i * sub, out);
    }
    for i in (0..arity - 1).rev() {
        emit_kary_inverse(arity, level - 1, start + i * sub, out);
    }
}

fn emit_kary_inverse(arity: u64, level: u32, start: Node, out: &mut Vec<Move>) {
    let mut forward = Vec::new();
    emit_kary(arity, level, start, &mut forward);
    out.extend(forward.into_iter().rev().map(Move::inverse));
}

/// Generalized checkpointing play with branching factor `k`: wins length
/// `k^n` with `n*(k-1) + 1` pebbles and no erasures in `2*(2k-1)^n`
/// moves. For `k = 2` this covers one node more than
/// [`bennett_schedule`] at the cost of one extra pebble.
pub fn kary_schedule(k: u64, n: u32) -> Result<Schedule, StrategyError> {
    if k < 2 {
        return Err(StrategyError::ParamTooSmall { param: "k", min: 2, got: k });
    }
    if n < 1 {
        return Err(StrategyError::ParamTooSmall { param: "n", min: 1, got: n as u64 });
    }
    let game_length = k
        .checked_pow(n)
        .ok_or(StrategyError::LengthOverflow)?;
    let total = 2 * (2 * k as u128 - 1).pow(n);
    check_move_count(total)?;
    let mut moves = Vec::with_capacity(total as usize);
    emit_kary(k, n, 1, &mut moves);
    let forward: Vec<Move> = moves.clone();
    moves.extend(forward.into_iter().rev().map(Move::inverse));
    let params = GameParams {
        game_length,
        pebble_budget: n as u64 * (k - 1) + 1,
        erasure_budget: 0,
    };
    Ok(Schedule::new(params, moves))
}

/// One row of the space-for-erasures exchange at fixed game length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub pebbles: u64,
    pub erasures: u64,
    pub moves: u64,
    pub game_length: u64,
}

/// For fixed game length `2^n`, trade pebbles for erasures: row `j` plays
/// with `n + 1 - j` pebbles and `2^(j+1) - 1` erasures, backed by
/// [`erasure_schedule`]`(n + 1 - j, 2^j)`. Every row is replayed strictly
/// before it is reported; `moves` is the exact replayed count.
pub fn tradeoff_table(n: u32) -> Result<Vec<TradeoffPoint>, StrategyError> {
    if n < 2 {
        return Err(StrategyError::ParamTooSmall { param: "n", min: 2, got: n as u64 });
    }
    let mut rows = Vec::with_capacity(n as usize);
    for j in 0..n {
        let pebbles = (n + 1 - j) as u64;
        let m = 1u64 << j;
        let schedule = erasure_schedule(n + 1 - j, m)?;
        let replay = crate::game::run_schedule(&schedule, true)
            .expect("generated erasure schedule must replay");
        assert!(replay.metrics.won, "generated erasure schedule must win");
        debug_assert_eq!(replay.metrics.peak_pebbles, pebbles);
        rows.push(TradeoffPoint {
            pebbles,
            erasures: replay.metrics.erasures,
            moves: replay.metrics.steps,
            game_length: schedule.params.game_length,
        });
    }
    Ok(rows)
}

/// CSV rendering with the fixed header `pebbles,erasures,moves,game_length`.
pub fn tradeoff_csv(rows: &[TradeoffPoint]) -> String {
    let mut out = String::from("pebbles,erasures,moves,game_length\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.pebbles, row.erasures, row.moves, row.game_length
        ));
    }
    out
}
