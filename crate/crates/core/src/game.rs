//! The pebble game on a linear list of nodes `1..=game_length`.
//!
//! A pool of `pebble_budget` pebbles is placed on and removed from nodes
//! under a locality rule: node `i > 1` can only be touched while node
//! `i - 1` carries a pebble, node `1` is always reachable. An `Erase`
//! deletes a pebble unconditionally but draws on a separate
//! `erasure_budget`. The game is won by pebbling the last node and then
//! clearing the board.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based node index into the game's linear list.
pub type Node = u64;

/// The three move kinds. `Erase` is distinguished from `Remove` by intent:
/// it always draws on the erasure budget, even where a plain `Remove`
/// would have been legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Place,
    Remove,
    Erase,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Place => "place",
            Op::Remove => "remove",
            Op::Erase => "erase",
        })
    }
}

/// A single game action on one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub op: Op,
    pub node: Node,
}

impl Move {
    pub fn place(node: Node) -> Self {
        Move { op: Op::Place, node }
    }

    pub fn remove(node: Node) -> Self {
        Move { op: Op::Remove, node }
    }

    pub fn erase(node: Node) -> Self {
        Move { op: Op::Erase, node }
    }

    /// The move that undoes this one: `Place` ↔ `Remove`.
    ///
    /// `Erase` has no inverse (the pebble's content is gone); asking for
    /// one is a programming error in a generator.
    pub fn inverse(self) -> Self {
        match self.op {
            Op::Place => Move::remove(self.node),
            Op::Remove => Move::place(self.node),
            Op::Erase => panic!("erase moves have no inverse"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.op, self.node)
    }
}

/// Fixed parameters of one game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameParams {
    /// Number of nodes (the game length).
    pub game_length: u64,
    /// Size of the pebble pool.
    pub pebble_budget: u64,
    /// Maximum number of `Erase` moves.
    pub erasure_budget: u64,
}

impl GameParams {
    pub fn new(game_length: u64, pebble_budget: u64, erasure_budget: u64) -> Result<Self, ParamError> {
        let params = GameParams { game_length, pebble_budget, erasure_budget };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.game_length == 0 {
            return Err(ParamError::ZeroGameLength);
        }
        if self.pebble_budget == 0 {
            return Err(ParamError::ZeroPebbleBudget);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("game_length must be at least 1")]
    ZeroGameLength,
    #[error("pebble_budget must be at least 1")]
    ZeroPebbleBudget,
}

/// Why a `Place`, `Remove`, or `Erase` violated the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllegalMoveReason {
    NodeAlreadyPebbled,
    NodeUnpebbled,
    PredecessorUnpebbled,
}

impl fmt::Display for IllegalMoveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalMoveReason::NodeAlreadyPebbled => "node is already pebbled",
            IllegalMoveReason::NodeUnpebbled => "node carries no pebble",
            IllegalMoveReason::PredecessorUnpebbled => "predecessor node is unpebbled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("node {node} out of range 1..={game_length}")]
    NodeOutOfRange { node: Node, game_length: u64 },
    #[error("illegal {op} on node {node}: {reason}")]
    IllegalMove { op: Op, node: Node, reason: IllegalMoveReason },
    #[error("no free pebble for place on node {node} (pebble budget {budget})")]
    PebbleExhausted { node: Node, budget: u64 },
    #[error("erase on node {node} exceeds erasure budget {budget}")]
    ErasureBudgetExceeded { node: Node, budget: u64 },
}

impl MoveError {
    /// Stable short name used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            MoveError::NodeOutOfRange { .. } => "NodeOutOfRange",
            MoveError::IllegalMove { .. } => "IllegalMove",
            MoveError::PebbleExhausted { .. } => "PebbleExhausted",
            MoveError::ErasureBudgetExceeded { .. } => "ErasureBudgetExceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("{} at move {index}: {source}", source.kind())]
    Move {
        index: usize,
        #[source]
        source: MoveError,
    },
}

/// Compact pebble membership set: one bit per node, plus a running count.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PebbleSet {
    words: Vec<u64>,
    count: u64,
}

impl PebbleSet {
    fn new(game_length: u64) -> Self {
        let words = vec![0u64; (game_length as usize).div_ceil(64)];
        PebbleSet { words, count: 0 }
    }

    fn contains(&self, node: Node) -> bool {
        let bit = node - 1;
        self.words[(bit / 64) as usize] >> (bit % 64) & 1 == 1
    }

    fn insert(&mut self, node: Node) {
        let bit = node - 1;
        self.words[(bit / 64) as usize] |= 1 << (bit % 64);
        self.count += 1;
    }

    fn remove(&mut self, node: Node) {
        let bit = node - 1;
        self.words[(bit / 64) as usize] &= !(1 << (bit % 64));
        self.count -= 1;
    }
}

/// Live game position plus play accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    params: GameParams,
    pebbled: PebbleSet,
    erasures_used: u64,
    target_reached: bool,
    steps_taken: u64,
    peak_pebbles: u64,
}

impl GameState {
    /// Start position: empty board, all pebbles free.
    pub fn new(params: GameParams) -> Result<Self, ParamError> {
        params.validate()?;
        Ok(GameState {
            params,
            pebbled: PebbleSet::new(params.game_length),
            erasures_used: 0,
            target_reached: false,
            steps_taken: 0,
            peak_pebbles: 0,
        })
    }

    pub fn params(&self) -> GameParams {
        self.params
    }

    pub fn is_pebbled(&self, node: Node) -> bool {
        node >= 1 && node <= self.params.game_length && self.pebbled.contains(node)
    }

    pub fn pebbled_count(&self) -> u64 {
        self.pebbled.count
    }

    pub fn pebbled_nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (1..=self.params.game_length).filter(|&n| self.pebbled.contains(n))
    }

    pub fn erasures_used(&self) -> u64 {
        self.erasures_used
    }

    /// True once the last node has ever carried a pebble. Monotone.
    pub fn target_reached(&self) -> bool {
        self.target_reached
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn peak_pebbles(&self) -> u64 {
        self.peak_pebbles
    }

    /// Won so far: the target was reached and the board is clear.
    pub fn is_won(&self) -> bool {
        self.target_reached && self.pebbled.count == 0
    }

    /// Apply one move, updating counters. On error the state is unchanged.
    pub fn apply(&mut self, mv: Move) -> Result<(), MoveError> {
        let node = mv.node;
        if node < 1 || node > self.params.game_length {
            return Err(MoveError::NodeOutOfRange { node, game_length: self.params.game_length });
        }
        match mv.op {
            Op::Place => {
                if self.pebbled.contains(node) {
                    return Err(MoveError::IllegalMove {
                        op: mv.op,
                        node,
                        reason: IllegalMoveReason::NodeAlreadyPebbled,
                    });
                }
                if node > 1 && !self.pebbled.contains(node - 1) {
                    return Err(MoveError::IllegalMove {
                        op: mv.op,
                        node,
                        reason: IllegalMoveReason::PredecessorUnpebbled,
                    });
                }
                if self.pebbled.count == self.params.pebble_budget {
                    return Err(MoveError::PebbleExhausted { node, budget: self.params.pebble_budget });
                }
                self.pebbled.insert(node);
                self.peak_pebbles = self.peak_pebbles.max(self.pebbled.count);
                if node == self.params.game_length {
                    self.target_reached = true;
                }
            }
            Op::Remove => {
                if !self.pebbled.contains(node) {
                    return Err(MoveError::IllegalMove {
                        op: mv.op,
                        node,
                        reason: IllegalMoveReason::NodeUnpebbled,
                    });
                }
                if node > 1 && !self.pebbled.contains(node - 1) {
                    return Err(MoveError::IllegalMove {
                        op: mv.op,
                        node,
                        reason: IllegalMoveReason::PredecessorUnpebbled,
                    });
                }
                self.pebbled.remove(node);
            }
            Op::Erase => {
                if !self.pebbled.contains(node) {
                    return Err(MoveError::IllegalMove {
                        op: mv.op,
                        node,
                        reason: IllegalMoveReason::NodeUnpebbled,
                    });
                }
                if self.erasures_used == self.params.erasure_budget {
                    return Err(MoveError::ErasureBudgetExceeded {
                        node,
                        budget: self.params.erasure_budget,
                    });
                }
                self.pebbled.remove(node);
                self.erasures_used += 1;
            }
        }
        self.steps_taken += 1;
        Ok(())
    }
}

/// An ordered list of moves with the parameters they are meant for.
///
/// A schedule makes no claim of legality; that is established only by
/// replaying it through [`run_schedule`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(flatten)]
    pub params: GameParams,
    pub moves: Vec<Move>,
}

impl Schedule {
    pub fn new(params: GameParams, moves: Vec<Move>) -> Self {
        Schedule { params, moves }
    }

    /// Canonical file form: two-space indent, key order fixed by the
    /// struct layout, newline-terminated. Emitting the same schedule
    /// twice yields identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serialization cannot fail");
        s.push('\n');
        s
    }

    /// Accepts any JSON with the schedule fields; unknown `op` values are
    /// rejected by the `Move` encoding.
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Accounting of one full replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayMetrics {
    pub won: bool,
    pub steps: u64,
    pub peak_pebbles: u64,
    pub erasures: u64,
}

/// Non-fatal findings recorded while replaying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// Lenient mode only: a `Remove` whose predecessor was unpebbled was
    /// applied as an `Erase` instead.
    RemoveReclassifiedAsErase { index: usize },
    /// An `Erase` that a plain `Remove` would have covered; it still
    /// consumed erasure budget.
    WastefulErase { index: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::RemoveReclassifiedAsErase { index } => {
                write!(f, "move {index}: remove with unpebbled predecessor reclassified as erase")
            }
            Diagnostic::WastefulErase { index } => {
                write!(f, "move {index}: erase where a plain remove was legal (budget still consumed)")
            }
        }
    }
}

/// Result of replaying a schedule to its end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub metrics: PlayMetrics,
    pub diagnostics: Vec<Diagnostic>,
}

/// Replay a schedule from the start position.
///
/// In strict mode any rule violation aborts with the failing move index.
/// In lenient mode a `Remove` whose predecessor is unpebbled is applied
/// as an `Erase` when budget remains, and the reclassification is
/// recorded as a diagnostic. Not winning is reported through
/// `metrics.won`, never as an error.
pub fn run_schedule(schedule: &Schedule, strict: bool) -> Result<Replay, ScheduleError> {
    let mut state = GameState::new(schedule.params)?;
    let mut diagnostics = Vec::new();
    for (index, &mv) in schedule.moves.iter().enumerate() {
        let mut effective = mv;
        if !strict
            && mv.op == Op::Remove
            && mv.node > 1
            && mv.node <= schedule.params.game_length
            && state.is_pebbled(mv.node)
            && !state.is_pebbled(mv.node - 1)
            && state.erasures_used() < schedule.params.erasure_budget
        {
            effective = Move::erase(mv.node);
            diagnostics.push(Diagnostic::RemoveReclassifiedAsErase { index });
        }
        if effective.op == Op::Erase
            && state.is_pebbled(effective.node)
            && (effective.node == 1 || state.is_pebbled(effective.node - 1))
        {
            diagnostics.push(Diagnostic::WastefulErase { index });
        }
        state
            .apply(effective)
            .map_err(|source| ScheduleError::Move { index, source })?;
    }
    Ok(Replay {
        metrics: PlayMetrics {
            won: state.is_won(),
            steps: state.steps_taken(),
            peak_pebbles: state.peak_pebbles(),
            erasures: state.erasures_used(),
        },
        diagnostics,
    })
}
