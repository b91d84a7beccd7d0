//! Checkpointed reversible execution of a deterministic machine.
//!
//! A schedule drives a store of machine configurations ("checkpoints"),
//! one per game node, with node 0 permanently holding the initial
//! configuration. Placing a pebble forward-simulates one segment from the
//! predecessor checkpoint and stores the result; removing a pebble
//! recomputes the segment and cancels the stored copy against it, which
//! is free of information loss; erasing a pebble drops the stored bits
//! outright and is charged accordingly.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::game::{GameState, MoveError, Node, Op, Schedule, ScheduleError};

/// Hard cap on `moves * segment_len` for one execution.
pub const MAX_SIMULATED_STEPS: u128 = 1_000_000_000;

/// Fixed-size machine configuration snapshot. Bit `i` lives in byte
/// `i / 8` at position `i % 8`.
#[derive(Clone, PartialEq, Eq)]
pub struct Checkpoint {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl Checkpoint {
    pub fn zeroed(len_bits: usize) -> Self {
        Checkpoint { bytes: vec![0; len_bits.div_ceil(8)], len_bits }
    }

    /// Build from raw bytes, truncating or zero-padding to `len_bits` and
    /// masking any bits past the end.
    pub fn from_bytes(bytes: &[u8], len_bits: usize) -> Self {
        let mut cp = Checkpoint::zeroed(len_bits);
        let n = cp.bytes.len().min(bytes.len());
        cp.bytes[..n].copy_from_slice(&bytes[..n]);
        cp.mask_tail();
        cp
    }

    fn mask_tail(&mut self) {
        let tail = self.len_bits % 8;
        if tail != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= (1u8 << tail) - 1;
            }
        }
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, bit: usize) -> bool {
        debug_assert!(bit < self.len_bits);
        self.bytes[bit / 8] >> (bit % 8) & 1 == 1
    }

    pub fn set(&mut self, bit: usize, value: bool) {
        debug_assert!(bit < self.len_bits);
        if value {
            self.bytes[bit / 8] |= 1 << (bit % 8);
        } else {
            self.bytes[bit / 8] &= !(1 << (bit % 8));
        }
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Checkpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Checkpoint({} bits, {})", self.len_bits, self.to_hex())
    }
}

/// A deterministic, total transition system simulated one segment at a
/// time. `step` must be a pure function and must preserve the
/// configuration size.
pub trait SteppedMachine {
    /// Configuration size in bits (the unit every erasure is charged in).
    fn config_size_bits(&self) -> usize;
    /// Configuration for a raw input, padded or truncated to size.
    fn initial(&self, input: &[u8]) -> Checkpoint;
    /// One deterministic step.
    fn step(&self, c: &Checkpoint) -> Checkpoint;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TmState {
    A,
    B,
    C,
    Halt,
}

/// The built-in machines selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinMachine {
    /// Fixed-width binary counter, increment mod 2^width per step.
    Counter { width_bits: usize },
    /// Elementary cellular automaton rule 110 on a cyclic row.
    Eca110 { width_bits: usize },
    /// Three-state busy-beaver-style Turing machine on a bounded cyclic
    /// tape; the halt state self-loops so stepping is total. Layout:
    /// byte 0 state, bytes 1-2 head position, remaining bits tape.
    TmBusy3 { width_bits: usize },
}

pub const MIN_MACHINE_WIDTH: usize = 8;
pub const MAX_MACHINE_WIDTH: usize = 4096;
/// The Turing machine needs room for its state and head fields.
pub const MIN_TM_WIDTH: usize = 32;

const TM_TAPE_OFFSET: usize = 24;

/// Look up a machine by name. Known names: `counter`, `eca110`,
/// `tm-busy3`.
pub fn builtin_machine(name: &str, width_bits: usize) -> Result<BuiltinMachine, SimError> {
    let check_width = |min: usize| {
        if width_bits < min || width_bits > MAX_MACHINE_WIDTH {
            Err(SimError::WidthOutOfRange { name: name.to_string(), width_bits, min, max: MAX_MACHINE_WIDTH })
        } else {
            Ok(())
        }
    };
    match name {
        "counter" => {
            check_width(MIN_MACHINE_WIDTH)?;
            Ok(BuiltinMachine::Counter { width_bits })
        }
        "eca110" => {
            check_width(MIN_MACHINE_WIDTH)?;
            Ok(BuiltinMachine::Eca110 { width_bits })
        }
        "tm-busy3" => {
            check_width(MIN_TM_WIDTH)?;
            Ok(BuiltinMachine::TmBusy3 { width_bits })
        }
        _ => Err(SimError::UnknownMachine { name: name.to_string() }),
    }
}

impl BuiltinMachine {
    fn width(&self) -> usize {
        match *self {
            BuiltinMachine::Counter { width_bits }
            | BuiltinMachine::Eca110 { width_bits }
            | BuiltinMachine::TmBusy3 { width_bits } => width_bits,
        }
    }
}

impl SteppedMachine for BuiltinMachine {
    fn config_size_bits(&self) -> usize {
        self.width()
    }

    fn initial(&self, input: &[u8]) -> Checkpoint {
        match *self {
            BuiltinMachine::Counter { width_bits } | BuiltinMachine::Eca110 { width_bits } => {
                Checkpoint::from_bytes(input, width_bits)
            }
            BuiltinMachine::TmBusy3 { width_bits } => {
                // State A, head 0, tape cells loaded from the input bits.
                let mut cp = Checkpoint::zeroed(width_bits);
                let tape_len = width_bits - TM_TAPE_OFFSET;
                let input_bits = Checkpoint::from_bytes(input, tape_len);
                for t in 0..tape_len {
                    cp.set(TM_TAPE_OFFSET + t, input_bits.get(t));
                }
                cp
            }
        }
    }

    fn step(&self, c: &Checkpoint) -> Checkpoint {
        match *self {
            BuiltinMachine::Counter { width_bits } => {
                let mut next = c.clone();
                for byte in next.bytes.iter_mut() {
                    let (sum, carry) = byte.overflowing_add(1);
                    *byte = sum;
                    if !carry {
                        break;
                    }
                }
                next.mask_tail();
                debug_assert_eq!(next.len_bits, width_bits);
                next
            }
            BuiltinMachine::Eca110 { width_bits } => {
                let w = width_bits;
                let mut next = Checkpoint::zeroed(w);
                for i in 0..w {
                    let left = c.get((i + w - 1) % w) as u8;
                    let center = c.get(i) as u8;
                    let right = c.get((i + 1) % w) as u8;
                    let pattern = left << 2 | center << 1 | right;
                    next.set(i, 110u8 >> pattern & 1 == 1);
                }
                next
            }
            BuiltinMachine::TmBusy3 { width_bits } => {
                let state = match c.as_bytes()[0] {
                    0 => TmState::A,
                    1 => TmState::B,
                    2 => TmState::C,
                    _ => TmState::Halt,
                };
                if state == TmState::Halt {
                    return c.clone();
                }
                let tape_len = width_bits - TM_TAPE_OFFSET;
                let head = u16::from_le_bytes([c.as_bytes()[1], c.as_bytes()[2]]) as usize % tape_len;
                let symbol = c.get(TM_TAPE_OFFSET + head);
                let (write, move_right, next_state) = match (state, symbol) {
                    (TmState::A, false) => (true, true, TmState::B),
                    (TmState::A, true) => (true, true, TmState::Halt),
                    (TmState::B, false) => (false, true, TmState::C),
                    (TmState::B, true) => (true, true, TmState::B),
                    (TmState::C, false) => (true, false, TmState::C),
                    (TmState::C, true) => (true, false, TmState::A),
                    (TmState::Halt, _) => unreachable!(),
                };
                let mut next = c.clone();
                next.set(TM_TAPE_OFFSET + head, write);
                let new_head = if move_right {
                    (head + 1) % tape_len
                } else {
                    (head + tape_len - 1) % tape_len
                };
                let head_bytes = (new_head as u16).to_le_bytes();
                next.bytes[1] = head_bytes[0];
                next.bytes[2] = head_bytes[1];
                next.bytes[0] = match next_state {
                    TmState::A => 0,
                    TmState::B => 1,
                    TmState::C => 2,
                    TmState::Halt => 3,
                };
                next
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown machine '{name}' (known: counter, eca110, tm-busy3)")]
    UnknownMachine { name: String },
    #[error("machine '{name}' needs width in {min}..={max} bits, got {width_bits}")]
    WidthOutOfRange { name: String, width_bits: usize, min: usize, max: usize },
    #[error("move {index}: no checkpoint stored for predecessor of node {node}")]
    MissingPredecessor { index: usize, node: Node },
    #[error("move {index}: recomputed segment for node {node} differs from the stored checkpoint")]
    CancelMismatch { index: usize, node: Node },
    #[error("execution would take {steps} machine steps, over the {MAX_SIMULATED_STEPS} cap")]
    StepGuard { steps: u128 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Accounting of one checkpointed execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    /// Configuration after the last simulated segment of the target node;
    /// `None` if the schedule never pebbles the target.
    pub final_checkpoint: Option<Checkpoint>,
    /// Forward segment executions, including recomputations for cancels.
    pub segments_computed: u64,
    /// Peak simultaneously stored checkpoints, counting the permanent
    /// input checkpoint.
    pub peak_checkpoints: u64,
    /// Erased checkpoint bits: erase count times the configuration size.
    pub bits_erased: u64,
    /// Whether the driving schedule won its game.
    pub schedule_won: bool,
}

fn run_segment<M: SteppedMachine + ?Sized>(machine: &M, from: &Checkpoint, segment_len: u64) -> Checkpoint {
    let mut c = from.clone();
    for _ in 0..segment_len {
        c = machine.step(&c);
    }
    c
}

/// Run the irreversible computation directly: `segments * segment_len`
/// steps from the initial configuration. This is the reference the
/// checkpointed execution is compared against.
pub fn direct_run<M: SteppedMachine + ?Sized>(
    machine: &M,
    input: &[u8],
    segments: u64,
    segment_len: u64,
) -> Checkpoint {
    let mut c = machine.initial(input);
    for _ in 0..segments {
        c = run_segment(machine, &c, segment_len);
    }
    c
}

/// Execute a schedule as a checkpointed simulation.
///
/// Game rules are enforced strictly alongside the store operations, so
/// an illegal schedule fails here exactly as it does under replay.
pub fn execute<M: SteppedMachine + ?Sized>(
    machine: &M,
    input: &[u8],
    schedule: &Schedule,
    segment_len: u64,
) -> Result<SimulationReport, SimError> {
    let steps = schedule.moves.len() as u128 * segment_len as u128;
    if steps > MAX_SIMULATED_STEPS {
        return Err(SimError::StepGuard { steps });
    }
    let mut game = GameState::new(schedule.params).map_err(ScheduleError::from)?;
    let target = schedule.params.game_length;

    let mut store: HashMap<Node, Checkpoint> = HashMap::new();
    store.insert(0, machine.initial(input));
    let mut peak_checkpoints = 1u64;
    let mut segments_computed = 0u64;
    let mut erase_count = 0u64;
    let mut last_target_checkpoint: Option<Checkpoint> = None;

    for (index, &mv) in schedule.moves.iter().enumerate() {
        if mv.node < 1 || mv.node > target {
            return Err(ScheduleError::Move {
                index,
                source: MoveError::NodeOutOfRange { node: mv.node, game_length: target },
            }
            .into());
        }
        match mv.op {
            Op::Place => {
                let pred = store
                    .get(&(mv.node - 1))
                    .ok_or(SimError::MissingPredecessor { index, node: mv.node })?;
                let computed = run_segment(machine, pred, segment_len);
                segments_computed += 1;
                game.apply(mv).map_err(|source| ScheduleError::Move { index, source })?;
                if mv.node == target {
                    last_target_checkpoint = Some(computed.clone());
                }
                store.insert(mv.node, computed);
                peak_checkpoints = peak_checkpoints.max(store.len() as u64);
            }
            Op::Remove => {
                let pred = store
                    .get(&(mv.node - 1))
                    .ok_or(SimError::MissingPredecessor { index, node: mv.node })?;
                let recomputed = run_segment(machine, pred, segment_len);
                segments_computed += 1;
                game.apply(mv).map_err(|source| ScheduleError::Move { index, source })?;
                let stored = store
                    .remove(&mv.node)
                    .expect("checkpoint store out of sync with the game board");
                if stored != recomputed {
                    return Err(SimError::CancelMismatch { index, node: mv.node });
                }
            }
            Op::Erase => {
                game.apply(mv).map_err(|source| ScheduleError::Move { index, source })?;
                store
                    .remove(&mv.node)
                    .expect("checkpoint store out of sync with the game board");
                erase_count += 1;
            }
        }
    }

    let final_checkpoint = store.get(&target).cloned().or(last_target_checkpoint);
    Ok(SimulationReport {
        final_checkpoint,
        segments_computed,
        peak_checkpoints,
        bits_erased: erase_count * machine.config_size_bits() as u64,
        schedule_won: game.is_won(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameParams, Move};
    use crate::strategies::{bennett_schedule, erasure_schedule};
    use std::cell::Cell;

    fn counter(width: usize) -> BuiltinMachine {
        builtin_machine("counter", width).unwrap()
    }

    fn counter_value(c: &Checkpoint) -> u64 {
        c.as_bytes()
            .iter()
            .take(8)
            .enumerate()
            .map(|(i, &b)| (b as u64) << (8 * i))
            .sum()
    }

    #[test]
    fn counter_increments() {
        let m = counter(16);
        let c0 = m.initial(&[]);
        let c1 = m.step(&c0);
        assert_eq!(counter_value(&c1), 1);
    }

    #[test]
    fn counter_wraps_modulo_width() {
        let m = counter(8);
        let mut c = m.initial(&[]);
        for _ in 0..256 {
            c = m.step(&c);
        }
        assert_eq!(c, m.initial(&[]));
    }

    #[test]
    fn eca110_keeps_zero_row_zero() {
        let m = builtin_machine("eca110", 32).unwrap();
        let c = m.initial(&[]);
        assert_eq!(m.step(&c), c);
    }

    #[test]
    fn eca110_single_cell_spreads_left() {
        // 110 maps 001 and 010 to 1 and 100 to 0: an isolated cell keeps
        // its position and lights its left neighbor.
        let m = builtin_machine("eca110", 8) .unwrap();
        let c = m.initial(&[0b0000_0100]);
        let next = m.step(&c);
        assert_eq!(next.as_bytes(), &[0b0000_0110]);
    }

    #[test]
    fn tm_busy3_halts_and_stays_halted() {
        let m = builtin_machine("tm-busy3", 64).unwrap();
        let mut c = m.initial(&[]);
        for _ in 0..200 {
            c = m.step(&c);
        }
        assert_eq!(c.as_bytes()[0], 3, "machine should have halted");
        assert_eq!(m.step(&c), c, "halt state must self-loop");
        // Busy beaver wrote some ones before halting.
        let ones: u32 = c.as_bytes()[3..].iter().map(|b| b.count_ones()).sum();
        assert!(ones > 0);
    }

    #[test]
    fn unknown_machine_and_bad_widths_rejected() {
        assert!(matches!(builtin_machine("nope", 16), Err(SimError::UnknownMachine { .. })));
        assert!(matches!(builtin_machine("counter", 4), Err(SimError::WidthOutOfRange { .. })));
        assert!(matches!(builtin_machine("counter", 8192), Err(SimError::WidthOutOfRange { .. })));
        assert!(matches!(builtin_machine("tm-busy3", 16), Err(SimError::WidthOutOfRange { .. })));
    }

    #[test]
    fn direct_run_zero_segments_is_identity() {
        let m = counter(16);
        assert_eq!(direct_run(&m, &[0], 0, 4), m.initial(&[0]));
    }

    #[test]
    fn direct_run_counts_increments() {
        let m = counter(16);
        let c = direct_run(&m, &[0], 3, 4);
        assert_eq!(counter_value(&c), 12);
    }

    #[test]
    fn direct_run_composes() {
        let m = builtin_machine("eca110", 32).unwrap();
        let input = [0xde, 0xad, 0xbe, 0xef];
        let split = {
            let mid = direct_run(&m, &input, 2, 8);
            let mut c = mid;
            for _ in 0..3 * 8 {
                c = m.step(&c);
            }
            c
        };
        assert_eq!(split, direct_run(&m, &input, 5, 8));
    }

    #[test]
    fn minimal_schedule_executes_one_step() {
        let m = counter(16);
        let schedule = Schedule::new(
            GameParams { game_length: 1, pebble_budget: 1, erasure_budget: 0 },
            vec![Move::place(1), Move::remove(1)],
        );
        let report = execute(&m, &[7], &schedule, 1).unwrap();
        let expected = m.step(&m.initial(&[7]));
        assert_eq!(report.final_checkpoint, Some(expected));
        assert_eq!(report.bits_erased, 0);
        assert_eq!(report.segments_computed, 2);
        assert!(report.schedule_won);
    }

    #[test]
    fn bennett_execution_matches_direct_run() {
        let m = counter(16);
        let schedule = bennett_schedule(3).unwrap();
        let report = execute(&m, &[0], &schedule, 5).unwrap();
        assert_eq!(report.final_checkpoint, Some(direct_run(&m, &[0], 7, 5)));
        assert_eq!(report.peak_checkpoints, 4);
        assert_eq!(report.bits_erased, 0);
        assert_eq!(report.segments_computed, 26);
        assert!(report.schedule_won);
    }

    #[test]
    fn erasure_execution_charges_bits() {
        let m = builtin_machine("eca110", 32).unwrap();
        let schedule = erasure_schedule(3, 2).unwrap();
        let input = [1, 2, 3, 4];
        let report = execute(&m, &input, &schedule, 32).unwrap();
        assert_eq!(report.final_checkpoint, Some(direct_run(&m, &input, 8, 32)));
        assert_eq!(report.bits_erased, 3 * 32);
        assert!(report.schedule_won);
    }

    #[test]
    fn missing_predecessor_is_reported() {
        let m = counter(16);
        let schedule = Schedule::new(
            GameParams { game_length: 3, pebble_budget: 3, erasure_budget: 0 },
            vec![Move::place(2)],
        );
        let err = execute(&m, &[0], &schedule, 1).unwrap_err();
        assert_eq!(err, SimError::MissingPredecessor { index: 0, node: 2 });
    }

    #[test]
    fn budget_violations_surface_as_schedule_errors() {
        let m = counter(16);
        let schedule = Schedule::new(
            GameParams { game_length: 3, pebble_budget: 1, erasure_budget: 0 },
            vec![Move::place(1), Move::place(2)],
        );
        let err = execute(&m, &[0], &schedule, 1).unwrap_err();
        assert!(matches!(err, SimError::Schedule(ScheduleError::Move { index: 1, .. })));
    }

    #[test]
    fn non_winning_schedule_reports_flag_without_error() {
        let m = counter(16);
        let schedule = Schedule::new(
            GameParams { game_length: 2, pebble_budget: 2, erasure_budget: 0 },
            vec![Move::place(1)],
        );
        let report = execute(&m, &[0], &schedule, 1).unwrap();
        assert!(!report.schedule_won);
        assert_eq!(report.final_checkpoint, None);
    }

    #[test]
    fn step_guard_refuses_huge_runs() {
        let m = counter(16);
        let schedule = bennett_schedule(10).unwrap();
        let err = execute(&m, &[0], &schedule, u64::MAX / 2).unwrap_err();
        assert!(matches!(err, SimError::StepGuard { .. }));
    }

    /// A machine whose step output depends on hidden mutable state, which
    /// a cancel must detect.
    struct FlakyMachine {
        calls: Cell<u64>,
    }

    impl SteppedMachine for FlakyMachine {
        fn config_size_bits(&self) -> usize {
            8
        }

        fn initial(&self, _input: &[u8]) -> Checkpoint {
            Checkpoint::zeroed(8)
        }

        fn step(&self, _c: &Checkpoint) -> Checkpoint {
            let n = self.calls.get();
            self.calls.set(n + 1);
            Checkpoint::from_bytes(&[n as u8], 8)
        }
    }

    #[test]
    fn cancel_mismatch_fires_for_nondeterministic_machines() {
        let m = FlakyMachine { calls: Cell::new(0) };
        let schedule = Schedule::new(
            GameParams { game_length: 1, pebble_budget: 1, erasure_budget: 0 },
            vec![Move::place(1), Move::remove(1)],
        );
        let err = execute(&m, &[], &schedule, 1).unwrap_err();
        assert_eq!(err, SimError::CancelMismatch { index: 1, node: 1 });
    }

    #[test]
    fn checkpoint_hex_and_masking() {
        let cp = Checkpoint::from_bytes(&[0xff, 0xff], 12);
        assert_eq!(cp.to_hex(), "ff0f");
        assert_eq!(cp.len_bits(), 12);
    }
}
