//! 2048 on a 4×4 board under a uniform random policy over legal moves.
//!
//! Rules: a new game spawns two tiles. A move slides every tile toward one
//! edge and merges equal neighbours once per move; the reward is the sum of
//! the merged tile values. After a move that changes the board, one tile
//! spawns on a uniformly chosen empty cell (2 with probability 0.9, else 4).
//! The game ends when no move changes the board.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Domain, Transition};

pub const DIM: usize = 16;

pub type Board = [u32; 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Up,
    Down,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Left, Move::Right, Move::Up, Move::Down];

    /// Cell indices of each line, ordered from the edge tiles slide toward.
    fn lines(self) -> [[usize; 4]; 4] {
        let mut out = [[0; 4]; 4];
        for (k, line) in out.iter_mut().enumerate() {
            for (j, cell) in line.iter_mut().enumerate() {
                *cell = match self {
                    Move::Left => k * 4 + j,
                    Move::Right => k * 4 + (3 - j),
                    Move::Up => j * 4 + k,
                    Move::Down => (3 - j) * 4 + k,
                };
            }
        }
        out
    }
}

/// Slides and merges one line toward index 0. Returns the merged line and
/// the sum of merged tile values.
pub fn slide_line(line: [u32; 4]) -> ([u32; 4], u32) {
    let mut out = [0u32; 4];
    let mut reward = 0;
    let mut len = 0;
    let mut merged_last = false;
    for v in line.into_iter().filter(|v| *v != 0) {
        if len > 0 && out[len - 1] == v && !merged_last {
            out[len - 1] = 2 * v;
            reward += 2 * v;
            merged_last = true;
        } else {
            out[len] = v;
            len += 1;
            merged_last = false;
        }
    }
    (out, reward)
}

/// Applies `mv` without spawning. Returns the new board, the reward, and
/// whether anything moved.
pub fn apply_move(board: &Board, mv: Move) -> (Board, u32, bool) {
    let mut out = *board;
    let mut reward = 0;
    for cells in mv.lines() {
        let line = cells.map(|c| board[c]);
        let (slid, r) = slide_line(line);
        reward += r;
        for (c, v) in cells.iter().zip(slid) {
            out[*c] = v;
        }
    }
    (out, reward, out != *board)
}

pub fn legal_moves(board: &Board) -> Vec<Move> {
    Move::ALL
        .into_iter()
        .filter(|m| apply_move(board, *m).2)
        .collect()
}

pub fn spawn_tile(board: &mut Board, rng: &mut ChaCha8Rng) {
    let empty: Vec<usize> = (0..16).filter(|i| board[*i] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let cell = empty[rng.random_range(0..empty.len())];
    board[cell] = if rng.random_bool(0.9) { 2 } else { 4 };
}

#[derive(Debug, Clone, Copy)]
pub struct Game2048;

impl Domain for Game2048 {
    type State = Board;

    fn dim(&self) -> usize {
        DIM
    }

    fn initial_state(&self, rng: &mut ChaCha8Rng) -> Board {
        let mut board = [0; 16];
        spawn_tile(&mut board, rng);
        spawn_tile(&mut board, rng);
        board
    }

    fn features(&self, board: &Board) -> Vec<f64> {
        board.iter().map(|v| *v as f64).collect()
    }

    fn step(&self, board: &Board, rng: &mut ChaCha8Rng) -> Transition<Board> {
        let moves = legal_moves(board);
        if moves.is_empty() {
            return Transition {
                next: *board,
                reward: 0.0,
                terminal: true,
            };
        }
        let mv = moves[rng.random_range(0..moves.len())];
        let (mut next, reward, _) = apply_move(board, mv);
        spawn_tile(&mut next, rng);
        let terminal = legal_moves(&next).is_empty();
        Transition {
            next,
            reward: reward as f64,
            terminal,
        }
    }

    fn state_from_features(&self, x: &[f64]) -> Board {
        let mut board = [0; 16];
        for (b, v) in board.iter_mut().zip(x) {
            *b = *v as u32;
        }
        board
    }

    fn encode(&self, board: &Board) -> String {
        board
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    fn is_terminal(&self, board: &Board) -> bool {
        legal_moves(board).is_empty()
    }
}
