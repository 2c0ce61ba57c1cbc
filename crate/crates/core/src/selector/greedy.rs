//! Marginal-gain-driven greedy ranking.
//!
//! At every step the candidate with the largest gain given the already
//! chosen set is appended; equal gains (up to [`TIE_TOLERANCE`]) go to the
//! smaller sentence index.
//! The whole ground set is ranked, so any k-prefix is available afterwards.

use crate::simspace::SimilarityModel;

/// Chosen set plus, for every sentence `s`, the running penalty sum
/// `sum_{x in chosen} sim(s, x)`.
#[derive(Debug, Clone)]
pub struct SelectionState {
    chosen: Vec<usize>,
    taken: Vec<bool>,
    denominators: Vec<f64>,
}

impl SelectionState {
    pub fn new(n: usize) -> Self {
        SelectionState {
            chosen: Vec::with_capacity(n),
            taken: vec![false; n],
            denominators: vec![0.0; n],
        }
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn contains(&self, s: usize) -> bool {
        self.taken[s]
    }

    /// `sum_{x in chosen} sim(s, x)`, accumulated in selection order.
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// Adds `x` and updates every running sum with row `x`: O(n).
    pub fn push(&mut self, model: &SimilarityModel, x: usize) {
        assert!(!self.taken[x], "sentence {x} already chosen");
        self.taken[x] = true;
        self.chosen.push(x);
        for (d, v) in self.denominators.iter_mut().zip(model.row(x).iter()) {
            *d += v;
        }
    }
}

/// Gain of adding `s` to the current selection.
pub trait MarginalGain {
    fn gain(&self, model: &SimilarityModel, state: &SelectionState, s: usize) -> f64;
}

/// `coverage(s) / (1 + sum_{x in X} sim(s, x))`. The numerator sums over the
/// whole ground set, chosen sentences and `s` itself included.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioPenalty;

impl MarginalGain for RatioPenalty {
    fn gain(&self, model: &SimilarityModel, state: &SelectionState, s: usize) -> f64 {
        model.coverage_totals()[s] / (1.0 + state.denominators[s])
    }
}

/// Logarithm of [`RatioPenalty`]; induces the same ranking.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogRatioPenalty;

impl MarginalGain for LogRatioPenalty {
    fn gain(&self, model: &SimilarityModel, state: &SelectionState, s: usize) -> f64 {
        model.coverage_totals()[s].ln() - (1.0 + state.denominators[s]).ln()
    }
}

/// `coverage(s) - alpha * sum_{x in X} sim(s, x)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearPenalty {
    pub alpha: f64,
}

impl MarginalGain for LinearPenalty {
    fn gain(&self, model: &SimilarityModel, state: &SelectionState, s: usize) -> f64 {
        model.coverage_totals()[s] - self.alpha * state.denominators[s]
    }
}

/// Modular coverage gain; independent of the chosen set.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoverageGain;

impl MarginalGain for CoverageGain {
    fn gain(&self, model: &SimilarityModel, _state: &SelectionState, s: usize) -> f64 {
        model.coverage_totals()[s]
    }
}

/// Relative width of the tie window. Gains within `TIE_TOLERANCE *
/// max(|best|, 1)` of the step's best gain count as tied, so ties that are
/// exact in real arithmetic still go to the lowest index after rounding.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Runs the greedy loop to exhaustion and returns the selection order with
/// the winning gain at each step.
pub fn greedy_rank<G: MarginalGain + ?Sized>(
    model: &SimilarityModel,
    gain: &G,
) -> (Vec<usize>, Vec<f64>) {
    let n = model.len();
    let mut state = SelectionState::new(n);
    let mut scores = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for _ in 0..n {
        gains.clear();
        gains.extend(
            (0..n)
                .filter(|&s| !state.contains(s))
                .map(|s| (s, gain.gain(model, &state, s))),
        );
        let best = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
        let floor = best - TIE_TOLERANCE * best.abs().max(1.0);
        let &(x, g) = gains
            .iter()
            .find(|g| g.1 >= floor)
            .expect("unchosen candidate remains");
        state.push(model, x);
        scores.push(g);
    }
    (state.chosen, scores)
}
