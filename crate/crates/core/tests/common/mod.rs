//! Test-only reference implementations. Nothing here calls into the
//! similarity or selection code paths it is used to check.

#![allow(dead_code)]

use rpsel_core::corpus::EmbeddingMatrix;
use rpsel_core::rng::SeededRng;

/// Relative slack under which two gains count as tied in the reference
/// greedy. Covers analytic ties whose floating-point values differ in the
/// last bits because of summation order.
pub const TIE_SLACK: f64 = 1e-12;

pub fn random_points(rng: &mut SeededRng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect()
}

pub fn matrix(points: &[Vec<f64>]) -> EmbeddingMatrix {
    EmbeddingMatrix::from_rows(points).expect("valid points")
}

/// Brute-force reference: distances, beta and similarities from scratch.
pub struct Reference {
    pub beta: f64,
    pub sim: Vec<Vec<f64>>,
}

impl Reference {
    pub fn new(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for k in 0..a.len() {
                s += (a[k] - b[k]) * (a[k] - b[k]);
            }
            s.sqrt()
        };
        // Ordered pairs including the zero diagonal, normalized by n(n-1).
        let mut total = 0.0;
        for u in points {
            for w in points {
                total += dist(u, w);
            }
        }
        let beta = (n * (n - 1)) as f64 / total;
        let sim = points
            .iter()
            .map(|u| points.iter().map(|w| (-beta * dist(u, w)).exp()).collect())
            .collect();
        Reference { beta, sim }
    }

    pub fn n(&self) -> usize {
        self.sim.len()
    }

    pub fn coverage(&self, s: usize) -> f64 {
        self.sim[s].iter().sum()
    }

    pub fn penalty(&self, s: usize, chosen: &[usize]) -> f64 {
        chosen.iter().map(|&x| self.sim[s][x]).sum()
    }

    /// Coverage value of a whole set: sum over members of their coverage.
    pub fn coverage_value(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.coverage(x)).sum()
    }

    pub fn ratio_gain(&self, s: usize, chosen: &[usize]) -> f64 {
        self.coverage(s) / (1.0 + self.penalty(s, chosen))
    }

    pub fn linear_gain(&self, s: usize, chosen: &[usize], alpha: f64) -> f64 {
        self.coverage(s) - alpha * self.penalty(s, chosen)
    }

    /// Naive greedy: every gain recomputed from scratch at every step;
    /// gains within `TIE_SLACK` of the best go to the lowest index.
    pub fn greedy(&self, gain: impl Fn(usize, &[usize]) -> f64) -> Vec<usize> {
        let n = self.n();
        let mut chosen: Vec<usize> = Vec::new();
        while chosen.len() < n {
            let gains: Vec<(usize, f64)> = (0..n)
                .filter(|s| !chosen.contains(s))
                .map(|s| (s, gain(s, &chosen)))
                .collect();
            let best = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
            let pick = gains
                .iter()
                .find(|g| best - g.1 <= TIE_SLACK * best.abs().max(1.0))
                .expect("non-empty")
                .0;
            chosen.push(pick);
        }
        chosen
    }
}
