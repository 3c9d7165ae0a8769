//! Mode bipartitions and the GGM result shared by both engines.

use std::fmt;

use crate::error::{Error, Result};

/// Canonical `A:B` split of `n_total` modes, stored as the sorted side `A`
/// (0-based indices) with `|A| ≤ ⌊n/2⌋`. For even `n` and `|A| = n/2`, `A`
/// always contains mode 0 so that `A:B` and `B:A` are counted once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeBipartition {
    side_a: Vec<usize>,
    n_total: usize,
}

impl ModeBipartition {
    pub fn new(side_a: &[usize], n_total: usize) -> Result<Self> {
        let mut side = side_a.to_vec();
        side.sort_unstable();
        side.dedup();
        if side.len() != side_a.len() || side.is_empty() {
            return Err(Error::ModeSelection(format!("bad side {side_a:?}")));
        }
        if side.iter().any(|&k| k >= n_total) || 2 * side.len() > n_total {
            return Err(Error::ModeSelection(format!(
                "side {side_a:?} is not a canonical side of {n_total} modes"
            )));
        }
        if 2 * side.len() == n_total && side[0] != 0 {
            return Err(Error::ModeSelection(format!(
                "half-size side {side_a:?} must contain mode 0"
            )));
        }
        Ok(Self {
            side_a: side,
            n_total,
        })
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> Vec<usize> {
        (0..self.n_total).filter(|k| !self.side_a.contains(k)).collect()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// All canonical bipartitions, ordered by side size, then
    /// lexicographically.
    pub fn enumerate(n_total: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for size in 1..=n_total / 2 {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                if 2 * size < n_total || combo[0] == 0 {
                    out.push(Self {
                        side_a: combo.clone(),
                        n_total,
                    });
                }
                // next combination in lexicographic order
                let mut i = size;
                while i > 0 && combo[i - 1] == n_total - size + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                combo[i - 1] += 1;
                for k in i..size {
                    combo[k] = combo[k - 1] + 1;
                }
            }
        }
        out
    }
}

/// Formats as `A|B` with 1-based mode labels, e.g. `1+3|2+4`.
impl fmt::Display for ModeBipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |modes: &[usize]| modes.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join("+");
        write!(f, "{}|{}", join(&self.side_a), join(&self.side_b()))
    }
}

/// One evaluated reduction: its bipartition and the largest eigenvalue of
/// the reduced state on side `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub partition: ModeBipartition,
    pub max_eigenvalue: f64,
}

/// GGM value with the reduction that attains it and every candidate
/// evaluated on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct GgmResult {
    pub value: f64,
    pub argmax_partition: ModeBipartition,
    pub candidates: Vec<Candidate>,
}

impl GgmResult {
    /// Builds the result from the candidate list. Ties on the eigenvalue go
    /// to the lexicographically smallest side `A`.
    pub fn from_candidates(mut candidates: Vec<Candidate>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::ModeSelection(
                "GGM needs at least two modes (no bipartitions)".into(),
            ));
        }
        candidates.sort_by(|a, b| a.partition.side_a().cmp(b.partition.side_a()));
        let best = candidates
            .iter()
            .reduce(|best, c| {
                if c.max_eigenvalue > best.max_eigenvalue {
                    c
                } else {
                    best
                }
            })
            .expect("non-empty");
        Ok(Self {
            value: 1.0 - best.max_eigenvalue,
            argmax_partition: best.partition.clone(),
            candidates: candidates.clone(),
        })
    }

    /// The candidate attaining the maximum.
    pub fn top(&self) -> &Candidate {
        self.candidates
            .iter()
            .find(|c| c.partition == self.argmax_partition)
            .expect("argmax is a candidate")
    }

    /// Largest eigenvalue among candidates other than the argmax.
    pub fn runner_up(&self) -> Option<&Candidate> {
        self.candidates
            .iter()
            .filter(|c| c.partition != self.argmax_partition)
            .reduce(|a, b| if b.max_eigenvalue > a.max_eigenvalue { b } else { a })
    }

    pub fn candidate(&self, side_a: &[usize]) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.partition.side_a() == side_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(n: usize) -> Vec<Vec<usize>> {
        ModeBipartition::enumerate(n)
            .into_iter()
            .map(|p| p.side_a().to_vec())
            .collect()
    }

    #[test]
    fn enumeration_small() {
        assert!(sides(1).is_empty());
        assert_eq!(sides(2), vec![vec![0]]);
        assert_eq!(sides(3), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            sides(4),
            vec![vec![0], vec![1], vec![2], vec![3], vec![0, 1], vec![0, 2], vec![0, 3]]
        );
    }

    #[test]
    fn enumeration_counts_every_cut_once() {
        // number of unordered bipartitions is 2^{n-1} - 1
        for n in 2..10 {
            assert_eq!(ModeBipartition::enumerate(n).len(), (1 << (n - 1)) - 1, "n={n}");
        }
    }

    #[test]
    fn canonical_checks() {
        assert!(ModeBipartition::new(&[1, 2], 4).is_err());
        assert!(ModeBipartition::new(&[0, 1, 2], 4).is_err());
        assert!(ModeBipartition::new(&[], 4).is_err());
        let p = ModeBipartition::new(&[2, 0], 4).unwrap();
        assert_eq!(p.side_a(), &[0, 2]);
        assert_eq!(p.side_b(), vec![1, 3]);
        assert_eq!(p.to_string(), "1+3|2+4");
    }

    #[test]
    fn tie_break_is_lexicographic() {
        let mk = |s: &[usize], v| Candidate {
            partition: ModeBipartition::new(s, 4).unwrap(),
            max_eigenvalue: v,
        };
        let r = GgmResult::from_candidates(vec![mk(&[1], 0.9), mk(&[0, 1], 0.9), mk(&[2], 0.5)])
            .unwrap();
        assert_eq!(r.argmax_partition.side_a(), &[0, 1]);
        assert!((r.value - 0.1).abs() < 1e-15);
        assert_eq!(r.runner_up().unwrap().partition.side_a(), &[1]);
        assert!(GgmResult::from_candidates(vec![]).is_err());
    }
}
