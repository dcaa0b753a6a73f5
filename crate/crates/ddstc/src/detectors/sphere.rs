//! Depth-first sphere decoder for the multiple-symbol metric.
//!
//! The metric is a sum of per-level nonnegative terms, each depending on the
//! codewords chosen at later levels only, so the candidate space is a tree
//! searched from the reference block backwards. Children at each level are
//! visited in increasing partial-metric order (Schnorr-Euchner style) with
//! the radius starting at infinity and shrinking at every completed leaf;
//! the first child exceeding the radius prunes all its later siblings.
//!
//! For the Alamouti codebook the per-level increment splits into a constant
//! plus one term per underlying PSK symbol, so each symbol gets its own
//! sorted decision list and candidate pairs are merged lazily in ascending
//! total order. That is the per-symbol decomposition; the joint variant
//! sorts all L codewords per level instead and exists as a cross-check.

use super::{CovarianceModel, DetectionWindow};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::numerics::{Mat2, Vec2};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Search instrumentation. `nodes` counts every child whose partial metric
/// was evaluated.
#[derive(Clone, Copy, Debug, Default)]
pub struct SphereDiagnostics {
    pub nodes: u64,
    pub leaves: u64,
}

/// Sphere detection with the per-symbol split enumeration.
pub fn detect_msdsd(
    window: &DetectionWindow,
    cov: &CovarianceModel,
    cb: &Codebook,
) -> Result<(Vec<usize>, SphereDiagnostics)> {
    search(window, cov, cb, true)
}

/// Sphere detection enumerating whole codewords per level. Same output
/// contract as [`detect_msdsd`]; kept as an independent cross-check of the
/// split enumeration.
pub fn detect_msdsd_joint(
    window: &DetectionWindow,
    cov: &CovarianceModel,
    cb: &Codebook,
) -> Result<(Vec<usize>, SphereDiagnostics)> {
    search(window, cov, cb, false)
}

/// Min-heap item ordered by value, then pair indices for determinism.
struct HeapItem {
    value: f64,
    ia: usize,
    ib: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest value.
        other
            .value
            .partial_cmp(&self.value)
            .unwrap()
            .then(other.ia.cmp(&self.ia))
            .then(other.ib.cmp(&self.ib))
    }
}

/// Lazy ascending merge over pairs (i, j) scored a[i].0 + b[j].0, where a
/// and b are ascending. Classic sorted X+Y enumeration.
struct PairMerge {
    a: Vec<(f64, usize)>,
    b: Vec<(f64, usize)>,
    heap: BinaryHeap<HeapItem>,
    seen: Vec<bool>,
}

impl PairMerge {
    fn new(a: Vec<(f64, usize)>, b: Vec<(f64, usize)>) -> PairMerge {
        let mut heap = BinaryHeap::new();
        let mut seen = vec![false; a.len() * b.len()];
        heap.push(HeapItem {
            value: a[0].0 + b[0].0,
            ia: 0,
            ib: 0,
        });
        seen[0] = true;
        PairMerge { a, b, heap, seen }
    }

    /// Next (score, symbol index a, symbol index b) in ascending score order.
    fn next(&mut self) -> Option<(f64, usize, usize)> {
        let item = self.heap.pop()?;
        let m = self.b.len();
        for (na, nb) in [(item.ia + 1, item.ib), (item.ia, item.ib + 1)] {
            if na < self.a.len() && nb < m && !self.seen[na * m + nb] {
                self.seen[na * m + nb] = true;
                self.heap.push(HeapItem {
                    value: self.a[na].0 + self.b[nb].0,
                    ia: na,
                    ib: nb,
                });
            }
        }
        Some((item.value, self.a[item.ia].1, self.b[item.ib].1))
    }
}

/// Ascending child stream at one tree level: (metric increment, codeword index).
enum Children {
    Split { base: f64, merge: PairMerge, m: usize },
    Joint { sorted: Vec<(f64, usize)>, pos: usize },
}

impl Children {
    fn next(&mut self) -> Option<(f64, usize)> {
        match self {
            Children::Split { base, merge, m } => merge
                .next()
                .map(|(score, s1, s2)| (*base + score, s1 * *m + s2)),
            Children::Joint { sorted, pos } => {
                let item = sorted.get(*pos).copied();
                *pos += 1;
                item
            }
        }
    }
}

struct Search<'a> {
    window: &'a DetectionWindow,
    cov: &'a CovarianceModel,
    cb: &'a Codebook,
    split: bool,
    /// Whitened vectors S^H[j] y[j] for the already-decided levels.
    w: Vec<Vec2>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
    diag: SphereDiagnostics,
}

fn search(
    window: &DetectionWindow,
    cov: &CovarianceModel,
    cb: &Codebook,
    split: bool,
) -> Result<(Vec<usize>, SphereDiagnostics)> {
    let n = window.len();
    if cov.n != n {
        return Err(Error::Domain(format!(
            "covariance built for N = {}, window has N = {n}",
            cov.n
        )));
    }
    let mut s = Search {
        window,
        cov,
        cb,
        split,
        w: vec![Vec2::zero(); n],
        chosen: vec![0usize; n - 1],
        best: vec![0usize; n - 1],
        best_metric: f64::INFINITY,
        diag: SphereDiagnostics::default(),
    };
    // Reference block: S^H[N-1] = I.
    s.w[n - 1] = *window.y(n - 1);
    let unn = cov.u.get(n - 1, n - 1);
    let start = unn * unn * window.y(n - 1).norm_sq();
    s.descend(n - 2, start, Mat2::identity());
    Ok((s.best, s.diag))
}

impl Search<'_> {
    /// Expands level `i` given the partial metric of the decided suffix and
    /// sh_next = S^H at block i+1.
    fn descend(&mut self, i: usize, partial: f64, sh_next: Mat2) {
        let n = self.window.len();
        let alpha = self.cov.u.get(i, i);
        let a = self.window.y(i);
        let mut z = Vec2::zero();
        for j in i + 1..n {
            z = z.add(&self.w[j].scale_re(self.cov.u.get(i, j)));
        }
        let base = alpha * alpha * a.norm_sq() + z.norm_sq();
        let mut children = self.level_children(alpha, a, &z, &sh_next, base);
        while let Some((inc, index)) = children.next() {
            let cost = partial + inc;
            self.diag.nodes += 1;
            if cost >= self.best_metric {
                // Ascending order: every later sibling is at least as bad.
                break;
            }
            self.chosen[i] = index;
            let sh_i = sh_next.mul(&self.cb.codeword(index).v);
            self.w[i] = sh_i.mul_vec(a);
            if i == 0 {
                self.diag.leaves += 1;
                self.best_metric = cost;
                self.best.copy_from_slice(&self.chosen);
            } else {
                self.descend(i - 1, cost, sh_i);
            }
        }
    }

    /// Builds the ascending child stream for one level. The increment for
    /// codeword V is || alpha T V y + z ||^2 with T = sh_next, which expands
    /// to base + sqrt(2) alpha (Re(p u1) + Re(q u2)) for the Alamouti form
    /// V = (1/sqrt 2)[[u1, -u2*],[u2, u1*]]: one additive term per symbol.
    fn level_children(
        &self,
        alpha: f64,
        a: &Vec2,
        z: &Vec2,
        sh_next: &Mat2,
        base: f64,
    ) -> Children {
        let m = self.cb.psk_order();
        let c = sh_next.adjoint().mul_vec(z);
        let p = c.0[0].conj() * a.0[0] + c.0[1] * a.0[1].conj();
        let q = c.0[1].conj() * a.0[0] - c.0[0] * a.0[1].conj();
        let scale = 2.0f64.sqrt() * alpha;
        if self.split {
            let term = |x: Complex64| -> Vec<(f64, usize)> {
                let mut list: Vec<(f64, usize)> = (0..m)
                    .map(|s| (scale * (x * self.cb.psk(s)).re, s))
                    .collect();
                list.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap().then(l.1.cmp(&r.1)));
                list
            };
            Children::Split {
                base,
                merge: PairMerge::new(term(p), term(q)),
                m,
            }
        } else {
            let mut sorted: Vec<(f64, usize)> = (0..self.cb.len())
                .map(|idx| {
                    let v = &self.cb.codeword(idx).v;
                    let t = sh_next
                        .mul(v)
                        .mul_vec(a)
                        .scale_re(alpha)
                        .add(z);
                    (t.norm_sq(), idx)
                })
                .collect();
            sorted.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap().then(l.1.cmp(&r.1)));
            Children::Joint { sorted, pos: 0 }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_alamouti_codebook, differential_encode};
    use crate::detectors::{build_covariance, detect_msdd_exhaustive};
    use crate::fading::{generate_trace, DopplerSpec};
    use crate::network::{synthesize_physical, NetworkParams, RelaySpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_window(
        n: usize,
        m: usize,
        snr_db: f64,
        seed: u64,
    ) -> (DetectionWindow, Codebook, CovarianceModel) {
        let dop = DopplerSpec::case3(2);
        let cb = build_alamouti_codebook(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices: Vec<usize> = (0..n - 1).map(|_| rng.gen_range(0..cb.len())).collect();
        let frame = differential_encode(&cb, &indices);
        let trace = generate_trace(&dop, frame.blocks(), seed ^ 0xabc).unwrap();
        let params = NetworkParams::from_snr_db(snr_db, 2).unwrap();
        let rx = synthesize_physical(
            &params,
            &RelaySpec::alamouti_pair(),
            &frame,
            &trace,
            seed ^ 0xdef,
        )
        .unwrap();
        let cov = build_covariance(&params, &dop, n).unwrap();
        (DetectionWindow::from_rx(&rx, 0, n).unwrap(), cb, cov)
    }

    #[test]
    fn matches_exhaustive_small() {
        for seed in 0..200u64 {
            let n = 2 + (seed as usize % 4);
            let m = if seed % 2 == 0 { 2 } else { 4 };
            let snr = [10.0, 25.0, 40.0][seed as usize % 3];
            let (window, cb, cov) = random_window(n, m, snr, seed);
            let exhaustive = detect_msdd_exhaustive(&window, &cov, &cb).unwrap();
            let (sphere, _) = detect_msdsd(&window, &cov, &cb).unwrap();
            assert_eq!(sphere, exhaustive, "seed {seed}, n {n}, m {m}");
        }
    }

    #[test]
    fn split_matches_joint() {
        for seed in 0..200u64 {
            let n = 2 + (seed as usize % 8);
            let (window, cb, cov) = random_window(n, 4, 20.0, seed + 10_000);
            let (a, _) = detect_msdsd(&window, &cov, &cb).unwrap();
            let (b, _) = detect_msdsd_joint(&window, &cov, &cb).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn visits_far_fewer_nodes_than_enumeration() {
        let mut nodes = 0u64;
        let trials = 20u64;
        let n = 10usize;
        for seed in 0..trials {
            let (window, cb, cov) = random_window(n, 4, 25.0, seed + 50_000);
            let (_, diag) = detect_msdsd(&window, &cov, &cb).unwrap();
            nodes += diag.nodes;
        }
        let avg = nodes as f64 / trials as f64;
        let space = 16f64.powi(n as i32 - 1);
        assert!(
            avg < space / 1e6,
            "average {avg} nodes vs {space} candidates"
        );
    }

    #[test]
    fn window_mismatch_rejected() {
        let (window, cb, _) = random_window(4, 2, 20.0, 1);
        let params = NetworkParams::from_snr_db(20.0, 2).unwrap();
        let cov5 = build_covariance(&params, &DopplerSpec::case3(2), 5).unwrap();
        assert!(detect_msdsd(&window, &cov5, &cb).is_err());
    }
}
