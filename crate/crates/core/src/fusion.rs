//! Cross-sub-array DOA fusion: association, Gaussian error weighting,
//! weighted-L1 correction and the cross-iteration loop.

use crate::error::{DoaError, Result};
use crate::scalar::{lit, Real};

/// Evaluation penalty, in degrees, for an undetected source.
pub const MISS_PENALTY_DEG: f64 = 10.0;
/// Lower bound on the error spread in the Gaussian weighting, degrees.
pub const SIGMA_FLOOR_DEG: f64 = 1e-3;
/// Default number of cross iterations.
pub const DEFAULT_MAX_ITER: usize = 25;

/// `Q x (B+1)` estimated angles; `None` marks an undetected cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaMatrix<T> {
    cells: Vec<Option<T>>,
    sources: usize,
    subarrays: usize,
}

impl<T: Real> DoaMatrix<T> {
    pub fn empty(sources: usize, subarrays: usize) -> Self {
        Self {
            cells: vec![None; sources * subarrays],
            sources,
            subarrays,
        }
    }

    /// Builds from rows (one per source).
    pub fn from_rows(rows: Vec<Vec<Option<T>>>) -> Result<Self> {
        let sources = rows.len();
        let subarrays = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != subarrays) {
            return Err(DoaError::ShapeMismatch("ragged DOA rows".into()));
        }
        let cells: Vec<Option<T>> = rows.into_iter().flatten().collect();
        if cells.iter().flatten().any(|&a| !(a >= T::zero() && a <= lit(180.0))) {
            return Err(DoaError::InvalidParameter("DOA outside [0, 180]".into()));
        }
        Ok(Self {
            cells,
            sources,
            subarrays,
        })
    }

    pub fn get(&self, source: usize, subarray: usize) -> Option<T> {
        self.cells[source * self.subarrays + subarray]
    }

    pub fn set(&mut self, source: usize, subarray: usize, value: Option<T>) {
        self.cells[source * self.subarrays + subarray] = value;
    }

    pub fn row(&self, source: usize) -> &[Option<T>] {
        &self.cells[source * self.subarrays..(source + 1) * self.subarrays]
    }

    pub fn num_sources(&self) -> usize {
        self.sources
    }

    pub fn num_subarrays(&self) -> usize {
        self.subarrays
    }

    pub fn is_missing(&self, source: usize, subarray: usize) -> bool {
        self.get(source, subarray).is_none()
    }

    /// Reorders the sub-array axis: column `b` of the result is column
    /// `perm[b]` of `self`.
    pub fn permute_subarrays(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.sources, self.subarrays);
        for q in 0..self.sources {
            for (b, &src) in perm.iter().enumerate() {
                out.set(q, b, self.get(q, src));
            }
        }
        out
    }
}

/// Greedy one-to-one assignment of `peaks` to `prior`, smallest distance
/// first. Returns, per prior entry, the assigned peak.
pub fn assign_to_prior<T: Real>(peaks: &[T], prior: &[Option<T>]) -> Vec<Option<T>> {
    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    for (q, p) in prior.iter().enumerate() {
        if let Some(p) = *p {
            for (i, &x) in peaks.iter().enumerate() {
                pairs.push(((x - p).abs(), q, i));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; prior.len()];
    let mut used = vec![false; peaks.len()];
    for (_, q, i) in pairs {
        if out[q].is_none() && !used[i] {
            out[q] = Some(peaks[i]);
            used[i] = true;
        }
    }
    out
}

/// Rank assignment: ascending peaks fill sources `0..`, the rest missing.
pub fn assign_by_rank<T: Real>(peaks: &[T], sources: usize) -> Vec<Option<T>> {
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    (0..sources).map(|q| sorted.get(q).copied()).collect()
}

/// Arranges per-sub-array peak lists into a [`DoaMatrix`]. Without a prior,
/// peaks are matched by rank; with one, each is assigned to the nearest prior
/// angle.
pub fn associate<T: Real>(peaks_per_subarray: &[Vec<T>], sources: usize, prior: Option<&[Option<T>]>) -> DoaMatrix<T> {
    let mut doa = DoaMatrix::empty(sources, peaks_per_subarray.len());
    for (b, peaks) in peaks_per_subarray.iter().enumerate() {
        let cells = match prior {
            None => assign_by_rank(peaks, sources),
            Some(p) => assign_to_prior(peaks, p),
        };
        for (q, c) in cells.into_iter().enumerate() {
            doa.set(q, b, c);
        }
    }
    doa
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorWeights<T> {
    /// `Q x (B+1)`, row-major; zero on missing cells.
    pub weights: Vec<Vec<T>>,
    pub variances: Vec<T>,
}

/// Gaussian weights of each cell's deviation from `reference`, normalised
/// per source over the detected cells.
pub fn error_weights<T: Real>(doa: &DoaMatrix<T>, reference: &[Option<T>]) -> ErrorWeights<T> {
    let floor: T = lit(SIGMA_FLOOR_DEG);
    let norm: T = (T::two_pi()).sqrt();
    let mut weights = Vec::with_capacity(doa.num_sources());
    let mut variances = Vec::with_capacity(doa.num_sources());
    for q in 0..doa.num_sources() {
        let row = doa.row(q);
        let Some(r) = reference.get(q).copied().flatten() else {
            let present = row.iter().filter(|c| c.is_some()).count();
            let w: T = if present > 0 { T::one() / lit(present as f64) } else { T::zero() };
            weights.push(row.iter().map(|c| if c.is_some() { w } else { T::zero() }).collect());
            variances.push(T::zero());
            continue;
        };
        let errs: Vec<Option<T>> = row.iter().map(|c| c.map(|x| (x - r).abs())).collect();
        let present = errs.iter().flatten().count();
        if present == 0 {
            weights.push(vec![T::zero(); row.len()]);
            variances.push(T::zero());
            continue;
        }
        let var = errs.iter().flatten().fold(T::zero(), |a, &e| a + e * e) / lit(present as f64);
        let sigma = var.sqrt().max(floor);
        let density: Vec<T> = errs
            .iter()
            .map(|e| match e {
                Some(e) => (-(*e * *e) / (lit::<T>(2.0) * sigma * sigma)).exp() / (norm * sigma),
                None => T::zero(),
            })
            .collect();
        let total = density.iter().fold(T::zero(), |a, &b| a + b);
        weights.push(density.into_iter().map(|f| f / total).collect());
        variances.push(var);
    }
    ErrorWeights { weights, variances }
}

/// Uniform weights over the detected cells of each row.
pub fn uniform_weights<T: Real>(doa: &DoaMatrix<T>) -> Vec<Vec<T>> {
    let none: Vec<Option<T>> = vec![None; doa.num_sources()];
    error_weights(doa, &none).weights
}

/// Exact minimiser of `sum_b w_b |x_b - c|`: the weighted median of the
/// detected entries, or the midpoint of the minimising interval when the
/// cumulative weight hits one half exactly.
pub fn weighted_l1_correct<T: Real>(row: &[Option<T>], weights: &[T]) -> Result<T> {
    let mut pts: Vec<(T, T)> = row
        .iter()
        .zip(weights)
        .filter_map(|(c, &w)| c.map(|x| (x, w)))
        .collect();
    if pts.is_empty() {
        return Err(DoaError::AllMissing);
    }
    if !pts.iter().any(|&(_, w)| w > T::zero()) {
        let n: T = lit(pts.len() as f64);
        pts.iter_mut().for_each(|p| p.1 = T::one() / n);
    }
    pts.retain(|&(_, w)| w > T::zero());
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let total = pts.iter().fold(T::zero(), |a, p| a + p.1);
    let half = total / lit(2.0);
    let tol = total * lit(1e-12);
    let mut cum = T::zero();
    for (i, &(x, w)) in pts.iter().enumerate() {
        cum += w;
        if (cum - half).abs() <= tol && i + 1 < pts.len() {
            return Ok((x + pts[i + 1].0) / lit(2.0));
        }
        if cum > half {
            return Ok(x);
        }
    }
    Ok(pts.last().expect("non-empty").0)
}

/// Weighted-L1 objective of Eq.-style correction, used by tests and traces.
pub fn l1_objective<T: Real>(row: &[Option<T>], weights: &[T], c: T) -> T {
    row.iter()
        .zip(weights)
        .filter_map(|(x, &w)| x.map(|x| w * (x - c).abs()))
        .fold(T::zero(), |a, b| a + b)
}

/// Sum of absolute deviations from `truth` (aligned with the rows), with
/// [`MISS_PENALTY_DEG`] for each missing cell.
pub fn overall_error<T: Real>(doa: &DoaMatrix<T>, truth: &[T]) -> T {
    let mut total = T::zero();
    for (q, &t) in truth.iter().enumerate().take(doa.num_sources()) {
        for c in doa.row(q) {
            total += match c {
                Some(x) => (*x - t).abs(),
                None => lit(MISS_PENALTY_DEG),
            };
        }
    }
    total
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Optimal one-to-one matching minimising the summed absolute difference.
/// Returns, for each `truth` entry, the index into `estimates` (if any).
pub fn optimal_assignment<T: Real>(estimates: &[T], truth: &[T]) -> Vec<Option<usize>> {
    let n = estimates.len().max(truth.len());
    let mut best: Option<(T, Vec<Option<usize>>)> = None;
    for perm in permutations(n) {
        let mut cost = T::zero();
        let mut assign = vec![None; truth.len()];
        for (t, &e) in perm.iter().enumerate().take(truth.len()) {
            if e < estimates.len() {
                cost += (estimates[e] - truth[t]).abs();
                assign[t] = Some(e);
            } else {
                cost += lit(1e6);
            }
        }
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, assign));
        }
    }
    best.map(|(_, a)| a).unwrap_or_default()
}

/// Rebuilds per-sub-array estimates from steered focusing at given angles.
pub trait Refocus<T: Real> {
    /// Reference bin per sub-bandwidth window for the given angles. `None`
    /// marks a window that could not be focused.
    fn reference_bins(&self, angles: &[Option<T>]) -> Result<Vec<Option<usize>>>;

    /// Steered refocusing, smoothing, MUSIC and association with `angles` as
    /// the prior.
    fn refocus(&self, angles: &[Option<T>]) -> Result<Refocused<T>>;

    /// Frequency in Hz of a bin, for traces.
    fn bin_freq(&self, bin: usize) -> T;
}

#[derive(Debug, Clone)]
pub struct Refocused<T> {
    pub doa: DoaMatrix<T>,
    pub ref_bins: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy)]
pub struct CrossIterParams<T> {
    pub max_iter: usize,
    pub grid_step: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    Aborted(String),
}

#[derive(Debug, Clone)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// Corrected DOAs driving this iteration's refocusing.
    pub corrected: Vec<Option<T>>,
    pub ref_bins: Vec<Option<usize>>,
    pub ref_freqs: Vec<Option<T>>,
    /// Overall error of the DOA matrix corrected in this iteration (the
    /// initial matrix at iteration 1), when the true DOAs are known.
    pub overall_error: Option<T>,
}

#[derive(Debug, Clone)]
pub struct CrossIterOutcome<T> {
    pub corrected: Vec<Option<T>>,
    pub doa: DoaMatrix<T>,
    pub weights: Vec<Vec<T>>,
    pub trace: Vec<IterationRecord<T>>,
    /// Overall error of the final DOA matrix, when the true DOAs are known.
    pub final_overall_error: Option<T>,
    pub stop: StopReason,
}

fn correct_all<T: Real>(doa: &DoaMatrix<T>, weights: &[Vec<T>]) -> Vec<Option<T>> {
    (0..doa.num_sources())
        .map(|q| weighted_l1_correct(doa.row(q), &weights[q]).ok())
        .collect()
}

fn max_change<T: Real>(a: &[Option<T>], b: &[Option<T>]) -> Option<T> {
    let mut worst = T::zero();
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some(x), Some(y)) => worst = worst.max((*x - *y).abs()),
            (None, None) => {}
            _ => return None,
        }
    }
    Some(worst)
}

/// Alternates weighted-L1 correction with steered refocusing.
///
/// Iteration `eta` corrects the current DOA matrix (uniform weights at
/// `eta = 1`), refocuses at the corrected angles, and reweights the new
/// matrix around them. The loop stops once the next correction moves no
/// source by a grid step and the window reference bins stay put, or after
/// `max_iter` iterations. `truth`, when given, only feeds the trace.
pub fn cross_iterate<T: Real>(
    initial: &DoaMatrix<T>,
    refocuser: &impl Refocus<T>,
    params: &CrossIterParams<T>,
    truth: Option<&[T]>,
) -> CrossIterOutcome<T> {
    let mut doa = initial.clone();
    let mut weights = uniform_weights(&doa);
    let mut theta = correct_all(&doa, &weights);

    // Align the true DOAs with the rows once, on the first corrections.
    let aligned_truth: Option<Vec<T>> = truth.map(|t| {
        let est: Vec<T> = theta.iter().map(|x| x.unwrap_or(lit(-1e3))).collect();
        let assign = optimal_assignment(t, &est);
        assign.iter().map(|i| i.map_or(lit(-1e3), |i| t[i])).collect()
    });

    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIterations;
    for eta in 1..=params.max_iter {
        let refocused = match refocuser.refocus(&theta) {
            Ok(r) => r,
            Err(e) => {
                stop = StopReason::Aborted(e.to_string());
                break;
            }
        };
        trace.push(IterationRecord {
            iteration: eta,
            corrected: theta.clone(),
            ref_freqs: refocused.ref_bins.iter().map(|b| b.map(|b| refocuser.bin_freq(b))).collect(),
            ref_bins: refocused.ref_bins.clone(),
            overall_error: aligned_truth.as_deref().map(|t| overall_error(&doa, t)),
        });

        let new_weights = error_weights(&refocused.doa, &theta).weights;
        let next = correct_all(&refocused.doa, &new_weights);
        let next_refs = refocuser.reference_bins(&next).ok();
        let settled = max_change(&theta, &next).is_some_and(|d| d < params.grid_step)
            && next_refs.as_ref() == Some(&refocused.ref_bins);

        doa = refocused.doa;
        weights = new_weights;
        theta = next;
        if settled {
            stop = StopReason::Converged;
            break;
        }
    }
    CrossIterOutcome {
        final_overall_error: aligned_truth.as_deref().map(|t| overall_error(&doa, t)),
        corrected: theta,
        doa,
        weights,
        trace,
        stop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    #[test]
    fn rank_association_on_separated_clusters() {
        let peaks: Vec<Vec<f64>> = vec![vec![95.0, 40.5], vec![40.0, 95.5], vec![41.0, 94.6]];
        let d = associate(&peaks, 2, None);
        for b in 0..3 {
            assert!((d.get(0, b).unwrap() - 40.5).abs() <= 0.5);
            assert!((d.get(1, b).unwrap() - 95.0).abs() <= 0.5);
        }
    }

    #[test]
    fn nearest_prior_association() {
        let prior = [Some(40.0), Some(95.0)];
        let d = associate(&[vec![41.0], vec![94.0, 41.0]], 2, Some(&prior));
        assert_eq!(d.get(0, 0), Some(41.0));
        assert!(d.is_missing(1, 0));
        assert_eq!((d.get(0, 1), d.get(1, 1)), (Some(41.0), Some(95.0 - 1.0)));
    }

    #[test]
    fn rank_association_marks_missing_ranks() {
        let d = associate(&[vec![70.0], vec![30.0, 70.0]], 2, None);
        assert_eq!(d.get(0, 0), Some(70.0));
        assert!(d.is_missing(1, 0));
    }

    #[test]
    fn agreeing_subarrays_get_uniform_weights() {
        let d = DoaMatrix::from_rows(vec![row(&[50.0, 50.0, 50.0, 50.0])]).unwrap();
        let w = error_weights(&d, &[Some(50.0)]);
        for x in &w.weights[0] {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_weights_by_hand() {
        let d = DoaMatrix::from_rows(vec![row(&[10.0, 11.0, 12.0])]).unwrap();
        let w = error_weights(&d, &[Some(10.0)]);
        assert!((w.variances[0] - 5.0 / 3.0).abs() < 1e-14);
        let f = [1.0f64, (-0.3f64).exp(), (-1.2f64).exp()];
        let s: f64 = f.iter().sum();
        for (got, want) in w.weights[0].iter().zip(f.iter().map(|x| x / s)) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn missing_cells_get_zero_weight() {
        let d = DoaMatrix::from_rows(vec![vec![Some(20.0), None, Some(22.0)]]).unwrap();
        let w = error_weights(&d, &[Some(21.0)]);
        assert_eq!(w.weights[0][1], 0.0);
        assert!((w.weights[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_median_cases() {
        assert_eq!(weighted_l1_correct(&row(&[30.0, 31.0, 32.0]), &[1.0 / 3.0; 3]).unwrap(), 31.0);
        assert_eq!(weighted_l1_correct(&[None, Some(77.0)], &[0.0, 1.0]).unwrap(), 77.0);
        assert_eq!(weighted_l1_correct(&row(&[10.0, 90.0, 170.0]), &[0.7, 0.15, 0.15]).unwrap(), 10.0);
        // Even split: the whole interval [20, 40] minimises; midpoint chosen.
        assert_eq!(weighted_l1_correct(&row(&[20.0, 40.0]), &[0.5, 0.5]).unwrap(), 30.0);
        assert!(matches!(weighted_l1_correct::<f64>(&[None, None], &[0.5, 0.5]), Err(DoaError::AllMissing)));
    }

    #[test]
    fn overall_error_cases() {
        let exact = DoaMatrix::from_rows(vec![row(&[60.0, 60.0]), row(&[100.0, 100.0])]).unwrap();
        assert_eq!(overall_error(&exact, &[60.0, 100.0]), 0.0);
        let d = DoaMatrix::from_rows(vec![row(&[61.0, 62.0, 63.0])]).unwrap();
        assert_eq!(overall_error(&d, &[60.0]), 6.0);
        let m = DoaMatrix::from_rows(vec![vec![Some(60.0), None, Some(60.0)]]).unwrap();
        assert_eq!(overall_error(&m, &[60.0]), 10.0);
    }

    #[test]
    fn assignment_is_optimal() {
        assert_eq!(optimal_assignment(&[95.2, 59.5], &[60.0, 95.0]), vec![Some(1), Some(0)]);
        assert_eq!(optimal_assignment::<f64>(&[], &[60.0, 95.0]), vec![None, None]);
        assert_eq!(optimal_assignment(&[80.0], &[10.0, 75.0]), vec![None, Some(0)]);
    }

    /// Refocuser that returns a fixed sequence of DOA matrices.
    struct Scripted {
        steps: Vec<DoaMatrix<f64>>,
        calls: std::cell::Cell<usize>,
    }

    impl Refocus<f64> for Scripted {
        fn reference_bins(&self, _: &[Option<f64>]) -> Result<Vec<Option<usize>>> {
            Ok(vec![Some(12)])
        }
        fn refocus(&self, _: &[Option<f64>]) -> Result<Refocused<f64>> {
            let i = self.calls.get().min(self.steps.len() - 1);
            self.calls.set(self.calls.get() + 1);
            Ok(Refocused {
                doa: self.steps[i].clone(),
                ref_bins: vec![Some(12)],
            })
        }
        fn bin_freq(&self, bin: usize) -> f64 {
            bin as f64 * 31.25
        }
    }

    #[test]
    fn exact_input_converges_in_one_iteration() {
        let d = DoaMatrix::from_rows(vec![row(&[60.0; 5])]).unwrap();
        let r = Scripted { steps: vec![d.clone()], calls: 0.into() };
        let out = cross_iterate(&d, &r, &CrossIterParams { max_iter: 25, grid_step: 0.5 }, Some(&[60.0]));
        assert_eq!(out.stop, StopReason::Converged);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.corrected, vec![Some(60.0)]);
        assert_eq!(out.trace[0].ref_freqs, vec![Some(375.0)]);
        assert_eq!(out.trace[0].overall_error, Some(0.0));
        assert_eq!(out.final_overall_error, Some(0.0));
    }

    #[test]
    fn oscillating_refocus_stops_at_max_iter() {
        let a = DoaMatrix::from_rows(vec![row(&[40.0; 3])]).unwrap();
        let b = DoaMatrix::from_rows(vec![row(&[50.0; 3])]).unwrap();
        let steps: Vec<_> = (0..40).map(|i| if i % 2 == 0 { b.clone() } else { a.clone() }).collect();
        let r = Scripted { steps, calls: 0.into() };
        let out = cross_iterate(&a, &r, &CrossIterParams { max_iter: 25, grid_step: 0.5 }, None);
        assert_eq!(out.stop, StopReason::MaxIterations);
        assert_eq!(out.trace.len(), 25);
    }

    #[test]
    fn weighted_median_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let n = rng.random_range(1..=11);
            let r: Vec<Option<f64>> = (0..n)
                .map(|_| if rng.random_bool(0.15) { None } else { Some(rng.random_range(0.0..=180.0)) })
                .collect();
            if r.iter().all(Option::is_none) {
                continue;
            }
            let raw: Vec<f64> = r.iter().map(|c| if c.is_some() { rng.random_range(0.01..1.0) } else { 0.0 }).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let exact = weighted_l1_correct(&r, &w).unwrap();
            let grid = (0..=1800)
                .map(|i| i as f64 * 0.1)
                .min_by(|&a, &b| l1_objective(&r, &w, a).total_cmp(&l1_objective(&r, &w, b)))
                .unwrap();
            assert!((exact - grid).abs() <= 0.1 + 1e-9, "exact {exact} grid {grid}");
            assert!(l1_objective(&r, &w, exact) <= l1_objective(&r, &w, grid) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weights_normalised(vals in proptest::collection::vec(0.0f64..=180.0, 1..12), reference in 0.0f64..=180.0) {
            let d = DoaMatrix::from_rows(vec![row(&vals)]).unwrap();
            let w = error_weights(&d, &[Some(reference)]);
            prop_assert!((w.weights[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.weights[0].iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn permutation_equivariance(vals in proptest::collection::vec(0.0f64..=180.0, 2..10), seed in 0u64..1000) {
            let n = vals.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let d = DoaMatrix::from_rows(vec![row(&vals)]).unwrap();
            let p = d.permute_subarrays(&perm);
            let reference = [Some(90.0)];
            let w = error_weights(&d, &reference).weights;
            let wp = error_weights(&p, &reference).weights;
            for (b, &src) in perm.iter().enumerate() {
                prop_assert!((wp[0][b] - w[0][src]).abs() < 1e-15);
            }
            let c = weighted_l1_correct(d.row(0), &w[0]).unwrap();
            let cp = weighted_l1_correct(p.row(0), &wp[0]).unwrap();
            prop_assert!((c - cp).abs() < 1e-12);
        }

        #[test]
        fn shrinking_spread_never_hurts(vals in proptest::collection::vec(0.0f64..=180.0, 1..10), t in 0.0f64..=1.0) {
            let r = row(&vals);
            let w = vec![1.0 / vals.len() as f64; vals.len()];
            let med = weighted_l1_correct(&r, &w).unwrap();
            let shrunk: Vec<Option<f64>> = vals.iter().map(|&x| Some(x + t * (med - x))).collect();
            let c0 = weighted_l1_correct(&r, &w).unwrap();
            let c1 = weighted_l1_correct(&shrunk, &w).unwrap();
            prop_assert!(l1_objective(&shrunk, &w, c1) <= l1_objective(&r, &w, c0) + 1e-9);
        }
    }
}
