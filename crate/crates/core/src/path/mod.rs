//! The elasso solution path.
//!
//! For weights `a` and sample eigenvalues `d`, the penalized eigenvalue
//! estimates are constant on contiguous groups of indices. Given a grouping,
//! the estimate of group `k` is `d~_k / (1 + eta a~_k)` where `d~` and `a~` are
//! group means. Adjacent groups `k, k+1` stay ordered until
//!
//! ```text
//! eta~_k = (d~_k - d~_{k+1}) / (a~_k d~_{k+1} - a~_{k+1} d~_k)
//! ```
//!
//! (infinite when the denominator is not positive). Starting from singletons
//! and repeatedly joining the pair with the smallest `eta~_k` yields `q`
//! nested partitions and `q - 1` knots; between two knots the inverse
//! estimates are linear in `eta`.

mod oracle;

use serde::Serialize;

pub use oracle::{brute_force_solve, convex_oracle, pava_nonincreasing, ConvexOracleOptions, OracleSolution};

use crate::error::{ElassoError, Result};
use crate::penalties::WeightVector;

/// Ordered contiguous grouping of `0..q` with per-group means of the
/// eigenvalues and of the weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    sizes: Vec<usize>,
    means: Vec<f64>,
    weight_means: Vec<f64>,
}

impl Partition {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Group means `d~_k` of the eigenvalues.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Group means `a~_k` of the weights.
    pub fn weight_means(&self) -> &[f64] {
        &self.weight_means
    }

    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn q(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Index ranges of the groups.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|m| {
                let r = start..start + m;
                start += m;
                r
            })
            .collect()
    }

    /// Repeats each group value over the group's indices.
    pub fn expand(&self, grouped: &[f64]) -> Vec<f64> {
        self.sizes
            .iter()
            .zip(grouped)
            .flat_map(|(&m, &v)| std::iter::repeat_n(v, m))
            .collect()
    }
}

/// Group means for a grouping given by its sizes.
pub fn group_stats(d: &[f64], weights: &WeightVector, sizes: &[usize]) -> Result<Partition> {
    let q = d.len();
    if weights.len() != q {
        return Err(ElassoError::LengthMismatch {
            expected: q,
            got: weights.len(),
        });
    }
    check_sizes(sizes, q)?;
    let a = weights.as_slice();
    let mut means = Vec::with_capacity(sizes.len());
    let mut weight_means = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &m in sizes {
        means.push(d[start..start + m].iter().sum::<f64>() / m as f64);
        weight_means.push(a[start..start + m].iter().sum::<f64>() / m as f64);
        start += m;
    }
    if means.windows(2).any(|w| w[0] < w[1]) {
        return Err(ElassoError::BadGrouping(
            "group means of the eigenvalues are not nonincreasing".into(),
        ));
    }
    Ok(Partition {
        sizes: sizes.to_vec(),
        means,
        weight_means,
    })
}

fn check_sizes(sizes: &[usize], q: usize) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(ElassoError::BadGrouping(
            "group sizes must be positive and non-empty".into(),
        ));
    }
    let total: usize = sizes.iter().sum();
    if total != q {
        return Err(ElassoError::BadGrouping(format!(
            "group sizes sum to {total}, expected {q}"
        )));
    }
    Ok(())
}

/// Critical point `d~_k / (1 + eta a~_k)` of the likelihood restricted to the
/// grouping. Ordering is not checked.
pub fn candidate_solution(partition: &Partition, eta: f64) -> Result<Vec<f64>> {
    partition
        .means
        .iter()
        .zip(&partition.weight_means)
        .enumerate()
        .map(|(k, (d, a))| {
            let denom = 1.0 + eta * a;
            if denom > 0.0 {
                Ok(d / denom)
            } else {
                Err(ElassoError::NonpositiveDenominator { group: k, eta })
            }
        })
        .collect()
}

/// Next knot of a partition and where it merges.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    /// `min_k eta~_k`; infinite for a single group.
    pub knot: f64,
    /// Smallest index attaining the minimum (`None` for a single group).
    pub merge_index: Option<usize>,
    /// `eta~_k` for every adjacent pair.
    pub pair_knots: Vec<f64>,
}

pub fn pair_knot(d_hi: f64, d_lo: f64, a_hi: f64, a_lo: f64) -> f64 {
    let denom = a_hi * d_lo - a_lo * d_hi;
    if denom > 0.0 {
        (d_hi - d_lo) / denom
    } else {
        f64::INFINITY
    }
}

pub fn knots_and_merge(partition: &Partition) -> MergeStep {
    let pair_knots: Vec<f64> = (1..partition.group_count())
        .map(|k| {
            pair_knot(
                partition.means[k - 1],
                partition.means[k],
                partition.weight_means[k - 1],
                partition.weight_means[k],
            )
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in pair_knots.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    MergeStep {
        knot: best.map_or(f64::INFINITY, |(_, v)| v),
        merge_index: best.map(|(k, _)| k),
        pair_knots,
    }
}

/// The full hierarchy of partitions and the knots between them.
///
/// `partitions[0]` holds for `0 <= eta < knots[0]`, `partitions[i]` for
/// `knots[i-1] <= eta < knots[i]`, and the last (one group) for all larger
/// `eta`. Merge indices are 0-based positions in the partition being merged.
#[derive(Debug, Clone, PartialEq)]
pub struct ElassoPath {
    eigenvalues: Vec<f64>,
    weights: WeightVector,
    knots: Vec<f64>,
    merge_indices: Vec<usize>,
    partitions: Vec<Partition>,
}

// running sums of a grouping during construction
struct Groups {
    sizes: Vec<usize>,
    d_sums: Vec<f64>,
    a_sums: Vec<f64>,
}

impl Groups {
    fn singletons(d: &[f64], a: &[f64]) -> Self {
        Self {
            sizes: vec![1; d.len()],
            d_sums: d.to_vec(),
            a_sums: a.to_vec(),
        }
    }

    fn merge(&mut self, k: usize) {
        let m = self.sizes.remove(k + 1);
        self.sizes[k] += m;
        let d = self.d_sums.remove(k + 1);
        self.d_sums[k] += d;
        let a = self.a_sums.remove(k + 1);
        self.a_sums[k] += a;
    }

    fn partition(&self) -> Partition {
        let means = self
            .d_sums
            .iter()
            .zip(&self.sizes)
            .map(|(s, &m)| s / m as f64)
            .collect();
        let weight_means = self
            .a_sums
            .iter()
            .zip(&self.sizes)
            .map(|(s, &m)| s / m as f64)
            .collect();
        Partition {
            sizes: self.sizes.clone(),
            means,
            weight_means,
        }
    }
}

fn check_eigenvalues(d: &[f64], weights: &WeightVector) -> Result<()> {
    if d.is_empty() {
        return Err(ElassoError::InvalidData("no eigenvalues".into()));
    }
    if d.len() != weights.len() {
        return Err(ElassoError::LengthMismatch {
            expected: d.len(),
            got: weights.len(),
        });
    }
    if let Some(bad) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(ElassoError::NonpositiveEigenvalue(*bad));
    }
    if d.windows(2).any(|w| w[0] < w[1]) {
        return Err(ElassoError::InvalidData(
            "eigenvalues must be nonincreasing".into(),
        ));
    }
    Ok(())
}

/// Path from singletons to a single group.
pub fn full_path(d: &[f64], weights: &WeightVector) -> Result<ElassoPath> {
    check_eigenvalues(d, weights)?;
    Ok(grow_path(d.to_vec(), weights.clone(), None))
}

/// Path restricted to a multi-spike model.
///
/// The sample eigenvalues are replaced by their model group means (the
/// model's maximum likelihood estimate), so the path starts at that estimate
/// for `eta = 0`. The merges that form the model from singletons are recorded
/// as knots at zero, leftmost first.
pub fn model_path(d: &[f64], weights: &WeightVector, model: &[usize]) -> Result<ElassoPath> {
    check_eigenvalues(d, weights)?;
    let partition = group_stats(d, weights, model)?;
    if partition.means.windows(2).any(|w| w[0] <= w[1]) {
        return Err(ElassoError::BadGrouping(
            "model group means must be strictly decreasing".into(),
        ));
    }
    let mle = partition.expand(&partition.means);
    Ok(grow_path(mle, weights.clone(), Some(model)))
}

fn grow_path(d: Vec<f64>, weights: WeightVector, model: Option<&[usize]>) -> ElassoPath {
    let q = d.len();
    let mut groups = Groups::singletons(&d, weights.as_slice());
    let mut partitions = vec![groups.partition()];
    let mut knots = Vec::with_capacity(q.saturating_sub(1));
    let mut merge_indices = Vec::with_capacity(q.saturating_sub(1));

    if let Some(model) = model {
        let mut label = Vec::with_capacity(q);
        for (g, &m) in model.iter().enumerate() {
            label.extend(std::iter::repeat_n(g, m));
        }
        loop {
            let mut start = 0;
            let mut found = None;
            for k in 0..groups.sizes.len() - 1 {
                let next = start + groups.sizes[k];
                if label[start] == label[next] {
                    found = Some(k);
                    break;
                }
                start = next;
            }
            let Some(k) = found else { break };
            groups.merge(k);
            knots.push(0.0);
            merge_indices.push(k);
            partitions.push(groups.partition());
        }
    }

    while groups.sizes.len() > 1 {
        let step = knots_and_merge(partitions.last().expect("non-empty"));
        let k = step.merge_index.expect("at least two groups");
        // knots are nondecreasing in exact arithmetic; keep rounding from
        // reordering them
        let floor = knots.last().copied().unwrap_or(0.0);
        knots.push(step.knot.max(floor));
        merge_indices.push(k);
        groups.merge(k);
        partitions.push(groups.partition());
    }

    ElassoPath {
        eigenvalues: d,
        weights,
        knots,
        merge_indices,
        partitions,
    }
}

impl ElassoPath {
    pub fn q(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues the path was built from (the model estimate for model paths).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    /// `q - 1` nondecreasing knots; may contain infinities only when the
    /// weights are all zero.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn merge_indices(&self) -> &[usize] {
        &self.merge_indices
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Knot at which `partitions[i]` takes over (zero for the first).
    pub fn onset(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.knots[i - 1]
        }
    }

    /// Largest finite knot, i.e. where everything merges into one group.
    pub fn largest_knot(&self) -> Option<f64> {
        self.knots.iter().rev().copied().find(|k| k.is_finite())
    }

    /// Position of the partition with the given group sizes, if the path has it.
    pub fn find_partition(&self, sizes: &[usize]) -> Option<usize> {
        self.partitions.iter().position(|p| p.sizes == sizes)
    }

    /// Index of the partition in force at `eta`.
    pub fn partition_index(&self, eta: f64) -> usize {
        self.knots.partition_point(|k| *k <= eta)
    }

    pub fn partition_at(&self, eta: f64) -> &Partition {
        &self.partitions[self.partition_index(eta)]
    }

    /// Penalized eigenvalue estimates at `eta`, nonincreasing.
    pub fn solve_at(&self, eta: f64) -> Result<Vec<f64>> {
        if !(eta >= 0.0) {
            return Err(ElassoError::NegativeTuning(eta));
        }
        let partition = self.partition_at(eta);
        let grouped = candidate_solution(partition, eta)?;
        Ok(partition.expand(&grouped))
    }

    /// Estimates at each knot, evaluated with the partition formed there.
    pub fn lambda_at_knots(&self) -> Vec<Vec<f64>> {
        self.knots
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let p = &self.partitions[i + 1];
                if k.is_finite() {
                    let grouped = candidate_solution(p, k).unwrap_or_else(|_| p.means.clone());
                    p.expand(&grouped)
                } else {
                    p.expand(&p.means)
                }
            })
            .collect()
    }
}

/// `sum_j d_j / lambda_j + (1 + eta a_j) log(lambda_j)`: the likelihood plus
/// elasso penalty on nonincreasing eigenvalues.
pub fn eigen_objective(d: &[f64], weights: &WeightVector, eta: f64, lambda: &[f64]) -> f64 {
    d.iter()
        .zip(weights.as_slice())
        .zip(lambda)
        .map(|((d, a), l)| d / l + (1.0 + eta * a) * l.ln())
        .sum()
}

/// Largest finite knot in closed form: `max_k (q D_k / D_q - k) / A_k` over
/// `k < q` with partial sums `D_k` of `d` and `A_k` of `a` (`A_k > 0`).
pub fn last_knot_closed_form(d: &[f64], weights: &WeightVector) -> Result<Option<f64>> {
    check_eigenvalues(d, weights)?;
    let q = d.len();
    let total: f64 = d.iter().sum();
    let a = weights.as_slice();
    let (mut dk, mut ak) = (0.0, 0.0);
    let mut best: Option<f64> = None;
    for k in 1..q {
        dk += d[k - 1];
        ak += a[k - 1];
        if ak > 0.0 {
            let v = (q as f64 * dk / total - k as f64) / ak;
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    Ok(best)
}
