//! k-means over coefficient matrices under the Frobenius norm.
//!
//! The objective is the mean nearest-center Frobenius distance. Iterations
//! alternate nearest-center assignment (ties to the lowest center index)
//! with elementwise-mean center updates until the membership stabilizes.
//! Initialization follows the five-method menu: (a) random entries in the
//! data range, (b) farthest-pair greedy, (c) the min-sum K-subset,
//! (d) random picks, (e) caller-supplied centers. `init_candidates`
//! assembles the 53-candidate pool (1 a + 1 b + 1 c + 50 d) and
//! `select_init` keeps the candidate with the smallest mean nearest-center
//! distance.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Iteration cap when the caller does not supply one.
pub const DEFAULT_MAX_ITER: usize = 300;

/// Method-(d) draws in the candidate pool.
pub const DEFAULT_RANDOM_CANDIDATES: usize = 50;

/// Subset-enumeration budget for method (c); larger instances fall back to
/// greedy construction plus swap local search.
pub const EXHAUSTIVE_SUBSET_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least {k} data matrices for K = {k}, got {n}")]
    InsufficientData { n: usize, k: usize },

    #[error("K must be at least 1")]
    InvalidK,

    #[error("matrix dimensions differ: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("no data matrices supplied")]
    EmptyInput,

    #[error("no candidates supplied")]
    EmptyCandidates,
}

/// Frobenius distance `sqrt(sum((A - B)^2))`.
pub fn frobenius_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64, ClusterError> {
    if a.shape() != b.shape() {
        return Err(ClusterError::DimensionMismatch {
            expected_rows: a.nrows(),
            expected_cols: a.ncols(),
            rows: b.nrows(),
            cols: b.ncols(),
        });
    }
    Ok(frob(a, b))
}

#[inline]
fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitMethod {
    RandomEntries,
    FarthestPairGreedy,
    KCenterGreedy { exhaustive: bool },
    RandomPick,
    Preclustered,
}

impl InitMethod {
    pub fn label(&self) -> &'static str {
        match self {
            InitMethod::RandomEntries => "random-entries",
            InitMethod::FarthestPairGreedy => "farthest-pair-greedy",
            InitMethod::KCenterGreedy { .. } => "k-center-greedy",
            InitMethod::RandomPick => "random-pick",
            InitMethod::Preclustered => "preclustered",
        }
    }
}

/// One initialization candidate: K starting centers plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct InitChoice {
    pub method: InitMethod,
    pub seed: u64,
    pub centers: Vec<DMatrix<f64>>,
}

/// Converged clustering: centers, assignments, Eq.-style objective
/// (mean nearest-center Frobenius distance) and the per-iteration
/// objective trace.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub centers: Vec<DMatrix<f64>>,
    pub labels: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

fn validate_data(data: &[DMatrix<f64>], k: usize) -> Result<(usize, usize), ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidK);
    }
    let first = data.first().ok_or(ClusterError::EmptyInput)?;
    let shape = first.shape();
    for m in data {
        if m.shape() != shape {
            return Err(ClusterError::DimensionMismatch {
                expected_rows: shape.0,
                expected_cols: shape.1,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
    }
    if data.len() < k {
        return Err(ClusterError::InsufficientData { n: data.len(), k });
    }
    Ok(shape)
}

fn pairwise_distances(data: &[DMatrix<f64>]) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = frob(&data[i], &data[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Method (a): K matrices with entries drawn uniformly from the range of
/// all data entries.
pub fn init_method_a(data: &[DMatrix<f64>], k: usize, seed: u64) -> Result<InitChoice, ClusterError> {
    let (rows, cols) = validate_data(data, k)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in data {
        for &v in m.as_slice() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = (0..k)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| if lo < hi { rng.random_range(lo..=hi) } else { lo }))
        .collect();
    Ok(InitChoice { method: InitMethod::RandomEntries, seed, centers })
}

/// Method (b): the farthest pair, then greedily the datum maximizing the
/// average distance to the centers chosen so far. Ties resolve toward the
/// later index so the greedy matches its published worked example.
pub fn init_method_b(data: &[DMatrix<f64>], k: usize) -> Result<InitChoice, ClusterError> {
    validate_data(data, k)?;
    if k < 2 {
        return Err(ClusterError::InsufficientData { n: data.len(), k: 2 });
    }
    let n = data.len();
    let d = pairwise_distances(data);

    let mut best = (0, 1);
    let mut best_dist = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            if d[i][j] > best_dist {
                best_dist = d[i][j];
                best = (i, j);
            }
        }
    }
    let mut chosen = vec![best.0, best.1];
    while chosen.len() < k {
        let mut pick = None;
        let mut pick_avg = f64::NEG_INFINITY;
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let avg: f64 = chosen.iter().map(|&c| d[i][c]).sum::<f64>() / chosen.len() as f64;
            if avg >= pick_avg {
                pick_avg = avg;
                pick = Some(i);
            }
        }
        chosen.push(pick.expect("n >= k guarantees an unchosen datum"));
    }
    Ok(InitChoice {
        method: InitMethod::FarthestPairGreedy,
        seed: 0,
        centers: chosen.iter().map(|&i| data[i].clone()).collect(),
    })
}

fn binomial_capped(n: usize, k: usize, cap: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u64) {
            Some(v) => v / (i as u64 + 1),
            None => return cap + 1,
        };
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

fn subset_cost(d: &[Vec<f64>], subset: &[usize]) -> f64 {
    let mut total = 0.0;
    for row in d {
        let mut best = f64::INFINITY;
        for &c in subset {
            if row[c] < best {
                best = row[c];
            }
        }
        total += best;
    }
    total
}

/// Method (c): the K-subset of the data minimizing the summed distance from
/// every datum to its closest subset member. Exact enumeration while
/// `C(n, K)` stays within [`EXHAUSTIVE_SUBSET_LIMIT`], greedy construction
/// plus swap local search beyond it; the choice is recorded in the returned
/// method tag.
pub fn init_method_c(data: &[DMatrix<f64>], k: usize) -> Result<InitChoice, ClusterError> {
    validate_data(data, k)?;
    let n = data.len();
    let d = pairwise_distances(data);

    let exhaustive = binomial_capped(n, k, EXHAUSTIVE_SUBSET_LIMIT) <= EXHAUSTIVE_SUBSET_LIMIT;
    let chosen = if exhaustive {
        let mut subset: Vec<usize> = (0..k).collect();
        let mut best = subset.clone();
        let mut best_cost = subset_cost(&d, &subset);
        while next_combination(&mut subset, n) {
            let cost = subset_cost(&d, &subset);
            if cost < best_cost {
                best_cost = cost;
                best = subset.clone();
            }
        }
        best
    } else {
        greedy_swap_subset(&d, k)
    };

    Ok(InitChoice {
        method: InitMethod::KCenterGreedy { exhaustive },
        seed: 0,
        centers: chosen.iter().map(|&i| data[i].clone()).collect(),
    })
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn greedy_swap_subset(d: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = d.len();
    // Greedy build: 1-median first, then the element lowering the cost most.
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let first = (0..n)
        .min_by(|&a, &b| {
            let sa: f64 = d[a].iter().sum();
            let sb: f64 = d[b].iter().sum();
            sa.partial_cmp(&sb).unwrap()
        })
        .unwrap();
    chosen.push(first);
    let mut nearest: Vec<f64> = d.iter().map(|row| row[first]).collect();
    while chosen.len() < k {
        let mut pick = None;
        let mut pick_cost = f64::INFINITY;
        for cand in 0..n {
            if chosen.contains(&cand) {
                continue;
            }
            let cost: f64 = nearest.iter().zip(d.iter()).map(|(&nd, row)| nd.min(row[cand])).sum();
            if cost < pick_cost {
                pick_cost = cost;
                pick = Some(cand);
            }
        }
        let pick = pick.expect("n >= k");
        for i in 0..n {
            nearest[i] = nearest[i].min(d[i][pick]);
        }
        chosen.push(pick);
    }

    // Swap improvement passes.
    let mut cost = subset_cost(d, &chosen);
    for _ in 0..20 {
        let mut improved = false;
        for slot in 0..k {
            for cand in 0..n {
                if chosen.contains(&cand) {
                    continue;
                }
                let old = chosen[slot];
                chosen[slot] = cand;
                let new_cost = subset_cost(d, &chosen);
                if new_cost + 1e-15 < cost {
                    cost = new_cost;
                    improved = true;
                } else {
                    chosen[slot] = old;
                }
            }
        }
        if !improved {
            break;
        }
    }
    chosen
}

/// Method (d): K distinct data matrices chosen uniformly at random.
pub fn init_method_d(data: &[DMatrix<f64>], k: usize, seed: u64) -> Result<InitChoice, ClusterError> {
    validate_data(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, data.len(), k);
    Ok(InitChoice {
        method: InitMethod::RandomPick,
        seed,
        centers: picks.iter().map(|i| data[i].clone()).collect(),
    })
}

/// Method (e): caller-supplied centers from an external pre-clustering.
pub fn init_preclustered(
    data: &[DMatrix<f64>],
    centers: Vec<DMatrix<f64>>,
) -> Result<InitChoice, ClusterError> {
    let shape = validate_data(data, centers.len().max(1))?;
    for c in &centers {
        if c.shape() != shape {
            return Err(ClusterError::DimensionMismatch {
                expected_rows: shape.0,
                expected_cols: shape.1,
                rows: c.nrows(),
                cols: c.ncols(),
            });
        }
    }
    Ok(InitChoice { method: InitMethod::Preclustered, seed: 0, centers })
}

/// The 53-candidate pool: method (b), method (c), `n_random` method-(d)
/// draws, and one method-(a) draw, in that order.
pub fn init_candidates(
    data: &[DMatrix<f64>],
    k: usize,
    n_random: usize,
    seed: u64,
) -> Result<Vec<InitChoice>, ClusterError> {
    validate_data(data, k)?;
    let mut candidates = Vec::with_capacity(n_random + 3);
    candidates.push(init_method_b(data, k)?);
    candidates.push(init_method_c(data, k)?);
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        candidates.push(init_method_d(data, k, seeder.random::<u64>())?);
    }
    candidates.push(init_method_a(data, k, seeder.random::<u64>())?);
    Ok(candidates)
}

fn mean_nearest_distance(data: &[DMatrix<f64>], centers: &[DMatrix<f64>]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|m| {
            centers
                .iter()
                .map(|c| frob(m, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / data.len() as f64
}

/// Keeps the candidate whose centers give the smallest mean nearest-center
/// distance over the data; ties resolve to the earliest candidate.
pub fn select_init(
    data: &[DMatrix<f64>],
    candidates: &[InitChoice],
) -> Result<InitChoice, ClusterError> {
    if candidates.is_empty() {
        return Err(ClusterError::EmptyCandidates);
    }
    if data.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, cand) in candidates.iter().enumerate() {
        let score = mean_nearest_distance(data, &cand.centers);
        if score < best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(candidates[best].clone())
}

/// Lloyd-style iteration: assignment, empty-cluster repair, mean update,
/// until the membership stops changing or `max_iter` passes complete.
pub fn kmeans(
    data: &[DMatrix<f64>],
    k: usize,
    init: &InitChoice,
    max_iter: usize,
) -> Result<ClusterModel, ClusterError> {
    let shape = validate_data(data, k)?;
    if init.centers.len() != k {
        return Err(ClusterError::InsufficientData { n: init.centers.len(), k });
    }
    for c in &init.centers {
        if c.shape() != shape {
            return Err(ClusterError::DimensionMismatch {
                expected_rows: shape.0,
                expected_cols: shape.1,
                rows: c.nrows(),
                cols: c.ncols(),
            });
        }
    }

    let n = data.len();
    let mut centers: Vec<DMatrix<f64>> = init.centers.clone();
    let mut labels: Vec<usize> = vec![usize::MAX; n];
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();

    for _ in 0..max_iter.max(1) {
        iterations += 1;

        // Step 2: nearest-center assignment, ties to the lowest index.
        let mut new_labels = vec![0usize; n];
        let mut assigned_dist = vec![0.0f64; n];
        for i in 0..n {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let dist = frob(&data[i], center);
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            new_labels[i] = best;
            assigned_dist[i] = best_dist;
        }

        // Refill empty clusters with the datum farthest from its current
        // center, never draining a singleton cluster.
        let mut counts = vec![0usize; k];
        for &l in &new_labels {
            counts[l] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let mut pick = None;
            let mut pick_dist = f64::NEG_INFINITY;
            for i in 0..n {
                if counts[new_labels[i]] >= 2 && assigned_dist[i] > pick_dist {
                    pick_dist = assigned_dist[i];
                    pick = Some(i);
                }
            }
            if let Some(i) = pick {
                counts[new_labels[i]] -= 1;
                new_labels[i] = empty;
                counts[empty] += 1;
                assigned_dist[i] = 0.0;
            }
        }

        let changed = new_labels != labels;
        labels = new_labels;

        // Step 3: centers become elementwise means of their members.
        let (rows, cols) = shape;
        let mut sums = vec![DMatrix::zeros(rows, cols); k];
        for (i, &l) in labels.iter().enumerate() {
            sums[l] += &data[i];
        }
        for (c, sum) in sums.into_iter().enumerate() {
            if counts[c] > 0 {
                centers[c] = sum / counts[c] as f64;
            }
        }

        trace.push(mean_nearest_distance(data, &centers));

        if !changed {
            converged = true;
            break;
        }
    }

    let objective = mean_nearest_distance(data, &centers);
    Ok(ClusterModel {
        centers,
        labels,
        objective,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Full pipeline: build the 53-candidate pool, select the best candidate,
/// run k-means from it.
pub fn cluster_with_selected_init(
    data: &[DMatrix<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(ClusterModel, InitChoice), ClusterError> {
    let candidates = init_candidates(data, k, DEFAULT_RANDOM_CANDIDATES, seed)?;
    let init = select_init(data, &candidates)?;
    let model = kmeans(data, k, &init, max_iter)?;
    Ok((model, init))
}
