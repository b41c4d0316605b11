use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::idx;
use crate::rng;

/// Linear teacher `T = w.I + b + noise` attached to a Gaussian generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearTeacher {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Gaussian {
        n: usize,
        m: usize,
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
        #[serde(default)]
        teacher: Option<LinearTeacher>,
    },
    /// Autoencoder data: targets equal inputs, values in {-1, +1}.
    ClusteredBinary {
        n_clusters: usize,
        per_cluster: usize,
        n_bits: usize,
        flip_prob: f64,
    },
    BooleanTable {
        n: usize,
        function_id: u64,
    },
    LinsepRandom {
        n: usize,
        m: usize,
    },
    IdxFile {
        path: PathBuf,
        #[serde(default)]
        labels_path: Option<PathBuf>,
        #[serde(default)]
        subset: Option<usize>,
        #[serde(default)]
        binarize_threshold: Option<f64>,
    },
    Explicit {
        inputs: Vec<Vec<f64>>,
        #[serde(default)]
        targets: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: GeneratorSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Option<Vec<Vec<f64>>>,
    /// Cluster or class index per example, when the generator has one.
    #[serde(default)]
    pub labels: Option<Vec<usize>>,
    pub metadata: Metadata,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let set = TrainingSet {
            metadata: Metadata {
                generator: GeneratorSpec::Explicit {
                    inputs: Vec::new(),
                    targets: None,
                },
                seed: 0,
            },
            inputs,
            targets,
            labels: None,
        };
        set.validate()?;
        Ok(set)
    }

    /// Single-output convenience constructor.
    pub fn with_scalar_targets(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        Self::new(inputs, Some(targets.into_iter().map(|t| vec![t]).collect()))
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.input_dim();
        for row in &self.inputs {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
        }
        if let Some(t) = &self.targets {
            if t.len() != self.inputs.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.inputs.len(),
                    got: t.len(),
                });
            }
            let tw = t.first().map_or(0, Vec::len);
            if let Some(bad) = t.iter().find(|r| r.len() != tw) {
                return Err(Error::DimensionMismatch {
                    expected: tw,
                    got: bad.len(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.as_ref().and_then(|t| t.first()).map_or(0, Vec::len)
    }

    /// First target component of example `t`.
    pub fn scalar_target(&self, t: usize) -> Option<f64> {
        self.targets.as_ref().map(|rows| rows[t][0])
    }

    /// Copy with a constant `+1` input prepended to every example.
    pub fn with_bias_column(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.inputs {
            row.insert(0, 1.0);
        }
        out
    }

    /// Apply `x -> a x + b` to inputs and/or targets.
    pub fn affine_map(&self, a: f64, b: f64, inputs: bool, targets: bool) -> Self {
        let mut out = self.clone();
        if inputs {
            for v in out.inputs.iter_mut().flatten() {
                *v = a * *v + b;
            }
        }
        if targets {
            if let Some(t) = &mut out.targets {
                for v in t.iter_mut().flatten() {
                    *v = a * *v + b;
                }
            }
        }
        out
    }
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<TrainingSet> {
    let mut r = rng::seeded(seed);
    let (inputs, targets, labels) = match spec {
        GeneratorSpec::Gaussian {
            n,
            m,
            mean,
            cov,
            teacher,
        } => {
            let (inputs, targets) = gaussian(*n, *m, mean, cov, teacher.as_ref(), &mut r)?;
            (inputs, targets, None)
        }
        GeneratorSpec::ClusteredBinary {
            n_clusters,
            per_cluster,
            n_bits,
            flip_prob,
        } => {
            let centroids = random_centroids(*n_clusters, *n_bits, &mut r);
            let (inputs, labels) = clustered_from(&centroids, *per_cluster, *flip_prob, &mut r)?;
            (inputs.clone(), Some(inputs), Some(labels))
        }
        GeneratorSpec::BooleanTable { n, function_id } => {
            let (inputs, targets) = boolean_table(*n, *function_id)?;
            (inputs, Some(targets.into_iter().map(|t| vec![t]).collect()), None)
        }
        GeneratorSpec::LinsepRandom { n, m } => {
            let (inputs, targets) = linsep_random(*n, *m, &mut r);
            (inputs, Some(targets.into_iter().map(|t| vec![t]).collect()), None)
        }
        GeneratorSpec::IdxFile {
            path,
            labels_path,
            subset,
            binarize_threshold,
        } => idx_dataset(path, labels_path.as_ref(), *subset, *binarize_threshold, &mut r)?,
        GeneratorSpec::Explicit { inputs, targets } => (inputs.clone(), targets.clone(), None),
    };
    let set = TrainingSet {
        inputs,
        targets,
        labels,
        metadata: Metadata {
            generator: spec.clone(),
            seed,
        },
    };
    set.validate()?;
    Ok(set)
}

type Rows = Vec<Vec<f64>>;

fn gaussian(
    n: usize,
    m: usize,
    mean: &[f64],
    cov: &[Vec<f64>],
    teacher: Option<&LinearTeacher>,
    r: &mut rng::Rng,
) -> Result<(Rows, Option<Rows>)> {
    if mean.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mean.len(),
        });
    }
    if cov.len() != n || cov.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("covariance must be n x n".into()));
    }
    let c = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
    // Zero-variance directions make Cholesky fail; a symmetric square root handles them.
    let eig = c.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
        return Err(Error::InvalidArgument("covariance is not positive semi-definite".into()));
    }
    let sqrt_l = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()));
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_l) * eig.eigenvectors.transpose();
    let mu = DVector::from_column_slice(mean);
    let mut inputs = Vec::with_capacity(m);
    let mut targets = teacher.map(|_| Vec::with_capacity(m));
    for _ in 0..m {
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(r));
        let x = &mu + &root * z;
        let row: Vec<f64> = x.iter().copied().collect();
        if let (Some(t), Some(out)) = (teacher, targets.as_mut()) {
            if t.weights.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.weights.len(),
                });
            }
            let noise: f64 = StandardNormal.sample(r);
            let y = t.weights.iter().zip(&row).map(|(w, v)| w * v).sum::<f64>() + t.bias + t.noise * noise;
            out.push(vec![y]);
        }
        inputs.push(row);
    }
    Ok((inputs, targets))
}

/// Fair-coin `{-1, +1}` centroids.
pub fn random_centroids(n_clusters: usize, n_bits: usize, r: &mut rng::Rng) -> Rows {
    (0..n_clusters)
        .map(|_| (0..n_bits).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// `per_cluster` noisy copies of every centroid, each bit flipped independently.
pub fn clustered_from(
    centroids: &[Vec<f64>],
    per_cluster: usize,
    flip_prob: f64,
    r: &mut rng::Rng,
) -> Result<(Rows, Vec<usize>)> {
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::InvalidArgument(format!("flip probability {flip_prob} outside [0,1]")));
    }
    let mut inputs = Vec::with_capacity(centroids.len() * per_cluster);
    let mut labels = Vec::with_capacity(centroids.len() * per_cluster);
    for (c, centroid) in centroids.iter().enumerate() {
        for _ in 0..per_cluster {
            inputs.push(
                centroid
                    .iter()
                    .map(|&b| if r.random::<f64>() < flip_prob { -b } else { b })
                    .collect(),
            );
            labels.push(c);
        }
    }
    Ok((inputs, labels))
}

/// Train and test sets drawn around the same centroids.
pub fn clustered_binary_split(
    n_clusters: usize,
    per_cluster: usize,
    n_bits: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    let mut r = rng::seeded(seed);
    let centroids = random_centroids(n_clusters, n_bits, &mut r);
    let spec = GeneratorSpec::ClusteredBinary {
        n_clusters,
        per_cluster,
        n_bits,
        flip_prob,
    };
    let make = |r: &mut rng::Rng| -> Result<TrainingSet> {
        let (inputs, labels) = clustered_from(&centroids, per_cluster, flip_prob, r)?;
        Ok(TrainingSet {
            targets: Some(inputs.clone()),
            inputs,
            labels: Some(labels),
            metadata: Metadata {
                generator: spec.clone(),
                seed,
            },
        })
    };
    let train = make(&mut r)?;
    let test = make(&mut r)?;
    Ok((train, test))
}

/// Row `k` has `x_i = +1` iff bit `i` of `k` is set; the target is `+1` iff
/// bit `k` of `function_id` is set.
pub fn boolean_table(n: usize, function_id: u64) -> Result<(Rows, Vec<f64>)> {
    if n > 6 {
        return Err(Error::AboveCap {
            what: format!("boolean table with {n} inputs"),
            cap: 6,
        });
    }
    let rows = 1usize << n;
    if rows < 64 && function_id >> rows != 0 {
        return Err(Error::InvalidArgument(format!("function id {function_id} has more than {rows} bits")));
    }
    let inputs = (0..rows)
        .map(|k| (0..n).map(|i| if k >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let targets = (0..rows).map(|k| if function_id >> k & 1 == 1 { 1.0 } else { -1.0 }).collect();
    Ok((inputs, targets))
}

/// Random `{-1, +1}` inputs labelled by a random Gaussian hyperplane through
/// the origin; examples lying on the hyperplane are redrawn.
pub fn linsep_random(n: usize, m: usize, r: &mut rng::Rng) -> (Rows, Vec<f64>) {
    let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(r)).collect();
    let mut inputs = Vec::with_capacity(m);
    let mut targets = Vec::with_capacity(m);
    while inputs.len() < m {
        let x: Vec<f64> = (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let s: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        if s == 0.0 {
            continue;
        }
        targets.push(s.signum());
        inputs.push(x);
    }
    (inputs, targets)
}

fn idx_dataset(
    path: &PathBuf,
    labels_path: Option<&PathBuf>,
    subset: Option<usize>,
    threshold: Option<f64>,
    r: &mut rng::Rng,
) -> Result<(Rows, Option<Rows>, Option<Vec<usize>>)> {
    let images = idx::read_idx(path)?;
    let labels = labels_path.map(idx::read_idx).transpose()?;
    if let Some(l) = &labels {
        if l.len() != images.len() {
            return Err(Error::Idx(format!("{} labels for {} images", l.len(), images.len())));
        }
    }
    let mut order: Vec<usize> = (0..images.len()).collect();
    if let Some(k) = subset {
        order.shuffle(r);
        order.truncate(k);
        order.sort_unstable();
    }
    let inputs = order
        .iter()
        .map(|&i| {
            images
                .item(i)
                .iter()
                .map(|&v| {
                    let x = v / 255.0;
                    match threshold {
                        Some(th) if x > th => 1.0,
                        Some(_) => -1.0,
                        None => x,
                    }
                })
                .collect()
        })
        .collect();
    let (targets, classes) = match labels {
        Some(l) => {
            let classes: Vec<usize> = order.iter().map(|&i| l.data[i] as usize).collect();
            let k = classes.iter().max().map_or(0, |c| c + 1);
            let onehot = classes
                .iter()
                .map(|&c| (0..k).map(|j| if j == c { 1.0 } else { -1.0 }).collect())
                .collect();
            (Some(onehot), Some(classes))
        }
        None => (None, None),
    };
    Ok((inputs, targets, classes))
}
