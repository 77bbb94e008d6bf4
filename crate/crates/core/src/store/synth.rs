//! Synthetic embedding fixtures with controllable geometry.
//!
//! Every domain gets a base direction mixing a globally shared direction
//! (weight `domain_correlation`) with a domain-specific one. Class means are
//! the base plus a class-specific direction, scaled so that any two class
//! means of the same domain sit exactly `separation` radians apart when the
//! dimension leaves room for mutually orthogonal directions. Otherwise the
//! class directions are random, the margin is enforced by rejection and the
//! class spread around the domain base widens until the margin fits.
//! Samples are class means plus isotropic Gaussian noise, L2-normalized.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dataset::{EmbeddingDataset, Role};
use super::texts::{DomainTexts, DEFAULT_PROMPT};
use crate::error::{RailError, Result};
use crate::linalg::Matrix;

const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_domains: usize,
    pub classes_per_domain: usize,
    pub samples_per_class: usize,
    pub test_samples_per_class: usize,
    pub dim: usize,
    /// Minimum angle in radians between any two class means.
    pub separation: f64,
    /// Expected L2 norm of the per-sample noise before normalization.
    pub noise: f64,
    /// Cosine between the base directions of any two domains.
    pub domain_correlation: f64,
    /// Expected L2 norm of the perturbation applied to class text vectors.
    pub text_noise: f64,
    /// Weight of the class direction in each text vector; the remainder
    /// points along one direction shared by every text vector, which
    /// compresses image-text cosines the way real encoders do.
    pub text_alignment: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(
        n_domains: usize,
        classes_per_domain: usize,
        samples_per_class: usize,
        dim: usize,
        separation: f64,
        seed: u64,
    ) -> Self {
        SynthConfig {
            n_domains,
            classes_per_domain,
            samples_per_class,
            test_samples_per_class: samples_per_class,
            dim,
            separation,
            noise: 0.1,
            domain_correlation: 0.3,
            text_noise: 0.0,
            text_alignment: 1.0,
            seed,
        }
    }

    pub fn total_classes(&self) -> usize {
        self.n_domains * self.classes_per_domain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDomain {
    pub train: EmbeddingDataset,
    pub test: EmbeddingDataset,
    pub texts: DomainTexts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSuite {
    pub domains: Vec<SyntheticDomain>,
    /// Unit class means, one row per class in domain-major order.
    pub class_means: Matrix,
}

pub fn domain_name(k: usize) -> String {
    format!("synth{k:02}")
}

pub fn synthesize_domains(cfg: &SynthConfig) -> Result<SyntheticSuite> {
    if cfg.n_domains == 0 || cfg.classes_per_domain == 0 || cfg.samples_per_class == 0 || cfg.dim == 0 {
        return Err(RailError::InvalidParameter(
            "synthetic fixture counts must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.domain_correlation) || cfg.noise < 0.0 || cfg.text_noise < 0.0 {
        return Err(RailError::InvalidParameter(
            "domain_correlation must lie in [0, 1] and noise levels must be non-negative".into(),
        ));
    }
    if !(cfg.text_alignment > 0.0 && cfg.text_alignment <= 1.0) {
        return Err(RailError::InvalidParameter(format!(
            "text_alignment must lie in (0, 1], got {}",
            cfg.text_alignment
        )));
    }
    let theta = cfg.separation;
    if !theta.is_finite() || theta < 0.0 {
        return Err(RailError::InvalidParameter(format!("separation {theta}")));
    }
    let k_total = cfg.total_classes();
    let d = cfg.dim;
    if theta > std::f64::consts::PI
        || (theta > FRAC_PI_2 && k_total > d + 1)
        || (theta == FRAC_PI_2 && k_total > 2 * d)
    {
        return Err(RailError::InfeasibleSeparation(theta));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = class_means(cfg, &mut rng)?;
    let text_offset = (cfg.text_alignment < 1.0).then(|| unit(gaussian(&mut rng, d)));

    let mut domains = Vec::with_capacity(cfg.n_domains);
    for k in 0..cfg.n_domains {
        let name = domain_name(k);
        let class_names: Vec<String> = (0..cfg.classes_per_domain)
            .map(|c| format!("{name}/class{c:02}"))
            .collect();
        let first = k * cfg.classes_per_domain;
        let domain_means = means.rows(first, cfg.classes_per_domain).into_owned();

        let train = sample_split(cfg, &mut rng, &name, &class_names, &domain_means, cfg.samples_per_class, Role::Train)?;
        let test = sample_split(cfg, &mut rng, &name, &class_names, &domain_means, cfg.test_samples_per_class, Role::Test)?;

        let mut vectors = domain_means.clone();
        for mut row in vectors.row_iter_mut() {
            if cfg.text_noise > 0.0 {
                let z = gaussian(&mut rng, d);
                row += z.transpose() * (cfg.text_noise / (d as f64).sqrt());
                row /= row.norm();
            }
            if let Some(g) = &text_offset {
                let a = cfg.text_alignment;
                row *= a;
                row += g.transpose() * (1.0 - a * a).sqrt();
                row /= row.norm();
            }
        }
        domains.push(SyntheticDomain {
            train,
            test,
            texts: DomainTexts {
                domain_name: name,
                class_names,
                vectors,
                prompt_template: DEFAULT_PROMPT.to_string(),
            },
        });
    }
    Ok(SyntheticSuite {
        domains,
        class_means: means,
    })
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn unit(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Random directions, orthonormalized against each other while the
/// dimension allows it.
fn directions(rng: &mut ChaCha8Rng, count: usize, d: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = gaussian(rng, d);
        if out.len() < d {
            for u in &out {
                let p = u.dot(&v);
                v.axpy(-p, u, 1.0);
            }
        }
        if v.norm() > 1e-8 {
            out.push(unit(v));
        }
    }
    out
}

fn class_means(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Matrix> {
    let d = cfg.dim;
    let k_total = cfg.total_classes();
    let theta = cfg.separation;
    let shared_base = theta < FRAC_PI_2;
    let needed = if shared_base { 1 + cfg.n_domains + k_total } else { k_total };
    let exact = needed <= d;

    let dirs = directions(rng, needed, d);
    let (bases, class_dirs) = if shared_base {
        let g = &dirs[0];
        let rho = cfg.domain_correlation;
        let bases: Vec<DVector<f64>> = (0..cfg.n_domains)
            .map(|k| unit(g * rho.sqrt() + &dirs[1 + k] * (1.0 - rho).sqrt()))
            .collect();
        (bases, dirs[1 + cfg.n_domains..].to_vec())
    } else {
        (vec![DVector::zeros(d); cfg.n_domains], dirs)
    };
    // cos(theta) = 1 / (1 + s^2) for two classes sharing a base
    let base_spread = if shared_base {
        ((1.0 - theta.cos()) / theta.cos()).sqrt()
    } else {
        1.0
    };

    let min_cos = theta.cos() + 1e-12;
    let mut means = Matrix::zeros(k_total, d);
    for k in 0..cfg.n_domains {
        for c in 0..cfg.classes_per_domain {
            let idx = k * cfg.classes_per_domain + c;
            let mut dir = class_dirs[idx].clone();
            let mut spread = base_spread;
            let mut tries = 0;
            loop {
                let mu = unit(&bases[k] + &dir * spread);
                let ok = exact
                    || theta == 0.0
                    || (0..idx).all(|prev| means.row(prev).transpose().dot(&mu) <= min_cos);
                if ok {
                    means.row_mut(idx).copy_from(&mu.transpose());
                    break;
                }
                tries += 1;
                if tries > MAX_REJECTIONS {
                    return Err(RailError::InfeasibleSeparation(theta));
                }
                // widen the class cap around the domain base when it is too crowded
                if shared_base && tries % 200 == 0 {
                    spread *= 1.1;
                }
                dir = unit(gaussian(rng, d));
            }
        }
    }
    Ok(means)
}

fn sample_split(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    name: &str,
    class_names: &[String],
    means: &Matrix,
    per_class: usize,
    role: Role,
) -> Result<EmbeddingDataset> {
    let d = cfg.dim;
    let n = per_class * class_names.len();
    let mut x = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    let scale = cfg.noise / (d as f64).sqrt();
    for c in 0..class_names.len() {
        for _ in 0..per_class {
            let row = labels.len();
            let z = gaussian(rng, d);
            let v = unit(means.row(c).transpose() + z * scale);
            x.row_mut(row).copy_from(&v.transpose());
            labels.push(c);
        }
    }
    let mut ds = EmbeddingDataset::new(name, x, labels, class_names.to_vec(), role)?;
    ds.normalized = true;
    Ok(ds)
}
