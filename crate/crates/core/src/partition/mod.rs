//! Offline quad-tree partitioning with a size threshold `tau` and a radius
//! limit `omega`, and the radius limit implied by an approximation target.

mod file;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::RelationError;
use crate::paql::Sense;
use crate::relation::{AttrKind, Relation};

pub use file::PartitioningFile;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("partitioning needs at least one attribute")]
    NoAttributes,
    #[error("unknown partitioning attribute `{0}`")]
    UnknownAttribute(String),
    #[error("partitioning attribute `{0}` is categorical")]
    CategoricalAttribute(String),
    #[error("size threshold must be at least 1")]
    InvalidTau,
    #[error("radius limit must be non-negative, got {0}")]
    InvalidOmega(f64),
    #[error("epsilon {epsilon} is out of range for {sense:?} (maximize: 0 <= epsilon < 1, minimize: epsilon >= 0)")]
    EpsilonOutOfRange { epsilon: f64, sense: Sense },
    #[error("keep fraction must be in (0, 1], got {0}")]
    InvalidKeepFraction(f64),
    #[error("partitioning does not match relation: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionParams {
    pub attrs: Vec<String>,
    pub tau: usize,
    /// `f64::INFINITY` disables the radius condition.
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    /// Tuple ids, ascending.
    pub members: Vec<usize>,
    /// Centroid over the partitioning attributes.
    pub representative: Vec<f64>,
    /// Largest absolute deviation of a member from the representative over
    /// any partitioning attribute.
    pub radius: f64,
    /// The group could not be split because all members coincide.
    pub degenerate: bool,
}

impl Group {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    pub attrs: Vec<String>,
    pub tau: usize,
    pub omega: f64,
    /// Group index of each tuple id of the relation; `None` for tuples
    /// outside the partitioned domain.
    pub gid: Vec<Option<usize>>,
    pub groups: Vec<Group>,
}

impl Partitioning {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Group::size).collect()
    }

    pub fn degenerate_groups(&self) -> Vec<usize> {
        (0..self.groups.len()).filter(|&g| self.groups[g].degenerate).collect()
    }

    /// Ids of all partitioned tuples, ascending.
    pub fn covered_ids(&self) -> Vec<usize> {
        (0..self.gid.len()).filter(|&i| self.gid[i].is_some()).collect()
    }

    /// Checks that groups and `gid` describe the same disjoint cover and
    /// that the partitioning fits `rel`.
    pub fn check(&self, rel: &Relation) -> Result<(), PartitionError> {
        let bad = |m: String| Err(PartitionError::Mismatch(m));
        if self.gid.len() != rel.len() {
            return bad(format!("{} gids for {} tuples", self.gid.len(), rel.len()));
        }
        attr_columns(rel, &self.attrs)?;
        let mut seen = vec![false; rel.len()];
        for (g, group) in self.groups.iter().enumerate() {
            if group.members.is_empty() {
                return bad(format!("group {g} is empty"));
            }
            if group.representative.len() != self.attrs.len() {
                return bad(format!("group {g} representative has wrong arity"));
            }
            for &id in &group.members {
                if id >= rel.len() || seen[id] || self.gid[id] != Some(g) {
                    return bad(format!("tuple {id} is not assigned consistently to group {g}"));
                }
                seen[id] = true;
            }
        }
        if let Some(id) = (0..rel.len()).find(|&i| self.gid[i].is_some() && !seen[i]) {
            return bad(format!("tuple {id} has a gid but is in no group"));
        }
        Ok(())
    }

    /// Keeps only the tuples in `keep` (ascending ids), recomputing
    /// representatives and radii, dropping empty groups and compacting
    /// group indices. Degenerate flags carry over.
    pub fn restrict(&self, rel: &Relation, keep: &[usize]) -> Result<Partitioning, PartitionError> {
        let cols = attr_columns(rel, &self.attrs)?;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.groups.len()];
        for &id in keep {
            if let Some(Some(g)) = self.gid.get(id) {
                members[*g].push(id);
            }
        }
        let mut gid = vec![None; self.gid.len()];
        let mut groups = Vec::new();
        for (g, ids) in members.into_iter().enumerate() {
            if ids.is_empty() {
                continue;
            }
            for &id in &ids {
                gid[id] = Some(groups.len());
            }
            let representative = centroid(&cols, &ids);
            let radius = radius(&cols, &ids, &representative);
            groups.push(Group {
                members: ids,
                representative,
                radius,
                degenerate: self.groups[g].degenerate,
            });
        }
        Ok(Partitioning {
            attrs: self.attrs.clone(),
            tau: self.tau,
            omega: self.omega,
            gid,
            groups,
        })
    }

    /// The covered tuples as a new relation (ids renumbered in ascending
    /// order) with the matching partitioning.
    pub fn compact(&self, rel: &Relation) -> (Relation, Partitioning) {
        let ids = self.covered_ids();
        let mut new_id = vec![usize::MAX; self.gid.len()];
        for (k, &id) in ids.iter().enumerate() {
            new_id[id] = k;
        }
        let groups = self
            .groups
            .iter()
            .map(|g| Group {
                members: g.members.iter().map(|&id| new_id[id]).collect(),
                ..g.clone()
            })
            .collect();
        let part = Partitioning {
            attrs: self.attrs.clone(),
            tau: self.tau,
            omega: self.omega,
            gid: ids.iter().map(|&id| self.gid[id]).collect(),
            groups,
        };
        (rel.select_rows(&ids), part)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), crate::Error> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&PartitioningFile::from(self))?;
        std::fs::write(path, text).map_err(|source| crate::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>, rel: &Relation) -> Result<Partitioning, crate::Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| crate::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: PartitioningFile = serde_json::from_str(&text)?;
        Ok(file.into_partitioning(rel)?)
    }
}

pub(crate) fn attr_columns<'a>(rel: &'a Relation, attrs: &[String]) -> Result<Vec<&'a [f64]>, PartitionError> {
    if attrs.is_empty() {
        return Err(PartitionError::NoAttributes);
    }
    attrs
        .iter()
        .map(|a| {
            let i = rel
                .schema()
                .index_of(a)
                .ok_or_else(|| PartitionError::UnknownAttribute(a.clone()))?;
            match rel.schema().attributes()[i].kind {
                AttrKind::Numeric => Ok(rel.numeric(i).expect("numeric column")),
                AttrKind::Categorical => Err(PartitionError::CategoricalAttribute(a.clone())),
            }
        })
        .collect()
}

/// Per-attribute mean of `ids`, clamped to the members' range so that
/// identical values give their exact value.
pub(crate) fn centroid(cols: &[&[f64]], ids: &[usize]) -> Vec<f64> {
    cols.iter()
        .map(|col| {
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for &id in ids {
                let v = col[id];
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            (sum / ids.len() as f64).clamp(lo, hi)
        })
        .collect()
}

pub(crate) fn radius(cols: &[&[f64]], ids: &[usize], center: &[f64]) -> f64 {
    let mut r: f64 = 0.0;
    for (col, &c) in cols.iter().zip(center) {
        for &id in ids {
            r = r.max((col[id] - c).abs());
        }
    }
    r
}

/// Recursive quad-tree splitting of `ids` over the feature columns `cols`.
/// Groups come out in depth-first order, low quadrants first; members of
/// each group keep the order of `ids`.
pub(crate) fn quad_tree(cols: &[&[f64]], ids: Vec<usize>, tau: usize, omega: f64) -> Vec<Group> {
    let mut out = Vec::new();
    if ids.is_empty() {
        return out;
    }
    let mut stack = vec![ids];
    while let Some(ids) = stack.pop() {
        let center = centroid(cols, &ids);
        let r = radius(cols, &ids, &center);
        if ids.len() <= tau && r <= omega {
            out.push(Group {
                members: ids,
                representative: center,
                radius: r,
                degenerate: false,
            });
            continue;
        }
        let mut buckets: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for &id in &ids {
            let key = cols.iter().zip(&center).map(|(col, &c)| col[id] >= c).collect();
            buckets.entry(key).or_default().push(id);
        }
        if buckets.len() == 1 {
            out.push(Group {
                members: ids,
                representative: center,
                radius: r,
                degenerate: true,
            });
            continue;
        }
        stack.extend(buckets.into_values().rev());
    }
    out
}

fn check_params(params: &PartitionParams) -> Result<(), PartitionError> {
    if params.tau < 1 {
        return Err(PartitionError::InvalidTau);
    }
    if params.omega.is_nan() || params.omega < 0.0 {
        return Err(PartitionError::InvalidOmega(params.omega));
    }
    Ok(())
}

/// Partitions every tuple of `rel`.
pub fn partition(rel: &Relation, params: &PartitionParams) -> Result<Partitioning, PartitionError> {
    partition_ids(rel, &(0..rel.len()).collect::<Vec<_>>(), params)
}

/// Partitions the tuples `ids` of `rel`; other tuples get no group.
pub fn partition_ids(rel: &Relation, ids: &[usize], params: &PartitionParams) -> Result<Partitioning, PartitionError> {
    check_params(params)?;
    let cols = attr_columns(rel, &params.attrs)?;
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut groups = quad_tree(&cols, sorted, params.tau, params.omega);
    let mut gid = vec![None; rel.len()];
    for (g, group) in groups.iter_mut().enumerate() {
        group.members.sort_unstable();
        for &id in &group.members {
            gid[id] = Some(g);
        }
    }
    Ok(Partitioning {
        attrs: params.attrs.clone(),
        tau: params.tau,
        omega: params.omega,
        gid,
        groups,
    })
}

fn gamma(epsilon: f64, sense: Sense) -> Result<f64, PartitionError> {
    let ok = match sense {
        Sense::Maximize => (0.0..1.0).contains(&epsilon),
        Sense::Minimize => epsilon >= 0.0 && epsilon.is_finite(),
    };
    if !ok {
        return Err(PartitionError::EpsilonOutOfRange { epsilon, sense });
    }
    Ok(match sense {
        Sense::Maximize => epsilon,
        Sense::Minimize => epsilon / (1.0 + epsilon),
    })
}

/// `ω = min_j min_attr γ·|t̃_j.attr|` with `γ = ε` when maximizing and
/// `γ = ε/(1+ε)` when minimizing. No representatives give `+∞`.
pub fn radius_limit_from_epsilon(representatives: &[Vec<f64>], epsilon: f64, sense: Sense) -> Result<f64, PartitionError> {
    let g = gamma(epsilon, sense)?;
    Ok(representatives
        .iter()
        .flatten()
        .map(|v| g * v.abs())
        .fold(f64::INFINITY, f64::min))
}

/// A partitioning whose radius limit satisfies the epsilon formula for its
/// own representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonPartitioning {
    pub partitioning: Partitioning,
    /// Partition passes run after the initial radius-free pass.
    pub iterations: usize,
    /// Whether the limit fell back to the data-wide bound.
    pub fallback: bool,
}

const OMEGA_ITERATIONS: usize = 3;

/// Searches for `ω` such that the partitioning built with `ω` satisfies
/// `ω ≤ γ·|t̃_j.attr|` for all of its own representatives. Starts from a
/// radius-free partitioning and re-partitions up to three times with the
/// limit implied by the previous representatives; if the formula still
/// fails, falls back to
/// `γ·min|t.attr|` over the data (valid when each attribute keeps one sign;
/// `0` otherwise).
pub fn partition_for_epsilon(
    rel: &Relation,
    ids: &[usize],
    attrs: &[String],
    tau: usize,
    epsilon: f64,
    sense: Sense,
) -> Result<EpsilonPartitioning, PartitionError> {
    let g = gamma(epsilon, sense)?;
    let reps = |p: &Partitioning| -> Vec<Vec<f64>> { p.groups.iter().map(|g| g.representative.clone()).collect() };
    let params = |omega| PartitionParams {
        attrs: attrs.to_vec(),
        tau,
        omega,
    };
    let mut p = partition_ids(rel, ids, &params(f64::INFINITY))?;
    let mut omega = radius_limit_from_epsilon(&reps(&p), epsilon, sense)?;
    for it in 1..=OMEGA_ITERATIONS {
        p = partition_ids(rel, ids, &params(omega))?;
        let implied = radius_limit_from_epsilon(&reps(&p), epsilon, sense)?;
        if implied >= omega {
            return Ok(EpsilonPartitioning {
                partitioning: p,
                iterations: it,
                fallback: false,
            });
        }
        omega = implied;
    }
    let cols = attr_columns(rel, attrs)?;
    let mut fallback = f64::INFINITY;
    for col in &cols {
        let (mut lo, mut hi, mut min_abs) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
        for &id in ids {
            lo = lo.min(col[id]);
            hi = hi.max(col[id]);
            min_abs = min_abs.min(col[id].abs());
        }
        let single_sign = lo >= 0.0 || hi <= 0.0;
        fallback = fallback.min(if single_sign { g * min_abs } else { 0.0 });
    }
    let p = partition_ids(rel, ids, &params(fallback.min(omega)))?;
    Ok(EpsilonPartitioning {
        partitioning: p,
        iterations: OMEGA_ITERATIONS + 1,
        fallback: true,
    })
}

/// Whether every member `t` of every group satisfies
/// `t ≥ (1−ε)·t̃` and `t̃ ≥ (1−ε)·t` (maximize) or
/// `t ≤ (1+ε)·t̃` and `t̃ ≤ (1+ε)·t` (minimize) on every attribute.
pub fn group_closeness_holds(rel: &Relation, p: &Partitioning, epsilon: f64, sense: Sense) -> Result<bool, PartitionError> {
    let cols = attr_columns(rel, &p.attrs)?;
    let close = |t: f64, r: f64| match sense {
        Sense::Maximize => t >= (1.0 - epsilon) * r && r >= (1.0 - epsilon) * t,
        Sense::Minimize => t <= (1.0 + epsilon) * r && r <= (1.0 + epsilon) * t,
    };
    Ok(p.groups.iter().all(|g| {
        cols.iter()
            .zip(&g.representative)
            .all(|(col, &r)| g.members.iter().all(|&id| close(col[id], r)))
    }))
}

/// Uniformly keeps `round(keep_fraction · covered)` partitioned tuples,
/// chosen by a seeded shuffle, and recomputes the groups.
pub fn shrink_for_scaling(rel: &Relation, p: &Partitioning, keep_fraction: f64, seed: u64) -> Result<Partitioning, PartitionError> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(PartitionError::InvalidKeepFraction(keep_fraction));
    }
    let mut ids = p.covered_ids();
    let keep = ((keep_fraction * ids.len() as f64).round() as usize).min(ids.len());
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids.truncate(keep);
    ids.sort_unstable();
    p.restrict(rel, &ids)
}
