use serde::{Deserialize, Serialize};

use super::{Group, PartitionError, Partitioning};
use crate::relation::Relation;

/// On-disk form of a [`Partitioning`]. `omega` is `null` when there is no
/// radius condition; `gids` has one entry per tuple id, `null` for tuples
/// outside the partitioned domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitioningFile {
    pub attrs: Vec<String>,
    pub tau: usize,
    pub omega: Option<f64>,
    pub gids: Vec<Option<usize>>,
    pub representatives: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub sizes: Vec<usize>,
    pub degenerate: Vec<usize>,
}

impl From<&Partitioning> for PartitioningFile {
    fn from(p: &Partitioning) -> Self {
        PartitioningFile {
            attrs: p.attrs.clone(),
            tau: p.tau,
            omega: p.omega.is_finite().then_some(p.omega),
            gids: p.gid.clone(),
            representatives: p.groups.iter().map(|g| g.representative.clone()).collect(),
            radii: p.groups.iter().map(|g| g.radius).collect(),
            sizes: p.sizes(),
            degenerate: p.degenerate_groups(),
        }
    }
}

impl PartitioningFile {
    /// Rebuilds group membership from `gids` and checks it against `rel`.
    pub fn into_partitioning(self, rel: &Relation) -> Result<Partitioning, PartitionError> {
        let m = self.representatives.len();
        if self.radii.len() != m || self.sizes.len() != m {
            return Err(PartitionError::Mismatch(format!(
                "{m} representatives, {} radii, {} sizes",
                self.radii.len(),
                self.sizes.len()
            )));
        }
        let mut members = vec![Vec::new(); m];
        for (id, g) in self.gids.iter().enumerate() {
            if let Some(g) = *g {
                members
                    .get_mut(g)
                    .ok_or_else(|| PartitionError::Mismatch(format!("tuple {id} has gid {g} but there are {m} groups")))?
                    .push(id);
            }
        }
        for (g, ids) in members.iter().enumerate() {
            if ids.len() != self.sizes[g] {
                return Err(PartitionError::Mismatch(format!(
                    "group {g} has {} members but size {}",
                    ids.len(),
                    self.sizes[g]
                )));
            }
        }
        let groups = members
            .into_iter()
            .zip(self.representatives)
            .zip(self.radii)
            .enumerate()
            .map(|(g, ((members, representative), radius))| Group {
                members,
                representative,
                radius,
                degenerate: self.degenerate.contains(&g),
            })
            .collect();
        let p = Partitioning {
            attrs: self.attrs,
            tau: self.tau,
            omega: self.omega.unwrap_or(f64::INFINITY),
            gid: self.gids,
            groups,
        };
        p.check(rel)?;
        Ok(p)
    }
}
