use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Coarse,
    Fine,
}

/// Disjoint, complete cover of `0..n_points` by non-empty groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpointPartition {
    groups: Vec<Vec<usize>>,
    stage: Stage,
    noise_group_ids: Vec<usize>,
    n_points: usize,
}

impl SuperpointPartition {
    pub fn new(groups: Vec<Vec<usize>>, stage: Stage, noise_group_ids: Vec<usize>, n_points: usize) -> Result<Self> {
        let p = Self {
            groups,
            stage,
            noise_group_ids,
            n_points,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n_points];
        for (g, members) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidData(format!("superpoint {g} is empty")));
            }
            for &i in members {
                if i >= self.n_points {
                    return Err(Error::InvalidData(format!(
                        "superpoint {g} holds out-of-range point {i}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidData(format!("point {i} belongs to two superpoints")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidData(format!("point {i} is not covered")));
        }
        if let Some(&g) = self.noise_group_ids.iter().find(|&&g| g >= self.groups.len()) {
            return Err(Error::InvalidData(format!("noise group id {g} out of range")));
        }
        Ok(())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn noise_group_ids(&self) -> &[usize] {
        &self.noise_group_ids
    }

    pub fn is_noise_group(&self, g: usize) -> bool {
        self.noise_group_ids.contains(&g)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Group id of every point.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_points];
        for (g, members) in self.groups.iter().enumerate() {
            for &i in members {
                out[i] = g;
            }
        }
        out
    }

    /// True when every group of `self` lies inside a single group of `coarser`.
    pub fn refines(&self, coarser: &SuperpointPartition) -> bool {
        let parent = coarser.assignment();
        self.groups.iter().all(|g| g.iter().all(|&i| parent[i] == parent[g[0]]))
    }
}
