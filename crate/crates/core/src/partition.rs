use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-overlapping assignment of graph nodes to communities `0..n_c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Labels must be dense: every id below the maximum is used.
    pub fn new(assignment: Vec<usize>) -> Result<Partition> {
        let count = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut used = vec![false; count];
        for &c in &assignment {
            used[c] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::Config(format!("community {missing} has no members")));
        }
        Ok(Partition { assignment, count })
    }

    /// Relabels arbitrary labels so communities are numbered by their lowest
    /// member.
    pub fn from_labels<T: PartialEq + Clone>(labels: &[T]) -> Partition {
        let mut seen: Vec<T> = Vec::new();
        let assignment = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i,
                None => {
                    seen.push(l.clone());
                    seen.len() - 1
                }
            })
            .collect();
        Partition {
            assignment,
            count: seen.len(),
        }
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.count];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    pub fn check_covers(&self, nodes: usize) -> Result<()> {
        if self.assignment.len() < nodes {
            return Err(Error::PartitionMissingNode(self.assignment.len()));
        }
        if self.assignment.len() != nodes {
            return Err(Error::PartitionSize {
                expected: nodes,
                got: self.assignment.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Partition> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Vec<usize> {
        p.assignment
    }
}
