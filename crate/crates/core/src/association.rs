//! Minimum-path-loss cell association with a per-cell capacity of `G`
//! spreading sequences.

use crate::propagation::LinkTable;

/// Serving-cell map. Station indices are 0-based internally; the external
/// convention (snapshot files) is 1-based with 0 meaning "denied".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    serving: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn serving(&self, mobile: usize) -> Option<usize> {
        self.serving[mobile]
    }

    pub fn serving_stations(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.serving.iter().copied()
    }

    /// `g(j)`: 1-based serving index, 0 if denied.
    pub fn serving_index(&self, mobile: usize) -> usize {
        self.serving[mobile].map_or(0, |i| i + 1)
    }

    /// Served mobiles of a station, ascending by mobile index.
    pub fn members(&self, bs: usize) -> &[usize] {
        &self.members[bs]
    }

    pub fn cell_load(&self, bs: usize) -> usize {
        self.members[bs].len()
    }

    pub fn num_base_stations(&self) -> usize {
        self.members.len()
    }

    pub fn num_mobiles(&self) -> usize {
        self.serving.len()
    }

    pub fn num_denied(&self) -> usize {
        self.serving.iter().filter(|s| s.is_none()).count()
    }
}

/// Associates each mobile with its highest-gain station, then trims each
/// overloaded cell to its `spreading_factor` strongest mobiles.
///
/// Ties in gain go to the lower station index. When trimming, ties go to the
/// lower mobile index. Trimmed mobiles are denied outright.
pub fn associate(links: &LinkTable, spreading_factor: usize) -> Assignment {
    let m = links.num_base_stations();
    let k = links.num_mobiles();
    let mut preferred: Vec<Vec<usize>> = vec![Vec::new(); m];

    for j in 0..k {
        let mut best = 0;
        for i in 1..m {
            if links.gain(i, j) > links.gain(best, j) {
                best = i;
            }
        }
        if m > 0 {
            preferred[best].push(j);
        }
    }

    let mut serving = vec![None; k];
    let members = preferred
        .into_iter()
        .enumerate()
        .map(|(i, mut cell)| {
            if cell.len() > spreading_factor {
                cell.sort_by(|&a, &b| {
                    links
                        .gain(i, b)
                        .total_cmp(&links.gain(i, a))
                        .then(a.cmp(&b))
                });
                cell.truncate(spreading_factor);
                cell.sort_unstable();
            }
            for &j in &cell {
                serving[j] = Some(i);
            }
            cell
        })
        .collect();

    Assignment { serving, members }
}
