//! Rank acceptability and pairwise winning indices under a mass
//! distribution over `Ω`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MassDistribution, OmegaSample, PerformanceMatrix, WeightVector};

/// Utilities closer than this are ties.
pub const TIE_TOL: f64 = 1e-12;

/// `b[r][a]`: mass of the models ranking alternative `a` at position `r + 1`.
/// Stored rank-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaiMatrix {
    m: usize,
    values: Vec<f64>,
}

impl RaiMatrix {
    pub fn zeros(m: usize) -> Self {
        Self { m, values: vec![0.0; m * m] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("RAI matrix must be square".into()));
        }
        Ok(Self { m, values: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Entry for zero-based rank `r` and alternative `a`.
    pub fn get(&self, r: usize, a: usize) -> f64 {
        self.values[r * self.m + a]
    }

    pub fn rank_row(&self, r: usize) -> &[f64] {
        &self.values[r * self.m..(r + 1) * self.m]
    }

    /// The first `s` rank rows.
    pub fn top_ranks(&self, s: usize) -> &[f64] {
        &self.values[..s * self.m]
    }

    pub fn write_csv<W: Write>(&self, writer: W, labels: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["rank".to_string()];
        header.extend(labels.iter().cloned());
        wtr.write_record(&header)?;
        for r in 0..self.m {
            let mut row = vec![(r + 1).to_string()];
            row.extend(self.rank_row(r).iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `p[a][b]`: mass of the models preferring `a` to `b`. The diagonal is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwiMatrix {
    m: usize,
    values: Vec<f64>,
}

impl PwiMatrix {
    pub fn zeros(m: usize) -> Self {
        Self { m, values: vec![0.0; m * m] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("PWI matrix must be square".into()));
        }
        Ok(Self { m, values: rows.concat() })
    }

    /// Binary matrix of a total order given best-first.
    pub fn from_ranking(order: &[usize]) -> Self {
        let m = order.len();
        let mut p = Self::zeros(m);
        for (i, &a) in order.iter().enumerate() {
            for &b in &order[i + 1..] {
                p.set(a, b, 1.0);
            }
        }
        p
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.m + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.values[a * self.m + b] = v;
    }

    pub fn write_csv<W: Write>(&self, writer: W, labels: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["from\\to".to_string()];
        header.extend(labels.iter().cloned());
        wtr.write_record(&header)?;
        for a in 0..self.m {
            let mut row = vec![labels[a].clone()];
            row.extend((0..self.m).map(|b| if a == b { String::new() } else { self.get(a, b).to_string() }));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn ranks_from_utilities(u: &[f64]) -> Vec<usize> {
    // Rank = 1 + strictly better alternatives; exact ties go to the lower index.
    (0..u.len())
        .map(|a| {
            1 + (0..u.len())
                .filter(|&x| x != a && (u[x] - u[a] > TIE_TOL || ((u[x] - u[a]).abs() <= TIE_TOL && x < a)))
                .count()
        })
        .collect()
}

/// Rank of `a` under `w`: 1 plus the number of alternatives with strictly
/// higher utility, ties broken by alternative index.
pub fn rank_of(a: usize, w: &WeightVector, perf: &PerformanceMatrix) -> usize {
    ranks_from_utilities(&perf.utilities(w))[a]
}

/// Rank of `a` counting strict exceedances only, so tied alternatives share a rank.
pub fn raw_rank_of(a: usize, w: &WeightVector, perf: &PerformanceMatrix) -> usize {
    let u = perf.utilities(w);
    1 + (0..u.len()).filter(|&x| x != a && u[x] - u[a] > TIE_TOL).count()
}

fn check(omega: &OmegaSample, p: &MassDistribution, perf: &PerformanceMatrix) -> Result<()> {
    if omega.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: omega.len(), actual: p.len() });
    }
    if omega.dim() != perf.num_criteria() {
        return Err(Error::DimensionMismatch { expected: perf.num_criteria(), actual: omega.dim() });
    }
    Ok(())
}

pub fn rai(omega: &OmegaSample, p: &MassDistribution, perf: &PerformanceMatrix) -> Result<RaiMatrix> {
    check(omega, p, perf)?;
    let m = perf.num_alternatives();
    let mut out = RaiMatrix::zeros(m);
    for (w, &mass) in omega.functions().iter().zip(p.as_slice()) {
        if mass == 0.0 {
            continue;
        }
        for (a, r) in ranks_from_utilities(&perf.utilities(w)).into_iter().enumerate() {
            out.values[(r - 1) * m + a] += mass;
        }
    }
    Ok(out)
}

pub fn pwi(omega: &OmegaSample, p: &MassDistribution, perf: &PerformanceMatrix) -> Result<PwiMatrix> {
    check(omega, p, perf)?;
    let m = perf.num_alternatives();
    let mut out = PwiMatrix::zeros(m);
    for (w, &mass) in omega.functions().iter().zip(p.as_slice()) {
        if mass == 0.0 {
            continue;
        }
        let u = perf.utilities(w);
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let diff = u[a] - u[b];
                if diff > TIE_TOL {
                    out.values[a * m + b] += mass;
                } else if diff.abs() <= TIE_TOL {
                    out.values[a * m + b] += 0.5 * mass;
                }
            }
        }
    }
    Ok(out)
}

/// True iff the off-diagonal entries are binary, every pair is decided
/// exactly one way, and the relation is transitive.
pub fn is_total_order(p: &PwiMatrix) -> bool {
    let m = p.size();
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let v = p.get(a, b);
            if v != 0.0 && v != 1.0 {
                return false;
            }
            if v + p.get(b, a) != 1.0 {
                return false;
            }
            for c in 0..m {
                if c != a && c != b && v == 1.0 && p.get(b, c) == 1.0 && p.get(a, c) != 1.0 {
                    return false;
                }
            }
        }
    }
    true
}
