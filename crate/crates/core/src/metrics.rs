//! Distances between index matrices, the share of correctly compared
//! pairs, and two-sample Kolmogorov-Smirnov tests.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{PwiMatrix, RaiMatrix};
use crate::model::Pair;

pub const DEFAULT_ALPHA: f64 = 0.05;
/// Smallest reported p-value.
pub const P_VALUE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub method: String,
    pub run_id: u64,
    /// Absent for methods without rank acceptability indices.
    pub rai_distance: Option<f64>,
    pub pwi_distance: f64,
    pub correct_pct: f64,
}

/// `Σ_{r ≤ s} Σ_a |b1^r(a) - b2^r(a)| / s`.
pub fn rai_distance(r1: &RaiMatrix, r2: &RaiMatrix, s: usize) -> Result<f64> {
    if r1.size() != r2.size() {
        return Err(Error::DimensionMismatch { expected: r1.size(), actual: r2.size() });
    }
    if s == 0 || s > r1.size() {
        return Err(Error::InvalidArgument(format!("s must be in 1..={}, got {s}", r1.size())));
    }
    let sum: f64 = r1.top_ranks(s).iter().zip(r2.top_ranks(s)).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / s as f64)
}

/// Mean absolute off-diagonal difference.
pub fn pwi_distance(p1: &PwiMatrix, p2: &PwiMatrix) -> Result<f64> {
    let m = p1.size();
    if m != p2.size() {
        return Err(Error::DimensionMismatch { expected: m, actual: p2.size() });
    }
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two alternatives".into()));
    }
    let mut sum = 0.0;
    for a in 0..m {
        for b in 0..m {
            if a != b {
                sum += (p1.get(a, b) - p2.get(a, b)).abs();
            }
        }
    }
    Ok(sum / (m * (m - 1)) as f64)
}

/// Share of the pairs outside `excluded` on which the method leans the same
/// way as the DM (a coin flip on either side counts as agreement).
pub fn correct_percentage(dm: &PwiMatrix, method: &PwiMatrix, excluded: &[Pair]) -> Result<f64> {
    let m = dm.size();
    if m != method.size() {
        return Err(Error::DimensionMismatch { expected: m, actual: method.size() });
    }
    let skip: HashSet<Pair> = excluded.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut total = 0usize;
    let mut good = 0usize;
    for a in 0..m {
        for b in a + 1..m {
            if skip.contains(&(a, b)) {
                continue;
            }
            total += 1;
            if (dm.get(a, b) - 0.5) * (method.get(a, b) - 0.5) >= 0.0 {
                good += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument("no pairs left outside the excluded set".into()));
    }
    Ok(good as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsVariant {
    Equal,
    /// The first sample's empirical CDF lies above the second's, i.e. the
    /// first is concentrated on smaller values.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub h: u8,
    pub variant: KsVariant,
}

impl KsResult {
    /// `h/p` cell text, e.g. `1/2.96e-23`.
    pub fn cell(&self) -> String {
        format!("{}/{:.2e}", self.h, self.p_value)
    }
}

fn sorted(s: &[f64]) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    if s.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("sample contains NaN".into()));
    }
    let mut v = s.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `(sup (F1 - F2), sup (F2 - F1))` over right-continuous empirical CDFs.
fn cdf_gaps(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut up, mut down) = (0.0f64, 0.0f64);
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        let diff = i as f64 / n1 - j as f64 / n2;
        up = up.max(diff);
        down = down.max(-diff);
    }
    (up, down)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form; converges fast for small arguments.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (-j * j * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn decide(statistic: f64, p: f64, alpha: f64, variant: KsVariant) -> KsResult {
    let p_value = p.max(P_VALUE_FLOOR).min(1.0);
    KsResult { statistic, p_value, h: u8::from(p_value < alpha), variant }
}

/// Two-sided test of equal distributions, asymptotic p-value.
pub fn ks_equal(s1: &[f64], s2: &[f64], alpha: f64) -> Result<KsResult> {
    let (x, y) = (sorted(s1)?, sorted(s2)?);
    let (up, down) = cdf_gaps(&x, &y);
    let d = up.max(down);
    let en = (x.len() * y.len()) as f64 / (x.len() + y.len()) as f64;
    Ok(decide(d, kolmogorov_sf(en.sqrt() * d), alpha, KsVariant::Equal))
}

/// One-sided test whose alternative is that `s1` is concentrated on
/// smaller values than `s2` (its CDF lies above).
pub fn ks_greater(s1: &[f64], s2: &[f64], alpha: f64) -> Result<KsResult> {
    let (x, y) = (sorted(s1)?, sorted(s2)?);
    let (up, _) = cdf_gaps(&x, &y);
    let en = (x.len() * y.len()) as f64 / (x.len() + y.len()) as f64;
    Ok(decide(up, (-2.0 * up * up * en).exp(), alpha, KsVariant::Greater))
}

/// Pairwise sequential decisions: the equality test for every pair, then
/// both directed tests where equality is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsTable {
    pub methods: Vec<String>,
    /// `equal[i][j]`, `None` on the diagonal.
    pub equal: Vec<Vec<Option<KsResult>>>,
    /// `greater[i][j]`: method `i` against method `j`; `None` when not run.
    pub greater: Vec<Vec<Option<KsResult>>>,
}

impl KsTable {
    /// Both directed tests reject: the two distributions are not comparable.
    pub fn incomparable(&self, i: usize, j: usize) -> bool {
        matches!((&self.greater[i][j], &self.greater[j][i]), (Some(a), Some(b)) if a.h == 1 && b.h == 1)
    }

    fn write_grid<W: Write>(&self, writer: W, cells: &[Vec<Option<KsResult>>]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["method".to_string()];
        header.extend(self.methods.iter().cloned());
        wtr.write_record(&header)?;
        for (i, name) in self.methods.iter().enumerate() {
            let mut row = vec![name.clone()];
            for (j, c) in cells[i].iter().enumerate() {
                row.push(match c {
                    _ if i == j => String::new(),
                    Some(r) => r.cell(),
                    None => "-".to_string(),
                });
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_equal_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, &self.equal)
    }

    pub fn write_greater_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, &self.greater)
    }
}

pub fn sequential_ks(samples: &[(String, Vec<f64>)], alpha: f64) -> Result<KsTable> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let k = samples.len();
    let mut equal = vec![vec![None; k]; k];
    let mut greater = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let eq = ks_equal(&samples[i].1, &samples[j].1, alpha)?;
            equal[i][j] = Some(eq);
            equal[j][i] = Some(eq);
            if eq.h == 1 {
                greater[i][j] = Some(ks_greater(&samples[i].1, &samples[j].1, alpha)?);
                greater[j][i] = Some(ks_greater(&samples[j].1, &samples[i].1, alpha)?);
            }
        }
    }
    Ok(KsTable { methods: samples.iter().map(|s| s.0.clone()).collect(), equal, greater })
}

/// Reads one column of numbers from a headed CSV.
pub fn read_sample_csv<R: std::io::Read>(reader: R, column: Option<&str>) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let idx = match column {
        None => 0,
        Some(name) => rdr
            .headers()?
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("column `{name}` not found")))?,
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = rec.get(idx).ok_or_else(|| Error::Parse("short row".into()))?.trim();
        if field.is_empty() {
            continue;
        }
        out.push(field.parse::<f64>().map_err(|e| Error::Parse(format!("{field}: {e}")))?);
    }
    Ok(out)
}
