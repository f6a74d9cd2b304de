//! Alternatives, criteria and weighted-sum preference models.
//!
//! Every alternative is a row of gain-type evaluations in `[0, 1]`; a
//! preference model is a point of the weight simplex and the utility of an
//! alternative is the weighted sum of its evaluations.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(w) == 1` for weight vectors.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Tolerance on `sum(p) == 1` for mass distributions.
pub const MASS_SUM_TOL: f64 = 1e-8;
/// Rejection rounds allowed when drawing a non-dominated matrix.
pub const DEFAULT_REJECTION_CAP: usize = 10_000;

/// Evaluations of `m` alternatives on `n` gain-type criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    values: Vec<f64>,
    m: usize,
    n: usize,
    alternatives: Vec<String>,
    criteria: Vec<String>,
}

impl PerformanceMatrix {
    /// Builds a matrix from rows, checking the range and non-dominance
    /// invariants. Labels default to `a1..am` and `g1..gn`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let alternatives = (1..=m).map(|i| format!("a{i}")).collect();
        let criteria = (1..=n).map(|i| format!("g{i}")).collect();
        Self::with_labels(rows, alternatives, criteria)
    }

    pub fn with_labels(
        rows: Vec<Vec<f64>>,
        alternatives: Vec<String>,
        criteria: Vec<String>,
    ) -> Result<Self> {
        let matrix = Self::unchecked(rows, alternatives, criteria)?;
        matrix.validate()?;
        Ok(matrix)
    }

    /// Builds a matrix checking shape and range only. Used for inputs where
    /// dominance is allowed (e.g. user files scored with `indices`).
    pub fn unchecked(
        rows: Vec<Vec<f64>>,
        alternatives: Vec<String>,
        criteria: Vec<String>,
    ) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidMatrix("no alternatives".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidMatrix("no criteria".into()));
        }
        if alternatives.len() != m {
            return Err(Error::DimensionMismatch { expected: m, actual: alternatives.len() });
        }
        if criteria.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: criteria.len() });
        }
        let mut values = Vec::with_capacity(m * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidMatrix(format!("entry {v} outside [0,1]")));
                }
                values.push(v);
            }
        }
        Ok(Self { values, m, n, alternatives, criteria })
    }

    fn validate(&self) -> Result<()> {
        for a in 0..self.m {
            for b in 0..self.m {
                if a != b && (is_dominated(self.row(a), self.row(b)) || self.row(a) == self.row(b)) {
                    return Err(Error::InvalidMatrix(format!(
                        "alternative {} is dominated by {}",
                        self.alternatives[a], self.alternatives[b]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_alternatives(&self) -> usize {
        self.m
    }

    pub fn num_criteria(&self) -> usize {
        self.n
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n)
    }

    pub fn alternative_labels(&self) -> &[String] {
        &self.alternatives
    }

    pub fn criterion_labels(&self) -> &[String] {
        &self.criteria
    }

    /// Utility of alternative `a` under `w`.
    pub fn utility(&self, a: usize, w: &WeightVector) -> f64 {
        dot(self.row(a), w.as_slice())
    }

    /// Utilities of every alternative under `w`.
    pub fn utilities(&self, w: &WeightVector) -> Vec<f64> {
        self.rows().map(|r| dot(r, w.as_slice())).collect()
    }

    /// Returns a copy with rows permuted so that new row `i` is old row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let rows = perm.iter().map(|&i| self.row(i).to_vec()).collect();
        let labels = perm.iter().map(|&i| self.alternatives[i].clone()).collect();
        Self::unchecked(rows, labels, self.criteria.clone()).expect("permutation of a valid matrix")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("alt") {
            return Err(Error::Parse("first header column must be `alt`".into()));
        }
        let criteria: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        let mut alternatives = Vec::new();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            alternatives.push(record.get(0).unwrap_or_default().to_owned());
            let row = record
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::unchecked(rows, alternatives, criteria)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["alt".to_owned()];
        header.extend(self.criteria.iter().cloned());
        wtr.write_record(&header)?;
        for (a, row) in self.rows().enumerate() {
            let mut rec = vec![self.alternatives[a].clone()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// A point of the weight simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(w, WEIGHT_SUM_TOL)
    }

    pub fn with_tolerance(w: Vec<f64>, tol: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        if w.iter().any(|&x| !(x >= -tol)) {
            return Err(Error::InvalidArgument(format!("negative weight in {w:?}")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("weights sum to {s}, not 1")));
        }
        Ok(Self(w))
    }

    /// Wraps a vector that is on the simplex up to sampler round-off.
    /// Tiny negative components are clipped.
    pub(crate) fn from_sampled(mut w: Vec<f64>) -> Self {
        for x in &mut w {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        Self(w)
    }

    /// `(1/n, ..., 1/n)`.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Where the elements of an [`OmegaSample`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// The whole weight simplex.
    Simplex,
    /// The simplex restricted by certain preference statements, with the
    /// slack used to realize strict inequalities.
    Preferences { epsilon: f64 },
    /// Box-constrained neighbourhood of a weight vector.
    Neighbourhood { radius: f64 },
    /// Supplied by the caller.
    External,
}

/// An ordered sample of weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSample {
    functions: Vec<WeightVector>,
    provenance: Provenance,
}

impl OmegaSample {
    pub fn new(functions: Vec<WeightVector>, provenance: Provenance) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(Error::EmptySample);
        };
        let n = first.dim();
        if let Some(w) = functions.iter().find(|w| w.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: w.dim() });
        }
        Ok(Self { functions, provenance })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.functions[0].dim()
    }

    pub fn functions(&self) -> &[WeightVector] {
        &self.functions
    }

    pub fn get(&self, t: usize) -> &WeightVector {
        &self.functions[t]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// A copy with `w` appended as the last element.
    pub fn with_appended(&self, w: WeightVector) -> Result<Self> {
        let mut functions = self.functions.clone();
        functions.push(w);
        Self::new(functions, self.provenance.clone())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("w{i}")).collect();
        wtr.write_record(&header)?;
        for w in &self.functions {
            wtr.write_record(w.as_slice().iter().map(|v| format!("{v}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads one weight vector per row; a header row is required.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_numeric_rows(reader)?;
        let functions = rows
            .into_iter()
            .map(|r| WeightVector::with_tolerance(r, 1e-6))
            .collect::<Result<Vec<_>>>()?;
        Self::new(functions, Provenance::External)
    }
}

/// Reads a headed CSV of numbers, one vector per row.
pub(crate) fn read_numeric_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        rows.push(
            record
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(rows)
}

/// An ordered pair of alternative indices `(a, b)`.
pub type Pair = (usize, usize);

/// Certain and uncertain pairwise statements over reference alternatives.
///
/// Certain statements constrain the model space; uncertain ones constrain
/// the mass distribution over a sample of models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreferenceInfo {
    /// `a ≻ b`.
    #[serde(default)]
    pub certain_strict: Vec<Pair>,
    /// `a ∼ b`.
    #[serde(default)]
    pub certain_indiff: Vec<Pair>,
    /// `(a,b) ≻* (c,d)`: a is preferred to b more strongly than c to d.
    #[serde(default)]
    pub certain_intensity: Vec<(Pair, Pair)>,
    /// `a ≻_Pr b`.
    #[serde(default)]
    pub uncertain_strict: Vec<Pair>,
    /// `a ≿_Pr b` together with `b ≿_Pr a`.
    #[serde(default)]
    pub uncertain_indiff: Vec<Pair>,
    /// `(a,b) ≻*_Pr (c,d)`.
    #[serde(default)]
    pub uncertain_intensity: Vec<(Pair, Pair)>,
}

impl PreferenceInfo {
    pub fn validate(&self, m: usize) -> Result<()> {
        let check = |&(a, b): &Pair| -> Result<()> {
            if a >= m || b >= m {
                return Err(Error::InvalidArgument(format!(
                    "statement ({a},{b}) references a missing alternative (m = {m})"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("statement pairs {a} with itself")));
            }
            Ok(())
        };
        self.certain_strict.iter().try_for_each(check)?;
        self.certain_indiff.iter().try_for_each(check)?;
        self.uncertain_strict.iter().try_for_each(check)?;
        self.uncertain_indiff.iter().try_for_each(check)?;
        for (p, q) in self.certain_intensity.iter().chain(&self.uncertain_intensity) {
            check(p)?;
            check(q)?;
        }
        Ok(())
    }

    pub fn has_certain(&self) -> bool {
        !(self.certain_strict.is_empty()
            && self.certain_indiff.is_empty()
            && self.certain_intensity.is_empty())
    }

    pub fn has_uncertain(&self) -> bool {
        !(self.uncertain_strict.is_empty()
            && self.uncertain_indiff.is_empty()
            && self.uncertain_intensity.is_empty())
    }

    /// Certain statements carrying the same pairs as the uncertain ones.
    /// Used to resolve the most discriminant reference model when only
    /// uncertain comparisons are available.
    pub fn uncertain_as_certain(&self) -> Self {
        Self {
            certain_strict: self.uncertain_strict.clone(),
            certain_indiff: self.uncertain_indiff.clone(),
            certain_intensity: self.uncertain_intensity.clone(),
            ..Self::default()
        }
    }

    /// Weak pairwise relations `a ≿_Pr b` implied by the uncertain
    /// statements; an indifference contributes both directions.
    pub fn uncertain_weak_pairs(&self) -> Vec<Pair> {
        let mut out = self.uncertain_strict.clone();
        for &(a, b) in &self.uncertain_indiff {
            out.push((a, b));
            out.push((b, a));
        }
        out
    }
}

/// Non-negative masses over the elements of an [`OmegaSample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassDistribution(Vec<f64>);

impl MassDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(x) = masses.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative or NaN mass {x}")));
        }
        let s: f64 = masses.iter().sum();
        if (s - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidArgument(format!("masses sum to {s}, not 1")));
        }
        Ok(Self(masses))
    }

    /// Clips round-off negatives and rescales to unit sum.
    pub fn normalized(mut masses: Vec<f64>) -> Result<Self> {
        for x in &mut masses {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s: f64 = masses.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument("masses have no positive total".into()));
        }
        masses.iter_mut().for_each(|x| *x /= s);
        Self::new(masses)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for MassDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MassDistribution> for Vec<f64> {
    fn from(p: MassDistribution) -> Self {
        p.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted-sum utility of a row.
pub fn evaluate(row: &[f64], w: &WeightVector) -> Result<f64> {
    if row.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), actual: row.len() });
    }
    Ok(dot(row, w.as_slice()))
}

/// True iff `b` is at least as good as `a` everywhere and strictly better somewhere.
pub fn is_dominated(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if y < x {
            return false;
        }
        if y > x {
            strict = true;
        }
    }
    strict
}

/// Draws an `m × n` matrix of i.i.d. uniform entries in which no
/// alternative dominates another. Offending rows are redrawn individually.
pub fn random_nondominated_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<PerformanceMatrix> {
    random_nondominated_matrix_capped(m, n, rng, DEFAULT_REJECTION_CAP)
}

pub fn random_nondominated_matrix_capped<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
    cap: usize,
) -> Result<PerformanceMatrix> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("need m >= 2 and n >= 2, got ({m},{n})")));
    }
    let mut rows: Vec<Vec<f64>> =
        (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    for _ in 0..cap {
        let offenders: Vec<usize> = (0..m)
            .filter(|&a| (0..m).any(|b| b != a && (is_dominated(&rows[a], &rows[b]) || rows[a] == rows[b])))
            .collect();
        if offenders.is_empty() {
            return PerformanceMatrix::from_rows(rows);
        }
        for a in offenders {
            rows[a] = (0..n).map(|_| rng.gen::<f64>()).collect();
        }
    }
    Err(Error::RejectionCapExceeded { rounds: cap })
}

/// Component-wise mean of the sample.
pub fn barycenter(omega: &OmegaSample) -> Result<WeightVector> {
    barycenter_of(omega.functions())
}

pub(crate) fn barycenter_of(functions: &[WeightVector]) -> Result<WeightVector> {
    let Some(first) = functions.first() else {
        return Err(Error::EmptySample);
    };
    let n = first.dim();
    let mut acc = vec![0.0; n];
    for w in functions {
        for (s, x) in acc.iter_mut().zip(w.as_slice()) {
            *s += x;
        }
    }
    let k = functions.len() as f64;
    acc.iter_mut().for_each(|x| *x /= k);
    // Mean of simplex points; renormalize away accumulated round-off.
    let s: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|x| *x /= s);
    WeightVector::with_tolerance(acc, 1e-6)
}

/// Euclidean distance between two weight vectors.
pub fn distance(u: &WeightVector, v: &WeightVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), actual: v.dim() });
    }
    Ok(euclidean(u.as_slice(), v.as_slice()))
}

pub(crate) fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Draws a point uniformly from the `n`-simplex (Dirichlet(1,…,1)).
pub fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightVector {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    WeightVector::from_sampled(e.into_iter().map(|x| x / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&[1.0, 1.0], &w(&[0.5, 0.5])).unwrap(), 1.0);
        assert_eq!(evaluate(&[0.9, 0.1], &w(&[1.0, 0.0])).unwrap(), 0.9);
        // 0.3*0.2 + 0.6*0.3 + 0.9*0.5
        let oracle = 0.06 + 0.18 + 0.45;
        assert_relative_eq!(evaluate(&[0.3, 0.6, 0.9], &w(&[0.2, 0.3, 0.5])).unwrap(), oracle, epsilon = 1e-15);
        assert!(matches!(
            evaluate(&[0.3, 0.6], &w(&[0.2, 0.3, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dominance_examples() {
        assert!(is_dominated(&[0.2, 0.2], &[0.3, 0.3]));
        assert!(!is_dominated(&[0.2, 0.8], &[0.8, 0.2]));
        assert!(!is_dominated(&[0.5, 0.5], &[0.5, 0.5]));
    }

    #[test]
    fn nondominated_matrix_is_deterministic_and_valid() {
        let a = random_nondominated_matrix(8, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_nondominated_matrix(8, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        let two = random_nondominated_matrix(2, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(!is_dominated(two.row(0), two.row(1)));
        assert!(!is_dominated(two.row(1), two.row(0)));
        for seed in 0..20 {
            let p = random_nondominated_matrix(5, 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for x in 0..5 {
                for y in 0..5 {
                    if x != y {
                        assert!(!is_dominated(p.row(x), p.row(y)));
                    }
                }
            }
        }
    }

    #[test]
    fn nondominated_matrix_rejects_small_shapes_and_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_nondominated_matrix(1, 3, &mut rng).is_err());
        // Twenty alternatives on two criteria are almost never mutually
        // non-dominated on a first draw.
        assert!(matches!(
            random_nondominated_matrix_capped(40, 2, &mut rng, 0),
            Err(Error::RejectionCapExceeded { rounds: 0 })
        ));
    }

    #[test]
    fn barycenter_examples() {
        let om = OmegaSample::new(vec![w(&[1.0, 0.0]), w(&[0.0, 1.0])], Provenance::External).unwrap();
        assert_eq!(barycenter(&om).unwrap().as_slice(), &[0.5, 0.5]);
        let single = OmegaSample::new(vec![w(&[0.2, 0.3, 0.5])], Provenance::External).unwrap();
        for (x, y) in barycenter(&single).unwrap().as_slice().iter().zip([0.2, 0.3, 0.5]) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
        assert!(OmegaSample::new(vec![], Provenance::External).is_err());
        assert!(barycenter_of(&[]).is_err());
    }

    #[test]
    fn barycenter_matches_compensated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<_> = (0..3).map(|_| random_simplex_point(4, &mut rng)).collect();
        let bar = barycenter_of(&pts).unwrap();
        for i in 0..4 {
            // Kahan summation oracle.
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for p in &pts {
                let y = p.as_slice()[i] - c;
                let t = s + y;
                c = (t - s) - y;
                s = t;
            }
            assert!((bar.as_slice()[i] - s / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(distance(&w(&[1.0, 0.0]), &w(&[0.0, 1.0])).unwrap(), 2f64.sqrt());
        assert_eq!(distance(&w(&[0.3, 0.7]), &w(&[0.3, 0.7])).unwrap(), 0.0);
        assert_relative_eq!(
            distance(&w(&[0.2, 0.3, 0.5]), &w(&[0.5, 0.3, 0.2])).unwrap(),
            0.18f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(distance(&w(&[1.0]), &w(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn weight_and_mass_invariants() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(MassDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(MassDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(MassDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn preference_validation() {
        let p = PreferenceInfo { uncertain_strict: vec![(0, 0)], ..Default::default() };
        assert!(p.validate(3).is_err());
        let p = PreferenceInfo { certain_strict: vec![(0, 5)], ..Default::default() };
        assert!(p.validate(3).is_err());
        let p = PreferenceInfo { uncertain_indiff: vec![(0, 1)], ..Default::default() };
        assert_eq!(p.uncertain_weak_pairs(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn csv_round_trip() {
        let p = random_nondominated_matrix(4, 3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("alt,g1,g2,g3\n"));
        assert_eq!(PerformanceMatrix::read_csv(&buf[..]).unwrap(), p);
    }
}
