use std::collections::{BTreeMap, BTreeSet};

use super::{AccessPolicy, PolicyError};
use crate::codec::{DecodeError, Decoder, Encoder};
use crate::group::ScalarField;

/// Share-generating matrix `M` with row labeling `rho`.
///
/// Entries are small integers (the compiler only emits 0, 1 and -1) and are
/// mapped into `Z_p` when used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LsssMatrix {
    rows: Vec<Vec<i64>>,
    labels: Vec<String>,
    cols: usize,
}

impl LsssMatrix {
    /// Compiles a formula by share-vector propagation: the root carries `(1)`,
    /// an AND gate hands `(v, 0.., 1)` to its left child and `(0.., -1)` to its
    /// right child, an OR gate copies its vector to both children.
    pub fn from_policy(policy: &AccessPolicy) -> Self {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut counter = 1usize;
        compile(policy, vec![1], &mut counter, &mut rows, &mut labels);
        for row in &mut rows {
            row.resize(counter, 0);
        }
        Self {
            rows,
            labels,
            cols: counter,
        }
    }

    pub fn from_parts(rows: Vec<Vec<i64>>, labels: Vec<String>) -> Result<Self, PolicyError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(PolicyError::Empty);
        }
        if rows.len() != labels.len() || rows.iter().any(|r| r.len() != cols) {
            return Err(PolicyError::Syntax("ragged share matrix".into()));
        }
        Ok(Self { rows, labels, cols })
    }

    /// Number of rows, `beta`.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns, `n`.
    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[i64] {
        &self.rows[k]
    }

    /// `rho(k)`.
    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `M_k . v` over `Z_p`.
    pub fn share<F: ScalarField>(&self, k: usize, v: &[F]) -> F {
        self.rows[k]
            .iter()
            .zip(v)
            .fold(F::zero(), |acc, (&m, &x)| acc + F::from_i64(m) * x)
    }

    /// Finds `omega` with `sum_{j in I} omega_j M_j = (1, 0, ..., 0)` over the
    /// rows `I` whose label is in `attrs`. `None` when `attrs` does not satisfy
    /// the policy. Gaussian elimination, first pivot wins, free variables 0.
    pub fn reconstruction_coefficients<F: ScalarField, S: AsRef<str> + Ord>(
        &self,
        attrs: &BTreeSet<S>,
    ) -> Option<BTreeMap<usize, F>> {
        let selected: Vec<usize> = (0..self.rows.len())
            .filter(|&k| attrs.iter().any(|a| a.as_ref() == self.labels[k]))
            .collect();
        if selected.is_empty() {
            return None;
        }
        // Unknowns are omega_j for j in selected; equations are the columns.
        let unknowns = selected.len();
        let mut aug: Vec<Vec<F>> = (0..self.cols)
            .map(|c| {
                let mut eq: Vec<F> = selected
                    .iter()
                    .map(|&j| F::from_i64(self.rows[j][c]))
                    .collect();
                eq.push(if c == 0 { F::one() } else { F::zero() });
                eq
            })
            .collect();

        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..unknowns {
            let Some(p) = (r..aug.len()).find(|&i| !aug[i][col].is_zero()) else {
                continue;
            };
            aug.swap(r, p);
            let inv = aug[r][col].inverse().expect("nonzero pivot");
            for x in aug[r].iter_mut() {
                *x = *x * inv;
            }
            for i in 0..aug.len() {
                if i != r && !aug[i][col].is_zero() {
                    let factor = aug[i][col];
                    let pivot_row = aug[r].clone();
                    for (x, y) in aug[i].iter_mut().zip(pivot_row) {
                        *x = *x - factor * y;
                    }
                }
            }
            pivots.push(col);
            r += 1;
            if r == aug.len() {
                break;
            }
        }
        // Inconsistent: a zero row with nonzero right-hand side.
        if aug[r..].iter().any(|eq| !eq[unknowns].is_zero()) {
            return None;
        }
        let mut omega = vec![F::zero(); unknowns];
        for (row, &col) in pivots.iter().enumerate() {
            omega[col] = aug[row][unknowns];
        }
        Some(selected.into_iter().zip(omega).collect())
    }

    /// Rows are stored sparsely as `(column, value)` pairs.
    pub fn encode(&self, e: &mut Encoder) {
        e.uint(self.rows.len() as u64).uint(self.cols as u64);
        for (row, label) in self.rows.iter().zip(&self.labels) {
            e.text(label);
            let nonzero: Vec<(usize, i64)> =
                row.iter().copied().enumerate().filter(|&(_, m)| m != 0).collect();
            e.uint(nonzero.len() as u64);
            for (c, m) in nonzero {
                e.uint(c as u64).uint(m as u64);
            }
        }
    }

    pub fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n_rows = d.usize()?;
        let cols = d.usize()?;
        if n_rows == 0 || cols == 0 || n_rows > 1 << 16 || cols > 1 << 16 {
            return Err(DecodeError::Malformed("share matrix shape".into()));
        }
        let mut rows = Vec::with_capacity(n_rows);
        let mut labels = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            labels.push(d.text()?);
            let mut row = vec![0i64; cols];
            let nnz = d.usize()?;
            let mut last = None;
            for _ in 0..nnz {
                let c = d.usize()?;
                let m = d.uint()? as i64;
                if c >= cols || m == 0 || last.is_some_and(|l| c <= l) {
                    return Err(DecodeError::Malformed("share matrix entry".into()));
                }
                row[c] = m;
                last = Some(c);
            }
            rows.push(row);
        }
        Ok(Self { rows, labels, cols })
    }
}

fn compile(
    node: &AccessPolicy,
    vector: Vec<i64>,
    counter: &mut usize,
    rows: &mut Vec<Vec<i64>>,
    labels: &mut Vec<String>,
) {
    match node {
        AccessPolicy::Attr(a) => {
            rows.push(vector);
            labels.push(a.clone());
        }
        AccessPolicy::Or(l, r) => {
            compile(l, vector.clone(), counter, rows, labels);
            compile(r, vector, counter, rows, labels);
        }
        AccessPolicy::And(l, r) => {
            let mut left = vector;
            left.resize(*counter, 0);
            left.push(1);
            let mut right = vec![0; *counter];
            right.push(-1);
            *counter += 1;
            compile(l, left, counter, rows, labels);
            compile(r, right, counter, rows, labels);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{MockScalar, ScalarField};

    type F = MockScalar;

    fn attrs(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn policy(s: &str) -> AccessPolicy {
        s.parse().unwrap()
    }

    #[test]
    fn and_matrix() {
        let m = LsssMatrix::from_policy(&policy("A and B"));
        assert_eq!(m.rows, vec![vec![1, 1], vec![0, -1]]);
        assert_eq!(m.labels, vec!["A", "B"]);
        let w = m.reconstruction_coefficients::<F, _>(&attrs(&["A", "B"])).unwrap();
        assert_eq!(w, BTreeMap::from([(0, F::one()), (1, F::one())]));
        assert!(m.reconstruction_coefficients::<F, _>(&attrs(&["A"])).is_none());
        assert!(m.reconstruction_coefficients::<F, _>(&attrs(&["B"])).is_none());
    }

    #[test]
    fn or_matrix() {
        let m = LsssMatrix::from_policy(&policy("A or B"));
        assert_eq!(m.rows, vec![vec![1], vec![1]]);
        let w = m.reconstruction_coefficients::<F, _>(&attrs(&["B"])).unwrap();
        assert_eq!(w, BTreeMap::from([(1, F::one())]));
        // first pivot wins when both rows are present
        let w = m.reconstruction_coefficients::<F, _>(&attrs(&["A", "B"])).unwrap();
        assert_eq!(w, BTreeMap::from([(0, F::one()), (1, F::zero())]));
    }

    #[test]
    fn nested_and_matrix() {
        let m = LsssMatrix::from_policy(&AccessPolicy::and(
            AccessPolicy::attr("A"),
            AccessPolicy::and(AccessPolicy::attr("B"), AccessPolicy::attr("C")),
        ));
        assert_eq!(m.rows, vec![vec![1, 1, 0], vec![0, -1, 1], vec![0, 0, -1]]);
        let w = m
            .reconstruction_coefficients::<F, _>(&attrs(&["A", "B", "C"]))
            .unwrap();
        assert!(w.values().all(|x| *x == F::one()));
    }

    #[test]
    fn share_is_dot_product() {
        let m = LsssMatrix::from_policy(&policy("A and B"));
        let v = [F::from_u64(5), F::from_u64(7)];
        assert_eq!(m.share(0, &v), F::from_u64(12));
        assert_eq!(m.share(1, &v), -F::from_u64(7));
    }

    #[test]
    fn encode_roundtrip() {
        let m = LsssMatrix::from_policy(&policy("(a and b) or (c and d and e)"));
        let mut e = Encoder::new();
        m.encode(&mut e);
        let bytes = e.finish();
        let mut d = Decoder::new(&bytes);
        assert_eq!(LsssMatrix::decode(&mut d).unwrap(), m);
        d.finish().unwrap();
    }

    #[test]
    fn from_parts_validates_shape() {
        assert!(LsssMatrix::from_parts(vec![], vec![]).is_err());
        assert!(LsssMatrix::from_parts(vec![vec![1, 0], vec![1]], vec!["a".into(), "b".into()]).is_err());
        assert!(LsssMatrix::from_parts(vec![vec![1]], vec!["a".into()]).is_ok());
    }
}
