//! Dense matrices over the max-plus semiring and their text format.
//!
//! The text format is a header line `rows cols` followed by one line per
//! row of whitespace-separated scalar tokens (`3`, `7/3`, `-inf`). Printing
//! emits canonical tokens separated by single spaces, so parse → print is the
//! identity on canonical text.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{parse_rational_at, MaxPlusScalar, BOTTOM_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaxPlusMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<MaxPlusScalar>,
}

impl MaxPlusMatrix {
    /// All-bottom matrix (the ⊕-identity).
    pub fn bottom(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        MaxPlusMatrix {
            rows,
            cols,
            entries: vec![MaxPlusScalar::Bottom; rows * cols],
        }
    }

    /// ⊗-identity: `0` on the diagonal, bottom elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::bottom(n, n);
        for i in 0..n {
            m.set(i, i, MaxPlusScalar::unit());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<MaxPlusScalar>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidConfig(
                "matrix must have at least one entry".into(),
            ));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                op: "from_rows",
                left: (1, ncols),
                right: (1, bad.len()),
            });
        }
        Ok(MaxPlusMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// A single-column matrix.
    pub fn column(values: Vec<MaxPlusScalar>) -> Result<Self> {
        Self::from_rows(values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &MaxPlusScalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: MaxPlusScalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[MaxPlusScalar] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[MaxPlusScalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Entries of the first column, for column vectors.
    pub fn column_values(&self) -> Vec<MaxPlusScalar> {
        (0..self.rows).map(|i| self.get(i, 0).clone()).collect()
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Entrywise ⊕.
    pub fn oplus(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                op: "oplus",
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(MaxPlusMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.oplus(b))
                .collect(),
        })
    }

    /// Max-plus product: `(A ⊗ B)_ij = ⊕_k A_ik ⊗ B_kj`.
    pub fn otimes(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "otimes",
                left: self.dims(),
                right: other.dims(),
            });
        }
        let mut out = Self::bottom(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_bottom() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.otimes(other.get(k, j));
                    let idx = i * other.cols + j;
                    if prod > out.entries[idx] {
                        out.entries[idx] = prod;
                    }
                }
            }
        }
        Ok(out)
    }

    /// k-fold ⊗-product, `k >= 1`.
    pub fn power(&self, k: usize) -> Result<Self> {
        self.require_square("power")?;
        if k == 0 {
            return Err(Error::Domain(
                "matrix power exponent must be at least 1".into(),
            ));
        }
        // Square-and-multiply; the semiring product is associative.
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    Some(r) => r.otimes(&base)?,
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.otimes(&base)?;
        }
        Ok(result.expect("k >= 1"))
    }

    /// `A^1, A^2, …, A^k` in order.
    pub fn powers(&self, k: usize) -> Result<Vec<Self>> {
        self.require_square("powers")?;
        let mut out = Vec::with_capacity(k);
        if k == 0 {
            return Ok(out);
        }
        out.push(self.clone());
        for _ in 1..k {
            let next = out.last().expect("non-empty").otimes(self)?;
            out.push(next);
        }
        Ok(out)
    }

    /// `Tr(A) = ⊕_k A_kk`.
    pub fn trace(&self) -> Result<MaxPlusScalar> {
        let n = self.require_square("trace")?;
        Ok((0..n)
            .map(|i| self.get(i, i))
            .fold(MaxPlusScalar::Bottom, |acc, v| acc.oplus(v)))
    }

    /// ⊗-multiplies every entry by the scalar `s` (adds `s` to finite entries).
    pub fn scale(&self, s: &MaxPlusScalar) -> Self {
        MaxPlusMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v.otimes(s)).collect(),
        }
    }

    /// Principal submatrix on the given index set, in the order given.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut m = Self::bottom(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|v| v.is_finite()).count()
    }

    /// Parses the `rows cols` + row-lines text format. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            });

        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing `rows cols` header"))?;
        let dims: Vec<(usize, &str)> = tokens(header).collect();
        if dims.len() != 2 {
            return Err(Error::parse(hline, 1, "header must be `rows cols`"));
        }
        let parse_dim = |(col, tok): (usize, &str)| -> Result<usize> {
            match tok.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(Error::parse(
                    hline,
                    col,
                    format!("invalid dimension `{tok}`"),
                )),
            }
        };
        let rows = parse_dim(dims[0])?;
        let cols = parse_dim(dims[1])?;

        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (lno, line) = lines.next().ok_or_else(|| {
                Error::parse(hline + r + 1, 1, format!("expected {rows} rows, found {r}"))
            })?;
            let toks: Vec<(usize, &str)> = tokens(line).collect();
            if toks.len() != cols {
                return Err(Error::parse(
                    lno,
                    1,
                    format!("expected {cols} entries, found {}", toks.len()),
                ));
            }
            for (col, tok) in toks {
                let v = if tok == BOTTOM_TOKEN {
                    MaxPlusScalar::Bottom
                } else {
                    MaxPlusScalar::Finite(parse_rational_at(tok, lno, col)?)
                };
                entries.push(v);
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::parse(lno, 1, "unexpected trailing content"));
        }
        Ok(MaxPlusMatrix {
            rows,
            cols,
            entries,
        })
    }
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(move |(byte, tok)| (line[..byte].chars().count() + 1, tok))
}

impl FromStr for MaxPlusMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for MaxPlusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Builds a matrix from string tokens; panics on malformed input. For tests
/// and examples.
pub fn mat(rows: &[&[&str]]) -> MaxPlusMatrix {
    MaxPlusMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|t| t.parse().expect("valid scalar")).collect())
            .collect(),
    )
    .expect("rectangular matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEG: &str = "-inf";

    #[test]
    fn worked_product() {
        let a = mat(&[&["3", "-1"], &["0", "5"]]);
        let x = mat(&[&["4"], &["0"]]);
        assert_eq!(a.otimes(&x).unwrap(), mat(&[&["7"], &["5"]]));
    }

    #[test]
    fn product_with_identity() {
        let a = mat(&[&["3", "-1"], &["0", "5"]]);
        assert_eq!(a.otimes(&MaxPlusMatrix::identity(2)).unwrap(), a);
        assert_eq!(MaxPlusMatrix::identity(2).otimes(&a).unwrap(), a);
    }

    #[test]
    fn product_three_by_three() {
        let a = mat(&[&["3", "16/3", NEG], &[NEG, NEG, "3"], &["3", NEG, NEG]]);
        let zeros = mat(&[&["0"], &["0"], &["0"]]);
        assert_eq!(a.otimes(&zeros).unwrap(), mat(&[&["16/3"], &["3"], &["3"]]));
    }

    #[test]
    fn product_dimension_mismatch() {
        let a = mat(&[&["1", "2"]]);
        assert!(matches!(a.otimes(&a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oplus_examples() {
        let a = mat(&[&["3", NEG], &["0", "5"]]);
        assert_eq!(a.oplus(&MaxPlusMatrix::bottom(2, 2)).unwrap(), a);
        assert_eq!(
            mat(&[&["1"]]).oplus(&mat(&[&["2"]])).unwrap(),
            mat(&[&["2"]])
        );
        let b = mat(&[&["3", "-1"], &["0", "5"]]);
        assert_eq!(b.oplus(&b).unwrap(), b);
        assert!(b.oplus(&mat(&[&["1"]])).is_err());
    }

    #[test]
    fn powers() {
        let a = mat(&[&["3", "-1"], &["0", "5"]]);
        assert_eq!(a.power(1).unwrap(), a);
        assert_eq!(a.power(2).unwrap(), mat(&[&["6", "4"], &["5", "10"]]));
        assert_eq!(mat(&[&["3"]]).power(4).unwrap(), mat(&[&["12"]]));
        assert!(mat(&[&["1", "2"]]).power(2).is_err());
        let p = a.powers(5).unwrap();
        for (k, m) in p.iter().enumerate() {
            assert_eq!(*m, a.power(k + 1).unwrap());
        }
    }

    #[test]
    fn traces() {
        assert_eq!(
            mat(&[&["3", "-1"], &["0", "5"]]).trace().unwrap(),
            MaxPlusScalar::from_int(5)
        );
        let swap = mat(&[&[NEG, "0"], &["0", NEG]]);
        assert_eq!(swap.trace().unwrap(), MaxPlusScalar::Bottom);
        assert_eq!(
            swap.power(2).unwrap().trace().unwrap(),
            MaxPlusScalar::unit()
        );
        assert!(mat(&[&["1", "2"]]).trace().is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = "2 3\n3 -inf 7/3\n0 -1/2 5\n";
        let m: MaxPlusMatrix = text.parse().unwrap();
        assert_eq!(m.to_string(), text);
    }

    #[test]
    fn parse_normalizes_tokens() {
        let m = MaxPlusMatrix::parse("1 2\n  2.5\t 4/2 \n").unwrap();
        assert_eq!(m.to_string(), "1 2\n5/2 2\n");
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let m = MaxPlusMatrix::parse("# header\n\n2 2\n3 -1\n  # row two\n0 x5\n").unwrap_err();
        assert!(
            matches!(
                m,
                Error::Parse {
                    line: 6,
                    column: 3,
                    ..
                }
            ),
            "{m:?}"
        );
        let m = MaxPlusMatrix::parse("# c\n2 2\n3 -1\n\n0 5\n").unwrap();
        assert_eq!(m, mat(&[&["3", "-1"], &["0", "5"]]));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match MaxPlusMatrix::parse("2 2\n1 2\n3 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match MaxPlusMatrix::parse("2 2\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MaxPlusMatrix::parse("").is_err());
        assert!(MaxPlusMatrix::parse("0 2\n").is_err());
        assert!(MaxPlusMatrix::parse("1 1\n1\n2\n").is_err());
        assert!(MaxPlusMatrix::parse("2 2\n1 2\n").is_err());
    }
}
