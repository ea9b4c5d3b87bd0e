//! Dense 0-1 matrices stored as row bitsets.
//!
//! A [`ZeroOneMatrix`] doubles as the biadjacency matrix of a bipartite
//! graph: row `i` is a left vertex, column `j` a right vertex, and a set bit
//! is an edge. Matrices are immutable values; every structural operation
//! returns a fresh copy.
//!
//! Row and column numbers that appear in the counting recursions
//! ([`ZeroOneMatrix::remove_first_row_and_column`], [`ColumnSet`]) are
//! 1-based. Plain element access ([`ZeroOneMatrix::get`]) is 0-based.
//!
//! Two text encodings are supported:
//!
//! * plain text: one line per row made of `0`/`1` characters, each line
//!   terminated by `\n`; an empty input is the 0x0 matrix;
//! * JSON: `{"rows": m, "cols": n, "data": ["0101", ...]}`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(cols: usize) -> usize {
    cols.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZeroOneMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl ZeroOneMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        ZeroOneMatrix {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| true)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| i == j)
    }

    /// Builds a matrix from a predicate on 0-based `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set_raw(i, j);
                }
            }
        }
        m
    }

    /// Validating constructor from row vectors of 0/1 entries.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: cols,
                    found: r.len(),
                });
            }
            if let Some(j) = r.iter().position(|&v| v > 1) {
                return Err(Error::InvalidEntry {
                    row: i + 1,
                    col: j + 1,
                    found: r[j].to_string(),
                });
            }
        }
        Ok(Self::from_fn(rows.len(), cols, |i, j| rows[i].as_ref()[j] == 1))
    }

    /// Builds a matrix whose rows are the low `cols` bits of each mask.
    /// Bit `j` of `masks[i]` is entry `(i, j)`.
    pub fn from_masks(cols: usize, masks: &[u64]) -> Result<Self> {
        if cols > WORD {
            return Err(Error::capability("mask width", WORD as u128, cols as u128, None));
        }
        let limit = if cols == WORD { u64::MAX } else { (1u64 << cols) - 1 };
        let mut m = Self::zeros(masks.len(), cols);
        for (i, &mask) in masks.iter().enumerate() {
            if mask & !limit != 0 {
                return Err(Error::ColumnOutOfRange {
                    col: (WORD - mask.leading_zeros() as usize),
                    cols,
                });
            }
            if cols > 0 {
                m.bits[i * m.stride] = mask;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry at 0-based `(row, col)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.bits[row * self.stride + col / WORD] >> (col % WORD) & 1 == 1
    }

    /// Returns a copy with entry `(row, col)` (0-based) set to `value`.
    pub fn with_entry(&self, row: usize, col: usize, value: bool) -> Self {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        let mut m = self.clone();
        let w = &mut m.bits[row * m.stride + col / WORD];
        if value {
            *w |= 1 << (col % WORD);
        } else {
            *w &= !(1 << (col % WORD));
        }
        m
    }

    fn set_raw(&mut self, row: usize, col: usize) {
        self.bits[row * self.stride + col / WORD] |= 1 << (col % WORD);
    }

    /// The bitset words of a row (0-based).
    #[inline]
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.stride..(row + 1) * self.stride]
    }

    /// The row as a single mask; only valid for matrices with at most 64 columns.
    #[inline]
    pub(crate) fn row_mask(&self, row: usize) -> u64 {
        debug_assert!(self.cols <= WORD);
        if self.stride == 0 {
            0
        } else {
            self.bits[row * self.stride]
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Drops the first row (the skip branch of the all-matchings recursion).
    pub fn remove_first_row(&self) -> Result<Self> {
        if self.rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(ZeroOneMatrix {
            rows: self.rows - 1,
            cols: self.cols,
            stride: self.stride,
            bits: self.bits[self.stride..].to_vec(),
        })
    }

    /// Deletes column `col` (1-based) from every row.
    pub fn remove_column(&self, col: usize) -> Result<Self> {
        if col == 0 || col > self.cols {
            return Err(Error::ColumnOutOfRange {
                col,
                cols: self.cols,
            });
        }
        let skip = col - 1;
        Ok(Self::from_fn(self.rows, self.cols - 1, |i, j| {
            self.get(i, if j < skip { j } else { j + 1 })
        }))
    }

    /// Drops the first row and column `col` (1-based).
    pub fn remove_first_row_and_column(&self, col: usize) -> Result<Self> {
        if self.rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        if col == 0 || col > self.cols {
            return Err(Error::ColumnOutOfRange {
                col,
                cols: self.cols,
            });
        }
        self.remove_first_row()?.remove_column(col)
    }

    /// Columns holding a 1 in the first row.
    pub fn first_row_support(&self) -> Result<ColumnSet> {
        if self.rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(ColumnSet {
            width: self.cols,
            words: self.row_words(0).to_vec(),
        })
    }

    /// The `2n x 2n` block matrix `[[A, I], [J, J]]` whose permanent is
    /// `n!` times the number of all matchings of `A`.
    pub fn extend_transform(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        Ok(Self::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.get(i, j),
            (true, false) => j - n == i,
            (false, _) => true,
        }))
    }

    /// Parses the line-oriented text format.
    pub fn parse_text(input: &str) -> Result<Self> {
        if input.is_empty() {
            return Ok(Self::zeros(0, 0));
        }
        let body = input.strip_suffix('\n').unwrap_or(input);
        let lines: Vec<&str> = body.split('\n').collect();
        let rows = lines
            .iter()
            .enumerate()
            .map(|(i, line)| parse_row(line, i + 1))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            s.push_str(&self.row_string(i));
            s.push('\n');
        }
        s
    }

    fn row_string(&self, row: usize) -> String {
        (0..self.cols)
            .map(|j| if self.get(row, j) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_json(input: &str) -> Result<Self> {
        let doc: MatrixJson =
            serde_json::from_str(input).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson::from(self)).expect("matrix json")
    }

    /// Parses either encoding, picking JSON when the first non-blank
    /// character is `{`.
    pub fn parse_any(input: &str) -> Result<Self> {
        if input.trim_start().starts_with('{') {
            Self::parse_json(input)
        } else {
            Self::parse_text(input)
        }
    }
}

fn parse_row(line: &str, row: usize) -> Result<Vec<u8>> {
    line.chars()
        .enumerate()
        .map(|(j, c)| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::InvalidEntry {
                row,
                col: j + 1,
                found: other.to_string(),
            }),
        })
        .collect()
}

impl fmt::Debug for ZeroOneMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows).map(|i| self.row_string(i)).collect();
        write!(f, "ZeroOneMatrix({}x{} {:?})", self.rows, self.cols, rows)
    }
}

impl fmt::Display for ZeroOneMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<String>,
}

impl From<&ZeroOneMatrix> for MatrixJson {
    fn from(m: &ZeroOneMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: (0..m.rows).map(|i| m.row_string(i)).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ZeroOneMatrix {
    type Error = Error;

    fn try_from(doc: MatrixJson) -> Result<Self> {
        if doc.data.len() != doc.rows {
            return Err(Error::Parse(format!(
                "declared {} rows but data holds {}",
                doc.rows,
                doc.data.len()
            )));
        }
        let rows = doc
            .data
            .iter()
            .enumerate()
            .map(|(i, line)| {
                let r = parse_row(line, i + 1)?;
                if r.len() != doc.cols {
                    return Err(Error::RaggedRow {
                        row: i + 1,
                        expected: doc.cols,
                        found: r.len(),
                    });
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = ZeroOneMatrix::from_rows(&rows)?;
        if doc.rows == 0 {
            m = ZeroOneMatrix::zeros(0, doc.cols);
        }
        Ok(m)
    }
}

impl Serialize for ZeroOneMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ZeroOneMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = MatrixJson::deserialize(deserializer)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

/// A subset of the real columns `1..=width` of a matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColumnSet {
    width: usize,
    words: Vec<u64>,
}

impl ColumnSet {
    pub fn empty(width: usize) -> Self {
        ColumnSet {
            width,
            words: vec![0; words_for(width)],
        }
    }

    /// Builds a set from 1-based column indices.
    pub fn from_columns(width: usize, cols: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(width);
        for c in cols {
            if c == 0 || c > width {
                return Err(Error::ColumnOutOfRange { col: c, cols: width });
            }
            set.words[(c - 1) / WORD] |= 1 << ((c - 1) % WORD);
        }
        Ok(set)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Membership of the 1-based column `col`.
    pub fn contains(&self, col: usize) -> bool {
        col >= 1 && col <= self.width && self.words[(col - 1) / WORD] >> ((col - 1) % WORD) & 1 == 1
    }

    /// Ascending 1-based column indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * WORD + b + 1)
            })
        })
    }
}

impl fmt::Debug for ColumnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[u8]]) -> ZeroOneMatrix {
        ZeroOneMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn make_matrix_cases() {
        assert_eq!(m(&[&[1, 0], &[0, 1]]), ZeroOneMatrix::identity(2));
        let empty = ZeroOneMatrix::from_rows::<Vec<u8>>(&[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 0));
        let err = ZeroOneMatrix::from_rows(&[vec![1u8, 0], vec![0, 1, 1]]).unwrap_err();
        assert!(err.to_string().contains("ragged row 2"), "{err}");
        let err = ZeroOneMatrix::from_rows(&[vec![1u8, 2]]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidEntry {
                row: 1,
                col: 2,
                found: "2".into()
            }
        );
    }

    #[test]
    fn remove_first_row_cases() {
        assert_eq!(m(&[&[1, 1], &[0, 1]]).remove_first_row().unwrap(), m(&[&[0, 1]]));
        let r = m(&[&[1]]).remove_first_row().unwrap();
        assert_eq!((r.rows(), r.cols()), (0, 1));
        assert_eq!(
            ZeroOneMatrix::zeros(0, 0).remove_first_row(),
            Err(Error::EmptyMatrix)
        );
    }

    #[test]
    fn remove_first_row_and_column_cases() {
        let id = ZeroOneMatrix::identity(2);
        assert_eq!(id.remove_first_row_and_column(1).unwrap(), m(&[&[1]]));
        let j2 = ZeroOneMatrix::ones(2, 2);
        assert_eq!(j2.remove_first_row_and_column(2).unwrap(), m(&[&[1]]));
        let r = m(&[&[1]]).remove_first_row_and_column(1).unwrap();
        assert_eq!((r.rows(), r.cols()), (0, 0));
        assert!(matches!(
            j2.remove_first_row_and_column(3),
            Err(Error::ColumnOutOfRange { col: 3, cols: 2 })
        ));
        assert!(j2.remove_first_row_and_column(0).is_err());
    }

    #[test]
    fn first_row_support_cases() {
        let s = m(&[&[1, 0, 1]]).first_row_support().unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert!(s.contains(1) && !s.contains(2) && s.contains(3) && !s.contains(4));
        assert!(m(&[&[0, 0]]).first_row_support().unwrap().is_empty());
        assert_eq!(m(&[&[1, 1]]).first_row_support().unwrap().len(), 2);
        assert_eq!(
            ZeroOneMatrix::zeros(0, 3).first_row_support(),
            Err(Error::EmptyMatrix)
        );
    }

    #[test]
    fn extend_transform_cases() {
        assert_eq!(m(&[&[1]]).extend_transform().unwrap(), ZeroOneMatrix::ones(2, 2));
        let b = ZeroOneMatrix::identity(2).extend_transform().unwrap();
        assert_eq!(
            b,
            m(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]])
        );
        let b = m(&[&[1, 1], &[0, 1]]).extend_transform().unwrap();
        assert!(b.get(0, 0) && b.get(0, 1) && !b.get(1, 0) && b.get(1, 1));
        assert!(matches!(
            ZeroOneMatrix::zeros(2, 3).extend_transform(),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let a = ZeroOneMatrix::from_fn(3, 130, |i, j| (i + j) % 7 == 0);
        let b = a.remove_first_row_and_column(64).unwrap();
        for i in 0..2 {
            for j in 0..129 {
                let src = if j < 63 { j } else { j + 1 };
                assert_eq!(b.get(i, j), a.get(i + 1, src));
            }
        }
        let s = a.first_row_support().unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), (0..130).filter(|j| j % 7 == 0).map(|j| j + 1).collect::<Vec<_>>());
    }

    #[test]
    fn text_format() {
        assert_eq!(ZeroOneMatrix::parse_text("").unwrap(), ZeroOneMatrix::zeros(0, 0));
        let a = ZeroOneMatrix::parse_text("0101\n1100\n").unwrap();
        assert_eq!(a, m(&[&[0, 1, 0, 1], &[1, 1, 0, 0]]));
        assert_eq!(a.to_text(), "0101\n1100\n");
        assert!(matches!(
            ZeroOneMatrix::parse_text("01 1\n"),
            Err(Error::InvalidEntry { row: 1, col: 3, .. })
        ));
        assert!(ZeroOneMatrix::parse_text("01\r\n10\r\n").is_err());
        assert!(matches!(
            ZeroOneMatrix::parse_text("01\n1\n"),
            Err(Error::RaggedRow { row: 2, .. })
        ));
    }

    #[test]
    fn json_format() {
        let a = ZeroOneMatrix::parse_json(r#"{"rows":2,"cols":3,"data":["101","011"]}"#).unwrap();
        assert_eq!(a, m(&[&[1, 0, 1], &[0, 1, 1]]));
        assert_eq!(a.to_json(), r#"{"rows":2,"cols":3,"data":["101","011"]}"#);
        assert!(ZeroOneMatrix::parse_json(r#"{"rows":1,"cols":2,"data":["1x"]}"#).is_err());
        assert!(ZeroOneMatrix::parse_json(r#"{"rows":2,"cols":2,"data":["10"]}"#).is_err());
        assert!(ZeroOneMatrix::parse_json(r#"{"rows":1,"cols":3,"data":["10"]}"#).is_err());
        let z = ZeroOneMatrix::parse_json(r#"{"rows":0,"cols":4,"data":[]}"#).unwrap();
        assert_eq!((z.rows(), z.cols()), (0, 4));
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = ZeroOneMatrix> {
        (0..=max, 0..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c)
                .prop_map(move |v| ZeroOneMatrix::from_fn(r, c, |i, j| v[i * c + j]))
        })
    }

    proptest! {
        #[test]
        fn row_and_column_removal_commute(a in arb_matrix(7), pick in 0usize..100) {
            prop_assume!(a.rows() >= 1 && a.cols() >= 1);
            let j = pick % a.cols() + 1;
            let direct = a.remove_first_row_and_column(j).unwrap();
            let two_step = a.remove_first_row().unwrap().remove_column(j).unwrap();
            prop_assert_eq!(direct, two_step);
        }

        #[test]
        fn extend_transform_ones(n in 0usize..7, seed in proptest::collection::vec(any::<bool>(), 36)) {
            let a = ZeroOneMatrix::from_fn(n, n, |i, j| seed[i * 6 + j]);
            prop_assert_eq!(a.extend_transform().unwrap().count_ones(), a.count_ones() + n + 2 * n * n);
        }

        #[test]
        fn serialization_round_trips(a in arb_matrix(9)) {
            if a.rows() > 0 {
                prop_assert_eq!(&ZeroOneMatrix::parse_text(&a.to_text()).unwrap(), &a);
            }
            prop_assert_eq!(&ZeroOneMatrix::parse_json(&a.to_json()).unwrap(), &a);
        }
    }
}
