use crate::error::{Error, Result};

/// Total map `2^r -> 2^u`. Row index bit `j` is input coordinate `j`;
/// row value bit `i` is output coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    r: usize,
    u: usize,
    rows: Vec<u64>,
}

pub const TABLE_MAX_ARITY: usize = 24;

impl TruthTable {
    pub fn new(r: usize, u: usize, rows: Vec<u64>) -> Result<TruthTable> {
        if r > TABLE_MAX_ARITY {
            return Err(Error::TooLarge {
                what: "table arity",
                got: r,
                limit: TABLE_MAX_ARITY,
            });
        }
        if u == 0 || u > 64 {
            return Err(Error::Invalid(format!("output width {u} outside 1..=64")));
        }
        if rows.len() != 1 << r {
            return Err(Error::Width {
                expected: 1 << r,
                got: rows.len(),
            });
        }
        let mask = out_mask(u);
        if rows.iter().any(|&v| v & !mask != 0) {
            return Err(Error::Invalid("row value wider than output width".into()));
        }
        Ok(TruthTable { r, u, rows })
    }

    pub fn from_fn(r: usize, u: usize, f: impl Fn(u64) -> u64) -> Result<TruthTable> {
        if r > TABLE_MAX_ARITY {
            return Err(Error::TooLarge {
                what: "table arity",
                got: r,
                limit: TABLE_MAX_ARITY,
            });
        }
        TruthTable::new(r, u, (0..1u64 << r).map(f).collect())
    }

    pub fn arity(&self) -> usize {
        self.r
    }

    pub fn out_width(&self) -> usize {
        self.u
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, x: u64) -> u64 {
        self.rows[x as usize]
    }

    /// First covering pair `x <= x | e_j` with `f(x) !<= f(x | e_j)`.
    pub fn monotonicity_witness(&self) -> Option<(u64, u64)> {
        for x in 0..self.rows.len() as u64 {
            for j in 0..self.r {
                if x & (1 << j) == 0 {
                    let y = x | (1 << j);
                    if self.rows[x as usize] & !self.rows[y as usize] != 0 {
                        return Some((x, y));
                    }
                }
            }
        }
        None
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_witness().is_none()
    }
}

pub fn out_mask(u: usize) -> u64 {
    if u >= 64 {
        !0
    } else {
        (1u64 << u) - 1
    }
}

pub fn bits_of(x: u64, width: usize) -> Vec<bool> {
    (0..width).map(|j| (x >> j) & 1 == 1).collect()
}

pub fn word_of(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (j, &b)| acc | (u64::from(b) << j))
}
