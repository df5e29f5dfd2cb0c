use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Periodic filter-array layout: a `period × period` grid of band indices.
///
/// Text form (the pattern sidecar): a first line `P B`, then `P` lines of
/// `P` whitespace-separated band indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MsfaPattern {
    period: usize,
    band_count: usize,
    cells: Vec<usize>,
}

impl MsfaPattern {
    pub fn new(period: usize, band_count: usize, cells: Vec<usize>) -> Result<Self> {
        if period == 0 || band_count == 0 {
            return Err(Error::Config(format!(
                "pattern period ({period}) and band count ({band_count}) must be positive"
            )));
        }
        if cells.len() != period * period {
            return Err(Error::Config(format!(
                "a period-{period} pattern needs {} cells, got {}",
                period * period,
                cells.len()
            )));
        }
        if let Some(pos) = cells.iter().position(|&c| c >= band_count) {
            return Err(Error::Config(format!(
                "pattern cell ({}, {}) holds band {} but only {band_count} bands exist",
                pos / period,
                pos % period,
                cells[pos]
            )));
        }
        Ok(Self { period, band_count, cells })
    }

    /// The 4×4, 16-band layout with band `b` at cell `(b / 4, b % 4)`.
    pub fn default_16band() -> Self {
        Self { period: 4, band_count: 16, cells: (0..16).collect() }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn band_count(&self) -> usize {
        self.band_count
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Band sampled at image position `(row, col)`.
    #[inline]
    pub fn band_at(&self, row: usize, col: usize) -> usize {
        self.cells[(row % self.period) * self.period + col % self.period]
    }
}

impl Default for MsfaPattern {
    fn default() -> Self {
        Self::default_16band()
    }
}

impl fmt::Display for MsfaPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.period, self.band_count)?;
        for row in self.cells.chunks(self.period) {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for MsfaPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty pattern description".into()))?;
        let nums = parse_numbers(header)?;
        let [period, band_count] = nums[..] else {
            return Err(Error::Config(format!(
                "pattern header must be `P B`, got `{header}`"
            )));
        };
        let mut cells = Vec::with_capacity(period * period);
        for r in 0..period {
            let line = lines.next().ok_or_else(|| {
                Error::Config(format!("pattern has {r} rows, expected {period}"))
            })?;
            let row = parse_numbers(line)?;
            if row.len() != period {
                return Err(Error::Config(format!(
                    "pattern row {r} has {} entries, expected {period}",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Config(format!("trailing pattern content `{extra}`")));
        }
        Self::new(period, band_count, cells)
    }
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad pattern entry `{tok}`")))
        })
        .collect()
}
