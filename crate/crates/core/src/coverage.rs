//! Coverage-neighborhood geometry for targeted search.
//!
//! A probe lattice spans the target box; a probe counts as covered once any
//! observed outcome lies within distance `delta` of it (Euclidean over
//! per-dimension scaled coordinates). The covered fraction estimates
//! `Vol(C_delta(Y) intersect S) / Vol(S)`. Probes are stored as bitset rows
//! along the last dimension, so marking a ball and counting prospective
//! gains are range mask operations instead of per-probe distance tests.

use crate::error::{Error, Result};

/// Axis-aligned box target region in outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TargetSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Parameter("target bounds dimension mismatch".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Parameter(
                "target lower bound must be below upper bound per dimension".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube in `dims` dimensions (used for input-space coverage).
    pub fn unit_cube(dims: usize) -> Self {
        Self {
            lower: vec![0.0; dims],
            upper: vec![1.0; dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }
}

/// Tracks which probe cells of a target set lie within `delta` of any
/// observed outcome.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    target: TargetSet,
    delta: f64,
    scales: Vec<f64>,
    probes_per_dim: usize,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    words_per_row: usize,
    n_rows: usize,
    bits: Vec<u64>,
    covered_count: usize,
    observed: Vec<Vec<f64>>,
}

impl CoverageTracker {
    /// `delta` is the resolution radius in scaled units; `scales` divides
    /// each coordinate before distances are taken (identity when `None`).
    /// The default lattice is 50 probes per dimension at cell centers.
    pub fn new(
        target: TargetSet,
        delta: f64,
        probes_per_dim: usize,
        scales: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Parameter("delta must be positive".into()));
        }
        if probes_per_dim == 0 {
            return Err(Error::Parameter("need at least one probe per dimension".into()));
        }
        let dims = target.dims();
        let scales = scales.unwrap_or_else(|| vec![1.0; dims]);
        if scales.len() != dims || scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Parameter("scales must be positive per dimension".into()));
        }
        let spacing: Vec<f64> = (0..dims)
            .map(|d| (target.upper[d] - target.lower[d]) / probes_per_dim as f64)
            .collect();
        let origin: Vec<f64> = (0..dims)
            .map(|d| target.lower[d] + 0.5 * spacing[d])
            .collect();
        let n_rows = probes_per_dim.pow(dims as u32 - 1);
        let words_per_row = probes_per_dim.div_ceil(64);
        Ok(Self {
            target,
            delta,
            scales,
            probes_per_dim,
            spacing,
            origin,
            words_per_row,
            n_rows,
            bits: vec![0; n_rows * words_per_row],
            covered_count: 0,
            observed: Vec::new(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn target(&self) -> &TargetSet {
        &self.target
    }

    pub fn observed(&self) -> &[Vec<f64>] {
        &self.observed
    }

    pub fn total_probes(&self) -> usize {
        self.n_rows * self.probes_per_dim
    }

    /// Fraction of probe cells covered so far.
    pub fn covered_fraction(&self) -> f64 {
        self.covered_count as f64 / self.total_probes() as f64
    }

    /// Walks every (row, bit range) of probes within `delta` of `y`. Ranges
    /// are exact: within a row the probes inside the ball form one
    /// contiguous index interval.
    fn for_each_range<F: FnMut(usize, usize, usize)>(&self, y: &[f64], mut f: F) {
        let dims = self.target.dims();
        debug_assert_eq!(y.len(), dims);
        let d2 = self.delta * self.delta;
        // Prefix index ranges per non-final dimension.
        let mut lo = vec![0usize; dims - 1];
        let mut hi = vec![0usize; dims - 1];
        for d in 0..dims - 1 {
            let reach = self.delta * self.scales[d];
            let l = ((y[d] - reach - self.origin[d]) / self.spacing[d]).ceil();
            let h = ((y[d] + reach - self.origin[d]) / self.spacing[d]).floor();
            if h < 0.0 || l > (self.probes_per_dim - 1) as f64 {
                return;
            }
            lo[d] = l.max(0.0) as usize;
            hi[d] = h.min((self.probes_per_dim - 1) as f64) as usize;
        }
        let mut idx = lo.clone();
        'outer: loop {
            let mut partial = 0.0;
            let mut row = 0usize;
            for d in 0..dims - 1 {
                let coord = self.origin[d] + idx[d] as f64 * self.spacing[d];
                let dev = (y[d] - coord) / self.scales[d];
                partial += dev * dev;
                row = row * self.probes_per_dim + idx[d];
            }
            if partial <= d2 {
                let last = dims - 1;
                let s = (d2 - partial).sqrt() * self.scales[last];
                let l = ((y[last] - s - self.origin[last]) / self.spacing[last]).ceil();
                let h = ((y[last] + s - self.origin[last]) / self.spacing[last]).floor();
                if h >= 0.0 && l <= (self.probes_per_dim - 1) as f64 {
                    let l = l.max(0.0) as usize;
                    let h = h.min((self.probes_per_dim - 1) as f64) as usize;
                    if l <= h {
                        f(row, l, h);
                    }
                }
            }
            // Advance the mixed-radix prefix counter.
            if dims == 1 {
                break;
            }
            let mut d = dims - 1;
            loop {
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
                if idx[d] < hi[d] {
                    idx[d] += 1;
                    for t in d + 1..dims - 1 {
                        idx[t] = lo[t];
                    }
                    continue 'outer;
                }
            }
        }
    }

    fn range_words(lo: usize, hi: usize) -> impl Iterator<Item = (usize, u64)> {
        let w_lo = lo / 64;
        let w_hi = hi / 64;
        (w_lo..=w_hi).map(move |w| {
            let start = if w == w_lo { lo % 64 } else { 0 };
            let end = if w == w_hi { hi % 64 } else { 63 };
            let mask = if end == 63 {
                u64::MAX << start
            } else {
                ((1u64 << (end + 1)) - 1) & (u64::MAX << start)
            };
            (w, mask)
        })
    }

    /// Marks every probe within `delta` of `y` covered. Idempotent for
    /// repeated outcomes; the covered fraction never decreases.
    pub fn add_outcome(&mut self, y: &[f64]) {
        assert_eq!(y.len(), self.target.dims());
        self.observed.push(y.to_vec());
        let mut ranges = Vec::new();
        self.for_each_range(y, |row, lo, hi| ranges.push((row, lo, hi)));
        let mut newly = 0usize;
        for (row, lo, hi) in ranges {
            for (w, mask) in Self::range_words(lo, hi) {
                let slot = &mut self.bits[row * self.words_per_row + w];
                newly += (mask & !*slot).count_ones() as usize;
                *slot |= mask;
            }
        }
        self.covered_count += newly;
    }

    /// Number of currently-uncovered probes a prospective outcome would
    /// cover, as a fraction of all probes. Does not mutate the tracker.
    pub fn gain_of(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.target.dims());
        let mut newly = 0usize;
        self.for_each_range(y, |row, lo, hi| {
            for (w, mask) in Self::range_words(lo, hi) {
                newly += (mask & !self.bits[row * self.words_per_row + w]).count_ones() as usize;
            }
        });
        newly as f64 / self.total_probes() as f64
    }

    /// Mean incremental covered fraction over prospective outcome samples,
    /// each considered separately against the current tracker.
    pub fn expected_gain(&self, samples: &[Vec<f64>]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::Parameter("expected_gain needs at least one sample".into()));
        }
        Ok(samples.iter().map(|y| self.gain_of(y)).sum::<f64>() / samples.len() as f64)
    }

    /// Probe coordinates in lexicographic order (last dimension fastest).
    pub fn probe_coords(&self) -> Vec<Vec<f64>> {
        let dims = self.target.dims();
        let mut out = Vec::with_capacity(self.total_probes());
        let mut idx = vec![0usize; dims];
        loop {
            out.push(
                (0..dims)
                    .map(|d| self.origin[d] + idx[d] as f64 * self.spacing[d])
                    .collect(),
            );
            let mut d = dims;
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < self.probes_per_dim {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Covered flags in the same order as [`probe_coords`].
    pub fn covered_flags(&self) -> Vec<bool> {
        let mut flags = Vec::with_capacity(self.total_probes());
        for row in 0..self.n_rows {
            for i in 0..self.probes_per_dim {
                let w = self.bits[row * self.words_per_row + i / 64];
                flags.push(w & (1u64 << (i % 64)) != 0);
            }
        }
        flags
    }
}
