//! Sparse tensors in coordinate form, dense factor matrices, and workload
//! generation.
//!
//! Tensors are loaded from `.tns` text (whitespace-separated 1-based indices
//! followed by one value per line, `#` comments ignored) or generated
//! deterministically from a [`SyntheticSpec`]. Coordinates are stored
//! zero-based in a flat row-major buffer.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::TensorError;

/// An N-mode sparse tensor in coordinate (COO) form.
///
/// Invariants: every coordinate is strictly below its mode's dim, no two
/// entries share a coordinate tuple, and `values.len() == nnz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensorCOO {
    name: String,
    dims: Vec<u32>,
    /// Flat coordinate buffer, `num_modes` entries per nonzero.
    coords: Vec<u32>,
    values: Vec<f64>,
}

impl SparseTensorCOO {
    /// Builds a tensor from raw entries, merging duplicate coordinates by
    /// summation (first occurrence keeps its position).
    pub fn from_entries(
        name: impl Into<String>,
        dims: Vec<u32>,
        entries: Vec<(Vec<u32>, f64)>,
    ) -> Result<Self, TensorError> {
        let n = dims.len();
        if n < 2 {
            return Err(TensorError::InvalidSpec(format!(
                "a tensor needs at least 2 modes, got {n}"
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(TensorError::InvalidSpec("zero-length mode".into()));
        }
        let mut coords = Vec::with_capacity(entries.len() * n);
        let mut values = Vec::with_capacity(entries.len());
        let mut seen: HashMap<Vec<u32>, usize> = HashMap::with_capacity(entries.len());
        for (tuple, value) in entries {
            if tuple.len() != n {
                return Err(TensorError::InvalidSpec(format!(
                    "entry has {} coordinates, tensor has {n} modes",
                    tuple.len()
                )));
            }
            for (k, (&c, &d)) in tuple.iter().zip(dims.iter()).enumerate() {
                if c >= d {
                    return Err(TensorError::InvalidSpec(format!(
                        "coordinate {c} out of range for mode {k} (dim {d})"
                    )));
                }
            }
            match seen.get(&tuple) {
                Some(&slot) => values[slot] += value,
                None => {
                    seen.insert(tuple.clone(), values.len());
                    coords.extend_from_slice(&tuple);
                    values.push(value);
                }
            }
        }
        Ok(SparseTensorCOO {
            name: name.into(),
            dims,
            coords,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    /// Nonzero count |T|.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Coordinates of entry `i`, one per mode.
    pub fn entry_coords(&self, i: usize) -> &[u32] {
        let n = self.num_modes();
        &self.coords[i * n..(i + 1) * n]
    }

    pub fn entry_value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.nnz()).map(move |i| (self.entry_coords(i), self.entry_value(i)))
    }

    /// Re-checks every structural invariant; used by property tests.
    pub fn check_invariants(&self) -> Result<(), TensorError> {
        let n = self.num_modes();
        if self.coords.len() != self.values.len() * n {
            return Err(TensorError::InvalidSpec(
                "coordinate buffer length mismatch".into(),
            ));
        }
        let mut seen = HashMap::new();
        for i in 0..self.nnz() {
            let tuple = self.entry_coords(i);
            for (k, (&c, &d)) in tuple.iter().zip(self.dims.iter()).enumerate() {
                if c >= d {
                    return Err(TensorError::InvalidSpec(format!(
                        "entry {i}: coordinate {c} out of range for mode {k} (dim {d})"
                    )));
                }
            }
            if seen.insert(tuple.to_vec(), i).is_some() {
                return Err(TensorError::InvalidSpec(format!(
                    "duplicate coordinate tuple at entry {i}"
                )));
            }
            if !self.values[i].is_finite() {
                return Err(TensorError::InvalidSpec(format!(
                    "non-finite value at entry {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Dense factor matrix for one mode, row-major `rows x rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    pub mode: usize,
    pub rows: usize,
    pub rank: usize,
    pub values: Vec<f64>,
}

impl FactorMatrix {
    pub fn zeros(mode: usize, rows: usize, rank: usize) -> Self {
        FactorMatrix {
            mode,
            rows,
            rank,
            values: vec![0.0; rows * rank],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.rank..(r + 1) * self.rank]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.rank..(r + 1) * self.rank]
    }
}

/// Recipe for a deterministic synthetic tensor.
///
/// `skew` is a per-mode Zipf exponent over row indices: 0 samples uniformly,
/// larger values concentrate accesses on low indices and raise factor-row
/// reuse, which is what drives cache hit rate in the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub dims: Vec<u32>,
    pub nnz: u64,
    #[serde(default)]
    pub skew: SkewSpec,
    #[serde(default)]
    pub seed: u64,
}

/// Zipf exponent, either one value for all modes or one per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SkewSpec {
    Uniform(f64),
    PerMode(Vec<f64>),
}

impl Default for SkewSpec {
    fn default() -> Self {
        SkewSpec::Uniform(0.0)
    }
}

impl SkewSpec {
    pub fn per_mode(&self, num_modes: usize) -> Result<Vec<f64>, TensorError> {
        let skews = match self {
            SkewSpec::Uniform(s) => vec![*s; num_modes],
            SkewSpec::PerMode(v) => {
                if v.len() != num_modes {
                    return Err(TensorError::InvalidSpec(format!(
                        "{} skew entries for {} modes",
                        v.len(),
                        num_modes
                    )));
                }
                v.clone()
            }
        };
        if skews.iter().any(|&s| !(s >= 0.0)) {
            return Err(TensorError::InvalidSpec("skew must be >= 0".into()));
        }
        Ok(skews)
    }
}

/// Parses FROSTT-style `.tns` text: 1-based indices, one entry per line.
///
/// Dims default to the per-mode coordinate maxima; `dims_override` pins them
/// instead (entries beyond the override are rejected). Duplicate coordinates
/// merge by summation.
pub fn parse_frostt<R: BufRead>(
    reader: R,
    name: impl Into<String>,
    dims_override: Option<&[u32]>,
) -> Result<SparseTensorCOO, TensorError> {
    let mut entries: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut num_modes: Option<usize> = None;
    let mut maxima: Vec<u32> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let n = match num_modes {
            Some(n) => {
                if tokens.len() != n + 1 {
                    return Err(TensorError::Parse {
                        line: line_no,
                        msg: format!("expected {} tokens, found {}", n + 1, tokens.len()),
                    });
                }
                n
            }
            None => {
                if tokens.len() < 3 {
                    return Err(TensorError::Parse {
                        line: line_no,
                        msg: format!(
                            "expected at least 2 indices and a value, found {} tokens",
                            tokens.len()
                        ),
                    });
                }
                let n = tokens.len() - 1;
                num_modes = Some(n);
                maxima = vec![0; n];
                n
            }
        };
        let mut tuple = Vec::with_capacity(n);
        for (k, tok) in tokens[..n].iter().enumerate() {
            let one_based: u64 = tok.parse().map_err(|_| TensorError::Parse {
                line: line_no,
                msg: format!("index '{tok}' for mode {k} is not an integer"),
            })?;
            if one_based < 1 {
                return Err(TensorError::Parse {
                    line: line_no,
                    msg: format!("index {one_based} for mode {k} must be >= 1"),
                });
            }
            if one_based > u32::MAX as u64 {
                return Err(TensorError::Parse {
                    line: line_no,
                    msg: format!("index {one_based} for mode {k} is too large"),
                });
            }
            let zero_based = (one_based - 1) as u32;
            maxima[k] = maxima[k].max(one_based as u32);
            tuple.push(zero_based);
        }
        let value: f64 = tokens[n].parse().map_err(|_| TensorError::Parse {
            line: line_no,
            msg: format!("value '{}' is not a number", tokens[n]),
        })?;
        if !value.is_finite() {
            return Err(TensorError::Parse {
                line: line_no,
                msg: format!("value '{}' is not finite", tokens[n]),
            });
        }
        entries.push((tuple, value));
    }
    let num_modes = num_modes.ok_or_else(|| TensorError::Parse {
        line: 0,
        msg: "no entries found".into(),
    })?;
    let dims = match dims_override {
        Some(d) => {
            if d.len() != num_modes {
                return Err(TensorError::InvalidSpec(format!(
                    "dims override has {} modes, data has {num_modes}",
                    d.len()
                )));
            }
            d.to_vec()
        }
        None => maxima,
    };
    SparseTensorCOO::from_entries(name, dims, entries)
}

/// Writes the tensor back out in the same `.tns` format (1-based indices).
/// Values print in shortest round-trip form, so parse(serialize(t)) == t.
pub fn serialize_tns<W: Write>(tensor: &SparseTensorCOO, mut w: W) -> std::io::Result<()> {
    for (coords, value) in tensor.entries() {
        for &c in coords {
            write!(w, "{} ", c as u64 + 1)?;
        }
        writeln!(w, "{value}")?;
    }
    Ok(())
}

/// Cumulative Zipf sampler over `0..dim` with exponent `skew`.
struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    fn new(dim: u32, skew: f64) -> Self {
        let mut cdf = Vec::with_capacity(dim as usize);
        let mut acc = 0.0;
        for i in 0..dim {
            acc += 1.0 / ((i as f64) + 1.0).powf(skew);
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        ZipfSampler { cdf }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u) as u32
    }
}

/// Generates a deterministic synthetic tensor: exactly `nnz` unique
/// coordinate tuples, per-mode index distribution per the skew, values
/// uniform in [0, 1). Entries come out sorted lexicographically.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SparseTensorCOO, TensorError> {
    let n = spec.dims.len();
    if n < 2 {
        return Err(TensorError::InvalidSpec(format!(
            "a tensor needs at least 2 modes, got {n}"
        )));
    }
    if spec.dims.iter().any(|&d| d == 0) {
        return Err(TensorError::InvalidSpec("zero-length mode".into()));
    }
    let skews = spec.skew.per_mode(n)?;
    let capacity: u128 = spec.dims.iter().map(|&d| d as u128).product();
    if spec.nnz as u128 > capacity {
        return Err(TensorError::Capacity {
            requested: spec.nnz,
            capacity,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut tuples: Vec<Vec<u32>>;
    if spec.nnz as u128 == capacity {
        // Saturated: the full grid, no sampling needed.
        tuples = Vec::with_capacity(spec.nnz as usize);
        let mut cur = vec![0u32; n];
        loop {
            tuples.push(cur.clone());
            let mut k = n;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                cur[k] += 1;
                if cur[k] < spec.dims[k] {
                    break;
                }
                cur[k] = 0;
                if k == 0 {
                    k = usize::MAX; // odometer wrapped; done
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
    } else {
        let samplers: Vec<Option<ZipfSampler>> = spec
            .dims
            .iter()
            .zip(skews.iter())
            .map(|(&d, &s)| (s > 0.0).then(|| ZipfSampler::new(d, s)))
            .collect();
        let mut seen: std::collections::HashSet<Vec<u32>> =
            std::collections::HashSet::with_capacity(spec.nnz as usize);
        tuples = Vec::with_capacity(spec.nnz as usize);
        while (tuples.len() as u64) < spec.nnz {
            let tuple: Vec<u32> = (0..n)
                .map(|k| match &samplers[k] {
                    Some(z) => z.sample(&mut rng),
                    None => rng.gen_range(0..spec.dims[k]),
                })
                .collect();
            if seen.insert(tuple.clone()) {
                tuples.push(tuple);
            }
        }
    }
    tuples.sort_unstable();
    let entries: Vec<(Vec<u32>, f64)> = tuples.into_iter().map(|t| (t, rng.gen::<f64>())).collect();
    SparseTensorCOO::from_entries(
        format!("synthetic-{}", spec.seed),
        spec.dims.clone(),
        entries,
    )
}

/// One factor matrix per mode, values uniform in [0, 1), deterministic in
/// `seed` (each mode draws from its own stream).
pub fn init_factors(tensor: &SparseTensorCOO, rank: usize, seed: u64) -> Vec<FactorMatrix> {
    assert!(rank >= 1, "rank must be >= 1");
    tensor
        .dims()
        .iter()
        .enumerate()
        .map(|(mode, &dim)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(mode as u64);
            let values = (0..dim as usize * rank).map(|_| rng.gen::<f64>()).collect();
            FactorMatrix {
                mode,
                rows: dim as usize,
                rank,
                values,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<SparseTensorCOO, TensorError> {
        parse_frostt(Cursor::new(text), "t", None)
    }

    #[test]
    fn parses_single_line() {
        let t = parse("1 2 1 3.0\n").unwrap();
        assert_eq!(t.dims(), &[1, 2, 1]);
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.entry_coords(0), &[0, 1, 0]);
        assert_eq!(t.entry_value(0), 3.0);
    }

    #[test]
    fn merges_duplicates_by_summation() {
        let t = parse("1 1 1 2.0\n1 1 1 3.0\n").unwrap();
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.entry_coords(0), &[0, 0, 0]);
        assert_eq!(t.entry_value(0), 5.0);
    }

    #[test]
    fn rejects_malformed_value() {
        let err = parse("1 2 x\n").unwrap_err();
        match err {
            TensorError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_zero_index_and_inconsistent_mode_count() {
        assert!(matches!(
            parse("0 1 1 1.0\n"),
            Err(TensorError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("1 1 1 1.0\n1 1 2.0\n"),
            Err(TensorError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let t = parse("# header\n\n2 2 2 1.5\n").unwrap();
        assert_eq!(t.dims(), &[2, 2, 2]);
        assert_eq!(t.nnz(), 1);
    }

    #[test]
    fn dims_override_pins_shape() {
        let t = parse_frostt(Cursor::new("1 1 1.0\n"), "t", Some(&[4, 5])).unwrap();
        assert_eq!(t.dims(), &[4, 5]);
        let err = parse_frostt(Cursor::new("5 6 1.0\n"), "t", Some(&[4, 5])).unwrap_err();
        assert!(matches!(err, TensorError::InvalidSpec(_)));
    }

    #[test]
    fn saturated_synthetic_is_the_full_grid() {
        let spec = SyntheticSpec {
            dims: vec![4, 4, 4],
            nnz: 64,
            skew: SkewSpec::Uniform(0.0),
            seed: 7,
        };
        let t = generate_synthetic(&spec).unwrap();
        assert_eq!(t.nnz(), 64);
        t.check_invariants().unwrap();
        // All 64 coordinates present, in lexicographic order.
        let mut expected = Vec::new();
        for a in 0..4u32 {
            for b in 0..4u32 {
                for c in 0..4u32 {
                    expected.push(vec![a, b, c]);
                }
            }
        }
        let got: Vec<Vec<u32>> = (0..64).map(|i| t.entry_coords(i).to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec {
            dims: vec![4, 4, 4],
            nnz: 64,
            skew: SkewSpec::Uniform(0.0),
            seed: 7,
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn skew_concentrates_mode_indices() {
        let base = SyntheticSpec {
            dims: vec![100, 100, 100],
            nnz: 1000,
            skew: SkewSpec::Uniform(0.0),
            seed: 1,
        };
        let skewed = SyntheticSpec {
            skew: SkewSpec::Uniform(1.2),
            ..base.clone()
        };
        let top_share = |t: &SparseTensorCOO| {
            let mut hist = vec![0u32; 100];
            for (coords, _) in t.entries() {
                hist[coords[0] as usize] += 1;
            }
            *hist.iter().max().unwrap() as f64 / t.nnz() as f64
        };
        let uniform = top_share(&generate_synthetic(&base).unwrap());
        let zipf = top_share(&generate_synthetic(&skewed).unwrap());
        assert!(
            zipf > uniform,
            "expected skewed top share {zipf} > uniform {uniform}"
        );
    }

    #[test]
    fn nnz_beyond_capacity_is_rejected() {
        let spec = SyntheticSpec {
            dims: vec![2, 2],
            nnz: 5,
            skew: SkewSpec::Uniform(0.0),
            seed: 0,
        };
        assert!(matches!(
            generate_synthetic(&spec),
            Err(TensorError::Capacity { .. })
        ));
    }

    #[test]
    fn factors_match_shapes_and_are_deterministic() {
        let t = SparseTensorCOO::from_entries(
            "t",
            vec![5, 3, 7],
            vec![(vec![0, 0, 0], 1.0)],
        )
        .unwrap();
        let f = init_factors(&t, 16, 0);
        assert_eq!(f.len(), 3);
        for (mode, m) in f.iter().enumerate() {
            assert_eq!(m.mode, mode);
            assert_eq!(m.rows as u32, t.dims()[mode]);
            assert_eq!(m.rank, 16);
            assert_eq!(m.values.len(), m.rows * 16);
            assert!(m.values.iter().all(|v| (0.0..1.0).contains(v)));
        }
        assert_eq!(f, init_factors(&t, 16, 0));

        let t2 = SparseTensorCOO::from_entries("t2", vec![2, 3], vec![(vec![0, 0], 1.0)]).unwrap();
        let f2 = init_factors(&t2, 2, 5);
        assert_eq!((f2[0].rows, f2[0].rank), (2, 2));
        assert_eq!((f2[1].rows, f2[1].rank), (3, 2));
    }

    #[test]
    fn tns_round_trip_is_exact() {
        let spec = SyntheticSpec {
            dims: vec![9, 5, 11],
            nnz: 40,
            skew: SkewSpec::PerMode(vec![0.7, 0.0, 1.3]),
            seed: 99,
        };
        let t = generate_synthetic(&spec).unwrap();
        let mut buf = Vec::new();
        serialize_tns(&t, &mut buf).unwrap();
        let back = parse_frostt(Cursor::new(&buf), t.name(), Some(t.dims())).unwrap();
        assert_eq!(back.dims(), t.dims());
        assert_eq!(back.nnz(), t.nnz());
        for i in 0..t.nnz() {
            assert_eq!(back.entry_coords(i), t.entry_coords(i));
            assert_eq!(back.entry_value(i).to_bits(), t.entry_value(i).to_bits());
        }
    }
}
