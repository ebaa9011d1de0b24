//! Synthetic problem generation and libsvm-format files.

use l0pd_core::{Error, ProblemData};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// Parameters of the synthetic regression generator.
///
/// Rows of `X` are i.i.d. mean-zero Gaussian with AR(1) correlation
/// `rho^|i-j|` between features; `y = X beta_true + eps` with noise variance
/// chosen to hit the requested signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub snr: f64,
    pub support_fraction: f64,
    pub coef_range: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, p: usize, rho: f64, snr: f64, seed: u64) -> Result<Self, Error> {
        let spec = SyntheticSpec {
            n,
            p,
            rho,
            snr,
            support_fraction: 0.03,
            coef_range: (-1.0, 1.0),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidData("n and p must be >= 1"));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidData("rho must lie in [0, 1)"));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidData("snr must be positive"));
        }
        if !(0.0..=1.0).contains(&self.support_fraction) {
            return Err(Error::InvalidData("support_fraction must lie in [0, 1]"));
        }
        if !(self.coef_range.0 <= self.coef_range.1) {
            return Err(Error::InvalidData("coef_range must be ordered"));
        }
        Ok(())
    }
}

/// Draws `(X, y)` and the ground-truth coefficients.
///
/// The AR(1) recursion `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j` over
/// standard normals `z_j` gives exactly the `rho^|i-j|` feature covariance.
/// The noise scale is `sigma^2 = Var(X beta_true) / snr` with the empirical
/// variance of the noiseless signal, so a zero support yields noiseless
/// zeros. Bit-deterministic for a given spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(ProblemData, Vec<f64>), Error> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let scale = (1.0 - spec.rho * spec.rho).sqrt();
    let mut rows = vec![0.0f64; n * p];
    for i in 0..n {
        let row = &mut rows[i * p..(i + 1) * p];
        let mut prev = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            prev = if j == 0 { z } else { spec.rho * prev + scale * z };
            *x = prev;
        }
    }

    let k = ((spec.support_fraction * p as f64).floor() as usize).min(p);
    let mut support = rand::seq::index::sample(&mut rng, p, k).into_vec();
    support.sort_unstable();
    let mut beta_true = vec![0.0f64; p];
    for &j in &support {
        beta_true[j] = rng.gen_range(spec.coef_range.0..=spec.coef_range.1);
    }

    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let row = &rows[i * p..(i + 1) * p];
        y[i] = support.iter().map(|&j| row[j] * beta_true[j]).sum();
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / n as f64;
    let sigma = (var / spec.snr).sqrt();
    for yi in &mut y {
        let z: f64 = rng.sample(StandardNormal);
        *yi += sigma * z;
    }

    let data = ProblemData::from_rows(n, p, &rows, y)?;
    Ok((data, beta_true))
}

/// IO and parse failures of the file formats.
#[derive(Debug)]
pub enum IoError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<io::Error> for IoError {
    fn from(e: io::Error) -> Self {
        IoError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a dense problem from libsvm text: one sample per line, `label
/// idx:val ...` with 1-based strictly increasing indices. Blank lines and
/// `#` comment lines are skipped. Absent entries are zero; `p` is
/// `expected_p` when given, otherwise the largest index seen.
pub fn load_libsvm(path: impl AsRef<Path>, expected_p: Option<usize>) -> Result<ProblemData, IoError> {
    let text = fs::read_to_string(path)?;
    let mut samples: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label: f64 = tokens
            .next()
            .unwrap()
            .parse()
            .map_err(|_| parse_err(lineno, "invalid label"))?;
        let mut entries = Vec::new();
        let mut prev_idx = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid index {idx_s:?}")))?;
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid value {val_s:?}")))?;
            if idx == 0 || idx <= prev_idx {
                return Err(parse_err(
                    lineno,
                    "indices must be 1-based and strictly increasing",
                ));
            }
            if let Some(p) = expected_p {
                if idx > p {
                    return Err(parse_err(lineno, format!("index {idx} exceeds p = {p}")));
                }
            }
            prev_idx = idx;
            max_idx = max_idx.max(idx);
            entries.push((idx, val));
        }
        samples.push((label, entries));
    }
    let n = samples.len();
    let p = expected_p.unwrap_or(max_idx);
    let mut cols = vec![0.0f64; n * p];
    let mut y = Vec::with_capacity(n);
    for (i, (label, entries)) in samples.into_iter().enumerate() {
        y.push(label);
        for (idx, val) in entries {
            cols[(idx - 1) * n + i] = val;
        }
    }
    ProblemData::from_columns(n, p, cols, y)
        .map_err(|e| parse_err(0, format!("invalid data: {e}")))
}

/// Writes `data` in libsvm text format, preceded by the comment line
/// `# seed=.. rho=.. snr=..` when a spec is given. Values use the shortest
/// representation that round-trips, so `load_libsvm` reproduces the matrix
/// exactly. When `beta_true` is given, a `<path>.beta` sidecar is written
/// with one coefficient per line.
pub fn write_libsvm(
    path: impl AsRef<Path>,
    data: &ProblemData,
    beta_true: Option<&[f64]>,
    spec: Option<&SyntheticSpec>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(s) = spec {
        writeln!(out, "# seed={} rho={} snr={}", s.seed, s.rho, s.snr).unwrap();
    }
    for i in 0..data.n() {
        write!(out, "{}", data.y()[i]).unwrap();
        for j in 0..data.p() {
            let v = data.column(j)[i];
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    if let Some(beta) = beta_true {
        let mut side = String::new();
        for b in beta {
            writeln!(side, "{b}").unwrap();
        }
        let mut side_path = path.as_os_str().to_owned();
        side_path.push(".beta");
        fs::write(side_path, side)?;
    }
    Ok(())
}

/// Reads a `.beta` sidecar (one coefficient per line, `#` comments allowed).
pub fn load_beta(path: impl AsRef<Path>) -> Result<Vec<f64>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut beta = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        beta.push(
            line.parse()
                .map_err(|_| parse_err(lineno + 1, "invalid coefficient"))?,
        );
    }
    Ok(beta)
}

/// Rescales a problem to unit-norm columns and `y / sqrt(n)`.
///
/// For row-i.i.d. designs this makes the sum-form objective match the
/// mean-form (per-sample average) objective, so regularization weights keep
/// the same meaning across sample sizes. Returns the rescaled problem, the
/// original column norms, and the response scale `1 / sqrt(n)`; a coefficient
/// vector `b` fitted on the rescaled problem maps back to original
/// coordinates via [`unstandardize_beta`] as `b_j / (col_scales_j * y_scale)`.
pub fn standardize(data: &ProblemData) -> (ProblemData, Vec<f64>, f64) {
    let (normalized, col_scales) = data.normalize_columns();
    let y_scale = 1.0 / (normalized.n() as f64).sqrt();
    let y: Vec<f64> = normalized.y().iter().map(|v| v * y_scale).collect();
    let mut cols = Vec::with_capacity(normalized.n() * normalized.p());
    for j in 0..normalized.p() {
        cols.extend_from_slice(normalized.column(j));
    }
    let std = ProblemData::from_columns(normalized.n(), normalized.p(), cols, y)
        .expect("shape preserved");
    (std, col_scales, y_scale)
}

/// Maps coefficients fitted on a [`standardize`]d problem back to the
/// original coordinates.
pub fn unstandardize_beta(beta: &[f64], col_scales: &[f64], y_scale: f64) -> Vec<f64> {
    beta.iter()
        .zip(col_scales)
        .map(|(b, c)| b / (c * y_scale))
        .collect()
}

/// Uniform random row and column subsets without replacement, deterministic
/// per seed. Chosen indices keep their original relative order.
pub fn subsample(
    data: &ProblemData,
    n_rows: usize,
    p_cols: usize,
    seed: u64,
) -> Result<ProblemData, Error> {
    if n_rows > data.n() || p_cols > data.p() {
        return Err(Error::InvalidData("subsample larger than data"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = rand::seq::index::sample(&mut rng, data.n(), n_rows).into_vec();
    let mut cols = rand::seq::index::sample(&mut rng, data.p(), p_cols).into_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    data.select(&rows, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let spec = SyntheticSpec::new(20, 30, 0.4, 5.0, 42).unwrap();
        let (d1, b1) = generate_synthetic(&spec).unwrap();
        let (d2, b2) = generate_synthetic(&spec).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(b1, b2);
        let spec2 = SyntheticSpec { seed: 43, ..spec };
        let (d3, _) = generate_synthetic(&spec2).unwrap();
        assert_ne!(d1, d3);
    }

    #[test]
    fn adjacent_column_correlation_tracks_rho() {
        let spec = SyntheticSpec::new(5000, 10, 0.4, 5.0, 1).unwrap();
        let (d, _) = generate_synthetic(&spec).unwrap();
        for j in 0..9 {
            let a = d.column(j);
            let b = d.column(j + 1);
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let corr = dot / (d.col_norm(j) * d.col_norm(j + 1));
            assert!((corr - 0.4).abs() < 0.03, "corr({j}) = {corr}");
        }
    }

    #[test]
    fn rho_zero_gives_near_independent_columns() {
        let spec = SyntheticSpec::new(4000, 8, 0.0, 5.0, 2).unwrap();
        let (d, _) = generate_synthetic(&spec).unwrap();
        let bound = 3.0 / (d.n() as f64).sqrt();
        for j in 0..7 {
            let dot: f64 = d
                .column(j)
                .iter()
                .zip(d.column(j + 1))
                .map(|(x, y)| x * y)
                .sum();
            let corr = dot / (d.col_norm(j) * d.col_norm(j + 1));
            assert!(corr.abs() < bound, "corr({j}) = {corr}");
        }
    }

    #[test]
    fn snr_controls_noise_variance() {
        let spec = SyntheticSpec {
            support_fraction: 0.1,
            ..SyntheticSpec::new(20000, 50, 0.0, 4.0, 3).unwrap()
        };
        let (d, beta) = generate_synthetic(&spec).unwrap();
        let signal = d.predictions(&beta).unwrap();
        let noise: Vec<f64> = d.y().iter().zip(&signal).map(|(y, s)| y - s).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
        };
        let snr_hat = var(&signal) / var(&noise);
        assert!((snr_hat - 4.0).abs() < 0.5, "snr_hat = {snr_hat}");
    }

    #[test]
    fn empty_support_is_noiseless_zero() {
        let spec = SyntheticSpec {
            support_fraction: 0.0,
            ..SyntheticSpec::new(10, 5, 0.0, 5.0, 4).unwrap()
        };
        let (d, beta) = generate_synthetic(&spec).unwrap();
        assert!(beta.iter().all(|b| *b == 0.0));
        assert!(d.y().iter().all(|y| *y == 0.0));
    }

    #[test]
    fn libsvm_parse_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svm");
        fs::write(&path, "# comment\n1 1:0.5 3:2.0\n-1 \n").unwrap();
        let d = load_libsvm(&path, Some(3)).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.p(), 3);
        assert_eq!(d.column(0), &[0.5, 0.0]);
        assert_eq!(d.column(1), &[0.0, 0.0]);
        assert_eq!(d.column(2), &[2.0, 0.0]);
        assert_eq!(d.y(), &[1.0, -1.0]);

        let spec = SyntheticSpec::new(15, 12, 0.4, 5.0, 9).unwrap();
        let (gen, beta) = generate_synthetic(&spec).unwrap();
        let p2 = dir.path().join("g.svm");
        write_libsvm(&p2, &gen, Some(&beta), Some(&spec)).unwrap();
        let back = load_libsvm(&p2, Some(12)).unwrap();
        assert_eq!(gen, back);
        let beta_back = load_beta(dir.path().join("g.svm.beta")).unwrap();
        assert_eq!(beta, beta_back);
    }

    #[test]
    fn libsvm_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.svm");
        fs::write(&path, "1 1:0.5\n1 2:oops\n").unwrap();
        match load_libsvm(&path, None) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        fs::write(&path, "1 3:1.0 2:1.0\n").unwrap();
        assert!(load_libsvm(&path, None).is_err());
        fs::write(&path, "1 4:1.0\n").unwrap();
        assert!(load_libsvm(&path, Some(3)).is_err());
    }

    #[test]
    fn standardize_round_trips_coefficients() {
        let spec = SyntheticSpec::new(40, 6, 0.3, 5.0, 11).unwrap();
        let (d, _) = generate_synthetic(&spec).unwrap();
        let (std, scales, y_scale) = standardize(&d);
        assert_eq!(std.n(), d.n());
        for j in 0..std.p() {
            assert!((std.col_norm(j) - 1.0).abs() < 1e-12);
        }
        assert!((y_scale - (d.n() as f64).sqrt().recip()).abs() < 1e-15);
        // a coefficient vector giving predictions u on the standardized
        // problem maps back to one giving predictions u / y_scale on the raw
        let beta_std = vec![0.5, -1.0, 0.0, 0.25, 0.0, 2.0];
        let beta_raw = unstandardize_beta(&beta_std, &scales, y_scale);
        let u_std = std.predictions(&beta_std).unwrap();
        let u_raw = d.predictions(&beta_raw).unwrap();
        for (us, ur) in u_std.iter().zip(&u_raw) {
            assert!((ur * y_scale - us).abs() < 1e-10);
        }
    }

    #[test]
    fn subsample_deterministic_and_identity() {
        let spec = SyntheticSpec::new(12, 8, 0.0, 5.0, 5).unwrap();
        let (d, _) = generate_synthetic(&spec).unwrap();
        let s1 = subsample(&d, 6, 4, 10).unwrap();
        let s2 = subsample(&d, 6, 4, 10).unwrap();
        assert_eq!(s1, s2);
        let id = subsample(&d, 12, 8, 10).unwrap();
        assert_eq!(id, d);
        assert!(subsample(&d, 13, 8, 10).is_err());
    }
}
