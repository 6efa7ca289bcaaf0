//! Frequency-grid construction and per-bin spectral bookkeeping.
//!
//! A bandwidth/rate pair `(B, 1/T)` fixes the Nyquist interval
//! `F = [-1/(2T), 1/(2T))` and the excess bandwidth `beta = 2BT - 1`. A
//! band-limited spectrum is represented per frequency `f` in `F` by the
//! vector of its samples at the shifts `f + n/T`; only shifts strictly inside
//! the band `(-B, B)` are retained (a shift landing exactly on the band edge
//! is dropped), so the vector length `N(f)` varies across the interval. The
//! half interval `F+ = [0, 1/(2T))` is discretized into `N` equal bins with
//! midpoints `xi_i = (2i - 1)/(4NT)`, and each bin carries both `+xi_i` and
//! `-xi_i` so the later optimization can couple the mirrored frequencies.
//!
//! On top of the grid this module builds the per-bin matrix spectral
//! densities: the rank-one auto and complementary densities of a linearly
//! modulated sequence, the interference-plus-noise density (white noise plus
//! independent proper linearly modulated interferers, possibly at a faster
//! commensurate symbol rate), and the 2x2-block augmented density that joins
//! a frequency with its mirror to capture conjugate correlation.
//!
//! # Example
//!
//! ```
//! use jointwave_core::spectra::{build_grid, GridSpec};
//!
//! // 25% excess bandwidth: only bins near the interval edge keep two shifts
//! let grid = build_grid(GridSpec::new(0.625, 1.0, 4).unwrap()).unwrap();
//! let lengths: Vec<usize> = grid.pairs.iter().map(|p| p.pos.len()).collect();
//! assert_eq!(lengths, vec![1, 1, 1, 2]);
//! ```

use crate::numerics::{backward_identity, conj_reversed, CMatrix, C64};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SpectraError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("interferer declares a nonzero complementary symbol level ({0:.3e})")]
    NotProper(f64),
    #[error("interferer symbol rate is not commensurate: rate divisor {0}")]
    NonCommensurateRates(u32),
    #[error("bad tabulated spectrum: {0}")]
    BadTable(String),
}

/// Bandwidth/rate pair plus the number of bins per half Nyquist interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// One-sided bandwidth B in Hz.
    pub bandwidth: f64,
    /// Symbol period T in seconds.
    pub symbol_period: f64,
    /// Bins per half Nyquist interval.
    pub bins: usize,
}

impl GridSpec {
    pub fn new(bandwidth: f64, symbol_period: f64, bins: usize) -> Result<Self, SpectraError> {
        if !(bandwidth > 0.0) || !(symbol_period > 0.0) {
            return Err(SpectraError::InvalidSpec(format!(
                "bandwidth and symbol period must be positive (got B={bandwidth}, T={symbol_period})"
            )));
        }
        if bins < 2 {
            return Err(SpectraError::InvalidSpec(format!("need at least 2 bins, got {bins}")));
        }
        let spec = Self { bandwidth, symbol_period, bins };
        if spec.excess_bandwidth() < 0.0 {
            return Err(SpectraError::InvalidSpec(format!(
                "band must cover the symbol rate: 2BT - 1 = {} < 0",
                spec.excess_bandwidth()
            )));
        }
        Ok(spec)
    }

    /// Excess bandwidth `beta = 2BT - 1 >= 0`.
    pub fn excess_bandwidth(&self) -> f64 {
        2.0 * self.bandwidth * self.symbol_period - 1.0
    }

    /// Number of shifts on each side of the center: `L = ceil(beta/2)`.
    pub fn arm(&self) -> i64 {
        (self.excess_bandwidth() / 2.0).ceil() as i64
    }

    /// Half the Nyquist interval: `1/(2T)`.
    pub fn nyquist_half(&self) -> f64 {
        0.5 / self.symbol_period
    }

    /// Bin width `1/(2NT)` of the half-interval discretization.
    pub fn bin_width(&self) -> f64 {
        0.5 / (self.bins as f64 * self.symbol_period)
    }
}

/// One signed frequency of a bin pair with its retained spectral shifts.
#[derive(Debug, Clone)]
pub struct BinSide {
    /// The bin frequency `f` (midpoint, signed).
    pub freq: f64,
    /// Retained shift indices `n` (ascending); the represented frequencies
    /// are `f + n/T`.
    pub shifts: Vec<i64>,
    /// The represented frequencies `f + n/T`, matching `shifts`.
    pub shift_freqs: Vec<f64>,
}

impl BinSide {
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

/// A `+xi / -xi` frequency pair of the half-interval grid.
#[derive(Debug, Clone)]
pub struct BinPair {
    pub xi: f64,
    pub pos: BinSide,
    pub neg: BinSide,
}

/// Midpoint discretization of the half Nyquist interval, shifts included.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    pub spec: GridSpec,
    pub pairs: Vec<BinPair>,
}

impl FrequencyGrid {
    pub fn delta_f(&self) -> f64 {
        self.spec.bin_width()
    }
}

fn retained_shifts(freq: f64, spec: &GridSpec) -> Vec<i64> {
    let arm = spec.arm();
    let b = spec.bandwidth;
    let t = spec.symbol_period;
    (-arm..=arm)
        .filter(|&n| {
            let xi = freq + n as f64 / t;
            // A shift landing exactly on the band edge is removed.
            xi > -b && xi < b
        })
        .collect()
}

fn bin_side(freq: f64, spec: &GridSpec) -> BinSide {
    let shifts = retained_shifts(freq, spec);
    let shift_freqs = shifts.iter().map(|&n| freq + n as f64 / spec.symbol_period).collect();
    BinSide { freq, shifts, shift_freqs }
}

/// Build the paired midpoint grid with per-side retained shifts.
pub fn build_grid(spec: GridSpec) -> Result<FrequencyGrid, SpectraError> {
    // GridSpec::new already validated; re-validate in case of manual construction.
    let spec = GridSpec::new(spec.bandwidth, spec.symbol_period, spec.bins)?;
    let pairs = (1..=spec.bins)
        .map(|i| {
            let xi = (2 * i - 1) as f64 * spec.bin_width() / 2.0;
            BinPair { xi, pos: bin_side(xi, &spec), neg: bin_side(-xi, &spec) }
        })
        .collect();
    Ok(FrequencyGrid { spec, pairs })
}

/// A deterministic continuous-frequency spectrum with declared support.
///
/// Evaluation is exact-analytic (flat or root-raised-cosine) or tabulated
/// with linear interpolation, and returns exactly zero outside the declared
/// support. A frequency shift and complex scale can be layered on top, which
/// is how interferer carrier offsets and channel gains enter.
#[derive(Debug, Clone)]
pub struct CtftFunction {
    kind: CtftKind,
    /// Declared support (on the shifted axis).
    support: (f64, f64),
    shift: f64,
    scale: C64,
}

#[derive(Debug, Clone)]
enum CtftKind {
    Flat { value: f64 },
    Srrc { rolloff: f64, period: f64 },
    Tabulated { freqs: Vec<f64>, values: Vec<C64> },
}

impl CtftFunction {
    /// Constant value on `[-half_band, half_band]`, zero outside.
    pub fn flat(value: f64, half_band: f64) -> Self {
        Self {
            kind: CtftKind::Flat { value },
            support: (-half_band, half_band),
            shift: 0.0,
            scale: C64::new(1.0, 0.0),
        }
    }

    /// Unit-energy square-root raised cosine spectrum for symbol period `t`.
    pub fn srrc(rolloff: f64, period: f64) -> Self {
        let half = (1.0 + rolloff) / (2.0 * period);
        Self {
            kind: CtftKind::Srrc { rolloff, period },
            support: (-half, half),
            shift: 0.0,
            scale: C64::new(1.0, 0.0),
        }
    }

    /// Piecewise-linear interpolation of `(frequency, value)` nodes.
    /// Frequencies must be strictly increasing; support is the node range.
    pub fn tabulated(freqs: Vec<f64>, values: Vec<C64>) -> Result<Self, SpectraError> {
        if freqs.len() != values.len() {
            return Err(SpectraError::BadTable("frequency/value count mismatch".into()));
        }
        if freqs.len() < 2 {
            return Err(SpectraError::BadTable("need at least two nodes".into()));
        }
        if freqs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SpectraError::BadTable("frequencies must be strictly increasing".into()));
        }
        let support = (freqs[0], *freqs.last().unwrap());
        Ok(Self { kind: CtftKind::Tabulated { freqs, values }, support, shift: 0.0, scale: C64::new(1.0, 0.0) })
    }

    /// Parse the two-column tabulated format: `frequency_hz,"re,im"` per line
    /// (a bare `frequency,re,im` triplet is accepted too). Lines starting
    /// with `#` and blank lines are skipped.
    pub fn from_csv_str(text: &str) -> Result<Self, SpectraError> {
        let mut freqs = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cleaned = line.replace('"', "");
            let fields: Vec<&str> = cleaned.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(SpectraError::BadTable(format!(
                    "line {}: expected frequency and re,im value",
                    lineno + 1
                )));
            }
            let parse = |s: &str| -> Result<f64, SpectraError> {
                s.parse::<f64>()
                    .map_err(|_| SpectraError::BadTable(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            freqs.push(parse(fields[0])?);
            values.push(C64::new(parse(fields[1])?, parse(fields[2])?));
        }
        Self::tabulated(freqs, values)
    }

    /// Shift the spectrum by `df` (the support shifts along with it).
    pub fn frequency_shifted(mut self, df: f64) -> Self {
        self.shift += df;
        self.support = (self.support.0 + df, self.support.1 + df);
        self
    }

    /// Multiply the spectrum by a complex gain.
    pub fn scaled(mut self, gain: C64) -> Self {
        self.scale *= gain;
        self
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn eval(&self, xi: f64) -> C64 {
        if xi < self.support.0 || xi > self.support.1 {
            return C64::new(0.0, 0.0);
        }
        let x = xi - self.shift;
        let base = match &self.kind {
            CtftKind::Flat { value } => C64::new(*value, 0.0),
            CtftKind::Srrc { rolloff, period } => {
                C64::new(srrc_amplitude(x, *rolloff, *period), 0.0)
            }
            CtftKind::Tabulated { freqs, values } => interp_linear(freqs, values, x),
        };
        base * self.scale
    }
}

/// Square root of the raised-cosine characteristic, normalized to unit energy.
fn srrc_amplitude(xi: f64, rolloff: f64, period: f64) -> f64 {
    let a = xi.abs();
    let inner = (1.0 - rolloff) / (2.0 * period);
    let outer = (1.0 + rolloff) / (2.0 * period);
    let rc = if a <= inner {
        1.0
    } else if a <= outer && rolloff > 0.0 {
        0.5 * (1.0 + (std::f64::consts::PI * period / rolloff * (a - inner)).cos())
    } else {
        0.0
    };
    (period * rc).sqrt()
}

fn interp_linear(freqs: &[f64], values: &[C64], x: f64) -> C64 {
    match freqs.binary_search_by(|f| f.partial_cmp(&x).unwrap()) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= freqs.len() => *values.last().unwrap(),
        Err(i) => {
            let (f0, f1) = (freqs[i - 1], freqs[i]);
            let w = (x - f0) / (f1 - f0);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

/// Variable-length spectrum samples of one bin side.
#[derive(Debug, Clone)]
pub struct Vft {
    pub freq: f64,
    pub values: Vec<C64>,
}

impl Vft {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Sample a spectrum at the retained shift frequencies of a bin side.
pub fn vft(f: &CtftFunction, side: &BinSide) -> Vft {
    Vft { freq: side.freq, values: side.shift_freqs.iter().map(|&xi| f.eval(xi)).collect() }
}

/// Per-bin matrix spectral density (auto form is Hermitian PSD; the
/// complementary form couples a frequency with its mirror).
#[derive(Debug, Clone)]
pub struct MatrixPsd {
    pub freq: f64,
    pub matrix: CMatrix,
}

/// Auto and complementary matrix densities of a linearly modulated sequence
/// with symbol spectrum value `m_val = M(fT)`, complementary value
/// `m_tilde = M~(fT)`, and overall pulse spectrum samples at `+-f`:
/// auto `(1/T) M p(f) p(f)^H`, complementary `(1/T) M~ p(f) (J p(-f)*)^H`.
pub fn matrix_psd_linear_mod(
    m_val: f64,
    m_tilde: C64,
    pulse_pos: &Vft,
    pulse_neg: &Vft,
    symbol_period: f64,
) -> (MatrixPsd, MatrixPsd) {
    let inv_t = 1.0 / symbol_period;
    let auto = CMatrix::outer(&pulse_pos.values, &pulse_pos.values).scale(C64::new(m_val * inv_t, 0.0));
    let mirror = conj_reversed(&pulse_neg.values);
    let comp = CMatrix::outer(&pulse_pos.values, &mirror).scale(m_tilde * inv_t);
    (
        MatrixPsd { freq: pulse_pos.freq, matrix: auto },
        MatrixPsd { freq: pulse_pos.freq, matrix: comp },
    )
}

/// One proper linearly modulated interference component.
///
/// `symbol_level` is the flat symbol power spectrum; `rate_divisor = r` means
/// the interferer signals at `r/T` symbols per second, so its cycle period
/// divides the reference period. `comp_symbol_level` must be zero and exists
/// so improper declarations are rejected instead of silently ignored.
#[derive(Debug, Clone)]
pub struct InterferenceComponent<'a> {
    pub pulse: &'a CtftFunction,
    pub symbol_level: f64,
    pub comp_symbol_level: f64,
    pub rate_divisor: u32,
}

/// Interference-plus-noise matrix density at one bin side: `N0 I` plus each
/// interferer's contribution. An interferer at rate `r/T` correlates only
/// shifts whose indices agree modulo `r`; within a class the density is the
/// outer product of its pulse samples scaled by `symbol_level * r / T`.
pub fn noise_matrix_psd(
    n0: f64,
    components: &[InterferenceComponent<'_>],
    side: &BinSide,
    symbol_period: f64,
) -> Result<CMatrix, SpectraError> {
    if !(n0 > 0.0) {
        return Err(SpectraError::InvalidSpec(format!("noise level must be positive, got {n0}")));
    }
    let n = side.len();
    let mut r = CMatrix::identity(n).scale(C64::new(n0, 0.0));
    for comp in components {
        if comp.comp_symbol_level != 0.0 {
            return Err(SpectraError::NotProper(comp.comp_symbol_level));
        }
        if comp.rate_divisor == 0 {
            return Err(SpectraError::NonCommensurateRates(comp.rate_divisor));
        }
        let divisor = comp.rate_divisor as i64;
        let level = comp.symbol_level * comp.rate_divisor as f64 / symbol_period;
        let samples: Vec<C64> = side.shift_freqs.iter().map(|&xi| comp.pulse.eval(xi)).collect();
        for i in 0..n {
            for j in 0..n {
                if (side.shifts[i] - side.shifts[j]).rem_euclid(divisor) == 0 {
                    r[(i, j)] += samples[i] * samples[j].conj() * level;
                }
            }
        }
    }
    Ok(r)
}

/// Join the densities of a mirrored frequency pair into the block matrix
/// `[[R(f), R~(f)], [R~(f)^H, J R(-f)* J]]` of size `N(f) + N(-f)`.
pub fn augment(
    auto_pos: &CMatrix,
    auto_neg: &CMatrix,
    comp: &CMatrix,
) -> Result<CMatrix, SpectraError> {
    let np = auto_pos.rows();
    let nn = auto_neg.rows();
    if !auto_pos.is_square() || !auto_neg.is_square() || comp.rows() != np || comp.cols() != nn {
        return Err(SpectraError::ShapeMismatch(format!(
            "augment expects ({np}x{np}, {nn}x{nn}, {np}x{nn}); got ({}x{}, {}x{}, {}x{})",
            auto_pos.rows(),
            auto_pos.cols(),
            auto_neg.rows(),
            auto_neg.cols(),
            comp.rows(),
            comp.cols()
        )));
    }
    let j = backward_identity(nn);
    let lower_right = j.mul(&auto_neg.conj()).mul(&j);
    let mut out = CMatrix::zeros(np + nn, np + nn);
    for i in 0..np {
        for k in 0..np {
            out[(i, k)] = auto_pos[(i, k)];
        }
        for k in 0..nn {
            out[(i, np + k)] = comp[(i, k)];
            out[(np + k, i)] = comp[(i, k)].conj();
        }
    }
    for i in 0..nn {
        for k in 0..nn {
            out[(np + i, np + k)] = lower_right[(i, k)];
        }
    }
    Ok(out)
}
