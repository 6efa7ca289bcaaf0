//! Source, channel, noise, and power descriptions that make up a scenario.
//!
//! A source is specified by its symbol power spectrum `M(f)` and complementary
//! power spectrum `M~(f)` over the normalized frequency interval
//! `[-1/2, 1/2)`. The derived impropriety frequency function
//! `k(f) = |M~(f)| / sqrt(M(f) M(-f))` (zero where the product vanishes) lies
//! in `[0, 1]`, with `k = 0` for any proper sequence and `k = 1` for an
//! uncorrelated real-valued sequence. The complementary spectrum is even in
//! `f`, so `k` and the phase of `M~` are too.
//!
//! # Example
//!
//! ```
//! use jointwave_core::scenario::SosSequenceSpec;
//!
//! let balanced = SosSequenceSpec::unbalanced_qam(0.5, 0.5).unwrap();
//! assert_eq!(balanced.impropriety(0.2), 0.0);
//!
//! let pam = SosSequenceSpec::unbalanced_qam(1.0, 0.0).unwrap();
//! assert_eq!(pam.impropriety(0.2), 1.0);
//! ```

use crate::numerics::C64;
use crate::spectra::{CtftFunction, GridSpec, SpectraError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ScenarioError {
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
    #[error("invalid power constraint: {0}")]
    InvalidPower(String),
    #[error("bad scenario config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Real spectrum evaluator over normalized frequency.
#[derive(Debug, Clone)]
enum RealSpectrum {
    Flat(f64),
    /// Finite covariance lags `m[0..]`, extended by conjugate symmetry.
    Lags(Vec<C64>),
    Tabulated { freqs: Vec<f64>, values: Vec<f64> },
}

impl RealSpectrum {
    fn eval(&self, f: f64) -> f64 {
        match self {
            RealSpectrum::Flat(v) => *v,
            RealSpectrum::Lags(lags) => {
                // m[-k] = m[k]*, so the sum telescopes into a real series
                let mut acc = lags[0].re;
                for (k, m) in lags.iter().enumerate().skip(1) {
                    let w = 2.0 * std::f64::consts::PI * f * k as f64;
                    acc += 2.0 * (m.re * w.cos() + m.im * w.sin());
                }
                acc
            }
            RealSpectrum::Tabulated { freqs, values } => interp_real(freqs, values, f),
        }
    }
}

/// Complex even spectrum evaluator over normalized frequency.
#[derive(Debug, Clone)]
enum ComplexSpectrum {
    Flat(C64),
    /// Finite complementary lags `m~[0..]`, extended by even symmetry.
    Lags(Vec<C64>),
    Tabulated { freqs: Vec<f64>, values: Vec<C64> },
}

impl ComplexSpectrum {
    fn eval(&self, f: f64) -> C64 {
        match self {
            ComplexSpectrum::Flat(v) => *v,
            ComplexSpectrum::Lags(lags) => {
                // m~[-k] = m~[k] makes the transform even in f
                let mut acc = lags[0];
                for (k, m) in lags.iter().enumerate().skip(1) {
                    let w = 2.0 * std::f64::consts::PI * f * k as f64;
                    acc += m * 2.0 * w.cos();
                }
                acc
            }
            ComplexSpectrum::Tabulated { freqs, values } => interp_complex(freqs, values, f),
        }
    }
}

fn interp_real(freqs: &[f64], values: &[f64], x: f64) -> f64 {
    match freqs.binary_search_by(|f| f.partial_cmp(&x).unwrap()) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= freqs.len() => *values.last().unwrap(),
        Err(i) => {
            let w = (x - freqs[i - 1]) / (freqs[i] - freqs[i - 1]);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

fn interp_complex(freqs: &[f64], values: &[C64], x: f64) -> C64 {
    match freqs.binary_search_by(|f| f.partial_cmp(&x).unwrap()) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= freqs.len() => *values.last().unwrap(),
        Err(i) => {
            let w = (x - freqs[i - 1]) / (freqs[i] - freqs[i - 1]);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

/// Second-order description of the data symbol sequence.
#[derive(Debug, Clone)]
pub struct SosSequenceSpec {
    psd: RealSpectrum,
    comp_psd: ComplexSpectrum,
}

impl SosSequenceSpec {
    /// Uncorrelated QAM symbols with independent in-phase and quadrature
    /// components of the given variances: flat `M = var_i + var_q` and flat
    /// real `M~ = var_i - var_q`.
    pub fn unbalanced_qam(var_i: f64, var_q: f64) -> Result<Self, ScenarioError> {
        if var_i < 0.0 || var_q < 0.0 || var_i + var_q == 0.0 {
            return Err(ScenarioError::InvalidSource(format!(
                "component variances must be nonnegative with positive sum (got {var_i}, {var_q})"
            )));
        }
        Ok(Self {
            psd: RealSpectrum::Flat(var_i + var_q),
            comp_psd: ComplexSpectrum::Flat(C64::new(var_i - var_q, 0.0)),
        })
    }

    /// Flat spectra with an arbitrary (possibly complex) complementary
    /// level: uncorrelated symbols whose squared expectation is `comp`.
    pub fn flat_improper(power: f64, comp: C64) -> Result<Self, ScenarioError> {
        if !(power > 0.0) {
            return Err(ScenarioError::InvalidSource(format!(
                "symbol power must be positive, got {power}"
            )));
        }
        if comp.norm() > power * (1.0 + 1e-12) {
            return Err(ScenarioError::InvalidSource(format!(
                "complementary level {} exceeds the power {power}",
                comp.norm()
            )));
        }
        Ok(Self { psd: RealSpectrum::Flat(power), comp_psd: ComplexSpectrum::Flat(comp) })
    }

    /// Build from finite lag sequences `m[k]` (auto) and `m~[k]`
    /// (complementary), `k = 0..`, extended by their symmetries.
    pub fn from_lags(auto: &[C64], comp: &[C64]) -> Result<Self, ScenarioError> {
        if auto.is_empty() {
            return Err(ScenarioError::InvalidSource("need at least the zero lag".into()));
        }
        let comp = if comp.is_empty() { vec![C64::new(0.0, 0.0)] } else { comp.to_vec() };
        let spec =
            Self { psd: RealSpectrum::Lags(auto.to_vec()), comp_psd: ComplexSpectrum::Lags(comp) };
        spec.validate(512)?;
        Ok(spec)
    }

    /// Build from tabulated spectra on `[-1/2, 1/2]`.
    pub fn tabulated(
        freqs: Vec<f64>,
        psd: Vec<f64>,
        comp: Vec<C64>,
    ) -> Result<Self, ScenarioError> {
        if freqs.len() != psd.len() || freqs.len() != comp.len() || freqs.len() < 2 {
            return Err(ScenarioError::InvalidSource("tabulated spectra length mismatch".into()));
        }
        if freqs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ScenarioError::InvalidSource("frequencies must increase".into()));
        }
        let spec = Self {
            psd: RealSpectrum::Tabulated { freqs: freqs.clone(), values: psd },
            comp_psd: ComplexSpectrum::Tabulated { freqs, values: comp },
        };
        spec.validate(512)?;
        Ok(spec)
    }

    /// Power spectrum `M(f)`, `f` normalized.
    pub fn psd(&self, f: f64) -> f64 {
        self.psd.eval(f)
    }

    /// Complementary power spectrum `M~(f)`.
    pub fn comp_psd(&self, f: f64) -> C64 {
        self.comp_psd.eval(f)
    }

    /// Impropriety frequency function `k(f) = |M~| / sqrt(M(f) M(-f))`,
    /// zero where the product vanishes. Clamped to `[0, 1]` against roundoff.
    pub fn impropriety(&self, f: f64) -> f64 {
        let prod = self.psd(f) * self.psd(-f);
        if prod <= 0.0 {
            return 0.0;
        }
        (self.comp_psd(f).norm() / prod.sqrt()).min(1.0)
    }

    /// Phase of the complementary spectrum in `[0, 2pi)`.
    pub fn phase(&self, f: f64) -> f64 {
        let arg = self.comp_psd(f).arg();
        if arg < 0.0 {
            arg + 2.0 * std::f64::consts::PI
        } else {
            arg
        }
    }

    /// Flat-spectrum view: `(M, M~)` when both spectra are frequency-flat
    /// (independent symbols), which is what the time-domain simulator can
    /// synthesize directly.
    pub fn as_flat(&self) -> Option<(f64, C64)> {
        match (&self.psd, &self.comp_psd) {
            (RealSpectrum::Flat(m), ComplexSpectrum::Flat(mt)) => Some((*m, *mt)),
            _ => None,
        }
    }

    /// Symbol power `m[0]`, the integral of `M` over one period.
    pub fn symbol_power(&self) -> f64 {
        match &self.psd {
            RealSpectrum::Flat(v) => *v,
            RealSpectrum::Lags(lags) => lags[0].re,
            RealSpectrum::Tabulated { freqs, values } => {
                let mut acc = 0.0;
                for i in 1..freqs.len() {
                    acc += 0.5 * (values[i] + values[i - 1]) * (freqs[i] - freqs[i - 1]);
                }
                acc
            }
        }
    }

    /// Check nonnegativity of `M`, evenness of `M~`, and the bound
    /// `|M~(f)|^2 <= M(f) M(-f)` on a probe grid.
    pub fn validate(&self, probes: usize) -> Result<(), ScenarioError> {
        for i in 0..probes {
            let f = -0.5 + (i as f64 + 0.5) / probes as f64;
            let m = self.psd(f);
            if m < -1e-12 {
                return Err(ScenarioError::InvalidSource(format!(
                    "power spectrum negative at f={f}: {m}"
                )));
            }
            let mt = self.comp_psd(f);
            let mtm = self.comp_psd(-f);
            if (mt - mtm).norm() > 1e-9 * (1.0 + mt.norm()) {
                return Err(ScenarioError::InvalidSource(format!(
                    "complementary spectrum must be even in f (f={f})"
                )));
            }
            let bound = self.psd(f).max(0.0) * self.psd(-f).max(0.0);
            if mt.norm_sqr() > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(ScenarioError::InvalidSource(format!(
                    "complementary spectrum exceeds the admissible bound at f={f}: |M~|^2={} > {}",
                    mt.norm_sqr(),
                    bound
                )));
            }
        }
        Ok(())
    }
}

/// Impropriety frequency function of a source at one normalized frequency.
pub fn impropriety_function(spec: &SosSequenceSpec, f: f64) -> f64 {
    spec.impropriety(f)
}

/// Unit-energy square-root raised cosine spectrum for symbol period `t`.
pub fn srrc_ctft(rolloff: f64, t: f64) -> Result<CtftFunction, ScenarioError> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(ScenarioError::BadConfig(format!("rolloff must be in [0,1], got {rolloff}")));
    }
    if !(t > 0.0) {
        return Err(ScenarioError::BadConfig(format!("symbol period must be positive, got {t}")));
    }
    Ok(CtftFunction::srrc(rolloff, t))
}

/// The band-limited channel response.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub ctft: CtftFunction,
}

impl ChannelSpec {
    /// Frequency-flat complex gain over the full observed band.
    pub fn flat(gain: C64, bandwidth: f64) -> Self {
        Self { ctft: CtftFunction::flat(1.0, bandwidth).scaled(gain) }
    }

    pub fn tabulated(ctft: CtftFunction) -> Self {
        Self { ctft }
    }

    /// The declared support must lie within the observed band.
    pub fn validate(&self, bandwidth: f64) -> Result<(), ScenarioError> {
        let (lo, hi) = self.ctft.support();
        if lo < -bandwidth - 1e-12 || hi > bandwidth + 1e-12 {
            return Err(ScenarioError::InvalidChannel(format!(
                "channel support [{lo}, {hi}] exceeds the band [-{bandwidth}, {bandwidth}]"
            )));
        }
        Ok(())
    }
}

/// One proper linearly modulated interferer.
#[derive(Debug, Clone)]
pub struct InterfererSpec {
    /// Pulse spectrum including any carrier offset.
    pub pulse: CtftFunction,
    /// Flat symbol power level.
    pub symbol_level: f64,
    /// Must be zero; improper interferers are rejected.
    pub comp_symbol_level: f64,
    /// The interferer signals at `rate_divisor / T` symbols per second.
    pub rate_divisor: u32,
}

/// Additive interference-plus-noise description.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    /// White noise spectral level, strictly positive.
    pub n0: f64,
    pub interferers: Vec<InterfererSpec>,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.n0 > 0.0) {
            return Err(ScenarioError::InvalidNoise(format!(
                "white noise level must be positive, got {}",
                self.n0
            )));
        }
        for intf in &self.interferers {
            if intf.comp_symbol_level != 0.0 {
                return Err(ScenarioError::Spectra(SpectraError::NotProper(
                    intf.comp_symbol_level,
                )));
            }
            if intf.rate_divisor == 0 {
                return Err(ScenarioError::Spectra(SpectraError::NonCommensurateRates(0)));
            }
            if intf.symbol_level < 0.0 {
                return Err(ScenarioError::InvalidNoise("negative interferer level".into()));
            }
        }
        Ok(())
    }
}

/// Average transmit power budget.
#[derive(Debug, Clone, Copy)]
pub struct PowerConstraint {
    pub average_power: f64,
}

impl PowerConstraint {
    pub fn new(average_power: f64) -> Result<Self, ScenarioError> {
        if !(average_power > 0.0) {
            return Err(ScenarioError::InvalidPower(format!(
                "average power must be positive, got {average_power}"
            )));
        }
        Ok(Self { average_power })
    }
}

/// Everything the optimizer needs: grid, source, channel, noise, and budget.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridSpec,
    pub source: SosSequenceSpec,
    pub channel: ChannelSpec,
    pub noise: NoiseSpec,
    pub power: PowerConstraint,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.source.validate(256)?;
        self.channel.validate(self.grid.bandwidth)?;
        self.noise.validate()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

/// Scenario file schema.
///
/// The signal-to-noise mapping: the source symbol power `Es` is
/// `var_i + var_q` (or the integrated tabulated spectrum); when
/// `source_esn0_db` is given, `N0 = Es * 10^(-esn0/10)`, and each interferer's
/// symbol level is `N0 * 10^(esn0_db/10)` relative to that noise floor. The
/// power budget defaults to `Es / T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub source: SourceConfig,
    pub channel: ChannelConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub power: PowerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    /// Product `B*T`; the one-sided bandwidth in units of the symbol rate.
    pub b_times_t: f64,
    /// Bins per half Nyquist interval.
    pub n: usize,
    /// Symbol period in seconds (default 1).
    #[serde(default = "default_period")]
    pub t: f64,
}

fn default_period() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceConfig {
    UnbalancedQam { var_i: f64, var_q: f64 },
    /// Flat spectra pinned by impropriety `k` at unit symbol power.
    Impropriety { k: f64 },
    Tabulated { freqs: Vec<f64>, psd: Vec<f64>, comp_re: Vec<f64>, comp_im: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChannelConfig {
    Flat {
        #[serde(default = "default_gain")]
        gain: f64,
        #[serde(default)]
        gain_im: f64,
    },
    Tabulated {
        /// Path to the two-column tabulated spectrum, relative to the scenario file.
        path: String,
    },
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Explicit white-noise level. Exactly one of `n0` / `source_esn0_db`.
    #[serde(default)]
    pub n0: Option<f64>,
    /// Source symbol energy over noise level in dB.
    #[serde(default)]
    pub source_esn0_db: Option<f64>,
    #[serde(default)]
    pub interferers: Vec<InterfererConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfererConfig {
    pub rolloff: f64,
    /// Interferer symbol level over the white-noise level in dB.
    pub esn0_db: f64,
    #[serde(default = "default_divisor")]
    pub rate_divisor: u32,
    /// Carrier offset in Hz.
    #[serde(default)]
    pub spectral_shift: f64,
    /// Must stay zero (proper interferers only).
    #[serde(default)]
    pub comp_level: f64,
}

fn default_divisor() -> u32 {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Average transmit power budget; defaults to `Es / T`.
    #[serde(default)]
    pub p_t: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::BadConfig(e.to_string()))
    }

    /// Resolve the config into a scenario. `read_table` loads tabulated
    /// channel files by path (relative paths are the caller's concern).
    pub fn into_scenario(
        &self,
        read_table: &mut dyn FnMut(&str) -> Result<String, String>,
    ) -> Result<Scenario, ScenarioError> {
        let grid = GridSpec::new(
            self.grid.b_times_t / self.grid.t,
            self.grid.t,
            self.grid.n,
        )?;

        let source = match &self.source {
            SourceConfig::UnbalancedQam { var_i, var_q } => {
                SosSequenceSpec::unbalanced_qam(*var_i, *var_q)?
            }
            SourceConfig::Impropriety { k } => {
                if !(0.0..=1.0).contains(k) {
                    return Err(ScenarioError::BadConfig(format!(
                        "source impropriety must be in [0,1], got {k}"
                    )));
                }
                SosSequenceSpec::unbalanced_qam(0.5 * (1.0 + k), 0.5 * (1.0 - k))?
            }
            SourceConfig::Tabulated { freqs, psd, comp_re, comp_im } => {
                if comp_re.len() != comp_im.len() {
                    return Err(ScenarioError::BadConfig("comp_re/comp_im length mismatch".into()));
                }
                let comp: Vec<C64> =
                    comp_re.iter().zip(comp_im).map(|(&re, &im)| C64::new(re, im)).collect();
                SosSequenceSpec::tabulated(freqs.clone(), psd.clone(), comp)?
            }
        };
        let es = source.symbol_power();

        let n0 = match (self.noise.n0, self.noise.source_esn0_db) {
            (Some(n0), None) => n0,
            (None, Some(db)) => es * 10f64.powf(-db / 10.0),
            (Some(_), Some(_)) => {
                return Err(ScenarioError::BadConfig(
                    "give either noise.n0 or noise.source_esn0_db, not both".into(),
                ))
            }
            (None, None) => {
                return Err(ScenarioError::BadConfig(
                    "noise needs n0 or source_esn0_db".into(),
                ))
            }
        };

        let interferers = self
            .noise
            .interferers
            .iter()
            .map(|ic| {
                let pulse =
                    srrc_ctft(ic.rolloff, grid.symbol_period / ic.rate_divisor.max(1) as f64)?
                        .frequency_shifted(ic.spectral_shift);
                Ok(InterfererSpec {
                    pulse,
                    symbol_level: n0 * 10f64.powf(ic.esn0_db / 10.0),
                    comp_symbol_level: ic.comp_level,
                    rate_divisor: ic.rate_divisor,
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;

        let channel = match &self.channel {
            ChannelConfig::Flat { gain, gain_im } => {
                ChannelSpec::flat(C64::new(*gain, *gain_im), grid.bandwidth)
            }
            ChannelConfig::Tabulated { path } => {
                let text = read_table(path).map_err(ScenarioError::BadConfig)?;
                ChannelSpec::tabulated(CtftFunction::from_csv_str(&text)?)
            }
        };

        let p_t = self.power.p_t.unwrap_or(es / grid.symbol_period);

        let scenario = Scenario {
            grid,
            source,
            channel,
            noise: NoiseSpec { n0, interferers },
            power: PowerConstraint::new(p_t)?,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
