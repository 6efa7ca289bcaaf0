//! Per-bin frequency-domain model of the whole link.
//!
//! `assemble` samples the scenario onto the paired grid: channel spectrum
//! samples, interference-plus-noise matrix densities, and the source spectra
//! evaluated at the bin's normalized frequency. Everything downstream — the
//! widely linear receiver, the MSE evaluators, and the transmit-energy
//! allocation — consumes this model.

use crate::numerics::{CMatrix, NumericsError, C64};
use crate::scenario::{Scenario, ScenarioError};
use crate::spectra::{
    build_grid, noise_matrix_psd, vft, BinSide, FrequencyGrid, InterferenceComponent,
    SpectraError,
};
use thiserror::Error;

/// Solver-path errors shared by the receiver and transmitter stages.
#[derive(Debug, Clone, Error)]
pub enum LinkError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("MSE integrand is negative at f = {freq}: {value:.3e} (assembly bug)")]
    NegativeIntegrand { freq: f64, value: f64 },
    #[error("per-bin allocation did not converge within {iterations} iterations at f = {freq}")]
    NoConvergence { freq: f64, iterations: usize },
    #[error("no bin can carry signal (all channel/source products vanish)")]
    DegenerateProblem,
    #[error("power budget {requested:.3e} unreachable; maximum at the search floor is {available:.3e}")]
    Infeasible { requested: f64, available: f64 },
    #[error("multiplier search failed to match the power budget (residual {residual:.3e})")]
    PowerMatchFailed { residual: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// One signed frequency of a bin: channel samples, noise density, source PSD.
#[derive(Debug, Clone)]
pub struct SideModel {
    /// Channel spectrum samples at the retained shifts.
    pub h: Vec<C64>,
    /// Interference-plus-noise matrix density (Hermitian PD).
    pub rn: CMatrix,
    /// Source power spectrum `M(fT)` at this side.
    pub m: f64,
}

/// A mirrored frequency pair with the source coupling between the two sides.
#[derive(Debug, Clone)]
pub struct BinModel {
    pub xi: f64,
    pub pos: SideModel,
    pub neg: SideModel,
    /// Complementary source spectrum `M~(xi T)` (even in frequency).
    pub m_tilde: C64,
    /// Impropriety `k(xi T)` in `[0, 1]`.
    pub k: f64,
}

/// The sampled link: grid plus per-pair model data (same index order).
#[derive(Debug, Clone)]
pub struct LinkModel {
    pub grid: FrequencyGrid,
    pub bins: Vec<BinModel>,
    /// White-noise level, kept for simulation.
    pub n0: f64,
}

impl LinkModel {
    pub fn symbol_period(&self) -> f64 {
        self.grid.spec.symbol_period
    }

    pub fn delta_f(&self) -> f64 {
        self.grid.delta_f()
    }

    /// Source symbol power recovered from the grid samples:
    /// `sum T (M(fT) + M(-fT)) df`.
    pub fn sampled_symbol_power(&self) -> f64 {
        let t = self.symbol_period();
        self.bins.iter().map(|b| t * (b.pos.m + b.neg.m) * self.delta_f()).sum()
    }
}

fn side_model(scenario: &Scenario, side: &BinSide) -> Result<SideModel, LinkError> {
    let t = scenario.grid.symbol_period;
    let components: Vec<InterferenceComponent<'_>> = scenario
        .noise
        .interferers
        .iter()
        .map(|i| InterferenceComponent {
            pulse: &i.pulse,
            symbol_level: i.symbol_level,
            comp_symbol_level: i.comp_symbol_level,
            rate_divisor: i.rate_divisor,
        })
        .collect();
    let rn = noise_matrix_psd(scenario.noise.n0, &components, side, t)?;
    let h = vft(&scenario.channel.ctft, side).values;
    let m = scenario.source.psd(side.freq * t).max(0.0);
    Ok(SideModel { h, rn, m })
}

/// Sample the scenario onto the paired grid.
pub fn assemble(scenario: &Scenario) -> Result<LinkModel, LinkError> {
    scenario.validate()?;
    let grid = build_grid(scenario.grid)?;
    let t = scenario.grid.symbol_period;
    let bins = grid
        .pairs
        .iter()
        .map(|pair| {
            Ok(BinModel {
                xi: pair.xi,
                pos: side_model(scenario, &pair.pos)?,
                neg: side_model(scenario, &pair.neg)?,
                m_tilde: scenario.source.comp_psd(pair.xi * t),
                k: scenario.source.impropriety(pair.xi * t),
            })
        })
        .collect::<Result<Vec<_>, LinkError>>()?;
    Ok(LinkModel { grid, bins, n0: scenario.noise.n0 })
}

/// Transmit spectrum samples for every bin pair: `(values at +xi, at -xi)`.
#[derive(Debug, Clone)]
pub struct TxSpectrum {
    pub pairs: Vec<(Vec<C64>, Vec<C64>)>,
}

impl TxSpectrum {
    pub fn zeros(model: &LinkModel) -> Self {
        let pairs = model
            .grid
            .pairs
            .iter()
            .map(|p| {
                (vec![C64::new(0.0, 0.0); p.pos.len()], vec![C64::new(0.0, 0.0); p.neg.len()])
            })
            .collect();
        Self { pairs }
    }

    /// Average transmit power of this spectrum:
    /// `(1/T) sum (M(fT) |s(f)|^2 + M(-fT) |s(-f)|^2) df`.
    pub fn average_power(&self, model: &LinkModel) -> f64 {
        let t = model.symbol_period();
        let df = model.delta_f();
        self.pairs
            .iter()
            .zip(&model.bins)
            .map(|((sp, sn), bin)| {
                let ep: f64 = sp.iter().map(|z| z.norm_sqr()).sum();
                let en: f64 = sn.iter().map(|z| z.norm_sqr()).sum();
                (bin.pos.m * ep + bin.neg.m * en) * df / t
            })
            .sum()
    }

    /// Per-pair energy densities `(|s(+xi)|^2, |s(-xi)|^2)`.
    pub fn energy_pairs(&self) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .map(|(sp, sn)| {
                (sp.iter().map(|z| z.norm_sqr()).sum(), sn.iter().map(|z| z.norm_sqr()).sum())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        ChannelSpec, NoiseSpec, PowerConstraint, Scenario, SosSequenceSpec,
    };
    use crate::spectra::GridSpec;

    fn simple_scenario() -> Scenario {
        Scenario {
            grid: GridSpec::new(0.625, 1.0, 8).unwrap(),
            source: SosSequenceSpec::unbalanced_qam(0.9, 0.1).unwrap(),
            channel: ChannelSpec::flat(C64::new(1.0, 0.0), 0.625),
            noise: NoiseSpec { n0: 0.25, interferers: vec![] },
            power: PowerConstraint::new(1.0).unwrap(),
        }
    }

    #[test]
    fn assemble_matches_grid_shapes() {
        let model = assemble(&simple_scenario()).unwrap();
        assert_eq!(model.bins.len(), 8);
        for (bin, pair) in model.bins.iter().zip(&model.grid.pairs) {
            assert_eq!(bin.pos.h.len(), pair.pos.len());
            assert_eq!(bin.neg.rn.rows(), pair.neg.len());
            assert!((bin.k - 0.8).abs() < 1e-12);
            assert!((bin.pos.m - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_symbol_power_matches_flat_source() {
        let model = assemble(&simple_scenario()).unwrap();
        assert!((model.sampled_symbol_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_spectrum_has_zero_power() {
        let model = assemble(&simple_scenario()).unwrap();
        let s = TxSpectrum::zeros(&model);
        assert_eq!(s.average_power(&model), 0.0);
    }
}
