//! End-to-end link design: assemble the model, allocate the transmit
//! spectrum, derive the receiver, and evaluate the MSE.

use crate::link::{assemble, LinkError, LinkModel};
use crate::receiver::{mse_matrix, optimal_receiver, ReceiverSolution};
use crate::scenario::Scenario;
use crate::transmitter::{design_transmitter, KktState, TxSolution};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct DesignOptions {
    /// Relative tolerance of the power-budget match.
    pub power_tol: f64,
    /// Also evaluate the block-matrix MSE as a cross-check.
    pub with_matrix_mse: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { power_tol: 1e-9, with_matrix_mse: false }
    }
}

/// A fully designed link.
#[derive(Debug, Clone)]
pub struct LinkDesign {
    pub model: LinkModel,
    pub tx: TxSolution,
    pub rx: ReceiverSolution,
    /// Block-matrix MSE when requested; must agree with `tx.analytic_mse`.
    pub matrix_mse: Option<f64>,
}

pub fn design_link(scenario: &Scenario, options: &DesignOptions) -> Result<LinkDesign, LinkError> {
    let model = assemble(scenario)?;
    let tx = design_transmitter(&model, scenario.power.average_power, options.power_tol)?;
    let rx = optimal_receiver(&model, &tx.spectrum)?;
    let matrix_mse = if options.with_matrix_mse {
        Some(mse_matrix(&model, &tx.spectrum)?.total)
    } else {
        None
    };
    Ok(LinkDesign { model, tx, rx, matrix_mse })
}

/// Serializable digest of a design.
#[derive(Debug, Clone, Serialize)]
pub struct DesignSummary {
    pub nu: f64,
    pub analytic_mse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_mse: Option<f64>,
    pub power: f64,
    pub power_residual_rel: f64,
    pub max_conjugate_branch: f64,
    pub kkt: KktState,
    pub grid: GridSummary,
    pub bins: Vec<BinSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub bandwidth: f64,
    pub symbol_period: f64,
    pub bins: usize,
    pub excess_bandwidth: f64,
    pub bin_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BinSummary {
    pub xi: f64,
    pub len_pos: usize,
    pub len_neg: usize,
    pub energy_pos: f64,
    pub energy_neg: f64,
    pub mse_density_pos: f64,
    pub mse_density_neg: f64,
    /// Complex samples as `[re, im]` at the retained shifts.
    pub s_pos: Vec<[f64; 2]>,
    pub s_neg: Vec<[f64; 2]>,
    pub w1_pos: Vec<[f64; 2]>,
    pub w1_neg: Vec<[f64; 2]>,
    pub w2_pos: Vec<[f64; 2]>,
    pub w2_neg: Vec<[f64; 2]>,
}

fn complex_pairs(v: &[crate::numerics::C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl LinkDesign {
    pub fn summary(&self) -> DesignSummary {
        let spec = &self.model.grid.spec;
        let bins = self
            .model
            .grid
            .pairs
            .iter()
            .enumerate()
            .zip(self.tx.density.pairs.iter().zip(&self.tx.mse_report.per_bin))
            .map(|((i, pair), (&(a, ah), &(ep, en)))| {
                let (sp, sn) = &self.tx.spectrum.pairs[i];
                let rbin = &self.rx.bins[i];
                BinSummary {
                    xi: pair.xi,
                    len_pos: pair.pos.len(),
                    len_neg: pair.neg.len(),
                    energy_pos: a,
                    energy_neg: ah,
                    mse_density_pos: ep,
                    mse_density_neg: en,
                    s_pos: complex_pairs(sp),
                    s_neg: complex_pairs(sn),
                    w1_pos: complex_pairs(&rbin.w1_pos),
                    w1_neg: complex_pairs(&rbin.w1_neg),
                    w2_pos: complex_pairs(&rbin.w2_pos),
                    w2_neg: complex_pairs(&rbin.w2_neg),
                }
            })
            .collect();
        DesignSummary {
            nu: self.tx.nu,
            analytic_mse: self.tx.analytic_mse,
            matrix_mse: self.matrix_mse,
            power: self.tx.power,
            power_residual_rel: self.tx.power_residual,
            max_conjugate_branch: self.rx.max_w2(),
            kkt: self.tx.kkt.clone(),
            grid: GridSummary {
                bandwidth: spec.bandwidth,
                symbol_period: spec.symbol_period,
                bins: spec.bins,
                excess_bandwidth: spec.excess_bandwidth(),
                bin_width: spec.bin_width(),
            },
            bins,
        }
    }
}
