//! Seeded random scenarios and transmit spectra for the self-check command
//! and the property suites.

use crate::link::{LinkModel, TxSpectrum};
use crate::numerics::C64;
use crate::scenario::{
    srrc_ctft, ChannelSpec, InterfererSpec, NoiseSpec, PowerConstraint, Scenario, SosSequenceSpec,
};
use crate::spectra::{CtftFunction, GridSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Draw a random but valid scenario: arm width in `{0, 1, 2}`, one to three
/// proper interferers, flat or tabulated channel, flat or shaped source with
/// a random impropriety profile.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let t = *pick(rng, &[0.5, 1.0, 2.0]);
    let beta = match rng.gen_range(0..3) {
        0 => 0.0,
        1 => rng.gen_range(0.05..=2.0),
        _ => rng.gen_range(2.05..=4.0),
    };
    let b = (1.0 + beta) / (2.0 * t);
    let bins = rng.gen_range(4..=12);
    let grid = GridSpec::new(b, t, bins).expect("random grid is valid by construction");

    let source = if rng.gen_bool(0.5) {
        let k: f64 = rng.gen_range(0.0..=1.0);
        let power = rng.gen_range(0.5..2.0);
        SosSequenceSpec::unbalanced_qam(0.5 * power * (1.0 + k), 0.5 * power * (1.0 - k)).unwrap()
    } else {
        random_shaped_source(rng)
    };

    let channel = if rng.gen_bool(0.5) {
        let mag = rng.gen_range(0.3..2.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        ChannelSpec::flat(C64::from_polar(mag, phase), b)
    } else {
        random_tabulated_channel(rng, b)
    };

    let n0 = rng.gen_range(0.02..0.5);
    let n_intf = rng.gen_range(1..=3);
    let interferers = (0..n_intf)
        .map(|_| {
            let rolloff = rng.gen_range(0.0..=0.5);
            let divisor = if rng.gen_bool(0.25) { 2 } else { 1 };
            let shift = rng.gen_range(-0.3..0.3) / t;
            let level_db = rng.gen_range(0.0..13.0);
            InterfererSpec {
                pulse: srrc_ctft(rolloff, t / divisor as f64)
                    .unwrap()
                    .frequency_shifted(shift),
                symbol_level: n0 * 10f64.powf(level_db / 10.0),
                comp_symbol_level: 0.0,
                rate_divisor: divisor,
            }
        })
        .collect();

    let es = source.symbol_power();
    let p_t = rng.gen_range(0.2..5.0) * es / t;

    Scenario {
        grid,
        source,
        channel,
        noise: NoiseSpec { n0, interferers },
        power: PowerConstraint::new(p_t).unwrap(),
    }
}

/// Tabulated source with a random (possibly asymmetric) power spectrum and a
/// random even impropriety/phase profile. The complementary spectrum is built
/// as `k sqrt(M(f) M(-f)) e^{j phi}` with a small margin so interpolation
/// between nodes cannot break the admissibility bound.
fn random_shaped_source(rng: &mut ChaCha8Rng) -> SosSequenceSpec {
    let half_nodes = 16usize;
    let n_nodes = 2 * half_nodes + 1;
    let freqs: Vec<f64> = (0..n_nodes).map(|i| -0.5 + i as f64 / (n_nodes - 1) as f64).collect();
    let psd: Vec<f64> = (0..n_nodes).map(|_| rng.gen_range(0.05f64..2.0)).collect();
    // even profiles: generate the right half and mirror
    let mut k_half: Vec<f64> = (0..=half_nodes).map(|_| rng.gen_range(0.0f64..1.0)).collect();
    let mut phi_half: Vec<f64> = (0..=half_nodes).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    if rng.gen_bool(0.2) {
        k_half.iter_mut().for_each(|k| *k = 0.0); // occasionally fully proper
    }
    if rng.gen_bool(0.5) {
        phi_half.iter_mut().for_each(|p| *p = 0.0);
    }
    let comp: Vec<C64> = (0..n_nodes)
        .map(|i| {
            let j = i.abs_diff(half_nodes);
            let mirror = 2 * half_nodes - i;
            let bound = (psd[i] * psd[mirror]).sqrt();
            C64::from_polar(0.98 * k_half[j] * bound, phi_half[j])
        })
        .collect();
    SosSequenceSpec::tabulated(freqs, psd, comp).expect("constructed source is admissible")
}

fn random_tabulated_channel(rng: &mut ChaCha8Rng, b: f64) -> ChannelSpec {
    let n_nodes = 33;
    let freqs: Vec<f64> =
        (0..n_nodes).map(|i| -b + 2.0 * b * i as f64 / (n_nodes - 1) as f64).collect();
    let values: Vec<C64> = (0..n_nodes)
        .map(|_| C64::from_polar(rng.gen_range(0.2..1.5), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    ChannelSpec::tabulated(CtftFunction::tabulated(freqs, values).unwrap())
}

/// Random transmit spectrum samples on the model grid, roughly scaled to the
/// power budget.
pub fn random_tx_spectrum(rng: &mut ChaCha8Rng, model: &LinkModel, scale: f64) -> TxSpectrum {
    let pairs = model
        .grid
        .pairs
        .iter()
        .map(|pair| {
            let draw = |rng: &mut ChaCha8Rng, n: usize| -> Vec<C64> {
                (0..n)
                    .map(|_| {
                        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0 * scale
                    })
                    .collect()
            };
            (draw(rng, pair.pos.len()), draw(rng, pair.neg.len()))
        })
        .collect();
    TxSpectrum { pairs }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, options: &'a [T]) -> &'a T {
    &options[rng.gen_range(0..options.len())]
}
