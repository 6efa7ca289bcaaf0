//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with the measured worst residual. Run with
//! `cargo test -p jointwave-core --test acceptance -- --nocapture`.

use jointwave_core::design::{design_link, DesignOptions};
use jointwave_core::link::assemble;
use jointwave_core::numerics::C64;
use jointwave_core::random::{random_scenario, random_tx_spectrum};
use jointwave_core::receiver::{
    mse_matrix, mse_scalar, mse_scalar_from_s, optimal_receiver, wl_objective,
};
use jointwave_core::scenario::{
    srrc_ctft, ChannelSpec, InterfererSpec, NoiseSpec, PowerConstraint, Scenario, SosSequenceSpec,
};
use jointwave_core::simulate::{run_link, SimConfig};
use jointwave_core::spectra::GridSpec;
use jointwave_core::transmitter::{
    bin_channel_data, design_transmitter, outer_solve, pair_allocation, BinChannelData,
    EnergyDensity, PairParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, detail: String) {
    println!("acceptance {criterion}: PASS ({detail})");
}

/// Reference two-interferer setup: unit-power source with impropriety `k`,
/// flat channel, white noise at the given symbol-energy ratio, and two
/// offset root-raised-cosine interferers 10 dB above the noise floor.
fn reference_scenario(k: f64, esn0_db: f64, bins: usize) -> Scenario {
    let n0 = 10f64.powf(-esn0_db / 10.0);
    let interferer = |shift: f64| InterfererSpec {
        pulse: srrc_ctft(0.25, 1.0).unwrap().frequency_shifted(shift),
        symbol_level: 10.0 * n0,
        comp_symbol_level: 0.0,
        rate_divisor: 1,
    };
    Scenario {
        grid: GridSpec::new(0.625, 1.0, bins).unwrap(),
        source: SosSequenceSpec::unbalanced_qam(0.5 * (1.0 + k), 0.5 * (1.0 - k)).unwrap(),
        channel: ChannelSpec::flat(C64::new(1.0, 0.0), 0.625),
        noise: NoiseSpec { n0, interferers: vec![interferer(0.15), interferer(-0.15)] },
        power: PowerConstraint::new(1.0).unwrap(),
    }
}

/// Criterion 1: the block-matrix and reduced scalar MSE evaluators agree to
/// 1e-10 relative over 100 randomized scenarios within a minute.
#[test]
fn criterion_1_mse_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let scenario = random_scenario(&mut rng);
        let model = assemble(&scenario).unwrap();
        let scale = rng.gen_range(0.2..2.0);
        let s = random_tx_spectrum(&mut rng, &model, scale);
        let matrix = mse_matrix(&model, &s).unwrap();
        let scalar = mse_scalar_from_s(&model, &s).unwrap();
        let residual = (matrix.total - scalar.total).abs() / (1.0 + matrix.total);
        worst = worst.max(residual);
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-10, "worst equivalence residual {worst:e}");
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    report("1 (mse equivalence)", format!("worst residual {worst:.2e}, {elapsed:?}"));
}

/// Criterion 2: no 1e-3-relative receiver perturbation lowers the quadratic
/// objective below the closed-form receiver's value by more than 1e-12.
#[test]
fn criterion_2_receiver_optimality() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let scenario = random_scenario(&mut rng);
        let model = assemble(&scenario).unwrap();
        let scale = rng.gen_range(0.2..2.0);
        let s = random_tx_spectrum(&mut rng, &model, scale);
        let w = optimal_receiver(&model, &s).unwrap();
        let base = wl_objective(&model, &s, &w).unwrap();
        for _ in 0..200 {
            let mut wp = w.clone();
            for bin in &mut wp.bins {
                for vec in [&mut bin.w1_pos, &mut bin.w2_pos, &mut bin.w1_neg, &mut bin.w2_neg] {
                    let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let scale = 1e-3 * (norm + 1e-9);
                    for z in vec.iter_mut() {
                        *z += C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale;
                    }
                }
            }
            let perturbed = wl_objective(&model, &s, &wp).unwrap();
            worst = worst.max(base - perturbed);
        }
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-12, "a perturbation improved the objective by {worst:e}");
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    report("2 (receiver optimality)", format!("worst improvement {worst:.2e}, {elapsed:?}"));
}

/// Independent scalar water-filling oracle for a proper source: per-side
/// closed-form positive-part rule with its own multiplier bisection.
fn waterfill_oracle(data: &BinChannelData, budget: f64, tol: f64) -> Vec<(f64, f64)> {
    let sides: Vec<(f64, f64)> = data
        .pairs
        .iter()
        .flat_map(|p| [(p.params.m, p.params.lam), (p.params.m_hat, p.params.lam_hat)])
        .collect();
    let alloc = |nu: f64| -> Vec<f64> {
        sides
            .iter()
            .map(|&(m, lam)| {
                if m <= 0.0 || lam <= 0.0 {
                    0.0
                } else {
                    ((lam * m / nu).sqrt() - 1.0).max(0.0) / (lam * m)
                }
            })
            .collect()
    };
    let power = |a: &[f64]| -> f64 {
        a.iter().zip(&sides).map(|(&ai, &(m, _))| m * ai * data.delta_f).sum()
    };
    let cap = sides.iter().map(|&(m, lam)| lam * m).fold(0.0f64, f64::max);
    let mut lo = 1e-15 * cap;
    let mut hi = cap;
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        let p = power(&alloc(mid));
        if (p - budget).abs() <= tol * budget {
            lo = mid;
            break;
        }
        if p > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = alloc(lo);
    a.chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Criterion 3: with a proper source the conjugate receiver branch is
/// identically zero and the allocation matches per-sign scalar water-filling.
#[test]
fn criterion_3_proper_source_degeneration() {
    let mut worst_w2 = 0.0f64;
    let mut worst_alloc = 0.0f64;
    for (seed, bins) in [(31u64, 24usize), (32, 48), (33, 64)] {
        // proper source over a frequency-selective tabulated channel with one
        // interferer, so the water-fill profile is nontrivial
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scenario = random_scenario(&mut rng);
        scenario.grid = GridSpec::new(
            scenario.grid.bandwidth,
            scenario.grid.symbol_period,
            bins,
        )
        .unwrap();
        scenario.source = SosSequenceSpec::unbalanced_qam(0.5, 0.5).unwrap();
        scenario.power = PowerConstraint::new(1.0).unwrap();

        let model = assemble(&scenario).unwrap();
        let tx = design_transmitter(&model, 1.0, 1e-12).unwrap();
        let w = optimal_receiver(&model, &tx.spectrum).unwrap();
        worst_w2 = worst_w2.max(w.max_w2());

        let data = bin_channel_data(&model).unwrap();
        let oracle = waterfill_oracle(&data, 1.0, 1e-12);
        for (&(a, ah), &(oa, oah)) in tx.density.pairs.iter().zip(&oracle) {
            worst_alloc = worst_alloc.max((a - oa).abs() / (1.0 + oa));
            worst_alloc = worst_alloc.max((ah - oah).abs() / (1.0 + oah));
        }
    }
    assert!(worst_w2 <= 1e-12, "conjugate branch leaked {worst_w2:e}");
    assert!(worst_alloc <= 1e-8, "allocation deviates from water-filling by {worst_alloc:e}");
    report(
        "3 (proper-source degeneration)",
        format!("max |w2| {worst_w2:.1e}, water-fill deviation {worst_alloc:.2e}"),
    );
}

/// Criterion 4: minimum-bandwidth flat proper link has the closed-form MSE
/// `1/(1 + lam P T)` and a flat energy density.
#[test]
fn criterion_4_flat_closed_form() {
    let p_t = 1.3;
    let n0 = 0.21;
    let scenario = Scenario {
        grid: GridSpec::new(0.5, 1.0, 256).unwrap(),
        source: SosSequenceSpec::unbalanced_qam(0.5, 0.5).unwrap(),
        channel: ChannelSpec::flat(C64::new(1.0, 0.0), 0.5),
        noise: NoiseSpec { n0, interferers: vec![] },
        power: PowerConstraint::new(p_t).unwrap(),
    };
    let model = assemble(&scenario).unwrap();
    let tx = design_transmitter(&model, p_t, 1e-9).unwrap();
    let expect = 1.0 / (1.0 + p_t / n0);
    let mse_err = (tx.analytic_mse - expect).abs() / expect;
    assert!(mse_err <= 1e-8, "MSE off the closed form by {mse_err:e}");
    let mut flat_err = 0.0f64;
    for &(a, ah) in &tx.density.pairs {
        flat_err = flat_err.max((a - p_t).abs() / p_t);
        flat_err = flat_err.max((ah - p_t).abs() / p_t);
    }
    assert!(flat_err <= 1e-9, "density deviates from flat by {flat_err:e}");
    report(
        "4 (flat closed form)",
        format!("MSE residual {mse_err:.2e}, flatness residual {flat_err:.2e}"),
    );
}

/// Criterion 5: the optimality certificate holds on 30 random scenarios.
#[test]
fn criterion_5_kkt_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_sta = 0.0f64;
    let mut worst_dual = 0.0f64;
    let mut worst_comp = 0.0f64;
    let mut worst_power = 0.0f64;
    for _ in 0..30 {
        let scenario = random_scenario(&mut rng);
        let model = assemble(&scenario).unwrap();
        let tx = design_transmitter(&model, scenario.power.average_power, 1e-9).unwrap();
        worst_sta = worst_sta.max(tx.kkt.stationarity_rel);
        worst_dual = worst_dual.max(-tx.kkt.dual_min_rel);
        worst_comp = worst_comp.max(tx.kkt.comp_slack);
        worst_power = worst_power.max(tx.kkt.power_rel);
    }
    assert!(worst_sta <= 1e-8, "stationarity {worst_sta:e}");
    assert!(worst_dual <= 1e-12, "dual feasibility {worst_dual:e}");
    assert!(worst_comp <= 1e-10, "complementary slackness {worst_comp:e}");
    assert!(worst_power <= 1e-9, "power residual {worst_power:e}");
    report(
        "5 (kkt certificate)",
        format!(
            "stationarity {worst_sta:.2e}, dual {worst_dual:.2e}, slack {worst_comp:.2e}, power {worst_power:.2e}"
        ),
    );
}

/// Exhaustive minimum over the quantized feasible set, by dynamic programming
/// over per-pair budget shares (each lattice point assigns whole steps of
/// power to every side, so the DP minimum equals the full enumeration).
fn grid_search_min(
    model: &jointwave_core::link::LinkModel,
    data: &BinChannelData,
    budget: f64,
    steps: usize,
) -> f64 {
    let delta = budget / steps as f64;
    let pair_mse = |pair_idx: usize, u_pos: f64, u_neg: f64| -> f64 {
        let p = &data.pairs[pair_idx].params;
        let mut c = vec![(0.0, 0.0); data.pairs.len()];
        c[pair_idx] =
            (p.lam * u_pos / data.delta_f, p.lam_hat * u_neg / data.delta_f);
        let report = mse_scalar(model, &c);
        let (ep, en) = report.per_bin[pair_idx];
        (ep + en) * data.delta_f
    };

    // best pair MSE for each quantized pair budget
    let mut tables: Vec<Vec<f64>> = Vec::new();
    for (i, p) in data.pairs.iter().enumerate() {
        let can_pos = p.params.m > 0.0;
        let can_neg = p.params.m_hat > 0.0;
        let mut table = vec![f64::INFINITY; steps + 1];
        for (b, slot) in table.iter_mut().enumerate() {
            let total = b as f64 * delta;
            let mut best = f64::INFINITY;
            for split in 0..=b {
                let u_pos = split as f64 * delta;
                let u_neg = total - u_pos;
                if (u_pos > 0.0 && !can_pos) || (u_neg > 0.0 && !can_neg) {
                    continue;
                }
                best = best.min(pair_mse(i, u_pos, u_neg));
            }
            *slot = best;
        }
        tables.push(table);
    }

    // min-plus combination across pairs at exactly the full budget
    let mut acc = tables[0].clone();
    for table in &tables[1..] {
        let mut next = vec![f64::INFINITY; steps + 1];
        for (b, slot) in next.iter_mut().enumerate() {
            for b1 in 0..=b {
                let v = acc[b1] + table[b - b1];
                if v < *slot {
                    *slot = v;
                }
            }
        }
        acc = next;
    }
    acc[steps]
}

/// Criterion 6: on instances with at most 3 pairs the solver matches an
/// exhaustive grid search over the feasible set at 1e-3 budget resolution.
#[test]
fn criterion_6_small_instance_global_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_gap = 0.0f64;
    for trial in 0..10 {
        let mut scenario = random_scenario(&mut rng);
        let bins = rng.gen_range(2..=3usize);
        scenario.grid =
            GridSpec::new(scenario.grid.bandwidth, scenario.grid.symbol_period, bins).unwrap();
        let budget = scenario.power.average_power;
        let model = assemble(&scenario).unwrap();
        let data = bin_channel_data(&model).unwrap();
        let tx = design_transmitter(&model, budget, 1e-11).unwrap();

        let steps = 1000;
        let grid_min = grid_search_min(&model, &data, budget, steps);

        // the lattice is a subset of the feasible set: it can never beat the
        // true optimum the solver claims
        assert!(
            tx.analytic_mse <= grid_min + 1e-9 * (1.0 + grid_min),
            "trial {trial}: solver {} worse than a lattice point {}",
            tx.analytic_mse,
            grid_min
        );
        // and some lattice point must sit near the solver's optimum: bound
        // the quantization cost by the largest per-side slope at the optimum
        let delta = budget / steps as f64;
        let c0 = tx.density.c_pairs(&data);
        let base = mse_scalar(&model, &c0).total;
        let mut slope = 0.0f64;
        for i in 0..c0.len() {
            for pos in [true, false] {
                let p = &data.pairs[i].params;
                let dc = if pos { p.lam * delta / data.delta_f } else { p.lam_hat * delta / data.delta_f };
                let mut bumped = c0.clone();
                if pos {
                    bumped[i].0 += dc;
                } else {
                    bumped[i].1 += dc;
                }
                slope = slope.max((mse_scalar(&model, &bumped).total - base).abs());
            }
        }
        let resolution = 2.0 * (data.pairs.len() as f64) * slope + 1e-12;
        let gap = grid_min - tx.analytic_mse;
        assert!(
            gap <= resolution,
            "trial {trial}: lattice minimum {} above solver {} by more than the resolution {}",
            grid_min,
            tx.analytic_mse,
            resolution
        );
        worst_gap = worst_gap.max(gap / (1.0 + tx.analytic_mse));
    }
    report("6 (small-instance global optimality)", format!("worst relative gap {worst_gap:.2e}"));
}

/// Criterion 7: on the two-interferer reference family the MSE is
/// nonincreasing in the impropriety at every symbol-energy level, with a
/// strict improvement from k=0 to k=1 at 5 dB.
#[test]
fn criterion_7_impropriety_monotonicity() {
    let ks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut drop_at_5db = 0.0f64;
    for esn0 in [0.0, 5.0, 10.0, 15.0] {
        let mut last = f64::INFINITY;
        let mut first = 0.0;
        for (i, &k) in ks.iter().enumerate() {
            let scenario = reference_scenario(k, esn0, 256);
            let model = assemble(&scenario).unwrap();
            let tx = design_transmitter(&model, 1.0, 1e-9).unwrap();
            assert!(
                tx.analytic_mse <= last * (1.0 + 1e-12),
                "MSE grew from {last} to {} at k={k}, Es/N0={esn0}",
                tx.analytic_mse
            );
            if i == 0 {
                first = tx.analytic_mse;
            }
            last = tx.analytic_mse;
        }
        if esn0 == 5.0 {
            drop_at_5db = (first - last) / first;
        }
    }
    assert!(drop_at_5db >= 1e-3, "improvement from k=0 to k=1 at 5 dB is only {drop_at_5db:e}");
    report(
        "7 (impropriety monotonicity)",
        format!("relative improvement at 5 dB: {:.2}%", 100.0 * drop_at_5db),
    );
}

/// Criterion 8: seeded Monte Carlo at 1e5 symbols agrees with the analytic
/// MSE within 3 standard errors and hits the power budget within 2%.
#[test]
fn criterion_8_monte_carlo_agreement() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let combos: [(f64, usize, u64); 6] = [
        (0.0, 1, 801),
        (0.5, 1, 802),
        (1.0, 1, 803),
        (0.0, 2, 804),
        (0.8, 2, 805),
        (1.0, 2, 806),
    ];
    for (k, n_intf, seed) in combos {
        let mut scenario = reference_scenario(k, 5.0, 256);
        scenario.noise.interferers.truncate(n_intf);
        let model = assemble(&scenario).unwrap();
        let design =
            design_link(&scenario, &DesignOptions { power_tol: 1e-9, with_matrix_mse: false })
                .unwrap();
        let cfg = SimConfig {
            oversampling: 8,
            num_symbols: 100_000,
            burn_in: 256,
            rng_seed: seed,
            filter_span: 32,
        };
        let report = run_link(
            &scenario,
            &model,
            &design.tx.spectrum,
            &design.rx,
            design.tx.analytic_mse,
            &cfg,
        )
        .unwrap();
        let dev = (report.empirical_mse - report.analytic_mse).abs();
        assert!(
            dev <= 3.0 * report.std_err,
            "k={k}, {n_intf} interferer(s): empirical {} vs analytic {} ({}se)",
            report.empirical_mse,
            report.analytic_mse,
            dev / report.std_err
        );
        let power_err = (report.empirical_power - 1.0).abs();
        assert!(
            power_err <= 0.02,
            "k={k}, {n_intf} interferer(s): power {}",
            report.empirical_power
        );
        lines.push(format!("k={k}:{:.1}se", dev / report.std_err));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    report("8 (monte carlo agreement)", format!("{} in {elapsed:?}", lines.join(" ")));
}

/// Criterion 9: the per-pair alternating updates converge within 200 rounds
/// at tolerance 1e-12(1+|a|) for 1e4 random parameter draws with k < 1, and
/// the k=1 equal-eigenvalue case satisfies the constant-pair-power equation.
#[test]
fn criterion_9_alternating_update_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst_iters = 0usize;
    let mut worst_fix = 0.0f64;
    for _ in 0..10_000 {
        let p = PairParams {
            m: 10f64.powf(rng.gen_range(-2.0..2.0)),
            m_hat: 10f64.powf(rng.gen_range(-2.0..2.0)),
            lam: 10f64.powf(rng.gen_range(-2.0..2.0)),
            lam_hat: 10f64.powf(rng.gen_range(-2.0..2.0)),
            k: rng.gen_range(0.0..1.0f64).min(0.999_999_99),
        };
        let ceiling = p.nu_pos(0.0, 0.0).max(p.nu_neg(0.0, 0.0));
        let nu = ceiling * 10f64.powf(rng.gen_range(-6.0..0.0));
        let (a, ah, iters) =
            pair_allocation(nu, &p, 0.1, 200).expect("allocation must converge in 200 rounds");
        worst_iters = worst_iters.max(iters);
        // the returned pair is a fixed point of both updates at 1e-12(1+|a|)
        let (ra, rah) = fixed_point_residual(nu, &p, a, ah);
        worst_fix = worst_fix.max(ra / (1.0 + a.abs())).max(rah / (1.0 + ah.abs()));
    }
    assert!(worst_iters <= 200);
    assert!(worst_fix <= 1e-12, "fixed-point residual {worst_fix:e}");

    let mut worst_segment = 0.0f64;
    for _ in 0..2_000 {
        let lam = 10f64.powf(rng.gen_range(-2.0..2.0));
        let p = PairParams {
            m: 10f64.powf(rng.gen_range(-2.0..2.0)),
            m_hat: 10f64.powf(rng.gen_range(-2.0..2.0)),
            lam,
            lam_hat: lam,
            k: 1.0,
        };
        let nu = rng.gen_range(0.01..1.5) * lam * (p.m + p.m_hat);
        let (a, ah, _) = pair_allocation(nu, &p, 0.1, 200).unwrap();
        let rhs = (((p.m + p.m_hat) / (lam * nu)).sqrt() - 1.0 / lam).max(0.0);
        worst_segment =
            worst_segment.max((p.m * a + p.m_hat * ah - rhs).abs() / (1.0 + rhs));
    }
    assert!(worst_segment <= 1e-10, "pair-power equation residual {worst_segment:e}");
    report(
        "9 (alternating-update convergence)",
        format!(
            "worst rounds {worst_iters}, fixed-point residual {worst_fix:.2e}, pair-power residual {worst_segment:.2e}"
        ),
    );
}

/// Residuals of the two positive-part updates at a returned pair: a genuine
/// fixed point reproduces itself under both.
fn fixed_point_residual(nu: f64, p: &PairParams, a: f64, ah: f64) -> (f64, f64) {
    ((a - p.update_pos(nu, ah)).abs(), (ah - p.update_neg(nu, a)).abs())
}

/// Full sweep-grid Monte Carlo agreement: every impropriety level at every
/// symbol-energy level of the reference family stays within 3 standard
/// errors. Several minutes of work, so opt-in:
/// `cargo test -p jointwave-core --test acceptance -- --ignored --nocapture`
#[test]
#[ignore]
fn full_sweep_grid_monte_carlo_agreement() {
    let started = Instant::now();
    let mut seed = 9000u64;
    for esn0 in [0.0, 5.0, 10.0, 15.0] {
        for k in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            seed += 1;
            let scenario = reference_scenario(k, esn0, 256);
            let model = assemble(&scenario).unwrap();
            let design =
                design_link(&scenario, &DesignOptions { power_tol: 1e-9, with_matrix_mse: false })
                    .unwrap();
            let cfg = SimConfig {
                oversampling: 8,
                num_symbols: 100_000,
                burn_in: 256,
                rng_seed: seed,
                filter_span: 32,
            };
            let report = run_link(
                &scenario,
                &model,
                &design.tx.spectrum,
                &design.rx,
                design.tx.analytic_mse,
                &cfg,
            )
            .unwrap();
            let dev = (report.empirical_mse - report.analytic_mse).abs();
            assert!(
                dev <= 3.0 * report.std_err,
                "k={k}, Es/N0={esn0}: {} vs {} ({:.1}se)",
                report.empirical_mse,
                report.analytic_mse,
                dev / report.std_err
            );
            assert!((report.empirical_power - 1.0).abs() <= 0.02);
        }
    }
    report("full sweep grid", format!("24 points within 3se in {:?}", started.elapsed()));
}

/// The multiplier search is exercised end to end by the other criteria; keep
/// a direct probe of its bracket behavior on the reference scenario.
#[test]
fn outer_search_brackets_the_budget() {
    let scenario = reference_scenario(0.8, 5.0, 64);
    let model = assemble(&scenario).unwrap();
    let data = bin_channel_data(&model).unwrap();
    let (density, nu, state) = outer_solve(&data, 1.0, 1e-9).unwrap();
    assert!(nu > 0.0);
    assert!(state.power_rel <= 1e-9);
    let power = EnergyDensity { pairs: density.pairs.clone() }.total_power(&data);
    assert!((power - 1.0).abs() <= 1e-9);
}
