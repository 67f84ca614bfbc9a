//! Rough per-step cost of the coupled engine plus pilot runs of the heavy
//! rate experiments, for sizing acceptance budgets.

use driftless::{
    cantor_family, fit_log_form, fit_rate, power_law_shift_family, sup_distance, CantorBase,
    DiffusionSpec, SamplingPlan, SimConfig, Statistic,
};
use std::time::Instant;

fn time_pair(label: &str, sigma: &DiffusionSpec, sigma_n: &DiffusionSpec, cfg: &SimConfig) {
    let t = Instant::now();
    let est = driftless::mc_estimate(sigma, sigma_n, cfg, Statistic::MeanSup).unwrap();
    let dt = t.elapsed().as_secs_f64();
    let steps = cfg.paths as f64 * cfg.steps as f64;
    println!(
        "{label}: {:.2}s for {steps:.2e} coupled steps = {:.1} ns/step (wall); mean {:.4e}",
        dt,
        dt / steps * 1e9,
        est.mean
    );
}

fn main() {
    let cfg = SimConfig {
        x0: 0.5,
        t_horizon: 0.0625,
        steps: 100_000,
        paths: 400,
        seed: 1,
        absorb_at_zero: false,
    };
    let sigma = DiffusionSpec::cantor_exact(0.5, 0.25).unwrap();
    let sigma_n = DiffusionSpec::cantor_iterate(0.5, 8, CantorBase::Zero, 0.25).unwrap();
    time_pair("cantor(0.5, eps=0.25) vs iterate 8", &sigma, &sigma_n, &cfg);

    let mut cfg2 = cfg;
    cfg2.x0 = 0.25;
    cfg2.t_horizon = 0.5;
    cfg2.absorb_at_zero = true;
    let sigma = DiffusionSpec::power_law(0.5, 0.0).unwrap();
    let sigma_n = DiffusionSpec::power_law(0.5, 0.0078125).unwrap();
    time_pair("power-law 1/2 vs +2^-7 shift", &sigma, &sigma_n, &cfg2);

    // --- pilot: log-regime shape for the sqrt family -----------------------
    let t = Instant::now();
    let family = power_law_shift_family(0.5, 2..=7).unwrap();
    let cfg10 = SimConfig {
        x0: 0.25,
        t_horizon: 0.5,
        steps: 1 << 16,
        paths: 2_000,
        seed: 2,
        absorb_at_zero: true,
    };
    let mut pts = Vec::new();
    for p in &family {
        let est =
            driftless::mc_estimate(&p.sigma, &p.sigma_n, &cfg10, Statistic::MeanSupSquared)
                .unwrap();
        let delta = (0.5f64).powi(p.n as i32);
        println!(
            "  n={} delta={delta:.5} E sup^2 = {:.5e} ± {:.1e}",
            p.n, est.mean, est.std_error
        );
        pts.push((delta, est.mean));
    }
    let lf = fit_log_form(&pts).unwrap();
    let pf = fit_rate(&pts).unwrap();
    println!(
        "sqrt-family pilot ({:.1}s): log-form K={:.4e} residual={:.3}; power slope={:.3}",
        t.elapsed().as_secs_f64(),
        lf.constant,
        lf.rel_residual,
        pf.slope
    );
    for (d, e) in &pts {
        let g = (-d.ln()).powf(-0.5);
        println!(
            "    delta={d:.5}: e={e:.4e} K*g={:.4e} ratio={:.3}",
            lf.constant * g,
            e / (lf.constant * g)
        );
    }

    // --- pilot: Cantor NLG slope -------------------------------------------
    let t = Instant::now();
    let family = cantor_family(0.5, 0.25, CantorBase::Zero, 2..=8).unwrap();
    let cfg8 = SimConfig {
        x0: 0.5,
        t_horizon: 0.03125,
        steps: 16_384,
        paths: 2_000,
        seed: 3,
        absorb_at_zero: false,
    };
    let plan = SamplingPlan::dense(0.0, 1.0).with_cantor_breakpoints(0.5, 14);
    let mut pts = Vec::new();
    for p in &family {
        let delta = sup_distance(&p.sigma, &p.sigma_n, &plan).unwrap();
        let est =
            driftless::mc_estimate(&p.sigma, &p.sigma_n, &cfg8, Statistic::MeanSup).unwrap();
        println!(
            "  n={} delta={delta:.6} E sup = {:.5e} ± {:.1e}",
            p.n, est.mean, est.std_error
        );
        pts.push((delta, est.mean));
    }
    let pf = fit_rate(&pts).unwrap();
    println!(
        "cantor pilot ({:.1}s): power slope = {:.3} ± {:.3}",
        t.elapsed().as_secs_f64(),
        pf.slope,
        pf.slope_stderr
    );
}
