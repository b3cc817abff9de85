use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use wentzell::disc::{assemble, hautus_probe, resolvent_norm};
use wentzell::roots::{asymptotic_root, root_table};
use wentzell::special::BesselEvaluator;
use wentzell::time::{
    fit_decay, log_times, packet_modes, simulate as run_newmark, EnergyTrace, InitialData,
    ModalEnergy, ModePacket, Phase, SimulationConfig,
};

use crate::output::{float, opt_float, short, OutDir};
use crate::{BesselArgs, Failure, HautusArgs, Method, PhaseArg, ResolventArgs, RootsArgs, SimulateArgs};

/// Half width and sample count of the refinement window around each predicted peak.
const PEAK_HALF_WIDTH: f64 = 0.3;
const PEAK_SAMPLES: usize = 21;

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    version: &'static str,
    subcommand: &'static str,
    threads: usize,
    output_dir: String,
    config: &'a T,
    outputs: Vec<String>,
}

fn open(out: PathBuf) -> Result<OutDir, Failure> {
    OutDir::create(out).map_err(Failure::Invalid)
}

fn finish<T: Serialize>(mut dir: OutDir, subcommand: &'static str, config: &T) -> Result<(), Failure> {
    let mut outputs = dir.written().to_vec();
    outputs.push("manifest.json".into());
    let m = Manifest {
        version: wentzell::VERSION,
        subcommand,
        threads: rayon::current_num_threads(),
        output_dir: dir.path().display().to_string(),
        config,
        outputs,
    };
    dir.json("manifest.json", &m).map_err(Failure::Invalid)
}

fn io(e: String) -> Failure {
    Failure::Invalid(e)
}

pub fn roots(a: &RootsArgs, out: PathBuf) -> Result<(), Failure> {
    let mut dir = open(out)?;
    let ev = BesselEvaluator::default();
    let table = root_table(&ev, a.n, a.k_max, a.tol)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                float(r.lambda.re),
                float(r.lambda.im),
                float(r.z.re),
                float(r.z.im),
                float(r.residual),
                r.certified.to_string(),
                opt_float(r.predicted.map(|p| p.re)),
                opt_float(r.predicted.map(|p| p.im)),
                opt_float(r.abs_err()),
            ]
        })
        .collect();
    dir.csv(
        "roots.csv",
        &[
            "n", "k", "re_lambda", "im_lambda", "re_z", "im_z", "residual", "certified", "pred_re",
            "pred_im", "abs_err",
        ],
        &rows,
    )
    .map_err(io)?;
    let certified = table.iter().filter(|r| r.certified).count();
    println!("roots.csv: {} roots, {certified} certified", table.len());
    finish(dir, "roots", a)
}

/// Uniform grid on `[lmin, lmax]` plus refinement windows around the predicted `omega_k`.
fn resolvent_frequencies(a: &ResolventArgs) -> Result<Vec<f64>, Failure> {
    if !(a.lmin >= 1.0 && a.lmax <= 500.0 && a.lmin < a.lmax) {
        return Err(Failure::Invalid(format!(
            "need 1 <= lmin < lmax <= 500, got [{}, {}]",
            a.lmin, a.lmax
        )));
    }
    if a.samples < 2 {
        return Err(Failure::Invalid("--samples must be at least 2".into()));
    }
    let mut ls: Vec<f64> = (0..a.samples)
        .map(|i| a.lmin + (a.lmax - a.lmin) * i as f64 / (a.samples - 1) as f64)
        .collect();
    for k in 1.. {
        let omega = asymptotic_root(k)?.re;
        if omega > a.lmax {
            break;
        }
        if omega < a.lmin {
            continue;
        }
        ls.extend((0..PEAK_SAMPLES).map(|j| {
            omega - PEAK_HALF_WIDTH + 2.0 * PEAK_HALF_WIDTH * j as f64 / (PEAK_SAMPLES - 1) as f64
        }));
    }
    ls.retain(|l| (1.0..=500.0).contains(l));
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    Ok(ls)
}

pub fn resolvent(a: &ResolventArgs, out: PathBuf) -> Result<(), Failure> {
    let ls = resolvent_frequencies(a)?;
    let mut dir = open(out)?;
    let samples = ls
        .par_iter()
        .map(|&l| resolvent_norm(a.n_max, l, a.grid))
        .collect::<wentzell::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            vec![
                float(s.lambda),
                s.n_max.to_string(),
                s.grid_n.to_string(),
                float(s.norm),
                s.singular.to_string(),
            ]
        })
        .collect();
    dir.csv("resolvent.csv", &["lambda", "n_max", "grid_n", "norm", "flag_singular"], &rows)
        .map_err(io)?;
    let peak = samples
        .iter()
        .filter(|s| !s.singular)
        .max_by(|x, y| x.norm.total_cmp(&y.norm));
    if let Some(p) = peak {
        println!("resolvent.csv: {} samples, largest norm {} at lambda = {}", samples.len(), short(p.norm), short(p.lambda));
    }
    finish(dir, "resolvent", a)
}

#[derive(Serialize)]
struct FitSummary {
    alpha: f64,
    c: f64,
    r2: f64,
    t_lo: f64,
    t_hi: f64,
    s: f64,
    k_min: usize,
    k_max: usize,
    grid_n: usize,
    dt: f64,
}

pub fn simulate(a: &SimulateArgs, out: PathBuf) -> Result<(), Failure> {
    let phase = match a.phase {
        PhaseArg::Aligned => Phase::Aligned,
        PhaseArg::Random => Phase::Random(a.seed),
    };
    let packet = ModePacket { k_min: a.packet_kmin, k_max: a.packet_kmax, s: a.packet_s, phase };
    let steps = (a.t_max / a.dt).round();
    let stride = a.stride.unwrap_or_else(|| ((steps / 2000.0).round() as usize).max(1));
    let config = SimulationConfig {
        n: a.n,
        grid_n: a.grid,
        dt: a.dt,
        t_max: a.t_max,
        sample_stride: stride,
        initial: InitialData::Packet(packet),
    };
    match a.method {
        Method::Newmark => config.validate()?,
        // modal synthesis is exact in time; dt only spaces the samples
        Method::Modal => {
            packet.validate()?;
            if !(a.dt > 0.0 && a.dt.is_finite() && a.t_max > 0.0 && a.t_max.is_finite()) {
                return Err(Failure::Invalid("dt and t_max must be positive".into()));
            }
        }
    }
    let t_hi = a.fit_hi.unwrap_or(a.t_max.min(1000.0));
    if !(a.fit_lo > 0.0 && a.fit_lo < t_hi && t_hi <= a.t_max) {
        return Err(Failure::Invalid(format!(
            "fit window [{}, {t_hi}] must satisfy 0 < lo < hi <= t_max = {}",
            a.fit_lo, a.t_max
        )));
    }
    let mut dir = open(out)?;
    let ev = BesselEvaluator::default();
    let p = assemble(a.n, a.grid)?;
    let trace = match a.method {
        Method::Newmark => run_newmark(&ev, &p, &config)?,
        Method::Modal => {
            let modes = packet_modes(&ev, &p, &packet)?;
            let me = ModalEnergy::new(&p, &modes);
            let count = steps as usize;
            let mut times: Vec<f64> = (0..=count).step_by(stride).map(|s| s as f64 * a.dt).collect();
            if count % stride != 0 {
                times.push(count as f64 * a.dt);
            }
            me.trace(&times)
        }
    };
    write_energy(&mut dir, &trace)?;
    let fit = fit_decay(&trace, a.fit_lo, t_hi)?;
    let summary = FitSummary {
        alpha: fit.alpha,
        c: fit.c,
        r2: fit.r2,
        t_lo: a.fit_lo,
        t_hi,
        s: a.packet_s,
        k_min: a.packet_kmin,
        k_max: a.packet_kmax,
        grid_n: a.grid,
        dt: a.dt,
    };
    dir.json("fit.json", &summary).map_err(io)?;
    println!(
        "energy.csv: {} samples; fitted alpha = {} (r2 = {}) on [{}, {}]",
        trace.rows.len(),
        short(fit.alpha),
        short(fit.r2),
        short(a.fit_lo),
        short(t_hi)
    );
    finish(dir, "simulate", a)
}

fn write_energy(dir: &mut OutDir, trace: &EnergyTrace) -> Result<(), Failure> {
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| vec![float(r.t), float(r.e), float(r.e1), float(r.dissipated)])
        .collect();
    dir.csv("energy.csv", &["t", "E", "E1", "dissipated"], &rows).map_err(io)
}

pub fn hautus(a: &HautusArgs, out: PathBuf) -> Result<(), Failure> {
    if !(a.lmin > 0.0 && a.lmin <= a.lmax && a.lmax.is_finite()) {
        return Err(Failure::Invalid(format!("need 0 < lmin <= lmax, got [{}, {}]", a.lmin, a.lmax)));
    }
    if a.frequencies == 0 {
        return Err(Failure::Invalid("--frequencies must be positive".into()));
    }
    let lambdas = if a.frequencies == 1 { vec![a.lmin] } else { log_times(a.lmin, a.lmax, a.frequencies) };
    let mut dir = open(out)?;
    let rep = hautus_probe(&lambdas, a.grid, a.samples, a.seed)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![float(r.lambda), float(r.max_ratio), r.samples.to_string()])
        .collect();
    dir.csv("hautus.csv", &["lambda", "max_ratio", "samples"], &rows).map_err(io)?;
    println!(
        "hautus.csv: {} frequencies; max ratio {}, spread {}",
        rep.rows.len(),
        short(rep.overall_max),
        short(rep.spread)
    );
    finish(dir, "hautus", a)
}

pub fn bessel(a: &BesselArgs) -> Result<(), Failure> {
    let ev = BesselEvaluator::default();
    let z = Complex64::new(a.z, a.z_im);
    let v = if a.derivative { ev.j_prime(a.n, z)? } else { ev.j(a.n, z)? };
    if a.z_im == 0.0 {
        println!("{}", short(v.re));
    } else {
        println!("{} {}", short(v.re), short(v.im));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_windows_surround_predictions() {
        let a = ResolventArgs { lmin: 10.0, lmax: 40.0, samples: 31, grid: 100, n_max: 0 };
        let ls = resolvent_frequencies(&a).unwrap();
        let predicted: Vec<f64> =
            (1..20).map(|k| asymptotic_root(k).unwrap().re).filter(|w| (10.0..=40.0).contains(w)).collect();
        assert_eq!(ls.len(), 31 + PEAK_SAMPLES * predicted.len());
        for w in predicted {
            let near = ls.iter().filter(|l| (*l - w).abs() <= PEAK_HALF_WIDTH + 1e-12).count();
            assert!(near >= PEAK_SAMPLES);
        }
        assert!(ls.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn bad_range_is_invalid() {
        let a = ResolventArgs { lmin: 0.5, lmax: 40.0, samples: 31, grid: 100, n_max: 0 };
        assert!(matches!(resolvent_frequencies(&a), Err(Failure::Invalid(_))));
    }
}
