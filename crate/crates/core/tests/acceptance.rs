//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use active_scalar::diagnostics::{conservation_report, fit_rate, halving_dts, run_study, StudyProblem};
use active_scalar::grid::{random_band_limited_field, GridSpec, MultiIndex, RealField, SpectralField};
use active_scalar::harness::{
    decode_snapshot, encode_snapshot, parse_config, read_snapshot, run, write_snapshot, Command, Preset,
};
use active_scalar::operators::{check_admissibility, commutator_ab, divergence, velocity, ASpec, Classification, VSpec};
use active_scalar::splitting::{evolve, Method, SplitConfig};
use active_scalar::subflows::{phi_a, phi_b, BFlow, BFlowControl};

type Outcome = Result<(bool, String), String>;

fn real(g: GridSpec, f: impl Fn(&[f64]) -> f64) -> SpectralField {
    RealField::from_fn(g, f).unwrap().forward().unwrap()
}

fn random(g: GridSpec, seed: u64) -> SpectralField {
    random_band_limited_field(g, seed, 6.0, false).unwrap().forward().unwrap()
}

fn max_abs_diff(a: &SpectralField, b: &RealField) -> f64 {
    let a = a.inverse().unwrap();
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn study(problem: &StudyProblem, method: Method, refinement: u32) -> Result<(f64, f64), String> {
    let dts = halving_dts(problem.horizon, 3, 5);
    let report = run_study(problem, method, &dts, refinement)
        .and_then(|r| r.report(0.0))
        .map_err(|e| e.to_string())?;
    let fit = report.fit().ok_or("errors at roundoff level; no rate to fit")?;
    Ok((fit.rate, fit.residual))
}

fn viscous_burgers_problem() -> StudyProblem {
    let g = GridSpec::new(1, 256).unwrap();
    let p = Preset::ViscousBurgers { alpha: 2.0 };
    StudyProblem {
        id: p.id().into(),
        u0: real(g, |x| x[0].sin()),
        a: p.a_spec().unwrap(),
        v: p.v_spec(),
        horizon: 0.5,
        bflow: BFlowControl::default(),
    }
}

fn criterion_1() -> Outcome {
    let (rate, residual) = study(&viscous_burgers_problem(), Method::Godunov, 6)?;
    Ok((
        (0.8..=1.2).contains(&rate) && residual <= 0.15,
        format!("Godunov viscous Burgers L2 rate {rate:.4} (window [0.8, 1.2]), residual {residual:.3e} (<= 0.15)"),
    ))
}

fn criterion_2() -> Outcome {
    let (vb, vb_res) = study(&viscous_burgers_problem(), Method::Strang, 6)?;
    let g = GridSpec::new(1, 256).unwrap();
    let kdv = StudyProblem {
        id: "kdv".into(),
        u0: random(g, 2024),
        a: Preset::Kdv.a_spec().unwrap(),
        v: Preset::Kdv.v_spec(),
        horizon: 0.5,
        bflow: BFlowControl::default(),
    };
    let (kd, kd_res) = study(&kdv, Method::Strang, 6)?;
    let window = 1.75..=2.25;
    Ok((
        window.contains(&vb) && window.contains(&kd),
        format!(
            "Strang viscous Burgers rate {vb:.4} (residual {vb_res:.2e}), KdV random u0 rate {kd:.4} \
             (residual {kd_res:.2e}); window [1.75, 2.25]"
        ),
    ))
}

fn criterion_3() -> Outcome {
    let g = GridSpec::new(2, 64).unwrap();
    let p = Preset::Sqg { alpha: 2.0, beta: 2.0 };
    let problem = StudyProblem {
        id: p.id().into(),
        u0: real(g, |x| x[0].sin() + (2.0 * x[1]).cos()),
        a: p.a_spec().unwrap(),
        v: p.v_spec(),
        horizon: 0.25,
        bflow: BFlowControl::default(),
    };
    let (rate, residual) = study(&problem, Method::Strang, 6)?;
    Ok((
        (1.7..=2.3).contains(&rate),
        format!("Strang SQG 64^2 rate {rate:.4} over 4 halvings (window [1.7, 2.3]), residual {residual:.2e}"),
    ))
}

fn criterion_4() -> Outcome {
    let g = GridSpec::new(1, 256).unwrap();
    let a = Preset::Kdv.a_spec().unwrap();
    let shifted = phi_a(0.4, &real(g, |x| x[0].sin()), &a).map_err(|e| e.to_string())?;
    let exact = RealField::from_fn(g, |x| (x[0] - 0.4).sin()).unwrap();
    let shift_err = max_abs_diff(&shifted, &exact);

    let mut semigroup: f64 = 0.0;
    for seed in 0..10 {
        let u = random(g, 100 + seed);
        let (s, t) = (0.17 + 0.05 * seed as f64, 0.31);
        let two = phi_a(s, &phi_a(t, &u, &a).unwrap(), &a).unwrap();
        let one = phi_a(s + t, &u, &a).unwrap().inverse().unwrap();
        semigroup = semigroup.max(max_abs_diff(&two, &one));
    }
    Ok((
        shift_err <= 1e-12 && semigroup <= 1e-12,
        format!("phi_A(0.4) sin x vs sin(x - 0.4): {shift_err:.2e}; semigroup defect on 10 random fields: {semigroup:.2e} (both <= 1e-12)"),
    ))
}

fn criterion_5() -> Outcome {
    let mut modulus: f64 = 0.0;
    let mut sobolev_growth: f64 = f64::NEG_INFINITY;
    let mut mass: f64 = 0.0;
    let mut ok = true;
    for p in Preset::shipped() {
        let g = GridSpec::new(p.default_dims(), if p.default_dims() == 1 { 128 } else { 32 }).unwrap();
        let a = p.a_spec().unwrap();
        let u = random(g, 77);
        match a.classification() {
            Classification::Dispersive => {
                for t in [0.01, 0.3, 2.0] {
                    let w = phi_a(t, &u, &a).unwrap();
                    for (x, y) in u.coeffs().iter().zip(w.coeffs()) {
                        if x.norm() > 0.0 {
                            modulus = modulus.max((y.norm() - x.norm()).abs() / x.norm());
                        }
                    }
                }
            }
            Classification::Diffusive => {
                for s in [0.0, 1.0, 2.0, 4.0] {
                    let mut prev = u.sobolev_norm(s).unwrap();
                    let mut w = u.clone();
                    for _ in 0..20 {
                        w = phi_a(0.05, &w, &a).unwrap();
                        let next = w.sobolev_norm(s).unwrap();
                        sobolev_growth = sobolev_growth.max(next - prev);
                        prev = next;
                    }
                }
            }
            Classification::Rejected => ok = false,
        }
        let mut cfg = SplitConfig::new(Method::Strang, 0.05, 0.5, a.clone(), p.v_spec());
        cfg.record_every = 1;
        let traj = evolve(&u, &cfg).map_err(|e| format!("{}: {e}", p.id()))?;
        let report = conservation_report(&traj, &a).map_err(|e| e.to_string())?;
        mass = mass.max(report.mass_drift);
    }
    ok &= modulus <= 1e-14 && sobolev_growth <= 0.0 && mass <= 1e-12;
    Ok((
        ok,
        format!(
            "dispersive |u_hat(k)| relative change {modulus:.2e} (<= 1e-14); diffusive H^s max increase \
             {sobolev_growth:.2e} (<= 0); mass drift over full runs {mass:.2e} (<= 1e-12)"
        ),
    ))
}

fn criterion_6() -> Outcome {
    let g = GridSpec::new(2, 64).unwrap();
    let v = VSpec::Sqg { beta: 2.0 };
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let u = random(g, 5000 + seed);
        let div = divergence(&velocity(&u, &v).unwrap()).unwrap();
        worst = worst.max(div.l2_norm() / u.l2_norm());
    }
    Ok((worst <= 1e-12, format!("max ||div v(u)|| / ||u|| over 100 random fields: {worst:.2e} (<= 1e-12)")))
}

fn criterion_7() -> Outcome {
    let g = GridSpec::new(1, 64).unwrap();
    let a = ASpec::derivative(1.0, MultiIndex::axis(1, 0, 2)).unwrap();
    let c = commutator_ab(&real(g, |x| x[0].sin()), &a, &VSpec::Burgers { a: 1.0 }).map_err(|e| e.to_string())?;
    let err = max_abs_diff(&c, &RealField::from_fn(g, |x| 2.0 * (2.0 * x[0]).sin()).unwrap());
    Ok((err <= 1e-10, format!("[d_xx, Burgers](sin x) vs 2 sin 2x: max error {err:.2e} (<= 1e-10)")))
}

/// Solves `ξ + 2t sin ξ = x` by Newton's method.
fn characteristic_foot(x: f64, t: f64) -> f64 {
    let mut xi = x;
    for _ in 0..100 {
        let step = (xi + 2.0 * t * xi.sin() - x) / (1.0 + 2.0 * t * xi.cos());
        xi -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    xi
}

fn criterion_8() -> Outcome {
    let g = GridSpec::new(1, 256).unwrap();
    let v = VSpec::Burgers { a: 1.0 };
    let u0 = real(g, |x| x[0].sin());
    let t = 0.2;
    let ctrl = BFlowControl::default();
    let u = phi_b(t, &u0, &v, &ctrl).map_err(|e| e.to_string())?;
    let oracle = RealField::from_fn(g, |x| characteristic_foot(x[0], t).sin()).unwrap();
    let linf = max_abs_diff(&u, &oracle);

    let flow = BFlow::new(&v, &g).unwrap();
    let reference = flow.propagate_substeps(t, &u0, 2048, &ctrl).unwrap();
    let rows: Vec<(f64, f64)> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| {
            let w = flow.propagate_substeps(t, &u0, n, &ctrl).unwrap();
            (t / n as f64, w.sub(&reference).l2_norm())
        })
        .collect();
    let slope = fit_rate(&rows).map_err(|e| e.to_string())?.rate;
    Ok((
        linf <= 1e-6 && (slope - 4.0).abs() <= 0.3,
        format!(
            "phi_B(0.2) sin x vs characteristics: L_inf {linf:.2e} (<= 1e-6); RK4 substep slope {slope:.3} (4 +- 0.3)"
        ),
    ))
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for p in Preset::shipped() {
        let g = GridSpec::new(p.default_dims(), if p.default_dims() == 1 { 128 } else { 32 }).unwrap();
        let r = check_admissibility(&p.a_spec().unwrap(), &p.v_spec(), &g, 50, 2025).map_err(|e| e.to_string())?;
        let pass = r.passed
            && r.commutativity_residual <= 1e-12
            && r.energy_ratio <= 1e-12
            && r.commutator_constant.is_finite();
        ok &= pass;
        lines.push(format!(
            "{} comm {:.1e} sign {:.1e} C {:.3}",
            p.id(),
            r.commutativity_residual,
            r.energy_ratio,
            r.commutator_constant
        ));
    }
    Ok((ok, format!("50-trial audit of every preset: {}", lines.join("; "))))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = "equation.preset = viscous_burgers\ngrid.n = 64\ninit.kind = random\ninit.seed = 9\n\
                split.method = strang\nsplit.dt = 0.0625\nsplit.T = 0.5\nstudy.dt_count = 4\n\
                study.methods = godunov, strang\nstudy.norms = 0, 1\n";
    let cfg = parse_config(text).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for rep in 0..2 {
        let out = dir.path().join(format!("run{rep}"));
        let study = run(&cfg, Command::Study, &out).map_err(|e| e.to_string())?;
        let evolve = run(&cfg, Command::Evolve, &out).map_err(|e| e.to_string())?;
        let mut files: Vec<(String, Vec<u8>)> = study
            .artifacts
            .iter()
            .chain(&evolve.artifacts)
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    let identical = outputs[0] == outputs[1] && outputs[0].len() == 5;

    let mut lossless = true;
    for (dims, n) in [(1, 64), (2, 32), (3, 16)] {
        let g = GridSpec::new(dims, n).unwrap();
        let f = random_band_limited_field(g, 31 + dims as u64, 3.0, false).unwrap();
        let path = dir.path().join(format!("snap{dims}.bin"));
        write_snapshot(&path, &f, 0.1 * dims as f64).map_err(|e| e.to_string())?;
        let back = read_snapshot(&path).map_err(|e| e.to_string())?;
        lossless &= back.field == f && back.time == 0.1 * dims as f64;
        lossless &= decode_snapshot(&encode_snapshot(&f, PI)).unwrap().field == f;
    }
    Ok((
        identical && lossless,
        format!(
            "{} CSV artifacts byte-identical across two runs: {identical}; snapshot write/read lossless: {lossless}",
            outputs[0].len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Godunov first order", criterion_1),
        ("Strang second order", criterion_2),
        ("2D SQG Strang rate", criterion_3),
        ("exact A-flow", criterion_4),
        ("conservation and dissipation", criterion_5),
        ("divergence-free SQG velocity", criterion_6),
        ("commutator closed form", criterion_7),
        ("B-flow characteristics oracle", criterion_8),
        ("admissibility audit", criterion_9),
        ("determinism and formats", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
