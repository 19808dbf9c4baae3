//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints one line whether it passes or not.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use modfrm::bank::{
    amplitude_distortion, build_uniform_bank, channel_count_formula, channel_ripple_db,
    max_channels, merge_channels, merged_ripple,
};
use modfrm::firdesign::freq_response;
use modfrm::frmcore::{masking_edges, synthesize};
use modfrm::transforms::{cascade, complement, interpolate, modulate, parallel_sum};
use modfrm::{
    measure_spec, total_cost, Case, CostReport, FilterSpec, Fir, InterpolationFactor, ModFrmDesign,
    ModalConfig, SynthesisOptions, UniformBank,
};
use modfrm_cli::channelize::{convolve, encode_raw, synth_tones};
use modfrm_cli::commands::{
    cmd_channelize, cmd_design, ChannelizeArgs, DesignArgs, SignalSource, Targets,
};
use modfrm_cli::presets::PRESETS;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const THETA: f64 = 0.2 * PI;
const PHI: f64 = 0.3 * PI;
const RIPPLE_DB: f64 = 0.0065;
const ATTEN_DB: f64 = 60.0;
const SWEEP_L: [usize; 6] = [10, 15, 20, 25, 30, 40];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spec() -> FilterSpec {
    FilterSpec::new(THETA, PHI, RIPPLE_DB, ATTEN_DB).unwrap()
}

fn config(theta: f64, phi: f64, m: usize, l: usize) -> ModalConfig {
    ModalConfig::new(theta, phi, m, InterpolationFactor::new(l).unwrap(), Case::I).unwrap()
}

struct Sweep {
    elapsed: Duration,
    rows: Vec<(usize, ModFrmDesign, CostReport)>,
}

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let rows = SWEEP_L
            .iter()
            .map(|&l| {
                let d = synthesize(
                    &spec(),
                    &config(THETA, PHI, 3, l),
                    &SynthesisOptions::default(),
                )
                .unwrap();
                let c = total_cost(&d);
                (l, d, c)
            })
            .collect();
        Sweep {
            elapsed: start.elapsed(),
            rows,
        }
    })
}

fn design_for(l: usize) -> &'static ModFrmDesign {
    &sweep().rows.iter().find(|r| r.0 == l).expect("swept L").1
}

fn bank_for(l: usize) -> UniformBank {
    build_uniform_bank(design_for(l)).unwrap()
}

fn criterion_1() -> Outcome {
    // Published edges, in units of pi: (L, Ma pass, Ma stop, Mc pass, Mc stop).
    let printed = [
        (10, 0.12, 0.17, 0.08, 0.13),
        (15, 0.08, 0.1132, 0.0535, 0.0868),
        (20, 0.06, 0.085, 0.04, 0.065),
        (25, 0.048, 0.068, 0.032, 0.052),
        (30, 0.04, 0.0567, 0.0267, 0.0433),
        (40, 0.03, 0.0425, 0.02, 0.0325),
    ];
    let mut worst_exact = 0.0f64;
    let mut worst_printed = 0.0f64;
    for (l, a, b, c, d) in printed {
        let e = masking_edges(&config(THETA, PHI, 3, l));
        let lf = l as f64;
        // Exact values for theta = 0.2 pi, phi = 0.3 pi.
        let exact = [1.2 * PI / lf, 1.7 * PI / lf, 0.8 * PI / lf, 1.3 * PI / lf];
        let got = [e.ma_pass, e.ma_stop, e.mc_pass, e.mc_stop];
        for ((g, x), p) in got.iter().zip(exact).zip([a, b, c, d]) {
            worst_exact = worst_exact.max(((g - x) / x).abs());
            worst_printed = worst_printed.max((g / PI - p).abs());
        }
    }
    check(
        worst_exact <= 1e-12 && worst_printed <= 2.5e-4,
        format!("24 edges, max rel error {worst_exact:.1e}, max gap to published values {worst_printed:.1e} pi"),
    )
}

fn criterion_2() -> Outcome {
    let counts: Vec<usize> = SWEEP_L
        .iter()
        .map(|&l| channel_count_formula(3, l, Case::I).unwrap())
        .collect();
    let m1 = channel_count_formula(1, 25, Case::I).unwrap();
    let fs = max_channels(0.13).unwrap();
    check(
        counts == [8, 12, 16, 20, 24, 32] && m1 == 10 && fs == 8,
        format!("m=3 counts {counts:?}, (m=1, L=25) -> {m1}, f_s=0.13 -> {fs}"),
    )
}

fn criterion_3() -> Outcome {
    let published = [98usize, 107, 113, 121, 127, 137];
    let published_lifir = [3usize, 4, 6, 7, 8, 9];
    let s = sweep();
    let mut ok = s.elapsed < Duration::from_secs(60);
    let mut lines = Vec::new();
    let mut prev = 0;
    for (((l, d, c), p), pl) in s.rows.iter().zip(published).zip(published_lifir) {
        let rel = (c.total as f64 - p as f64) / p as f64;
        let li = d.hma.l_ifir();
        ok &= rel.abs() <= 0.15 && c.total >= prev && li.abs_diff(pl) <= 1;
        prev = c.total;
        lines.push(format!("L={l}: {c} ({:+.1}%), L_IFIR {li}", 100.0 * rel));
    }
    check(
        ok,
        format!("{} in {:.1}s", lines.join("; "), s.elapsed.as_secs_f64()),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (l, width) in [(10, 0.01 * PI), (40, 0.0025 * PI)] {
        let d = design_for(l);
        let s = d.overall_spec().unwrap();
        let m = measure_spec(&d.overall, &s);
        let step = PI / (16 * d.overall.len().max(64)) as f64;
        ok &= (m.transition_width - width).abs() <= step && m.achieved_stopband_atten_db >= 59.0;
        lines.push(format!(
            "L={l}: width {:.5} pi, atten {:.2} dB, passband ripple {:.4} dB",
            m.transition_width / PI,
            m.achieved_stopband_atten_db,
            m.achieved_passband_ripple_db
        ));
    }
    check(ok, lines.join("; "))
}

fn random_complex(rng: &mut StdRng, max_len: usize) -> Fir {
    let len = rng.gen_range(1..=max_len);
    Fir::new(
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let w = grid(256);
    let (mut comp_ok, mut interp, mut modu, mut mult) = (true, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let half: Vec<f64> = (0..rng.gen_range(1..40))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let mut taps = half.clone();
        taps.extend(half.iter().rev().skip(1));
        let f = Fir::from_real(&taps).unwrap();
        let sum = parallel_sum(&[f.clone(), complement(&f).unwrap()]).unwrap();
        comp_ok &= sum == Fir::delay(f.center().unwrap(), f.len());

        let h = random_complex(&mut rng, 63);
        let l = rng.gen_range(1..9);
        let hl = freq_response(&interpolate(&h, InterpolationFactor::new(l).unwrap()), &w).unwrap();
        let mapped: Vec<f64> = w
            .iter()
            .map(|x| (l as f64 * x).rem_euclid(2.0 * PI))
            .collect();
        let hm = freq_response(&h, &mapped).unwrap();
        let scale: f64 = h.coeffs().iter().map(|c| c.norm()).sum();
        interp = interp.max(
            hl.iter()
                .zip(&hm)
                .map(|(a, b)| (a - b).norm() / scale)
                .fold(0.0, f64::max),
        );

        let c = rng.gen_range(0.0..2.0 * PI);
        let g = freq_response(&modulate(&h, c), &w).unwrap();
        let shifted: Vec<f64> = w.iter().map(|x| (x - c).rem_euclid(2.0 * PI)).collect();
        let hs = freq_response(&h, &shifted).unwrap();
        modu = modu.max(
            g.iter()
                .zip(&hs)
                .map(|(a, b)| (a - b).norm() / scale)
                .fold(0.0, f64::max),
        );

        let b = random_complex(&mut rng, 63);
        let ab = freq_response(&cascade(&h, &b), &w).unwrap();
        let (ha, hb) = (
            freq_response(&h, &w).unwrap(),
            freq_response(&b, &w).unwrap(),
        );
        let bscale: f64 = b.coeffs().iter().map(|c| c.norm()).sum();
        mult = mult.max(
            ab.iter()
                .zip(ha.iter().zip(&hb))
                .map(|(p, (x, y))| (p - x * y).norm() / (scale * bscale))
                .fold(0.0, f64::max),
        );
    }
    check(
        comp_ok && interp < 1e-12 && modu < 1e-12 && mult < 1e-10,
        format!(
            "complement exact: {comp_ok}, interpolation {interp:.1e}, modulation {modu:.1e}, multiplicativity {mult:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for l in [10, 40] {
        let bank = bank_for(l);
        let m = bank.channel_count;
        let (ref_hi, _) = bank.crossover_levels_db(0).unwrap();
        let (_, ref_lo) = bank.crossover_levels_db(m - 1).unwrap();
        let (mut worst_x, mut worst_t) = (0.0f64, 0.0f64);
        for k in 0..m {
            let (a, b) = bank.crossover_levels_db(k).unwrap();
            worst_x = worst_x.max((a + 3.0).abs()).max((b + 3.0).abs());
            let (_, lo) = bank.crossover_levels_db((k + m - 1) % m).unwrap();
            worst_t = worst_t.max((a - ref_hi).abs()).max((lo - ref_lo).abs());
        }
        let grid = (16 * bank.max_len()).next_power_of_two();
        let dist = amplitude_distortion(&bank, grid).unwrap().peak_deviation_db;
        ok &= worst_x <= 0.5 && worst_t <= 0.5 && dist < 0.5;
        lines.push(format!(
            "M={m}: crossover max |level+3| {worst_x:.3} dB, translation spread {worst_t:.2e} dB, distortion {dist:.4} dB"
        ));
    }
    check(ok, lines.join("; "))
}

fn merge_check(bank: &UniformBank, counts: &[usize]) -> Result<(bool, f64, f64), String> {
    let merged = merge_channels(bank, counts).map_err(|e| e.to_string())?;
    let (mut ok, mut worst_ratio, mut worst_span) =
        (merged.channels.len() == counts.len(), 0.0f64, 0.0f64);
    for i in 0..counts.len() {
        let r = merged_ripple(bank, &merged, i).map_err(|e| e.to_string())?;
        let single = merged
            .allocation
            .members(i)
            .map(|k| channel_ripple_db(bank, k).unwrap())
            .fold(0.0f64, f64::max);
        let ratio = r.union_db / single;
        ok &= r.union_db <= 3.0 * single;
        worst_ratio = worst_ratio.max(ratio);
        worst_span = worst_span.max(r.span_db);
    }
    Ok((ok, worst_ratio, worst_span))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let bank = bank_for(10);
    match merge_check(&bank, &[2, 1, 3, 2]) {
        Ok((pass, ratio, span)) => {
            ok &= pass;
            lines.push(format!(
                "(2,1,3,2): worst union/single ripple {ratio:.2}, span ripple {span:.3} dB"
            ));
        }
        Err(e) => return Err(format!("(2,1,3,2): {e}")),
    }
    for p in PRESETS {
        let bank = if p.theta == THETA && p.phi == PHI && p.m == 3 {
            bank_for(p.l)
        } else {
            let s = FilterSpec::new(p.theta, p.phi, RIPPLE_DB, ATTEN_DB).unwrap();
            match synthesize(&s, &p.config(), &SynthesisOptions::default())
                .and_then(|d| build_uniform_bank(&d))
            {
                Ok(b) => b,
                Err(e) => return Err(format!("{}: {e}", p.name)),
            }
        };
        ok &= bank.channel_count == p.uniform_channels;
        match merge_check(&bank, p.allocation) {
            Ok((pass, ratio, _)) => {
                ok &= pass;
                lines.push(format!("{}: {ratio:.2}", p.name));
            }
            Err(e) => return Err(format!("{}: {e}", p.name)),
        }
    }
    check(ok, lines.join("; "))
}

fn design_file(dir: &std::path::Path, l: usize) -> std::path::PathBuf {
    let path = dir.join(format!("l{l}.json"));
    let args = DesignArgs {
        targets: Targets {
            theta: THETA,
            phi: PHI,
            ripple_db: RIPPLE_DB,
            atten_db: ATTEN_DB,
        },
        m: 3,
        l,
        case: Case::I,
        allocation: None,
        output: path.clone(),
        command_line: "acceptance".into(),
    };
    cmd_design(&args).unwrap();
    path
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let design = design_file(dir.path(), 10);
    let m = 8;
    let counts = [2usize, 1, 3, 2];
    // One tone at the centre of every uniform channel, tagged with the merged
    // channel that contains it.
    let mut owner = Vec::new();
    for (i, &a) in counts.iter().enumerate() {
        owner.extend(std::iter::repeat(i).take(a));
    }
    let tones: Vec<(f64, f64)> = (0..m)
        .map(|k| (2.0 * PI * k as f64 / m as f64, 1.0))
        .collect();
    let report = cmd_channelize(&ChannelizeArgs {
        design: design.clone(),
        allocation: None,
        preset: Some("CDMA2000-x4".into()),
        source: SignalSource::Tones {
            tones,
            samples: 8192,
        },
        output_dir: dir.path().join("merged"),
    })
    .map_err(|e| e.to_string())?;
    let mut ok = true;
    let (mut loss, mut rejection) = (0.0f64, f64::INFINITY);
    for (k, t) in report.tones.iter().enumerate() {
        ok &= t.home_channel == owner[k];
        loss = loss.max(t.co_channel_loss_db.abs());
        rejection = rejection.min(t.min_rejection_db);
    }
    ok &= loss <= 0.1 && rejection >= 55.0;

    let crossings: Vec<(f64, f64)> = (0..m)
        .map(|k| (2.0 * PI * k as f64 / m as f64 + PI / m as f64, 1.0))
        .collect();
    let split = cmd_channelize(&ChannelizeArgs {
        design,
        allocation: Some(vec![1; m]),
        preset: None,
        source: SignalSource::Tones {
            tones: crossings,
            samples: 8192,
        },
        output_dir: dir.path().join("uniform"),
    })
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (k, t) in split.tones.iter().enumerate() {
        worst = worst
            .max((t.levels_db[k] + 3.0).abs())
            .max((t.levels_db[(k + 1) % m] + 3.0).abs());
    }
    ok &= worst <= 0.5;
    check(
        ok,
        format!(
            "co-channel loss {loss:.4} dB, min rejection {rejection:.1} dB, crossover split max |level+3| {worst:.3} dB"
        ),
    )
}

fn naive_dtft(h: &Fir, w: f64) -> Complex64 {
    h.coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -(w * n as f64).rem_euclid(2.0 * PI)))
        .sum()
}

fn naive_conv(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let (mut dtft, mut conv_ok) = (0.0f64, true);
    for _ in 0..100 {
        let h = random_complex(&mut rng, 512);
        let w: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let got = freq_response(&h, &w).unwrap();
        let scale: f64 = h.coeffs().iter().map(|c| c.norm()).sum();
        for (g, x) in got.iter().zip(&w) {
            dtft = dtft.max((g - naive_dtft(&h, *x)).norm() / scale);
        }
        let b = random_complex(&mut rng, 64);
        conv_ok &= cascade(&h, &b).coeffs() == naive_conv(h.coeffs(), b.coeffs()).as_slice();
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let design = design_file(dir.path(), 10);
    let bank = bank_for(10);
    let x: Vec<Complex64> = (0..2048)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let input = dir.path().join("x.f32");
    std::fs::write(&input, encode_raw(&x)).unwrap();
    // The raw file stores f32, so the oracle filters the rounded samples.
    let x32: Vec<Complex64> = x
        .iter()
        .map(|v| Complex64::new(v.re as f32 as f64, v.im as f32 as f64))
        .collect();
    let out = dir.path().join("out");
    cmd_channelize(&ChannelizeArgs {
        design,
        allocation: Some(vec![1; bank.channel_count]),
        preset: None,
        source: SignalSource::Raw(input),
        output_dir: out.clone(),
    })
    .map_err(|e| e.to_string())?;
    let mut chan_ok = true;
    for (k, h) in bank.channels.iter().enumerate() {
        let full = naive_conv(h.coeffs(), &x32);
        let expected = encode_raw(&full[..x32.len()]);
        chan_ok &= std::fs::read(out.join(format!("channel_{k}.f32"))).unwrap() == expected;
    }
    // Tone synthesis and the library convolution agree with the same oracle.
    let tone = synth_tones(&[(0.3, 1.0)], 300);
    chan_ok &=
        convolve(&tone, &bank.channels[1]) == naive_conv(bank.channels[1].coeffs(), &tone)[..300];
    check(
        dtft <= 1e-12 && conv_ok && chan_ok,
        format!("DTFT max rel error {dtft:.1e}, cascade exact: {conv_ok}, trivial channelize exact: {chan_ok}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("masking-edge exactness", criterion_1),
        ("channel-count exactness", criterion_2),
        ("multiplier totals", criterion_3),
        ("overall-filter specs", criterion_4),
        ("algebraic identities", criterion_5),
        ("bank properties", criterion_6),
        ("non-uniform merging", criterion_7),
        ("channelizer harness", criterion_8),
        ("oracle equivalences", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(d) => println!("criterion {} PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
