//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use qpattern::combinatorics::{
    degeneracy_k_given_s, degeneracy_s, degeneracy_s_by_partitions, degeneracy_s_given_k, degeneracy_sk,
    g_k_given_s, rational_to_exact_string,
};
use qpattern::degenerate::{load_idx, ClassifierSpec, EveKnowledge, Experiment, LabeledPatternSet, RepeatedRate};
use qpattern::ensemble::{holevo, pgm_error};
use qpattern::ltpf::{k_inference_factors, k_inference_prob, rate_individual};
use qpattern::pattern::enumerate_ktpf;
use qpattern::rates::{linspace, sweep_ltpf, HIERARCHY_SLACK};
use qpattern::{
    Attack, ChannelParams, ImageSpace, LocalityPartition, LtpfScheme, Modulation, Pattern, Priors, TpfAssignment,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const NS_LIST: [f64; 4] = [0.25, 0.5, 1.5, 3.0];

fn figure_one(ns: f64) -> LtpfScheme {
    LtpfScheme::new(
        LocalityPartition::new(vec![vec![0, 4, 7], vec![1, 2, 5, 8, 9], vec![3, 6, 10]]).unwrap(),
        TpfAssignment::new(vec![1, 2, 1]),
        Modulation::bpsk(ns).unwrap(),
    )
    .unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn symmetry_zero() -> Outcome {
    let mut worst: f64 = 0.0;
    for ns in NS_LIST {
        worst = worst.max(rate_individual(&figure_one(ns), 0.5).map_err(|e| e.to_string())?.abs());
    }
    check(worst < 1e-9, format!("max |R_ind(0.5)| = {worst:.2e}"))
}

fn probabilistic_window() -> Outcome {
    let r = sweep_ltpf(&figure_one(0.25), &[0.15], &[0.25], Attack::Probabilistic).map_err(|e| e.to_string())?;
    let r_pr = r[0].r_pr.expect("probabilistic tier");
    let grid = linspace(0.005, 0.995, 199);
    let mut thresholds = Vec::new();
    for ns in NS_LIST {
        let points = sweep_ltpf(&figure_one(ns), &grid, &[ns], Attack::Probabilistic).map_err(|e| e.to_string())?;
        let first = points.iter().find(|p| p.r_pr.is_some_and(|r| r > 0.0)).map(|p| p.eta);
        thresholds.push(first.unwrap_or(f64::INFINITY));
    }
    let increasing = thresholds.windows(2).all(|w| w[1] > w[0]);
    check(
        r_pr > 0.0 && increasing,
        format!("R_pr(0.15, 0.25) = {r_pr:.4}; positive-rate thresholds {thresholds:.3?} for N_S {NS_LIST:?}"),
    )
}

fn hierarchy() -> Outcome {
    let grid = linspace(0.01, 0.99, 50);
    let points = sweep_ltpf(&figure_one(0.25), &grid, &NS_LIST, Attack::All).map_err(|e| e.to_string())?;
    let bad: Vec<_> = points.iter().filter(|p| !p.hierarchy_holds(HIERARCHY_SLACK)).map(|p| (p.eta, p.ns)).collect();
    check(points.len() == 200 && bad.is_empty(), format!("{} points, violations at {bad:?}", points.len()))
}

fn helstrom_cross_check() -> Outcome {
    let mut pairs: Vec<(Pattern, Pattern)> = Vec::new();
    for m in 1..=3usize {
        for a in 0..1usize << m {
            for bit in 0..m {
                let b = a ^ (1 << bit);
                if a < b {
                    let p = |x: usize| Pattern::binary((0..m).map(|i| ((x >> i) & 1) as u8).collect()).unwrap();
                    pairs.push((p(a), p(b)));
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        for i in 1..=10 {
            for j in 1..=10 {
                let (eta, ns) = (i as f64 / 10.0, j as f64 * 0.3);
                let space = ImageSpace::new(vec![a.clone(), b.clone()], Modulation::bpsk(ns).unwrap()).unwrap();
                let p = pgm_error(&space, &ChannelParams::bob(eta).unwrap()).map_err(|e| e.to_string())?;
                let flip = (1.0 - (1.0 - (-4.0 * eta * ns).exp()).sqrt()) / 2.0;
                worst = worst.max((p - flip).abs());
            }
        }
    }
    check(worst < 1e-9, format!("{} pattern pairs x 100 grid points, max deviation {worst:.2e}", pairs.len()))
}

fn entropy_limits() -> Outcome {
    let mut worst_zero: f64 = 0.0;
    let mut worst_full: f64 = 0.0;
    for (m, k) in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3)] {
        let space = enumerate_ktpf(m, k, Modulation::bpsk(1.0).unwrap()).unwrap();
        let u = Priors::uniform(space.len()).unwrap();
        let dark = holevo(&space.with_modulation(Modulation::bpsk(0.0).unwrap()), &u, &ChannelParams::bob(1.0).unwrap());
        let lost = holevo(&space, &u, &ChannelParams::bob(0.0).unwrap());
        worst_zero = worst_zero.max(dark.map_err(|e| e.to_string())?.abs()).max(lost.map_err(|e| e.to_string())?.abs());
        let bright = space.with_modulation(Modulation::bpsk(30.0).unwrap());
        let chi = holevo(&bright, &u, &ChannelParams::bob(1.0).unwrap()).map_err(|e| e.to_string())?;
        worst_full = worst_full.max((chi - (space.len() as f64).log2()).abs());
    }
    check(
        worst_zero < 1e-6 && worst_full < 1e-6,
        format!("max |chi| at zero amplitude {worst_zero:.2e}; max |chi - log2 N| at N_S = 30 {worst_full:.2e}"),
    )
}

/// Block-size profiles of every set partition of `m` labelled elements.
fn set_partition_profiles(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    loop {
        let blocks = rgs.iter().max().map_or(0, |&b| b + 1);
        let mut sizes = vec![0usize; blocks];
        for &b in &rgs {
            sizes[b] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        out.push(sizes);
        // Next restricted growth string.
        let mut i = m - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for x in &mut rgs[i + 1..] {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn matchable(sizes: &[usize], targets: &[usize]) -> bool {
    fn go(sizes: &[usize], targets: &[usize], used: u32) -> bool {
        match targets.split_first() {
            None => true,
            Some((&k, rest)) => (0..sizes.len()).any(|i| used & (1 << i) == 0 && sizes[i] > k && go(sizes, rest, used | 1 << i)),
        }
    }
    sizes.len() == targets.len() && go(sizes, targets, 0)
}

fn combinatorics_oracle() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for m in 2..=8 {
        let blocks: Vec<Vec<usize>> =
            set_partition_profiles(m).into_iter().filter(|p| p.iter().all(|&x| x >= 2)).collect();
        if degeneracy_s(m).unwrap().to_string() != blocks.len().to_string() {
            failures.push(format!("G_S({m})"));
        }
        let sk: usize = blocks.iter().map(|p| p.iter().map(|x| x - 1).product::<usize>()).sum();
        if degeneracy_sk(m).unwrap().to_string() != sk.to_string() {
            failures.push(format!("G_SK({m})"));
        }
        for sizes in &blocks {
            let brute: usize = sizes.iter().map(|s| (1..*s).count()).product();
            if degeneracy_k_given_s(sizes).unwrap().to_string() != brute.to_string() {
                failures.push(format!("G_K|S({sizes:?})"));
            }
        }
        for n in 1..=m / 2 {
            let mut targets = vec![1usize; n];
            loop {
                if targets.iter().map(|k| k + 1).sum::<usize>() <= m {
                    let brute = blocks.iter().filter(|p| matchable(p, &targets)).count();
                    if degeneracy_s_given_k(m, &targets).unwrap().to_string() != brute.to_string() {
                        failures.push(format!("G_S|K({m}, {targets:?})"));
                    }
                }
                // Next non-increasing target vector with entries < m.
                match (0..n).rev().find(|&j| targets[j] + 1 < m && (j == 0 || targets[j] < targets[j - 1])) {
                    Some(j) => {
                        targets[j] += 1;
                        for x in &mut targets[j + 1..] {
                            *x = 1;
                        }
                    }
                    None => break,
                }
            }
        }
    }
    for m in 2..=12 {
        if degeneracy_s(m).unwrap() != degeneracy_s_by_partitions(m).unwrap() {
            failures.push(format!("dual formula m={m}"));
        }
    }
    let mut bound_detail = Vec::new();
    for m in 2..=12 {
        let best = set_partition_profiles(m)
            .iter()
            .filter(|p| p.iter().all(|&x| x >= 2))
            .map(|p| p.iter().map(|x| x - 1).product::<usize>())
            .max()
            .unwrap();
        let g = rational_to_exact_string(&g_k_given_s(m).unwrap());
        if g != best.to_string() {
            failures.push(format!("g_K|S({m})"));
            bound_detail.push(format!("m={m}: closed form {g}, enumeration max {best}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1}s"));
    }
    check(
        failures.is_empty(),
        format!("{elapsed:.1}s; mismatches: {failures:?} {}", bound_detail.join("; ")),
    )
}

fn p_dec_behaviour() -> Outcome {
    let grid = linspace(0.01, 0.99, 50);
    let points = sweep_ltpf(&figure_one(0.25), &grid, &NS_LIST, Attack::Probabilistic).map_err(|e| e.to_string())?;
    let in_range = points.iter().all(|p| p.p_dec.is_some_and(|x| (0.0..=1.0).contains(&x)));
    let pairs = LtpfScheme::new(
        LocalityPartition::contiguous(&[2, 4, 2]).unwrap(),
        TpfAssignment::new(vec![1, 2, 1]),
        Modulation::bpsk(0.5).unwrap(),
    )
    .unwrap();
    let mut exact_one = true;
    for &eta in &grid {
        let f = k_inference_factors(&pairs, eta).map_err(|e| e.to_string())?;
        exact_one &= f[0] == 1.0 && f[2] == 1.0;
    }
    let bright = k_inference_prob(&figure_one(20.0), 0.1).map_err(|e| e.to_string())?;
    check(
        in_range && exact_one && bright > 0.999,
        format!("in [0,1]: {in_range}; size-2 factors exactly 1: {exact_one}; p_dec(N_S=20, eta=0.1) = {bright:.6}"),
    )
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("QPATTERN_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

fn load_mnist(prefix: &str) -> Result<LabeledPatternSet, String> {
    let dir = mnist_dir();
    let raw = load_idx(dir.join(format!("{prefix}-images-idx3-ubyte")), dir.join(format!("{prefix}-labels-idx1-ubyte")))
        .map_err(|e| format!("MNIST unavailable in {} ({e}); run scripts/fetch_mnist.sh", dir.display()))?;
    LabeledPatternSet::from_grayscale(&raw, 127).map_err(|e| e.to_string())
}

fn mnist_properties() -> Outcome {
    let start = Instant::now();
    let train = load_mnist("train")?;
    let eval = load_mnist("t10k")?;
    if eval.len() != 10_000 {
        return Err(format!("evaluation set has {} items", eval.len()));
    }
    let exp = Experiment::new(ClassifierSpec::NearestCentroid, &train, &eval).map_err(|e| e.to_string())?;
    let reps = 20;
    let seed = 42;
    let run = |eta: f64, ns: f64, eve: EveKnowledge| -> Result<RepeatedRate, String> {
        exp.repeat(eta, &Modulation::bpsk(ns).unwrap(), eve, reps, seed).map_err(|e| e.to_string())
    };
    let minimal = EveKnowledge::Diminished { training_size: 10 };

    let mut ok = true;
    let mut notes = Vec::new();

    // (a) and (b) at N_S = 0.5.
    for eta in [0.3, 0.5, 0.7] {
        let sym = run(eta, 0.5, EveKnowledge::Full)?;
        let dim = run(eta, 0.5, minimal)?;
        if eta == 0.5 {
            let a = sym.rate.mean.abs() < 3.0 * sym.rate.std_err;
            ok &= a;
            notes.push(format!("(a) R_ind(0.5) = {:.4} +- {:.4}: {a}", sym.rate.mean, sym.rate.std_err));
        }
        let b = dim.rate.mean >= sym.rate.mean;
        ok &= b;
        notes.push(format!("(b) eta {eta}: R_dim {:.3} >= R_ind {:.3}: {b}", dim.rate.mean, sym.rate.mean));
    }

    // (c) Bob's information along eta.
    let etas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let i_ab: Vec<_> = etas.iter().map(|&e| run(e, 0.5, EveKnowledge::Full).map(|r| r.i_ab)).collect::<Result<_, _>>()?;
    let c = i_ab.windows(2).all(|w| w[1].mean >= w[0].mean - 3.0 * w[0].std_err.hypot(w[1].std_err));
    ok &= c;
    notes.push(format!("(c) I_AB {:?}: {c}", i_ab.iter().map(|s| format!("{:.3}", s.mean)).collect::<Vec<_>>()));

    // (d) plateau at N_S = 3.
    let plateau: Vec<f64> = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        .iter()
        .map(|&e| run(e, 3.0, minimal).map(|r| r.rate.mean))
        .collect::<Result<_, _>>()?;
    let spread = plateau.iter().cloned().fold(f64::MIN, f64::max) - plateau.iter().cloned().fold(f64::MAX, f64::min);
    let d = spread < 0.2;
    ok &= d;
    notes.push(format!("(d) R_dim spread at N_S = 3: {spread:.3}: {d}"));

    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 900.0;
    notes.push(format!("{elapsed:.0}s"));
    check(ok, notes.join("; "))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_qpattern"))
        .args(args)
        .arg("--output")
        .arg(&out)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let data = mnist_dir();
    let data = data.to_str().ok_or("non-UTF-8 data path")?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["ltpf", "--scheme", "3:1,5:2,3:1", "--ns", "0.25,1.5", "--eta", "0.01:0.99:50", "--attack", "all"],
        vec!["degeneracy", "--m", "2:12"],
        vec!["ensemble", "inspect", "--ktpf", "5:2", "--ns", "0.4", "--eta", "0.3", "--side", "eve"],
        vec![
            "mnist", "--data-dir", data, "--ns", "0.5", "--eta", "0.6", "--eve-train-size", "10", "--reps", "2",
            "--seed", "42",
        ],
    ];
    let mut checked = 0;
    for cmd in &commands {
        let first = run_cli(cmd)?;
        let again = run_cli(cmd)?;
        let mut single = cmd.clone();
        single.extend(["--threads", "1"]);
        let serial = run_cli(&single)?;
        let mut multi = cmd.clone();
        multi.extend(["--threads", "3"]);
        let parallel = run_cli(&multi)?;
        if first != again || first != serial || first != parallel {
            return Err(format!("output of {} differs between runs", cmd[0]));
        }
        checked += 1;
    }
    Ok(format!("{checked} commands byte-identical across repeats and thread counts 1, 3 and default"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("symmetry zero", symmetry_zero),
        ("probabilistic-attack security window", probabilistic_window),
        ("rate hierarchy", hierarchy),
        ("Helstrom cross-check", helstrom_cross_check),
        ("entropy/Holevo limits", entropy_limits),
        ("combinatorics oracle equivalence", combinatorics_oracle),
        ("p_dec behaviour", p_dec_behaviour),
        ("MNIST properties", mnist_properties),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s) - {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL  {name} ({secs:.1}s) - {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
