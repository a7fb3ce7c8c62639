//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

/// Permanent as a sum over all permutations (Heap's algorithm).
pub fn naive_permanent(a: &[Complex64], n: usize) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let term = |p: &[usize]| {
        p.iter()
            .enumerate()
            .map(|(r, &col)| a[r * n + col])
            .product::<Complex64>()
    };
    let mut sum = term(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sum += term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    sum
}

/// Every occupation vector of `n` bosons over `m` modes.
pub fn fock_states(n: usize, m: usize) -> Vec<Vec<u8>> {
    fn rec(left: usize, mode: usize, m: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if mode == m - 1 {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u8);
            rec(left - k, mode + 1, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, m, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: u8) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

fn repeated(occ: &[u8]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize))
        .collect()
}

/// `|per(U_{T,S})|² / (Π s_i! Π t_j!)` with `U[out][in]`, computed from
/// the permutation sum.
pub fn naive_fock_probability(u: &dyn Fn(usize, usize) -> Complex64, s: &[u8], t: &[u8]) -> f64 {
    let cols = repeated(s);
    let rows = repeated(t);
    let n = cols.len();
    let sub: Vec<Complex64> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .map(|(r, c)| u(r, c))
        .collect();
    let norm: f64 = s.iter().chain(t).map(|&k| factorial(k)).product();
    naive_permanent(&sub, n).norm_sqr() / norm
}

/// `Γ(k/2)` for positive integer `k`, from `Γ(1) = 1`, `Γ(1/2) = √π` and
/// the recurrence.
fn gamma_half(k: usize) -> f64 {
    let (mut g, mut x) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while x < k as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `P(X > x)` for `X ~ χ²(k)` by Gauss–Legendre quadrature of the density
/// after the substitution `x = t²` (which removes the singularity at 0 for
/// `k = 1`).
pub fn chi_square_sf_quadrature(x: f64, k: usize) -> f64 {
    // 20-point Gauss–Legendre on each of many panels
    const NODES: [f64; 10] = [
        0.076_526_521_133_497_33,
        0.227_785_851_141_645_08,
        0.373_706_088_715_419_56,
        0.510_867_001_950_827_1,
        0.636_053_680_726_515,
        0.746_331_906_460_150_8,
        0.839_116_971_822_218_8,
        0.912_234_428_251_326,
        0.963_971_927_277_913_8,
        0.993_128_599_185_094_9,
    ];
    const WEIGHTS: [f64; 10] = [
        0.152_753_387_130_725_85,
        0.149_172_986_472_603_75,
        0.142_096_109_318_382_05,
        0.131_688_638_449_176_63,
        0.118_194_531_961_518_42,
        0.101_930_119_817_240_44,
        0.083_276_741_576_704_75,
        0.062_672_048_334_109_06,
        0.040_601_429_800_386_94,
        0.017_614_007_139_152_12,
    ];
    let norm = 2.0f64.powf(k as f64 / 2.0) * gamma_half(k);
    let f = |t: f64| 2.0 * t.powi(k as i32 - 1) * (-t * t / 2.0).exp() / norm;
    let upper = x.sqrt();
    let panels = 2000;
    let h = upper / panels as f64;
    let mut cdf = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, w) in NODES.iter().zip(WEIGHTS) {
            cdf += w * (f(mid + xi * h / 2.0) + f(mid - xi * h / 2.0)) * h / 2.0;
        }
    }
    1.0 - cdf
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against `cdf`: `(D, p)`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// Two-sample Kolmogorov–Smirnov test: `(D, p)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < na && j < nb {
        let v = a[i].min(b[j]);
        while i < na && a[i] <= v {
            i += 1;
        }
        while j < nb && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// Binomial standard deviation of a proportion.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Runs the `bosonvalid` binary in `dir` and returns its exit code.
pub fn run_cli(dir: &std::path::Path, args: &[&str]) -> i32 {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_bosonvalid"))
        .args(args)
        .current_dir(dir)
        .env_remove("BOSONVALID_JOBS")
        .output()
        .expect("binary runs");
    out.status.code().expect("exit code")
}

/// The command sequence used for determinism checks: one invocation of
/// every subcommand, all with relative paths.
pub const CLI_SCRIPT: &[&[&str]] = &[
    &[
        "gen-unitary",
        "--modes",
        "13",
        "--seed",
        "7",
        "--out",
        "u.json",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "ind",
        "--events",
        "500",
        "--seed",
        "1",
        "--out",
        "a.jsonl",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "ind",
        "--events",
        "500",
        "--seed",
        "2",
        "--out",
        "b.jsonl",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "dis",
        "--events",
        "500",
        "--seed",
        "3",
        "--out",
        "c.jsonl",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "mf",
        "--events",
        "300",
        "--seed",
        "4",
        "--out",
        "mf.jsonl",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "unif",
        "--events",
        "300",
        "--seed",
        "5",
        "--out",
        "unif.jsonl",
    ],
    &[
        "sample",
        "--unitary",
        "u.json",
        "--input",
        "1,2,3",
        "--model",
        "ind",
        "--method",
        "mcmc",
        "--events",
        "300",
        "--seed",
        "6",
        "--burn-in",
        "50",
        "--thin",
        "10",
        "--out",
        "mcmc.jsonl",
        "--tvd-report",
        "tvd.json",
    ],
    &[
        "validate",
        "--reference",
        "a.jsonl",
        "--candidate",
        "b.jsonl",
        "--seed",
        "9",
        "--report",
        "v_ab.json",
    ],
    &[
        "validate",
        "--reference",
        "a.jsonl",
        "--candidate",
        "c.jsonl",
        "--seed",
        "9",
        "--report",
        "v_ac.json",
    ],
    &[
        "validate",
        "--reference",
        "a.jsonl",
        "--candidate",
        "c.jsonl",
        "--algorithm",
        "bubble",
        "--report",
        "v_bubble.json",
    ],
    &["experiment", "--spec", "spec.json", "--out", "exp.json"],
    &[
        "analyze",
        "--report",
        "sorted",
        "--unitary-ensemble",
        "3",
        "--dims",
        "3,8",
        "--seed",
        "4",
        "--out",
        "sorted.csv",
    ],
    &[
        "analyze",
        "--report",
        "cumulative",
        "--unitary-ensemble",
        "3",
        "--dims",
        "3,8",
        "--seed",
        "4",
        "--out",
        "cum.csv",
    ],
    &[
        "analyze",
        "--report",
        "ball",
        "--unitary-ensemble",
        "2",
        "--dims",
        "3,10",
        "--top",
        "5",
        "--seed",
        "4",
        "--out",
        "ball.csv",
    ],
    &[
        "analyze", "--report", "corr", "--sample", "a.jsonl", "--out", "corr.csv",
    ],
];

/// Experiment spec used by [`CLI_SCRIPT`].
pub const CLI_SPEC: &str = r#"{
  "models": ["ind", "dis"],
  "N": 3,
  "m": 8,
  "sample_size": 300,
  "trials": 3,
  "unitaries": 2,
  "algorithm": "kmeans",
  "k": 10,
  "metric": "l2",
  "voting_trials": 3,
  "alpha": 0.05,
  "master_seed": 11
}"#;

/// Runs [`CLI_SCRIPT`] in `dir`, returning the exit codes.
pub fn run_cli_script(dir: &std::path::Path) -> Vec<i32> {
    std::fs::write(dir.join("spec.json"), CLI_SPEC).unwrap();
    CLI_SCRIPT.iter().map(|args| run_cli(dir, args)).collect()
}

/// Every file in `dir` except run manifests (which carry timestamps),
/// sorted by name, with contents.
pub fn artifacts(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
