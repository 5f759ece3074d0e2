//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hlll_core::datagen::{
    generate, grid_n, trial_seed, DataGenConfig, Dataset, Generator, InputKind,
};
use hlll_core::distribution::{exact_tails, pr_register_eq, register_entropy, tail_bounds};
use hlll_core::io::{deserialize, serialize, Sketch};
use hlll_core::{
    CardinalitySketch, Error, HashFunction, HashKind, HllSketch, HlllSketch, PackedArray, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_dataset(rng: &mut ChaCha8Rng, log2m: u8, max_n: u64) -> Dataset {
    let kind = InputKind::ALL[rng.random_range(0..3)];
    let n = rng.random_range(0..=max_n);
    generate(&DataGenConfig {
        kind,
        n,
        log2m,
        seed: rng.random(),
    })
    .unwrap()
}

fn build_hlll(
    data: &Dataset,
    log2m: u8,
    kappa: u8,
    hash: HashFunction,
    variant: Variant,
) -> HlllSketch {
    let mut s = HlllSketch::with_kappa(log2m, kappa, hash, variant).unwrap();
    data.feed(&mut s).unwrap();
    s
}

fn parity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for stream in 0..200 {
        let log2m = rng.random_range(4..=10u8);
        let data = random_dataset(&mut rng, log2m, 100_000);
        let hash = HashFunction::new(HashKind::Xxh3, rng.random());
        let mut hll = HllSketch::new(log2m, hash).unwrap();
        data.feed(&mut hll).unwrap();
        let want: Vec<u8> = hll.registers().collect();
        for v in Variant::ALL {
            let s = build_hlll(&data, log2m, 3, hash, v);
            ensure(s.registers().eq(want.iter().copied()), || {
                format!("stream {stream}: {v} registers differ from hll")
            })?;
            ensure(s.estimate().to_bits() == hll.estimate().to_bits(), || {
                format!(
                    "stream {stream}: {v} estimate {} != hll {}",
                    s.estimate(),
                    hll.estimate()
                )
            })?;
        }
    }
    Ok("200 streams, 3 variants, registers and estimates identical".into())
}

fn accuracy() -> Outcome {
    let (log2m, n, trials) = (10u8, 1u64 << 20, 50u64);
    let mut errs = Vec::new();
    for t in 0..trials {
        let data = generate(&DataGenConfig {
            kind: InputKind::Pair,
            n,
            log2m,
            seed: trial_seed(2, t),
        })
        .unwrap();
        let s = build_hlll(&data, log2m, 3, HashFunction::default(), Variant::Exact);
        errs.push(s.estimate() / n as f64 - 1.0);
    }
    let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    let detail = format!("rms {rms:.5} in [0.0228, 0.0455], mean {mean:+.5} within 0.014");
    ensure(
        (0.0228..=0.0455).contains(&rms) && mean.abs() <= 0.014,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn compression() -> Outcome {
    let (log2m, chunks, trials) = (14u8, 64usize, 10u64);
    let budget = 0.65 * 6.0 * (1u64 << log2m) as f64;
    let (mut exact_total, mut basemin_total) = (0usize, 0usize);
    let mut worst = 0usize;
    for t in 0..trials {
        let mut sketches =
            Variant::ALL.map(|v| HlllSketch::new(log2m, HashFunction::default(), v).unwrap());
        let mut g = Generator::new(InputKind::Pair, log2m, trial_seed(3, t)).unwrap();
        for _ in 0..chunks {
            let data = g.take(1 << 20);
            sketches.iter_mut().for_each(|s| data.feed(s).unwrap());
        }
        let [exact, star, basemin] = sketches.map(|s| s.size_bits());
        ensure(exact as f64 <= budget, || {
            format!("trial {t}: hlll {exact} bits > {budget}")
        })?;
        ensure(
            (star as f64 - exact as f64).abs() <= 0.01 * exact as f64,
            || format!("trial {t}: hlll-star {star} bits vs hlll {exact}"),
        )?;
        exact_total += exact;
        basemin_total += basemin;
        worst = worst.max(exact);
    }
    ensure(basemin_total > exact_total, || {
        format!("hlll-b total {basemin_total} not above hlll {exact_total}")
    })?;
    Ok(format!(
        "worst hlll {worst} bits ({:.3} of 6m), mean hlll-b/hlll {:.3}",
        worst as f64 / (6 << log2m) as f64,
        basemin_total as f64 / exact_total as f64
    ))
}

fn optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..1000 {
        let kappa = rng.random_range(1..=6u8);
        let max_n = 1 << rng.random_range(0..20);
        let data = random_dataset(&mut rng, 4, max_n);
        let s = build_hlll(&data, 4, kappa, HashFunction::default(), Variant::Exact);
        let regs: Vec<u8> = s.registers().collect();
        let dense = |b: u32| {
            regs.iter()
                .filter(|&&r| (b..b + (1 << kappa)).contains(&(r as u32)))
                .count()
        };
        let ours = dense(s.base() as u32);
        if let Some(b) = (0..64).find(|&b| dense(b) > ours) {
            return Err(format!(
                "sketch {trial}: base {b} holds {} dense registers, B={} holds {ours}",
                dense(b),
                s.base()
            ));
        }
    }
    Ok("1000 sketches, no base beats B".into())
}

fn merge_union() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for pair in 0..100 {
        let log2m = rng.random_range(4..=12u8);
        let hash = HashFunction::new(HashKind::Xxh3, rng.random());
        let kappa = rng.random_range(1..=6u8);
        let a = random_dataset(&mut rng, log2m, 50_000);
        let b = random_dataset(&mut rng, log2m, 50_000);
        for v in Variant::ALL {
            let merged = build_hlll(&a, log2m, kappa, hash, v)
                .merge(&build_hlll(&b, log2m, kappa, hash, v))
                .unwrap();
            let mut union = build_hlll(&a, log2m, kappa, hash, v);
            b.feed(&mut union).unwrap();
            ensure(merged.registers().eq(union.registers()), || {
                format!("pair {pair}: {v} registers differ")
            })?;
            ensure(
                merged.estimate().to_bits() == union.estimate().to_bits(),
                || format!("pair {pair}: {v} estimates differ"),
            )?;
            ensure(merged.check_invariants().is_ok(), || {
                format!("pair {pair}: {v} merge broke invariants")
            })?;
            if v == Variant::Exact {
                ensure(
                    serialize(&merged.into()) == serialize(&union.into()),
                    || format!("pair {pair}: exact merge bytes differ from union"),
                )?;
            }
        }
    }
    Ok("100 pairs, 3 variants".into())
}

fn oracle() -> Outcome {
    let (log2m, n, sketches) = (4u8, 1024u64, 100_000u64);
    let mut counts = [0u64; 64];
    let mut g = Generator::new(InputKind::U64, log2m, 6).unwrap();
    for _ in 0..sketches {
        let mut s = HllSketch::new(log2m, HashFunction::default()).unwrap();
        for _ in 0..n {
            s.update(&g.next_u64());
        }
        counts[s.register(0).unwrap() as usize] += 1;
    }
    let tv = 0.5
        * (0..64u8)
            .map(|k| {
                (counts[k as usize] as f64 / sketches as f64
                    - pr_register_eq::<f64>(16, n, k).unwrap())
                .abs()
            })
            .sum::<f64>();
    ensure(tv <= 0.02, || format!("total variation {tv:.5} > 0.02"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let m = 1u64 << rng.random_range(4..=18);
        let n = m << rng.random_range(1..=30);
        let b = (n as f64 / m as f64).log2();
        let delta = rng.random_range(0.001..0.999) * b;
        let (lo, hi) = tail_bounds::<f64>(m, n, delta).unwrap();
        let (below, above) = exact_tails::<f64>(m, n, delta).unwrap();
        ensure(below <= lo && above <= hi, || {
            format!(
                "m={m} n={n} delta={delta}: tails ({below}, {above}) exceed bounds ({lo}, {hi})"
            )
        })?;
    }
    Ok(format!("total variation {tv:.5}, 50 tail triples bounded"))
}

fn time_halves(data: &Dataset) -> (Duration, Duration, HlllSketch) {
    let mut s = HlllSketch::new(10, HashFunction::default(), Variant::Exact).unwrap();
    let half = data.len() / 2;
    let t = Instant::now();
    data.feed_range(&mut s, 0..half).unwrap();
    let first = t.elapsed();
    let t = Instant::now();
    data.feed_range(&mut s, half..data.len()).unwrap();
    (first, t.elapsed(), s)
}

fn amortized() -> Outcome {
    let data = generate(&DataGenConfig {
        kind: InputKind::Pair,
        n: 1 << 24,
        log2m: 10,
        seed: 7,
    })
    .unwrap();
    // best of three runs per half, to keep scheduler noise out of the ratio
    let mut best = (Duration::MAX, Duration::MAX);
    let mut calls = 0;
    for _ in 0..3 {
        let (a, b, s) = time_halves(&data);
        best = (best.0.min(a), best.1.min(b));
        calls = s.stats().compress_calls;
    }
    let ratio = best.1.as_secs_f64() / best.0.as_secs_f64();
    let detail = format!(
        "compress calls {calls} (limit {}), second/first half {ratio:.3}",
        63 * 1024
    );
    ensure(calls <= 63 * 1024 && ratio <= 0.75, || detail.clone())?;
    Ok(detail)
}

fn overflow() -> Outcome {
    let (log2m, trials) = (10u8, 100u64);
    let m = 1u64 << log2m;
    let limit = (m / log2m as u64) as usize;
    let mut sizes = Vec::new();
    for t in 0..trials {
        let cfg = DataGenConfig {
            kind: InputKind::Pair,
            n: 64 * m * log2m as u64,
            log2m,
            seed: trial_seed(8, t),
        };
        let s = build_hlll(
            &generate(&cfg).unwrap(),
            log2m,
            3,
            HashFunction::default(),
            Variant::Exact,
        );
        sizes.push(s.sparse_len());
    }
    let ok = sizes.iter().filter(|&&s| s <= limit).count();
    let detail = format!(
        "{ok}/100 trials with |S| <= {limit}, max {}",
        sizes.iter().max().unwrap()
    );
    ensure(ok >= 99, || detail.clone())?;
    Ok(detail)
}

fn entropy() -> Outcome {
    let m = 1024u64;
    let mut worst: f64 = 0.0;
    for i in 0..30 {
        let n = (m as f64 * 2f64.powf(8.0 + 12.0 * i as f64 / 29.0)).round() as u64;
        let h = register_entropy::<f64>(m, n).unwrap();
        ensure(h <= 2.84, || format!("n={n}: entropy {h}"))?;
        worst = worst.max(h);
    }
    // the grid used by the benchmark, restricted to the same load range
    for i in 36..=60 {
        let h = register_entropy::<f64>(m, grid_n(i)).unwrap();
        ensure(h <= 2.84, || format!("n={}: entropy {h}", grid_n(i)))?;
        worst = worst.max(h);
    }
    Ok(format!("max entropy {worst:.5} bits"))
}

fn random_sketch(rng: &mut ChaCha8Rng) -> Sketch {
    let log2m = rng.random_range(4..=12u8);
    let kind = if rng.random() {
        HashKind::Xxh3
    } else {
        HashKind::Xxh64
    };
    let hash = HashFunction::new(kind, rng.random());
    let max_n = 1 << rng.random_range(0..18);
    let data = random_dataset(rng, log2m, max_n);
    match rng.random_range(0..4) {
        0 => {
            let mut s = HllSketch::new(log2m, hash).unwrap();
            data.feed(&mut s).unwrap();
            s.into()
        }
        k => build_hlll(
            &data,
            log2m,
            rng.random_range(1..=6),
            hash,
            Variant::ALL[k - 1],
        )
        .into(),
    }
}

fn expect_format_error(bytes: &[u8], what: &str) -> Result<(), String> {
    match deserialize(bytes) {
        Err(Error::Format(_)) => Ok(()),
        other => Err(format!("{what}: expected a format error, got {other:?}")),
    }
}

/// Swaps the first two sparse entries in a serialized HLLL sketch.
fn unsort_sparse(bytes: &[u8], s: &HlllSketch) -> Vec<u8> {
    let id_len = bytes[9] as usize;
    let dense_words = (s.m() * s.kappa() as usize).div_ceil(64);
    let start = 26 + id_len + 8 * dense_words;
    let words: Vec<u64> = bytes[start..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut entries = PackedArray::from_words(s.sparse_len(), s.log2m() as u32 + 6, words).unwrap();
    let (e0, e1) = (entries.get(0).unwrap(), entries.get(1).unwrap());
    entries.set(0, e1).unwrap();
    entries.set(1, e0).unwrap();
    let mut out = bytes[..start].to_vec();
    entries
        .words()
        .iter()
        .for_each(|w| out.extend_from_slice(&w.to_le_bytes()));
    out
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut unsorted = 0;
    for i in 0..1000 {
        let s = random_sketch(&mut rng);
        let bytes = serialize(&s);
        let back = deserialize(&bytes).map_err(|e| format!("sketch {i}: {e}"))?;
        ensure(back == s && serialize(&back) == bytes, || {
            format!("sketch {i}: roundtrip mismatch")
        })?;

        let mutate = |pos: usize, v: u8| {
            let mut b = bytes.clone();
            b[pos] = v;
            b
        };
        expect_format_error(&mutate(0, bytes[0] ^ 0xff), "bad magic")?;
        expect_format_error(&mutate(4, 2), "bad version")?;
        expect_format_error(&mutate(5, 4), "bad kind")?;
        expect_format_error(&mutate(6, 40), "bad log2m")?;
        expect_format_error(&mutate(10, b'?'), "bad hash id")?;
        expect_format_error(&bytes[..rng.random_range(0..bytes.len())], "truncated")?;
        let mut longer = bytes.clone();
        longer.push(0);
        expect_format_error(&longer, "trailing byte")?;
        if let Sketch::Hlll(h) = &s {
            expect_format_error(&mutate(7, 7), "bad kappa")?;
            if h.sparse_len() >= 2 {
                expect_format_error(&unsort_sparse(&bytes, h), "unsorted sparse entries")?;
                unsorted += 1;
            }
        }
    }
    ensure(unsorted > 0, || {
        "no sketch exercised the unsorted-sparse case".into()
    })?;
    Ok(format!(
        "1000 roundtrips, malformed variants rejected ({unsorted} unsorted-sparse cases)"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("parity with hll", parity),
        ("accuracy", accuracy),
        ("compression", compression),
        ("split optimality", optimality),
        ("merge equals union", merge_union),
        ("distribution oracle", oracle),
        ("amortized updates", amortized),
        ("overflow scarcity", overflow),
        ("register entropy", entropy),
        ("serialization", serialization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
