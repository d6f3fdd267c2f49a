//! Acceptance suite. Runs every criterion in order, prints one line per
//! criterion and exits non-zero if any fails.
//!
//! `cargo test -p filmsearch --test acceptance`

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use filmsearch::catalog::load_database;
use filmsearch::mapfile;
use filmsearch::search::{run_search_with_cache, train_threaded};
use filmsearch::shared::SharedCache;
use filmsearch_core::a3c::toy::ToyEnv;
use filmsearch_core::a3c::{trajectory_gradients, A3cConfig, ActorCritic, EnvState, TerminalReason, Transition};
use filmsearch_core::design::{evaluate_design, CacheEntry, CacheStats, DesignTask, MeritCache};
use filmsearch_core::embedding::{
    build_environment_map, train_encoder, EncoderConfig, EnvPoint, EnvironmentMap, MapEntry, Provenance, TsneConfig,
};
use filmsearch_core::ga::{self, GaConfig, GaError, ThicknessProblem};
use filmsearch_core::material::{Category, DispersionTable, MaterialDb, MaterialId};
use filmsearch_core::nn::Mlp;
use filmsearch_core::tmm::{self, IncidenceSpec, Layer, Linear, Medium, Quantity, Stack, TargetSpectrum};
use filmsearch_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn catalog_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/catalog")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn constant_db(materials: &[(&str, Complex64)]) -> MaterialDb {
    MaterialDb::new(materials.iter().map(|&(name, n)| {
        (name.to_string(), Category::Other, DispersionTable::constant(n, 200.0, 3000.0).expect("valid table"))
    }))
    .expect("valid db")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 1 -------------------------------------------------------------------------

fn tmm_analytic() -> Outcome {
    let db = constant_db(&[("MgF2", c(1.38, 0.0)), ("glass", c(1.5, 0.0))]);
    let (n0, nf, ns, wl) = (1.0_f64, 1.38_f64, 1.5_f64, 550.0);
    let glass = Medium::Material(MaterialId(1));

    let bare_oracle = ((n0 - ns) / (n0 + ns)).powi(2);
    let mut bare_err: f64 = 0.0;
    for pol in [Linear::S, Linear::P] {
        let r = tmm::solve(c(n0, 0.0), &[], c(ns, 0.0), wl, 0.0, pol);
        bare_err = bare_err.max((r.reflection - bare_oracle).abs());
    }
    // The same interface through the full stack path: an index-matched glass
    // layer on glass is invisible.
    let stack = Stack::new(Medium::VACUUM, vec![Layer { material: MaterialId(1), thickness_nm: 50.0 }], glass).unwrap();
    let s = tmm::spectrum(&stack, &[wl], &IncidenceSpec::normal(), &db).map_err(|e| e.to_string())?;
    bare_err = bare_err.max((s[0].reflection[0] - bare_oracle).abs());

    let qw_oracle = ((n0 * ns - nf * nf) / (n0 * ns + nf * nf)).powi(2);
    let qw = wl / (4.0 * nf);
    let stack = Stack::new(Medium::VACUUM, vec![Layer { material: MaterialId(0), thickness_nm: qw }], glass).unwrap();
    let s = tmm::spectrum(&stack, &[wl], &IncidenceSpec::normal(), &db).map_err(|e| e.to_string())?;
    let qw_err = (s[0].reflection[0] - qw_oracle).abs();
    check(
        bare_err <= 1e-9 && qw_err <= 1e-9 && (bare_oracle - 0.04).abs() < 1e-15,
        format!("bare glass |R-0.04| = {bare_err:.1e}, quarter-wave |R-{qw_oracle:.6}| = {qw_err:.1e}"),
    )
}

// 2 -------------------------------------------------------------------------

fn energy_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid: Vec<f64> = (0..41).map(|i| 400.0 + 10.0 * i as f64).collect();
    let (mut worst_a, mut worst_rt): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let layers = rng.random_range(1..=8);
        let angle = rng.random_range(0.0..70.0);
        let mut mats: Vec<(String, Complex64)> =
            (0..=layers).map(|i| (format!("m{i}"), c(rng.random_range(1.0..4.0), 0.0))).collect();
        mats.push(("sub".into(), c(rng.random_range(1.0..4.0), 0.0)));
        let names: Vec<(&str, Complex64)> = mats.iter().map(|(n, i)| (n.as_str(), *i)).collect();
        let db = constant_db(&names);
        let stack_layers =
            (0..layers).map(|i| Layer { material: MaterialId(i), thickness_nm: rng.random_range(1.0..500.0) }).collect();
        let stack = Stack::new(Medium::VACUUM, stack_layers, Medium::Material(MaterialId(layers + 1))).unwrap();
        for polarization in [tmm::Polarization::S, tmm::Polarization::P] {
            let incidence = IncidenceSpec { angles_deg: vec![angle], polarization };
            let spectra = tmm::spectrum(&stack, &grid, &incidence, &db).map_err(|e| e.to_string())?;
            for s in &spectra {
                for i in 0..grid.len() {
                    worst_a = worst_a.max(s.absorption[i].abs());
                    worst_rt = worst_rt.max((s.reflection[i] + s.transmission[i] - 1.0).abs());
                }
            }
        }
    }
    check(worst_a <= 1e-9 && worst_rt <= 1e-9, format!("max |A| = {worst_a:.1e}, max |R+T-1| = {worst_rt:.1e}"))
}

// 3 -------------------------------------------------------------------------

fn reference_design(db: &MaterialDb) -> Outcome {
    let task = DesignTask::solar_absorber(0, 0);
    let r = evaluate_design(&["MgF2", "TiO2", "Si", "Ge", "Cu"], &[35.3, 27.1, 112.5, 172.0, 200.0], &task, db)
        .map_err(|e| e.to_string())?;
    let a = r.average_absorption_band;
    check(a >= 0.85, format!("average absorption 250-800 nm = {a:.4} (threshold 0.85)"))
}

// 4 -------------------------------------------------------------------------

fn antireflection_problem(db: &MaterialDb) -> ThicknessProblem {
    let target = TargetSpectrum::new(vec![550.0], vec![0.0], vec![1.0], Quantity::Reflection).unwrap();
    ThicknessProblem::new(
        Medium::VACUUM,
        &[MaterialId(0)],
        Medium::Material(MaterialId(1)),
        &target,
        &IncidenceSpec::normal(),
        db,
    )
    .unwrap()
}

fn ga_antireflection() -> Outcome {
    let db = constant_db(&[("MgF2", c(1.38, 0.0)), ("glass", c(1.5, 0.0))]);
    let problem = antireflection_problem(&db);
    let scan_best = (0..=380)
        .map(|i| 10.0 + 0.5 * i as f64)
        .map(|d| (d, problem.merit(&[d]).unwrap()))
        .fold((f64::NAN, f64::INFINITY), |b, (d, m)| if m < b.1 { (d, m) } else { b });
    let quarter_wave = 550.0 / (4.0 * 1.38);
    if (scan_best.0 - quarter_wave).abs() > 0.5 {
        return Err(format!("scan optimum {} nm is not the quarter-wave {quarter_wave:.2} nm", scan_best.0));
    }
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let r = problem.optimize(&GaConfig { seed, ..GaConfig::default() }).map_err(|e| e.to_string())?;
        let miss = (r.best.genes()[0] - scan_best.0).abs();
        worst = worst.max(miss);
        if miss <= 5.0 {
            hits += 1;
        }
    }
    check(
        hits >= 19,
        format!("{hits}/20 runs within 5 nm of the scanned optimum {} nm (worst miss {worst:.2} nm)", scan_best.0),
    )
}

// 5 -------------------------------------------------------------------------

fn ga_monotone_and_bounded() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid: Vec<f64> = (0..20).map(|i| 400.0 + 25.0 * i as f64).collect();
    let mut worst_gene = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..20 {
        let layers = rng.random_range(1..=5);
        let mats: Vec<(String, Complex64)> = (0..=layers)
            .map(|i| (format!("m{i}"), c(rng.random_range(1.2..4.0), rng.random_range(0.0..2.0))))
            .collect();
        let names: Vec<(&str, Complex64)> = mats.iter().map(|(n, i)| (n.as_str(), *i)).collect();
        let db = constant_db(&names);
        let target: Vec<f64> = grid.iter().map(|_| rng.random_range(0.0..1.0)).collect();
        let target = TargetSpectrum::new(grid.clone(), target, vec![1.0; grid.len()], Quantity::Absorption).unwrap();
        let ids: Vec<MaterialId> = (0..layers).map(MaterialId).collect();
        let problem = ThicknessProblem::new(
            Medium::VACUUM,
            &ids,
            Medium::Material(MaterialId(layers)),
            &target,
            &IncidenceSpec::normal(),
            &db,
        )
        .unwrap();
        let cfg = GaConfig { seed, ..GaConfig::default() };
        let (lo, hi) = cfg.thickness_bounds_nm;
        let mut out_of_bounds = 0usize;
        let r = ga::optimize(layers, &cfg, |d: &[f64]| -> Result<f64, GaError> {
            for &g in d {
                worst_gene = (worst_gene.0.min(g), worst_gene.1.max(g));
                if !(lo..=hi).contains(&g) {
                    out_of_bounds += 1;
                }
            }
            Ok(problem.merit(d).expect("merit"))
        })
        .map_err(|e| e.to_string())?;
        if out_of_bounds > 0 {
            return Err(format!("seed {seed}: {out_of_bounds} genes outside [{lo}, {hi}]"));
        }
        if let Some(g) = r.history.windows(2).position(|w| w[1] > w[0]) {
            return Err(format!("seed {seed}: best merit rose at generation {}", g + 1));
        }
        if r.history.len() != cfg.generations + 1 {
            return Err(format!("seed {seed}: history has {} entries", r.history.len()));
        }
    }
    Ok(format!("20 runs non-increasing; genes seen in [{:.2}, {:.2}] nm", worst_gene.0, worst_gene.1))
}

// 6 -------------------------------------------------------------------------

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// `-Σ [log π(a|s)·A + β·H]`, written out independently of the library.
fn oracle_actor_loss(net: &Mlp, xs: &[Vec<f64>], actions: &[usize], adv: &[f64], beta: f64) -> f64 {
    let mut loss = 0.0;
    for ((x, &a), &ad) in xs.iter().zip(actions).zip(adv) {
        let p = softmax(&net.forward(x));
        let h: f64 = -p.iter().map(|v| v * v.ln()).sum::<f64>();
        loss -= p[a].ln() * ad + beta * h;
    }
    loss
}

fn oracle_critic_loss(net: &Mlp, xs: &[Vec<f64>], returns: &[f64]) -> f64 {
    xs.iter().zip(returns).map(|(x, r)| (r - net.forward(x)[0]).powi(2)).sum()
}

/// Worst relative errors (actor, critic) at one random parameter point.
fn gradient_point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let actions = 8;
    let (net, segment) = loop {
        let mut net = ActorCritic::new(2, actions, rng);
        for p in net.actor.params_mut().iter_mut().chain(net.critic.params_mut()) {
            *p = rng.random_range(-1.0..1.0);
        }
        let segment: Vec<Transition> = (0..4)
            .map(|i| {
                let s = EnvState::random(2, rng);
                Transition {
                    state: s.clone(),
                    action: (i * 3) % actions,
                    reward: rng.random_range(-1.0..1.0),
                    next_state: s,
                    terminal: false,
                }
            })
            .collect();
        // Central differences are only derivatives away from ReLU kinks.
        let smooth = segment.iter().all(|t| {
            [&net.actor, &net.critic].iter().all(|m| {
                let trace = m.forward_trace(&t.state.features());
                let pre = trace.pre_activations();
                pre[..pre.len() - 1].iter().flatten().all(|z| z.abs() > 1e-3)
            })
        });
        if smooth {
            break (net, segment);
        }
    };
    let (gamma, beta, bootstrap) = (0.9, 0.05, 0.3);
    let g = trajectory_gradients(&net, &segment, bootstrap, gamma, beta).expect("finite gradients");
    let xs: Vec<Vec<f64>> = segment.iter().map(|t| t.state.features()).collect();
    let acts: Vec<usize> = segment.iter().map(|t| t.action).collect();
    let mut returns = vec![0.0; segment.len()];
    let mut acc = bootstrap;
    for i in (0..segment.len()).rev() {
        acc = segment[i].reward + gamma * acc;
        returns[i] = acc;
    }
    let adv: Vec<f64> = xs.iter().zip(&returns).map(|(x, r)| r - net.critic.forward(x)[0]).collect();
    let h = 1e-5;
    let rel = |fd: f64, an: f64| (fd - an).abs() / fd.abs().max(an.abs()).max(1e-4);
    let fd = |m: &Mlp, i: usize, f: &dyn Fn(&Mlp) -> f64| {
        let (mut p, mut q) = (m.clone(), m.clone());
        p.params_mut()[i] += h;
        q.params_mut()[i] -= h;
        (f(&p) - f(&q)) / (2.0 * h)
    };
    let mut worst = (0.0_f64, 0.0_f64);
    for i in 0..net.actor.param_count() {
        let d = fd(&net.actor, i, &|m| oracle_actor_loss(m, &xs, &acts, &adv, beta));
        worst.0 = worst.0.max(rel(d, g.actor[i]));
    }
    for i in 0..net.critic.param_count() {
        let d = fd(&net.critic, i, &|m| oracle_critic_loss(m, &xs, &returns));
        worst.1 = worst.1.max(rel(d, g.critic[i]));
    }
    worst
}

fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let (a, c) = gradient_point(&mut rng);
        worst = (worst.0.max(a), worst.1.max(c));
    }
    check(
        worst.0 < 1e-4 && worst.1 < 1e-4,
        format!("100 points, worst relative error actor {:.1e}, critic {:.1e}", worst.0, worst.1),
    )
}

// 7 -------------------------------------------------------------------------

fn toy_learning() -> Outcome {
    let env = ToyEnv::new(0);
    let cfg = A3cConfig { learning_rate: 1e-3, workers: 4, seed: 7, ..A3cConfig::default() };
    let (_, log) = train_threaded(&env, &cfg, 2000).map_err(|(e, _)| e.to_string())?;
    let rate = |eps: &[filmsearch_core::a3c::EpisodeSummary]| {
        eps.iter().filter(|e| e.terminal_reason == TerminalReason::Success).count() as f64 / eps.len() as f64
    };
    let (first, last) = (rate(&log[..200]), rate(&log[1800..]));
    check(
        log.len() == 2000 && last > 0.0 && last >= 3.0 * first,
        format!("4 workers, success rate first 10% {first:.3}, last 10% {last:.3}"),
    )
}

// 8 -------------------------------------------------------------------------

fn embedding_quality(db: &MaterialDb, map_slot: &mut Option<EnvironmentMap>) -> Outcome {
    if db.len() < 100 {
        return Err(format!("catalog has {} materials, need 100", db.len()));
    }
    let encoder = EncoderConfig::default();
    let (map, trained20) =
        build_environment_map(db, &encoder, &TsneConfig::default()).map_err(|e| e.to_string())?;
    let silhouette = map.category_silhouette();
    let loss20 = trained20.final_reconstruction_loss;
    *map_slot = Some(map);
    let trained5 =
        train_encoder(db, &EncoderConfig { latent_dim: 5, ..encoder }).map_err(|e| e.to_string())?;
    let loss5 = trained5.final_reconstruction_loss;
    check(
        silhouette > 0.0 && loss20 <= loss5,
        format!("{} materials, silhouette {silhouette:.4}, loss(20) {loss20:.6} vs loss(5) {loss5:.6}", db.len()),
    )
}

// 9 -------------------------------------------------------------------------

fn scan(points: &[EnvPoint], q: EnvPoint) -> (usize, bool) {
    let d: Vec<f64> = points.iter().map(|p| (p.x - q.x).powi(2) + (p.y - q.y).powi(2)).collect();
    let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = d.iter().position(|&v| v == best).expect("non-empty");
    (first, d.iter().filter(|&&v| v == best).count() > 1)
}

fn proximity(real: Option<&EnvironmentMap>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // A lattice map with duplicated points so that ties are common.
    let lattice: Vec<MapEntry> = (0..300)
        .map(|i| MapEntry {
            id: MaterialId(i),
            name: format!("p{i}"),
            category: Category::Other,
            point: EnvPoint { x: rng.random_range(0..=20) as f64 / 20.0, y: rng.random_range(0..=20) as f64 / 20.0 },
        })
        .collect();
    let mut maps = vec![EnvironmentMap::new(lattice, Provenance::default()).map_err(|e| e.to_string())?];
    maps.extend(real.cloned());
    let (mut queries, mut ties, mut mismatches) = (0usize, 0usize, 0usize);
    for map in &maps {
        let points: Vec<EnvPoint> = map.entries().iter().map(|e| e.point).collect();
        for i in 0..100_000 / maps.len() {
            let q = if i % 2 == 0 {
                EnvPoint { x: rng.random_range(0.0..=1.0), y: rng.random_range(0.0..=1.0) }
            } else {
                EnvPoint { x: rng.random_range(0..=100) as f64 / 100.0, y: rng.random_range(0..=100) as f64 / 100.0 }
            };
            let (expected, tie) = scan(&points, q);
            queries += 1;
            ties += tie as usize;
            if map.nearest_material(q) != MaterialId(expected) {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0 && queries >= 100_000 && ties > 0,
        format!("{queries} queries on {} maps, {ties} ties, {mismatches} mismatches", maps.len()),
    )
}

// 10 ------------------------------------------------------------------------

/// Delegating cache that counts how often each tuple is optimized.
struct CountingCache {
    inner: SharedCache,
    computed: Mutex<BTreeMap<Vec<MaterialId>, usize>>,
    requested: Mutex<BTreeSet<Vec<MaterialId>>>,
    lookups: AtomicUsize,
}

impl MeritCache for CountingCache {
    fn get_or_compute<E, F>(&self, key: &[MaterialId], compute: F) -> Result<(CacheEntry, bool), E>
    where
        F: FnOnce() -> Result<CacheEntry, E>,
    {
        self.lookups.fetch_add(1, Ordering::SeqCst);
        self.requested.lock().unwrap().insert(key.to_vec());
        self.inner.get_or_compute(key, || {
            *self.computed.lock().unwrap().entry(key.to_vec()).or_insert(0) += 1;
            compute()
        })
    }

    fn seed(&self, key: Vec<MaterialId>, entry: CacheEntry) {
        self.inner.seed(key, entry)
    }

    fn stats(&self) -> CacheStats {
        self.inner.stats()
    }

    fn entries(&self) -> Vec<(Vec<MaterialId>, CacheEntry)> {
        self.inner.entries()
    }
}

fn small_task(budget: usize, seed: u64) -> DesignTask {
    DesignTask {
        target: TargetSpectrum::band_absorber(250.0, 2500.0, 25.0, 250.0, 800.0),
        ..DesignTask::solar_absorber(budget, seed)
    }
}

fn memoization(db: &MaterialDb, map: Option<&EnvironmentMap>) -> Outcome {
    let map = map.ok_or("no map (embedding failed)")?;
    let cache = CountingCache {
        inner: SharedCache::new(),
        computed: Mutex::new(BTreeMap::new()),
        requested: Mutex::new(BTreeSet::new()),
        lookups: AtomicUsize::new(0),
    };
    let task = small_task(50, 10);
    let a3c = A3cConfig { workers: 4, ..A3cConfig::default() };
    let ga = GaConfig { population_size: 20, generations: 30, ..GaConfig::default() };
    let out = run_search_with_cache(&task, &a3c, &ga, map, db, &cache).map_err(|e| e.to_string())?;
    let computed = cache.computed.lock().unwrap();
    let requested = cache.requested.lock().unwrap().len();
    let ga_runs: usize = computed.values().sum();
    let repeated = computed.values().filter(|&&n| n > 1).count();
    let lookups = cache.lookups.load(Ordering::SeqCst);
    check(
        out.episodes.len() == 50
            && repeated == 0
            && ga_runs == requested
            && out.distinct_tuples == requested
            && out.cache.misses == ga_runs
            && out.cache.hits == lookups - ga_runs,
        format!("50 episodes, {lookups} lookups, {requested} distinct tuples, {ga_runs} GA runs, {} hits", out.cache.hits),
    )
}

// 11 ------------------------------------------------------------------------

fn deterministic_bundles(map: Option<&EnvironmentMap>) -> Outcome {
    let map = map.ok_or("no map (embedding failed)")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let map_path = dir.path().join("map.json");
    mapfile::save_map(map, &map_path).map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    let text = format!(
        "catalog = {:?}\nmap = \"map.json\"\n[task]\ngrid_nm = [250.0, 2500.0, 25.0]\nepoch_budget = 20\n[ga]\npopulation_size = 20\ngenerations = 30\n",
        catalog_dir().canonicalize().map_err(|e| e.to_string())?
    );
    fs::write(&config, text).map_err(|e| e.to_string())?;
    let run = |out: &Path| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_filmsearch"))
            .args(["design", "--seed", "11", "--workers", "1", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("design exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
        }
        let mut files = BTreeMap::new();
        for entry in fs::read_dir(out).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            files.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).map_err(|e| e.to_string())?,
            );
        }
        Ok(files)
    };
    let a = run(&dir.path().join("a"))?;
    let b = run(&dir.path().join("b"))?;
    let names: Vec<&String> = a.keys().collect();
    let expected = ["checkpoint.json", "spectrum.csv", "summary.json", "trace.csv", "training_log.csv"];
    check(
        a == b && names.iter().map(|s| s.as_str()).eq(expected),
        format!("{} files, identical: {}", a.len(), a == b),
    )
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let db = match load_database(&catalog_dir()) {
        Ok(db) => db,
        Err(e) => {
            println!("cannot load catalog: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut map: Option<EnvironmentMap> = None;
    let mut failures = 0;
    let mut report = |n: usize, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {detail} [{:.1} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };
    let secs = Duration::from_secs;
    report(1, "TMM analytic reflectance", secs(1), &mut tmm_analytic);
    report(2, "energy conservation", secs(30), &mut energy_conservation);
    report(3, "reference design", secs(5), &mut || reference_design(&db));
    report(4, "GA antireflection optimum", secs(120), &mut ga_antireflection);
    report(5, "GA monotonicity and bounds", secs(120), &mut ga_monotone_and_bounded);
    report(6, "actor-critic gradients", secs(60), &mut gradient_checks);
    report(7, "A3C toy learning", secs(600), &mut toy_learning);
    report(8, "embedding quality", secs(900), &mut || embedding_quality(&db, &mut map));
    report(9, "proximity matching", secs(30), &mut || proximity(map.as_ref()));
    report(10, "memoization", secs(600), &mut || memoization(&db, map.as_ref()));
    report(11, "deterministic bundles", secs(600), &mut || deterministic_bundles(map.as_ref()));
    if failures == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
