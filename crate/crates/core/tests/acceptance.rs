//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use gerber_core::gerber::{
    count_matrices, gerber_oracle, gram, gs1_scaled_form, max_abs_difference, neutral_counts,
    oracle::pair_counts_from_returns, pair_counts,
};
use gerber_core::indicators::Region;
use gerber_core::psd::witness::{
    self, evaluate_original, load_witness, save_witness, WITNESS_THRESHOLD,
};
use gerber_core::psd::{squared_form, verify_series_construction};
use gerber_core::{
    build_indicators, build_thresholds, check_psd, load_returns, Analysis, GerberMatrix,
    IngestOptions, ReturnMatrix, Variant,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const INSTANCE_SEED: u64 = 2024;
const INSTANCE_COUNT: u64 = 1200;
const PSD_TOLERANCE: f64 = 1e-10;
const ORACLE_TOLERANCE: f64 = 1e-12;
const GS1_TOLERANCE: f64 = 1e-12;
const SERIES_TOLERANCE: f64 = 1e-10;
const CRITERION_1_SECONDS: f64 = 60.0;
const CRITERION_9_SECONDS: f64 = 5.0;

struct Outcome {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn all_pierce(a: &Analysis) -> bool {
    a.indicators.piercings().iter().all(|&n| n > 0)
}

/// Criteria 1 to 5 share one pass over the seeded instances.
fn instance_criteria() -> Vec<Outcome> {
    let mut c1 = Outcome::new(1, "GS1 and GS2 are positive semidefinite");
    let mut c2 = Outcome::new(2, "exact count identities");
    let mut c3 = Outcome::new(3, "matrix form equals definitional oracle");
    let mut c4 = Outcome::new(4, "GS1 Hadamard and congruence forms agree");
    let mut c5 = Outcome::new(5, "GS2 series construction converges with PSD partial sums");

    let start = Instant::now();
    let mut evaluated = 0u64;
    let mut filtered = 0u64;
    let mut heavy = 0u64;
    let mut fractions = [0u64; 3];
    let mut worst_lambda = f64::INFINITY;
    let mut worst_oracle = 0.0f64;
    let mut worst_gs1 = 0.0f64;
    let mut max_terms = 0usize;

    for inst in common::instances(INSTANCE_SEED, INSTANCE_COUNT) {
        let tag = format!("instance {}", inst.index);
        let returns = &inst.returns;
        let analysis = match Analysis::new(returns, inst.c) {
            Ok(a) => a,
            Err(e) => {
                c1.check(false, || format!("{tag}: {e}"));
                continue;
            }
        };
        let ind = &analysis.indicators;
        let cm = count_matrices(ind);
        let nn = neutral_counts(ind);
        let (periods, k) = (ind.periods(), ind.assets());
        let h = analysis.thresholds.levels();

        // criterion 2
        let f_gram = gram(ind.f.view());
        let squared = squared_form(ind.u.view(), ind.d.view());
        let difference = &cm.n_conc - &cm.n_disc;
        c2.check(
            f_gram == squared && squared == difference && difference == cm.h,
            || format!("{tag}: F'F, (U-D)'(U-D), N_conc-N_disc differ"),
        );
        let values = returns.values();
        for i in 0..k {
            for j in 0..k {
                let brute = (0..periods)
                    .filter(|&t| {
                        Region::classify(values[[t, i]], h[i]) == Region::Neutral
                            && Region::classify(values[[t, j]], h[j]) == Region::Neutral
                    })
                    .count() as i64;
                c2.check(nn[[i, j]] == brute, || {
                    format!("{tag}: P'P[{i}][{j}] != {brute}")
                });
                let pc = pair_counts(ind, i, j).unwrap();
                c2.check(pc.total() == periods as u64, || {
                    format!("{tag}: grid ({i},{j}) sums to {}", pc.total())
                });

                // criterion 3, integer part: oracle grid from raw returns
                let oc = pair_counts_from_returns(returns, &analysis.thresholds, i, j).unwrap();
                let ok = cm.n_uu[[i, j]] as u64 == oc.n_uu
                    && cm.n_dd[[i, j]] as u64 == oc.n_dd
                    && cm.n_conc[[i, j]] as u64 == oc.concordant()
                    && cm.n_disc[[i, j]] as u64 == oc.discordant()
                    && nn[[i, j]] as u64 == oc.n_nn;
                c3.check(ok, || format!("{tag}: counts ({i},{j}) differ from oracle"));
            }
        }

        // criterion 3, real part
        let mut matrices: Vec<Option<GerberMatrix>> = Vec::new();
        for variant in Variant::ALL {
            let m = analysis.gerber(variant);
            let o = gerber_oracle(returns, &analysis.thresholds, variant);
            match (m, o) {
                (Ok(m), Ok(o)) => {
                    let d = max_abs_difference(&m.values, &o.values);
                    worst_oracle = worst_oracle.max(d);
                    c3.check(d <= ORACLE_TOLERANCE, || {
                        format!("{tag}: {variant} differs by {d:e}")
                    });
                    matrices.push(Some(m));
                }
                (Err(a), Err(b)) if a.is_precondition() && b.is_precondition() => {
                    matrices.push(None)
                }
                (m, o) => {
                    c3.check(false, || {
                        format!(
                            "{tag}: {variant} routes disagree ({:?} vs {:?})",
                            m.err(),
                            o.err()
                        )
                    });
                    matrices.push(None);
                }
            }
        }

        if !all_pierce(&analysis) {
            filtered += 1;
            c1.check(matrices[1].is_none() && matrices[2].is_none(), || {
                format!("{tag}: never-piercing asset accepted by GS1/GS2")
            });
            continue;
        }
        evaluated += 1;
        heavy += u64::from(inst.tails == common::Tails::Heavy);
        fractions[common::FRACTIONS.iter().position(|&c| c == inst.c).unwrap()] += 1;
        let (Some(g1), Some(g2)) = (&matrices[1], &matrices[2]) else {
            c1.check(false, || {
                format!("{tag}: GS1/GS2 undefined although every asset pierces")
            });
            continue;
        };

        // criterion 1
        for g in [g1, g2] {
            let r = check_psd(&g.values, PSD_TOLERANCE).unwrap();
            worst_lambda = worst_lambda.min(r.lambda_min / r.lambda_max.abs().max(1.0));
            c1.check(
                r.lambda_min >= -PSD_TOLERANCE * r.lambda_max.abs().max(1.0),
                || format!("{tag}: {} lambda_min = {:e}", g.variant, r.lambda_min),
            );
        }

        // criterion 4
        let scaled = gs1_scaled_form(&cm).unwrap();
        let d = max_abs_difference(&g1.values, &scaled);
        let diag = g1
            .values
            .diag()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max);
        worst_gs1 = worst_gs1.max(d);
        c4.check(d <= GS1_TOLERANCE && diag <= GS1_TOLERANCE, || {
            format!("{tag}: forms differ by {d:e}, diagonal off by {diag:e}")
        });

        // criterion 5
        match verify_series_construction(ind, g2, SERIES_TOLERANCE) {
            Ok(s) => {
                max_terms = max_terms.max(s.terms_used);
                let bound_ok = if s.x_max == 0.0 {
                    s.terms_used == 1
                } else {
                    let bound = ((SERIES_TOLERANCE * (1.0 - s.x_max)).ln() / s.x_max.ln()).ceil()
                        as usize
                        + 1;
                    s.terms_used <= bound
                };
                c5.check(bound_ok, || {
                    format!("{tag}: {} terms at x_max = {}", s.terms_used, s.x_max)
                });
                c5.check(s.max_abs_error <= SERIES_TOLERANCE, || {
                    format!("{tag}: error {:e}", s.max_abs_error)
                });
                c5.check(s.partial_sums_psd, || {
                    format!("{tag}: partial sum lambda_min = {:e}", s.min_partial_lambda)
                });
            }
            Err(e) => c5.check(false, || format!("{tag}: {e}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    c1.check(evaluated >= 1000, || {
        format!("only {evaluated} instances satisfied the preconditions")
    });
    c1.check(heavy > 0 && heavy < evaluated, || {
        "tail mix not covered".into()
    });
    c1.check(fractions.iter().all(|&n| n > 0), || {
        format!("fractions not covered: {fractions:?}")
    });
    c1.check(elapsed <= CRITERION_1_SECONDS, || {
        format!("took {elapsed:.1} s")
    });

    c1.detail = format!(
        "{evaluated} instances ({heavy} heavy-tailed, {filtered} filtered), worst lambda_min/max(1,|lambda_max|) = {worst_lambda:e}, {elapsed:.2} s"
    );
    c2.detail = format!("{INSTANCE_COUNT} instances, integer-exact");
    c3.detail = format!("max |matrix - oracle| = {worst_oracle:e}");
    c4.detail = format!("max |H/(hh') - J'HJ| = {worst_gs1:e}");
    c5.detail = format!("max terms used = {max_terms}");
    vec![c1, c2, c3, c4, c5]
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new(6, "non-PSD witness for the original statistic");
    let dir = tempfile::tempdir().unwrap();
    let mut found = 0;
    let mut worst = 0.0f64;
    for assets in 3..=6 {
        for periods in [10, 25, 40] {
            let tag = format!("K={assets} T={periods}");
            let outcome = witness::find_non_psd_original(10_000, periods, assets, 0.5, 7).unwrap();
            let Some(w) = outcome.witness else {
                out.check(false, || {
                    format!("{tag}: none in {} trials", outcome.trials_run)
                });
                continue;
            };
            found += 1;
            out.check(w.meta.lambda_min < WITNESS_THRESHOLD, || {
                format!("{tag}: {}", w.meta.lambda_min)
            });
            let path = dir.path().join(format!("w_{assets}_{periods}.csv"));
            save_witness(&w, &path).unwrap();
            let (returns, meta) = load_witness(&path).unwrap();
            let (_, report) = evaluate_original(&returns, meta.c).unwrap();
            let d = (report.lambda_min - meta.lambda_min).abs();
            worst = worst.max(d);
            out.check(d <= 1e-12, || format!("{tag}: reload drifted by {d:e}"));
        }
    }
    let (returns, meta) = load_witness(fixture("witness_original.csv")).unwrap();
    let (_, report) = evaluate_original(&returns, meta.c).unwrap();
    let d = (report.lambda_min - meta.lambda_min).abs();
    out.check(d <= 1e-12 && report.lambda_min < WITNESS_THRESHOLD, || {
        format!(
            "stored fixture reproduces lambda_min {} vs {}",
            report.lambda_min, meta.lambda_min
        )
    });
    out.detail = format!("{found}/12 grid cells found a witness, max reload drift {worst:e}");
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new(7, "four-period fixture regression");
    let expected = [1.0 / 3.0, 1.0 / 12f64.sqrt(), 0.25];
    let file = load_returns(fixture("four_period.csv"), &IngestOptions::default()).unwrap();
    let in_memory = ReturnMatrix::from_values(file.values().clone()).unwrap();
    let unit = build_thresholds(&[2.0, 2.0], 0.5).unwrap();
    let unit_ind = build_indicators(&in_memory, &unit).unwrap();
    for (variant, want) in Variant::ALL.into_iter().zip(expected) {
        let first = Analysis::new(&file, 0.5).unwrap().gerber(variant).unwrap();
        let second = Analysis::new(&file, 0.5).unwrap().gerber(variant).unwrap();
        let unit_g = gerber_core::gerber::gerber_matrix(&unit_ind, variant).unwrap();
        for g in [&first, &unit_g] {
            out.check(g.values[[0, 1]] == want && g.values[[1, 0]] == want, || {
                format!("{variant}: got {}, want {want}", g.values[[0, 1]])
            });
        }
        let bits = |g: &GerberMatrix| g.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        out.check(bits(&first) == bits(&second), || {
            format!("{variant}: not bit-stable")
        });
    }
    out.detail = "original 1/3, gs1 1/sqrt(12), gs2 1/4".into();
    out
}

fn scaled_matrices(
    returns: &ReturnMatrix,
    sigmas: &[f64],
    c: f64,
) -> Vec<Result<GerberMatrix, String>> {
    let th = build_thresholds(sigmas, c).unwrap();
    let ind = build_indicators(returns, &th).unwrap();
    Variant::ALL
        .into_iter()
        .map(|v| gerber_core::gerber::gerber_matrix(&ind, v).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new(8, "scale and sign equivariance");
    let mut cases = 0;
    for inst in common::instances(INSTANCE_SEED, 300) {
        let Ok(analysis) = Analysis::new(&inst.returns, inst.c) else {
            continue;
        };
        let base = scaled_matrices(&inst.returns, &analysis.sigmas, inst.c);
        let k = inst.returns.assets();
        for col in 0..k {
            for lambda in [0.37, 2.0, 1e3] {
                let mut values = inst.returns.values().clone();
                values.column_mut(col).mapv_inplace(|v| v * lambda);
                let returns = ReturnMatrix::from_values(values).unwrap();
                let mut sigmas = analysis.sigmas.clone();
                sigmas[col] *= lambda;
                let scaled = scaled_matrices(&returns, &sigmas, inst.c);
                for (a, b) in base.iter().zip(&scaled) {
                    let same = match (a, b) {
                        (Ok(a), Ok(b)) => a
                            .values
                            .iter()
                            .zip(b.values.iter())
                            .all(|(x, y)| x.to_bits() == y.to_bits()),
                        (Err(a), Err(b)) => a == b,
                        _ => false,
                    };
                    out.check(same, || {
                        format!("instance {} col {col} x{lambda}", inst.index)
                    });
                }
                cases += 1;
            }

            let mut values = inst.returns.values().clone();
            values.column_mut(col).mapv_inplace(|v| -v);
            let negated = ReturnMatrix::from_values(values).unwrap();
            let sigmas = gerber_core::validate_for_thresholding(&negated).unwrap();
            out.check(sigmas == analysis.sigmas, || {
                format!("instance {}: sigma changed under negation", inst.index)
            });
            let flipped = scaled_matrices(&negated, &sigmas, inst.c);
            for (a, b) in base.iter().zip(&flipped) {
                let (Ok(a), Ok(b)) = (a, b) else {
                    out.check(a.is_err() && b.is_err(), || {
                        format!(
                            "instance {} col {col}: negation changed definedness",
                            inst.index
                        )
                    });
                    continue;
                };
                for i in 0..k {
                    for j in 0..k {
                        let want = if (i == col) != (j == col) {
                            -a.values[[i, j]]
                        } else {
                            a.values[[i, j]]
                        };
                        out.check(b.values[[i, j]] == want, || {
                            format!(
                                "instance {} {} col {col}: ({i},{j}) {} vs {want}",
                                inst.index,
                                a.variant,
                                b.values[[i, j]]
                            )
                        });
                    }
                }
                if a.convention_cells
                    .iter()
                    .all(|&(i, j)| !(i == col && j == col))
                {
                    out.check(b.values[[col, col]] == 1.0, || {
                        format!("instance {}: diagonal moved", inst.index)
                    });
                }
            }
            cases += 1;
        }
    }
    out.detail = format!("{cases} column transformations");
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new(9, "performance, K = 100 and T = 5000");
    let (periods, assets) = (5000, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let factor: Vec<f64> = (0..periods).map(|_| rng.sample(StandardNormal)).collect();
    let loadings: Vec<f64> = (0..assets).map(|_| rng.random_range(-1.0..1.0)).collect();
    let values = Array2::from_shape_fn((periods, assets), |(t, k)| {
        loadings[k] * factor[t] + rng.sample::<f64, _>(StandardNormal)
    });
    let returns = ReturnMatrix::from_values(values).unwrap();

    let start = Instant::now();
    let analysis = Analysis::new(&returns, 0.5).unwrap();
    let mut verdicts = Vec::new();
    for variant in Variant::ALL {
        let g = analysis.gerber(variant).unwrap();
        verdicts.push(check_psd(&g.values, PSD_TOLERANCE).unwrap().verdict);
    }
    let elapsed = start.elapsed().as_secs_f64();
    out.check(elapsed <= CRITERION_9_SECONDS, || {
        format!("took {elapsed:.2} s")
    });
    out.detail = format!("three variants plus PSD checks in {elapsed:.3} s, verdicts {verdicts:?}");
    out
}

fn main() {
    let mut outcomes = instance_criteria();
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.sort_by_key(|o| o.id);

    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {}: {} ({})", o.id, o.name, o.detail);
        for f in o.failures.iter().take(10) {
            println!("         {f}");
        }
        if o.failures.len() > 10 {
            println!("         ... {} more", o.failures.len() - 10);
        }
        failed += usize::from(!o.passed());
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
