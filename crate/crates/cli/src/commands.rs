use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use wvpower::analytic::{
    class_table_n2, class_table_n3, coleman_error_ratio, expected_beta_n2, expected_beta_n3,
    expected_beta_n3_exact, expected_coleman, expected_coleman_normal, extrema_n3, phi_z,
    ColemanCurveSpec,
};
use wvpower::experiments::{
    count_extrema, default_quota_grid, discover_classes, fit_spline, mc_coleman_curve,
    mc_hoeffding_curve, mc_power_curve, quota_grid, BreakpointMode, CurveRef, PowerStatistic,
    QuotaCurve,
};
use wvpower::games::{
    banzhaf, banzhaf_exact, count_winning_mitm, count_winning_mitm_with, count_winning_naive,
    count_winning_naive_with, hoeffding_bound, optimal_quota_diagnostic, quota_step_curve,
    QuotaFormula,
};
use wvpower::simplex::{order_descending, renyi_partial_sums, sample_uniform_simplex_with};
use wvpower::weightdist::{
    expected_ordered_weight_exact, expected_ordered_weights, power_sum_moment,
    power_sum_moment_exact, product_moment, product_moment_exact, sum_sq_stats, sum_sq_stats_exact,
    MomentIndex, OrderedWeightDensity,
};
use wvpower::{ExactGame, Functional, PowerProfile, RandomSeed, VotingGame, WeightVector};

use crate::args::*;
use crate::config::Defaults;
use crate::error::CliError;
use crate::output::{emit, Table};
use crate::plot::{emit_plot, PlotLabels, Series};

type Res<T = ()> = Result<T, CliError>;

const CURVE_HEADERS: &[&str] = &["quota", "series-name", "mean", "standard-error", "samples"];

struct Plot {
    series: Vec<Series>,
    title: String,
    x: &'static str,
    y: &'static str,
    caption: String,
}

/// Everything a command produces.
struct Outcome {
    table: Table,
    default_format: Format,
    plot: Option<Plot>,
    meta: Option<serde_json::Value>,
}

impl Outcome {
    fn csv(table: Table) -> Self {
        Outcome {
            table,
            default_format: Format::Csv,
            plot: None,
            meta: None,
        }
    }

    fn with_plot(mut self, plot: Plot) -> Self {
        self.plot = Some(plot);
        self
    }

    fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }
}

pub fn run(cli: Cli) -> Res {
    let defaults = Defaults::load(cli.config.as_deref())?;
    if let Some(threads) = cli.threads.or(defaults.threads) {
        if threads == 0 {
            return Err(CliError::Usage("threads must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let d = &defaults;
    let (name, out, outcome) = match &cli.command {
        Command::SampleWeights(a) => ("sample-weights", &a.output, sample_weights(a, d)?),
        Command::ExpectedWeights(a) => ("expected-weights", &a.output, expected_weights(a)?),
        Command::WeightDensity(a) => ("weight-density", &a.output, weight_density(a)?),
        Command::Moments(a) => ("moments", &a.output, moments(a)?),
        Command::Indices(a) => ("indices", &a.output, indices(a)?),
        Command::FixedCurve(a) => ("fixed-curve", &a.output, fixed_curve(a, d)?),
        Command::PowerCurve(a) => ("power-curve", &a.output, power_curve(a, d)?),
        Command::ColemanCurve(a) => ("coleman-curve", &a.output, coleman_curve(a, d)?),
        Command::Classes(a) => ("classes", &a.output, classes(a, d)?),
        Command::SplineFit(a) => ("spline-fit", &a.output, spline_fit(a)?),
        Command::Analytic(a) => analytic(&a.kind, d)?,
    };
    finish(name, out, outcome, d)
}

fn finish(name: &str, out: &OutputArgs, outcome: Outcome, d: &Defaults) -> Res {
    let format = out.format.or(d.format).unwrap_or(outcome.default_format);
    let want_plot = out.plot || out.plot_path.is_some();
    let plot = match (&outcome.plot, want_plot) {
        (Some(p), true) => {
            let labels = PlotLabels {
                title: &p.title,
                x: p.x,
                y: p.y,
                caption: &p.caption,
            };
            // Checked up front so that a failing plot leaves no files behind.
            crate::plot::render(&p.series, &labels)?;
            Some((p, labels))
        }
        (None, true) => return Err(CliError::Usage(format!("{name} has no plot"))),
        _ => None,
    };
    emit(&outcome.table.render(format)?, out.output.as_deref())?;
    if let (Some(meta), Some(path)) = (&outcome.meta, &out.output) {
        let meta_path = sidecar(path, "meta.json");
        let mut bytes = serde_json::to_vec_pretty(meta).expect("metadata serializes");
        bytes.push(b'\n');
        emit(&bytes, Some(&meta_path))?;
    }
    if let Some((p, labels)) = plot {
        let path = out.plot_path.clone().unwrap_or_else(|| match &out.output {
            Some(o) => o.with_extension("svg"),
            None => PathBuf::from(format!("{name}.svg")),
        });
        emit_plot(&p.series, &labels, &path)?;
    }
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

// ---- input helpers ---------------------------------------------------------

fn resolve_grid(g: &GridArgs, d: &Defaults) -> Res<Vec<f64>> {
    if let Some(q) = g.quota {
        wvpower::games::validate_quota(q)?;
        return Ok(vec![q]);
    }
    if let Some(qs) = &g.quotas {
        return Ok(qs.clone());
    }
    let start = g.grid_start.unwrap_or(d.grid_start);
    let end = g.grid_end.unwrap_or(d.grid_end);
    let points = g.grid_points.unwrap_or(d.grid_points);
    let stock = Defaults::default();
    if start == stock.grid_start && end == stock.grid_end && points == stock.grid_points {
        let mut grid = default_quota_grid();
        if g.without_one {
            grid.pop();
        }
        return Ok(grid);
    }
    Ok(quota_grid(start, end, points, !g.without_one)?)
}

enum Weights {
    Real(WeightVector),
    Exact(Vec<u64>),
}

fn read_weights(w: &WeightArgs) -> Res<Weights> {
    if let Some(ints) = &w.weights_int {
        return Ok(Weights::Exact(ints.clone()));
    }
    let raw: Vec<f64> = if let Some(v) = &w.weights {
        v.clone()
    } else if let Some(path) = &w.weights_file {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Io(e, path.display().to_string()))?;
        text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter_map(|tok| tok.trim().parse::<f64>().ok())
            .collect()
    } else {
        return Err(CliError::Usage(
            "one of --weights, --weights-file or --weights-int is required".into(),
        ));
    };
    let wv = if w.normalize {
        WeightVector::normalized(&raw)?
    } else {
        WeightVector::new(raw)?
    };
    Ok(Weights::Real(wv))
}

fn parse_fraction(s: &str) -> Res<(u64, u64)> {
    let bad = || CliError::Usage(format!("expected a fraction like 11/20, got {s:?}"));
    let (a, b) = s.split_once('/').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn seed_of(s: &SamplingArgs, d: &Defaults) -> (u64, RandomSeed) {
    (
        s.samples.unwrap_or(d.samples),
        RandomSeed::new(s.seed.unwrap_or(d.seed)),
    )
}

fn curve_rows(table: &mut Table, curve: &QuotaCurve) {
    for (q, p) in curve.quotas.iter().zip(&curve.points) {
        table.push(vec![
            (*q).into(),
            curve.statistic.clone().into(),
            p.mean.into(),
            p.standard_error.into(),
            p.samples.into(),
        ]);
    }
}

fn exact_rows(table: &mut Table, name: &str, quotas: &[f64], values: &[f64]) {
    for (q, v) in quotas.iter().zip(values) {
        table.push(vec![
            (*q).into(),
            name.into(),
            (*v).into(),
            0.0.into(),
            0u64.into(),
        ]);
    }
}

fn series_of(curves: &[QuotaCurve]) -> Vec<Series> {
    curves
        .iter()
        .map(|c| Series {
            name: c.statistic.clone(),
            points: c.quotas.iter().copied().zip(c.means()).collect(),
        })
        .collect()
}

fn report_extrema(curves: &[QuotaCurve], window: usize) -> Res {
    for c in curves {
        let e = count_extrema(CurveRef::Sampled(c), window)?;
        let at: Vec<String> = e.locations.iter().map(|x| format!("{x:.4}")).collect();
        eprintln!(
            "{}: {} local extrema{}{}",
            c.statistic,
            e.count,
            if at.is_empty() { "" } else { " near " },
            at.join(", ")
        );
    }
    Ok(())
}

fn curve_meta(
    command: &str,
    n: usize,
    seed: u64,
    samples: u64,
    method: &str,
    grid: &[f64],
) -> serde_json::Value {
    json!({
        "command": command,
        "players": n,
        "seed": seed,
        "samples": samples,
        "method": method,
        "grid": {
            "points": grid.len(),
            "first": grid.first(),
            "last": grid.last(),
        },
    })
}

// ---- commands --------------------------------------------------------------

fn sample_weights(a: &SampleWeightsArgs, d: &Defaults) -> Res<Outcome> {
    let seed = RandomSeed::new(a.seed.unwrap_or(d.seed));
    let mut rng = seed.rng();
    let mut t = Table::new(&["sample", "position", "player", "weight"]);
    for s in 0..a.count {
        let w = sample_uniform_simplex_with(a.n, &mut rng)?;
        let (values, players): (Vec<f64>, Vec<usize>) = if a.ordered {
            let o = order_descending(&w);
            (
                o.weights().to_vec(),
                o.permutation().iter().map(|p| p + 1).collect(),
            )
        } else if a.renyi {
            (renyi_partial_sums(&w), (1..=a.n).collect())
        } else {
            (w.as_slice().to_vec(), (1..=a.n).collect())
        };
        for (i, (v, p)) in values.into_iter().zip(players).enumerate() {
            t.push(vec![(s + 1).into(), (i + 1).into(), p.into(), v.into()]);
        }
    }
    Ok(Outcome::csv(t))
}

fn expected_weights(a: &ExpectedWeightsArgs) -> Res<Outcome> {
    let values = expected_ordered_weights(a.n)?;
    let headers: &[&str] = if a.exact {
        &["k", "expected", "fraction"]
    } else {
        &["k", "expected"]
    };
    let mut t = Table::new(headers);
    for (i, v) in values.iter().enumerate() {
        let mut row = vec![(i + 1).into(), (*v).into()];
        if a.exact {
            row.push(
                expected_ordered_weight_exact(a.n, i + 1)?
                    .to_string()
                    .into(),
            );
        }
        t.push(row);
    }
    let plot = Plot {
        series: vec![Series {
            name: "E(W_(k))".into(),
            points: values
                .iter()
                .enumerate()
                .map(|(i, v)| ((i + 1) as f64, *v))
                .collect(),
        }],
        title: format!("Expected ordered weights, n = {}", a.n),
        x: "rank k",
        y: "expected weight",
        caption: format!("n = {}", a.n),
    };
    Ok(Outcome::csv(t).with_plot(plot))
}

fn weight_density(a: &WeightDensityArgs) -> Res<Outcome> {
    if a.points < 2 || !(a.x_max > 0.0) {
        return Err(CliError::Usage(
            "need at least 2 points and a positive x-max".into(),
        ));
    }
    let ranks: Vec<usize> = match a.k {
        Some(k) => vec![k],
        None => (1..=a.n).collect(),
    };
    let value = if a.cdf { "cdf" } else { "density" };
    let mut t = if a.k.is_some() {
        Table::new(&["x", value])
    } else {
        Table::new(&["rank", "x", value])
    };
    let mut series = Vec::new();
    for &k in &ranks {
        let dist = OrderedWeightDensity::new(a.n, k)?;
        let mut points = Vec::with_capacity(a.points);
        for i in 0..a.points {
            let x = a.x_max * i as f64 / (a.points - 1) as f64;
            let y = if a.cdf {
                dist.cdf(x)?
            } else {
                dist.density(x)?
            };
            points.push((x, y));
            let mut row = vec![x.into(), y.into()];
            if a.k.is_none() {
                row.insert(0, k.into());
            }
            t.push(row);
        }
        series.push(Series {
            name: format!("k = {k}"),
            points,
        });
    }
    let plot = Plot {
        series,
        title: format!(
            "{} of the k-th largest weight, n = {}",
            if a.cdf {
                "Distribution function"
            } else {
                "Density"
            },
            a.n
        ),
        x: "x",
        y: value,
        caption: format!("n = {}", a.n),
    };
    Ok(Outcome::csv(t).with_plot(plot))
}

fn moments(a: &MomentsArgs) -> Res<Outcome> {
    let chosen = a.exponents.is_some() as u8 + a.power_sum.is_some() as u8 + a.sum_sq as u8;
    if chosen != 1 {
        return Err(CliError::Usage(
            "choose exactly one of --exponents, --power-sum, --sum-sq".into(),
        ));
    }
    let mut t = Table::new(&["quantity", "value", "exact"]);
    if let Some(e) = &a.exponents {
        if e.len() > a.n {
            return Err(CliError::Usage(format!(
                "{} exponents for {} players",
                e.len(),
                a.n
            )));
        }
        let mut e = e.clone();
        e.resize(a.n, 0);
        let label = format!(
            "product moment ({})",
            e.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
        );
        let m = MomentIndex(e);
        t.push(vec![
            label.into(),
            product_moment(a.n, &m)?.into(),
            product_moment_exact(a.n, &m)?.to_string().into(),
        ]);
    } else if let Some(m) = a.power_sum {
        t.push(vec![
            format!("power-sum moment {m}").into(),
            power_sum_moment(a.n, m)?.into(),
            power_sum_moment_exact(a.n, m)?.to_string().into(),
        ]);
    } else {
        let (mean, var) = sum_sq_stats(a.n)?;
        let (mean_x, var_x) = sum_sq_stats_exact(a.n)?;
        t.push(vec![
            "sum of squares mean".into(),
            mean.into(),
            mean_x.to_string().into(),
        ]);
        t.push(vec![
            "sum of squares variance".into(),
            var.into(),
            var_x.to_string().into(),
        ]);
    }
    Ok(Outcome::csv(t))
}

fn profile_with_kernel(g: &VotingGame, kernel: Kernel) -> Res<PowerProfile> {
    Ok(match kernel {
        Kernel::Auto => banzhaf(g)?,
        Kernel::Naive => count_winning_naive(g)?.into(),
        Kernel::Mitm => count_winning_mitm(g)?.into(),
    })
}

fn indices(a: &IndicesArgs) -> Res<Outcome> {
    let (profile, game_f64, quota) = match read_weights(&a.weights)? {
        Weights::Real(w) => {
            let q = a
                .quota
                .ok_or_else(|| CliError::Usage("real weights need --quota".into()))?;
            let g = VotingGame::new(w, q)?;
            (profile_with_kernel(&g, a.kernel)?, g, q)
        }
        Weights::Exact(ints) => {
            let frac = a
                .quota_frac
                .as_deref()
                .ok_or_else(|| CliError::Usage("--weights-int needs --quota-frac".into()))?;
            let (num, den) = parse_fraction(frac)?;
            let g = ExactGame::new(ints, num, den)?;
            let profile = match a.kernel {
                Kernel::Auto => banzhaf_exact(&g)?,
                k => {
                    let w: Vec<u128> = g.weights().iter().map(|&x| x as u128).collect();
                    let counts = if k == Kernel::Naive {
                        count_winning_naive_with(&w, g.threshold())?
                    } else {
                        count_winning_mitm_with(&w, g.threshold())?
                    };
                    counts.into()
                }
            };
            (profile, g.to_voting_game()?, num as f64 / den as f64)
        }
    };
    let dummies: Vec<f64> = profile
        .psi
        .iter()
        .enumerate()
        .filter(|(_, p)| **p == 0.0)
        .map(|(i, _)| (i + 1) as f64)
        .collect();
    let printed = optimal_quota_diagnostic(game_f64.weights(), QuotaFormula::Printed);
    let sqrt = optimal_quota_diagnostic(game_f64.weights(), QuotaFormula::Sqrt);
    let mut t = Table::new(&[
        "players",
        "quota",
        "winning",
        "coleman",
        "psi",
        "beta",
        "dummies",
        "hoeffding-bound",
        "q-star-printed",
        "q-star-sqrt",
    ]);
    t.push(vec![
        profile.psi.len().into(),
        quota.into(),
        profile.winning.into(),
        profile.coleman.into(),
        profile.psi.clone().into(),
        profile.beta.clone().into(),
        dummies.into(),
        hoeffding_bound(&game_f64).into(),
        printed.value.into(),
        sqrt.value.into(),
    ]);
    if printed.exceeds_one {
        eprintln!(
            "note: q-star-printed = {} is not a quota in (1/2, 1]",
            printed.value
        );
    }
    Ok(Outcome {
        table: t,
        default_format: Format::Json,
        plot: None,
        meta: None,
    })
}

fn functional_names(f: Functional, n: usize) -> Vec<String> {
    match f {
        Functional::Coleman => vec!["coleman".into()],
        Functional::Beta => (1..=n).map(|i| format!("beta_{i}")).collect(),
        Functional::Psi => (1..=n).map(|i| format!("psi_{i}")).collect(),
    }
}

fn fixed_curve(a: &FixedCurveArgs, d: &Defaults) -> Res<Outcome> {
    let w = match read_weights(&a.weights)? {
        Weights::Real(w) => w,
        Weights::Exact(ints) => {
            WeightVector::normalized(&ints.iter().map(|&x| x as f64).collect::<Vec<_>>())?
        }
    };
    let functional = match a.functional {
        FunctionalArg::Beta => Functional::Beta,
        FunctionalArg::Psi => Functional::Psi,
        FunctionalArg::Coleman => Functional::Coleman,
    };
    let n = w.len();
    let names = functional_names(functional, n);
    let curve = quota_step_curve(&w)?;
    let mut series: Vec<Series> = names
        .iter()
        .map(|s| Series {
            name: s.clone(),
            points: Vec::new(),
        })
        .collect();
    let table = if a.on_grid {
        let grid = resolve_grid(&a.grid, d)?;
        let mut t = Table::new(CURVE_HEADERS);
        let mut columns = vec![Vec::with_capacity(grid.len()); names.len()];
        for &q in &grid {
            for (c, v) in columns
                .iter_mut()
                .zip(functional.evaluate(&curve.profile_at(q)?))
            {
                c.push(v);
            }
        }
        for ((name, values), s) in names.iter().zip(&columns).zip(&mut series) {
            exact_rows(&mut t, name, &grid, values);
            s.points = grid.iter().copied().zip(values.iter().copied()).collect();
        }
        t
    } else {
        let mut t = Table::new(&["lower", "upper", "series-name", "value"]);
        for (i, name) in names.iter().enumerate() {
            for p in &curve.pieces {
                let v = functional.evaluate(&p.counts.clone().into())[i];
                t.push(vec![
                    p.lower.into(),
                    p.upper.into(),
                    name.clone().into(),
                    v.into(),
                ]);
                series[i].points.push((p.lower, v));
                series[i].points.push((p.upper, v));
            }
        }
        t
    };
    let plot = Plot {
        series,
        title: format!("Fixed weights, {} pieces", curve.pieces.len()),
        x: "quota",
        y: "index",
        caption: format!("n = {n}, exact"),
    };
    Ok(Outcome::csv(table).with_plot(plot))
}

fn power_curve(a: &PowerCurveArgs, d: &Defaults) -> Res<Outcome> {
    let grid = resolve_grid(&a.grid, d)?;
    let (samples, seed) = seed_of(&a.sampling, d);
    let statistic = match a.statistic {
        StatisticArg::Beta => PowerStatistic::Beta,
        StatisticArg::Psi => PowerStatistic::Psi,
    };
    let curves = mc_power_curve(a.n, &grid, samples, seed, statistic)?;
    if a.extrema {
        report_extrema(&curves, a.window.unwrap_or(d.window))?;
    }
    let mut t = Table::new(CURVE_HEADERS);
    curves.iter().for_each(|c| curve_rows(&mut t, c));
    let plot = Plot {
        series: series_of(&curves),
        title: format!("Expected ordered indices, n = {}", a.n),
        x: "quota",
        y: "expected index",
        caption: format!("n = {}, seed {}, {samples} samples", a.n, seed.seed),
    };
    Ok(Outcome::csv(t).with_plot(plot).with_meta(curve_meta(
        "power-curve",
        a.n,
        seed.seed,
        samples,
        "monte-carlo",
        &grid,
    )))
}

fn coleman_curve(a: &ColemanCurveArgs, d: &Defaults) -> Res<Outcome> {
    let grid = resolve_grid(&a.grid, d)?;
    let (samples, seed) = seed_of(&a.sampling, d);
    let mut t = Table::new(CURVE_HEADERS);
    let (series, method, caption) = match a.method {
        ColemanMethodArg::Inversion | ColemanMethodArg::Normal => {
            let spec = ColemanCurveSpec {
                tolerance: a.tolerance.unwrap_or(d.tolerance),
                ..ColemanCurveSpec::inversion(a.n)
            };
            let (name, values) = if a.method == ColemanMethodArg::Inversion {
                let v = grid
                    .iter()
                    .map(|&q| expected_coleman(a.n, q, &spec))
                    .collect::<Result<Vec<_>, _>>()?;
                ("coleman", v)
            } else {
                let v = grid
                    .iter()
                    .map(|&q| expected_coleman_normal(a.n, q))
                    .collect::<Result<Vec<_>, _>>()?;
                ("coleman-normal", v)
            };
            exact_rows(&mut t, name, &grid, &values);
            let method = if name == "coleman" {
                "inversion"
            } else {
                "normal"
            };
            (
                vec![Series {
                    name: name.into(),
                    points: grid.iter().copied().zip(values).collect(),
                }],
                method,
                format!("n = {}, {method}", a.n),
            )
        }
        ColemanMethodArg::MonteCarlo | ColemanMethodArg::HoeffdingBound => {
            let curve = if a.method == ColemanMethodArg::MonteCarlo {
                mc_coleman_curve(a.n, &grid, samples, seed)?
            } else {
                mc_hoeffding_curve(a.n, &grid, samples, seed)?
            };
            if a.extrema {
                report_extrema(std::slice::from_ref(&curve), a.window.unwrap_or(d.window))?;
            }
            curve_rows(&mut t, &curve);
            (
                series_of(std::slice::from_ref(&curve)),
                if a.method == ColemanMethodArg::MonteCarlo {
                    "monte-carlo"
                } else {
                    "hoeffding-bound"
                },
                format!("n = {}, seed {}, {samples} samples", a.n, seed.seed),
            )
        }
    };
    let plot = Plot {
        series,
        title: format!("Expected Coleman index, n = {}", a.n),
        x: "quota",
        y: "expected Coleman index",
        caption,
    };
    Ok(Outcome::csv(t).with_plot(plot).with_meta(curve_meta(
        "coleman-curve",
        a.n,
        seed.seed,
        samples,
        method,
        &grid,
    )))
}

fn classes(a: &ClassesArgs, d: &Defaults) -> Res<Outcome> {
    let (samples, seed) = seed_of(&a.sampling, d);
    let catalog = discover_classes(a.n, samples, seed)?;
    match catalog.ceiling() {
        Some(c) if catalog.len() > c => eprintln!(
            "{} distinct games found with {samples} samples, above the published count {c}",
            catalog.len()
        ),
        Some(c) => eprintln!(
            "{} distinct games found with {samples} samples (published count {c})",
            catalog.len()
        ),
        None => eprintln!(
            "{} distinct games found with {samples} samples",
            catalog.len()
        ),
    }
    let mut t = Table::new(&["class-id", "beta-vector", "hit-count"]);
    for c in &catalog.classes {
        t.push(vec![
            (c.id + 1).into(),
            c.beta.clone().into(),
            c.hits.into(),
        ]);
    }
    Ok(Outcome::csv(t).with_meta(json!({
        "command": "classes",
        "players": a.n,
        "seed": seed.seed,
        "samples": samples,
        "distinct": catalog.len(),
        "known-total": catalog.ceiling(),
    })))
}

/// One series of a curve CSV, in file order.
struct CurveSeries {
    order: usize,
    points: Vec<(f64, f64)>,
    /// Sum of squared standard errors; zero for exact curves.
    variance: f64,
}

impl CurveSeries {
    /// Cost per breakpoint: zero-noise default for exact curves, otherwise a
    /// BIC-style charge for the extra parameters of one more piece.
    fn penalty(&self, max_degree: usize) -> Option<f64> {
        let m = self.points.len() as f64;
        (self.variance > 0.0)
            .then(|| (max_degree + 2) as f64 * (self.variance / m) * m.ln().max(1.0))
    }
}

fn read_curve_csv(path: &Path) -> Res<BTreeMap<String, CurveSeries>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let col = |name: &str| {
        find(name).ok_or_else(|| CliError::Usage(format!("{}: no {name} column", path.display())))
    };
    let (qc, sc, mc) = (col("quota")?, col("series-name")?, col("mean")?);
    let ec = find("standard-error");
    let mut out: BTreeMap<String, CurveSeries> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Usage(format!("{}: bad number on row {}", path.display(), i + 2))
                })
        };
        let (q, m) = (num(qc)?, num(mc)?);
        let se = match ec {
            Some(c) => num(c)?,
            None => 0.0,
        };
        let name = rec.get(sc).unwrap_or("").to_owned();
        let next = out.len();
        let entry = out.entry(name).or_insert(CurveSeries {
            order: next,
            points: Vec::new(),
            variance: 0.0,
        });
        entry.points.push((q, m));
        entry.variance += se * se;
    }
    Ok(out)
}

fn spline_fit(a: &SplineFitArgs) -> Res<Outcome> {
    let data = read_curve_csv(&a.input)?;
    let mut selected: Vec<(&String, &CurveSeries)> = data
        .iter()
        .filter(|(name, _)| a.series.as_ref().is_none_or(|s| s == *name))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage(match &a.series {
            Some(s) => format!("series {s:?} not found"),
            None => "input has no rows".into(),
        }));
    }
    selected.sort_by_key(|(_, c)| c.order);
    let mut t = Table::new(&[
        "series-name",
        "piece",
        "lower",
        "upper",
        "degree",
        "coefficients",
        "max-residual",
    ]);
    let mut series = Vec::new();
    for (name, curve) in selected {
        let points = &curve.points;
        let mode = match &a.breakpoints {
            Some(b) => BreakpointMode::Fixed(b.clone()),
            None => BreakpointMode::Auto {
                penalty: a.penalty.or_else(|| curve.penalty(a.max_degree)),
            },
        };
        let fit = fit_spline(points, a.max_degree, mode)?;
        eprintln!(
            "{name}: {} pieces, breakpoints [{}], degree {}, max residual {:.3e}",
            fit.pieces.len(),
            fit.breakpoints
                .iter()
                .map(|b| format!("{b:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            fit.degree,
            fit.max_residual
        );
        for (i, (piece, poly)) in fit.pieces.iter().zip(fit.monomial_pieces()).enumerate() {
            let mut coefficients = poly.coefficients.clone();
            coefficients.truncate(piece.degree + 1);
            t.push(vec![
                name.clone().into(),
                (i + 1).into(),
                piece.lower.into(),
                piece.upper.into(),
                piece.degree.into(),
                coefficients.into(),
                fit.max_residual.into(),
            ]);
        }
        let mut pts: Vec<(f64, f64)> = points.clone();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        series.push(Series {
            name: format!("{name} (fit)"),
            points: pts.iter().map(|&(x, _)| (x, fit.eval(x))).collect(),
        });
    }
    let plot = Plot {
        series,
        title: "Piecewise polynomial fit".into(),
        x: "quota",
        y: "value",
        caption: a.input.display().to_string(),
    };
    Ok(Outcome::csv(t).with_plot(plot))
}

fn analytic<'a>(
    kind: &'a AnalyticKind,
    d: &Defaults,
) -> Res<(&'static str, &'a OutputArgs, Outcome)> {
    Ok(match kind {
        AnalyticKind::Beta { n, grid, output } => {
            let grid = resolve_grid(grid, d)?;
            let columns: Vec<Vec<f64>> = match n {
                2 => {
                    let v = grid
                        .iter()
                        .map(|&q| expected_beta_n2(q))
                        .collect::<Result<Vec<_>, _>>()?;
                    vec![
                        v.iter().map(|p| p.0).collect(),
                        v.iter().map(|p| p.1).collect(),
                    ]
                }
                3 => {
                    let v = grid
                        .iter()
                        .map(|&q| expected_beta_n3(q))
                        .collect::<Result<Vec<_>, _>>()?;
                    (0..3).map(|k| v.iter().map(|p| p[k]).collect()).collect()
                }
                _ => {
                    return Err(CliError::Usage(
                        "closed forms exist for n = 2 and n = 3".into(),
                    ))
                }
            };
            let mut t = Table::new(CURVE_HEADERS);
            let mut series = Vec::new();
            for (k, values) in columns.iter().enumerate() {
                let name = format!("beta_{}", k + 1);
                exact_rows(&mut t, &name, &grid, values);
                series.push(Series {
                    name,
                    points: grid.iter().copied().zip(values.iter().copied()).collect(),
                });
            }
            let plot = Plot {
                series,
                title: format!("Expected ordered Penrose-Banzhaf indices, n = {n}"),
                x: "quota",
                y: "expected index",
                caption: format!("n = {n}, exact"),
            };
            ("analytic", output, Outcome::csv(t).with_plot(plot))
        }
        AnalyticKind::Coefficients { output } => {
            let mut t = Table::new(&["series-name", "lower", "upper", "polynomial"]);
            for (k, p) in expected_beta_n3_exact().iter().enumerate() {
                for (i, piece) in p.pieces.iter().enumerate() {
                    t.push(vec![
                        format!("beta_{}", k + 1).into(),
                        p.knots[i].to_string().into(),
                        p.knots[i + 1].to_string().into(),
                        piece.to_string().into(),
                    ]);
                }
            }
            ("analytic", output, Outcome::csv(t))
        }
        AnalyticKind::Extrema { output } => {
            let mut t = Table::new(&["rank", "quota", "fraction", "nature"]);
            for s in extrema_n3() {
                t.push(vec![
                    s.rank.into(),
                    s.quota_f64().into(),
                    s.quota.to_string().into(),
                    format!("{:?}", s.nature).to_lowercase().into(),
                ]);
            }
            ("analytic", output, Outcome::csv(t))
        }
        AnalyticKind::ClassTable { n, grid, output } => {
            let table = match n {
                2 => class_table_n2(),
                3 => class_table_n3(),
                _ => {
                    return Err(CliError::Usage(
                        "class tables exist for n = 2 and n = 3".into(),
                    ))
                }
            };
            let grid = resolve_grid(grid, d)?;
            let rows = grid
                .iter()
                .map(|&q| table.probabilities_at(q))
                .collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new(CURVE_HEADERS);
            let mut series = Vec::new();
            for (i, class) in table.classes.iter().enumerate() {
                let name = format!("class-{}", class.label);
                let values: Vec<f64> = rows.iter().map(|r| r[i]).collect();
                exact_rows(&mut t, &name, &grid, &values);
                series.push(Series {
                    name,
                    points: grid.iter().copied().zip(values).collect(),
                });
            }
            let plot = Plot {
                series,
                title: format!("Game class probabilities, n = {n}"),
                x: "quota",
                y: "probability",
                caption: format!("n = {n}, exact"),
            };
            ("analytic", output, Outcome::csv(t).with_plot(plot))
        }
        AnalyticKind::ErrorRatio {
            n,
            y,
            tolerance,
            output,
        } => {
            let spec = ColemanCurveSpec {
                tolerance: tolerance.unwrap_or(d.tolerance),
                ..ColemanCurveSpec::inversion(*n)
            };
            let mut t = Table::new(&["y", "normal-quota", "exact-quota", "ratio"]);
            let mut points = Vec::new();
            for &level in y {
                let r = coleman_error_ratio(*n, level, &spec)?;
                t.push(vec![
                    r.y.into(),
                    r.normal_quota.into(),
                    r.exact_quota.into(),
                    r.ratio.into(),
                ]);
                points.push((r.y, r.ratio));
            }
            let plot = Plot {
                series: vec![Series {
                    name: "ratio".into(),
                    points,
                }],
                title: format!("Normal approximation quota ratio, n = {n}"),
                x: "y",
                y: "quota ratio",
                caption: format!("n = {n}"),
            };
            ("analytic", output, Outcome::csv(t).with_plot(plot))
        }
        AnalyticKind::Charfn {
            n,
            t_max,
            points,
            output,
        } => {
            if *points < 2 || !(*t_max > 0.0) {
                return Err(CliError::Usage(
                    "need at least 2 points and a positive t-max".into(),
                ));
            }
            let mut t = Table::new(&["t", "phi"]);
            let mut pts = Vec::new();
            for i in 0..*points {
                let x = t_max * i as f64 / (*points - 1) as f64;
                let v = phi_z(*n, x)?;
                t.push(vec![x.into(), v.into()]);
                pts.push((x, v));
            }
            let plot = Plot {
                series: vec![Series {
                    name: "phi".into(),
                    points: pts,
                }],
                title: format!("Characteristic function, n = {n}"),
                x: "t",
                y: "phi",
                caption: format!("n = {n}"),
            };
            ("analytic", output, Outcome::csv(t).with_plot(plot))
        }
    })
}
