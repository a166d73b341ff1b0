use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{info, warn};
use mtsg::experiment::{
    self, full_grid, load_last_columns, load_results, reference_sds, render_arrmse_chart_data, render_arrmse_table,
    render_rpd_table, render_rpt_table, rpt_stub, run_on_dataset, suite_targets, ExperimentConfig, MethodParams,
    OutputLock,
};
use mtsg::learners::{LearnerKind, LearnerSpec};
use mtsg::metrics::{EvaluationReport, Provenance};
use mtsg::mtr::{self, ModelBundle, MtrMethodSpec, Stacking};
use mtsg::tabular::{
    apply_autoscale, fit_autoscale, kennard_stone_split, load_columns, load_csv, SplitIndices,
};
use mtsg::{Error, Result};

use crate::args::{
    BenchmarkArgs, CompareArgs, EvaluateArgs, LearnerArgs, MethodArgs, PredictArgs, RunArgs, SplitArgs, TrainArgs,
};

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn learner_spec(kind: LearnerKind, p: &LearnerArgs) -> LearnerSpec {
    LearnerSpec {
        kind,
        rf: p.rf(),
        svr: p.svr(),
    }
}

fn stacking(m: &MethodArgs) -> Stacking {
    if m.oof {
        Stacking::OutOfFold { folds: m.folds }
    } else {
        Stacking::InSample
    }
}

fn method_params(m: &MethodArgs) -> MethodParams {
    MethodParams {
        erc_chains: m.chains,
        drs_max_layers: m.layers,
        motc_max_children: m.max_children,
        motc_max_depth: m.max_depth,
        filter_rule: m.filter,
        filter_trees: m.filter_trees,
    }
}

pub fn split(a: SplitArgs) -> Result<()> {
    let data = load_csv(&a.data.data, &a.data.targets)?;
    let split = kennard_stone_split(data.x().view(), a.fraction)?;
    split.write_csv(&a.out)?;
    println!(
        "{}: {} train, {} test rows",
        a.out.display(),
        split.train.len(),
        split.test.len()
    );
    Ok(())
}

pub fn train(a: TrainArgs) -> Result<()> {
    let data = load_csv(&a.data.data, &a.data.targets)?;
    let split = match &a.split {
        Some(path) => {
            let s = SplitIndices::read_csv(path)?;
            s.validate(data.n_rows())?;
            s
        }
        None => kennard_stone_split(data.x().view(), a.fraction)?,
    };
    let m = &a.method_params;
    let spec = MtrMethodSpec {
        method: a.method,
        base: learner_spec(a.learner, &a.learner_params),
        level0_pool: a.pool.iter().map(|&k| learner_spec(k, &a.learner_params)).collect(),
        erc_chains: m.chains,
        drs_max_layers: m.layers,
        motc_max_children: m.max_children,
        motc_max_depth: m.max_depth,
        filter_rule: m.filter,
        filter_trees: m.filter_trees,
        stacking: stacking(m),
        seed: a.seed,
    };
    spec.validate()?;
    let _lock = OutputLock::acquire(&a.out)?;
    let train = data.select_rows(&split.train)?;
    let x_scale = fit_autoscale(train.x().view())?;
    let y_scale = fit_autoscale(train.y().view())?;
    let x = apply_autoscale(train.x().view(), &x_scale)?;
    let y = apply_autoscale(train.y().view(), &y_scale)?;
    info!("training {} on {} rows", spec.method, x.nrows());
    let model = mtr::train(&spec, x.view(), y.view(), data.target_names())?;
    let n_models = model.n_models();
    let bundle = ModelBundle {
        model,
        feature_names: data.feature_names().to_vec(),
        x_scale: Some(x_scale),
        y_scale: Some(y_scale),
    };
    bundle.save(&a.out)?;
    split.write_csv(a.out.join("split.csv"))?;
    println!(
        "{}: {} ({}) with {n_models} learners on {} training rows",
        a.out.display(),
        spec.method,
        spec.learner_label(),
        split.train.len()
    );
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let bundle = ModelBundle::load(&a.model)?;
    let x = load_columns(&a.data, &bundle.feature_names)?;
    let pred = bundle.predict(x.view())?;
    let mut out = pred.target_names.join(",");
    out.push('\n');
    for row in pred.values.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    write(&a.out, &out)?;
    println!("{}: {} predictions", a.out.display(), pred.values.nrows());
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let bundle = ModelBundle::load(&a.model)?;
    let data = load_csv(&a.data, &bundle.model.target_names)?;
    if data.n_features() != bundle.feature_names.len() {
        return Err(Error::shape(
            format!("{} feature columns", bundle.feature_names.len()),
            format!("{} feature columns", data.n_features()),
        ));
    }
    let data = match &a.split {
        Some(path) => {
            let s = SplitIndices::read_csv(path)?;
            s.validate(data.n_rows())?;
            if s.test.is_empty() {
                return Err(Error::EmptyTestSet);
            }
            data.select_rows(&s.test)?
        }
        None => data,
    };
    let x = load_order(&data, &bundle.feature_names)?;
    let pred = bundle.predict(x.view())?;
    let spec = &bundle.model.spec;
    let learners = if spec.method.uses_pool() {
        spec.level0_pool.iter().map(|l| l.kind.to_string()).collect()
    } else {
        vec![spec.base.kind.to_string()]
    };
    let provenance = Provenance {
        method: spec.method.to_string(),
        learners,
        seed: spec.seed,
        dataset: a.data.display().to_string(),
    };
    let report = EvaluationReport::compute(data.y().view(), pred.values.view(), data.target_names(), provenance)?;
    let _lock = OutputLock::acquire(&a.out)?;
    report.write(&a.out)?;
    println!("{}: aRRMSE {:.4} over {} rows", a.out.display(), report.arrmse, data.n_rows());
    Ok(())
}

/// Feature matrix of `data` with columns reordered to `names`.
fn load_order(data: &mtsg::Dataset, names: &[String]) -> Result<ndarray::Array2<f64>> {
    let cols = names
        .iter()
        .map(|n| {
            data.feature_names()
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| Error::MissingColumn(n.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(data.x().select(ndarray::Axis(1), &cols))
}

pub fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let d = suite_targets(&a.suite)?;
    let data = match &a.targets {
        Some(t) => load_csv(&a.data, t)?,
        None => load_last_columns(&a.data, d)?,
    };
    let config = ExperimentConfig {
        dataset: a.data.clone(),
        targets: data.target_names().to_vec(),
        train_fraction: a.fraction,
        seed: a.seed,
        output: a.out.clone(),
        out_of_fold: a.method_params.oof,
        folds: a.method_params.folds,
        rf: a.learner_params.rf(),
        svr: a.learner_params.svr(),
        methods: method_params(&a.method_params),
        grid: full_grid(&[LearnerKind::Rf, LearnerKind::SvrRbf]),
    };
    config.validate()?;
    let _lock = OutputLock::acquire(&a.out)?;
    let outcome = run_on_dataset(&config, &data, &a.suite.to_ascii_lowercase())?;
    outcome.write(&a.out)?;
    write(&a.out.join("config.toml"), &config.to_toml()?)?;
    let table = render_arrmse_table(&outcome.records)?;
    write(&a.out.join("arrmse_table.txt"), &table)?;
    print!("{table}");
    report_failures(&outcome.records)
}

fn report_failures(records: &[experiment::ResultRecord]) -> Result<()> {
    match records.iter().find(|r| !r.is_ok()) {
        Some(r) => Err(Error::GridEntry {
            entry: format!("{} ({})", r.entry, r.label()),
            message: r.failure.clone().unwrap_or_default(),
        }),
        None => Ok(()),
    }
}

pub fn compare(a: CompareArgs) -> Result<()> {
    if !a.records.is_dir() {
        return Err(Error::EmptyTable(format!("{} is not a results directory", a.records.display())));
    }
    let records = load_results(&a.records)?;
    let out = a.out.unwrap_or_else(|| a.records.clone());
    let _lock = OutputLock::acquire(&out)?;
    let rpt = match render_rpt_table(&records) {
        Ok(t) => t,
        Err(Error::InvalidParameter(reason)) => {
            warn!("{reason}; writing a stub RPT table");
            rpt_stub(&reason)
        }
        Err(e) => return Err(e),
    };
    write(&out.join("rpt_table.txt"), &rpt)?;
    write(&out.join("arrmse_chart.csv"), &render_arrmse_chart_data(&records)?)?;
    write(&out.join("rpd_table.txt"), &render_rpd_table(&records, &reference_sds(&records))?)?;
    println!("{}: rpt_table.txt, arrmse_chart.csv, rpd_table.txt", out.display());
    Ok(())
}

pub fn run(a: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(out) = a.out {
        config.output = out;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(f) = a.fraction {
        config.train_fraction = f;
    }
    if a.oof {
        config.out_of_fold = true;
    }
    config.validate()?;
    let _lock = OutputLock::acquire(&config.output)?;
    let records = experiment::run_experiment(&config)?;
    println!("{}: {} grid entries", config.output.display(), records.len());
    Ok(())
}
