use std::collections::BTreeMap;

use mtsg::experiment::synthetic::{correlated_targets, SyntheticSpec};
use mtsg::experiment::{
    aggregate_csv, full_grid, load_results, per_target_csv, render_arrmse_chart_data, render_rpd_table,
    render_rpt_table, run_experiment, run_on_dataset, ExperimentConfig, GridEntry, ResultRecord,
};
use mtsg::learners::LearnerKind;
use mtsg::metrics::{rpd_band, EvaluationReport, Provenance, TargetMetrics, REPORT_SCHEMA};
use mtsg::mtr::Method;

fn fast_config(targets: Vec<String>, grid: Vec<GridEntry>) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        targets,
        grid,
        ..Default::default()
    };
    c.rf.n_trees = 15;
    c.methods.filter_trees = 15;
    c.methods.erc_chains = 2;
    c.methods.drs_max_layers = 2;
    c
}

#[test]
fn full_grid_yields_one_record_per_entry_and_target() {
    let data = correlated_targets(
        &SyntheticSpec {
            rows: 45,
            features: 6,
            targets: 10,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    let config = fast_config(data.target_names().to_vec(), full_grid(&LearnerKind::ALL));
    let out = run_on_dataset(&config, &data, "synthetic").unwrap();
    assert_eq!(out.records.len(), 21);
    for r in &out.records {
        let rep = r.report.as_ref().unwrap_or_else(|| panic!("{}: {:?}", r.label(), r.failure));
        assert_eq!(rep.per_target.len(), 10);
        for m in &rep.per_target {
            let rpt = m.rpt.expect("ST baseline present for every learner");
            let base = out
                .records
                .iter()
                .find(|b| b.method == Method::St && b.learner == r.learner)
                .unwrap();
            let st = base.report.as_ref().unwrap().per_target.iter().find(|b| b.target == m.target).unwrap();
            assert!((rpt - st.rmse / m.rmse).abs() < 1e-12);
        }
    }
    assert_eq!(out.manifest.train_rows, 30);
    assert_eq!(out.manifest.test_rows, 15);
}

#[test]
fn results_persist_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let data = correlated_targets(
        &SyntheticSpec {
            rows: 40,
            features: 4,
            targets: 2,
            ..Default::default()
        },
        2,
    )
    .unwrap();
    let mut s = String::from("f0,f1,f2,f3,y0,y1\n");
    for i in 0..data.n_rows() {
        let row: Vec<String> = data.x().row(i).iter().chain(data.y().row(i).iter()).map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    let csv = dir.path().join("d.csv");
    std::fs::write(&csv, s).unwrap();
    let mut config = fast_config(vec!["y0".into(), "y1".into()], full_grid(&[LearnerKind::Rf]));
    config.dataset = csv;
    config.output = dir.path().join("out1");
    let first = run_experiment(&config).unwrap();
    config.output = dir.path().join("out2");
    run_experiment(&config).unwrap();
    for f in ["per_target.csv", "aggregate.csv", "manifest.toml", "split.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("out1").join(f)).unwrap(),
            std::fs::read(dir.path().join("out2").join(f)).unwrap(),
            "{f}"
        );
    }
    let loaded = load_results(dir.path().join("out1")).unwrap();
    assert_eq!(per_target_csv(&loaded), per_target_csv(&first));
    assert_eq!(aggregate_csv(&loaded), aggregate_csv(&first));
}

#[test]
fn full_training_fraction_is_an_empty_test_set() {
    let data = correlated_targets(&SyntheticSpec::default(), 3).unwrap();
    let mut config = fast_config(data.target_names().to_vec(), full_grid(&[LearnerKind::Rf]));
    config.train_fraction = 1.0;
    let err = run_on_dataset(&config, &data, "x").unwrap_err();
    assert_eq!(err.to_string(), "empty test set");
}

fn record(entry: usize, method: Method, learner: LearnerKind, rmses: &[f64], baseline: Option<&[f64]>) -> ResultRecord {
    let per_target = rmses
        .iter()
        .enumerate()
        .map(|(t, &e)| TargetMetrics {
            target: format!("t{t}"),
            rmse: e,
            rrmse: e / 2.0,
            rpt: baseline.map(|b| b[t] / e),
            rpd: 2.0 / e,
            rpd_band: rpd_band(2.0 / e).unwrap(),
            reference_sd: 2.0,
            sse: 0.0,
            sst: 0.0,
        })
        .collect::<Vec<_>>();
    let arrmse = per_target.iter().map(|m| m.rrmse).sum::<f64>() / rmses.len() as f64;
    ResultRecord {
        config_hash: "h".into(),
        entry,
        method,
        learner,
        pool: Vec::new(),
        seed: 0,
        stacking: "in-sample".into(),
        report: Some(EvaluationReport {
            schema: REPORT_SCHEMA.into(),
            provenance: Provenance {
                method: method.to_string(),
                learners: vec![learner.to_string()],
                seed: 0,
                dataset: String::new(),
            },
            arrmse,
            per_target,
        }),
        failure: None,
        seconds: 0.0,
    }
}

#[test]
fn rpt_table_identity_rows_averages_and_ties() {
    let st = [1.0, 2.0, 3.0];
    let records = vec![
        record(0, Method::St, LearnerKind::Rf, &st, Some(&st)),
        record(1, Method::Sst, LearnerKind::Rf, &st, Some(&st)),
        record(2, Method::Mtsg, LearnerKind::Rf, &[0.5, 2.0, 3.0], Some(&st)),
        record(3, Method::Drs, LearnerKind::Rf, &[1.0, 1.0, 3.0], Some(&st)),
        record(4, Method::Erc, LearnerKind::Rf, &[1.0, 2.0, 3.3], Some(&st)),
    ];
    let table = render_rpt_table(&records).unwrap();
    let row = |m: &str| table.lines().find(|l| l.starts_with(m)).unwrap().to_string();
    assert!(row("SST").split_whitespace().skip(2).take(3).all(|c| c == "1.00"));
    // (2 + 1 + 1) / 3 = 1.333…, shown as 1.33 and tied with DRS
    assert!(row("MTSG").ends_with("1.33*"), "{table}");
    assert!(row("DRS").ends_with("1.33*"), "{table}");
    assert!(row("ERC").ends_with("0.97"), "{table}");
    assert!(!table.contains("\nST "));

    let missing = vec![records[1].clone()];
    assert!(render_rpt_table(&missing).is_err());
}

#[test]
fn arrmse_chart_has_reference_row() {
    let records = vec![
        record(0, Method::St, LearnerKind::Rf, &[1.0, 2.0], None),
        record(1, Method::St, LearnerKind::SvrRbf, &[0.5, 1.0], None),
        record(2, Method::Mtsg, LearnerKind::Rf, &[0.4, 1.0], None),
    ];
    let chart = render_arrmse_chart_data(&records).unwrap();
    let lines: Vec<&str> = chart.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert_eq!(lines[4], "ST_min,SVR_R,0.375000");
    assert!(lines[3].ends_with(",0.350000"));
}

#[test]
fn rpd_table_labels() {
    let records = vec![
        record(0, Method::St, LearnerKind::Rf, &[4.0, 6.1, 3.0], None),
        record(1, Method::Drs, LearnerKind::Rf, &[4.0, 5.0, 2.1], None),
        record(2, Method::Mtsg, LearnerKind::SvrRbf, &[4.0, 5.0, 2.1], None),
        record(3, Method::Mtsg, LearnerKind::Rf, &[4.0, 5.5, 2.1], None),
    ];
    let sds: BTreeMap<String, f64> = [("t0", 4.2), ("t1", 11.0), ("t2", 4.2)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let table = render_rpd_table(&records, &sds).unwrap();
    let row = |t: &str| table.lines().find(|l| l.starts_with(t)).unwrap().to_string();
    assert!(row("t0").contains("All models"));
    assert!(row("t1").contains("DRS (RF); MTSG (SVR_R)"), "{table}");
    assert!(row("t1").contains("2.20") && row("t1").contains("very_good"));
    assert!(row("t2").contains("MTSG (SVR_R, RF)"), "{table}");
    assert!(row("t2").contains("2.00"));
    let mut partial = sds.clone();
    partial.remove("t2");
    assert!(render_rpd_table(&records, &partial).is_err());
}
