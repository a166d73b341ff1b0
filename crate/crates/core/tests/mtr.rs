use mtsg::experiment::synthetic::{correlated_targets, SyntheticSpec};
use mtsg::learners::{train, LearnerSpec};
use mtsg::mtr::{self, ColumnSource, FilterRule, Method, ModelBundle, MtrMethodSpec, Structure};
use mtsg::tabular::fit_autoscale;
use mtsg::Dataset;
use ndarray::{Array2, Axis};

fn data(rows: usize, targets: usize, seed: u64) -> Dataset {
    correlated_targets(
        &SyntheticSpec {
            rows,
            features: 5,
            targets,
            ..Default::default()
        },
        seed,
    )
    .unwrap()
}

fn small(method: Method) -> MtrMethodSpec {
    let fast = |s: LearnerSpec| s.with_trees(25);
    MtrMethodSpec::new(method, fast(LearnerSpec::rf()))
        .with_pool(vec![fast(LearnerSpec::rf()), LearnerSpec::svr_linear(), LearnerSpec::svr_rbf()])
        .with_chains(3)
        .with_layers(2)
        .with_seed(5)
}

fn small_filter(method: Method) -> MtrMethodSpec {
    let mut s = small(method);
    s.filter_trees = 25;
    s
}

#[test]
fn every_method_returns_finite_n_by_d() {
    let d = data(60, 3, 1);
    for m in Method::ALL {
        let model = mtr::train(&small_filter(m), d.x().view(), d.y().view(), d.target_names()).unwrap();
        model.validate().unwrap();
        let p = model.predict(d.x().view()).unwrap();
        assert_eq!(p.values.dim(), (60, 3), "{m}");
        assert!(p.values.iter().all(|v| v.is_finite()));
        assert_eq!(p.target_names, d.target_names());
        let empty = model.predict(Array2::zeros((0, 5)).view()).unwrap();
        assert_eq!(empty.values.dim(), (0, 3));
        assert!(model.predict(Array2::zeros((2, 4)).view()).is_err());
    }
}

#[test]
fn st_matches_bare_learners_and_permutes_with_targets() {
    let d = data(50, 3, 2);
    let spec = small(Method::St);
    let model = mtr::st_train(&spec, d.x().view(), d.y().view(), d.target_names()).unwrap();
    let p = model.predict(d.x().view()).unwrap();
    let Structure::Independent { models } = &model.structure else { panic!() };
    assert_eq!(models.len(), 3);
    for t in 0..3 {
        let bare = train(&models[t].spec, d.x().view(), d.y().column(t)).unwrap();
        assert_eq!(bare.predict(d.x().view()).unwrap(), p.values.column(t));
    }
    // per-target independence: with SVR (seed-free) a column permutation
    // permutes predictions exactly
    let svr = MtrMethodSpec::new(Method::St, LearnerSpec::svr_rbf());
    let perm = [2, 0, 1];
    let y_perm = d.y().select(Axis(1), &perm);
    let names: Vec<String> = perm.iter().map(|&i| d.target_names()[i].clone()).collect();
    let a = mtr::st_train(&svr, d.x().view(), d.y().view(), d.target_names()).unwrap().predict(d.x().view()).unwrap();
    let b = mtr::st_train(&svr, d.x().view(), y_perm.view(), &names).unwrap().predict(d.x().view()).unwrap();
    assert_eq!(a.values.select(Axis(1), &perm), b.values);
}

#[test]
fn layered_widths_and_model_counts() {
    let d = data(40, 2, 3);
    let sst = mtr::sst_train(&small(Method::Sst), d.x().view(), d.y().view(), d.target_names()).unwrap();
    assert_eq!(sst.n_models(), 4);
    let Structure::Layered { layers } = &sst.structure else { panic!() };
    assert!(layers[1].iter().all(|m| m.feature_count == 5 + 2));
    assert_eq!(sst.input_provenance(0).len(), 7);

    let drs = mtr::drs_train(&small(Method::Drs).with_layers(3), d.x().view(), d.y().view(), d.target_names()).unwrap();
    assert_eq!(drs.n_models(), 8);
    let Structure::Layered { layers } = &drs.structure else { panic!() };
    assert!(layers[1..].iter().flatten().all(|m| m.feature_count == 7));
}

#[test]
fn erc_chains_are_distinct_and_bounded() {
    let d = data(40, 2, 4);
    let model = mtr::erc_train(&small(Method::Erc).with_chains(2), d.x().view(), d.y().view(), d.target_names()).unwrap();
    let Structure::Chains { chains } = &model.structure else { panic!() };
    assert!(chains.len() <= 2);
    assert_ne!(chains[0].order, chains[1].order);
    let model = mtr::erc_train(&small(Method::Erc).with_chains(50), d.x().view(), d.y().view(), d.target_names()).unwrap();
    let Structure::Chains { chains } = &model.structure else { panic!() };
    assert_eq!(chains.len(), 2);
}

#[test]
fn motc_tree_shapes() {
    let d = data(50, 3, 5);
    let mut spec = small(Method::Motc);
    spec.motc_max_depth = 1;
    let model = mtr::motc_train(&spec, d.x().view(), d.y().view(), d.target_names()).unwrap();
    let Structure::Trees { trees } = &model.structure else { panic!() };
    for (t, tree) in trees.iter().enumerate() {
        assert_eq!(tree.nodes[0].target, t);
        assert_eq!(tree.nodes[0].children.len(), 2);
        assert_eq!(tree.nodes[0].model.feature_count, 5 + 2);
    }
    // a single target collapses to ST
    let one = d.y().slice(ndarray::s![.., 0..1]).to_owned();
    let names = vec![d.target_names()[0].clone()];
    let motc = mtr::motc_train(&spec, d.x().view(), one.view(), &names).unwrap();
    let st = mtr::st_train(&spec, d.x().view(), one.view(), &names).unwrap();
    assert_eq!(motc.predict(d.x().view()).unwrap().values, st.predict(d.x().view()).unwrap().values);
}

#[test]
fn motc_uncorrelated_targets_fall_back_to_index_order() {
    // Hadamard columns: centred and pairwise orthogonal
    let h = [[1.0, 1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0], [-1.0, -1.0, 1.0]];
    let y = Array2::from_shape_fn((8, 3), |(i, t)| h[i % 4][t]);
    let x = Array2::from_shape_fn((8, 2), |(i, j)| (i * (j + 1)) as f64);
    let corr = mtsg::metrics::pearson_matrix(y.view(), None).unwrap();
    assert!(corr[[0, 1]].abs() < 1e-12 && corr[[0, 2]].abs() < 1e-12 && corr[[1, 2]].abs() < 1e-12);
    let names: Vec<String> = (0..3).map(|t| format!("t{t}")).collect();
    let spec = MtrMethodSpec::new(Method::Motc, LearnerSpec::svr_linear());
    let model = mtr::motc_train(&spec, x.view(), y.view(), &names).unwrap();
    let Structure::Trees { trees } = &model.structure else { panic!() };
    let children: Vec<usize> = trees[1].nodes[0].children.iter().map(|&c| trees[1].nodes[c].target).collect();
    assert_eq!(children, [0, 2]);
}

#[test]
fn mtsg_level1_sees_only_predictions() {
    let d = data(60, 4, 6);
    let model = mtr::mtsg_train(&small_filter(Method::Mtsg), d.x().view(), d.y().view(), d.target_names()).unwrap();
    let Structure::Augmented { masks, level1, with_features, .. } = &model.structure else { panic!() };
    assert!(!with_features);
    for t in 0..4 {
        let width = masks[t].iter().filter(|&&k| k).count();
        assert!((1..=12).contains(&width));
        assert_eq!(level1[t].feature_count, width);
        let prov = model.input_provenance(t);
        assert_eq!(prov.len(), width);
        assert!(prov.iter().all(|c| matches!(c, ColumnSource::Prediction { .. })));
    }
    let mtas = mtr::mtas_train(&small_filter(Method::Mtas), d.x().view(), d.y().view(), d.target_names()).unwrap();
    let prov = mtas.input_provenance(0);
    assert_eq!(prov.iter().filter(|c| matches!(c, ColumnSource::Feature(_))).count(), 5);
}

#[test]
fn keep_all_mtsg_has_full_width_and_sg_width_matches_pool() {
    let d = data(40, 3, 7);
    let spec = small(Method::Mtsg).with_filter(FilterRule::KeepAll);
    let model = mtr::mtsg_train(&spec, d.x().view(), d.y().view(), d.target_names()).unwrap();
    let Structure::Augmented { level1, .. } = &model.structure else { panic!() };
    assert!(level1.iter().all(|m| m.feature_count == 9));
    let two = spec.clone().with_pool(vec![LearnerSpec::svr_linear(), LearnerSpec::svr_rbf()]);
    let sg = mtr::sg_train(&two, d.x().view(), d.y().column(0)).unwrap();
    assert_eq!(sg.level1.feature_count, 2);
    assert_eq!(sg.predict(d.x().view()).unwrap().len(), 40);
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let d = data(50, 3, 8);
    let run = |threads: usize, m: Method| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                mtr::train(&small_filter(m), d.x().view(), d.y().view(), d.target_names())
                    .unwrap()
                    .predict(d.x().view())
                    .unwrap()
                    .values
            })
    };
    for m in Method::ALL {
        assert_eq!(run(1, m), run(3, m), "{m}");
    }
}

#[test]
fn bundles_round_trip_with_identical_predictions() {
    let d = data(40, 3, 9);
    let dir = tempfile::tempdir().unwrap();
    for (i, m) in Method::ALL.into_iter().enumerate() {
        let model = mtr::train(&small_filter(m), d.x().view(), d.y().view(), d.target_names()).unwrap();
        let mut bundle = ModelBundle::new(model, d.feature_names().to_vec());
        bundle.x_scale = Some(fit_autoscale(d.x().view()).unwrap());
        bundle.y_scale = Some(fit_autoscale(d.y().view()).unwrap());
        let path = dir.path().join(format!("b{i}"));
        bundle.save(&path).unwrap();
        let back = ModelBundle::load(&path).unwrap();
        assert_eq!(back, bundle, "{m}");
        assert_eq!(back.predict(d.x().view()).unwrap(), bundle.predict(d.x().view()).unwrap());
    }
}

#[test]
fn corrupted_bundles_are_rejected() {
    let d = data(30, 2, 10);
    let model = mtr::st_train(&small(Method::St), d.x().view(), d.y().view(), d.target_names()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ModelBundle::new(model, d.feature_names().to_vec()).save(dir.path()).unwrap();
    let manifest = dir.path().join("manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    std::fs::write(&manifest, text.replace("mtsg-bundle/1", "mtsg-bundle/9")).unwrap();
    assert!(matches!(ModelBundle::load(dir.path()), Err(mtsg::Error::CorruptedModel(_))));
    std::fs::write(&manifest, text.replace("models/m0001.json", "models/m0000.json")).unwrap();
    assert!(ModelBundle::load(dir.path()).is_err());
}

#[test]
fn training_errors_name_the_target() {
    let x = Array2::from_shape_fn((10, 2), |(i, j)| (i + j) as f64);
    let mut y = Array2::from_shape_fn((10, 2), |(i, _)| i as f64);
    y[[3, 1]] = f64::NAN;
    let names = vec!["a".to_string(), "b".to_string()];
    let err = mtr::st_train(&small(Method::St), x.view(), y.view(), &names).unwrap_err();
    assert!(matches!(err, mtsg::Error::Target { target: 1, .. }), "{err}");
}
