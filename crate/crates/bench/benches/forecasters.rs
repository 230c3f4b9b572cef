use criterion::{black_box, criterion_group, criterion_main, Criterion};
use epfbench::classical::{ets_select_fit, mstl_decompose, mstl_forecast, stl_decompose, MstlParams, StlParams};
use epfbench::evaluation::{compute_mae, compute_smape, dm_statistic};
use epfbench::ml::{
    build_windows, default_gamma, elasticnet_cv_select, elasticnet_fit, svr_fit, KnnModel, SvrParams,
};
use epfbench::transforms::QuantileMap;
use epfbench_bench::{synthetic_prices, synthetic_records};

fn decomposition(c: &mut Criterion) {
    let series = synthetic_prices(84, 1);
    let values = series.values();
    c.bench_function("stl_decompose 2016h p24", |b| {
        b.iter(|| stl_decompose(black_box(values), 24, &StlParams::default()).unwrap())
    });
    c.bench_function("mstl_decompose 2016h", |b| {
        b.iter(|| mstl_decompose(black_box(values), &MstlParams::default()).unwrap())
    });
    c.bench_function("ets_select_fit 2016h", |b| b.iter(|| ets_select_fit(black_box(values)).unwrap()));
    c.bench_function("mstl_forecast 2016h", |b| {
        b.iter(|| mstl_forecast(black_box(values), 24, &MstlParams::default()).unwrap())
    });
}

fn machine_learning(c: &mut Criterion) {
    let training = synthetic_prices(84, 2);
    let map = QuantileMap::fit(training.values(), 1000).unwrap();
    let transformed = epfbench::HourlySeries::new(
        "DE",
        training.start_day(),
        map.transform_values(training.values()),
    )
    .unwrap();
    let data = build_windows(&transformed).unwrap();

    c.bench_function("quantile_map fit+transform 2016h", |b| {
        b.iter(|| {
            let m = QuantileMap::fit(black_box(training.values()), 1000).unwrap();
            m.transform_values(training.values())
        })
    });
    c.bench_function("elasticnet_fit 77x168 (alpha 0.01, l1 0.5)", |b| {
        b.iter(|| elasticnet_fit(black_box(&data), 0.01, 0.5).unwrap())
    });
    let gamma = default_gamma(&data);
    c.bench_function("svr_fit 77x168", |b| {
        b.iter(|| svr_fit(black_box(&data), SvrParams::new(1.0, 0.1, gamma)).unwrap())
    });
    let knn = KnnModel::fit(data.clone(), 5).unwrap();
    let query = data.inputs[10].clone();
    c.bench_function("knn predict 77 stored", |b| b.iter(|| knn.predict(black_box(&query))));

    // full CV on a short window; the 84-day version takes minutes
    let short = build_windows(&transformed.slice_window(transformed.end_day(), 28).unwrap()).unwrap();
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("elasticnet_cv_select 21x168", |b| {
        b.iter(|| elasticnet_cv_select(black_box(&short)).unwrap())
    });
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let records = synthetic_records(366, 3);
    c.bench_function("mae 366 days", |b| b.iter(|| compute_mae(black_box(&records)).unwrap()));
    c.bench_function("smape 366 days", |b| b.iter(|| compute_smape(black_box(&records)).unwrap()));
    let diff: Vec<f64> = records
        .iter()
        .map(|r| r.predictions.iter().zip(&r.actuals).map(|(p, a)| (p - a).abs()).sum::<f64>() - 150.0)
        .collect();
    c.bench_function("dm_statistic 366 days", |b| b.iter(|| dm_statistic(black_box(&diff)).unwrap()));
}

criterion_group!(benches, decomposition, machine_learning, evaluation);
criterion_main!(benches);
