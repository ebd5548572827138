//! KNN, Gaussian naive Bayes, a CART tree and a random forest trained on
//! cluster labels with an 80:20 split, plus the published reference
//! matrices recomputed.

use drought_regimes::classification::{
    dtree_fit, evaluate, gnb_fit, knn_fit, reference_checks, rf_fit, ClassifierModel, ForestParams, TreeParams,
};
use drought_regimes::clustering::{canonicalize_labels, kmeans_fit, KMeansParams};
use drought_regimes::preprocess::{select_features, split_train_test, standardize};
use drought_regimes::synth::{generate, Preset, SynthSpec};

fn main() -> drought_regimes::Result<()> {
    let data = generate(&SynthSpec::preset(Preset::Ci), 42)?;
    let matrix = standardize(&select_features(&data.dataset, false)?)?;
    let km = kmeans_fit(&matrix, &KMeansParams::new(3).with_seed(1))?;
    let labels = canonicalize_labels(&km.assignments, &data.dataset)?.apply(&km.assignments)?;

    let split = split_train_test(matrix.n_rows(), 0.8, 11)?;
    let train = matrix.select_rows(&split.train_rows);
    let test = matrix.select_rows(&split.test_rows);
    let y_train: Vec<usize> = split.train_rows.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<usize> = split.test_rows.iter().map(|&i| labels[i]).collect();

    let models: Vec<ClassifierModel> = vec![
        knn_fit(&train, &y_train, 5)?.into(),
        gnb_fit(&train, &y_train)?.into(),
        dtree_fit(&train, &y_train, &TreeParams::default())?.into(),
        rf_fit(&train, &y_train, &ForestParams { seed: 5, ..ForestParams::default() })?.into(),
    ];
    for m in &models {
        let cm = evaluate(m, &test, &y_test)?;
        println!("{:<14} accuracy {:.4}  {}", m.name(), cm.accuracy, cm.to_compact_string());
    }

    println!("\npublished matrices:");
    for r in reference_checks() {
        println!(
            "{:<14} {:.5} recomputed vs {}% reported{}",
            r.classifier,
            r.recomputed_accuracy,
            r.reported_percent,
            if r.diverges { " (diverges)" } else { "" }
        );
    }
    Ok(())
}
