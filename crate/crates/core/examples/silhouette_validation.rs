//! Silhouette comparison of K-means and the Bayesian mixture, exact and on
//! a seeded row sample.

use drought_regimes::clustering::{bgm_fit, compact_labels, kmeans_fit, silhouette_score, BgmParams, KMeansParams};
use drought_regimes::preprocess::{select_features, standardize};
use drought_regimes::synth::{generate, Preset, SynthSpec};

fn main() -> drought_regimes::Result<()> {
    let data = generate(&SynthSpec::preset(Preset::Ci), 42)?;
    let matrix = standardize(&select_features(&data.dataset, false)?)?;
    let n = matrix.n_rows();

    let km = kmeans_fit(&matrix, &KMeansParams::new(3).with_seed(1))?;
    let bgm = bgm_fit(
        &matrix,
        &BgmParams {
            k_max: 3,
            seed: 1,
            ..BgmParams::default()
        },
    )?;
    let (bgm_labels, _) = compact_labels(&bgm.assignments());

    println!("{:<8} {:>10} {:>14}", "model", "exact", "sample of 500");
    for (name, labels) in [("kmeans", &km.assignments), ("bgm", &bgm_labels)] {
        let exact = silhouette_score(&matrix, labels, n, 0)?;
        let sampled = silhouette_score(&matrix, labels, 500, 0)?;
        println!("{name:<8} {exact:>10.4} {sampled:>14.4}");
    }
    Ok(())
}
