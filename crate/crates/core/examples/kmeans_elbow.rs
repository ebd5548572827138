//! Elbow sweep over k, curvature-based k selection and the resulting
//! K-means fit on standardized weather features.

use drought_regimes::clustering::{curvatures, detect_elbow, elbow_sweep_models, ElbowPoint, KMeansParams};
use drought_regimes::preprocess::{select_features, standardize};
use drought_regimes::synth::{generate, Preset, SynthSpec};

fn main() -> drought_regimes::Result<()> {
    let data = generate(&SynthSpec::preset(Preset::Ci), 42)?;
    let matrix = standardize(&select_features(&data.dataset, false)?)?;

    let models = elbow_sweep_models(&matrix, 1, 8, &KMeansParams::new(1).with_seed(7))?;
    let points: Vec<ElbowPoint> = models.iter().map(|m| ElbowPoint { k: m.k, inertia: m.inertia }).collect();
    let bends: std::collections::HashMap<usize, f64> = curvatures(&points).into_iter().collect();
    println!("{:>3} {:>14} {:>14}", "k", "inertia", "curvature");
    for p in &points {
        let c = bends.get(&p.k).map_or(String::new(), |c| format!("{c:.2}"));
        println!("{:>3} {:>14.2} {:>14}", p.k, p.inertia, c);
    }

    let k = detect_elbow(&points)?;
    let model = &models[k - 1];
    println!("elbow at k = {k}; cluster sizes {:?}", model.cluster_sizes());
    println!("converged in {} iterations", model.iterations_run);
    Ok(())
}
