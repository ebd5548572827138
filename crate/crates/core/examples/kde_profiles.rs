//! Per-cluster parameter profiles, severity labels, day-of-year densities
//! and district shares.

use drought_regimes::clustering::{canonicalize_labels, kmeans_fit, KMeansParams};
use drought_regimes::density::{
    daywise_density, district_shares, dominant_intervals, label_severity, profile_clusters, SeverityMapping,
};
use drought_regimes::preprocess::{select_features, standardize};
use drought_regimes::synth::{generate, Preset, SynthSpec};

fn main() -> drought_regimes::Result<()> {
    let data = generate(&SynthSpec::preset(Preset::Ci), 42)?;
    let ds = &data.dataset;
    let matrix = standardize(&select_features(ds, false)?)?;
    let km = kmeans_fit(&matrix, &KMeansParams::new(3).with_seed(1))?;
    let labels = canonicalize_labels(&km.assignments, ds)?.apply(&km.assignments)?;

    let profile = profile_clusters(ds, &labels)?;
    for c in &profile.clusters {
        let wet = profile.stat(c.cluster, "GWETTOP").unwrap();
        let rh = profile.stat(c.cluster, "RH2M").unwrap();
        println!(
            "cluster {}: {} rows, GWETTOP median {:.3} (IQR {:.3}-{:.3}), RH2M median {:.1}",
            c.cluster, c.count, wet.median, wet.q1, wet.q3, rh.median
        );
    }

    let daywise = daywise_density(ds, &labels, 1.0)?;
    for (c, spans) in dominant_intervals(&daywise).iter().enumerate() {
        let s = &daywise.series[c];
        println!(
            "cluster {c}: bandwidth {:.2} days, integral {:.5}, dominant {:?}",
            s.bandwidths[0],
            daywise.integral(s),
            spans.iter().map(|d| (d.start, d.end)).collect::<Vec<_>>()
        );
    }

    for l in label_severity(&profile, &SeverityMapping::default(), Some(&daywise))? {
        println!("cluster {}: {:?} extremity, {}", l.cluster, l.extremity, l.season);
    }
    for d in district_shares(ds, &labels)? {
        let shares: Vec<String> = d.shares.iter().map(|s| format!("{s:.3}")).collect();
        println!("{:<12} {}", d.district, shares.join(" "));
    }
    Ok(())
}
