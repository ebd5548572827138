mod common;

use common::*;

fn check(o: OracleOutcome) {
    assert!(
        o.ok(),
        "{}: {} instances, {} mismatches, max relative error {:e}",
        o.name,
        o.instances,
        o.mismatches,
        o.max_rel_err
    );
}

#[test]
fn assign_matches_brute_force() {
    check(oracle_assign());
}

#[test]
fn wcss_matches_brute_force() {
    check(oracle_wcss());
}

#[test]
fn silhouette_matches_pairwise_matrix() {
    check(oracle_silhouette());
}

#[test]
fn knn_matches_full_sort() {
    check(oracle_knn());
}

#[test]
fn naive_bayes_posterior_matches_linear_space() {
    check(oracle_gnb_posterior());
}

#[test]
fn gini_matches_pair_disagreement() {
    check(oracle_gini());
}

#[test]
fn cluster_medians_match_rank_selection() {
    check(oracle_cluster_medians());
}
