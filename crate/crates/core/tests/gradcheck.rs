mod common;

use std::time::Instant;

use common::gradcheck::{check_model, check_op, model_configs, op_cases};

#[test]
fn every_op_matches_finite_differences() {
    for c in op_cases() {
        let err = check_op(&c, 17);
        assert!(err < 1e-4, "{}: max relative error {err:e}", c.name);
    }
}

#[test]
fn full_loss_matches_finite_differences() {
    let start = Instant::now();
    for cfg in model_configs() {
        let err = check_model(cfg.clone());
        assert!(err < 1e-4, "{:?}/{:?}/{:?}: {err:e}", cfg.arch, cfg.enc_strategy, cfg.dec_strategy);
    }
    assert!(start.elapsed().as_secs() < 60);
}
