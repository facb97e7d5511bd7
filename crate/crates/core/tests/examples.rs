// Runs every shipped example so they stay in sync with the library.

#[path = "../examples/exact_values.rs"]
mod exact_values;
#[path = "../examples/length_control.rs"]
mod length_control;
#[path = "../examples/length_prediction.rs"]
mod length_prediction;
#[path = "../examples/precision_proxy.rs"]
mod precision_proxy;
#[path = "../examples/return_targets.rs"]
mod return_targets;
#[path = "../examples/reward_shaping.rs"]
mod reward_shaping;
#[path = "../examples/tilted_decoding.rs"]
mod tilted_decoding;
#[path = "../examples/train_value_head.rs"]
mod train_value_head;
#[path = "../examples/weighting_bias.rs"]
mod weighting_bias;

#[test]
fn examples_run() {
    exact_values::run_example().unwrap();
    length_control::run_example().unwrap();
    length_prediction::run_example().unwrap();
    precision_proxy::run_example().unwrap();
    return_targets::run_example().unwrap();
    reward_shaping::run_example().unwrap();
    tilted_decoding::run_example().unwrap();
    train_value_head::run_example().unwrap();
    weighting_bias::run_example().unwrap();
}
