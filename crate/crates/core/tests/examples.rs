mod sampled_functions_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sampled_functions.rs"));
}

mod weight_constants_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/weight_constants.rs"));
}

mod line_operators_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/line_operators.rs"));
}

mod flows_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/flows.rs"));
}

mod transfer_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transfer.rs"));
}

mod strong_inequality_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/strong_inequality.rs"));
}

mod weak_type_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/weak_type.rs"));
}

mod config_run_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_run.rs"));
}

#[test]
fn sampled_functions_example_runs() {
    sampled_functions_example::run().expect("sampled functions example should run");
}

#[test]
fn weight_constants_example_runs() {
    weight_constants_example::run().expect("weight constants example should run");
}

#[test]
fn line_operators_example_runs() {
    line_operators_example::run().expect("line operators example should run");
}

#[test]
fn flows_example_runs() {
    flows_example::run().expect("flows example should run");
}

#[test]
fn transfer_example_runs() {
    transfer_example::run().expect("transfer example should run");
}

#[test]
fn strong_inequality_example_runs() {
    strong_inequality_example::run().expect("strong inequality example should run");
}

#[test]
fn weak_type_example_runs() {
    weak_type_example::run().expect("weak type example should run");
}

#[test]
fn config_run_example_runs() {
    config_run_example::run().expect("config example should run");
}
