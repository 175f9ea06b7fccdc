//! Fuzzes the experiment-spec parser: arbitrary bytes must either parse
//! into a validated spec or produce an error, never panic. Accepted specs
//! must also survive instance construction.

#![no_main]

use libfuzzer_sys::fuzz_target;

use holosem_cli::spec::ExperimentSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ExperimentSpec::parse(text) {
        // validation promises the instance is buildable at sane sizes
        let g = spec.build_instance().expect("validated spec must build");
        assert!(g.n() >= 2 && g.n() <= 64);
        let _ = spec.instance_label();
        let _ = spec.norm_config();
    }
});
