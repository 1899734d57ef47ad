#![no_main]
extern crate libfuzzer_sys;
use libfuzzer_sys::fuzz_target;
fuzz_target!(|data: &[u8]| { let _ = data.len(); });
