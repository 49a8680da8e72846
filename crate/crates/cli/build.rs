use std::env;

fn main() {
    let target = env::var("TARGET").unwrap_or_else(|_| "unknown".into());
    let profile = env::var("PROFILE").unwrap_or_else(|_| "unknown".into());
    let features = if env::var_os("CARGO_FEATURE_PARALLEL").is_some() { "parallel" } else { "sequential" };
    println!("cargo:rustc-env=SMOOTHPRIOR_BUILD_TARGET={target}");
    println!("cargo:rustc-env=SMOOTHPRIOR_BUILD_PROFILE={profile}");
    println!("cargo:rustc-env=SMOOTHPRIOR_BUILD_FEATURES={features}");
    println!("cargo:rerun-if-changed=build.rs");
}
