use std::env;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("cbindgen.toml");
    match cbindgen::generate_with_config(&dir, config) {
        Ok(bindings) => {
            bindings.write_to_file(dir.join("include/smaa_induce.h"));
        }
        // Keep the checked-in header when parsing fails (e.g. offline
        // builds with a newer syntax than cbindgen understands).
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
