//! Regenerates the committed C header (`include/moteval.h`) from the
//! `#[no_mangle]` surface in `src/lib.rs`. `write_to_file` leaves the file
//! untouched when the generated text is identical, so clean builds do not
//! churn the checked-in header.

use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(Path::new(&crate_dir).join("cbindgen.toml"))
        .expect("cbindgen.toml is valid");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("the extern \"C\" surface is representable in C")
        .write_to_file(Path::new(&crate_dir).join("include").join("moteval.h"));
}
