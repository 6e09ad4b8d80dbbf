fn main() {
    // Gram/ridge hot paths call dsyrk/dgemm/dposv directly.
    println!("cargo:rustc-link-lib=openblas");
}
