fn main() {
    // Dense eigendecompositions and SVDs go through the system BLAS/LAPACK.
    // Prefer pkg-config (Debian exposes openblas-pthread there); fall back to
    // plain -lopenblas for setups without .pc files.
    if pkg_config::probe_library("openblas").is_err() {
        println!("cargo:rustc-link-lib=dylib=openblas");
    }
}
