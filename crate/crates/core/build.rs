use std::fmt::Write as _;
use std::path::Path;
use std::{env, fs};

fn main() {
    let root = Path::new(&env::var("CARGO_MANIFEST_DIR").unwrap()).join("corpus");
    println!("cargo:rerun-if-changed={}", root.display());
    let mut names: Vec<_> = fs::read_dir(root.join("algebras"))
        .expect("corpus/algebras")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".alg"))
        .collect();
    names.sort();
    let mut out = String::from("static FILES: &[(&str, &str)] = &[\n");
    for n in &names {
        let path = root.join("algebras").join(n);
        println!("cargo:rerun-if-changed={}", path.display());
        writeln!(out, "    ({n:?}, include_str!({:?})),", path.display().to_string()).unwrap();
    }
    out.push_str("];\n");
    let index = root.join("invariants.toml");
    writeln!(out, "static INDEX: &str = include_str!({:?});", index.display().to_string()).unwrap();
    fs::write(Path::new(&env::var("OUT_DIR").unwrap()).join("corpus_files.rs"), out).unwrap();
}
