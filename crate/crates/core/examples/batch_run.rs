//! Drives the batch runner from code, as the `qclspec` binary does, writing
//! a spectrum table and its manifest under `target/qclspec-example`.

use qclspec::cli::{run, Cli, Command, CommonArgs};

fn main() {
    let dir = std::path::PathBuf::from("target/qclspec-example");
    std::fs::create_dir_all(&dir).expect("create output directory");
    let config = dir.join("spectrum.json");
    std::fs::write(
        &config,
        r#"{"encodings": ["uniform", "exponential", "nonintegrable"], "n_qubits": [1, 2, 3, 4], "seeds": [1, 2]}"#,
    )
    .expect("write config");
    let cli = Cli {
        command: Command::Spectrum(CommonArgs {
            config,
            jobs: 2,
            out: Some(dir.clone()),
        }),
    };
    match run(&cli) {
        Ok(manifest) => {
            println!("config sha256 {}", manifest.config_sha256);
            let table = std::fs::read_to_string(&manifest.summary_files[0]).expect("summary exists");
            print!("{table}");
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
