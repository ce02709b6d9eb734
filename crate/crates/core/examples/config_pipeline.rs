//! Runs a TOML-described experiment through the library pipeline and lists the
//! hashed artifacts it wrote.

use sobolev_lab::cli::{execute, parse_config, resolve_output};

const CONFIG: &str = r#"
command = "sweep"

[domain]
shape = { kind = "disk", radius = 1.0 }
h = 0.0625

[sweep]
ladder = [4, 8, 16]
profile = { kind = "power", alpha = 2.0 }
mu = { kind = "theta_power", theta = 2.0 }

[inflap]
mode = "jacobi"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => CONFIG.to_string(),
    };
    let cfg = parse_config(&text)?;
    let out = resolve_output(None, &cfg);
    let outcome = execute(&cfg, &out, |msg| eprintln!("{msg}"))?;
    for a in &outcome.artifacts {
        println!("{:<22} {:>8} bytes  {}", a.file, a.bytes, a.sha256);
    }
    println!("exit code {}", outcome.exit_code);
    Ok(())
}
