//! Driving the runner from code: parse a config, run it into a temporary
//! directory and read back the report, as the `crfolio` binary does.

use crfolio::cli::{parse_config, run};

const CONFIG: &str = r#"{
  "schema": 1,
  "task": "verdict",
  "family": { "builder": "translated_circles",
              "params": { "rho": 1, "center_path": [[0, 0], [3, 0]], "resolution": 128 } },
  "function": { "name": "z_sq" },
  "seed": 7
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(CONFIG)?;
    let out = std::env::temp_dir().join("crfolio-run-config-example");
    let summary = run(&cfg, &out)?;
    println!("exit code {}", summary.exit_code);
    if let Some(v) = &summary.report.verdict {
        println!("verdict {v}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }

    // errors point at the line and the key
    let broken = CONFIG.replace("\"rho\": 1", "\"rho\": \"one\"");
    if let Err(e) = parse_config(&broken) {
        println!("malformed config: {e}");
    }
    Ok(())
}
