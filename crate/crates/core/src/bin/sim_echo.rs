//! Echo simulator speaking the external-model line protocol: `init` and
//! `reset` answer with an all-zero state, `step` answers with the input
//! vector unchanged, `end` exits.
//!
//! Fault-injection flags for exercising the bridge's failure paths (N
//! counts successful replies before the fault fires):
//!   --malformed-after N   reply N+1 is not JSON
//!   --hang-after N        reply N+1 never comes
//!   --die-after N         exit(1) instead of sending reply N+1

use std::io::{self, BufRead, Write};
use std::process::exit;
use std::thread;
use std::time::Duration;

#[derive(Default)]
struct Faults {
    malformed_after: Option<u64>,
    hang_after: Option<u64>,
    die_after: Option<u64>,
}

fn parse_args() -> Faults {
    let mut faults = Faults::default();
    let mut args = std::env::args().skip(1);
    while let Some(flag) = args.next() {
        let count = args
            .next()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| die_usage(&flag));
        match flag.as_str() {
            "--malformed-after" => faults.malformed_after = Some(count),
            "--hang-after" => faults.hang_after = Some(count),
            "--die-after" => faults.die_after = Some(count),
            _ => die_usage(&flag),
        }
    }
    faults
}

fn die_usage(flag: &str) -> ! {
    eprintln!("sim-echo: bad argument `{flag}`");
    eprintln!("usage: sim-echo [--malformed-after N] [--hang-after N] [--die-after N]");
    exit(2)
}

fn main() {
    let faults = parse_args();
    let mut sent: u64 = 0;
    let mut width_out: usize = 0;
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();

    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        let msg: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                respond(&mut out, &mut sent, &faults, &format!(r#"{{"ok":false,"error":"bad request: {e}"}}"#));
                continue;
            }
        };
        match msg["cmd"].as_str() {
            Some("init") => {
                width_out = msg["schema_out"].as_array().map_or(0, Vec::len);
                respond(&mut out, &mut sent, &faults, &zero_state(width_out));
            }
            Some("reset") => {
                respond(&mut out, &mut sent, &faults, &zero_state(width_out));
            }
            Some("step") => {
                let state = msg["u"].clone();
                let body = serde_json::json!({"ok": true, "state": state}).to_string();
                respond(&mut out, &mut sent, &faults, &body);
            }
            Some("end") => return,
            _ => {
                respond(
                    &mut out,
                    &mut sent,
                    &faults,
                    r#"{"ok":false,"error":"unknown cmd"}"#,
                );
            }
        }
    }
}

fn zero_state(width: usize) -> String {
    serde_json::json!({"ok": true, "state": vec![0.0; width]}).to_string()
}

fn respond(out: &mut impl Write, sent: &mut u64, faults: &Faults, body: &str) {
    if faults.die_after == Some(*sent) {
        exit(1);
    }
    if faults.hang_after == Some(*sent) {
        loop {
            thread::sleep(Duration::from_secs(3600));
        }
    }
    if faults.malformed_after == Some(*sent) {
        let _ = writeln!(out, "this line is deliberately not JSON");
    } else {
        let _ = writeln!(out, "{body}");
    }
    let _ = out.flush();
    *sent += 1;
}
