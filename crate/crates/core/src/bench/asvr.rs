use std::fmt::Write as _;

use super::BenchError;

fn candidate(j: usize) -> char {
    (b'a' + j as u8) as char
}

/// Source text of ASVR with `voters` voters and `candidates` candidates
/// (lettered a, b, ...).
///
/// Voter `i` votes (`vote_i_j`), then either hands the receipt to the
/// coercer (`gv_i_j`) or refuses (`ng_i`), then revotes or stops. Stopped
/// voters are absorbing: they keep choosing `{stop_i}`, which no longer
/// fires, so only other agents or an ε-loop can move.
pub fn gen_asvr(voters: usize, candidates: usize) -> Result<String, BenchError> {
    if voters == 0 || voters > 99 {
        return Err(BenchError::OutOfRange("voters must be in 1..=99".into()));
    }
    if candidates == 0 || candidates > 26 {
        return Err(BenchError::OutOfRange("candidates must be in 1..=26".into()));
    }
    let cands: Vec<char> = (0..candidates).map(candidate).collect();
    let mut out = String::new();

    for i in 1..=voters {
        let mut states = vec!["q0".to_string()];
        states.extend(cands.iter().map(|c| format!("q_{c}")));
        for c in &cands {
            states.push(format!("q_{c}_g"));
            states.push(format!("q_{c}_n"));
        }
        for c in &cands {
            states.push(format!("q_{c}_g_s"));
            states.push(format!("q_{c}_n_s"));
        }
        let mut events: Vec<String> = cands.iter().map(|c| format!("vote_{i}_{c}")).collect();
        events.extend(cands.iter().map(|c| format!("gv_{i}_{c}")));
        events.push(format!("ng_{i}"));
        events.push(format!("revote_{i}"));
        events.push(format!("stop_{i}"));

        let _ = writeln!(out, "agent Voter{i} {{");
        let _ = writeln!(out, "  states {}", states.join(", "));
        out.push_str("  init q0\n");
        let _ = writeln!(out, "  events {}", events.join(", "));
        let props: Vec<String> = cands.iter().map(|c| format!("voted_{i}_{c}")).collect();
        let _ = writeln!(out, "  props {}", props.join(", "));

        out.push_str("  transitions\n");
        for c in &cands {
            let _ = writeln!(out, "    q0 -vote_{i}_{c}-> q_{c}");
            let _ = writeln!(out, "    q_{c} -gv_{i}_{c}-> q_{c}_g");
            let _ = writeln!(out, "    q_{c} -ng_{i}-> q_{c}_n");
            for r in ["g", "n"] {
                let _ = writeln!(out, "    q_{c}_{r} -revote_{i}-> q0");
                let _ = writeln!(out, "    q_{c}_{r} -stop_{i}-> q_{c}_{r}_s");
            }
        }

        out.push_str("  repertoire\n");
        let votes: Vec<String> = cands.iter().map(|c| format!("{{vote_{i}_{c}}}")).collect();
        let _ = writeln!(out, "    q0: [{}]", votes.join(", "));
        for c in &cands {
            let _ = writeln!(out, "    q_{c}: [{{gv_{i}_{c}}}, {{ng_{i}}}]");
        }
        for c in &cands {
            for r in ["g", "n"] {
                let _ = writeln!(out, "    q_{c}_{r}: [{{revote_{i}}}, {{stop_{i}}}]");
            }
        }
        for c in &cands {
            for r in ["g", "n"] {
                let _ = writeln!(out, "    q_{c}_{r}_s: [{{stop_{i}}}]");
            }
        }

        out.push_str("  labels\n");
        for c in &cands {
            for r in ["g", "n"] {
                let _ = writeln!(out, "    q_{c}_{r}_s: voted_{i}_{c}");
            }
        }
        out.push_str("}\n\n");
    }

    let mut states = vec!["qc0".to_string()];
    for i in 1..=voters {
        states.extend(cands.iter().map(|c| format!("qc_g_{i}_{c}")));
        states.push(format!("qc_n_{i}"));
    }
    let mut events = Vec::new();
    for i in 1..=voters {
        events.extend(cands.iter().map(|c| format!("gv_{i}_{c}")));
        events.push(format!("ng_{i}"));
    }
    events.push("return".to_string());

    out.push_str("agent Coercer {\n");
    let _ = writeln!(out, "  states {}", states.join(", "));
    out.push_str("  init qc0\n");
    let _ = writeln!(out, "  events {}", events.join(", "));
    let props: Vec<String> = (1..=voters)
        .flat_map(|i| cands.iter().map(move |c| format!("revealed_{i}_{c}")))
        .collect();
    let _ = writeln!(out, "  props {}", props.join(", "));
    out.push_str("  transitions\n");
    for i in 1..=voters {
        for c in &cands {
            let _ = writeln!(out, "    qc0 -gv_{i}_{c}-> qc_g_{i}_{c}");
            let _ = writeln!(out, "    qc_g_{i}_{c} -return-> qc0");
        }
        let _ = writeln!(out, "    qc0 -ng_{i}-> qc_n_{i}");
        let _ = writeln!(out, "    qc_n_{i} -return-> qc0");
    }
    out.push_str("  repertoire\n");
    let per_voter: Vec<String> = (1..=voters)
        .map(|i| {
            let mut evs: Vec<String> = cands.iter().map(|c| format!("gv_{i}_{c}")).collect();
            evs.push(format!("ng_{i}"));
            format!("{{{}}}", evs.join(", "))
        })
        .collect();
    let _ = writeln!(out, "    qc0: [{}]", per_voter.join(", "));
    for s in &states[1..] {
        let _ = writeln!(out, "    {s}: [{{return}}]");
    }
    out.push_str("  labels\n");
    for i in 1..=voters {
        for c in &cands {
            let _ = writeln!(out, "    qc_g_{i}_{c}: revealed_{i}_{c}");
        }
    }
    out.push_str("}\n");
    Ok(out)
}
