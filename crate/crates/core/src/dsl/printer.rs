use std::fmt::Write;

use crate::semantics::Protocol;

/// Canonical text of a protocol: machines in protocol order, each with its
/// `initial` and `final` declarations followed by its transitions in stored
/// order, so receive priorities survive a round trip.
pub fn print_protocol(p: &Protocol) -> String {
    let mut out = String::new();
    for (i, m) in p.machines().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let caa = &m.caa;
        writeln!(out, "machine {} {{", m.pid).unwrap();
        writeln!(out, "    initial {};", caa.initial()).unwrap();
        if !caa.finals().is_empty() {
            let finals: Vec<&str> = caa.finals().iter().map(|s| s.as_str()).collect();
            writeln!(out, "    final {};", finals.join(" ")).unwrap();
        }
        for t in caa.transitions() {
            writeln!(out, "    {} -- {} -> {};", t.from, t.label, t.to).unwrap();
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_protocol;

    #[test]
    fn mem_is_printed_in_order() {
        let src = "machine #0 { initial s0; final s0; s0 -- ?{get,P} -> s1; s0 -- ?{put,S} -> s0; s1 -- P!S -> s0; }";
        let printed = print_protocol(&parse_protocol(src).unwrap().protocol);
        assert_eq!(
            printed,
            "machine #0 {\n    initial s0;\n    final s0;\n    s0 -- ?{get, P} -> s1;\n    s0 -- ?{put, S} -> s0;\n    s1 -- P!S -> s0;\n}\n"
        );
        assert_eq!(print_protocol(&parse_protocol(&printed).unwrap().protocol), printed);
    }
}
