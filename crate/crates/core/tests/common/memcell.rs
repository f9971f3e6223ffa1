//! Brute-force enumeration of the memory cell with three clients, written
//! directly against the scenario rather than through automata.
//!
//! Cell: waits for `{get, P}` or `{put, S}` (oldest message first); after a
//! `get` it replies with S, which it can only do once S has been set.
//! Clients 1 and 2: send `{get, self}`, wait for a value X, send
//! `{put, X + k}` with k = 1 and 2. Client 3: sends `{put, 0}`.

use std::collections::BTreeSet;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Msg {
    Get(usize),
    Put(i64),
}

#[derive(Clone)]
struct World {
    cell_waiting: bool,
    reply_to: Option<usize>,
    s: Option<i64>,
    cell_box: Vec<Msg>,
    /// Program counters of clients 1 and 2 (0 get, 1 wait, 2 put, 3 done).
    pc: [u8; 2],
    inbox: [Vec<i64>; 2],
    x: [Option<i64>; 2],
    init_sent: bool,
}

/// Final values of S over all maximal interleavings; `None` when the cell
/// never received a `put` before getting stuck.
pub fn terminal_values() -> BTreeSet<Option<i64>> {
    let start = World {
        cell_waiting: true,
        reply_to: None,
        s: None,
        cell_box: Vec::new(),
        pc: [0, 0],
        inbox: [Vec::new(), Vec::new()],
        x: [None, None],
        init_sent: false,
    };
    let mut out = BTreeSet::new();
    go(start, &mut out);
    out
}

fn go(w: World, out: &mut BTreeSet<Option<i64>>) {
    let mut moved = false;
    // The cell.
    if w.cell_waiting {
        if let Some(&m) = w.cell_box.first() {
            let mut n = w.clone();
            n.cell_box.remove(0);
            match m {
                Msg::Get(c) => {
                    n.reply_to = Some(c);
                    n.cell_waiting = false;
                }
                Msg::Put(v) => n.s = Some(v),
            }
            go(n, out);
            moved = true;
        }
    } else if let (Some(c), Some(v)) = (w.reply_to, w.s) {
        let mut n = w.clone();
        n.inbox[c].push(v);
        n.cell_waiting = true;
        go(n, out);
        moved = true;
    }
    // Clients 1 and 2.
    for c in 0..2 {
        let mut n = w.clone();
        match w.pc[c] {
            0 => n.cell_box.push(Msg::Get(c)),
            1 if !w.inbox[c].is_empty() => n.x[c] = Some(n.inbox[c].remove(0)),
            2 => n.cell_box.push(Msg::Put(w.x[c].unwrap() + c as i64 + 1)),
            _ => continue,
        }
        n.pc[c] += 1;
        go(n, out);
        moved = true;
    }
    // Client 3.
    if !w.init_sent {
        let mut n = w.clone();
        n.cell_box.push(Msg::Put(0));
        n.init_sent = true;
        go(n, out);
        moved = true;
    }
    if !moved {
        out.insert(w.s);
    }
}
