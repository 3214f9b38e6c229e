//! Problem instances: players' trips, vehicle capacity and the travel-cost
//! matrix over `{depot} ∪ origins ∪ destinations`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::table::CharTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    /// 0-based.
    pub id: usize,
    pub origin: Point,
    pub destination: Point,
}

/// Square matrix of travel costs between graph nodes.
///
/// Node 0 is a dummy depot whose edges cost nothing, nodes `1..=n` are the
/// players' origins and `n+1..=2n` their destinations.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// Multiplies every edge cost by `factor`.
    pub fn scaled(&self, factor: f64) -> CostMatrix {
        CostMatrix {
            size: self.size,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    players: Vec<PlayerSpec>,
    capacity: usize,
    cost: CostMatrix,
}

impl Instance {
    pub fn new(players: Vec<PlayerSpec>, capacity: usize) -> Result<Self> {
        let n = players.len();
        if n == 0 {
            return Err(Error::Domain("instance has no players".into()));
        }
        if n > MAX_PLAYERS {
            return Err(Error::ScaleLimit {
                what: "players",
                value: n,
                max: MAX_PLAYERS,
            });
        }
        if capacity == 0 {
            return Err(Error::Domain("capacity must be at least 1".into()));
        }
        if players.iter().enumerate().any(|(i, p)| p.id != i) {
            return Err(Error::Domain("player ids must be 0..n-1 in order".into()));
        }
        let size = 2 * n + 1;
        let mut points = Vec::with_capacity(size);
        points.extend(players.iter().map(|p| p.origin));
        points.extend(players.iter().map(|p| p.destination));
        let mut data = vec![0.0; size * size];
        for i in 1..size {
            for j in 1..size {
                if i != j {
                    data[i * size + j] = points[i - 1].dist(points[j - 1]);
                }
            }
        }
        Ok(Instance {
            players,
            capacity,
            cost: CostMatrix { size, data },
        })
    }

    /// Same trips, different vehicle capacity.
    pub fn with_capacity(&self, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Domain("capacity must be at least 1".into()));
        }
        Ok(Instance {
            capacity,
            ..self.clone()
        })
    }

    /// Same players with every edge cost multiplied by `factor > 0`.
    pub fn with_scaled_costs(&self, factor: f64) -> Self {
        Instance {
            cost: self.cost.scaled(factor),
            ..self.clone()
        }
    }

    /// `n` players with origins and destinations uniform in `[0, 1000]²`.
    pub fn random(n: usize, capacity: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pt = || Point::new(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0));
        let players = (0..n)
            .map(|id| PlayerSpec {
                id,
                origin: pt(),
                destination: pt(),
            })
            .collect();
        Instance::new(players, capacity)
    }

    pub fn players(&self) -> &[PlayerSpec] {
        &self.players
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn origin_node(&self, i: usize) -> usize {
        i + 1
    }

    pub fn destination_node(&self, i: usize) -> usize {
        i + 1 + self.len()
    }

    /// Cost of player `i` travelling alone.
    pub fn solo_cost(&self, i: usize) -> f64 {
        self.cost.get(self.origin_node(i), self.destination_node(i))
    }

    /// Writes the coordinate format back out with 1-based ids.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.len(), self.capacity);
        for p in &self.players {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                p.id + 1,
                p.origin.x,
                p.origin.y,
                p.destination.x,
                p.destination.y
            );
        }
        s
    }

    /// Stable FNV-1a digest over capacity and coordinate bits.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(&(self.capacity as u64).to_le_bytes());
        for p in &self.players {
            for v in [p.origin.x, p.origin.y, p.destination.x, p.destination.y] {
                feed(&v.to_bits().to_le_bytes());
            }
        }
        format!("{h:016x}")
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses `n Q` followed by `n` rows `id x_o y_o x_d y_d`.
///
/// Ids may be 0-based or 1-based but must be dense and unique. Blank lines
/// and `#` comments are skipped.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(parse_err(hline, "header must be `n Q`"));
    }
    let n: usize = head[0]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad player count `{}`", head[0])))?;
    let q: i64 = head[1]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad capacity `{}`", head[1])))?;
    if q < 1 {
        return Err(parse_err(hline, format!("capacity must be >= 1, got {q}")));
    }
    if n == 0 {
        return Err(parse_err(hline, "player count must be >= 1"));
    }
    if n > MAX_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "players",
            value: n,
            max: MAX_PLAYERS,
        });
    }

    let mut rows: BTreeMap<usize, (usize, [f64; 4])> = BTreeMap::new();
    for (lno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(
                lno,
                format!(
                    "expected 5 fields `id x_o y_o x_d y_d`, found {}",
                    fields.len()
                ),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(lno, format!("bad id `{}`", fields[0])))?;
        let mut xy = [0.0; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(lno, format!("bad coordinate `{f}`")))?;
            if !v.is_finite() {
                return Err(parse_err(lno, format!("non-finite coordinate `{f}`")));
            }
            xy[k] = v;
        }
        if rows.insert(id, (lno, xy)).is_some() {
            return Err(parse_err(lno, format!("duplicate id {id}")));
        }
        if rows.len() > n {
            return Err(parse_err(lno, format!("more than {n} player rows")));
        }
    }
    if rows.len() != n {
        return Err(parse_err(
            text.lines().count().max(1),
            format!("header declares {n} players, found {}", rows.len()),
        ));
    }
    let base = *rows.keys().next().unwrap();
    let (&top, &(top_line, _)) = rows.iter().next_back().unwrap();
    if base > 1 || top != base + n - 1 {
        return Err(parse_err(
            top_line,
            format!("ids must run densely from 0 or 1; found {base}..={top}"),
        ));
    }
    let players = rows
        .into_iter()
        .map(|(id, (_, xy))| PlayerSpec {
            id: id - base,
            origin: Point::new(xy[0], xy[1]),
            destination: Point::new(xy[2], xy[3]),
        })
        .collect();
    Instance::new(players, q as usize)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct RawTable {
    n: usize,
    coalitions: Vec<RawEntry>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct RawEntry {
    members: Vec<i64>,
    cost: f64,
}

/// A game given directly by its characteristic function.
#[derive(Debug, Clone, PartialEq)]
pub struct CharTableInput {
    pub n: usize,
    /// One entry per non-empty coalition, ascending by mask.
    pub entries: Vec<(Coalition, f64)>,
}

impl CharTableInput {
    pub fn to_table(&self) -> Result<CharTable> {
        CharTable::from_pairs(self.n, &self.entries)
    }

    pub fn to_json(&self) -> String {
        let raw = RawTable {
            n: self.n,
            coalitions: self
                .entries
                .iter()
                .map(|&(s, cost)| RawEntry {
                    members: s.members().map(|i| i as i64 + 1).collect(),
                    cost,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}

/// Parses `{"n": .., "coalitions": [{"members": [..], "cost": ..}, ..]}`
/// with 1-based members. All offending entries are reported together.
pub fn parse_char_table(text: &str) -> Result<CharTableInput> {
    let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let n = raw.n;
    if n == 0 {
        return Err(Error::Table(vec!["n must be at least 1".into()]));
    }
    if n > MAX_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "players",
            value: n,
            max: MAX_PLAYERS,
        });
    }
    let mut offenders = Vec::new();
    let mut seen: BTreeMap<u32, f64> = BTreeMap::new();
    for (k, e) in raw.coalitions.iter().enumerate() {
        let bad: Vec<i64> = e
            .members
            .iter()
            .copied()
            .filter(|&m| m < 1 || m > n as i64)
            .collect();
        if !bad.is_empty() {
            offenders.push(format!("entry {k}: out-of-range members {bad:?}"));
            continue;
        }
        if e.members.is_empty() {
            offenders.push(format!("entry {k}: empty coalition"));
            continue;
        }
        if !e.cost.is_finite() || e.cost < 0.0 {
            offenders.push(format!("entry {k}: negative or non-finite cost {}", e.cost));
            continue;
        }
        let s = Coalition::from_members(e.members.iter().map(|&m| (m - 1) as usize));
        if let Some(prev) = seen.insert(s.mask(), e.cost) {
            if prev != e.cost {
                offenders.push(format!("entry {k}: conflicting duplicate for {s}"));
            }
        }
    }
    for mask in 1u32..(1u32 << n) {
        if !seen.contains_key(&mask) {
            offenders.push(format!("missing coalition {}", Coalition::from_mask(mask)));
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Table(offenders));
    }
    Ok(CharTableInput {
        n,
        entries: seen
            .into_iter()
            .map(|(m, c)| (Coalition::from_mask(m), c))
            .collect(),
    })
}
